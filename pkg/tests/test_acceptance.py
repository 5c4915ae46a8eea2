"""Acceptance criteria, one test per criterion.

Each test records a ``PASS``/``FAIL`` line that is printed immediately and
again in the pytest terminal summary.  Run directly with
``python tests/test_acceptance.py`` or through ``pytest tests/test_acceptance.py``.
"""
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
from scipy import stats

sys.path.insert(0, str(Path(__file__).parent))

from conftest import ACCEPTANCE_LINES, load_matrix, random_weights, with_margins  # noqa: E402
from witnesscopula import (SIGNED, UPPER, TargetSpec, WeightSystem, admissible_p_max,  # noqa: E402
                           benchmark_5d_family, benchmark_expected_weights, build_incidence_matrix,
                           check_margins, enumerate_keys, feasibility_decision, invert_complete,
                           marginalize, make_key, mobius_transform, q_from_weights,
                           run_benchmark_report, run_variable_p_diagnostics, sample_canonical,
                           signed_all_pairs_family, solve_spec, tail_values_from_weights,
                           upper_all_pairs_family)
from witnesscopula.keys import iter_keys, mobius_matrix, state_to_key  # noqa: E402
from witnesscopula.lp import repaired_targets  # noqa: E402
from witnesscopula.simulation import cell_counts  # noqa: E402

TABLE_ALPHAS = (0.0, 0.10, 0.20, 0.24, 0.25, 0.26)
TABLE_CENTRAL = (0.400, 0.480, 0.560, 0.592, 0.600, 0.608)


def record(number: int, ok: bool, detail: str, started: float) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail} ({time.perf_counter() - started:.2f} s)"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def test_criterion_01_counting():
    t = time.perf_counter()
    sizes = [len(enumerate_keys(d, SIGNED)) for d in range(2, 9)]
    ok = sizes == [8, 26, 80, 242, 728, 2186, 6560] and time.perf_counter() - t < 1
    record(1, ok, f"signed key counts for d=2..8 are {sizes}", t)


def test_criterion_02_golden_matrices():
    t = time.perf_counter()
    checks = {name: np.array_equal(build_incidence_matrix(d, alphabet=a).entries, load_matrix(name))
              for d, a, name in ((2, SIGNED, "A2"), (3, SIGNED, "A3"), (4, UPPER, "A4U"))}
    ok = all(checks.values()) and time.perf_counter() - t < 1
    record(2, ok, f"golden matrices match entry-for-entry: {checks}", t)


def test_criterion_03_zeta_mobius_identity():
    t = time.perf_counter()
    bad = []
    for d in (1, 2, 3, 4):
        for a in (SIGNED, UPPER):
            zeta = build_incidence_matrix(d, alphabet=a).entries
            mob = mobius_matrix(d, a)
            if zeta.dtype.kind != "i" or not np.array_equal(zeta @ mob, np.eye(len(zeta), dtype=zeta.dtype)):
                bad.append((d, "".join(a)))
    ok = not bad and time.perf_counter() - t < 5
    record(3, ok, f"integer zeta x Moebius = identity for d<=4, both alphabets; failures {bad}", t)


def test_criterion_04_round_trip():
    t = time.perf_counter()
    rng = np.random.default_rng(4)
    worst_trip = worst_agree = 0.0
    for d in (2, 3, 4, 5):
        keys = list(iter_keys(d))
        for _ in range(200):
            w = random_weights(rng, d, SIGNED, density=rng.uniform(0.2, 1.0))
            lam = tail_values_from_weights(w)
            tri, mob = invert_complete(lam), mobius_transform(lam)
            worst_trip = max(worst_trip, max(abs(tri[k] - w[k]) for k in keys))
            worst_agree = max(worst_agree, max(abs(tri[k] - mob[k]) for k in keys))
    ok = worst_trip <= 1e-10 and worst_agree <= 1e-10 and time.perf_counter() - t < 30
    record(4, ok, f"800 systems, max round-trip error {worst_trip:.2e}, "
                  f"max triangular/Moebius gap {worst_agree:.2e}", t)


def test_criterion_05_table_deterministic():
    t = time.perf_counter()
    rows = [run_benchmark_report(a, p0=0.10, runs=0) for a in TABLE_ALPHAS]
    mins = [r.min_weight for r in rows]
    min_ok = all(abs(m) <= 1e-12 for m in mins[:5]) and abs(mins[5] + 0.04) <= 1e-12
    verdicts = [(r.inversion_feasible, r.lp_feasible) for r in rows]
    verdict_ok = verdicts == [(True, True)] * 5 + [(False, False)]
    central_ok = all(abs(r.central_mass - c) <= 1e-12 for r, c in zip(rows, TABLE_CENTRAL))
    ok = min_ok and verdict_ok and central_ok and time.perf_counter() - t < 10
    record(5, ok, f"min weights {[round(m, 12) for m in mins]}, verdicts {verdicts}, "
                  f"central masses {[round(r.central_mass, 12) for r in rows]}", t)


def test_criterion_06_table_monte_carlo():
    t = time.perf_counter()
    rep = run_benchmark_report(0.20, p0=0.10, runs=20, samples=500_000, seed=12345, workers=4)
    ok = rep.mc_mean_p0 <= 0.02 and rep.mc_mean_half <= 0.03 and time.perf_counter() - t < 300
    record(6, ok, f"R=20, M=5e5: mean max error {rep.mc_mean_p0:.4f} (sd {rep.mc_sd_p0:.4f}) at p0, "
                  f"{rep.mc_mean_half:.4f} (sd {rep.mc_sd_half:.4f}) at p0/2", t)


def test_criterion_07_fixed_scale_invariance():
    t = time.perf_counter()
    w = benchmark_expected_weights(0.20)
    rep = run_variable_p_diagnostics(w, 0.10, [0.10, 0.05, 0.025], 500_000, seed=777)
    worst_z, leakage = 0.0, 0.0
    for row in rep.rows:
        for key in row.theoretical.keys():
            theory = float(row.theoretical[key])
            if abs(theory) > 0:
                z = abs(row.empirical[key] - theory) / row.standard_errors[key]
                worst_z = max(worst_z, z)
            if key.order >= 4:
                leakage = max(leakage, abs(row.empirical[key]))
    ok = worst_z <= 4 and leakage == 0 and time.perf_counter() - t < 120
    record(7, ok, f"one sample at p in {rep.p_grid}: worst |error|/SE {worst_z:.2f}, "
                  f"order-4/5 leakage {leakage}", t)


def test_criterion_08_admissibility_boundary():
    t = time.perf_counter()
    low = q_from_weights(benchmark_expected_weights(Fraction(1, 5)), Fraction(1, 5)).central_mass
    rejected = 1 - Fraction(1, 5) * benchmark_expected_weights(Fraction(1, 10)).total_mass
    bad = run_benchmark_report(0.10, p0=0.20, runs=0)
    good = run_benchmark_report(0.20, p0=0.20, runs=0)
    # at p0 = 0.2 the admissible range is 1 - 0.2 (6 - 8 alpha) >= 0, i.e. alpha >= 1/8
    edge = 1 - Fraction(1, 5) * benchmark_expected_weights(Fraction(1, 8)).total_mass
    ok = (rejected == Fraction(-1, 25) and low == Fraction(3, 25) and edge == 0
          and not bad.inversion_feasible and not bad.lp_feasible
          and good.inversion_feasible and good.lp_feasible)
    record(8, ok, f"p0=0.2: alpha=0.10 central {rejected} rejected, alpha=0.20 central {low} "
                  f"accepted, alpha=1/8 central {edge}", t)


def test_criterion_09_p_max_law():
    t = time.perf_counter()
    alphas = [Fraction(n, 40) for n in range(11)]
    law = all(admissible_p_max(benchmark_expected_weights(a)) == 1 / (6 - 8 * a) for a in alphas)
    recovered = all(admissible_p_max(invert_complete(benchmark_5d_family(a))) == 1 / (6 - 8 * a)
                    for a in alphas[::5])
    single = {}
    for d in (1, 2, 3, 4, 5, 6):
        w = WeightSystem(d, SIGNED, {k: Fraction(1) for k in iter_keys(d, orders=[1])})
        single[d] = admissible_p_max(w)
    single_ok = all(v == Fraction(1, 2 * d) for d, v in single.items())
    ok = law and recovered and single_ok
    record(9, ok, f"exact p_max = 1/(6-8 alpha) on alpha in [0,1/4]: {law and recovered}; "
                  f"singleton p_max {[str(v) for v in single.values()]}", t)


def test_criterion_10_discussion_bounds():
    t = time.perf_counter()
    got = {}
    for beta in (0.25, 0.26):
        fam = signed_all_pairs_family(3, beta)
        got[f"signed {beta}"] = feasibility_decision(TargetSpec(3, SIGNED, dict(fam.items())))[0]
    for beta in (0.50, 0.51):
        fam = upper_all_pairs_family(3, beta)
        got[f"upper {beta}"] = feasibility_decision(TargetSpec(3, UPPER, dict(fam.items())))[0]
    want = {"signed 0.25": True, "signed 0.26": False, "upper 0.5": True, "upper 0.51": False}
    ok = got == want and time.perf_counter() - t < 5
    record(10, ok, f"LP decisions {got}", t)


def test_criterion_11_l1_repair():
    t = time.perf_counter()
    spec = TargetSpec(5, SIGNED, dict(benchmark_5d_family(0.26).items()), p0=0.10, mode="l1")
    sol = solve_spec(spec)
    w = sol.weights
    margins = check_margins(w).ok if w is not None else False
    central = 1 - 0.10 * w.total_mass if w is not None else float("nan")
    again = False
    if sol.optimal:
        exact = spec.replace(targets=repaired_targets(spec, sol), mode="feasibility")
        again = feasibility_decision(exact)[0]
    ok = (sol.optimal and sol.objective_value > 1e-6 and margins and central >= 0 and again
          and time.perf_counter() - t < 10)
    record(11, ok, f"status {sol.status.value}, objective {sol.objective_value}, margins exact "
                   f"{margins}, central {central:.4f}, repaired family feasible {again}", t)


def test_criterion_12_marginalization():
    t = time.perf_counter()
    w = benchmark_expected_weights(0.20)
    proj, index = marginalize(w, {1, 2, 5})
    full = tail_values_from_weights(w)
    back = {v: k for k, v in index.items()}
    worst = max(abs(v - full[make_key([back[i] for i in k.active], k.pattern)])
                for k, v in tail_values_from_weights(proj).items())
    ok = worst <= 1e-12 and time.perf_counter() - t < 1
    record(12, ok, f"projection to {{1,2,5}}: max coefficient gap {worst:.1e}", t)


def test_criterion_13_sampler_statistics():
    t = time.perf_counter()
    rng = np.random.default_rng(13)
    w = with_margins(random_weights(rng, 3, SIGNED, density=0.7))
    p0 = 0.5 / max(2.0, w.total_mass)
    n = 100_000
    s = sample_canonical(w, p0, n, seed=1313)
    ks = [float(stats.kstest(s.values[:, j], "uniform").pvalue) for j in range(3)]

    q = q_from_weights(w, p0)
    counts = cell_counts(s, p0)
    states = [st for st, m in q.masses.items() if m > 0]
    obs = [counts[state_to_key(st)] if state_to_key(st) else n - sum(v for _, v in counts.items())
           for st in states]
    chi = stats.chisquare(obs, [n * float(q.masses[st]) for st in states]).pvalue

    gap = 0.0
    for c, key in enumerate(s.components):
        rows = s.values[s.labels == c]
        if len(rows):
            refl = np.column_stack([rows[:, i - 1] if sgn == "L" else 1 - rows[:, i - 1]
                                    for i, sgn in zip(key.active, key.pattern)])
            gap = max(gap, float(np.max(np.ptp(refl, axis=1))))
    ok = min(ks) > 0.001 and chi > 0.001 and gap <= 4 * np.finfo(float).eps
    record(13, ok, f"n=1e5, d=3: KS p-values {[round(p, 3) for p in ks]}, chi-squared p {chi:.3f} "
                   f"over {len(states)} cells, max ray gap {gap:.1e}", t)


if __name__ == "__main__":
    import pytest
    sys.exit(pytest.main([__file__, "-q", "-s"]))
