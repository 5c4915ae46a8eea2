"""Exact sampling of the canonical witness copula and Monte Carlo diagnostics.

Randomness comes from numpy's PCG64 bit generator seeded through
``numpy.random.SeedSequence``; independent runs use ``SeedSequence.spawn``
substreams indexed by run number.  Within a draw of ``n`` rows the order of
consumption is fixed: ``n`` label uniforms, then ``n`` ray factors, then an
``n x d`` block of middle-interval uniforms.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from typing import List, Mapping, Optional, Sequence, Union

import numpy as np

from .exceptions import InadmissibleError, SpecError
from .families import TailFamily, WeightSystem, complete_template
from .inversion import NONNEG_TOL, complete_recovery_report, tail_values_from_weights
from .keys import SIGNED, UPPER, TailKey, iter_keys, make_key, state_to_key
from .lp import TargetSpec, feasibility_decision
from .realization import CENTRAL_TOL, TernaryMassTable, check_threshold

SeedLike = Union[None, int, np.random.SeedSequence]
ZERO_TOL = 1e-14


def make_rng(seed: SeedLike = None) -> np.random.Generator:
    """PCG64 generator; ``seed`` may be an int, a SeedSequence or None (fresh entropy)."""
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return np.random.Generator(np.random.PCG64(ss))


def run_streams(seed: SeedLike, runs: int) -> list:
    """One child SeedSequence per run index."""
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return ss.spawn(runs)


@dataclass(frozen=True)
class SampleMatrix:
    """Immutable ``n x d`` sample with the component label of each row.

    ``labels[r]`` indexes ``components``; the value ``len(components)`` marks
    the central component.
    """

    values: np.ndarray
    labels: np.ndarray
    components: tuple

    def __post_init__(self):
        for arr in (self.values, self.labels):
            arr.setflags(write=False)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]

    def to_csv(self, fmt: str = "%.17g") -> str:
        header = ",".join(f"u{j}" for j in range(1, self.d + 1))
        rows = [",".join(fmt % v for v in row) for row in self.values]
        return header + "\n" + "\n".join(rows) + "\n"


def _component_table(w: WeightSystem, p0):
    keys = [k for k, v in w.items() if v > 0]
    for k, v in w.items():
        if v < -NONNEG_TOL:
            raise InadmissibleError(f"negative weight {float(v):.6g} at {k.render()}")
    probs = np.array([p0 * float(w.entries[k]) for k in keys] + [0.0])
    central = 1.0 - probs[:-1].sum()
    if central < -CENTRAL_TOL:
        raise InadmissibleError(
            f"central mass {central:.6g} is negative; p0={p0} is not admissible")
    probs[-1] = max(central, 0.0)
    cumulative = np.cumsum(probs)
    cumulative /= cumulative[-1]
    return keys, cumulative


def _draw_labels(cumulative: np.ndarray, u: np.ndarray) -> np.ndarray:
    # side="left": a uniform landing exactly on a boundary goes to the earlier index
    return np.minimum(np.searchsorted(cumulative, u, side="left"), len(cumulative) - 1)


def sample_canonical(w: WeightSystem, p0: float, n: int, seed: SeedLike = None) -> SampleMatrix:
    """Draw ``n`` rows from the canonical witness copula of ``w`` at threshold ``p0``.

    Each row picks a generator with probability ``p0 * w`` (or the central
    component with the residual mass).  Active coordinates share one uniform
    ``Z``: ``p0 * Z`` on a lower sign and ``1 - p0 * Z`` on an upper sign.
    Every other coordinate is uniform on ``[p0, 1 - p0]``.
    """
    check_threshold(p0)
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise SpecError(f"sample count must be a positive integer, got {n!r}")
    n = int(n)
    keys, cumulative = _component_table(w, p0)
    d = w.d
    active = np.zeros((len(keys) + 1, d), dtype=bool)
    upper = np.zeros((len(keys) + 1, d), dtype=bool)
    for r, key in enumerate(keys):
        for i, s in zip(key.active, key.pattern):
            active[r, i - 1] = True
            upper[r, i - 1] = s == "U"

    rng = make_rng(seed)
    u = rng.random(n)
    z = rng.random(n)[:, None]
    v = rng.random((n, d))
    labels = _draw_labels(cumulative, u)
    middle = p0 + (1.0 - 2.0 * p0) * v
    ray = np.where(upper[labels], 1.0 - p0 * z, p0 * z)
    values = np.where(active[labels], ray, middle)
    return SampleMatrix(values, labels, tuple(keys))


def _as_values(samples) -> np.ndarray:
    values = samples.values if isinstance(samples, SampleMatrix) else np.asarray(samples, dtype=float)
    if values.ndim != 2 or values.shape[0] < 1:
        raise SpecError("samples must be a nonempty two-dimensional array")
    return values


def cell_counts(samples, p: float) -> WeightSystem:
    """Integer counts of rows per non-central ternary cell at level ``p``.

    Tails are closed: ``[0, p]`` and ``[1 - p, 1]``.
    """
    if not 0 < p < 0.5:
        raise SpecError(f"level p must lie in (0, 1/2), got {p!r}")
    values = _as_values(samples)
    d = values.shape[1]
    digits = (values <= p).astype(np.int64) + 2 * (values >= 1.0 - p).astype(np.int64)
    codes = digits @ (3 ** np.arange(d, dtype=np.int64))  # base-3 word, coordinate 1 lowest
    if d <= 12:
        counts = np.bincount(codes, minlength=3 ** d)
        cells = np.flatnonzero(counts)
        counts = counts[cells]
    else:
        cells, counts = np.unique(codes, return_counts=True)
    symbols = "MLU"
    out = {}
    for code, count in zip(cells.tolist(), counts.tolist()):
        if code == 0:
            continue
        word = []
        for _ in range(d):
            code, r = divmod(code, 3)
            word.append(symbols[r])
        out[state_to_key(word)] = count
    return WeightSystem(values.shape[1], SIGNED, out)


def empirical_lambda(samples, p: float, targets: Optional[Sequence[TailKey]] = None) -> TailFamily:
    """Estimate ``lambda_hat = #{rows in the tail box} / (M p)`` for each target.

    Counts are exact integers; the single division happens at the end.
    """
    values = _as_values(samples)
    counts = cell_counts(values, p)
    if targets is None:
        targets = list(iter_keys(counts.d, SIGNED))
    hits = tail_values_from_weights(counts, list(targets))
    scale = values.shape[0] * p
    return TailFamily(counts.d, SIGNED, {k: c / scale for k, c in hits.items()})


def binomial_standard_error(lam: float, p: float, m: int) -> float:
    """Standard deviation of ``lambda_hat`` when the tail count is Binomial(m, lam p)."""
    q = min(max(lam * p, 0.0), 1.0)
    return math.sqrt(q * (1.0 - q) / m) / p


@dataclass(frozen=True)
class DiagnosticsRow:
    p: float
    theoretical: TailFamily
    empirical: TailFamily
    max_abs_error: float
    max_abs_error_nonzero: float
    max_abs_leakage_zero: float
    standard_errors: Mapping[TailKey, float]

    def to_dict(self) -> dict:
        return {"p": self.p, "max_abs_error": self.max_abs_error,
                "max_abs_error_nonzero": self.max_abs_error_nonzero,
                "max_abs_leakage_zero": self.max_abs_leakage_zero,
                "targets": [{"key": k.render(), "theoretical": float(self.theoretical[k]),
                             "empirical": float(self.empirical[k]),
                             "standard_error": self.standard_errors[k]}
                            for k in self.theoretical.keys()]}


@dataclass(frozen=True)
class DiagnosticsReport:
    d: int
    p0: float
    n: int
    rows: List[DiagnosticsRow] = field(default_factory=list)

    @property
    def p_grid(self) -> list:
        return [r.p for r in self.rows]

    def to_dict(self) -> dict:
        return {"d": self.d, "p0": self.p0, "n": self.n,
                "rows": [r.to_dict() for r in self.rows]}


def run_variable_p_diagnostics(w: WeightSystem, p0: float, p_grid: Sequence[float], n: int,
                               targets: Optional[Sequence[TailKey]] = None,
                               seed: SeedLike = None) -> DiagnosticsReport:
    """Compare one sample set against the constant theoretical family at each grid level."""
    grid = [float(p) for p in p_grid]
    if not grid:
        raise SpecError("p grid must be nonempty")
    for p in grid:
        if not 0 < p <= p0:
            raise SpecError(f"grid point {p} is outside (0, p0={p0}]")
    sample = sample_canonical(w, p0, n, seed)
    targets = list(iter_keys(w.d, SIGNED)) if targets is None else list(targets)
    # upper-only systems are a special case of signed ones; lift to test any target
    theory = tail_values_from_weights(WeightSystem(w.d, SIGNED, w.entries), targets)
    nonzero = [k for k in targets if abs(theory[k]) > ZERO_TOL]
    zero = [k for k in targets if abs(theory[k]) <= ZERO_TOL]
    rows = []
    for p in grid:
        emp = empirical_lambda(sample, p, targets)
        err = {k: abs(emp[k] - theory[k]) for k in targets}
        rows.append(DiagnosticsRow(
            p=p, theoretical=theory, empirical=emp,
            max_abs_error=max(err.values(), default=0.0),
            max_abs_error_nonzero=max((err[k] for k in nonzero), default=0.0),
            max_abs_leakage_zero=max((abs(emp[k]) for k in zero), default=0.0),
            standard_errors={k: binomial_standard_error(float(theory[k]), p, sample.n)
                             for k in targets}))
    return DiagnosticsReport(w.d, float(p0), sample.n, rows)


def sample_grid_states(q: Union[TernaryMassTable, Mapping], n: int, seed: SeedLike = None) -> list:
    """I.i.d. ternary words drawn from a (normalized) cell-mass table."""
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise SpecError(f"sample count must be a positive integer, got {n!r}")
    masses = q.masses if isinstance(q, TernaryMassTable) else q
    states = [tuple(s) for s in masses]
    probs = np.array([float(masses[s]) for s in masses])
    if np.any(probs < -CENTRAL_TOL):
        raise InadmissibleError("mass table has negative entries")
    probs = np.maximum(probs, 0.0)
    if probs.sum() <= 0:
        raise SpecError("mass table has zero total mass")
    cumulative = np.cumsum(probs) / probs.sum()
    rng = make_rng(seed)
    idx = _draw_labels(cumulative, rng.random(int(n)))
    return [states[i] for i in idx]


# -- benchmark families -------------------------------------------------------

_BENCH_TRIPLES = [((1, 2, 5), "ULU"), ((1, 2, 5), "ULL"), ((1, 2, 5), "LUU"), ((1, 2, 5), "LUL"),
                  ((3, 4, 5), "ULU"), ((3, 4, 5), "ULL"), ((3, 4, 5), "LUU"), ((3, 4, 5), "LUL")]
_BENCH_PAIRS = [((1, 2), "UL"), ((1, 2), "LU"), ((3, 4), "UL"), ((3, 4), "LU")]


def benchmark_5d_family(alpha) -> TailFamily:
    """Complete signed five-dimensional benchmark family with coupling ``alpha``.

    Opposite-sign pairs on {1,2} and {3,4} equal 1, every pair with coordinate
    5 equals ``alpha`` in all four sign patterns, the eight triples extending
    those opposite-sign pairs through coordinate 5 equal ``alpha``, and all
    other coefficients of order two or more vanish.
    """
    if alpha < 0:
        raise SpecError(f"alpha must be nonnegative, got {alpha!r}")
    overrides = {make_key(a, p): 1 for a, p in _BENCH_PAIRS}
    for i in (1, 2, 3, 4):
        for signs in product(SIGNED, repeat=2):
            overrides[make_key((i, 5), signs)] = alpha
    for a, p in _BENCH_TRIPLES:
        overrides[make_key(a, p)] = alpha
    return complete_template(5, SIGNED, overrides=overrides)


def benchmark_expected_weights(alpha) -> WeightSystem:
    """Closed-form witness weights of :func:`benchmark_5d_family` (14 nonzero entries)."""
    if alpha < 0:
        raise SpecError(f"alpha must be nonnegative, got {alpha!r}")
    w = {make_key(a, p): alpha for a, p in _BENCH_TRIPLES}
    w.update({make_key(a, p): 1 - 2 * alpha for a, p in _BENCH_PAIRS})
    w[make_key((5,), "L")] = 1 - 4 * alpha
    w[make_key((5,), "U")] = 1 - 4 * alpha
    return WeightSystem(5, SIGNED, w)


def signed_all_pairs_family(d: int, beta) -> TailFamily:
    """Unit singletons, every signed pair equal to ``beta``, higher orders zero."""
    return complete_template(d, SIGNED, overrides={
        k: beta for k in iter_keys(d, SIGNED, orders=[2])})


def upper_all_pairs_family(d: int, beta) -> TailFamily:
    """Upper-tail-only analogue of :func:`signed_all_pairs_family`."""
    return complete_template(d, UPPER, overrides={
        k: beta for k in iter_keys(d, UPPER, orders=[2])})


@dataclass(frozen=True)
class BenchmarkReport:
    alpha: float
    p0: float
    min_weight: float
    inversion_feasible: bool
    lp_feasible: bool
    central_mass: float
    total_mass: float
    max_abs_weight_diff: float
    runs: int
    samples: int
    seed: Optional[int]
    mc_errors_p0: Optional[tuple] = None
    mc_errors_half: Optional[tuple] = None
    mc_singleton_errors_p0: Optional[tuple] = None

    @staticmethod
    def _summary(errors):
        if not errors:
            return None, None
        arr = np.asarray(errors)
        sd = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
        return float(arr.mean()), sd

    @property
    def mc_mean_p0(self):
        return self._summary(self.mc_errors_p0)[0]

    @property
    def mc_sd_p0(self):
        return self._summary(self.mc_errors_p0)[1]

    @property
    def mc_mean_half(self):
        return self._summary(self.mc_errors_half)[0]

    @property
    def mc_sd_half(self):
        return self._summary(self.mc_errors_half)[1]

    def verdict(self, feasible: bool) -> str:
        return "feasible" if feasible else "infeasible"

    def to_dict(self) -> dict:
        out = {
            "alpha": self.alpha, "p0": self.p0,
            "min_recovered_weight": self.min_weight,
            "direct_inversion": self.verdict(self.inversion_feasible),
            "lp_feasibility": self.verdict(self.lp_feasible),
            "central_mass": self.central_mass,
            "total_mass": self.total_mass,
            "max_abs_weight_diff_vs_closed_form": self.max_abs_weight_diff,
            "runs": self.runs, "samples": self.samples, "seed": self.seed,
        }
        if self.mc_errors_p0 is not None:
            out.update({
                "mc_mean_max_error_p0": self.mc_mean_p0, "mc_sd_max_error_p0": self.mc_sd_p0,
                "mc_mean_max_error_half_p0": self.mc_mean_half,
                "mc_sd_max_error_half_p0": self.mc_sd_half,
                "mc_mean_singleton_error_p0": self._summary(self.mc_singleton_errors_p0)[0],
            })
        return out


def _one_run(w, p0, samples, stream, targets, theory, singletons):
    sample = sample_canonical(w, p0, samples, stream)
    out = []
    for p in (p0, p0 / 2):
        emp = empirical_lambda(sample, p, targets + singletons)
        out.append(max(abs(emp[k] - theory[k]) for k in targets))
        if p == p0:
            single = max(abs(emp[k] - 1.0) for k in singletons)
    return out[0], out[1], single


def run_benchmark_report(alpha: float, p0: float = 0.10, runs: int = 20, samples: int = 500_000,
                         seed: Optional[int] = None, workers: int = 1) -> BenchmarkReport:
    """Deterministic and Monte Carlo checks of the benchmark at one ``(alpha, p0)``.

    The Monte Carlo statistic of each run is the largest absolute error over
    the nonzero order-2 and order-3 targets, at ``p0`` and at ``p0 / 2``.
    It is computed only when the benchmark is feasible and admissible.
    """
    check_threshold(p0)
    if runs < 0 or samples < 0:
        raise SpecError("runs and samples must be nonnegative")
    lam = benchmark_5d_family(alpha)
    rec = complete_recovery_report(lam)
    w = rec.weights
    central = 1 - p0 * rec.total_mass
    inv_ok = rec.success and central >= -CENTRAL_TOL
    lp_ok, _ = feasibility_decision(TargetSpec(5, SIGNED, dict(lam.items()), p0=p0))
    expected = benchmark_expected_weights(alpha)
    diff = max(abs(w[k] - expected[k]) for k in lam.keys())

    mc0 = mch = mcs = None
    if inv_ok and runs > 0 and samples > 0:
        targets = [k for k, v in lam.items() if k.order in (2, 3) and v != 0]
        singletons = list(iter_keys(5, SIGNED, orders=[1]))
        theory = dict(lam.items())
        streams = run_streams(seed, runs)
        job = lambda s: _one_run(w, p0, samples, s, targets, theory, singletons)
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(job, streams))
        else:
            results = [job(s) for s in streams]
        mc0 = tuple(r[0] for r in results)
        mch = tuple(r[1] for r in results)
        mcs = tuple(r[2] for r in results)
    return BenchmarkReport(float(alpha), float(p0), float(rec.min_weight), bool(inv_ok),
                           bool(lp_ok), float(central), float(rec.total_mass), float(diff),
                           runs, samples, seed, mc0, mch, mcs)
