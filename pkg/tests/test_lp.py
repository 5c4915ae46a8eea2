import numpy as np
import pytest
from hypothesis import given, settings
from scipy.optimize import linprog

from witnesscopula import (SIGNED, UPPER, SolverError, SpecError, WeightSystem,
                           benchmark_5d_family, benchmark_expected_weights, complete_recovery_report,
                           make_key, signed_all_pairs_family, tail_values_from_weights,
                           upper_all_pairs_family)
from witnesscopula.keys import iter_keys
from witnesscopula.lp import (TargetSpec, build_model, feasibility_decision, margin_targets,
                              repaired_targets, solve_spec)
from witnesscopula.realization import check_margins
from witnesscopula.simplex import Status

from conftest import weight_systems, with_margins


def K(active, pattern):
    return make_key(active, list(pattern))


def bench_spec(alpha, **kw):
    fam = benchmark_5d_family(alpha)
    return TargetSpec(5, targets=dict(fam.items()), **kw)


PARTIAL = {K((1, 2), "UU"): 0.5, K((1, 3), "UL"): 0.5, K((2, 3), "LU"): 0.5}


# -- model layout ----------------------------------------------------------------

def test_model_counts_complete_benchmark():
    model = build_model(bench_spec(0.20, p0=0.10))
    assert model.n_variables == 242
    assert model.n_equalities == 242
    assert model.n_inequalities == 1
    assert model.b_ub[0] == pytest.approx(10.0)
    np.testing.assert_array_equal(model.A_ub[0], np.ones(242))


def test_model_counts_partial():
    model = build_model(TargetSpec(3, targets=PARTIAL))
    assert model.n_variables == 26
    assert model.n_equalities == 9
    assert model.n_inequalities == 0
    # margin rows first, then targets
    assert list(model.eq_keys[:6]) == list(margin_targets(3))


@pytest.mark.parametrize("m", [1, 2, 3])
def test_model_counts_l1(m):
    targets = dict(list(PARTIAL.items())[:m])
    model = build_model(TargetSpec(3, targets=targets, mode="l1"))
    assert model.n_variables == 26 + 2 * m
    assert model.n_equalities == 6 + m
    row = model.A_eq[6]
    assert row[26] == -1 and row[26 + m] == 1


def test_model_costs():
    model = build_model(TargetSpec(2, mode="min_total_mass"))
    assert np.all(model.c == 1)
    costs = {K((1, 2), "LL"): 2.5}
    model = build_model(TargetSpec(2, mode="min_total_mass", costs=costs))
    want = np.zeros(8)
    want[list(iter_keys(2)).index(K((1, 2), "LL"))] = 2.5
    np.testing.assert_array_equal(model.c, want)


def test_margin_targets():
    assert len(margin_targets(4)) == 8
    assert set(margin_targets(3, UPPER)) == {K((i,), "U") for i in (1, 2, 3)}


# -- validation ------------------------------------------------------------------

def test_spec_validation():
    with pytest.raises(SpecError):
        TargetSpec(2, targets={K((1,), "L"): 0.9})  # conflicts with the exact margin
    TargetSpec(2, targets={K((1,), "L"): 0.9}, enforce_margins=False)
    TargetSpec(2, targets={K((1,), "L"): 0.9}, mode="l1")
    with pytest.raises(SpecError):
        TargetSpec(2, targets={K((3,), "L"): 1.0})
    with pytest.raises(SpecError):
        TargetSpec(2, UPPER, targets={K((1, 2), "LU"): 0.1})
    with pytest.raises(SpecError):
        TargetSpec(2, mode="bogus")
    with pytest.raises(SpecError):
        TargetSpec(2, p0=0.0)
    with pytest.raises(SpecError):
        TargetSpec(2, targets={K((1, 2), "LL"): float("nan")})


def test_calibration_and_cost_validation():
    t = {K((1, 2), "LL"): 0.2}
    with pytest.raises(SpecError):
        TargetSpec(2, targets=t, mode="l1", calibration_weights={K((1, 2), "LL"): 0})
    with pytest.raises(SpecError):
        TargetSpec(2, targets=t, mode="l1", calibration_weights={K((1, 2), "UU"): 1})
    with pytest.raises(SpecError):
        TargetSpec(2, mode="min_total_mass", costs={K((1, 2), "UU"): -1})


def test_from_pairs_rejects_duplicates():
    spec = TargetSpec.from_pairs(2, [(((1, 2), "LL"), 0.2)])
    assert spec.targets == {K((1, 2), "LL"): 0.2}
    with pytest.raises(SpecError):
        TargetSpec.from_pairs(2, [(((1, 2), "LL"), 0.2), (((1, 2), "LL"), 0.3)])


# -- benchmark decisions --------------------------------------------------------------

@pytest.mark.parametrize("alpha,ok", [(0.0, True), (0.10, True), (0.20, True), (0.24, True),
                                      (0.25, True), (0.26, False)])
def test_benchmark_feasibility_matches_inversion(alpha, ok):
    feasible, w = feasibility_decision(bench_spec(alpha, p0=0.10))
    assert feasible is ok
    assert complete_recovery_report(benchmark_5d_family(alpha)).success is ok
    if ok:
        expected = benchmark_expected_weights(alpha)
        assert max(abs(w[k] - expected[k]) for k in iter_keys(5)) <= 1e-9


def test_benchmark_024_optimal():
    sol = solve_spec(bench_spec(0.24, p0=0.10))
    assert sol.status is Status.OPTIMAL and sol.objective_value == 0


def test_benchmark_026_infeasible():
    sol = solve_spec(bench_spec(0.26, p0=0.10))
    assert sol.status is Status.INFEASIBLE and sol.weights is None


def test_p0_row_binds():
    # alpha = 0.10 has S = 5.2, so p0 = 0.2 (bound 5) is inadmissible
    feasible, _ = feasibility_decision(bench_spec(0.10, p0=0.20))
    assert not feasible
    assert feasibility_decision(bench_spec(0.20, p0=0.20))[0]


def test_l1_repair_of_infeasible_benchmark():
    spec = bench_spec(0.26, p0=0.10, mode="l1")
    sol = solve_spec(spec)
    assert sol.optimal and sol.objective_value > 1e-6
    w = sol.weights
    assert all(v >= 0 for _, v in w.items())
    assert check_margins(w).ok
    assert 1 - 0.10 * w.total_mass >= -1e-12
    for key in spec.targets:
        assert sol.absolute_errors[key] == pytest.approx(abs(sol.slacks_plus[key] - sol.slacks_minus[key]))
    repaired = repaired_targets(spec, sol)
    again = spec.replace(targets=repaired, mode="feasibility")
    assert feasibility_decision(again)[0]
    doc = sol.to_dict()
    assert doc["status"] == "optimal" and len(doc["deviations"]) == 242


def test_l1_objective_equals_weighted_deviation():
    spec = bench_spec(0.26, p0=0.10, mode="l1")
    sol = solve_spec(spec)
    attained = tail_values_from_weights(sol.weights, list(spec.targets))
    total = sum(abs(attained[k] - v) for k, v in spec.targets.items())
    assert sol.objective_value == pytest.approx(total, abs=1e-9)


def test_l1_calibration_weights_shift_the_error():
    # two incompatible unit targets on the same cell; the heavier one wins
    t = {K((1, 2), "UU"): 0.9, K((1, 2, 3), "UUU"): 0.1}
    base = TargetSpec(3, targets=t, mode="l1", enforce_margins=False)
    heavy = base.replace(calibration_weights={K((1, 2, 3), "UUU"): 1.0, K((1, 2), "UU"): 5.0})
    sol = solve_spec(heavy)
    assert sol.optimal and sol.absolute_errors[K((1, 2), "UU")] == pytest.approx(0, abs=1e-9)


# -- discussion bounds ---------------------------------------------------------------

@pytest.mark.parametrize("beta,ok", [(0.25, True), (0.26, False)])
def test_signed_all_pairs_bound(beta, ok):
    fam = signed_all_pairs_family(3, beta)
    assert feasibility_decision(TargetSpec(3, targets=dict(fam.items())))[0] is ok


@pytest.mark.parametrize("beta,ok", [(0.50, True), (0.51, False)])
def test_upper_all_pairs_bound(beta, ok):
    fam = upper_all_pairs_family(3, beta)
    assert feasibility_decision(TargetSpec(3, UPPER, targets=dict(fam.items())))[0] is ok


# -- minimum mass ---------------------------------------------------------------------

def test_min_mass_partial_d3():
    sol = solve_spec(TargetSpec(3, targets=PARTIAL, mode="min_total_mass"))
    assert sol.optimal
    assert sol.objective_value == pytest.approx(2.0, abs=1e-9)
    lam = tail_values_from_weights(sol.weights, list(PARTIAL) + list(margin_targets(3)))
    assert all(lam[k] == pytest.approx(v, abs=1e-9) for k, v in PARTIAL.items())


OPPOSITE_PAIRS = {K((1, 2), "UL"): 1.0, K((1, 2), "LU"): 1.0,
                  K((3, 4), "UL"): 1.0, K((3, 4), "LU"): 1.0}


def test_min_mass_sparse_completion_of_opposite_pairs():
    sol = solve_spec(TargetSpec(5, targets=OPPOSITE_PAIRS, mode="min_total_mass", p0=0.10))
    assert sol.optimal
    # coordinate 1 alone needs one unit of L mass and one of U mass on distinct generators
    assert sol.objective_value == pytest.approx(2.0, abs=1e-9)
    assert sol.weights.total_mass < 4.4
    lam = tail_values_from_weights(sol.weights, list(OPPOSITE_PAIRS) + list(margin_targets(5)))
    assert all(v == pytest.approx(1.0, abs=1e-9) for _, v in lam.items())


def test_min_mass_matches_reference_solver():
    fam = benchmark_5d_family(0.20)
    pairs = {k: v for k, v in fam.items() if k.order == 2}
    model = build_model(TargetSpec(5, targets=pairs, mode="min_total_mass", p0=0.10))
    ref = linprog(model.c, A_eq=model.A_eq, b_eq=model.b_eq, A_ub=model.A_ub, b_ub=model.b_ub,
                  method="highs")
    sol = solve_spec(TargetSpec(5, targets=pairs, mode="min_total_mass", p0=0.10))
    assert sol.objective_value == pytest.approx(ref.fun, abs=1e-9)


def test_solver_error_on_iteration_cap():
    with pytest.raises(SolverError):
        feasibility_decision(bench_spec(0.2), max_iter=1)
    sol = solve_spec(bench_spec(0.2), max_iter=1)
    assert sol.status is Status.NUMERICAL_FAILURE


def test_deterministic_solution_bytes():
    spec = TargetSpec(3, targets=PARTIAL, mode="min_total_mass")
    assert solve_spec(spec).to_json() == solve_spec(spec).to_json()


# -- properties ----------------------------------------------------------------------

@settings(max_examples=30)
@given(weight_systems(d_values=(2, 3), alphabets=(SIGNED,)))
def test_property_realized_family_is_feasible(w):
    w = with_margins(w)
    lam = tail_values_from_weights(w)
    feasible, got = feasibility_decision(TargetSpec(w.d, targets=dict(lam.items())))
    assert feasible
    # complete targets pin the weights down uniquely
    assert max(abs(got[k] - w[k]) for k in iter_keys(w.d)) <= 1e-7


@settings(max_examples=30)
@given(weight_systems(d_values=(2, 3), alphabets=(SIGNED,)))
def test_property_l1_zero_objective_on_realizable(w):
    w = with_margins(w)
    lam = tail_values_from_weights(w)
    targets = {k: v for k, v in lam.items() if k.order > 1}
    sol = solve_spec(TargetSpec(w.d, targets=targets, mode="l1"))
    assert sol.optimal and sol.objective_value == pytest.approx(0, abs=1e-7)


@settings(max_examples=30)
@given(weight_systems(d_values=(2, 3), alphabets=(SIGNED,)))
def test_property_min_mass_not_above_generator(w):
    w = with_margins(w)
    lam = tail_values_from_weights(w)
    targets = {k: v for k, v in lam.items() if k.order == 2}
    sol = solve_spec(TargetSpec(w.d, targets=targets, mode="min_total_mass"))
    assert sol.optimal and sol.weights.total_mass <= w.total_mass + 1e-7
