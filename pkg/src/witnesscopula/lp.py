"""Linear models over witness weights: exact feasibility, minimum mass, weighted l1 repair.

The variable layout is always the full canonical generator family first, and
in ``l1`` mode two nonnegative slack blocks ``r_plus`` and ``r_minus`` with one
entry per soft target.  Each soft row reads ``A w - r_plus + r_minus = target``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping, Optional, Sequence, Tuple

import numpy as np

from .exceptions import SolverError, SpecError
from .families import WeightSystem, _coerce_key
from .inversion import tail_values_from_weights
from .keys import SIGNED, Alphabet, TailKey, as_alphabet, build_incidence_matrix, check_key, iter_keys
from .simplex import FEAS_TOL, BackendResult, Status, solve_standard_form

MODES = ("feasibility", "min_total_mass", "l1")
MARGIN_CONFLICT_TOL = 1e-12
WEIGHT_SNAP_TOL = 1e-10


def margin_targets(d: int, alphabet: Alphabet = SIGNED) -> dict:
    """Unit singleton coefficients, one per coordinate and available sign."""
    return {k: 1.0 for k in iter_keys(d, as_alphabet(alphabet), orders=[1])}


def _keyed(mapping, d, alphabet, what) -> dict:
    out = {}
    for key, value in dict(mapping or {}).items():
        key = _coerce_key(key)
        check_key(key, d, alphabet)
        value = float(value)
        if not math.isfinite(value):
            raise SpecError(f"{what} at {key.render()} is not finite")
        out[key] = value
    return out


@dataclass(frozen=True)
class TargetSpec:
    """A (possibly partial) set of target coefficients plus the modelling choices.

    Parameters
    ----------
    d : int
        Dimension.
    alphabet : sequence of str
        ``("L", "U")`` for signed targets or ``("U",)`` for upper tails only.
    targets : mapping
        Target key to value.  Use :meth:`from_pairs` to reject duplicates.
    enforce_margins : bool
        Add exact unit singleton rows for every coordinate and sign.
    p0 : float, optional
        When given, adds the admissibility row ``sum(w) <= 1 / p0``.
    mode : {"feasibility", "min_total_mass", "l1"}
    calibration_weights : mapping, optional
        Positive per-target weights on the l1 deviations (default 1).
    costs : mapping, optional
        Nonnegative per-generator costs for ``min_total_mass``.  When given,
        generators not listed cost 0; when omitted every generator costs 1.
    """

    d: int
    alphabet: Alphabet = SIGNED
    targets: Mapping[TailKey, float] = field(default_factory=dict)
    enforce_margins: bool = True
    p0: Optional[float] = None
    mode: str = "feasibility"
    calibration_weights: Optional[Mapping[TailKey, float]] = None
    costs: Optional[Mapping[TailKey, float]] = None

    def __post_init__(self):
        if isinstance(self.d, bool) or int(self.d) != self.d or self.d < 1:
            raise SpecError(f"d must be a positive integer, got {self.d!r}")
        object.__setattr__(self, "d", int(self.d))
        alphabet = as_alphabet(self.alphabet)
        object.__setattr__(self, "alphabet", alphabet)
        if self.mode not in MODES:
            raise SpecError(f"mode must be one of {', '.join(MODES)}; got {self.mode!r}")
        if self.p0 is not None and not self.p0 > 0:
            raise SpecError(f"p0 must be positive, got {self.p0!r}")
        targets = _keyed(self.targets, self.d, alphabet, "target")
        object.__setattr__(self, "targets", MappingProxyType(targets))

        if self.calibration_weights is not None:
            cal = _keyed(self.calibration_weights, self.d, alphabet, "calibration weight")
            for key, value in cal.items():
                if not value > 0:
                    raise SpecError(
                        f"calibration weight at {key.render()} must be positive, got {value}")
                if key not in targets:
                    raise SpecError(f"calibration weight given for non-target {key.render()}")
            object.__setattr__(self, "calibration_weights", MappingProxyType(cal))
        if self.costs is not None:
            costs = _keyed(self.costs, self.d, alphabet, "cost")
            for key, value in costs.items():
                if value < 0:
                    raise SpecError(f"cost at {key.render()} must be nonnegative, got {value}")
            object.__setattr__(self, "costs", MappingProxyType(costs))

        if self.mode != "l1" and self.enforce_margins:
            for key, value in targets.items():
                if key.order == 1 and abs(value - 1.0) > MARGIN_CONFLICT_TOL:
                    raise SpecError(
                        f"target {key.render()} = {value} conflicts with the exact margin value 1")

    @classmethod
    def from_pairs(cls, d: int, pairs: Iterable[Tuple[object, float]], **kwargs) -> "TargetSpec":
        """Build from ``(key, value)`` pairs; a repeated key is an error."""
        targets = {}
        for key, value in pairs:
            key = _coerce_key(key)
            if key in targets:
                raise SpecError(f"duplicate target key {key.render()}")
            targets[key] = value
        return cls(d, targets=targets, **kwargs)

    def replace(self, **changes) -> "TargetSpec":
        fields = dict(d=self.d, alphabet=self.alphabet, targets=dict(self.targets),
                      enforce_margins=self.enforce_margins, p0=self.p0, mode=self.mode,
                      calibration_weights=self.calibration_weights, costs=self.costs)
        fields.update(changes)
        return TargetSpec(**fields)

    @property
    def is_complete(self) -> bool:
        return all(k in self.targets for k in iter_keys(self.d, self.alphabet))


@dataclass(frozen=True)
class LPModel:
    mode: str
    d: int
    alphabet: Alphabet
    generator_keys: tuple
    eq_keys: tuple  # one key per equality row, in row order
    soft_keys: tuple  # l1 targets, in slack order
    c: np.ndarray
    A_eq: np.ndarray
    b_eq: np.ndarray
    A_ub: np.ndarray
    b_ub: np.ndarray
    p0: Optional[float] = None

    @property
    def n_weights(self) -> int:
        return len(self.generator_keys)

    @property
    def n_variables(self) -> int:
        return self.c.shape[0]

    @property
    def n_equalities(self) -> int:
        return self.A_eq.shape[0]

    @property
    def n_inequalities(self) -> int:
        return self.A_ub.shape[0]


def _exact_rows(spec: TargetSpec) -> dict:
    merged = margin_targets(spec.d, spec.alphabet) if spec.enforce_margins else {}
    for key, value in spec.targets.items():
        merged[key] = value
    return merged


def build_model(spec: TargetSpec) -> LPModel:
    """Translate a target specification into dense LP data."""
    gens = tuple(iter_keys(spec.d, spec.alphabet))
    n_w = len(gens)
    if spec.mode == "l1":
        exact = margin_targets(spec.d, spec.alphabet) if spec.enforce_margins else {}
        soft = tuple(spec.targets)
    else:
        exact = _exact_rows(spec)
        soft = ()
    m = len(soft)
    n_vars = n_w + 2 * m

    eq_keys = tuple(exact) + soft
    A_w = build_incidence_matrix(spec.d, targets=eq_keys, generators=gens,
                                 alphabet=spec.alphabet).entries.astype(float)
    A_eq = np.zeros((len(eq_keys), n_vars))
    A_eq[:, :n_w] = A_w
    off = len(exact)
    for r in range(m):
        A_eq[off + r, n_w + r] = -1.0
        A_eq[off + r, n_w + m + r] = 1.0
    b_eq = np.array([exact[k] for k in exact] + [spec.targets[k] for k in soft], dtype=float)

    c = np.zeros(n_vars)
    if spec.mode == "min_total_mass":
        if spec.costs is None:
            c[:n_w] = 1.0
        else:
            c[:n_w] = [spec.costs.get(k, 0.0) for k in gens]
    elif spec.mode == "l1":
        cal = spec.calibration_weights or {}
        for r, key in enumerate(soft):
            c[n_w + r] = c[n_w + m + r] = cal.get(key, 1.0)

    if spec.p0 is not None:
        A_ub = np.zeros((1, n_vars))
        A_ub[0, :n_w] = 1.0
        b_ub = np.array([1.0 / spec.p0])
    else:
        A_ub = np.zeros((0, n_vars))
        b_ub = np.zeros(0)
    return LPModel(spec.mode, spec.d, spec.alphabet, gens, eq_keys, soft,
                   c, A_eq, b_eq, A_ub, b_ub, spec.p0)


@dataclass(frozen=True)
class LPSolution:
    status: Status
    weights: Optional[WeightSystem]
    objective_value: Optional[float]
    iterations: int = 0
    slacks_plus: Optional[Mapping[TailKey, float]] = None
    slacks_minus: Optional[Mapping[TailKey, float]] = None
    absolute_errors: Optional[Mapping[TailKey, float]] = None
    message: str = ""

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL

    def to_dict(self) -> dict:
        out = {"status": self.status.value, "iterations": self.iterations,
               "objective_value": self.objective_value}
        if self.message:
            out["message"] = self.message
        if self.weights is not None:
            out["total_mass"] = float(self.weights.total_mass)
            out["weights"] = [r for r in self.weights.to_records() if r["value"] != 0]
        if self.absolute_errors is not None:
            out["deviations"] = [
                {"key": k.render(), "r_plus": self.slacks_plus[k],
                 "r_minus": self.slacks_minus[k], "abs_error": v}
                for k, v in self.absolute_errors.items()]
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def solve(model: LPModel, max_iter: Optional[int] = None) -> LPSolution:
    """Run the bundled simplex backend and unpack the solution."""
    res: BackendResult = solve_standard_form(model.c, model.A_eq, model.b_eq,
                                             model.A_ub, model.b_ub, max_iter=max_iter)
    if res.status is not Status.OPTIMAL:
        return LPSolution(res.status, None, None, res.iterations, message=res.message)
    n_w, m = model.n_weights, len(model.soft_keys)
    x = res.x
    # round-off below the pivot threshold (including tiny negatives) becomes 0
    w = {k: (float(v) if abs(v) > WEIGHT_SNAP_TOL else 0.0)
         for k, v in zip(model.generator_keys, x[:n_w])}
    weights = WeightSystem(model.d, model.alphabet, w)
    plus = minus = errors = None
    if model.mode == "l1":
        plus = {k: float(x[n_w + r]) for r, k in enumerate(model.soft_keys)}
        minus = {k: float(x[n_w + m + r]) for r, k in enumerate(model.soft_keys)}
        errors = {k: abs(plus[k] - minus[k]) for k in model.soft_keys}
    value = res.value if abs(res.value) > FEAS_TOL else 0.0
    return LPSolution(Status.OPTIMAL, weights, value, res.iterations,
                      plus, minus, errors, res.message)


def solve_spec(spec: TargetSpec, max_iter: Optional[int] = None) -> LPSolution:
    return solve(build_model(spec), max_iter=max_iter)


def feasibility_decision(spec: TargetSpec, max_iter: Optional[int] = None):
    """Exact realizability of ``spec`` within the witness class.

    Returns ``(feasible, weights)`` with ``weights`` ``None`` when infeasible.
    The point returned is whatever basic solution the simplex ends on; use
    ``min_total_mass`` mode for a canonical choice.
    """
    if spec.mode != "feasibility":
        spec = spec.replace(mode="feasibility", calibration_weights=None, costs=None)
    sol = solve_spec(spec, max_iter=max_iter)
    if sol.status is Status.INFEASIBLE:
        return False, None
    if sol.status is not Status.OPTIMAL:
        raise SolverError(f"solver ended with status {sol.status.value}: {sol.message}")
    return True, sol.weights


def repaired_targets(spec: TargetSpec, solution: LPSolution) -> dict:
    """Coefficients actually attained by an l1 solution on the soft targets."""
    fam = tail_values_from_weights(solution.weights, list(spec.targets))
    return dict(fam.items())
