"""scikit-learn style wrappers around the functional core.

``WitnessCopula`` is fit on target tail coefficients rather than on data, so
it follows the estimator conventions (constructor-only parameters, fitted
attributes with a trailing underscore, ``get_params`` / ``set_params``)
without being a meaningful pipeline step.  ``EmpiricalTailCoefficients``
works on ordinary ``(n_samples, n_features)`` arrays.
"""
from __future__ import annotations

from typing import Mapping, Optional

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .exceptions import InadmissibleError, SolverError, SpecError
from .families import TailFamily, _coerce_key
from .inversion import complete_recovery_report, tail_values_from_weights
from .keys import SIGNED, as_alphabet, iter_keys
from .lp import TargetSpec, solve_spec
from .realization import CENTRAL_TOL, check_threshold, q_from_weights
from .simplex import Status
from .simulation import empirical_lambda, sample_canonical


def _as_family(X, d: Optional[int], alphabet) -> TailFamily:
    if isinstance(X, TailFamily):
        return X
    pairs = list(X.items()) if isinstance(X, Mapping) else list(X)
    entries = {}
    for key, value in pairs:
        key = _coerce_key(key)
        if key in entries:
            raise SpecError(f"duplicate target key {key.render()}")
        entries[key] = value
    if d is None:
        if not entries:
            raise SpecError("cannot infer the dimension from an empty target set; pass d")
        d = max(k.active[-1] for k in entries)
    return TailFamily(d, alphabet, entries)


class WitnessCopula(BaseEstimator):
    """Geometric witness copula calibrated to signed tail coefficients.

    Parameters
    ----------
    p0 : float, default=0.1
        Realization threshold in (0, 1/2).
    d : int, optional
        Dimension; inferred from the largest coordinate in the targets if omitted.
    signs : {"LU", "U"}, default="LU"
    mode : {"auto", "inversion", "feasibility", "min_total_mass", "l1"}, default="auto"
        ``auto`` inverts a complete family and otherwise picks the
        minimum-mass completion.
    enforce_margins : bool, default=True
    calibration_weights, costs : mapping, optional
        Passed to the linear program (``l1`` and ``min_total_mass`` modes).
    random_state : int, optional
        Seed for :meth:`sample`.

    Attributes
    ----------
    weights_ : WeightSystem
    report_ : RecoveryReport or LPSolution
    central_mass_ : float
    p_max_ : float
        Largest admissible threshold for ``weights_``.
    """

    def __init__(self, p0=0.1, d=None, signs="LU", mode="auto", enforce_margins=True,
                 calibration_weights=None, costs=None, random_state=None):
        self.p0 = p0
        self.d = d
        self.signs = signs
        self.mode = mode
        self.enforce_margins = enforce_margins
        self.calibration_weights = calibration_weights
        self.costs = costs
        self.random_state = random_state

    def fit(self, X, y=None):
        """Fit to a target family (TailFamily, mapping or ``(key, value)`` pairs)."""
        check_threshold(self.p0)
        alphabet = as_alphabet(self.signs)
        fam = _as_family(X, self.d, alphabet)
        mode = self.mode
        if mode == "auto":
            mode = "inversion" if fam.is_complete else "min_total_mass"
        if mode == "inversion":
            report = complete_recovery_report(fam)
            if not report.success:
                raise InadmissibleError(
                    f"targets are not realizable: min weight {float(report.min_weight):.6g}")
            weights = report.weights
        else:
            spec = TargetSpec(fam.d, alphabet, dict(fam.items()), self.enforce_margins,
                              self.p0, mode, self.calibration_weights, self.costs)
            report = solve_spec(spec)
            if report.status is Status.INFEASIBLE:
                raise InadmissibleError("targets are not realizable at this p0")
            if report.status is not Status.OPTIMAL:
                raise SolverError(f"solver ended with status {report.status.value}")
            weights = report.weights
        central = 1 - self.p0 * weights.total_mass
        if central < -CENTRAL_TOL:
            raise InadmissibleError(f"central mass {float(central):.6g} is negative at p0={self.p0}")
        self.targets_ = fam
        self.weights_ = weights
        self.report_ = report
        self.central_mass_ = float(central)
        total = weights.total_mass
        self.p_max_ = 0.5 if total <= 0 else min(0.5, 1.0 / total)
        self.n_features_in_ = fam.d
        return self

    def tail_coefficients(self) -> TailFamily:
        """Full signed coefficient family implied by the fitted weights."""
        check_is_fitted(self, "weights_")
        return tail_values_from_weights(self.weights_)

    def mass_table(self):
        check_is_fitted(self, "weights_")
        return q_from_weights(self.weights_, self.p0)

    def sample(self, n_samples: int = 1, random_state=None) -> np.ndarray:
        check_is_fitted(self, "weights_")
        seed = self.random_state if random_state is None else random_state
        return np.array(sample_canonical(self.weights_, self.p0, n_samples, seed).values)


class EmpiricalTailCoefficients(TransformerMixin, BaseEstimator):
    """Empirical signed tail coefficients of data on the unit cube.

    ``fit`` stores ``lambda_`` (a TailFamily).  ``transform`` returns, for each
    row and target, the tail-box indicator divided by ``p``, so the column
    means of ``transform(X)`` equal the estimates.

    Parameters
    ----------
    p : float, default=0.05
        Tail level in (0, 1/2).
    targets : sequence of keys, optional
        Defaults to every key over ``signs``.
    signs : {"LU", "U"}, default="LU"
    """

    def __init__(self, p=0.05, targets=None, signs="LU"):
        self.p = p
        self.targets = targets
        self.signs = signs

    def _validate(self, X, reset: bool):
        X = check_array(X, dtype=float)
        if np.any(X < 0) or np.any(X > 1):
            raise ValueError("entries must lie in [0, 1] (pseudo-observations)")
        if reset:
            self.n_features_in_ = X.shape[1]
        elif X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        return X

    def fit(self, X, y=None):
        if not 0 < self.p < 0.5:
            raise ValueError(f"p must lie in (0, 1/2), got {self.p!r}")
        X = self._validate(X, reset=True)
        d = X.shape[1]
        if self.targets is None:
            keys = list(iter_keys(d, as_alphabet(self.signs)))
        else:
            keys = [_coerce_key(k) for k in self.targets]
        self.targets_ = keys
        self.lambda_ = empirical_lambda(X, self.p, keys)
        return self

    def transform(self, X):
        check_is_fitted(self, "lambda_")
        X = self._validate(X, reset=False)
        out = np.empty((X.shape[0], len(self.targets_)))
        for c, key in enumerate(self.targets_):
            hit = np.ones(X.shape[0], dtype=bool)
            for j, s in zip(key.active, key.pattern):
                col = X[:, j - 1]
                hit &= (col <= self.p) if s == "L" else (col >= 1 - self.p)
            out[:, c] = hit / self.p
        return out

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "lambda_")
        return np.array([k.render() for k in self.targets_], dtype=object)
