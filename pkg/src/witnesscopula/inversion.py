"""Forward incidence map and complete-case recovery of witness weights.

All routines here only add, subtract and compare, so they run unchanged on
``fractions.Fraction`` inputs and then return exact results.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .exceptions import SpecError
from .families import TailFamily, WeightSystem
from .keys import UPPER, check_key, extensions, iter_keys, restrictions

SNAP_TOL = 1e-12
NONNEG_TOL = 1e-9


def _snap(x, tol):
    return 0 if abs(x) < tol else x


def tail_values_from_weights(w: WeightSystem,
                             targets: Optional[Sequence] = None) -> TailFamily:
    """Evaluate ``lambda = A w`` on ``targets`` (default: the full family).

    Each generator pushes its weight onto its own signed restrictions, so the
    work is proportional to ``sum 2^|I|`` over the support of ``w``.
    """
    if targets is None:
        targets = list(iter_keys(w.d, w.alphabet))
    else:
        targets = list(targets)
        for key in targets:
            check_key(key, w.d, w.alphabet)
    acc = {}
    for gen, weight in w.items():
        if weight == 0:
            continue
        for sub in restrictions(gen):
            acc[sub] = acc.get(sub, 0) + weight
    return TailFamily(w.d, w.alphabet, {k: acc.get(k, 0) for k in targets})


def invert_complete(lam: TailFamily, snap_tol: float = SNAP_TOL) -> WeightSystem:
    """Triangular back-substitution by descending active-set size.

    ``w[I, s] = lam[I, s] - sum of w over strict signed supersets``.  Values
    below ``snap_tol`` in magnitude are set to exactly zero.
    """
    lam.require_complete()
    d, alphabet = lam.d, lam.alphabet
    weights = {}
    for order in range(d, 0, -1):
        for key in iter_keys(d, alphabet, orders=[order]):
            correction = 0
            for sup in extensions(key, d, alphabet, strict=True):
                correction += weights[sup]
            weights[key] = _snap(lam.entries[key] - correction, snap_tol)
    return WeightSystem(d, alphabet, weights)


def mobius_transform(lam: TailFamily, snap_tol: float = SNAP_TOL) -> WeightSystem:
    """Closed-form Möbius inversion on the signed ternary poset.

    ``w[I, s] = sum over signed supersets (K, r) of (-1)^(|K|-|I|) lam[K, r]``.
    """
    lam.require_complete()
    d, alphabet = lam.d, lam.alphabet
    weights = {}
    for key in iter_keys(d, alphabet):
        total = 0
        for sup in extensions(key, d, alphabet):
            value = lam.entries[sup]
            total += -value if (sup.order - key.order) % 2 else value
        weights[key] = _snap(total, snap_tol)
    return WeightSystem(d, alphabet, weights)


def invert_unsigned_upper(lam: TailFamily, snap_tol: float = SNAP_TOL) -> WeightSystem:
    """Boolean-lattice Möbius inversion for upper-tail-only families.

    Works on subset bitmasks with the in-place superset-difference sweep, one
    coordinate at a time, independently of the signed recursion.
    """
    if lam.alphabet != UPPER:
        raise SpecError("unsigned inversion needs a family over the {U} alphabet")
    lam.require_complete()
    d = lam.d
    size = 1 << d
    f = [0] * size
    for key, value in lam.items():
        mask = 0
        for i in key.active:
            mask |= 1 << (i - 1)
        f[mask] = value
    for bit in range(d):
        b = 1 << bit
        for mask in range(1, size):
            if not mask & b:
                f[mask] = f[mask] - f[mask | b]
    weights = {}
    for key in iter_keys(d, UPPER):
        mask = sum(1 << (i - 1) for i in key.active)
        weights[key] = _snap(f[mask], snap_tol)
    return WeightSystem(d, UPPER, weights)


@dataclass(frozen=True)
class RecoveryReport:
    weights: WeightSystem
    min_weight: float
    nonnegative: bool
    margins_ok: bool
    max_abs_residual: float
    total_mass: float
    p_max: float

    @property
    def success(self) -> bool:
        return self.nonnegative and self.margins_ok

    def to_dict(self) -> dict:
        return {
            "success": self.success,
            "min_weight": float(self.min_weight),
            "nonnegative": self.nonnegative,
            "margins_ok": self.margins_ok,
            "max_abs_residual": float(self.max_abs_residual),
            "total_mass": float(self.total_mass),
            "p_max": float(self.p_max),
            "weights": [r for r in self.weights.to_records() if r["value"] != 0],
        }


def p_max_for_mass(total_mass):
    """``min(1/2, 1/S)`` with ``S = 0`` mapping to the intrinsic cap 1/2."""
    one = Fraction(1) if isinstance(total_mass, (int, Fraction)) else 1.0
    half = one / 2
    if total_mass <= 0:
        return half
    inv = one / total_mass
    return inv if inv < half else half


def complete_recovery_report(lam: TailFamily, tol: float = NONNEG_TOL) -> RecoveryReport:
    """Invert a complete family and summarize tail-level validity."""
    w = invert_complete(lam)
    forward = tail_values_from_weights(w)
    residual = max(abs(forward.entries[k] - lam.entries[k]) for k in forward.keys())
    total = w.total_mass
    nonnegative = w.is_nonnegative(tol)
    return RecoveryReport(
        weights=w,
        min_weight=w.min_weight,
        nonnegative=nonnegative,
        margins_ok=lam.singletons_normalized(tol),
        max_abs_residual=residual,
        total_mass=total,
        p_max=p_max_for_mass(total),
    )
