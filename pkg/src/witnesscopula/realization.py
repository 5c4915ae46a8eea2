"""Passage from tail-level weights to ternary cell masses at a threshold p0."""
from __future__ import annotations

from dataclasses import dataclass, field
from math import comb
from types import MappingProxyType
from typing import Iterable, Mapping, Optional, Sequence

from .exceptions import InadmissibleError, SpecError
from .families import TailFamily, WeightSystem
from .inversion import NONNEG_TOL, p_max_for_mass, tail_values_from_weights
from .keys import (SIGNED, Alphabet, TailKey, as_alphabet, central_state, check_key,
                   key_to_state, state_to_key)

CENTRAL_TOL = 1e-12


def check_threshold(p0, name: str = "p0") -> None:
    if not 0 < p0 < 0.5:
        raise SpecError(f"{name} must lie strictly between 0 and 1/2, got {p0!r}")


@dataclass(frozen=True)
class TernaryMassTable:
    """Sparse cell masses on ``{L, M, U}^d``; absent states carry zero mass."""

    d: int
    p0: float
    masses: Mapping[tuple, float] = field(default_factory=dict)
    alphabet: Alphabet = SIGNED

    def __post_init__(self):
        if self.p0 <= 0:
            raise SpecError(f"p0 must be positive, got {self.p0!r}")
        clean = {}
        for state, mass in dict(self.masses).items():
            state = tuple(state)
            if len(state) != self.d:
                raise SpecError(f"state {''.join(state)} does not have length d={self.d}")
            state_to_key(state)  # validates symbols
            clean[state] = mass
        center = central_state(self.d)
        clean.setdefault(center, 0)

        def order(item):
            key = state_to_key(item[0])
            return (0,) if key is None else (1,) + key.sort_key()

        object.__setattr__(self, "alphabet", as_alphabet(self.alphabet))
        object.__setattr__(self, "masses", MappingProxyType(dict(sorted(clean.items(), key=order))))

    def __getitem__(self, state) -> float:
        return self.masses.get(tuple(state), 0)

    @property
    def central_mass(self) -> float:
        return self.masses[central_state(self.d)]

    @property
    def total(self) -> float:
        return sum(self.masses.values())

    def to_rows(self) -> list:
        return [("".join(s), float(m)) for s, m in self.masses.items()]

    def to_dict(self) -> dict:
        return {"d": self.d, "p0": float(self.p0), "signs": "".join(self.alphabet),
                "central_mass": float(self.central_mass),
                "masses": [{"state": s, "mass": m} for s, m in self.to_rows()]}


def q_from_weights(w: WeightSystem, p0) -> TernaryMassTable:
    """Cell masses ``q_a = p0 * w`` off the centre and ``1 - p0 * S(w)`` at it."""
    check_threshold(p0)
    masses = {}
    for key, value in w.items():
        if value < -NONNEG_TOL:
            raise InadmissibleError(f"negative weight {float(value):.6g} at {key.render()}")
        if value > 0:
            masses[key_to_state(key, w.d)] = p0 * value
    central = 1 - p0 * sum(v for v in w.entries.values() if v > 0)
    if central < -CENTRAL_TOL:
        raise InadmissibleError(
            f"central mass {float(central):.6g} is negative at p0={float(p0)}; "
            f"p0 * S(w) = {float(p0 * w.total_mass):.6g} exceeds 1")
    masses[central_state(w.d)] = central
    return TernaryMassTable(w.d, p0, masses, w.alphabet)


def weights_from_q(q: TernaryMassTable) -> WeightSystem:
    """Inverse rescaling ``w = q_a / p0`` on the non-central cells."""
    if q.p0 <= 0:
        raise SpecError("p0 must be positive")
    weights = {}
    for state, mass in q.masses.items():
        key = state_to_key(state)
        if key is not None:
            weights[key] = mass / q.p0
    return WeightSystem(q.d, q.alphabet, weights)


def tail_total(q: TernaryMassTable, target: TailKey) -> float:
    """Mass of all cells whose word matches ``target`` on its active coordinates."""
    check_key(target, q.d, SIGNED)
    total = 0
    for state, mass in q.masses.items():
        if all(state[j - 1] == s for j, s in zip(target.active, target.pattern)):
            total += mass
    return total


@dataclass(frozen=True)
class MarginCheck:
    sums: Mapping[tuple, float]  # (coordinate, sign) -> summed weight
    ok: bool


def check_margins(w: WeightSystem, tol: float = NONNEG_TOL) -> MarginCheck:
    """Per coordinate and sign, the total weight of generators putting it in that tail."""
    sums = {(i, s): 0 for i in range(1, w.d + 1) for s in w.alphabet}
    for key, value in w.items():
        for i, s in zip(key.active, key.pattern):
            sums[(i, s)] += value
    ok = all(abs(v - 1) <= tol for v in sums.values())
    return MarginCheck(MappingProxyType(sums), ok)


def admissible_p_max(w: WeightSystem, tol: float = NONNEG_TOL):
    """Largest admissible threshold ``min(1/2, 1/S(w))``."""
    if not w.is_nonnegative(tol):
        raise InadmissibleError(
            f"weight system has negative entries (min {float(w.min_weight):.6g})")
    return p_max_for_mass(w.total_mass)


def is_admissible(w: WeightSystem, p0) -> bool:
    """Whether ``p0`` realizes ``w``: nonnegative weights, ``0 < p0 < 1/2``, ``p0 S <= 1``."""
    if not 0 < p0 < 0.5 or not w.is_nonnegative():
        return False
    return 1 - p0 * w.total_mass >= -CENTRAL_TOL


def marginalize(w: WeightSystem, keep: Iterable[int]):
    """Project ``w`` onto the coordinates in ``keep``.

    Returns ``(projected, index_map)`` where ``index_map`` sends each kept
    original coordinate to its new label in ``1..len(keep)``.  Generators that
    miss ``keep`` entirely fall into the projected central cell.
    """
    keep = sorted(set(keep))
    if not keep:
        raise SpecError("keep must be a nonempty set of coordinates")
    if keep[0] < 1 or keep[-1] > w.d:
        raise SpecError(f"keep {keep} is not a subset of 1..{w.d}")
    index_map = {c: n for n, c in enumerate(keep, start=1)}
    projected = {}
    for key, value in w.items():
        pairs = [(index_map[i], s) for i, s in zip(key.active, key.pattern) if i in index_map]
        if not pairs:
            continue
        new = TailKey(tuple(i for i, _ in pairs), tuple(s for _, s in pairs))
        projected[new] = projected.get(new, 0) + value
    return WeightSystem(len(keep), w.alphabet, projected), index_map


def theoretical_lambda_at(w: WeightSystem, p, p0, targets: Optional[Sequence] = None) -> TailFamily:
    """Tail family of the canonical witness read at level ``p``; constant for ``p <= p0``."""
    if not 0 < p <= p0:
        raise SpecError(f"level p={p!r} must satisfy 0 < p <= p0={p0!r}")
    return tail_values_from_weights(w, targets)


def vanishing_threshold_check(w: WeightSystem, p_sequence: Sequence) -> list:
    """Central masses ``1 - p_n S(w)`` along a strictly decreasing threshold sequence."""
    p_max = admissible_p_max(w)
    ps = list(p_sequence)
    for a, b in zip(ps, ps[1:]):
        if not b < a:
            raise SpecError("threshold sequence must be strictly decreasing")
    for p in ps:
        if not 0 < p < p_max:
            raise SpecError(f"threshold {p!r} is not in (0, p_max={float(p_max):.6g})")
    total = w.total_mass
    return [1 - p * total for p in ps]


def cell_geometry_table(d: int, p0: float) -> list:
    """Per-order geometry of signed cells (counts, dimensions, neighbours, volume)."""
    check_threshold(p0)
    rows = []
    for k in range(1, d + 1):
        rows.append({
            "order": k,
            "count": comb(d, k) * 2 ** k,
            "support_dim": d - k + 1,
            "central_contact_dim": d - k,
            "inward_neighbours": k,
            "outward_neighbours": 2 * (d - k),
            "cell_volume": p0 ** k * (1 - 2 * p0) ** (d - k),
            "affected_coefficients": 2 ** k - 1,
        })
    return rows
