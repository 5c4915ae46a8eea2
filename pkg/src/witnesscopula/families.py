"""Key-indexed containers: witness weight systems and tail families."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping, Optional, Sequence, Tuple, Union

from .exceptions import IncompleteFamilyError, SpecError
from .keys import (SIGNED, Alphabet, TailKey, as_alphabet, check_key, iter_keys, make_key,
                   parse_key)

Number = Union[int, float]  # fractions.Fraction also works throughout


def _coerce_key(key) -> TailKey:
    """Accept a TailKey, an ``(active, pattern)`` pair or the rendered ``"(1,3):LU"`` form."""
    if isinstance(key, TailKey):
        return key
    if isinstance(key, str):
        return parse_key(key)
    try:
        active, pattern = key
    except (TypeError, ValueError):
        raise SpecError(f"cannot interpret {key!r} as a tail key") from None
    return make_key(active, pattern)


@dataclass(frozen=True)
class _KeyedValues:
    d: int
    alphabet: Alphabet = SIGNED
    entries: Mapping[TailKey, Number] = field(default_factory=dict)

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise SpecError(f"dimension must be a positive integer, got {self.d!r}")
        alphabet = as_alphabet(self.alphabet)
        clean = {}
        for key, value in dict(self.entries).items():
            key = _coerce_key(key)
            check_key(key, self.d, alphabet)
            if not math.isfinite(value):
                raise SpecError(f"value at {key.render()} is not finite: {value!r}")
            clean[key] = value
        ordered = dict(sorted(clean.items(), key=lambda kv: kv[0].sort_key()))
        object.__setattr__(self, "alphabet", alphabet)
        object.__setattr__(self, "entries", MappingProxyType(ordered))

    def __getitem__(self, key) -> Number:
        return self.entries.get(_coerce_key(key), 0)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def items(self):
        return self.entries.items()

    def keys(self):
        return self.entries.keys()

    def full_keys(self) -> list:
        return list(iter_keys(self.d, self.alphabet))

    def to_records(self) -> list:
        return [{"active": list(k.active), "pattern": "".join(k.pattern),
                 "value": float(v)} for k, v in self.entries.items()]


@dataclass(frozen=True)
class WeightSystem(_KeyedValues):
    """Witness weights ``w_{I,sigma}``; keys not stored have weight zero.

    Negative entries are representable (an inversion may produce them); the
    validity checks elsewhere decide what to do with them.
    """

    @property
    def total_mass(self) -> Number:
        return sum(self.entries.values(), 0)

    @property
    def min_weight(self) -> Number:
        """Smallest weight over the full generator family (absent keys count as 0)."""
        values = list(self.entries.values())
        if len(values) < len(self.full_keys()):
            values.append(0)
        return min(values)

    def support(self) -> dict:
        return {k: v for k, v in self.entries.items() if v != 0}

    def is_nonnegative(self, tol: float = 1e-9) -> bool:
        return all(v >= -tol for v in self.entries.values())


@dataclass(frozen=True)
class TailFamily(_KeyedValues):
    """Signed tail coefficients ``lambda_{J,tau}``, possibly partial."""

    def missing(self) -> list:
        return [k for k in iter_keys(self.d, self.alphabet) if k not in self.entries]

    @property
    def is_complete(self) -> bool:
        return not self.missing()

    def require_complete(self) -> None:
        missing = self.missing()
        if missing:
            raise IncompleteFamilyError(missing, len(self.full_keys()))

    def singletons_normalized(self, tol: float = 1e-9) -> bool:
        return all(
            key in self.entries and abs(self.entries[key] - 1) <= tol
            for key in iter_keys(self.d, self.alphabet, orders=[1]))


def family_from_pairs(d: int, pairs: Iterable[Tuple[object, Number]],
                      alphabet: Union[str, Sequence[str]] = SIGNED,
                      kind=TailFamily):
    """Build a family from ``(key, value)`` pairs, rejecting duplicate keys."""
    seen = {}
    for key, value in pairs:
        key = _coerce_key(key)
        if key in seen:
            raise SpecError(f"duplicate entry for key {key.render()}")
        seen[key] = value
    return kind(d, as_alphabet(alphabet), seen)


def complete_template(d: int, alphabet: Union[str, Sequence[str]] = SIGNED,
                      singleton: Number = 1, other: Number = 0,
                      overrides: Optional[Mapping] = None) -> TailFamily:
    """Complete family with unit singletons and a constant higher-order value."""
    alphabet = as_alphabet(alphabet)
    entries = {k: (singleton if k.order == 1 else other) for k in iter_keys(d, alphabet)}
    for key, value in (overrides or {}).items():
        key = _coerce_key(key)
        if key not in entries:
            raise SpecError(f"override {key.render()} is not a key of the family")
        entries[key] = value
    return TailFamily(d, alphabet, entries)
