"""Signed tail keys, the extension order and its incidence structure.

A tail key ``(active, pattern)`` names both a witness generator and a signed
tail coefficient: ``active`` is a strictly increasing tuple of 1-based
coordinates and ``pattern`` assigns ``"L"`` or ``"U"`` to each of them.  The
same objects are in bijection with the non-central words of ``{L, M, U}^d``.
"""
from __future__ import annotations

from itertools import combinations, product
from typing import Iterable, Iterator, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from .exceptions import SpecError

Alphabet = Tuple[str, ...]
State = Tuple[str, ...]

SIGNED: Alphabet = ("L", "U")
UPPER: Alphabet = ("U",)

# Dense incidence matrices are only built up to this dimension (3^7 - 1 rows).
MAX_DENSE_DIM = 7


class TailKey(NamedTuple):
    active: Tuple[int, ...]
    pattern: Tuple[str, ...]

    @property
    def order(self) -> int:
        return len(self.active)

    def sort_key(self):
        """Canonical order: size, then coordinates, then signs with L < U."""
        return (len(self.active), self.active, self.pattern)

    def render(self) -> str:
        """Compact file rendering, e.g. ``"(1,3):LU"``."""
        return "(" + ",".join(map(str, self.active)) + "):" + "".join(self.pattern)

    def sign_of(self, coord: int) -> Optional[str]:
        for i, s in zip(self.active, self.pattern):
            if i == coord:
                return s
        return None


def as_alphabet(signs: Union[str, Sequence[str]]) -> Alphabet:
    """Normalize ``"U"``, ``"LU"``, ``("L", "U")`` ... into a sign alphabet."""
    symbols = tuple(signs)
    if not symbols:
        raise SpecError("sign alphabet must be nonempty")
    if len(set(symbols)) != len(symbols):
        raise SpecError(f"sign alphabet {signs!r} contains duplicates")
    if "M" in symbols:
        raise SpecError("'M' is the middle state and cannot be a tail sign")
    bad = [s for s in symbols if s not in SIGNED]
    if bad:
        raise SpecError(f"unknown tail sign(s) {bad}; allowed are L and U")
    return tuple(s for s in SIGNED if s in symbols)


def make_key(active: Iterable[int], pattern: Iterable[str]) -> TailKey:
    """Build a canonical key, sorting coordinates and co-permuting the signs.

    >>> make_key([2, 1], "UL")
    TailKey(active=(1, 2), pattern=('L', 'U'))
    """
    coords = list(active)
    signs = list(pattern)
    if not coords:
        raise SpecError("active set must be nonempty")
    if len(coords) != len(signs):
        raise SpecError(
            f"active set {coords} and pattern {signs} differ in length")
    for c in coords:
        if isinstance(c, bool) or int(c) != c or int(c) < 1:
            raise SpecError(f"coordinate {c!r} is not a positive integer")
    coords = [int(c) for c in coords]
    if len(set(coords)) != len(coords):
        raise SpecError(f"duplicate coordinate in active set {coords}")
    for s in signs:
        if s not in SIGNED:
            raise SpecError(f"sign {s!r} is not one of L, U")
    pairs = sorted(zip(coords, signs))
    return TailKey(tuple(c for c, _ in pairs), tuple(s for _, s in pairs))


def parse_key(text: str) -> TailKey:
    """Inverse of :meth:`TailKey.render`."""
    try:
        coords, signs = text.strip().split(":")
        coords = coords.strip().strip("()")
        return make_key([int(c) for c in coords.split(",")], list(signs.strip()))
    except (ValueError, AttributeError) as exc:
        if isinstance(exc, SpecError):
            raise
        raise SpecError(f"cannot parse tail key {text!r}") from exc


def check_key(key: TailKey, d: int, alphabet: Alphabet = SIGNED) -> None:
    if key.active[-1] > d:
        raise SpecError(f"key {key.render()} exceeds dimension d={d}")
    if any(s not in alphabet for s in key.pattern):
        raise SpecError(
            f"key {key.render()} uses a sign outside alphabet {''.join(alphabet)}")


def iter_keys(d: int, alphabet: Alphabet = SIGNED,
              orders: Optional[Iterable[int]] = None) -> Iterator[TailKey]:
    """Yield keys in canonical order; no lower bound on ``d``."""
    ks = range(1, d + 1) if orders is None else sorted(set(orders))
    for k in ks:
        for active in combinations(range(1, d + 1), k):
            for pattern in product(alphabet, repeat=k):
                yield TailKey(active, pattern)


def enumerate_keys(d: int, alphabet: Union[str, Sequence[str]] = SIGNED,
                   orders: Optional[Iterable[int]] = None) -> list:
    """All keys of the requested orders, in canonical order.

    With the signed alphabet and all orders there are ``3^d - 1`` keys; with
    the upper-only alphabet there are ``2^d - 1``.
    """
    if d < 2:
        raise SpecError(f"dimension must be at least 2, got {d}")
    alphabet = as_alphabet(alphabet)
    if orders is not None:
        orders = list(orders)
        for k in orders:
            if not 1 <= k <= d:
                raise SpecError(f"order {k} outside 1..{d}")
    return list(iter_keys(d, alphabet, orders))


def extends(generator: TailKey, target: TailKey) -> bool:
    """True iff ``target`` is a signed restriction of ``generator``."""
    pos = dict(zip(generator.active, generator.pattern))
    return all(pos.get(j) == t for j, t in zip(target.active, target.pattern))


def restrictions(key: TailKey) -> Iterator[TailKey]:
    """All keys extended by ``key`` (nonempty signed sub-patterns), itself included."""
    k = len(key.active)
    for r in range(1, k + 1):
        for idx in combinations(range(k), r):
            yield TailKey(tuple(key.active[i] for i in idx),
                          tuple(key.pattern[i] for i in idx))


def extensions(key: TailKey, d: int, alphabet: Alphabet = SIGNED,
               strict: bool = False) -> Iterator[TailKey]:
    """All keys extending ``key`` in dimension ``d``.

    Each free coordinate is independently left out or given one of the
    alphabet's signs, so there are ``(1 + |alphabet|)^(d - |key|)`` of them.
    """
    own = dict(zip(key.active, key.pattern))
    free = [i for i in range(1, d + 1) if i not in own]
    for choice in product((None,) + alphabet, repeat=len(free)):
        if strict and all(c is None for c in choice):
            continue
        signs = dict(own)
        signs.update((i, c) for i, c in zip(free, choice) if c is not None)
        active = tuple(sorted(signs))
        yield TailKey(active, tuple(signs[i] for i in active))


def mobius_value(x: TailKey, y: TailKey) -> int:
    """Möbius function of the signed ternary poset."""
    if not extends(y, x):
        return 0
    return -1 if (len(y.active) - len(x.active)) % 2 else 1


def state_to_key(state: Sequence[str]) -> Optional[TailKey]:
    """Map a ternary word to its key; the all-M word maps to ``None``."""
    for s in state:
        if s not in ("L", "M", "U"):
            raise SpecError(f"invalid ternary symbol {s!r}")
    active = tuple(i + 1 for i, s in enumerate(state) if s != "M")
    if not active:
        return None
    return TailKey(active, tuple(state[i - 1] for i in active))


def key_to_state(key: TailKey, d: int) -> State:
    if key.active[-1] > d:
        raise SpecError(f"key {key.render()} exceeds dimension d={d}")
    word = ["M"] * d
    for i, s in zip(key.active, key.pattern):
        word[i - 1] = s
    return tuple(word)


def central_state(d: int) -> State:
    return ("M",) * d


class IncidenceMatrix(NamedTuple):
    rows: tuple
    cols: tuple
    entries: np.ndarray  # int64, entry 1 iff cols[j] extends rows[i]

    def to_csv(self) -> str:
        lines = [",".join(["target"] + [f'"{c.render()}"' for c in self.cols])]
        for key, row in zip(self.rows, self.entries):
            lines.append(",".join([f'"{key.render()}"'] + [str(int(v)) for v in row]))
        return "\n".join(lines) + "\n"


def _dense_guard(d: int) -> None:
    if d > MAX_DENSE_DIM:
        raise SpecError(
            f"dense incidence matrices are limited to d <= {MAX_DENSE_DIM}, got d={d}")


def build_incidence_matrix(d: int, targets: Optional[Sequence[TailKey]] = None,
                           generators: Optional[Sequence[TailKey]] = None,
                           alphabet: Union[str, Sequence[str]] = SIGNED) -> IncidenceMatrix:
    """Dense 0/1 matrix ``A`` with ``lambda = A w`` on the given keys.

    Omitted ``targets`` / ``generators`` default to the full canonical family.
    """
    _dense_guard(d)
    alphabet = as_alphabet(alphabet)
    full = None
    if targets is None or generators is None:
        full = list(iter_keys(d, alphabet))
    rows = tuple(full if targets is None else targets)
    cols = tuple(full if generators is None else generators)
    for key in rows + cols:
        if key.active[-1] > d:
            raise SpecError(f"key {key.render()} exceeds dimension d={d}")
    col_index = {key: j for j, key in enumerate(cols)}
    entries = np.zeros((len(rows), len(cols)), dtype=np.int64)
    for r, target in enumerate(rows):
        for ext in extensions(target, d, alphabet):
            j = col_index.get(ext)
            if j is not None:
                entries[r, j] = 1
    return IncidenceMatrix(rows, cols, entries)


def mobius_matrix(d: int, alphabet: Union[str, Sequence[str]] = SIGNED) -> np.ndarray:
    """Integer matrix of ``mobius_value(x, y)`` over the full canonical family."""
    _dense_guard(d)
    keys = list(iter_keys(d, as_alphabet(alphabet)))
    return np.array([[mobius_value(x, y) for y in keys] for x in keys], dtype=np.int64)


def hasse_dot(d: int, alphabet: Union[str, Sequence[str]] = SIGNED) -> str:
    """Graphviz DOT source: one node per key, edges to immediate signed supersets."""
    alphabet = as_alphabet(alphabet)
    keys = list(iter_keys(d, alphabet))
    lines = ["digraph witness_order {", "  rankdir=BT;"]
    for key in keys:
        lines.append(f'  "{key.render()}" [group="order{key.order}"];')
    for key in keys:
        for ext in extensions(key, d, alphabet, strict=True):
            if ext.order == key.order + 1:
                lines.append(f'  "{key.render()}" -> "{ext.render()}";')
    lines.append("}")
    return "\n".join(lines) + "\n"
