"""JSON specification and weight files.

A target specification looks like::

    {"d": 3, "signs": "LU", "p0": 0.1, "mode": "feasibility",
     "enforce_margins": true,
     "targets": [{"active": [1, 2], "pattern": "UU", "value": 0.5}]}

A weight file carries ``"weights"`` records in the same structured form and is
what ``solve`` and ``invert`` emit, so their output can be fed back in.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Any, Optional

from .exceptions import SpecError
from .families import TailFamily, WeightSystem
from .keys import TailKey, as_alphabet, check_key, make_key
from .lp import MODES, TargetSpec

KNOWN_FIELDS = {"d", "signs", "targets", "weights", "p0", "mode", "enforce_margins",
                "calibration_weights", "costs", "seed", "runs", "samples", "alpha"}


@dataclass(frozen=True)
class SpecFile:
    d: int
    alphabet: tuple
    targets: Optional[dict]
    weights: Optional[WeightSystem]
    p0: Optional[float]
    mode: str
    enforce_margins: bool
    calibration_weights: Optional[dict]
    costs: Optional[dict]
    seed: Optional[int]
    runs: Optional[int]
    samples: Optional[int]

    @property
    def family(self) -> TailFamily:
        return TailFamily(self.d, self.alphabet, self.targets or {})

    def target_spec(self, mode: Optional[str] = None, p0: Optional[float] = None) -> TargetSpec:
        if self.targets is None:
            raise SpecError("file has no 'targets' list")
        return TargetSpec(self.d, self.alphabet, self.targets,
                          enforce_margins=self.enforce_margins,
                          p0=self.p0 if p0 is None else p0,
                          mode=mode or self.mode,
                          calibration_weights=self.calibration_weights,
                          costs=self.costs)


def _int(value: Any, where: str, minimum: Optional[int] = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise SpecError(f"{where}: expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise SpecError(f"{where}: must be at least {minimum}, got {value}")
    return value


def _real(value: Any, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SpecError(f"{where}: expected a number, got {value!r}")
    if not math.isfinite(value):
        raise SpecError(f"{where}: must be finite")
    return float(value)


def _records(items: Any, where: str, d: int, alphabet: tuple) -> dict:
    if not isinstance(items, list):
        raise SpecError(f"{where}: expected a list of {{active, pattern, value}} objects")
    out = {}
    for n, item in enumerate(items):
        here = f"{where}[{n}]"
        if not isinstance(item, dict):
            raise SpecError(f"{here}: expected an object")
        extra = set(item) - {"active", "pattern", "value"}
        if extra:
            raise SpecError(f"{here}: unknown field(s) {sorted(extra)}")
        for name in ("active", "pattern", "value"):
            if name not in item:
                raise SpecError(f"{here}.{name}: missing")
        active = item["active"]
        if not isinstance(active, list) or not active:
            raise SpecError(f"{here}.active: expected a nonempty list of coordinates")
        coords = [_int(c, f"{here}.active", 1) for c in active]
        pattern = item["pattern"]
        if not isinstance(pattern, str):
            raise SpecError(f"{here}.pattern: expected a string such as \"LU\"")
        try:
            key = make_key(coords, list(pattern))
            check_key(key, d, alphabet)
        except SpecError as exc:
            raise SpecError(f"{here}: {exc}") from None
        if key in out:
            raise SpecError(f"{here}: duplicate entry for {key.render()}")
        out[key] = _real(item["value"], f"{here}.value")
    return out


def parse_spec(data: Any) -> SpecFile:
    """Validate a decoded JSON document."""
    if not isinstance(data, dict):
        raise SpecError("top level: expected a JSON object")
    unknown = set(data) - KNOWN_FIELDS
    if unknown:
        raise SpecError(f"top level: unknown field(s) {sorted(unknown)}")
    if "d" not in data:
        raise SpecError("d: missing")
    d = _int(data["d"], "d", 1)
    signs = data.get("signs", "LU")
    if signs not in ("U", "LU"):
        raise SpecError(f"signs: expected \"U\" or \"LU\", got {signs!r}")
    alphabet = as_alphabet(signs)
    if "targets" not in data and "weights" not in data:
        raise SpecError("targets: missing (or give a 'weights' list)")
    targets = _records(data["targets"], "targets", d, alphabet) if "targets" in data else None
    weights = None
    if "weights" in data:
        weights = WeightSystem(d, alphabet, _records(data["weights"], "weights", d, alphabet))
    p0 = data.get("p0")
    if p0 is not None:
        p0 = _real(p0, "p0")
        if not p0 > 0:
            raise SpecError(f"p0: must be positive, got {p0}")
    mode = data.get("mode", "feasibility")
    if mode not in MODES:
        raise SpecError(f"mode: expected one of {', '.join(MODES)}, got {mode!r}")
    enforce = data.get("enforce_margins", True)
    if not isinstance(enforce, bool):
        raise SpecError(f"enforce_margins: expected true or false, got {enforce!r}")
    cal = costs = None
    if data.get("calibration_weights") is not None:
        cal = _records(data["calibration_weights"], "calibration_weights", d, alphabet)
    if data.get("costs") is not None:
        costs = _records(data["costs"], "costs", d, alphabet)
    ints = {}
    for name, minimum in (("seed", 0), ("runs", 0), ("samples", 1)):
        ints[name] = _int(data[name], name, minimum) if data.get(name) is not None else None
    return SpecFile(d, alphabet, targets, weights, p0, mode, enforce, cal, costs,
                    ints["seed"], ints["runs"], ints["samples"])


def load_spec(path: str) -> SpecFile:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise SpecError(f"cannot read {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: "
                        f"{exc.msg}") from None
    try:
        return parse_spec(data)
    except SpecError as exc:
        raise SpecError(f"{path}: {exc}") from None


def records(mapping) -> list:
    return [{"active": list(k.active), "pattern": "".join(k.pattern), "value": float(v)}
            for k, v in mapping.items()]


def spec_document(d: int, alphabet, targets=None, weights=None, **extra) -> dict:
    """Build a JSON-ready document that :func:`parse_spec` accepts."""
    doc = {"d": d, "signs": "".join(as_alphabet(alphabet))}
    if targets is not None:
        doc["targets"] = records(targets)
    if weights is not None:
        doc["weights"] = records(weights)
    doc.update({k: v for k, v in extra.items() if v is not None})
    return doc
