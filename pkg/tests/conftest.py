import os
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from witnesscopula import SIGNED, UPPER, WeightSystem
from witnesscopula.keys import iter_keys

FIXTURES = Path(__file__).parent / "fixtures"

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# Lines recorded by the acceptance suite; echoed in the terminal summary.
ACCEPTANCE_LINES = []


def load_matrix(name: str) -> np.ndarray:
    rows = (FIXTURES / f"{name}.txt").read_text().split("\n")
    return np.array([[int(x) for x in r.split()] for r in rows if r.strip()], dtype=np.int64)


def random_weights(rng, d, alphabet=SIGNED, density=0.5, scale=1.0):
    keys = list(iter_keys(d, alphabet))
    vals = rng.random(len(keys)) * scale
    vals[rng.random(len(keys)) > density] = 0.0
    return WeightSystem(d, alphabet, dict(zip(keys, vals)))


@st.composite
def weight_systems(draw, d_values=(2, 3, 4), alphabets=(SIGNED, UPPER), max_value=2.0):
    d = draw(st.sampled_from(d_values))
    alphabet = draw(st.sampled_from(alphabets))
    keys = list(iter_keys(d, alphabet))
    vals = draw(st.lists(st.one_of(st.just(0.0), st.floats(0, max_value)),
                         min_size=len(keys), max_size=len(keys)))
    return WeightSystem(d, alphabet, dict(zip(keys, vals)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def with_margins(w: WeightSystem) -> WeightSystem:
    """Scale the non-singleton part and top up singletons so every margin sum is 1."""
    sums = {}
    for key, v in w.items():
        if key.order > 1:
            for i, s in zip(key.active, key.pattern):
                sums[(i, s)] = sums.get((i, s), 0.0) + v
    scale = max([1.0] + list(sums.values()))
    entries = {k: v / scale for k, v in w.items() if k.order > 1}
    for key in iter_keys(w.d, w.alphabet, orders=[1]):
        i, s = key.active[0], key.pattern[0]
        entries[key] = 1.0 - sums.get((i, s), 0.0) / scale
    return WeightSystem(w.d, w.alphabet, entries)


@st.composite
def admissible_pairs(draw, **kwargs):
    """A weight system together with a threshold in (0, p_max)."""
    w = draw(weight_systems(**kwargs))
    total = w.total_mass
    p_max = 0.5 if total <= 0 else min(0.5, 1.0 / total)
    frac = draw(st.floats(0.01, 0.99))
    return w, frac * p_max
