from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from georefine.geometry import SPD, Euclidean, Rotations3D, Sphere
from georefine.symbol import SymbolFactorization

settings.register_profile(
    "georefine",
    max_examples=40,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("georefine")

CURVED = [Sphere(3), Rotations3D(), SPD(3)]
ALL_KINDS = [Euclidean(2), *CURVED]
KIND_IDS = [k.tag for k in ALL_KINDS]
CURVED_IDS = [k.tag for k in CURVED]

seeds = st.integers(min_value=0, max_value=2**32 - 1)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_admissible_factorization(rng, max_real=6, max_quad=2, shift_range=3):
    """Random factorization whose averaging weights all lie in the extrapolation window."""
    m1 = int(rng.integers(0, max_real + 1))
    m2 = int(rng.integers(0, max_quad + 1))
    reals = []
    for _ in range(m1):
        u = rng.random()
        if u < 0.6:
            reals.append(float(rng.uniform(0.1, 4.0)))
        elif u < 0.8:
            reals.append(float(rng.uniform(-0.5, -0.05)))
        else:
            reals.append(float(rng.uniform(-8.0, -2.0)))
    quads = []
    while len(quads) < m2:
        z = complex(rng.uniform(-0.5, 2.5), rng.uniform(0.1, 2.0))
        den = 1 + 2 * z.real + abs(z) ** 2
        t1 = (abs(z) + 1) / den
        t2 = (1 + 2 * z.real - abs(z)) / den
        if -1 <= t1 <= 2 and -1 <= t2 <= 2:
            quads.append(z)
    shift = int(rng.integers(-shift_range, shift_range + 1))
    return SymbolFactorization(shift, tuple(reals), tuple(quads))


# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
