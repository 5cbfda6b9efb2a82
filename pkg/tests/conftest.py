from __future__ import annotations

import json
from pathlib import Path

import gmpy2
import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from scipy.optimize import linear_sum_assignment

from cauchyapprox.aak import hankel_matrix
from cauchyapprox.conformal import build_geometry
from cauchyapprox.io import read_csv
from cauchyapprox.kernel.precision import PrecisionContext
from cauchyapprox.model import CauchyFunction, MeasureSpec
from cauchyapprox.presets import preset

GOLDEN = Path(__file__).resolve().parent / "golden"

# multiprecision examples are slow; keep example counts modest and drop deadlines
settings.register_profile("mp", max_examples=15, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("mp")


@pytest.fixture(scope="session")
def ctx() -> PrecisionContext:
    return PrecisionContext(256)


@pytest.fixture(scope="session")
def oracle() -> dict:
    return json.loads((GOLDEN / "oracle.json").read_text())


def golden_poles(name: str) -> np.ndarray:
    _, rows = read_csv((GOLDEN / name).read_text())
    return np.array([complex(float(a), float(b)) for a, b in rows])


def pole_distance(a, b) -> float:
    """Largest displacement under the optimal one-to-one pairing of two pole sets."""
    a = np.array([complex(z) for z in a])
    b = np.array([complex(z) for z in b])
    if len(a) != len(b):
        return float("inf")
    if not len(a):
        return 0.0
    cost = np.abs(a[:, None] - b[None, :])
    r, c = linear_sum_assignment(cost)
    return float(cost[r, c].max())


def mp(x: str, bits: int = 512):
    with gmpy2.context(gmpy2.get_context(), precision=bits):
        return gmpy2.mpfr(x)


@pytest.fixture(scope="session")
def arcsine() -> CauchyFunction:
    return preset("markov-arcsine")


@pytest.fixture(scope="session")
def half() -> CauchyFunction:
    return preset("markov-half")


@pytest.fixture(scope="session")
def sec8() -> CauchyFunction:
    return preset("paper-sec8")


@pytest.fixture(scope="session")
def half_geom(half, ctx):
    return build_geometry(half.measure, ctx=ctx)


@pytest.fixture(scope="session")
def sec8_geom(sec8, ctx):
    return build_geometry(sec8.measure, ctx=ctx)


@pytest.fixture(scope="session")
def half_hankel(half, ctx):
    return hankel_matrix(half, 128, ctx)


@pytest.fixture(scope="session")
def sec8_hankel(sec8, ctx):
    return hankel_matrix(sec8, 128, ctx)


@pytest.fixture(scope="session")
def sec8_hankel_196(sec8, ctx):
    return hankel_matrix(sec8, 196, ctx)


def rational(a, mult: int = 1) -> CauchyFunction:
    """1/(z - a)**mult with no measure part."""
    a = complex(a)
    return CauchyFunction.from_dict({"rational": {"p": [["1", "0"]], "q_roots": [[repr(a.real), repr(a.imag), mult]]}})


def markov(c: str, d: str, h: str = "1", **extra) -> CauchyFunction:
    spec = {"interval": [c, d], "h": h}
    spec.update(extra)
    return CauchyFunction(MeasureSpec.from_dict(spec))
