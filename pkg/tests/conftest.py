import numpy as np
import pytest

from reluland import BenchmarkTarget, PolyTarget
from reluland.polyalg import PiecewisePolynomial, Polynomial


@pytest.fixture
def bench():
    return BenchmarkTarget(1 / 3, 2 / 3, 0.0, 1.0)


@pytest.fixture
def xsq():
    return PolyTarget(PiecewisePolynomial([0.0, 1.0], [Polynomial([0.0, 0.0, 1.0])]))


def poly_target(breakpoints, pieces):
    return PolyTarget(PiecewisePolynomial(
        breakpoints, [Polynomial(cs) for cs in pieces], continuous=True))


def rng_for(seed):
    return np.random.Generator(np.random.Philox(key=seed))


def random_continuous_piecewise(rng, max_pieces=4, max_degree=4, lo=0.0, hi=1.0):
    """Random continuous piecewise polynomial on [lo, hi]."""
    n = int(rng.integers(1, max_pieces + 1))
    cuts = np.sort(rng.uniform(lo + 0.05, hi - 0.05, n - 1)) if n > 1 else []
    bps = [lo, *cuts, hi]
    pieces = []
    level = float(rng.uniform(-1, 1))
    for i in range(n):
        deg = int(rng.integers(0, max_degree + 1))
        p = Polynomial([float(c) for c in rng.uniform(-1, 1, deg + 1)])
        # shift so the piece starts where the previous one ended
        p = p + Polynomial([level - p(bps[i])])
        level = p(bps[i + 1])
        pieces.append(p)
    return PiecewisePolynomial(bps, pieces, continuous=True)
