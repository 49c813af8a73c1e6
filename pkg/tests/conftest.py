import numpy as np
import pytest

from dualrec.tables import DualRecordTable


@pytest.fixture
def rng():
    return np.random.default_rng(987654321)


@pytest.fixture
def random_tables(rng):
    """Factory drawing random tables with cells uniform in [low, high]."""

    def make(count, low=1, high=200, require_x11=True):
        out = []
        while len(out) < count:
            x11, x10, x01 = (int(v) for v in rng.integers(low, high + 1, size=3))
            if require_x11 and x11 == 0:
                continue
            out.append(DualRecordTable(x11, x10, x01))
        return out

    return make


@pytest.fixture
def grid_argmax():
    """Brute-force integer argmax of a kernel over [lower, upper]."""

    def argmax(objective, lower, upper):
        ns = np.arange(lower, upper + 1, dtype=float)
        vals = np.asarray(objective(ns))
        return lower + int(np.argmax(vals))

    return argmax
