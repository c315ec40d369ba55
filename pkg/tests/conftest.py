import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def rel_close(a, b, rtol):
    scale = max(abs(a), abs(b), 1e-30)
    return abs(a - b) <= rtol * scale


@pytest.fixture
def assert_rel():
    def check(a, b, rtol, label=""):
        scale = max(abs(a), abs(b), 1e-30)
        assert abs(a - b) <= rtol * scale, \
            f"{label}: {a!r} vs {b!r} (rel err {abs(a - b) / scale:.3e})"
    return check
