import functools
import sys
import warnings

import numpy as np
import pytest

from tangent_fields import build_sequence, make_pair


@functools.lru_cache(maxsize=None)
def cached_sequence(r_star: float, alpha: float, eps: float, rel_tol: float = 1e-12):
    pair = make_pair(r_star, alpha, eps)
    return pair, build_sequence(pair, rel_tol)


@pytest.fixture
def pair01():
    return cached_sequence(1.0, 0.0, 0.1)[0]


@pytest.fixture
def seq01():
    return cached_sequence(1.0, 0.0, 0.1)[1]


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture
def quiet():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        yield


def exterior_points(pair, n, rng, scale=3.0):
    """Random points outside both balls, within ``scale * (r + eps)`` of the origin."""
    out = []
    r = pair.radius
    R = scale * pair.c0
    while len(out) < n:
        p = rng.uniform(-R, R, 3)
        if (np.linalg.norm(p - pair.center_plus) > 1.05 * r
                and np.linalg.norm(p - pair.center_minus) > 1.05 * r):
            out.append(p)
    return np.array(out)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    verdicts = getattr(mod, "VERDICTS", None)
    if verdicts:
        terminalreporter.section("acceptance criteria")
        for num in sorted(verdicts):
            terminalreporter.write_line(verdicts[num])
