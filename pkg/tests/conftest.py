import numpy as np
import pytest

from jumpiter.levy_path import LevyTriplet, SigmaModel, build_skeleton, integrate_sigma, simulate_jumps
from jumpiter.randomness import DistSpec, stream


def make_path(b=0.0, c=1.0, lam=0.0, jump_size=None, mesh_n=256, seed=7, rep=0, sigma=None):
    """One integrated path with its own keyed streams."""
    tr = LevyTriplet(b, c, lam, jump_size or DistSpec("two_point", (-1.0, 0.5, 1.0)))
    jumps = simulate_jumps(tr, stream(seed, rep, "jumps"))
    sk = build_skeleton(tr, jumps, mesh_n, stream(seed, rep, "brownian"))
    return integrate_sigma(sigma or SigmaModel(), sk, stream(seed, rep, "sigma"))


def path_with_jumps(jumps, b=0.0, c=1.0, mesh_n=256, seed=7, rep=0, sigma=None):
    tr = LevyTriplet(b, c, float(len(jumps)))
    sk = build_skeleton(tr, jumps, mesh_n, stream(seed, rep, "brownian"))
    return integrate_sigma(sigma or SigmaModel(), sk, stream(seed, rep, "sigma"))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# filled by the acceptance module, printed once at the end of the session
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
