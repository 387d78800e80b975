import numpy as np
import pytest

from aeq.certificates import TailCertificate
from aeq.pipelines import LinearContext
from aeq.scenario import builtin
from aeq.terms import Term


class ScalarP:
    """P(t) = p(t) as a 1x1 matrix function."""

    dim = 1

    def __init__(self, fn):
        self.fn = fn

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return np.asarray(self.fn(t)).reshape(t.shape + (1, 1))

    def envelope(self, ts):
        ts = np.asarray(ts, dtype=float)
        return np.abs(np.asarray(self.fn(ts)))


@pytest.fixture(scope="session")
def unit_cert():
    return TailCertificate(K=1.0, m=0, lam=1.0, t_star=0.0)


@pytest.fixture(scope="session")
def scalar_P():
    return ScalarP(lambda t: np.exp(-t))


@pytest.fixture(scope="session")
def ex1_ctx():
    return LinearContext(builtin("example1", alpha=3.0))


@pytest.fixture(scope="session")
def ex2_ctx():
    return LinearContext(builtin("example2", alpha=1.0, beta=0.1))


@pytest.fixture(scope="session")
def ex3_ctx():
    return LinearContext(builtin("example3", alpha=2.0))


def odd_sin_scenario():
    """1-D system with A odd and B odd, so that P = B is genuinely odd."""
    from aeq.matrixfn import MatrixFunction
    from aeq.scenario import RunDirectives, Scenario
    A = MatrixFunction.from_terms(
        [[(Term(1.0, trig="sin", freq=np.pi),)]], parity="odd")
    B = MatrixFunction.from_terms(
        [[(Term(1.0, rate=-2.0, rate_abs=True, trig="sin", freq=1.0),)]],
        parity="odd")
    cert = TailCertificate(K=4.0, m=0, lam=2.0, t_star=0.0)
    run = RunDirectives(horizon=30.0, tol=1e-8, check_tol=1e-3, two_sided=True,
                        initial=[[1.0]], cert="P")
    return Scenario(name="odd_demo", dim=1, A=A, B=B, certs={"P": cert}, run=run)
