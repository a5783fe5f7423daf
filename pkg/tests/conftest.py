import numpy as np
import pytest

from commsim import (LeastSquaresSpec, ProblemInstance,
                     gen_constructed_quadratic, gen_least_squares)


def quad_identity_problem(n=2, d=2):
    """f_i(x) = ||x||^2 / 2 on every worker."""
    return ProblemInstance(
        n=n, d=d,
        local_value=lambda i, x: 0.5 * float(x @ x),
        local_grad=lambda i, x: np.array(x, dtype=float),
        L=1.0, mu=1.0, delta=float(d),
        x0=np.zeros(d), x_star=np.zeros(d), f_star=0.0,
        name="identity_quadratic")


@pytest.fixture(scope="session")
def quad_problem():
    return quad_identity_problem()


@pytest.fixture(scope="session")
def constructed():
    return gen_constructed_quadratic(mu=1.0, L=1e4, d=20, n=400)


@pytest.fixture(scope="session")
def least_squares():
    return gen_least_squares(LeastSquaresSpec(n=400, M=25, d=20, cond=100.0, seed=7))


@pytest.fixture(scope="session")
def small_least_squares():
    return gen_least_squares(LeastSquaresSpec(n=2, M=2, d=3, cond=10.0, seed=3))
