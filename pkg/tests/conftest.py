import math

import pytest

from cmc1 import bryant as B


@pytest.fixture(scope="session")
def catenoid():
    """Catenoid cousin b = 3/4, eps = 1 and its Bjorling surface."""
    case = B.catenoid_cousin(0.75, 1)
    surface, _ = B.solve_bjorling(case.data, ns=0, nt=0)
    return case, surface


@pytest.fixture(scope="session")
def hyperbolic_case():
    a, b, c, d, lam = B.hyperbolic_invariant_params(1.5, 0.3)
    case = B.hyperbolic_invariant(a, b, c, d, lam)
    surface, _ = B.solve_bjorling(case.data, ns=0, nt=0)
    return case, surface


@pytest.fixture(scope="session")
def helicoid_case():
    case = B.helicoid(0.5, 0.7, 1.3)
    surface, _ = B.solve_bjorling(case.data, ns=0, nt=0)
    return case, surface


TWO_PI = 2 * math.pi
