import math

import mpmath
import pytest
from sympy import divisor_count

mpmath.mp.dps = 50


def mp(w):
    """WideReal -> mpf with every stored bit."""
    return mpmath.mpf(w.hi) + mpmath.mpf(w.lo)


def naive_D(x: int) -> int:
    return sum(int(divisor_count(n)) for n in range(1, x + 1))


def mp_delta(x, D):
    x = mpmath.mpf(x)
    return D - x * mpmath.log(x) - (2 * mpmath.euler - 1) * x


@pytest.fixture
def rel():
    def _rel(a, b):
        a, b = mpmath.mpf(a), mpmath.mpf(b)
        return abs(a - b) / max(abs(b), mpmath.mpf(10) ** -300)
    return _rel
