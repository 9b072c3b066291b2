import math

import pytest
from sympy import factorint

from divmoments.errors import BudgetError
from divmoments.identities import hb_lambda, hb_sweep, hypothesis_violation, von_mangoldt


def lam(n):
    f = factorint(n)
    return math.log(next(iter(f))) if len(f) == 1 else 0.0


@pytest.mark.parametrize("n,k,z", [(1, 1, 10), (2, 1, 10), (8, 2, 5), (12, 2, 5), (49, 3, 4), (97, 3, 4)])
def test_examples(n, k, z):
    assert hb_lambda(n, k, z) == pytest.approx(lam(n), abs=1e-12)


def test_von_mangoldt_table():
    tab = von_mangoldt(500)
    assert all(abs(tab[n] - lam(n)) < 1e-12 for n in range(2, 501))


@pytest.mark.parametrize("k,z", [(1, 40), (2, 32), (3, 10)])
def test_documented_sweeps(k, z):
    r = hb_sweep(k, z)
    assert r.passed and r.max_deviation < 1e-9
    assert r.n_max == min(math.floor(2 * z ** k), 10**5)


def test_refusals():
    with pytest.raises(ValueError):
        hb_lambda(300, 1, 10)
    with pytest.raises(ValueError):
        hb_lambda(10, 4, 10)
    with pytest.raises(BudgetError):
        hb_lambda(10**5 + 1, 3, 100)


def test_violation_outside_range_is_detected():
    r = hypothesis_violation(1, 10, 2000)
    assert not r.passed
    assert min(r.failures) > 20
