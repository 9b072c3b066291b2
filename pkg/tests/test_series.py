import itertools
import math
import warnings
from fractions import Fraction

import mpmath
import pytest
from sympy import divisor_count

from conftest import mp
from divmoments.errors import BudgetError
from divmoments.radicals import radical_sum
from divmoments.series import (
    B_k,
    b_k,
    constants,
    cos_quarter_pi,
    normalizer,
    s_kl,
    s_kl_bruteforce,
    tail_probe,
    theta,
)


def naive_s(k, l, y):
    """Ordered scan with exact kernel decisions, in mpmath."""
    w = [0] + [int(divisor_count(n)) / mpmath.mpf(n) ** 0.75 for n in range(1, y + 1)]
    signs = [1] * l + [-1] * (k - l)
    total, count = mpmath.mpf(0), 0
    for ns in itertools.product(range(1, y + 1), repeat=k):
        if radical_sum(ns, signs).is_zero():
            total += math.prod(w[n] for n in ns)
            count += 1
    return total, count


def test_k2_closed_form():
    s = s_kl(2, 1, 10)
    want = mpmath.fsum(int(divisor_count(n)) ** 2 / mpmath.mpf(n) ** 1.5 for n in range(1, 11))
    assert float(s.value) == pytest.approx(float(want), rel=1e-14)
    assert s.solutions == 10


def test_k3_smallest_case():
    s = s_kl(3, 1, 4)
    assert s.solutions == 1
    assert float(s.value) == pytest.approx(3 / 2 ** 1.5, rel=1e-15)
    assert s_kl(3, 2, 4) == s_kl(3, 2, 4)
    assert s_kl(3, 2, 4).value == s.value


@pytest.mark.parametrize("k,y", [(2, 30), (3, 16), (4, 10), (5, 5)])
def test_against_naive_ordered_scan(k, y):
    for l in range(1, k):
        got = s_kl(k, l, y)
        want, count = naive_s(k, l, y)
        assert got.solutions == count
        assert float(got.value) == pytest.approx(float(want), rel=1e-13)


@pytest.mark.parametrize("y", [50, 120, 200])
def test_against_exhaustive_oracle(y):
    for k in (2, 3):
        for l in range(1, k):
            a, b = s_kl(k, l, y), s_kl_bruteforce(k, l, y)
            assert a.solutions == b.solutions
            assert float(a.value) == pytest.approx(float(b.value), rel=1e-14)


def test_symmetry_is_exact():
    for k in range(2, 6):
        for y in range(1, 51):
            for l in range(1, k):
                a, b = s_kl(k, l, y), s_kl(k, k - l, y)
                assert a.value == b.value and a.solutions == b.solutions


def test_monotone_in_y():
    prev = {l: s_kl(4, l, 1) for l in (1, 2, 3)}
    for y in range(2, 60):
        for l in (1, 2, 3):
            cur = s_kl(4, l, y)
            assert cur.value >= prev[l].value and cur.solutions >= prev[l].solutions
            prev[l] = cur


def test_diagonal_lower_bound_k4():
    y = 40
    w = [0] + [int(divisor_count(n)) / n ** 0.75 for n in range(1, y + 1)]
    diag = 0.0
    for n1, n2 in itertools.product(range(1, y + 1), repeat=2):
        for n3, n4 in {(n1, n2), (n2, n1)}:
            diag += w[n1] * w[n2] * w[n3] * w[n4]
    assert float(s_kl(4, 2, y).value) >= diag


def test_B_k_examples():
    assert B_k(2, 77) == s_kl(2, 1, 77).value
    assert float(B_k(3, 4)) == pytest.approx(2.25, rel=1e-15)
    assert B_k(4, 1) == 3


def test_cos_table_is_exact():
    assert cos_quarter_pi(2) == 0 and cos_quarter_pi(-2) == 0 and cos_quarter_pi(6) == 0
    assert cos_quarter_pi(0) == 1 and cos_quarter_pi(4) == -1
    assert abs(mp(cos_quarter_pi(1)) - mpmath.sqrt(2) / 2) < 1e-32


def test_normalization():
    for k in range(2, 10):
        y = {2: 500, 3: 200, 4: 60, 5: 30}.get(k, 12)
        B, b = B_k(k, y), b_k(k, y)
        assert abs(mp(b * normalizer(k)) - mp(B)) <= 1e-25 * abs(mp(B)) + 1e-300
        want = (mpmath.sqrt(2) * mpmath.pi) ** k * 2 ** (k - 1)
        assert abs(mp(normalizer(k)) - want) < 1e-28 * want
    s = s_kl(2, 1, 1000).value
    assert abs(mp(b_k(2, 1000)) * 4 * mpmath.pi ** 2 - mp(s)) < 1e-27 * mp(s)


def test_theta():
    assert theta(3) == Fraction(1, 48)
    assert theta(5) == Fraction(1, 88)
    assert theta(8) == Fraction(1, 548)
    with pytest.warns(UserWarning, match="40848"):
        assert theta(9) == Fraction(19, 40886)
    with pytest.raises(ValueError):
        theta(2)


def test_bundle():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        c = constants(3, 100)
    assert c.theta == Fraction(1, 48)
    assert c.b_k == c.B_k / normalizer(3)
    j = c.to_json()
    assert j["theta_num"] == 1 and j["theta_den"] == 48 and len(j["s_values"]) == 2


def test_refusals():
    with pytest.raises(BudgetError, match="estimated"):
        s_kl(4, 2, 10**4)
    with pytest.raises(ValueError):
        s_kl(10, 1, 5)
    with pytest.raises(ValueError):
        s_kl(3, 3, 5)


def test_tail_probe_k3_increments():
    probe = tail_probe(3, 1, [4, 16, 64])
    assert [r.y for r in probe.rows] == [4, 16, 64]
    assert all(r.increment >= 0 for r in probe.rows[1:])
