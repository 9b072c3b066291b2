import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from conftest import mp, mp_delta, naive_D
from divmoments.delta import (
    DeltaBlock,
    delta_at,
    delta_real,
    delta_stream,
    divisor_summatory,
    euler_gamma,
    iter_delta_blocks,
    segment_block,
    zeta,
)
from divmoments.errors import ConsistencyError


def test_divisor_summatory_examples():
    assert divisor_summatory(1) == 1
    assert divisor_summatory(10) == 27
    assert divisor_summatory(100) == 482
    for x in [2, 3, 63, 64, 4095, 4096, 4097, 10007]:
        assert divisor_summatory(x) == naive_D(x)
    with pytest.raises(ValueError):
        divisor_summatory(0)
    with pytest.raises(ValueError):
        divisor_summatory(10**12 + 1)


@pytest.mark.parametrize("x", [1, 2, 3, 5, 7, 10, 100, 10**6 + 3, 10**9 + 7, 999_999_999_989])
def test_delta_matches_mpmath(x):
    s = delta_at(x)
    want = mp_delta(x, s.D)
    assert abs(mp(s.delta) - want) < 1e-30 * x * math.log(x + 1) + 1e-30


def test_delta_examples():
    assert float(delta_at(1).delta) == pytest.approx(0.8455686701969343, rel=1e-15)
    assert float(delta_at(10).delta) == pytest.approx(float(mp_delta(10, 27)), rel=1e-15)
    assert float(delta_at(100).delta) == pytest.approx(6.039848420884291, rel=1e-15)


def test_delta_real_between_integers():
    t = Fraction(101, 2)
    v = delta_real(float(t))
    assert abs(mp(v) - mp_delta(mpmath.mpf(50.5), divisor_summatory(50))) < 1e-28
    with pytest.raises(ValueError):
        delta_real(0.5)


def test_gamma_and_zeta():
    assert abs(mp(euler_gamma()) - mpmath.euler) < 1e-32
    assert abs(mp(zeta(Fraction(3, 2))) - mpmath.zeta(1.5)) < 1e-29
    assert abs(mp(zeta(3)) - mpmath.zeta(3)) < 1e-30
    with pytest.raises(ValueError):
        zeta(2)


def test_blocks_carry_D_and_check_boundaries():
    blocks = list(iter_delta_blocks(1, 5000, segment_size=777))
    D = np.concatenate([b.D for b in blocks])
    assert D[-1] == naive_D(4999)
    assert all(isinstance(b, DeltaBlock) for b in blocks)
    with pytest.raises(ConsistencyError):
        segment_block(100, 200, D_before=divisor_summatory(99) + 1)


def test_primes_only_block_agrees_with_full_block():
    full = segment_block(10_000, 12_000, with_primes=True)
    fast = segment_block(10_000, 12_000, only_primes=True)
    m = full.is_prime
    assert np.array_equal(full.delta_hi[m], fast.delta_hi[m])
    assert np.array_equal(full.delta_lo[m], fast.delta_lo[m])


def test_stream_visits_in_order():
    seen = []
    summary = delta_stream(300, lambda n, D, d: seen.append((n, D, d)), segment_size=64)
    assert [n for n, _, _ in seen] == list(range(1, 301))
    assert summary.D_final == naive_D(300)
    assert summary.boundary_checks == 5
    n, D, d = seen[99]
    assert d == delta_at(100).delta
