import itertools
import math
from collections import Counter

import numpy as np
import pytest

from divmoments.delta import iter_delta_blocks
from divmoments.errors import BudgetError
from divmoments.radicals import SignPattern, all_patterns, radical_sum
from divmoments.spacing import (
    RATIO_CAP,
    SpacingInstance,
    count_A,
    count_B,
    count_large_values,
    count_pairs_v,
    count_pairs_v_bruteforce,
    sweep_A,
    sweep_B,
    zero_tuples,
)

PMM = SignPattern.from_signs((1, -1, -1))


def test_count_A_example():
    inst = SpacingInstance(3, (4, 1, 1), PMM, rho=0.1)
    assert count_A(inst).count == 1
    assert zero_tuples(inst) == 1


def test_count_A_empty_event():
    # m1 in 3..4 with m2 = m3 = 2: alpha = sqrt(m1) - 2 sqrt(2) is never tiny
    r = count_A(SpacingInstance(3, (2, 1, 1), PMM, rho=1e-3))
    assert r.count == 0


def test_count_A_monotone_in_rho():
    counts = [count_A(SpacingInstance(3, (16, 8, 4), PMM, rho=2.0 ** -j)).count for j in range(8)]
    assert counts == sorted(counts, reverse=True)


def test_count_A_boundary_symbolic():
    # m1 in 9..16, m2, m3 in 3..4: alpha = 3 - 2 - 2 = -1 at (9, 4, 4)
    at = SpacingInstance(3, (8, 2, 2), PMM, rho=1.0)
    above = SpacingInstance(3, (8, 2, 2), PMM, rho=1.0 + 1e-12)
    attaining = 0
    for ms in itertools.product(range(9, 17), range(3, 5), range(3, 5)):
        a = radical_sum(ms, PMM.signs)
        if (a - radical_sum([1])).is_zero() or (a + radical_sum([1])).is_zero():
            attaining += 1
    assert attaining >= 1
    assert count_A(above).count - count_A(at).count == attaining


def test_count_A_matches_naive_float():
    inst = SpacingInstance(4, (6, 5, 4, 3), SignPattern.from_signs((1, -1, 1, -1)), rho=0.3)
    naive = sum(
        abs(sum(s * math.sqrt(m) for s, m in zip(inst.pattern.signs, ms))) < 0.3
        for ms in itertools.product(*(range(N + 1, 2 * N + 1) for N in inst.ranges))
    )
    assert count_A(inst).count == naive


def test_instance_validation():
    with pytest.raises(ValueError):
        SpacingInstance(3, (4, 1, 1), PMM, rho=3.0)
    with pytest.raises(ValueError):
        SpacingInstance(3, (4, 1), PMM, rho=0.1)
    with pytest.raises(ValueError):
        SpacingInstance(3, (4, 1, 1), PMM, beta=1.0)
    with pytest.raises(BudgetError):
        count_A(SpacingInstance(3, (1000, 1000, 1000), PMM, rho=0.1))


@pytest.mark.parametrize("N,X", [(10, 100), (10, 1), (37, 0.5), (100, 3), (200, 0.25), (64, 2)])
def test_pairs_v_against_bruteforce(N, X):
    assert count_pairs_v(N, X).count == count_pairs_v_bruteforce(N, X)


def test_pairs_v_examples():
    assert count_pairs_v(10, 100).count == 10
    assert count_pairs_v(10**4, math.inf).count == 10**4
    r = count_pairs_v(1000, 1)
    assert r.count <= (1 + 2 * math.sqrt(2000)) * 1000
    with pytest.raises(BudgetError):
        count_pairs_v(10**6 + 1, 1)


def test_pairs_v_perfect_square_boundary():
    # |sqrt(n1) - sqrt(n2)| = 1 exactly for (k+1)^2, k^2: must be counted at X = 1/2
    assert count_pairs_v(30, 0.5).count == count_pairs_v_bruteforce(30, 0.5)


def _grouping_oracle(ranges, pattern, R):
    groups = Counter()
    for ms in itertools.product(*(range(N + 1, 2 * N + 1) for N in ranges)):
        if radical_sum(ms, pattern.signs).is_zero():
            continue
        for r in range(R + 1, 2 * R + 1):
            groups[radical_sum([m * r for m in ms], pattern.signs)] += 1
    return sum(c * c for c in groups.values())


@pytest.mark.parametrize("pattern", all_patterns(3), ids=str)
def test_count_B_exact_matching(pattern):
    inst = SpacingInstance(3, (2, 2, 2), pattern, R=2, tol=1e-9)
    assert count_B(inst).count == _grouping_oracle((2, 2, 2), pattern, 2)


def test_count_B_vacuous_tolerance():
    inst = SpacingInstance(3, (2, 2, 2), PMM, R=2, tol=math.inf)
    assert count_B(inst).count == (2 * 2 * 2) ** 2 * 2 ** 2


def test_count_B_against_naive_pairs():
    inst = SpacingInstance(3, (3, 2, 2), PMM, R=3, tol=0.05)
    ts = []
    for ms in itertools.product(range(4, 7), range(3, 5), range(3, 5)):
        a = math.sqrt(ms[0]) - math.sqrt(ms[1]) - math.sqrt(ms[2])
        if radical_sum(ms, PMM.signs).is_zero():
            continue
        ts += [a * math.sqrt(r) for r in range(4, 7)]
    ts = np.array(ts)
    naive = int((np.abs(ts[:, None] - ts[None, :]) <= 0.05).sum())
    assert count_B(inst).count == naive


def test_count_B_swap_symmetry():
    inst = SpacingInstance(3, (4, 2, 2), PMM, R=4, tol=0.1)
    r = count_B(inst)
    # the relation is symmetric, so off-diagonal pairs come in swapped couples
    assert (r.count - r.extra["values"]) % 2 == 0


def test_count_B_reports_both_normalizations():
    r = count_B(SpacingInstance(3, (4, 2, 2), PMM, R=2, tol=1.0))
    assert r.extra["bound_alt"] >= r.bound
    assert r.extra["ratio_alt"] <= r.ratio


def test_large_values_examples():
    T = 10**5
    r = count_large_values(T, T ** 0.25)
    assert r.count >= 1 and r.ratio <= RATIO_CAP
    top = max(float(b.delta_hi.max()) for b in iter_delta_blocks(1, T + 1))
    assert count_large_values(T, top + 1).count == 0
    counts = [count_large_values(T, T ** 0.25 * 2 ** j).count for j in range(4)]
    assert counts == sorted(counts, reverse=True)
    with pytest.raises(ValueError):
        count_large_values(T, T ** 0.2)


def test_large_values_separation():
    T, V = 10**5, 10**5 ** 0.25
    r = count_large_values(T, V)
    pts = r.extra["points"]
    assert all(b - a >= V for a, b in zip(pts, pts[1:]))


def test_documented_sweeps_within_cap():
    a = sweep_A()
    assert max(r.ratio for _, r in a) <= RATIO_CAP
    b = sweep_B()
    assert max(r.ratio for _, r in b) <= RATIO_CAP
