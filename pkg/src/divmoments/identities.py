"""Heath-Brown's identity evaluated by brute-force divisor descent.

For n <= 2 z^k,

    Lambda(n) = sum_{j=1}^{k} (-1)^{j-1} C(k, j)
                sum_{n_1 ... n_{2j} = n, n_{j+1}, ..., n_{2j} <= z} log(n_1) mu(n_{j+1}) ... mu(n_{2j}).

For fixed j the inner sum is sum_{n_1 | n} log(n_1) h(n / n_1, j - 1, j), where
h(m, a, b) is the signed number of ordered factorizations of m into a free
factors followed by b factors <= z weighted by their Moebius values.
Factors equal to 1 are allowed throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import BudgetError
from .sieve import build_segment, mobius_table

HB_MAX_K = 3
HB_MAX_N = 10**5
SWEEP_MAX_N = 10**5


@lru_cache(maxsize=None)
def _divisors(m: int) -> tuple[int, ...]:
    small = [d for d in range(1, math.isqrt(m) + 1) if m % d == 0]
    return tuple(sorted(set(small + [m // d for d in small])))


@lru_cache(maxsize=2)
def _mu(bound: int):
    return mobius_table(bound)


class _Descent:
    """Memoized h(m, a, b) for one threshold z."""

    def __init__(self, z: float, bound: int):
        self.z = z
        self.mu = _mu(max(bound, 16))
        self.memo: dict[tuple[int, int, int], int] = {}

    def h(self, m: int, a: int, b: int) -> int:
        if a == 0 and b == 0:
            return 1 if m == 1 else 0
        key = (m, a, b)
        got = self.memo.get(key)
        if got is not None:
            return got
        total = 0
        if b > 0:
            for d in _divisors(m):
                if d > self.z:
                    break
                mu = int(self.mu[d])
                if mu:
                    total += mu * self.h(m // d, a, b - 1)
        else:
            for d in _divisors(m):
                total += self.h(m // d, a - 1, 0)
        self.memo[key] = total
        return total


def _check(n: int, k: int, z: float, allow_outside: bool) -> None:
    if not 1 <= k <= HB_MAX_K:
        raise ValueError(f"identity order k must be in [1, {HB_MAX_K}], got {k}")
    if z < 1:
        raise ValueError(f"z must be >= 1, got {z}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if n > HB_MAX_N:
        raise BudgetError(f"n={n} exceeds the enumeration budget {HB_MAX_N}")
    if not allow_outside and n > 2 * z ** k:
        raise ValueError(f"n={n} > 2 z^k = {2 * z ** k:g}; the identity is not guaranteed there")


def _hb_value(n: int, k: int, descent: _Descent) -> float:
    terms = []
    for j in range(1, k + 1):
        coeff = (-1) ** (j - 1) * math.comb(k, j)
        for n1 in _divisors(n):
            if n1 == 1:
                continue
            w = descent.h(n // n1, j - 1, j)
            if w:
                terms.append(coeff * w * math.log(n1))
    return math.fsum(terms)


def hb_lambda(n: int, k: int, z: float, allow_outside: bool = False) -> float:
    """Right side of Heath-Brown's identity at n."""
    n, k = int(n), int(k)
    _check(n, k, z, allow_outside)
    return _hb_value(n, k, _Descent(z, n))


def von_mangoldt(n_max: int):
    """Lambda(n) for 0 <= n <= n_max from the sieve (index 0 unused)."""
    out = np.zeros(n_max + 1)
    out[1:] = build_segment(1, n_max + 1, segment_size=max(n_max, 1)).lambda_log
    return out


@dataclass(frozen=True)
class HBReport:
    k: int
    z: float
    n_max: int
    max_deviation: float
    worst_n: int
    failures: tuple[int, ...]

    @property
    def passed(self) -> bool:
        return not self.failures


def hb_sweep(k: int, z: float, n_max: int | None = None, n_lo: int = 1,
             allow_outside: bool = False) -> HBReport:
    """Compare the identity with sieved Lambda for n_lo <= n <= n_max.

    n_max defaults to min(floor(2 z^k), 10^5).  A point fails when the
    deviation exceeds 1e-9 (1 + log n).
    """
    limit = min(math.floor(2 * z ** k), SWEEP_MAX_N)
    n_max = limit if n_max is None else int(n_max)
    if not allow_outside and n_max > 2 * z ** k:
        raise ValueError(f"n_max={n_max} > 2 z^k = {2 * z ** k:g}")
    _check(n_max, k, z, allow_outside)
    lam = von_mangoldt(n_max)
    descent = _Descent(z, n_max)
    worst, worst_n, failures = 0.0, 0, []
    for n in range(n_lo, n_max + 1):
        dev = abs(_hb_value(n, k, descent) - lam[n])
        if dev > worst:
            worst, worst_n = dev, n
        if dev > 1e-9 * (1 + math.log(n)):
            failures.append(n)
    return HBReport(k, z, n_max, worst, worst_n, tuple(failures))


def hypothesis_violation(k: int = 1, z: float = 10, n_limit: int = 10**4) -> HBReport:
    """Sweep n in (2 z^k, n_limit] where the identity is not promised to hold."""
    start = math.floor(2 * z ** k) + 1
    return hb_sweep(k, z, n_max=n_limit, n_lo=start, allow_outside=True)
