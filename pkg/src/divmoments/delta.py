"""Exact D(x) and double-double Delta(x) = D(x) - x log x - (2 gamma - 1) x."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterator

import numpy as np

from .errors import ConsistencyError
from .sieve import DEFAULT_SEGMENT_SIZE, divisor_counts, iter_segments, prime_mask
from .widereal import (
    WideReal,
    dd_add,
    dd_from_str,
    dd_log,
    dd_mul_d,
    dd_sub,
)

X_MAX = 10**12
STREAM_MAX = 10**9

EULER_GAMMA_STR = "0.5772156649015328606065120900824024310422"
_GAMMA = dd_from_str(EULER_GAMMA_STR)
# 2*gamma - 1, exact in dd up to the last bit of gamma
_TWO_GAMMA_M1 = dd_add(2.0 * _GAMMA[0], 2.0 * _GAMMA[1], -1.0, 0.0)


def divisor_summatory(x: int) -> int:
    """D(x) = sum_{n<=x} d(n) via 2 * sum_{n<=r} floor(x/n) - r^2, r = isqrt(x)."""
    x = int(x)
    if x < 1:
        raise ValueError(f"x must be >= 1, got {x}")
    if x > X_MAX:
        raise ValueError(f"x={x} exceeds the supported maximum {X_MAX}")
    r = math.isqrt(x)
    if r < 64:
        s = sum(x // n for n in range(1, r + 1))
    else:
        s = int((x // np.arange(1, r + 1, dtype=np.int64)).sum())
    return 2 * s - r * r


def euler_gamma() -> WideReal:
    return WideReal._raw(*_GAMMA)


def _bernoulli_even(count: int) -> list[Fraction]:
    """B_2, B_4, ..., B_{2*count} by the Akiyama-Tanigawa recurrence."""
    size = 2 * count + 1
    a = [Fraction(0)] * (size + 1)
    out = []
    for m in range(size + 1):
        a[m] = Fraction(1, m + 1)
        for j in range(m, 0, -1):
            a[j - 1] = j * (a[j - 1] - a[j])
        if m >= 2 and m % 2 == 0:
            out.append(a[0])
    return out


@lru_cache(maxsize=None)
def zeta(s: Fraction | float | str, cutoff: int = 100, corrections: int = 6) -> WideReal:
    """Riemann zeta at s in {3/2, 3} by Euler-Maclaurin summation."""
    s = Fraction(s)
    if s not in (Fraction(3, 2), Fraction(3)):
        raise ValueError(f"zeta is only provided at s = 3/2 and s = 3, not {s}")

    def n_pow_minus_s(n: int) -> WideReal:
        if s.denominator == 1:
            return WideReal(1) / WideReal(n) ** s.numerator
        # n^(-3/2)
        return WideReal(1) / (WideReal(n) * WideReal(n).sqrt())

    total = WideReal(0)
    for n in range(1, cutoff):
        total += n_pow_minus_s(n)
    tail = n_pow_minus_s(cutoff)
    total += tail * WideReal(cutoff) / WideReal(s - 1)
    total += tail / 2
    # B_{2j}/(2j)! * s(s+1)...(s+2j-2) * N^{-s-2j+1}
    rising = s
    npow = tail / WideReal(cutoff)
    for j, b in enumerate(_bernoulli_even(corrections), start=1):
        coeff = b / math.factorial(2 * j) * rising
        total += WideReal(coeff) * npow
        rising *= (s + 2 * j - 1) * (s + 2 * j)
        npow = npow / (cutoff * cutoff)
    return total


def _gamma_self_check() -> None:
    # gamma = H_n - log n - 1/(2n) + sum_j B_{2j}/(2j n^{2j}) + O(n^{-14})
    n = 100
    h = WideReal(0)
    for i in range(1, n + 1):
        h += WideReal(1) / i
    est = h - WideReal(n).log() - WideReal(Fraction(1, 2 * n))
    for j, b in enumerate(_bernoulli_even(6), start=1):
        est += WideReal(b / (2 * j) / Fraction(n) ** (2 * j))
    if abs(float(est - euler_gamma())) > 1e-25:
        raise ConsistencyError(f"stored Euler gamma disagrees with its self-check: {est}")


_gamma_self_check()


# ---------------------------------------------------------------------------
# Delta(x)
# ---------------------------------------------------------------------------

def delta_values(x_hi, x_lo, D) -> tuple[np.ndarray, np.ndarray]:
    """Delta = D - x log x - (2 gamma - 1) x for dd arrays x and integer-valued D.

    D must be exactly representable in float64 (true for x <= 10**12).
    """
    x_hi = np.asarray(x_hi, dtype=np.float64)
    x_lo = np.asarray(x_lo, dtype=np.float64)
    lh, ll = dd_log(x_hi, x_lo)
    # x * log x with x = x_hi + x_lo
    ph, pl = dd_mul_d(lh, ll, x_hi)
    ph, pl = dd_add(ph, pl, lh * x_lo, 0.0 * x_lo)
    ch, cl = dd_mul_d(_TWO_GAMMA_M1[0] + 0.0 * x_hi, _TWO_GAMMA_M1[1] + 0.0 * x_hi, x_hi)
    ch, cl = dd_add(ch, cl, _TWO_GAMMA_M1[0] * x_lo, 0.0 * x_lo)
    Df = np.asarray(D, dtype=np.float64)
    rh, rl = dd_sub(Df, 0.0 * Df, ph, pl)
    return dd_sub(rh, rl, ch, cl)


def delta_of_integers(n: np.ndarray, D: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    nf = np.asarray(n, dtype=np.float64)
    return delta_values(nf, np.zeros_like(nf), D)


@dataclass(frozen=True)
class DeltaSample:
    x: int
    D: int
    delta: WideReal
    gamma: WideReal


def delta_at(x: int) -> DeltaSample:
    x = int(x)
    D = divisor_summatory(x)
    h, l = delta_of_integers(np.array([x], dtype=np.int64), np.array([D], dtype=np.int64))
    return DeltaSample(x, D, WideReal._raw(h[0], l[0]), euler_gamma())


def delta_real(t) -> WideReal:
    """Delta(t) = D(floor t) - t log t - (2 gamma - 1) t for real t >= 1."""
    t = t if isinstance(t, WideReal) else WideReal(t)
    if t < 1:
        raise ValueError("Delta(t) is evaluated for t >= 1 only")
    floor_t = math.floor(t.hi)
    if t.hi == floor_t and t.lo < 0:
        floor_t -= 1
    D = divisor_summatory(floor_t)
    h, l = delta_values(np.array([t.hi]), np.array([t.lo]), np.array([D]))
    return WideReal._raw(h[0], l[0])


# ---------------------------------------------------------------------------
# streaming
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DeltaBlock:
    """Consecutive n in [lo, hi) with exact D(n) and dd Delta(n)."""

    lo: int
    hi: int
    d: np.ndarray
    D: np.ndarray
    delta_hi: np.ndarray
    delta_lo: np.ndarray
    is_prime: np.ndarray | None = None

    @property
    def n(self) -> np.ndarray:
        return np.arange(self.lo, self.hi, dtype=np.int64)


def segment_block(lo: int, hi: int, D_before: int | None = None, with_primes: bool = False,
                  only_primes: bool = False) -> DeltaBlock:
    """Sieve [lo, hi), accumulate D from D(lo - 1) and cross-check D(hi - 1).

    With ``only_primes`` Delta is evaluated at primes only (other entries are 0),
    which saves most of the log work in prime sweeps.
    """
    if D_before is None:
        D_before = divisor_summatory(lo - 1) if lo > 1 else 0
    d = divisor_counts(lo, hi)
    D = np.cumsum(d, dtype=np.int64) + D_before
    expected = divisor_summatory(hi - 1)
    if int(D[-1]) != expected:
        raise ConsistencyError(
            f"streamed D({hi - 1}) = {int(D[-1])} but the hyperbola method gives {expected}"
        )
    mask = prime_mask(lo, hi) if (with_primes or only_primes) else None
    n = np.arange(lo, hi, dtype=np.int64)
    if only_primes:
        dh = np.zeros(hi - lo)
        dl = np.zeros(hi - lo)
        if mask.any():
            ph, pl = delta_of_integers(n[mask], D[mask])
            dh[mask], dl[mask] = ph, pl
    else:
        dh, dl = delta_of_integers(n, D)
    return DeltaBlock(lo, hi, d, D, dh, dl, mask)


def iter_delta_blocks(lo: int, hi: int, segment_size: int = DEFAULT_SEGMENT_SIZE,
                      with_primes: bool = False) -> Iterator[DeltaBlock]:
    """Ascending blocks covering [lo, hi); D is carried across block boundaries."""
    D_before = None
    for a, b in iter_segments(lo, hi, segment_size):
        block = segment_block(a, b, D_before, with_primes=with_primes)
        D_before = int(block.D[-1])
        yield block


@dataclass(frozen=True)
class StreamSummary:
    x_max: int
    visited: int
    D_final: int
    boundary_checks: int


def delta_stream(x_max: int, visitor: Callable[[int, int, WideReal], None] | None = None,
                 segment_size: int = DEFAULT_SEGMENT_SIZE) -> StreamSummary:
    """Visit every n <= x_max in ascending order with (n, D(n), Delta(n))."""
    x_max = int(x_max)
    if x_max < 1 or x_max > STREAM_MAX:
        raise ValueError(f"x_max must be in [1, {STREAM_MAX}], got {x_max}")
    visited = checks = 0
    D_final = 0
    for block in iter_delta_blocks(1, x_max + 1, segment_size):
        checks += 1
        if visitor is not None:
            for i, n in enumerate(range(block.lo, block.hi)):
                visitor(n, int(block.D[i]), WideReal._raw(block.delta_hi[i], block.delta_lo[i]))
        visited += block.hi - block.lo
        D_final = int(block.D[-1])
    return StreamSummary(x_max, visited, D_final, checks)
