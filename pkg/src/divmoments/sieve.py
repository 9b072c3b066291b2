"""Segmented sieving of d(n), mu(n), Lambda(n) and primality on [lo, hi)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

DEFAULT_SEGMENT_SIZE = 1 << 22
SPF_MAX_BOUND = 10**7


@lru_cache(maxsize=8)
def base_primes(limit: int) -> np.ndarray:
    """Primes <= limit by a plain Eratosthenes sieve."""
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    return np.flatnonzero(flags).astype(np.int64)


def _check_range(lo: int, hi: int, cap: int | None = None) -> None:
    if lo < 1:
        raise ValueError(f"lo must be >= 1, got {lo}")
    if hi <= lo:
        raise ValueError(f"empty range [{lo}, {hi})")
    if cap is not None and hi - lo > cap:
        raise ValueError(f"segment length {hi - lo} exceeds the configured cap {cap}")


def _first_multiple(p: int, lo: int, start: int) -> int:
    return max(start, -(-lo // p) * p)


@dataclass(frozen=True)
class SieveSegment:
    """Exact arithmetic tables for the integers lo <= n < hi (index n - lo)."""

    lo: int
    hi: int
    d: np.ndarray
    mu: np.ndarray
    lambda_log: np.ndarray
    is_prime: np.ndarray

    def __len__(self) -> int:
        return self.hi - self.lo

    @property
    def n(self) -> np.ndarray:
        return np.arange(self.lo, self.hi, dtype=np.int64)

    def primes(self) -> np.ndarray:
        return np.flatnonzero(self.is_prime).astype(np.int64) + self.lo


def prime_mask(lo: int, hi: int) -> np.ndarray:
    _check_range(lo, hi)
    mask = np.ones(hi - lo, dtype=bool)
    if lo == 1:
        mask[0] = False
    for p in base_primes(math.isqrt(hi - 1)):
        p = int(p)
        s = _first_multiple(p, lo, p * p)
        if s < hi:
            mask[s - lo :: p] = False
    return mask


def divisor_counts(lo: int, hi: int) -> np.ndarray:
    """d(n) on [lo, hi): each divisor q <= sqrt(n) contributes 2, or 1 if n = q^2."""
    d = np.zeros(hi - lo, dtype=np.uint32)
    for q in range(1, math.isqrt(hi - 1) + 1):
        q2 = q * q
        s = _first_multiple(q, lo, q2)
        if s >= hi:
            continue
        d[s - lo :: q] += 2
        if q2 >= lo:
            d[q2 - lo] -= 1
    return d


def build_segment(lo: int, hi: int, segment_size: int = DEFAULT_SEGMENT_SIZE) -> SieveSegment:
    _check_range(lo, hi, segment_size)
    length = hi - lo
    n = np.arange(lo, hi, dtype=np.int64)

    is_prime = prime_mask(lo, hi)

    mu = np.ones(length, dtype=np.int8)
    prod = np.ones(length, dtype=np.int64)
    lam = np.zeros(length, dtype=np.float64)
    for p in base_primes(math.isqrt(hi - 1)):
        p = int(p)
        s = _first_multiple(p, lo, p)
        if s < hi:
            mu[s - lo :: p] *= -1
            prod[s - lo :: p] *= p
        p2 = p * p
        s2 = _first_multiple(p2, lo, p2)
        if s2 < hi:
            mu[s2 - lo :: p2] = 0
        logp = np.log(np.float64(p))
        pk = p2
        while pk < hi:
            if pk >= lo:
                lam[pk - lo] = logp
            pk *= p
    # a leftover cofactor > sqrt(hi) is a single prime
    mu[prod != n] *= -1
    lam[is_prime] = np.log(n[is_prime].astype(np.float64))

    return SieveSegment(lo, hi, divisor_counts(lo, hi), mu, lam, is_prime)


def iter_segments(lo: int, hi: int, segment_size: int = DEFAULT_SEGMENT_SIZE):
    """Yield (seg_lo, seg_hi) windows tiling [lo, hi) in ascending order."""
    _check_range(lo, hi)
    for s in range(lo, hi, segment_size):
        yield s, min(s + segment_size, hi)


def primes_in(lo: int, hi: int, segment_size: int = DEFAULT_SEGMENT_SIZE) -> np.ndarray:
    _check_range(lo, hi)
    parts = [np.flatnonzero(prime_mask(a, b)).astype(np.int64) + a
             for a, b in iter_segments(lo, hi, segment_size)]
    return np.concatenate(parts)


def divisor_table(bound: int) -> np.ndarray:
    """d(n) for 0 <= n <= bound (index 0 unused, set to 0)."""
    out = np.zeros(bound + 1, dtype=np.uint32)
    for a, b in iter_segments(1, bound + 1):
        out[a:b] = divisor_counts(a, b)
    return out


def mobius_table(bound: int) -> np.ndarray:
    out = np.zeros(bound + 1, dtype=np.int8)
    for a, b in iter_segments(1, bound + 1):
        out[a:b] = build_segment(a, b).mu
    return out


# ---------------------------------------------------------------------------
# smallest prime factors and squarefree kernels
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpfTable:
    bound: int
    spf: np.ndarray

    @classmethod
    def build(cls, bound: int) -> "SpfTable":
        if bound < 1 or bound > SPF_MAX_BOUND:
            raise ValueError(f"SpfTable bound must be in [1, {SPF_MAX_BOUND}], got {bound}")
        spf = np.zeros(bound + 1, dtype=np.int64)
        for p in base_primes(math.isqrt(bound)):
            p = int(p)
            block = spf[p * p :: p]
            block[block == 0] = p
        rest = spf == 0
        spf[rest] = np.arange(bound + 1)[rest]
        return cls(bound, spf)


@lru_cache(maxsize=4)
def _shared_spf(bound: int) -> SpfTable:
    return SpfTable.build(bound)


def spf_table(at_least: int) -> SpfTable:
    """Cached table covering at least ``at_least``; grows by powers of two."""
    if at_least > SPF_MAX_BOUND:
        raise ValueError(f"{at_least} is beyond the SpfTable limit {SPF_MAX_BOUND}")
    bound = 1 << 16
    while bound < at_least:
        bound <<= 1
    return _shared_spf(min(bound, SPF_MAX_BOUND))


def factor_kernel(n: int, spf: SpfTable | None = None) -> tuple[int, int]:
    """Return (a, b) with n = a^2 b and b squarefree."""
    n = int(n)
    if spf is None:
        spf = spf_table(n)
    if n < 1 or n > spf.bound:
        raise ValueError(f"n={n} outside the SpfTable range [1, {spf.bound}]")
    a = b = 1
    table = spf.spf
    while n > 1:
        p = int(table[n])
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        a *= p ** (e // 2)
        if e & 1:
            b *= p
    return a, b


def kernel_table(bound: int) -> tuple[np.ndarray, np.ndarray]:
    """Arrays (a, b) with n = a[n]^2 b[n], b[n] squarefree, for 0 <= n <= bound."""
    b = np.arange(bound + 1, dtype=np.int64)
    a = np.ones(bound + 1, dtype=np.int64)
    for p in base_primes(math.isqrt(bound)):
        p = int(p)
        step = p * p
        while step <= bound:
            b[step::step] //= p * p
            a[step::step] *= p
            step *= p * p
    return a, b
