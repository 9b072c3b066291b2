"""Truncated Voronoi series delta_1(x, N) and the remainder delta_2 = Delta - delta_1.

delta_1(x, N) = x^{1/4} / (sqrt(2) pi) * sum_{n<=N} d(n) n^{-3/4} cos(4 pi sqrt(n x) - pi/4)

The cosine is taken as cos(2 pi f) with f = 2 sqrt(n x) - 1/8 formed in
double-double, so the phase keeps ~25 correct digits after dropping the
integer part even when n x is near 10^15.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .delta import delta_real, segment_block
from .sieve import DEFAULT_SEGMENT_SIZE, divisor_table, iter_segments
from .widereal import (
    PI,
    SQRT2,
    WideReal,
    dd_add,
    dd_add_d,
    dd_cos_2pi,
    dd_div,
    dd_mul,
    dd_mul_d,
    dd_pairwise_sum,
    dd_sqrt,
    dd_sub,
)

N_MAX = 10**7
_SQRT2_PI = dd_mul(SQRT2[0], SQRT2[1], PI[0], PI[1])


@lru_cache(maxsize=4)
def _d_table(bound: int) -> np.ndarray:
    return divisor_table(bound)


def _divisors_upto(N: int) -> np.ndarray:
    """d(1..N) from a cached table grown by powers of two."""
    if N > N_MAX:
        raise ValueError(f"N={N} exceeds the divisor table limit {N_MAX}")
    bound = 1 << 10
    while bound < N:
        bound <<= 1
    return _d_table(min(bound, N_MAX))[1:N + 1]


def _coefficients(N: int) -> tuple[np.ndarray, np.ndarray]:
    """d(n) n^{-3/4} for n = 1..N in double-double."""
    n = np.arange(1, N + 1, dtype=np.float64)
    rh, rl = dd_sqrt(n, np.zeros_like(n))
    qh, ql = dd_sqrt(rh, rl)
    ph, pl = dd_mul(rh, rl, qh, ql)
    d = _divisors_upto(N).astype(np.float64)
    return dd_div(d, np.zeros_like(d), ph, pl)


def _amplitude(xh, xl):
    """x^{1/4} / (sqrt(2) pi)."""
    rh, rl = dd_sqrt(xh, xl)
    qh, ql = dd_sqrt(rh, rl)
    return dd_div(qh, ql, _SQRT2_PI[0] + 0.0 * qh, _SQRT2_PI[1] + 0.0 * qh)


def _phase_cos(xh, xl, n: np.ndarray | float):
    """cos(4 pi sqrt(n x) - pi/4) in dd; broadcasting over x and n."""
    ph, pl = dd_mul_d(xh, xl, n)
    sh, sl = dd_sqrt(ph, pl)
    fh, fl = dd_add_d(2.0 * sh, 2.0 * sl, -0.125)
    return dd_cos_2pi(fh, fl)


def _as_dd(x) -> tuple[float, float]:
    w = x if isinstance(x, WideReal) else WideReal(x)
    return w.hi, w.lo


def delta1(x, N: int) -> WideReal:
    """Truncated Voronoi sum with exactly the terms n <= N (N = 0 gives 0)."""
    xh, xl = _as_dd(x)
    if not xh > 1.0:
        raise ValueError(f"x must exceed 1, got {x}")
    N = int(N)
    if N < 0:
        raise ValueError(f"N must be >= 0, got {N}")
    if N == 0:
        return WideReal(0)
    ch, cl = _coefficients(N)
    n = np.arange(1, N + 1, dtype=np.float64)
    cosh, cosl = _phase_cos(np.full(N, xh), np.full(N, xl), n)
    th, tl = dd_mul(ch, cl, cosh, cosl)
    sh, sl = dd_pairwise_sum(th, tl)
    ah, al = _amplitude(xh, xl)
    return WideReal._raw(*dd_mul(ah, al, sh, sl))


def delta1_many(xs: np.ndarray, N: int) -> tuple[np.ndarray, np.ndarray]:
    """delta_1 at many integer points with small N; loops over n, vectorized over x."""
    xs = np.asarray(xs, dtype=np.float64)
    if N == 0 or xs.size == 0:
        return np.zeros_like(xs), np.zeros_like(xs)
    ch, cl = _coefficients(N)
    xl = np.zeros_like(xs)
    sh, sl = np.zeros_like(xs), np.zeros_like(xs)
    for i in range(N):
        cosh, cosl = _phase_cos(xs, xl, float(i + 1))
        th, tl = dd_mul(cosh, cosl, ch[i], cl[i])
        sh, sl = dd_add(sh, sl, th, tl)
    ah, al = _amplitude(xs, xl)
    return dd_mul(ah, al, sh, sl)


@dataclass(frozen=True)
class VoronoiEval:
    x: WideReal
    N: int
    delta1: WideReal
    delta2: WideReal

    @property
    def delta(self) -> WideReal:
        return self.delta1 + self.delta2


def voronoi_eval(x, N: int) -> VoronoiEval:
    d1 = delta1(x, N)
    return VoronoiEval(WideReal(x), int(N), d1, delta_real(x) - d1)


def delta2(x, N: int) -> WideReal:
    """Delta(x) - delta_1(x, N); integer x uses the exact D(x)."""
    return voronoi_eval(x, N).delta2


# ---------------------------------------------------------------------------
# windows of primes or integers
# ---------------------------------------------------------------------------

def _window(lo: int, hi: int, over: str, segment_size: int = DEFAULT_SEGMENT_SIZE):
    """Yield (n, Delta_hi, Delta_lo) for n in [lo, hi), restricted to primes if asked."""
    if over not in ("primes", "integers"):
        raise ValueError(f"over must be 'primes' or 'integers', got {over!r}")
    D_before = None
    for a, b in iter_segments(lo, hi, segment_size):
        block = segment_block(a, b, D_before, only_primes=over == "primes")
        D_before = int(block.D[-1])
        n = block.n
        if over == "primes":
            m = block.is_prime
            yield n[m], block.delta_hi[m], block.delta_lo[m]
        else:
            yield n, block.delta_hi, block.delta_lo


def _check_regime(x: int, N: int) -> None:
    if N > x ** 0.25:
        warnings.warn(f"N={N} exceeds x^(1/4) = {x ** 0.25:.3f}; outside the lemma's regime",
                      stacklevel=3)


def moment_of_delta1(x: int, N: int, A: float, over: str = "primes",
                     x2: int | None = None) -> WideReal:
    """sum over n in (x, x2] (default x2 = 2x) of |delta_1(n, N)|^A."""
    x, N = int(x), int(N)
    if not 1 <= A <= 10:
        raise ValueError(f"A must be in [1, 10], got {A}")
    x2 = 2 * x if x2 is None else int(x2)
    if N == 0:
        return WideReal(0)
    _check_regime(x, N)
    total = (0.0, 0.0)
    for a, b in iter_segments(x + 1, x2 + 1):
        n = np.arange(a, b, dtype=np.int64)
        if over == "primes":
            from .sieve import prime_mask
            n = n[prime_mask(a, b)]
        elif over != "integers":
            raise ValueError(f"over must be 'primes' or 'integers', got {over!r}")
        h, _ = delta1_many(n, N)
        total = dd_add(*total, *dd_pairwise_sum(np.abs(h) ** A))
    return WideReal._raw(*total)


@dataclass(frozen=True)
class Delta2Stats:
    x: int
    x2: int
    N: int
    over: str
    count: int
    rms: float
    max_abs: float


def delta2_rms(x: int, N: int, over: str = "primes", x2: int | None = None,
               sample: int | None = None, seed: int = 0) -> Delta2Stats:
    """RMS of delta_2(n, N) over n in (x, x2], optionally on a seeded random sample."""
    x, N = int(x), int(N)
    x2 = 2 * x if x2 is None else int(x2)
    ns, hs, ls = [], [], []
    for n, h, l in _window(x + 1, x2 + 1, over):
        ns.append(n)
        hs.append(h)
        ls.append(l)
    n = np.concatenate(ns)
    dh, dl = np.concatenate(hs), np.concatenate(ls)
    if sample is not None and sample < n.size:
        pick = np.sort(np.random.default_rng(seed).choice(n.size, size=sample, replace=False))
        n, dh, dl = n[pick], dh[pick], dl[pick]
    vh, vl = delta1_many(n, N)
    rh, _ = dd_sub(dh, dl, vh, vl)
    sq = dd_pairwise_sum(rh * rh)
    rms = math.sqrt(sq[0] / n.size) if n.size else 0.0
    return Delta2Stats(x, x2, N, over, int(n.size), rms,
                       float(np.abs(rh).max()) if n.size else 0.0)


def delta2_window(x: int, x2: int, N: int, over: str = "integers"):
    """Rows (n, Delta, delta_1, delta_2) over n in [x, x2] as WideReal values."""
    rows = []
    for n, h, l in _window(int(x), int(x2) + 1, over):
        vh, vl = delta1_many(n, N)
        rh, rl = dd_sub(h, l, vh, vl)
        for i in range(n.size):
            rows.append((int(n[i]), WideReal._raw(h[i], l[i]), WideReal._raw(vh[i], vl[i]),
                         WideReal._raw(rh[i], rl[i])))
    return rows
