"""Truncated singular series s_{k,l}(y), B_k(y), b_k(y) and the theta table.

s_{k,l}(y) sums d(n_1)...d(n_k) / (n_1...n_k)^{3/4} over ordered tuples with
n_i <= y and sqrt(n_1)+...+sqrt(n_l) = sqrt(n_{l+1})+...+sqrt(n_k).

Writing n_i = a_i^2 b_i with b_i squarefree, the equation holds iff for every
kernel b the a's on the left with b_i = b sum to the a's on the right with
b_i = b.  So a solution is a set partition of the positions into kernel
classes, each class containing left and right positions, plus distinct
kernels for the classes, plus a balanced choice of a's inside each class.
For a class with L left and R right positions and kernel b the balanced
weight is F_{L,R}(b) = sum_s P_L(s) P_R(s), where P_m is the m-fold
convolution power of v(a) = w(a^2 b) on 1 <= a <= isqrt(y/b).  The
distinct-kernel condition is imposed by Moebius inversion over partitions of
the classes.
"""

from __future__ import annotations

import itertools
import math
import warnings
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import BudgetError
from .radicals import radical_sum
from .sieve import divisor_table, kernel_table
from .widereal import PI_W, SQRT2, WideReal

# largest y accepted per k
SERIES_BUDGET = {2: 10**7, 3: 10**5, 4: 10**3, 5: 10**3, 6: 120, 7: 120, 8: 120, 9: 120}
BRUTE_FORCE_MAX_Y = 200

A0 = Fraction(262, 27)
THETA_STATED = {
    3: Fraction(1, 48), 4: Fraction(1, 64), 5: Fraction(1, 88), 6: Fraction(1, 156),
    7: Fraction(1, 288), 8: Fraction(1, 548), 9: Fraction(19, 40848),
}


@dataclass(frozen=True)
class SeriesEstimate:
    k: int
    l: int
    y: int
    value: WideReal
    solutions: int


def _check_kl(k: int, l: int, y: int) -> None:
    if not 2 <= k <= 9:
        raise ValueError(f"k must be in [2, 9], got {k}")
    if not 1 <= l <= k - 1:
        raise ValueError(f"l must be in [1, {k - 1}], got {l}")
    if y < 1:
        raise ValueError(f"y must be >= 1, got {y}")
    if y > SERIES_BUDGET[k]:
        cost = y * (k // 2 + 1) * max(1, int(math.log(y)))
        raise BudgetError(
            f"s_{{{k},{l}}}({y}) exceeds the budget y <= {SERIES_BUDGET[k]} "
            f"(estimated ~{cost:.3g} kernel-coefficient cells)"
        )


# ---------------------------------------------------------------------------
# combinatorial skeleton
# ---------------------------------------------------------------------------

def _set_partitions(items: list):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]
        yield [[first]] + part


def _mobius(groups) -> int:
    out = 1
    for g in groups:
        out *= (-1) ** (len(g) - 1) * math.factorial(len(g) - 1)
    return out


@lru_cache(maxsize=None)
def _skeleton(k: int, l: int) -> tuple[tuple[tuple[tuple[tuple[int, int], ...], ...], int], ...]:
    """Canonical (group structure, integer coefficient) pairs for s_{k,l}.

    A shape (L, R) is stored as (min, max) since F_{L,R} = F_{R,L}; this makes
    the skeletons of l and k - l identical, hence s_{k,l} = s_{k,k-l} exactly.
    """
    coeffs: dict = defaultdict(int)
    for blocks in _set_partitions(list(range(k))):
        shapes = []
        for block in blocks:
            L = sum(1 for i in block if i < l)
            R = len(block) - L
            if L == 0 or R == 0:
                break
            shapes.append((min(L, R), max(L, R)))
        else:
            for sigma in _set_partitions(list(range(len(shapes)))):
                key = tuple(sorted(tuple(sorted(shapes[i] for i in g)) for g in sigma))
                coeffs[key] += _mobius(sigma)
    return tuple(sorted((key, c) for key, c in coeffs.items() if c != 0))


# ---------------------------------------------------------------------------
# per-kernel balanced weights
# ---------------------------------------------------------------------------

def _isqrt_array(q: np.ndarray) -> np.ndarray:
    r = np.floor(np.sqrt(q.astype(np.float64))).astype(np.int64)
    r -= (r * r > q).astype(np.int64)
    r += ((r + 1) * (r + 1) <= q).astype(np.int64)
    return r


@lru_cache(maxsize=4)
def _tables(y: int):
    d = divisor_table(y).astype(np.float64)
    n = np.arange(y + 1, dtype=np.float64)
    w = np.zeros(y + 1)
    w[1:] = d[1:] / n[1:] ** 0.75
    _, kern = kernel_table(y)
    b = np.flatnonzero(kern == np.arange(y + 1))
    b = b[b >= 1].astype(np.int64)
    return w, b, _isqrt_array(y // b)


def _conv_powers(V: np.ndarray, mmax: int) -> list[np.ndarray]:
    """P[m][:, s] = sum over a_1+...+a_m = s of prod V[:, a_i - 1]."""
    nb, A = V.shape
    P1 = np.zeros((nb, A + 1), dtype=V.dtype)
    P1[:, 1:] = V
    powers = [None, P1]
    for m in range(2, mmax + 1):
        prev = powers[-1]
        out = np.zeros((nb, m * A + 1), dtype=V.dtype)
        width = prev.shape[1]
        for j in range(1, A + 1):
            out[:, j:j + width] += prev * V[:, j - 1:j]
        powers.append(out)
    return powers


@lru_cache(maxsize=16)
def _kernel_weights(y: int, shapes: tuple[tuple[int, int], ...]):
    """F_shape(b) and the matching solution counts, for all squarefree b <= y."""
    w, b, A = _tables(y)
    mmax = max(R for _, R in shapes)
    F = {s: np.zeros(len(b)) for s in shapes}
    C = {s: np.zeros(len(b), dtype=np.int64) for s in shapes}
    # A is nonincreasing along ascending b, so each A value is one contiguous run
    starts = np.flatnonzero(np.r_[True, A[1:] != A[:-1]])
    ends = np.r_[starts[1:], len(b)]
    for s0, s1 in zip(starts, ends):
        a_max = int(A[s0])
        a = np.arange(1, a_max + 1, dtype=np.int64)
        V = w[(a * a)[None, :] * b[s0:s1, None]]
        P = _conv_powers(V, mmax)
        Q = _conv_powers(np.ones((1, a_max), dtype=np.int64), mmax)
        for L, R in shapes:
            width = L * a_max + 1
            F[(L, R)][s0:s1] = (P[L][:, :width] * P[R][:, :width]).sum(axis=1)
            C[(L, R)][s0:s1] = int((Q[L][0, :width] * Q[R][0, :width]).sum())
    return F, C


@lru_cache(maxsize=None)
def _s_kl_cached(k: int, l: int, y: int) -> tuple[float, int]:
    skeleton = _skeleton(k, l)
    shapes = tuple(sorted({s for key, _ in skeleton for g in key for s in g}))
    F, C = _kernel_weights(y, shapes)
    group_val: dict = {}
    group_cnt: dict = {}
    terms: list[float] = []
    count = 0
    for key, coeff in skeleton:
        val, cnt = float(coeff), coeff
        for g in key:
            if g not in group_val:
                prod = np.ones_like(F[g[0]])
                prod_c = np.ones_like(C[g[0]])
                for s in g:
                    prod = prod * F[s]
                    prod_c = prod_c * C[s]
                group_val[g] = math.fsum(prod)
                group_cnt[g] = sum(int(c) for c in prod_c)
            val *= group_val[g]
            cnt *= group_cnt[g]
        terms.append(val)
        count += cnt
    return math.fsum(terms), count


def s_kl(k: int, l: int, y: int) -> SeriesEstimate:
    k, l, y = int(k), int(l), int(y)
    _check_kl(k, l, y)
    value, count = _s_kl_cached(k, l, y)
    return SeriesEstimate(k, l, y, WideReal(value), count)


def s_kl_bruteforce(k: int, l: int, y: int) -> SeriesEstimate:
    """Ordered scan over all tuples (k <= 3, y <= 200), membership decided exactly.

    Float sums screen candidates within 1e-6; every candidate is then settled
    by kernel arithmetic, so the decision itself is exact.
    """
    k, l, y = int(k), int(l), int(y)
    if not 2 <= k <= 3 or not 1 <= l <= k - 1:
        raise ValueError("the exhaustive scan covers k in {2, 3} only")
    if not 1 <= y <= BRUTE_FORCE_MAX_Y:
        raise BudgetError(f"exhaustive scan needs y <= {BRUTE_FORCE_MAX_Y}, got {y}")
    d = divisor_table(y)
    roots = np.sqrt(np.arange(1, y + 1, dtype=np.float64))
    grids = np.meshgrid(*([roots] * k), indexing="ij")
    alpha = sum(grids[:l]) - sum(grids[l:])
    signs = [1] * l + [-1] * (k - l)
    total: list[float] = []
    count = 0
    for idx in zip(*np.nonzero(np.abs(alpha) < 1e-6)):
        ns = [int(i) + 1 for i in idx]
        if radical_sum(ns, signs).is_zero():
            count += 1
            total.append(math.prod(int(d[n]) for n in ns) / math.prod(ns) ** 0.75)
    return SeriesEstimate(k, l, y, WideReal(math.fsum(total)), count)


# ---------------------------------------------------------------------------
# B_k, b_k, theta
# ---------------------------------------------------------------------------

_SQRT2_W = WideReal._raw(*SQRT2)
_HALF_SQRT2 = _SQRT2_W / 2
# cos(pi m / 4) for m mod 8
_COS_EIGHTHS = (WideReal(1), _HALF_SQRT2, WideReal(0), -_HALF_SQRT2,
                WideReal(-1), -_HALF_SQRT2, WideReal(0), _HALF_SQRT2)


def cos_quarter_pi(m: int) -> WideReal:
    """cos(pi m / 4), exactly 0 or +-1 where it should be."""
    return _COS_EIGHTHS[m % 8]


def B_k(k: int, y: int) -> WideReal:
    total = WideReal(0)
    for l in range(1, k):
        c = cos_quarter_pi(k - 2 * l)
        if not c:
            _check_kl(k, l, y)
            continue
        total += c * math.comb(k - 1, l) * s_kl(k, l, y).value
    return total


def normalizer(k: int) -> WideReal:
    """(sqrt(2) pi)^k 2^(k-1)."""
    return (_SQRT2_W * PI_W) ** k * 2 ** (k - 1)


def b_k(k: int, y: int) -> WideReal:
    return B_k(k, y) / normalizer(k)


def theta(k: int) -> Fraction:
    """Closed-form error-saving exponent theta(k, 262/27) for 3 <= k <= 9."""
    k = int(k)
    if not 3 <= k <= 9:
        raise ValueError(f"theta is defined for 3 <= k <= 9, got {k}")
    if k <= 8:
        value = min(Fraction(1, 16 * k), Fraction(1, 2 ** (k + 1) + 4 * k + 4))
        if value != THETA_STATED[k]:
            raise AssertionError(f"theta({k}) = {value} disagrees with the tabulated {THETA_STATED[k]}")
        return value
    value = 1 / (4 + 265 * (A0 - 4) / (A0 - k))
    if value != THETA_STATED[9]:
        warnings.warn(
            f"theta(9): the closed form gives {value} while the tabulated value is "
            f"{THETA_STATED[9]}; the closed form is returned",
            stacklevel=2,
        )
    return value


@dataclass(frozen=True)
class ConstantBundle:
    k: int
    y: int
    s_values: tuple[SeriesEstimate, ...]
    B_k: WideReal
    b_k: WideReal
    theta: Fraction | None

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "y": self.y,
            "s_values": [{"l": s.l, "value": s.value.to_str(), "solutions": s.solutions}
                         for s in self.s_values],
            "B_k": self.B_k.to_str(),
            "b_k": self.b_k.to_str(),
            "theta_num": None if self.theta is None else self.theta.numerator,
            "theta_den": None if self.theta is None else self.theta.denominator,
        }


def constants(k: int, y: int) -> ConstantBundle:
    s_values = tuple(s_kl(k, l, y) for l in range(1, k))
    Bk = B_k(k, y)
    with warnings.catch_warnings():
        warnings.simplefilter("always")
        th = theta(k) if k >= 3 else None
    return ConstantBundle(k, y, s_values, Bk, Bk / normalizer(k), th)


# ---------------------------------------------------------------------------
# tail behaviour
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TailRow:
    y: int
    value: WideReal
    increment: WideReal | None


@dataclass(frozen=True)
class TailProbe:
    k: int
    l: int
    rows: tuple[TailRow, ...]
    exponent: float


def tail_probe(k: int, l: int, y_grid) -> TailProbe:
    """Values on an increasing grid and the least-squares slope of log increment vs log y."""
    grid = sorted(int(y) for y in y_grid)
    rows = []
    prev = None
    for y in grid:
        v = s_kl(k, l, y).value
        rows.append(TailRow(y, v, None if prev is None else v - prev))
        prev = v
    pts = [(math.log(r.y), math.log(float(r.increment))) for r in rows[1:]
           if r.increment is not None and r.increment > 0]
    if len(pts) >= 2 and len(pts) == len(rows) - 1:
        slope = float(np.polyfit([p[0] for p in pts], [p[1] for p in pts], 1)[0])
    else:
        slope = math.nan
    return TailProbe(k, l, tuple(rows), slope)
