"""Brute-force counters for the spacing and solution-count lemmas.

Ranges follow the dyadic convention m ~ M  <=>  M < m <= 2M.  Every count is
exact: float screening is only trusted away from the decision boundary, and
anything within a small band of it is settled with kernel arithmetic
(double-double values of exact radical sums).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .delta import iter_delta_blocks
from .errors import BudgetError, CheckFailed
from .radicals import SignPattern, all_patterns, radical_sum, value_of
from .widereal import WideReal

COUNT_A_BUDGET = 10**8
COUNT_B_BUDGET = 10**9
PAIRS_V_MAX_N = 10**6
LARGE_VALUES_MAX_T = 10**7
RATIO_CAP = 50.0
_BAND = 1e-9


@dataclass(frozen=True)
class SpacingInstance:
    """Parameters of one counting experiment.

    ``ranges`` holds the N_j (or M_j) of the dyadic ranges (N_j, 2 N_j];
    ``tol`` is the spacing tolerance of the B-count.
    """

    k: int
    ranges: tuple[int, ...]
    pattern: SignPattern
    rho: float | None = None
    beta: float = 0.5
    R: int | None = None
    tol: float | None = None

    def __post_init__(self):
        if len(self.ranges) != self.k or self.pattern.k != self.k:
            raise ValueError("ranges and pattern must both have length k")
        if any(int(N) < 1 for N in self.ranges):
            raise ValueError(f"ranges must have N_j >= 1, got {self.ranges}")
        if self.rho is not None and not 0 < self.rho < math.sqrt(self.E):
            raise ValueError(f"rho must satisfy 0 < rho < E^(1/2) = {math.sqrt(self.E):.4g}")
        if not 0 < self.beta < 1:
            raise ValueError(f"beta must be in (0, 1), got {self.beta}")
        if self.R is not None and self.R < 1:
            raise ValueError("R must be >= 1")
        if self.tol is not None and not self.tol > 0:
            raise ValueError("tol must be positive")

    @property
    def E(self) -> int:
        return max(self.ranges)

    @property
    def size(self) -> int:
        return math.prod(self.ranges)

    def as_row(self) -> dict:
        return {"k": self.k, "ranges": "x".join(map(str, self.ranges)),
                "pattern": str(self.pattern), "rho": self.rho, "beta": self.beta,
                "R": self.R, "tol": self.tol}


def _range(N: int) -> np.ndarray:
    return np.arange(N + 1, 2 * N + 1, dtype=np.int64)


# ---------------------------------------------------------------------------
# A: tuples with |alpha_k| < rho
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CountResult:
    count: int
    bound: float
    ratio: float
    extra: dict = field(default_factory=dict)


def _alpha_grid(inst: SpacingInstance, m1: int) -> tuple[np.ndarray, list[np.ndarray]]:
    """Float alpha over all tuples with first entry m1 (flattened) and the axis values."""
    axes = [_range(N) for N in inst.ranges[1:]]
    alpha = np.full((1,) * (inst.k - 1), math.sqrt(m1))
    for j, (ax, s) in enumerate(zip(axes, inst.pattern.signs[1:])):
        shape = [1] * (inst.k - 1)
        shape[j] = ax.size
        alpha = alpha + s * np.sqrt(ax.astype(np.float64)).reshape(shape)
    return alpha.ravel(), axes


def _tuple_at(m1: int, axes: list[np.ndarray], flat: int) -> tuple[int, ...]:
    idx = np.unravel_index(flat, [ax.size for ax in axes])
    return (m1,) + tuple(int(ax[i]) for ax, i in zip(axes, idx))


def count_A(inst: SpacingInstance) -> CountResult:
    """Number of tuples in the ranges with |alpha_k| < rho (ties at rho excluded)."""
    if inst.rho is None:
        raise ValueError("count_A needs rho")
    if math.prod(2 * N for N in inst.ranges) > COUNT_A_BUDGET:
        raise BudgetError(f"prod(2 N_j) = {math.prod(2 * N for N in inst.ranges)} exceeds {COUNT_A_BUDGET}")
    rho = float(inst.rho)
    rho_w = WideReal(rho)
    count = 0
    for m1 in _range(inst.ranges[0]):
        alpha, axes = _alpha_grid(inst, int(m1))
        a = np.abs(alpha)
        count += int(np.count_nonzero(a < rho - _BAND))
        for flat in np.flatnonzero(np.abs(a - rho) <= _BAND):
            ms = _tuple_at(int(m1), axes, int(flat))
            if abs(value_of(radical_sum(ms, inst.pattern.signs))) < rho_w:
                count += 1
    E = inst.E
    bound = rho * E ** -0.5 * inst.size + inst.size / E
    return CountResult(count, bound, count / bound)


def zero_tuples(inst: SpacingInstance) -> int:
    """Tuples with alpha_k = 0 exactly."""
    zeros = 0
    for m1 in _range(inst.ranges[0]):
        alpha, axes = _alpha_grid(inst, int(m1))
        for flat in np.flatnonzero(np.abs(alpha) < 1e-6):
            if radical_sum(_tuple_at(int(m1), axes, int(flat)), inst.pattern.signs).is_zero():
                zeros += 1
    return zeros


# ---------------------------------------------------------------------------
# v(N, X): close pairs of square roots
# ---------------------------------------------------------------------------

def _close(a: int, b: int, c: Fraction) -> bool:
    """|sqrt(a) - sqrt(b)| <= c, decided in exact rationals."""
    if a < b:
        a, b = b, a
    lhs = a - b - c * c
    return lhs <= 0 or lhs * lhs <= 4 * c * c * b


def count_pairs_v(N: int, X: float) -> CountResult:
    """Ordered pairs (n1, n2) in (N, 2N]^2 with |sqrt(n1) - sqrt(n2)| <= 1/(2X).

    The Iwaniec-Sarkozy inequality count <= (1 + 2 sqrt(2N)/X) N is a theorem
    and is asserted literally (CheckFailed if it ever fails).
    """
    N = int(N)
    if not 1 <= N <= PAIRS_V_MAX_N:
        raise BudgetError(f"N must be in [1, {PAIRS_V_MAX_N}], got {N}")
    if math.isinf(X):
        count = N
    else:
        c = Fraction(1) / (2 * Fraction(X))
        cf = float(c)
        n = _range(N)
        # largest n2 with sqrt(n2) <= sqrt(n1) + c
        est = n + cf * cf + 2 * cf * np.sqrt(n.astype(np.float64))
        top = np.floor(est).astype(np.int64)
        for i in np.flatnonzero(np.abs(est - np.rint(est)) < 1e-6):
            t = int(np.rint(est[i]))
            a = int(n[i])
            top[i] = t if _close(t, a, c) else t - 1
        top = np.minimum(top, 2 * N)
        above = np.maximum(top - n, 0)
        count = N + 2 * int(above.sum())
    bound = (1 + 2 * math.sqrt(2 * N) / X) * N
    if count > bound:
        raise CheckFailed(f"v(N={N}, X={X}) = {count} exceeds (1 + 2 sqrt(2N)/X) N = {bound}")
    return CountResult(count, bound, count / bound)


def count_pairs_v_bruteforce(N: int, X: float) -> int:
    c = Fraction(1) / (2 * Fraction(X))
    return sum(_close(a, b, c) for a in range(N + 1, 2 * N + 1) for b in range(N + 1, 2 * N + 1))


# ---------------------------------------------------------------------------
# B: close pairs of t = alpha_k r^beta
# ---------------------------------------------------------------------------

def _t_values(inst: SpacingInstance):
    """All (t, m-tuple, r) with alpha_k != 0, t evaluated in double-double."""
    beta = inst.beta
    rs = _range(inst.R)
    tuples, alphas = [], []
    for ms in itertools.product(*(range(N + 1, 2 * N + 1) for N in inst.ranges)):
        rs_sum = radical_sum(ms, inst.pattern.signs)
        if rs_sum.is_zero():
            continue
        tuples.append(ms)
        alphas.append(value_of(rs_sum))
    if beta == 0.5:
        powers = [WideReal(int(r)).sqrt() for r in rs]
    else:
        powers = [WideReal(float(r) ** beta) for r in rs]
    t_hi, t_lo, owners = [], [], []
    for ms, a in zip(tuples, alphas):
        for r, p in zip(rs, powers):
            t = a * p
            t_hi.append(t.hi)
            t_lo.append(t.lo)
            owners.append((ms, int(r)))
    return np.array(t_hi), np.array(t_lo), owners


def _pair_gap(inst: SpacingInstance, u, v, t_hi, t_lo) -> WideReal:
    if inst.beta == 0.5:
        (ms, r), (mt, rt) = u, v
        terms = [m * r for m in ms] + [m * rt for m in mt]
        signs = list(inst.pattern.signs) + [-s for s in inst.pattern.signs]
        return value_of(radical_sum(terms, signs))
    return WideReal._raw(t_hi[0], t_lo[0]) - WideReal._raw(t_hi[1], t_lo[1])


def count_B(inst: SpacingInstance) -> CountResult:
    """Ordered pairs of (m-tuple, r) with |t - t~| <= tol, alpha_k and alpha~_k nonzero.

    ``ratio`` uses the stated right side R^{2-beta} M_1^{3/2} (M_2...M_k)^2 (1 + tol)
    with M_1 = max M_j; ``extra['ratio_alt']`` uses M_1^{2^{k-2}+3/2} on the tol term.
    """
    if inst.R is None or inst.tol is None:
        raise ValueError("count_B needs R and tol")
    n_values = inst.size * inst.R
    if n_values * n_values > COUNT_B_BUDGET:
        raise BudgetError(f"{n_values}^2 candidate pairs exceed {COUNT_B_BUDGET}")
    t_hi, t_lo, owners = _t_values(inst)
    tol = float(inst.tol)
    if math.isinf(tol):
        count = len(t_hi) ** 2
    else:
        order = np.argsort(t_hi, kind="stable")
        th = t_hi[order]
        inner_lo = np.searchsorted(th, th - tol + _BAND, side="left")
        inner_hi = np.searchsorted(th, th + tol - _BAND, side="right")
        outer_lo = np.searchsorted(th, th - tol - _BAND, side="left")
        outer_hi = np.searchsorted(th, th + tol + _BAND, side="right")
        count = int((inner_hi - inner_lo).sum())
        tol_w = WideReal(tol)
        for i in range(len(th)):
            band = itertools.chain(range(outer_lo[i], inner_lo[i]), range(inner_hi[i], outer_hi[i]))
            for j in band:
                a, b = order[i], order[j]
                gap = _pair_gap(inst, owners[a], owners[b], (t_hi[a], t_hi[b]), (t_lo[a], t_lo[b]))
                if abs(gap) <= tol_w:
                    count += 1
    Ms = sorted(inst.ranges, reverse=True)
    M1, rest = Ms[0], math.prod(Ms[1:])
    R, beta, k = inst.R, inst.beta, inst.k
    base = R ** (2 - beta) * rest ** 2
    tol_term = 0.0 if math.isinf(tol) else tol
    bound = base * M1 ** 1.5 * (1 + tol_term)
    bound_alt = base * (M1 ** 1.5 + tol_term * M1 ** (2 ** (k - 2) + 1.5))
    return CountResult(count, bound, count / bound,
                       {"bound_alt": bound_alt, "ratio_alt": count / bound_alt,
                        "values": len(t_hi)})


# ---------------------------------------------------------------------------
# large values of Delta
# ---------------------------------------------------------------------------

def count_large_values(T: int, V: float) -> CountResult:
    """Greedy V-separated points t <= T (ascending) with Delta(t) >= V."""
    T = int(T)
    if not 1 <= T <= LARGE_VALUES_MAX_T:
        raise BudgetError(f"T must be in [1, {LARGE_VALUES_MAX_T}], got {T}")
    if not V > T ** (7 / 32 + 0.01):
        raise ValueError(f"V={V} violates V > T^(7/32 + 0.01) = {T ** (7 / 32 + 0.01):.4g}")
    hits = []
    for block in iter_delta_blocks(1, T + 1):
        big = np.flatnonzero(block.delta_hi >= V)
        if big.size:
            exact = [i for i in big if WideReal._raw(block.delta_hi[i], block.delta_lo[i]) >= V]
            hits.append(np.asarray(exact, dtype=np.int64) + block.lo)
    hits = np.concatenate(hits) if hits else np.zeros(0, dtype=np.int64)
    taken = []
    i = 0
    while i < hits.size:
        t = int(hits[i])
        taken.append(t)
        i = int(np.searchsorted(hits, t + V, side="left"))
    bound = T ** 0.05 * (T * V ** -3 + T ** 3.75 * V ** -12)
    return CountResult(len(taken), bound, len(taken) / bound, {"points": taken[:20]})


# ---------------------------------------------------------------------------
# documented sweep grids
# ---------------------------------------------------------------------------

GRID_A = [
    (ranges, rho)
    for ranges in [(16, 4, 4), (32, 8, 8), (64, 16, 16), (16, 8, 4), (32, 32, 32), (8, 8, 8, 8),
                   (32, 8, 8, 8)]
    for rho in (0.5, 0.1, 0.02)
]

GRID_B = [
    (ranges, R, tol)
    for ranges in [(2, 2, 2), (4, 2, 2), (4, 4, 4)]
    for R in (2, 4, 8)
    for tol in (1e-3, 1e-1, 1.0)
]


def sweep_A(grid=GRID_A) -> list[tuple[SpacingInstance, CountResult]]:
    rows = []
    for ranges, rho in grid:
        k = len(ranges)
        for pattern in all_patterns(k):
            inst = SpacingInstance(k, ranges, pattern, rho=rho)
            rows.append((inst, count_A(inst)))
    return rows


def sweep_B(grid=GRID_B) -> list[tuple[SpacingInstance, CountResult]]:
    rows = []
    for ranges, R, tol in grid:
        k = len(ranges)
        for pattern in all_patterns(k):
            inst = SpacingInstance(k, ranges, pattern, R=R, tol=tol)
            rows.append((inst, count_B(inst)))
    return rows
