"""Exact integer combinations of square roots.

sum c_b sqrt(b) over distinct squarefree b vanishes only when every c_b is
zero (the square roots of distinct squarefree integers are linearly
independent over Q), so zero-testing is a dictionary-emptiness check.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

import numpy as np

from .errors import BudgetError
from .sieve import factor_kernel
from .widereal import WideReal, dd_add, dd_mul_d, dd_sqrt


class RadicalSum(Mapping[int, int]):
    """Immutable map squarefree kernel -> nonzero integer coefficient."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[int, int] | Iterable[tuple[int, int]] = ()):
        items = terms.items() if isinstance(terms, Mapping) else terms
        merged: dict[int, int] = {}
        for b, c in items:
            merged[int(b)] = merged.get(int(b), 0) + int(c)
        self._terms = {b: merged[b] for b in sorted(merged) if merged[b] != 0}
        self._hash = None

    @classmethod
    def from_int(cls, n: int, coeff: int = 1) -> "RadicalSum":
        a, b = factor_kernel(n)
        return cls({b: coeff * a})

    def __getitem__(self, b: int) -> int:
        return self._terms[b]

    def __iter__(self) -> Iterator[int]:
        return iter(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def __add__(self, other: "RadicalSum") -> "RadicalSum":
        return RadicalSum(itertools.chain(self._terms.items(), other._terms.items()))

    def __sub__(self, other: "RadicalSum") -> "RadicalSum":
        return self + (-other)

    def __neg__(self) -> "RadicalSum":
        return RadicalSum({b: -c for b, c in self._terms.items()})

    def __mul__(self, k: int) -> "RadicalSum":
        return RadicalSum({b: c * int(k) for b, c in self._terms.items()})

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, RadicalSum):
            return self._terms == other._terms
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(tuple(self._terms.items()))
        return self._hash

    def __repr__(self):
        return f"RadicalSum({self._terms})"

    def is_zero(self) -> bool:
        return not self._terms

    def rational_part(self) -> int:
        return self._terms.get(1, 0)

    def value(self) -> WideReal:
        return value_of(self)


def radical_from(n: int) -> RadicalSum:
    """sqrt(n) as a RadicalSum: {b: a} where n = a^2 b."""
    return RadicalSum.from_int(n)


def radical_sum(ns: Iterable[int], signs: Iterable[int] | None = None) -> RadicalSum:
    ns = list(ns)
    signs = [1] * len(ns) if signs is None else list(signs)
    acc: dict[int, int] = {}
    for n, s in zip(ns, signs):
        a, b = factor_kernel(n)
        acc[b] = acc.get(b, 0) + s * a
    return RadicalSum(acc)


def is_zero(s: RadicalSum) -> bool:
    return s.is_zero()


def value_of(s: RadicalSum) -> WideReal:
    """sum c_b sqrt(b) in double-double."""
    h, l = 0.0, 0.0
    for b, c in s.items():
        rh, rl = dd_sqrt(float(b), 0.0)
        th, tl = dd_mul_d(rh, rl, float(c))
        h, l = dd_add(h, l, th, tl)
    return WideReal._raw(h, l)


# ---------------------------------------------------------------------------
# sign patterns and alpha_k
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SignPattern:
    """(i_1, ..., i_{k-1}) in {0,1}^{k-1}; position 1 always carries +."""

    bits: tuple[int, ...]

    def __post_init__(self):
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError(f"sign bits must be 0 or 1, got {self.bits}")

    @property
    def k(self) -> int:
        return len(self.bits) + 1

    @property
    def signs(self) -> tuple[int, ...]:
        return (1,) + tuple(-1 if b else 1 for b in self.bits)

    @property
    def beta_k(self) -> int:
        return sum(self.signs)

    @classmethod
    def from_signs(cls, signs: Iterable[int]) -> "SignPattern":
        signs = list(signs)
        if signs[0] != 1:
            raise ValueError("the first sign of alpha_k is always +")
        return cls(tuple(0 if s > 0 else 1 for s in signs[1:]))

    def __str__(self):
        return "(" + ",".join("+" if s > 0 else "-" for s in self.signs) + ")"


def all_patterns(k: int) -> list[SignPattern]:
    return [SignPattern(bits) for bits in itertools.product((0, 1), repeat=k - 1)]


def alpha(ms: Iterable[int], pattern: SignPattern) -> RadicalSum:
    return radical_sum(ms, pattern.signs)


# ---------------------------------------------------------------------------
# smallest nonzero |alpha_k|
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AlphaMin:
    k: int
    E: int
    value: WideReal
    witness: tuple[int, ...]
    pattern: SignPattern


_NEAR = 1e-9
ALPHA_MIN_BUDGET = 2 * 10**6  # multisets per side


def _multisets(E: int, size: int) -> tuple[np.ndarray, np.ndarray]:
    if size == 0:
        return np.zeros((1, 0), dtype=np.int64), np.zeros(1)
    combos = np.array(list(itertools.combinations_with_replacement(range(1, E + 1), size)),
                      dtype=np.int64)
    roots = np.sqrt(np.arange(E + 1, dtype=np.float64))
    return combos, roots[combos].sum(axis=1)


def min_nonzero_alpha(k: int, E: int) -> AlphaMin:
    """Exhaustive min of |alpha_k| != 0 over 1 <= m_i <= E and all sign patterns.

    |alpha_k| only depends on which multiset of m's carries + and which carries
    -, so each split (p plus, q minus) is handled as a nearest-neighbour search
    between sorted multiset sums.  Pairs closer than 1e-9 in float64 are
    settled by exact kernel arithmetic and re-evaluated in double-double.
    """
    if not 3 <= k <= 5:
        raise ValueError(f"exhaustive mode supports 3 <= k <= 5, got {k}")
    if not 1 <= E <= 60:
        raise BudgetError(f"E={E} exceeds the exhaustive budget (E <= 60)")

    best: tuple | None = None  # (value as float key, WideReal, witness, pattern)

    def consider(val: WideReal, plus: tuple, minus: tuple):
        nonlocal best
        if val < 0:
            val, plus, minus = -val, minus, plus
        plus = tuple(sorted(plus))
        minus = tuple(sorted(minus))
        witness = plus + minus
        key = (val, witness)
        if best is None or key < (best[0], best[1]):
            pattern = SignPattern.from_signs([1] * len(plus) + [-1] * len(minus))
            best = (val, witness, pattern)

    for p in range(1, k):
        q = k - p
        if p > q:
            break  # (p, q) and (q, p) give the same |alpha| values
        P, pv = _multisets(E, p)
        Q, qv = _multisets(E, q)
        if max(len(pv), len(qv)) > ALPHA_MIN_BUDGET:
            raise BudgetError(f"k={k}, E={E}: {len(pv)} x {len(qv)} multisets exceed the budget")
        order = np.argsort(qv, kind="stable")
        Q, qv = Q[order], qv[order]
        lo = np.searchsorted(qv, pv - _NEAR, side="left")
        hi = np.searchsorted(qv, pv + _NEAR, side="right")
        # nearest neighbours outside the exact-check window
        for idx, valid in ((lo - 1, lo >= 1), (hi, hi < len(qv))):
            if not valid.any():
                continue
            i = np.flatnonzero(valid)
            j = idx[valid]
            gaps = np.abs(pv[i] - qv[j])
            g = gaps.min()
            for t in np.flatnonzero(gaps <= g + 1e-12):
                plus, minus = tuple(P[i[t]]), tuple(Q[j[t]])
                consider(value_of(radical_sum(plus + minus, [1] * p + [-1] * q)), plus, minus)
        for i in np.flatnonzero(hi > lo):
            for j in range(lo[i], hi[i]):
                plus, minus = tuple(P[i]), tuple(Q[j])
                rs = radical_sum(plus + minus, [1] * p + [-1] * q)
                if not rs.is_zero():
                    consider(value_of(rs), plus, minus)
    val, witness, pattern = best
    return AlphaMin(k, E, val, tuple(int(m) for m in witness), pattern)
