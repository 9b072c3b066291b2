"""Double-double arithmetic.

A value is carried as an unevaluated sum ``hi + lo`` of two binary64 numbers
with ``|lo| <= ulp(hi)/2``, giving about 32 significant decimal digits.

Every kernel below is written against the ``+ - * /`` operators only, so the
same function accepts Python floats or numpy float64 arrays and produces
bit-identical results either way.  The scalar class :class:`WideReal` is a
thin wrapper over those kernels.
"""

from __future__ import annotations

import math
from decimal import Decimal, localcontext
from fractions import Fraction
from functools import lru_cache

import numpy as np

_SPLITTER = 134217729.0  # 2**27 + 1


# ---------------------------------------------------------------------------
# error-free transformations
# ---------------------------------------------------------------------------

def two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def quick_two_sum(a, b):
    # requires |a| >= |b| (or a == 0)
    s = a + b
    return s, b - (s - a)


def split(a):
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def two_prod(a, b):
    p = a * b
    ah, al = split(a)
    bh, bl = split(b)
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


# ---------------------------------------------------------------------------
# dd kernels (operands are (hi, lo) pairs)
# ---------------------------------------------------------------------------

def dd_add(ah, al, bh, bl):
    s, e = two_sum(ah, bh)
    t, f = two_sum(al, bl)
    e = e + t
    s, e = quick_two_sum(s, e)
    e = e + f
    return quick_two_sum(s, e)


def dd_sub(ah, al, bh, bl):
    return dd_add(ah, al, -bh, -bl)


def dd_add_d(ah, al, b):
    s, e = two_sum(ah, b)
    e = e + al
    return quick_two_sum(s, e)


def dd_mul(ah, al, bh, bl):
    p, e = two_prod(ah, bh)
    e = e + (ah * bl + al * bh)
    return quick_two_sum(p, e)


def dd_mul_d(ah, al, b):
    p, e = two_prod(ah, b)
    e = e + al * b
    return quick_two_sum(p, e)


def dd_div(ah, al, bh, bl):
    q1 = ah / bh
    rh, rl = dd_sub(ah, al, *dd_mul_d(bh, bl, q1))
    q2 = rh / bh
    rh, rl = dd_sub(rh, rl, *dd_mul_d(bh, bl, q2))
    q3 = rh / bh
    q1, q2 = quick_two_sum(q1, q2)
    return dd_add_d(q1, q2, q3)


def dd_sqrt(ah, al):
    """Square root; zero maps to zero, negative input is the caller's problem."""
    s = np.sqrt(ah) if isinstance(ah, np.ndarray) else math.sqrt(ah)
    safe = np.where(s == 0.0, 1.0, s) if isinstance(s, np.ndarray) else (s or 1.0)
    ph, pl = two_prod(s, s)
    rh, rl = dd_sub(ah, al, ph, pl)
    corr = rh / (2.0 * safe)
    return quick_two_sum(s, corr)


def dd_pow_int(ah, al, k: int):
    if k < 0:
        raise ValueError("negative exponent")
    rh, rl = 1.0 + 0.0 * ah, 0.0 * ah
    bh, bl = ah, al
    while k:
        if k & 1:
            rh, rl = dd_mul(rh, rl, bh, bl)
        k >>= 1
        if k:
            bh, bl = dd_mul(bh, bl, bh, bl)
    return rh, rl


def dd_from_fraction(q: Fraction) -> tuple[float, float]:
    hi = float(q)
    lo = float(q - Fraction(hi))
    return hi, lo


def dd_from_int(n: int) -> tuple[float, float]:
    hi = float(n)
    return hi, float(n - int(hi))


def dd_from_str(s: str) -> tuple[float, float]:
    return dd_from_fraction(Fraction(Decimal(s)))


# ---------------------------------------------------------------------------
# constants
# ---------------------------------------------------------------------------

PI = dd_from_str("3.141592653589793238462643383279502884197")
TWO_PI = (2.0 * PI[0], 2.0 * PI[1])
LN2 = dd_from_str("0.6931471805599453094172321214581765680755")
SQRT2 = dd_sqrt(2.0, 0.0)


def _fraction_coeffs(terms):
    return [dd_from_fraction(t) for t in terms]


# log1p(u) = u*(1 + u*(-1/2 + u*(1/3 + u*tail(u)))), |u| < 2**-15; the tail
# terms are below 2**-60 so plain float64 suffices there
_LOG1P_HEAD = _fraction_coeffs([Fraction(1, 3), Fraction(-1, 2), Fraction(1)])
_LOG1P_TAIL = [(-1) ** (j + 1) / j for j in range(10, 3, -1)]
# sin(t)/t and cos(t) as polynomials in t^2, highest order first
_SIN_COEFFS = _fraction_coeffs(
    Fraction((-1) ** i, math.factorial(2 * i + 1)) for i in range(14, -1, -1)
)
_COS_COEFFS = _fraction_coeffs(
    Fraction((-1) ** i, math.factorial(2 * i)) for i in range(14, -1, -1)
)


@lru_cache(maxsize=1)
def _log_table() -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """dd values of log(m) and 1/m for m in [2**15, 2**16)."""
    import mpmath

    with mpmath.workprec(140):
        ms = range(1 << 15, 1 << 16)
        logs = [mpmath.log(m) for m in ms]
        hi = np.array([float(v) for v in logs])
        lo = np.array([float(v - mpmath.mpf(h)) for v, h in zip(logs, hi)])
    inv = [dd_from_fraction(Fraction(1, m)) for m in ms]
    ihi = np.array([v[0] for v in inv])
    ilo = np.array([v[1] for v in inv])
    return hi, lo, ihi, ilo


def _horner(xh, xl, coeffs):
    ph = coeffs[0][0] + 0.0 * xh
    pl = coeffs[0][1] + 0.0 * xh
    for ch, cl in coeffs[1:]:
        ph, pl = dd_mul(ph, pl, xh, xl)
        ph, pl = dd_add(ph, pl, ch, cl)
    return ph, pl


_CHUNK = 1 << 16


def dd_log(xh, xl=None):
    """Natural log of a positive dd array.

    The argument is anchored at x0 = (16 leading bits of x) * 2**e, whose log
    and reciprocal come from 2**15-entry tables; the remaining factor 1 + u has
    |u| < 2**-15 and is handled by a short series.
    """
    xh = np.asarray(xh, dtype=np.float64)
    xl = np.zeros_like(xh) if xl is None else np.asarray(xl, dtype=np.float64)
    if np.any(xh <= 0):
        raise ValueError("dd_log needs positive arguments")
    if xh.size > _CHUNK:
        oh = np.empty_like(xh)
        ol = np.empty_like(xh)
        for s in range(0, xh.size, _CHUNK):
            oh.flat[s:s + _CHUNK], ol.flat[s:s + _CHUNK] = _dd_log_block(
                xh.ravel()[s:s + _CHUNK], xl.ravel()[s:s + _CHUNK])
        return oh, ol
    return _dd_log_block(xh, xl)


def _dd_log_block(xh, xl):
    th, tl, ih, il = _log_table()
    mant, ex = np.frexp(xh)
    m = np.floor(mant * 65536.0)
    idx = m.astype(np.int64) - (1 << 15)
    scale = np.ldexp(1.0, 16 - ex)
    # h = x - x0 (the float64 difference is exact), u = h / x0
    hh, hl = dd_add_d(xh - np.ldexp(m, ex - 16), xl, 0.0)
    uh, ul = dd_mul(hh, hl, ih[idx], il[idx])
    uh, ul = uh * scale, ul * scale
    tail = np.zeros_like(uh)
    for c in _LOG1P_TAIL:
        tail = tail * uh + c
    ph, pl = dd_add_d(_LOG1P_HEAD[0][0] + 0.0 * uh, _LOG1P_HEAD[0][1] + 0.0 * uh, tail * uh)
    for ch, cl in _LOG1P_HEAD[1:]:
        ph, pl = dd_mul(ph, pl, uh, ul)
        ph, pl = dd_add(ph, pl, ch, cl)
    ph, pl = dd_mul(ph, pl, uh, ul)
    eh, el = dd_mul_d(LN2[0] + 0.0 * xh, LN2[1] + 0.0 * xh, (ex - 16).astype(np.float64))
    rh, rl = dd_add(th[idx], tl[idx], eh, el)
    return dd_add(rh, rl, ph, pl)


def dd_cos_2pi(fh, fl):
    """cos(2*pi*f) for dd arrays f (any magnitude; integer parts are dropped)."""
    fh = np.asarray(fh, dtype=np.float64)
    fl = np.asarray(fl, dtype=np.float64)
    k = np.round(fh)
    fh, fl = dd_add_d(fh - k, fl, 0.0)
    q = np.round(4.0 * fh)
    rh, rl = dd_add_d(fh - q * 0.25, fl, 0.0)
    th, tl = dd_mul(rh, rl, TWO_PI[0], TWO_PI[1])
    wh, wl = dd_mul(th, tl, th, tl)
    sh, sl = _horner(wh, wl, _SIN_COEFFS)
    sh, sl = dd_mul(sh, sl, th, tl)
    ch, cl = _horner(wh, wl, _COS_COEFFS)
    quad = np.mod(q, 4.0)
    out_h = np.select([quad == 0, quad == 1, quad == 2], [ch, -sh, -ch], sh)
    out_l = np.select([quad == 0, quad == 1, quad == 2], [cl, -sl, -cl], sl)
    return out_h, out_l


def dd_pairwise_sum(h, l=None) -> tuple[float, float]:
    """Sum a dd array by pairwise dd addition (fixed tree, so deterministic)."""
    h = np.asarray(h, dtype=np.float64).ravel()
    l = np.zeros_like(h) if l is None else np.asarray(l, dtype=np.float64).ravel()
    if h.size == 0:
        return 0.0, 0.0
    while h.size > 1:
        if h.size & 1:
            h = np.append(h, 0.0)
            l = np.append(l, 0.0)
        h, l = dd_add(h[0::2], l[0::2], h[1::2], l[1::2])
    return float(h[0]), float(l[0])


# ---------------------------------------------------------------------------
# scalar wrapper
# ---------------------------------------------------------------------------

class WideReal:
    """Immutable double-double scalar (~32 significant digits)."""

    __slots__ = ("hi", "lo")

    def __init__(self, value=0.0, lo: float | None = None):
        if lo is not None:
            hi, lo = quick_two_sum(float(value), float(lo))
        elif isinstance(value, WideReal):
            hi, lo = value.hi, value.lo
        elif isinstance(value, (bool, int, np.integer)):
            hi, lo = dd_from_int(int(value))
        elif isinstance(value, Fraction):
            hi, lo = dd_from_fraction(value)
        elif isinstance(value, (str, Decimal)):
            hi, lo = dd_from_fraction(Fraction(Decimal(value)))
        else:
            hi, lo = float(value), 0.0
        object.__setattr__(self, "hi", hi)
        object.__setattr__(self, "lo", lo)

    def __setattr__(self, name, value):
        raise AttributeError("WideReal is immutable")

    @classmethod
    def _raw(cls, hi, lo) -> "WideReal":
        obj = object.__new__(cls)
        object.__setattr__(obj, "hi", float(hi))
        object.__setattr__(obj, "lo", float(lo))
        return obj

    @staticmethod
    def _coerce(other) -> "WideReal | None":
        if isinstance(other, WideReal):
            return other
        if isinstance(other, (int, float, Fraction, np.integer, np.floating)):
            return WideReal(other)
        return None

    # arithmetic ---------------------------------------------------------
    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return WideReal._raw(*dd_add(self.hi, self.lo, o.hi, o.lo))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return WideReal._raw(*dd_sub(self.hi, self.lo, o.hi, o.lo))

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return WideReal._raw(*dd_mul(self.hi, self.lo, o.hi, o.lo))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if o.hi == 0.0:
            raise ZeroDivisionError("WideReal division by zero")
        return WideReal._raw(*dd_div(self.hi, self.lo, o.hi, o.lo))

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o / self

    def __pow__(self, k):
        if not isinstance(k, (int, np.integer)):
            return NotImplemented
        if k < 0:
            return WideReal(1) / self ** (-k)
        return WideReal._raw(*dd_pow_int(self.hi, self.lo, int(k)))

    def __neg__(self):
        return WideReal._raw(-self.hi, -self.lo)

    def __pos__(self):
        return self

    def __abs__(self):
        return -self if self.hi < 0 or (self.hi == 0 and self.lo < 0) else self

    def sqrt(self) -> "WideReal":
        if self.hi < 0:
            raise ValueError("sqrt of negative WideReal")
        return WideReal._raw(*dd_sqrt(self.hi, self.lo))

    def log(self) -> "WideReal":
        h, l = dd_log(np.array([self.hi]), np.array([self.lo]))
        return WideReal._raw(h[0], l[0])

    # comparison ---------------------------------------------------------
    def _cmp(self, other) -> int:
        o = self._coerce(other)
        if o is None:
            raise TypeError(f"cannot compare WideReal with {type(other).__name__}")
        d = self - o
        v = d.hi if d.hi != 0 else d.lo
        return (v > 0) - (v < 0)

    def __eq__(self, other):
        if self._coerce(other) is None:
            return NotImplemented
        return self._cmp(other) == 0

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __hash__(self):
        return hash((self.hi, self.lo))

    def __bool__(self):
        return self.hi != 0.0 or self.lo != 0.0

    # conversion ---------------------------------------------------------
    def __float__(self):
        return self.hi + self.lo

    def to_fraction(self) -> Fraction:
        return Fraction(self.hi) + Fraction(self.lo)

    def to_decimal(self) -> Decimal:
        with localcontext() as ctx:
            ctx.prec = 80
            return Decimal(self.hi) + Decimal(self.lo)

    def to_str(self, digits: int = 34) -> str:
        with localcontext() as ctx:
            ctx.prec = digits
            return str(+self.to_decimal())

    def __str__(self):
        return self.to_str()

    def __repr__(self):
        return f"WideReal('{self.to_str()}')"

    def as_pair(self) -> list[float]:
        return [self.hi, self.lo]

    @classmethod
    def from_pair(cls, pair) -> "WideReal":
        return cls._raw(pair[0], pair[1])


def wsum(values) -> WideReal:
    """Sequential dd sum of an iterable of WideReal/number values."""
    h, l = 0.0, 0.0
    for v in values:
        w = v if isinstance(v, WideReal) else WideReal(v)
        h, l = dd_add(h, l, w.hi, w.lo)
    return WideReal._raw(h, l)


PI_W = WideReal._raw(*PI)
