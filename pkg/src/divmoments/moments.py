"""Power moments of Delta over primes and integers, continuous moments, and
the main-term predictions built from the singular-series constants."""

from __future__ import annotations

import json
import logging
import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .delta import STREAM_MAX, euler_gamma, segment_block
from .errors import CheckpointMismatch
from .sieve import DEFAULT_SEGMENT_SIZE, iter_segments
from .widereal import (
    WideReal,
    dd_add,
    dd_mul,
    dd_pairwise_sum,
    dd_sqrt,
)

log = logging.getLogger(__name__)

A0 = 262 / 27
QUADRATURE_ORDERS = (8, 12, 16)


# ---------------------------------------------------------------------------
# ledger
# ---------------------------------------------------------------------------

@dataclass
class MomentLedger:
    """Running sums of Delta^k (and p^{k/4}) over primes or integers in [lo, x_max].

    ``sums`` and ``powersums`` map k to WideReal; ``abs_sums`` maps exponent A
    to sum |Delta|^A.  ``checkpoints`` holds one record per segment.
    """

    x_max: int
    k_set: tuple[int, ...]
    over: str
    lo: int = 1
    segment_size: int = DEFAULT_SEGMENT_SIZE
    abs_exponents: tuple[float, ...] = ()
    sums: dict[int, WideReal] = field(default_factory=dict)
    powersums: dict[int, WideReal] = field(default_factory=dict)
    abs_sums: dict[float, WideReal] = field(default_factory=dict)
    prime_count: int = 0
    count: int = 0
    checkpoints: list[dict] = field(default_factory=list)
    complete: bool = False

    @property
    def prime_sums(self) -> dict[int, WideReal]:
        if self.over != "primes":
            raise AttributeError("ledger accumulated over integers")
        return self.sums

    @property
    def integer_sums(self) -> dict[int, WideReal]:
        if self.over != "integers":
            raise AttributeError("ledger accumulated over primes")
        return self.sums

    def config(self) -> dict:
        return {
            "x_max": self.x_max,
            "lo": self.lo,
            "k_set": list(self.k_set),
            "over": self.over,
            "segment_size": self.segment_size,
            "abs_exponents": list(self.abs_exponents),
        }

    def to_json(self) -> dict:
        return {
            **self.config(),
            "complete": self.complete,
            "prime_count": self.prime_count,
            "count": self.count,
            "sums": {str(k): v.to_str() for k, v in self.sums.items()},
            "powersums": {str(k): v.to_str() for k, v in self.powersums.items()},
            "abs_sums": {repr(a): v.to_str() for a, v in self.abs_sums.items()},
        }


# ---------------------------------------------------------------------------
# per-segment work (runs in worker processes)
# ---------------------------------------------------------------------------

def _segment_record(args) -> dict:
    lo, hi, k_set, over, abs_exponents = args
    primes_only = over == "primes"
    block = segment_block(lo, hi, only_primes=primes_only)
    if primes_only:
        sel = block.is_prime
        n = np.arange(lo, hi, dtype=np.int64)[sel]
        dh, dl = block.delta_hi[sel], block.delta_lo[sel]
    else:
        n = np.arange(lo, hi, dtype=np.int64)
        dh, dl = block.delta_hi, block.delta_lo

    rec = {"lo": lo, "hi": hi, "count": int(n.size), "D_end": int(block.D[-1]),
           "prime_count": int(block.is_prime.sum()) if primes_only else None,
           "sums": {}, "powersums": {}, "abs_sums": {}}
    if not k_set and not abs_exponents:
        return rec

    ph, pl = np.ones_like(dh), np.zeros_like(dh)
    for k in range(1, max(k_set, default=0) + 1):
        ph, pl = dd_mul(ph, pl, dh, dl)
        if k in k_set:
            rec["sums"][str(k)] = list(dd_pairwise_sum(ph, pl))
    if primes_only and k_set:
        nf = n.astype(np.float64)
        qh, ql = dd_sqrt(*dd_sqrt(nf, np.zeros_like(nf)))
        rh, rl = np.ones_like(qh), np.zeros_like(qh)
        for k in range(1, max(k_set) + 1):
            rh, rl = dd_mul(rh, rl, qh, ql)
            if k in k_set:
                rec["powersums"][str(k)] = list(dd_pairwise_sum(rh, rl))
    absd = np.abs(dh + dl)
    for a in abs_exponents:
        rec["abs_sums"][repr(float(a))] = list(dd_pairwise_sum(absd ** a))
    return rec


def _merge(ledger: MomentLedger, rec: dict) -> None:
    for key, target in (("sums", ledger.sums), ("powersums", ledger.powersums)):
        for k, pair in rec[key].items():
            cur = target.get(int(k), WideReal(0))
            target[int(k)] = WideReal._raw(*dd_add(cur.hi, cur.lo, pair[0], pair[1]))
    for a, pair in rec["abs_sums"].items():
        cur = ledger.abs_sums.get(float(a), WideReal(0))
        ledger.abs_sums[float(a)] = WideReal._raw(*dd_add(cur.hi, cur.lo, pair[0], pair[1]))
    ledger.count += rec["count"]
    if rec["prime_count"] is not None:
        ledger.prime_count += rec["prime_count"]
    ledger.checkpoints.append(rec)


def _write_atomic(path: Path, payload: dict) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(json.dumps(payload, sort_keys=True))
    os.replace(tmp, path)


def _load_checkpoints(directory: Path, config: dict) -> list[dict]:
    manifest = directory / "manifest.json"
    if not manifest.exists():
        return []
    stored = json.loads(manifest.read_text())
    if stored != config:
        raise CheckpointMismatch(f"checkpoint config {stored} does not match requested {config}")
    records = []
    i = 0
    while (path := directory / f"seg_{i:06d}.json").exists():
        records.append(json.loads(path.read_text()))
        i += 1
    return records


def default_workers() -> int:
    return max(1, int(os.environ.get("DIVMOMENTS_WORKERS", "1")))


def sweep(x_max: int, k_set: Iterable[int], over: str = "primes", *, lo: int = 1,
          abs_exponents: Sequence[float] = (), workers: int | None = None,
          segment_size: int = DEFAULT_SEGMENT_SIZE, checkpoint_dir: str | os.PathLike | None = None,
          resume: bool = False, max_segments: int | None = None) -> MomentLedger:
    """One ascending pass over n in [lo, x_max] accumulating Delta^k sums.

    Segment records are computed (possibly in parallel) and merged strictly in
    segment order, so the ledger does not depend on ``workers``.  With
    ``max_segments`` the sweep stops early and returns an incomplete ledger;
    rerunning with ``resume=True`` against the same checkpoint directory
    finishes it.
    """
    if over not in ("primes", "integers"):
        raise ValueError(f"over must be 'primes' or 'integers', not {over!r}")
    x_max = int(x_max)
    if x_max > STREAM_MAX:
        raise ValueError(f"x={x_max} exceeds the streaming budget {STREAM_MAX}")
    k_set = tuple(sorted(set(int(k) for k in k_set)))
    if any(k < 1 or k > 9 for k in k_set):
        raise ValueError(f"moment exponents must lie in 1..9, got {k_set}")
    workers = default_workers() if workers is None else int(workers)
    ledger = MomentLedger(x_max, k_set, over, lo, segment_size, tuple(float(a) for a in abs_exponents))
    for k in k_set:
        ledger.sums[k] = WideReal(0)
        if over == "primes":
            ledger.powersums[k] = WideReal(0)
    for a in ledger.abs_exponents:
        ledger.abs_sums[a] = WideReal(0)
    if x_max < lo:
        ledger.complete = True
        return ledger

    windows = list(iter_segments(lo, x_max + 1, segment_size))
    directory = Path(checkpoint_dir) if checkpoint_dir is not None else None
    done: list[dict] = []
    if directory is not None:
        directory.mkdir(parents=True, exist_ok=True)
        if resume:
            done = _load_checkpoints(directory, ledger.config())
        else:
            for stale in directory.glob("seg_*.json"):
                stale.unlink()
        _write_atomic(directory / "manifest.json", ledger.config())
    for rec in done:
        _merge(ledger, rec)

    todo = windows[len(done):]
    if max_segments is not None:
        todo = todo[:max_segments]
    args = [(a, b, k_set, over, ledger.abs_exponents) for a, b in todo]
    if workers > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = pool.map(_segment_record, args)
            for i, rec in enumerate(results, start=len(done)):
                _finish_segment(ledger, rec, directory, i)
    else:
        for i, a in enumerate(args, start=len(done)):
            _finish_segment(ledger, _segment_record(a), directory, i)
    ledger.complete = len(ledger.checkpoints) == len(windows)
    return ledger


def _finish_segment(ledger: MomentLedger, rec: dict, directory: Path | None, index: int) -> None:
    _merge(ledger, rec)
    if directory is not None:
        _write_atomic(directory / f"seg_{index:06d}.json", rec)
    log.debug("segment %d [%d, %d) merged", index, rec["lo"], rec["hi"])


def prime_moments(x: int, k_set: Iterable[int], **kw) -> MomentLedger:
    """sum_{p<=x} Delta^k(p) and sum_{p<=x} p^{k/4} for every k in k_set."""
    return sweep(x, k_set, "primes", **kw)


def integer_moments(x: int, k_set: Iterable[int], **kw) -> MomentLedger:
    """sum_{n<=x} Delta^k(n) for every k in k_set."""
    return sweep(x, k_set, "integers", **kw)


# ---------------------------------------------------------------------------
# continuous moments
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ContinuousMoment:
    x: int
    k: int
    value: WideReal
    quadrature_order: int


def _interval_integrals(lo: int, hi: int, D_end_prev: int | None, k: int, nodes, weights):
    """Integrals of Delta(t)^k over [n, n+1) for n in [lo, hi).

    On each unit interval D is constant, so Delta(n + h) equals
    Delta(n) - h log n - (n + h) log1p(h/n) - (2 gamma - 1) h exactly; the
    correction is O(log n) and is evaluated in float64.
    """
    block = segment_block(lo, hi, D_end_prev)
    n = np.arange(lo, hi, dtype=np.float64)
    base = block.delta_hi
    c = 2.0 * float(euler_gamma()) - 1.0
    h = 0.5 * (nodes + 1.0)
    logn = np.log(n)
    acc = np.zeros(hi - lo)
    for hj, wj in zip(h, weights):
        corr = hj * logn + (n + hj) * np.log1p(hj / n) + c * hj
        val = (base - corr) + block.delta_lo
        acc += 0.5 * wj * val ** k
    return acc, int(block.D[-1])


def continuous_moment(x: int, k: int, order: int = 16,
                      segment_size: int = DEFAULT_SEGMENT_SIZE) -> ContinuousMoment:
    """C_k(x) = integral_1^x Delta(t)^k dt by per-unit-interval Gauss-Legendre."""
    if order not in QUADRATURE_ORDERS:
        raise ValueError(f"quadrature order must be one of {QUADRATURE_ORDERS}, got {order}")
    x = int(x)
    if x < 1 or x > 10**7:
        raise ValueError(f"continuous moments are supported for 1 <= x <= 10**7, got {x}")
    if k == 0:
        return ContinuousMoment(x, 0, WideReal(x - 1), order)
    nodes, weights = np.polynomial.legendre.leggauss(order)
    total = WideReal(0)
    D_prev = None
    if x > 1:
        for a, b in iter_segments(1, x, segment_size):
            vals, D_prev = _interval_integrals(a, b, D_prev, k, nodes, weights)
            total += WideReal._raw(*dd_pairwise_sum(vals))
    return ContinuousMoment(x, k, total, order)


# ---------------------------------------------------------------------------
# Furuya's discrete-vs-continuous mean square
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FuruyaReport:
    x: int
    discrete: WideReal
    continuous: WideReal
    secondary: WideReal
    remainder: WideReal
    normalized: float


def furuya_secondary(x: int) -> WideReal:
    """x log^2 x / 6 + (8g - 1) x log x / 12 + (8g^2 - 2g + 1) x / 12."""
    g = euler_gamma()
    L = WideReal(x).log()
    X = WideReal(x)
    return (X * L * L / 6 + (8 * g - 1) * X * L / 12
            + (8 * g * g - 2 * g + 1) * X / 12)


def furuya_check(x: int, order: int = 16) -> FuruyaReport:
    x = int(x)
    if x > 10**6:
        raise ValueError("furuya_check is limited to x <= 10**6")
    disc = integer_moments(x, [2]).sums[2]
    cont = continuous_moment(x, 2, order).value
    sec = furuya_secondary(x)
    rem = disc - cont - sec
    scale = x ** 0.75 * math.log(x) if x > 1 else 1.0
    return FuruyaReport(x, disc, cont, sec, rem, float(rem) / scale)


# ---------------------------------------------------------------------------
# main-term predictions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Prediction:
    k: int
    x: int
    y: int
    b_k: WideReal
    powersum: WideReal
    value: WideReal
    value_quarter_y: WideReal | None


def predict_prime_moment(k: int, x: int, y: int, ledger: MomentLedger | None = None,
                         sensitivity: bool = True) -> Prediction:
    """b_k(y) * sum_{p<=x} p^{k/4}, plus the same with b_k(y/4) for y-sensitivity."""
    from .series import b_k

    if ledger is None or ledger.over != "primes" or k not in ledger.powersums or ledger.x_max != x:
        ledger = prime_moments(x, [k])
    ps = ledger.powersums[k]
    bk = b_k(k, y)
    quarter = None
    if sensitivity and y >= 4:
        quarter = b_k(k, y // 4) * ps
    return Prediction(k, x, y, bk, ps, bk * ps, quarter)


# ---------------------------------------------------------------------------
# absolute moments on dyadic windows
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AbsMomentRow:
    x: int
    A: float
    prime_count: int
    total: WideReal
    normalized: float


@dataclass(frozen=True)
class AbsMomentReport:
    A: float
    rows: list[AbsMomentRow]
    flat_ratio: float
    growth_flagged: bool


def abs_moment_probe(x: int | Sequence[int], A: float) -> AbsMomentReport:
    """sum_{x<p<=2x} |Delta(p)|^A / x^{1+A/4} over a ladder of x values.

    Growth between consecutive rungs faster than (x'/x)^0.05 is flagged.
    """
    A = float(A)
    if not 0 <= A <= A0:
        raise ValueError(f"A must lie in [0, 262/27], got {A}")
    ladder = [int(x)] if isinstance(x, (int, np.integer)) else [int(v) for v in x]
    if max(ladder) > 10**8:
        raise ValueError("abs_moment_probe windows are limited to x <= 10**8")
    rows = []
    for xv in ladder:
        led = sweep(2 * xv, [], "primes", lo=xv + 1, abs_exponents=[A])
        total = led.abs_sums[A]
        rows.append(AbsMomentRow(xv, A, led.prime_count, total,
                                 float(total) / xv ** (1 + A / 4)))
    norms = [r.normalized for r in rows]
    flat = max(norms) / min(norms) if min(norms) > 0 else math.inf
    flagged = any(b.normalized > a.normalized * (b.x / a.x) ** 0.05
                  for a, b in zip(rows, rows[1:]))
    if flagged:
        warnings.warn(f"|Delta|^{A} window sums grow faster than x^0.05 on the ladder {ladder}")
    return AbsMomentReport(A, rows, flat, flagged)
