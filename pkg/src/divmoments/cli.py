"""Command-line front end: ``divmoments <subcommand> [options]``.

Every run validates its parameters first, writes its output atomically
(temp file + rename) and emits a manifest with the full configuration, the
package version and the wall time.  Exit codes: 0 ok, 2 invalid
configuration, 3 budget refusal, 4 internal consistency abort, 5 failed check.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
import tempfile
import time
from decimal import Decimal, InvalidOperation
from fractions import Fraction
from pathlib import Path

from . import __version__
from .errors import BudgetError, CheckFailed, CheckpointMismatch, ConsistencyError
from .widereal import WideReal

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BUDGET = 3
EXIT_CONSISTENCY = 4
EXIT_CHECK = 5

log = logging.getLogger("divmoments")


# ---------------------------------------------------------------------------
# argument helpers
# ---------------------------------------------------------------------------

def int_like(text: str) -> int:
    """Accept 1000000, 1e6, 10**6 style integers; reject non-integral values."""
    text = text.strip().replace("_", "")
    try:
        if "**" in text:
            base, exp = text.split("**")
            return int(base) ** int(exp)
        value = Decimal(text)
    except (InvalidOperation, ValueError):
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if value != value.to_integral_value():
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    return int(value)


def int_list(text: str) -> list[int]:
    return [int_like(t) for t in text.split(",") if t.strip()]


def fmt(v):
    if isinstance(v, WideReal):
        return v.to_str(34)
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (tuple, list)):
        return " ".join(str(x) for x in v)
    return v


def jsonable(v):
    if isinstance(v, dict):
        return {str(k): jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [jsonable(x) for x in v]
    if isinstance(v, WideReal):
        return v.to_str(34)
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    if hasattr(v, "item"):
        return v.item()
    return v


def write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def render(result: dict, fmt_name: str) -> str:
    rows = result.get("rows", [])
    if fmt_name == "json":
        return json.dumps(jsonable(result), indent=2, sort_keys=True) + "\n"
    buf = io.StringIO()
    if rows:
        writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: fmt(v) for k, v in row.items()})
    else:
        summary = result.get("summary", {})
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(list(summary.keys()))
        writer.writerow([fmt(jsonable(v)) if isinstance(v, (dict, list)) else fmt(v)
                         for v in summary.values()])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# subcommands; each returns {"summary": {...}, "rows": [...]} and a status
# ---------------------------------------------------------------------------

def cmd_sieve(args):
    from .sieve import build_segment

    if args.hi - args.lo > 10**6:
        raise BudgetError("sieve output is limited to 10**6 rows per run")
    seg = build_segment(args.lo, args.hi + 1, segment_size=max(args.segment_size, args.hi - args.lo + 1))
    rows = [{"n": int(n), "d": int(d), "mu": int(m), "Lambda": float(l), "is_prime": int(p)}
            for n, d, m, l, p in zip(seg.n, seg.d, seg.mu, seg.lambda_log, seg.is_prime)]
    return {"summary": {"lo": args.lo, "hi": args.hi, "primes": int(seg.is_prime.sum())},
            "rows": rows}, EXIT_OK


def cmd_delta(args):
    from .delta import delta_at, iter_delta_blocks

    x2 = args.x if args.x2 is None else args.x2
    if x2 < args.x:
        raise ValueError("--x2 must be >= --x")
    if x2 - args.x > 10**6:
        raise BudgetError("delta output is limited to 10**6 rows per run")
    if x2 == args.x:
        s = delta_at(args.x)
        rows = [{"x": s.x, "D": s.D, "Delta": s.delta}]
    else:
        rows = []
        for block in iter_delta_blocks(args.x, x2 + 1, args.segment_size):
            for i in range(block.hi - block.lo):
                rows.append({"x": block.lo + i, "D": int(block.D[i]),
                             "Delta": WideReal._raw(block.delta_hi[i], block.delta_lo[i])})
    return {"summary": {"x": args.x, "x2": x2}, "rows": rows}, EXIT_OK


def cmd_voronoi(args):
    from .voronoi import delta2_window, moment_of_delta1

    x2 = args.x if args.x2 is None else args.x2
    if x2 < args.x:
        raise ValueError("--x2 must be >= --x")
    if args.x < 2:
        raise ValueError("--x must be >= 2")
    if x2 - args.x > 10**6:
        raise BudgetError("voronoi output is limited to 10**6 rows per run")
    rows = [{"x": n, "N": args.N, "Delta": d, "delta1": d1, "delta2": d2}
            for n, d, d1, d2 in delta2_window(args.x, x2, args.N, args.over)]
    summary = {"x": args.x, "x2": x2, "N": args.N, "over": args.over}
    if args.A is not None and x2 > args.x:
        m = moment_of_delta1(args.x, args.N, args.A, args.over, x2=x2)
        summary.update({"A": args.A, "moment_abs_delta1": m})
    return {"summary": summary, "rows": rows}, EXIT_OK


def cmd_alpha_min(args):
    from .radicals import min_nonzero_alpha

    exponent = 2 ** (args.k - 2) - 0.5
    rows = []
    for E in range(args.E_min, args.E + 1):
        r = min_nonzero_alpha(args.k, E)
        rows.append({"E": E, "min": r.value, "witness": r.witness, "pattern": str(r.pattern),
                     "scaled": float(r.value) * E ** exponent})
    return {"summary": {"k": args.k, "E": args.E}, "rows": rows}, EXIT_OK


def cmd_series(args):
    from .series import s_kl

    ls = [args.l] if args.l is not None else list(range(1, args.k))
    rows = []
    for l in ls:
        s = s_kl(args.k, l, args.y)
        rows.append({"k": s.k, "l": s.l, "y": s.y, "value": s.value, "solutions": s.solutions})
    return {"summary": {"k": args.k, "y": args.y}, "rows": rows}, EXIT_OK


def cmd_constants(args):
    import warnings

    from .series import THETA_STATED, constants

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        bundle = constants(args.k, args.y)
    summary = bundle.to_json()
    notes = [str(w.message) for w in caught]
    if args.k == 9:
        summary["theta_tabulated"] = f"{THETA_STATED[9].numerator}/{THETA_STATED[9].denominator}"
    if notes:
        summary["warnings"] = notes
    return {"summary": summary, "rows": []}, EXIT_OK


def default_y(k: int) -> int:
    from .series import SERIES_BUDGET

    return SERIES_BUDGET[k]


def cmd_moments(args):
    from .moments import predict_prime_moment, sweep
    from .series import theta

    ledger = sweep(args.x, args.k, args.over, workers=args.workers,
                   segment_size=args.segment_size, checkpoint_dir=args.checkpoint,
                   resume=args.resume)
    rows = []
    for k in ledger.k_set:
        row = {"x": args.x, "k": k, "over": args.over, "sum": ledger.sums[k]}
        if args.over == "primes" and k >= 2:
            y = args.y if args.y is not None else default_y(k)
            pred = predict_prime_moment(k, args.x, y, ledger=ledger)
            row.update({
                "y": y,
                "b_k": pred.b_k,
                "powersum": pred.powersum,
                "prediction": pred.value,
                "ratio": float(ledger.sums[k]) / float(pred.value) if pred.value else math.nan,
                "prediction_y_over_4": pred.value_quarter_y,
                "theta": theta(k) if k >= 3 else None,
            })
        rows.append(row)
    summary = {"x": args.x, "k": list(ledger.k_set), "over": args.over,
               "prime_count": ledger.prime_count, "count": ledger.count,
               "complete": ledger.complete}
    return {"summary": summary, "rows": rows}, EXIT_OK


def _pattern(text: str, k: int):
    from .radicals import SignPattern

    signs = [1 if c == "+" else -1 for c in text.strip() if c in "+-"]
    if len(signs) != k:
        raise ValueError(f"pattern {text!r} must have {k} signs")
    return SignPattern.from_signs(signs)


def cmd_spacing(args):
    from . import spacing

    rows = []
    status = EXIT_OK
    if args.kind == "v":
        res = spacing.count_pairs_v(args.N, args.X)
        rows.append({"N": args.N, "X": args.X, "count": res.count, "bound": res.bound,
                     "ratio": res.ratio})
    elif args.kind == "large":
        res = spacing.count_large_values(args.T, args.V)
        rows.append({"T": args.T, "V": args.V, "count": res.count, "bound": res.bound,
                     "ratio": res.ratio})
        if res.ratio > spacing.RATIO_CAP:
            status = EXIT_CHECK
    else:
        if args.sweep:
            pairs = spacing.sweep_A() if args.kind == "A" else spacing.sweep_B()
        else:
            ranges = tuple(int_list(args.ranges))
            inst = spacing.SpacingInstance(len(ranges), ranges, _pattern(args.pattern, len(ranges)),
                                           rho=args.rho if args.kind == "A" else None,
                                           beta=args.beta, R=args.R if args.kind == "B" else None,
                                           tol=args.tol if args.kind == "B" else None)
            fn = spacing.count_A if args.kind == "A" else spacing.count_B
            pairs = [(inst, fn(inst))]
        for inst, res in pairs:
            row = {**inst.as_row(), "count": res.count, "bound": res.bound, "ratio": res.ratio}
            if "ratio_alt" in res.extra:
                row.update({"bound_alt": res.extra["bound_alt"], "ratio_alt": res.extra["ratio_alt"]})
            rows.append(row)
        if max(r["ratio"] for r in rows) > spacing.RATIO_CAP:
            status = EXIT_CHECK
    return {"summary": {"kind": args.kind}, "rows": rows}, status


def cmd_hb_check(args):
    from .identities import hb_sweep

    rep = hb_sweep(args.k, args.z, n_max=args.nmax)
    summary = {"k": rep.k, "z": rep.z, "n_max": rep.n_max, "max_deviation": rep.max_deviation,
               "worst_n": rep.worst_n, "failures": len(rep.failures), "passed": rep.passed}
    return {"summary": summary, "rows": []}, EXIT_OK if rep.passed else EXIT_CHECK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    from .moments import default_workers
    from .sieve import DEFAULT_SEGMENT_SIZE

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--workers", type=int, default=default_workers(),
                        help="worker processes (env DIVMOMENTS_WORKERS sets the default)")
    common.add_argument("--segment-size", type=int_like, default=DEFAULT_SEGMENT_SIZE)
    common.add_argument("--out", type=Path, default=None, help="output file (default stdout)")
    common.add_argument("--format", choices=("csv", "json"), default=None)
    common.add_argument("--checkpoint", type=Path, default=None, help="checkpoint directory")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="divmoments", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"divmoments {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sieve", parents=[common], help="d, mu, Lambda, primality on [lo, hi]")
    s.add_argument("--lo", type=int_like, required=True)
    s.add_argument("--hi", type=int_like, required=True)
    s.set_defaults(func=cmd_sieve, default_format="csv")

    s = sub.add_parser("delta", parents=[common], help="exact D(x) and Delta(x)")
    s.add_argument("--x", type=int_like, required=True)
    s.add_argument("--x2", type=int_like, default=None)
    s.set_defaults(func=cmd_delta, default_format="csv")

    s = sub.add_parser("voronoi", parents=[common], help="truncated Voronoi sums")
    s.add_argument("--x", type=int_like, required=True)
    s.add_argument("--x2", type=int_like, default=None)
    s.add_argument("--N", type=int_like, required=True)
    s.add_argument("--A", type=float, default=None, help="exponent for sum |delta_1|^A")
    s.add_argument("--over", choices=("primes", "integers"), default="integers")
    s.set_defaults(func=cmd_voronoi, default_format="csv")

    s = sub.add_parser("alpha-min", parents=[common], help="smallest nonzero |alpha_k|")
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--E", type=int, required=True)
    s.add_argument("--E-min", type=int, default=1)
    s.add_argument("--csv", dest="format", action="store_const", const="csv")
    s.set_defaults(func=cmd_alpha_min, default_format="csv")

    s = sub.add_parser("series", parents=[common], help="truncated singular series s_{k,l}(y)")
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--l", type=int, default=None)
    s.add_argument("--y", type=int_like, required=True)
    s.set_defaults(func=cmd_series, default_format="csv")

    s = sub.add_parser("constants", parents=[common], help="B_k(y), b_k(y) and theta(k)")
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--y", type=int_like, required=True)
    s.set_defaults(func=cmd_constants, default_format="json")

    s = sub.add_parser("moments", parents=[common], help="power moments of Delta")
    s.add_argument("--x", type=int_like, required=True)
    s.add_argument("--k", type=int_list, required=True)
    s.add_argument("--over", choices=("primes", "integers"), default="primes")
    s.add_argument("--y", type=int_like, default=None, help="truncation of b_k (default per k)")
    s.add_argument("--resume", action="store_true")
    s.set_defaults(func=cmd_moments, default_format="json")

    s = sub.add_parser("spacing", parents=[common], help="counting-lemma experiments")
    s.add_argument("kind", choices=("A", "v", "B", "large"))
    s.add_argument("--ranges", default="4,1,1", help="comma-separated N_j of (N_j, 2N_j]")
    s.add_argument("--pattern", default=None, help="signs such as +-- (first must be +)")
    s.add_argument("--rho", type=float, default=0.1)
    s.add_argument("--beta", type=float, default=0.5)
    s.add_argument("--R", type=int, default=2)
    s.add_argument("--tol", type=float, default=1e-3)
    s.add_argument("--N", type=int_like, default=10)
    s.add_argument("--X", type=float, default=100.0)
    s.add_argument("--T", type=int_like, default=10**5)
    s.add_argument("--V", type=float, default=None)
    s.add_argument("--sweep", action="store_true", help="run the documented grid")
    s.set_defaults(func=cmd_spacing, default_format="csv")

    s = sub.add_parser("hb-check", parents=[common], help="Heath-Brown identity sweep")
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--z", type=float, required=True)
    s.add_argument("--nmax", type=int_like, default=None)
    s.set_defaults(func=cmd_hb_check, default_format="json")
    return p


def _validate(args) -> None:
    if args.workers < 1:
        raise ValueError("--workers must be >= 1")
    if args.segment_size < 1:
        raise ValueError("--segment-size must be >= 1")
    if args.command == "spacing":
        if args.kind in ("A", "B") and not args.sweep and args.pattern is None:
            k = len(int_list(args.ranges))
            args.pattern = "+" + "-" * (k - 1)
        if args.kind == "large" and args.V is None:
            args.V = args.T ** 0.25


def _config(args) -> dict:
    cfg = {}
    for key, value in sorted(vars(args).items()):
        if key in ("func", "verbose"):
            continue
        cfg[key] = str(value) if isinstance(value, Path) else value
    return cfg


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    args.format = args.format or args.default_format
    start = time.perf_counter()
    try:
        _validate(args)
        result, status = args.func(args)
    except (ValueError, CheckpointMismatch) as exc:
        print(f"divmoments: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BudgetError as exc:
        print(f"divmoments: budget refusal: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except ConsistencyError as exc:
        print(f"divmoments: consistency abort: {exc}", file=sys.stderr)
        return EXIT_CONSISTENCY
    except CheckFailed as exc:
        print(f"divmoments: check failed: {exc}", file=sys.stderr)
        return EXIT_CHECK
    text = render(result, args.format)
    manifest = {"config": _config(args), "version": __version__, "exit_status": status,
                "wall_time_s": round(time.perf_counter() - start, 6)}
    if args.out is None:
        sys.stdout.write(text)
        print(json.dumps(manifest, sort_keys=True), file=sys.stderr)
    else:
        write_atomic(args.out, text)
        write_atomic(args.out.with_name(args.out.name + ".manifest.json"),
                     json.dumps(jsonable(manifest), indent=2, sort_keys=True) + "\n")
    return status


if __name__ == "__main__":
    sys.exit(main())
