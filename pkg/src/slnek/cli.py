"""Command-line entry point.

Subcommands: count, densities, congruence, moments, clt, fixtures.
Exit status is 0 on success, 2 for invalid arguments, 3 for I/O failures.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from dataclasses import dataclass

from . import arith, cltlab, localcount, matgen, sievestats
from .errors import CountOverflowError, SearchSpaceTooLargeError

log = logging.getLogger("slnek")

DEFAULT_GRID = (10**4, 10**6, 10**8)
EXIT_USAGE = 2
EXIT_IO = 3


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    n: int = 2
    position: tuple[int, int] = (1, 1)
    bounds: tuple[int, ...] = DEFAULT_GRID
    psi: float = arith.DEFAULT_PSI
    q_max: int = 30
    k_max: int = 6
    partitions: int = 1
    out: str | None = None
    fmt: str = "csv"

    def validate(self) -> None:
        if self.n not in matgen.SUPPORTED_DIMENSIONS:
            raise UsageError(f"unsupported dimension n={self.n}")
        i, j = self.position
        if not (1 <= i <= self.n and 1 <= j <= self.n):
            raise UsageError(f"position {self.position} out of range for n={self.n}")
        if any(b < 0 for b in self.bounds):
            raise UsageError("squared-norm bounds must be non-negative")
        if not 0 < self.psi < 0.5:
            raise UsageError("psi must lie in (0, 1/2)")
        if self.partitions < 1:
            raise UsageError("partitions must be >= 1")
        if self.k_max < 1:
            raise UsageError("k-max must be >= 1")


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _table_text(header, rows, fmt: str) -> str:
    # floats print via repr, the shortest string that round-trips
    if fmt == "json":
        return _json_text([dict(zip(header, r)) for r in rows])
    return _csv_text(header, rows)


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    with open(out, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _parse_ints(text: str) -> tuple[int, ...]:
    try:
        vals = tuple(int(float(v)) if "e" in v.lower() else int(v)
                     for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _parse_position(text: str) -> tuple[int, int]:
    try:
        i, j = (int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'i,j', got {text!r}")
    return i, j


def _config(args, default_grid=DEFAULT_GRID) -> RunConfig:
    if args.b is not None:
        bounds = args.b
    elif args.t is not None:
        bounds = tuple(t * t for t in args.t)
    elif default_grid is None:
        raise UsageError("one of --b or --t is required")
    else:
        bounds = default_grid
    cfg = RunConfig(
        n=args.n,
        position=args.pos,
        bounds=tuple(bounds),
        psi=args.psi,
        q_max=args.q_max,
        k_max=args.k_max,
        partitions=args.partitions,
        out=args.out,
        fmt=args.format,
    )
    cfg.validate()
    return cfg


# ---------------------------------------------------------------------------
# Commands; each returns the text to write
# ---------------------------------------------------------------------------

def cmd_count(cfg: RunConfig) -> str:
    rows = []
    for b in sorted(cfg.bounds):
        bc = matgen.ball_count(cfg.n, b, cfg.partitions)
        rows.append([cfg.n, b, bc.count, float(bc.c_n), float(bc.ratio)])
    return _table_text(["n", "B", "count", "c_n", "ratio"], rows, cfg.fmt)


def cmd_densities(n: int, p_max: int, position: tuple[int, int], fmt: str) -> str:
    sieve = arith.FactorSieve(max(p_max, 2))
    rows = []
    for p in sieve.primes.tolist():
        order = localcount.sl_order(n, p)
        zero = localcount.zero_entry_count(n, p)
        try:
            b_order = localcount.brute_force_count(n, p)
            b_zero = localcount.brute_force_count(n, p, localcount.zero_at(*position))
        except SearchSpaceTooLargeError:
            log.info("p=%d beyond the exhaustive-search guard; brute cells left blank", p)
            b_order = b_zero = ""
        share = localcount.expected_share(n, p)
        rows.append([p, order, b_order, zero, b_zero, f"{share.numerator}/{share.denominator}"])
    header = ["p", "formula_order", "brute_order", "formula_zero", "brute_zero", "density"]
    return _table_text(header, rows, fmt)


def cmd_congruence(cfg: RunConfig) -> str:
    qs = sievestats.squarefree_moduli(cfg.q_max)
    rows = []
    for b in sorted(cfg.bounds):
        stats = matgen.ball_statistics(cfg.n, b, cfg.partitions)
        for r in sievestats.congruence_counts(stats.entry_histogram(*cfg.position), qs, cfg.n):
            rows.append([b, r.q, r.x, r.observed, float(r.expected), float(r.residual)])
    return _table_text(["B", "q", "x", "A_q", "expected", "residual"], rows, cfg.fmt)


def cmd_moments(cfg: RunConfig) -> str:
    bounds = sorted(cfg.bounds)
    sieve = arith.FactorSieve(max(math.isqrt(bounds[-1]), 2))
    rows = []
    for b in bounds:
        t = math.sqrt(b)
        prime_set = arith.PrimeSet.upto(arith.prime_threshold(t, cfg.psi), sieve)
        stats = matgen.ball_statistics(cfg.n, b, cfg.partitions)
        reports = sievestats.normalized_moments(
            stats.entry_histogram(*cfg.position), prime_set, cfg.n, cfg.k_max, sieve
        )
        for r in reports:
            rows.append([b, r.k, float(r.raw_sum), float(r.normalized), float(r.reference)])
    return _table_text(["B", "k", "raw_sum", "normalized", "reference"], rows, cfg.fmt)


def clt_document(cfg: RunConfig) -> dict:
    points = cltlab.eks_experiment(cfg.n, cfg.position, cfg.bounds, cfg.psi, cfg.partitions)

    def hist(d):
        return {str(k): v for k, v in sorted(d.items())}

    return {
        "n": cfg.n,
        "position": list(cfg.position),
        "psi": cfg.psi,
        "grid": [p.bound for p in points],
        "t": [p.t for p in points],
        "loglog_t": [p.loglog_t for p in points],
        "epsilon": [p.eps for p in points],
        "z": [p.z for p in points],
        "mu_p": [p.moments.mu for p in points],
        "sigma2_p": [p.moments.sigma2 for p in points],
        "sample_size": [p.ks_full.sample_size for p in points],
        "ks_full": [p.ks_full.ks for p in points],
        "ks_truncated": [p.ks_truncated.ks for p in points],
        "gap_allowance": [p.gap_allowance for p in points],
        "scale": [p.scale for p in points],
        "shift": [p.shift for p in points],
        "recentering_error": [p.recentering_error for p in points],
        "truncation_violations": [p.truncation_violations for p in points],
        "zero_entry_counts": [p.zero_entries for p in points],
        "histograms": [
            {"B": p.bound, "full": hist(p.omega_full), "truncated": hist(p.omega_truncated)}
            for p in points
        ],
    }


def cmd_clt(cfg: RunConfig) -> str:
    for b in cfg.bounds:
        if b <= math.exp(2 * math.e):
            raise UsageError(f"B={b} too small: need T = sqrt(B) > e^e")
    return _json_text(clt_document(cfg))


def fixtures_document() -> dict:
    ball = [list(map(list, g)) for g in matgen.iter_ball(2, 2)]
    entries = list(matgen.entry_stream(2, 2, 1, 1))
    a2 = sievestats.congruence_counts(entries, [2], 2)[0]
    return {
        "sl2_ball_B2": {"count": len(ball), "matrices": ball},
        "sl2_ball_B2_entries_1_1": sorted(entries),
        "sl2_ball_B2_A_2": {"observed": a2.observed, "expected": str(a2.expected_exact),
                            "residual": str(a2.residual_exact)},
        "sl3_ball_B3_count": matgen.count_ball(3, 3),
        "sl2_orders": {str(p): localcount.sl_order(2, p) for p in (2, 3, 5)},
        "sl2_zero_entry_counts": {str(p): localcount.zero_entry_count(2, p) for p in (2, 3, 5)},
        "sl2_mod6": {"order": localcount.brute_force_count(2, 6),
                     "zero_entry": localcount.brute_force_count(2, 6, localcount.zero_at(1, 1))},
        "c_2": matgen.asymptotic_constant(2),
    }


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, default=2, help="matrix dimension (2 or 3)")
    grid = common.add_mutually_exclusive_group()
    grid.add_argument("--b", type=_parse_ints, help="squared-norm bound(s) B, comma separated")
    grid.add_argument("--t", type=_parse_ints, help="integer norm bound(s) T; B = T^2")
    common.add_argument("--pos", type=_parse_position, default=(1, 1), help="entry position i,j")
    common.add_argument("--psi", type=float, default=arith.DEFAULT_PSI)
    common.add_argument("--q-max", type=int, default=30)
    common.add_argument("--k-max", type=int, default=6)
    common.add_argument("--partitions", type=int, default=1)
    common.add_argument("--out", default=None, help="output file (default stdout)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="slnek", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("count", parents=[common], help="exact ball count, c_n and ratio")
    dens = sub.add_parser("densities", parents=[common],
                          help="finite-field orders and zero-entry counts vs brute force")
    dens.add_argument("--p-max", type=int, default=13)
    sub.add_parser("congruence", parents=[common], help="A_q against (h(q)/q) x")
    sub.add_parser("moments", parents=[common], help="normalized truncated moments")
    sub.add_parser("clt", parents=[common], help="KS distances and omega histograms (JSON)")
    sub.add_parser("fixtures", parents=[common], help="tiny exact fixtures (JSON)")
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "count":
            text = cmd_count(_config(args, default_grid=None))
        elif args.command == "densities":
            if args.n not in (2, 3):
                raise UsageError(f"unsupported dimension n={args.n}")
            text = cmd_densities(args.n, args.p_max, args.pos, args.format)
        elif args.command == "congruence":
            text = cmd_congruence(_config(args))
        elif args.command == "moments":
            text = cmd_moments(_config(args))
        elif args.command == "clt":
            text = cmd_clt(_config(args))
        else:
            text = _json_text(fixtures_document())
    except (UsageError, ValueError, IndexError, CountOverflowError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        _emit(text, args.out)
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    return 0


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
