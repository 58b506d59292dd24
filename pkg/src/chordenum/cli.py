"""Command-line entry point: ``chordenum <subcommand> [flags]``.

Exit codes: 0 success, 1 verification mismatch, 2 usage error,
3 numeric non-convergence.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from fractions import Fraction

from . import gfsystem, mps, oracle, singularity
from .mps import SeriesError

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE, EXIT_NONCONV = 0, 1, 2, 3

log = logging.getLogger("chordenum")


class UsageError(Exception):
    pass


def _rat(q) -> str:
    q = Fraction(int(q.numerator), int(q.denominator))
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _ratobj(q) -> dict:
    return {"num": str(int(q.numerator)), "den": str(int(q.denominator))}


def _csv(rows, header) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


def _need(args, *names):
    for name in names:
        if getattr(args, name) is None:
            raise UsageError(f"--{name.replace('_', '-')} is required for {args.cmd}")


def _check_tk(t: int, k: int):
    if t < 1:
        raise UsageError("--t must be at least 1")
    if not 0 <= k <= t + 1:
        raise UsageError(f"--k must lie in 0..{t + 1}")


# -- subcommands ----------------------------------------------------------------

def cmd_count(args) -> tuple[str, int]:
    _need(args, "t", "k", "N")
    _check_tk(args.t, args.k)
    if args.N < 1:
        raise UsageError("--N must be at least 1")
    sys_ = gfsystem.assemble(args.t, args.N, check_integral=args.check_integral_unroot)
    values = gfsystem.counts(sys_, args.k)
    if args.format == "json":
        body = {"t": args.t, "k": args.k, "counts": [{"n": n, "count": str(c)} for n, c in enumerate(values, 1)]}
        return _json(body), EXIT_OK
    return _csv([(n, c) for n, c in enumerate(values, 1)], ["n", "count"]), EXIT_OK


def cmd_verify(args) -> tuple[str, int]:
    t_max = args.tmax if args.tmax is not None else (args.t if args.t is not None else 3)
    n_max = args.N if args.N is not None else 7
    t_values = [args.t] if args.t is not None else list(range(1, t_max + 1))
    if n_max > args.oracle_cap:
        raise UsageError(f"--N={n_max} exceeds the oracle cap {args.oracle_cap} (raise --oracle-cap)")
    if min(t_values) < 1 or n_max < 1:
        raise UsageError("need t >= 1 and N >= 1")
    rows, ok = [], True
    corrupt = args.corrupt_coefficient
    for t in t_values:
        sys_ = gfsystem.assemble(t, n_max, check_integral=args.check_integral_unroot)
        ks = [args.k] if args.k is not None else range(0, t + 1)
        for k in ks:
            for n in range(1, n_max + 1):
                series = gfsystem.count(sys_, k, n)
                if corrupt:
                    series += 1
                    corrupt = False
                brute = oracle.enumerate_count(t, k, n, workers=args.workers, cap=args.oracle_cap)
                match = series == brute
                ok &= match
                rows.append((t, k, n, series, brute, "yes" if match else "no"))
    header = ["t", "k", "n", "series_count", "oracle_count", "match"]
    if args.format == "json":
        body = [dict(zip(header, [r[0], r[1], r[2], str(r[3]), str(r[4]), r[5] == "yes"])) for r in rows]
        return _json({"all_match": ok, "rows": body}), EXIT_OK if ok else EXIT_MISMATCH
    return _csv(rows, header), EXIT_OK if ok else EXIT_MISMATCH


def cmd_table(args) -> tuple[str, int]:
    t_max = args.tmax if args.tmax is not None else 4
    if t_max < 1:
        raise UsageError("--tmax must be at least 1")
    if args.prec > 1e-12:
        raise UsageError("--prec must be at most 1e-12 for table runs")
    try:
        tab = singularity.table(t_max, args.prec, limit=args.table_limit)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if args.format == "json":
        entries = []
        for (t, k), bp in sorted(tab.items()):
            entries.append({
                "t": t, "k": k,
                "rho": f"{bp.rho:.20f}",
                "y_star": f"{bp.y_star:.20f}",
                "residuals": [f"{float(r):.3e}" for r in bp.residuals],
            })
        return _json({"tmax": t_max, "entries": entries}), EXIT_OK
    rows = []
    for t in range(1, t_max + 1):
        rows.append([t] + [f"{float(tab[t, k].rho):.5f}" for k in range(1, t + 1)] + [""] * (t_max - t))
    return _csv(rows, ["t"] + [f"k={k}" for k in range(1, t_max + 1)]), EXIT_OK


def cmd_moments(args) -> tuple[str, int]:
    _need(args, "t", "k")
    _check_tk(args.t, args.k)
    N = args.N if args.N is not None else 10
    i = args.i
    if not 2 <= i <= args.t + 1:
        raise UsageError(f"--i must lie in 2..{args.t + 1}")
    sys_ = gfsystem.assemble(args.t, N)
    rows = []
    for n in range(1, N + 1):
        if gfsystem.count(sys_, args.k, n) == 0:
            continue
        mean, var = gfsystem.clique_moments(sys_, args.k, n, i)
        rows.append((n, mean, var))
    if args.format == "json":
        body = [{"n": n, "i": i, "mean": _ratobj(m), "var": _ratobj(v)} for n, m, v in rows]
        return _json({"t": args.t, "k": args.k, "moments": body}), EXIT_OK
    out = [(n, _rat(m), _rat(v), f"{float(m) / n:.12f}", f"{float(v) / n:.12f}") for n, m, v in rows]
    return _csv(out, ["n", "mean", "var", "mean_over_n", "var_over_n"]), EXIT_OK


def cmd_asymptotics(args) -> tuple[str, int]:
    _need(args, "t", "k")
    _check_tk(args.t, args.k)
    if not 1 <= args.k <= args.t:
        raise UsageError("asymptotics needs 1 <= k <= t")
    N = args.N if args.N is not None else 40
    if N < 12:
        raise UsageError("--N must be at least 12 for the ratio fit")
    sys_ = gfsystem.assemble(args.t, N)
    a = [Fraction(gfsystem.count(sys_, args.k, n), math.factorial(n)) for n in range(1, N + 1)]
    start = max(1, args.k)
    rho_hat, alpha = singularity.ratio_estimate((start, a[start - 1:]))
    bp = singularity.branch_point(args.t, args.k, args.prec)
    const = singularity.constant_estimate(args.t, args.k, N, coeffs=a, rho=bp.rho)
    body = {
        "t": args.t, "k": args.k, "N": N,
        "rho_branch": f"{float(bp.rho):.12f}",
        "rho_ratio": f"{rho_hat:.12f}",
        "exponent": f"{alpha:.6f}",
        "constant": f"{const:.8e}",
    }
    if args.t == args.k:
        body["constant_closed_form"] = f"{singularity.ktree_constant(args.k):.8e}"
    if args.format == "json":
        return _json(body), EXIT_OK
    return _csv([list(body.values())], list(body.keys())), EXIT_OK


def cmd_series_dump(args) -> tuple[str, int]:
    _need(args, "t", "k", "N")
    _check_tk(args.t, args.k)
    sys_ = gfsystem.assemble(args.t, args.N, check_integral=args.check_integral_unroot)
    if args.rooted:
        if not 1 <= args.k <= args.t:
            raise UsageError("--rooted needs 1 <= k <= t")
        series = sys_.rooted[args.k]
    else:
        series = sys_.unrooted[args.k]
    return json.dumps(mps.to_json(series), separators=(",", ":")) + "\n", EXIT_OK


COMMANDS = {
    "count": cmd_count,
    "verify": cmd_verify,
    "table": cmd_table,
    "moments": cmd_moments,
    "asymptotics": cmd_asymptotics,
    "series-dump": cmd_series_dump,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="chordenum", description="Enumerate k-connected chordal graphs of bounded tree-width.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="cmd", parser_class=_Parser)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--t", type=int)
        s.add_argument("--k", type=int)
        s.add_argument("--N", type=int)
        s.add_argument("--tmax", type=int)
        s.add_argument("--prec", type=float, default=1e-12)
        s.add_argument("--format", choices=["csv", "json"], default="csv")
        s.add_argument("--json", dest="format", action="store_const", const="json")
        s.add_argument("--workers", type=int, default=1)
        s.add_argument("--oracle-cap", type=int, default=oracle.DEFAULT_CAP)
        s.add_argument("--check-integral-unroot", action="store_true")
        if name == "moments":
            s.add_argument("--i", type=int, default=2)
        if name == "table":
            s.add_argument("--table-limit", type=int, default=singularity.TABLE_LIMIT)
        if name == "series-dump":
            s.add_argument("--rooted", action="store_true")
        if name == "verify":
            # test hook: perturb one series count so the mismatch path can be exercised
            s.add_argument("--corrupt-coefficient", action="store_true", help=argparse.SUPPRESS)
    return p


def run(argv=None) -> tuple[str, str, int]:
    """Run the CLI and return ``(stdout, stderr, exit code)``."""
    try:
        args = build_parser().parse_args(argv)
        if args.cmd is None:
            raise UsageError("a subcommand is required: " + ", ".join(COMMANDS))
        if args.workers < 1:
            raise UsageError("--workers must be positive")
        logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
        out, code = COMMANDS[args.cmd](args)
        return out, "", code
    except UsageError as exc:
        return "", f"usage error: {exc}\n", EXIT_USAGE
    except singularity.NonConvergence as exc:
        return "", f"non-convergence: {exc}\n", EXIT_NONCONV
    except (SeriesError, oracle.OracleError, ValueError) as exc:
        return "", f"error: {exc}\n", EXIT_USAGE


def main(argv=None) -> int:
    out, err, code = run(argv)
    sys.stdout.write(out)
    sys.stderr.write(err)
    return code


if __name__ == "__main__":
    sys.exit(main())
