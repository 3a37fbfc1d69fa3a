"""Command-line interface.

Subcommands: density (raw or scaled point evaluation), conditional
(rescaled conditional density vs its Gaussian limit), tw (Tracy-Widom
table), converge (the rigidity convergence study), verify (oracle gate),
contours (debug grid export).

Exit codes: 0 success, 1 verification failure, 2 usage or precondition
error.  A plain-text ``key = value`` config file can seed any option;
explicit flags win.  Randomness (Monte Carlo only) always requires an
explicit seed, from config or flag - there is no wall-clock seeding.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys

from .errors import DlgeoError, DomainError

_ENV_THREADS = "DLGEO_THREADS"


def _fail_usage(msg: str) -> "NoReturn":
    print(f"error: {msg}", file=sys.stderr)
    raise SystemExit(2)


def read_config(path: str) -> dict:
    """Parse a plain `key = value` file; '#' starts a comment."""
    out = {}
    with open(path) as fh:
        for ln, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                _fail_usage(f"{path}:{ln}: expected 'key = value'")
            k, v = (part.strip() for part in line.split("=", 1))
            out[k.replace("-", "_")] = v
    return out


def _coerce_like(current, raw: str):
    if isinstance(current, bool):
        return raw.lower() in ("1", "true", "yes", "on")
    if isinstance(current, int):
        return int(raw)
    if isinstance(current, float):
        return float(raw)
    if current is None:
        for cast in (int, float):
            try:
                return cast(raw)
            except ValueError:
                pass
    return raw


def _merge_config(args: argparse.Namespace, argv: list[str]) -> None:
    """Fill options from the config file; explicitly given flags win."""
    if not getattr(args, "config", None):
        return
    cfg = read_config(args.config)
    for key, raw in cfg.items():
        if not hasattr(args, key) or key in ("config", "func", "command"):
            continue
        flag = "--" + key.replace("_", "-")
        if any(tok == flag or tok.startswith(flag + "=") for tok in argv):
            continue  # flag given explicitly
        try:
            setattr(args, key, _coerce_like(getattr(args, key), raw))
        except ValueError:
            _fail_usage(f"config value for {key!r} has the wrong type: {raw!r}")


def _default_threads() -> int:
    try:
        return max(1, int(os.environ.get(_ENV_THREADS, "1")))
    except ValueError:
        return 1


def _policy_from_args(args) -> "TruncationPolicy":
    from .density import TruncationPolicy
    kw = {}
    if getattr(args, "k_max", None) is not None:
        kw["k_max"] = args.k_max
    if getattr(args, "z_radius", None) is not None:
        kw["z_radius"] = args.z_radius
    if getattr(args, "z_nodes", None) is not None:
        kw["z_nodes"] = args.z_nodes
    if getattr(args, "threads", None) is not None:
        kw["threads"] = args.threads
    try:
        return TruncationPolicy(**kw)
    except DomainError as exc:
        _fail_usage(str(exc))


def _emit(rows, header, args) -> None:
    """Write rows as CSV (with header) or streaming JSON objects."""
    out = open(args.output, "w", newline="") if args.output else sys.stdout
    try:
        if args.format == "csv":
            w = csv.writer(out, lineterminator="\n")
            w.writerow(header)
            for r in rows:
                w.writerow(r)
        else:
            for r in rows:
                out.write(json.dumps(dict(zip(header, r))) + "\n")
    finally:
        if args.output:
            out.close()


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_density(args, parser) -> int:
    from .density import DensityQuery, density_p
    from .geodesic import ScaledQuery, scaling_map

    policy = _policy_from_args(args)
    try:
        if args.scaled:
            if args.L is None:
                _fail_usage("--scaled requires -L")
            sq = ScaledQuery(args.L, args.ell, args.x, args.s)
            L1, L2, X = scaling_map(sq)
            query = DensityQuery(L1, L2, X, args.s)
        else:
            if args.ell1 is None or args.ell2 is None:
                _fail_usage("raw mode requires --ell1 and --ell2")
            query = DensityQuery(args.ell1, args.ell2, args.x, args.s)
        value, diag = density_p(query, policy)
    except DomainError as exc:
        _fail_usage(f"precondition violated: {exc}")

    record = {
        "ell1": query.ell1, "ell2": query.ell2, "x": query.x, "s": query.s,
        "log_mag": value.log_mag, "sign": value.sign,
        "imag_ratio": value.imag_ratio(),
        "value": value.value().real if abs(value.log_mag) < 700 else None,
        "truncation_log_mag": diag["truncation_log_mag"],
        "terms": diag["terms"],
    }
    out = open(args.output, "w") if args.output else sys.stdout
    try:
        if args.format == "json":
            out.write(json.dumps(record) + "\n")
        else:
            w = csv.writer(out, lineterminator="\n")
            w.writerow(["ell1", "ell2", "x", "s", "log_mag", "sign"])
            w.writerow([query.ell1, query.ell2, query.x, query.s,
                        repr(value.log_mag), value.sign])
    finally:
        if args.output:
            out.close()
    return 0


def cmd_conditional(args, parser) -> int:
    from .geodesic import ScaledQuery, conditional_rescaled_density

    policy = _policy_from_args(args)
    try:
        sq = ScaledQuery(args.L, args.ell, args.x, args.s)
        c = conditional_rescaled_density(sq, policy)
    except DomainError as exc:
        _fail_usage(f"precondition violated: {exc}")
    rows = [[args.L, args.s, args.ell, args.x,
             repr(c.value), repr(c.gaussian), repr(c.ratio)]]
    _emit(rows, ["L", "s", "ell", "x", "value", "gaussian", "ratio"], args)
    return 0


def cmd_tw(args, parser) -> int:
    from .tracywidom import tw_table

    try:
        if args.grid:
            lo, hi, n = (float(v) for v in args.grid.split(":"))
            n = int(n)
            if n < 2:
                _fail_usage("--grid needs at least two points")
            Ls = [lo + (hi - lo) * i / (n - 1) for i in range(n)]
        else:
            Ls = [float(v) for v in args.L_values]
        if not Ls:
            _fail_usage("no L values given (use --grid lo:hi:n or positional values)")
        rows = [(repr(L), repr(F), repr(f), m)
                for (L, F, f, m) in tw_table(Ls, method=args.method)]
    except DomainError as exc:
        _fail_usage(f"precondition violated: {exc}")
    _emit(rows, ["L", "F", "f", "method"], args)
    return 0


def cmd_converge(args, parser) -> int:
    from .asymptotics import convergence_study, study_to_csv

    policy = _policy_from_args(args)
    try:
        L_list = [float(v) for v in args.L_list.split(",")]
        grid = []
        for pt in args.grid.split(";"):
            e, x = pt.split(",")
            grid.append((float(e), float(x)))
    except ValueError:
        _fail_usage("bad --L-list or --grid syntax")
    result = convergence_study(L_list, args.s, grid, policy, threads=args.threads)
    text = study_to_csv(result, args.output)
    if not args.output:
        sys.stdout.write(text)
    return 0


def cmd_verify(args, parser) -> int:
    from .oracle import verify_suite

    reports = verify_suite(budget=args.budget, seed=args.seed,
                           threads=args.threads)
    out = open(args.output, "w") if args.output else sys.stdout
    try:
        for r in reports:
            out.write(json.dumps(r.to_json_dict()) + "\n")
    finally:
        if args.output:
            out.close()
    return 0 if all(r.passed is not False for r in reports) else 1


def cmd_contours(args, parser) -> int:
    from .contour import build_saddle_contours, export_grids_csv
    from .density import DensityQuery, build_grids

    policy = _policy_from_args(args)
    try:
        query = DensityQuery(args.ell1, args.ell2, args.x, args.s)
        fam = build_saddle_contours(query)
        grids = build_grids(query, fam, policy.scheme)
    except DomainError as exc:
        _fail_usage(f"precondition violated: {exc}")
    export_grids_csv(grids, args.output or "/dev/stdout")
    return 0


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="dlgeo",
        description="Geodesic joint-density evaluation and the Gaussian-"
                    "rigidity convergence harness.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, threads=True):
        sp.add_argument("--config", help="key = value config file; flags win")
        sp.add_argument("--format", choices=("csv", "json"), default="csv",
                        help="output format (csv is RFC-4180-style; json is "
                             "one object per line)")
        sp.add_argument("--output", "-o", help="output path (default stdout)")
        if threads:
            sp.add_argument("--threads", type=int, default=_default_threads(),
                            help=f"worker threads (env {_ENV_THREADS}); results "
                                 "are bit-identical for any value")

    def policy_opts(sp):
        sp.add_argument("--k-max", type=int, default=2, dest="k_max",
                        help="series cutoff k1+k2 <= k_max (2 or 3)")
        sp.add_argument("--z-radius", type=float, default=0.5, dest="z_radius")
        sp.add_argument("--z-nodes", type=int, default=128, dest="z_nodes")

    d = sub.add_parser("density", help="evaluate the raw or rescaled density")
    d.add_argument("--scaled", action="store_true",
                   help="interpret the point as (L, ell, x, s)")
    d.add_argument("-L", type=float, default=None)
    d.add_argument("--ell", type=float, default=0.0)
    d.add_argument("--ell1", type=float, default=None)
    d.add_argument("--ell2", type=float, default=None)
    d.add_argument("--x", type=float, default=0.0)
    d.add_argument("-s", "--s", type=float, default=0.5)
    policy_opts(d)
    common(d)
    d.set_defaults(func=cmd_density)

    c = sub.add_parser("conditional", help="conditional rescaled density and "
                                           "its Gaussian reference")
    c.add_argument("-L", type=float, required=True)
    c.add_argument("--ell", type=float, default=0.0)
    c.add_argument("--x", type=float, default=0.0)
    c.add_argument("-s", "--s", type=float, default=0.5)
    policy_opts(c)
    common(c)
    c.set_defaults(func=cmd_conditional)

    t = sub.add_parser("tw", help="Tracy-Widom distribution/density table")
    t.add_argument("L_values", nargs="*", help="L values")
    t.add_argument("--grid", help="lo:hi:n uniform grid")
    t.add_argument("--method", choices=("painleve", "fredholm"),
                   default="painleve")
    common(t, threads=False)
    t.set_defaults(func=cmd_tw)

    v = sub.add_parser("converge", help="rigidity convergence study")
    v.add_argument("--L-list", default="9,16,25", dest="L_list")
    v.add_argument("-s", "--s", type=float, default=0.5)
    v.add_argument("--grid", default="0,0;1,0;0,1;1,1",
                   help="semicolon-separated ell,x points")
    policy_opts(v)
    common(v)
    v.set_defaults(func=cmd_converge)

    f = sub.add_parser("verify", help="oracle gate (brute force, Monte Carlo, "
                                      "z routes)")
    f.add_argument("--budget", type=float, default=1e8)
    f.add_argument("--seed", type=int, default=None,
                   help="Monte Carlo seed (required: no wall-clock seeding)")
    common(f)
    f.set_defaults(func=cmd_verify)

    g = sub.add_parser("contours", help="export quadrature grids as CSV")
    g.add_argument("--ell1", type=float, default=4.5)
    g.add_argument("--ell2", type=float, default=4.5)
    g.add_argument("--x", type=float, default=0.0)
    g.add_argument("-s", "--s", type=float, default=0.5)
    policy_opts(g)
    common(g)
    g.set_defaults(func=cmd_contours)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    tokens = list(sys.argv[1:] if argv is None else argv)
    args = parser.parse_args(tokens)
    _merge_config(args, tokens)
    if args.command == "verify" and args.seed is None:
        _fail_usage("verify requires an explicit --seed (or seed = ... in the config)")
    try:
        return args.func(args, parser)
    except DomainError as exc:
        _fail_usage(f"precondition violated: {exc}")
    except DlgeoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
