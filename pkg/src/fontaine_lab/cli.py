"""Command-line entry point: ``fontaine-lab <command> [options]``.

Every command prints one JSON document carrying ``"schema": "v1"`` and the
working precision.  Exit status is 0 on success, 1 for malformed or
out-of-domain input and 2 when precision, truncation or level caps run out.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import config as config_mod
from .cohomology import Cocycle, basis_h1_cyclotomic, basis_h1_trivial, cup_table, iota_chi
from .dictionary import LCFunctionZp, Measure, amice, phi_f
from .errors import FontaineLabError, MalformedInput
from .function_spaces import dilation_solve, twisted_invariants
from .padic_core import Character
from .perfectoid_ring import PerfSeries
from .principal_series import (
    ParamPoint,
    catego_check,
    galois_rep,
    jacquet_image,
    parse_line,
    validate_param,
)
from .series_rings import LaurentSeries

SCHEMA = "v1"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise MalformedInput(f"usage: {message}")


def _read_json(path: str) -> dict:
    try:
        if path == "-":
            return json.load(sys.stdin)
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise MalformedInput(f"cannot parse {path}: {exc}") from exc
    except OSError as exc:
        raise MalformedInput(f"cannot read {path}: {exc}") from exc


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise MalformedInput(f"not a rational number: {text!r}") from exc


def _character(arg: str, cfg) -> Character:
    if arg in ("chi",):
        return Character.chi(cfg.p, cfg.n)
    if arg in ("1", "trivial"):
        return Character.trivial(cfg.p, cfg.n)
    d = _read_json(arg)
    d.setdefault("p", cfg.p)
    return Character.from_json(d, cfg.n)


def _level(text: str) -> tuple[int, int]:
    try:
        m, r = (int(s) for s in text.split(","))
    except ValueError as exc:
        raise MalformedInput(f"level must be 'm,r': {exc}") from exc
    if m < 1 or r < 1:
        raise MalformedInput("level entries must be positive")
    return m, r


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_amice(args, cfg) -> dict:
    mu = Measure.from_json(_read_json(args.measure))
    return {"series": amice(mu, cfg.truncation).to_json()}


def cmd_phif(args, cfg) -> dict:
    f = LaurentSeries.from_json(_read_json(args.series), cfg.truncation)
    x = _fraction(args.x)
    return {"x": str(x), "value": str(phi_f(f, x).residue)}


def cmd_phiz(args, cfg) -> dict:
    from .dictionary import phi_z

    z = PerfSeries.from_json(_read_json(args.series), cfg.truncation, cfg.level_cap)
    x = _fraction(args.x)
    return {"x": str(x), "value": str(phi_z(z, x).residue)}


def cmd_dilation(args, cfg) -> dict:
    fu = LCFunctionZp.from_json(_read_json(args.phiu))
    sol = dilation_solve(fu)
    return {"C": str(sol.C), "solution": sol.solution.to_json(), "shells_used": sol.shells_used}


def cmd_invariants(args, cfg) -> dict:
    delta = _character(args.delta, cfg)
    res = twisted_invariants(delta, _level(args.level))
    return {"level": list(res.level), "module_type": res.module_type,
            "free_rank": res.free_rank, "free_basis": [t.to_json() for t in res.free_basis]}


def cmd_h1basis(args, cfg) -> dict:
    tr = cfg.truncation
    if args.delta == "chi":
        pair = basis_h1_cyclotomic(tr).pair
    elif args.delta in ("1", "trivial"):
        pair = basis_h1_trivial(tr)
    else:
        raise MalformedInput("h1basis supports --delta chi or --delta 1")
    return {"delta": args.delta, "basis": [c.to_json() for c in pair]}


def cmd_cuptable(args, cfg) -> dict:
    return {"cuptable": cup_table(cfg.truncation)}


def cmd_iota(args, cfg) -> dict:
    if (args.basis is None) == (args.cocycle is None):
        raise MalformedInput("give exactly one of --basis and --cocycle")
    if args.basis is not None:
        if args.basis not in (1, 2):
            raise MalformedInput("--basis must be 1 or 2")
        c = basis_h1_cyclotomic(cfg.truncation).pair[args.basis - 1]
    else:
        c = Cocycle.from_json(_read_json(args.cocycle), cfg.truncation)
    h = iota_chi(c, args.pipeline)
    return {**h.to_json(), "pipeline": args.pipeline}


def cmd_pls(args, cfg) -> dict:
    line = parse_line(args.line) if args.line else None
    z = validate_param(ParamPoint(_character(args.delta1, cfg), _character(args.delta2, cfg), line))
    out = {"param": z.to_json(), "galois_rep": galois_rep(z).to_json(),
           "jacquet_image": jacquet_image(z).to_json()}
    out["catego_check"] = None if z.pathological else catego_check(z)
    out["pathological"] = z.pathological
    return out


def cmd_selftest(args, cfg) -> dict:
    from .selftest import format_table, run

    rows = run(cfg)
    if args.text:
        print(format_table(rows), file=sys.stderr)
    return {"rows": [r.to_json() for r in rows], "all_pass": all(r.ok for r in rows)}


def _global_options(parser: argparse.ArgumentParser, default) -> None:
    parser.add_argument("--p", type=int, default=default, help="the prime")
    parser.add_argument("--pprec", type=int, default=default, help="p-adic precision n")
    parser.add_argument("--piprec", type=int, default=default, help="pi-adic precision N")
    parser.add_argument("--pole-cap", type=int, default=default)
    parser.add_argument("--level-cap", type=int, default=default)
    parser.add_argument("--seed", type=int, default=default)
    parser.add_argument("--config", default=default, help="JSON config file (else $FONTAINE_LAB_CONFIG)")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="fontaine-lab", description="Finite-precision Fontaine rings and function spaces.")
    _global_options(ap, None)
    # the same options are accepted after the command name
    common = argparse.ArgumentParser(add_help=False)
    _global_options(common, argparse.SUPPRESS)
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def command(name: str) -> argparse.ArgumentParser:
        return sub.add_parser(name, parents=[common])

    s = command("amice")
    s.add_argument("--measure", required=True)
    s.set_defaults(func=cmd_amice)
    s = command("phif")
    s.add_argument("--series", required=True)
    s.add_argument("--x", required=True)
    s.set_defaults(func=cmd_phif)
    s = command("phiz")
    s.add_argument("--series", required=True)
    s.add_argument("--x", required=True)
    s.set_defaults(func=cmd_phiz)
    s = command("dilation")
    s.add_argument("--phiu", required=True)
    s.set_defaults(func=cmd_dilation)
    s = command("invariants")
    s.add_argument("--delta", required=True)
    s.add_argument("--level", required=True)
    s.set_defaults(func=cmd_invariants)
    s = command("h1basis")
    s.add_argument("--delta", default="chi")
    s.set_defaults(func=cmd_h1basis)
    s = command("cuptable")
    s.set_defaults(func=cmd_cuptable)
    s = command("iota")
    s.add_argument("--basis", type=int, default=None)
    s.add_argument("--cocycle", default=None)
    s.add_argument("--pipeline", choices=("decompose", "direct"), default="decompose")
    s.set_defaults(func=cmd_iota)
    s = command("pls")
    s.add_argument("--delta1", required=True)
    s.add_argument("--delta2", required=True)
    s.add_argument("--line", default=None)
    s.set_defaults(func=cmd_pls)
    s = command("selftest")
    s.add_argument("--text", action="store_true", help="also print the table on stderr")
    s.set_defaults(func=cmd_selftest)
    return ap


def _emit(doc: dict, stream) -> None:
    stream.write(json.dumps(doc, sort_keys=True, indent=2) + "\n")


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg = config_mod.load(args.config, p=args.p, n=args.pprec, N=args.piprec,
                              pole_cap=args.pole_cap, level_cap=args.level_cap, seed=args.seed)
        body = args.func(args, cfg)
    except FontaineLabError as exc:
        _emit({"schema": SCHEMA, "error": exc.code, "message": str(exc)}, sys.stderr)
        return exc.exit_status
    doc = {"schema": SCHEMA, "precision": cfg.precision(), **body}
    _emit(doc, sys.stdout)
    if args.command == "selftest" and not body["all_pass"]:
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
