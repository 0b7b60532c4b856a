"""Command-line runner for scenario files.

Exit codes: 0 when every trusted check passes, 1 when some check fails,
2 on usage errors or unreadable scenario files.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import List, Optional, Sequence

from oddmf import __version__
from oddmf.homalg import cohomology_dims, find_contraction, hom_complex
from oddmf.scenarios import (
    ScenarioError,
    ScenarioReport,
    catalogue,
    load_builtin,
    load_scenario,
    run_scenario,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def parse_window(text: str):
    lo, sep, hi = text.partition("..")
    try:
        if not sep:
            raise ValueError
        lo, hi = int(lo), int(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"window must look like LO..HI, got {text!r}")
    if lo > hi:
        raise argparse.ArgumentTypeError(f"empty window {text!r}")
    return lo, hi


def _glue_window(argv: Sequence[str]) -> List[str]:
    # "--window -6..6" would otherwise read the bound as an option
    out, it = [], iter(argv)
    for a in it:
        if a == "--window":
            nxt = next(it, None)
            out.append(a if nxt is None else f"--window={nxt}")
        else:
            out.append(a)
    return out


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="oddmf", description="Check matrix factorization scenarios with exact arithmetic.")
    p.add_argument("--version", action="version", version=f"oddmf {__version__}")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def run_opts(sp):
        sp.add_argument("--bound", type=int, default=None, help="polynomial exponent bound")
        sp.add_argument("--window", type=parse_window, default=None, help="degree window LO..HI")
        sp.add_argument("--json", metavar="PATH", default=None, help="write the JSON report ('-' for stdout)")

    sp = sub.add_parser("run", help="run a scenario file")
    sp.add_argument("file")
    run_opts(sp)

    sp = sub.add_parser("run-builtin", help="run a shipped scenario")
    sp.add_argument("name")
    run_opts(sp)

    sub.add_parser("catalogue", help="list the shipped scenarios")

    sp = sub.add_parser("ext", help="print the Ext table between two objects of a scenario")
    sp.add_argument("file")
    sp.add_argument("--from", dest="source", required=True)
    sp.add_argument("--to", dest="target", required=True)
    sp.add_argument("--bound", type=int, default=None)
    sp.add_argument("--window", type=parse_window, default=None)

    sp = sub.add_parser("contract", help="search for a contraction of one object")
    sp.add_argument("file")
    sp.add_argument("--object", required=True)
    sp.add_argument("--bound", type=int, default=None)
    return p


def _load(ref: str, builtin: bool = False):
    if builtin:
        if ref not in catalogue():
            raise UsageError(f"unknown built-in scenario {ref!r}; try 'oddmf catalogue'")
        return load_builtin(ref)
    return load_scenario(ref)


def _object(sf, name: str):
    if name not in sf.objects:
        raise UsageError(f"scenario {sf.name!r} has no object {name!r}")
    return sf.objects[name]


def format_report(rep: ScenarioReport) -> str:
    width = max([len(c.name) for c in rep.checks] + [5])
    lines = [
        f"scenario {rep.scenario}  (poly_bound {rep.poly_bound}, window {rep.window[0]}..{rep.window[1]})",
    ]
    for c in rep.checks:
        line = f"  {c.name:<{width}}  {c.status.upper():<9} {c.op}"
        if c.message:
            line += f"  [{c.message}]"
        lines.append(line)
    lines.append("result: " + ("ok" if rep.ok else "FAILED"))
    return "\n".join(lines)


def format_ext(table) -> str:
    lines = ["  n   dim  trusted"]
    for n in sorted(table.dims):
        lines.append(f"{n:>3}  {table.dims[n]:>4}  {'yes' if table.trusted[n] else 'no'}")
    return "\n".join(lines)


def _emit_json(report: dict, path: str):
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _cmd_run(args, builtin: bool) -> int:
    sf = _load(args.name if builtin else args.file, builtin)
    rep = run_scenario(sf, args.bound, args.window)
    if args.json:
        _emit_json(rep.to_json(), args.json)
    if args.json != "-":
        print(format_report(rep))
    return EXIT_OK if rep.ok else EXIT_FAIL


def _cmd_ext(args) -> int:
    sf = _load(args.file)
    E, F = _object(sf, args.source), _object(sf, args.target)
    pb, win = sf.bounds(args.bound, args.window)
    table = cohomology_dims(hom_complex(E, F, win, pb))
    print(f"Ext({args.source}, {args.target})  poly_bound {pb}")
    print(format_ext(table))
    return EXIT_OK


def _cmd_contract(args) -> int:
    sf = _load(args.file)
    E = _object(sf, args.object)
    pb, _ = sf.bounds(args.bound, None)
    cert = find_contraction(E, pb)
    if cert:
        print(f"{args.object} is contractible; h =")
        for row in cert.h.matrix:
            print("  [" + ", ".join(str(x) for x in row) + "]")
        return EXIT_OK
    print(f"no contraction of {args.object} with exponents up to {pb}")
    return EXIT_FAIL


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(_glue_window(argv))
        if args.command is None:
            raise UsageError("missing command")
        if args.command == "catalogue":
            for name in catalogue():
                print(name)
            return EXIT_OK
        if args.command == "run":
            return _cmd_run(args, builtin=False)
        if args.command == "run-builtin":
            return _cmd_run(args, builtin=True)
        if args.command == "ext":
            return _cmd_ext(args)
        return _cmd_contract(args)
    except UsageError as e:
        parser.print_usage(sys.stderr)
        print(f"oddmf: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ScenarioError as e:
        print(f"oddmf: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"oddmf: cannot read scenario: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
