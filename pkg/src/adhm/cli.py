"""Command-line driver: ``adhm {gen,verify,coords,flow,normalize,embed}``.

Exit codes: 0 pass, 1 tolerance failure, 2 degenerate input, 3 usage error.
"""
from __future__ import annotations

import argparse
import json
import sys
from typing import List, Optional

import numpy as np

from . import serialize as ser
from .autgrp import normalize_to_cm, word_to_json
from .darboux import DarbouxPoint, flow, pi_forward, pi_inverse
from .errors import AdhmError
from .hat import HatPair, embed, from_hats, snap_to_s, to_hats
from .rep import AdhmData
from .sampling import sample_on_shell
from .suites import DEFAULT_TOLS, SUITES, SuiteConfig, run_suite

EXIT_OK, EXIT_TOL, EXIT_DEGENERATE, EXIT_USAGE = 0, 1, 2, 3
GEN_RTOL = 1e-12


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _seed(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("k must be at least 1")
    return v


def _tol(text: str):
    name, sep, val = text.partition("=")
    if not sep or name not in DEFAULT_TOLS:
        raise argparse.ArgumentTypeError(
            f"expected NAME=VALUE with NAME in {', '.join(sorted(DEFAULT_TOLS))}")
    v = float(val)
    if not v > 0:
        raise argparse.ArgumentTypeError("tolerances must be positive")
    return name, v


def _coeffs(text: str) -> np.ndarray:
    """Polynomial coefficients (constant first) as a JSON list of numbers or [re, im] pairs."""
    try:
        return ser.vector_from_json(json.loads(text))
    except (ValueError, TypeError) as exc:
        raise argparse.ArgumentTypeError(f"bad coefficient list: {exc}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_seed, default=0)
    common.add_argument("--k", type=_positive_int, default=2)
    common.add_argument("--tau-re", type=float, default=1.0)
    common.add_argument("--tau-im", type=float, default=0.0)
    common.add_argument("--tol", type=_tol, action="append", default=[], metavar="NAME=VAL")
    common.add_argument("--in", dest="infile", default=None, help="input JSON file ('-' for stdin)")
    common.add_argument("--out", default=None, help="output file (default stdout)")
    common.add_argument("--format", choices=("json", "text"), default="json")

    p = _Parser(prog="adhm", description="ADHM data, Darboux coordinates and tame automorphisms.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("gen", parents=[common], help="sample an on-shell ADHM datum")
    v = sub.add_parser("verify", parents=[common], help="run verification suites")
    v.add_argument("--suite", default="all", help=f"one of {', '.join(list(SUITES) + ['all'])}")
    sub.add_parser("coords", parents=[common], help="Darboux coordinates (or their inverse)")
    f = sub.add_parser("flow", parents=[common], help="commuting Hamiltonian flow")
    f.add_argument("--p", type=_coeffs, default=np.zeros(0, dtype=complex), help="JSON coefficients of p")
    f.add_argument("--q", type=_coeffs, default=np.zeros(0, dtype=complex), help="JSON coefficients of q")
    sub.add_parser("normalize", parents=[common], help="move into the Calogero-Moser locus")
    sub.add_parser("embed", parents=[common], help="embed an on-shell datum into k+1")
    return p


# --- input / output --------------------------------------------------------

def _tau(args) -> complex:
    return complex(args.tau_re, args.tau_im)


def _read_input(args):
    if args.infile is None:
        return None
    try:
        text = sys.stdin.read() if args.infile == "-" else open(args.infile).read()
        obj = json.loads(text)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read input: {exc}")
    try:
        if "lambda" in obj:
            return ser.darboux_from_json(obj)
        if "Ahat" in obj:
            return ser.hat_from_json(obj)
        if "A" in obj:
            return ser.adhm_from_json(obj)
    except (KeyError, ValueError, TypeError) as exc:
        raise UsageError(f"malformed input: {exc}")
    raise UsageError("input is not an ADHM datum, hat pair or Darboux point")


def _adhm_input(args) -> AdhmData:
    obj = _read_input(args)
    if obj is None:
        return sample_on_shell(args.k, _tau(args), seed=args.seed, scramble=True)
    if isinstance(obj, HatPair):
        return from_hats(snap_to_s(obj))
    if isinstance(obj, DarbouxPoint):
        raise UsageError("expected an ADHM datum or hat pair")
    return obj


def _fmt_complex(z) -> str:
    z = complex(z)
    return f"{z.real!r}{'+' if z.imag >= 0 or np.isnan(z.imag) else '-'}{abs(z.imag)!r}i"


def to_text(obj, indent: str = "") -> str:
    """Readable rendering of the JSON structures emitted by the commands."""
    lines = []
    if isinstance(obj, dict):
        for key in sorted(obj):
            val = obj[key]
            if _is_complex_pair(val):
                lines.append(f"{indent}{key}: {_fmt_complex(complex(*val))}")
            elif isinstance(val, (dict, list)) and not _is_vector(val) and not _is_matrix(val):
                lines.append(f"{indent}{key}:")
                lines.append(to_text(val, indent + "  "))
            elif _is_matrix(val):
                lines.append(f"{indent}{key}:" + _inline(val, indent))
            else:
                lines.append(f"{indent}{key}: " + _inline(val, indent))
    elif isinstance(obj, list):
        if _is_matrix(obj) or _is_vector(obj):
            lines.append(indent + _inline(obj, indent))
        else:
            for item in obj:
                lines.append(f"{indent}-")
                lines.append(to_text(item, indent + "  "))
    else:
        lines.append(f"{indent}{obj}")
    return "\n".join(lines)


def _is_complex_pair(v) -> bool:
    return isinstance(v, list) and len(v) == 2 and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in v)


def _is_vector(v) -> bool:
    return isinstance(v, list) and bool(v) and all(_is_complex_pair(x) for x in v)


def _is_matrix(v) -> bool:
    return isinstance(v, list) and bool(v) and all(_is_vector(r) for r in v)


def _inline(val, indent: str) -> str:
    if _is_matrix(val):
        rows = ["[" + ", ".join(_fmt_complex(complex(*z)) for z in r) + "]" for r in val]
        return "\n" + "\n".join(indent + "  " + r for r in rows)
    if _is_vector(val):
        return "[" + ", ".join(_fmt_complex(complex(*z)) for z in val) + "]"
    if isinstance(val, list):
        return json.dumps(val)
    return str(val)


def _emit(args, obj):
    text = ser.dumps(obj) if args.format == "json" else to_text(obj) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# --- commands ----------------------------------------------------------------

def cmd_gen(args) -> int:
    d = sample_on_shell(args.k, _tau(args), seed=args.seed, scramble=True)
    if d.relative_residual() > GEN_RTOL:
        d = sample_on_shell(args.k, _tau(args), seed=args.seed, scramble=False)
    _emit(args, ser.adhm_to_json(d))
    return EXIT_OK


def report_json(results, cfg: SuiteConfig) -> dict:
    suites = {name: [c.to_json() for c in checks] for name, checks in results.items()}
    ok = all(c.passed for checks in results.values() for c in checks)
    return {"config": {"seed": cfg.seed, "k": cfg.k, "tau": ser.complex_to_json(cfg.tau),
                       "tols": dict(sorted(cfg.tols.items())), "input": cfg.data is not None},
            "suites": suites, "pass": ok}


def report_text(rep: dict) -> str:
    out = []
    for name, checks in rep["suites"].items():
        out.append(f"[{name}]")
        for c in checks:
            mark = "PASS" if c["pass"] else "FAIL"
            out.append(f"  {mark}  {c['name']}: {c['value']:.3e} (tol {c['tol']:.1e})")
            for row in c.get("detail") or []:
                out.append("        " + " ".join(row))
    out.append("overall: " + ("PASS" if rep["pass"] else "FAIL"))
    return "\n".join(out)


def cmd_verify(args) -> int:
    if args.suite != "all" and args.suite not in SUITES:
        raise UsageError(f"unknown suite {args.suite!r}")
    data = _read_input(args)
    if isinstance(data, HatPair):
        data = from_hats(snap_to_s(data))
    if data is not None and not isinstance(data, AdhmData):
        raise UsageError("verify takes an ADHM datum or hat pair")
    k = data.k if data is not None else args.k
    tau = data.tau if data is not None else _tau(args)
    cfg = SuiteConfig(seed=args.seed, k=k, tau=tau, tols=dict(args.tol), data=data)
    rep = report_json(run_suite(args.suite, cfg), cfg)
    if args.format == "json":
        text = ser.dumps(rep)
    else:
        text = report_text(rep) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if rep["pass"] else EXIT_TOL


def cmd_coords(args) -> int:
    obj = _read_input(args)
    if isinstance(obj, DarbouxPoint):
        h = pi_inverse(obj)
        out = {"hat": ser.hat_to_json(h)}
        if abs(h.Bhat[-1, -1]) <= 1e-9 * h.scale():
            out["adhm"] = ser.adhm_to_json(from_hats(snap_to_s(h)))
        _emit(args, out)
        return EXIT_OK
    if obj is None:
        obj = sample_on_shell(args.k, _tau(args), seed=args.seed, scramble=True)
    h = obj if isinstance(obj, HatPair) else to_hats(obj)
    _emit(args, ser.darboux_to_json(pi_forward(h)))
    return EXIT_OK


def cmd_flow(args) -> int:
    obj = _read_input(args)
    if obj is None:
        obj = sample_on_shell(args.k, _tau(args), seed=args.seed, scramble=True)
    if isinstance(obj, DarbouxPoint):
        raise UsageError("flow takes an ADHM datum or hat pair")
    h = obj if isinstance(obj, HatPair) else to_hats(obj)
    moved = flow(h, args.p, args.q)
    if isinstance(obj, HatPair):
        _emit(args, ser.hat_to_json(moved))
    else:
        _emit(args, ser.adhm_to_json(from_hats(moved)))
    return EXIT_OK


def cmd_normalize(args) -> int:
    d = _adhm_input(args)
    res = normalize_to_cm(d, seed=args.seed, tol=dict(args.tol).get("cm", DEFAULT_TOLS["cm"]))
    _emit(args, {"word": word_to_json(res.word), "point": ser.adhm_to_json(res.point),
                 "gauge": ser.matrix_to_json(res.gauge)})
    return EXIT_OK


def cmd_embed(args) -> int:
    d = _adhm_input(args)
    _emit(args, ser.adhm_to_json(embed(d, tol=dict(args.tol).get("moment", DEFAULT_TOLS["moment"]))))
    return EXIT_OK


COMMANDS = {"gen": cmd_gen, "verify": cmd_verify, "coords": cmd_coords, "flow": cmd_flow,
            "normalize": cmd_normalize, "embed": cmd_embed}


def main(argv: Optional[List[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"adhm {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except AdhmError as exc:
        print(f"adhm {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE


if __name__ == "__main__":
    sys.exit(main())
