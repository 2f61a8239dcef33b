"""Command line front end.

Exit codes: 0 when the property holds, 1 when it fails (or a search runs
out of budget), 2 on bad input.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from . import __version__
from .distortion import (
    annulus_hyperbolicity_check,
    annulus_step,
    distortion_table,
    girth_threshold,
    make_phi,
    parse_edge_word,
    refute_quasiconvexity,
)
from .stallings import (
    INFINITE,
    SubgroupGraph,
    basis,
    build_subgroup_graph,
    common_conjugate,
    conjugacy_disjoint,
    index,
    is_malnormal,
    parse_subgroup_text,
)
from .witness import DEFAULT_CAP, HypothesisViolation, SearchExhausted, construct_witness
from .words import Word, WordError, parse_word

log = logging.getLogger("malnorm")

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def _load_items(items: Sequence[str]) -> tuple[list[Word], int]:
    """Words from inline arguments (comma separated) and ``@file`` references."""
    words: list[Word] = []
    rank = 1
    for item in items:
        if item.startswith("@"):
            path = Path(item[1:])
            try:
                text = path.read_text(encoding="utf-8")
            except OSError as exc:
                raise InputError(f"{path}: {exc.strerror}") from None
            try:
                ws, r = parse_subgroup_text(text)
            except WordError as exc:
                raise InputError(f"{path}: {exc}") from None
        else:
            try:
                ws, r = parse_subgroup_text("\n".join(item.split(",")))
            except WordError as exc:
                raise InputError(str(exc)) from None
        words.extend(ws)
        rank = max(rank, r)
    return words, rank


def _lift(words: Sequence[Word], rank: int) -> list[Word]:
    for w in words:
        if any(abs(x) > rank for x in w.letters):
            raise InputError(f"word {w} needs rank > {rank}")
    return [Word(w.letters, rank) for w in words]


def _subgroup(items: Sequence[str], rank: int | None) -> SubgroupGraph:
    words, inferred = _load_items(items)
    r = rank if rank is not None else inferred
    return build_subgroup_graph(_lift(words, r), r)


def _emit(args, payload: dict, text_lines: Sequence[str]) -> None:
    if args.json:
        doc = {"format": 1, "tool_version": __version__, "command": args.command, "seed": args.seed}
        doc.update(payload)
        print(json.dumps(doc, indent=2))
    else:
        for line in text_lines:
            print(line)


def _index_text(idx) -> str:
    return "infinite" if idx == INFINITE else str(idx)


def cmd_analyze(args) -> int:
    graph = _subgroup(args.generators, args.rank)
    idx = index(graph)
    gens = basis(graph)
    payload = {
        "rank": graph.rank,
        "vertices": graph.num_vertices,
        "edges": graph.num_edges,
        "subgroup_rank": len(gens),
        "index": _index_text(idx),
        "basis": [str(w) for w in gens],
        "graph": graph.to_text().splitlines() if graph.rank <= 26 else None,
    }
    lines = [
        f"ambient rank: {graph.rank}",
        f"graph: {graph.num_vertices} vertices, {graph.num_edges} edges",
        f"subgroup rank: {len(gens)}",
        f"index: {_index_text(idx)}",
        "basis: " + (", ".join(str(w) or "1" for w in gens) if gens else "(trivial)"),
    ]
    _emit(args, payload, lines)
    return EXIT_OK


def cmd_malnormal(args) -> int:
    graph = _subgroup(args.generators, args.rank)
    if graph.is_trivial():
        raise InputError("subgroup is trivial")
    report = is_malnormal(graph)
    violations = [[str(z), str(h), str(h2)] for z, h, h2 in report.violations]
    lines = [f"malnormal: {'yes' if report.verdict else 'no'}"]
    for z, h, h2 in violations:
        lines.append(f"violation: z={z} h={h} h'={h2}  (z h z^-1 = h')")
    _emit(args, {"rank": graph.rank, "malnormal": report.verdict, "violations": violations}, lines)
    return EXIT_OK if report.verdict else EXIT_FAIL


def cmd_disjoint(args) -> int:
    (w1, r1), (w2, r2) = _load_items([args.first]), _load_items([args.second])
    r = args.rank if args.rank is not None else max(r1, r2)
    g1 = build_subgroup_graph(_lift(w1, r), r)
    g2 = build_subgroup_graph(_lift(w2, r), r)
    ok = conjugacy_disjoint(g1, g2)
    witness = None if ok else str(common_conjugate(g1, g2))
    lines = [f"conjugacy-disjoint: {'yes' if ok else 'no'}"]
    if witness is not None:
        lines.append(f"common conjugacy class: {witness}")
    _emit(args, {"rank": r, "disjoint": ok, "common_conjugate": witness}, lines)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_witness(args) -> int:
    loaded = [_load_items([s]) for s in args.subgroups]
    r = args.rank
    if r is None:
        r = max([2] + [rk for _, rk in loaded])
    subgroups = [build_subgroup_graph(_lift(ws, r), r) for ws, _ in loaded]
    mode = "certified-search" if args.mode == "certified" else args.mode
    try:
        cert = construct_witness(subgroups, mode=mode, rank=r, cap=args.cap)
    except HypothesisViolation as exc:
        raise InputError(str(exc)) from None
    except SearchExhausted as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    if args.json:
        doc = cert.to_dict()
        doc["command"] = args.command
        doc["seed"] = args.seed
        print(json.dumps(doc, indent=2))
        return EXIT_OK
    d = cert.to_dict()
    lines = [f"y = {cert.y}", f"t = {cert.t}", f"n = {cert.n}"]
    if cert.generators is not None:
        lines.append("generators: " + ", ".join(str(g) for g in cert.generators))
    else:
        lines.append("generators: " + cert.generator_formula)
    if cert.bound_trusted:
        lines.append("checks: not run (bound-trusted)")
    else:
        lines.append(f"malnormal: {'yes' if d['malnormal'] else 'no'}")
        lines.append("conjugacy-disjoint: " + (" ".join("yes" if b else "no" for b in cert.disjointness) or "(no subgroups)"))
    for key, value in cert.paper_bounds.items():
        lines.append(f"{key}: {value}")
    _emit(args, {}, lines)
    return EXIT_OK


def _parse_C(text: str) -> Fraction:
    try:
        c = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"bad constant {text!r}") from None
    if c <= 0:
        raise argparse.ArgumentTypeError("C must be positive")
    return c


def cmd_distort(args) -> int:
    if args.nmax < 0:
        raise InputError("nmax must be non-negative")
    phi = make_phi()
    rows = distortion_table(phi, args.nmax)
    search = distortion_table(phi, max(args.nmax, args.cap))
    constants = args.C or [Fraction(1), Fraction(10), Fraction(100)]
    refuted = [(c, refute_quasiconvexity(search, c)) for c in constants]
    lines = [f"{'n':>3} {'l_F(phi^n(a))':>16} {'2^n':>12} {'2n+1':>6} {'ratio':>12}"]
    for r in rows:
        lines.append(
            f"{r.n:>3} {r.inside_length:>16} {r.paper_lower_bound:>12} "
            f"{r.outside_upper_bound:>6} {float(r.ratio):>12.4g}"
        )
    for c, n in refuted:
        lines.append(f"C={c}: " + (f"refuted at n={n}" if n is not None else f"not refuted for n<={args.cap}"))
    payload = {
        "rows": [r.as_dict() for r in rows],
        "refutations": [{"C": str(c), "n": n} for c, n in refuted],
    }
    _emit(args, payload, lines)
    return EXIT_OK


def cmd_annulus(args) -> int:
    try:
        c0 = parse_edge_word(args.c0)
        a0 = parse_word(args.a0, 2, "ab")
    except WordError as exc:
        raise InputError(str(exc)) from None
    if args.rho < 0:
        raise InputError("rho must be non-negative")
    try:
        ann = annulus_step(c0, a0)
        verdict = annulus_hyperbolicity_check(ann, args.rho)
    except WordError as exc:
        raise InputError(str(exc)) from None
    threshold = girth_threshold(args.rho)
    vacuous = ann.girth0 < threshold
    payload = {
        "c0": ann.c0.text("xy"),
        "a0": ann.a0.text("ab"),
        "c1": ann.c1.text("xy"),
        "girth0": ann.girth0,
        "girth1": ann.girth1,
        "width": ann.width,
        "rho": args.rho,
        "threshold": threshold,
        "vacuous": vacuous,
        "hyperbolic": verdict,
    }
    lines = [
        f"c1 = {ann.c1.text('xy')}",
        f"girth0 = {ann.girth0}, girth1 = {ann.girth1}, width = {ann.width}",
        f"H(rho) = {threshold}",
        "verdict: " + ("hyperbolic" if verdict else "not hyperbolic") + (" (below girth threshold)" if vacuous else ""),
    ]
    _emit(args, payload, lines)
    return EXIT_OK if verdict else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--rank", type=int, default=None, help="ambient free group rank")
    common.add_argument("--json", action="store_true", help="emit JSON")
    common.add_argument("--seed", type=int, default=0, help="seed recorded in the output")
    common.add_argument("--cap", type=int, default=DEFAULT_CAP, help="search cap")

    parser = argparse.ArgumentParser(prog="malnorm", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", parents=[common], help="size, index and basis of a subgroup")
    p.add_argument("generators", nargs="*", help="words, comma lists or @file")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("malnormal", parents=[common], help="certify malnormality")
    p.add_argument("generators", nargs="*", help="words, comma lists or @file")
    p.set_defaults(func=cmd_malnormal)

    p = sub.add_parser("disjoint", parents=[common], help="conjugacy-disjointness of two subgroups")
    p.add_argument("first", help="comma list or @file")
    p.add_argument("second", help="comma list or @file")
    p.set_defaults(func=cmd_disjoint)

    p = sub.add_parser("witness", parents=[common], help="build a certified malnormal rank-2 subgroup")
    p.add_argument("subgroups", nargs="*", help="one comma list or @file per subgroup")
    p.add_argument("--mode", choices=["certified", "certified-search", "paper-bound"], default="certified")
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("distort", parents=[common], help="distortion table and refutations")
    p.add_argument("--nmax", type=int, default=6)
    p.add_argument("-C", type=_parse_C, action="append", help="distortion constant (repeatable)")
    p.set_defaults(func=cmd_distort)

    p = sub.add_parser("annulus", parents=[common], help="length-3 annulus inequality")
    p.add_argument("c0", help="word in x, y")
    p.add_argument("a0", nargs="?", default="", help="width element, word in a, b")
    p.add_argument("--rho", type=int, default=1)
    p.set_defaults(func=cmd_annulus)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    level = os.environ.get("MALNORM_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    if args.cap < 1:
        print("error: --cap must be at least 1", file=sys.stderr)
        return EXIT_INPUT
    if args.rank is not None and args.rank < 1:
        print("error: --rank must be positive", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except (InputError, WordError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
