"""Command-line surface: compile classifiers, export threshold forms,
measure widths, build diagrams, sample data, and print the separation
family.  Exit codes: 0 success, 2 bad input, 3 over a capability limit.
Stdout carries human summaries; machine output goes to files.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from typing import List, Optional, Sequence

from .bnc import BncModel, write_samples_csv
from .compiler import CompileParams, compile, verify_compilation
from .errors import CapabilityError, InputError
from .fixedpoint import parse_fraction
from .fixtures import fig1_tan
from .gobdd import approx_input_gobdd
from .graphs import (
    TermHypergraph,
    heuristic_ordering,
    load_graph,
    min_fill_decomposition,
    moral_graph,
    ordering_for,
    pathwidth_exact,
    primal_graph,
    treewidth_exact,
)
from .obdd import build_exact_obdd, export_dot, reduce
from .polynomials import (
    MultilinearPolynomial,
    bnc_to_ptf,
    convert_domain,
    dump_ptf,
    load_ptf,
    ptf_from_json,
)
from .separation import SeparationInstance, mixed_term_audit, qtf_general, qtf_positive

FIG1_FILENAME = "fig1_tan.json"


def format_polynomial(poly: MultilinearPolynomial) -> str:
    """Human-readable rendering, singletons first and the constant last."""
    if not poly.terms:
        return "0"
    supports = sorted(poly.terms, key=lambda s: (0 if s else 1, len(s), sorted(s)))
    pieces: List[str] = []
    for support in supports:
        coeff = poly.terms[support]
        mono = "*".join(f"x{v + 1}" for v in sorted(support))
        mag = abs(coeff)
        if not support:
            body = str(mag)
        elif mag == 1:
            body = mono
        else:
            body = f"{mag}*{mono}"
        pieces.append(("-" if coeff < 0 else "+") + " " + body)
    head = pieces[0]
    text = " ".join(pieces[1:])
    lead = ("-" if head[0] == "-" else "") + head[2:]
    return (lead + " " + text).strip()


def _cmd_compile(args: argparse.Namespace) -> int:
    model = BncModel.load(args.bnc)
    eps = parse_fraction(args.eps)
    obdd = compile(model, CompileParams(eps=eps))
    if args.out:
        obdd.dump(args.out)
    meta = obdd.meta
    print(
        f"compiled: n={obdd.n} size={obdd.size} width={obdd.width} "
        f"eps={meta['eps']} vs={meta['vertex_separation']} "
        f"generator_size={meta['generator_size']}"
    )
    if args.out:
        print(f"wrote {args.out}")
    if args.verify:
        seq = ordering_for(moral_graph(model.n, model.parents))
        gen = approx_input_gobdd(model, seq, eps / 2)
        report = verify_compilation(model, obdd, gen, eps)
        sandwich = report["generator_sandwich"]
        print(
            f"verify: disagreement_mass={report['disagreement_mass']['value']:.6f} "
            f"additive_error={report['additive_error']:.6f} "
            f"sandwich_worst={sandwich['worst_deviation']:.6f} "
            f"pass={report['pass']}"
        )
        if not report["pass"]:
            return 1
    return 0


def _cmd_ptf(args: argparse.Namespace) -> int:
    model = BncModel.load(args.bnc)
    form = bnc_to_ptf(model)
    dump_ptf(form, args.out)
    print(
        f"log-odds threshold form: n={form.poly.n} terms={form.poly.size} "
        f"degree={form.poly.degree} tau={float(form.tau):.3e}"
    )
    print(f"wrote {args.out}")
    return 0


def _cmd_width(args: argparse.Namespace) -> int:
    g = load_graph(args.graph)
    if args.exact:
        tw, dec = treewidth_exact(g)
        pw, _ = pathwidth_exact(g)
        dec.validate(g)
        print(f"treewidth={tw} pathwidth={pw} (exact)")
    else:
        dec = min_fill_decomposition(g)
        seq = heuristic_ordering(g)
        print(f"treewidth<={dec.width} pathwidth<={seq.value} (heuristic)")
    return 0


def _cmd_obdd(args: argparse.Namespace) -> int:
    ptf = load_ptf(args.ptf)
    if ptf.encoding != "01":
        ptf = convert_domain(ptf, "01")
    if args.ordering == "auto":
        order = ordering_for(primal_graph(TermHypergraph.from_polynomial(ptf.poly))).ordering
    else:
        with open(args.ordering) as fh:
            raw = json.load(fh)
        if not isinstance(raw, list):
            raise InputError("ordering file must hold a JSON list of 1-based variables")
        order = [int(v) - 1 for v in raw]
    diagram = build_exact_obdd(ptf, order)
    if args.reduce:
        diagram = reduce(diagram)
    print(
        f"obdd: n={diagram.n} size={diagram.size} width={diagram.width} "
        f"models={diagram.count_models()}"
    )
    if args.dot:
        with open(args.dot, "w") as fh:
            fh.write(export_dot(diagram))
        print(f"wrote {args.dot}")
    return 0


def _cmd_sample(args: argparse.Namespace) -> int:
    model = BncModel.load(args.bnc)
    if args.count < 0:
        raise InputError(f"count must be nonnegative, got {args.count}")
    samples = model.sample_many(args.count, args.seed)
    write_samples_csv(args.out, model.n, samples)
    print(f"wrote {args.count} samples to {args.out}")
    return 0


def _cmd_separation(args: argparse.Namespace) -> int:
    inst = SeparationInstance(args.k)
    general = qtf_general(inst)
    print(f"n={inst.n} general form: {format_polynomial(general.poly)}")
    if inst.k <= 5:
        count = sum(
            general.sign(tuple((m >> i) & 1 for i in range(inst.n)))
            for m in range(1 << inst.n)
        )
        print(f"models: {count} of {1 << inst.n}")
    if inst.k >= 2:
        positive, threshold = qtf_positive(inst)
        print(
            f"positive form: {positive.poly.size} terms, threshold {threshold}: "
            f"{format_polynomial(positive.poly)} >= {threshold}"
        )
    if args.audit:
        with open(args.audit) as fh:
            data = json.load(fh)
        if "threshold" not in data:
            raise InputError("audit file needs a \"threshold\" field")
        candidate = ptf_from_json(data)
        report = mixed_term_audit(candidate, parse_fraction(data["threshold"]), inst)
        if report["kind"] == "certificate":
            print(
                f"audit: certificate, {report['pairs_with_mixed_term']} of "
                f"{report['block_pairs']} block pairs carry a mixed term, "
                f"represents={report['represents']}"
            )
        else:
            print(
                f"audit: witness for blocks {report['blocks']}, "
                f"identity_holds={report['identity_holds']}, "
                f"violated points {report['violations']}, "
                f"represents={report['represents']}"
            )
            for a, v in zip(report["assignments"], report["values"]):
                print(f"  p({''.join(str(b) for b in a)}) = {v}")
    return 0


def _cmd_fixture_fig1(args: argparse.Namespace) -> int:
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, FIG1_FILENAME)
    fig1_tan().dump(path)
    print(f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ptfc",
        description="Compile Bayesian network classifiers into decision diagrams.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    c = sub.add_parser("compile", help="compile a classifier into an approximate OBDD")
    c.add_argument("--bnc", required=True, help="classifier JSON")
    c.add_argument("--eps", default="0.1", help="total error budget in (0,1)")
    c.add_argument("--out", help="where to write the OBDD JSON")
    c.add_argument("--verify", action="store_true",
                   help="exhaustively check the result (n <= 14)")
    c.set_defaults(func=_cmd_compile)

    p = sub.add_parser("ptf", help="export the log-odds threshold polynomial")
    p.add_argument("--bnc", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_ptf)

    w = sub.add_parser("width", help="tree-width and path-width of a graph")
    w.add_argument("--graph", required=True)
    w.add_argument("--exact", action="store_true")
    w.set_defaults(func=_cmd_width)

    o = sub.add_parser("obdd", help="build the exact diagram of a threshold form")
    o.add_argument("--ptf", required=True)
    o.add_argument("--ordering", default="auto",
                   help="'auto' or a JSON file with a 1-based variable list")
    o.add_argument("--reduce", action="store_true")
    o.add_argument("--dot", help="write a DOT rendering here")
    o.set_defaults(func=_cmd_obdd)

    s = sub.add_parser("sample", help="draw labeled samples from a classifier")
    s.add_argument("--bnc", required=True)
    s.add_argument("--count", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=_cmd_sample)

    e = sub.add_parser("separation", help="print the monotone separation family")
    e.add_argument("--k", type=int, required=True)
    e.add_argument("--audit", help="positive candidate JSON with a threshold field")
    e.set_defaults(func=_cmd_separation)

    f = sub.add_parser("fixture-fig1", help="emit the worked classifier example")
    f.add_argument("--out", default=".")
    f.set_defaults(func=_cmd_fixture_fig1)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except CapabilityError as exc:
        print(f"capability error: {exc}", file=sys.stderr)
        return 3
    except (OSError, ValueError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
