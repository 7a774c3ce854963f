"""Command-line entry point ``magset``.

Exit codes: 0 success, 1 analysis-negative result under ``--strict``,
2 input or usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import semigraphoid
from .graph_core import Admg, GraphError, format_graph, parse_graph, parse_triple, to_dot

EXIT_OK, EXIT_NEGATIVE, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def _read(path: str) -> str:
    p = Path(path)
    if not p.is_file():
        raise InputError(f"no such file: {path}")
    return p.read_text(encoding="utf-8")


def _graph(path: str) -> Admg:
    try:
        return parse_graph(_read(path))
    except GraphError as e:
        raise InputError(f"{path}: {e}") from None


def _mag(path: str) -> Admg:
    from .graph_core import is_ancestral, is_maximal

    g = _graph(path)
    if not is_ancestral(g):
        raise InputError(f"{path}: graph is not ancestral")
    if not is_maximal(g):
        raise InputError(f"{path}: graph is not maximal")
    return g


def _order(g: Admg, text: str | None):
    if text is None:
        return None
    from .graph_core import is_topological

    labels = [t for t in text.replace(",", " ").split() if t]
    try:
        order = [g.labels.index(l) for l in labels]
    except ValueError:
        raise InputError(f"--order names unknown vertices: {text}") from None
    if sorted(order) != list(range(g.n)):
        raise InputError("--order must list every vertex once")
    if not is_topological(g, order):
        raise InputError("--order is not a topological order of the graph")
    return order


def _json(record: dict) -> str:
    return json.dumps(record)


def _fmt_sets(g: Admg, masks) -> str:
    return "\n".join(g.fmt(S) for S in masks)


# ---------------------------------------------------------------------------
# subcommands


def cmd_parse(args, out):
    g = _graph(args.graph)
    from .graph_core import is_ancestral, is_maximal

    if args.format == "dot":
        out.write(to_dot(g))
    else:
        out.write(format_graph(g))
        out.write(_json({"ancestral": is_ancestral(g), "maximal": is_maximal(g)}) + "\n")
    return EXIT_OK


def cmd_imset(args, out):
    from .imset_algebra import characteristic_imset, standard_imset

    g = _mag(args.graph)
    u = characteristic_imset(g) if args.characteristic else standard_imset(g)
    if args.format == "csv":
        out.write("set,value\n")
        for S, v in u.items():
            out.write(f"\"{g.fmt(S)}\",{v}\n")
    else:
        text = u.format(g.labels)
        out.write(text + ("\n" if text else ""))
    return EXIT_OK


def _verdict(g, args):
    from .markov_props import verdict

    if g.n > args.max_n:
        raise InputError(f"graph has {g.n} vertices; raise --max-n to analyse it")
    return verdict(
        g,
        max_n=args.max_n,
        all_triples_check=not args.elementary,
        check_faithful=args.faithful,
        seed=args.seed,
    )


def cmd_check(args, out):
    g = _mag(args.graph)
    v = _verdict(g, args)
    out.write(_json(v.record()) + "\n")
    return EXIT_NEGATIVE if args.strict and not v.perfectly_markovian else EXIT_OK


def cmd_verdict(args, out):
    g = _mag(args.graph)
    v = _verdict(g, args)
    rec = v.record()
    rec["faithful_basis"] = v.faithful_basis
    rec["missing"] = [g.fmt_triple(t) for t in v.missing]
    if args.format == "csv":
        out.write(",".join(rec) + "\n")
        out.write(",".join(str(x) if not isinstance(x, list) else ";".join(x) for x in rec.values()) + "\n")
    else:
        for k, x in rec.items():
            out.write(f"{k}: {json.dumps(x)}\n")
    return EXIT_NEGATIVE if args.strict and not v.perfectly_markovian else EXIT_OK


def cmd_heads(args, out):
    from .heads import enumerate_heads

    g = _mag(args.graph)
    for rec in enumerate_heads(g, _order(g, args.order)):
        out.write(f"{g.fmt(rec.head)} | {g.fmt(rec.tail)}\n")
    return EXIT_OK


def cmd_pset(args, out):
    from .heads import parametrizing_sets

    g = _mag(args.graph)
    text = _fmt_sets(g, parametrizing_sets(g))
    out.write(text + ("\n" if text else ""))
    return EXIT_OK


def cmd_markov(args, out):
    from .markov_props import ordered_local_markov, simple_decomposition
    from .power_dag import markov_list

    g = _mag(args.graph)
    order = _order(g, args.order)
    if args.local:
        lst = ordered_local_markov(g, order)
    elif args.simple:
        try:
            lst = simple_decomposition(g, order)
        except ValueError as e:
            raise InputError(str(e)) from None
    else:
        lst = markov_list(g, "complete" if args.complete else "refined", order)
    text = lst.format(g)
    out.write(text + ("\n" if text else ""))
    return EXIT_OK


def cmd_closure(args, out):
    from .markov_props import graphoid_closure, order_from_graph

    text = _read(args.triples)
    lines = [l.split("#", 1)[0].strip() for l in text.splitlines()]
    lines = [l for l in lines if l]
    header = None
    if lines and lines[0].lower().startswith("vertices:"):
        header = lines.pop(0).split(":", 1)[1].replace(",", " ").split()
    if args.graph:
        g = _graph(args.graph)
    else:
        import re

        labels = header
        if labels is None:
            names = set()
            for l in lines:
                names.update(t for t in re.split(r"[,\s|]+|_\|\|_", l) if t)
            labels = sorted(names, key=lambda s: (0, int(s), "") if s.isdigit() else (1, 0, s))
        g = Admg(len(labels), labels=labels)
    try:
        triples = [parse_triple(g, l) for l in lines]
    except GraphError as e:
        raise InputError(str(e)) from None
    rules = [r.strip() for r in args.rules.split(",") if r.strip()]
    bad = set(rules) - set(semigraphoid.ALL_RULES)
    if bad:
        raise InputError(f"unknown rules {sorted(bad)}; choose from {', '.join(semigraphoid.ALL_RULES)}")
    below = None
    if {semigraphoid.ORDERED_UPWARD, semigraphoid.ORDERED_DOWNWARD} & set(rules):
        if not args.graph:
            raise InputError("ordered rules need --graph for the ancestral order")
        below = order_from_graph(g)
    closed = graphoid_closure(triples, g.n, rules, below)
    for t in sorted(closed, key=lambda t: (bin(t.A | t.B).count("1"), bin(t.C).count("1"), t.A, t.B, t.C)):
        out.write(g.fmt_triple(t) + "\n")
    return EXIT_OK


def cmd_powerdag(args, out):
    from .power_dag import complete_power_dag, refined_power_dag

    g = _mag(args.graph)
    if args.i not in g.labels:
        raise InputError(f"unknown vertex {args.i!r}")
    i = g.labels.index(args.i)
    order = _order(g, args.order)
    comp = (refined_power_dag if args.refined else complete_power_dag)(g, i, order)
    if args.dot or args.format == "dot":
        out.write(comp.to_dot(g))
    else:
        for e in comp.edges:
            ks = "; ".join(g.fmt(K) for K in e.ks)
            out.write(f"{g.fmt(e.source)} -> {g.fmt(e.target)} [{ks}]\n")
    return EXIT_OK


def cmd_decompose(args, out):
    from .power_dag import decompose_standard_imset

    g = _mag(args.graph)
    dec = decompose_standard_imset(g, _order(g, args.order))
    from .imset_algebra import standard_imset

    residual = standard_imset(g) - dec.imset()
    out.write(dec.format(g) + "\n")
    out.write(f"residual: {0 if not residual else residual.format(g.labels)}\n")
    return EXIT_OK if not residual else EXIT_NEGATIVE


def cmd_bidirected(args, out):
    from .bidirected import analyse, check_order, rooted_decomposition, rooted_condition

    g = _graph(args.graph)
    if g.directed:
        raise InputError("graph has directed edges; bidirected analysis needs a purely bidirected graph")
    order = _order(g, args.order)
    rep = analyse(g, order)
    out.write(_json(rep.record(g)) + "\n")
    if args.list and rep.rooted:
        w = rooted_condition(g) if order is None else check_order(g, order)
        out.write(rooted_decomposition(g, w).format(g) + "\n")
    return EXIT_NEGATIVE if args.strict and not rep.rooted else EXIT_OK


def cmd_score(args, out):
    from .scoring import EmpiricalTable, imset_score

    g = _mag(args.graph)
    try:
        table = EmpiricalTable.from_csv(_existing(args.data))
        rep = imset_score(g, table)
    except (ValueError, GraphError) as e:
        raise InputError(str(e)) from None
    for k, x in rep.record().items():
        out.write(f"{k}: {x!r}\n")
    return EXIT_OK


def _existing(path: str) -> str:
    if not Path(path).is_file():
        raise InputError(f"no such file: {path}")
    return path


def cmd_census(args, out):
    from .census import census_report

    if not 1 <= args.n <= 7:
        raise InputError("-n must be between 1 and 7")
    log = (lambda m: print(m, file=sys.stderr)) if args.verbose else None
    rep = census_report(args.n, args.connected, args.jobs, args.resume, log)
    if args.out or args.resume:
        path = rep.write(args.out or args.resume)
        print(f"wrote {path}", file=sys.stderr)
    if args.format == "csv":
        out.write("class_id,graph,combinatorial,structural_k,perfectly_markovian\n")
        for r in rep.records:
            v = r.verdict
            edges = format_graph(r.graph).strip().replace("\n", "; ")
            out.write(f"{r.class_id},\"{edges}\",{v.combinatorial},{v.structural or ''},{v.perfectly_markovian}\n")
    else:
        c = rep.counts()
        c.pop("seconds")
        out.write(json.dumps(c, indent=2) + "\n")
        for r in rep.failures():
            out.write(f"imperfect: {format_graph(r.graph).strip().replace(chr(10), '; ')}\n")
    return EXIT_NEGATIVE if args.strict and rep.failures() else EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "dot", "csv"), default="text")
    common.add_argument("--order", help="topological order override, e.g. '1,2,3'")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized checks")
    common.add_argument("--strict", action="store_true", help="exit 1 on analysis-negative results")
    common.add_argument("-v", "--verbose", action="store_true")

    ap = argparse.ArgumentParser(prog="magset", description="Imsets and Markov properties of maximal ancestral graphs.")
    sub = ap.add_subparsers(dest="command", required=True, metavar="command")

    def add(name, fn, help_, graph=True):
        p = sub.add_parser(name, parents=[common], help=help_, description=help_)
        if graph:
            p.add_argument("graph", help="graph file")
        p.set_defaults(fn=fn)
        return p

    add("parse", cmd_parse, "parse a graph file and report ancestral/maximal")
    p = add("imset", cmd_imset, "print the standard (or characteristic) imset")
    p.add_argument("--characteristic", action="store_true")
    for name, fn, help_ in (
        ("check", cmd_check, "one-line classification record of u_G"),
        ("verdict", cmd_verdict, "combinatorial / structural / Markovian / faithful verdict"),
    ):
        p = add(name, fn, help_)
        p.add_argument("--max-n", type=int, default=8)
        p.add_argument("--elementary", action="store_true", help="compare elementary statements only (exact, faster)")
        p.add_argument("--faithful", choices=("spot", "all", "none"), default="spot")
    add("heads", cmd_heads, "heads and tails, one 'head | tail' per line")
    add("pset", cmd_pset, "parametrizing sets S(G), one per line")
    p = add("markov", cmd_markov, "independence lists (refined by default)")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--local", action="store_true", help="ordered local Markov property")
    g.add_argument("--simple", action="store_true", help="non-overlapping list for simple MAGs")
    g.add_argument("--complete", action="store_true", help="complete power-DAG list")
    p = add("closure", cmd_closure, "closure of a file of triples under inference rules", graph=False)
    p.add_argument("triples", help="file with one 'A _||_ B | C' per line")
    p.add_argument("--rules", default=semigraphoid.SEMIGRAPHOID, help="comma separated: " + ", ".join(semigraphoid.ALL_RULES))
    p.add_argument("--graph", help="graph supplying vertex labels and the order for ordered rules")
    p = add("powerdag", cmd_powerdag, "power DAG component of a vertex")
    p.add_argument("-i", required=True, help="vertex label")
    p.add_argument("--refined", action="store_true")
    p.add_argument("--dot", action="store_true")
    add("decompose", cmd_decompose, "signed decomposition of u_G into semi-elementary imsets")
    p = add("bidirected", cmd_bidirected, "rooted condition and forbidden dual subgraphs")
    p.add_argument("--list", action="store_true", help="also print the rooted decomposition")
    p = add("score", cmd_score, "characteristic-imset score of a CSV data set")
    p.add_argument("data", help="CSV file, header = vertex labels")
    p = add("census", cmd_census, "classify unlabelled MAG equivalence classes", graph=False)
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--connected", action="store_true")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--resume", help="checkpoint directory (also receives the CSV)")
    p.add_argument("--out", help="directory for CSV and representative graphs")
    return ap


def main(argv=None, out=None) -> int:
    out = out if out is not None else sys.stdout
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_INPUT if e.code else EXIT_OK
    try:
        return args.fn(args, out)
    except InputError as e:
        print(f"magset {args.command}: {e}", file=sys.stderr)
        return EXIT_INPUT
    except GraphError as e:
        print(f"magset {args.command}: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
