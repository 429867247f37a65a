"""Command line interface: compute simulations, reduce, generate, benchmark.

Exit codes: 0 success, 2 parse error, 3 semantic input error, 4 bad
parameters.  Relation/structure output goes to stdout (or --output);
metrics go to a separate file so the main output stays pipe-clean.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys

from . import engine as _engine
from . import generate as _generate
from . import oracle as _oracle
from . import tree as _tree
from .lts import (
    Lts,
    LtsError,
    LtsParseError,
    parse_lts,
    parse_relation,
    serialize_lts,
    serialize_relation,
)
from .partition import PartitionRelationPair, coarsest_pair
from .relation import RelationError, StateRelation
from .tree import TimbukParseError, TreeError

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_SEMANTIC = 3
EXIT_PARAMS = 4


class _CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _read(path: str) -> str:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise _CliError(EXIT_SEMANTIC, f"cannot read {path}: {exc}") from exc


def _emit(text: str, output: str | None) -> None:
    if output is None:
        sys.stdout.write(text)
    else:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)


def _load_lts(path: str) -> Lts:
    try:
        return parse_lts(_read(path))
    except LtsParseError as exc:
        raise _CliError(EXIT_PARSE, f"{path}: {exc}") from exc
    except LtsError as exc:
        raise _CliError(EXIT_PARSE, f"{path}: {exc}") from exc


def _load_initial(lts: Lts, args) -> StateRelation:
    if args.init is None:
        return StateRelation.full(lts.state_count)
    text = _read(args.init)
    try:
        rel = parse_relation(text, lts)
    except LtsParseError as exc:
        raise _CliError(EXIT_PARSE, f"{args.init}: {exc}") from exc
    except LtsError as exc:
        raise _CliError(EXIT_SEMANTIC, f"{args.init}: {exc}") from exc
    if args.closure:
        rel = rel.reflexive_transitive_closure()
    violation = rel.preorder_violation()
    if violation is not None:
        raise _CliError(EXIT_SEMANTIC, f"{args.init}: initial relation {violation}")
    return rel


def _write_metrics(path: str | None, entries: dict) -> None:
    if path is None:
        return
    lines = "".join(f"{k}={v}\n" for k, v in entries.items())
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(lines)


def _blocks_text(pair: PartitionRelationPair, names) -> str:
    order = sorted(
        range(pair.block_count), key=lambda i: min(names[v] for v in pair.blocks[i])
    )
    index = {bid: pos for pos, bid in enumerate(order)}
    lines = []
    for bid in order:
        members = ",".join(sorted(names[v] for v in pair.blocks[bid]))
        above = sorted(index[c] for c in range(pair.block_count) if pair.rel[bid, c])
        lines.append("{%s} -> {%s}" % (members, ",".join(str(c) for c in above)))
    return "\n".join(lines) + "\n"


def _run_lts_algorithm(lts: Lts, init: StateRelation, algo: str):
    """Returns (relation, pair, metrics dict)."""
    if algo == "oracle":
        result = _oracle.max_simulation_naive(lts, init)
        pair = coarsest_pair(result.relation)
        return result.relation, pair, {"algorithm": "oracle", "rounds": result.rounds}
    initial = coarsest_pair(init)
    if algo == "olrt":
        pair, metrics = _engine.olrt(lts, initial)
    elif algo == "lrt":
        pair, metrics = _engine.run_engine(
            lts, initial, out_init=False, restrict_to_in=False, restrict_remove=False
        )
    else:
        raise _CliError(EXIT_PARAMS, f"unknown algorithm {algo!r}")
    entries = {"algorithm": algo}
    entries.update(metrics.as_dict())
    entries["final_blocks"] = pair.block_count
    return pair.induced_relation(), pair, entries


def _cmd_sim_lts(args) -> int:
    lts = _load_lts(args.input)
    init = _load_initial(lts, args)
    rel, pair, metrics = _run_lts_algorithm(lts, init, args.algo)
    if args.format == "pairs":
        _emit(serialize_relation(rel, lts), args.output)
    else:
        _emit(_blocks_text(pair, lts.state_names), args.output)
    metrics.update(
        states=lts.state_count,
        symbols=lts.symbol_count,
        transitions=lts.transition_count,
    )
    _write_metrics(args.metrics, metrics)
    return EXIT_OK


def _load_ta(path: str) -> _tree.TreeAutomaton:
    try:
        return _tree.parse_timbuk(_read(path))
    except TimbukParseError as exc:
        raise _CliError(EXIT_PARSE, f"{path}: {exc}") from exc
    except TreeError as exc:
        raise _CliError(EXIT_PARSE, f"{path}: {exc}") from exc


def _ta_relation_text(ta, rel: StateRelation) -> str:
    names = ta.state_names
    lines = sorted(f"{names[q]} {names[r]}" for q, r in rel.pairs())
    return "\n".join(lines) + "\n" if lines else ""


def _downward_for(ta, algo: str) -> StateRelation:
    if algo == "oracle":
        return _oracle.downward_naive(ta)
    return _tree.downward_simulation(ta, algorithm=algo)


def _cmd_ta_down(args) -> int:
    ta = _load_ta(args.input)
    rel = _downward_for(ta, args.algo)
    _emit(_ta_relation_text(ta, rel), args.output)
    return EXIT_OK


def _is_downward_simulation(ta, rel: StateRelation) -> str | None:
    """None if ``rel`` is a downward-simulation preorder, else the reason."""
    violation = rel.preorder_violation()
    if violation is not None:
        return violation
    by_target: dict[int, list] = {}
    for lhs, sym, tgt in ta.rules:
        by_target.setdefault(tgt, []).append((lhs, sym))
    for q in range(ta.state_count):
        for r in range(ta.state_count):
            if not rel.has(q, r):
                continue
            for lhs, sym in by_target.get(q, ()):
                ok = any(
                    sym2 == sym and all(rel.has(a, b) for a, b in zip(lhs, lhs2))
                    for lhs2, sym2 in by_target.get(r, ())
                )
                if not ok:
                    names = ta.state_names
                    return f"pair ({names[q]},{names[r]}) violates the downward condition"
    return None


def _cmd_ta_up(args) -> int:
    ta = _load_ta(args.input)
    if args.init is not None:
        text = _read(args.init)
        d = StateRelation.empty(ta.state_count)
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            tokens = line.split()
            if len(tokens) != 2:
                raise _CliError(
                    EXIT_PARSE, f"{args.init}: line {lineno}: expected 2 tokens"
                )
            try:
                d.add(ta.state_id(tokens[0]), ta.state_id(tokens[1]))
            except TreeError as exc:
                raise _CliError(EXIT_SEMANTIC, f"{args.init}: line {lineno}: {exc}")
        reason = _is_downward_simulation(ta, d)
        if reason is not None:
            raise _CliError(
                EXIT_SEMANTIC, f"{args.init}: not a downward simulation: {reason}"
            )
    else:
        d = _downward_for(ta, args.algo)
    if args.algo == "oracle":
        rel = _oracle.upward_naive(ta, d)
    else:
        rel = _tree.upward_simulation(ta, d, algorithm=args.algo)
    _emit(_ta_relation_text(ta, rel), args.output)
    return EXIT_OK


def _sniff_is_ta(text: str) -> bool:
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            return line.split()[0] == "Ops"
    return False


def _cmd_minimize(args) -> int:
    text = _read(args.input)
    if _sniff_is_ta(text):
        try:
            ta = _tree.parse_timbuk(text)
        except TreeError as exc:
            raise _CliError(EXIT_PARSE, f"{args.input}: {exc}") from exc
        d = _downward_for(ta, args.algo)
        blocks = coarsest_pair(d).blocks
        reduced = _tree.ta_quotient(ta, blocks)
        before, after = ta.state_count, reduced.state_count
        _emit(_tree.serialize_timbuk(reduced), args.output)
    else:
        lts = _load_lts(args.input)
        init = _load_initial(lts, args)
        rel, _, _ = _run_lts_algorithm(lts, init, args.algo)
        pair = coarsest_pair(rel)
        from .lts import quotient

        reduced = quotient(lts, pair)
        before, after = lts.state_count, reduced.state_count
        _emit(serialize_lts(reduced), args.output)
    ratio_line = f"{before} {after}\n"
    # keep the structure output pipe-clean when it goes to stdout
    if args.output is None:
        sys.stderr.write(ratio_line)
    else:
        sys.stdout.write(ratio_line)
    return EXIT_OK


def _cmd_gen(args) -> int:
    try:
        if args.kind == "lts":
            lts = _generate.random_lts(
                args.states,
                args.symbols,
                edge_prob=None if args.edges is not None else args.edge_prob,
                n_edges=args.edges,
                sparsity=args.sparsity,
                seed=args.seed,
            )
            _emit(serialize_lts(lts), args.output)
        else:
            ta = _generate.random_ta(
                args.states,
                args.symbols,
                args.max_rank,
                args.rules,
                final_prob=args.final_prob,
                seed=args.seed,
            )
            _emit(_tree.serialize_timbuk(ta), args.output)
    except ValueError as exc:
        raise _CliError(EXIT_PARAMS, str(exc)) from exc
    return EXIT_OK


def _cmd_bench(args) -> int:
    try:
        symbol_counts = [int(tok) for tok in args.symbols.split(",") if tok]
    except ValueError as exc:
        raise _CliError(EXIT_PARAMS, f"bad symbol list {args.symbols!r}") from exc
    if not symbol_counts or min(symbol_counts) < 1 or args.states < 1 or args.edges < 0:
        raise _CliError(EXIT_PARAMS, "invalid benchmark parameters")
    algos = [tok for tok in args.algos.split(",") if tok]
    for algo in algos:
        if algo not in ("lrt", "olrt"):
            raise _CliError(EXIT_PARAMS, f"unknown benchmark algorithm {algo!r}")

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        [
            "instance",
            "states",
            "symbols",
            "transitions",
            "algorithm",
            "time_ms",
            "counters_allocated",
            "remove_enqueued",
            "iterations",
            "final_block_count",
        ]
    )
    for m in symbol_counts:
        try:
            lts = _generate.random_lts(
                args.states,
                m,
                n_edges=args.edges,
                sparsity=args.sparsity,
                seed=args.seed,
            )
        except ValueError as exc:
            raise _CliError(EXIT_PARAMS, str(exc)) from exc
        instance = f"n{args.states}-m{m}-seed{args.seed}"
        initial = coarsest_pair(StateRelation.full(lts.state_count))
        for algo in algos:
            if algo == "olrt":
                pair, metrics = _engine.olrt(lts, initial)
            else:
                pair, metrics = _engine.run_engine(
                    lts,
                    initial,
                    out_init=False,
                    restrict_to_in=False,
                    restrict_remove=False,
                )
            writer.writerow(
                [
                    instance,
                    lts.state_count,
                    lts.symbol_count,
                    lts.transition_count,
                    algo,
                    f"{metrics.wall_time_ms:.3f}",
                    metrics.counters_allocated,
                    metrics.remove_enqueued,
                    metrics.iterations,
                    pair.block_count,
                ]
            )
    _emit(buf.getvalue(), args.output)
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="simred",
        description="Simulation preorders over LTSs and tree automata, and "
        "simulation-equivalence reduction.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, algos=("olrt", "lrt", "oracle")):
        p.add_argument("input", help="input file")
        p.add_argument("--algo", choices=algos, default="olrt")
        p.add_argument("--output", "-o", default=None, help="write output here instead of stdout")

    p = sub.add_parser("sim-lts", help="maximal simulation preorder of an LTS")
    common(p)
    p.add_argument("--init", default=None, help="initial relation file (default: full)")
    p.add_argument("--closure", action="store_true",
                   help="close the initial relation reflexively and transitively first")
    p.add_argument("--format", choices=("pairs", "blocks"), default="pairs")
    p.add_argument("--metrics", default=None, help="write key=value metrics to this file")

    p = sub.add_parser("ta-down", help="maximal downward simulation of a tree automaton")
    common(p)

    p = sub.add_parser("ta-up", help="maximal upward simulation of a tree automaton")
    common(p)
    p.add_argument("--init", default=None,
                   help="downward simulation pairs file (default: compute it)")

    p = sub.add_parser("minimize", help="quotient by simulation equivalence")
    common(p)
    p.add_argument("--init", default=None, help="initial relation file (LTS input only)")
    p.add_argument("--closure", action="store_true")

    p = sub.add_parser("gen", help="generate a random instance")
    p.add_argument("--kind", choices=("lts", "ta"), default="lts")
    p.add_argument("--states", type=int, default=10)
    p.add_argument("--symbols", type=int, default=2)
    p.add_argument("--edge-prob", type=float, default=0.1)
    p.add_argument("--edges", type=int, default=None,
                   help="sample approximately this many edges instead of using --edge-prob")
    p.add_argument("--sparsity", type=float, default=1.0,
                   help="fraction of the alphabet available to each state")
    p.add_argument("--max-rank", type=int, default=2)
    p.add_argument("--rules", type=int, default=10)
    p.add_argument("--final-prob", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", "-o", default=None)

    p = sub.add_parser("bench", help="compare engine configurations on random LTSs")
    p.add_argument("--states", type=int, default=1000)
    p.add_argument("--edges", type=int, default=4000)
    p.add_argument("--symbols", default="1,4,16,64",
                   help="comma-separated alphabet sizes to sweep")
    p.add_argument("--sparsity", type=float, default=0.25)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--algos", default="lrt,olrt")
    p.add_argument("--output", "-o", default=None)

    return parser


_COMMANDS = {
    "sim-lts": _cmd_sim_lts,
    "ta-down": _cmd_ta_down,
    "ta-up": _cmd_ta_up,
    "minimize": _cmd_minimize,
    "gen": _cmd_gen,
    "bench": _cmd_bench,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except _CliError as exc:
        sys.stderr.write(f"simred: {exc}\n")
        return exc.code
    except (LtsParseError, TimbukParseError) as exc:
        sys.stderr.write(f"simred: {exc}\n")
        return EXIT_PARSE
    except (LtsError, TreeError, RelationError) as exc:
        sys.stderr.write(f"simred: {exc}\n")
        return EXIT_SEMANTIC


if __name__ == "__main__":
    sys.exit(main())
