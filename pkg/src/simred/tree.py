"""Bottom-up tree automata, Timbuk-style text I/O, and the reductions of
downward/upward simulation to LTS simulation problems.

The downward reduction adds one LTS state per automaton state and per
distinct rule left-hand side; the upward reduction adds one per automaton
state and per distinct environment (a rule with one left-hand-side position
replaced by a hole).  Position labels form their own id range after the
ranked alphabet, so they can never collide with user symbols.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lts import IDENTIFIER_RE, Lts
from .partition import PartitionRelationPair, coarsest_pair
from .relation import StateRelation

__all__ = [
    "TreeError",
    "TimbukParseError",
    "TreeAutomaton",
    "Environment",
    "TranslationResult",
    "parse_timbuk",
    "serialize_timbuk",
    "lhs_and_envs",
    "downward_translation",
    "upward_translation",
    "downward_simulation",
    "upward_simulation",
    "ta_quotient",
]

HOLE = "□"  # printed in environment descriptions


class TreeError(ValueError):
    pass


class TimbukParseError(TreeError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True, order=True)
class Environment:
    """A rule with one left-hand-side position replaced by a hole.

    ``others`` lists the remaining left-hand-side states in order (the hole
    position omitted).  Environments are values: identical tuples arising
    from different rules coincide.
    """

    symbol: int
    hole: int
    others: tuple
    target: int

    @property
    def arity(self) -> int:
        return len(self.others) + 1

    def describe(self, ta: "TreeAutomaton") -> str:
        slots = [ta.state_names[q] for q in self.others]
        slots.insert(self.hole, HOLE)
        return f"{ta.symbol_names[self.symbol]}({','.join(slots)})->{ta.state_names[self.target]}"


class TreeAutomaton:
    """Bottom-up tree automaton over a ranked alphabet.

    Rules are (lhs state tuple, symbol id, target id) with the lhs length
    equal to the symbol's rank.
    """

    __slots__ = ("state_names", "symbol_names", "ranks", "rules", "finals",
                 "_state_ids", "_symbol_ids")

    def __init__(self, state_names, symbol_names, ranks, rules, finals):
        self.state_names = tuple(state_names)
        self.symbol_names = tuple(symbol_names)
        self.ranks = tuple(int(r) for r in ranks)
        if len(self.ranks) != len(self.symbol_names):
            raise TreeError("one rank per symbol required")
        self._state_ids = {s: i for i, s in enumerate(self.state_names)}
        self._symbol_ids = {s: i for i, s in enumerate(self.symbol_names)}
        if len(self._state_ids) != len(self.state_names):
            raise TreeError("duplicate state names")
        if len(self._symbol_ids) != len(self.symbol_names):
            raise TreeError("duplicate symbol names")
        nq = len(self.state_names)
        norm = set()
        for lhs, sym, tgt in rules:
            lhs = tuple(int(q) for q in lhs)
            sym, tgt = int(sym), int(tgt)
            if not 0 <= sym < len(self.symbol_names):
                raise TreeError(f"symbol id {sym} out of range")
            if len(lhs) != self.ranks[sym]:
                raise TreeError(
                    f"rule lhs length {len(lhs)} does not match rank "
                    f"{self.ranks[sym]} of {self.symbol_names[sym]!r}"
                )
            for q in lhs + (tgt,):
                if not 0 <= q < nq:
                    raise TreeError(f"state id {q} out of range")
            norm.add((lhs, sym, tgt))
        self.rules = tuple(sorted(norm))
        self.finals = frozenset(int(q) for q in finals)
        if not self.finals <= set(range(nq)):
            raise TreeError("final state id out of range")

    @property
    def state_count(self) -> int:
        return len(self.state_names)

    @property
    def symbol_count(self) -> int:
        return len(self.symbol_names)

    @property
    def max_rank(self) -> int:
        """Largest arity occurring in the rules (0 for a rule-less automaton)."""
        return max((len(lhs) for lhs, _, _ in self.rules), default=0)

    def state_id(self, name: str) -> int:
        try:
            return self._state_ids[name]
        except KeyError:
            raise TreeError(f"unknown state {name!r}") from None

    def __eq__(self, other) -> bool:
        if not isinstance(other, TreeAutomaton):
            return NotImplemented

        def named(ta):
            return (
                frozenset(ta.state_names),
                frozenset(zip(ta.symbol_names, ta.ranks)),
                frozenset(
                    (
                        tuple(ta.state_names[q] for q in lhs),
                        ta.symbol_names[sym],
                        ta.state_names[tgt],
                    )
                    for lhs, sym, tgt in ta.rules
                ),
                frozenset(ta.state_names[q] for q in ta.finals),
            )

        return named(self) == named(other)

    def __hash__(self):
        raise TypeError("TreeAutomaton is not hashable")

    def __repr__(self) -> str:
        return (
            f"TreeAutomaton(states={self.state_count}, symbols={self.symbol_count}, "
            f"rules={len(self.rules)})"
        )


# -- Timbuk text format ------------------------------------------------------


def _tokenize(text: str):
    """Yield (token, line) pairs; ``#`` starts a comment, punctuation splits."""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        for ch in "(),":
            line = line.replace(ch, f" {ch} ")
        line = line.replace("->", " -> ")
        for tok in line.split():
            yield tok, lineno


def parse_timbuk(text: str) -> TreeAutomaton:
    """Parse the Timbuk-style format (Ops / Automaton / States / Final States /
    Transitions)."""
    tokens = list(_tokenize(text))
    pos = 0

    def peek():
        return tokens[pos][0] if pos < len(tokens) else None

    def take():
        nonlocal pos
        if pos >= len(tokens):
            raise TimbukParseError(tokens[-1][1] if tokens else 1, "unexpected end of input")
        tok = tokens[pos]
        pos += 1
        return tok

    def expect(word):
        tok, line = take()
        if tok != word:
            raise TimbukParseError(line, f"expected {word!r}, got {tok!r}")
        return line

    expect("Ops")
    ranks: dict[str, int] = {}
    symbol_names: list[str] = []
    while peek() is not None and peek() != "Automaton":
        tok, line = take()
        if ":" not in tok:
            raise TimbukParseError(line, f"expected name:rank, got {tok!r}")
        name, _, rank = tok.partition(":")
        if not IDENTIFIER_RE.match(name) or not rank.isdigit():
            raise TimbukParseError(line, f"malformed operator declaration {tok!r}")
        if name in ranks:
            raise TimbukParseError(line, f"duplicate operator {name!r}")
        ranks[name] = int(rank)
        symbol_names.append(name)
    if peek() is None:
        raise TimbukParseError(tokens[-1][1] if tokens else 1, "missing Automaton section")
    expect("Automaton")
    _, _ = take()  # automaton name, unused beyond syntax

    expect("States")
    state_names: list[str] = []
    while peek() is not None and peek() != "Final":
        tok, line = take()
        if not IDENTIFIER_RE.match(tok):
            raise TimbukParseError(line, f"invalid state name {tok!r}")
        if tok in state_names:
            raise TimbukParseError(line, f"duplicate state {tok!r}")
        state_names.append(tok)
    if peek() is None:
        raise TimbukParseError(tokens[-1][1], "missing Final States section")
    expect("Final")
    expect("States")
    state_ids = {s: i for i, s in enumerate(state_names)}
    finals: list[int] = []
    while peek() is not None and peek() != "Transitions":
        tok, line = take()
        if tok not in state_ids:
            raise TimbukParseError(line, f"undeclared state {tok!r}")
        finals.append(state_ids[tok])
    if peek() is None:
        raise TimbukParseError(tokens[-1][1], "missing Transitions section")
    expect("Transitions")

    symbol_ids = {s: i for i, s in enumerate(symbol_names)}
    rules = []
    while pos < len(tokens):
        tok, line = take()
        if tok not in symbol_ids:
            raise TimbukParseError(line, f"undeclared symbol {tok!r}")
        sym = symbol_ids[tok]
        lhs: list[int] = []
        if peek() == "(":
            take()
            while peek() != ")":
                if peek() is None:
                    raise TimbukParseError(line, "unterminated argument list")
                arg, argline = take()
                if arg == ",":
                    continue
                if arg not in state_ids:
                    raise TimbukParseError(argline, f"undeclared state {arg!r}")
                lhs.append(state_ids[arg])
            take()  # ')'
        expect("->")
        tgt_tok, tgt_line = take()
        if tgt_tok not in state_ids:
            raise TimbukParseError(tgt_line, f"undeclared state {tgt_tok!r}")
        if len(lhs) != ranks[symbol_names[sym]]:
            raise TimbukParseError(
                line,
                f"arity mismatch: {symbol_names[sym]!r} has rank "
                f"{ranks[symbol_names[sym]]}, rule has {len(lhs)} arguments",
            )
        rules.append((tuple(lhs), sym, state_ids[tgt_tok]))

    return TreeAutomaton(
        state_names, symbol_names, [ranks[s] for s in symbol_names], rules, finals
    )


def serialize_timbuk(ta: TreeAutomaton, name: str = "A") -> str:
    """Canonical text form: operators, states and rules each sorted by name."""
    ops = sorted(zip(ta.symbol_names, ta.ranks))
    states = sorted(ta.state_names)
    finals = sorted(ta.state_names[q] for q in ta.finals)
    rule_lines = sorted(
        "{}({}) -> {}".format(
            ta.symbol_names[sym],
            ",".join(ta.state_names[q] for q in lhs),
            ta.state_names[tgt],
        )
        for lhs, sym, tgt in ta.rules
    )
    lines = [
        "Ops " + " ".join(f"{s}:{r}" for s, r in ops),
        f"Automaton {name}",
        "States " + " ".join(states),
        "Final States " + " ".join(finals),
        "Transitions",
    ]
    lines.extend(rule_lines)
    return "\n".join(lines) + "\n"


# -- left-hand sides and environments ----------------------------------------


def lhs_and_envs(ta: TreeAutomaton):
    """Deduplicated left-hand sides and environments of all rules.

    Nullary rules contribute the empty left-hand side and no environments.
    Both results are sorted for deterministic downstream ids.
    """
    lhs_set = set()
    env_set = set()
    for lhs, sym, tgt in ta.rules:
        lhs_set.add(lhs)
        for i in range(len(lhs)):
            env_set.add(
                Environment(symbol=sym, hole=i, others=lhs[:i] + lhs[i + 1 :], target=tgt)
            )
    return tuple(sorted(lhs_set, key=lambda l: (len(l), l))), tuple(sorted(env_set))


@dataclass
class TranslationResult:
    """An LTS encoding of a tree-automaton simulation problem.

    ``initial`` is the coarsest pair of the raw initial preorder intersected
    with the output preorder (built by the specialized constant-time rules);
    ``init_relation`` is that raw initial preorder itself.  ``back_map``
    tags every LTS state with its source: ("state", q), ("lhs", tuple) or
    ("env", Environment).
    """

    lts: Lts
    initial: PartitionRelationPair
    init_relation: StateRelation
    back_map: tuple


def _pair_from_keys(keys: list, le) -> PartitionRelationPair:
    """Group ids by key and relate blocks with the key order ``le``."""
    groups: dict = {}
    for v, key in enumerate(keys):
        groups.setdefault(key, []).append(v)
    blocks = sorted(groups.values(), key=lambda g: g[0])
    block_keys = [keys[g[0]] for g in blocks]
    k = len(blocks)
    rel = np.zeros((k, k), dtype=bool)
    for i in range(k):
        for j in range(k):
            rel[i, j] = le(block_keys[i], block_keys[j])
    return PartitionRelationPair(blocks, rel)


def downward_translation(ta: TreeAutomaton) -> TranslationResult:
    """LTS encoding of the downward simulation problem.

    Every rule (q1..qn, f, q) yields an f-edge from q to the left-hand-side
    node and a position-i edge from that node to each qi.  The initial
    preorder is the full relation; the initial pair is its output-preorder
    refinement, built without per-symbol scans: left-hand sides compare by
    length, automaton states by their sets of rule symbols, and a left-hand
    side sits above an automaton state only when the state emits nothing.
    """
    lhs_list, _ = lhs_and_envs(ta)
    lhs_ids = {l: i for i, l in enumerate(lhs_list)}
    nq = ta.state_count
    n = nq + len(lhs_list)
    rmax = ta.max_rank

    state_names = list(ta.state_names) + [
        "(" + ",".join(ta.state_names[q] for q in l) + ")" for l in lhs_list
    ]
    symbol_names = list(ta.symbol_names) + [f"#{i}" for i in range(1, rmax + 1)]
    m = ta.symbol_count

    triples = set()
    for lhs, sym, tgt in ta.rules:
        lnode = nq + lhs_ids[lhs]
        triples.add((tgt, sym, lnode))
        for i, qi in enumerate(lhs):
            triples.add((lnode, m + i, qi))
    lts = Lts.from_ids(state_names, symbol_names, sorted(triples))

    # specialized initial pair for full & Out
    rule_syms: list[set] = [set() for _ in range(nq)]
    for lhs, sym, tgt in ta.rules:
        rule_syms[tgt].add(sym)
    keys: list = [("sig", frozenset(rule_syms[q])) for q in range(nq)]
    for l in lhs_list:
        keys.append(("len", len(l)) if l else ("sig", frozenset()))

    def le(k1, k2):
        t1, v1 = k1
        t2, v2 = k2
        if t1 == "sig" and t2 == "sig":
            return v1 <= v2
        if t1 == "sig" and t2 == "len":
            return not v1  # only an emitting-nothing state sits below a lhs node
        if t1 == "len" and t2 == "len":
            return v1 <= v2
        return False  # a nonempty lhs never sits below an automaton state

    initial = _pair_from_keys(keys, le)
    back_map = tuple(
        [("state", q) for q in range(nq)] + [("lhs", l) for l in lhs_list]
    )
    return TranslationResult(lts, initial, StateRelation.full(n), back_map)


def upward_translation(ta: TreeAutomaton, d: StateRelation) -> TranslationResult:
    """LTS encoding of the upward simulation problem induced by ``d``.

    Every rule t = (q1..qn, f, q) yields, for each position i, an i-edge from
    qi to the environment t(i) and an f-edge from t(i) to q.  The initial
    preorder relates automaton states by final-state implication and
    environments with the same symbol and hole position whose remaining
    states are componentwise d-related; environments compare in the output
    preorder by their symbol alone.
    """
    if d.size != ta.state_count:
        raise TreeError("downward relation size does not match state count")
    if not d.matrix.diagonal().all():
        raise TreeError("downward relation must be reflexive")

    _, envs = lhs_and_envs(ta)
    env_ids = {e: i for i, e in enumerate(envs)}
    nq = ta.state_count
    n = nq + len(envs)
    rmax = ta.max_rank

    state_names = list(ta.state_names) + [e.describe(ta) for e in envs]
    symbol_names = list(ta.symbol_names) + [f"#{i}" for i in range(1, rmax + 1)]
    m = ta.symbol_count

    triples = set()
    for lhs, sym, tgt in ta.rules:
        for i, qi in enumerate(lhs):
            env = Environment(symbol=sym, hole=i, others=lhs[:i] + lhs[i + 1 :], target=tgt)
            enode = nq + env_ids[env]
            triples.add((qi, m + i, enode))
            triples.add((enode, sym, tgt))
    lts = Lts.from_ids(state_names, symbol_names, sorted(triples))

    # raw initial preorder
    init = np.zeros((n, n), dtype=bool)
    finals = np.zeros(nq, dtype=bool)
    finals[sorted(ta.finals)] = True
    init[:nq, :nq] = ~finals[:, None] | finals[None, :]
    dm = d.matrix
    for e1, i1 in env_ids.items():
        for e2, i2 in env_ids.items():
            if (
                e1.symbol == e2.symbol
                and e1.hole == e2.hole
                and len(e1.others) == len(e2.others)
                and all(dm[a, b] for a, b in zip(e1.others, e2.others))
            ):
                init[nq + i1, nq + i2] = True

    # specialized initial pair: d-equivalence classes for environment slots,
    # (final?, occupied positions) for automaton states
    mutual = dm & dm.T
    class_of = np.full(nq, -1, dtype=np.int64)
    next_class = 0
    for q in range(nq):
        if class_of[q] < 0:
            members = np.flatnonzero(mutual[q])
            class_of[members] = next_class
            next_class += 1
    class_rep = [int(np.flatnonzero(class_of == c)[0]) for c in range(next_class)]

    positions: list[set] = [set() for _ in range(nq)]
    for lhs, sym, tgt in ta.rules:
        for i, qi in enumerate(lhs):
            positions[qi].add(i)
    keys: list = [
        ("q", q in ta.finals, frozenset(positions[q])) for q in range(nq)
    ]
    for e in envs:
        keys.append(("e", e.symbol, e.hole, tuple(int(class_of[o]) for o in e.others)))

    def le(k1, k2):
        if k1[0] != k2[0]:
            return False  # the raw initial preorder never crosses the two kinds
        if k1[0] == "q":
            _, f1, s1 = k1
            _, f2, s2 = k2
            return (not f1 or f2) and s1 <= s2
        _, sym1, hole1, cls1 = k1
        _, sym2, hole2, cls2 = k2
        return (
            sym1 == sym2
            and hole1 == hole2
            and len(cls1) == len(cls2)
            and all(dm[class_rep[c1], class_rep[c2]] for c1, c2 in zip(cls1, cls2))
        )

    initial = _pair_from_keys(keys, le)
    back_map = tuple(
        [("state", q) for q in range(nq)] + [("env", e) for e in envs]
    )
    return TranslationResult(lts, initial, StateRelation(init), back_map)


# -- end-to-end pipelines -----------------------------------------------------


def _run_translated(tr: TranslationResult, algorithm: str) -> StateRelation:
    from .engine import lrt, olrt

    if algorithm == "olrt":
        pair, _ = olrt(tr.lts, tr.initial)
    elif algorithm == "lrt":
        pair = lrt(tr.lts, coarsest_pair(tr.init_relation))
    else:
        raise TreeError(f"unknown algorithm {algorithm!r}")
    return pair.induced_relation()


def downward_simulation(ta: TreeAutomaton, algorithm: str = "olrt") -> StateRelation:
    """Maximal downward simulation on Q, via the LTS reduction."""
    tr = downward_translation(ta)
    full = _run_translated(tr, algorithm)
    nq = ta.state_count
    return StateRelation(full.matrix[:nq, :nq])


def upward_simulation(ta: TreeAutomaton, d: StateRelation, algorithm: str = "olrt") -> StateRelation:
    """Maximal upward simulation induced by ``d``, via the LTS reduction."""
    tr = upward_translation(ta, d)
    full = _run_translated(tr, algorithm)
    nq = ta.state_count
    return StateRelation(full.matrix[:nq, :nq])


def ta_quotient(ta: TreeAutomaton, partition) -> TreeAutomaton:
    """Collapse each block of states to one; blocks are named after their
    lexicographically least member."""
    blocks = [tuple(sorted(int(q) for q in block)) for block in partition]
    seen: set[int] = set()
    for block in blocks:
        if not block:
            raise TreeError("empty block")
        for q in block:
            if q in seen:
                raise TreeError(f"state {q} in two blocks")
            seen.add(q)
    if seen != set(range(ta.state_count)):
        raise TreeError("partition does not cover the automaton's states")

    block_of = {}
    for i, block in enumerate(blocks):
        for q in block:
            block_of[q] = i
    names = [min(ta.state_names[q] for q in block) for block in blocks]
    rules = set()
    for lhs, sym, tgt in ta.rules:
        rules.add((tuple(block_of[q] for q in lhs), sym, block_of[tgt]))
    finals = {block_of[q] for q in ta.finals}
    return TreeAutomaton(names, ta.symbol_names, ta.ranks, sorted(rules), finals)
