"""Counter-based refinement engines computing maximal simulation preorders.

Both engines refine a partition-relation pair until it induces the maximal
simulation contained in the initial preorder.  The baseline keeps a Remove
set and a counter array for every (block, symbol) pair over all states; the
optimized variant first refines the initial pair by the output preorder,
keeps Remove sets and counters only for symbols entering a block, restricts
them to states that can emit the symbol, and never schedules the rest.

The two restrictions and the output-preorder initialization can be toggled
independently (they are result-preserving one by one), which is what
:func:`run_engine` exposes; :func:`lrt` and :func:`olrt` are the two named
corner configurations.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .lts import Lts
from .partition import (
    PartitionError,
    PartitionRelationPair,
    refine_by_out,
    validate_coarsest,
)

__all__ = [
    "EngineError",
    "AuditError",
    "SimMetrics",
    "EngineState",
    "engine_step",
    "run_engine",
    "lrt",
    "olrt",
]


class EngineError(ValueError):
    pass


class AuditError(RuntimeError):
    """A debug-mode audit found live engine data out of sync with its definition."""


@dataclass
class SimMetrics:
    """Resource and progress counters for one engine run.

    ``counters_allocated`` is the peak number of simultaneously live counter
    cells.  ``remove_enqueued`` counts every insertion into a Remove set,
    including the copies made when a split block hands its pending sets to a
    new child.  ``skipped_iterations`` counts pending Remove sets discarded
    because their symbol stopped entering the owning block (the optimized
    scheduler never runs them).
    """

    counters_allocated: int = 0
    remove_enqueued: int = 0
    iterations: int = 0
    splits: int = 0
    skipped_iterations: int = 0
    wall_time_ms: float = 0.0

    def as_dict(self) -> dict:
        return {
            "counters_allocated": self.counters_allocated,
            "remove_enqueued": self.remove_enqueued,
            "iterations": self.iterations,
            "splits": self.splits,
            "skipped_iterations": self.skipped_iterations,
            "wall_time_ms": self.wall_time_ms,
        }


def _gather_rows(indptr: np.ndarray, data: np.ndarray, rows: np.ndarray) -> np.ndarray:
    """Concatenate CSR rows (with multiplicity), vectorized."""
    if len(rows) == 1:
        r = rows[0]
        return data[indptr[r] : indptr[r + 1]]
    starts = indptr[rows]
    lens = indptr[rows + 1] - starts
    total = int(lens.sum())
    if total == 0:
        return np.empty(0, dtype=data.dtype)
    out_starts = np.zeros(len(rows), dtype=np.int64)
    np.cumsum(lens[:-1], out=out_starts[1:])
    idx = np.repeat(starts - out_starts, lens) + np.arange(total, dtype=np.int64)
    return data[idx]


def _segment_counts(indptr: np.ndarray, values: np.ndarray) -> np.ndarray:
    # np.add.reduceat chokes on empty segments; cumulative sums do not.
    cs = np.zeros(len(values) + 1, dtype=np.int64)
    np.cumsum(values, out=cs[1:])
    return (cs[indptr[1:]] - cs[indptr[:-1]]).astype(np.int32)


class _Adjacency:
    """Per-symbol CSR adjacency plus the index tables the engine needs."""

    def __init__(self, lts: Lts):
        n, m = lts.state_count, lts.symbol_count
        self.n = n
        self.m = m
        self.succ_indptr: list[np.ndarray] = []
        self.succ_data: list[np.ndarray] = []
        self.pred_indptr: list[np.ndarray] = []
        self.pred_data: list[np.ndarray] = []
        self.out_states: list[np.ndarray] = []      # states emitting a, ascending
        self.counter_slot: list[np.ndarray] = []    # state -> dense slot among out_states
        self.rsucc_indptr: list[np.ndarray] = []    # CSR over out_states[a] rows only
        self.has_in = np.zeros((m, n), dtype=bool)

        for a in range(m):
            si, sd = self._csr(lts.succ[a], n)
            pi, pd = self._csr(lts.pred[a], n)
            self.succ_indptr.append(si)
            self.succ_data.append(sd)
            self.pred_indptr.append(pi)
            self.pred_data.append(pd)
            degrees = si[1:] - si[:-1]
            outs = np.flatnonzero(degrees > 0)
            self.out_states.append(outs)
            slot = np.full(n, -1, dtype=np.int64)
            slot[outs] = np.arange(len(outs))
            self.counter_slot.append(slot)
            rind = np.zeros(len(outs) + 1, dtype=np.int64)
            np.cumsum(degrees[outs], out=rind[1:])
            self.rsucc_indptr.append(rind)
            self.has_in[a] = (pi[1:] - pi[:-1]) > 0

    @staticmethod
    def _csr(adj: dict, n: int):
        indptr = np.zeros(n + 1, dtype=np.int64)
        for u, targets in adj.items():
            indptr[u + 1] = len(targets)
        np.cumsum(indptr, out=indptr)
        data = np.empty(indptr[-1], dtype=np.int64)
        for u, targets in adj.items():
            data[indptr[u] : indptr[u + 1]] = sorted(targets)
        return indptr, data

    def preds_of(self, a: int, states: np.ndarray) -> np.ndarray:
        return _gather_rows(self.pred_indptr[a], self.pred_data[a], states)

    def in_symbols(self, states: np.ndarray) -> np.ndarray:
        return np.flatnonzero(self.has_in[:, states].any(axis=1))


class _RemoveSet:
    """Pending states for one (block, symbol), deduplicated by a width mask.

    Items are held as a list of immutable id-array chunks so that inheriting
    a copy on a split is O(number of chunks).
    """

    __slots__ = ("mask", "chunks", "count")

    def __init__(self, width: int):
        self.mask = np.zeros(width, dtype=bool)
        self.chunks: list[np.ndarray] = []
        self.count = 0

    def clone(self) -> "_RemoveSet":
        new = _RemoveSet.__new__(_RemoveSet)
        new.mask = self.mask.copy()
        new.chunks = list(self.chunks)
        new.count = self.count
        return new

    def drain(self) -> np.ndarray:
        states = (
            np.concatenate(self.chunks) if self.chunks else np.empty(0, dtype=np.int64)
        )
        self.mask = np.zeros(len(self.mask), dtype=bool)
        self.chunks = []
        self.count = 0
        return states


class EngineState:
    """Live data for one refinement run; advance it with :meth:`step`.

    Holds the current partition-relation pair (relation as a growable
    boolean matrix over block ids), the per-(block, symbol) Remove sets and
    counter arrays, the activation ordering of blocks, and run metrics.
    Blocks whose Remove sets become nonempty move to the front of the
    scheduling order; selection scans from the front.
    """

    def __init__(
        self,
        lts: Lts,
        initial: PartitionRelationPair,
        *,
        out_init: bool = True,
        restrict_to_in: bool = True,
        restrict_remove: bool = True,
        audit: bool = False,
    ):
        try:
            validate_coarsest(initial)
        except PartitionError as exc:
            raise EngineError(f"initial pair rejected: {exc}") from exc
        if initial.state_count != lts.state_count:
            raise EngineError("initial pair does not cover this LTS's states")

        self.lts = lts
        self.out_init = out_init
        self.restrict_to_in = restrict_to_in
        self.restrict_remove = restrict_remove
        self.audit = audit
        self.metrics = SimMetrics()

        pair = refine_by_out(initial, lts) if out_init else initial.canonical()
        adj = _Adjacency(lts)
        self._adj = adj
        n, m = adj.n, adj.m

        k = pair.block_count
        cap = max(4, k)
        self._nb = k
        self._members: list[np.ndarray] = [
            np.fromiter(b, dtype=np.int64) for b in pair.blocks
        ]
        self._block_of = np.array(pair.block_of)
        self._rel = np.zeros((cap, cap), dtype=bool)
        self._rel[:k, :k] = pair.rel
        self._bsize = np.zeros(cap, dtype=np.int64)
        self._bsize[:k] = [len(mem) for mem in self._members]

        # per block: symbol -> counter array / remove set; key present == allocated
        self._counts: list[dict[int, np.ndarray]] = [dict() for _ in range(k)]
        self._removes: list[dict[int, _RemoveSet]] = [dict() for _ in range(k)]
        self._pending: list[set[int]] = [set() for _ in range(k)]
        self._stack: list[int] = []
        self._cells = 0
        # caches keyed by (block, member-version, ...); versions bump on splits
        self._version: list[int] = [0] * k
        self._dec_cache: dict = {}
        self._insym_cache: dict = {}

        widths = [
            len(adj.out_states[a]) if restrict_remove else n for a in range(m)
        ]

        for bid in range(k):
            above = self._above_mask(bid)
            if restrict_to_in:
                symbols = [int(a) for a in adj.in_symbols(self._members[bid])]
            else:
                symbols = range(m)
            for a in symbols:
                counts = self._initial_counts(a, above)
                self._counts[bid][a] = counts
                self._cells += len(counts)
                rs = _RemoveSet(widths[a])
                zero = np.flatnonzero(counts == 0)
                if zero.size:
                    rs.mask[zero] = True
                    states = (
                        adj.out_states[a][zero] if restrict_remove else zero
                    )
                    rs.chunks.append(states)
                    rs.count = len(states)
                    self.metrics.remove_enqueued += len(states)
                self._removes[bid][a] = rs
                if rs.count:
                    self._activate(bid, a)
        self.metrics.counters_allocated = max(self.metrics.counters_allocated, self._cells)
        if audit:
            self.audit_state()

    # -- helpers ------------------------------------------------------------

    def _above_mask(self, bid: int) -> np.ndarray:
        above = np.zeros(self._adj.n, dtype=bool)
        row = self._rel[bid, : self._nb]
        for cid in np.flatnonzero(row):
            above[self._members[cid]] = True
        return above

    def _initial_counts(self, a: int, above: np.ndarray) -> np.ndarray:
        adj = self._adj
        vals = above[adj.succ_data[a]]
        if self.restrict_remove:
            return _segment_counts(adj.rsucc_indptr[a], vals)
        return _segment_counts(adj.succ_indptr[a], vals)

    def _activate(self, bid: int, a: int) -> None:
        # move-to-front: newly pending blocks go on top of the scan order
        if a not in self._pending[bid]:
            self._pending[bid].add(a)
        if not self._stack or self._stack[-1] != bid:
            self._stack.append(bid)

    def _new_block(self) -> int:
        if self._nb == self._rel.shape[0]:
            cap = self._rel.shape[0] * 2
            grown = np.zeros((cap, cap), dtype=bool)
            grown[: self._nb, : self._nb] = self._rel[: self._nb, : self._nb]
            self._rel = grown
            grown_sizes = np.zeros(cap, dtype=np.int64)
            grown_sizes[: self._nb] = self._bsize[: self._nb]
            self._bsize = grown_sizes
        nid = self._nb
        self._nb += 1
        self._members.append(np.empty(0, dtype=np.int64))
        self._counts.append(dict())
        self._removes.append(dict())
        self._pending.append(set())
        self._version.append(0)
        return nid

    def _shrink_to_in(self, bid: int) -> None:
        """Drop data for symbols that no longer enter the block."""
        if not self.restrict_to_in:
            return
        allocated = sorted(self._counts[bid])
        if not allocated:
            return
        syms = np.array(allocated)
        alive = self._adj.has_in[syms][:, self._members[bid]].any(axis=1)
        for a in syms[~alive]:
            a = int(a)
            self._cells -= len(self._counts[bid].pop(a))
            rs = self._removes[bid].pop(a)
            if rs.count:
                self.metrics.skipped_iterations += 1
            self._pending[bid].discard(a)

    # -- the loop -----------------------------------------------------------

    @property
    def done(self) -> bool:
        return not any(self._pending[bid] for bid in set(self._stack))

    def step(self) -> bool:
        """Process one pending (block, symbol) Remove set.

        Returns False (and changes nothing) when no Remove set is pending.
        """
        stack = self._stack
        while stack and not self._pending[stack[-1]]:
            stack.pop()
        if not stack:
            return False
        bid = stack[-1]
        a = min(self._pending[bid])
        self._pending[bid].discard(a)
        remove = self._removes[bid][a].drain()
        remove.sort()
        b_pre = self._members[bid]  # snapshot: split replaces member arrays
        self.metrics.iterations += 1

        d_blocks = self._split(remove)
        self._prune(a, b_pre, d_blocks)
        if self.audit:
            self.audit_state()
        return True

    def run(self) -> "EngineState":
        while self.step():
            pass
        return self

    def _split(self, remove: np.ndarray) -> list[int]:
        """Split the partition by ``remove``; return the block ids inside it."""
        if remove.size == 0:
            return []
        owners = self._block_of[remove]
        order = np.argsort(owners, kind="stable")
        rs = remove[order]
        owners = owners[order]
        uniq, starts, counts = np.unique(owners, return_index=True, return_counts=True)
        full = counts == self._bsize[uniq]
        d_blocks = [int(b) for b in uniq[full]]  # blocks fully inside: child equals parent
        metrics = self.metrics
        for pos in np.flatnonzero(~full):
            pb = int(uniq[pos])
            s = int(starts[pos])
            seg = rs[s : s + int(counts[pos])]
            mem = self._members[pb]
            nid = self._new_block()
            metrics.splits += 1
            keep = mem[~np.isin(mem, seg, assume_unique=True)]
            self._members[pb] = keep
            self._members[nid] = seg
            self._block_of[seg] = nid
            self._bsize[pb] = len(keep)
            self._bsize[nid] = len(seg)
            self._version[pb] += 1
            old = nid  # row/col count before this block existed
            rel = self._rel
            rel[nid, :old] = rel[pb, :old]
            rel[:old, nid] = rel[:old, pb]
            rel[nid, nid] = rel[pb, pb]
            # children inherit counters and pending Remove sets from the parent;
            # the surviving part reuses the parent's storage, the new part
            # copies only the symbols that still enter it
            if self.restrict_to_in:
                child_syms = [int(b) for b in self._adj.in_symbols(seg)]
            else:
                child_syms = sorted(self._counts[pb])
            for b in child_syms:
                arr = self._counts[pb].get(b)
                if arr is None:
                    continue
                copy = arr.copy()
                self._counts[nid][b] = copy
                self._cells += len(copy)
                clone = self._removes[pb][b].clone()
                self._removes[nid][b] = clone
                if clone.count:
                    metrics.remove_enqueued += clone.count
                    self._activate(nid, b)
            self._shrink_to_in(pb)
            d_blocks.append(nid)
        metrics.counters_allocated = max(metrics.counters_allocated, self._cells)
        return sorted(d_blocks)

    def _in_symbols_of(self, bid: int) -> np.ndarray:
        key = (bid, self._version[bid])
        syms = self._insym_cache.get(key)
        if syms is None:
            syms = self._adj.in_symbols(self._members[bid])
            self._insym_cache[key] = syms
        return syms

    def _decrement_indices(self, bid: int, b: int):
        """Counter slots hit when block ``bid`` leaves some above-set, with
        multiplicity, plus the deduplicated slots (None when already unique)."""
        key = (bid, self._version[bid], b)
        cached = self._dec_cache.get(key)
        if cached is None:
            dmem = self._members[bid]
            sources = self._adj.preds_of(b, dmem)
            if self.restrict_remove:
                idx = self._adj.counter_slot[b][sources]
            else:
                idx = sources
            # predecessor sets are duplicate-free, so multiplicity needs >1 member
            uniq = None if len(dmem) == 1 else np.unique(idx)
            cached = (idx, uniq)
            self._dec_cache[key] = cached
        return cached

    def _prune(self, a: int, b_pre: np.ndarray, d_blocks: list[int]) -> None:
        """Delete (C,D) relation pairs and propagate counter decrements."""
        adj = self._adj
        preds = adj.preds_of(a, b_pre)
        if preds.size == 0 or not d_blocks:
            return
        c_blocks = np.unique(self._block_of[preds])
        rel = self._rel
        for cid in c_blocks:
            cid = int(cid)
            counts_c = self._counts[cid]
            for did in d_blocks:
                if not rel[cid, did]:
                    continue
                rel[cid, did] = False
                for b in self._in_symbols_of(did):
                    b = int(b)
                    arr = counts_c.get(b)
                    if arr is None:
                        continue  # symbol does not enter C; never scheduled
                    idx, uniq = self._decrement_indices(did, b)
                    if uniq is None:
                        arr[idx] -= 1
                        uniq = idx
                    else:
                        np.subtract.at(arr, idx, 1)
                    zero = uniq[arr[uniq] == 0]
                    if zero.size == 0:
                        continue
                    rs = self._removes[cid][b]
                    fresh = zero[~rs.mask[zero]]
                    if fresh.size == 0:
                        continue
                    rs.mask[fresh] = True
                    states = (
                        adj.out_states[b][fresh] if self.restrict_remove else fresh
                    )
                    rs.chunks.append(states)
                    rs.count += len(states)
                    self.metrics.remove_enqueued += len(states)
                    self._activate(cid, b)

    # -- results and audits ---------------------------------------------------

    def current_pair(self) -> PartitionRelationPair:
        """Canonical snapshot of the live partition-relation pair."""
        order = sorted(range(self._nb), key=lambda i: int(self._members[i][0]))
        perm = np.array(order)
        blocks = [self._members[i] for i in order]
        return PartitionRelationPair(blocks, self._rel[np.ix_(perm, perm)])

    def audit_state(self) -> None:
        """Recompute every live counter and Remove set from definitions.

        Raises :class:`AuditError` on the first mismatch.  Quadratic; only for
        debug runs.
        """
        for bid in range(self._nb):
            above = self._above_mask(bid)
            if not self._rel[bid, bid]:
                raise AuditError(f"block {bid} lost reflexivity")
            for a, arr in self._counts[bid].items():
                expected = self._initial_counts(a, above)
                if not np.array_equal(arr, expected):
                    v = int(np.flatnonzero(arr != expected)[0])
                    raise AuditError(
                        f"counter mismatch at block {bid}, symbol {a}, slot {v}: "
                        f"have {int(arr[v])}, expected {int(expected[v])}"
                    )
                rs = self._removes[bid][a]
                listed = np.zeros(len(rs.mask), dtype=bool)
                for chunk in rs.chunks:
                    if self.restrict_remove:
                        listed[self._adj.counter_slot[a][chunk]] = True
                    else:
                        listed[chunk] = True
                if not np.array_equal(listed, rs.mask):
                    raise AuditError(f"remove mask out of sync at block {bid}, symbol {a}")
                if (expected[rs.mask] != 0).any():
                    raise AuditError(
                        f"remove set at block {bid}, symbol {a} holds a state "
                        "with a nonzero counter"
                    )


def engine_step(state: EngineState) -> bool:
    """Run exactly one refinement iteration; False once the fixpoint is reached."""
    return state.step()


def run_engine(
    lts: Lts,
    initial: PartitionRelationPair,
    *,
    out_init: bool = True,
    restrict_to_in: bool = True,
    restrict_remove: bool = True,
    audit: bool = False,
) -> tuple[PartitionRelationPair, SimMetrics]:
    """Refine ``initial`` to the coarsest pair inducing the maximal simulation."""
    t0 = time.perf_counter()
    state = EngineState(
        lts,
        initial,
        out_init=out_init,
        restrict_to_in=restrict_to_in,
        restrict_remove=restrict_remove,
        audit=audit,
    )
    state.run()
    pair = state.current_pair()
    state.metrics.wall_time_ms = (time.perf_counter() - t0) * 1000.0
    return pair, state.metrics


def lrt(lts: Lts, initial: PartitionRelationPair) -> PartitionRelationPair:
    """Baseline refinement: full allocation, no output-preorder initialization."""
    pair, _ = run_engine(
        lts, initial, out_init=False, restrict_to_in=False, restrict_remove=False
    )
    return pair


def olrt(lts: Lts, initial: PartitionRelationPair) -> tuple[PartitionRelationPair, SimMetrics]:
    """Optimized refinement; returns the final pair and its run metrics."""
    return run_engine(lts, initial)
