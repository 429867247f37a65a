"""Dense binary relations over state ids."""

from __future__ import annotations

import numpy as np

__all__ = ["RelationError", "StateRelation"]


class RelationError(ValueError):
    """A relation fails a structural requirement (e.g. it is not a preorder)."""


class StateRelation:
    """Binary relation on dense state ids, backed by a boolean matrix.

    Membership tests and updates are constant time.  Iteration over pairs is
    row-major by id, so every traversal is deterministic.
    """

    __slots__ = ("matrix",)

    def __init__(self, matrix):
        m = np.array(matrix, dtype=bool)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise RelationError(f"relation matrix must be square, got shape {m.shape}")
        self.matrix = m

    @classmethod
    def empty(cls, n: int) -> "StateRelation":
        return cls(np.zeros((n, n), dtype=bool))

    @classmethod
    def identity(cls, n: int) -> "StateRelation":
        return cls(np.eye(n, dtype=bool))

    @classmethod
    def full(cls, n: int) -> "StateRelation":
        return cls(np.ones((n, n), dtype=bool))

    @classmethod
    def from_pairs(cls, n: int, pairs) -> "StateRelation":
        rel = cls.empty(n)
        for u, v in pairs:
            rel.matrix[u, v] = True
        return rel

    @property
    def size(self) -> int:
        """Number of states the relation is defined over."""
        return self.matrix.shape[0]

    def has(self, u: int, v: int) -> bool:
        return bool(self.matrix[u, v])

    def __contains__(self, pair) -> bool:
        u, v = pair
        return bool(self.matrix[u, v])

    def add(self, u: int, v: int) -> None:
        self.matrix[u, v] = True

    def remove(self, u: int, v: int) -> None:
        self.matrix[u, v] = False

    def pairs(self):
        """Yield all related pairs in row-major id order."""
        for u, v in np.argwhere(self.matrix):
            yield int(u), int(v)

    def pair_count(self) -> int:
        return int(self.matrix.sum())

    def copy(self) -> "StateRelation":
        return StateRelation(self.matrix)

    def issubset(self, other: "StateRelation") -> bool:
        return bool(np.all(self.matrix <= other.matrix))

    def __eq__(self, other) -> bool:
        if not isinstance(other, StateRelation):
            return NotImplemented
        return self.matrix.shape == other.matrix.shape and bool(
            np.array_equal(self.matrix, other.matrix)
        )

    def __hash__(self):
        raise TypeError("StateRelation is not hashable")

    def __repr__(self) -> str:
        return f"StateRelation(size={self.size}, pairs={self.pair_count()})"

    # -- preorder machinery -------------------------------------------------

    def _compose_bool(self) -> np.ndarray:
        # float32 matmul hits BLAS; integer matmul does not.
        m = self.matrix.astype(np.float32)
        return (m @ m) > 0.5

    def preorder_violation(self):
        """Return None if the relation is a preorder, else a human-readable witness."""
        m = self.matrix
        diag = m.diagonal()
        if not diag.all():
            u = int(np.flatnonzero(~diag)[0])
            return f"not reflexive: pair ({u},{u}) missing"
        if m.all():
            return None
        comp = self._compose_bool()
        bad = comp & ~m
        if bad.any():
            u, w = (int(x) for x in np.argwhere(bad)[0])
            v = int(np.flatnonzero(m[u] & m[:, w])[0])
            return (
                f"not transitive: ({u},{v}) and ({v},{w}) present "
                f"but ({u},{w}) missing"
            )
        return None

    def is_preorder(self) -> bool:
        return self.preorder_violation() is None

    def require_preorder(self, what: str = "relation") -> None:
        violation = self.preorder_violation()
        if violation is not None:
            raise RelationError(f"{what} is not a preorder: {violation}")

    def reflexive_transitive_closure(self) -> "StateRelation":
        m = self.matrix | np.eye(self.size, dtype=bool)
        while True:
            f = m.astype(np.float32)
            nxt = m | ((f @ f) > 0.5)
            if np.array_equal(nxt, m):
                return StateRelation(m)
            m = nxt
