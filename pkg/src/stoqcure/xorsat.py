"""2-XOR-SAT solver: union-find with parity-to-root bits.

Clauses are equations x_a XOR x_b = parity.  A clause with a == b is the
forced-value encoding (satisfiable only with parity 0).  The solver is
near-linear in the number of clauses; on success the returned assignment sets
every component representative to 0, which makes the output deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class XorClause:
    var_a: int
    var_b: int
    parity: int  # 1 encodes x_a ^ x_b = 1; 0 encodes x_a ^ x_b = 0

    def __post_init__(self):
        if self.parity not in (0, 1):
            raise ValueError("parity must be 0 or 1")
        if self.var_a < 0 or self.var_b < 0:
            raise ValueError("variable ids must be nonnegative")

    def satisfied_by(self, assignment) -> bool:
        return (assignment[self.var_a] ^ assignment[self.var_b]) == self.parity


@dataclass(frozen=True)
class XorSystem:
    n_vars: int
    clauses: tuple[XorClause, ...]

    def __post_init__(self):
        for c in self.clauses:
            if c.var_a >= self.n_vars or c.var_b >= self.n_vars:
                raise ValueError(f"clause {c} references a variable >= {self.n_vars}")


class _ParityForest:
    """Disjoint-set forest where each node stores its parity to the root."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.parity = [0] * n   # parity of node relative to parent chain
        self.rank = [0] * n

    def find_with_parity(self, x: int) -> tuple[int, int]:
        root = x
        p = 0
        while self.parent[root] != root:
            p ^= self.parity[root]
            root = self.parent[root]
        # Path compression: repoint everything at the root.
        node, acc = x, p
        while self.parent[node] != node:
            nxt, np_ = self.parent[node], self.parity[node]
            self.parent[node], self.parity[node] = root, acc
            acc ^= np_
            node = nxt
        return root, p

    def union(self, a: int, b: int, parity: int) -> bool:
        """Merge with constraint x_a ^ x_b = parity; False on contradiction."""
        ra, pa = self.find_with_parity(a)
        rb, pb = self.find_with_parity(b)
        if ra == rb:
            return (pa ^ pb) == parity
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
            pa, pb = pb, pa
        self.parent[rb] = ra
        self.parity[rb] = pa ^ pb ^ parity
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1
        return True


def solve(system: XorSystem) -> list[int] | None:
    """Satisfying assignment (representatives pinned to 0), or None if unsat."""
    forest = _ParityForest(system.n_vars)
    for c in system.clauses:
        if not forest.union(c.var_a, c.var_b, c.parity):
            return None
    return [forest.find_with_parity(x)[1] for x in range(system.n_vars)]
