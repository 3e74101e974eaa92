"""Matrix-weighted interaction graphs and their rank decompositions.

Each edge (u, v) with u < v carries the 3x3 beta matrix of the interaction;
``beta(v, u)`` is the transpose.  The decompositions used downstream:

  * rank classification of edges (rank-1 vs rank>1 at tolerance; rank-0 edges
    are dropped with a warning, a zero interaction constrains nothing);
  * connected components of the rank>1 subgraph ("high-rank components") --
    every vertex belongs to exactly one, isolated vertices included;
  * per-component BFS spanning tree plus the fundamental cycle of each
    non-tree edge, as closed vertex paths through the root.
"""

from __future__ import annotations

import warnings
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .mat3 import DEFAULT_TOL, Tolerances, rank_eps


@dataclass(frozen=True, eq=False)
class BetaGraph:
    """Undirected graph on qubits with one 3x3 weight per interacting pair."""

    n_vertices: int
    edges: dict  # (u, v) with u < v  ->  3x3 ndarray (read-only)
    scale: float = field(init=False)

    def __post_init__(self):
        for (u, v), beta in self.edges.items():
            if not (0 <= u < v < self.n_vertices):
                raise ValueError(f"bad edge ({u}, {v})")
            if beta.shape != (3, 3):
                raise ValueError("edge weights must be 3x3")
            beta.setflags(write=False)
        scale = 0.0
        for beta in self.edges.values():
            scale = max(scale, float(np.linalg.norm(beta, 2)))
        object.__setattr__(self, "scale", scale)

    def beta(self, u: int, v: int) -> np.ndarray:
        """Weight oriented so rows index u's axes and columns index v's."""
        if u < v:
            return self.edges[(u, v)]
        return self.edges[(v, u)].T

    def neighbors(self, u: int) -> list[int]:
        out = []
        for (a, b) in self.edges:
            if a == u:
                out.append(b)
            elif b == u:
                out.append(a)
        return sorted(out)

    def adjacency(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.n_vertices)]
        for (u, v) in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        for lst in adj:
            lst.sort()
        return adj


def graph_from_betas(n_vertices: int, betas: dict) -> BetaGraph:
    return BetaGraph(n_vertices, {k: np.array(v, dtype=float) for k, v in betas.items()})


RANK1 = "rank1"
RANK_HIGH = "rankHigh"


def classify_edges(g: BetaGraph, tol: Tolerances = DEFAULT_TOL) -> tuple[BetaGraph, dict]:
    """Label every edge rank1 / rankHigh; drop rank-0 edges with a warning.

    Ranks are measured against the graph-wide largest singular value, so a
    uniformly scaled graph classifies identically.
    """
    labels: dict[tuple[int, int], str] = {}
    kept: dict[tuple[int, int], np.ndarray] = {}
    dropped = []
    for key, beta in sorted(g.edges.items()):
        r = rank_eps(beta, tol, scale=g.scale)
        if r == 0:
            dropped.append(key)
            continue
        kept[key] = beta
        labels[key] = RANK1 if r == 1 else RANK_HIGH
    if dropped:
        warnings.warn(f"dropping {len(dropped)} rank-0 edge(s) at tolerance: {dropped}",
                      stacklevel=2)
        g = BetaGraph(g.n_vertices, kept)
    return g, labels


@dataclass(frozen=True)
class HighRankComponent:
    """Maximal subgraph connected through rank>1 edges (possibly a lone vertex)."""

    ident: int
    vertices: tuple[int, ...]
    internal_edges: tuple[tuple[int, int], ...]  # rank>1 edges inside


def rcc_decomposition(g: BetaGraph, labels: dict) -> list[HighRankComponent]:
    """Partition the vertices into rank>1 connected components."""
    adj: list[list[int]] = [[] for _ in range(g.n_vertices)]
    for (u, v), lab in labels.items():
        if lab == RANK_HIGH:
            adj[u].append(v)
            adj[v].append(u)
    seen = [False] * g.n_vertices
    comps: list[HighRankComponent] = []
    for start in range(g.n_vertices):
        if seen[start]:
            continue
        queue = deque([start])
        seen[start] = True
        verts = []
        while queue:
            x = queue.popleft()
            verts.append(x)
            for y in sorted(adj[x]):
                if not seen[y]:
                    seen[y] = True
                    queue.append(y)
        verts.sort()
        vset = set(verts)
        internal = tuple(sorted((u, v) for (u, v), lab in labels.items()
                                if lab == RANK_HIGH and u in vset))
        comps.append(HighRankComponent(len(comps), tuple(verts), internal))
    return comps


@dataclass(frozen=True)
class CycleBasis:
    root: int
    parent: dict        # vertex -> parent vertex (root maps to itself)
    tree_edges: tuple[tuple[int, int], ...]
    cycles: tuple[tuple[int, ...], ...]  # closed vertex paths root -> ... -> root


def spanning_tree_and_cycles(component: HighRankComponent, root: int | None = None) -> CycleBasis:
    """BFS spanning tree plus one fundamental cycle per non-tree edge.

    Cycles traverse their non-tree edge from lower to higher vertex index and
    are returned as closed paths starting and ending at the root.
    """
    if root is None:
        root = min(component.vertices)
    adj: dict[int, list[int]] = {v: [] for v in component.vertices}
    for (u, v) in component.internal_edges:
        adj[u].append(v)
        adj[v].append(u)
    parent = {root: root}
    order = [root]
    queue = deque([root])
    while queue:
        x = queue.popleft()
        for y in sorted(adj[x]):
            if y not in parent:
                parent[y] = x
                order.append(y)
                queue.append(y)
    if len(parent) != len(component.vertices):
        raise ValueError("component is not connected")
    tree = tuple(sorted((min(v, parent[v]), max(v, parent[v]))
                        for v in component.vertices if v != root))

    def path_to_root(x: int) -> list[int]:
        path = [x]
        while path[-1] != root:
            path.append(parent[path[-1]])
        return path

    cycles = []
    for (u, v) in component.internal_edges:
        if (u, v) in tree:
            continue
        up = path_to_root(u)     # u ... root
        vp = path_to_root(v)     # v ... root
        cycles.append(tuple(reversed(up)) + tuple(vp))  # root..u, v..root
    return CycleBasis(root, parent, tree, tuple(cycles))


def export_dot(g: BetaGraph, labels: dict | None = None) -> str:
    """Debug export of the (optionally labeled) graph in DOT format."""
    lines = ["graph beta {"]
    for v in range(g.n_vertices):
        lines.append(f"  {v};")
    for (u, v) in sorted(g.edges):
        attr = ""
        if labels is not None:
            attr = f' [label="{labels[(u, v)]}"]'
        lines.append(f"  {u} -- {v}{attr};")
    lines.append("}")
    return "\n".join(lines) + "\n"
