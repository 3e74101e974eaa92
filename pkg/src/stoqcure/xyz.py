"""Sign-curing diagonal (XYZ-Heisenberg form) graphs by signed permutations.

Input: a graph whose edges carry diagonal coefficient triples (c1, c2, c3),
the diagonal of a simultaneously diagonalized interaction.  Question: do
per-vertex signed axis permutations exist making every transformed edge
satisfy the stoquastic-edge inequality  c'_1 <= -|c'_2|  (slot 1 = X,
slot 2 = Y)?  Signed permutations are exactly the single-qubit Cliffords in
the rotation picture, so this is the discrete residual problem left after
continuous diagonalization.

Structure of the search (per connected component):

  * Diagonality forces both endpoints of an edge to place the edge's nonzero
    axes in the same slots, so for each axis the vertices joined by edges
    carrying that axis form a *sharing cluster* that must agree on one slot.
    Within a fully-nonzero component all three clusters span the component
    and the choice space is exactly the 6 axis permutations.
  * Given slots: an edge with an empty X slot is satisfiable only if its Y
    slot is empty too; an edge with axis a in the X slot needs
    |c_a| >= |c at Y| and pins the endpoint sign product on axis a to
    -sign(c_a).  The sign conditions form a 2-XOR-SAT system over
    (vertex, axis) sign bits.
  * Fast path: try the 6 uniform permutations.  Complete path: exhaustive
    slot assignment over sharing clusters with injectivity/admissibility
    pruning (needed when zero entries decouple clusters; a uniform
    permutation can miss solutions there).

The solver returns per-vertex signed permutations, or None when no
assignment exists within the search budget.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass

import numpy as np

from . import xorsat
from .graph import BetaGraph
from .mat3 import DEFAULT_TOL, Tolerances, rank_eps
from .nly import permutation_matrix, solve_nly, NlyFailure
from .pauli import DEFAULT_EPS

_SEARCH_BUDGET = 500_000  # cluster-assignment expansions per component


@dataclass(frozen=True)
class DiagonalEdgeGraph:
    n_vertices: int
    edges: tuple  # ((u, v, (c1, c2, c3)), ...)

    def __post_init__(self):
        for u, v, c in self.edges:
            if not (0 <= u < self.n_vertices and 0 <= v < self.n_vertices and u != v):
                raise ValueError(f"bad edge ({u}, {v})")
            if len(c) != 3:
                raise ValueError("edge coefficients must be triples")


@dataclass(frozen=True)
class SignedPermutation:
    """A signed axis permutation: axis a -> slot perm[a] with sign signs[a].

    Matrix convention: as_matrix() has entry [perm(a)-1, a-1] = signs[a], so
    the conjugation  P^T Sigma P  moves the old axis-a coefficient to slot
    perm(a) with sign signs_u[a] * signs_v[a].
    """

    perm: tuple        # perm[a-1] = slot of axis a
    signs: tuple       # signs[a-1] in {+1, -1}

    def __post_init__(self):
        if sorted(self.perm) != [1, 2, 3] or any(s not in (-1, 1) for s in self.signs):
            raise ValueError("not a signed permutation")

    def as_matrix(self) -> np.ndarray:
        m = np.zeros((3, 3))
        for a in range(3):
            m[self.perm[a] - 1, a] = float(self.signs[a])
        return m

    def is_proper(self) -> bool:
        return bool(np.linalg.det(self.as_matrix()) > 0)


IDENTITY_SIGNED_PERM = SignedPermutation((1, 2, 3), (1, 1, 1))


def edge_is_stoquastic(c, eps: float = DEFAULT_EPS) -> bool:
    """Stoquastic-edge test for a diagonal triple: c1 <= -|c2|."""
    return c[0] <= -abs(c[1]) + eps


def transform_triple(c, pu: SignedPermutation, pv: SignedPermutation):
    """Edge triple after conjugation by endpoint signed permutations.

    None when the two permutations disagree on a nonzero axis (the edge would
    leave diagonal form).
    """
    out = [0.0, 0.0, 0.0]
    for a in range(3):
        if c[a] == 0.0:
            continue
        if pu.perm[a] != pv.perm[a]:
            return None
        out[pu.perm[a] - 1] = pu.signs[a] * pv.signs[a] * c[a]
    return tuple(out)


def _connected_components(n: int, edges) -> list[list[int]]:
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v, _ in edges:
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
    groups: dict[int, list[int]] = {}
    for v in range(n):
        groups.setdefault(find(v), []).append(v)
    return [sorted(g) for g in groups.values()]


class _ComponentProblem:
    """One connected component: clusters, slot assignment, sign system."""

    def __init__(self, vertices, edges, eps):
        self.vertices = vertices
        self.edges = edges       # (u, v, triple)
        self.eps = eps
        # Per-axis sharing clusters: vertices joined by an edge carrying the
        # axis must place it in the same slot.
        parent = {(a, v): (a, v) for a in range(3) for v in vertices}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        active = set()
        for u, v, c in edges:
            for a in range(3):
                if abs(c[a]) > eps:
                    active.add((a, u))
                    active.add((a, v))
                    ru, rv = find((a, u)), find((a, v))
                    if ru != rv:
                        parent[ru] = rv
        self.cluster_of = {key: find(key) for key in active}
        self.clusters = sorted(set(self.cluster_of.values()))
        self.vertex_clusters = {v: sorted({self.cluster_of[(a, v)]
                                           for a in range(3) if (a, v) in self.cluster_of})
                                for v in vertices}
        self.edge_axes = [tuple(a for a in range(3) if abs(c[a]) > eps)
                          for _, _, c in edges]

    def axis_slot(self, assignment, edge_idx, a):
        u = self.edges[edge_idx][0]
        return assignment.get(self.cluster_of[(a, u)])

    def edge_ok(self, assignment, idx) -> tuple[bool, tuple | None]:
        """Admissibility of one edge under a (possibly partial) assignment.

        Returns (ok, sign_constraint) where sign_constraint is
        (u, v, axis, parity) when the X slot carries a nonzero axis.  Partial
        assignments only fail when already contradictory.
        """
        u, v, c = self.edges[idx]
        slots = {}
        unassigned = False
        for a in self.edge_axes[idx]:
            s = self.axis_slot(assignment, idx, a)
            if s is None:
                unassigned = True
                continue
            slots[s] = a
        x_axis = slots.get(1)
        y_axis = slots.get(2)
        if x_axis is None:
            if not unassigned and y_axis is not None:
                return False, None    # empty X slot facing a nonzero Y slot
            if unassigned:
                return True, None     # cannot judge yet
            return True, None
        if y_axis is not None and abs(c[x_axis]) < abs(c[y_axis]) - self.eps:
            return False, None
        if unassigned and y_axis is None:
            # The Y occupant is still open; |c_x| must beat the smallest
            # remaining candidate, which we cannot bound yet -- defer.
            return True, None
        return True, (u, v, x_axis, 0 if c[x_axis] < 0 else 1)

    def signs_satisfiable(self, assignment, want_solution=False):
        """Solve the sign system for a complete slot assignment."""
        constraints = []
        for idx in range(len(self.edges)):
            ok, con = self.edge_ok(assignment, idx)
            if not ok:
                return None if want_solution else False
            if con is not None:
                constraints.append(con)
        var_ids: dict[tuple, int] = {}
        clauses = []
        for u, v, axis, parity in constraints:
            for key in ((u, axis), (v, axis)):
                if key not in var_ids:
                    var_ids[key] = len(var_ids)
            clauses.append(xorsat.XorClause(var_ids[(u, axis)], var_ids[(v, axis)], parity))
        bits = xorsat.solve(xorsat.XorSystem(len(var_ids), tuple(clauses)))
        if bits is None:
            return None if want_solution else False
        if not want_solution:
            return True
        signs = {(v, a): 1 for v in self.vertices for a in range(3)}
        for key, vid in var_ids.items():
            signs[key] = -1 if bits[vid] else 1
        return signs

    def injective_at_vertices(self, assignment) -> bool:
        for v in self.vertices:
            used = [assignment[c] for c in self.vertex_clusters[v] if c in assignment]
            if len(used) != len(set(used)):
                return False
        return True

    def uniform_assignments(self):
        for perm in itertools.permutations((1, 2, 3)):
            yield {c: perm[c[0]] for c in self.clusters}

    def search(self):
        """Slot assignment + signs, or None.  Uniform fast path, then DFS."""
        for assignment in self.uniform_assignments():
            if not self.injective_at_vertices(assignment):
                continue
            signs = self.signs_satisfiable(assignment, want_solution=True)
            if signs is not None:
                return assignment, signs
        # Exhaustive cluster-level search (zero entries can decouple clusters,
        # making non-uniform placements necessary).
        order = self.clusters
        budget = [_SEARCH_BUDGET]

        def feasible_partial(assignment):
            if not self.injective_at_vertices(assignment):
                return False
            return all(self.edge_ok(assignment, i)[0] for i in range(len(self.edges)))

        def dfs(pos, assignment):
            if budget[0] <= 0:
                return None
            budget[0] -= 1
            if pos == len(order):
                signs = self.signs_satisfiable(assignment, want_solution=True)
                if signs is not None:
                    return dict(assignment), signs
                return None
            cluster = order[pos]
            for slot in (3, 1, 2):   # prefer the unconstrained Z slot
                assignment[cluster] = slot
                if feasible_partial(assignment):
                    got = dfs(pos + 1, assignment)
                    if got is not None:
                        return got
                del assignment[cluster]
            return None

        got = dfs(0, {})
        if got is None and budget[0] <= 0:
            warnings.warn("signed-permutation search budget exhausted; reporting "
                          "no cure for this component", stacklevel=2)
        return got

    def build_permutations(self, assignment, signs) -> dict:
        out = {}
        for v in self.vertices:
            slot_of_axis = {}
            for a in range(3):
                key = (a, v)
                if key in self.cluster_of and self.cluster_of[key] in assignment:
                    slot_of_axis[a] = assignment[self.cluster_of[key]]
            free_axes = [a for a in range(3) if a not in slot_of_axis]
            free_slots = [s for s in (1, 2, 3) if s not in slot_of_axis.values()]
            slot_of_axis.update(dict(zip(free_axes, free_slots)))
            perm = tuple(slot_of_axis[a] for a in range(3))
            sgn = tuple(signs[(v, a)] for a in range(3))
            out[v] = SignedPermutation(perm, sgn)
        return out


def solve_xyz(g: DiagonalEdgeGraph, eps: float = DEFAULT_EPS) -> dict | None:
    """Signed permutation per vertex curing every edge, or None.

    On success every transformed triple satisfies edge_is_stoquastic; this is
    asserted before returning.
    """
    result: dict[int, SignedPermutation] = {}
    live_edges = [(u, v, tuple(float(x) for x in c)) for u, v, c in g.edges
                  if any(abs(x) > eps for x in c)]
    for vertices in _connected_components(g.n_vertices, live_edges):
        comp_edges = [e for e in live_edges if e[0] in set(vertices)]
        problem = _ComponentProblem(vertices, comp_edges, eps)
        got = problem.search()
        if got is None:
            return None
        assignment, signs = got
        result.update(problem.build_permutations(assignment, signs))
    for u, v, c in live_edges:
        t = transform_triple(c, result[u], result[v])
        assert t is not None and edge_is_stoquastic(t, eps), \
            f"edge ({u}, {v}) not cured by the returned permutations"
    return result


def _signed_perm_svd(beta: np.ndarray, eps: float) -> tuple | None:
    """Signed-permutation SVD of a quasi-monomial matrix: beta = Pu S Pv^T.

    Returns (pu, sv_triple, pv) or None when beta is not quasi-monomial
    (some row or column has two entries above eps).
    """
    beta = np.asarray(beta, dtype=float)
    entries = [(i, j) for i in range(3) for j in range(3) if abs(beta[i, j]) > eps]
    rows = [i for i, _ in entries]
    cols = [j for _, j in entries]
    if len(set(rows)) != len(rows) or len(set(cols)) != len(cols):
        return None
    # Sort by magnitude so the singular values come out descending.
    entries.sort(key=lambda ij: -abs(beta[ij]))
    row_perm, col_perm, values, col_signs = {}, {}, [], {}
    for slot, (i, j) in enumerate(entries, start=1):
        row_perm[i + 1] = slot
        col_perm[j + 1] = slot
        values.append(abs(beta[i, j]))
        col_signs[j] = 1.0 if beta[i, j] > 0 else -1.0
    rest_rows = [i for i in (1, 2, 3) if i not in row_perm]
    rest_slots_r = [s for s in (1, 2, 3) if s not in row_perm.values()]
    row_perm.update(dict(zip(rest_rows, rest_slots_r)))
    rest_cols = [j for j in (1, 2, 3) if j not in col_perm]
    rest_slots_c = [s for s in (1, 2, 3) if s not in col_perm.values()]
    col_perm.update(dict(zip(rest_cols, rest_slots_c)))
    values += [0.0] * (3 - len(values))

    # beta = Pu diag(values) Pv^T; permutation_matrix(p)[row, slot] = 1 maps
    # slot vectors back onto the original rows/columns.
    pu = permutation_matrix(row_perm)
    pv = permutation_matrix(col_perm)
    for j, s in col_signs.items():
        pv[j, :] *= s
    return pu, tuple(values), pv


def decide_clifford_cure(g: BetaGraph, tol: Tolerances = DEFAULT_TOL,
                         eps: float = DEFAULT_EPS) -> dict | None:
    """Cure by single-qubit Cliffords only (signed permutations per vertex).

    Necessary condition: every edge weight quasi-monomial (at most one
    nonzero entry per row and column), since permutations cannot create or
    merge entries.  Then the diagonalization machinery runs with the root
    basis pinned to the standard basis; when the standard basis survives the
    subspace intersections, the propagated bases are signed permutations and
    the diagonal residual problem is solve_xyz.
    """
    for (u, v), beta in g.edges.items():
        if _signed_perm_svd(beta, eps * max(1.0, g.scale)) is None:
            return None

    def standard_basis_picker(sset):
        basis_cols = []
        for i in range(3):
            e = np.zeros(3)
            e[i] = 1.0
            hit = None
            for sub in sset:
                if np.linalg.norm(sub @ (sub.T @ e) - e) <= 1e-7:
                    hit = e
                    break
            if hit is None:
                return None
            basis_cols.append(e)
        return np.column_stack(basis_cols)

    nly = solve_nly(g, tol, root_picker=standard_basis_picker)
    if isinstance(nly, NlyFailure):
        return None
    diag = DiagonalEdgeGraph(
        g.n_vertices,
        tuple((u, v, tuple(np.diag(s))) for (u, v), s in sorted(nly.sigmas.items())))
    perms = solve_xyz(diag, eps)
    if perms is None:
        return None
    out = {}
    for v in range(g.n_vertices):
        base = nly.bases.get(v, np.eye(3))
        total = base @ perms.get(v, IDENTITY_SIGNED_PERM).as_matrix()
        sp = _matrix_to_signed_perm(total, eps)
        if sp is None:
            return None   # propagated basis was not a signed permutation
        out[v] = sp
    return out


def _matrix_to_signed_perm(m: np.ndarray, eps: float) -> SignedPermutation | None:
    perm = [0, 0, 0]
    signs = [1, 1, 1]
    for a in range(3):
        col = m[:, a]
        j = int(np.argmax(np.abs(col)))
        if abs(abs(col[j]) - 1.0) > 1e-6 or np.sum(np.abs(col) > 1e-6) != 1:
            return None
        perm[a] = j + 1
        signs[a] = 1 if col[j] > 0 else -1
    if sorted(perm) != [1, 2, 3]:
        return None
    return SignedPermutation(tuple(perm), tuple(signs))
