"""Simultaneous local diagonalization of a matrix-weighted graph.

Decides whether per-vertex orthonormal bases (equivalently orthogonal
rotations O_u) exist such that every edge weight becomes diagonal,

    O_u^T beta_uv O_v = Sigma_uv   diagonal on every edge,
    (Sigma_uv)_22 = 0              on every rank-1 edge,

a "no-lone-YY basis": the middle (Y) slot of a rank-1 edge must stay empty
because a lone YY coupling can never satisfy the stoquasticity inequality
a_XX <= -|a_YY| afterwards.

The structure of the search:

  * Within a component connected by rank>1 edges ("high-rank component") the
    basis choice is rigid: an SVD of each edge yields a transfer operator
    O_{v<-u} = V U^T carrying any compatible basis across the edge, so one
    good choice at a root vertex determines the rest.
  * The root choice is constrained by (a) eigenspace sets of beta beta^T for
    every incident edge, sharpened by a fixed-point propagation around the
    component, and (b) the eigenspaces of loop operators (transfer products
    around fundamental cycles), which must have real eigenvalues.
  * Rank-1 edges leave a per-edge axis label at each endpoint; a global
    reshuffle of whole components (a permutation applied uniformly inside
    each component) must route every label to slot 1 or 3.  Whether the two
    admissible routings can be made consistent across all rank-1 edges is a
    2-XOR-SAT instance.

Failures report a stage: candidate-basis (a lone vertex whose incident
eigenspace sets do not span R^3), loop-eigenvalue, span (root intersection
too small), label-count (three distinct labels on one component), xor-unsat.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import mat3, xorsat
from .graph import RANK1, RANK_HIGH, BetaGraph, HighRankComponent, rcc_decomposition, \
    spanning_tree_and_cycles
from .mat3 import DEFAULT_TOL, NonRealEigenvalues, Tolerances

_REORTH_EVERY = 32  # polar-correct transfer-operator products at this cadence


@dataclass(frozen=True)
class NlyFailure:
    stage: str                  # candidate-basis | loop-eigenvalue | span | label-count | xor-unsat
    detail: str
    component: int | None = None


@dataclass(frozen=True)
class NlySolution:
    bases: dict                 # vertex -> 3x3 orthogonal matrix, columns e1,e2,e3
    sigmas: dict                # (u, v), u < v -> diagonalized 3x3 (numerically clean)
    labels: dict                # edge rank labels used
    iteration_counts: tuple     # (component size, fixed-point rounds) per component
    max_residual: float = 0.0   # worst off-diagonal / lone-YY leakage observed


def permutation_matrix(perm: dict[int, int]) -> np.ndarray:
    """Matrix reordering basis columns: column s of the result is e_{perm^-1(s)}.

    ``perm`` maps axis index (1-based) to slot index, so a basis matrix B
    becomes B @ permutation_matrix(perm) with old axis a landing in slot
    perm(a).
    """
    m = np.zeros((3, 3))
    for axis, slot in perm.items():
        m[axis - 1, slot - 1] = 1.0
    return m


def transfer_operator(beta: np.ndarray, tol: Tolerances = DEFAULT_TOL,
                      scale: float | None = None) -> np.ndarray:
    """Orthogonal O_{v<-u} = V U^T from an SVD beta = U diag(s) V^T.

    Carries compatible bases across a rank>=2 edge: O_{v<-u} e_i^u = +-e_i^v.
    Unique up to a sign on the null direction (rank-2 case); any SVD works
    because degenerate nonzero blocks contribute the same rotation to U and V.
    """
    if mat3.rank_eps(beta, tol, scale) < 2:
        raise ValueError("transfer operators require rank >= 2")
    u, _, v = mat3.svd3(beta)
    return v @ u.T


def _gram_eigenspace_sets(g: BetaGraph, vertices, tol: Tolerances) -> dict:
    """S_v[0]: intersection over all incident edges of eigenspaces of beta beta^T."""
    out = {}
    for v in vertices:
        s = mat3.full_set()
        for w in g.neighbors(v):
            b = g.beta(v, w)           # rows index v's axes
            s = mat3.intersect(s, mat3.sym_eigenspaces(b @ b.T, tol), tol)
        out[v] = s
    return out


def _fixed_point_iteration(component: HighRankComponent, sets: dict, transfer: dict,
                           tol: Tolerances) -> tuple[dict, int]:
    """Propagate eigenspace sets across rank>1 edges until stationary.

    Sets only refine, so dimension signatures decide the fixed point; the
    productive-round count is bounded by 3 * component size.
    """
    adj: dict[int, list[int]] = {v: [] for v in component.vertices}
    for (u, v) in component.internal_edges:
        adj[u].append(v)
        adj[v].append(u)
    bound = 3 * len(component.vertices)
    rounds = 0
    while True:
        new = {}
        changed = False
        for v in component.vertices:
            acc = sets[v]
            for u in sorted(adj[v]):
                acc = mat3.intersect(acc, mat3.rotate_set(transfer[(v, u)], sets[u], tol), tol)
            new[v] = acc
            if mat3.dim_signature(acc) != mat3.dim_signature(sets[v]):
                changed = True
        if not changed:
            return sets, rounds
        sets = new
        rounds += 1
        if rounds > bound:
            raise AssertionError(
                f"fixed-point iteration exceeded its bound of {bound} rounds")


def _loop_operator(cycle: tuple[int, ...], transfer: dict) -> np.ndarray:
    """Product of transfer operators around a closed vertex path."""
    op = np.eye(3)
    steps = 0
    for a, b in zip(cycle, cycle[1:]):
        op = transfer[(b, a)] @ op
        steps += 1
        if steps % _REORTH_EVERY == 0:
            op = mat3.reorthonormalize(op)
    return mat3.reorthonormalize(op)


def candidate_basis_general(g: BetaGraph, labels: dict,
                            components: list[HighRankComponent] | None = None,
                            tol: Tolerances = DEFAULT_TOL,
                            root_picker=None):
    """Per-vertex bases compatible with every edge, or an NlyFailure.

    ``root_picker(subspace_set) -> 3x3 basis or None`` overrides the root
    basis choice (used by the Clifford-only decision, which insists on the
    standard basis); the default is the deterministic choose_basis.

    Returns ``(bases, iteration_counts)`` on success.
    """
    if components is None:
        components = rcc_decomposition(g, labels)
    bases: dict[int, np.ndarray] = {}
    iteration_counts = []
    for comp in components:
        start_sets = _gram_eigenspace_sets(g, comp.vertices, tol)
        if not comp.internal_edges:
            (v,) = comp.vertices  # no rank>1 edges inside => single vertex
            s = start_sets[v]
            if not mat3.spans_r3(s):
                return NlyFailure("candidate-basis",
                                  f"eigenspace intersection at vertex {v} spans "
                                  f"{mat3.total_dimension(s)} < 3 dimensions", comp.ident), None
            basis = _pick_root_basis(s, root_picker)
            if basis is None:
                return NlyFailure("span", f"no admissible basis at vertex {v}", comp.ident), None
            bases[v] = basis
            iteration_counts.append((1, 0))
            continue

        transfer = {}
        for (u, v) in comp.internal_edges:
            op = transfer_operator(g.beta(u, v), tol, scale=g.scale)
            transfer[(v, u)] = op
            transfer[(u, v)] = op.T
        sets, rounds = _fixed_point_iteration(comp, start_sets, transfer, tol)
        iteration_counts.append((len(comp.vertices), rounds))

        cycle_basis = spanning_tree_and_cycles(comp)
        root = cycle_basis.root
        s_star = sets[root]
        for cycle in cycle_basis.cycles:
            loop = _loop_operator(cycle, transfer)
            try:
                loop_eigenspaces = mat3.ortho_eigen(loop, tol)
            except NonRealEigenvalues:
                return NlyFailure("loop-eigenvalue",
                                  f"loop through {cycle} has non-real eigenvalues",
                                  comp.ident), None
            s_star = mat3.intersect(s_star, loop_eigenspaces, tol)
        if not mat3.spans_r3(s_star):
            return NlyFailure("span",
                              f"root intersection at vertex {root} spans "
                              f"{mat3.total_dimension(s_star)} < 3 dimensions", comp.ident), None
        root_basis = _pick_root_basis(s_star, root_picker)
        if root_basis is None:
            return NlyFailure("span", f"no admissible basis at root {root}", comp.ident), None

        bases[root] = root_basis
        # Propagate down the BFS tree: b_v = O_{v<-u} b_u.
        children: dict[int, list[int]] = {v: [] for v in comp.vertices}
        for v, p in cycle_basis.parent.items():
            if v != root:
                children[p].append(v)
        stack = [root]
        while stack:
            u = stack.pop()
            for v in sorted(children[u]):
                bases[v] = transfer[(v, u)] @ bases[u]
                stack.append(v)
    return bases, tuple(iteration_counts)


def _pick_root_basis(s, root_picker):
    if root_picker is not None:
        return root_picker(s)
    return mat3.choose_basis(s)


def bilabel_rank1_edge(beta: np.ndarray, basis_u: np.ndarray, basis_v: np.ndarray,
                       tol: Tolerances = DEFAULT_TOL, scale: float | None = None) -> tuple[int, int]:
    """(i, j): 1-based indices of the endpoint basis vectors outside the null space.

    For a rank-1 edge exactly one column of each compatible endpoint basis
    survives multiplication by the weight; anything else means the bases were
    not compatible or the tolerance collapsed.
    """
    ref = scale if scale is not None else float(np.linalg.norm(beta, 2))
    thresh = max(tol.eps_rank * ref, 1e-300)
    left = np.linalg.norm(beta.T @ basis_u, axis=0)   # action on u's columns
    right = np.linalg.norm(beta @ basis_v, axis=0)
    live_left = np.nonzero(left > thresh)[0]
    live_right = np.nonzero(right > thresh)[0]
    if len(live_left) != 1 or len(live_right) != 1:
        raise ValueError(
            f"rank-1 bilabel is not unique (left {left}, right {right}); "
            "tolerance breakdown or incompatible bases")
    return int(live_left[0]) + 1, int(live_right[0]) + 1


def _label_permutation_pair(sorted_labels: list[int]) -> tuple[dict, dict]:
    """Permutation pair routing the (<=2) labels to slots {1, 3}.

    pi^0 sends the first label to 1 (and the second to 3); pi^1 swaps the
    images.  Unused axes fill the remaining slots in ascending order, which
    pins the free choice the construction leaves open.
    """
    def build(images: list[int]) -> dict:
        perm = {}
        for axis, slot in zip(sorted_labels, images):
            perm[axis] = slot
        rest_axes = [a for a in (1, 2, 3) if a not in perm]
        rest_slots = [s for s in (1, 2, 3) if s not in perm.values()]
        perm.update(dict(zip(rest_axes, rest_slots)))
        return perm

    if not sorted_labels:
        return build([]), {1: 3, 2: 2, 3: 1}
    if len(sorted_labels) == 1:
        return build([1]), build([3])
    return build([1, 3]), build([3, 1])


def permutations_general(g: BetaGraph, bases: dict, labels: dict,
                         components: list[HighRankComponent],
                         tol: Tolerances = DEFAULT_TOL):
    """Uniform per-component axis permutations routing rank-1 labels to {1, 3}.

    Builds the label set of each high-rank component, the two admissible
    permutations per component, and one XOR clause per rank-1 edge requiring
    the endpoint routings to meet at the same slot; solves with 2-XOR-SAT.
    Returns ``{vertex: perm dict}`` or an NlyFailure.
    """
    comp_of = {}
    for comp in components:
        for v in comp.vertices:
            comp_of[v] = comp.ident

    edge_labels: dict[tuple[int, int], tuple[int, int]] = {}
    comp_label_sets: dict[int, set] = {comp.ident: set() for comp in components}
    for (u, v), lab in sorted(labels.items()):
        if lab != RANK1:
            continue
        i, j = bilabel_rank1_edge(g.beta(u, v), bases[u], bases[v], tol, scale=g.scale)
        edge_labels[(u, v)] = (i, j)
        comp_label_sets[comp_of[u]].add(i)
        comp_label_sets[comp_of[v]].add(j)

    perm_pairs: dict[int, tuple[dict, dict]] = {}
    for comp in components:
        lset = sorted(comp_label_sets[comp.ident])
        if len(lset) == 3:
            return NlyFailure("label-count",
                              f"component {comp.ident} sees all three labels {lset}",
                              comp.ident)
        perm_pairs[comp.ident] = _label_permutation_pair(lset)

    clauses = []
    for (u, v), (i, j) in sorted(edge_labels.items()):
        cu, cv = comp_of[u], comp_of[v]
        # Need pi_u^{x_u}(i) == pi_v^{x_v}(j); flipping x swaps images 1<->3.
        parity = 0 if perm_pairs[cu][0][i] == perm_pairs[cv][0][j] else 1
        clauses.append(xorsat.XorClause(cu, cv, parity))
    assignment = xorsat.solve(xorsat.XorSystem(len(components), tuple(clauses)))
    if assignment is None:
        return NlyFailure("xor-unsat", "rank-1 label routing has no consistent orientation")
    return {v: perm_pairs[comp_of[v]][assignment[comp_of[v]]] for v in bases}


def candidate_basis_rank1(g: BetaGraph, tol: Tolerances = DEFAULT_TOL):
    """Specialized candidate-basis search for graphs with only rank-1 edges.

    Per vertex, intersect the eigenspace sets of beta beta^T over incident
    edges and pick a deterministic basis; None when some intersection fails
    to span R^3.
    """
    for (u, v) in g.edges:
        if mat3.rank_eps(g.beta(u, v), tol, scale=g.scale) != 1:
            raise ValueError(f"edge ({u}, {v}) is not rank-1")
    sets = _gram_eigenspace_sets(g, range(g.n_vertices), tol)
    bases = {}
    for v in range(g.n_vertices):
        if not mat3.spans_r3(sets[v]):
            return None
        bases[v] = mat3.choose_basis(sets[v])
    return bases


def permutations_rank1(g: BetaGraph, bases: dict, tol: Tolerances = DEFAULT_TOL):
    """Per-vertex permutation search for all-rank-1 graphs (vertices as sites)."""
    labels = {key: RANK1 for key in g.edges}
    singletons = [HighRankComponent(v, (v,), ()) for v in range(g.n_vertices)]
    return permutations_general(g, bases, labels, singletons, tol)


def apply_basis_permutations(bases: dict, perms: dict) -> dict:
    """Reorder basis columns: old axis a moves to slot perm(a)."""
    return {v: bases[v] @ permutation_matrix(perms[v]) for v in bases}


def solve_nly(g: BetaGraph, tol: Tolerances = DEFAULT_TOL, labels: dict | None = None,
              root_picker=None):
    """Full decision: NlySolution with per-vertex rotations, or NlyFailure.

    On success every returned Sigma_uv is diagonal and every rank-1 edge has
    an empty middle slot; both are re-verified numerically before returning.
    """
    if labels is None:
        from .graph import classify_edges
        g, labels = classify_edges(g, tol)
    components = rcc_decomposition(g, labels)
    got = candidate_basis_general(g, labels, components, tol, root_picker=root_picker)
    failure_or_bases, iteration_counts = got
    if isinstance(failure_or_bases, NlyFailure):
        return failure_or_bases
    perms = permutations_general(g, failure_or_bases, labels, components, tol)
    if isinstance(perms, NlyFailure):
        return perms
    bases = apply_basis_permutations(failure_or_bases, perms)

    sigma_tol = 1e-7 * max(1.0, g.scale)
    sigmas = {}
    worst = 0.0
    for (u, v), beta in g.edges.items():
        sigma = bases[u].T @ beta @ bases[v]
        off = sigma - np.diag(np.diag(sigma))
        leak = float(np.max(np.abs(off)))
        if labels[(u, v)] == RANK1:
            leak = max(leak, abs(float(sigma[1, 1])))
        worst = max(worst, leak)
        if leak > sigma_tol:
            raise AssertionError(
                f"edge ({u}, {v}) failed diagonalization (residual {leak:.3g}); "
                "this indicates a solver bug, not an unsatisfiable instance")
        clean = np.diag(np.diag(sigma)).copy()
        if labels[(u, v)] == RANK1:
            clean[1, 1] = 0.0
        sigmas[(u, v)] = clean
    return NlySolution(bases, sigmas, labels, iteration_counts, worst)
