"""Fixed-shape 3x3 linear algebra and the orthogonal-subspace-set calculus.

A *subspace set* is a list of mutually orthogonal subspaces of R^3, each
stored as a 3xd array with orthonormal columns (1 <= d <= 3, total dimension
<= 3).  The empty list is the valid degenerate "nothing survives" set.  The
calculus we need on these sets: entrywise intersection, rotation by an
orthogonal matrix, span test, and deterministic extraction of an orthonormal
basis compatible with the set.

All comparisons go through a :class:`Tolerances` bundle.  The zero/rank
threshold is relative to a reference scale (the largest singular value in the
graph under analysis); the defaults leave two orders of headroom over
double-precision SVD error.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SubspaceSet = list  # list[np.ndarray] with shape (3, d), orthonormal columns


@dataclass(frozen=True)
class Tolerances:
    """Comparison thresholds for the 3x3 pipeline.

    eps_rank:    singular values below eps_rank * scale count as zero
    eps_cluster: eigenvalues within eps_cluster * max|eigenvalue| are merged
    eps_orth:    orthonormality / principal-angle threshold
    eps_imag:    distance of a loop-operator eigenvalue pair from the real axis
    """

    eps_rank: float = 1e-8
    eps_cluster: float = 1e-7
    eps_orth: float = 1e-9
    eps_imag: float = 1e-7

    def __post_init__(self):
        for name in ("eps_rank", "eps_cluster", "eps_orth", "eps_imag"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


DEFAULT_TOL = Tolerances()


class NonRealEigenvalues(Exception):
    """An orthogonal matrix turned out to have a genuinely complex pair."""


def svd3(m: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """SVD of a 3x3 matrix: m = U diag(s) V^T, s descending and nonnegative."""
    u, s, vt = np.linalg.svd(np.asarray(m, dtype=float))
    return u, s, vt.T


def rank_eps(m: np.ndarray, tol: Tolerances = DEFAULT_TOL, scale: float | None = None) -> int:
    """Numerical rank: singular values above eps_rank relative to `scale`.

    `scale` defaults to the largest singular value of m itself; graph-level
    callers pass the largest singular value across all edges.
    """
    s = np.linalg.svd(np.asarray(m, dtype=float), compute_uv=False)
    ref = s[0] if scale is None else scale
    if ref <= 0.0:
        return 0
    return int(np.sum(s > tol.eps_rank * ref))


def is_orthogonal(o: np.ndarray, eps: float = 1e-9) -> bool:
    return bool(np.max(np.abs(o.T @ o - np.eye(3))) <= max(eps, 1e-12) * 10)


def require_orthogonal(o: np.ndarray, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    o = np.asarray(o, dtype=float)
    if not is_orthogonal(o, tol.eps_orth):
        raise ValueError("matrix is not orthogonal at tolerance")
    return o


def reorthonormalize(o: np.ndarray) -> np.ndarray:
    """Polar correction: nearest orthogonal matrix (controls product drift)."""
    u, _, vt = np.linalg.svd(o)
    return u @ vt


def full_set() -> SubspaceSet:
    """The identity element {R^3}."""
    return [np.eye(3)]


def dim_signature(s: SubspaceSet) -> tuple[int, ...]:
    return tuple(sorted((sub.shape[1] for sub in s), reverse=True))


def total_dimension(s: SubspaceSet) -> int:
    return sum(sub.shape[1] for sub in s)


def spans_r3(s: SubspaceSet) -> bool:
    """True iff the mutually orthogonal subspaces jointly span R^3."""
    return total_dimension(s) == 3


def sym_eigenspaces(m: np.ndarray, tol: Tolerances = DEFAULT_TOL) -> SubspaceSet:
    """Maximal eigenspaces of a symmetric 3x3 matrix, clustered at tolerance.

    Clustering is transitive (chain clustering): eigenvalues closer than
    eps_cluster * max|eigenvalue| to their neighbor land in one subspace.
    Total dimension of the result is always 3.
    """
    m = np.asarray(m, dtype=float)
    if np.max(np.abs(m - m.T)) > 10 * tol.eps_orth * max(1.0, np.max(np.abs(m))):
        raise ValueError("matrix is not symmetric at tolerance")
    w, v = np.linalg.eigh((m + m.T) / 2.0)
    ref = max(np.max(np.abs(w)), 1e-300)
    groups: list[list[int]] = [[0]]
    for i in range(1, 3):
        if w[i] - w[i - 1] <= tol.eps_cluster * ref:
            groups[-1].append(i)
        else:
            groups.append([i])
    return [np.ascontiguousarray(v[:, g]) for g in groups]


def intersect_pair(a: np.ndarray, b: np.ndarray, tol: Tolerances = DEFAULT_TOL) -> np.ndarray | None:
    """Intersection of two subspaces via principal angles; None when trivial.

    Directions whose principal-angle cosine is >= 1 - eps_orth are treated as
    common to both subspaces.
    """
    m = a.T @ b
    u, s, _ = np.linalg.svd(m)
    k = int(np.sum(s >= 1.0 - tol.eps_orth))
    if k == 0:
        return None
    w = a @ u[:, :k]
    # Gram-Schmidt cleanup keeps downstream orthonormality checks honest.
    q, _ = np.linalg.qr(w)
    return q


def intersect(s1: SubspaceSet, s2: SubspaceSet, tol: Tolerances = DEFAULT_TOL) -> SubspaceSet:
    """Entrywise intersection of two subspace sets, zero-dim results dropped."""
    out: SubspaceSet = []
    for a in s1:
        for b in s2:
            w = intersect_pair(a, b, tol)
            if w is not None:
                out.append(w)
    return out


def rotate_set(o: np.ndarray, s: SubspaceSet, tol: Tolerances = DEFAULT_TOL) -> SubspaceSet:
    """Apply an orthogonal matrix to every subspace in the set."""
    o = require_orthogonal(o, tol)
    return [o @ sub for sub in s]


def ortho_eigen(o: np.ndarray, tol: Tolerances = DEFAULT_TOL) -> SubspaceSet:
    """Real eigenspace decomposition of an orthogonal 3x3 matrix.

    An orthogonal 3x3 matrix has eigenvalues drawn from {+1, -1} plus at most
    one conjugate pair e^{+-i theta}.  Returns the set of +-1 eigenspaces when
    the pair is within eps_imag of the real axis (theta snapped to 0 or pi);
    raises :class:`NonRealEigenvalues` otherwise.
    """
    o = require_orthogonal(o, tol)
    out: SubspaceSet = []
    for sign in (1.0, -1.0):
        # Null space of (o - sign*I) at tolerance: a pair e^{+-i theta} sits at
        # distance 2|sin(theta/2)| from +1 and 2|cos(theta/2)| from -1, so a
        # near-real pair contributes two near-zero singular values to one side.
        _, s, vt = np.linalg.svd(o - sign * np.eye(3))
        k = int(np.sum(s <= tol.eps_imag))
        if k:
            out.append(np.ascontiguousarray(vt[3 - k:].T))
    if total_dimension(out) != 3:
        raise NonRealEigenvalues("orthogonal matrix has a non-real eigenvalue pair")
    return out


def _canonical_subspace_basis(sub: np.ndarray) -> list[np.ndarray]:
    """Deterministic orthonormal basis of one subspace.

    Seeded by the coordinate axis with the largest projection onto the
    subspace; signs fixed so the largest-magnitude component is positive.
    """
    d = sub.shape[1]
    proj = sub @ sub.T
    residual = proj.copy()
    vectors: list[np.ndarray] = []
    for _ in range(d):
        norms = np.linalg.norm(residual, axis=0)
        k = int(np.argmax(np.round(norms, 12)))
        v = residual[:, k] / norms[k]
        j = int(np.argmax(np.round(np.abs(v), 12)))
        if v[j] < 0:
            v = -v
        vectors.append(v)
        residual = residual - np.outer(v, v @ proj)
    return vectors


def choose_basis(s: SubspaceSet) -> np.ndarray:
    """Deterministic orthonormal triple compatible with a spanning set.

    Each returned column lies in exactly one subspace of the set.  Columns are
    ordered by descending source-subspace dimension, then descending
    lexicographic order of the (rounded) vectors, so repeated runs agree.
    """
    if not spans_r3(s):
        raise ValueError("subspace set does not span R^3")
    tagged: list[tuple[int, np.ndarray]] = []
    for sub in s:
        for v in _canonical_subspace_basis(sub):
            tagged.append((sub.shape[1], v))
    tagged.sort(key=lambda t: (-t[0], tuple(np.round(-t[1], 9))))
    return np.column_stack([v for _, v in tagged])


def validate_subspace_set(s: SubspaceSet, tol: Tolerances = DEFAULT_TOL) -> None:
    """Assert the structural invariants (orthonormal, mutually orthogonal)."""
    lim = 100 * tol.eps_orth
    for sub in s:
        if np.max(np.abs(sub.T @ sub - np.eye(sub.shape[1]))) > lim:
            raise AssertionError("subspace columns are not orthonormal")
    for i, a in enumerate(s):
        for b in s[i + 1:]:
            if np.max(np.abs(a.T @ b)) > lim:
                raise AssertionError("subspaces are not mutually orthogonal")
    if total_dimension(s) > 3:
        raise AssertionError("total dimension exceeds 3")
