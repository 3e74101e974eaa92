"""Independent brute-force ground truth for the coefficient-level machinery.

Everything here works on dense 2^n x 2^n matrices or raw enumeration, so it
shares no code path with the polynomial algorithms it cross-checks:

  * dense Kronecker construction of a Hamiltonian matrix;
  * the matrix-level symmetric-Z test (real, off-diagonal entries <= 0);
  * exhaustive search over per-qubit single-qubit Cliffords, enumerated as
    the 24 determinant-+1 signed permutation matrices acting on beta weights;
  * seeded random-rotation refutation sampling: the minimum stoquasticity
    violation over uniform random per-qubit rotations, as statistical
    evidence for a "not curable" verdict.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from .pauli import DEFAULT_EPS, Axis, Hamiltonian, assemble_hamiltonian, extract_graph, \
    is_symmetric_z

DENSE_CAP = 14

_PAULI = {
    0: np.eye(2, dtype=complex),
    Axis.X: np.array([[0, 1], [1, 0]], dtype=complex),
    Axis.Y: np.array([[0, -1j], [1j, 0]], dtype=complex),
    Axis.Z: np.array([[1, 0], [0, -1]], dtype=complex),
}


def pauli_string_matrix(n_qubits: int, support) -> np.ndarray:
    """Dense matrix of one Pauli string on n qubits."""
    factors = {q: a for q, a in support}
    m = np.array([[1.0 + 0j]])
    for q in range(n_qubits):
        m = np.kron(m, _PAULI[factors.get(q, 0)])
    return m


def dense_matrix(h: Hamiltonian, cap: int = DENSE_CAP) -> np.ndarray:
    """Sum of coefficient-weighted Pauli Kronecker products (n <= cap)."""
    if h.n_qubits > cap:
        raise ValueError(f"dense construction capped at {cap} qubits, got {h.n_qubits}")
    dim = 2 ** h.n_qubits
    m = np.zeros((dim, dim), dtype=complex)
    for t in h.terms:
        m += t.coefficient * pauli_string_matrix(h.n_qubits, t.support)
    if h.offset:
        m += h.offset * np.eye(dim)
    return m


def is_symmetric_z_dense(m: np.ndarray, eps: float = DEFAULT_EPS) -> bool:
    """Matrix-level test: |imag| <= eps everywhere, off-diagonal real <= eps."""
    if np.max(np.abs(m.imag)) > eps:
        return False
    off = m.real - np.diag(np.diag(m.real))
    return bool(np.max(off) <= eps)


def violation_score(m: np.ndarray) -> float:
    """max(positive off-diagonal real part, |imag|): 0 iff symmetric Z-matrix."""
    imag = float(np.max(np.abs(m.imag)))
    off = m.real.copy()
    np.fill_diagonal(off, -np.inf)
    pos = float(max(np.max(off), 0.0))
    return max(imag, pos)


def signed_permutations(proper_only: bool = False) -> list[np.ndarray]:
    """The 48 signed permutation matrices (24 with determinant +1).

    The determinant-+1 half is exactly the adjoint action of the single-qubit
    Clifford group on Pauli coefficient vectors.
    """
    mats = []
    for perm in itertools.permutations(range(3)):
        base = np.zeros((3, 3))
        for a, p in enumerate(perm):
            base[p, a] = 1.0
        for signs in itertools.product((1.0, -1.0), repeat=3):
            m = base * np.array(signs)
            if proper_only and np.linalg.det(m) < 0:
                continue
            mats.append(m)
    return mats


def rotate_coefficients(betas: dict, fields: np.ndarray, rotations: dict) -> tuple[dict, np.ndarray]:
    """Apply per-qubit rotations at the coefficient level.

    beta_uv -> O_u^T beta_uv O_v and field_u -> O_u^T field_u, which matches
    conjugating the dense matrix by the corresponding single-qubit unitaries.
    """
    n = fields.shape[0]
    eye = np.eye(3)
    new_betas = {}
    for (u, v), beta in betas.items():
        ou = rotations.get(u, eye)
        ov = rotations.get(v, eye)
        new_betas[(u, v)] = ou.T @ beta @ ov
    new_fields = np.vstack([rotations.get(q, eye).T @ fields[q] for q in range(n)])
    return new_betas, new_fields


def rotate_hamiltonian(h: Hamiltonian, rotations: dict) -> Hamiltonian:
    """Coefficient-level conjugation of a two-local Hamiltonian."""
    betas, fields = extract_graph(h)
    nb, nf = rotate_coefficients(betas, fields, rotations)
    return assemble_hamiltonian(h.n_qubits, nb, nf, h.offset)


def clifford_cure_search(h: Hamiltonian, cap: int = 6, eps: float = DEFAULT_EPS):
    """Exhaustive per-qubit Clifford search: rotation dict or None.

    Depth-first over the 24 proper signed permutations per qubit, pruning on
    the reality and edge conditions that involve only assigned qubits; the
    full coefficient-level check runs at every leaf.
    """
    if h.n_qubits > cap:
        raise ValueError(f"clifford search capped at {cap} qubits, got {h.n_qubits}")
    betas, fields = extract_graph(h)
    cliffords = signed_permutations(proper_only=True)
    n = h.n_qubits
    pairs_by_last = {q: [] for q in range(n)}
    for (u, v) in betas:
        pairs_by_last[max(u, v)].append((u, v))

    assigned: dict[int, np.ndarray] = {}

    def prune_ok(q: int) -> bool:
        # Rotated field on q must keep the Y component ~0 (reality).
        f = assigned[q].T @ fields[q]
        if abs(f[1]) > eps:
            return False
        for (u, v) in pairs_by_last[q]:
            b = assigned[u].T @ betas[(u, v)] @ assigned[v]
            # Reality: no single-Y entries; edge condition on (XX, YY).
            if max(abs(b[0, 1]), abs(b[1, 0]), abs(b[1, 2]), abs(b[2, 1])) > eps:
                return False
            if b[0, 0] > -abs(b[1, 1]) + eps:
                return False
        return True

    def dfs(q: int):
        if q == n:
            cand = {i: assigned[i] for i in range(n)}
            if is_symmetric_z(rotate_hamiltonian(h, cand), eps):
                return cand
            return None
        for c in cliffords:
            assigned[q] = c
            if prune_ok(q):
                got = dfs(q + 1)
                if got is not None:
                    return got
        del assigned[q]
        return None

    return dfs(0)


def _quaternions_to_rotations(q: np.ndarray) -> np.ndarray:
    """Batch of unit quaternions (m, 4) -> rotation matrices (m, 3, 3)."""
    w, x, y, z = q[:, 0], q[:, 1], q[:, 2], q[:, 3]
    m = np.empty((q.shape[0], 3, 3))
    m[:, 0, 0] = 1 - 2 * (y * y + z * z)
    m[:, 0, 1] = 2 * (x * y - z * w)
    m[:, 0, 2] = 2 * (x * z + y * w)
    m[:, 1, 0] = 2 * (x * y + z * w)
    m[:, 1, 1] = 1 - 2 * (x * x + z * z)
    m[:, 1, 2] = 2 * (y * z - x * w)
    m[:, 2, 0] = 2 * (x * z - y * w)
    m[:, 2, 1] = 2 * (y * z + x * w)
    m[:, 2, 2] = 1 - 2 * (x * x + y * y)
    return m


def random_rotation_refute(h: Hamiltonian, samples: int, rng_seed: int,
                           extra_rotations: list | None = None,
                           cap: int = DENSE_CAP, chunk: int = 2048) -> float:
    """Minimum dense violation score over seeded random per-qubit rotations.

    Uniform SO(3) sampling via random unit quaternions.  ``extra_rotations``
    (a list of per-qubit rotation dicts, e.g. a certificate) is scored along
    with the samples.  Returns +inf when there is nothing to score.
    """
    if h.n_qubits > cap:
        raise ValueError(f"dense refutation capped at {cap} qubits")
    n = h.n_qubits
    betas, fields = extract_graph(h)
    supports = []
    for (u, v) in sorted(betas):
        for k in range(3):
            for l in range(3):
                supports.append(((u, Axis(k + 1)), (v, Axis(l + 1))))
    for q in range(n):
        for k in range(3):
            supports.append(((q, Axis(k + 1)),))
    if not supports:
        return 0.0 if samples or extra_rotations else math.inf
    dim = 2 ** n
    mats = np.stack([pauli_string_matrix(n, s).reshape(-1) for s in supports])  # (K, dim^2)
    offdiag = ~np.eye(dim, dtype=bool).reshape(-1)

    def score_batch(rot: np.ndarray) -> float:
        # rot: (m, n, 3, 3). Coefficient vectors per sample, then dense batch.
        m = rot.shape[0]
        coeffs = np.empty((m, len(mats)))
        idx = 0
        for (u, v) in sorted(betas):
            block = np.einsum("mba,bc,mcd->mad", rot[:, u], betas[(u, v)], rot[:, v])
            coeffs[:, idx:idx + 9] = block.reshape(m, 9)
            idx += 9
        fld = np.einsum("mqba,qb->mqa", rot, fields).reshape(m, 3 * n)
        coeffs[:, idx:] = fld
        dense = coeffs @ mats  # (m, dim^2) complex
        imag = np.max(np.abs(dense.imag), axis=1)
        pos = np.max(np.where(offdiag, dense.real, -np.inf), axis=1)
        return float(np.min(np.maximum(imag, np.maximum(pos, 0.0))))

    best = math.inf
    if extra_rotations:
        eye = np.eye(3)
        stack = np.stack([
            np.stack([np.asarray(rots.get(q, eye), dtype=float) for q in range(n)])
            for rots in extra_rotations])
        best = min(best, score_batch(stack))
    rng = np.random.default_rng(rng_seed)
    remaining = samples
    while remaining > 0:
        m = min(chunk, remaining)
        quat = rng.normal(size=(m * n, 4))
        quat /= np.linalg.norm(quat, axis=1, keepdims=True)
        rot = _quaternions_to_rotations(quat).reshape(m, n, 3, 3)
        best = min(best, score_batch(rot))
        remaining -= m
    return best
