"""End-to-end curing decision for exactly two-local Hamiltonians.

decide() chains the stages: a direct stoquasticity check, simultaneous
diagonalization of the interaction graph (solve_nly), and the signed
permutation stage on the diagonalized graph (solve_xyz).  Success composes
the two per-qubit transformations into a curing certificate: one orthogonal
3x3 rotation O_u per qubit acting on coefficients as

    beta_uv -> O_u^T beta_uv O_v,      field_u -> O_u^T field_u,

which corresponds to conjugating the dense matrix by single-qubit unitaries.
Improper certificates are normalized to rotations by flipping the Y column
(sign flips on basis vectors never affect the curing conditions, and the Y
column's sign only touches coefficients that sit inside absolute values).

Certificates are verified exactly: coefficient-level stoquasticity always,
plus an independent dense-matrix check at small qubit counts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import oracle
from .graph import BetaGraph, classify_edges
from .mat3 import DEFAULT_TOL, Tolerances, require_orthogonal
from .nly import NlyFailure, solve_nly
from .pauli import DEFAULT_EPS, Hamiltonian, check_symmetric_z, is_exactly_two_local, \
    is_symmetric_z
from .xyz import DiagonalEdgeGraph, IDENTITY_SIGNED_PERM, solve_xyz

VERIFY_CAP = 14          # coefficient-level verification precondition
DENSE_VERIFY_CAP = 10    # dense cross-check runs up to here


class PreconditionError(ValueError):
    """Input violates a documented precondition (e.g. 1-local terms present)."""


@dataclass(frozen=True)
class CuringCertificate:
    """Per-qubit orthogonal rotations claimed to sign-cure a Hamiltonian."""

    n_qubits: int
    rotations: tuple  # one 3x3 rotation per qubit

    def __post_init__(self):
        if len(self.rotations) != self.n_qubits:
            raise ValueError("one rotation per qubit required")
        for o in self.rotations:
            require_orthogonal(np.asarray(o, dtype=float))

    def rotation_dict(self) -> dict:
        return {q: np.asarray(self.rotations[q], dtype=float) for q in range(self.n_qubits)}

    @classmethod
    def identity(cls, n_qubits: int) -> "CuringCertificate":
        return cls(n_qubits, tuple(np.eye(3) for _ in range(n_qubits)))


@dataclass(frozen=True)
class Decision:
    verdict: str                     # "curable" | "not-curable" | "already-stoquastic"
    certificate: CuringCertificate | None = None
    stage: str | None = None         # failing stage for not-curable
    detail: str = ""
    borderline: bool = False
    iteration_counts: tuple = ()     # (component size, fixed-point rounds) pairs

    @property
    def curable(self) -> bool:
        return self.verdict in ("curable", "already-stoquastic")


def rotation_to_unitary(o: np.ndarray, tol: Tolerances = DEFAULT_TOL) -> tuple[np.ndarray, float]:
    """Axis-angle (unit axis, angle in [0, pi]) of the SU(2) element whose
    adjoint action is the proper rotation ``o``.

    Improper inputs must be sign-fixed by the caller first (flipping one
    basis vector is always free); they raise here.
    """
    o = require_orthogonal(o, tol)
    if np.linalg.det(o) < 0:
        raise ValueError("improper rotation: flip one column sign before converting")
    cos_theta = (np.trace(o) - 1.0) / 2.0
    theta = math.acos(min(1.0, max(-1.0, cos_theta)))
    if theta < 1e-12:
        return np.array([0.0, 0.0, 1.0]), 0.0
    if math.pi - theta < 1e-6:
        # Axis from the projector (o + I)/2 onto the rotation axis.
        p = (o + np.eye(3)) / 2.0
        k = int(np.argmax(np.diag(p)))
        axis = p[:, k] / np.linalg.norm(p[:, k])
    else:
        axis = np.array([o[2, 1] - o[1, 2], o[0, 2] - o[2, 0], o[1, 0] - o[0, 1]])
        axis = axis / (2.0 * math.sin(theta))
    j = int(np.argmax(np.abs(axis)))
    if axis[j] < 0:
        axis = -axis
    return axis, theta


def su2_matrix(axis: np.ndarray, angle: float) -> np.ndarray:
    """exp(-i angle (axis . sigma) / 2): adjoint action = rotation by angle about axis."""
    x, y, z = axis
    sigma = np.array([[z, x - 1j * y], [x + 1j * y, -z]])
    return math.cos(angle / 2) * np.eye(2) - 1j * math.sin(angle / 2) * sigma


def unitary_with_coefficient_action(o: np.ndarray) -> np.ndarray:
    """2x2 unitary whose conjugation sends coefficient vectors a -> o^T a.

    This is the unitary that physically applies a certificate rotation: the
    adjoint representation of the returned U equals o^T.
    """
    axis, angle = rotation_to_unitary(np.asarray(o, dtype=float).T)
    return su2_matrix(axis, angle)


def properize(o: np.ndarray) -> np.ndarray:
    """Flip the Y column when det < 0 (free with respect to curing conditions)."""
    o = np.array(o, dtype=float)
    if np.linalg.det(o) < 0:
        o[:, 1] = -o[:, 1]
    return o


def verify_certificate(h: Hamiltonian, cert: CuringCertificate, eps: float = DEFAULT_EPS,
                       dense_cap: int = DENSE_VERIFY_CAP) -> bool:
    """Exact check that a certificate cures: coefficient level always, dense
    matrix additionally up to ``dense_cap`` qubits."""
    if h.n_qubits != cert.n_qubits:
        raise ValueError("certificate qubit count mismatch")
    if h.n_qubits > VERIFY_CAP:
        raise PreconditionError(f"verification capped at {VERIFY_CAP} qubits")
    rotated = oracle.rotate_hamiltonian(h, cert.rotation_dict())
    if not is_symmetric_z(rotated, eps):
        return False
    if h.n_qubits <= dense_cap:
        us = [oracle.np.asarray(unitary_with_coefficient_action(o))
              for o in cert.rotations]
        u_total = np.array([[1.0 + 0j]])
        for u in us:
            u_total = np.kron(u_total, u)
        dense = u_total @ oracle.dense_matrix(h) @ u_total.conj().T
        if not oracle.is_symmetric_z_dense(dense, max(eps, 1e-9)):
            return False
    return True


def decide(h: Hamiltonian, tol: Tolerances = DEFAULT_TOL, eps: float = DEFAULT_EPS) -> Decision:
    """Full curing decision for an exactly two-local Hamiltonian."""
    if not is_exactly_two_local(h):
        raise PreconditionError(
            "decide() requires an exactly two-local Hamiltonian (no 1-local terms); "
            "with local fields the problem is a brute-force question, see the "
            "hardness tooling")
    initial = check_symmetric_z(h, eps)
    if initial.ok:
        return Decision("already-stoquastic", CuringCertificate.identity(h.n_qubits),
                        borderline=initial.borderline)

    from .pauli import extract_graph
    betas, _ = extract_graph(h)
    g = BetaGraph(h.n_qubits, {k: np.array(v) for k, v in betas.items()})
    g, labels = classify_edges(g, tol)
    nly = solve_nly(g, tol, labels=labels)
    if isinstance(nly, NlyFailure):
        return Decision("not-curable", stage=nly.stage, detail=nly.detail)

    diag = DiagonalEdgeGraph(
        g.n_vertices,
        tuple((u, v, tuple(np.diag(s))) for (u, v), s in sorted(nly.sigmas.items())))
    perms = solve_xyz(diag, eps)
    if perms is None:
        return Decision("not-curable", stage="xyz",
                        detail="diagonalized graph admits no signed-permutation cure",
                        iteration_counts=nly.iteration_counts)

    rotations = []
    for q in range(h.n_qubits):
        base = nly.bases.get(q, np.eye(3))
        rotations.append(properize(base @ perms.get(q, IDENTITY_SIGNED_PERM).as_matrix()))
    cert = CuringCertificate(h.n_qubits, tuple(rotations))
    final = check_symmetric_z(oracle.rotate_hamiltonian(h, cert.rotation_dict()), eps)
    if not final.ok:
        raise AssertionError(
            "internal error: certificate failed its own verification: "
            + "; ".join(v.describe() for v in final.violations))
    return Decision("curable", cert, borderline=final.borderline,
                    iteration_counts=nly.iteration_counts)


def certificate_to_text(cert: CuringCertificate, with_axis_angle: bool = True) -> str:
    """Certificate file format: per qubit one row-major matrix line, plus an
    optional axis-angle line; 17 significant digits round-trip losslessly."""
    lines = []
    for q in range(cert.n_qubits):
        o = np.asarray(cert.rotations[q], dtype=float)
        entries = " ".join(f"{x:.17g}" for x in o.reshape(-1))
        lines.append(f"{q} {entries}")
        if with_axis_angle and np.linalg.det(o) > 0:
            axis, angle = rotation_to_unitary(o)
            ax = " ".join(f"{x:.17g}" for x in axis)
            lines.append(f"axis {ax} angle {angle:.17g}")
    return "\n".join(lines) + "\n"


def certificate_from_text(text: str, n_qubits: int | None = None) -> CuringCertificate:
    rotations: dict[int, np.ndarray] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if fields[0] == "axis":
            continue  # descriptive only; the matrix line is authoritative
        try:
            q = int(fields[0])
            vals = [float(x) for x in fields[1:]]
        except ValueError:
            raise ValueError(f"certificate line {lineno}: malformed") from None
        if len(vals) != 9:
            raise ValueError(f"certificate line {lineno}: expected 9 matrix entries")
        rotations[q] = np.array(vals).reshape(3, 3)
    if not rotations:
        raise ValueError("empty certificate")
    n = n_qubits if n_qubits is not None else max(rotations) + 1
    full = tuple(rotations.get(q, np.eye(3)) for q in range(n))
    return CuringCertificate(n, full)
