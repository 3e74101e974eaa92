"""Sparse Pauli-string Hamiltonians and the polynomial stoquasticity check.

A Hamiltonian is stored as a map from Pauli strings to real coefficients.
Strings are tuples of (qubit, axis) pairs with strictly increasing qubit
indices; axes are labeled X -> 1, Y -> 2, Z -> 3 throughout the package, so
that a two-qubit interaction is summarized by the 3x3 matrix

    beta[k-1, l-1] = coefficient of sigma_k on u  (tensor)  sigma_l on v,

stored for u < v (the transpose is materialized on demand for the reverse
orientation).  Identity (support-0) contributions are kept as a scalar
``offset``: a diagonal shift that is irrelevant to stoquasticity.

A Hamiltonian is a *symmetric Z-matrix* (stoquastic in the given basis) when
its 2^n matrix is real with non-positive off-diagonal entries.  For two-local
Hamiltonians this is equivalent to three families of coefficient conditions,
checked here without ever building the dense matrix:

  1. every Pauli string with an odd number of Y factors has zero coefficient;
  2. per qubit pair, a_XX <= -|a_YY|;
  3. per qubit u,  a_X^u <= -(sum_{v>u} |a_XZ^{uv}| + sum_{w<u} |a_ZX^{wu}|).

Comparisons are eps-tolerant (default 1e-9, absolute); a satisfied condition
whose slack is below 10*eps is reported as "borderline".
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator

import numpy as np

DEFAULT_EPS = 1e-9

# Support keys are tuples of (qubit, axis) pairs.
Support = tuple[tuple[int, "Axis"], ...]


class Axis(enum.IntEnum):
    """Pauli axis with the labeling X -> 1, Y -> 2, Z -> 3."""

    X = 1
    Y = 2
    Z = 3


_AXIS_BY_LETTER = {"X": Axis.X, "Y": Axis.Y, "Z": Axis.Z}


class HamiltonianFormatError(ValueError):
    """Malformed Hamiltonian text; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class PauliTerm:
    """A single Pauli string with its real coefficient (support size <= 2)."""

    coefficient: float
    support: Support

    def __post_init__(self):
        if not math.isfinite(self.coefficient):
            raise ValueError(f"non-finite coefficient {self.coefficient!r}")
        qubits = [q for q, _ in self.support]
        if sorted(set(qubits)) != qubits:
            raise ValueError(f"support {self.support!r} must have strictly increasing qubit indices")
        if len(self.support) > 2:
            raise ValueError("terms acting on more than two qubits are not supported")

    def y_count(self) -> int:
        return sum(1 for _, a in self.support if a is Axis.Y)


@dataclass(frozen=True)
class Hamiltonian:
    """Normalized two-local Hamiltonian: merged terms, zeros dropped."""

    n_qubits: int
    terms: tuple[PauliTerm, ...]
    offset: float = 0.0
    _by_support: dict = field(init=False, repr=False, compare=False, hash=False, default=None)

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be positive")
        for t in self.terms:
            for q, _ in t.support:
                if not 0 <= q < self.n_qubits:
                    raise ValueError(f"qubit index {q} out of range for n={self.n_qubits}")
        object.__setattr__(self, "_by_support", {t.support: t.coefficient for t in self.terms})

    @classmethod
    def from_terms(cls, n_qubits: int, terms: Iterable[tuple[float, Support]],
                   offset: float = 0.0) -> "Hamiltonian":
        """Build a normalized Hamiltonian: sort supports, merge duplicates, drop zeros."""
        acc: dict[Support, float] = {}
        for coeff, support in terms:
            key = tuple(sorted(((int(q), Axis(a)) for q, a in support)))
            if len(key) == 0:
                offset += coeff
                continue
            acc[key] = acc.get(key, 0.0) + float(coeff)
        kept = tuple(
            PauliTerm(c, s) for s, c in sorted(acc.items()) if c != 0.0
        )
        return cls(n_qubits, kept, float(offset))

    def coefficient(self, support: Support) -> float:
        return self._by_support.get(tuple(support), 0.0)

    def __iter__(self) -> Iterator[PauliTerm]:
        return iter(self.terms)

    def interacting_pairs(self) -> list[tuple[int, int]]:
        """Unordered qubit pairs (u < v) carrying a nonzero two-local term."""
        pairs = {(t.support[0][0], t.support[1][0]) for t in self.terms if len(t.support) == 2}
        return sorted(pairs)

    def relabeled(self, perm: dict[int, int]) -> "Hamiltonian":
        """Apply a qubit relabeling (a bijection on 0..n-1)."""
        return Hamiltonian.from_terms(
            self.n_qubits,
            ((t.coefficient, tuple((perm[q], a) for q, a in t.support)) for t in self.terms),
            self.offset,
        )


def parse_hamiltonian(text: str) -> Hamiltonian:
    """Parse the line-oriented Hamiltonian format.

    Optional header ``qubits N``; one term per line, ``<coef> <axis><index>
    [<axis><index>]``; a bare ``<coef>`` line adds to the identity offset;
    ``#`` starts a comment.
    """
    declared_n: int | None = None
    raw_terms: list[tuple[float, Support]] = []
    offset = 0.0
    max_index = -1
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if fields[0].lower() == "qubits":
            if declared_n is not None:
                raise HamiltonianFormatError("duplicate 'qubits' header", lineno)
            if raw_terms or offset:
                raise HamiltonianFormatError("'qubits' header must precede all terms", lineno)
            try:
                declared_n = int(fields[1])
            except (IndexError, ValueError):
                raise HamiltonianFormatError("expected 'qubits N'", lineno) from None
            if declared_n < 1:
                raise HamiltonianFormatError("qubit count must be positive", lineno)
            continue
        try:
            coeff = float(fields[0])
        except ValueError:
            raise HamiltonianFormatError(f"bad coefficient {fields[0]!r}", lineno) from None
        factors = []
        for tok in fields[1:]:
            letter, idx_text = tok[:1].upper(), tok[1:]
            if letter not in _AXIS_BY_LETTER or not idx_text.isdigit():
                raise HamiltonianFormatError(f"bad Pauli factor {tok!r}", lineno)
            factors.append((int(idx_text), _AXIS_BY_LETTER[letter]))
        if len(factors) > 2:
            raise HamiltonianFormatError("more than two Pauli factors on one line", lineno)
        if len({q for q, _ in factors}) != len(factors):
            raise HamiltonianFormatError("repeated qubit index within a term", lineno)
        if not factors:
            offset += coeff
            continue
        for q, _ in factors:
            if declared_n is not None and q >= declared_n:
                raise HamiltonianFormatError(
                    f"qubit index {q} >= declared qubit count {declared_n}", lineno)
            max_index = max(max_index, q)
        raw_terms.append((coeff, tuple(factors)))
    n = declared_n if declared_n is not None else max_index + 1
    if n < 1:
        n = 1
    return Hamiltonian.from_terms(n, raw_terms, offset)


def serialize_hamiltonian(h: Hamiltonian) -> str:
    """Emit the text format; terms sorted by support (parse . serialize = id)."""
    lines = [f"qubits {h.n_qubits}"]
    if h.offset != 0.0:
        lines.append(f"{h.offset:.17g}")
    for t in h.terms:
        factors = " ".join(f"{a.name}{q}" for q, a in t.support)
        lines.append(f"{t.coefficient:.17g} {factors}")
    return "\n".join(lines) + "\n"


def is_exactly_two_local(h: Hamiltonian) -> bool:
    """True iff every term has support size exactly 2 (vacuously true if empty)."""
    return all(len(t.support) == 2 for t in h.terms)


def extract_graph(h: Hamiltonian):
    """Split a two-local Hamiltonian into (interaction betas, local fields).

    Returns ``(betas, fields)`` where ``betas`` maps each interacting pair
    (u, v), u < v, to its 3x3 beta matrix and ``fields`` is an (n, 3) array of
    1-local coefficient vectors.  Reconstruction from the output is exact.
    """
    betas: dict[tuple[int, int], np.ndarray] = {}
    fields = np.zeros((h.n_qubits, 3))
    for t in h.terms:
        if len(t.support) == 1:
            (q, a), = t.support
            fields[q, a - 1] = t.coefficient
        elif len(t.support) == 2:
            (u, au), (v, av) = t.support
            beta = betas.setdefault((u, v), np.zeros((3, 3)))
            beta[au - 1, av - 1] = t.coefficient
        else:
            raise ValueError(f"term {t} has support size {len(t.support)} > 2")
    return betas, fields


def assemble_hamiltonian(n_qubits: int, betas: dict[tuple[int, int], np.ndarray],
                         fields: np.ndarray, offset: float = 0.0) -> Hamiltonian:
    """Inverse of :func:`extract_graph`."""
    terms: list[tuple[float, Support]] = []
    for (u, v), beta in betas.items():
        for k in range(3):
            for l in range(3):
                if beta[k, l] != 0.0:
                    terms.append((beta[k, l], ((u, Axis(k + 1)), (v, Axis(l + 1)))))
    for q in range(n_qubits):
        for k in range(3):
            if fields[q, k] != 0.0:
                terms.append((fields[q, k], ((q, Axis(k + 1)),)))
    return Hamiltonian.from_terms(n_qubits, terms, offset)


@dataclass(frozen=True)
class Violation:
    """One failed (or borderline) stoquasticity condition, for reporting."""

    kind: str          # "reality" | "edge" | "field"
    where: tuple       # support, pair or qubit
    slack: float       # amount by which the condition fails (positive = violated)

    def describe(self) -> str:
        if self.kind == "reality":
            name = " ".join(f"{a.name}{q}" for q, a in self.where)
            return f"odd-Y term {name} has nonzero coefficient (|c| - eps = {self.slack:.3g})"
        if self.kind == "edge":
            return f"a_XX > -|a_YY| on edge {self.where} by {self.slack:.3g}"
        return f"a_X + sum|a_XZ|+|a_ZX| > 0 on qubit {self.where[0]} by {self.slack:.3g}"


@dataclass(frozen=True)
class StoquasticityReport:
    ok: bool
    violations: tuple[Violation, ...]
    borderline: bool   # some satisfied condition had slack below 10*eps
    min_slack: float   # most binding satisfied margin (inf when unconstrained)


def check_symmetric_z(h: Hamiltonian, eps: float = DEFAULT_EPS) -> StoquasticityReport:
    """Full report variant of :func:`is_symmetric_z` (witnesses and margins)."""
    violations: list[Violation] = []
    min_slack = math.inf

    def record(kind, where, margin):
        # margin >= 0 means satisfied; margin is RHS - LHS of the inequality.
        nonlocal min_slack
        if margin < -eps:
            violations.append(Violation(kind, where, -margin - eps))
        else:
            min_slack = min(min_slack, margin)

    betas, fields = extract_graph(h)
    for t in h.terms:
        if t.y_count() % 2 == 1:
            record("reality", t.support, -abs(t.coefficient))
    for (u, v), beta in sorted(betas.items()):
        if beta[0, 0] != 0.0 or beta[1, 1] != 0.0:
            record("edge", (u, v), -beta[0, 0] - abs(beta[1, 1]))
    for u in range(h.n_qubits):
        coupling = 0.0
        for (a, b), beta in betas.items():
            if a == u:
                coupling += abs(beta[0, 2])   # X_u Z_v, v > u
            elif b == u:
                coupling += abs(beta[2, 0])   # Z_w X_u, w < u
        if coupling != 0.0 or fields[u, 0] != 0.0:
            record("field", (u,), -fields[u, 0] - coupling)
    ok = not violations
    borderline = ok and min_slack < 10 * eps
    return StoquasticityReport(ok, tuple(violations), borderline, min_slack)


def is_symmetric_z(h: Hamiltonian, eps: float = DEFAULT_EPS) -> bool:
    """Decide whether a two-local Hamiltonian is a symmetric Z-matrix."""
    return check_symmetric_z(h, eps).ok
