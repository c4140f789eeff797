"""Hamiltonians in dense and Trotter (local-term) form.

Dense operators are full 2**N x 2**N Hermitian matrices, capped at N = 12.
Trotter form keeps a list of (qubit tuple, small Hermitian matrix) terms on
at most two qubits each; expectation values are accumulated term by term
without ever building the full matrix.
"""

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import CapacityError, FormError, ShapeError
from .gates import apply_matrix
from .state import Precision, StateVector

DENSE_MAX_QUBITS = 12
HERMITICITY_ATOL = 1e-10

_PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
_PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


class Form(enum.Enum):
    DENSE = "dense"
    TROTTER = "trotter"


def _check_hermitian(matrix, what):
    err = np.max(np.abs(matrix - matrix.conj().T))
    if err > HERMITICITY_ATOL:
        raise ShapeError(f"{what} is not Hermitian (deviation {err:.2e})")


@dataclass
class DenseHamiltonian:
    n_qubits: int
    matrix: np.ndarray
    ground_state: object = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.n_qubits > DENSE_MAX_QUBITS:
            raise CapacityError(
                f"dense form is capped at {DENSE_MAX_QUBITS} qubits, got {self.n_qubits}"
            )
        if self.n_qubits < 1:
            raise ShapeError(f"n_qubits must be >= 1, got {self.n_qubits}")
        dim = 1 << self.n_qubits
        self.matrix = np.asarray(self.matrix, dtype=complex)
        if self.matrix.shape != (dim, dim):
            raise ShapeError(
                f"matrix shape {self.matrix.shape} does not fit {self.n_qubits} qubits"
            )
        _check_hermitian(self.matrix, "dense Hamiltonian")

    @property
    def form(self) -> Form:
        return Form.DENSE


@dataclass
class TrotterHamiltonian:
    n_qubits: int
    terms: list
    ground_state: object = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ShapeError(f"n_qubits must be >= 1, got {self.n_qubits}")
        checked = []
        for qubits, matrix in self.terms:
            qubits = tuple(int(q) for q in qubits)
            k = len(qubits)
            if k > 2:
                raise CapacityError(f"Trotter terms act on at most 2 qubits, got {qubits}")
            if k == 0 or len(set(qubits)) != k:
                raise ShapeError(f"bad term qubits {qubits}")
            for q in qubits:
                if not 0 <= q < self.n_qubits:
                    raise ShapeError(f"qubit {q} out of range for {self.n_qubits} qubits")
            matrix = np.asarray(matrix, dtype=complex)
            if matrix.shape != (1 << k, 1 << k):
                raise ShapeError(
                    f"term matrix shape {matrix.shape} does not fit {k} qubit(s)"
                )
            _check_hermitian(matrix, f"term on {qubits}")
            checked.append((qubits, matrix))
        self.terms = checked

    @property
    def form(self) -> Form:
        return Form.TROTTER


def _kron_chain(ops) -> np.ndarray:
    out = np.array([[1.0 + 0.0j]])
    for op in ops:
        out = np.kron(out, op)
    return out


def _embed(matrix, qubits, n) -> np.ndarray:
    """Expand a small operator to n qubits (identity elsewhere)."""
    k = len(qubits)
    rest = [q for q in range(n) if q not in qubits]
    big = np.kron(matrix, np.eye(1 << (n - k), dtype=complex))
    order = list(qubits) + rest
    tensor = big.reshape([2] * (2 * n))
    perm = [order.index(q) for q in range(n)]
    tensor = tensor.transpose(perm + [n + p for p in perm])
    return tensor.reshape(1 << n, 1 << n)


def _plus_state(n_qubits, precision=Precision.F64) -> StateVector:
    amps = np.full(1 << n_qubits, 1.0 / np.sqrt(1 << n_qubits))
    return StateVector(n_qubits, amps.astype(precision.complex_dtype), precision)


def build_x(n_qubits: int, form: Form = Form.DENSE):
    """H = -sum_i X_i.  Ground state |+>^N with energy -N and gap 2."""
    ground = lambda precision=Precision.F64: _plus_state(n_qubits, precision)
    if form is Form.DENSE:
        dim = 1 << n_qubits
        matrix = np.zeros((dim, dim), dtype=complex)
        for i in range(n_qubits):
            matrix -= _embed(_PAULI_X, (i,), n_qubits)
        return DenseHamiltonian(n_qubits, matrix, ground_state=ground)
    if n_qubits < 2:
        raise ShapeError("Trotter form needs at least 2 qubits")
    terms = [((i,), -_PAULI_X) for i in range(n_qubits)]
    return TrotterHamiltonian(n_qubits, terms, ground_state=ground)


def build_tfim(n_qubits: int, h: float, form: Form = Form.DENSE):
    """Transverse-field Ising chain with periodic boundary.

    H = -sum_{i=0}^{N-1} (Z_i Z_{i+1 mod N} + h X_i).  In Trotter form each
    bond i carries the field of its first qubit:
    T_i = -(Z (x) Z + h X (x) I) on (i, i+1 mod N).
    """
    if n_qubits < 2:
        raise ShapeError(f"the chain needs at least 2 qubits, got {n_qubits}")
    zz = np.kron(_PAULI_Z, _PAULI_Z)
    xi = np.kron(_PAULI_X, np.eye(2, dtype=complex))
    bond = -(zz + h * xi)
    pairs = [(i, (i + 1) % n_qubits) for i in range(n_qubits)]
    if form is Form.TROTTER:
        return TrotterHamiltonian(n_qubits, [(pair, bond) for pair in pairs])
    dim = 1 << n_qubits
    matrix = np.zeros((dim, dim), dtype=complex)
    for pair in pairs:
        matrix += _embed(bond, pair, n_qubits)
    return DenseHamiltonian(n_qubits, matrix)


def combine(a, coeff_a: float, b, coeff_b: float):
    """coeff_a * a + coeff_b * b, preserving the common form."""
    if a.n_qubits != b.n_qubits:
        raise ShapeError(f"qubit counts differ: {a.n_qubits} vs {b.n_qubits}")
    if a.form is not b.form:
        raise FormError(f"cannot combine {a.form.value} with {b.form.value}")
    if a.form is Form.DENSE:
        return DenseHamiltonian(a.n_qubits, coeff_a * a.matrix + coeff_b * b.matrix)
    merged: dict = {}
    order = []
    for coeff, ham in ((coeff_a, a), (coeff_b, b)):
        for qubits, matrix in ham.terms:
            if qubits not in merged:
                merged[qubits] = coeff * matrix
                order.append(qubits)
            else:
                merged[qubits] = merged[qubits] + coeff * matrix
    return TrotterHamiltonian(a.n_qubits, [(q, merged[q]) for q in order])


def as_dense(h) -> DenseHamiltonian:
    """Expand to dense form (subject to the dense qubit cap)."""
    if isinstance(h, DenseHamiltonian):
        return h
    dim = 1 << h.n_qubits
    if h.n_qubits > DENSE_MAX_QUBITS:
        raise CapacityError(
            f"dense form is capped at {DENSE_MAX_QUBITS} qubits, got {h.n_qubits}"
        )
    matrix = np.zeros((dim, dim), dtype=complex)
    for qubits, term in h.terms:
        matrix += _embed(term, qubits, h.n_qubits)
    return DenseHamiltonian(h.n_qubits, matrix, ground_state=h.ground_state)


def expectation(h, state: StateVector) -> float:
    """<psi|H|psi>, real part (the imaginary residue is discarded)."""
    if h.n_qubits != state.n_qubits:
        raise ShapeError(
            f"Hamiltonian has {h.n_qubits} qubits, state has {state.n_qubits}"
        )
    psi = state.amplitudes.astype(np.complex128, copy=False)
    if isinstance(h, DenseHamiltonian):
        return float(np.vdot(psi, h.matrix @ psi).real)
    total = 0.0
    scratch = np.empty_like(psi)
    for qubits, matrix in h.terms:
        np.copyto(scratch, psi)
        apply_matrix(scratch, h.n_qubits, qubits, matrix)
        total += np.vdot(psi, scratch).real
    return float(total)


def eigensystem(h: DenseHamiltonian):
    """Ascending eigenvalues and matching eigenvector columns."""
    if not isinstance(h, DenseHamiltonian):
        raise FormError("eigensystem needs the dense form")
    values, vectors = np.linalg.eigh(h.matrix)
    return values, vectors


def ground_state_vector(h, precision: Precision = Precision.F64) -> StateVector:
    """Ground state: the attached constructor if known, else the lowest
    eigenvector of the dense form."""
    if h.ground_state is not None:
        return h.ground_state(precision)
    values, vectors = eigensystem(as_dense(h))
    amps = np.ascontiguousarray(vectors[:, 0]).astype(precision.complex_dtype)
    return StateVector(h.n_qubits, amps, precision)
