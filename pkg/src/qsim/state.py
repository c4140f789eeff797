"""State vectors, precision handling, and the basis-index convention.

A basis index stores qubit q at bit position (n_qubits - 1 - q), so qubit 0
is the most significant bit.  Applying X on qubit 0 of the N-qubit zero
state therefore puts the single nonzero amplitude at index 2**(N-1).
"""

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import CapacityError, ShapeError

MAX_QUBITS = 34


class Precision(enum.Enum):
    """Floating-point width of the complex amplitudes."""

    F32 = "f32"
    F64 = "f64"

    @property
    def complex_dtype(self) -> np.dtype:
        return np.dtype(np.complex64 if self is Precision.F32 else np.complex128)

    @property
    def norm_atol(self) -> float:
        """Tolerance on |norm - 1| after a chain of unitary operations."""
        return 1e-4 if self is Precision.F32 else 1e-10


def bit_position(n_qubits: int, qubit: int) -> int:
    """Bit position of `qubit` inside a basis index (qubit 0 is the MSB)."""
    return n_qubits - 1 - qubit


@dataclass
class StateVector:
    """Dense amplitude vector over 2**n_qubits basis states."""

    n_qubits: int
    amplitudes: np.ndarray
    precision: Precision = Precision.F64

    def __post_init__(self):
        if not 1 <= self.n_qubits <= MAX_QUBITS:
            raise CapacityError(
                f"n_qubits must be within [1, {MAX_QUBITS}], got {self.n_qubits}"
            )
        expected = (1 << self.n_qubits,)
        if self.amplitudes.shape != expected:
            raise ShapeError(
                f"amplitude array has shape {self.amplitudes.shape}, expected {expected}"
            )
        if self.amplitudes.dtype != self.precision.complex_dtype:
            raise ShapeError(
                f"amplitude dtype {self.amplitudes.dtype} does not match "
                f"precision {self.precision.value}"
            )

    def copy(self) -> "StateVector":
        return StateVector(self.n_qubits, self.amplitudes.copy(), self.precision)


def zero_state(n_qubits: int, precision: Precision = Precision.F64) -> StateVector:
    """|0...0>: amplitude 1 at index 0."""
    if not 1 <= n_qubits <= MAX_QUBITS:
        raise CapacityError(
            f"n_qubits must be within [1, {MAX_QUBITS}], got {n_qubits}"
        )
    amps = np.zeros(1 << n_qubits, dtype=precision.complex_dtype)
    amps[0] = 1.0
    return StateVector(n_qubits, amps, precision)


def from_amplitudes(
    values, normalize: bool = False, precision: Precision | None = None
) -> StateVector:
    """Wrap an explicit amplitude list.

    The length must be a power of two covering at least one qubit.  Without
    `normalize` the values are copied verbatim, so an exact round trip of
    `state.amplitudes` reproduces the state bit for bit.  Precision is
    inferred from the input dtype unless given explicitly.
    """
    arr = np.asarray(values)
    if arr.ndim != 1:
        raise ShapeError(f"expected a flat amplitude array, got shape {arr.shape}")
    size = arr.size
    if size < 2 or size & (size - 1):
        raise ShapeError(f"amplitude count {size} is not a power of two >= 2")
    n_qubits = size.bit_length() - 1
    if n_qubits > MAX_QUBITS:
        raise CapacityError(f"{n_qubits} qubits exceed the cap of {MAX_QUBITS}")
    if precision is None:
        small = arr.dtype in (np.dtype(np.complex64), np.dtype(np.float32))
        precision = Precision.F32 if small else Precision.F64
    amps = arr.astype(precision.complex_dtype, copy=True)
    if normalize:
        nrm = np.linalg.norm(amps)
        if nrm == 0.0:
            raise ValueError("cannot normalize the zero vector")
        amps /= nrm
    return StateVector(n_qubits, amps, precision)


def norm(state: StateVector) -> float:
    """Euclidean norm of the amplitudes."""
    return float(np.linalg.norm(state.amplitudes))


def overlap(a: StateVector, b: StateVector) -> complex:
    """Inner product <a|b> (conjugate-linear in the first argument)."""
    if a.n_qubits != b.n_qubits:
        raise ShapeError(
            f"qubit counts differ: {a.n_qubits} vs {b.n_qubits}"
        )
    if a.precision is not b.precision:
        raise ValueError("cannot mix f32 and f64 states in one operation")
    return complex(np.vdot(a.amplitudes, b.amplitudes))
