"""Shot sampling from final-state probability distributions."""

from dataclasses import dataclass, field

import numpy as np

from .errors import ShapeError
from .state import StateVector

RNG_ALGORITHM = "pcg64"


@dataclass
class MeasurementResult:
    """Sampled outcomes over an ordered qubit subset.

    Samples are decimal basis indices over `qubits`, with qubits[0] as the
    most significant bit.  `rng_algorithm` records the generator identity
    for reproducibility.
    """

    n_shots: int
    qubits: tuple
    samples: np.ndarray
    seed: int
    registers: dict = field(default_factory=dict)
    rng_algorithm: str = RNG_ALGORITHM

    def binary(self) -> np.ndarray:
        """(n_shots, len(qubits)) array of bits, one row per shot."""
        k = len(self.qubits)
        shifts = np.arange(k - 1, -1, -1, dtype=np.int64)
        return ((self.samples[:, None] >> shifts[None, :]) & 1).astype(np.uint8)


def marginal_probabilities(state: StateVector, qubits) -> np.ndarray:
    """Probabilities of outcomes over `qubits`, other qubits traced out.

    Always accumulated in float64, even for f32 states.
    """
    qubits = tuple(qubits)
    if not qubits:
        raise ShapeError("measurement needs at least one qubit")
    if len(set(qubits)) != len(qubits):
        raise ShapeError(f"duplicate measurement qubits {qubits}")
    n = state.n_qubits
    for q in qubits:
        if not 0 <= q < n:
            raise ShapeError(f"qubit {q} out of range for {n} qubits")
    probs = np.abs(state.amplitudes.astype(np.complex128)) ** 2
    # reshape puts qubit q on axis q because qubit 0 is the index MSB
    tensor = probs.reshape([2] * n)
    other = tuple(q for q in range(n) if q not in qubits)
    if other:
        tensor = tensor.sum(axis=other)
    kept = sorted(qubits)
    perm = [kept.index(q) for q in qubits]
    return tensor.transpose(perm).ravel()


def sample(
    state: StateVector,
    qubits,
    n_shots: int,
    seed: int,
    registers: dict | None = None,
) -> MeasurementResult:
    """Draw `n_shots` outcomes via cumulative probabilities + binary search."""
    if n_shots < 1:
        raise ValueError(f"n_shots must be >= 1, got {n_shots}")
    qubits = tuple(qubits)
    probs = marginal_probabilities(state, qubits)
    registers = dict(registers or {})
    for name, reg in registers.items():
        missing = set(reg) - set(qubits)
        if missing:
            raise ShapeError(
                f"register {name!r} references unmeasured qubits {sorted(missing)}"
            )
        registers[name] = tuple(reg)
    cum = np.cumsum(probs)
    cum /= cum[-1]
    rng = np.random.default_rng(seed)
    draws = rng.random(n_shots)
    samples = np.searchsorted(cum, draws, side="right").astype(np.int64)
    np.clip(samples, 0, probs.size - 1, out=samples)
    return MeasurementResult(n_shots, qubits, samples, int(seed), registers)


def frequencies(result: MeasurementResult, register: str | None = None) -> dict:
    """Outcome counts, optionally projected onto a named register."""
    samples = result.samples
    if register is not None:
        if register not in result.registers:
            raise KeyError(register)
        reg = result.registers[register]
        k = len(result.qubits)
        positions = np.array([result.qubits.index(q) for q in reg], dtype=np.int64)
        bits = (samples[:, None] >> (k - 1 - positions)[None, :]) & 1
        weights = 1 << np.arange(len(reg) - 1, -1, -1, dtype=np.int64)
        samples = bits @ weights
    values, counts = np.unique(samples, return_counts=True)
    return {int(v): int(c) for v, c in zip(values, counts)}
