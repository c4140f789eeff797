"""Time evolution under Hamiltonians, schedules, and observation callbacks.

Solvers step |psi> from t to t+dt using the Hamiltonian evaluated at the
left endpoint: Exp applies e^{-iH(t)dt} through an eigendecomposition,
RK4/RK45 integrate d|psi>/dt = -iH|psi| with classical fixed-step tableaus,
and Trotter executes a symmetric second-order splitting circuit built from
the local terms.  Callbacks are evaluated on the initial state and again
after every step.
"""

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .circuit import Circuit
from .errors import FormError, ShapeError
from .gates import Unitary
from .hamiltonians import (
    DenseHamiltonian,
    TrotterHamiltonian,
    as_dense,
    combine,
    eigensystem,
    expectation,
    ground_state_vector,
)
from .state import Precision, StateVector, overlap
from .variational import OptimizerConfig, minimize_nelder_mead


class Solver(enum.Enum):
    EXP = "exp"
    RK4 = "rk4"
    RK45 = "rk45"
    TROTTER = "trotter"


class ScheduleForm(enum.Enum):
    LINEAR = "linear"
    POLYNOMIAL = "polynomial"


@dataclass(frozen=True)
class Schedule:
    """Monotone-endpoint map s: [0, 1] -> [0, 1] with s(0)=0 and s(1)=1."""

    form: ScheduleForm
    coefficients: tuple = ()

    def __post_init__(self):
        object.__setattr__(
            self, "coefficients", tuple(float(c) for c in self.coefficients)
        )
        if self.form is ScheduleForm.POLYNOMIAL:
            if not self.coefficients:
                raise ShapeError("polynomial schedule needs coefficients")
            if abs(sum(self.coefficients)) < 1e-12:
                raise ValueError("polynomial schedule coefficients sum to zero")

    @classmethod
    def linear(cls) -> "Schedule":
        return cls(ScheduleForm.LINEAR)

    @classmethod
    def polynomial(cls, coefficients) -> "Schedule":
        return cls(ScheduleForm.POLYNOMIAL, tuple(coefficients))

    def value(self, tau: float) -> float:
        if self.form is ScheduleForm.LINEAR:
            return float(tau)
        total = 0.0
        power = float(tau)
        for c in self.coefficients:
            total += c * power
            power *= tau
        return total / sum(self.coefficients)


@dataclass
class EvolutionConfig:
    solver: Solver
    dt: float
    T: float

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.T <= 0:
            raise ValueError(f"T must be positive, got {self.T}")
        if self.dt > self.T * (1 + 1e-12):
            raise ValueError(f"dt={self.dt} exceeds total time T={self.T}")


class Callback:
    """Records one real value per evaluation point."""

    def __init__(self):
        self.records: list[float] = []

    def evaluate(self, state, t=None, hamiltonian=None) -> float:
        value = self._compute(state, t, hamiltonian)
        self.records.append(value)
        return value

    def _compute(self, state, t, hamiltonian) -> float:
        raise NotImplementedError


class EnergyCallback(Callback):
    """Expectation of a fixed Hamiltonian on the running state."""

    def __init__(self, hamiltonian):
        super().__init__()
        self.hamiltonian = hamiltonian

    def _compute(self, state, t, hamiltonian):
        return expectation(self.hamiltonian, state)


class OverlapCallback(Callback):
    """|<target|psi>| against a fixed target state."""

    def __init__(self, target: StateVector):
        super().__init__()
        self.target = target

    def _compute(self, state, t, hamiltonian):
        return abs(overlap(self.target, state))


class GapCallback(Callback):
    """Difference of the two lowest eigenvalues of the current Hamiltonian."""

    def _compute(self, state, t, hamiltonian):
        if hamiltonian is None:
            raise ValueError("the gap callback needs the current Hamiltonian")
        values, _ = eigensystem(as_dense(hamiltonian))
        return float(values[1] - values[0])


class EntanglementEntropyCallback(Callback):
    """Entanglement entropy of a fixed qubit partition."""

    def __init__(self, partition):
        super().__init__()
        self.partition = tuple(partition)

    def _compute(self, state, t, hamiltonian):
        return entanglement_entropy(state, self.partition)


def entanglement_entropy(state: StateVector, partition) -> float:
    """Von Neumann entropy (base 2) of the reduced state over `partition`."""
    partition = tuple(partition)
    n = state.n_qubits
    if not 1 <= len(partition) <= n - 1:
        raise ShapeError(
            f"partition must keep between 1 and {n - 1} qubits, got {len(partition)}"
        )
    if len(set(partition)) != len(partition):
        raise ShapeError(f"duplicate partition qubits {partition}")
    for q in partition:
        if not 0 <= q < n:
            raise ShapeError(f"qubit {q} out of range for {n} qubits")
    tensor = state.amplitudes.astype(np.complex128).reshape([2] * n)
    tensor = np.moveaxis(tensor, partition, range(len(partition)))
    matrix = tensor.reshape(1 << len(partition), -1)
    singular = np.linalg.svd(matrix, compute_uv=False)
    probs = singular.astype(np.float64) ** 2
    probs = probs[probs > 1e-15]
    return float(-(probs * np.log2(probs)).sum())


_DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
)
_DP_B = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84)
_DP_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0)


def _time_steps(config: EvolutionConfig):
    n_full = int(math.floor(config.T / config.dt + 1e-9))
    steps = [(k * config.dt, config.dt) for k in range(n_full)]
    rem = config.T - n_full * config.dt
    if rem > 1e-9 * max(config.T, 1.0):
        steps.append((n_full * config.dt, rem))
    return steps


def trotter_step_circuit(hamiltonian: TrotterHamiltonian, dt: float) -> Circuit:
    """Symmetric second-order splitting circuit for one step of size dt.

    Terms are greedily colored into groups of pairwise disjoint support;
    the queue runs half-steps of every group but the last, a full step of
    the last, then the half-steps mirrored.  A single group is exact.
    """
    if not isinstance(hamiltonian, TrotterHamiltonian):
        raise FormError("the Trotter solver needs the Trotter form")
    groups: list[list] = []
    supports: list[set] = []
    for qubits, matrix in hamiltonian.terms:
        placed = False
        for grp, sup in zip(groups, supports):
            if not sup & set(qubits):
                grp.append((qubits, matrix))
                sup.update(qubits)
                placed = True
                break
        if not placed:
            groups.append([(qubits, matrix)])
            supports.append(set(qubits))
    circuit = Circuit(hamiltonian.n_qubits)
    if not groups:
        return circuit

    def exponential(qubits, matrix, tau):
        values, vectors = np.linalg.eigh(matrix)
        u = (vectors * np.exp(-1j * values * tau)) @ vectors.conj().T
        return Unitary(u, *qubits)

    if len(groups) == 1:
        for qubits, matrix in groups[0]:
            circuit.add(exponential(qubits, matrix, dt))
        return circuit
    halves = [
        [exponential(qubits, matrix, dt / 2) for qubits, matrix in grp]
        for grp in groups[:-1]
    ]
    for gates in halves:
        circuit.add(gates)
    for qubits, matrix in groups[-1]:
        circuit.add(exponential(qubits, matrix, dt))
    for gates in reversed(halves):
        circuit.add(gates)
    return circuit


def _dense_matrix(h) -> np.ndarray:
    if not isinstance(h, DenseHamiltonian):
        raise FormError(f"this solver needs the dense form, got {h.form.value}")
    return h.matrix


def evolve(
    hamiltonian,
    initial: StateVector,
    config: EvolutionConfig,
    callbacks=(),
    n_shards: int = 1,
    n_workers: int = 1,
    n_threads: int = 1,
) -> StateVector:
    """Evolve `initial` to time T; `hamiltonian` may be H or a callable t -> H.

    Time stepping is strictly sequential.  Exp and the RK solvers require
    the dense form; Trotter requires the Trotter form and can run its step
    circuits through the sharded executor.
    """
    time_dependent = callable(hamiltonian)
    h_at = hamiltonian if time_dependent else (lambda t: hamiltonian)
    state = StateVector(
        initial.n_qubits,
        initial.amplitudes.astype(np.complex128, copy=True),
        Precision.F64,
    )
    psi = state.amplitudes
    if initial.n_qubits != h_at(0.0).n_qubits:
        raise ShapeError(
            f"state has {initial.n_qubits} qubits, "
            f"Hamiltonian has {h_at(0.0).n_qubits}"
        )
    steps = _time_steps(config)

    cached_exp = None
    cached_circuit: dict = {}

    def exp_step(t, dt):
        nonlocal cached_exp
        if time_dependent:
            values, vectors = eigensystem(h_at(t))
        elif cached_exp is None:
            cached_exp = eigensystem(h_at(0.0))
            values, vectors = cached_exp
        else:
            values, vectors = cached_exp
        return vectors @ (np.exp(-1j * values * dt) * (vectors.conj().T @ psi))

    def derivative(t, y):
        return -1j * (_dense_matrix(h_at(t)) @ y)

    def rk4_step(t, dt):
        k1 = derivative(t, psi)
        k2 = derivative(t + dt / 2, psi + (dt / 2) * k1)
        k3 = derivative(t + dt / 2, psi + (dt / 2) * k2)
        k4 = derivative(t + dt, psi + dt * k3)
        return psi + (dt / 6) * (k1 + 2 * k2 + 2 * k3 + k4)

    def rk45_step(t, dt):
        ks = []
        for i in range(6):
            y = psi
            if ks:
                y = psi + dt * sum(a * k for a, k in zip(_DP_A[i], ks))
            ks.append(derivative(t + _DP_C[i] * dt, y))
        return psi + dt * sum(b * k for b, k in zip(_DP_B, ks) if b)

    def trotter_step(t, dt):
        key = (t, dt) if time_dependent else dt
        circuit = cached_circuit.get(key)
        if circuit is None:
            circuit = trotter_step_circuit(h_at(t), dt)
            cached_circuit.clear()
            cached_circuit[key] = circuit
        if n_shards > 1:
            from .sharding import execute_sharded

            return execute_sharded(circuit, n_shards, n_workers, state).amplitudes
        return circuit.execute(state, n_threads=n_threads).amplitudes

    stepper = {
        Solver.EXP: exp_step,
        Solver.RK4: rk4_step,
        Solver.RK45: rk45_step,
        Solver.TROTTER: trotter_step,
    }[config.solver]
    if config.solver is Solver.TROTTER:
        if not isinstance(h_at(0.0), TrotterHamiltonian):
            raise FormError("the Trotter solver needs the Trotter form")
    else:
        _dense_matrix(h_at(0.0))

    for cb in callbacks:
        cb.evaluate(state, 0.0, h_at(0.0))
    for t, dt in steps:
        psi = stepper(t, dt)
        psi = np.ascontiguousarray(psi, dtype=np.complex128)
        state.amplitudes = psi
        t_next = t + dt
        for cb in callbacks:
            cb.evaluate(state, t_next, h_at(t_next))
    return state


def adiabatic_evolve(
    h0,
    h1,
    schedule: Schedule,
    config: EvolutionConfig,
    callbacks=(),
    initial: StateVector | None = None,
    n_shards: int = 1,
    n_workers: int = 1,
    n_threads: int = 1,
) -> StateVector:
    """Evolve under H(t) = (1 - s(t/T)) H0 + s(t/T) H1.

    The initial state defaults to the ground state of H0.
    """
    if h0.n_qubits != h1.n_qubits:
        raise ShapeError(f"qubit counts differ: {h0.n_qubits} vs {h1.n_qubits}")
    if initial is None:
        initial = ground_state_vector(h0)

    def h_at(t):
        s = schedule.value(min(max(t / config.T, 0.0), 1.0))
        return combine(h0, 1.0 - s, h1, s)

    return evolve(
        h_at,
        initial,
        config,
        callbacks,
        n_shards=n_shards,
        n_workers=n_workers,
        n_threads=n_threads,
    )


def optimize_schedule(
    h0,
    h1,
    schedule_params0,
    T0: float,
    config: EvolutionConfig,
    opt_config: OptimizerConfig | None = None,
):
    """Tune polynomial schedule coefficients and total time against the
    final-state energy of h1.

    Returns (coefficients, T, energy); the energy never exceeds the value
    at the starting point.
    """
    x0 = np.append(np.asarray(schedule_params0, dtype=float), float(T0))

    def objective(x):
        coeffs, total = x[:-1], x[-1]
        if total < config.dt or abs(coeffs.sum()) < 1e-9:
            return 1e6
        run = EvolutionConfig(config.solver, config.dt, float(total))
        final = adiabatic_evolve(h0, h1, Schedule.polynomial(coeffs), run)
        return expectation(h1, final)

    energy, best = minimize_nelder_mead(objective, x0, opt_config)
    return best[:-1], float(best[-1]), energy
