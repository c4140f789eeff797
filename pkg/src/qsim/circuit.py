"""Circuits: gate queues, execution, rebinding, fusion, and builders."""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ArityError, CapacityError, ParseError, ShapeError
from .gates import (
    CZ,
    CZPow,
    GateKind,
    GateSpec,
    H,
    RY,
    SWAP,
    Unitary,
    VariationalLayer,
    apply_gate,
    expanded_matrix,
)
from .state import MAX_QUBITS, Precision, StateVector, zero_state


class Circuit:
    """An ordered gate queue over a fixed number of qubits.

    The queue is mutable through `add` and `set_parameters`; it must not be
    modified while `execute` is running.
    """

    def __init__(self, n_qubits: int):
        if not 1 <= n_qubits <= MAX_QUBITS:
            raise CapacityError(
                f"n_qubits must be within [1, {MAX_QUBITS}], got {n_qubits}"
            )
        self.n_qubits = n_qubits
        self.queue: list[GateSpec] = []
        self.measured_registers: dict[str, tuple] = {}

    def add(self, gates):
        """Append one gate or an iterable of gates, validating indices."""
        if isinstance(gates, GateSpec):
            gates = (gates,)
        for spec in gates:
            for q in spec.targets + spec.controls:
                if q >= self.n_qubits:
                    raise ShapeError(
                        f"qubit {q} out of range for {self.n_qubits} qubits"
                    )
            self.queue.append(spec)
        return self

    def add_register(self, name: str, qubits):
        qubits = tuple(qubits)
        if len(set(qubits)) != len(qubits):
            raise ShapeError(f"register {name!r} repeats qubits")
        for q in qubits:
            if not 0 <= q < self.n_qubits:
                raise ShapeError(f"qubit {q} out of range for {self.n_qubits} qubits")
        self.measured_registers[name] = qubits
        return self

    @property
    def parameter_count(self) -> int:
        return sum(g.parameter_count for g in self.queue)

    def set_parameters(self, params):
        """Rebind every parameterized gate, consuming `params` in queue order."""
        params = [float(p) for p in np.asarray(params, dtype=float).ravel()]
        if len(params) != self.parameter_count:
            raise ArityError(
                f"expected {self.parameter_count} parameters, got {len(params)}"
            )
        pos = 0
        for i, g in enumerate(self.queue):
            k = g.parameter_count
            if k:
                self.queue[i] = g.with_params(params[pos : pos + k])
                pos += k
        return self

    def inverse(self) -> "Circuit":
        """Adjoint circuit: reversed queue of adjoint gates."""
        inv = Circuit(self.n_qubits)
        for g in reversed(self.queue):
            inv.add(g.adjoint())
        return inv

    def copy(self) -> "Circuit":
        dup = Circuit(self.n_qubits)
        dup.queue = list(self.queue)
        dup.measured_registers = dict(self.measured_registers)
        return dup

    def execute(
        self,
        initial: StateVector | None = None,
        callbacks=(),
        n_threads: int = 1,
        precision: Precision = Precision.F64,
    ) -> StateVector:
        """Run the queue on `initial` (default |0...0>) and return the result.

        `callbacks` is an iterable of (callback, positions) pairs; each
        callback is evaluated on the running state after the gate at every
        listed queue position.
        """
        if initial is None:
            state = zero_state(self.n_qubits, precision)
        else:
            if initial.n_qubits != self.n_qubits:
                raise ShapeError(
                    f"initial state has {initial.n_qubits} qubits, circuit has {self.n_qubits}"
                )
            state = initial.copy()
        watch: dict[int, list] = {}
        for cb, positions in callbacks:
            for pos in positions:
                watch.setdefault(int(pos), []).append(cb)
        for pos, spec in enumerate(self.queue):
            apply_gate(state, spec, n_threads=n_threads)
            for cb in watch.get(pos, ()):
                cb.evaluate(state, t=float(pos))
        return state


@dataclass
class FusedGate:
    """A contiguous block of merged gates over at most two qubits."""

    support: tuple
    matrix: np.ndarray
    origin: list


def _block_spec(block: FusedGate) -> GateSpec:
    return Unitary(block.matrix, *block.support)


def fuse(circuit: Circuit) -> Circuit:
    """Greedy left-to-right gate fusion into two-qubit unitaries.

    Per-qubit open blocks absorb gates while the merged support (controls
    included) stays within two qubits; conflicting blocks are flushed in
    creation order.  Gates with larger support pass through unfused.
    """
    fused = Circuit(circuit.n_qubits)
    fused.measured_registers = dict(circuit.measured_registers)
    blocks: list[FusedGate] = []
    by_qubit: dict[int, FusedGate] = {}

    def flush(block):
        fused.add(_block_spec(block))
        blocks.remove(block)
        for q in block.support:
            if by_qubit.get(q) is block:
                del by_qubit[q]

    for pos, g in enumerate(circuit.queue):
        support = tuple(sorted(set(g.targets) | set(g.controls)))
        if len(support) > 2:
            for q in support:
                if q in by_qubit:
                    flush(by_qubit[q])
            fused.add(g)
            continue
        touching = []
        for q in support:
            b = by_qubit.get(q)
            if b is not None and b not in touching:
                touching.append(b)
        union = tuple(sorted(set(support).union(*(b.support for b in touching))))
        if len(union) <= 2:
            mat = expanded_matrix(g, union)
            origin = []
            for b in touching:
                mat = mat @ _expand_block(b, union)
                origin.extend(b.origin)
                blocks.remove(b)
            origin.append(pos)
            merged = FusedGate(union, mat, origin)
            blocks.append(merged)
            for q in union:
                by_qubit[q] = merged
        else:
            for b in touching:
                flush(b)
            fresh = FusedGate(support, expanded_matrix(g, support), [pos])
            blocks.append(fresh)
            for q in support:
                by_qubit[q] = fresh
    for block in list(blocks):
        flush(block)
    return fused


def _expand_block(block: FusedGate, union) -> np.ndarray:
    if block.support == tuple(union):
        return block.matrix
    return expanded_matrix(_block_spec(block), union)


def qft_circuit(n_qubits: int) -> Circuit:
    """Quantum Fourier transform: H plus controlled phases, then swaps."""
    c = Circuit(n_qubits)
    for q in range(n_qubits):
        c.add(H(q))
        for k in range(q + 1, n_qubits):
            c.add(CZPow(k, q, math.pi / 2 ** (k - q)))
    for q in range(n_qubits // 2):
        c.add(SWAP(q, n_qubits - 1 - q))
    return c


def variational_circuit(
    n_qubits: int,
    layers: int,
    params,
    fused: bool = False,
    wrap_entangler: bool = True,
) -> Circuit:
    """Layered RY rotations with CZ entanglers on alternating pairs.

    Each layer applies RY on every qubit, CZ on even pairs, RY on every
    qubit again, and CZ on odd pairs (including the (n-1, 0) wrap unless
    `wrap_entangler` is off); a final RY layer closes the circuit, for
    n_qubits * (2 * layers + 1) parameters total.  With `fused` the
    RY/CZ/RY sandwich on each even pair becomes one VariationalLayer gate.
    """
    if n_qubits % 2:
        raise ShapeError("variational circuit needs an even number of qubits")
    params = np.asarray(params, dtype=float).ravel()
    expected = n_qubits * (2 * layers + 1)
    if params.size != expected:
        raise ArityError(f"expected {expected} parameters, got {params.size}")
    c = Circuit(n_qubits)
    pos = 0
    for _ in range(layers):
        first = params[pos : pos + n_qubits]
        second = params[pos + n_qubits : pos + 2 * n_qubits]
        pos += 2 * n_qubits
        if fused:
            for q in range(0, n_qubits, 2):
                c.add(
                    VariationalLayer(
                        q, q + 1, (first[q], first[q + 1], second[q], second[q + 1])
                    )
                )
        else:
            c.add(RY(q, first[q]) for q in range(n_qubits))
            c.add(CZ(q, q + 1) for q in range(0, n_qubits, 2))
            c.add(RY(q, second[q]) for q in range(n_qubits))
        odd_pairs = [(q, q + 1) for q in range(1, n_qubits - 1, 2)]
        if wrap_entangler and n_qubits > 2:
            odd_pairs.append((n_qubits - 1, 0))
        c.add(CZ(a, b) for a, b in odd_pairs)
    c.add(RY(q, params[pos + q]) for q in range(n_qubits))
    return c


_JSON_KINDS = {kind.value: kind for kind in GateKind}


def circuit_to_dict(circuit: Circuit) -> dict:
    """Serializable description: {"nqubits": n, "gates": [...]}."""
    gates = []
    for g in circuit.queue:
        entry: dict = {"name": g.kind.value, "targets": list(g.targets)}
        if g.controls:
            entry["controls"] = list(g.controls)
        if g.params:
            entry["params"] = list(g.params)
        if g.kind is GateKind.UNITARY:
            entry["matrix"] = [
                [[float(v.real), float(v.imag)] for v in row] for row in g.matrix
            ]
        gates.append(entry)
    return {"nqubits": circuit.n_qubits, "gates": gates}


def circuit_from_dict(data: dict) -> Circuit:
    if not isinstance(data, dict) or "nqubits" not in data or "gates" not in data:
        raise ParseError('circuit description needs "nqubits" and "gates" keys')
    try:
        circuit = Circuit(int(data["nqubits"]))
    except (TypeError, ValueError) as exc:
        raise ParseError(f"bad nqubits value: {data['nqubits']!r}") from exc
    for i, entry in enumerate(data["gates"]):
        if not isinstance(entry, dict) or "name" not in entry or "targets" not in entry:
            raise ParseError(f'gate {i} needs "name" and "targets" keys')
        name = entry["name"]
        kind = _JSON_KINDS.get(name)
        if kind is None:
            raise ParseError(f"unknown gate {name}")
        matrix = None
        if entry.get("matrix") is not None:
            matrix = np.array(
                [[complex(re, im) for re, im in row] for row in entry["matrix"]]
            )
        try:
            spec = GateSpec(
                kind,
                tuple(entry["targets"]),
                tuple(entry.get("controls", ())),
                tuple(entry.get("params", ())),
                matrix,
            )
            circuit.add(spec)
        except (ArityError, ShapeError, ValueError, TypeError) as exc:
            raise ParseError(f"gate {i} ({name}): {exc}") from exc
    return circuit
