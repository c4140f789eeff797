"""Sharded execution: split the state over global qubits, run per shard.

With g global qubits the state becomes 2**g shards of 2**(n-g) amplitudes;
shard s holds the amplitudes whose global-qubit bits spell s.  Gates whose
targets are local run independently per shard.  Phase gates (CZ, CZPow)
and uncontrolled SWAP never force a global qubit local: phases reduce to
shard filters plus a local diagonal, and SWAP is pure data movement
(half-shard exchange, or shard relabeling when both qubits are global).
CNOT needs only its second target local; its first acts as a control.
Everything else targets local qubits, so the planner emits a Reshuffle
(global/local exchange) before such a gate, evicting the local qubit whose
next locality requirement lies farthest in the queue.
"""

import bisect
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .circuit import Circuit
from .errors import CapacityError, ShapeError
from .gates import GateKind, GateSpec, apply_matrix, gate_matrix
from .state import Precision, StateVector, zero_state

_X_MATRIX = np.array([[0, 1], [1, 0]], dtype=complex)


@dataclass
class ShardedState:
    """State split into 2**g shards over the given global qubits.

    global_qubits[0] selects the most significant bit of the shard index;
    local_qubits list the remaining qubits in bit-significance order
    within each shard.
    """

    n_qubits: int
    global_qubits: tuple
    shards: list
    precision: Precision = Precision.F64
    local_qubits: tuple = ()

    def __post_init__(self):
        if not self.local_qubits:
            taken = set(self.global_qubits)
            self.local_qubits = tuple(
                q for q in range(self.n_qubits) if q not in taken
            )


def partition(state: StateVector, global_qubits) -> ShardedState:
    """Copy a state into shards addressed by the global-qubit bits."""
    global_qubits = tuple(global_qubits)
    g = len(global_qubits)
    n = state.n_qubits
    if not 1 <= g <= n - 1:
        raise ShapeError(f"need between 1 and {n - 1} global qubits, got {g}")
    if len(set(global_qubits)) != g:
        raise ShapeError(f"duplicate global qubits {global_qubits}")
    for q in global_qubits:
        if not 0 <= q < n:
            raise ShapeError(f"qubit {q} out of range for {n} qubits")
    tensor = state.amplitudes.reshape([2] * n)
    tensor = np.moveaxis(tensor, global_qubits, range(g))
    flat = tensor.reshape(1 << g, 1 << (n - g))
    # copy unconditionally: when the reshape yields a view, the shards
    # would otherwise alias (and later corrupt) the caller's amplitudes
    shards = [flat[s].copy() for s in range(1 << g)]
    return ShardedState(n, global_qubits, shards, state.precision)


def gather(sharded: ShardedState) -> StateVector:
    """Reassemble the flat state vector from the shards."""
    n = sharded.n_qubits
    order = list(sharded.global_qubits) + list(sharded.local_qubits)
    tensor = np.stack(sharded.shards).reshape([2] * n)
    perm = [order.index(q) for q in range(n)]
    amps = np.ascontiguousarray(tensor.transpose(perm).reshape(1 << n))
    return StateVector(n, amps, sharded.precision)


def reshuffle(sharded: ShardedState, global_qubit: int, local_qubit: int):
    """Exchange the roles of a global and a local qubit, in place.

    Pairwise half-shard exchange followed by a label swap; applying the
    inverse exchange restores the shard contents bit for bit.
    """
    globals_list = list(sharded.global_qubits)
    locals_list = list(sharded.local_qubits)
    j = globals_list.index(global_qubit)
    m = locals_list.index(local_qubit)
    _exchange_halves(sharded.shards, len(globals_list), j, len(locals_list), m)
    globals_list[j], locals_list[m] = local_qubit, global_qubit
    sharded.global_qubits = tuple(globals_list)
    sharded.local_qubits = tuple(locals_list)


def _exchange_halves(shards, g, slot_j, n_local, slot_m, pairs=None):
    # swaps shard(j=0)'s m=1 half with shard(j=1)'s m=0 half
    p = n_local - 1 - slot_m
    jbit = 1 << (g - 1 - slot_j)
    if pairs is None:
        pairs = [(s, s | jbit) for s in range(1 << g) if not s & jbit]
    for s0, s1 in pairs:
        v0 = shards[s0].reshape(-1, 2, 1 << p)
        v1 = shards[s1].reshape(-1, 2, 1 << p)
        tmp = v0[:, 1, :].copy()
        v0[:, 1, :] = v1[:, 0, :]
        v1[:, 0, :] = tmp


@dataclass
class LocalSegment:
    """Queue positions executable without moving any qubit."""

    positions: list


@dataclass
class Reshuffle:
    """Exchange one global qubit with one local qubit."""

    global_qubit: int
    local_qubit: int


@dataclass
class ExecutionPlan:
    n_qubits: int
    n_shards: int
    global_qubits: tuple
    steps: list = field(default_factory=list)

    @property
    def n_reshuffles(self) -> int:
        return sum(1 for s in self.steps if isinstance(s, Reshuffle))


def _required_local(spec: GateSpec) -> tuple:
    """Targets that genuinely need to live inside the shards."""
    if spec.kind in (GateKind.CZ, GateKind.CZPOW):
        return ()
    if spec.kind is GateKind.SWAP and not spec.controls:
        return ()
    if spec.kind is GateKind.CNOT:
        return (spec.targets[1],)
    return spec.targets


def plan(circuit: Circuit, n_shards: int, global_qubits=None) -> ExecutionPlan:
    """Choose global qubits and schedule reshuffles around local segments.

    Global qubits default to the g qubits with the fewest locality
    requirements in the queue (ties to the higher index).  Reshuffle
    victims are picked Belady-style: the local qubit whose next locality
    requirement is farthest away.
    """
    n = circuit.n_qubits
    if n_shards < 2 or n_shards & (n_shards - 1):
        raise ShapeError(f"n_shards must be a power of two >= 2, got {n_shards}")
    if n_shards > 1 << (n - 1):
        raise CapacityError(
            f"{n_shards} shards exceed the cap of {1 << (n - 1)} for {n} qubits"
        )
    g = n_shards.bit_length() - 1
    required = [_required_local(spec) for spec in circuit.queue]
    if global_qubits is None:
        counts = [0] * n
        for req in required:
            for q in req:
                counts[q] += 1
        ranked = sorted(range(n), key=lambda q: (counts[q], -q))
        global_qubits = tuple(sorted(ranked[:g]))
    else:
        global_qubits = tuple(global_qubits)
        if len(global_qubits) != g or len(set(global_qubits)) != g:
            raise ShapeError(
                f"{n_shards} shards need {g} distinct global qubits, got {global_qubits}"
            )
    uses: list[list[int]] = [[] for _ in range(n)]
    for pos, req in enumerate(required):
        for q in req:
            uses[q].append(pos)

    def next_use(q, pos):
        i = bisect.bisect_left(uses[q], pos)
        return uses[q][i] if i < len(uses[q]) else math.inf

    global_set = set(global_qubits)
    steps: list = []
    segment: list[int] = []
    for pos, req in enumerate(required):
        blocked = [q for q in req if q in global_set]
        if blocked:
            if len(req) > n - g:
                raise CapacityError(
                    f"gate at position {pos} needs {len(req)} local qubits "
                    f"but only {n - g} exist with {n_shards} shards"
                )
            if segment:
                steps.append(LocalSegment(segment))
                segment = []
            for q in blocked:
                candidates = [
                    c for c in range(n) if c not in global_set and c not in req
                ]
                victim = max(candidates, key=lambda c: (next_use(c, pos), c))
                steps.append(Reshuffle(q, victim))
                global_set.remove(q)
                global_set.add(victim)
        segment.append(pos)
    if segment:
        steps.append(LocalSegment(segment))
    return ExecutionPlan(n, n_shards, global_qubits, steps)


class _ShardRunner:
    def __init__(self, sharded: ShardedState, pool):
        self.sharded = sharded
        self.pool = pool

    def _map(self, fn, items):
        items = list(items)
        if self.pool is None or len(items) <= 1:
            for item in items:
                fn(item)
        else:
            list(self.pool.map(fn, items))

    def _split(self, qubits):
        glob = [q for q in qubits if q in self.sharded.global_qubits]
        loc = [q for q in qubits if q not in self.sharded.global_qubits]
        return glob, loc

    def _shard_mask(self, global_members) -> int:
        g = len(self.sharded.global_qubits)
        mask = 0
        for q in global_members:
            mask |= 1 << (g - 1 - self.sharded.global_qubits.index(q))
        return mask

    def _local_index(self, q) -> int:
        return self.sharded.local_qubits.index(q)

    def apply(self, spec: GateSpec):
        kind = spec.kind
        if kind in (GateKind.CZ, GateKind.CZPOW):
            self._apply_phase(spec)
        elif kind is GateKind.SWAP and not spec.controls:
            self._apply_swap(spec)
        elif kind is GateKind.CNOT:
            self._apply_local(
                spec.targets[1:], _X_MATRIX, spec.controls + spec.targets[:1]
            )
        else:
            self._apply_local(spec.targets, gate_matrix(spec), spec.controls)

    def _apply_local(self, targets, matrix, controls):
        glob_c, loc_c = self._split(controls)
        mask = self._shard_mask(glob_c)
        n_local = len(self.sharded.local_qubits)
        loc_targets = tuple(self._local_index(q) for q in targets)
        loc_controls = tuple(self._local_index(q) for q in loc_c)
        shards = self.sharded.shards

        def run(s):
            apply_matrix(shards[s], n_local, loc_targets, matrix, loc_controls)

        self._map(run, (s for s in range(len(shards)) if s & mask == mask))

    def _apply_phase(self, spec):
        # CZ/CZPow multiply a phase where every involved bit is 1
        phase = gate_matrix(spec)[3, 3]
        involved = spec.targets + spec.controls
        glob, loc = self._split(involved)
        mask = self._shard_mask(glob)
        shards = self.sharded.shards
        selected = [s for s in range(len(shards)) if s & mask == mask]
        if not loc:
            def run(s):
                shards[s] *= shards[s].dtype.type(phase)
        else:
            n_local = len(self.sharded.local_qubits)
            target = (self._local_index(loc[0]),)
            controls = tuple(self._local_index(q) for q in loc[1:])
            diag = np.diag([1.0, phase])

            def run(s):
                apply_matrix(shards[s], n_local, target, diag, controls)

        self._map(run, selected)

    def _apply_swap(self, spec):
        a, b = spec.targets
        glob, loc = self._split((a, b))
        shards = self.sharded.shards
        g = len(self.sharded.global_qubits)
        if len(glob) == 0:
            self._apply_local(spec.targets, gate_matrix(spec), ())
        elif len(glob) == 1:
            # the reshuffle data movement without the label swap is the gate
            j = self.sharded.global_qubits.index(glob[0])
            m = self._local_index(loc[0])
            jbit = 1 << (g - 1 - j)
            pairs = [(s, s | jbit) for s in range(1 << g) if not s & jbit]

            def run(pair):
                _exchange_halves(
                    shards, g, j, len(self.sharded.local_qubits), m, pairs=[pair]
                )

            self._map(run, pairs)
        else:
            ja = 1 << (g - 1 - self.sharded.global_qubits.index(a))
            jb = 1 << (g - 1 - self.sharded.global_qubits.index(b))
            for s in range(1 << g):
                if s & ja and not s & jb:
                    shards[s], shards[s ^ ja ^ jb] = shards[s ^ ja ^ jb], shards[s]


def execute_sharded(
    circuit: Circuit,
    n_shards: int,
    n_workers: int = 1,
    initial: StateVector | None = None,
    precision: Precision = Precision.F64,
    global_qubits=None,
) -> StateVector:
    """Run a circuit over `n_shards` shards with a pool of worker threads.

    Results match plain `execute` amplitude for amplitude; with one shard
    this is exactly the plain path.  `global_qubits` overrides the
    planner's automatic choice.
    """
    if n_workers < 1:
        raise ShapeError(f"n_workers must be >= 1, got {n_workers}")
    if n_shards == 1:
        return circuit.execute(initial, n_threads=n_workers, precision=precision)
    exec_plan = plan(circuit, n_shards, global_qubits)
    if initial is None:
        state = zero_state(circuit.n_qubits, precision)
    else:
        if initial.n_qubits != circuit.n_qubits:
            raise ShapeError(
                f"initial state has {initial.n_qubits} qubits, "
                f"circuit has {circuit.n_qubits}"
            )
        state = initial
    sharded = partition(state, exec_plan.global_qubits)
    pool = ThreadPoolExecutor(max_workers=n_workers) if n_workers > 1 else None
    try:
        runner = _ShardRunner(sharded, pool)
        for step in exec_plan.steps:
            if isinstance(step, Reshuffle):
                reshuffle(sharded, step.global_qubit, step.local_qubit)
            else:
                for pos in step.positions:
                    runner.apply(circuit.queue[pos])
    finally:
        if pool is not None:
            pool.shutdown()
    return gather(sharded)
