"""Gate specifications and in-place amplitude-update kernels.

A gate on t targets with c controls updates groups of 2**t amplitudes.  The
kernel enumerates the 2**(n - t - c) base indices (target and control bits
removed) by inserting zero bits at the occupied positions, ORs in the
control bits, and updates each group exactly once.  Diagonal and
permutation matrices take reduced paths that skip untouched amplitudes:
a diagonal gate only multiplies rows whose diagonal entry differs from 1,
a permutation gate only moves rows (no arithmetic for unit entries).
"""

import cmath
import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ArityError, ShapeError
from .state import StateVector, bit_position

UNITARITY_ATOL = 1e-8

# Groups per vectorized block, and the minimum group count before the
# kernel bothers to split work across threads.
_BLOCK = 1 << 15
_PARALLEL_MIN = 1 << 17


class GateKind(enum.Enum):
    H = "H"
    X = "X"
    Y = "Y"
    Z = "Z"
    RX = "RX"
    RY = "RY"
    RZ = "RZ"
    CZPOW = "CZPow"
    CNOT = "CNOT"
    CZ = "CZ"
    SWAP = "SWAP"
    UNITARY = "Unitary"
    VARIATIONAL_LAYER = "VariationalLayer"


_N_TARGETS = {
    GateKind.H: 1,
    GateKind.X: 1,
    GateKind.Y: 1,
    GateKind.Z: 1,
    GateKind.RX: 1,
    GateKind.RY: 1,
    GateKind.RZ: 1,
    GateKind.CZPOW: 2,
    GateKind.CNOT: 2,
    GateKind.CZ: 2,
    GateKind.SWAP: 2,
    GateKind.VARIATIONAL_LAYER: 2,
}

_N_PARAMS = {
    GateKind.RX: 1,
    GateKind.RY: 1,
    GateKind.RZ: 1,
    GateKind.CZPOW: 1,
    GateKind.VARIATIONAL_LAYER: 4,
}

_SELF_ADJOINT = {
    GateKind.H,
    GateKind.X,
    GateKind.Y,
    GateKind.Z,
    GateKind.CNOT,
    GateKind.CZ,
    GateKind.SWAP,
}

_INV_SQRT2 = 1.0 / math.sqrt(2.0)

_FIXED_MATRICES = {
    GateKind.H: np.array([[_INV_SQRT2, _INV_SQRT2], [_INV_SQRT2, -_INV_SQRT2]], dtype=complex),
    GateKind.X: np.array([[0, 1], [1, 0]], dtype=complex),
    GateKind.Y: np.array([[0, -1j], [1j, 0]], dtype=complex),
    GateKind.Z: np.array([[1, 0], [0, -1]], dtype=complex),
    GateKind.CNOT: np.array(
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
    ),
    GateKind.CZ: np.diag([1, 1, 1, -1]).astype(complex),
    GateKind.SWAP: np.array(
        [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
    ),
}


def _ry_matrix(theta: float) -> np.ndarray:
    c = math.cos(theta / 2.0)
    s = math.sin(theta / 2.0)
    return np.array([[c, -s], [s, c]], dtype=complex)


def _rx_matrix(theta: float) -> np.ndarray:
    c = math.cos(theta / 2.0)
    s = math.sin(theta / 2.0)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


def _rz_matrix(theta: float) -> np.ndarray:
    return np.diag([cmath.exp(-0.5j * theta), cmath.exp(0.5j * theta)])


def _czpow_matrix(theta: float) -> np.ndarray:
    return np.diag([1.0, 1.0, 1.0, cmath.exp(1j * theta)])


def _variational_layer_matrix(params) -> np.ndarray:
    # RY pair, CZ, RY pair, collapsed into one 4x4 unitary at construction.
    a, b, c, d = params
    before = np.kron(_ry_matrix(a), _ry_matrix(b))
    after = np.kron(_ry_matrix(c), _ry_matrix(d))
    return after @ _FIXED_MATRICES[GateKind.CZ] @ before


@dataclass(frozen=True, eq=False)
class GateSpec:
    """Immutable description of one gate: kind, wiring, parameters, matrix.

    `targets` are ordered; targets[0] indexes the most significant bit of
    the gate matrix.  `controls` restrict the action to basis states whose
    control bits are all 1.  Unitary gates carry an explicit matrix.
    """

    kind: GateKind
    targets: tuple
    controls: tuple = ()
    params: tuple = ()
    matrix: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(int(q) for q in self.targets))
        object.__setattr__(self, "controls", tuple(int(q) for q in self.controls))
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        for q in self.targets + self.controls:
            if q < 0:
                raise ShapeError(f"negative qubit index {q}")
        if len(set(self.targets)) != len(self.targets):
            raise ShapeError(f"duplicate targets {self.targets}")
        if len(set(self.controls)) != len(self.controls):
            raise ShapeError(f"duplicate controls {self.controls}")
        if set(self.targets) & set(self.controls):
            raise ShapeError("targets and controls overlap")
        n_params = _N_PARAMS.get(self.kind, 0)
        if len(self.params) != n_params:
            raise ArityError(
                f"{self.kind.value} takes {n_params} parameter(s), got {len(self.params)}"
            )
        if self.kind is GateKind.UNITARY:
            if self.matrix is None:
                raise ValueError("Unitary gate requires an explicit matrix")
            if not 1 <= len(self.targets) <= 2:
                raise ShapeError("Unitary gates act on 1 or 2 targets")
            self._store_matrix(self.matrix)
        else:
            expected = _N_TARGETS[self.kind]
            if len(self.targets) != expected:
                raise ShapeError(
                    f"{self.kind.value} takes {expected} target(s), got {len(self.targets)}"
                )
            if self.kind is GateKind.VARIATIONAL_LAYER:
                self._store_matrix(_variational_layer_matrix(self.params))
            elif self.matrix is not None:
                raise ValueError(f"{self.kind.value} does not take an explicit matrix")

    def _store_matrix(self, matrix):
        arr = np.array(matrix, dtype=complex)
        dim = 1 << len(self.targets)
        if arr.shape != (dim, dim):
            raise ShapeError(f"matrix shape {arr.shape} does not fit {len(self.targets)} target(s)")
        err = np.max(np.abs(arr.conj().T @ arr - np.eye(dim)))
        if err > UNITARITY_ATOL:
            raise ValueError(f"matrix is not unitary (deviation {err:.2e})")
        arr.setflags(write=False)
        object.__setattr__(self, "matrix", arr)

    def __eq__(self, other):
        if not isinstance(other, GateSpec):
            return NotImplemented
        if (self.kind, self.targets, self.controls, self.params) != (
            other.kind,
            other.targets,
            other.controls,
            other.params,
        ):
            return False
        if (self.matrix is None) != (other.matrix is None):
            return False
        return self.matrix is None or np.array_equal(self.matrix, other.matrix)

    @property
    def parameter_count(self) -> int:
        return _N_PARAMS.get(self.kind, 0)

    def with_params(self, params) -> "GateSpec":
        """Rebind parameters, recomputing any derived matrix."""
        matrix = self.matrix if self.kind is GateKind.UNITARY else None
        return GateSpec(self.kind, self.targets, self.controls, tuple(params), matrix)

    def adjoint(self) -> "GateSpec":
        if self.kind in _SELF_ADJOINT:
            return self
        if self.kind in (GateKind.RX, GateKind.RY, GateKind.RZ, GateKind.CZPOW):
            return self.with_params((-self.params[0],))
        return GateSpec(
            GateKind.UNITARY, self.targets, self.controls, (), gate_matrix(self).conj().T
        )


def H(q, controls=()):
    return GateSpec(GateKind.H, (q,), controls)


def X(q, controls=()):
    return GateSpec(GateKind.X, (q,), controls)


def Y(q, controls=()):
    return GateSpec(GateKind.Y, (q,), controls)


def Z(q, controls=()):
    return GateSpec(GateKind.Z, (q,), controls)


def RX(q, theta, controls=()):
    return GateSpec(GateKind.RX, (q,), controls, (theta,))


def RY(q, theta, controls=()):
    return GateSpec(GateKind.RY, (q,), controls, (theta,))


def RZ(q, theta, controls=()):
    return GateSpec(GateKind.RZ, (q,), controls, (theta,))


def CZPow(q0, q1, theta, controls=()):
    return GateSpec(GateKind.CZPOW, (q0, q1), controls, (theta,))


def CNOT(control, target, controls=()):
    return GateSpec(GateKind.CNOT, (control, target), controls)


def CZ(q0, q1, controls=()):
    return GateSpec(GateKind.CZ, (q0, q1), controls)


def SWAP(q0, q1, controls=()):
    return GateSpec(GateKind.SWAP, (q0, q1), controls)


def Unitary(matrix, *targets, controls=()):
    return GateSpec(GateKind.UNITARY, targets, controls, (), matrix)


def VariationalLayer(q0, q1, thetas, controls=()):
    """Two RY rotations, CZ, two RY rotations, fused into one 4x4 gate.

    `thetas` is (first(q0), first(q1), second(q0), second(q1)).
    """
    return GateSpec(GateKind.VARIATIONAL_LAYER, (q0, q1), controls, tuple(thetas))


def gate_matrix(spec: GateSpec) -> np.ndarray:
    """Unitary of the gate over its targets, excluding control qubits."""
    if spec.matrix is not None:
        return np.array(spec.matrix)
    if spec.kind in _FIXED_MATRICES:
        return _FIXED_MATRICES[spec.kind].copy()
    if spec.kind is GateKind.RX:
        return _rx_matrix(spec.params[0])
    if spec.kind is GateKind.RY:
        return _ry_matrix(spec.params[0])
    if spec.kind is GateKind.RZ:
        return _rz_matrix(spec.params[0])
    if spec.kind is GateKind.CZPOW:
        return _czpow_matrix(spec.params[0])
    raise ValueError(f"no matrix for kind {spec.kind}")


def expanded_matrix(spec: GateSpec, support) -> np.ndarray:
    """Unitary of the gate over an ordered qubit support, controls included.

    Control qubits contribute projectors: basis columns whose control bits
    are not all 1 pass through unchanged.  support[0] indexes the most
    significant bit of the result.
    """
    support = tuple(support)
    if len(set(support)) != len(support):
        raise ShapeError(f"duplicate support qubits {support}")
    missing = (set(spec.targets) | set(spec.controls)) - set(support)
    if missing:
        raise ShapeError(f"support {support} does not cover qubits {sorted(missing)}")
    s = len(support)
    dim = 1 << s
    g = gate_matrix(spec)
    t = len(spec.targets)
    tslots = [support.index(q) for q in spec.targets]
    cslot_mask = 0
    for q in spec.controls:
        cslot_mask |= 1 << (s - 1 - support.index(q))
    tbit_masks = [1 << (s - 1 - slot) for slot in tslots]
    out = np.zeros((dim, dim), dtype=complex)
    for col in range(dim):
        if (col & cslot_mask) != cslot_mask:
            out[col, col] = 1.0
            continue
        jt = 0
        for mask in tbit_masks:
            jt = (jt << 1) | (1 if col & mask else 0)
        base = col
        for mask in tbit_masks:
            base &= ~mask
        for it in range(1 << t):
            row = base
            for b, mask in enumerate(tbit_masks):
                if (it >> (t - 1 - b)) & 1:
                    row |= mask
            out[row, col] += g[it, jt]
    return out


class KernelClass(enum.Enum):
    GENERAL = "general"
    DIAGONAL = "diagonal"
    PERMUTATION = "permutation"


def classify_kernel(matrix) -> KernelClass:
    """Pick the sparsity path: structural zeros decide, phases within 1e-12."""
    m = np.asarray(matrix)
    off = m - np.diag(np.diagonal(m))
    if not np.count_nonzero(off):
        return KernelClass.DIAGONAL
    row_nz = np.count_nonzero(m, axis=1)
    col_nz = np.count_nonzero(m, axis=0)
    if np.all(row_nz == 1) and np.all(col_nz == 1):
        values = m[m != 0]
        if np.all(np.abs(np.abs(values) - 1.0) <= 1e-12):
            return KernelClass.PERMUTATION
    return KernelClass.GENERAL


def _insert_zero_bits(indices: np.ndarray, positions) -> np.ndarray:
    # positions ascending; opens a zero bit at each position
    for p in positions:
        low = indices & ((1 << p) - 1)
        indices = ((indices >> p) << (p + 1)) | low
    return indices


def _run_blocks(n_groups: int, n_threads: int, body):
    if n_threads > 1 and n_groups >= _PARALLEL_MIN:
        n_workers = min(n_threads, (n_groups + _BLOCK - 1) // _BLOCK)
        chunk = -(-n_groups // n_workers)

        def worker(lo):
            hi = min(lo + chunk, n_groups)
            for start in range(lo, hi, _BLOCK):
                body(start, min(start + _BLOCK, hi))

        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            list(pool.map(worker, range(0, n_groups, chunk)))
    else:
        for start in range(0, n_groups, _BLOCK):
            body(start, min(start + _BLOCK, n_groups))


def apply_matrix(
    amplitudes: np.ndarray,
    n_qubits: int,
    targets,
    matrix,
    controls=(),
    n_threads: int = 1,
    kernel: KernelClass | None = None,
):
    """Apply a 2**t x 2**t matrix to `targets` of a flat array, in place.

    Scratch is bounded by the block size times the group width; no
    state-sized temporary is allocated.  Worker threads own disjoint base
    ranges, so results do not depend on `n_threads`.
    """
    targets = tuple(targets)
    controls = tuple(controls)
    t = len(targets)
    occupied_qubits = targets + controls
    if len(set(occupied_qubits)) != len(occupied_qubits):
        raise ShapeError("targets and controls must be distinct")
    for q in occupied_qubits:
        if not 0 <= q < n_qubits:
            raise ShapeError(f"qubit {q} out of range for {n_qubits} qubits")
    mat64 = np.ascontiguousarray(matrix, dtype=np.complex128)
    dim = 1 << t
    if mat64.shape != (dim, dim):
        raise ShapeError(f"matrix shape {mat64.shape} does not fit {t} target(s)")
    if kernel is None:
        kernel = classify_kernel(mat64)

    tpos = [bit_position(n_qubits, q) for q in targets]
    cpos = [bit_position(n_qubits, q) for q in controls]
    occupied = sorted(tpos + cpos)
    cmask = 0
    for p in cpos:
        cmask |= 1 << p
    offsets = np.zeros(dim, dtype=np.int64)
    for j in range(dim):
        off = 0
        for b, p in enumerate(tpos):
            if (j >> (t - 1 - b)) & 1:
                off |= 1 << p
        offsets[j] = off
    n_groups = 1 << (n_qubits - len(occupied))

    def base_indices(start, stop):
        idx = np.arange(start, stop, dtype=np.int64)
        idx = _insert_zero_bits(idx, occupied)
        return idx | cmask if cmask else idx

    if kernel is KernelClass.DIAGONAL:
        diag64 = np.diagonal(mat64)
        rows = [j for j in range(dim) if diag64[j] != 1.0]
        diag = diag64.astype(amplitudes.dtype)
        if not rows:
            return

        def body(start, stop):
            base = base_indices(start, stop)
            for j in rows:
                amplitudes[base + offsets[j]] *= diag[j]

    elif kernel is KernelClass.PERMUTATION:
        src = np.argmax(mat64 != 0, axis=1)
        phases64 = mat64[np.arange(dim), src]
        moved = [j for j in range(dim) if src[j] != j or phases64[j] != 1.0]
        phases = phases64.astype(amplitudes.dtype)
        if not moved:
            return
        src_offsets = offsets[src[moved]]

        def body(start, stop):
            base = base_indices(start, stop)
            gathered = amplitudes[src_offsets[:, None] + base[None, :]]
            for r, j in enumerate(moved):
                row = gathered[r]
                if phases64[j] != 1.0:
                    row = row * phases[j]
                amplitudes[base + offsets[j]] = row

    else:
        mat = mat64.astype(amplitudes.dtype)

        def body(start, stop):
            base = base_indices(start, stop)
            idx = offsets[:, None] + base[None, :]
            amplitudes[idx] = mat @ amplitudes[idx]

    _run_blocks(n_groups, n_threads, body)


def apply_gate(
    state: StateVector,
    spec: GateSpec,
    n_threads: int = 1,
    kernel: KernelClass | None = None,
):
    """Apply one gate to a state, in place."""
    apply_matrix(
        state.amplitudes,
        state.n_qubits,
        spec.targets,
        gate_matrix(spec),
        spec.controls,
        n_threads=n_threads,
        kernel=kernel,
    )
