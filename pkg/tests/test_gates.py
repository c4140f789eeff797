import numpy as np
import pytest

from oracle import full_matrix, oracle_apply, random_circuit, random_gate, random_state
from qsim.circuit import Circuit
from qsim.errors import ArityError, ShapeError
from qsim.gates import (
    CNOT,
    CZ,
    CZPow,
    GateKind,
    GateSpec,
    H,
    KernelClass,
    RX,
    RY,
    RZ,
    SWAP,
    Unitary,
    VariationalLayer,
    X,
    Y,
    Z,
    apply_gate,
    apply_matrix,
    classify_kernel,
    expanded_matrix,
    gate_matrix,
)
from qsim.state import from_amplitudes, norm, zero_state


def test_gate_matrix_z():
    np.testing.assert_array_equal(gate_matrix(Z(0)), np.diag([1, -1]))


def test_gate_matrix_ry_pi():
    np.testing.assert_allclose(
        gate_matrix(RY(0, np.pi)), [[0, -1], [1, 0]], atol=1e-15
    )


def test_gate_matrix_swap():
    expected = np.eye(4)[[0, 2, 1, 3]]
    np.testing.assert_array_equal(gate_matrix(SWAP(0, 1)), expected)


def test_gate_matrix_conventions():
    theta = 0.8
    rz = gate_matrix(RZ(0, theta))
    np.testing.assert_allclose(
        rz, np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)]), atol=1e-15
    )
    czp = gate_matrix(CZPow(0, 1, theta))
    np.testing.assert_allclose(czp, np.diag([1, 1, 1, np.exp(1j * theta)]), atol=1e-15)
    rx = gate_matrix(RX(0, theta))
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    np.testing.assert_allclose(rx, [[c, -1j * s], [-1j * s, c]], atol=1e-15)


def test_variational_layer_matrix():
    thetas = (0.3, 1.1, -0.7, 2.0)
    spec = VariationalLayer(0, 1, thetas)
    ry = lambda t: gate_matrix(RY(0, t))
    expected = (
        np.kron(ry(thetas[2]), ry(thetas[3]))
        @ gate_matrix(CZ(0, 1))
        @ np.kron(ry(thetas[0]), ry(thetas[1]))
    )
    np.testing.assert_allclose(spec.matrix, expected, atol=1e-15)


def test_apply_x():
    state = zero_state(1)
    apply_gate(state, X(0))
    np.testing.assert_array_equal(state.amplitudes, [0, 1])


def test_apply_cnot_flips_target():
    state = from_amplitudes([0, 0, 1, 0])
    apply_gate(state, CNOT(0, 1))
    np.testing.assert_array_equal(state.amplitudes, [0, 0, 0, 1])


def test_apply_z_flips_half():
    state = from_amplitudes([0.6, 0.8])
    apply_gate(state, Z(0))
    np.testing.assert_array_equal(state.amplitudes, [0.6, -0.8])


def test_random_circuit_matches_oracle():
    rng = np.random.default_rng(17)
    circuit = random_circuit(6, 20, rng)
    initial = random_state(6, rng)
    produced = circuit.execute(initial)
    expected = oracle_apply(circuit, initial)
    assert np.max(np.abs(produced.amplitudes - expected.amplitudes)) <= 1e-10


def test_norm_preserved_by_random_gates():
    rng = np.random.default_rng(23)
    state = random_state(7, rng)
    for _ in range(50):
        apply_gate(state, random_gate(7, rng))
    assert abs(norm(state) - 1.0) <= 1e-10


def test_classify_kernel():
    assert classify_kernel(gate_matrix(H(0))) is KernelClass.GENERAL
    assert classify_kernel(gate_matrix(Z(0))) is KernelClass.DIAGONAL
    assert classify_kernel(gate_matrix(RZ(0, 0.4))) is KernelClass.DIAGONAL
    assert classify_kernel(gate_matrix(CZ(0, 1))) is KernelClass.DIAGONAL
    assert classify_kernel(gate_matrix(CZPow(0, 1, 0.4))) is KernelClass.DIAGONAL
    assert classify_kernel(gate_matrix(X(0))) is KernelClass.PERMUTATION
    assert classify_kernel(gate_matrix(CNOT(0, 1))) is KernelClass.PERMUTATION
    assert classify_kernel(gate_matrix(SWAP(0, 1))) is KernelClass.PERMUTATION
    assert classify_kernel(gate_matrix(RY(0, 1.0))) is KernelClass.GENERAL


@pytest.mark.parametrize(
    "spec",
    [X(3), SWAP(1, 6), CNOT(5, 2), CNOT(2, 5, controls=(0,)), Y(4)],
)
def test_permutation_path_bit_identical_to_general(spec):
    rng = np.random.default_rng(29)
    n = 8
    amps = rng.standard_normal(1 << n) + 1j * rng.standard_normal(1 << n)
    fast = amps.copy()
    slow = amps.copy()
    apply_matrix(
        fast, n, spec.targets, gate_matrix(spec), spec.controls,
        kernel=KernelClass.PERMUTATION,
    )
    apply_matrix(
        slow, n, spec.targets, gate_matrix(spec), spec.controls,
        kernel=KernelClass.GENERAL,
    )
    np.testing.assert_array_equal(fast, slow)


@pytest.mark.parametrize(
    "spec",
    [Z(2), RZ(4, 0.9), CZ(1, 6), CZPow(0, 5, 2.2), CZ(3, 7, controls=(1,))],
)
def test_diagonal_path_matches_general(spec):
    rng = np.random.default_rng(31)
    n = 8
    amps = rng.standard_normal(1 << n) + 1j * rng.standard_normal(1 << n)
    amps /= np.linalg.norm(amps)
    fast = amps.copy()
    slow = amps.copy()
    apply_matrix(
        fast, n, spec.targets, gate_matrix(spec), spec.controls,
        kernel=KernelClass.DIAGONAL,
    )
    apply_matrix(
        slow, n, spec.targets, gate_matrix(spec), spec.controls,
        kernel=KernelClass.GENERAL,
    )
    assert np.max(np.abs(fast - slow)) <= 1e-15


def test_controls_match_projected_oracle():
    rng = np.random.default_rng(37)
    for n in (4, 6, 8):
        for _ in range(20):
            spec = random_gate(n, rng, max_controls=3)
            circuit = Circuit(n).add(spec)
            initial = random_state(n, rng)
            produced = circuit.execute(initial)
            expected = oracle_apply(circuit, initial)
            assert np.max(np.abs(produced.amplitudes - expected.amplitudes)) <= 1e-10


def test_control_leaves_unset_amplitudes_untouched():
    rng = np.random.default_rng(41)
    initial = random_state(4, rng)
    state = initial.copy()
    apply_gate(state, H(2, controls=(0,)))
    # qubit 0 is the top bit; amplitudes with it clear must be untouched
    half = 1 << 3
    np.testing.assert_array_equal(state.amplitudes[:half], initial.amplitudes[:half])
    assert np.max(np.abs(state.amplitudes[half:] - initial.amplitudes[half:])) > 1e-3


@pytest.mark.parametrize(
    "spec", [H(1), X(0), Y(2), Z(1), CNOT(0, 2), CZ(1, 2), SWAP(0, 2)]
)
def test_self_inverse_gates(spec):
    rng = np.random.default_rng(43)
    initial = random_state(3, rng)
    state = initial.copy()
    apply_gate(state, spec)
    apply_gate(state, spec)
    assert np.max(np.abs(state.amplitudes - initial.amplitudes)) <= 1e-12


def test_adjoint_inverts():
    rng = np.random.default_rng(47)
    for _ in range(20):
        spec = random_gate(5, rng)
        initial = random_state(5, rng)
        state = initial.copy()
        apply_gate(state, spec)
        apply_gate(state, spec.adjoint())
        assert np.max(np.abs(state.amplitudes - initial.amplitudes)) <= 1e-10


def test_spec_validation():
    with pytest.raises(ShapeError):
        GateSpec(GateKind.SWAP, (1, 1))
    with pytest.raises(ShapeError):
        CNOT(0, 1, controls=(1,))
    with pytest.raises(ShapeError):
        H(-1)
    with pytest.raises(ArityError):
        GateSpec(GateKind.RY, (0,), params=())
    with pytest.raises(ArityError):
        GateSpec(GateKind.H, (0,), params=(0.1,))
    with pytest.raises(ValueError):
        GateSpec(GateKind.UNITARY, (0,))
    with pytest.raises(ValueError):
        Unitary(np.array([[1, 0], [0, 2]]), 0)
    with pytest.raises(ShapeError):
        Unitary(np.eye(4), 0)


def test_with_params_recomputes_matrix():
    layer = VariationalLayer(0, 1, (0.1, 0.2, 0.3, 0.4))
    rebound = layer.with_params((0.5, 0.6, 0.7, 0.8))
    fresh = VariationalLayer(0, 1, (0.5, 0.6, 0.7, 0.8))
    np.testing.assert_array_equal(rebound.matrix, fresh.matrix)
    assert RY(0, 0.1).with_params((0.9,)).params == (0.9,)


def test_expanded_matrix_identity_padding():
    spec = H(0)
    np.testing.assert_allclose(
        expanded_matrix(spec, (0, 1)), np.kron(gate_matrix(spec), np.eye(2)), atol=1e-15
    )
    np.testing.assert_allclose(
        expanded_matrix(spec, (1, 0)), np.kron(np.eye(2), gate_matrix(spec)), atol=1e-15
    )


def test_expanded_matrix_controls():
    controlled = X(1, controls=(0,))
    np.testing.assert_allclose(
        expanded_matrix(controlled, (0, 1)), gate_matrix(CNOT(0, 1)), atol=1e-15
    )


def test_expanded_matrix_agrees_with_oracle():
    rng = np.random.default_rng(53)
    for _ in range(20):
        spec = random_gate(4, rng, max_controls=2)
        support = tuple(range(4))
        np.testing.assert_allclose(
            expanded_matrix(spec, support), full_matrix(spec, 4), atol=1e-12
        )


def test_apply_matrix_validation():
    amps = zero_state(3).amplitudes
    with pytest.raises(ShapeError):
        apply_matrix(amps, 3, (0, 0), np.eye(4))
    with pytest.raises(ShapeError):
        apply_matrix(amps, 3, (5,), np.eye(2))
    with pytest.raises(ShapeError):
        apply_matrix(amps, 3, (0,), np.eye(4))


def test_threaded_application_is_bit_identical():
    # above the parallel threshold the kernel splits work across threads
    rng = np.random.default_rng(59)
    n = 18
    amps = rng.standard_normal(1 << n) + 1j * rng.standard_normal(1 << n)
    amps /= np.linalg.norm(amps)
    serial = amps.copy()
    threaded = amps.copy()
    apply_matrix(serial, n, (9,), gate_matrix(H(9)), n_threads=1)
    apply_matrix(threaded, n, (9,), gate_matrix(H(9)), n_threads=4)
    np.testing.assert_array_equal(serial, threaded)
