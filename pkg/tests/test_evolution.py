import numpy as np
import pytest

from oracle import oracle_evolve_exact, random_state
from qsim.circuit import Circuit
from qsim.errors import FormError, ShapeError
from qsim.evolution import (
    EnergyCallback,
    EntanglementEntropyCallback,
    EvolutionConfig,
    GapCallback,
    OverlapCallback,
    Schedule,
    ScheduleForm,
    Solver,
    adiabatic_evolve,
    entanglement_entropy,
    evolve,
    optimize_schedule,
    trotter_step_circuit,
)
from qsim.gates import CNOT, H
from qsim.hamiltonians import (
    DenseHamiltonian,
    Form,
    TrotterHamiltonian,
    as_dense,
    build_tfim,
    build_x,
    expectation,
    ground_state_vector,
)
from qsim.state import from_amplitudes, overlap, zero_state
from qsim.variational import OptimizerConfig

Z = np.array([[1, 0], [0, -1]], dtype=complex)


def plus_state():
    return from_amplitudes(np.array([1.0, 1.0]) / np.sqrt(2))


def overlap_deficit(a, b):
    return 1.0 - abs(overlap(a, b)) ** 2


def test_schedule_linear():
    s = Schedule.linear()
    assert s.value(0.0) == 0.0
    assert s.value(1.0) == 1.0
    assert s.value(0.25) == 0.25


def test_schedule_polynomial():
    # single coefficient: s(tau) = tau; [0, 1]: s(tau) = tau^2
    assert Schedule.polynomial([3.0]).value(0.5) == pytest.approx(0.5)
    assert Schedule.polynomial([0.0, 1.0]).value(0.5) == pytest.approx(0.25)
    mixed = Schedule.polynomial([1.0, 1.0])
    assert mixed.value(0.5) == pytest.approx((0.5 + 0.25) / 2)
    assert mixed.value(1.0) == pytest.approx(1.0)
    assert mixed.form is ScheduleForm.POLYNOMIAL


def test_schedule_validation():
    with pytest.raises(ShapeError):
        Schedule.polynomial([])
    with pytest.raises(ValueError):
        Schedule.polynomial([1.0, -1.0])


def test_config_validation():
    with pytest.raises(ValueError):
        EvolutionConfig(Solver.EXP, 0.0, 1.0)
    with pytest.raises(ValueError):
        EvolutionConfig(Solver.EXP, 0.1, -1.0)
    with pytest.raises(ValueError):
        EvolutionConfig(Solver.EXP, 2.0, 1.0)
    EvolutionConfig(Solver.EXP, 1.0, 1.0)  # dt == T is allowed


def test_exp_matches_analytic_phase_rotation():
    # e^{-iZt}|+> = (e^{-it}|0> + e^{it}|1>)/sqrt(2)
    h = DenseHamiltonian(1, Z)
    t = 0.7
    final = evolve(h, plus_state(), EvolutionConfig(Solver.EXP, 0.07, t))
    expected = np.array([np.exp(-1j * t), np.exp(1j * t)]) / np.sqrt(2)
    assert np.max(np.abs(final.amplitudes - expected)) <= 1e-12


def test_exp_single_step_matches_oracle():
    rng = np.random.default_rng(101)
    raw = rng.normal(size=(16, 16)) + 1j * rng.normal(size=(16, 16))
    h = DenseHamiltonian(4, raw + raw.conj().T)
    psi0 = random_state(4, rng)
    final = evolve(h, psi0, EvolutionConfig(Solver.EXP, 0.3, 0.3))
    exact = oracle_evolve_exact(h, psi0, 0.3)
    assert np.max(np.abs(final.amplitudes - exact.amplitudes)) <= 1e-12


def test_exp_step_count_is_irrelevant_for_constant_h():
    rng = np.random.default_rng(103)
    h = build_tfim(3, 1.0)
    psi0 = random_state(3, rng)
    one = evolve(h, psi0, EvolutionConfig(Solver.EXP, 1.0, 1.0))
    many = evolve(h, psi0, EvolutionConfig(Solver.EXP, 0.01, 1.0))
    assert np.max(np.abs(one.amplitudes - many.amplitudes)) <= 1e-10


def test_rk4_constant_h_accuracy():
    rng = np.random.default_rng(107)
    h = build_tfim(3, 1.0)
    psi0 = random_state(3, rng)
    final = evolve(h, psi0, EvolutionConfig(Solver.RK4, 1e-3, 0.5))
    exact = oracle_evolve_exact(h, psi0, 0.5)
    assert overlap_deficit(final, exact) <= 1e-8
    assert abs(np.linalg.norm(final.amplitudes) - 1.0) <= 1e-8


def test_rk45_constant_h_accuracy():
    rng = np.random.default_rng(109)
    h = build_tfim(3, 1.0)
    psi0 = random_state(3, rng)
    final = evolve(h, psi0, EvolutionConfig(Solver.RK45, 1e-2, 0.5))
    exact = oracle_evolve_exact(h, psi0, 0.5)
    assert overlap_deficit(final, exact) <= 1e-8


def test_rk4_fourth_order_convergence():
    rng = np.random.default_rng(113)
    h = build_tfim(3, 1.0)
    psi0 = random_state(3, rng)
    exact = oracle_evolve_exact(h, psi0, 1.0)
    deficits = []
    for dt in (0.02, 0.01):
        final = evolve(h, psi0, EvolutionConfig(Solver.RK4, dt, 1.0))
        deficits.append(max(overlap_deficit(final, exact), 1e-300))
    order = np.log2(deficits[0] / deficits[1])
    assert 3.0 <= order <= 5.0


def test_fractional_final_step():
    # T = 0.25 with dt = 0.1 ends with a 0.05 remainder step
    h = DenseHamiltonian(1, Z)
    final = evolve(h, plus_state(), EvolutionConfig(Solver.EXP, 0.1, 0.25))
    expected = np.array([np.exp(-0.25j), np.exp(0.25j)]) / np.sqrt(2)
    assert np.max(np.abs(final.amplitudes - expected)) <= 1e-12


def test_trotter_single_group_is_exact():
    # disjoint supports collapse into one group, so splitting is exact
    rng = np.random.default_rng(127)
    terms = [((0,), 0.8 * Z), ((1,), -1.1 * Z)]
    h = TrotterHamiltonian(2, terms)
    psi0 = random_state(2, rng)
    final = evolve(h, psi0, EvolutionConfig(Solver.TROTTER, 0.25, 1.0))
    exact = oracle_evolve_exact(as_dense(h), psi0, 1.0)
    assert np.max(np.abs(final.amplitudes - exact.amplitudes)) <= 1e-12


def test_trotter_step_circuit_structure():
    h = build_tfim(4, 1.0, form=Form.TROTTER)
    circuit = trotter_step_circuit(h, 0.1)
    # bonds (0,1),(2,3) share a group, (1,2),(3,0) another: 2+2 halves + mirror
    assert circuit.n_qubits == 4
    assert len(circuit.queue) == 6


def test_trotter_approaches_exact_as_dt_shrinks():
    h = build_tfim(4, 1.0, form=Form.TROTTER)
    psi0 = ground_state_vector(build_x(4))
    exact = oracle_evolve_exact(as_dense(h), psi0, 1.0)
    deficits = []
    for dt in (0.1, 0.05):
        final = evolve(h, psi0, EvolutionConfig(Solver.TROTTER, dt, 1.0))
        deficits.append(overlap_deficit(final, exact))
    assert deficits[1] < deficits[0]
    assert deficits[1] <= 1e-4


def test_trotter_sharded_matches_serial():
    h = build_tfim(4, 1.0, form=Form.TROTTER)
    psi0 = ground_state_vector(build_x(4))
    config = EvolutionConfig(Solver.TROTTER, 0.1, 0.5)
    serial = evolve(h, psi0, config)
    sharded = evolve(h, psi0, config, n_shards=2, n_workers=2)
    assert np.max(np.abs(serial.amplitudes - sharded.amplitudes)) <= 1e-12


def test_form_mismatch_raises_before_any_callback():
    h_trotter = build_tfim(3, 1.0, form=Form.TROTTER)
    h_dense = build_tfim(3, 1.0)
    cb = EnergyCallback(h_dense)
    with pytest.raises(FormError):
        evolve(h_trotter, zero_state(3), EvolutionConfig(Solver.RK4, 0.1, 1.0), [cb])
    with pytest.raises(FormError):
        evolve(h_dense, zero_state(3), EvolutionConfig(Solver.TROTTER, 0.1, 1.0), [cb])
    assert cb.records == []


def test_qubit_mismatch():
    with pytest.raises(ShapeError):
        evolve(build_x(3), zero_state(2), EvolutionConfig(Solver.EXP, 0.1, 1.0))


def test_initial_state_not_mutated():
    psi0 = plus_state()
    keep = psi0.amplitudes.copy()
    evolve(DenseHamiltonian(1, Z), psi0, EvolutionConfig(Solver.EXP, 0.1, 1.0))
    np.testing.assert_array_equal(psi0.amplitudes, keep)


def test_callbacks_run_at_t0_and_after_each_step():
    h = build_tfim(2, 1.0)
    cb = EnergyCallback(h)
    evolve(h, zero_state(2), EvolutionConfig(Solver.EXP, 0.1, 1.0), [cb])
    assert len(cb.records) == 11
    # constant Hamiltonian: energy is conserved along the whole path
    assert np.max(np.abs(np.asarray(cb.records) - cb.records[0])) <= 1e-10


def test_overlap_callback_starts_at_one():
    h = build_tfim(2, 1.0)
    psi0 = ground_state_vector(h)
    cb = OverlapCallback(psi0)
    evolve(h, psi0, EvolutionConfig(Solver.EXP, 0.5, 1.0), [cb])
    assert cb.records[0] == pytest.approx(1.0, abs=1e-12)
    # eigenstate evolution only picks up a phase
    assert cb.records[-1] == pytest.approx(1.0, abs=1e-10)


def test_gap_callback_on_adiabatic_path():
    h0 = build_x(4)
    h1 = build_tfim(4, 1.0)
    cb = GapCallback()
    adiabatic_evolve(
        h0, h1, Schedule.linear(), EvolutionConfig(Solver.EXP, 0.25, 1.0), [cb]
    )
    assert abs(cb.records[0] - 2.0) <= 1e-8
    assert all(g > 0 for g in cb.records)


def test_adiabatic_defaults_to_h0_ground_state():
    h0 = build_x(3)
    h1 = build_tfim(3, 1.0)
    config = EvolutionConfig(Solver.EXP, 0.05, 0.05)
    final = adiabatic_evolve(h0, h1, Schedule.linear(), config)
    # one tiny step: still essentially the |+...+> start
    assert overlap_deficit(final, ground_state_vector(h0)) <= 0.05**2


def test_adiabatic_long_sweep_reaches_target_ground_state():
    h0 = build_x(3)
    h1 = build_tfim(3, 1.0)
    config = EvolutionConfig(Solver.EXP, 0.05, 12.0)
    final = adiabatic_evolve(h0, h1, Schedule.linear(), config)
    target = ground_state_vector(h1)
    assert abs(overlap(target, final)) ** 2 > 0.95


def test_adiabatic_qubit_mismatch():
    with pytest.raises(ShapeError):
        adiabatic_evolve(
            build_x(2), build_tfim(3, 1.0), Schedule.linear(),
            EvolutionConfig(Solver.EXP, 0.1, 1.0),
        )


def test_entropy_product_state_is_zero():
    state = Circuit(2).add(H(0)).execute()
    assert entanglement_entropy(state, (0,)) == pytest.approx(0.0, abs=1e-12)


def test_entropy_bell_pair_is_one():
    state = Circuit(2).add([H(0), CNOT(0, 1)]).execute()
    assert entanglement_entropy(state, (0,)) == pytest.approx(1.0, abs=1e-9)
    assert entanglement_entropy(state, (1,)) == pytest.approx(1.0, abs=1e-9)


def test_entropy_ghz_any_cut_is_one():
    state = Circuit(3).add([H(0), CNOT(0, 1), CNOT(1, 2)]).execute()
    for cut in [(0,), (1,), (2,), (0, 1), (1, 2)]:
        assert entanglement_entropy(state, cut) == pytest.approx(1.0, abs=1e-9)


def test_entropy_callback_records():
    state_cb = EntanglementEntropyCallback((0,))
    h = build_tfim(2, 1.0)
    evolve(h, zero_state(2), EvolutionConfig(Solver.EXP, 0.5, 1.0), [state_cb])
    assert len(state_cb.records) == 3
    assert state_cb.records[0] == pytest.approx(0.0, abs=1e-12)


def test_entropy_validation():
    state = zero_state(3)
    with pytest.raises(ShapeError):
        entanglement_entropy(state, ())
    with pytest.raises(ShapeError):
        entanglement_entropy(state, (0, 1, 2))
    with pytest.raises(ShapeError):
        entanglement_entropy(state, (0, 0))
    with pytest.raises(ShapeError):
        entanglement_entropy(state, (3,))


def test_optimize_schedule_improves_or_matches_start():
    h0 = build_x(2)
    h1 = build_tfim(2, 1.0)
    config = EvolutionConfig(Solver.EXP, 0.1, 1.0)
    start = expectation(
        h1, adiabatic_evolve(h0, h1, Schedule.polynomial([1.0]), config)
    )
    coeffs, T, energy = optimize_schedule(
        h0, h1, [1.0], 1.0, config, OptimizerConfig(max_evals=60)
    )
    assert energy <= start + 1e-12
    assert T >= config.dt
    assert len(coeffs) == 1
    assert np.isfinite(energy)
