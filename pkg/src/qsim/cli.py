"""Benchmark CLI: one JSON record per line on stdout.

Subcommands cover the standard workloads (qft, variational, shots,
evolve, vqe) plus `run` for circuits described in JSON files.  Exit codes:
0 success, 2 usage or parse errors, 3 capacity errors.
"""

import argparse
import hashlib
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from .circuit import Circuit, circuit_from_dict, fuse, qft_circuit, variational_circuit
from .errors import CapacityError, ParseError, SimulationError
from .evolution import EvolutionConfig, Schedule, Solver, adiabatic_evolve
from .gates import H
from .hamiltonians import Form, build_tfim, build_x, eigensystem, expectation
from .measurement import frequencies, sample
from .sharding import execute_sharded
from .state import Precision
from .variational import OptimizerConfig, VQEProblem, aavqe, vqe_minimize

VERIFY_ATOL = 1e-12


@dataclass
class BenchRecord:
    benchmark: str
    n_qubits: int
    precision: str
    threads: int
    shards: int
    workers: int
    fused: bool
    seed: int
    wall_seconds: float = 0.0
    phase_seconds: dict = field(default_factory=dict)
    dt: float | None = None
    T: float | None = None
    solver: str | None = None
    n_shots: int | None = None
    extra: dict = field(default_factory=dict)

    def to_json(self) -> str:
        payload = {
            "benchmark": self.benchmark,
            "n_qubits": self.n_qubits,
            "precision": self.precision,
            "threads": self.threads,
            "shards": self.shards,
            "workers": self.workers,
            "fused": self.fused,
            "dt": self.dt,
            "T": self.T,
            "solver": self.solver,
            "n_shots": self.n_shots,
            "seed": self.seed,
            "wall_seconds": self.wall_seconds,
            "phase_seconds": self.phase_seconds,
        }
        payload.update(self.extra)
        return json.dumps(payload)


def _default_threads() -> int:
    env = os.environ.get("QSIM_THREADS")
    if env:
        return int(env)
    return os.cpu_count() or 1


def _add_common(parser, nqubits_default=None):
    parser.add_argument(
        "--nqubits", type=int, default=nqubits_default, required=nqubits_default is None
    )
    parser.add_argument("--precision", choices=["f32", "f64"], default="f64")
    parser.add_argument("--threads", type=int, default=None)
    parser.add_argument("--shards", type=int, default=1)
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--verify", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qsim-bench",
        description="State-vector simulator benchmarks (JSON lines on stdout).",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("qft", help="quantum Fourier transform")
    _add_common(p)
    p.add_argument("--fuse", action="store_true")

    p = sub.add_parser("variational", help="layered RY/CZ circuit")
    _add_common(p)
    p.add_argument("--fuse", action="store_true")
    p.add_argument("--layers", type=int, default=5)

    p = sub.add_parser("shots", help="H on every qubit, then sampling")
    _add_common(p)
    p.add_argument("--nshots", type=int, default=10000)

    p = sub.add_parser("evolve", help="adiabatic TFIM evolution")
    _add_common(p)
    p.add_argument("--dt", type=float, default=0.01)
    p.add_argument("--T", type=float, default=1.0)
    p.add_argument(
        "--solver", choices=[s.value for s in Solver], default=Solver.EXP.value
    )

    p = sub.add_parser("vqe", help="VQE or AAVQE on the TFIM")
    _add_common(p)
    p.add_argument("--layers", type=int, default=5)
    p.add_argument("--maxevals", type=int, default=20000)
    p.add_argument("--aavqe", type=int, default=None, metavar="T_MAX")

    p = sub.add_parser("run", help="execute a circuit from a JSON file")
    _add_common(p, nqubits_default=0)
    p.add_argument("--circuit", required=True)
    p.add_argument("--fuse", action="store_true")
    p.add_argument("--nshots", type=int, default=None)
    return parser


def parse_circuit_file(path: str) -> Circuit:
    """Load a {"nqubits": ..., "gates": [...]} description from disk."""
    try:
        with open(path) as handle:
            data = json.load(handle)
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(
            f"{path} is not valid JSON (line {exc.lineno}, column {exc.colno}): {exc.msg}"
        ) from exc
    return circuit_from_dict(data)


def _execute(circuit, args, precision):
    if args.shards > 1:
        return execute_sharded(
            circuit, args.shards, args.workers, precision=precision
        )
    return circuit.execute(n_threads=args.threads, precision=precision)


def _verify_state(circuit, state, record):
    reference = circuit.execute(
        n_threads=1, precision=Precision(record.precision)
    )
    diff = float(np.max(np.abs(state.amplitudes - reference.amplitudes)))
    record.extra["verify_max_abs_diff"] = diff
    return diff <= max(VERIFY_ATOL, 1e-4 if record.precision == "f32" else 0.0)


def _run_qft(args, record):
    t0 = time.perf_counter()
    circuit = qft_circuit(args.nqubits)
    if args.fuse:
        circuit = fuse(circuit)
    t1 = time.perf_counter()
    state = _execute(circuit, args, Precision(args.precision))
    t2 = time.perf_counter()
    record.phase_seconds = {"build": t1 - t0, "apply": t2 - t1}
    record.extra["n_gates"] = len(circuit.queue)
    if args.verify and not _verify_state(circuit, state, record):
        return 1
    return 0


def _run_variational(args, record):
    rng = np.random.default_rng(args.seed)
    t0 = time.perf_counter()
    params = rng.uniform(0, 2 * math.pi, args.nqubits * (2 * args.layers + 1))
    circuit = variational_circuit(args.nqubits, args.layers, params, fused=args.fuse)
    t1 = time.perf_counter()
    state = _execute(circuit, args, Precision(args.precision))
    t2 = time.perf_counter()
    record.phase_seconds = {"build": t1 - t0, "apply": t2 - t1}
    record.extra["n_gates"] = len(circuit.queue)
    if args.verify and not _verify_state(circuit, state, record):
        return 1
    return 0


def _run_shots(args, record):
    t0 = time.perf_counter()
    circuit = Circuit(args.nqubits)
    circuit.add(H(q) for q in range(args.nqubits))
    t1 = time.perf_counter()
    state = _execute(circuit, args, Precision(args.precision))
    t2 = time.perf_counter()
    result = sample(state, range(args.nqubits), args.nshots, args.seed)
    t3 = time.perf_counter()
    record.n_shots = args.nshots
    record.phase_seconds = {"build": t1 - t0, "apply": t2 - t1, "sample": t3 - t2}
    record.extra["rng"] = result.rng_algorithm
    record.extra["sample_digest"] = hashlib.sha256(
        result.samples.tobytes()
    ).hexdigest()
    if args.nqubits <= 12:
        record.extra["frequencies"] = {
            str(k): v for k, v in frequencies(result).items()
        }
    return 0


def _run_evolve(args, record):
    solver = Solver(args.solver)
    form = Form.TROTTER if solver is Solver.TROTTER else Form.DENSE
    t0 = time.perf_counter()
    h0 = build_x(args.nqubits, form)
    h1 = build_tfim(args.nqubits, 1.0, form)
    config = EvolutionConfig(solver, args.dt, args.T)
    t1 = time.perf_counter()
    final = adiabatic_evolve(
        h0,
        h1,
        Schedule.linear(),
        config,
        n_shards=args.shards,
        n_workers=args.workers,
        n_threads=args.threads,
    )
    t2 = time.perf_counter()
    record.dt, record.T, record.solver = args.dt, args.T, solver.value
    record.phase_seconds = {"build": t1 - t0, "apply": t2 - t1}
    h1_dense = h1 if form is Form.DENSE else build_tfim(args.nqubits, 1.0, Form.DENSE)
    record.extra["final_energy"] = expectation(h1_dense, final)
    if args.verify:
        reference = adiabatic_evolve(
            build_x(args.nqubits, Form.DENSE),
            build_tfim(args.nqubits, 1.0, Form.DENSE),
            Schedule.linear(),
            EvolutionConfig(Solver.EXP, args.dt, args.T),
        )
        inner = np.vdot(reference.amplitudes, final.amplitudes)
        record.extra["overlap_deficit_vs_exp"] = float(1.0 - abs(inner) ** 2)
    return 0


def _run_vqe(args, record):
    rng = np.random.default_rng(args.seed)
    t0 = time.perf_counter()
    h1 = build_tfim(args.nqubits, 1.0, Form.DENSE)
    n_params = args.nqubits * (2 * args.layers + 1)
    x0 = rng.uniform(0, 2 * math.pi, n_params)
    ansatz = variational_circuit(args.nqubits, args.layers, x0)
    t1 = time.perf_counter()
    if args.aavqe is not None:
        h0 = build_x(args.nqubits, Form.DENSE)
        energy, _ = aavqe(h0, h1, ansatz, x0, args.aavqe, args.maxevals)
        record.solver = "aavqe"
    else:
        energy, _ = vqe_minimize(
            VQEProblem(ansatz, h1), x0, OptimizerConfig(max_evals=args.maxevals)
        )
        record.solver = "vqe"
    t2 = time.perf_counter()
    lowest = float(eigensystem(h1)[0][0])
    record.phase_seconds = {"build": t1 - t0, "apply": t2 - t1}
    record.extra["energy"] = energy
    record.extra["lowest_eigenvalue"] = lowest
    record.extra["energy_error"] = energy - lowest
    return 0


def _run_file(args, record):
    t0 = time.perf_counter()
    circuit = parse_circuit_file(args.circuit)
    if args.fuse:
        circuit = fuse(circuit)
    record.n_qubits = circuit.n_qubits
    t1 = time.perf_counter()
    state = _execute(circuit, args, Precision(args.precision))
    t2 = time.perf_counter()
    record.phase_seconds = {"build": t1 - t0, "apply": t2 - t1}
    record.extra["n_gates"] = len(circuit.queue)
    if args.nshots:
        result = sample(state, range(circuit.n_qubits), args.nshots, args.seed)
        record.n_shots = args.nshots
        record.phase_seconds["sample"] = time.perf_counter() - t2
        record.extra["sample_digest"] = hashlib.sha256(
            result.samples.tobytes()
        ).hexdigest()
    if args.verify and not _verify_state(circuit, state, record):
        return 1
    return 0


_RUNNERS = {
    "qft": _run_qft,
    "variational": _run_variational,
    "shots": _run_shots,
    "evolve": _run_evolve,
    "vqe": _run_vqe,
    "run": _run_file,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.threads is None:
        args.threads = _default_threads()
    record = BenchRecord(
        benchmark=args.command,
        n_qubits=args.nqubits,
        precision=args.precision,
        threads=args.threads,
        shards=args.shards,
        workers=args.workers,
        fused=bool(getattr(args, "fuse", False)),
        seed=args.seed,
    )
    wall0 = time.perf_counter()
    try:
        status = _RUNNERS[args.command](args, record)
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return 3
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 2
    except (SimulationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    record.wall_seconds = time.perf_counter() - wall0
    print(record.to_json())
    return status


if __name__ == "__main__":
    sys.exit(main())
