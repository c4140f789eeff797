"""Derivative-free energy minimization: Nelder-Mead, VQE, and AAVQE."""

import math
from dataclasses import dataclass, replace

import numpy as np

from .circuit import Circuit
from .errors import ArityError, ShapeError
from .hamiltonians import combine, expectation


@dataclass
class OptimizerConfig:
    max_evals: int = 5000
    x_tol: float = 1e-6
    f_tol: float = 1e-9
    simplex_scale: float = 0.1

    def __post_init__(self):
        if self.max_evals < 1:
            raise ValueError(f"max_evals must be >= 1, got {self.max_evals}")


def minimize_nelder_mead(f, x0, config: OptimizerConfig | None = None):
    """Downhill simplex search; returns (f_min, x_min).

    Coefficients: reflection 1, expansion 2, contraction 0.5, shrink 0.5.
    The initial simplex perturbs each coordinate of x0 by simplex_scale
    (0.00025 where the coordinate is zero).  Terminates on the evaluation
    budget, or once the simplex diameter is below x_tol and the value
    spread below f_tol together (a spread tie alone is not convergence:
    vertices straddling a minimum hit it with the simplex still wide);
    the best point ever seen is returned.
    """
    cfg = config or OptimizerConfig()
    x0 = np.asarray(x0, dtype=float).ravel()
    n = x0.size
    evals = 0

    def call(x):
        nonlocal evals
        value = float(f(x))
        evals += 1
        if not math.isfinite(value):
            raise FloatingPointError(f"objective returned {value} at {x}")
        return value

    if n == 0:
        return call(x0), x0.copy()

    simplex = [x0.copy()]
    for i in range(n):
        vertex = x0.copy()
        vertex[i] += cfg.simplex_scale if x0[i] != 0.0 else 0.00025
        simplex.append(vertex)
    values = [call(v) for v in simplex]

    while True:
        order = sorted(range(n + 1), key=lambda i: values[i])
        simplex = [simplex[i] for i in order]
        values = [values[i] for i in order]
        diameter = max(np.max(np.abs(v - simplex[0])) for v in simplex[1:])
        if evals >= cfg.max_evals or (
            diameter < cfg.x_tol and values[-1] - values[0] < cfg.f_tol
        ):
            break
        # worst case per iteration: reflect + contract + n shrink evals
        if cfg.max_evals - evals < n + 2:
            break
        centroid = np.mean(simplex[:-1], axis=0)
        worst = simplex[-1]
        reflected = centroid + (centroid - worst)
        f_reflected = call(reflected)
        if f_reflected < values[0]:
            expanded = centroid + 2.0 * (centroid - worst)
            f_expanded = call(expanded)
            if f_expanded < f_reflected:
                simplex[-1], values[-1] = expanded, f_expanded
            else:
                simplex[-1], values[-1] = reflected, f_reflected
        elif f_reflected < values[-2]:
            simplex[-1], values[-1] = reflected, f_reflected
        else:
            if f_reflected < values[-1]:
                contracted = centroid + 0.5 * (reflected - centroid)
                f_contracted = call(contracted)
                accept = f_contracted <= f_reflected
            else:
                contracted = centroid + 0.5 * (worst - centroid)
                f_contracted = call(contracted)
                accept = f_contracted < values[-1]
            if accept:
                simplex[-1], values[-1] = contracted, f_contracted
            else:
                for i in range(1, n + 1):
                    simplex[i] = simplex[0] + 0.5 * (simplex[i] - simplex[0])
                    values[i] = call(simplex[i])
    best = int(np.argmin(values))
    return values[best], simplex[best].copy()


@dataclass
class VQEProblem:
    """A parameterized ansatz circuit paired with a target Hamiltonian."""

    ansatz: Circuit
    hamiltonian: object

    def __post_init__(self):
        if self.ansatz.n_qubits != self.hamiltonian.n_qubits:
            raise ShapeError(
                f"ansatz has {self.ansatz.n_qubits} qubits, "
                f"Hamiltonian has {self.hamiltonian.n_qubits}"
            )

    def loss(self, params) -> float:
        self.ansatz.set_parameters(params)
        return expectation(self.hamiltonian, self.ansatz.execute())


def vqe_minimize(problem: VQEProblem, x0, config: OptimizerConfig | None = None):
    """Minimize the ansatz energy; returns (energy, parameters).

    Nelder-Mead is restarted from the incumbent best point (fresh simplex)
    until the evaluation budget is spent or a restart stops improving.
    """
    cfg = config or OptimizerConfig()
    x0 = np.asarray(x0, dtype=float).ravel()
    if x0.size != problem.ansatz.parameter_count:
        raise ArityError(
            f"ansatz takes {problem.ansatz.parameter_count} parameters, got {x0.size}"
        )
    if x0.size == 0:
        return problem.loss(x0), x0.copy()
    used = 0

    def counted(x):
        nonlocal used
        used += 1
        return problem.loss(x)

    best_f, best_x = None, x0
    while used < cfg.max_evals:
        run_cfg = replace(cfg, max_evals=cfg.max_evals - used)
        f_run, x_run = minimize_nelder_mead(counted, best_x, run_cfg)
        if best_f is not None and f_run >= best_f - max(cfg.f_tol, 1e-12):
            if f_run < best_f:
                best_f, best_x = f_run, x_run
            break
        best_f, best_x = f_run, x_run
    return best_f, best_x


def aavqe(h0, h1, ansatz: Circuit, x0, T_max: int, maxsteps: int):
    """Adiabatically assisted VQE.

    Runs VQE steps t = 0..T_max inclusive on (1-s) H0 + s H1 with
    s = t / T_max, warm-starting each step from the previous parameters;
    T_max = 0 degenerates to a single VQE on H0.  `maxsteps` bounds the
    evaluations per step.  Returns the final (energy, parameters).
    """
    if T_max < 0:
        raise ValueError(f"T_max must be >= 0, got {T_max}")
    params = np.asarray(x0, dtype=float).ravel()
    config = OptimizerConfig(max_evals=maxsteps)
    energy = None
    for t in range(T_max + 1):
        s = t / T_max if T_max else 0.0
        hamiltonian = combine(h0, 1.0 - s, h1, s)
        energy, params = vqe_minimize(VQEProblem(ansatz, hamiltonian), params, config)
    return energy, params
