"""Feedback-optimization iterations: ideal (exact Jacobian), SFO and SMTFO."""

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, EvaluationError, SeqFOError, SingularityError
from .plant import exact_steady_jacobian, linearize, sensitivity


@dataclass(frozen=True)
class ProblemSpec:
    """Steady-state cost ``J(u, y)`` over the box ``lower <= u <= upper``.

    ``step_sizes`` is per input coordinate; pass a scalar for a uniform step.
    """

    cost: callable
    grad_u: callable
    grad_y: callable
    lower: np.ndarray
    upper: np.ndarray
    step_sizes: np.ndarray

    def __post_init__(self):
        lower = np.asarray(self.lower, dtype=float).reshape(-1)
        upper = np.asarray(self.upper, dtype=float).reshape(-1)
        if lower.shape != upper.shape:
            raise DimensionError("lower and upper bounds differ in size")
        if np.any(lower > upper):
            raise ValueError("lower bound exceeds upper bound")
        steps = np.broadcast_to(np.asarray(self.step_sizes, dtype=float), lower.shape).copy()
        if np.any(steps <= 0):
            raise ValueError("step sizes must be positive")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "step_sizes", steps)

    @property
    def input_dim(self):
        return self.lower.size

    @property
    def alpha(self):
        """Scalar step used by the certificates: the largest coordinate step."""
        return float(np.max(self.step_sizes))

    def with_step_sizes(self, step_sizes):
        return ProblemSpec(self.cost, self.grad_u, self.grad_y, self.lower,
                           self.upper, step_sizes)


@dataclass(frozen=True)
class RunConfig:
    max_outer: int
    initial_state: np.ndarray
    initial_input: np.ndarray
    inner_T: int = 1
    stop_tol: float = 0.0
    seed: int = 0
    record_time: bool = False

    def __post_init__(self):
        if self.max_outer < 1:
            raise ValueError("max_outer must be at least 1")
        if self.inner_T < 1:
            raise ValueError("inner_T must be at least 1")
        if self.stop_tol < 0:
            raise ValueError("stop_tol must be nonnegative")
        object.__setattr__(self, "initial_state",
                           np.asarray(self.initial_state, dtype=float).reshape(-1))
        object.__setattr__(self, "initial_input",
                           np.asarray(self.initial_input, dtype=float).reshape(-1))


@dataclass
class TrajectoryLog:
    """One row per gradient step, plus counters and run metadata.

    Row ``k`` holds the input and measured output *used* by gradient step
    ``k`` and the counters after that step. ``elapsed`` is zero unless the run
    was configured with ``record_time``.
    """

    algorithm: str
    k: np.ndarray
    outer: np.ndarray
    inputs: np.ndarray
    outputs: np.ndarray
    cost: np.ndarray
    n_lin: np.ndarray
    n_fwd: np.ndarray
    elapsed: np.ndarray
    final_input: np.ndarray
    final_state: np.ndarray
    final_output: np.ndarray
    n_linearizations: int = 0
    n_forward_steps: int = 0
    n_gradient_steps: int = 0
    n_steady_solves: int = 0
    completed_outer: int = 0
    config: dict = field(default_factory=dict)

    def __len__(self):
        return int(self.k.size)

    @property
    def total_power(self):
        return self.outputs.sum(axis=1)

    def same_as(self, other):
        """Bitwise comparison of every recorded array and counter."""
        arrays = ("k", "outer", "inputs", "outputs", "cost", "n_lin", "n_fwd",
                  "elapsed", "final_input", "final_state", "final_output")
        return (self.algorithm == other.algorithm
                and all(np.array_equal(getattr(self, a), getattr(other, a)) for a in arrays)
                and self.counters() == other.counters())

    def counters(self):
        return {
            "n_linearizations": self.n_linearizations,
            "n_forward_steps": self.n_forward_steps,
            "n_gradient_steps": self.n_gradient_steps,
            "n_steady_solves": self.n_steady_solves,
            "completed_outer": self.completed_outer,
        }


def project_box(v, lower, upper):
    """Euclidean projection onto a box: the componentwise clamp."""
    return np.minimum(np.maximum(v, lower), upper)


def composite_gradient(u, y, S, prob):
    """``grad_u J(u, y) + S^T grad_y J(u, y)``; ``S`` may be a SensitivityMatrix."""
    entries = S.entries if hasattr(S, "entries") else np.atleast_2d(np.asarray(S, dtype=float))
    gu = np.asarray(prob.grad_u(u, y), dtype=float).reshape(-1)
    gy = np.asarray(prob.grad_y(u, y), dtype=float).reshape(-1)
    if entries.shape != (gy.size, gu.size):
        raise DimensionError(
            f"sensitivity shape {entries.shape} does not match (m, p)=({gy.size}, {gu.size})")
    g = gu + entries.T @ gy
    if not np.all(np.isfinite(g)):
        raise EvaluationError("composite gradient is not finite")
    return g


class _Recorder:
    def __init__(self, n_steps, p, m, record_time):
        self.k = np.zeros(n_steps, dtype=np.int64)
        self.outer = np.zeros(n_steps, dtype=np.int64)
        self.inputs = np.zeros((n_steps, p))
        self.outputs = np.zeros((n_steps, m))
        self.cost = np.zeros(n_steps)
        self.n_lin = np.zeros(n_steps, dtype=np.int64)
        self.n_fwd = np.zeros(n_steps, dtype=np.int64)
        self.elapsed = np.zeros(n_steps)
        self.size = 0
        self.t0 = time.perf_counter() if record_time else None

    def add(self, outer, u, y, cost, n_lin, n_fwd):
        i = self.size
        self.k[i] = i
        self.outer[i] = outer
        self.inputs[i] = u
        self.outputs[i] = y
        self.cost[i] = cost
        self.n_lin[i] = n_lin
        self.n_fwd[i] = n_fwd
        if self.t0 is not None:
            self.elapsed[i] = time.perf_counter() - self.t0
        self.size += 1

    def log(self, algorithm, u, x, y, counters, config):
        s = self.size
        return TrajectoryLog(
            algorithm=algorithm, k=self.k[:s], outer=self.outer[:s],
            inputs=self.inputs[:s], outputs=self.outputs[:s], cost=self.cost[:s],
            n_lin=self.n_lin[:s], n_fwd=self.n_fwd[:s], elapsed=self.elapsed[:s],
            final_input=u, final_state=x, final_output=y, config=config, **counters)


def _check(plant, prob, cfg):
    if prob.input_dim != plant.input_dim:
        raise DimensionError("problem and plant input dimensions differ")
    if cfg.initial_input.size != plant.input_dim:
        raise DimensionError("initial input has the wrong size")
    if cfg.initial_state.size != plant.state_dim:
        raise DimensionError("initial state has the wrong size")
    if np.any(cfg.initial_input < prob.lower) or np.any(cfg.initial_input > prob.upper):
        raise ValueError("initial input lies outside the box")


def _config_echo(cfg, algorithm, T):
    return {
        "algorithm": algorithm,
        "max_outer": cfg.max_outer,
        "inner_T": T,
        "stop_tol": cfg.stop_tol,
        "seed": cfg.seed,
        "initial_input": cfg.initial_input.tolist(),
        "initial_state": cfg.initial_state.tolist(),
    }


def _gradient_step(u, y, S, prob):
    g = composite_gradient(u, y, S, prob)
    u_next = project_box(u - prob.step_sizes * g, prob.lower, prob.upper)
    if not np.all(np.isfinite(u_next)):
        raise EvaluationError("projected input is not finite")
    return u_next


def run_ideal_fo(plant, prob, cfg, steady_tol=1e-10):
    """Projected feedback gradient iteration with the exact steady-state Jacobian.

    Each iteration solves for the steady state at the current input (warm
    started from the previous solve), so this is the reference the sequential
    variants are compared against. ``cfg.inner_T`` is ignored.
    """
    _check(plant, prob, cfg)
    rec = _Recorder(cfg.max_outer, plant.input_dim, plant.output_dim, cfg.record_time)
    u = cfg.initial_input.copy()
    x = cfg.initial_state.copy()
    x_ss = None
    n_lin = n_fwd = n_grad = n_ss = 0
    try:
        for k in range(cfg.max_outer):
            y = plant.measure(x, u)
            S = exact_steady_jacobian(plant, u, tol=steady_tol, x0=x_ss)
            x_ss = S.point[0]  # warm start for the next solve
            n_ss += 1
            n_lin += 1
            u_next = _gradient_step(u, y, S, prob)
            n_grad += 1
            x = plant.step(x, u)
            n_fwd += 1
            rec.add(k, u, y, prob.cost(u, y), n_lin, n_fwd)
            done = cfg.stop_tol > 0 and np.max(np.abs(u_next - u)) < cfg.stop_tol
            u = u_next
            if done:
                break
    except SeqFOError as exc:
        exc.partial_log = rec.log("ideal", u, x, None, {}, _config_echo(cfg, "ideal", 1))
        raise
    counters = dict(n_linearizations=n_lin, n_forward_steps=n_fwd, n_gradient_steps=n_grad,
                    n_steady_solves=n_ss, completed_outer=n_grad)
    return rec.log("ideal", u, x, plant.measure(x, u), counters,
                   _config_echo(cfg, "ideal", 1))


def _run_sequential(plant, prob, cfg, T, algorithm):
    _check(plant, prob, cfg)
    rec = _Recorder(cfg.max_outer * T, plant.input_dim, plant.output_dim, cfg.record_time)
    u = cfg.initial_input.copy()
    x = cfg.initial_state.copy()
    n_lin = n_fwd = n_grad = 0
    completed = 0
    try:
        for k in range(cfg.max_outer):
            try:
                S = sensitivity(linearize(plant, x, u))
            except SingularityError as exc:
                exc.iterate = (k, x.copy(), u.copy())
                raise
            n_lin += 1
            change = np.inf
            for _ in range(T):
                y = plant.measure(x, u)
                u_next = _gradient_step(u, y, S, prob)
                n_grad += 1
                x = plant.step(x, u)
                n_fwd += 1
                rec.add(k, u, y, prob.cost(u, y), n_lin, n_fwd)
                change = np.max(np.abs(u_next - u))
                u = u_next
            completed += 1
            if cfg.stop_tol > 0 and change < cfg.stop_tol:
                break
    except SeqFOError as exc:
        exc.partial_log = rec.log(algorithm, u, x, None, {}, _config_echo(cfg, algorithm, T))
        raise
    counters = dict(n_linearizations=n_lin, n_forward_steps=n_fwd, n_gradient_steps=n_grad,
                    n_steady_solves=0, completed_outer=completed)
    return rec.log(algorithm, u, x, plant.measure(x, u), counters,
                   _config_echo(cfg, algorithm, T))


def run_sfo(plant, prob, cfg):
    """Sequential feedback optimization: re-linearize at every step.

    Per iteration: sensitivity at the current (state, input), measurement,
    projected gradient step, plant step. Never solves for a steady state.
    """
    if cfg.inner_T != 1:
        raise ValueError("run_sfo requires inner_T == 1; use run_smtfo")
    return _run_sequential(plant, prob, cfg, 1, "sfo")


def run_smtfo(plant, prob, cfg):
    """Multi-timescale variant: one linearization per ``inner_T`` gradient steps.

    The sensitivity is taken at the outer iterate ``(x_k, u_k)`` and frozen for
    the inner loop; the inner loop's last (state, input) becomes the next outer
    iterate. ``max_outer`` counts outer iterations.
    """
    return _run_sequential(plant, prob, cfg, cfg.inner_T, "smtfo")


ALGORITHMS = {"ideal": run_ideal_fo, "sfo": run_sfo, "smtfo": run_smtfo}
