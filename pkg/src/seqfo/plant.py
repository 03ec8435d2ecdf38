"""Plant abstraction, steady states, Jacobians and linearized sensitivity."""

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DimensionError, EvaluationError, SingularityError

#: I - A with a condition number above this is treated as singular.
CONDITION_LIMIT = 1e12


class Plant:
    """Discrete-time plant ``x+ = f(x, u) + w1``, ``y = g(x, u) + w2``.

    ``dynamics`` and ``output`` are the disturbance-free maps. The constant
    disturbances are fixed at construction and only ever enter through
    :meth:`step` and :meth:`measure`.

    ``jacobians``, when given, maps ``(x, u)`` to ``(A, B, C, D)`` =
    ``(df/dx, df/du, dg/dx, dg/du)``. ``steady_map``, when given, is an exact
    ``u -> x_ss`` oracle for the *disturbed* plant; algorithms never call it,
    tests and oracles do.
    """

    __slots__ = ("_n", "_p", "_m", "_f", "_g", "_w1", "_w2", "_jac", "_steady", "name")

    def __init__(self, state_dim, input_dim, output_dim, dynamics, output,
                 jacobians=None, w1=None, w2=None, steady_map=None, name="plant"):
        if min(state_dim, input_dim, output_dim) < 1:
            raise DimensionError("plant dimensions must be positive")
        self._n = int(state_dim)
        self._p = int(input_dim)
        self._m = int(output_dim)
        self._f = dynamics
        self._g = output
        self._jac = jacobians
        self._w1 = np.zeros(self._n) if w1 is None else _frozen(w1, self._n, "w1")
        self._w2 = np.zeros(self._m) if w2 is None else _frozen(w2, self._m, "w2")
        self._steady = steady_map
        self.name = name

    @property
    def state_dim(self):
        return self._n

    @property
    def input_dim(self):
        return self._p

    @property
    def output_dim(self):
        return self._m

    @property
    def has_jacobians(self):
        return self._jac is not None

    @property
    def has_steady_map(self):
        return self._steady is not None

    def step(self, x, u):
        return np.asarray(self._f(x, u), dtype=float).reshape(self._n) + self._w1

    def measure(self, x, u):
        return np.asarray(self._g(x, u), dtype=float).reshape(self._m) + self._w2

    def jacobians(self, x, u):
        if self._jac is None:
            raise AttributeError(f"{self.name} has no analytic Jacobians")
        A, B, C, D = self._jac(x, u)
        return (np.atleast_2d(np.asarray(A, dtype=float)),
                np.atleast_2d(np.asarray(B, dtype=float)),
                np.atleast_2d(np.asarray(C, dtype=float)),
                np.atleast_2d(np.asarray(D, dtype=float)))

    def steady_map(self, u):
        """Exact steady state for input ``u`` (oracle, benchmark plants only)."""
        if self._steady is None:
            raise AttributeError(f"{self.name} has no analytic steady map")
        return np.asarray(self._steady(u), dtype=float).reshape(self._n)

    def __repr__(self):
        return f"Plant({self.name!r}, n={self._n}, p={self._p}, m={self._m})"


def _frozen(w, size, label):
    w = np.array(w, dtype=float).reshape(-1)
    if w.size != size:
        raise DimensionError(f"{label} has size {w.size}, expected {size}")
    w.setflags(write=False)
    return w


@dataclass(frozen=True)
class LinearizationResult:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    point: tuple

    def __post_init__(self):
        n = self.A.shape[0]
        p = self.B.shape[1]
        m = self.C.shape[0]
        expected = {"A": (n, n), "B": (n, p), "C": (m, n), "D": (m, p)}
        for key, shape in expected.items():
            mat = getattr(self, key)
            if mat.shape != shape:
                raise DimensionError(f"{key} has shape {mat.shape}, expected {shape}")
            if not np.all(np.isfinite(mat)):
                raise EvaluationError(f"linearization matrix {key} is not finite")


@dataclass(frozen=True)
class SensitivityMatrix:
    entries: np.ndarray
    point: tuple

    @property
    def shape(self):
        return self.entries.shape


def default_fd_step(point):
    return 1e-6 * max(1.0, float(np.max(np.abs(point), initial=0.0)))


def finite_diff_jacobian(fn, point, h=None):
    """Central-difference Jacobian of ``fn`` at ``point``.

    Column ``j`` is ``(fn(point + h e_j) - fn(point - h e_j)) / (2 h)``. The
    default step is ``1e-6 * max(1, |point|_inf)``.
    """
    point = np.asarray(point, dtype=float).reshape(-1)
    if h is None:
        h = default_fd_step(point)
    if not h > 0:
        raise ValueError("finite-difference step must be positive")
    columns = []
    for j in range(point.size):
        e = np.zeros_like(point)
        e[j] = h
        plus = np.atleast_1d(np.asarray(fn(point + e), dtype=float))
        minus = np.atleast_1d(np.asarray(fn(point - e), dtype=float))
        if not (np.all(np.isfinite(plus)) and np.all(np.isfinite(minus))):
            raise EvaluationError(
                f"non-finite evaluation while perturbing coordinate {j}", coordinate=j)
        columns.append((plus - minus) / (2.0 * h))
    return np.column_stack(columns) if columns else np.zeros((0, 0))


def steady_state(plant, u, tol=1e-10, max_iter=1_000_000, x0=None, residuals=None):
    """Fixed point of ``x -> plant.step(x, u)`` by direct iteration.

    Stops when ``|step(x, u) - x|_2 <= tol``. Pass a list as ``residuals`` to
    collect the residual sequence.

    Raises:
        ConvergenceError: max_iter reached; carries the last residual.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    u = np.asarray(u, dtype=float)
    x = np.zeros(plant.state_dim) if x0 is None else np.array(x0, dtype=float)
    residual = np.inf
    for _ in range(int(max_iter)):
        nxt = plant.step(x, u)
        residual = float(np.linalg.norm(nxt - x))
        if residuals is not None:
            residuals.append(residual)
        if not np.isfinite(residual):
            raise ConvergenceError("steady-state iteration diverged", residual=residual)
        if residual <= tol:
            return nxt
        x = nxt
    raise ConvergenceError(
        f"steady state not reached in {max_iter} iterations, residual {residual:.3e}",
        residual=residual)


def linearize(plant, x, u):
    """Local model ``(A, B, C, D)`` at ``(x, u)``; analytic when the plant has it."""
    x = np.asarray(x, dtype=float).reshape(plant.state_dim)
    u = np.asarray(u, dtype=float).reshape(plant.input_dim)
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(u))):
        raise EvaluationError("linearization point is not finite")
    if plant.has_jacobians:
        A, B, C, D = plant.jacobians(x, u)
    else:
        # finite differences of step/measure: the constant disturbances cancel
        A = finite_diff_jacobian(lambda z: plant.step(z, u), x)
        B = finite_diff_jacobian(lambda v: plant.step(x, v), u)
        C = finite_diff_jacobian(lambda z: plant.measure(z, u), x)
        D = finite_diff_jacobian(lambda v: plant.measure(x, v), u)
    return LinearizationResult(A, B, C, D, (x.copy(), u.copy()))


def sensitivity(lin):
    """Steady-state input-output sensitivity ``C (I - A)^{-1} B + D``."""
    n = lin.A.shape[0]
    lhs = np.eye(n) - lin.A
    # condition relative to the scale of I and A, so a near-zero I - A is
    # caught even when it is well conditioned on its own (e.g. 1x1)
    sv = np.linalg.svd(lhs, compute_uv=False)
    scale = max(1.0, float(np.linalg.norm(lin.A, 2)), float(sv[0]))
    cond = np.inf if sv[-1] == 0 else scale / sv[-1]
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise SingularityError(
            f"I - A is singular or ill-conditioned (cond={cond:.3e})",
            condition=cond, iterate=lin.point)
    Z = np.linalg.solve(lhs, lin.B)
    return SensitivityMatrix(lin.C @ Z + lin.D, lin.point)


def exact_steady_jacobian(plant, u, tol=1e-10, x0=None, max_iter=1_000_000):
    """Jacobian of the steady-state map, evaluated at the true steady state."""
    x_ss = steady_state(plant, u, tol=tol, max_iter=max_iter, x0=x0)
    return sensitivity(linearize(plant, x_ss, u))


def steady_output(plant, u, tol=1e-10, x0=None):
    """``h(u)``: measurement at the steady state for input ``u``."""
    u = np.asarray(u, dtype=float)
    return plant.measure(steady_state(plant, u, tol=tol, x0=x0), u)
