"""Scalar benchmarks: an LTI plant and a mildly nonlinear one.

Both have ``g(x, u) = x`` and affine-in-state dynamics with factor 0.5, so the
reachable states stay in the convex hull of the initial state and the steady
states; the hand-derived constants below use that set for the output bounds.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from ..algorithms import ProblemSpec
from ..certificates import RegularityConstants, design_stepsize
from ..plant import Plant


@dataclass(frozen=True)
class Benchmark:
    name: str
    plant: Plant
    problem: ProblemSpec
    initial_state: np.ndarray
    initial_input: np.ndarray
    constants: RegularityConstants | None = None
    optimum: np.ndarray | None = None


def lti_plant(a=0.5, b=0.5, w1=0.0, w2=0.0):
    """``x+ = a x + b u + w1``, ``y = x + w2``."""
    def f(x, u):
        return a * np.asarray(x) + b * np.asarray(u)

    def g(x, u):
        return np.asarray(x)

    def jac(x, u):
        return [[a]], [[b]], [[1.0]], [[0.0]]

    return Plant(1, 1, 1, f, g, jacobians=jac, w1=[w1], w2=[w2],
                 steady_map=lambda u: (b * np.asarray(u) + w1) / (1.0 - a),
                 name=f"lti(a={a}, b={b})")


def scalar_plant(w1=0.0, w2=0.0):
    """``x+ = 0.5 x + 0.25 u + 0.1 sin(u) + w1``, ``y = x + w2``."""
    def f(x, u):
        u = np.asarray(u)
        return 0.5 * np.asarray(x) + 0.25 * u + 0.1 * np.sin(u)

    def g(x, u):
        return np.asarray(x)

    def jac(x, u):
        u0 = float(np.asarray(u).reshape(-1)[0])
        return [[0.5]], [[0.25 + 0.1 * np.cos(u0)]], [[1.0]], [[0.0]]

    def steady(u):
        u = np.asarray(u)
        return 2.0 * (0.25 * u + 0.1 * np.sin(u) + w1)

    return Plant(1, 1, 1, f, g, jacobians=jac, w1=[w1], w2=[w2],
                 steady_map=steady, name="scalar")


def quadratic_problem(u_target=2.0, y_target=1.0, y_weight=1.0,
                      lower=-5.0, upper=5.0, alpha=0.1, dim=1):
    """``J = |u - u_target|^2 + y_weight |y - y_target|^2`` on a box."""
    def cost(u, y):
        du = np.asarray(u) - u_target
        dy = np.asarray(y) - y_target
        return float(du @ du + y_weight * (dy @ dy))

    def grad_u(u, y):
        return 2.0 * (np.asarray(u, dtype=float) - u_target)

    def grad_y(u, y):
        return 2.0 * y_weight * (np.asarray(y, dtype=float) - y_target)

    lo = np.full(dim, float(lower))
    hi = np.full(dim, float(upper))
    return ProblemSpec(cost, grad_u, grad_y, lo, hi, alpha)


def lti_benchmark(alpha=0.1):
    """LTI plant with ``h(u) = u / 2`` and a cost certified at alpha = 0.1."""
    plant = lti_plant(a=0.5, b=0.25)
    prob = quadratic_problem(y_target=0.5, y_weight=0.25, lower=0.0, upper=4.0, alpha=alpha)
    # y in [0, 2] on the reachable set
    constants = RegularityConstants(
        rho_f=0.5, G_u_f=0.25, L_f_x=0.0, L_f_u=0.0, L_h=0.5,
        mu_J=2.0, L_J_u=2.0, L_J_y=0.5, G_u_J=4.0, G_y_J=0.75)
    # 2 (u - 2) + 0.25 (u/2 - 1/2) = 0
    u_star = np.array([4.125 / 2.125])
    return Benchmark("lti", plant, prob, np.zeros(1), np.zeros(1), constants, u_star)


SCALAR_CONSTANTS = RegularityConstants(
    rho_f=0.5,
    G_u_f=0.35,   # max 0.25 + 0.1 cos u
    L_f_x=0.0,
    L_f_u=0.1,    # max |0.1 sin u|, attained at pi/2 in [0, 4]
    L_h=0.7,      # max h'(u) = 0.5 + 0.2 cos u
    mu_J=2.0,
    L_J_u=2.0,
    L_J_y=0.2,
    G_u_J=4.0,    # 2 max |u - 2| on [0, 4]
    G_y_J=0.2,    # 0.2 max |y - 1| for y in [0, h(4)]
)


def scalar_optimum(y_weight=0.1, lower=0.0, upper=4.0, resolution=1e-4):
    """Minimiser of ``(u-2)^2 + w (h(u)-1)^2`` with the analytic steady map.

    Grid search at ``resolution``, then a root of the analytic derivative in
    the bracketing cell when the grid minimum is interior.
    """
    grid = np.arange(lower, upper + 0.5 * resolution, resolution)
    h = 0.5 * grid + 0.2 * np.sin(grid)
    J = (grid - 2.0) ** 2 + y_weight * (h - 1.0) ** 2
    i = int(np.argmin(J))
    if i in (0, grid.size - 1):
        return float(grid[i])

    def dJ(u):
        hu = 0.5 * u + 0.2 * np.sin(u)
        return 2.0 * (u - 2.0) + 2.0 * y_weight * (hu - 1.0) * (0.5 + 0.2 * np.cos(u))

    return float(brentq(dJ, grid[i - 1], grid[i + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps))


def scalar_benchmark(alpha=None, target=0.99):
    """Scalar nonlinear plant with ``J = (u-2)^2 + 0.1 (y-1)^2`` on [0, 4].

    ``alpha`` defaults to the largest step certified at ``rho(M) <= target``.
    """
    if alpha is None:
        alpha = design_stepsize(SCALAR_CONSTANTS, target)
    prob = quadratic_problem(y_weight=0.1, lower=0.0, upper=4.0, alpha=alpha)
    return Benchmark("scalar", scalar_plant(), prob, np.zeros(1), np.zeros(1),
                     SCALAR_CONSTANTS, np.array([scalar_optimum()]))
