"""Reduced dynamic wind-farm plant and the power-tracking problem.

Rotor speeds relax first-order toward a steady Park-type wake field:

    v+ = (1 - tau) v + tau * park(ct, yaw)

so ``df/dv = (1 - tau) I`` everywhere and ``park`` is the exact steady map.
Each upstream turbine ``i`` contributes to downstream turbine ``j`` the deficit
``2 a_i (D / (D + 2 k_w s))^2 exp(-delta^2 / (2 sigma^2))`` with
``sigma = (D + 2 k_w s) / 2`` and wake centre shifted by
``k_d a_i sin(yaw_i) s``; deficits combine root-sum-square. Induction comes
from the disk thrust coefficient as ``a = ct / (4 + ct)``; power is
``0.5 rho pi R^2 4 a (1 - a)^2 cos^2(yaw) v^3``.

Yaw is in degrees at every interface and radians inside the kernels.
"""

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .. import kernels
from ..algorithms import ProblemSpec
from ..errors import DimensionError
from ..plant import Plant
from .simple import Benchmark

THRUST_BOUNDS = (0.4, 3.6)
YAW_BOUNDS = (-30.0, 30.0)
GREEDY_THRUST = 2.0
DEG = np.pi / 180.0


@dataclass(frozen=True)
class FarmLayout:
    positions: np.ndarray          # (N, 2): downwind, crosswind [m]
    rotor_radius: float = 45.0
    free_stream: float = 8.0
    air_density: float = 1.225
    wake_expansion: float = 0.05
    deflection_gain: float = 3.0
    relaxation: float = 0.25
    p_ref: float | None = None     # None -> 1 MW per turbine
    mu: float = 8e-4
    mu_gamma: float = 6e-5
    alpha_thrust: float = 0.25
    alpha_yaw: float = 3.0

    def __post_init__(self):
        pos = np.array(self.positions, dtype=float).reshape(-1, 2)
        order = np.argsort(pos[:, 0], kind="stable")
        pos = pos[order]
        pos.setflags(write=False)
        object.__setattr__(self, "positions", pos)
        if self.rotor_radius <= 0 or self.free_stream <= 0:
            raise ValueError("rotor radius and free-stream speed must be positive")
        if not 0.0 < self.relaxation < 1.0:
            raise ValueError("relaxation must lie in (0, 1)")
        if len(pos) == 0:
            raise ValueError("layout has no turbines")
        for i in range(len(pos)):
            for j in range(i + 1, len(pos)):
                if np.allclose(pos[i], pos[j]):
                    raise ValueError(f"turbines {i} and {j} are co-located")
        if self.p_ref is None:
            object.__setattr__(self, "p_ref", 1e6 * len(pos))

    @property
    def n_turbines(self):
        return len(self.positions)

    @property
    def diameter(self):
        return 2.0 * self.rotor_radius

    @property
    def power_scale(self):
        """``0.5 rho pi R^2``: watts per unit C_P per (m/s)^3."""
        return 0.5 * self.air_density * np.pi * self.rotor_radius**2

    def replace(self, **changes):
        data = {k: getattr(self, k) for k in self.__dataclass_fields__}
        data.update(changes)
        return FarmLayout(**data)

    def to_json(self):
        data = asdict(self)
        data["positions"] = self.positions.tolist()
        return json.dumps(data, indent=2)


@dataclass(frozen=True)
class FarmControl:
    thrust: np.ndarray
    yaw: np.ndarray    # degrees

    def __post_init__(self):
        object.__setattr__(self, "thrust", np.asarray(self.thrust, dtype=float).reshape(-1))
        object.__setattr__(self, "yaw", np.asarray(self.yaw, dtype=float).reshape(-1))
        if self.thrust.shape != self.yaw.shape:
            raise DimensionError("thrust and yaw vectors differ in length")

    def flatten(self):
        return np.concatenate([self.thrust, self.yaw])

    @classmethod
    def from_vector(cls, u):
        u = np.asarray(u, dtype=float).reshape(-1)
        n = u.size // 2
        return cls(u[:n], u[n:])

    def in_bounds(self):
        return (np.all((self.thrust >= THRUST_BOUNDS[0]) & (self.thrust <= THRUST_BOUNDS[1]))
                and np.all((self.yaw >= YAW_BOUNDS[0]) & (self.yaw <= YAW_BOUNDS[1])))


def aligned_layout(n_turbines, spacing_diameters=5.0, **kwargs):
    """A single row of turbines along the wind direction."""
    radius = kwargs.get("rotor_radius", 45.0)
    x = np.arange(n_turbines) * spacing_diameters * 2.0 * radius
    return FarmLayout(np.column_stack([x, np.zeros(n_turbines)]), **kwargs)


def load_layout(path):
    data = json.loads(Path(path).read_text())
    return FarmLayout(**data)


def induction(thrust):
    return np.asarray(thrust, dtype=float) / (4.0 + np.asarray(thrust, dtype=float))


def power_coefficient(a, yaw_deg):
    return 4.0 * a * (1.0 - a) ** 2 * np.cos(np.asarray(yaw_deg) * DEG) ** 2


def _split(layout, u):
    u = np.asarray(u, dtype=float).reshape(-1)
    n = layout.n_turbines
    if u.size != 2 * n:
        raise DimensionError(f"farm input has size {u.size}, expected {2 * n}")
    return u[:n], u[n:]


def _speeds(layout, thrust, yaw_deg):
    pos = layout.positions
    return kernels.park_speeds(pos[:, 0], pos[:, 1], induction(thrust), np.asarray(yaw_deg) * DEG,
                               layout.diameter, layout.free_stream,
                               layout.wake_expansion, layout.deflection_gain)


def park_steady_speeds(layout, ctrl):
    """Steady rotor-effective wind speeds for a control."""
    return _speeds(layout, ctrl.thrust, ctrl.yaw)


def turbine_power(layout, thrust, yaw_deg, speeds):
    return layout.power_scale * power_coefficient(induction(thrust), yaw_deg) * np.asarray(speeds) ** 3


def farm_plant(layout, w1=None, w2=None):
    """Plant with state = rotor speeds, input = (thrust, yaw[deg]), output = powers."""
    n = layout.n_turbines
    tau = layout.relaxation
    pos = layout.positions
    scale = layout.power_scale

    def f(x, u):
        thrust, yaw = _split(layout, u)
        return (1.0 - tau) * np.asarray(x, dtype=float) + tau * _speeds(layout, thrust, yaw)

    def g(x, u):
        thrust, yaw = _split(layout, u)
        return turbine_power(layout, thrust, yaw, x)

    def jac(x, u):
        thrust, yaw = _split(layout, u)
        x = np.asarray(x, dtype=float)
        a = induction(thrust)
        _, dv_da, dv_dg = kernels.park_speeds_jacobian(
            pos[:, 0], pos[:, 1], a, yaw * DEG, layout.diameter, layout.free_stream,
            layout.wake_expansion, layout.deflection_gain)
        da_dct = 4.0 / (4.0 + thrust) ** 2
        A = (1.0 - tau) * np.eye(n)
        B = tau * np.hstack([dv_da * da_dct[None, :], dv_dg * DEG])
        cos2 = np.cos(yaw * DEG) ** 2
        cp = 4.0 * a * (1.0 - a) ** 2 * cos2
        C = np.diag(3.0 * scale * cp * x**2)
        dcp_da = 4.0 * (1.0 - a) * (1.0 - 3.0 * a) * cos2
        dcp_dg = -4.0 * a * (1.0 - a) ** 2 * np.sin(2.0 * yaw * DEG) * DEG
        D = np.hstack([np.diag(scale * dcp_da * da_dct * x**3), np.diag(scale * dcp_dg * x**3)])
        return A, B, C, D

    w1_arr = np.zeros(n) if w1 is None else np.asarray(w1, dtype=float)

    def steady(u):
        thrust, yaw = _split(layout, u)
        return _speeds(layout, thrust, yaw) + w1_arr / tau

    return Plant(n, 2 * n, n, f, g, jacobians=jac, w1=w1, w2=w2,
                 steady_map=steady, name=f"farm(N={n})")


def farm_problem(layout, alpha_thrust=None, alpha_yaw=None):
    """Normalised power tracking with thrust and yaw regularisation."""
    n = layout.n_turbines
    p_ref = layout.p_ref
    mu, mu_g = layout.mu, layout.mu_gamma

    def cost(u, y):
        thrust, yaw = _split(layout, u)
        track = (np.sum(y) - p_ref) / p_ref
        return float(track**2 + mu * (thrust @ thrust) + mu_g * (yaw @ yaw))

    def grad_u(u, y):
        thrust, yaw = _split(layout, u)
        return np.concatenate([2.0 * mu * thrust, 2.0 * mu_g * yaw])

    def grad_y(u, y):
        return np.full(n, 2.0 * (np.sum(y) - p_ref) / p_ref**2)

    a_t = layout.alpha_thrust if alpha_thrust is None else alpha_thrust
    a_y = layout.alpha_yaw if alpha_yaw is None else alpha_yaw
    lower = np.concatenate([np.full(n, THRUST_BOUNDS[0]), np.full(n, YAW_BOUNDS[0])])
    upper = np.concatenate([np.full(n, THRUST_BOUNDS[1]), np.full(n, YAW_BOUNDS[1])])
    steps = np.concatenate([np.full(n, a_t), np.full(n, a_y)])
    return ProblemSpec(cost, grad_u, grad_y, lower, upper, steps)


def greedy_baseline(layout):
    """Every turbine at C_T' = 2 with zero yaw."""
    n = layout.n_turbines
    return FarmControl(np.full(n, GREEDY_THRUST), np.zeros(n))


def steady_cost(layout, ctrl):
    """``J(u, h(u))`` and total steady power via the analytic steady map."""
    v = park_steady_speeds(layout, ctrl)
    power = turbine_power(layout, ctrl.thrust, ctrl.yaw, v)
    prob = farm_problem(layout)
    return prob.cost(ctrl.flatten(), power), float(power.sum())


def grid_search_optimum(layout, resolution=50):
    """Exhaustive search of the steady cost on a uniform grid (N <= 2).

    Every grid point of the 2N-dimensional box is evaluated. For N = 2 the
    upstream turbine's speed is the free stream and the downstream speed
    depends only on the upstream control, so the evaluation is organised as
    upstream-table x downstream-table in the compiled kernel. The greedy
    control is always evaluated as well.

    Returns:
        (FarmControl, cost) of the best point.
    """
    n = layout.n_turbines
    if n > 2:
        raise DimensionError("grid search is only feasible for N <= 2")
    if resolution < 10:
        raise ValueError("resolution must be at least 10 per axis")
    ct = np.linspace(*THRUST_BOUNDS, resolution)
    yaw = np.linspace(*YAW_BOUNDS, resolution)
    CT, YAW = (m.ravel() for m in np.meshgrid(ct, yaw, indexing="ij"))
    scale = layout.power_scale
    cp = power_coefficient(induction(CT), YAW)
    reg = layout.mu * CT**2 + layout.mu_gamma * YAW**2
    V = layout.free_stream

    if n == 1:
        p, q, best = kernels.grid_pair_min(np.zeros(1), np.array([V**3]), np.zeros(1),
                                           scale * cp, reg, layout.p_ref)
        ctrl = FarmControl([CT[q]], [YAW[q]])
    else:
        pos = layout.positions
        down = np.empty(CT.size)
        for i in range(CT.size):
            down[i] = kernels.park_speeds(pos[:, 0], pos[:, 1], induction([CT[i], GREEDY_THRUST]),
                                          np.array([YAW[i], 0.0]) * DEG, layout.diameter, V,
                                          layout.wake_expansion, layout.deflection_gain)[1]
        first = kernels.park_speeds(pos[:, 0], pos[:, 1], induction([GREEDY_THRUST] * 2),
                                    np.zeros(2), layout.diameter, V,
                                    layout.wake_expansion, layout.deflection_gain)[0]
        upstream_power = scale * cp * first**3
        p, q, best = kernels.grid_pair_min(upstream_power, down**3, reg, scale * cp, reg,
                                           layout.p_ref)
        ctrl = FarmControl([CT[p], CT[q]], [YAW[p], YAW[q]])
    best = float(best)
    greedy = greedy_baseline(layout)
    greedy_cost, _ = steady_cost(layout, greedy)
    if greedy_cost < best:
        return greedy, greedy_cost
    return ctrl, best


def farm_benchmark(layout, initial_yaw=1.0):
    """Farm plant, problem and a greedy start with a small yaw offset.

    The cost is even in every yaw angle, so zero yaw is a stationary point;
    the offset lets the iteration leave it.
    """
    plant = farm_plant(layout)
    prob = farm_problem(layout)
    greedy = greedy_baseline(layout)
    u0 = FarmControl(greedy.thrust, np.full(layout.n_turbines, float(initial_yaw))).flatten()
    x0 = np.full(layout.n_turbines, layout.free_stream)
    return Benchmark(f"farm(N={layout.n_turbines})", plant, prob, x0, u0, None, None)
