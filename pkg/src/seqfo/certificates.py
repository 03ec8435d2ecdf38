"""Closed-form convergence certificates and empirical regularity constants.

The bounds are the ones proved for ``g(x, u) = x``. Per-coordinate step sizes
enter through their maximum.
"""

from dataclasses import asdict, dataclass
from itertools import combinations

import numpy as np
from scipy.stats import qmc

from .errors import AssumptionViolation, CertificateError
from .plant import exact_steady_jacobian, linearize, steady_state

INFLATE = 1.1
DEFLATE = 0.9

CONSTANT_NAMES = ("rho_f", "G_u_f", "L_f_x", "L_f_u", "L_h",
                  "mu_J", "L_J_u", "L_J_y", "G_u_J", "G_y_J")


@dataclass(frozen=True)
class RegularityConstants:
    rho_f: float
    G_u_f: float
    L_f_x: float
    L_f_u: float
    L_h: float
    mu_J: float
    L_J_u: float
    L_J_y: float
    G_u_J: float
    G_y_J: float

    def __post_init__(self):
        for name in CONSTANT_NAMES:
            value = float(getattr(self, name))
            if not np.isfinite(value) or value < 0:
                raise CertificateError(f"{name} must be a finite nonnegative number, got {value}")
            object.__setattr__(self, name, value)
        if not 0.0 < self.rho_f < 1.0:
            raise CertificateError(f"rho_f must lie in (0, 1), got {self.rho_f}")
        if not self.mu_J > 0.0:
            raise CertificateError("mu_J must be positive")
        if self.L_J_u < self.mu_J:
            raise CertificateError(f"L_J_u={self.L_J_u} is below mu_J={self.mu_J}")

    def as_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class Certificate:
    constants: RegularityConstants
    alpha: float
    T: int
    C: float
    C1: float
    C2: float
    M: np.ndarray
    rho_M: float
    thm1_bound: float | None
    thm2_bound: float | None
    thm2_intercept: float | None
    thm2_slope: float | None

    @property
    def certified(self):
        return self.rho_M < 1.0

    def to_text(self):
        """Flat ``key = value`` block; bounds read ``uncertified`` when rho(M) >= 1."""
        def fmt(v):
            return "uncertified" if v is None else repr(float(v))

        lines = [f"{name} = {getattr(self.constants, name)!r}" for name in CONSTANT_NAMES]
        lines += [
            f"alpha = {float(self.alpha)!r}",
            f"T = {self.T}",
            f"C = {float(self.C)!r}",
            f"C1 = {float(self.C1)!r}",
            f"C2 = {float(self.C2)!r}",
            "M = [[{}, {}], [{}, {}]]".format(*(repr(float(v)) for v in self.M.ravel())),
            f"rho_M = {float(self.rho_M)!r}",
            f"certified = {'yes' if self.certified else 'no'}",
            f"thm1_bound = {fmt(self.thm1_bound)}",
            f"thm2_bound = {fmt(self.thm2_bound)}",
        ]
        return "\n".join(lines) + "\n"


def lipschitz_sensitivity_constant(c):
    """Lipschitz constant of the linearized sensitivity in (x, u)."""
    return ((1.0 - c.rho_f) * c.L_f_u + c.G_u_f * c.L_f_x) / (1.0 - c.rho_f) ** 2


def spectral_radius_2x2(M):
    """Largest eigenvalue magnitude of a 2x2 matrix via the characteristic polynomial."""
    (a, b), (c, d) = np.asarray(M, dtype=float)
    disc = (a - d) ** 2 + 4.0 * b * c
    if disc >= 0.0:
        root = np.sqrt(disc)
        return float(max(abs(0.5 * (a + d + root)), abs(0.5 * (a + d - root))))
    # complex conjugate pair: |lambda|^2 = det
    return float(np.sqrt(a * d - b * c))


def coefficient_matrix(c, alpha):
    """The 2x2 error-propagation matrix and the constants (C, C1, C2) feeding it."""
    C = lipschitz_sensitivity_constant(c) * (1.0 + c.L_h)
    C1 = c.L_h * c.L_J_y + c.G_y_J * C
    C2 = c.L_J_u + c.L_h * c.L_J_y
    radicand = 1.0 - 2.0 * alpha * c.mu_J + alpha**2 * c.L_J_u**2
    if radicand < 0.0:
        raise CertificateError(
            f"1 - 2 alpha mu_J + alpha^2 L_J_u^2 = {radicand} < 0; requires L_J_u >= mu_J")
    M = np.array([[np.sqrt(radicand) + alpha * C1, alpha * C2],
                  [c.G_u_f, c.rho_f]])
    return M, C, C1, C2


def build_certificate(c, alpha, T=1):
    if not alpha > 0:
        raise CertificateError("alpha must be positive")
    if T < 1:
        raise CertificateError("T must be at least 1")
    M, C, C1, C2 = coefficient_matrix(c, alpha)
    rho = spectral_radius_2x2(M)
    thm1 = thm2 = intercept = slope = None
    if rho < 1.0:
        # Both bounds share this prefactor so that T = 1 reproduces thm1 bit for bit.
        prefactor = alpha**2 * c.G_y_J * C * (c.G_u_J + c.L_h * c.G_y_J) / (1.0 - rho)
        intercept = prefactor * (c.L_h / (1.0 - c.rho_f))
        slope = prefactor * (1.0 + c.G_u_f / (1.0 - c.rho_f))
        thm1 = intercept
        thm2 = intercept + (T - 1) * slope
    return Certificate(c, float(alpha), int(T), C, C1, C2, M, rho,
                       thm1, thm2, intercept, slope)


def design_stepsize(c, target=0.99, grid=200):
    """Largest step size with rho(M) <= target, or None.

    Scans a log grid on [1e-8, 1], then bisects 40 times between the largest
    qualifying grid point and its right neighbour.
    """
    if not 0.0 < target < 1.0:
        raise ValueError("target must lie in (0, 1)")

    def rho(a):
        return spectral_radius_2x2(coefficient_matrix(c, a)[0])

    alphas = np.logspace(-8.0, 0.0, int(grid))
    ok = [rho(a) <= target for a in alphas]
    if not any(ok):
        return None
    i = max(idx for idx, flag in enumerate(ok) if flag)
    if i == len(alphas) - 1:
        return float(alphas[i])
    lo, hi = float(alphas[i]), float(alphas[i + 1])
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        if rho(mid) <= target:
            lo = mid
        else:
            hi = mid
    return lo


def lemma2_output_error_bound(c, alpha, k, e0):
    """Bound on |h(u_k) - y_k|: geometric transient plus an O(alpha) floor."""
    if k < 0 or e0 < 0:
        raise ValueError("k and e0 must be nonnegative")
    floor = alpha * c.L_h * (c.G_u_J + c.L_h * c.G_y_J) / (1.0 - c.rho_f)
    return c.rho_f**k * e0 + floor


def _unit_samples(dim, samples, seed):
    return qmc.Halton(d=dim, scramble=True, seed=seed).random(samples)


def estimate_constants(plant, prob, samples=64, seed=0, state_box=None, steady_tol=1e-10):
    """Sample-based estimates of the regularity constants.

    Inputs are drawn quasi-randomly from the problem box; states from
    ``state_box`` (a ``(lower, upper)`` pair) or, when omitted, from the
    bounding box of the sampled steady states and the zero state. Sup-type
    constants are maxima over samples, all-pairs difference quotients and
    small local perturbations, inflated by 10%; ``mu_J`` is a minimum,
    deflated by 10%. Matrix norms are spectral norms.

    Raises:
        AssumptionViolation: the inflated contraction estimate is >= 1, or the
            cost is not strongly monotone on the samples.
    """
    n, p = plant.state_dim, plant.input_dim
    lo, hi = prob.lower, prob.upper
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
        raise ValueError("constant estimation needs a bounded input box")
    rng = np.random.default_rng(seed)
    unit = _unit_samples(n + p, samples, seed)
    U = lo + unit[:, n:] * (hi - lo)

    # steady states of the sampled inputs: they give L_h and the default state box
    X_ss = []
    x_prev = None
    for u in U:
        x_prev = steady_state(plant, u, tol=steady_tol, x0=x_prev)
        X_ss.append(x_prev)
    X_ss = np.array(X_ss)
    H = np.array([plant.measure(x, u) for x, u in zip(X_ss, U)])
    if state_box is None:
        s_lo = np.minimum(X_ss.min(axis=0), 0.0)
        s_hi = np.maximum(X_ss.max(axis=0), 0.0)
    else:
        s_lo, s_hi = (np.asarray(b, dtype=float) for b in state_box)
    X = s_lo + unit[:, :n] * (s_hi - s_lo)

    lins = [linearize(plant, x, u) for x, u in zip(X, U)]
    raw_rho = max(np.linalg.norm(L.A, 2) for L in lins)
    G_u_f = max(np.linalg.norm(L.B, 2) for L in lins)

    # local partners: small random displacement of every sample
    scale_x = 1e-3 * np.maximum(s_hi - s_lo, 1e-6)
    scale_u = 1e-3 * np.maximum(hi - lo, 1e-6)
    Xl = X + scale_x * rng.standard_normal(X.shape)
    Ul = np.clip(U + scale_u * rng.standard_normal(U.shape), lo, hi)
    lins_l = [linearize(plant, x, u) for x, u in zip(Xl, Ul)]

    pairs = [(lins[i], lins[j], X[i] - X[j], U[i] - U[j])
             for i, j in combinations(range(samples), 2)]
    pairs += [(lins[i], lins_l[i], X[i] - Xl[i], U[i] - Ul[i]) for i in range(samples)]
    L_f_x = L_f_u = 0.0
    for a, b, dx, du in pairs:
        dist = np.linalg.norm(dx) + np.linalg.norm(du)
        if dist <= 0:
            continue
        L_f_x = max(L_f_x, np.linalg.norm(a.A - b.A, 2) / dist)
        L_f_u = max(L_f_u, np.linalg.norm(a.B - b.B, 2) / dist)

    L_h = max(np.linalg.norm(exact_steady_jacobian(plant, u, tol=steady_tol, x0=x).entries, 2)
              for x, u in zip(X_ss, U))
    for i, j in combinations(range(samples), 2):
        du = np.linalg.norm(U[i] - U[j])
        if du > 0:
            L_h = max(L_h, np.linalg.norm(H[i] - H[j]) / du)

    # cost constants over sampled outputs (transient and steady)
    Y = np.vstack([np.array([plant.measure(x, u) for x, u in zip(X, U)]), H])
    UU = np.vstack([U, U])
    gu = np.array([np.asarray(prob.grad_u(u, y), dtype=float).reshape(-1) for u, y in zip(UU, Y)])
    gy = np.array([np.asarray(prob.grad_y(u, y), dtype=float).reshape(-1) for u, y in zip(UU, Y)])
    G_u_J = float(np.max(np.linalg.norm(gu, axis=1)))
    G_y_J = float(np.max(np.linalg.norm(gy, axis=1)))

    L_J_u = L_J_y = 0.0
    mu = np.inf
    count = len(UU)
    cost_pairs = list(combinations(range(count), 2))
    for i, j in cost_pairs:
        dist = np.linalg.norm(UU[i] - UU[j]) + np.linalg.norm(Y[i] - Y[j])
        if dist > 0:
            L_J_u = max(L_J_u, np.linalg.norm(gu[i] - gu[j]) / dist)
            L_J_y = max(L_J_y, np.linalg.norm(gy[i] - gy[j]) / dist)
    for i, j in cost_pairs:
        du = UU[i] - UU[j]
        nrm2 = du @ du
        if nrm2 <= 0:
            continue
        y = Y[i]
        g_i = np.asarray(prob.grad_u(UU[i], y), dtype=float).reshape(-1)
        g_j = np.asarray(prob.grad_u(UU[j], y), dtype=float).reshape(-1)
        mu = min(mu, (g_i - g_j) @ du / nrm2)
        L_J_u = max(L_J_u, np.linalg.norm(g_i - g_j) / np.sqrt(nrm2))
    # local probes along u alone and y alone
    for i in range(count):
        du = scale_u * rng.standard_normal(p)
        dy = 1e-3 * max(1.0, float(np.max(np.abs(Y[i])))) * rng.standard_normal(Y.shape[1])
        u2 = UU[i] + du
        for u_b, y_b, dist in ((u2, Y[i], np.linalg.norm(du)), (UU[i], Y[i] + dy, np.linalg.norm(dy))):
            if dist <= 0:
                continue
            gu_b = np.asarray(prob.grad_u(u_b, y_b), dtype=float).reshape(-1)
            gy_b = np.asarray(prob.grad_y(u_b, y_b), dtype=float).reshape(-1)
            L_J_u = max(L_J_u, np.linalg.norm(gu[i] - gu_b) / dist)
            L_J_y = max(L_J_y, np.linalg.norm(gy[i] - gy_b) / dist)
        if du @ du > 0:
            g_b = np.asarray(prob.grad_u(u2, Y[i]), dtype=float).reshape(-1)
            mu = min(mu, (g_b - gu[i]) @ du / (du @ du))

    rho_f = INFLATE * raw_rho
    if rho_f >= 1.0:
        raise AssumptionViolation(
            f"estimated contraction factor {rho_f:.4f} (raw {raw_rho:.4f}) is not below 1")
    if not mu > 0:
        raise AssumptionViolation(
            f"cost is not strongly monotone in u on the samples (min quotient {mu:.3e})")
    mu_J = DEFLATE * mu
    return RegularityConstants(
        rho_f=rho_f,
        G_u_f=INFLATE * G_u_f,
        L_f_x=INFLATE * L_f_x,
        L_f_u=INFLATE * L_f_u,
        L_h=INFLATE * L_h,
        mu_J=mu_J,
        L_J_u=max(INFLATE * L_J_u, mu_J),
        L_J_y=INFLATE * L_J_y,
        G_u_J=INFLATE * G_u_J,
        G_y_J=INFLATE * G_y_J,
    )
