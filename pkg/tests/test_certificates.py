import numpy as np
import pytest
from hypothesis import given, strategies as st

from seqfo.bench import lti_plant, quadratic_problem, scalar_plant
from seqfo.bench.simple import SCALAR_CONSTANTS
from seqfo.certificates import (
    RegularityConstants,
    build_certificate,
    design_stepsize,
    estimate_constants,
    lemma2_output_error_bound,
    lipschitz_sensitivity_constant,
    spectral_radius_2x2,
)
from seqfo.errors import AssumptionViolation, CertificateError
from seqfo.plant import Plant

LINEAR = RegularityConstants(rho_f=0.5, G_u_f=0.5, L_f_x=0.0, L_f_u=0.0, L_h=1.0, mu_J=2.0,
                             L_J_u=2.0, L_J_y=2.0, G_u_J=4.0, G_y_J=2.0)


def _with(c, **kw):
    return RegularityConstants(**{**c.as_dict(), **kw})


def power_iteration_radius(M, squarings=40):
    # dominant eigenvector from normalized repeated squaring, eigenvalue from
    # the Rayleigh quotient on that vector
    P = np.array(M, dtype=float)
    for _ in range(squarings):
        P = P @ P
        n = np.abs(P).max()
        if n == 0:
            return 0.0
        P /= n
    v = P[:, np.argmax(np.linalg.norm(P, axis=0))]
    return float(abs(v @ (M @ v)) / (v @ v))


def test_constants_validation():
    with pytest.raises(ValueError):
        _with(LINEAR, rho_f=1.0)
    with pytest.raises(ValueError):
        _with(LINEAR, mu_J=0.0)
    with pytest.raises(ValueError):
        _with(LINEAR, L_J_u=1.0)
    with pytest.raises(ValueError):
        _with(LINEAR, L_h=-0.1)


def test_lipschitz_linear_is_zero():
    assert lipschitz_sensitivity_constant(LINEAR) == 0.0


def test_lipschitz_hand_values():
    c = _with(LINEAR, rho_f=0.5, L_f_u=1.0, G_u_f=1.0, L_f_x=1.0)
    assert lipschitz_sensitivity_constant(c) == pytest.approx(6.0)
    assert lipschitz_sensitivity_constant(_with(c, rho_f=0.9)) == pytest.approx(110.0)


def test_linear_certificate_hand_arithmetic():
    cert = build_certificate(LINEAR, 0.1)
    assert (cert.C, cert.C1, cert.C2) == (0.0, 2.0, 4.0)
    expected = np.array([[np.sqrt(1 - 0.4 + 0.04) + 0.2, 0.4], [0.5, 0.5]])
    np.testing.assert_allclose(cert.M, expected, rtol=1e-15)
    a, b, c, d = expected.ravel()
    rho = ((a + d) + np.sqrt((a - d) ** 2 + 4 * b * c)) / 2
    assert cert.rho_M == pytest.approx(rho, rel=1e-14)
    # with L_J_u = mu_J the (1,1) entry is |1 - 2 alpha| + alpha C1 >= 1, so
    # these constants are never certified and both bounds are withheld
    assert not cert.certified and cert.thm1_bound is None


def test_zero_sensitivity_constant_gives_zero_bound():
    c = _with(LINEAR, L_J_y=0.5, G_y_J=0.75, G_u_f=0.25, L_h=0.5)
    cert = build_certificate(c, 0.1, T=4)
    assert cert.certified and cert.C == 0.0
    assert cert.thm1_bound == 0.0 and cert.thm2_bound == 0.0


def test_uncertified_bounds_are_absent():
    cert = build_certificate(LINEAR, 5.0)
    assert not cert.certified
    assert cert.thm1_bound is None and cert.thm2_bound is None
    assert "thm1_bound = uncertified" in cert.to_text()


def test_negative_radicand_raises():
    # bypass validation to reach the formula's own check
    c = RegularityConstants.__new__(RegularityConstants)
    for k, v in {**LINEAR.as_dict(), "L_J_u": 1.0}.items():
        object.__setattr__(c, k, v)
    with pytest.raises(CertificateError):
        build_certificate(c, 0.5)


@given(st.floats(1e-4, 0.4), st.integers(1, 60))
def test_thm2_at_T1_equals_thm1(alpha, T):
    cert1 = build_certificate(SCALAR_CONSTANTS, alpha, 1)
    certT = build_certificate(SCALAR_CONSTANTS, alpha, T)
    if cert1.certified:
        assert cert1.thm2_bound == cert1.thm1_bound
        assert certT.thm1_bound == cert1.thm1_bound
        assert certT.thm2_bound >= cert1.thm2_bound


def test_thm2_affine_in_T():
    b = [build_certificate(SCALAR_CONSTANTS, 0.1, T).thm2_bound for T in range(1, 30)]
    second = np.diff(b, 2)
    assert np.abs(second).max() <= 1e-12 * max(b)
    cert = build_certificate(SCALAR_CONSTANTS, 0.1, 7)
    assert cert.thm2_bound == cert.thm2_intercept + 6 * cert.thm2_slope
    assert cert.thm2_slope > 0


def test_thm2_bracket_structure():
    c, alpha, T = SCALAR_CONSTANTS, 0.1, 9
    cert = build_certificate(c, alpha, T)
    pre = alpha**2 * c.G_y_J * cert.C * (c.G_u_J + c.L_h * c.G_y_J) / (1 - cert.rho_M)
    bracket = c.L_h / (1 - c.rho_f) + (T - 1) * (1 + c.G_u_f / (1 - c.rho_f))
    assert cert.thm2_bound == pytest.approx(pre * bracket, rel=1e-13)


def test_thm1_alpha_squared_numerator():
    # with rho(M) frozen, the bound is alpha^2 times a constant
    c = SCALAR_CONSTANTS
    a = build_certificate(c, 0.1)
    b = build_certificate(c, 0.05)
    na = a.thm1_bound * (1 - a.rho_M)
    nb = b.thm1_bound * (1 - b.rho_M)
    assert nb == pytest.approx(na / 4, rel=1e-13)


def test_alpha_doubling_ratio():
    a = build_certificate(SCALAR_CONSTANTS, 0.1)
    b = build_certificate(SCALAR_CONSTANTS, 0.2)
    assert a.certified and b.certified
    assert 2 < b.thm1_bound / a.thm1_bound <= 4


def test_spectral_radius_examples():
    assert spectral_radius_2x2([[0.5, 0], [0, 0.3]]) == 0.5
    assert spectral_radius_2x2([[0.6, 0.4], [0.5, 0.5]]) == pytest.approx(1.0, abs=1e-15)
    assert spectral_radius_2x2([[0, 1], [-1, 0]]) == pytest.approx(1.0, abs=1e-15)


def test_spectral_radius_against_power_iteration():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        M = rng.uniform(0, 1, (2, 2))
        assert abs(spectral_radius_2x2(M) - power_iteration_radius(M)) <= 1e-10


@given(st.lists(st.floats(-5, 5), min_size=4, max_size=4))
def test_spectral_radius_matches_eigvals(vals):
    M = np.array(vals).reshape(2, 2)
    assert spectral_radius_2x2(M) == pytest.approx(np.abs(np.linalg.eigvals(M)).max(), abs=1e-9)


@given(st.floats(1e-4, 2.0))
def test_rho_M_dominates_contraction(alpha):
    cert = build_certificate(SCALAR_CONSTANTS, alpha)
    assert cert.rho_M >= max(cert.M[0, 0], cert.M[1, 1]) - 1e-15
    assert cert.rho_M >= SCALAR_CONSTANTS.rho_f - 1e-15


def test_design_stepsize_none_when_contraction_too_weak():
    c = _with(LINEAR, rho_f=0.995, G_u_f=0.0)
    assert design_stepsize(c, target=0.99) is None


def test_design_stepsize_scalar_is_maximal():
    alpha = design_stepsize(SCALAR_CONSTANTS, 0.99)
    assert build_certificate(SCALAR_CONSTANTS, alpha).rho_M <= 0.99
    assert build_certificate(SCALAR_CONSTANTS, 1.02 * alpha).rho_M > 0.99


def test_design_stepsize_linear_against_dense_scan():
    from seqfo.bench import lti_benchmark
    c = lti_benchmark().constants
    alpha = design_stepsize(c, 0.97)
    # rho(M) dips then rises in alpha; the design returns the upper crossing
    scan = np.linspace(1e-5, 1.0, 100001)
    rho = np.array([build_certificate(c, a).rho_M for a in scan])
    ok = scan[rho <= 0.97]
    assert ok.size and alpha == pytest.approx(ok.max(), abs=1e-5)
    assert build_certificate(c, alpha).rho_M <= 0.97


def test_design_stepsize_none_for_uncertifiable_linear_constants():
    assert design_stepsize(LINEAR, 0.99) is None


def test_design_stepsize_target_validation():
    with pytest.raises(ValueError):
        design_stepsize(LINEAR, 1.0)


def test_lemma2_examples():
    c = _with(LINEAR, L_h=1.0, G_u_J=4.0, G_y_J=2.0, rho_f=0.5)
    assert lemma2_output_error_bound(c, 0.1, 10**6, 5.0) == pytest.approx(1.2)
    assert all(lemma2_output_error_bound(c, 0.0, k, 0.0) == 0.0 for k in range(20))
    assert lemma2_output_error_bound(c, 0.0, 0, 3.25) == 3.25


def test_estimate_lti():
    c = estimate_constants(lti_plant(0.5, 0.5), quadratic_problem(), samples=32)
    assert c.rho_f == pytest.approx(0.55, abs=1e-9)
    assert c.L_f_x == 0.0 and c.L_f_u == 0.0


def test_estimate_scalar_bounds():
    c = estimate_constants(scalar_plant(), quadratic_problem(lower=-5, upper=5), samples=64)
    assert c.rho_f <= 0.55 + 1e-9
    assert c.G_u_f <= 0.385 + 1e-9
    assert c.G_u_f >= 0.35 * 0.95  # samples come close to the analytic maximum


def test_estimate_mu_quadratic():
    c = estimate_constants(lti_plant(0.5, 0.5), quadratic_problem(y_weight=1.0), samples=32)
    # difference quotients carry ~1e-12 round-off on top of the exact value 2
    assert c.mu_J >= 1.8 - 1e-10
    assert c.L_J_u >= c.mu_J


def test_estimate_deterministic():
    args = (scalar_plant(), quadratic_problem())
    assert estimate_constants(*args, seed=3) == estimate_constants(*args, seed=3)


def test_estimate_rejects_noncontractive_plant():
    plant = Plant(1, 1, 1, lambda x, u: 0.95 * x + u, lambda x, u: x)
    with pytest.raises(AssumptionViolation):
        estimate_constants(plant, quadratic_problem(), samples=16)


def test_certificate_text_block():
    text = build_certificate(SCALAR_CONSTANTS, 0.1, 3).to_text()
    keys = [line.split(" = ")[0] for line in text.strip().splitlines()]
    assert keys[:10] == list(SCALAR_CONSTANTS.as_dict())
    assert {"alpha", "T", "C", "C1", "C2", "M", "rho_M", "certified",
            "thm1_bound", "thm2_bound"} <= set(keys)
    assert "np.float64" not in text
