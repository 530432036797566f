import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from gncert import majorant as M
from gncert.errors import DomainError, H3Violated, H4Violated, InvalidMajorant

SQ2 = math.sqrt(2.0)

pos = st.floats(min_value=1e-2, max_value=1e2)
beta_st = st.floats(min_value=0.1, max_value=10.0)
frac = st.floats(min_value=0.0, max_value=0.95)


# -- construction ----------------------------------------------------------------

def test_lipschitz_examples():
    f = M.lipschitz_majorant(1.0)
    assert f.f(1.0) == -0.5 and f.fprime(1.0) == 0.0
    assert M.lipschitz_majorant(2.0).fprime(0.5) == 0.0


def test_smale_examples():
    f = M.smale_majorant(1.0)
    assert f.f(0.5) == pytest.approx(0.0, abs=1e-15)
    assert f.fprime(0.5) == pytest.approx(2.0)
    assert M.smale_majorant(2.0).d_plus_fprime_0 == 4.0
    assert f.R == 1.0


def test_smale_second_derivative_matches_d_plus():
    g = 0.7
    f = M.smale_majorant(g)
    h = 1e-6
    assert (f.fprime(h) - f.fprime(0.0)) / h == pytest.approx(2 * g, rel=1e-5)


def test_h1_checks():
    for maj in (M.lipschitz_majorant(3.0), M.smale_majorant(0.3)):
        assert abs(maj.f(0.0)) <= 1e-14
        assert abs(maj.fprime(0.0) + 1.0) <= 1e-14


def test_invalid_majorants_rejected():
    with pytest.raises(InvalidMajorant):
        M.lipschitz_majorant(0.0)
    with pytest.raises(InvalidMajorant):
        M.smale_majorant(-1.0)
    with pytest.raises(InvalidMajorant):  # f'(0) != -1
        M.MajorantFunction(f=lambda t: t * t, fprime=lambda t: 2 * t, d_plus_fprime_0=2.0)
    with pytest.raises(InvalidMajorant):  # f' not increasing
        M.MajorantFunction(f=lambda t: -t - t * t, fprime=lambda t: -1 - 2 * t, d_plus_fprime_0=0.0)
    with pytest.raises(InvalidMajorant):  # f' concave: sqrt-type growth
        M.MajorantFunction(f=lambda t: -t + (2 / 3) * t**1.5, fprime=lambda t: -1 + math.sqrt(t),
                           d_plus_fprime_0=0.0)


def test_custom_majorant_accepted():
    # f(t) = e^t - 1 - 2t: f(0) = 0, f'(0) = -1, f' = e^t - 2 convex increasing
    maj = M.MajorantFunction(f=lambda t: math.expm1(t) - 2 * t, fprime=lambda t: math.exp(t) - 2,
                             d_plus_fprime_0=1.0, R=5.0)
    rd = M.compute_radii(maj, M.ProblemConstants(0.0, 1.0, 1.0))
    assert 0 < rd.rho < rd.nu < maj.R


# -- radii -------------------------------------------------------------------------

def test_nu_closed_forms():
    assert M.compute_nu(M.lipschitz_majorant(2.0), 0.5) == pytest.approx(1.0, rel=1e-14)
    assert M.compute_nu(M.smale_majorant(1.0), 1.0) == pytest.approx((2 - SQ2) / 2, rel=1e-14)


def test_nu_small_beta_approaches_R():
    maj = M.smale_majorant(1.0)
    assert M.compute_nu(maj, 1e-8) == pytest.approx(1.0, rel=1e-3)


def test_psi_examples():
    assert M.psi(M.lipschitz_majorant(1.0), 1.0, 0.0, 0.5) == pytest.approx(0.5)
    with pytest.raises(DomainError):
        M.psi(M.lipschitz_majorant(1.0), 1.0, 0.0, 1.5)


def test_rho_examples():
    assert M.compute_rho(M.lipschitz_majorant(1.0), 1.0, 0.0) == pytest.approx(2 / 3, rel=1e-14)
    assert M.compute_rho(M.lipschitz_majorant(1.0), 1.0, 0.1) == pytest.approx((2 - 2 * SQ2 * 0.1) / 3, rel=1e-10)
    assert M.compute_rho(M.smale_majorant(1.0), 1.0, 0.0) == pytest.approx((5 - math.sqrt(17)) / 4, rel=1e-12)


def test_sigma_examples():
    assert M.compute_sigma(M.lipschitz_majorant(2.0), 1.0, 1.0, 0.0) == pytest.approx(1.0, rel=1e-12)
    assert M.compute_sigma(M.lipschitz_majorant(1.0), 1.0, 1.0, 0.25) == pytest.approx(1.5, rel=1e-12)
    assert M.compute_sigma(M.smale_majorant(1.0), 1.0, 1.0, 0.0) == pytest.approx(0.5, rel=1e-12)


def test_sigma_capped_by_kappa():
    assert M.compute_sigma(M.lipschitz_majorant(1.0), 1.0, 1.0, 0.0, kappa=0.4) == 0.4


def test_h3_h4_violations():
    maj = M.lipschitz_majorant(1.0)
    with pytest.raises(H3Violated) as exc:
        M.compute_rho(maj, 1.0, 1.0)
    assert exc.value.product == pytest.approx(SQ2)
    with pytest.raises(H4Violated):
        M.compute_sigma(maj, 1.0, 1.0, 0.5)
    rd = M.compute_radii(maj, M.ProblemConstants(0.6, 1.0, 1.0))
    assert rd.sigma is None and not rd.h4_satisfied


def test_q2_examples():
    K, beta, c, t0 = 1.5, 0.8, 0.1, 0.2
    quad, lin = M.q2_coefficients(M.lipschitz_majorant(K), beta, c, t0)
    assert quad == pytest.approx(beta * K / (2 * (1 - beta * K * t0)), rel=1e-12)
    assert lin == pytest.approx(SQ2 * c * beta**2 * K / (1 - beta * K * t0), rel=1e-12)
    assert M.q2_coefficients(M.lipschitz_majorant(K), beta, 0.0, t0).lin == 0.0
    quad, _ = M.q2_coefficients(M.smale_majorant(1.0), 1.0, 0.0, 0.1)
    assert quad == pytest.approx(1 / (0.81 - 0.19), rel=1e-12)


def test_e_f_examples():
    maj = M.lipschitz_majorant(3.0)
    assert M.e_f(maj, 0.4, 0.4) == 0.0
    assert M.e_f(maj, 0.0, 0.7) == pytest.approx(3.0 * 0.49 / 2)


def test_closed_form_examples():
    k = M.ProblemConstants(0.0, 1.0, 1.0, 10.0)
    assert M.closed_form_radii(M.lipschitz_majorant(1.0), k).r == pytest.approx(2 / 3)
    assert M.closed_form_radii(M.smale_majorant(1.0), k).r == pytest.approx((5 - math.sqrt(17)) / 4)
    k = M.ProblemConstants(0.1, 1.0, 1.0, 0.3)
    assert M.closed_form_radii(M.lipschitz_majorant(1.0), k).r == 0.3


def test_smale_sigma_closed_form_disagrees_for_positive_c():
    # the quoted uniqueness formula drops a gamma on the c term, so it only
    # matches bisection when c = 0 or gamma = 1
    maj = M.smale_majorant(2.0)
    assert M.closed_form_discrepancies(maj, M.ProblemConstants(0.0, 1.0, 1.0)) == {}
    assert M.closed_form_discrepancies(M.smale_majorant(1.0), M.ProblemConstants(0.05, 1.0, 1.0)) == {}
    diffs = M.closed_form_discrepancies(maj, M.ProblemConstants(0.05, 1.0, 1.0))
    assert set(diffs) == {"sigma"}


def test_smale_sigma_corrected_closed_form():
    # derived by hand from the sigma inequality: w1 = 2 + beta - c beta0 gamma
    g, beta, c = 1.3, 0.7, 0.08
    beta0 = beta * beta
    w1 = 2 + beta - c * beta0 * g
    w2 = 4 * (1 + beta) * (1 - 2 * c * beta0 * g)
    expected = (w1 - math.sqrt(w1 * w1 - w2)) / (2 * g * (1 + beta))
    assert M.compute_sigma(M.smale_majorant(g), beta, beta0, c) == pytest.approx(expected, rel=1e-10)


def test_bisect_sup_whole_interval():
    assert M.bisect_sup(lambda t: 0.0, 3.0) == 3.0
    with pytest.raises(DomainError):
        M.bisect_sup(lambda t: 2.0, 3.0)


# -- properties --------------------------------------------------------------------

@settings(max_examples=200, deadline=None)
@given(pos, beta_st, frac)
def test_lipschitz_rho_sigma_closed_form(K, beta, f):
    c = f / (SQ2 * beta * beta * K)
    maj = M.lipschitz_majorant(K)
    assert M.compute_rho(maj, beta, c) == pytest.approx((2 - 2 * SQ2 * K * beta**2 * c) / (3 * K * beta), rel=1e-10)
    beta0 = beta * beta
    assume(2 * c * beta0 * K < 0.95)
    assert M.compute_sigma(maj, beta, beta0, c) == pytest.approx((2 - 2 * c * beta0 * K) / (beta * K), rel=1e-10)


@settings(max_examples=200, deadline=None)
@given(pos, beta_st, frac)
def test_smale_rho_closed_form(g, beta, f):
    c = f / (2 * SQ2 * beta * beta * g)
    a = 2 + 3 * beta - SQ2 * c * beta * beta * g
    b = 4 * (1 + beta) * (1 - 2 * SQ2 * c * beta * beta * g)
    expected = (a - math.sqrt(a * a - b)) / (2 * g * (1 + beta))
    assert M.compute_rho(M.smale_majorant(g), beta, c) == pytest.approx(expected, rel=1e-9)


@settings(max_examples=300, deadline=None)
@given(st.sampled_from(["lipschitz", "smale"]), pos, beta_st, frac)
def test_psi_equals_one_at_rho(kind, p, beta, f):
    maj = M.lipschitz_majorant(p) if kind == "lipschitz" else M.smale_majorant(p)
    c = f / (SQ2 * beta * beta * maj.d_plus_fprime_0)
    nu = M.compute_nu(maj, beta)
    rho = M.compute_rho(maj, beta, c)
    assume(rho < nu * (1 - 1e-9))
    assert abs(M.psi(maj, beta, c, rho) - 1.0) <= 1e-10


@settings(max_examples=100, deadline=None)
@given(st.sampled_from(["lipschitz", "smale"]), pos, beta_st)
def test_increasing_maps_on_random_grid(kind, p, beta):
    maj = M.lipschitz_majorant(p) if kind == "lipschitz" else M.smale_majorant(p)
    rng = np.random.default_rng(0)
    for name, (g, upper) in M.increasing_maps(maj, beta).items():
        upper = min(upper, 10.0 / p)
        ts = np.sort(rng.uniform(0, upper, 1000))
        ts = ts[(ts > upper * 1e-6) & (ts < upper * (1 - 1e-6))]
        v = np.array([g(t) for t in ts])
        assert np.all(np.diff(v) >= -1e-10 * np.maximum(1, np.abs(v[:-1]))), name


@pytest.mark.parametrize("t", [round(0.1 * i, 1) for i in range(10)])
def test_series_identity(t):
    terms = []
    i = 0
    while True:
        terms.append((i + 2) * (i + 1) * t**i)
        if terms[-1] < 1e-18 and i > 2:
            break
        i += 1
    assert math.fsum(terms) == pytest.approx(2 / (1 - t) ** 3, rel=1e-12)


@pytest.mark.parametrize("maj", [M.lipschitz_majorant(1.3), M.smale_majorant(0.6)], ids=["lipschitz", "smale"])
def test_psi_limit(maj):
    beta, c = 0.9, 0.2
    assert abs(M.psi(maj, beta, c, 1e-8) - SQ2 * c * beta**2 * maj.d_plus_fprime_0) <= 1e-6


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(["lipschitz", "smale"]), pos, st.floats(0, 0.999), st.floats(0, 0.999))
def test_e_f_nonnegative(kind, p, a, b):
    maj = M.lipschitz_majorant(p) if kind == "lipschitz" else M.smale_majorant(p)
    R = maj.R if math.isfinite(maj.R) else 10.0
    assert M.e_f(maj, a * R, b * R) >= -1e-12 * max(1.0, abs(maj.f(b * R)))


@settings(max_examples=100, deadline=None)
@given(pos, beta_st, frac, st.floats(0.01, 0.99))
def test_q2_sum_below_one(K, beta, f, s):
    maj = M.lipschitz_majorant(K)
    c = f / (SQ2 * beta * beta * K)
    rho = M.compute_rho(maj, beta, c)
    t0 = s * rho
    quad, lin = M.q2_coefficients(maj, beta, c, t0, rho=rho)
    assert quad * t0 + lin < 1.0
    assert quad * t0 + lin == pytest.approx(M.psi(maj, beta, c, t0), rel=1e-12)
