import numpy as np
import pytest

from gncert import certify, problems
from gncert.solver import check_jacobian, solve

REGISTERED = ["linear", "scalar_quadratic", "ds_family", "exp_fit", "rosenbrock", "worst_case"]


def built(name):
    return problems.build(name)


@pytest.mark.parametrize("name", REGISTERED)
def test_jacobian_at_random_points(name, rng):
    p = built(name)
    radius = min(certify.sample_radius(p), 1.0)
    for x in certify.sample_ball(rng, p.x_star, 0.9 * radius, 10):
        assert check_jacobian(p, x) <= 1e-6


@pytest.mark.parametrize("name", REGISTERED)
def test_x_star_is_stationary(name):
    p = built(name)
    assert np.linalg.norm(p.gradient(p.x_star)) <= 1e-10
    c = np.linalg.norm(p.F(p.x_star))
    if p.regime == problems.ZERO:
        assert c <= 1e-12
    else:
        assert c > 1e-12


def fd_second_derivative_norm(p, rng, h=1e-5, samples=400):
    # max over unit u of ||(J(x*+hu) - J(x*-hu)) / 2h||, the norm of F''(x*)
    best = 0.0
    for _ in range(samples):
        u = certify.random_direction(rng, p.n)
        D = (p.J(p.x_star + h * u) - p.J(p.x_star - h * u)) / (2 * h)
        best = max(best, np.linalg.norm(D, 2))
    return best


@pytest.mark.parametrize("name,params", [("scalar_quadratic", {}), ("rosenbrock", {}),
                                         ("ds_family", {"lambda": 0.1}), ("ds_family", {"lambda": -2.0})])
def test_declared_constants_exact(name, params, rng):
    p = problems.build(name, **params)
    K_est = certify.estimate_lipschitz(p, radius=2.0, samples=3000, rng=rng)
    assert K_est <= p.lipschitz * (1 + 1e-9)
    assert K_est >= p.lipschitz * (1 - 1e-2)
    # all these residuals are quadratic, so gamma = ||F''(x*)|| / 2
    g_est = fd_second_derivative_norm(p, rng) / 2
    assert g_est == pytest.approx(p.gamma, rel=1e-6)
    assert certify.smale_gamma(p) == pytest.approx(p.gamma, rel=1e-9)


def test_linear_examples():
    p = problems.make_linear(np.eye(2), [1.0, 2.0])
    np.testing.assert_allclose(p.x_star, [1.0, 2.0])
    assert p.regime == problems.ZERO
    A = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    b = np.array([1.0, 0.0, 0.0])
    p = problems.make_linear(A, b)
    np.testing.assert_allclose(p.x_star, np.linalg.solve(A.T @ A, A.T @ b), atol=1e-14)
    assert np.linalg.norm(p.F(p.x_star)) > 0
    tr = solve(p, [10.0, -4.0])
    assert tr.converged and tr.n_iters == 1


def test_linear_registry_residual():
    p = problems.build("linear", residual=0.25)
    np.testing.assert_allclose(p.x_star, [1.0, 2.0], atol=1e-14)
    assert np.linalg.norm(p.F(p.x_star)) == pytest.approx(0.25)


def test_scalar_quadratic_examples():
    p = built("scalar_quadratic")
    np.testing.assert_array_equal(p.F([1.0]), [0.0, 0.0])
    np.testing.assert_array_equal(p.J([1.0]), [[1.0], [0.0]])


def test_rosenbrock_examples():
    p = built("rosenbrock")
    np.testing.assert_array_equal(p.F([1.0, 1.0]), [0.0, 0.0])
    x, y = np.array([0.3, -1.0]), np.array([-0.4, 2.0])
    assert np.linalg.norm(p.J(x) - p.J(y), 2) == pytest.approx(20 * abs(x[0] - y[0]))


def test_ds_family_regimes():
    p0 = problems.make_ds_family(0.0)
    tr = solve(p0, [3.0])
    assert tr.converged and tr.n_iters == 1
    small = problems.make_ds_family(0.1)
    for x0 in np.linspace(-0.5, 0.5, 21):
        assert certify.converges_to_solution(small, [x0])
    large = problems.make_ds_family(2.0)
    assert large.regime == problems.LARGE and large.notes == "reconstructed"
    for x0 in np.concatenate([np.linspace(-0.2, -1e-3, 20), np.linspace(1e-3, 0.2, 20)]):
        assert not certify.converges_to_solution(large, [x0])


def test_ds_family_c_is_sqrt2():
    for lam in (0.0, 0.3, 2.0):
        p = problems.make_ds_family(lam)
        assert np.linalg.norm(p.F(p.x_star)) == pytest.approx(np.sqrt(2.0))


def test_exp_fit_stored_x_star_matches_refinement():
    for noise, stored in problems.EXP_FIT_X_STAR.items():
        t, y = problems.exp_fit_data(noise)
        fresh = problems.make_exp_fit(t, y)  # multistart refinement on the fly
        np.testing.assert_allclose(fresh.x_star, stored, atol=1e-10)


def test_exp_fit_examples():
    p0 = problems.build("exp_fit", noise=0.0)
    assert np.linalg.norm(p0.F(p0.x_star)) <= 1e-12
    p = problems.build("exp_fit", noise=1e-3)
    c = np.linalg.norm(p.F(p.x_star))
    assert 0 < c < 1e-2
    assert p.regime == problems.SMALL
    assert check_jacobian(p, p.x_star) <= 1e-7


def test_exp_fit_input_validation():
    with pytest.raises(ValueError):
        problems.make_exp_fit([0.0, 1.0], [1.0, 2.0])


def test_registry_build_and_params():
    assert set(REGISTERED) <= set(problems.REGISTRY)
    with pytest.raises(KeyError):
        problems.build("nope")
    with pytest.raises(KeyError):
        problems.build("linear", bogus=1.0)
    assert problems.parse_params(["lambda=2", "kind=smale"]) == {"lambda": 2.0, "kind": "smale"}
    with pytest.raises(ValueError):
        problems.parse_params(["novalue"])


def test_worst_case_registry():
    p = problems.build("worst_case", kind="smale", beta=0.5, gamma=2.0)
    assert p.params["kind"] == "smale" and p.x_star[0] == 0.0
    assert p.domain_radius == pytest.approx(0.5)  # capped at R = 1/gamma
