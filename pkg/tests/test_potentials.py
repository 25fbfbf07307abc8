import numpy as np
import pytest
from scipy import integrate

from daz import (
    density_1d,
    eval_F,
    eval_G,
    gaussian_mixture,
    grad_F,
    laplace,
    subgradient_bound,
    tv_chain,
    tv_image,
)
from daz.potentials import mix_curv, mix_grad, mix_logpdf


def std_mixture():
    return gaussian_mixture([-1.0, 1.0], [0.5, 0.5], [0.25, 0.25])


def test_laplace_potential_values():
    m = laplace(lam=2.0)
    assert eval_F(m, np.array([3.0])) == 0.0
    assert grad_F(m, np.array([3.0])) == pytest.approx(0.0)
    assert eval_G(m, np.array([-1.5])) == pytest.approx(3.0)


def test_laplace_validation():
    with pytest.raises(ValueError):
        laplace(lam=0.0)
    with pytest.raises(ValueError):
        laplace(lam=-1.0)


def test_mixture_validation():
    with pytest.raises(ValueError):
        gaussian_mixture([-1.0, 1.0], [0.7, 0.7], [0.25, 0.25])
    with pytest.raises(ValueError):
        gaussian_mixture([-1.0, 1.0], [0.5, 0.5], [0.25, -0.25])
    with pytest.raises(ValueError):
        gaussian_mixture([-1.0], [0.5, 0.5], [0.25, 0.25])


def test_mixture_potential_matches_direct_logpdf(rng):
    m = std_mixture()
    xs = rng.uniform(-3, 3, size=50)
    for x in xs:
        direct = np.log(
            0.5 * np.exp(-((x + 1) ** 2) / (2 * 0.25**2)) / (0.25 * np.sqrt(2 * np.pi))
            + 0.5 * np.exp(-((x - 1) ** 2) / (2 * 0.25**2)) / (0.25 * np.sqrt(2 * np.pi))
        )
        assert eval_G(m, np.array([x])) == pytest.approx(-direct, abs=1e-12)
        assert mix_logpdf(m, x) == pytest.approx(direct, abs=1e-12)


def test_mixture_grad_and_curvature_match_finite_differences(rng):
    m = std_mixture()
    h = 1e-6
    for x in rng.uniform(-2, 2, size=25):
        g_fd = (-mix_logpdf(m, x + h) + mix_logpdf(m, x - h)) / (2 * h)
        assert mix_grad(m, x) == pytest.approx(g_fd, rel=1e-6, abs=1e-6)
        c_fd = (mix_grad(m, x + h) - mix_grad(m, x - h)) / (2 * h)
        assert mix_curv(m, x) == pytest.approx(c_fd, rel=1e-5, abs=1e-4)


def test_mixture_central_curvature():
    # two unit-weight modes at +-1 with sd 1/4 make the origin a sharp
    # log-density maximum: G''(0) = 1/sd^2 - (mu/sd^2)^2 = 16 - 256
    m = std_mixture()
    assert mix_curv(m, 0.0) == pytest.approx(-240.0, rel=1e-12)


def test_tv_chain_potentials(rng):
    y = rng.normal(size=7)
    m = tv_chain(y, lam=3.0, sigma=0.5)
    x = rng.normal(size=7)
    assert eval_F(m, x) == pytest.approx(np.sum((x - y) ** 2) / (2 * 0.25))
    assert np.allclose(grad_F(m, x), (x - y) / 0.25)
    assert eval_G(m, x) == pytest.approx(3.0 * np.sum(np.abs(np.diff(x))))


def test_tv_chain_grad_matches_finite_differences(rng):
    y = rng.normal(size=5)
    m = tv_chain(y, lam=1.0, sigma=0.3)
    x = rng.normal(size=5)
    h = 1e-7
    for i in range(5):
        e = np.zeros(5)
        e[i] = h
        fd = (eval_F(m, x + e) - eval_F(m, x - e)) / (2 * h)
        assert grad_F(m, x)[i] == pytest.approx(fd, rel=1e-5)


def test_tv_image_potentials(rng):
    Y = rng.normal(size=(4, 5))
    m = tv_image(Y, lam=2.0, sigma=0.1)
    X = rng.normal(size=(4, 5))
    tv = np.sum(np.abs(np.diff(X, axis=0))) + np.sum(np.abs(np.diff(X, axis=1)))
    assert eval_G(m, X.ravel()) == pytest.approx(2.0 * tv)
    assert eval_F(m, X.ravel()) == pytest.approx(np.sum((X - Y) ** 2) / (2 * 0.01))


def test_dimension_check():
    m = tv_chain(np.zeros(4), lam=1.0, sigma=1.0)
    with pytest.raises(ValueError):
        eval_F(m, np.zeros(5))
    with pytest.raises(ValueError):
        eval_G(m, np.zeros(3))


def test_subgradient_bound_dominates_sampled_slopes(rng):
    for m in (laplace(lam=2.0), std_mixture()):
        s = 3.0
        bound = subgradient_bound(m, s)
        xs = rng.uniform(-s, s, size=200)
        if m.kind == "laplace":
            slopes = np.full_like(xs, m.lam)
        else:
            slopes = np.abs(mix_grad(m, xs))
        assert np.all(slopes <= bound + 1e-12)


def test_density_1d_normalization():
    val, err = integrate.quad(density_1d(laplace(lam=1.5)), -40, 40)
    assert val == pytest.approx(1.0, abs=1e-9)

    val, err = integrate.quad(density_1d(std_mixture()), -8, 8)
    assert val == pytest.approx(1.0, abs=1e-9)


def test_density_1d_laplace_closed_form(rng):
    pdf = density_1d(laplace(lam=2.0))
    for x in rng.uniform(-3, 3, size=20):
        assert pdf(x) == pytest.approx(np.exp(-2.0 * abs(x)), rel=1e-12)
