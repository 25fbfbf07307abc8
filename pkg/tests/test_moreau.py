import numpy as np
import pytest
from scipy.integrate import simpson

from daz import (
    diffusion_potential_1d,
    envelope,
    envelope_value_1d,
    eval_G,
    gaussian_mixture,
    hj_residual,
    laplace,
    perturbed_density_1d,
    tv_chain,
)
from daz.potentials import mix_logpdf


def std_mixture():
    return gaussian_mixture([-1.0, 1.0], [0.5, 0.5], [0.25, 0.25])


def huber(x, t, lam):
    ax = np.abs(x)
    return np.where(ax > t * lam, lam * ax - t * lam**2 / 2.0, x * x / (2.0 * t))


def test_laplace_envelope_closed_form(rng):
    lam = 1.0
    m = laplace(lam=lam)
    for t in (0.1, 0.5, 1.0):
        for x in np.linspace(-5, 5, 101):
            e = envelope(m, np.array([x]), t)
            assert e.value == pytest.approx(float(huber(x, t, lam)), abs=1e-12)
            want_p = np.sign(x) * max(abs(x) - t * lam, 0.0)
            assert e.prox_point[0] == pytest.approx(want_p, abs=1e-12)
            assert e.grad[0] == pytest.approx((x - want_p) / t, abs=1e-12)
            assert e.dt == pytest.approx(-((x - want_p) ** 2) / (2 * t * t), abs=1e-12)


def test_laplace_envelope_spec_point():
    e = envelope(laplace(lam=1.0), np.array([2.0]), 1.0)
    assert e.value == pytest.approx(1.5, abs=1e-12)
    assert e.grad[0] == pytest.approx(1.0, abs=1e-12)
    assert e.dt == pytest.approx(-0.5, abs=1e-12)


def test_dt_matches_finite_differences(rng):
    models = (laplace(lam=1.0), std_mixture())
    h = 1e-5
    for m in models:
        for _ in range(20):
            x = np.array([float(rng.uniform(-3, 3))])
            t = float(rng.uniform(0.2, 1.5))
            e = envelope(m, x, t)
            fd = (envelope(m, x, t + h).value - envelope(m, x, t - h).value) / (2 * h)
            assert e.dt == pytest.approx(fd, rel=1e-6, abs=1e-8)


def test_grad_matches_finite_differences_away_from_seams(rng):
    m = laplace(lam=1.0)
    h = 1e-6
    for _ in range(30):
        x = float(rng.uniform(-4, 4))
        t = float(rng.uniform(0.1, 1.5))
        if abs(abs(x) - t) < 1e-3:
            continue
        e = envelope(m, np.array([x]), t)
        fd = (
            envelope(m, np.array([x + h]), t).value
            - envelope(m, np.array([x - h]), t).value
        ) / (2 * h)
        assert e.grad[0] == pytest.approx(fd, rel=1e-5, abs=1e-6)


def test_hj_residual_is_tiny(rng):
    for m in (laplace(lam=1.0), std_mixture()):
        for _ in range(25):
            x = np.array([float(rng.uniform(-3, 3))])
            t = float(rng.uniform(0.05, 2.0))
            assert abs(hj_residual(m, x, t)) <= 1e-12


def test_hj_residual_multivariate(rng):
    m = tv_chain(rng.normal(size=6), lam=2.0, sigma=0.5)
    x = rng.normal(size=6)
    assert abs(hj_residual(m, x, 0.4)) <= 1e-12


def test_envelope_monotone_in_t_and_below_G(rng):
    for m in (laplace(lam=1.5), std_mixture()):
        for _ in range(20):
            x = np.array([float(rng.uniform(-3, 3))])
            s = float(rng.uniform(0.05, 0.5))
            t = s + float(rng.uniform(0.1, 1.0))
            vt = envelope(m, x, t).value
            vs = envelope(m, x, s).value
            g = float(eval_G(m, x))
            assert vt <= vs + 1e-10
            assert vs <= g + 1e-10


def test_laplace_envelope_lipschitz_bound_in_t(rng):
    # |M^t - M^s| <= |t-s| lam^2 / 2, small grid; the acceptance suite
    # sweeps the full one
    lam = 1.0
    xs = np.linspace(-10, 10, 41)
    ts = np.linspace(0.01, 3.0, 23)
    V = huber(xs[:, None], ts[None, :], lam)
    for i in range(ts.size):
        for j in range(ts.size):
            bound = abs(ts[i] - ts[j]) * lam**2 / 2.0
            assert np.max(np.abs(V[:, i] - V[:, j])) <= bound + 1e-12


def test_envelope_value_1d_matches_envelope(rng):
    for m in (laplace(lam=1.3), std_mixture()):
        for _ in range(10):
            x = float(rng.uniform(-2, 2))
            t = float(rng.uniform(0.05, 1.0))
            assert envelope_value_1d(m, x, t) == pytest.approx(
                envelope(m, np.array([x]), t).value, abs=1e-7
            )
        assert envelope_value_1d(m, 0.7, 0.0) == pytest.approx(
            float(eval_G(m, np.array([0.7]))), abs=1e-12
        )


def test_perturbed_density_laplace_t0_analytic():
    m = laplace(lam=2.0)
    xs = np.linspace(-4, 4, 201)
    dens = perturbed_density_1d(m, 0.0, xs)
    want = np.exp(-2.0 * np.abs(xs))
    want /= 1.0  # Z = 2/lam = 1
    assert np.allclose(dens, want, atol=1e-10)


def test_perturbed_density_mixture_t0_is_mixture_pdf():
    m = std_mixture()
    xs = np.linspace(-3, 3, 101)
    dens = perturbed_density_1d(m, 0.0, xs)
    want = np.exp(mix_logpdf(m, xs))
    assert np.allclose(dens, want, atol=1e-10)


def test_perturbed_density_integrates_to_one():
    m = laplace(lam=1.0)
    xs = np.linspace(-30, 30, 4001)
    dens = perturbed_density_1d(m, 0.5, xs)
    assert simpson(dens, x=xs) == pytest.approx(1.0, abs=1e-6)
    g = std_mixture()
    xs = np.linspace(-8, 8, 4001)
    dens = perturbed_density_1d(g, 0.3, xs)
    assert simpson(dens, x=xs) == pytest.approx(1.0, abs=1e-6)


def test_perturbed_density_spreads_with_t():
    # smoothing lowers the peak and fattens the shoulders
    m = std_mixture()
    xs = np.array([0.0, 1.0])
    d_small = perturbed_density_1d(m, 0.01, xs)
    d_big = perturbed_density_1d(m, 1.0, xs)
    assert d_big[1] < d_small[1]
    assert d_big[0] > d_small[0]


def test_diffusion_potential_quadratic_closed_form():
    # G = y^2/2 gives value(x) - value(0) = x^2 / (2 (1 + t)) at every
    # temperature, a direct Gaussian-integral identity
    g = lambda y: 0.5 * y * y
    for t in (0.2, 1.0):
        for T in (0.05, 0.5, 2.0):
            got = diffusion_potential_1d(g, 1.3, t, T) - diffusion_potential_1d(
                g, 0.0, t, T
            )
            assert got == pytest.approx(1.3**2 / (2 * (1 + t)), abs=1e-7)


def test_diffusion_potential_zero_temperature_limit():
    m = laplace(lam=1.0)
    target = envelope_value_1d(m, 2.0, 1.0)
    assert target == pytest.approx(1.5, abs=1e-12)
    errs = [
        abs(diffusion_potential_1d(m, 2.0, 1.0, T) - target)
        for T in (1.0, 0.3, 0.1, 0.03, 0.01)
    ]
    assert all(errs[i + 1] < errs[i] or errs[i + 1] == 0.0 for i in range(len(errs) - 1))
    assert errs[-1] < 0.02


def test_diffusion_potential_raw_form_lies_below_envelope():
    # without the Gaussian normalizer the soft-min sits below the hard min
    m = laplace(lam=1.0)
    for T in (2.0, 5.0, 10.0):
        raw = diffusion_potential_1d(m, 2.0, 1.0, T, normalized=False)
        assert raw <= 1.5 + 1e-9
