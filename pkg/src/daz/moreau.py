"""Moreau-envelope calculus built on the prox layer.

Values, spatial gradients, time derivatives, the Hamilton-Jacobi residual,
smoothed target densities, and the finite-temperature soft-min potential
whose zero-temperature limit is the envelope itself.
"""

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .potentials import GAUSSIAN_MIXTURE, LAPLACE, ModelSpec, _check_dim
from .prox import _bracket_1d, _pot_1d, prox_dispatch, prox_numeric_1d

__all__ = [
    "EnvelopeEval",
    "envelope",
    "hj_residual",
    "envelope_value_1d",
    "perturbed_density_1d",
    "diffusion_potential_1d",
]


@dataclass
class EnvelopeEval:
    value: float
    grad: np.ndarray
    dt: float
    prox_point: np.ndarray


def envelope(model: ModelSpec, x, t) -> EnvelopeEval:
    """M_G^t at x with grad (x-p)/t and time derivative -||x-p||^2/(2t^2)."""
    res = prox_dispatch(model, x, t)
    x = _check_dim(model, x)
    p = res.point
    d = x - p
    sq = float(d @ d)
    return EnvelopeEval(
        value=res.objective,
        grad=d / t,
        dt=-sq / (2.0 * t * t),
        prox_point=p,
    )


def hj_residual(model: ModelSpec, x, t) -> float:
    """d_t M + 0.5||grad M||^2, identically zero for the exact envelope."""
    ev = envelope(model, x, t)
    g = np.atleast_1d(ev.grad)
    return float(ev.dt + 0.5 * float(g @ g))


def envelope_value_1d(model: ModelSpec, x, t) -> float:
    """Scalar M_G^t(x) for the 1D models; t = 0 returns G(x) itself."""
    x = float(x)
    if t < 0:
        raise ValueError("t must be nonnegative")
    if t == 0.0:
        return float(_pot_1d(model, np.float64(x)))
    if model.kind == LAPLACE:
        # Huber closed form: the soft threshold makes it exact
        w = t * model.lam
        ax = abs(x)
        if ax > w:
            return model.lam * ax - 0.5 * t * model.lam**2
        return x * x / (2.0 * t)
    return prox_numeric_1d(model, x, t).objective


def _density_window(model: ModelSpec, t):
    # 12 x scale with scale sized so the truncated tail mass stays below
    # the 1e-8 normalization target (exponential tails need ~27 nats)
    if model.kind == LAPLACE:
        half = 12.0 * (2.25 / model.lam + t * model.lam / 10.0)
        return -half, half
    lo = float(np.min(model.means))
    hi = float(np.max(model.means))
    pad = 12.0 * (float(np.max(model.stds)) + np.sqrt(max(t, 0.0)) + 0.1)
    return lo - pad, hi + pad


def perturbed_density_1d(model: ModelSpec, t, xs):
    """Smoothed target pi^t = exp(-M_G^t)/Z_t on the grid xs.

    Z_t comes from adaptive quadrature over a bracketing window; the
    estimate must converge to relative error 1e-8 or this raises.
    """
    if model.kind not in (LAPLACE, GAUSSIAN_MIXTURE):
        raise ValueError("1D density available only for laplace/gaussian_mixture")
    if t < 0:
        raise ValueError("t must be nonnegative")
    xs = np.asarray(xs, dtype=float)
    lo, hi = _density_window(model, t)
    pts = None
    if model.kind == LAPLACE:
        # kink at 0 for t = 0, curvature seams at +-t lam otherwise
        seams = (0.0,) if t == 0.0 else (-t * model.lam, 0.0, t * model.lam)
        pts = [p for p in seams if lo < p < hi]
    Z, err = quad(
        lambda y: np.exp(-envelope_value_1d(model, y, t)),
        lo,
        hi,
        points=pts,
        epsabs=0.0,
        epsrel=1e-10,
        limit=200,
    )
    if not np.isfinite(Z) or Z <= 0.0 or err > 1e-8 * Z:
        raise RuntimeError(
            f"normalization quadrature did not converge (Z={Z!r}, err={err!r})"
        )
    vals = np.array([envelope_value_1d(model, x, t) for x in xs.ravel()])
    return (np.exp(-vals) / Z).reshape(xs.shape)


def _soft_min_anchor(gvec, x, t, lo, hi, grid=4097):
    # numeric minimum of phi(y) = G(y) + (x-y)^2/(2t) on [lo, hi]
    ys = np.linspace(lo, hi, grid)
    phi = gvec(ys) + (x - ys) ** 2 / (2.0 * t)
    i = int(np.argmin(phi))
    a = ys[max(i - 1, 0)]
    b = ys[min(i + 1, grid - 1)]

    def f(y):
        return float(gvec(np.array([y]))[0] + (x - y) ** 2 / (2.0 * t))

    for _ in range(200):
        if b - a <= 1e-12:
            break
        m1 = a + (b - a) / 3.0
        m2 = b - (b - a) / 3.0
        if f(m1) <= f(m2):
            b = m2
        else:
            a = m1
    y = 0.5 * (a + b)
    return y, f(y)


def diffusion_potential_1d(model, x, t, T, normalized=True) -> float:
    """Soft-min potential -T log[(2 pi t T)^{-1/2} Int e^{(-G(y)-(x-y)^2/(2t))/T} dy].

    With the default normalized Gaussian kernel the T -> 0 limit is exactly
    the Moreau envelope.  normalized=False drops the (2 pi t T)^{-1/2}
    factor; that raw soft-min sits below the envelope for large T on any
    bounded window, at the price of a (t, T)-dependent offset.  model may
    be a 1D ModelSpec or a bare callable G.  Evaluated log-sum-exp style
    around the numeric soft-min anchor.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    if T <= 0:
        raise ValueError("T must be positive")
    x = float(x)
    if isinstance(model, ModelSpec):
        gvec = lambda ys: _pot_1d(model, ys)
        blo, bhi = _bracket_1d(model, x)
        sc = 1.0 / model.lam if model.kind == LAPLACE else float(
            np.max(model.stds) + np.ptp(model.means)
        )
    elif callable(model):
        gvec = lambda ys: np.array([float(model(float(y))) for y in ys])
        sc = 1.0
        blo = x - 6.0 * (sc + np.sqrt(t))
        bhi = x + 6.0 * (sc + np.sqrt(t))
        blo = min(blo, -6.0 * (sc + np.sqrt(t)))
        bhi = max(bhi, 6.0 * (sc + np.sqrt(t)))
    else:
        raise TypeError("model must be a ModelSpec or a callable potential")

    p_star, m_star = _soft_min_anchor(gvec, x, t, blo, bhi)

    # integration window: wide enough for both small T (Gaussian width
    # ~ sqrt(tT)) and large T (integrand decays only like exp(-G/T))
    pad = 12.0 * (sc * max(T, 1.0) + np.sqrt(t * max(T, 1.0)))
    wlo = min(blo, p_star) - pad
    whi = max(bhi, p_star) + pad

    def integrand(y):
        phi = float(gvec(np.array([y]))[0] + (x - y) ** 2 / (2.0 * t))
        return np.exp(-(phi - m_star) / T)

    I, err = quad(
        integrand,
        wlo,
        whi,
        points=[p_star],
        epsabs=0.0,
        epsrel=1e-10,
        limit=400,
    )
    if not np.isfinite(I) or I <= 0.0 or err > 1e-8 * I:
        raise RuntimeError(
            f"soft-min quadrature did not converge (I={I!r}, err={err!r})"
        )
    value = m_star - T * np.log(I)
    if normalized:
        value += 0.5 * T * np.log(2.0 * np.pi * t * T)
    return float(value)
