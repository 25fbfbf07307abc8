"""Shared test oracles.

Independent reference implementations for the prox layer: dual projected
gradient solvers for the chain and image TV problems, plus a scalar
brute-force minimizer. All deliberately avoid the code paths under test.
"""

import numpy as np
import pytest


def dual_tv_chain(v, w, n_iters=4000):
    """Chain TV prox via FISTA on the dual.

    min_{|u| <= w} (1/2)||D^T u||^2 - u^T D v with x = v - D^T u,
    (D x)_j = x_{j+1} - x_j. Lipschitz constant of the dual gradient is 4.
    """
    v = np.asarray(v, dtype=float)
    n = v.size
    if n == 1:
        return v.copy()
    u = np.zeros(n - 1)
    y = u.copy()
    s = 1.0
    for _ in range(n_iters):
        x = v - (np.concatenate(([0.0], y)) - np.concatenate((y, [0.0])))
        g = -(x[1:] - x[:-1])
        u_new = np.clip(y - g / 4.0, -w, w)
        s_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * s * s))
        y = u_new + ((s - 1.0) / s_new) * (u_new - u)
        u, s = u_new, s_new
    return v - (np.concatenate(([0.0], u)) - np.concatenate((u, [0.0])))


def dual_tv_image(V, w, n_iters=6000):
    """Anisotropic image TV prox via FISTA on the dual, Lipschitz 8."""
    V = np.asarray(V, dtype=float)
    N, M = V.shape

    def div(uh, uv):
        # adjoint of the forward-difference pair
        out = np.zeros((N, M))
        out[:, :-1] -= uh
        out[:, 1:] += uh
        out[:-1, :] -= uv
        out[1:, :] += uv
        return out

    uh = np.zeros((N, M - 1))
    uv = np.zeros((N - 1, M))
    yh, yv = uh.copy(), uv.copy()
    s = 1.0
    for _ in range(n_iters):
        X = V - div(yh, yv)
        gh = -(X[:, 1:] - X[:, :-1])
        gv = -(X[1:, :] - X[:-1, :])
        uh_new = np.clip(yh - gh / 8.0, -w, w)
        uv_new = np.clip(yv - gv / 8.0, -w, w)
        s_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * s * s))
        yh = uh_new + ((s - 1.0) / s_new) * (uh_new - uh)
        yv = uv_new + ((s - 1.0) / s_new) * (uv_new - uv)
        uh, uv, s = uh_new, uv_new, s_new
    return V - div(uh, uv)


def brute_prox_1d(pot, x, t, lo, hi, n_grid=20001):
    """Scalar prox by dense grid search plus golden-section polish."""
    xs = np.linspace(lo, hi, n_grid)
    obj = pot(xs) + (x - xs) ** 2 / (2.0 * t)
    i = int(np.argmin(obj))
    a = xs[max(0, i - 1)]
    b = xs[min(n_grid - 1, i + 1)]
    phi = (np.sqrt(5.0) - 1.0) / 2.0
    c = b - phi * (b - a)
    d = a + phi * (b - a)
    f = lambda y: pot(y) + (x - y) ** 2 / (2.0 * t)
    for _ in range(200):
        if f(c) < f(d):
            b, d = d, c
            c = b - phi * (b - a)
        else:
            a, c = c, d
            d = a + phi * (b - a)
        if b - a < 1e-14:
            break
    y = 0.5 * (a + b)
    return y, float(f(y))


def tv_chain_objective(x, v, w):
    x = np.asarray(x, dtype=float)
    return 0.5 * np.sum((x - v) ** 2) + w * np.sum(np.abs(np.diff(x)))


def tv_image_objective(X, V, w):
    X = np.asarray(X, dtype=float)
    tv = np.sum(np.abs(X[:, 1:] - X[:, :-1])) + np.sum(np.abs(X[1:, :] - X[:-1, :]))
    return 0.5 * np.sum((X - V) ** 2) + w * tv


@pytest.fixture
def rng():
    return np.random.default_rng(20260819)
