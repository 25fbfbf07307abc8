"""Split target potentials U = F + G for the four sampling models.

F is the smooth data term (zero for the 1D models), G the nonsmooth part
handled through its proximal mapping.
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

__all__ = [
    "ModelSpec",
    "laplace",
    "gaussian_mixture",
    "tv_chain",
    "tv_image",
    "eval_F",
    "grad_F",
    "eval_G",
    "subgradient_bound",
    "mix_logpdf",
    "mix_grad",
    "mix_curv",
    "density_1d",
]

LAPLACE = "laplace"
GAUSSIAN_MIXTURE = "gaussian_mixture"
TV_CHAIN = "tv_chain"
TV_IMAGE = "tv_image"

_KINDS = (LAPLACE, GAUSSIAN_MIXTURE, TV_CHAIN, TV_IMAGE)


@dataclass(frozen=True)
class ModelSpec:
    """Target model U(x) = F(x) + G(x).

    kind selects one of laplace, gaussian_mixture, tv_chain, tv_image.
    y is stored flattened row-major for images; shape keeps (N, M).
    """

    kind: str
    lam: float = 1.0
    sigma: float = 1.0
    y: Optional[np.ndarray] = None
    means: Optional[np.ndarray] = None
    weights: Optional[np.ndarray] = None
    stds: Optional[np.ndarray] = None
    shape: Tuple[int, ...] = (1,)

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}")
        if not (self.lam > 0):
            raise ValueError("lambda must be positive")
        if not (self.sigma > 0):
            raise ValueError("sigma must be positive")
        if self.kind == GAUSSIAN_MIXTURE:
            w = self.weights
            if self.means is None or w is None or self.stds is None:
                raise ValueError("mixture needs means, weights, stds")
            if not (len(self.means) == len(w) == len(self.stds)):
                raise ValueError("mixture parameter lengths differ")
            if np.any(w <= 0) or abs(float(np.sum(w)) - 1.0) > 1e-12:
                raise ValueError("mixture weights must be positive and sum to 1")
            if np.any(self.stds <= 0):
                raise ValueError("mixture stds must be positive")
        if self.kind in (TV_CHAIN, TV_IMAGE):
            if self.y is None:
                raise ValueError(f"{self.kind} needs observed data y")
            if self.y.shape != (self.dim,):
                raise ValueError("y does not match model dimension")

    @property
    def dim(self) -> int:
        return int(np.prod(self.shape))


def laplace(lam: float = 1.0) -> ModelSpec:
    """Laplace target: F = 0, G(x) = lam*|x|, d = 1."""
    return ModelSpec(kind=LAPLACE, lam=lam, shape=(1,))


def gaussian_mixture(means, weights, stds) -> ModelSpec:
    """1D Gaussian mixture: F = 0, G(x) = -log sum_i w_i N(x; mu_i, sigma_i)."""
    means = np.asarray(means, dtype=float)
    weights = np.asarray(weights, dtype=float)
    stds = np.asarray(stds, dtype=float)
    return ModelSpec(
        kind=GAUSSIAN_MIXTURE,
        sigma=float(np.min(stds)) if stds.size else 1.0,
        means=means,
        weights=weights,
        stds=stds,
        shape=(1,),
    )


def tv_chain(y, lam: float, sigma: float) -> ModelSpec:
    """TV-L2 chain: F = ||x-y||^2/(2 sigma^2), G = lam * sum_i |x_{i+1}-x_i|."""
    y = np.asarray(y, dtype=float).ravel()
    return ModelSpec(kind=TV_CHAIN, lam=lam, sigma=sigma, y=y, shape=(y.size,))


def tv_image(y, lam: float, sigma: float) -> ModelSpec:
    """TV-L2 image with anisotropic TV; y given as an N x M matrix."""
    y = np.asarray(y, dtype=float)
    if y.ndim != 2:
        raise ValueError("image data must be a 2D matrix")
    return ModelSpec(
        kind=TV_IMAGE, lam=lam, sigma=sigma, y=y.ravel(), shape=y.shape
    )


def _check_dim(model: ModelSpec, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float).ravel()
    if x.size != model.dim:
        raise ValueError(
            f"state has dimension {x.size}, model expects {model.dim}"
        )
    return x


def eval_F(model: ModelSpec, x) -> float:
    x = _check_dim(model, x)
    if model.kind in (TV_CHAIN, TV_IMAGE):
        r = x - model.y
        return float(r @ r) / (2.0 * model.sigma**2)
    return 0.0


def grad_F(model: ModelSpec, x) -> np.ndarray:
    x = _check_dim(model, x)
    if model.kind in (TV_CHAIN, TV_IMAGE):
        return (x - model.y) / model.sigma**2
    return np.zeros_like(x)


def eval_G(model: ModelSpec, x) -> float:
    x = _check_dim(model, x)
    if model.kind == LAPLACE:
        return model.lam * abs(float(x[0]))
    if model.kind == GAUSSIAN_MIXTURE:
        return -float(mix_logpdf(model, x[0]))
    if model.kind == TV_CHAIN:
        return model.lam * float(np.sum(np.abs(np.diff(x))))
    # anisotropic TV, forward differences, Neumann boundary
    img = x.reshape(model.shape)
    dh = np.abs(img[:, 1:] - img[:, :-1]).sum()
    dv = np.abs(img[1:, :] - img[:-1, :]).sum()
    return model.lam * float(dh + dv)


def subgradient_bound(model: ModelSpec, s: float) -> float:
    """Upper bound on sup{||p|| : ||x|| <= s, p in dG(x)}."""
    if s < 0:
        raise ValueError("s must be nonnegative")
    if model.kind == LAPLACE:
        return model.lam
    if model.kind == TV_CHAIN:
        # each coordinate appears in at most 2 difference terms
        return model.lam * np.sqrt(4.0 * model.dim)
    if model.kind == TV_IMAGE:
        # each pixel appears in at most 4 difference terms
        return model.lam * np.sqrt(16.0 * model.dim)
    # mixture: |G'(x)| <= max_i |x - mu_i| / sigma_i^2, monotone in s
    return float((s + np.max(np.abs(model.means))) / np.min(model.stds) ** 2)


# mixture helpers, shared with the prox and envelope code


def _mix_parts(model: ModelSpec, x):
    x = np.asarray(x, dtype=float)
    mu = model.means[..., None] if x.ndim else model.means
    sd = model.stds[..., None] if x.ndim else model.stds
    w = model.weights[..., None] if x.ndim else model.weights
    z = (x - mu) / sd
    logc = np.log(w) - np.log(sd) - 0.5 * np.log(2.0 * np.pi)
    return z, sd, logc


def mix_logpdf(model: ModelSpec, x):
    """log of the mixture density, vectorized over x."""
    z, _, logc = _mix_parts(model, x)
    # overflow at absurd |x| yields non-finite output; divergence checks
    # downstream own that case
    with np.errstate(over="ignore", invalid="ignore"):
        a = logc - 0.5 * z * z
        amax = np.max(a, axis=0)
        return amax + np.log(np.sum(np.exp(a - amax), axis=0))


def mix_grad(model: ModelSpec, x):
    """G'(x) for the mixture potential G = -log density, vectorized."""
    z, sd, logc = _mix_parts(model, x)
    with np.errstate(over="ignore", invalid="ignore"):
        a = logc - 0.5 * z * z
        amax = np.max(a, axis=0)
        r = np.exp(a - amax)
        rs = np.sum(r, axis=0)
        # posterior-weighted pull toward the component means
        return np.sum(r * z / sd, axis=0) / rs


def mix_curv(model: ModelSpec, x):
    """G''(x) for the mixture potential, vectorized."""
    z, sd, logc = _mix_parts(model, x)
    with np.errstate(over="ignore", invalid="ignore"):
        a = logc - 0.5 * z * z
        amax = np.max(a, axis=0)
        r = np.exp(a - amax)
        rs = np.sum(r, axis=0)
        g = np.sum(r * z / sd, axis=0) / rs
        h = np.sum(r * (z * z - 1.0) / sd**2, axis=0) / rs
        # G'' = (m'/m)^2 - m''/m with m the mixture density
        return g * g - h


def density_1d(model: ModelSpec):
    """Analytic normalized target density for the 1D models, as a callable."""
    if model.kind == LAPLACE:
        lam = model.lam
        return lambda x: 0.5 * lam * np.exp(-lam * np.abs(np.asarray(x, dtype=float)))
    if model.kind == GAUSSIAN_MIXTURE:
        return lambda x: np.exp(mix_logpdf(model, np.asarray(x, dtype=float)))
    raise ValueError("analytic density available only for the 1D models")
