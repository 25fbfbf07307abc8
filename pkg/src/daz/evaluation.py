"""Empirical histograms and total-variation error against references.

TV convention is half the L1 distance between probability vectors, so every
metric here lives in [0, 1].
"""

from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from .bp import MarginalTable

__all__ = [
    "Histogram1D",
    "histogram_1d",
    "reference_masses",
    "tv_binned",
    "tv_distance_1d",
    "marginal_tv",
    "mode_mass",
    "write_histogram_csv",
]


@dataclass
class Histogram1D:
    lo: float
    hi: float
    counts: np.ndarray
    n: int
    clipped: int  # samples outside [lo, hi], folded into the end bins

    @property
    def masses(self):
        return self.counts / float(self.n)

    @property
    def edges(self):
        return np.linspace(self.lo, self.hi, self.counts.size + 1)


def histogram_1d(samples, lo, hi, bins) -> Histogram1D:
    x = np.asarray(samples, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("empty samples")
    if not lo < hi:
        raise ValueError("need lo < hi")
    if bins < 1:
        raise ValueError("bins must be positive")
    edges = np.linspace(lo, hi, bins + 1)
    idx = np.searchsorted(edges, x, side="right") - 1
    clipped = int(np.count_nonzero(x < lo) + np.count_nonzero(x > hi))
    idx = np.clip(idx, 0, bins - 1)
    counts = np.bincount(idx, minlength=bins)
    return Histogram1D(lo=float(lo), hi=float(hi), counts=counts, n=x.size,
                       clipped=clipped)


_GL_NODES, _GL_WEIGHTS = leggauss(16)


def reference_masses(density, lo, hi, bins):
    """Per-bin masses of a density by fixed Gauss-Legendre quadrature,
    normalized to sum to 1 over the range."""
    if bins < 1:
        raise ValueError("bins must be positive")
    edges = np.linspace(lo, hi, bins + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1] - edges[0])
    ys = mid[:, None] + half * _GL_NODES[None, :]
    vals = np.asarray(density(ys.ravel()), dtype=float).reshape(bins, -1)
    m = np.maximum(vals @ _GL_WEIGHTS, 0.0) * half
    s = m.sum()
    if not np.isfinite(s) or s <= 0.0:
        raise ValueError("reference density vanishes on the range")
    return m / s


def tv_binned(p, q) -> float:
    """Half L1 distance between two mass vectors."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError("mass vectors must share a shape")
    return 0.5 * float(np.abs(p - q).sum())


def tv_distance_1d(samples, density, lo, hi, bins) -> float:
    """TV between binned samples and the density's per-bin masses."""
    if bins < 2:
        raise ValueError("bins must be at least 2")
    hist = histogram_1d(samples, lo, hi, bins)
    q = reference_masses(density, lo, hi, bins)
    return tv_binned(hist.masses, q)


def marginal_tv(states, marginals: MarginalTable) -> float:
    """Mean over coordinates of TV(empirical marginal, table row)."""
    X = np.asarray(states, dtype=float)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("states must be a nonempty n x d matrix")
    d = X.shape[1]
    if d != marginals.probs.shape[0]:
        raise ValueError(
            f"states have {d} coordinates, table has {marginals.probs.shape[0]}"
        )
    L = marginals.probs.shape[1]
    idx = np.searchsorted(marginals.edges, X, side="right") - 1
    idx = np.clip(idx, 0, L - 1)
    flat = idx + np.arange(d)[None, :] * L
    counts = np.bincount(flat.ravel(), minlength=d * L).reshape(d, L)
    emp = counts / float(X.shape[0])
    return 0.5 * float(np.abs(emp - marginals.probs).sum(axis=1).mean())


def mode_mass(samples, split) -> float:
    """Fraction of samples strictly greater than split."""
    x = np.asarray(samples, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("empty samples")
    return float(np.mean(x > split))


def write_histogram_csv(path, hist: Histogram1D, ref_masses, comment=None):
    edges = hist.edges
    q = np.asarray(ref_masses, dtype=float)
    if q.shape != hist.counts.shape:
        raise ValueError("reference masses must match the bin count")
    with open(path, "w", encoding="utf-8") as f:
        if comment:
            f.write(f"# {comment}\n")
        f.write("bin_left,bin_right,count,reference_mass\n")
        for i in range(hist.counts.size):
            f.write(
                f"{edges[i]:.17g},{edges[i + 1]:.17g},"
                f"{int(hist.counts[i])},{q[i]:.17g}\n"
            )


def read_histogram_csv(path):
    """Parse a histogram file back into (left, right, counts, ref_masses)."""
    rows = []
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if not line or line.startswith("#") or line.startswith("bin_left"):
                continue
            a, b, c, q = line.split(",")
            rows.append((float(a), float(b), int(c), float(q)))
    if not rows:
        raise ValueError(f"no histogram rows in {path}")
    cols = list(zip(*rows))
    return (np.array(cols[0]), np.array(cols[1]),
            np.array(cols[2], dtype=np.int64), np.array(cols[3]))
