"""Exact marginals of the discretized TV-L2 chain.

Forward-backward message passing in the log domain with per-node
normalization; the result is exact for the discretized Gibbs distribution
on the chosen label grid.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .potentials import TV_CHAIN, ModelSpec

__all__ = [
    "MarginalTable",
    "chain_bp_marginals",
    "empirical_marginal_table",
    "write_marginals_csv",
    "read_marginals_csv",
]


@dataclass
class MarginalTable:
    edges: np.ndarray  # L+1 bin edges
    probs: np.ndarray  # d x L, rows sum to 1

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=float)
        probs = np.asarray(self.probs, dtype=float)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "probs", probs)
        if edges.ndim != 1 or edges.size < 3:
            raise ValueError("edges must hold at least 3 values")
        if np.any(np.diff(edges) <= 0):
            raise ValueError("edges must be strictly increasing")
        if probs.ndim != 2 or probs.shape[1] != edges.size - 1:
            raise ValueError("probs must be d x (len(edges)-1)")
        if np.any(probs < 0):
            raise ValueError("probabilities must be nonnegative")
        if np.max(np.abs(probs.sum(axis=1) - 1.0)) > 1e-10:
            raise ValueError("each row must sum to 1 within 1e-10")

    @property
    def midpoints(self):
        return 0.5 * (self.edges[:-1] + self.edges[1:])


def chain_bp_marginals(model: ModelSpec, L=256, lo=None, hi=None) -> MarginalTable:
    """Exact per-coordinate marginals of the chain discretized onto L cells.

    Unary potential (x_i - y_i)^2/(2 sigma^2) at cell midpoints, pairwise
    lam|x_{i+1} - x_i|; defaults cover [min(y)-4 sigma, max(y)+4 sigma].
    """
    if model.kind != TV_CHAIN:
        raise ValueError("chain marginals require a tv_chain model")
    if L < 2:
        raise ValueError("L must be at least 2")
    y = model.y
    if lo is None:
        lo = float(y.min() - 4.0 * model.sigma)
    if hi is None:
        hi = float(y.max() + 4.0 * model.sigma)
    if not lo < hi:
        raise ValueError("need lo < hi")
    d = y.size
    edges = np.linspace(lo, hi, L + 1)
    m = 0.5 * (edges[:-1] + edges[1:])
    A = -((m[None, :] - y[:, None]) ** 2) / (2.0 * model.sigma**2)
    P = -model.lam * np.abs(m[:, None] - m[None, :])
    alpha = np.empty((d, L))
    alpha[0] = A[0] - logsumexp(A[0])
    for i in range(1, d):
        msg = logsumexp(alpha[i - 1][:, None] + P, axis=0)
        alpha[i] = A[i] + msg
        alpha[i] -= logsumexp(alpha[i])
    beta = np.empty((d, L))
    beta[d - 1] = 0.0
    for i in range(d - 2, -1, -1):
        nxt = A[i + 1] + beta[i + 1]
        beta[i] = logsumexp(P + nxt[None, :], axis=1)
        beta[i] -= logsumexp(beta[i])
    logm = alpha + beta
    logm -= logsumexp(logm, axis=1)[:, None]
    return MarginalTable(edges=edges, probs=np.exp(logm))


def empirical_marginal_table(states, lo, hi, L) -> MarginalTable:
    """Per-coordinate histogram table from sample rows, on a shared grid.

    Out-of-range values are clipped into the end bins.
    """
    X = np.asarray(states, dtype=float)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("states must be a nonempty n x d matrix")
    if L < 2:
        raise ValueError("L must be at least 2")
    if not lo < hi:
        raise ValueError("need lo < hi")
    n, d = X.shape
    edges = np.linspace(lo, hi, L + 1)
    idx = np.searchsorted(edges, X, side="right") - 1
    idx = np.clip(idx, 0, L - 1)
    flat = idx + np.arange(d)[None, :] * L
    counts = np.bincount(flat.ravel(), minlength=d * L).reshape(d, L)
    return MarginalTable(edges=edges, probs=counts / float(n))


def write_marginals_csv(path, table: MarginalTable, comment=None):
    """Header row of bin midpoints, then one probability row per coordinate."""
    with open(path, "w", encoding="utf-8") as f:
        if comment:
            f.write(f"# {comment}\n")
        f.write(",".join(f"{v:.17g}" for v in table.midpoints) + "\n")
        for row in table.probs:
            f.write(",".join(f"{v:.17g}" for v in row) + "\n")


def read_marginals_csv(path):
    """Inverse of write_marginals_csv: (midpoints, probs rows)."""
    mids = None
    rows = []
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            vals = np.array([float(v) for v in line.split(",")])
            if mids is None:
                mids = vals
            else:
                rows.append(vals)
    if mids is None or not rows:
        raise ValueError(f"no marginal data in {path}")
    return mids, np.vstack(rows)
