"""Langevin samplers over Moreau-smoothed potentials.

One ULA step works on the t-smoothed target U^t = F + M_G^t; the baseline
sampler keeps t fixed, the annealed sampler walks t down a geometric
schedule, handing the ensemble from each level to the next.
"""

import math
from dataclasses import dataclass

import numpy as np

from .potentials import TV_CHAIN, TV_IMAGE, ModelSpec
from .prox import batch_prox

__all__ = [
    "AnnealSchedule",
    "ChainEnsemble",
    "MetricsLog",
    "DivergenceError",
    "lipschitz_F",
    "step_size_rule",
    "make_schedule",
    "noise",
    "init_states",
    "ula_step",
    "run_myula",
    "run_daz",
]


@dataclass(frozen=True)
class AnnealSchedule:
    ts: np.ndarray
    taus: np.ndarray
    K: int = 1

    def __post_init__(self):
        ts = np.asarray(self.ts, dtype=float)
        taus = np.asarray(self.taus, dtype=float)
        object.__setattr__(self, "ts", ts)
        object.__setattr__(self, "taus", taus)
        if ts.ndim != 1 or ts.size == 0:
            raise ValueError("ts must be a nonempty vector")
        if np.any(ts <= 0):
            raise ValueError("ts must be positive")
        if ts.size > 1 and np.any(np.diff(ts) >= 0):
            raise ValueError("ts must be strictly decreasing")
        if taus.shape != ts.shape or np.any(taus <= 0):
            raise ValueError("taus must be positive and pair with ts")
        if self.K < 1:
            raise ValueError("K must be a positive integer")


@dataclass
class ChainEnsemble:
    states: np.ndarray
    rng_seed: int
    iteration: int = 0


class MetricsLog:
    """Checkpoint records (iteration, t, tau, tv_error)."""

    def __init__(self):
        self.records = []

    def append(self, iteration, t, tau, tv_error):
        iteration = int(iteration)
        tv_error = float(tv_error)
        if self.records and iteration <= self.records[-1][0]:
            raise ValueError("iterations must be strictly increasing")
        if not math.isnan(tv_error) and not 0.0 <= tv_error <= 1.0:
            raise ValueError("tv_error must lie in [0, 1]")
        self.records.append((iteration, float(t), float(tau), tv_error))

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)


class DivergenceError(RuntimeError):
    def __init__(self, message, chain, iteration=None, level=None):
        super().__init__(message)
        self.chain = chain
        self.iteration = iteration
        self.level = level


def lipschitz_F(model: ModelSpec) -> float:
    """Gradient Lipschitz constant of the smooth part (0 when F vanishes)."""
    if model.kind in (TV_CHAIN, TV_IMAGE):
        return 1.0 / model.sigma**2
    return 0.0


def step_size_rule(t, model: ModelSpec, c=1.0) -> float:
    """tau = c/(L_F + 1/t); reduces to c*t when F vanishes."""
    if t <= 0:
        raise ValueError("t must be positive")
    if not 0.0 < c < 2.0:
        raise ValueError("c must lie in (0, 2)")
    return c / (lipschitz_F(model) + 1.0 / t)


def make_schedule(t_min, t_max, N, model: ModelSpec, c=1.0, K=1) -> AnnealSchedule:
    """Descending geometric ts from t_max to t_min with paired step sizes."""
    if not 0.0 < t_min < t_max:
        raise ValueError("need 0 < t_min < t_max")
    if N < 1:
        raise ValueError("N must be a positive integer")
    if N == 1:
        ts = np.array([float(t_min)])
    else:
        ts = np.geomspace(t_max, t_min, N)
    taus = np.array([step_size_rule(t, model, c) for t in ts])
    return AnnealSchedule(ts=ts, taus=taus, K=K)


def noise(seed, step, shape):
    """Counter-based standard normals: one block per global step, rows are
    chains, so draws never depend on execution order or worker count."""
    bg = np.random.Philox(key=seed, counter=[0, 0, 0, step])
    return np.random.Generator(bg).standard_normal(shape)


def init_states(model: ModelSpec, n_chains, seed):
    """Standard-normal start, centered at the data for the TV models."""
    if n_chains < 1:
        raise ValueError("n_chains must be positive")
    z = noise(seed, 0, (int(n_chains), model.dim))
    if model.kind in (TV_CHAIN, TV_IMAGE):
        return z + model.y[None, :]
    return z


def _grad_F_rows(model: ModelSpec, X):
    if model.kind in (TV_CHAIN, TV_IMAGE):
        return (X - model.y[None, :]) / model.sigma**2
    return np.zeros_like(X)


def ula_step(model: ModelSpec, x, t, tau, z, workers=1):
    """x - tau grad F(x) - (tau/t)(x - prox_{tG}(x)) + sqrt(2 tau) z.

    Accepts a single state vector or a (n_chains, d) batch with matching z.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    if tau <= 0:
        raise ValueError("tau must be positive")
    X = np.asarray(x, dtype=float)
    Z = np.asarray(z, dtype=float)
    single = X.ndim == 1
    if single:
        X = X[None, :]
        Z = Z[None, :]
    P = batch_prox(model, X, t, workers=workers)
    out = X - tau * _grad_F_rows(model, X) - (tau / t) * (X - P)
    out += np.sqrt(2.0 * tau) * Z
    finite = np.isfinite(out).all(axis=1)
    if not finite.all():
        bad = int(np.argmin(finite))
        raise DivergenceError(f"chain {bad} diverged (non-finite state)", chain=bad)
    return out[0] if single else out


def _cadence(n):
    return max(1, math.ceil(n / 200))


def run_myula(model: ModelSpec, t_fixed, tau, n_iters, n_chains, seed,
              eval_hook=None, workers=1):
    """ULA at one fixed envelope parameter for n_iters steps."""
    if t_fixed <= 0 or tau <= 0:
        raise ValueError("t_fixed and tau must be positive")
    if n_iters < 0:
        raise ValueError("n_iters must be nonnegative")
    X = init_states(model, n_chains, seed)
    log = MetricsLog()
    cad = _cadence(n_iters)
    for it in range(1, n_iters + 1):
        Z = noise(seed, it, X.shape)
        try:
            X = ula_step(model, X, t_fixed, tau, Z, workers=workers)
        except DivergenceError as e:
            raise DivergenceError(
                f"{e} at iteration {it}", chain=e.chain, iteration=it
            ) from None
        if eval_hook is not None and (it % cad == 0 or it == n_iters):
            log.append(it, t_fixed, tau, eval_hook(X))
    return ChainEnsemble(states=X, rng_seed=seed, iteration=n_iters), log


def run_daz(model: ModelSpec, schedule: AnnealSchedule, n_chains, seed,
            eval_hook=None, workers=1):
    """Annealed run: K ULA steps per level, states carried between levels."""
    X = init_states(model, n_chains, seed)
    log = MetricsLog()
    N = schedule.ts.size
    cad = _cadence(N)
    it = 0
    for n in range(N):
        t = float(schedule.ts[n])
        tau = float(schedule.taus[n])
        for _ in range(schedule.K):
            it += 1
            Z = noise(seed, it, X.shape)
            try:
                X = ula_step(model, X, t, tau, Z, workers=workers)
            except DivergenceError as e:
                raise DivergenceError(
                    f"{e} at level {n + 1} (t={t:g}), iteration {it}",
                    chain=e.chain,
                    iteration=it,
                    level=n + 1,
                ) from None
        if eval_hook is not None and ((n + 1) % cad == 0 or n + 1 == N):
            log.append(it, t, tau, eval_hook(X))
    return ChainEnsemble(states=X, rng_seed=seed, iteration=it), log
