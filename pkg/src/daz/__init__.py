"""Annealed Langevin sampling through Moreau envelopes.

Samples Gibbs distributions pi ~ exp(-F-G) by walking a geometric schedule
of envelope parameters t from coarse to fine, with exact prox solvers, a
fixed-parameter baseline, belief-propagation ground truth for the chain
model, and total-variation evaluation utilities.
"""

__version__ = "0.1.0"

from .bp import MarginalTable, chain_bp_marginals, empirical_marginal_table
from .evaluation import (
    Histogram1D,
    histogram_1d,
    marginal_tv,
    mode_mass,
    reference_masses,
    tv_binned,
    tv_distance_1d,
)
from .moreau import (
    EnvelopeEval,
    diffusion_potential_1d,
    envelope,
    envelope_value_1d,
    hj_residual,
    perturbed_density_1d,
)
from .potentials import (
    ModelSpec,
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
from .prox import (
    ProxConvergenceError,
    ProxResult,
    batch_prox,
    detect_uniqueness_threshold,
    prox_abs,
    prox_dispatch,
    prox_numeric_1d,
    prox_tv_chain,
    prox_tv_chain_batch,
    prox_tv_image,
    prox_tv_image_batch,
)
from .samplers import (
    AnnealSchedule,
    ChainEnsemble,
    DivergenceError,
    MetricsLog,
    init_states,
    make_schedule,
    noise,
    run_daz,
    run_myula,
    step_size_rule,
    ula_step,
)

__all__ = [
    "__version__",
    "ModelSpec", "laplace", "gaussian_mixture", "tv_chain", "tv_image",
    "eval_F", "grad_F", "eval_G", "subgradient_bound", "density_1d",
    "ProxResult", "ProxConvergenceError", "prox_abs", "prox_tv_chain",
    "prox_tv_chain_batch", "prox_tv_image", "prox_tv_image_batch",
    "prox_numeric_1d", "prox_dispatch", "batch_prox",
    "detect_uniqueness_threshold",
    "EnvelopeEval", "envelope", "hj_residual", "envelope_value_1d",
    "perturbed_density_1d", "diffusion_potential_1d",
    "AnnealSchedule", "ChainEnsemble", "MetricsLog", "DivergenceError",
    "make_schedule", "step_size_rule", "noise", "init_states", "ula_step",
    "run_myula", "run_daz",
    "Histogram1D", "histogram_1d", "reference_masses", "tv_binned",
    "tv_distance_1d", "marginal_tv", "mode_mass",
    "MarginalTable", "chain_bp_marginals", "empirical_marginal_table",
]
