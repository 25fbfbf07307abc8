"""Experiment runner.

`daz run <experiment>` builds the model and its reference (analytic density,
chain marginals, or a long fixed-parameter reference run), drives the chosen
sampler with a TV-error checkpoint hook, and writes metrics plus final-sample
artifacts.  `daz compare <dir_a> <dir_b>` joins two metrics files produced on
the same model/reference.
"""

import argparse
import hashlib
import json
import os
import sys
import time

import numpy as np

from .bp import chain_bp_marginals, empirical_marginal_table, write_marginals_csv
from .evaluation import (
    histogram_1d,
    marginal_tv,
    mode_mass,
    reference_masses,
    tv_binned,
    write_histogram_csv,
)
from .moreau import envelope_value_1d
from .potentials import (
    GAUSSIAN_MIXTURE,
    LAPLACE,
    TV_CHAIN,
    TV_IMAGE,
    density_1d,
    gaussian_mixture,
    laplace,
    tv_chain,
    tv_image,
)
from .samplers import (
    DivergenceError,
    init_states,
    make_schedule,
    noise,
    run_daz,
    run_myula,
    step_size_rule,
    ula_step,
)

__all__ = ["ConfigError", "resolve_config", "run_experiment", "compare", "main"]

EXPERIMENTS = ("laplace", "gaussian-mixture", "tv-chain", "tv-image", "custom")
SAMPLERS = ("daz", "myula")

# keys mirror the CLI flags; config files use the same spelling
FLAG_KEYS = (
    "sampler", "t-min", "t-max", "levels", "inner-steps", "step-scale",
    "chains", "seed", "bins", "labels", "out", "data",
)
REF_KEYS = ("ref-chains", "ref-iters", "ref-thin")

ENVELOPE_TS = (0.1, 0.5, 1.0, 2.0)

DATA_KEY = 20260819   # synthetic data stream, fixed across sampler seeds
REF_SEED = 909090909  # reference-run stream, fixed for the same reason


class ConfigError(ValueError):
    pass


def _defaults(experiment):
    base = {
        "sampler": "daz",
        "t-min": 0.01,
        "t-max": 10.0,
        "levels": 1000,
        "inner-steps": 1,
        "step-scale": 1.0,
        "chains": 100_000,
        "seed": 7,
        "bins": 128,
        "labels": 256,
        "out": None,
        "data": None,
        "ref-chains": 256,
        "ref-iters": 4000,
        "ref-thin": 10,
    }
    model = None
    if experiment == "laplace":
        model = {"kind": "laplace", "lam": 1.0}
    elif experiment == "gaussian-mixture":
        model = {
            "kind": "gaussian_mixture",
            "means": [-1.0, 1.0],
            "weights": [0.5, 0.5],
            "stds": [0.25, 0.25],
        }
    elif experiment == "tv-chain":
        model = {"kind": "tv_chain", "d": 100, "sigma": 0.1, "lam": 30.0}
        # the smoothing bias of pi^t is large until t*lam is well under the
        # per-site posterior scale, so the schedule must end far below the
        # baseline's equilibration knee for annealing to pay off
        base.update({"t-min": 1e-5, "t-max": 0.03, "levels": 2000,
                     "chains": 10_000})
    elif experiment == "tv-image":
        model = {"kind": "tv_image", "shape": [32, 32], "sigma": 0.05,
                 "lam": 30.0}
        # reference budget: 1000 chains x 1000 kept states = 1e6 samples
        base.update({"t-min": 1e-5, "t-max": 0.03, "levels": 2000,
                     "chains": 1000, "labels": 64, "ref-chains": 1000,
                     "ref-iters": 20_000, "ref-thin": 10})
    base["model"] = model
    return base


def _as_int(value, key):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key} must be an integer, got {value!r}")
    if isinstance(value, float) and not value.is_integer():
        raise ConfigError(f"{key} must be an integer, got {value!r}")
    return int(value)


def _as_pos_float(value, key):
    try:
        v = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{key} must be a number, got {value!r}") from None
    if not np.isfinite(v) or v <= 0:
        raise ConfigError(f"{key} must be positive, got {value!r}")
    return v


def load_config_file(path):
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    with open(path, "r", encoding="utf-8") as f:
        try:
            cfg = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError(f"config file {path} is not valid JSON: {e}") from None
    if not isinstance(cfg, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    allowed = set(FLAG_KEYS) | set(REF_KEYS) | {"model"}
    unknown = sorted(set(cfg) - allowed)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    return cfg


def resolve_config(experiment, file_cfg=None, flags=None):
    """Defaults <- config file <- flags, then validate."""
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {experiment!r}")
    cfg = _defaults(experiment)
    for src in (file_cfg or {}), (flags or {}):
        for k, v in src.items():
            if v is None:
                continue
            if k == "model":
                cfg["model"] = dict(v)
            else:
                cfg[k] = v
    if cfg["model"] is None:
        raise ConfigError("custom experiment needs a model block in --config")
    if cfg["sampler"] not in SAMPLERS:
        raise ConfigError(f"sampler must be one of {SAMPLERS}")
    cfg["t-min"] = _as_pos_float(cfg["t-min"], "t-min")
    cfg["t-max"] = _as_pos_float(cfg["t-max"], "t-max")
    if not cfg["t-min"] < cfg["t-max"]:
        raise ConfigError("need t-min < t-max")
    for k in ("levels", "inner-steps", "chains", "ref-chains", "ref-iters",
              "ref-thin"):
        cfg[k] = _as_int(cfg[k], k)
        if cfg[k] < 1:
            raise ConfigError(f"{k} must be at least 1")
    cfg["seed"] = _as_int(cfg["seed"], "seed")
    if cfg["seed"] < 0:
        raise ConfigError("seed must be nonnegative")
    for k in ("bins", "labels"):
        cfg[k] = _as_int(cfg[k], k)
        if cfg[k] < 2:
            raise ConfigError(f"{k} must be at least 2")
    cfg["step-scale"] = _as_pos_float(cfg["step-scale"], "step-scale")
    if not cfg["step-scale"] < 2.0:
        raise ConfigError("step-scale must lie in (0, 2)")
    if cfg["out"] is None:
        cfg["out"] = os.path.join("runs", f"{experiment}-{cfg['sampler']}")
    cfg["experiment"] = experiment
    return cfg


def workers_from_env():
    raw = os.environ.get("DAZ_WORKERS", "").strip()
    if not raw:
        return 1
    try:
        w = int(raw)
    except ValueError:
        raise ConfigError(f"DAZ_WORKERS must be an integer, got {raw!r}") from None
    if w < 1:
        raise ConfigError("DAZ_WORKERS must be at least 1")
    return w


# synthetic data: fixed stream so that runs with different sampler seeds
# still share the same observation y (and hence the same reference)

def synthetic_chain_data(d, sigma):
    g = np.random.Generator(np.random.Philox(key=DATA_KEY, counter=[0, 0, 1, 0]))
    n_seg = max(1, min(6, d // 2))
    cuts = np.sort(g.choice(np.arange(1, d), size=n_seg - 1, replace=False))
    vals = g.uniform(0.0, 1.0, size=n_seg)
    x = np.empty(d)
    bounds = np.concatenate(([0], cuts, [d])).astype(int)
    for k in range(n_seg):
        x[bounds[k]:bounds[k + 1]] = vals[k]
    y = x + sigma * g.standard_normal(d)
    return x, y


def synthetic_image_data(shape, sigma):
    g = np.random.Generator(np.random.Philox(key=DATA_KEY, counter=[0, 0, 2, 0]))
    N, M = shape
    x = np.zeros((N, M))
    for _ in range(3):
        top = int(g.integers(0, max(N - 2, 1)))
        left = int(g.integers(0, max(M - 2, 1)))
        h = int(g.integers(2, max(N // 2, 2) + 1))
        w = int(g.integers(2, max(M // 2, 2) + 1))
        x[top:min(top + h, N), left:min(left + w, M)] += float(g.uniform(0.2, 1.0))
    y = x + sigma * g.standard_normal((N, M))
    return x, y


def _load_array(path, want_2d):
    if not os.path.exists(path):
        raise ConfigError(f"data file not found: {path}")
    try:
        arr = np.loadtxt(path, delimiter=",", ndmin=2 if want_2d else 1)
    except ValueError as e:
        raise ConfigError(f"could not parse data file {path}: {e}") from None
    if want_2d and arr.ndim != 2:
        raise ConfigError(f"data file {path} must hold a 2D array")
    return arr


def build_model(cfg):
    """Returns (model, truth_or_None); truth only for synthetic data."""
    block = cfg["model"]
    kind = block.get("kind")
    if kind == "laplace":
        return laplace(lam=_as_pos_float(block.get("lam", 1.0), "lam")), None
    if kind == "gaussian_mixture":
        try:
            return gaussian_mixture(block["means"], block["weights"],
                                    block["stds"]), None
        except (KeyError, ValueError) as e:
            raise ConfigError(f"bad gaussian_mixture block: {e}") from None
    if kind == "tv_chain":
        sigma = _as_pos_float(block.get("sigma", 0.1), "sigma")
        lam = _as_pos_float(block.get("lam", 30.0), "lam")
        if cfg["data"]:
            y = _load_array(cfg["data"], want_2d=False).ravel()
            truth = None
        else:
            d = _as_int(block.get("d", 100), "d")
            if d < 1:
                raise ConfigError("d must be at least 1")
            truth, y = synthetic_chain_data(d, sigma)
        return tv_chain(y, lam=lam, sigma=sigma), truth
    if kind == "tv_image":
        sigma = _as_pos_float(block.get("sigma", 0.05), "sigma")
        lam = _as_pos_float(block.get("lam", 30.0), "lam")
        if cfg["data"]:
            y = _load_array(cfg["data"], want_2d=True)
            truth = None
        else:
            shape = tuple(int(v) for v in block.get("shape", (32, 32)))
            if len(shape) != 2 or min(shape) < 2:
                raise ConfigError("shape must be two integers >= 2")
            truth, y = synthetic_image_data(shape, sigma)
        return tv_image(y, lam=lam, sigma=sigma), truth
    raise ConfigError(f"unknown model kind {kind!r}")


def _data_digest(model):
    if model.y is None:
        return None
    return hashlib.sha256(np.ascontiguousarray(model.y).tobytes()).hexdigest()[:16]


def _model_block_resolved(model):
    b = {"kind": model.kind, "lam": model.lam, "sigma": model.sigma}
    if model.kind == GAUSSIAN_MIXTURE:
        b.update(means=list(model.means), weights=list(model.weights),
                 stds=list(model.stds))
    if model.y is not None:
        b.update(shape=list(model.shape), data_digest=_data_digest(model))
    return b


def _hash(obj):
    canon = json.dumps(obj, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()[:16]


def _hash_blocks(cfg, model):
    model_block = _model_block_resolved(model)
    sampler_block = {k: cfg[k] for k in ("sampler", "t-min", "t-max", "levels",
                                         "inner-steps", "step-scale", "chains",
                                         "seed")}
    eval_block = {"bins": cfg["bins"], "labels": cfg["labels"]}
    if model.kind == TV_IMAGE:
        eval_block.update({k: cfg[k] for k in REF_KEYS})
    full = _hash({"experiment": cfg["experiment"], "model": model_block,
                  "sampler": sampler_block, "evaluation": eval_block})
    compare_key = _hash({"experiment": cfg["experiment"], "model": model_block,
                         "evaluation": eval_block})
    return full, compare_key, model_block


def sigma_range(model):
    """Scale used for 1D evaluation windows."""
    if model.kind == LAPLACE:
        return 0.0, np.sqrt(2.0) / model.lam
    m1 = float(np.sum(model.weights * model.means))
    var = float(np.sum(model.weights * (model.stds**2 + model.means**2)) - m1**2)
    return m1, np.sqrt(var)


def _image_reference(model, cfg, workers):
    """Empirical marginal table from a long fixed-parameter reference run."""
    t = cfg["t-min"]
    tau = step_size_rule(t, model, cfg["step-scale"])
    n_iters = cfg["ref-iters"]
    X = init_states(model, cfg["ref-chains"], REF_SEED)
    d = model.dim
    L = cfg["labels"]
    lo = float(model.y.min() - 4.0 * model.sigma)
    hi = float(model.y.max() + 4.0 * model.sigma)
    edges = np.linspace(lo, hi, L + 1)
    counts = np.zeros((d, L), dtype=np.int64)
    kept = 0
    for it in range(1, n_iters + 1):
        X = ula_step(model, X, t, tau, noise(REF_SEED, it, X.shape),
                     workers=workers)
        if it > n_iters // 2 and it % cfg["ref-thin"] == 0:
            idx = np.clip(np.searchsorted(edges, X, side="right") - 1, 0, L - 1)
            flat = idx + np.arange(d)[None, :] * L
            counts += np.bincount(flat.ravel(), minlength=d * L).reshape(d, L)
            kept += X.shape[0]
    if kept == 0:
        raise ConfigError("reference run kept no samples; increase ref-iters")
    from .bp import MarginalTable

    table = MarginalTable(edges=edges, probs=counts / float(kept))
    meta = {"t": t, "tau": tau, "iters": n_iters, "chains": cfg["ref-chains"],
            "thin": cfg["ref-thin"], "kept_samples": kept, "seed": REF_SEED}
    return table, meta


def _fmt(v):
    return f"{float(v):.17g}"


def _write_metrics(path, log, config_hash, compare_key):
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"# config_hash={config_hash} compare_key={compare_key}\n")
        f.write("iter,t,tau,tv_error\n")
        for it, t, tau, tv in log:
            f.write(f"{it},{_fmt(t)},{_fmt(tau)},{_fmt(tv)}\n")


def _write_envelope_sweep(path, model, lo, hi, comment):
    xs = np.linspace(lo, hi, 257)
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"# {comment}\n")
        f.write("x,t,value\n")
        for t in ENVELOPE_TS:
            for x in xs:
                f.write(f"{_fmt(x)},{_fmt(t)},{_fmt(envelope_value_1d(model, x, t))}\n")


def _write_vector_csv(path, arr):
    arr = np.asarray(arr, dtype=float)
    with open(path, "w", encoding="utf-8") as f:
        if arr.ndim == 1:
            for v in arr:
                f.write(f"{_fmt(v)}\n")
        else:
            for row in arr:
                f.write(",".join(_fmt(v) for v in row) + "\n")


def run_experiment(cfg, workers=1):
    t_start = time.time()
    model, truth = build_model(cfg)
    outdir = cfg["out"]
    os.makedirs(outdir, exist_ok=True)
    config_hash, compare_key, model_block = _hash_blocks(cfg, model)

    one_d = model.kind in (LAPLACE, GAUSSIAN_MIXTURE)
    if one_d:
        dens = density_1d(model)
        center, sr = sigma_range(model)
        lo, hi = center - 6.0 * sr, center + 6.0 * sr
        q_ref = reference_masses(dens, lo, hi, cfg["bins"])

        def hook(X):
            return tv_binned(histogram_1d(X[:, 0], lo, hi, cfg["bins"]).masses,
                             q_ref)

        reference_method = "analytic-density"
        ref_meta = {"lo": lo, "hi": hi, "bins": cfg["bins"]}
    elif model.kind == TV_CHAIN:
        table = chain_bp_marginals(model, L=cfg["labels"])

        def hook(X):
            return marginal_tv(X, table)

        reference_method = "chain-bp"
        ref_meta = {"labels": cfg["labels"],
                    "lo": float(table.edges[0]), "hi": float(table.edges[-1])}
    else:
        table, ref_meta = _image_reference(model, cfg, workers)

        def hook(X):
            return marginal_tv(X, table)

        reference_method = "myula-long-run"

    if cfg["sampler"] == "daz":
        sched = make_schedule(cfg["t-min"], cfg["t-max"], cfg["levels"], model,
                              c=cfg["step-scale"], K=cfg["inner-steps"])
        ens, log = run_daz(model, sched, cfg["chains"], cfg["seed"],
                           eval_hook=hook, workers=workers)
    else:
        tau = step_size_rule(cfg["t-min"], model, cfg["step-scale"])
        n_iters = cfg["levels"] * cfg["inner-steps"]
        ens, log = run_myula(model, cfg["t-min"], tau, n_iters, cfg["chains"],
                             cfg["seed"], eval_hook=hook, workers=workers)

    comment = f"config_hash={config_hash} compare_key={compare_key}"
    _write_metrics(os.path.join(outdir, "metrics.csv"), log, config_hash,
                   compare_key)

    extra = {}
    if one_d:
        samples = ens.states[:, 0]
        hist = histogram_1d(samples, lo, hi, cfg["bins"])
        write_histogram_csv(os.path.join(outdir, "histogram.csv"), hist, q_ref,
                            comment=comment)
        _write_envelope_sweep(os.path.join(outdir, "envelope.csv"), model,
                              lo, hi, comment)
        extra["n_clipped"] = hist.clipped
        if model.kind == GAUSSIAN_MIXTURE:
            extra["mode_mass"] = mode_mass(samples, 0.0)
    else:
        write_marginals_csv(os.path.join(outdir, "marginals.csv"), table,
                            comment=comment)
        emp = empirical_marginal_table(ens.states, float(table.edges[0]),
                                       float(table.edges[-1]),
                                       table.probs.shape[1])
        write_marginals_csv(os.path.join(outdir, "empirical_marginals.csv"),
                            emp, comment=comment)
        _write_vector_csv(os.path.join(outdir, "y.csv"),
                          model.y.reshape(model.shape))
        if truth is not None:
            _write_vector_csv(os.path.join(outdir, "truth.csv"), truth)
        out_of_range = np.count_nonzero(
            (ens.states < table.edges[0]) | (ens.states > table.edges[-1]))
        extra["n_clipped"] = int(out_of_range)

    final_tv = log.records[-1][3] if len(log) else None
    run_meta = {
        "experiment": cfg["experiment"],
        "sampler": cfg["sampler"],
        "config": {k: cfg[k] for k in FLAG_KEYS + REF_KEYS},
        "model": model_block,
        "config_hash": config_hash,
        "compare_key": compare_key,
        "workers": workers,
        "reference_method": reference_method,
        "reference": ref_meta,
        "final_iteration": ens.iteration,
        "final_tv": final_tv,
        "wall_time_s": time.time() - t_start,
        **extra,
    }
    with open(os.path.join(outdir, "run.json"), "w", encoding="utf-8") as f:
        json.dump(run_meta, f, indent=2, sort_keys=True)
        f.write("\n")
    return 0


def read_metrics_csv(path):
    if not os.path.exists(path):
        raise ConfigError(f"missing metrics file: {path}")
    rows = []
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if not line or line.startswith("#") or line.startswith("iter,"):
                continue
            it, t, tau, tv = line.split(",")
            rows.append((int(it), float(t), float(tau), float(tv)))
    if not rows:
        raise ConfigError(f"metrics file {path} holds no checkpoints")
    return rows


THRESHOLDS = (0.5, 0.2, 0.1, 0.05, 0.02)


def compare(dir_a, dir_b, out=None):
    metas = []
    metrics = []
    for d in (dir_a, dir_b):
        meta_path = os.path.join(d, "run.json")
        if not os.path.exists(meta_path):
            raise ConfigError(f"missing run metadata: {meta_path}")
        with open(meta_path, "r", encoding="utf-8") as f:
            metas.append(json.load(f))
        metrics.append(read_metrics_csv(os.path.join(d, "metrics.csv")))
    key_a, key_b = (m.get("compare_key") for m in metas)
    if key_a != key_b:
        raise ConfigError(
            f"runs are not comparable: compare_key {key_a} != {key_b}"
            " (model or evaluation settings differ)"
        )
    a_by_iter = {r[0]: r[3] for r in metrics[0]}
    b_by_iter = {r[0]: r[3] for r in metrics[1]}
    common = sorted(set(a_by_iter) & set(b_by_iter))
    if not common:
        raise ConfigError("metrics files share no checkpoint iterations")
    if out is None:
        out = os.path.join(
            os.path.dirname(os.path.abspath(dir_a)) or ".",
            f"compare-{os.path.basename(os.path.normpath(dir_a))}"
            f"-vs-{os.path.basename(os.path.normpath(dir_b))}",
        )
    os.makedirs(out, exist_ok=True)
    with open(os.path.join(out, "comparison.csv"), "w", encoding="utf-8") as f:
        f.write(f"# compare_key={key_a}\n")
        f.write("iter,tv_error_a,tv_error_b,ratio\n")
        for it in common:
            a, b = a_by_iter[it], b_by_iter[it]
            if b > 0:
                ratio = a / b
            else:
                ratio = 1.0 if a == 0 else float("inf")
            f.write(f"{it},{_fmt(a)},{_fmt(b)},{_fmt(ratio)}\n")

    def first_below(by_iter, thr):
        for it in sorted(by_iter):
            if by_iter[it] < thr:
                return it
        return None

    label_a = metas[0].get("sampler", "a")
    label_b = metas[1].get("sampler", "b")
    summary = {
        "compare_key": key_a,
        "label_a": label_a,
        "label_b": label_b,
        "dir_a": dir_a,
        "dir_b": dir_b,
        "final_tv_a": a_by_iter[common[-1]],
        "final_tv_b": b_by_iter[common[-1]],
        "first_below": {
            str(thr): {"a": first_below(a_by_iter, thr),
                       "b": first_below(b_by_iter, thr)}
            for thr in THRESHOLDS
        },
    }
    with open(os.path.join(out, "summary.json"), "w", encoding="utf-8") as f:
        json.dump(summary, f, indent=2, sort_keys=True)
        f.write("\n")
    return 0


def _build_parser():
    p = argparse.ArgumentParser(
        prog="daz",
        description="Annealed Langevin sampling through Moreau envelopes",
    )
    sub = p.add_subparsers(dest="command", required=True)
    runp = sub.add_parser("run", help="run an experiment")
    runp.add_argument("experiment", choices=EXPERIMENTS)
    runp.add_argument("--sampler", choices=SAMPLERS)
    runp.add_argument("--t-min", type=float)
    runp.add_argument("--t-max", type=float)
    runp.add_argument("--levels", type=int)
    runp.add_argument("--inner-steps", type=int)
    runp.add_argument("--step-scale", type=float)
    runp.add_argument("--chains", type=int)
    runp.add_argument("--seed", type=int)
    runp.add_argument("--bins", type=int)
    runp.add_argument("--labels", type=int)
    runp.add_argument("--out")
    runp.add_argument("--config")
    runp.add_argument("--data")
    comp = sub.add_parser("compare", help="join two runs' metrics")
    comp.add_argument("dir_a")
    comp.add_argument("dir_b")
    comp.add_argument("--out")
    return p


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            file_cfg = load_config_file(args.config) if args.config else None
            flags = {
                "sampler": args.sampler,
                "t-min": args.t_min,
                "t-max": args.t_max,
                "levels": args.levels,
                "inner-steps": args.inner_steps,
                "step-scale": args.step_scale,
                "chains": args.chains,
                "seed": args.seed,
                "bins": args.bins,
                "labels": args.labels,
                "out": args.out,
                "data": args.data,
            }
            cfg = resolve_config(args.experiment, file_cfg, flags)
            return run_experiment(cfg, workers=workers_from_env())
        return compare(args.dir_a, args.dir_b, out=args.out)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except DivergenceError as e:
        print(f"divergence: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
