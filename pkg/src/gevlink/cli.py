"""Command-line interface.

Subcommands: ``simulate``, ``fit``, ``compare``, ``ace``, ``predict``,
``check``.  Every run resolves a single JSON config (flags override
fields), executes one command, and writes ``report.json`` plus CSV
tables into the output directory.  Reports embed the resolved config
and seed, so identical configs reproduce byte-identical reports except
for the isolated ``generated_at`` field.  Failures exit nonzero with a
single JSON error line on stderr carrying a module-qualified code.
"""

from __future__ import annotations

import argparse
import copy
import datetime
import json
import os
import sys
import traceback

import numpy as np
import pandas as pd

from .compare import evaluate_model, holdout_split, posterior_predictive_deviance
from .diagnostics import binned_fit_table, separation_check
from .effects import CovariateChange, average_covariate_effect
from .links import LINK_KINDS, Link
from .model import (
    BinaryRegressionModel,
    ColumnTransform,
    Dataset,
    FlatBetaUniformXiPrior,
    JeffreysPrior,
    NormalPrior,
)
from .links import inv_link
from .sampler import (
    McmcConfig,
    chain_diagnostics,
    chain_to_csv,
    hpd_interval,
    posterior_mean,
    run_mh,
)
from .simdata import PRESETS, preset_dataset

DEFAULT_CONFIG = {
    "input": None,
    "preset": None,
    "n": 1000,
    "response": "y",
    "flip_response": False,
    "covariates": [],
    "links": ["logit"],
    "prior": {"type": "normal", "beta_variance": 1e4, "xi_variance": 1e4},
    "mcmc": {
        "n_iterations": 25000,
        "burn_in": 5000,
        "thin": 1,
        "n_chains": 1,
        "proposal_scales": "auto",
        "adapt_window": 50,
        "target_acceptance": 0.234,
    },
    "holdout_fraction": None,
    "changes": [],
    "bin_column": None,
    "bin_edges": None,
    "seed": 0,
    "out": ".",
}

_PRIOR_KEYS = {"type", "beta_variance", "xi_variance", "xi_low", "xi_high"}


# ---------------------------------------------------------------------------
# config resolution


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gevlink",
        description="Bayesian binary regression with logit, probit, cloglog, "
        "and generalized-extreme-value links.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "simulate": "write a synthetic dataset from a built-in scenario",
        "fit": "run MCMC for each requested link and export chains",
        "compare": "fit links and tabulate DIC/BIC/marginal-likelihood criteria",
        "ace": "average covariate effects for configured changes",
        "predict": "per-row success probabilities at the posterior mean",
        "check": "separation / overlap diagnostics for the design",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", help="path to a JSON config file")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--out", help="override the output directory")
        p.add_argument("--preset", choices=sorted(PRESETS), help="built-in data scenario")
        p.add_argument("--n", type=int, help="number of rows when using a preset")
        p.add_argument("--input", help="input CSV path")
        p.add_argument("--links", help="comma-separated list of links to fit")
        p.add_argument(
            "--holdout-fraction", type=float, dest="holdout_fraction",
            help="fraction of rows held out for predictive deviance",
        )
    return parser


def resolve_config(config_path=None, overrides=None) -> dict:
    """Merge defaults, an optional JSON config file, and flag overrides."""
    config = copy.deepcopy(DEFAULT_CONFIG)
    if config_path:
        with open(config_path, encoding="utf-8") as fh:
            user = json.load(fh)
        if not isinstance(user, dict):
            raise ValueError("config file must hold a JSON object")
        unknown = sorted(set(user) - set(DEFAULT_CONFIG))
        if unknown:
            raise ValueError(f"unknown config fields {unknown}")
        for key, value in user.items():
            if key in ("prior", "mcmc") and isinstance(value, dict):
                allowed = _PRIOR_KEYS if key == "prior" else set(DEFAULT_CONFIG["mcmc"])
                bad = sorted(set(value) - allowed)
                if bad:
                    raise ValueError(f"unknown {key} config fields {bad}")
                config[key].update(copy.deepcopy(value))
            else:
                config[key] = copy.deepcopy(value)
    for key, value in (overrides or {}).items():
        if value is not None:
            config[key] = value
    return config


def _overrides_from_args(args) -> dict:
    overrides = {}
    for key in ("seed", "out", "preset", "n", "input", "holdout_fraction"):
        overrides[key] = getattr(args, key, None)
    if getattr(args, "links", None):
        overrides["links"] = [s.strip() for s in args.links.split(",") if s.strip()]
    return overrides


# ---------------------------------------------------------------------------
# data ingestion


def ingest(config: dict) -> Dataset:
    """Load the configured CSV and build a model-ready design.

    Applies per-covariate log transforms and sample-mean/SD
    standardization, dummy-encodes categoricals against their reference
    level, prepends an intercept, and records the standardization
    metadata needed later for original-unit covariate changes.

    Raises
    ------
    ValueError
        On missing columns or values, non-numeric data, nonpositive
        values under a log flag, constant columns under standardize,
        or a response that is not 0/1 after the optional flip.
    """
    path = config.get("input")
    if not path:
        raise ValueError("no input CSV configured")
    df = pd.read_csv(path)
    response = config["response"]
    specs = config.get("covariates") or []
    needed = [response] + [spec["name"] for spec in specs]
    absent = [c for c in needed if c not in df.columns]
    if absent:
        raise ValueError(f"input is missing columns {absent}")
    na_rows = np.flatnonzero(df[needed].isna().any(axis=1).to_numpy())
    if na_rows.size:
        shown = ", ".join(map(str, na_rows[:20]))
        extra = "" if na_rows.size <= 20 else f" (+{na_rows.size - 20} more)"
        raise ValueError(f"missing values in rows {shown}{extra}")

    y = pd.to_numeric(df[response], errors="coerce").to_numpy(dtype=float)
    if np.isnan(y).any():
        raise ValueError(f"response column {response!r} is not numeric")
    if config.get("flip_response"):
        y = 1.0 - y
    if not np.all((y == 0.0) | (y == 1.0)):
        raise ValueError("response must contain only 0 and 1 after the optional flip")

    n = df.shape[0]
    cols = [np.ones(n)]
    names = ["intercept"]
    kinds = ["intercept"]
    standardization = {}
    for spec in specs:
        name = spec["name"]
        role = spec.get("role", "continuous")
        if role == "continuous":
            vals = pd.to_numeric(df[name], errors="coerce").to_numpy(dtype=float)
            if np.isnan(vals).any():
                raise ValueError(f"column {name!r} is not numeric")
            log_applied = bool(spec.get("log", False))
            if log_applied:
                bad = np.flatnonzero(vals <= 0.0)
                if bad.size:
                    shown = ", ".join(map(str, bad[:20]))
                    raise ValueError(
                        f"log requested for column {name!r} but rows {shown} are not positive"
                    )
                vals = np.log(vals)
            center, scale = 0.0, 1.0
            if spec.get("standardize", False):
                center = float(vals.mean())
                scale = float(vals.std(ddof=1)) if n > 1 else 0.0
                if not np.isfinite(scale) or scale == 0.0:
                    raise ValueError(f"cannot standardize constant column {name!r}")
                vals = (vals - center) / scale
            if log_applied or spec.get("standardize", False):
                standardization[name] = ColumnTransform(log_applied, center, scale)
            cols.append(vals)
            names.append(name)
            kinds.append("continuous")
        elif role == "dummy":
            vals = pd.to_numeric(df[name], errors="coerce").to_numpy(dtype=float)
            if np.isnan(vals).any() or not np.all((vals == 0.0) | (vals == 1.0)):
                raise ValueError(f"dummy column {name!r} must contain only 0 and 1")
            cols.append(vals)
            names.append(name)
            kinds.append("dummy")
        elif role == "categorical":
            levels = sorted({str(v) for v in df[name]})
            reference = spec.get("reference")
            reference = levels[0] if reference is None else str(reference)
            if reference not in levels:
                raise ValueError(
                    f"reference level {reference!r} not found in column {name!r}"
                )
            # record the resolved reference so the embedded config is complete
            spec["reference"] = reference
            as_str = df[name].astype(str).to_numpy()
            for level in levels:
                if level == reference:
                    continue
                cols.append((as_str == level).astype(float))
                names.append(f"{name}_{level}")
                kinds.append("dummy")
        else:
            raise ValueError(f"unknown covariate role {role!r}")
    X = np.column_stack(cols)
    return Dataset(y, X, tuple(names), tuple(kinds), standardization=standardization)


def load_dataset(config: dict) -> Dataset:
    """Build the dataset from the configured source (preset or CSV)."""
    if config.get("preset"):
        return preset_dataset(config["preset"], int(config["n"]), int(config["seed"]))
    if config.get("input"):
        return ingest(config)
    raise ValueError("config needs either an input CSV or a preset")


def export_dataset(data: Dataset, path) -> None:
    """Write a dataset to CSV: response first, then non-intercept columns."""
    frame = {"y": data.y}
    for j, name in enumerate(data.column_names):
        if data.column_kinds[j] != "intercept":
            frame[name] = data.X[:, j]
    _write_text(path, pd.DataFrame(frame).to_csv(index=False))


# ---------------------------------------------------------------------------
# model construction


def _build_prior(config):
    spec = config.get("prior") or {}
    kind = spec.get("type", "normal")
    if kind == "normal":
        return NormalPrior(
            beta_variances=float(spec.get("beta_variance", 1e4)),
            xi_variance=float(spec.get("xi_variance", 1e4)),
        )
    if kind == "flat":
        return FlatBetaUniformXiPrior(
            xi_low=float(spec.get("xi_low", -1.0)), xi_high=float(spec.get("xi_high", 1.0))
        )
    if kind == "jeffreys":
        return JeffreysPrior(xi_prior_variance=float(spec.get("xi_variance", 1e4)))
    raise ValueError(f"unknown prior type {kind!r}")


def _build_mcmc(config) -> McmcConfig:
    m = config["mcmc"]
    scales = m.get("proposal_scales", "auto")
    if isinstance(scales, (list, tuple)):
        scales = tuple(float(s) for s in scales)
    return McmcConfig(
        n_iterations=int(m["n_iterations"]),
        burn_in=int(m["burn_in"]),
        thin=int(m["thin"]),
        seed=int(config["seed"]),
        n_chains=int(m["n_chains"]),
        proposal_scales=scales,
        adapt_window=int(m["adapt_window"]),
        target_acceptance=float(m["target_acceptance"]),
    )


def _requested_links(config):
    links = config.get("links") or []
    if not links:
        raise ValueError("at least one link must be requested")
    for link in links:
        if link not in LINK_KINDS:
            raise ValueError(f"unknown link kind {link!r}; expected one of {LINK_KINDS}")
    return list(links)


def _fit_links(data: Dataset, config: dict) -> dict:
    prior = _build_prior(config)
    mcmc = _build_mcmc(config)
    fits = {}
    for link in _requested_links(config):
        model = BinaryRegressionModel(data, link, prior)
        fits[link] = (model, run_mh(model, mcmc))
    return fits


def _pooled_draws(chains):
    return np.vstack([c.draws for c in chains])


def _probabilities_at_mean(model, chains, data=None):
    beta, xi = model.split_params(_pooled_draws(chains).mean(axis=0))
    link = Link(model.link, xi) if model.link == "gev" else Link(model.link)
    X = (data if data is not None else model.data).X
    return inv_link(X @ beta, link)


def _fit_summary(model, chains):
    pooled = _pooled_draws(chains)
    hpd = [hpd_interval(pooled[:, j]) for j in range(pooled.shape[1])]
    per_chain = []
    for c in chains:
        d = chain_diagnostics(c)
        per_chain.append(
            {
                "acceptance_rate": d["acceptance_rate"],
                "geweke_z": d["geweke_z"],
                "ess": d["ess"],
                "degenerate": d["degenerate"],
            }
        )
    return {
        "param_names": list(model.param_names),
        "n_draws": int(pooled.shape[0]),
        "posterior_mean": pooled.mean(axis=0),
        "posterior_sd": pooled.std(axis=0, ddof=1),
        "hpd_95": [list(interval) for interval in hpd],
        "chains": per_chain,
    }


# ---------------------------------------------------------------------------
# output plumbing


def _write_text(path, text: str) -> None:
    # stage-and-replace keeps partially written files out of the output dir
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _write_table(path, rows, columns) -> None:
    _write_text(path, pd.DataFrame(rows, columns=columns).to_csv(index=False))


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if np.isfinite(value) else None
    return value


def write_report(out_dir, payload: dict) -> str:
    """Serialize a command report atomically; returns the report path.

    The timestamp is isolated to the single ``generated_at`` field so
    that everything else is reproducible byte for byte.
    """
    payload = dict(payload)
    payload["generated_at"] = datetime.datetime.now(datetime.timezone.utc).isoformat()
    path = os.path.join(out_dir, "report.json")
    _write_text(path, json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n")
    return path


def _chain_csv_paths(out_dir, link, chains):
    if len(chains) == 1:
        paths = [os.path.join(out_dir, f"chain_{link}.csv")]
    else:
        paths = [os.path.join(out_dir, f"chain_{link}_{i}.csv") for i in range(len(chains))]
    for chain, path in zip(chains, paths):
        chain_to_csv(chain, path)
    return [os.path.basename(p) for p in paths]


# ---------------------------------------------------------------------------
# commands


def simulate_command(config: dict) -> dict:
    if not config.get("preset"):
        raise ValueError("simulate requires a preset")
    data = preset_dataset(config["preset"], int(config["n"]), int(config["seed"]))
    export_dataset(data, os.path.join(config["out"], "data.csv"))
    return {
        "command": "simulate",
        "config": config,
        "rows": data.n,
        "ones_proportion": float(data.y.mean()),
        "data_csv": "data.csv",
    }


def fit_command(config: dict) -> dict:
    data = load_dataset(config)
    fits = _fit_links(data, config)
    report_fits = {}
    for link, (model, chains) in fits.items():
        summary = _fit_summary(model, chains)
        summary["chain_csv"] = _chain_csv_paths(config["out"], link, chains)
        report_fits[link] = summary
    return {"command": "fit", "config": config, "n_obs": data.n, "fits": report_fits}


def compare_command(config: dict) -> dict:
    data = load_dataset(config)
    holdout = None
    if config.get("holdout_fraction") is not None:
        data, holdout = holdout_split(data, float(config["holdout_fraction"]), int(config["seed"]))
    fits = _fit_links(data, config)
    criteria = {}
    notes = {}
    rows = []
    for link, (model, chains) in fits.items():
        marginal = not model.has_improper_prior
        if not marginal:
            notes[link] = "log_ml unavailable under an improper prior"
        report = evaluate_model(chains[0], model, holdout=holdout, marginal=marginal)
        criteria[link] = report.to_dict()
        rows.append({"link": link, **report.to_dict()})
    columns = ["link", "d_avg", "d_at_mean", "p_d", "dic", "bic", "log_ml", "log_ml_se", "d_post"]
    _write_table(os.path.join(config["out"], "criteria.csv"), rows, columns)
    return {
        "command": "compare",
        "config": config,
        "n_obs": data.n,
        "n_holdout": None if holdout is None else holdout.n,
        "criteria": criteria,
        "notes": notes,
        "table_csv": "criteria.csv",
    }


def _change_label(change: CovariateChange) -> str:
    if change.delta is None:
        return change.kind
    return f"{change.kind}({change.delta:g})"


def ace_command(config: dict) -> dict:
    links = _requested_links(config)
    if len(links) != 1:
        raise ValueError("ace requires exactly one link")
    changes = config.get("changes") or []
    if not changes:
        raise ValueError("no covariate changes configured")
    data = load_dataset(config)
    model, chains = _fit_links(data, config)[links[0]]
    rows = []
    for spec in changes:
        change = CovariateChange(
            spec["column"], spec["kind"],
            delta=None if spec.get("delta") is None else float(spec["delta"]),
        )
        estimate, mc_se = average_covariate_effect(chains[0], model, change)
        rows.append(
            {
                "variable": change.column,
                "change": _change_label(change),
                "ace": estimate,
                "mc_se": mc_se,
            }
        )
    _write_table(
        os.path.join(config["out"], "ace.csv"), rows, ["variable", "change", "ace", "mc_se"]
    )
    return {
        "command": "ace",
        "config": config,
        "link": links[0],
        "effects": rows,
        "table_csv": "ace.csv",
    }


def _binned_csv(config, link, model, chains, target):
    column = config.get("bin_column")
    if column is None:
        continuous = [
            name
            for name, kind in zip(target.column_names, target.column_kinds)
            if kind == "continuous"
        ]
        if not continuous:
            return None
        column = continuous[0]
    edges = config.get("bin_edges")
    if edges is None:
        values = target.X[:, target.column_names.index(column)]
        edges = np.unique(np.quantile(values, [0.2, 0.4, 0.6, 0.8]))
    table = binned_fit_table(chains[0], model.with_data(target), column, edges)
    path = os.path.join(config["out"], f"binned_{link}.csv")
    _write_table(path, table, ["bin", "n_obs", "observed_ones", "expected_ones"])
    return os.path.basename(path)


def predict_command(config: dict) -> dict:
    data = load_dataset(config)
    holdout = None
    if config.get("holdout_fraction") is not None:
        data, holdout = holdout_split(data, float(config["holdout_fraction"]), int(config["seed"]))
    target = holdout if holdout is not None else data
    fits = _fit_links(data, config)
    predictions = {}
    for link, (model, chains) in fits.items():
        p_hat = _probabilities_at_mean(model, chains, target)
        rows = [
            {"row": i, "y": float(target.y[i]), "p_hat": float(p_hat[i])}
            for i in range(target.n)
        ]
        path = os.path.join(config["out"], f"predictions_{link}.csv")
        _write_table(path, rows, ["row", "y", "p_hat"])
        theta = _pooled_draws(chains).mean(axis=0)
        predictions[link] = {
            "predictions_csv": os.path.basename(path),
            "binned_csv": _binned_csv(config, link, model, chains, target),
            "expected_ones": float(p_hat.sum()),
            "d_post": None
            if holdout is None
            else posterior_predictive_deviance(theta, model, holdout),
        }
    return {
        "command": "predict",
        "config": config,
        "n_fit": data.n,
        "n_predicted": target.n,
        "predictions": predictions,
    }


def check_command(config: dict) -> dict:
    data = load_dataset(config)
    report = separation_check(data)
    return {
        "command": "check",
        "config": config,
        "separation": {
            "x_star_rank": report.x_star_rank,
            "separated": report.separated,
            "certificate": None if report.certificate is None else report.certificate,
            "blocks_checked": report.blocks_checked,
        },
    }


COMMANDS = {
    "simulate": simulate_command,
    "fit": fit_command,
    "compare": compare_command,
    "ace": ace_command,
    "predict": predict_command,
    "check": check_command,
}


# ---------------------------------------------------------------------------
# entry point


def _error_line(exc: BaseException) -> str:
    package_root = os.path.dirname(os.path.abspath(__file__))
    code = "gevlink.cli"
    for frame in traceback.extract_tb(exc.__traceback__):
        if os.path.dirname(os.path.abspath(frame.filename)) == package_root:
            code = "gevlink." + os.path.splitext(os.path.basename(frame.filename))[0]
    message = " ".join(str(exc).split())
    return json.dumps({"error": {"code": code, "message": message}})


def main(argv=None) -> int:
    """Run one subcommand; returns the process exit status."""
    args = _build_parser().parse_args(argv)
    try:
        config = resolve_config(getattr(args, "config", None), _overrides_from_args(args))
        os.makedirs(config["out"], exist_ok=True)
        report = COMMANDS[args.command](config)
        write_report(config["out"], report)
    except Exception as exc:  # surfaced as a single machine-parsable line
        sys.stderr.write(_error_line(exc) + "\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
