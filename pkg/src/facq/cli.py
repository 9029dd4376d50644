"""Command-line entry point: dataset generation, training, simulation,
reports, and the session service, driven by one JSON config."""

from __future__ import annotations

import csv
import json
import sys
from pathlib import Path

import click
import numpy as np

from . import data as data_mod
from . import nn
from .data import (CostSchedule, Dataset, SplitSpec, fit_normalization,
                   generate_synthesized, load_csv, normalize, split)
from .evaluate import (acquisition_order_matrix, beta_sweep, compare_policies,
                       simulate)
from .model import (ArchitectureSpec, CorruptionConfig, TrainConfig,
                    TrainingDiverged, dataset_fingerprint, load_bundle,
                    save_bundle, train_autoencoder, train_predictor)
from .acquire import StoppingRule
from .baselines import make_policy, static_mi_order
from . import report as report_mod

EXIT_CONFIG = 2
EXIT_DIVERGED = 3
EXIT_IO = 4


class ConfigError(ValueError):
    pass


DEFAULT_CONFIG = {
    "dataset": {"kind": "synthesized", "seed": 0},
    "architecture": {"encoder": None, "predictor": [8, 4], "bits": 8},
    "corruption": {"alpha": 1.5, "beta": 1.5, "seed": 0},
    "optimizer": {"learning_rate": 0.001, "beta1": 0.9, "beta2": 0.999,
                  "epsilon": 1e-8},
    "training": {"batch_size": 128, "max_epochs": 200, "patience": 10},
    "split": {"test_fraction": 0.15, "validation_fraction": 0.15, "seed": 0},
    "policies": ["fact", "random", "static"],
    "stopping": {"kind": "exhaustion", "threshold": None},
    "seeds": [0],
    "seed": 0,
    "out_dir": "out",
}


def _deep_update(base: dict, new: dict) -> dict:
    out = dict(base)
    for k, v in new.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _deep_update(out[k], v)
        else:
            out[k] = v
    return out


def load_config(path: str | None, overrides: tuple[str, ...],
                seed: int | None, out: str | None) -> dict:
    cfg = dict(DEFAULT_CONFIG)
    if path:
        p = Path(path)
        if not p.exists():
            raise ConfigError(f"config file not found: {p}")
        try:
            cfg = _deep_update(cfg, json.loads(p.read_text()))
        except json.JSONDecodeError as e:
            raise ConfigError(f"invalid JSON config: {e}") from e
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, _, raw = item.partition("=")
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        node = cfg
        parts = key.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
        node[parts[-1]] = value
    if seed is not None:
        cfg["seed"] = seed
    if out is not None:
        cfg["out_dir"] = out
    return cfg


def _load_dataset(cfg: dict) -> tuple[Dataset, CostSchedule]:
    ds_cfg = cfg["dataset"]
    kind = ds_cfg.get("kind", "synthesized")
    if kind == "synthesized":
        return generate_synthesized(
            ds_cfg.get("seed", cfg["seed"]),
            ds_cfg.get("n_clusters", 16),
            ds_cfg.get("informative_dim", 32),
            ds_cfg.get("noise_dim", 32),
            ds_cfg.get("points_per_cluster", 1000),
            ds_cfg.get("n_classes", 2))
    if kind == "csv":
        for key in ("path", "target"):
            if key not in ds_cfg:
                raise ConfigError(f"dataset.{key} is required for kind=csv")
        return load_csv(ds_cfg["path"], ds_cfg["target"],
                        ds_cfg.get("manifest"))
    raise ConfigError(f"unknown dataset kind {kind!r}")


def _prepare(cfg: dict):
    """Dataset -> split -> normalize on train; returns everything training
    and simulation need."""
    ds, costs = _load_dataset(cfg)
    bits = cfg["architecture"].get("bits", 8)
    sp = cfg["split"]
    train, val, test = split(ds, SplitSpec(sp["test_fraction"],
                                           sp["validation_fraction"],
                                           sp.get("seed", cfg["seed"])))
    norm = fit_normalization(train, bits=bits)
    train, val, test = (normalize(s, norm) for s in (train, val, test))

    arch_cfg = cfg["architecture"]
    encoder = arch_cfg.get("encoder") or [ds.d * bits, 16, 10]
    if encoder[0] != ds.d * bits:
        raise ConfigError(
            f"encoder input width {encoder[0]} != d*bits = {ds.d * bits}")
    arch = ArchitectureSpec(encoder, arch_cfg.get("predictor", [8, 4]),
                            bits, ds.n_classes)
    corr = CorruptionConfig(**cfg["corruption"])
    opt = nn.OptimizerConfig(**cfg["optimizer"])
    tc = TrainConfig(**cfg["training"])
    return ds, costs, train, val, test, norm, arch, corr, opt, tc


def _stopping(cfg: dict) -> StoppingRule:
    s = cfg["stopping"]
    return StoppingRule(s.get("kind", "exhaustion"), s.get("threshold"))


def _policies(cfg: dict, bundle, train):
    return [make_policy(name, bundle, train, cfg["seed"])
            for name in cfg["policies"]]


@click.group()
def main():
    """Cost-aware test-time feature acquisition toolkit."""


CONFIG_OPTS = [
    click.option("--config", "config_path", type=str, default=None,
                 help="JSON config file."),
    click.option("--set", "overrides", multiple=True,
                 help="Override a config key, e.g. --set corruption.alpha=3.5"),
    click.option("--seed", type=int, default=None),
    click.option("--out", type=str, default=None, help="Output directory."),
]


def config_options(fn):
    for opt in reversed(CONFIG_OPTS):
        fn = opt(fn)
    return fn


def _run(fn, *args):
    try:
        fn(*args)
    except (ConfigError, data_mod.DataError, ValueError) as e:
        click.echo(f"config error: {e}", err=True)
        sys.exit(EXIT_CONFIG)
    except TrainingDiverged as e:
        click.echo(f"training diverged: {e}", err=True)
        sys.exit(EXIT_DIVERGED)
    except OSError as e:
        click.echo(f"I/O error: {e}", err=True)
        sys.exit(EXIT_IO)


@main.command("gen-synth")
@config_options
def cmd_gen_synth(config_path, overrides, seed, out):
    """Write the synthesized dataset CSV and its cost manifest."""
    cfg = load_config(config_path, overrides, seed, out)

    def go():
        ds, costs = _load_dataset(cfg)
        out_dir = Path(cfg["out_dir"])
        out_dir.mkdir(parents=True, exist_ok=True)
        csv_path = out_dir / "synthesized.csv"
        with csv_path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(ds.feature_names + ["label"])
            for row, y in zip(ds.features, ds.targets):
                w.writerow([repr(float(v)) for v in row] + [int(y)])
        (out_dir / "costs.json").write_text(
            json.dumps(costs.to_dict(ds.feature_names), indent=2))
        click.echo(f"wrote {csv_path} ({ds.n} rows, {ds.d} features)")

    _run(go)


@main.command("train")
@config_options
def cmd_train(config_path, overrides, seed, out):
    """Train the autoencoder then the predictor; write a bundle checkpoint."""
    cfg = load_config(config_path, overrides, seed, out)

    def go():
        ds, costs, train, val, test, norm, arch, corr, opt, tc = _prepare(cfg)
        out_dir = Path(cfg["out_dir"])
        out_dir.mkdir(parents=True, exist_ok=True)
        ae_log, pred_log = [], []
        ae = train_autoencoder(train, val, arch, corr, opt, tc,
                               cfg["seed"], ae_log)
        bundle = train_predictor(ae, train, val, arch, corr, opt, tc,
                                 cfg["seed"], pred_log, norm, costs,
                                 ds.feature_names, dataset_fingerprint(ds))
        save_bundle(bundle, out_dir / "bundle")
        with (out_dir / "training_log.csv").open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["phase", "epoch", "train_loss", "val_metric",
                        "best_val_metric"])
            for phase, log in (("autoencoder", ae_log), ("predictor", pred_log)):
                for row in log:
                    w.writerow([phase, row["epoch"], f"{row['train_loss']:.6g}",
                                f"{row['val_metric']:.6g}",
                                f"{row['best_val_metric']:.6g}"])
        acc = float((bundle.predict(test.features, np.ones_like(test.features))
                     .argmax(axis=1) == test.targets).mean())
        click.echo(f"bundle written to {out_dir / 'bundle'}; "
                   f"full-feature test accuracy {acc:.4f}")

    _run(go)


@main.command("simulate")
@click.option("--bundle", "bundle_path", required=True, type=str)
@config_options
def cmd_simulate(bundle_path, config_path, overrides, seed, out):
    """Run the policy comparison and write curves, summary, and figures."""
    cfg = load_config(config_path, overrides, seed, out)

    def go():
        if not Path(bundle_path).exists():
            raise OSError(f"bundle not found: {bundle_path}")
        bundle = load_bundle(bundle_path)
        _, _, train, _, test, _, _, _, _, _ = _prepare(cfg)
        out_dir = Path(cfg["out_dir"])
        out_dir.mkdir(parents=True, exist_ok=True)
        policies = _policies(cfg, bundle, train)
        reports = compare_policies(bundle, test, policies,
                                   cfg.get("seeds", [cfg["seed"]]),
                                   _stopping(cfg))
        for rep in reports:
            report_mod.write_curve_csv(rep, out_dir / f"curve_{rep.policy}.csv")
        report_mod.write_summary_json(reports, out_dir / "summary.json")
        report_mod.plot_cost_curves(reports, out_dir / "curves.png")
        if "static" in cfg["policies"]:
            report_mod.write_static_order_csv(
                static_mi_order(train, bundle.costs),
                out_dir / "static_order.csv")
        for rep in reports:
            click.echo(f"{rep.policy}: AUACC={rep.auacc:.4f} "
                       f"max_acc={rep.max_accuracy:.4f}")

    _run(go)


@main.command("order-matrix")
@click.option("--bundle", "bundle_path", required=True, type=str)
@click.option("--policy", "policy_name", default="fact")
@click.option("--samples", default=50, type=int)
@config_options
def cmd_order_matrix(bundle_path, policy_name, samples, config_path,
                     overrides, seed, out):
    """Acquisition-rank matrix over a sample of test instances."""
    cfg = load_config(config_path, overrides, seed, out)

    def go():
        if not Path(bundle_path).exists():
            raise OSError(f"bundle not found: {bundle_path}")
        bundle = load_bundle(bundle_path)
        _, _, train, _, test, _, _, _, _, _ = _prepare(cfg)
        out_dir = Path(cfg["out_dir"])
        out_dir.mkdir(parents=True, exist_ok=True)
        policy = make_policy(policy_name, bundle, train, cfg["seed"])
        matrix = acquisition_order_matrix(bundle, test, policy, samples,
                                          _stopping(cfg), cfg["seed"])
        report_mod.write_order_matrix_csv(matrix, bundle.feature_names,
                                          out_dir / "order_matrix.csv")
        report_mod.plot_order_matrix(matrix, out_dir / "order_matrix.png")
        click.echo(f"wrote order matrix for {matrix.shape[0]} instances")

    _run(go)


@main.command("beta-sweep")
@click.option("--alphas", default="1.5,3.5,5.5",
              help="Comma-separated alpha values.")
@click.option("--betas", default="1.5", help="Comma-separated beta values.")
@config_options
def cmd_beta_sweep(alphas, betas, config_path, overrides, seed, out):
    """Retrain per corruption-parameter pair and report AUACC spread."""
    cfg = load_config(config_path, overrides, seed, out)

    def go():
        ds, costs, train, val, test, norm, arch, corr, opt, tc = _prepare(cfg)
        pairs = [(a, b) for a in map(float, alphas.split(","))
                 for b in map(float, betas.split(","))]
        rows = beta_sweep(train, val, test, arch, pairs, opt, tc,
                          cfg["seed"], costs, base_corruption_seed=corr.seed)
        out_dir = Path(cfg["out_dir"])
        out_dir.mkdir(parents=True, exist_ok=True)
        report_mod.write_beta_sweep_csv(rows, out_dir / "beta_sweep.csv")
        report_mod.plot_beta_sweep(rows, out_dir / "beta_sweep.png")
        vals = [r["auacc"] for r in rows]
        click.echo(f"AUACC spread: {max(vals) - min(vals):.4f}")

    _run(go)


@main.command("serve")
@click.option("--bundle", "bundle_path", required=True, type=str)
@click.option("--port", default=8000, type=int)
@click.option("--host", default="127.0.0.1")
@click.option("--static-dir", default=None,
              help="Directory of console assets to serve at /.")
@config_options
def cmd_serve(bundle_path, port, host, static_dir, config_path, overrides,
              seed, out):
    """Serve the interactive acquisition session API."""

    def go():
        import uvicorn
        from .service import create_app
        if not Path(bundle_path).exists():
            raise OSError(f"bundle not found: {bundle_path}")
        bundle = load_bundle(bundle_path)
        app = create_app(bundle, static_dir=static_dir)
        uvicorn.run(app, host=host, port=port)

    _run(go)


if __name__ == "__main__":
    main()
