"""Report writers: delimited curve/trajectory/order files, a JSON summary,
and matplotlib renderings of the same data."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .baselines import StaticOrder  # noqa: E402
from .evaluate import ORDER_SENTINEL, PolicyReport  # noqa: E402


def write_curve_csv(report: PolicyReport, path: str | Path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["policy", "step", "mean_cost", "accuracy",
                    "ci_low", "ci_high"])
        for s, (c, a, lo, hi) in enumerate(zip(
                report.curve.costs, report.curve.accuracies,
                report.ci_low, report.ci_high)):
            w.writerow([report.policy, s, f"{c:.6g}", f"{a:.6g}",
                        f"{lo:.6g}", f"{hi:.6g}"])


def write_summary_json(reports: list[PolicyReport], path: str | Path,
                       extra: dict | None = None) -> None:
    doc = {"policies": [r.to_dict() for r in reports]}
    if extra:
        doc.update(extra)
    Path(path).write_text(json.dumps(doc, indent=2))


def write_trajectory_csv(trajectory, path: str | Path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["step", "id", "score", "cost_so_far", "predicted_class",
                    "top_probability", "correct"])
        for p in trajectory:
            w.writerow([p.step, p.uid or "", f"{p.score:.6g}",
                        f"{p.cost:.6g}", p.predicted_class,
                        f"{p.top_probability:.6g}", int(p.correct)])


def write_static_order_csv(order: StaticOrder, path: str | Path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["rank", "id", "mi", "cost"])
        for rank, uid, mi, cost in order.rows():
            w.writerow([rank, uid, f"{mi:.6g}", f"{cost:.6g}"])


def write_order_matrix_csv(matrix: np.ndarray, feature_names: list[str],
                           path: str | Path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["instance"] + list(feature_names))
        for i, row in enumerate(matrix):
            w.writerow([i] + row.tolist())


def plot_cost_curves(reports: list[PolicyReport], path: str | Path,
                     title: str = "Accuracy vs. acquisition cost") -> None:
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for r in reports:
        ax.plot(r.curve.costs, r.curve.accuracies, label=r.policy, lw=1.6)
        if np.any(r.ci_high > r.ci_low):
            ax.fill_between(r.curve.costs, r.ci_low, r.ci_high, alpha=0.2)
    ax.set_xlabel("total acquisition cost")
    ax.set_ylabel("accuracy")
    ax.set_title(title)
    ax.legend()
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_order_matrix(matrix: np.ndarray, path: str | Path,
                      title: str = "Feature acquisition order") -> None:
    # earlier acquisitions get warmer colors; unacquired features stay blank
    shown = np.where(matrix == ORDER_SENTINEL, np.nan, matrix).astype(float)
    vmax = np.nanmax(shown) if np.isfinite(shown).any() else 1.0
    fig, ax = plt.subplots(figsize=(8, 4.5))
    im = ax.imshow(vmax - shown, aspect="auto", cmap="hot",
                   interpolation="nearest")
    ax.set_xlabel("feature index")
    ax.set_ylabel("test instance")
    ax.set_title(title)
    fig.colorbar(im, ax=ax, label="priority (warmer = earlier)")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_beta_sweep(rows: list[dict], path: str | Path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    labels = [f"a={r['alpha']}, b={r['beta']}" for r in rows]
    ax.bar(labels, [r["auacc"] for r in rows], color="#4878d0")
    ax.set_ylabel("AUACC")
    ax.set_title("Corruption-parameter robustness")
    ax.grid(axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def write_beta_sweep_csv(rows: list[dict], path: str | Path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["alpha", "beta", "auacc"])
        for r in rows:
            w.writerow([r["alpha"], r["beta"], f"{r['auacc']:.6g}"])
