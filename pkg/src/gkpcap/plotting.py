"""Figure rendering for the command-line reports.

Every figure function takes already-computed data plus an output path,
renders with the non-interactive Agg backend, and returns the path, so
the plots are byte-stable side effects of the CSV/JSON artifacts rather
than an independent computation.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

_BOUND_STYLES = [
    ("lower_ci", "achievable (coherent information)", "tab:green", "-"),
    ("hw", "squashed-entanglement upper", "tab:gray", ":"),
    ("dp", "loss-then-amp upper", "tab:blue", "--"),
    ("idp", "amp-then-loss upper", "tab:orange", "--"),
    ("odp", "optimized-split upper", "tab:red", "-"),
    ("gkp_rate", "grid-code rate", "tab:purple", "-."),
]


def plot_bounds(rows: list[dict], path: str | Path, title: str = "") -> Path:
    """Capacity bound curves versus transmissivity.

    ``rows`` are the CSV rows: dicts keyed by the column names, with
    missing entries (e.g. the optimized split at unbounded energy) set
    to None.
    """
    path = Path(path)
    etas = np.array([r["eta"] for r in rows], dtype=float)
    fig, ax = plt.subplots(figsize=(6.4, 4.4))
    for key, label, color, style in _BOUND_STYLES:
        vals = np.array([np.nan if r.get(key) is None else r[key] for r in rows],
                        dtype=float)
        if np.all(np.isnan(vals)):
            continue
        ax.plot(etas, vals, style, color=color, label=label, linewidth=1.4)
    ax.set_xlabel("transmissivity")
    ax.set_ylabel("rate (qubits per use)")
    finite = [v for r in rows for k in ("lower_ci", "dp", "idp", "odp")
              if (v := r.get(k)) is not None and np.isfinite(v)]
    if finite:
        ax.set_ylim(0.0, 1.05 * max(max(finite), 1e-3))
    if title:
        ax.set_title(title)
    ax.legend(fontsize=8, loc="upper left")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_wigner(qs: np.ndarray, ps: np.ndarray, W: np.ndarray,
                path: str | Path, title: str = "") -> Path:
    """Phase-space quasi-probability map with a zero-centered diverging scale."""
    path = Path(path)
    W = np.asarray(W, dtype=float)
    scale = max(np.abs(W).max(), 1e-12)
    fig, ax = plt.subplots(figsize=(5.2, 4.4))
    mesh = ax.pcolormesh(np.asarray(qs), np.asarray(ps), W.T, cmap="RdBu_r",
                         vmin=-scale, vmax=scale, shading="nearest")
    ax.set_xlabel("q")
    ax.set_ylabel("p")
    ax.set_aspect("equal")
    if title:
        ax.set_title(title)
    fig.colorbar(mesh, ax=ax, label="W(q, p)")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_logical_error(points: list[dict], path: str | Path,
                       x_key: str = "sigma2", title: str = "") -> Path:
    """Monte-Carlo logical-error estimates with binomial error bars, against
    the closed-form exponential envelope."""
    path = Path(path)
    xs = np.array([p[x_key] for p in points], dtype=float)
    est = np.array([p["estimate"] for p in points], dtype=float)
    err = np.array([p["stderr"] for p in points], dtype=float)
    env = np.exp([p["closed_form_exponent"] for p in points])
    fig, ax = plt.subplots(figsize=(5.6, 4.2))
    ax.errorbar(xs, est, yerr=err, fmt="o", ms=4, capsize=3, color="tab:blue",
                label="Monte-Carlo estimate")
    ax.plot(xs, env, "-", color="tab:red", linewidth=1.2,
            label="closed-form envelope")
    positive = est[est > 0]
    if positive.size:
        ax.set_yscale("log")
    ax.set_xlabel(x_key)
    ax.set_ylabel("logical error probability")
    if title:
        ax.set_title(title)
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3, which="both")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_optimization_trace(traces: dict[int, list[dict]], path: str | Path,
                            title: str = "") -> Path:
    """Infidelity versus iteration, one line per starting seed.

    ``traces`` maps seed -> list of {iter, phase, fidelity} dicts.
    """
    path = Path(path)
    fig, ax = plt.subplots(figsize=(5.6, 4.2))
    for seed, recs in sorted(traces.items()):
        encoder_recs = [r for r in recs if r["phase"] == "encoder"]
        its = [r["iter"] for r in encoder_recs]
        infids = [max(1.0 - r["fidelity"], 1e-12) for r in encoder_recs]
        ax.plot(its, infids, "-", linewidth=1.2, label=f"seed {seed}")
    ax.set_yscale("log")
    ax.set_xlabel("iteration")
    ax.set_ylabel("1 - entanglement fidelity")
    if title:
        ax.set_title(title)
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3, which="both")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
