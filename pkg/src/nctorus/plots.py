"""PNG figures for the CLI ``--plot`` flag (headless matplotlib)."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

# fixed metadata keeps PNG bytes stable across runs
_META = {"Software": None}


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=110, metadata=_META)
    plt.close(fig)


def verify_figure(rows, path):
    """Measured value over tolerance per row, on a log axis; bound rows drawn separately."""
    labels, ratios, colors = [], [], []
    for r in rows:
        labels.append(f"{r.suite}: {r.identity}")
        if r.value is None:
            ratios.append(np.nan)
            colors.append("black")
            continue
        if r.kind == "bound":
            # fitted orders: plot the margin below the bound as a ratio-like quantity
            ratios.append(10.0 ** (r.value - r.tolerance) if np.isfinite(r.value) else 1e-16)
        else:
            ratios.append(max(abs(r.value) / r.tolerance, 1e-18) if r.tolerance else np.nan)
        colors.append("tab:green" if r.passed else "tab:red")
    fig, ax = plt.subplots(figsize=(8, 0.28 * len(rows) + 1.2))
    y = np.arange(len(rows))
    ax.barh(y, np.nan_to_num(ratios, nan=1.0), color=colors)
    ax.axvline(1.0, color="k", lw=0.8)
    ax.set_xscale("log")
    ax.set_yticks(y)
    ax.set_yticklabels(labels, fontsize=7)
    ax.invert_yaxis()
    ax.set_xlabel("value / tolerance  (bounds: 10^(value - bound))")
    _save(fig, path)


def decay_figure(shells_in, shells_out, path, orders=None):
    """Shell maxima of the input and the output element on log-log axes."""
    fig, ax = plt.subplots(figsize=(5, 4))
    for shells, label in ((shells_in, "input"), (shells_out, "output")):
        r = np.array([s for s, _ in shells], dtype=float)
        m = np.array([v for _, v in shells], dtype=float)
        ok = (r >= 1) & (m > 0)
        if ok.any():
            text = label if not orders or orders.get(label) is None else f"{label} (slope {orders[label]:.2f})"
            ax.loglog(1 + r[ok], m[ok], "o-", ms=3, label=text)
    ax.set_xlabel("1 + shell radius")
    ax.set_ylabel("max |u_k| on shell")
    ax.legend()
    _save(fig, path)


def extension_figure(line_xi, line_vals, lattice_k, lattice_vals, samples, path):
    """Scalar part of the extension along the first axis against the table values."""
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(line_xi, line_vals, "-", lw=1, label="extension")
    ax.plot(lattice_k, lattice_vals, "o", ms=4, label="table")
    if samples:
        sx, sv = zip(*samples)
        ax.plot(sx, sv, "x", ms=6, label="samples")
    ax.set_xlabel("xi_1 (other coordinates as sampled)")
    ax.set_ylabel("Re tau(rho(xi))")
    ax.legend()
    _save(fig, path)
