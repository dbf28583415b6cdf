"""Optional figure rendering for sweep and probe outputs.

All functions write PNG files next to the delimited output; nothing is shown
interactively (the Agg backend is forced before pyplot is imported).
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def plot_sweep(rows, path):
    """rows: list of dicts with keys lambda, n_points, in_interval."""
    lams = [row["lambda"] for row in rows]
    counts = [row["n_points"] for row in rows]
    inside = [bool(row["in_interval"]) for row in rows]

    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(lams, counts, color="0.6", lw=1, zorder=1)
    for lam, cnt, ok in zip(lams, counts, inside):
        ax.scatter([lam], [cnt], color="C0" if ok else "C3", s=28, zorder=2)
    ax.scatter([], [], color="C0", s=28, label="inside interval")
    ax.scatter([], [], color="C3", s=28, label="outside interval")
    ax.set_xlabel(r"$\lambda$")
    ax.set_ylabel("certified critical points")
    ax.set_xscale("log")
    ax.legend(loc="best", frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_probe(rows, path, floor=-1e6):
    """rows: probe trace dicts with keys xi and energy."""
    xs = [row["xi"] for row in rows]
    es = [row["energy"] for row in rows]
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(xs, es, marker="o", ms=3, color="C0")
    ax.axhline(floor, color="C3", ls="--", lw=1, label="divergence floor")
    ax.set_xlabel(r"test amplitude $\xi$")
    ax.set_ylabel("energy")
    ax.set_xscale("log")
    ax.set_yscale("symlog")
    ax.legend(loc="best", frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
