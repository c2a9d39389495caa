"""Figure rendering for sweep output (written to files, never shown)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def render_sweep_figure(rows: list[dict], path) -> None:
    """Two panels: query estimate vs size, and its ratio to sqrt(n)*sigma."""
    ns = [r["n"] for r in rows]
    t_est = [r["t_est"] for r in rows]
    ratio = [r["t_est"] / (r["n"] ** 0.5 * r["sigma_minus"]) for r in rows]

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.6))
    ax1.plot(ns, t_est, "o-", label="query estimate")
    ax1.plot(ns, [r["n"] ** 0.5 * r["sigma_minus"] for r in rows],
             "s--", label="sqrt(n) * sigma")
    ax1.set_xscale("log", base=2)
    ax1.set_yscale("log")
    ax1.set_xlabel("n")
    ax1.set_ylabel("estimate")
    ax1.legend(fontsize=8)

    ax2.plot(ns, ratio, "o-")
    ax2.set_xscale("log", base=2)
    ax2.set_xlabel("n")
    ax2.set_ylabel("estimate / (sqrt(n) sigma)")
    ax2.set_ylim(bottom=0)

    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
