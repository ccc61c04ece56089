"""Waterfall figures rendered from result CSV files."""

from __future__ import annotations

import csv

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt


def load_results_csv(path: str):
    """Rows as dicts with numeric fields converted."""
    rows = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            rows.append({
                "mode": row["mode"],
                "code": row["code"],
                "delta_pct": row["delta_pct"],
                "ebn0_db": float(row["ebn0_db"]),
                "frames": int(row["frames"]),
                "ber": float(row["ber"]),
                "fer": float(row["fer"]),
            })
    if not rows:
        raise ValueError(f"{path} holds no result rows")
    return rows


def render_ber_figure(rows, out_path: str, show_fer: bool = True) -> str:
    """One semilog waterfall plot; a curve per (mode, code, delta) group.

    Zero-error points are dropped from the log axis rather than plotted
    at an arbitrary floor.
    """
    groups = {}
    for row in rows:
        key = (row["mode"], row["code"], row["delta_pct"])
        groups.setdefault(key, []).append(row)

    fig, ax = plt.subplots(figsize=(7.0, 5.0))
    for key in sorted(groups):
        pts = sorted(groups[key], key=lambda r: r["ebn0_db"])
        label = f"{key[0]} {key[1]} delta={key[2]}%"
        xs = [p["ebn0_db"] for p in pts if p["ber"] > 0]
        ys = [p["ber"] for p in pts if p["ber"] > 0]
        line = ax.semilogy(xs, ys, marker="o", label=label)
        if show_fer:
            xf = [p["ebn0_db"] for p in pts if p["fer"] > 0]
            yf = [p["fer"] for p in pts if p["fer"] > 0]
            ax.semilogy(
                xf, yf, marker="s", linestyle="--",
                color=line[0].get_color(), alpha=0.6,
                label=label + " (FER)",
            )
    ax.set_xlabel("Eb/N0 (dB)")
    ax.set_ylabel("error rate")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path
