"""Render a method-comparison error report: delimited data plus figures."""

from __future__ import annotations

import csv
import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .remap import MethodComparison


def write_report(cm: MethodComparison, prefix: str | Path) -> tuple[Path, Path]:
    """Write <prefix>.csv (per-row error profile) and <prefix>.png (figures).

    Returns (csv_path, figure_path).
    """
    prefix = Path(prefix)
    if prefix.suffix.lower() in (".csv", ".png"):
        prefix = prefix.with_suffix("")
    prefix.parent.mkdir(parents=True, exist_ok=True)
    csv_path = prefix.with_suffix(".csv")
    fig_path = prefix.with_suffix(".png")

    h = cm.dims.height
    polar_deg = (np.arange(h) + 0.5) * 180.0 / h
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["row", "polar_deg", "max_error_rad"])
        for row in range(h):
            writer.writerow([row, f"{polar_deg[row]:.6f}", f"{cm.row_max_error_rad[row]:.12e}"])

    fig, (ax_map, ax_profile) = plt.subplots(
        1, 2, figsize=(11, 4), gridspec_kw={"width_ratios": [1.6, 1.0]}
    )
    if cm.error_grid is not None:
        im = ax_map.imshow(
            cm.error_grid,
            extent=(0, 360, 180, 0),
            aspect="auto",
            cmap="magma",
            interpolation="nearest",
        )
        fig.colorbar(im, ax=ax_map, label="angular error (rad)")
    else:
        ax_map.text(0.5, 0.5, "error grid not retained", ha="center", va="center")
    ax_map.set_xlabel("destination azimuth (deg)")
    ax_map.set_ylabel("polar angle (deg)")
    ax_map.set_title(
        f"separable vs 3D oracle, step={cm.displacement.step:g}, "
        f"direction={cm.displacement.direction:g}°"
    )

    ax_profile.semilogy(polar_deg, np.maximum(cm.row_max_error_rad, 1e-18))
    ax_profile.axvline(90.0, color="gray", linestyle=":", linewidth=1)
    ax_profile.set_xlabel("polar angle (deg)")
    ax_profile.set_ylabel("row max error (rad)")
    ax_profile.set_title(
        f"max {cm.max_error_rad:.3e} rad, equator {cm.equator_max_error_rad:.2e} rad"
    )
    ax_profile.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(fig_path, dpi=120)
    plt.close(fig)
    return csv_path, fig_path
