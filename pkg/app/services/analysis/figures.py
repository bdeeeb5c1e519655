"""Figure data: log-scale SVG error plots and sampled-approximant CSVs."""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Optional, Sequence, Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from app.core.errors import DomainError  # noqa: E402
from app.core.logging import get_logger  # noqa: E402
from app.services.hyperinterp import Expansion  # noqa: E402
from app.services.kernels import KernelDescriptor  # noqa: E402
from app.services.orthopoly import RegionKind, sphere_points_from_angles  # noqa: E402

from .experiments import ErrorRow  # noqa: E402

logger = get_logger(__name__)


def write_sweep_svg(rows: Sequence[ErrorRow], path: Union[str, Path], title: Optional[str] = None) -> Path:
    """err_classical and err_efficient against n on a log-scale y axis."""
    if not rows:
        raise DomainError("no rows to plot", operation="write_sweep_svg")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    ordered = sorted(rows, key=lambda r: r.config.n)
    n = [r.config.n for r in ordered]
    floor = np.finfo(float).tiny
    classical = [max(r.err_classical, floor) for r in ordered]
    efficient = [max(r.err_efficient, floor) for r in ordered]

    fig, ax = plt.subplots(figsize=(6.4, 4.2), constrained_layout=True)
    ax.semilogy(n, classical, "o-", markersize=3, label="classical")
    ax.semilogy(n, efficient, "s-", markersize=3, label="efficient")
    ax.set_xlabel("n")
    ax.set_ylabel(f"{ordered[0].config.norm} error")
    kernel = ordered[0].config.kernel
    ax.set_title(title or f"{kernel.label} {kernel.parameter_label}".strip())
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.savefig(path, format="svg")
    plt.close(fig)
    logger.info("Saved sweep figure | path=%s | rows=%s", path, len(rows))
    return path


def _sample_points(region: RegionKind, samples: int) -> np.ndarray:
    if region is RegionKind.INTERVAL:
        return np.linspace(-1.0, 1.0, samples)
    side = max(2, int(np.sqrt(samples)))
    z = np.cos(np.linspace(0.0, np.pi, side))
    phi = np.linspace(0.0, 2.0 * np.pi, 2 * side, endpoint=False)
    zz, pp = np.meshgrid(z, phi, indexing="ij")
    return sphere_points_from_angles(zz, pp)


def write_approximation_csv(
    kernel: KernelDescriptor,
    f,
    classical: Expansion,
    efficient: Expansion,
    path: Union[str, Path],
    samples: int = 2001,
) -> Path:
    """F, L_nF and S_nF sampled on a grid, real and imaginary parts in separate columns.

    Interval rows are keyed by x; sphere rows by (x, y, z) on a latitude-longitude grid.
    Values of F at kernel singularities are written as they evaluate (inf / nan).
    """
    region = kernel.region.kind
    if classical.basis.region.kind is not region or efficient.basis.region.kind is not region:
        raise DomainError("approximants and kernel live on different regions", operation="write_approximation_csv")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    points = _sample_points(region, samples)
    target = kernel.evaluate(points) * f(points)
    series = {"F": target, "L": classical.evaluate(points), "S": efficient.evaluate(points)}
    coordinates = ["x"] if region is RegionKind.INTERVAL else ["x", "y", "z"]
    header = coordinates + [f"{name}_{part}" for name in series for part in ("re", "im")]

    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        coords = points.reshape(len(points), -1)
        for i in range(len(points)):
            row = [repr(float(c)) for c in coords[i]]
            for values in series.values():
                row += [repr(float(np.real(values[i]))), repr(float(np.imag(values[i])))]
            writer.writerow(row)
    logger.info("Saved approximation samples | path=%s | points=%s", path, len(points))
    return path
