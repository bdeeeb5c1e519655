"""Reference quadrature for L1 / L2 error norms of approximants of F = K f.

Interval: composite Gauss-Legendre panels, geometrically graded toward endpoint
singularities and no wider than a quarter wavelength for exp(i kappa x).
Sphere: a product rule of exactness >= 4n for smooth kernels; for point-singular
kernels a frame rotated so xi is the pole, z panels graded toward the singular
poles and an equispaced longitude sum.
"""

from __future__ import annotations

import math
from typing import List, Optional

import numpy as np

from app.core.config import Settings, get_settings
from app.core.errors import ConvergenceError, DomainError
from app.core.logging import get_logger
from app.services.hyperinterp import Expansion
from app.services.kernels import IntervalOscillatory, KernelDescriptor, SphereDoubleAlgebraic
from app.services.moments import rotation_to_pole
from app.services.orthopoly import INTERVAL, SPHERE, RegionKind
from app.services.quadrature import QuadratureRule, gauss_legendre_on, sphere_product_rule

logger = get_logger(__name__)

SPHERE_BASE_PANELS = 4
SPHERE_GRADING_LEVELS = 20
# narrowest graded panel; closer to a singular end, nodes round onto the singularity
GRADING_FLOOR = 1e-10


def graded_breakpoints(
    panels: int, ratio: float, levels: int, *, left: bool, right: bool
) -> np.ndarray:
    """Uniform panels on [-1, 1] whose end panels are split geometrically toward singular ends."""
    edges = np.linspace(-1.0, 1.0, panels + 1)
    h = edges[1] - edges[0]
    offsets = h * ratio ** np.arange(levels, 0, -1)
    offsets = offsets[offsets >= GRADING_FLOOR]
    pieces: List[np.ndarray] = []
    if left:
        pieces.append(-1.0 + offsets)
    pieces.append(edges)
    if right:
        pieces.append(1.0 - offsets[::-1])
    return np.unique(np.concatenate(pieces))


def composite_gauss_legendre(breakpoints: np.ndarray, points_per_panel: int):
    """Nodes and weights of ``points_per_panel``-point Gauss-Legendre on every panel."""
    panels = [gauss_legendre_on(a, b, points_per_panel) for a, b in zip(breakpoints[:-1], breakpoints[1:])]
    return np.concatenate([p[0] for p in panels]), np.concatenate([p[1] for p in panels])


def _interval_reference(kernel: KernelDescriptor, n: int, density: int, settings: Settings) -> QuadratureRule:
    per_panel = max(1, settings.reference_points // settings.reference_panels)
    panels = settings.reference_panels * density
    if isinstance(kernel, IntervalOscillatory):
        quarter_wave = math.pi / (2.0 * abs(kernel.kappa))
        panels = max(panels, math.ceil(2.0 / quarter_wave) * density)
    singular = kernel.singularities()
    breakpoints = graded_breakpoints(
        panels,
        settings.grading_ratio,
        settings.grading_levels * density,
        left=-1.0 in singular,
        right=1.0 in singular,
    )
    per_panel = max(per_panel, n // 2 + 10)
    nodes, weights = composite_gauss_legendre(breakpoints, per_panel)
    return QuadratureRule(INTERVAL, nodes, weights, exactness=None, source=f"reference:interval:{density}")


def _sphere_reference(kernel: KernelDescriptor, n: int, density: int, settings: Settings) -> QuadratureRule:
    singular = kernel.singularities()
    if not singular:
        t = density * (4 * n + 40)
        rule = sphere_product_rule(t)
        return QuadratureRule(SPHERE, np.array(rule.points), np.array(rule.weights), exactness=t, source=f"reference:sphere:{density}")

    grade_south = isinstance(kernel, SphereDoubleAlgebraic) and kernel.nu2 < 0
    breakpoints = graded_breakpoints(
        SPHERE_BASE_PANELS * density,
        settings.grading_ratio,
        SPHERE_GRADING_LEVELS * density,
        left=grade_south,
        right=True,
    )
    z, wz = composite_gauss_legendre(breakpoints, n // 2 + 16)
    n_phi = density * (4 * n + 40)
    phi = 2.0 * np.pi * (np.arange(n_phi) + 0.5) / n_phi
    zz, pp = np.meshgrid(z, phi, indexing="ij")
    s = np.sqrt(np.clip(1.0 - zz * zz, 0.0, None))
    local = np.stack([s * np.cos(pp), s * np.sin(pp), zz], axis=-1).reshape(-1, 3)
    points = local @ rotation_to_pole(kernel.xi).T
    points /= np.linalg.norm(points, axis=1)[:, None]
    weights = np.repeat(wz, n_phi) * (2.0 * np.pi / n_phi)
    return QuadratureRule(SPHERE, points, weights, exactness=None, source=f"reference:sphere-rotated:{density}")


def reference_rule(
    kernel: KernelDescriptor, n: int, density: int = 1, settings: Optional[Settings] = None
) -> QuadratureRule:
    """Composite rule used to measure ||approx - K f||_p for approximants of degree n."""
    if density < 1:
        raise DomainError(f"density must be >= 1, got {density}", operation="reference_rule")
    settings = settings or get_settings()
    if kernel.region.kind is RegionKind.INTERVAL:
        return _interval_reference(kernel, n, density, settings)
    return _sphere_reference(kernel, n, density, settings)


def _norm_on(rule: QuadratureRule, approx: Expansion, kernel: KernelDescriptor, f, p: int) -> float:
    difference = approx.evaluate(rule.points) - kernel.evaluate(rule.points) * f(rule.points)
    integrand = np.abs(difference) ** p
    if not np.all(np.isfinite(integrand)):
        return math.nan
    return float(np.sum(rule.weights * integrand) ** (1.0 / p))


def error_norm(
    approx: Expansion,
    kernel: KernelDescriptor,
    f,
    p: int = 2,
    *,
    density: int = 1,
    settings: Optional[Settings] = None,
) -> float:
    """||approx - K f||_p, p in {1, 2}. A non-finite integrand triggers one denser retry."""
    if p not in (1, 2):
        raise DomainError(f"p must be 1 or 2, got {p}", operation="error_norm")
    if approx.basis.region != kernel.region:
        raise DomainError("approximant and kernel live on different regions", operation="error_norm")
    settings = settings or get_settings()
    value = _norm_on(reference_rule(kernel, approx.n, density, settings), approx, kernel, f, p)
    if math.isfinite(value):
        return value
    logger.warning("Non-finite reference integrand, regrading | kernel=%s | n=%s", kernel.label, approx.n)
    value = _norm_on(reference_rule(kernel, approx.n, 2 * density, settings), approx, kernel, f, p)
    if not math.isfinite(value):
        raise ConvergenceError(
            f"reference integrand for {kernel.label} stays non-finite after regrading",
            operation="error_norm",
        )
    return value
