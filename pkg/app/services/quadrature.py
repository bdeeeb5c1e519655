"""Positive-weight quadrature rules with known polynomial exactness.

Builds Gauss-Legendre rules on [-1, 1], Gauss-Legendre x trapezoid product
rules on S^2, loads spherical design point files, verifies exactness and
estimates the Marcinkiewicz-Zygmund constant eta of a rule.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Optional, Union

import numpy as np

from app.core.errors import ConvergenceError, DesignFileError, DomainError, ExactnessError
from app.core.logging import get_logger
from app.services.orthopoly import (
    INTERVAL,
    SPHERE,
    BasisSet,
    Region,
    RegionKind,
    orthonormal_basis,
    sphere_points_from_angles,
)

logger = get_logger(__name__)

NEWTON_TOLERANCE = 1e-15
NEWTON_MAX_ITERATIONS = 100
DESIGN_RADIUS_TOLERANCE = 1e-8
DESIGN_EXACTNESS_TOLERANCE = 1e-8
WEIGHT_SUM_TOLERANCE = 1e-10


@dataclass(frozen=True)
class QuadratureRule:
    region: Region
    points: np.ndarray
    weights: np.ndarray
    exactness: Optional[int]
    source: str = ""

    def __post_init__(self) -> None:
        if self.points.shape[0] != self.weights.shape[0]:
            raise DomainError(
                f"{self.points.shape[0]} points but {self.weights.shape[0]} weights"
            )
        if np.any(self.weights <= 0):
            raise DomainError("quadrature weights must be positive")
        total = float(np.sum(self.weights))
        if abs(total - self.region.measure) > WEIGHT_SUM_TOLERANCE * max(1.0, self.region.measure):
            raise DomainError(
                f"weights sum to {total!r}, expected {self.region.measure!r}"
            )
        self.points.setflags(write=False)
        self.weights.setflags(write=False)

    @property
    def m(self) -> int:
        return int(self.weights.shape[0])

    def integrate(self, values) -> Union[float, complex]:
        return np.sum(self.weights * np.asarray(values))

    def with_exactness(self, exactness: int) -> "QuadratureRule":
        return dataclasses.replace(self, exactness=exactness)


@dataclass(frozen=True)
class MZEstimate:
    n: int
    eta: float
    rank_deficient: bool = False


def _legendre_and_derivative(m: int, x: np.ndarray):
    p_prev = np.ones_like(x)
    p = x.copy()
    for k in range(2, m + 1):
        p_prev, p = p, ((2 * k - 1) * x * p - (k - 1) * p_prev) / k
    if m == 1:
        p_prev = np.ones_like(x)
    dp = m * (x * p - p_prev) / (x * x - 1.0)
    return p, dp


@lru_cache(maxsize=256)
def gauss_legendre(m: int) -> QuadratureRule:
    """m-point Gauss-Legendre rule, exactness 2m - 1.

    Nodes are Newton iterates on P_m started from the Chebyshev points.
    """
    if m < 1:
        raise DomainError(f"point count must be >= 1, got {m}", operation="gauss_legendre")
    k = np.arange(1, m + 1)
    x = np.cos((2 * k - 1) * np.pi / (2 * m))

    for _ in range(NEWTON_MAX_ITERATIONS):
        p, dp = _legendre_and_derivative(m, x)
        step = p / dp
        x = x - step
        if np.max(np.abs(step)) <= NEWTON_TOLERANCE:
            break
    else:
        raise ConvergenceError(
            f"Newton iteration for {m} nodes did not converge in {NEWTON_MAX_ITERATIONS} steps",
            operation="gauss_legendre",
        )

    x = np.sort(x)
    x = 0.5 * (x - x[::-1])
    _, dp = _legendre_and_derivative(m, x)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    w = 0.5 * (w + w[::-1])
    return QuadratureRule(INTERVAL, x, w, exactness=2 * m - 1, source=f"gauss_legendre:{m}")


def gauss_legendre_on(a: float, b: float, m: int):
    """Nodes and weights of the m-point rule mapped to [a, b]."""
    base = gauss_legendre(m)
    half = 0.5 * (b - a)
    return a + half * (base.points + 1.0), half * base.weights


@lru_cache(maxsize=64)
def sphere_product_rule(t: int, phase: float = 0.0) -> QuadratureRule:
    """Product rule exact for spherical polynomials of degree <= t.

    ceil((t+1)/2) Gauss-Legendre nodes in z = cos(theta) times t+1 equispaced
    longitudes starting at ``phase``.
    """
    if t < 0:
        raise DomainError(f"exactness must be >= 0, got {t}", operation="sphere_product_rule")
    n_z = (t + 2) // 2
    n_phi = t + 1
    z_rule = gauss_legendre(n_z)
    phi = phase + 2.0 * np.pi * np.arange(n_phi) / n_phi
    zz, pp = np.meshgrid(z_rule.points, phi, indexing="ij")
    points = sphere_points_from_angles(zz.ravel(), pp.ravel())
    weights = np.repeat(z_rule.weights, n_phi) * (2.0 * np.pi / n_phi)
    return QuadratureRule(SPHERE, points, weights, exactness=t, source=f"sphere_product:{t}")


def design_path(directory: Union[str, Path], t: int) -> Path:
    """Conventional file name of a (t+1)^2-point spherical t-design."""
    return Path(directory) / f"sd_t{t}_m{(t + 1) ** 2}.txt"


def read_design_points(path: Union[str, Path]) -> np.ndarray:
    path = Path(path)
    if not path.exists():
        raise DesignFileError(f"design file not found: {path}", operation="load_spherical_design")
    try:
        text = path.read_text(encoding="utf-8")
    except UnicodeDecodeError as e:
        raise DesignFileError(f"{path}: not UTF-8 text ({e.reason})", operation="load_spherical_design") from e
    rows = []
    for line_number, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = stripped.split()
        if len(parts) != 3:
            raise DesignFileError(
                f"{path}:{line_number}: expected 3 values, got {len(parts)}",
                operation="load_spherical_design",
            )
        try:
            row = [float(value) for value in parts]
        except ValueError as e:
            raise DesignFileError(
                f"{path}:{line_number}: {e}", operation="load_spherical_design"
            ) from e
        if not all(math.isfinite(value) for value in row):
            raise DesignFileError(
                f"{path}:{line_number}: non-finite coordinate", operation="load_spherical_design"
            )
        rows.append(row)
    if not rows:
        raise DesignFileError(f"{path}: no points", operation="load_spherical_design")
    return np.array(rows)


def load_spherical_design(path: Union[str, Path], t: int) -> QuadratureRule:
    """Equal-weight rule from a point file; strength ``t`` is verified, not trusted."""
    points = read_design_points(path)
    radii = np.linalg.norm(points, axis=1)
    off = float(np.max(np.abs(radii - 1.0)))
    if not off <= DESIGN_RADIUS_TOLERANCE:
        raise DesignFileError(
            f"{path}: point off the unit sphere by {off:.3e}", operation="load_spherical_design"
        )
    points = points / radii[:, None]
    m = points.shape[0]
    rule = QuadratureRule(
        SPHERE, points, np.full(m, 4.0 * np.pi / m), exactness=None, source=f"design_file:{path}"
    )
    defect = verify_exactness(rule, t)
    if not defect <= DESIGN_EXACTNESS_TOLERANCE:
        raise ExactnessError(
            f"{path}: claimed strength t={t} fails with defect {defect:.3e}",
            defect=defect,
            operation="load_spherical_design",
        )
    logger.info("Loaded spherical design | path=%s | m=%s | t=%s | defect=%.2e", path, m, t, defect)
    return rule.with_exactness(t)


def gram_matrix(rule: QuadratureRule, basis: BasisSet) -> np.ndarray:
    """G_{ll'} = sum_j w_j p_l(x_j) p_l'(x_j)."""
    table = basis.evaluate(rule.points)
    return (table * rule.weights) @ table.T


def verify_exactness(rule: QuadratureRule, degree: int, basis: Optional[BasisSet] = None) -> float:
    """Largest Gram defect over basis pairs of combined degree <= ``degree``."""
    if degree < 0:
        raise DomainError(f"degree must be >= 0, got {degree}", operation="verify_exactness")
    basis = basis or orthonormal_basis(rule.region, degree)
    if not basis.family.orthonormal:
        raise DomainError(
            f"exactness is verified against an orthonormal family, got {basis.family.value}",
            operation="verify_exactness",
        )
    if basis.region != rule.region:
        raise DomainError("basis and rule live on different regions", operation="verify_exactness")
    gram = gram_matrix(rule, basis)
    degrees = basis.degrees()
    mask = (degrees[:, None] + degrees[None, :]) <= degree
    defect = np.abs(gram - np.eye(basis.dim))
    return float(np.max(defect[mask]))


def estimate_mz_eta(rule: QuadratureRule, n: int) -> MZEstimate:
    """Tightest eta with |sum w chi^2 - int chi^2| <= eta int chi^2 on P_n.

    This is the spectral norm of G - I. With fewer points than d_n the Gram
    matrix is singular and the estimate is reported as eta = 1 with a rank flag.
    """
    basis = orthonormal_basis(rule.region, n)
    if rule.m < basis.dim:
        logger.warning(
            "Rank-deficient rule for MZ estimate | m=%s | d_n=%s | n=%s", rule.m, basis.dim, n
        )
        return MZEstimate(n=n, eta=1.0, rank_deficient=True)
    gram = gram_matrix(rule, basis)
    eigenvalues = np.linalg.eigvalsh(gram - np.eye(basis.dim))
    return MZEstimate(n=n, eta=float(np.max(np.abs(eigenvalues))))


def rayleigh_lower_bound(rule: QuadratureRule, n: int, samples: int = 10_000, seed: int = 0) -> float:
    """max over random chi in P_n of |sum w chi^2 - int chi^2| / int chi^2."""
    basis = orthonormal_basis(rule.region, n)
    defect = gram_matrix(rule, basis) - np.eye(basis.dim)
    rng = np.random.default_rng(seed)
    coefficients = rng.standard_normal((samples, basis.dim))
    numerators = np.einsum("si,ij,sj->s", coefficients, defect, coefficients)
    denominators = np.einsum("si,si->s", coefficients, coefficients)
    return float(np.max(np.abs(numerators) / denominators))


def exact_rule(region: Region, degree: int) -> QuadratureRule:
    """Cheapest library rule with exactness >= ``degree``."""
    if region.kind is RegionKind.INTERVAL:
        return gauss_legendre(max(1, math.ceil((degree + 1) / 2)))
    return sphere_product_rule(degree)
