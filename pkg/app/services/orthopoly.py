"""Orthonormal bases on [-1, 1] and on the unit sphere.

Three families are provided: normalized Legendre polynomials and Chebyshev
polynomials on the interval, and real orthonormal spherical harmonics on S^2.
Tables are laid out ``(dim, n_points)`` with rows in flat-index order, so a
coefficient vector ``c`` is evaluated as ``c @ table``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional, Sequence, Tuple, Union

import numpy as np

from app.core.errors import DomainError, IndexRangeError

DOMAIN_TOLERANCE = 1e-12
SPHERE_TOLERANCE = 1e-12
EVALUATION_CHUNK = 2048


class RegionKind(str, Enum):
    INTERVAL = "interval"
    SPHERE = "sphere"


@dataclass(frozen=True)
class Region:
    kind: RegionKind
    measure: float

    def __post_init__(self) -> None:
        expected = 2.0 if self.kind is RegionKind.INTERVAL else 4.0 * math.pi
        if not self.measure > 0 or abs(self.measure - expected) > 1e-15 * expected:
            raise DomainError(f"measure {self.measure} does not match region {self.kind.value}")


INTERVAL = Region(RegionKind.INTERVAL, 2.0)
SPHERE = Region(RegionKind.SPHERE, 4.0 * math.pi)


def region_for(kind: Union[str, RegionKind]) -> Region:
    return INTERVAL if RegionKind(kind) is RegionKind.INTERVAL else SPHERE


class Family(str, Enum):
    LEGENDRE_NORMALIZED = "legendre_normalized"
    CHEBYSHEV = "chebyshev"
    SPHERICAL_HARMONIC = "spherical_harmonic"

    @property
    def region(self) -> Region:
        return SPHERE if self is Family.SPHERICAL_HARMONIC else INTERVAL

    @property
    def orthonormal(self) -> bool:
        return self is not Family.CHEBYSHEV

    def dim(self, max_degree: int) -> int:
        if self is Family.SPHERICAL_HARMONIC:
            return (max_degree + 1) ** 2
        return max_degree + 1


@dataclass(frozen=True)
class SphericalPoint:
    x: float
    y: float
    z: float

    def __post_init__(self) -> None:
        norm2 = self.x * self.x + self.y * self.y + self.z * self.z
        if abs(norm2 - 1.0) > SPHERE_TOLERANCE:
            raise DomainError(f"point ({self.x}, {self.y}, {self.z}) is not on the unit sphere")

    @classmethod
    def normalized(cls, x: float, y: float, z: float) -> "SphericalPoint":
        r = math.sqrt(x * x + y * y + z * z)
        if r == 0.0:
            raise DomainError("cannot normalize the zero vector")
        return cls(x / r, y / r, z / r)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def __neg__(self) -> "SphericalPoint":
        return SphericalPoint(-self.x, -self.y, -self.z)


NORTH_POLE = SphericalPoint(0.0, 0.0, 1.0)


def as_interval_points(x) -> np.ndarray:
    """Validate interval points and return them as a float array clipped to [-1, 1]."""
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if arr.size and np.max(np.abs(arr)) > 1.0 + DOMAIN_TOLERANCE:
        raise DomainError(f"point outside [-1, 1]: max |x| = {np.max(np.abs(arr))!r}")
    return np.clip(arr, -1.0, 1.0)


def as_sphere_points(points) -> np.ndarray:
    """Validate sphere points and return an ``(n, 3)`` array."""
    if isinstance(points, SphericalPoint):
        return points.as_array()[None, :]
    if isinstance(points, (list, tuple)) and points and isinstance(points[0], SphericalPoint):
        return np.array([p.as_array() for p in points])
    arr = np.asarray(points, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise DomainError(f"sphere points must have shape (n, 3), got {arr.shape}")
    if arr.shape[0]:
        defect = np.max(np.abs(np.einsum("ij,ij->i", arr, arr) - 1.0))
        if defect > SPHERE_TOLERANCE:
            raise DomainError(f"point off the unit sphere by {defect:.3e}")
    return arr


def legendre_normalized_table(n: int, x) -> np.ndarray:
    """Rows P~_0..P~_n at ``x``; P~_l = sqrt((2l+1)/2) P_l."""
    if n < 0:
        raise IndexRangeError(f"degree must be >= 0, got {n}")
    x = as_interval_points(x)
    table = np.empty((n + 1, x.size))
    table[0] = 1.0
    if n >= 1:
        table[1] = x
    for ell in range(2, n + 1):
        table[ell] = ((2 * ell - 1) * x * table[ell - 1] - (ell - 1) * table[ell - 2]) / ell
    table *= np.sqrt((2.0 * np.arange(n + 1) + 1.0) / 2.0)[:, None]
    return table


def chebyshev_table(n: int, x) -> np.ndarray:
    """Rows T_0..T_n at ``x``."""
    if n < 0:
        raise IndexRangeError(f"degree must be >= 0, got {n}")
    x = as_interval_points(x)
    table = np.empty((n + 1, x.size))
    table[0] = 1.0
    if n >= 1:
        table[1] = x
    for r in range(2, n + 1):
        table[r] = 2.0 * x * table[r - 1] - table[r - 2]
    return table


def spherical_harmonic_table(n: int, points) -> np.ndarray:
    """Real orthonormal Y_{l,k} for l <= n, rows in l-major order with k = -l..l.

    k > 0 carries cos(k*phi), k < 0 carries sin(|k|*phi); no Condon-Shortley phase.
    The associated Legendre part is the fully normalized upward recurrence in l
    at fixed order.
    """
    if n < 0:
        raise IndexRangeError(f"degree must be >= 0, got {n}")
    pts = as_sphere_points(points)
    x, y, z = pts[:, 0], pts[:, 1], pts[:, 2]
    sin_theta = np.hypot(x, y)
    phi = np.arctan2(y, x)

    table = np.zeros(((n + 1) ** 2, pts.shape[0]))
    sqrt2 = math.sqrt(2.0)
    p_mm = np.full(pts.shape[0], 1.0 / math.sqrt(4.0 * math.pi))

    for m in range(n + 1):
        if m > 0:
            p_mm = p_mm * math.sqrt((2.0 * m + 1.0) / (2.0 * m)) * sin_theta
        if m == 0:
            cos_m = sin_m = None
        else:
            cos_m = sqrt2 * np.cos(m * phi)
            sin_m = sqrt2 * np.sin(m * phi)

        def store(ell: int, values: np.ndarray) -> None:
            centre = ell * ell + ell
            if m == 0:
                table[centre] = values
            else:
                table[centre + m] = values * cos_m
                table[centre - m] = values * sin_m

        store(m, p_mm)
        if m == n:
            continue
        p_prev = p_mm
        p_cur = math.sqrt(2.0 * m + 3.0) * z * p_mm
        store(m + 1, p_cur)
        for ell in range(m + 2, n + 1):
            a = math.sqrt((4.0 * ell * ell - 1.0) / (ell * ell - m * m))
            b = math.sqrt(((ell - 1.0) ** 2 - m * m) / (4.0 * (ell - 1.0) ** 2 - 1.0))
            p_next = a * (z * p_cur - b * p_prev)
            store(ell, p_next)
            p_prev, p_cur = p_cur, p_next
    return table


def eval_legendre_normalized(ell: int, x) -> Union[float, np.ndarray]:
    values = legendre_normalized_table(ell, x)[ell]
    return float(values[0]) if np.ndim(x) == 0 else values


def eval_chebyshev(r: int, x) -> Union[float, np.ndarray]:
    values = chebyshev_table(r, x)[r]
    return float(values[0]) if np.ndim(x) == 0 else values


def eval_spherical_harmonic(ell: int, k: int, p) -> Union[float, np.ndarray]:
    if ell < 0 or abs(k) > ell:
        raise IndexRangeError(f"invalid harmonic index (l={ell}, k={k})")
    values = spherical_harmonic_table(ell, p)[ell * ell + ell + k]
    return float(values[0]) if isinstance(p, SphericalPoint) else values


def flat_index(family: Family, degree: int, order: Optional[int] = None) -> int:
    """1-based flat index of a basis member."""
    family = Family(family)
    if degree < 0:
        raise IndexRangeError(f"degree must be >= 0, got {degree}")
    if family is Family.SPHERICAL_HARMONIC:
        if order is None or abs(order) > degree:
            raise IndexRangeError(f"invalid harmonic index (l={degree}, k={order})")
        return degree * degree + degree + order + 1
    if order not in (None, 0):
        raise IndexRangeError(f"interval family {family.value} has no order, got {order}")
    return degree + 1


def degree_order(family: Family, index: int) -> Tuple[int, Optional[int]]:
    """Inverse of :func:`flat_index`."""
    family = Family(family)
    if index < 1:
        raise IndexRangeError(f"flat index must be >= 1, got {index}")
    if family is Family.SPHERICAL_HARMONIC:
        degree = math.isqrt(index - 1)
        return degree, index - 1 - degree * degree - degree
    return index - 1, None


@dataclass(frozen=True)
class BasisSet:
    family: Family
    max_degree: int

    def __post_init__(self) -> None:
        if self.max_degree < 0:
            raise IndexRangeError(f"max_degree must be >= 0, got {self.max_degree}")

    @property
    def region(self) -> Region:
        return self.family.region

    @property
    def dim(self) -> int:
        return self.family.dim(self.max_degree)

    def degrees(self) -> np.ndarray:
        """Degree of every flat slot, 0-based array of length ``dim``."""
        if self.family is Family.SPHERICAL_HARMONIC:
            return np.concatenate([np.full(2 * ell + 1, ell) for ell in range(self.max_degree + 1)])
        return np.arange(self.max_degree + 1)

    def labels(self) -> Iterable[Tuple[int, int, int]]:
        """(flat index, degree, order) triples; order is 0 on the interval."""
        for index in range(1, self.dim + 1):
            degree, order = degree_order(self.family, index)
            yield index, degree, order or 0

    def evaluate(self, points) -> np.ndarray:
        if self.family is Family.LEGENDRE_NORMALIZED:
            return legendre_normalized_table(self.max_degree, points)
        if self.family is Family.CHEBYSHEV:
            return chebyshev_table(self.max_degree, points)
        return spherical_harmonic_table(self.max_degree, points)

    def evaluate_series(self, coefficients, points, chunk: int = EVALUATION_CHUNK) -> np.ndarray:
        """sum_l c_l b_l(x), evaluated chunk by chunk to bound memory."""
        coefficients = np.asarray(coefficients)
        if coefficients.shape[0] != self.dim:
            raise IndexRangeError(f"expected {self.dim} coefficients, got {coefficients.shape[0]}")
        if self.region.kind is RegionKind.INTERVAL:
            pts = as_interval_points(points)
        else:
            pts = as_sphere_points(points)
        values = np.empty(pts.shape[0], dtype=np.result_type(coefficients.dtype, float))
        for start in range(0, pts.shape[0], chunk):
            block = pts[start:start + chunk]
            values[start:start + chunk] = coefficients @ self.evaluate(block)
        return values


def orthonormal_basis(region: Region, n: int) -> BasisSet:
    """The p_l family of degree n on ``region``."""
    if region.kind is RegionKind.INTERVAL:
        return BasisSet(Family.LEGENDRE_NORMALIZED, n)
    return BasisSet(Family.SPHERICAL_HARMONIC, n)


def auxiliary_basis(region: Region, degree: int) -> BasisSet:
    """The q_r family used for modified moments."""
    if region.kind is RegionKind.INTERVAL:
        return BasisSet(Family.CHEBYSHEV, degree)
    return BasisSet(Family.SPHERICAL_HARMONIC, degree)


def sphere_points_from_angles(z: Sequence[float], phi: Sequence[float]) -> np.ndarray:
    """Cartesian points for ``z = cos(theta)`` and longitude ``phi`` (same shape)."""
    z = np.asarray(z, dtype=float)
    phi = np.asarray(phi, dtype=float)
    s = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    return np.stack([s * np.cos(phi), s * np.sin(phi), z], axis=-1).reshape(-1, 3)
