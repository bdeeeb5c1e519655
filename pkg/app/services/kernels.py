"""Kernel descriptors K for F = K * f.

Each descriptor is a frozen pydantic model tagged by ``kind`` so that kernels
travel through JSON config files, HTTP bodies and cache keys unchanged.
"""

from __future__ import annotations

import math
from typing import Annotated, List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, field_validator, model_validator

from app.core.errors import ConfigError, NodeOnSingularityError
from app.services.orthopoly import (
    INTERVAL,
    SPHERE,
    Region,
    RegionKind,
    SphericalPoint,
    as_interval_points,
    as_sphere_points,
    eval_spherical_harmonic,
)

SINGULARITY_TOLERANCE = 1e-14
DEFAULT_XI = (math.sqrt(2.0) / 2.0, math.sqrt(2.0) / 2.0, 0.0)

Xi = Tuple[float, float, float]


def _unit_xi(value: Xi) -> Xi:
    norm = math.sqrt(sum(c * c for c in value))
    if abs(norm - 1.0) > 1e-8:
        raise ValueError(f"xi must lie on the unit sphere, |xi| = {norm!r}")
    return tuple(c / norm for c in value)


def _sphere_distance(xi: Xi, points: np.ndarray) -> np.ndarray:
    dots = points @ np.asarray(xi)
    return np.sqrt(np.clip(2.0 * (1.0 - dots), 0.0, None))


class _Kernel(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    @property
    def region(self) -> Region:
        raise NotImplementedError

    @property
    def is_complex(self) -> bool:
        return False

    @property
    def label(self) -> str:
        raise NotImplementedError

    @property
    def parameter_label(self) -> str:
        return ""

    def singularities(self) -> List:
        """Points where K is unbounded; floats on the interval, (3,) arrays on the sphere."""
        return []

    def sup_norm(self) -> Optional[float]:
        """||K||_inf, or a sharp upper bound for it, for bounded kernels; None otherwise."""
        return None

    def _evaluate(self, pts: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def evaluate(self, points) -> np.ndarray:
        if self.region.kind is RegionKind.INTERVAL:
            pts = as_interval_points(points)
        else:
            pts = as_sphere_points(points)
        with np.errstate(divide="ignore", invalid="ignore"):
            return self._evaluate(pts)

    def check_nodes(self, points, tolerance: float = SINGULARITY_TOLERANCE) -> None:
        """Raise if any point sits on a singularity of K."""
        singular = self.singularities()
        if not singular:
            return
        if self.region.kind is RegionKind.INTERVAL:
            pts = as_interval_points(points)
            for s in singular:
                hit = np.abs(pts - s) <= tolerance
                if np.any(hit):
                    raise NodeOnSingularityError(
                        f"node {pts[hit][0]!r} coincides with singularity {s!r} of {self.label}"
                    )
        else:
            pts = as_sphere_points(points)
            for s in singular:
                hit = np.linalg.norm(pts - s, axis=1) <= tolerance
                if np.any(hit):
                    raise NodeOnSingularityError(
                        f"node {pts[hit][0].tolist()} coincides with singularity "
                        f"{np.asarray(s).tolist()} of {self.label}"
                    )


class IntervalOscillatory(_Kernel):
    """K(x) = exp(i kappa x). Negative kappa gives the conjugate kernel."""

    kind: Literal["interval_oscillatory"] = "interval_oscillatory"
    kappa: float

    @field_validator("kappa")
    @classmethod
    def _kappa_nonzero(cls, value: float) -> float:
        if not math.isfinite(value) or value == 0.0:
            raise ValueError(f"kappa must be finite and nonzero, got {value!r}")
        return value

    @property
    def region(self) -> Region:
        return INTERVAL

    @property
    def is_complex(self) -> bool:
        return True

    @property
    def label(self) -> str:
        return "osc"

    @property
    def parameter_label(self) -> str:
        return f"{self.kappa:g}"

    def sup_norm(self) -> Optional[float]:
        return 1.0

    def _evaluate(self, pts: np.ndarray) -> np.ndarray:
        return np.exp(1j * self.kappa * pts)


class IntervalAlgebraicLeft(_Kernel):
    """K(x) = (1 + x)^a."""

    kind: Literal["interval_algebraic_left"] = "interval_algebraic_left"
    a: float = -1.0 / 3.0

    @field_validator("a")
    @classmethod
    def _integrable(cls, value: float) -> float:
        if not value > -1.0:
            raise ValueError(f"exponent must be > -1, got {value!r}")
        return value

    @property
    def region(self) -> Region:
        return INTERVAL

    @property
    def label(self) -> str:
        return "alg-left"

    @property
    def parameter_label(self) -> str:
        return f"{self.a:g}"

    def singularities(self) -> List:
        return [-1.0] if self.a < 0 else []

    def _evaluate(self, pts: np.ndarray) -> np.ndarray:
        return np.power(1.0 + pts, self.a)


class IntervalAlgebraicRight(_Kernel):
    """K(x) = |x - 1|^a, i.e. (1 - x)^a on [-1, 1]."""

    kind: Literal["interval_algebraic_right"] = "interval_algebraic_right"
    a: float = -0.2

    @field_validator("a")
    @classmethod
    def _integrable(cls, value: float) -> float:
        if not value > -1.0:
            raise ValueError(f"exponent must be > -1, got {value!r}")
        return value

    @property
    def region(self) -> Region:
        return INTERVAL

    @property
    def label(self) -> str:
        return "alg-right"

    @property
    def parameter_label(self) -> str:
        return f"{self.a:g}"

    def singularities(self) -> List:
        return [1.0] if self.a < 0 else []

    def _evaluate(self, pts: np.ndarray) -> np.ndarray:
        return np.power(1.0 - pts, self.a)


class IntervalChebyshevWeight(_Kernel):
    """K(x) = (1 - x^2)^(-1/2)."""

    kind: Literal["interval_chebyshev_weight"] = "interval_chebyshev_weight"

    @property
    def region(self) -> Region:
        return INTERVAL

    @property
    def label(self) -> str:
        return "cheb-weight"

    @property
    def parameter_label(self) -> str:
        return "-0.5"

    def singularities(self) -> List:
        return [-1.0, 1.0]

    def _evaluate(self, pts: np.ndarray) -> np.ndarray:
        return 1.0 / np.sqrt(1.0 - pts * pts)


class SphereHarmonic(_Kernel):
    """K = Y_{lbar, kbar}."""

    kind: Literal["sphere_harmonic"] = "sphere_harmonic"
    lbar: int
    kbar: int

    @model_validator(mode="after")
    def _valid_index(self) -> "SphereHarmonic":
        if self.lbar < 0 or abs(self.kbar) > self.lbar:
            raise ValueError(f"invalid harmonic index (l={self.lbar}, k={self.kbar})")
        return self

    @property
    def region(self) -> Region:
        return SPHERE

    @property
    def label(self) -> str:
        return "harmonic"

    @property
    def parameter_label(self) -> str:
        return f"{self.lbar}:{self.kbar}"

    def sup_norm(self) -> Optional[float]:
        # addition theorem: |Y_lk|^2 <= (2l+1)/(4 pi), attained for k = 0 at the poles
        return math.sqrt((2 * self.lbar + 1) / (4.0 * math.pi))

    def _evaluate(self, pts: np.ndarray) -> np.ndarray:
        return eval_spherical_harmonic(self.lbar, self.kbar, pts)


class _PointSingular(_Kernel):
    """Sphere kernel that depends on x only through xi . x."""

    xi: Xi = DEFAULT_XI

    @field_validator("xi")
    @classmethod
    def _xi_on_sphere(cls, value: Xi) -> Xi:
        return _unit_xi(value)

    @property
    def region(self) -> Region:
        return SPHERE

    @property
    def xi_point(self) -> SphericalPoint:
        return SphericalPoint.normalized(*self.xi)


class SphereAlgebraic(_PointSingular):
    """K(x) = |xi - x|^nu."""

    kind: Literal["sphere_algebraic"] = "sphere_algebraic"
    nu: float = -0.5

    @field_validator("nu")
    @classmethod
    def _integrable(cls, value: float) -> float:
        if not value > -1.0:
            raise ValueError(f"nu must be > -1, got {value!r}")
        return value

    @property
    def label(self) -> str:
        return "sph-alg"

    @property
    def parameter_label(self) -> str:
        return f"{self.nu:g}"

    def singularities(self) -> List:
        return [np.asarray(self.xi)] if self.nu < 0 else []

    def _evaluate(self, pts: np.ndarray) -> np.ndarray:
        return np.power(_sphere_distance(self.xi, pts), self.nu)


class SphereLog(_PointSingular):
    """K(x) = log|xi - x|."""

    kind: Literal["sphere_log"] = "sphere_log"

    @property
    def label(self) -> str:
        return "sph-log"

    def singularities(self) -> List:
        return [np.asarray(self.xi)]

    def _evaluate(self, pts: np.ndarray) -> np.ndarray:
        return np.log(_sphere_distance(self.xi, pts))


class SphereDoubleAlgebraic(_PointSingular):
    """K(x) = |xi - x|^nu1 |xi + x|^nu2."""

    kind: Literal["sphere_double_algebraic"] = "sphere_double_algebraic"
    nu1: float = -0.5
    nu2: float = -0.5

    @field_validator("nu1", "nu2")
    @classmethod
    def _integrable(cls, value: float) -> float:
        if not value > -1.0:
            raise ValueError(f"exponents must be > -1, got {value!r}")
        return value

    @property
    def label(self) -> str:
        return "sph-double"

    @property
    def parameter_label(self) -> str:
        return f"{self.nu1:g};{self.nu2:g}"

    def singularities(self) -> List:
        xi = np.asarray(self.xi)
        points = []
        if self.nu1 < 0:
            points.append(xi)
        if self.nu2 < 0:
            points.append(-xi)
        return points

    def _evaluate(self, pts: np.ndarray) -> np.ndarray:
        minus = _sphere_distance(self.xi, pts)
        plus = _sphere_distance(tuple(-c for c in self.xi), pts)
        return np.power(minus, self.nu1) * np.power(plus, self.nu2)


class Unit(_Kernel):
    """K = 1 on either region."""

    kind: Literal["unit"] = "unit"
    on: RegionKind = RegionKind.INTERVAL

    @property
    def region(self) -> Region:
        return INTERVAL if self.on is RegionKind.INTERVAL else SPHERE

    @property
    def label(self) -> str:
        return "unit"

    def sup_norm(self) -> Optional[float]:
        return 1.0

    def _evaluate(self, pts: np.ndarray) -> np.ndarray:
        return np.ones(pts.shape[0])


KernelDescriptor = Annotated[
    Union[
        IntervalOscillatory,
        IntervalAlgebraicLeft,
        IntervalAlgebraicRight,
        IntervalChebyshevWeight,
        SphereHarmonic,
        SphereAlgebraic,
        SphereLog,
        SphereDoubleAlgebraic,
        Unit,
    ],
    Field(discriminator="kind"),
]

kernel_adapter: TypeAdapter = TypeAdapter(KernelDescriptor)


def parse_kernel(data) -> KernelDescriptor:
    """Build a descriptor from a dict such as ``{"kind": "sphere_log", "xi": [0, 0, 1]}``."""
    return kernel_adapter.validate_python(data)


def build_kernel(
    name: str,
    region: Union[str, RegionKind] = RegionKind.INTERVAL,
    *,
    kappa: Optional[float] = None,
    a: Optional[float] = None,
    nu: Optional[float] = None,
    nu1: Optional[float] = None,
    nu2: Optional[float] = None,
    xi: Optional[Xi] = None,
    lbar: Optional[int] = None,
    kbar: Optional[int] = None,
) -> KernelDescriptor:
    """Map a short kernel name plus optional parameters to a descriptor."""
    region = RegionKind(region)
    params = {}
    if xi is not None:
        params["xi"] = tuple(xi)

    try:
        if name == "osc":
            if kappa is None:
                raise ConfigError("kernel 'osc' needs --kappa")
            return IntervalOscillatory(kappa=kappa)
        if name == "alg-left":
            return IntervalAlgebraicLeft(**({"a": a} if a is not None else {}))
        if name == "alg-right":
            return IntervalAlgebraicRight(**({"a": a} if a is not None else {}))
        if name == "cheb-weight":
            return IntervalChebyshevWeight()
        if name == "harmonic":
            if lbar is None or kbar is None:
                raise ConfigError("kernel 'harmonic' needs --lbar and --kbar")
            return SphereHarmonic(lbar=lbar, kbar=kbar)
        if name == "sph-alg":
            if nu is not None:
                params["nu"] = nu
            return SphereAlgebraic(**params)
        if name == "sph-log":
            return SphereLog(**params)
        if name == "sph-double":
            if nu1 is not None:
                params["nu1"] = nu1
            if nu2 is not None:
                params["nu2"] = nu2
            return SphereDoubleAlgebraic(**params)
        if name == "unit":
            return Unit(on=region)
    except ValueError as e:
        if isinstance(e, ConfigError):
            raise
        raise ConfigError(f"invalid parameters for kernel '{name}': {e}") from e
    raise ConfigError(f"unknown kernel '{name}'")
