"""Experiment configurations, test functions and rule resolution."""

from __future__ import annotations

import math
from typing import Callable, Dict, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.core.errors import ConfigError
from app.core.logging import get_logger
from app.services.kernels import KernelDescriptor
from app.services.orthopoly import RegionKind, as_interval_points, as_sphere_points
from app.services.quadrature import (
    QuadratureRule,
    design_path,
    gauss_legendre,
    load_spherical_design,
    sphere_product_rule,
)

logger = get_logger(__name__)

# longitude offset keeping product-rule nodes off xi = (sqrt2/2, sqrt2/2, 0)
NODE_AVOIDING_PHASE = 0.5


def _runge_shifted(x):
    x = as_interval_points(x)
    return 1.0 / (1.2 - x * x)


def _gauss(x):
    x = as_interval_points(x)
    return np.exp(-x * x)


def _sphere_cos(points):
    p = as_sphere_points(points)
    x, y, z = p[:, 0], p[:, 1], p[:, 2]
    return np.cos(np.cosh(x * z) - 2.0 * y)


def _sphere_exp(points):
    p = as_sphere_points(points)
    return np.exp(p.sum(axis=1))


TEST_FUNCTIONS: Dict[str, Tuple[RegionKind, Callable[[np.ndarray], np.ndarray]]] = {
    "runge_shifted": (RegionKind.INTERVAL, _runge_shifted),
    "gauss": (RegionKind.INTERVAL, _gauss),
    "sphere_cos": (RegionKind.SPHERE, _sphere_cos),
    "sphere_exp": (RegionKind.SPHERE, _sphere_exp),
}


def function_by_name(name: str) -> Callable[[np.ndarray], np.ndarray]:
    try:
        return TEST_FUNCTIONS[name][1]
    except KeyError as e:
        raise ConfigError(f"unknown test function '{name}'") from e


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    region: RegionKind
    kernel: KernelDescriptor
    f: str
    n: int = Field(ge=0)
    m: int = Field(ge=1)
    norm: Literal["L1", "L2"] = "L2"
    designs_dir: Optional[str] = None
    phase: float = 0.0

    @model_validator(mode="after")
    def _compatible(self) -> "ExperimentConfig":
        if self.f not in TEST_FUNCTIONS:
            raise ValueError(f"unknown test function '{self.f}'")
        if TEST_FUNCTIONS[self.f][0] is not self.region:
            raise ValueError(f"test function '{self.f}' does not live on the {self.region.value}")
        if self.kernel.region.kind is not self.region:
            raise ValueError(f"kernel {self.kernel.label} does not live on the {self.region.value}")
        if self.region is RegionKind.SPHERE and math.isqrt(self.m) ** 2 != self.m:
            raise ValueError(f"sphere rules are requested as m = (t+1)^2, got m={self.m}")
        return self

    @property
    def p(self) -> int:
        return 1 if self.norm == "L1" else 2

    @property
    def function(self) -> Callable[[np.ndarray], np.ndarray]:
        return function_by_name(self.f)


def resolve_rule(config: ExperimentConfig) -> Tuple[QuadratureRule, str]:
    """The rule a config asks for, with its provenance marker."""
    if config.region is RegionKind.INTERVAL:
        return gauss_legendre(config.m), "gauss_legendre"

    t = math.isqrt(config.m) - 1
    if config.designs_dir:
        path = design_path(config.designs_dir, t)
        if path.exists():
            return load_spherical_design(path, t), f"design_file:{path}"
        logger.warning("Design file missing, using product rule | path=%s | t=%s", path, t)
        return sphere_product_rule(t, config.phase), "sphere_product(fallback)"
    return sphere_product_rule(t, config.phase), "sphere_product"
