"""Audit of the two stability inequalities of efficient hyperinterpolation.

    L1 kernel:          ||S_nF||_2 <= V^(1/2) A_n / sqrt(1 - eta) * ||f||_inf
    continuous kernel:  ||S_nF||_2 <= V^(1/2) / sqrt(1 - eta) * ||K||_inf ||f||_inf

Both rest on ||S_nF||_2 <= A_n ||L_n f||_2, which holds for any rule and is
reported alongside as the coefficient margin.
"""

from __future__ import annotations

import math
from enum import Enum
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel

from app.core.config import Settings, get_settings
from app.core.errors import DomainError
from app.core.logging import get_logger
from app.services.connection import alpha_for
from app.services.hyperinterp import classical_hyperinterpolation, efficient_hyperinterpolation_for
from app.services.kernels import KernelDescriptor, Unit
from app.services.orthopoly import Region, RegionKind
from app.services.quadrature import QuadratureRule, estimate_mz_eta

from .configs import ExperimentConfig, resolve_rule

logger = get_logger(__name__)

Theorem = Literal["thm1", "thm3"]


class BoundStatus(str, Enum):
    PASS = "PASS"
    FAIL = "FAIL"
    SKIPPED = "SKIPPED"


class BoundReport(BaseModel):
    theorem: Theorem
    status: BoundStatus
    n: int
    m: int
    eta: float
    rank_deficient: bool = False
    A_n: Optional[float] = None
    lhs: Optional[float] = None
    rhs: Optional[float] = None
    margin: Optional[float] = None
    coefficient_margin: Optional[float] = None
    reason: str = ""


def fibonacci_sphere(count: int) -> np.ndarray:
    """Near-uniform points on S^2 from the golden-angle spiral."""
    k = np.arange(count) + 0.5
    z = 1.0 - 2.0 * k / count
    phi = math.pi * (1.0 + math.sqrt(5.0)) * k
    s = np.sqrt(1.0 - z * z)
    return np.column_stack([s * np.cos(phi), s * np.sin(phi), z])


def sup_norm(f, region: Region, samples: int = 100_000, extra_points=None) -> float:
    """max |f| over a dense sample of the region plus optional extra points."""
    if region.kind is RegionKind.INTERVAL:
        values = [np.abs(f(np.linspace(-1.0, 1.0, samples)))]
    else:
        values = [np.abs(f(fibonacci_sphere(samples)))]
    if extra_points is not None:
        values.append(np.abs(f(extra_points)))
    return float(max(np.max(v) for v in values))


def l1_stability_bound(A_n: float, eta: float, f_sup: float, volume: float) -> float:
    return math.sqrt(volume) * A_n / math.sqrt(1.0 - eta) * f_sup


def continuous_stability_bound(kernel_sup: float, eta: float, f_sup: float, volume: float) -> float:
    return math.sqrt(volume) / math.sqrt(1.0 - eta) * kernel_sup * f_sup


def audit_stability(
    kernel: KernelDescriptor,
    f,
    rule: QuadratureRule,
    n: int,
    theorem: Theorem = "thm1",
    settings: Optional[Settings] = None,
) -> BoundReport:
    settings = settings or get_settings()
    kernel_sup = kernel.sup_norm()
    if theorem == "thm3" and kernel_sup is None:
        raise DomainError(
            f"continuous stability bound needs a bounded kernel, got {kernel.label}",
            operation="check_stability_bound",
        )

    estimate = estimate_mz_eta(rule, n)
    base = {"theorem": theorem, "n": n, "m": rule.m, "eta": estimate.eta, "rank_deficient": estimate.rank_deficient}
    if estimate.rank_deficient or estimate.eta >= 1.0:
        logger.warning("Stability bound skipped | theorem=%s | n=%s | m=%s | eta=%s", theorem, n, rule.m, estimate.eta)
        return BoundReport(status=BoundStatus.SKIPPED, reason="eta >= 1, bound is vacuous", **base)

    A_n = alpha_for(kernel, n, settings.moment_tolerance).A_n
    efficient = efficient_hyperinterpolation_for(kernel, f, rule, n, settings.moment_tolerance)
    plain = classical_hyperinterpolation(Unit(on=rule.region.kind), f, rule, n)
    f_sup = sup_norm(f, rule.region, settings.sup_norm_samples, extra_points=rule.points)

    lhs = efficient.norm
    if theorem == "thm1":
        rhs = l1_stability_bound(A_n, estimate.eta, f_sup, rule.region.measure)
    else:
        rhs = continuous_stability_bound(kernel_sup, estimate.eta, f_sup, rule.region.measure)
    margin = rhs - lhs
    status = BoundStatus.PASS if margin >= -settings.bound_slack else BoundStatus.FAIL
    report = BoundReport(
        status=status,
        A_n=A_n,
        lhs=lhs,
        rhs=rhs,
        margin=margin,
        coefficient_margin=A_n * plain.norm - lhs,
        **base,
    )
    logger.info(
        "Stability audit | theorem=%s | kernel=%s | n=%s | m=%s | status=%s | margin=%s",
        theorem,
        kernel.label,
        n,
        rule.m,
        status.value,
        margin,
    )
    return report


def check_stability_bound(
    config: ExperimentConfig, theorem: Theorem = "thm1", settings: Optional[Settings] = None
) -> BoundReport:
    rule, _ = resolve_rule(config)
    return audit_stability(config.kernel, config.function, rule, config.n, theorem, settings)
