"""Experiment harness: one ErrorRow per (kernel, f, n, rule) configuration.

Rows are independent and run through ``asyncio.to_thread`` under a semaphore,
``jobs`` at a time. Moment and alpha caches are shared between rows.
"""

from __future__ import annotations

import asyncio
import math
import time
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Optional, Sequence

from pydantic import BaseModel, Field

from app.core.config import Settings, get_settings
from app.core.errors import DomainError
from app.core.logging import get_logger
from app.services.connection import alpha_for
from app.services.hyperinterp import classical_hyperinterpolation, efficient_hyperinterpolation_for
from app.services.kernels import IntervalOscillatory, KernelDescriptor
from app.services.moments import compute_moments
from app.services.orthopoly import RegionKind
from app.services.quadrature import estimate_mz_eta

from .configs import NODE_AVOIDING_PHASE, ExperimentConfig, resolve_rule
from .reference import error_norm

logger = get_logger(__name__)

TABLE_COLUMNS = [
    "region",
    "kernel",
    "kappa_or_nu",
    "n",
    "m",
    "exactness",
    "eta",
    "A_n",
    "err_classical",
    "err_efficient",
    "norm",
    "rule_source",
    "seconds",
]

# run_history.csv only; table CSVs keep TABLE_COLUMNS
HISTORY_COLUMNS = ["moment_error", "log_constant_gap"]

SWEEP_FACTORS = (1.1, 1.2, 1.5)
INTERVAL_SWEEP_DEGREES = tuple(range(6, 121, 3))
SPHERE_SWEEP_DEGREES = tuple(range(2, 41))


class ErrorRow(BaseModel):
    config: ExperimentConfig
    m: int
    exactness: Optional[int]
    eta: float
    rank_deficient: bool = False
    A_n: float
    err_classical: float = Field(ge=0.0)
    err_efficient: float = Field(ge=0.0)
    rule_source: str
    seconds: float
    moment_error: float = 0.0
    log_constant_gap: Optional[float] = None

    def csv_row(self) -> Dict[str, Any]:
        return {
            "region": self.config.region.value,
            "kernel": self.config.kernel.label,
            "kappa_or_nu": self.config.kernel.parameter_label,
            "n": self.config.n,
            "m": self.m,
            "exactness": "" if self.exactness is None else self.exactness,
            "eta": repr(self.eta),
            "A_n": repr(self.A_n),
            "err_classical": repr(self.err_classical),
            "err_efficient": repr(self.err_efficient),
            "norm": self.config.norm,
            "rule_source": self.rule_source,
            "seconds": f"{self.seconds:.3f}",
        }

    def history_row(self) -> Dict[str, Any]:
        return {
            **self.csv_row(),
            "moment_error": repr(self.moment_error),
            "log_constant_gap": "" if self.log_constant_gap is None else repr(self.log_constant_gap),
        }


def run_row(config: ExperimentConfig, settings: Optional[Settings] = None) -> ErrorRow:
    """Classical and efficient hyperinterpolants of K f on the configured rule, with their errors."""
    settings = settings or get_settings()
    started = time.perf_counter()
    rule, source = resolve_rule(config)
    kernel, f, n = config.kernel, config.function, config.n

    tolerance = settings.moment_tolerance
    estimate = estimate_mz_eta(rule, n)
    moments = compute_moments(kernel, 2 * n, tolerance)
    classical = classical_hyperinterpolation(kernel, f, rule, n)
    efficient = efficient_hyperinterpolation_for(kernel, f, rule, n, tolerance)
    A_n = alpha_for(kernel, n, tolerance).A_n

    err_classical = error_norm(classical, kernel, f, config.p, settings=settings)
    err_efficient = error_norm(efficient, kernel, f, config.p, settings=settings)
    seconds = time.perf_counter() - started

    logger.info(
        "Experiment row | kernel=%s | param=%s | n=%s | m=%s | err_classical=%.4e | err_efficient=%.4e | seconds=%.2f",
        kernel.label,
        kernel.parameter_label,
        n,
        rule.m,
        err_classical,
        err_efficient,
        seconds,
    )
    return ErrorRow(
        config=config,
        m=rule.m,
        exactness=rule.exactness,
        eta=estimate.eta,
        rank_deficient=estimate.rank_deficient,
        A_n=A_n,
        err_classical=err_classical,
        err_efficient=err_efficient,
        rule_source=source,
        seconds=seconds,
        moment_error=moments.error_estimate,
        log_constant_gap=moments.constant_gap,
    )


async def run_configs(
    configs: Sequence[ExperimentConfig],
    jobs: Optional[int] = None,
    settings: Optional[Settings] = None,
) -> List[ErrorRow]:
    """Run every config with at most ``jobs`` rows in flight; row order follows ``configs``."""
    settings = settings or get_settings()
    jobs = max(1, jobs or settings.jobs)
    logger.info("Starting experiment batch | rows=%s | jobs=%s", len(configs), jobs)
    semaphore = asyncio.Semaphore(jobs)

    async def run_with_limit(config: ExperimentConfig) -> ErrorRow:
        async with semaphore:
            try:
                return await asyncio.to_thread(run_row, config, settings)
            except Exception as e:
                logger.exception(
                    "Failed experiment row | kernel=%s | n=%s | m=%s: %s",
                    config.kernel.label,
                    config.n,
                    config.m,
                    e,
                )
                raise

    results = await asyncio.gather(*(run_with_limit(c) for c in configs), return_exceptions=True)
    failures = [r for r in results if isinstance(r, BaseException)]
    logger.info(
        "Experiment batch completed | successful=%s | failed=%s",
        len(results) - len(failures),
        len(failures),
    )
    if failures:
        raise failures[0]
    return list(results)


def run_all(
    configs: Sequence[ExperimentConfig],
    jobs: Optional[int] = None,
    settings: Optional[Settings] = None,
) -> List[ErrorRow]:
    return asyncio.run(run_configs(configs, jobs, settings))


def _require_nonempty(name: str, values: Sequence[int], operation: str) -> None:
    if not values:
        raise DomainError(f"{name} is empty", operation=operation)


def sweep_rule_size(factor: float, n: int, region: RegionKind) -> int:
    """m = ceil(factor n / 2) points on the interval, (ceil(factor n) + 1)^2 on the sphere."""
    exact = Fraction(str(factor)) * n
    if region is RegionKind.INTERVAL:
        return max(1, math.ceil(exact / 2))
    return (math.ceil(exact) + 1) ** 2


DEFAULT_TABLE_FUNCTIONS = {RegionKind.INTERVAL: "runge_shifted", RegionKind.SPHERE: "sphere_cos"}


def table_configs(
    kernel: KernelDescriptor,
    n_list: Sequence[int],
    m_list: Sequence[int],
    *,
    f: Optional[str] = None,
    norm: str = "L2",
    designs_dir: Optional[str] = None,
    phase: float = 0.0,
) -> List[ExperimentConfig]:
    """Full (n, m) grid for ``kernel``, n-major."""
    _require_nonempty("n list", n_list, "table")
    _require_nonempty("m list", m_list, "table")
    region = kernel.region.kind
    return [
        ExperimentConfig(
            region=region,
            kernel=kernel,
            f=f or DEFAULT_TABLE_FUNCTIONS[region],
            n=n,
            m=m,
            norm=norm,
            designs_dir=designs_dir if region is RegionKind.SPHERE else None,
            phase=phase,
        )
        for n in n_list
        for m in m_list
    ]


def run_table(
    kernel: KernelDescriptor,
    n_list: Sequence[int],
    m_list: Sequence[int],
    *,
    f: Optional[str] = None,
    norm: str = "L2",
    designs_dir: Optional[str] = None,
    phase: float = 0.0,
    jobs: Optional[int] = None,
    settings: Optional[Settings] = None,
) -> List[ErrorRow]:
    settings = settings or get_settings()
    configs = table_configs(
        kernel, n_list, m_list, f=f, norm=norm, designs_dir=designs_dir or settings.designs_dir, phase=phase
    )
    return run_all(configs, jobs, settings)


def run_interval_table(
    kappa: float,
    n_list: Sequence[int],
    m_list: Sequence[int],
    *,
    f: str = "runge_shifted",
    jobs: Optional[int] = None,
    settings: Optional[Settings] = None,
) -> List[ErrorRow]:
    """L2 errors of both schemes for K = exp(i kappa x) over the full (n, m) grid."""
    kernel = IntervalOscillatory(kappa=kappa)
    return run_table(kernel, n_list, m_list, f=f, jobs=jobs, settings=settings)


def run_interval_singular_sweep(
    kernel: KernelDescriptor,
    factor: float = 1.1,
    n_values: Iterable[int] = INTERVAL_SWEEP_DEGREES,
    *,
    f: str = "gauss",
    jobs: Optional[int] = None,
    settings: Optional[Settings] = None,
) -> List[ErrorRow]:
    """L1 errors for n = 6, 9, ..., 120 with m = ceil(factor n / 2) Gauss-Legendre points."""
    if kernel.region.kind is not RegionKind.INTERVAL:
        raise DomainError(f"kernel {kernel.label} is not an interval kernel", operation="run_interval_singular_sweep")
    configs = [
        ExperimentConfig(
            region=RegionKind.INTERVAL,
            kernel=kernel,
            f=f,
            n=n,
            m=sweep_rule_size(factor, n, RegionKind.INTERVAL),
            norm="L1",
        )
        for n in n_values
    ]
    _require_nonempty("n range", configs, "run_interval_singular_sweep")
    return run_all(configs, jobs, settings)


def run_sphere_table(
    kernel: KernelDescriptor,
    n_list: Sequence[int],
    m_list: Sequence[int],
    *,
    designs_dir: Optional[str] = None,
    f: str = "sphere_cos",
    jobs: Optional[int] = None,
    settings: Optional[Settings] = None,
) -> List[ErrorRow]:
    """L2 errors over the (n, m) grid; each m = (t+1)^2 picks a t-design or the product rule."""
    if kernel.region.kind is not RegionKind.SPHERE:
        raise DomainError(f"kernel {kernel.label} is not a sphere kernel", operation="run_sphere_table")
    return run_table(kernel, n_list, m_list, f=f, designs_dir=designs_dir, jobs=jobs, settings=settings)


def run_sphere_singular_sweep(
    kernel: KernelDescriptor,
    factor: float = 1.1,
    n_values: Iterable[int] = SPHERE_SWEEP_DEGREES,
    *,
    designs_dir: Optional[str] = None,
    f: str = "sphere_exp",
    phase: float = NODE_AVOIDING_PHASE,
    jobs: Optional[int] = None,
    settings: Optional[Settings] = None,
) -> List[ErrorRow]:
    """L1 errors for n = 2..40 with m = (ceil(factor n) + 1)^2."""
    if kernel.region.kind is not RegionKind.SPHERE:
        raise DomainError(f"kernel {kernel.label} is not a sphere kernel", operation="run_sphere_singular_sweep")
    settings = settings or get_settings()
    designs_dir = designs_dir or settings.designs_dir
    configs = [
        ExperimentConfig(
            region=RegionKind.SPHERE,
            kernel=kernel,
            f=f,
            n=n,
            m=sweep_rule_size(factor, n, RegionKind.SPHERE),
            norm="L1",
            designs_dir=designs_dir,
            phase=phase,
        )
        for n in n_values
    ]
    _require_nonempty("n range", configs, "run_sphere_singular_sweep")
    return run_all(configs, jobs, settings)
