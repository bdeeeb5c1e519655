"""Invariant suite at small sizes, shared by ``hyperapprox selftest`` and the test suite."""

from __future__ import annotations

import math
from typing import Callable, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel

from app.core.config import Settings, get_settings
from app.core.logging import get_logger
from app.services.connection import alpha_entry, alpha_for
from app.services.hyperinterp import (
    classical_hyperinterpolation,
    efficient_hyperinterpolation_for,
    orthogonal_projection_reference,
)
from app.services.kernels import (
    IntervalAlgebraicLeft,
    IntervalAlgebraicRight,
    IntervalChebyshevWeight,
    IntervalOscillatory,
    KernelDescriptor,
    SphereAlgebraic,
    SphereDoubleAlgebraic,
    SphereHarmonic,
    SphereLog,
    Unit,
)
from app.services.moments import compute_moments, oracle_integral, oracle_moment
from app.services.orthopoly import INTERVAL, SPHERE, RegionKind, orthonormal_basis
from app.services.quadrature import (
    estimate_mz_eta,
    gauss_legendre,
    gram_matrix,
    rayleigh_lower_bound,
    sphere_product_rule,
    verify_exactness,
)

from .bounds import BoundStatus, audit_stability
from .configs import function_by_name
from .reference import reference_rule

logger = get_logger(__name__)

SELFTEST_KERNELS: Tuple[KernelDescriptor, ...] = (
    IntervalOscillatory(kappa=20.0),
    IntervalAlgebraicLeft(),
    IntervalAlgebraicRight(),
    IntervalChebyshevWeight(),
    Unit(on=RegionKind.INTERVAL),
    SphereHarmonic(lbar=3, kbar=-2),
    SphereAlgebraic(),
    SphereLog(),
    SphereDoubleAlgebraic(),
    Unit(on=RegionKind.SPHERE),
)
INTERVAL_MOMENT_INDICES = (0, 1, 2, 5, 17, 30)
SPHERE_MOMENT_INDICES = (0, 2, 3, 8, 20, 48)
MINIMALITY_STEPS = (1e-3, -1e-3, 1e-1, -1e-1)


class SelftestResult(BaseModel):
    name: str
    passed: bool
    value: Optional[float] = None
    threshold: Optional[float] = None
    detail: str = ""


def _measured(name: str, value: float, threshold: float) -> SelftestResult:
    return SelftestResult(name=name, passed=bool(value <= threshold), value=value, threshold=threshold)


def _random_polynomial(region, degree: int, rng: np.random.Generator) -> Callable[[np.ndarray], np.ndarray]:
    basis = orthonormal_basis(region, degree)
    coefficients = rng.standard_normal(basis.dim)
    return lambda x: basis.evaluate_series(coefficients, x)


def check_orthonormality() -> List[SelftestResult]:
    interval = orthonormal_basis(INTERVAL, 20)
    sphere = orthonormal_basis(SPHERE, 10)
    return [
        _measured(
            "orthonormality.legendre",
            float(np.max(np.abs(gram_matrix(gauss_legendre(30), interval) - np.eye(interval.dim)))),
            1e-12,
        ),
        _measured(
            "orthonormality.harmonics",
            float(np.max(np.abs(gram_matrix(sphere_product_rule(20), sphere) - np.eye(sphere.dim)))),
            1e-9,
        ),
    ]


def check_quadrature() -> List[SelftestResult]:
    results = [
        _measured(f"gauss_legendre.exactness.m{m}", verify_exactness(gauss_legendre(m), 2 * m - 1), 1e-12)
        for m in (5, 40, 200)
    ]
    results.append(_measured("sphere_product.exactness.t46", verify_exactness(sphere_product_rule(46), 46), 1e-9))
    results.append(_measured("mz.eta.exact_rule", estimate_mz_eta(gauss_legendre(21), 20).eta, 1e-10))

    rule = sphere_product_rule(16)
    eta = estimate_mz_eta(rule, 10).eta
    lower = rayleigh_lower_bound(rule, 10, samples=2000)
    results.append(
        SelftestResult(
            name="mz.rayleigh_below_spectral",
            passed=bool(lower <= eta + 1e-12),
            value=lower,
            threshold=eta,
        )
    )
    return results


def check_moments(settings: Optional[Settings] = None) -> List[SelftestResult]:
    """Every moment path against the adaptive oracle."""
    budget = (settings or get_settings()).oracle_max_evaluations
    results = []
    for kernel in SELFTEST_KERNELS:
        if kernel.region.kind is RegionKind.INTERVAL:
            indices, degree = INTERVAL_MOMENT_INDICES, max(INTERVAL_MOMENT_INDICES)
        else:
            indices, degree = SPHERE_MOMENT_INDICES, 6
        values = compute_moments(kernel, degree).values
        gap = max(abs(values[i] - oracle_moment(kernel, i, max_evaluations=budget)) for i in indices)
        results.append(_measured(f"moments.oracle.{kernel.label}", float(gap), 1e-8))
    return results


def check_alpha() -> List[SelftestResult]:
    results = []
    for region in (RegionKind.INTERVAL, RegionKind.SPHERE):
        entries = alpha_for(Unit(on=region), 6).entries
        results.append(
            _measured(f"alpha.unit_identity.{region.value}", float(np.max(np.abs(entries - np.eye(len(entries))))), 1e-12)
        )
    n = 4
    for kernel in SELFTEST_KERNELS:
        entries = alpha_for(kernel, n).entries
        results.append(_measured(f"alpha.symmetry.{kernel.label}", float(np.max(np.abs(entries - entries.T))), 0.0))
        moments = compute_moments(kernel, 2 * n)
        last = len(entries) - 1
        gap = max(abs(entries[a, b] - alpha_entry(moments, a, b)) for a, b in ((0, 0), (1, 2), (0, last), (last, last)))
        results.append(_measured(f"alpha.term_by_term.{kernel.label}", float(gap), 1e-10))
    return results


def check_unit_collapse() -> List[SelftestResult]:
    """K = 1 makes S_n and L_n coincide, with or without exactness 2n."""
    results = []
    cases = (
        (RegionKind.INTERVAL, function_by_name("runge_shifted"), gauss_legendre(8), 10),
        (RegionKind.SPHERE, function_by_name("sphere_cos"), sphere_product_rule(15), 10),
    )
    for region, f, rule, n in cases:
        unit = Unit(on=region)
        classical = classical_hyperinterpolation(unit, f, rule, n)
        efficient = efficient_hyperinterpolation_for(unit, f, rule, n)
        gap = float(np.max(np.abs(classical.coefficients - efficient.coefficients)))
        results.append(_measured(f"unit_collapse.{region.value}", gap, 1e-12))
    return results


def check_polynomial_reproduction(seed: int = 0) -> List[SelftestResult]:
    rng = np.random.default_rng(seed)
    chi = _random_polynomial(INTERVAL, 12, rng)
    basis_rule = gauss_legendre(13)
    reproduced = classical_hyperinterpolation(Unit(), chi, basis_rule, 12)
    x = np.linspace(-1.0, 1.0, 101)
    gap = float(np.max(np.abs(reproduced.evaluate(x) - chi(x))))
    return [_measured("polynomial_reproduction.interval", gap, 1e-11)]


def _identity_rule(region_kind: RegionKind):
    return gauss_legendre(10) if region_kind is RegionKind.INTERVAL else sphere_product_rule(15)


def check_projection_identity(samples: int = 20, seed: int = 1) -> List[SelftestResult]:
    """S_n(K chi) = P_n(K chi) for chi of degree n' when the rule has exactness n + n'."""
    rng = np.random.default_rng(seed)
    n = 10
    results = []
    for kernel in SELFTEST_KERNELS:
        rule = _identity_rule(kernel.region.kind)
        n_prime = rule.exactness - n
        worst = 0.0
        for _ in range(samples):
            chi = _random_polynomial(kernel.region, n_prime, rng)
            efficient = efficient_hyperinterpolation_for(kernel, chi, rule, n)
            projected = orthogonal_projection_reference(kernel, chi, n)
            worst = max(worst, float(np.max(np.abs(efficient.coefficients - projected.coefficients))))
        results.append(_measured(f"projection_identity.{kernel.label}", worst, 1e-8))
    return results


def check_orthogonality() -> List[SelftestResult]:
    """<K L_n f - S_n F, p_l> = 0, with the inner product from the adaptive oracle."""
    results = []
    n = 6
    for kernel in SELFTEST_KERNELS:
        if kernel.region.kind is RegionKind.INTERVAL:
            f, rule = function_by_name("gauss"), gauss_legendre(5)
        else:
            f, rule = function_by_name("sphere_exp"), sphere_product_rule(9, 0.5)
        plain = classical_hyperinterpolation(Unit(on=kernel.region.kind), f, rule, n)
        efficient = efficient_hyperinterpolation_for(kernel, f, rule, n)
        basis = plain.basis
        worst = 0.0
        for slot in (0, 1, basis.dim - 1):
            unit_vector = np.zeros(basis.dim)
            unit_vector[slot] = 1.0

            def g(x, e=unit_vector):
                return plain.evaluate(x) * basis.evaluate_series(e, x)

            inner = oracle_integral(kernel, g, 2 * n)
            worst = max(worst, abs(inner - efficient.coefficients[slot]))
        results.append(_measured(f"orthogonality.{kernel.label}", float(worst), 1e-8))
    return results


def check_minimality(perturbations: int = 100, seed: int = 2) -> List[SelftestResult]:
    """S_nF minimizes ||K L_n f - chi||_2 over chi in P_n, for every step size in MINIMALITY_STEPS."""
    rng = np.random.default_rng(seed)
    results = []
    for kernel in SELFTEST_KERNELS:
        if isinstance(kernel, IntervalChebyshevWeight):
            # K^2 is not integrable, so the L2 residual is infinite
            continue
        if kernel.region.kind is RegionKind.INTERVAL:
            f, rule, n = function_by_name("gauss"), gauss_legendre(8), 10
        else:
            f, rule, n = function_by_name("sphere_exp"), sphere_product_rule(9, 0.5), 6
        plain = classical_hyperinterpolation(Unit(on=kernel.region.kind), f, rule, n)
        efficient = efficient_hyperinterpolation_for(kernel, f, rule, n)
        reference = reference_rule(kernel, n)
        residual = kernel.evaluate(reference.points) * plain.evaluate(reference.points) - efficient.evaluate(reference.points)
        best = float(reference.integrate(np.abs(residual) ** 2))
        table = efficient.basis.evaluate(reference.points)
        deltas = rng.standard_normal((perturbations, efficient.basis.dim)) @ table
        worst = math.inf
        for step in MINIMALITY_STEPS:
            perturbed = (np.abs(residual[None, :] - step * deltas) ** 2) @ reference.weights
            worst = min(worst, float(np.min(perturbed)) - best)
        results.append(
            SelftestResult(
                name=f"minimality.{kernel.label}",
                passed=bool(worst >= -1e-12),
                value=worst,
                threshold=-1e-12,
            )
        )
    return results


def check_stability(settings: Optional[Settings] = None) -> List[SelftestResult]:
    results = []
    cases = (
        (IntervalOscillatory(kappa=20.0), function_by_name("runge_shifted"), gauss_legendre(20), 12, "thm1"),
        (IntervalOscillatory(kappa=20.0), function_by_name("runge_shifted"), gauss_legendre(20), 12, "thm3"),
        (SphereHarmonic(lbar=3, kbar=1), function_by_name("sphere_cos"), sphere_product_rule(14), 8, "thm3"),
        (SphereLog(), function_by_name("sphere_exp"), sphere_product_rule(14, 0.5), 8, "thm1"),
    )
    for kernel, f, rule, n, theorem in cases:
        report = audit_stability(kernel, f, rule, n, theorem, settings)
        results.append(
            SelftestResult(
                name=f"stability.{theorem}.{kernel.label}",
                passed=report.status is BoundStatus.PASS,
                value=report.margin,
                threshold=0.0,
                detail=report.status.value,
            )
        )
    return results


CHECKS = (
    check_orthonormality,
    check_quadrature,
    check_moments,
    check_alpha,
    check_unit_collapse,
    check_polynomial_reproduction,
    check_projection_identity,
    check_orthogonality,
    check_minimality,
    check_stability,
)
SETTINGS_CHECKS = (check_moments, check_stability)


def run_selftest(settings: Optional[Settings] = None) -> List[SelftestResult]:
    """Run every check; a check that raises is reported as one failed result."""
    settings = settings or get_settings()
    results: List[SelftestResult] = []
    for check in CHECKS:
        try:
            if check in SETTINGS_CHECKS:
                results.extend(check(settings))
            else:
                results.extend(check())
        except Exception as e:
            logger.exception("Selftest check failed | check=%s: %s", check.__name__, e)
            results.append(SelftestResult(name=check.__name__, passed=False, detail=str(e)))

    failed = [r for r in results if not r.passed]
    for result in failed:
        logger.warning("Selftest failure | name=%s | value=%s | threshold=%s | detail=%s",
                       result.name, result.value, result.threshold, result.detail)
    logger.info("Selftest completed | checks=%s | failed=%s", len(results), len(failed))
    return results
