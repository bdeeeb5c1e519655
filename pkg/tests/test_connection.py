import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from app.core.errors import DomainError, MomentsTooShortError
from app.services.connection import (
    alpha_entry,
    alpha_for,
    assemble_alpha,
    compute_A_n,
    product_expansion_interval,
    product_expansion_sphere,
)
from app.services.kernels import (
    IntervalAlgebraicLeft,
    IntervalAlgebraicRight,
    IntervalChebyshevWeight,
    IntervalOscillatory,
    SphereAlgebraic,
    SphereDoubleAlgebraic,
    SphereHarmonic,
    SphereLog,
    Unit,
)
from app.services.moments import compute_moments, oracle_integral
from app.services.orthopoly import (
    INTERVAL,
    SPHERE,
    Family,
    RegionKind,
    degree_order,
    eval_legendre_normalized,
    orthonormal_basis,
    spherical_harmonic_table,
)
from app.services.quadrature import gauss_legendre, sphere_product_rule


def test_interval_product_expansion_reproduces_the_product():
    x = np.linspace(-1.0, 1.0, 33)
    expansion = product_expansion_interval(3, 4)
    assert expansion.basis.max_degree == 7
    expected = eval_legendre_normalized(3, x) * eval_legendre_normalized(4, x)
    assert_allclose(expansion.evaluate(x), expected, atol=1e-12)


def test_sphere_product_expansion_reproduces_the_product(sphere_samples):
    expansion = product_expansion_sphere(2, 1, 3, -2)
    table = spherical_harmonic_table(3, sphere_samples)
    expected = table[2 * 2 + 2 + 1] * table[3 * 3 + 3 - 2]
    assert_allclose(expansion.evaluate(sphere_samples), expected, atol=1e-12)
    with pytest.raises(DomainError):
        product_expansion_sphere(1, 2, 1, 0)


@pytest.mark.parametrize("region", [RegionKind.INTERVAL, RegionKind.SPHERE])
def test_unit_kernel_gives_identity(region):
    alpha = alpha_for(Unit(on=region), 8)
    dim = alpha.basis.dim
    assert_allclose(alpha.entries, np.eye(dim), atol=1e-12)
    assert alpha.A_n == pytest.approx(math.sqrt(dim), rel=1e-12)


def test_interval_alpha_matches_direct_quadrature():
    kernel = IntervalOscillatory(kappa=20.0)
    n = 10
    alpha = alpha_for(kernel, n)
    rule = gauss_legendre(120)
    table = orthonormal_basis(INTERVAL, n).evaluate(rule.points)
    direct = (table * (rule.weights * kernel.evaluate(rule.points))) @ table.T
    assert alpha.is_complex
    assert_allclose(alpha.entries, direct, atol=1e-12)
    assert_allclose(alpha.entries, alpha.entries.T, atol=0.0)


def test_sphere_alpha_matches_direct_quadrature():
    kernel = SphereHarmonic(lbar=3, kbar=-2)
    n = 4
    alpha = alpha_for(kernel, n)
    rule = sphere_product_rule(2 * n + 3)
    table = orthonormal_basis(SPHERE, n).evaluate(rule.points)
    direct = (table * (rule.weights * kernel.evaluate(rule.points))) @ table.T
    assert_allclose(alpha.entries, direct, atol=1e-12)


def test_singular_kernel_alpha_is_symmetric_and_finite():
    alpha = alpha_for(IntervalAlgebraicLeft(), 12)
    assert np.all(np.isfinite(alpha.entries))
    assert_allclose(alpha.entries, alpha.entries.T, atol=0.0)
    sphere = alpha_for(SphereLog(), 5)
    assert sphere.entries.shape == (36, 36)
    assert_allclose(sphere.entries, sphere.entries.T, atol=0.0)


def test_assembly_needs_moments_of_degree_2n():
    kernel = IntervalOscillatory(kappa=5.0)
    with pytest.raises(MomentsTooShortError):
        assemble_alpha(5, kernel, compute_moments(kernel, 8))
    with pytest.raises(DomainError):
        assemble_alpha(-1, kernel, compute_moments(kernel, 8))
    with pytest.raises(DomainError):
        assemble_alpha(1, SphereLog(), compute_moments(kernel, 8))


def test_frobenius_norm():
    assert compute_A_n(np.eye(3)) == pytest.approx(math.sqrt(3.0))
    assert compute_A_n(np.array([[3.0, 4j], [0.0, 0.0]])) == pytest.approx(5.0)


def test_alpha_csv(tmp_path):
    path = alpha_for(Unit(), 3).write_csv(tmp_path / "alpha.csv")
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "row,col,re,im"
    assert len(lines) == 17
    assert lines[1].startswith("1,1,")


@pytest.mark.parametrize(
    "kernel",
    [
        IntervalAlgebraicLeft(),
        IntervalAlgebraicRight(),
        IntervalChebyshevWeight(),
        SphereAlgebraic(),
        SphereLog(),
        SphereDoubleAlgebraic(),
    ],
    ids=lambda kernel: kernel.label,
)
def test_alpha_matches_oracle_at_degree_8(kernel):
    n = 8
    alpha = alpha_for(kernel, n)
    basis = alpha.basis
    last = basis.dim - 1
    for a, b in ((0, 0), (1, 3), (2, last), (last // 2, last - 1), (last, last)):

        def g(x, a=a, b=b):
            table = basis.evaluate(x)
            return table[a] * table[b]

        assert alpha.entries[a, b] == pytest.approx(oracle_integral(kernel, g, 2 * n), abs=1e-9), (a, b)


def test_chebyshev_weight_alpha_is_pi_times_constant_coefficient():
    n = 10
    alpha = alpha_for(IntervalChebyshevWeight(), n)
    expected = np.array(
        [[math.pi * product_expansion_interval(a, b).coefficients[0] for b in range(n + 1)] for a in range(n + 1)]
    )
    assert_allclose(alpha.entries, expected, atol=1e-12)


def test_sphere_product_expansion_selection_rule():
    expansion = product_expansion_sphere(3, 1, 4, -2)
    degrees = expansion.basis.degrees()
    odd = (3 + 4 + degrees) % 2 == 1
    assert np.max(np.abs(expansion.coefficients[odd])) < 1e-12
    assert np.max(np.abs(expansion.coefficients[degrees < 1])) < 1e-12


def test_harmonic_kernel_alpha_selection_rule():
    lbar, n = 3, 6
    alpha = alpha_for(SphereHarmonic(lbar=lbar, kbar=-2), n)
    degrees = np.array([degree_order(Family.SPHERICAL_HARMONIC, i + 1)[0] for i in range(alpha.basis.dim)])
    first, second = np.meshgrid(degrees, degrees, indexing="ij")
    vanishing = (np.abs(first - second) > lbar) | ((first + second + lbar) % 2 == 1)
    assert np.any(vanishing)
    assert np.max(np.abs(alpha.entries[vanishing])) < 1e-10


@pytest.mark.parametrize(
    "kernel",
    [IntervalOscillatory(kappa=20.0), IntervalAlgebraicRight(), SphereHarmonic(lbar=2, kbar=1), SphereDoubleAlgebraic()],
    ids=lambda kernel: kernel.label,
)
def test_term_by_term_alpha_entries_match_assembly(kernel):
    n = 4
    alpha = alpha_for(kernel, n)
    moments = compute_moments(kernel, 2 * n)
    for a, b in ((0, 0), (1, 2), (3, alpha.basis.dim - 1)):
        assert abs(alpha_entry(moments, a, b) - alpha.entries[a, b]) < 1e-12
    with pytest.raises(MomentsTooShortError):
        alpha_entry(compute_moments(kernel, 3), 0, alpha.basis.dim - 1)
