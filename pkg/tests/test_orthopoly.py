import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from app.core.errors import DomainError, IndexRangeError
from app.services.orthopoly import (
    INTERVAL,
    SPHERE,
    BasisSet,
    Family,
    SphericalPoint,
    chebyshev_table,
    degree_order,
    eval_legendre_normalized,
    eval_spherical_harmonic,
    flat_index,
    legendre_normalized_table,
    orthonormal_basis,
    spherical_harmonic_table,
)
from app.services.quadrature import gauss_legendre, gram_matrix, sphere_product_rule

C1 = math.sqrt(3.0 / (4.0 * math.pi))


def test_normalized_legendre_is_orthonormal():
    rule = gauss_legendre(40)
    gram = gram_matrix(rule, orthonormal_basis(INTERVAL, 30))
    assert_allclose(gram, np.eye(31), atol=1e-12)


def test_normalized_legendre_low_degrees():
    assert eval_legendre_normalized(0, 0.3) == pytest.approx(math.sqrt(0.5))
    assert eval_legendre_normalized(1, 0.3) == pytest.approx(math.sqrt(1.5) * 0.3)
    assert eval_legendre_normalized(2, 1.0) == pytest.approx(math.sqrt(2.5))


def test_chebyshev_table_matches_trigonometric_form():
    x = np.linspace(-1.0, 1.0, 41)
    table = chebyshev_table(25, x)
    expected = np.cos(np.arange(26)[:, None] * np.arccos(x)[None, :])
    assert_allclose(table, expected, atol=1e-12)


def test_point_outside_interval_is_rejected():
    with pytest.raises(DomainError):
        legendre_normalized_table(3, [0.0, 1.5])


def test_low_degree_harmonics(sphere_samples):
    x, y, z = sphere_samples.T
    table = spherical_harmonic_table(1, sphere_samples)
    assert_allclose(table[0], 1.0 / math.sqrt(4.0 * math.pi))
    assert_allclose(table[1], C1 * y, atol=1e-14)
    assert_allclose(table[2], C1 * z, atol=1e-14)
    assert_allclose(table[3], C1 * x, atol=1e-14)


def test_harmonic_at_a_single_point_is_a_float():
    value = eval_spherical_harmonic(1, 0, SphericalPoint(0.0, 0.0, 1.0))
    assert isinstance(value, float)
    assert value == pytest.approx(C1)


@pytest.mark.parametrize("ell", [0, 3, 10, 25])
def test_addition_theorem(ell, sphere_samples):
    table = spherical_harmonic_table(ell, sphere_samples)
    block = table[ell * ell:(ell + 1) ** 2]
    assert_allclose(np.sum(block**2, axis=0), (2 * ell + 1) / (4.0 * math.pi), rtol=1e-12)


def test_harmonics_orthonormal_on_product_rule():
    n = 12
    gram = gram_matrix(sphere_product_rule(2 * n), orthonormal_basis(SPHERE, n))
    assert_allclose(gram, np.eye((n + 1) ** 2), atol=1e-12)


def test_points_off_sphere_are_rejected():
    with pytest.raises(DomainError):
        spherical_harmonic_table(2, [[0.0, 0.0, 1.1]])
    with pytest.raises(DomainError):
        SphericalPoint(1.0, 1.0, 0.0)


def test_normalized_point_lands_on_sphere():
    p = SphericalPoint.normalized(1.0, 1.0, 0.0)
    assert p.x == pytest.approx(math.sqrt(0.5))
    assert (-p).x == pytest.approx(-math.sqrt(0.5))


def test_invalid_harmonic_index():
    with pytest.raises(IndexRangeError):
        eval_spherical_harmonic(2, 3, SphericalPoint(0.0, 0.0, 1.0))


def test_flat_index_layout():
    assert flat_index(Family.LEGENDRE_NORMALIZED, 0) == 1
    assert flat_index(Family.SPHERICAL_HARMONIC, 0, 0) == 1
    assert flat_index(Family.SPHERICAL_HARMONIC, 2, -2) == 5
    assert flat_index(Family.SPHERICAL_HARMONIC, 2, 2) == 9
    assert degree_order(Family.SPHERICAL_HARMONIC, 5) == (2, -2)
    assert degree_order(Family.CHEBYSHEV, 7) == (6, None)
    with pytest.raises(IndexRangeError):
        flat_index(Family.SPHERICAL_HARMONIC, 1, 2)
    with pytest.raises(IndexRangeError):
        degree_order(Family.SPHERICAL_HARMONIC, 0)


def test_basis_dimensions_and_degrees():
    assert BasisSet(Family.LEGENDRE_NORMALIZED, 7).dim == 8
    sphere = BasisSet(Family.SPHERICAL_HARMONIC, 3)
    assert sphere.dim == 16
    assert list(sphere.degrees()) == [0] + [1] * 3 + [2] * 5 + [3] * 7


def test_chunked_series_matches_direct_evaluation(rng, sphere_samples):
    basis = orthonormal_basis(SPHERE, 6)
    coefficients = rng.standard_normal(basis.dim) + 1j * rng.standard_normal(basis.dim)
    direct = coefficients @ basis.evaluate(sphere_samples)
    assert_allclose(basis.evaluate_series(coefficients, sphere_samples, chunk=7), direct, atol=1e-13)


def test_series_with_wrong_length_is_rejected():
    basis = orthonormal_basis(INTERVAL, 4)
    with pytest.raises(IndexRangeError):
        basis.evaluate_series(np.ones(3), [0.0])
