import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from app.core.errors import DesignFileError, DomainError, ExactnessError
from app.services.orthopoly import INTERVAL, SPHERE
from app.services.quadrature import (
    QuadratureRule,
    design_path,
    estimate_mz_eta,
    exact_rule,
    gauss_legendre,
    gauss_legendre_on,
    load_spherical_design,
    rayleigh_lower_bound,
    read_design_points,
    sphere_product_rule,
    verify_exactness,
)
from tests.conftest import OCTAHEDRON, TETRAHEDRON, design_text


@pytest.mark.parametrize("m", [1, 2, 5, 40, 70, 200])
def test_gauss_legendre_is_exact_to_degree_2m_minus_1(m):
    rule = gauss_legendre(m)
    assert rule.m == m
    assert rule.exactness == 2 * m - 1
    assert math.fsum(rule.weights) == pytest.approx(2.0, abs=1e-12)
    assert verify_exactness(rule, 2 * m - 1) < 1e-12


def test_gauss_legendre_nodes_are_symmetric_and_sorted():
    rule = gauss_legendre(9)
    assert np.all(np.diff(rule.points) > 0)
    assert_allclose(rule.points, -rule.points[::-1], atol=0.0)
    assert rule.points[4] == 0.0


def test_gauss_legendre_is_not_exact_beyond_its_degree():
    assert verify_exactness(gauss_legendre(5), 10) > 1e-3


def test_gauss_legendre_rejects_empty_rule():
    with pytest.raises(DomainError):
        gauss_legendre(0)


def test_mapped_gauss_legendre_integrates_on_subinterval():
    nodes, weights = gauss_legendre_on(0.0, 2.0, 6)
    assert weights.sum() == pytest.approx(2.0)
    assert weights @ nodes**5 == pytest.approx(64.0 / 6.0)


@pytest.mark.parametrize("t,phase", [(0, 0.0), (7, 0.0), (20, 0.0), (20, 0.5)])
def test_sphere_product_rule_exactness(t, phase):
    rule = sphere_product_rule(t, phase)
    assert rule.m == ((t + 2) // 2) * (t + 1)
    assert rule.exactness == t
    assert rule.weights.sum() == pytest.approx(4.0 * math.pi)
    assert verify_exactness(rule, t) < 1e-12


def test_exact_rule_is_the_cheapest_gauss_rule():
    assert exact_rule(INTERVAL, 9).m == 5
    assert exact_rule(INTERVAL, 10).m == 6
    assert exact_rule(SPHERE, 6).exactness == 6


def test_rule_validation():
    with pytest.raises(DomainError):
        QuadratureRule(INTERVAL, np.array([-0.5, 0.5]), np.array([2.5, -0.5]), exactness=None)
    with pytest.raises(DomainError):
        QuadratureRule(INTERVAL, np.array([-0.5, 0.5]), np.array([1.0, 0.5]), exactness=None)
    with pytest.raises(DomainError):
        QuadratureRule(INTERVAL, np.array([-0.5, 0.5]), np.array([2.0]), exactness=None)


def test_rules_are_read_only():
    rule = gauss_legendre(4)
    with pytest.raises(ValueError):
        rule.points[0] = 0.0


def test_mz_eta_vanishes_for_exact_rules():
    n = 30
    estimate = estimate_mz_eta(gauss_legendre(n + 1), n)
    assert not estimate.rank_deficient
    assert estimate.eta < 1e-10


def test_mz_eta_flags_rank_deficiency():
    estimate = estimate_mz_eta(gauss_legendre(5), 10)
    assert estimate.rank_deficient
    assert estimate.eta == 1.0


def test_rayleigh_quotients_stay_below_eta():
    rule = sphere_product_rule(16)
    n = 10
    assert rule.m >= (n + 1) ** 2
    eta = estimate_mz_eta(rule, n).eta
    lower = rayleigh_lower_bound(rule, n, samples=2_000)
    assert eta > 0.0
    assert 0.0 < lower <= eta + 1e-12


def test_design_path_naming(tmp_path):
    assert design_path(tmp_path, 3).name == "sd_t3_m16.txt"


def test_spherical_design_loads_and_verifies(tmp_path):
    path = tmp_path / "tetra.txt"
    path.write_text(design_text(TETRAHEDRON) + "\n", encoding="utf-8")
    rule = load_spherical_design(path, 2)
    assert rule.m == 4
    assert rule.exactness == 2
    assert_allclose(rule.weights, math.pi)


def test_design_claiming_too_much_strength_fails(tmp_path):
    path = tmp_path / "tetra.txt"
    path.write_text(design_text(TETRAHEDRON), encoding="utf-8")
    with pytest.raises(ExactnessError) as info:
        load_spherical_design(path, 3)
    assert info.value.defect > 1e-8


def test_octahedron_is_a_three_design(tmp_path):
    path = tmp_path / "octa.txt"
    path.write_text(design_text(OCTAHEDRON), encoding="utf-8")
    assert load_spherical_design(path, 3).m == 6


def test_design_file_errors(tmp_path):
    with pytest.raises(DesignFileError):
        read_design_points(tmp_path / "missing.txt")

    malformed = tmp_path / "malformed.txt"
    malformed.write_text("1.0 0.0\n", encoding="utf-8")
    with pytest.raises(DesignFileError):
        read_design_points(malformed)

    garbage = tmp_path / "garbage.txt"
    garbage.write_text("1.0 zero 0.0\n", encoding="utf-8")
    with pytest.raises(DesignFileError):
        read_design_points(garbage)

    empty = tmp_path / "empty.txt"
    empty.write_text("# only a comment\n\n", encoding="utf-8")
    with pytest.raises(DesignFileError):
        read_design_points(empty)

    off = tmp_path / "off.txt"
    off.write_text(design_text(OCTAHEDRON * 1.1), encoding="utf-8")
    with pytest.raises(DesignFileError):
        load_spherical_design(off, 1)


def test_design_file_with_non_finite_points_is_rejected(tmp_path):
    path = tmp_path / "nan.txt"
    path.write_text("nan nan nan\n" * 36, encoding="utf-8")
    with pytest.raises(DesignFileError):
        load_spherical_design(path, 5)

    infinite = tmp_path / "inf.txt"
    infinite.write_text(design_text(OCTAHEDRON) + "inf 0.0 0.0\n", encoding="utf-8")
    with pytest.raises(DesignFileError):
        read_design_points(infinite)


def test_design_file_that_is_not_utf8_is_rejected(tmp_path):
    path = tmp_path / "binary.txt"
    path.write_bytes(b"\xff\xfe 1 0 0\n")
    with pytest.raises(DesignFileError):
        read_design_points(path)


def test_mz_eta_never_decreases_as_the_polynomial_space_grows():
    m = 60
    midpoints = -1.0 + (2.0 * np.arange(1, m + 1) - 1.0) / m
    rule = QuadratureRule(INTERVAL, midpoints, np.full(m, 2.0 / m), exactness=1)
    etas = [estimate_mz_eta(rule, n).eta for n in range(5, 41)]
    assert etas[-1] > etas[0]
    assert all(later >= earlier - 1e-12 for earlier, later in zip(etas, etas[1:]))
