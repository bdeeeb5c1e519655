"""Connection coefficients and the kernel-weighted Gram matrix alpha.

alpha_{l'l} = int K p_l' p_l = sum_r c_r beta_r, where c_r are the coefficients
of p_l' p_l in the q_r family. Assembly never stores the d_n^2 x d_2n tensor of
c_r: on a rule exact for the triple products,
    sum_r c_r beta_r = sum_j w_j p_l'(x_j) p_l(x_j) h_j,   h_j = sum_r beta_r q~_r(x_j),
with q~_r the dual of q_r under that rule, so alpha = P diag(h) P^T.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np

from app.core.errors import DomainError, MomentsTooShortError
from app.core.logging import get_logger
from app.services.kernels import KernelDescriptor
from app.services.moments import MOMENT_TOLERANCE, MomentVector, compute_moments
from app.services.orthopoly import (
    BasisSet,
    Family,
    RegionKind,
    chebyshev_table,
    degree_order,
    legendre_normalized_table,
    orthonormal_basis,
    spherical_harmonic_table,
)
from app.services.quadrature import sphere_product_rule

logger = get_logger(__name__)

ASSEMBLY_CHUNK = 512


@dataclass(frozen=True)
class ProductExpansion:
    pair: Tuple[Tuple[int, int], Tuple[int, int]]
    basis: BasisSet
    coefficients: np.ndarray

    def evaluate(self, points) -> np.ndarray:
        return self.basis.evaluate_series(self.coefficients, points)


def _gauss_chebyshev_nodes(count: int) -> np.ndarray:
    j = np.arange(count)
    return np.cos((2 * j + 1) * np.pi / (2 * count))


def product_expansion_interval(ell_a: int, ell_b: int) -> ProductExpansion:
    """Chebyshev coefficients of P~_a P~_b by Gauss-Chebyshev quadrature with a+b+1 nodes."""
    if ell_a < 0 or ell_b < 0:
        raise DomainError(f"degrees must be >= 0, got ({ell_a}, {ell_b})", operation="product_expansion_interval")
    degree = ell_a + ell_b
    count = degree + 1
    x = _gauss_chebyshev_nodes(count)
    legendre = legendre_normalized_table(max(ell_a, ell_b), x)
    product = legendre[ell_a] * legendre[ell_b]
    c = (2.0 / count) * (chebyshev_table(degree, x) @ product)
    c[0] *= 0.5
    return ProductExpansion(((ell_a, 0), (ell_b, 0)), BasisSet(Family.CHEBYSHEV, degree), c)


def product_expansion_sphere(ell_a: int, k_a: int, ell_b: int, k_b: int) -> ProductExpansion:
    """c_{l'',k''} = int Y_a Y_b Y_{l'',k''} for l'' <= l_a + l_b, on the product rule of exactness 2(l_a + l_b)."""
    if abs(k_a) > ell_a or abs(k_b) > ell_b:
        raise DomainError(f"invalid harmonic indices ({ell_a},{k_a}), ({ell_b},{k_b})", operation="product_expansion_sphere")
    degree = ell_a + ell_b
    rule = sphere_product_rule(2 * degree)
    table = spherical_harmonic_table(degree, rule.points)
    a = table[ell_a * ell_a + ell_a + k_a]
    b = table[ell_b * ell_b + ell_b + k_b]
    c = table @ (rule.weights * a * b)
    return ProductExpansion(((ell_a, k_a), (ell_b, k_b)), BasisSet(Family.SPHERICAL_HARMONIC, degree), c)


def alpha_entry(moments: MomentVector, first: int, second: int) -> Union[float, complex]:
    """alpha at basis slots (first, second), summed term by term from the product expansion.

    Unfactorized and slow; used to cross-check :func:`assemble_alpha`.
    """
    if moments.kernel.region.kind is RegionKind.INTERVAL:
        expansion = product_expansion_interval(first, second)
    else:
        (ell_a, k_a), (ell_b, k_b) = (
            degree_order(Family.SPHERICAL_HARMONIC, slot + 1) for slot in (first, second)
        )
        expansion = product_expansion_sphere(ell_a, k_a, ell_b, k_b)
    if expansion.basis.max_degree > moments.max_degree:
        raise MomentsTooShortError(
            f"moments reach degree {moments.max_degree}, the product needs {expansion.basis.max_degree}",
            operation="alpha_entry",
        )
    return expansion.coefficients @ moments.values[: expansion.basis.dim]


@dataclass(frozen=True)
class AlphaMatrix:
    n: int
    basis: BasisSet
    entries: np.ndarray
    kernel: Optional[KernelDescriptor] = None

    def __post_init__(self) -> None:
        if self.entries.shape != (self.basis.dim, self.basis.dim):
            raise DomainError(f"alpha has shape {self.entries.shape}, expected d_n = {self.basis.dim}")
        self.entries.setflags(write=False)

    @property
    def A_n(self) -> float:
        return compute_A_n(self.entries)

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.entries)

    def write_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(["row", "col", "re", "im"])
            for (i, j), value in np.ndenumerate(self.entries):
                writer.writerow([i + 1, j + 1, repr(float(np.real(value))), repr(float(np.imag(value)))])
        return path


def compute_A_n(entries: np.ndarray) -> float:
    """Frobenius norm sqrt(sum |alpha|^2)."""
    return float(math.sqrt(np.sum(np.abs(entries) ** 2)))


def _interval_alpha(n: int, beta: np.ndarray) -> np.ndarray:
    count = 2 * n + 1
    x = _gauss_chebyshev_nodes(count)
    epsilon = np.full(2 * n + 1, 2.0 / math.pi)
    epsilon[0] = 1.0 / math.pi
    h = (math.pi / count) * ((epsilon * beta) @ chebyshev_table(2 * n, x))
    legendre = legendre_normalized_table(n, x)
    return (legendre * h) @ legendre.T


def _sphere_alpha(n: int, beta: np.ndarray) -> np.ndarray:
    rule = sphere_product_rule(4 * n)
    d_n = (n + 1) ** 2
    alpha = np.zeros((d_n, d_n), dtype=beta.dtype)
    for start in range(0, rule.m, ASSEMBLY_CHUNK):
        points = rule.points[start:start + ASSEMBLY_CHUNK]
        table = spherical_harmonic_table(2 * n, points)
        h = rule.weights[start:start + ASSEMBLY_CHUNK] * (beta @ table)
        low = table[:d_n]
        alpha += (low * h) @ low.T
    return alpha


def assemble_alpha(n: int, kernel: KernelDescriptor, moments: MomentVector) -> AlphaMatrix:
    """alpha_{l'l} = sum_r c_r beta_r for every basis pair of degree <= n."""
    if n < 0:
        raise DomainError(f"n must be >= 0, got {n}", operation="assemble_alpha")
    if moments.max_degree < 2 * n:
        raise MomentsTooShortError(
            f"moments reach degree {moments.max_degree}, assembly of n={n} needs {2 * n}",
            operation="assemble_alpha",
        )
    if moments.kernel.region != kernel.region:
        raise DomainError("moments and kernel live on different regions", operation="assemble_alpha")
    beta = np.asarray(moments.truncated(2 * n).values)
    if kernel.region.kind is RegionKind.INTERVAL:
        entries = _interval_alpha(n, beta)
    else:
        entries = _sphere_alpha(n, beta)
    entries = 0.5 * (entries + entries.T)
    basis = orthonormal_basis(kernel.region, n)
    logger.debug("Assembled alpha | kernel=%s | n=%s | d_n=%s", kernel.label, n, basis.dim)
    return AlphaMatrix(n=n, basis=basis, entries=entries, kernel=kernel)


@lru_cache(maxsize=64)
def alpha_for(kernel: KernelDescriptor, n: int, tolerance: float = MOMENT_TOLERANCE) -> AlphaMatrix:
    """Moments of degree 2n, then alpha; cached per (kernel, n, tolerance)."""
    return assemble_alpha(n, kernel, compute_moments(kernel, 2 * n, tolerance))
