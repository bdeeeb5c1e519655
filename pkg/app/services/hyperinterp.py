"""Classical hyperinterpolation L_n, efficient hyperinterpolation S_n and the projection P_n.

    L_nF = sum_l <K f, p_l>_m p_l
    S_nF = sum_l (sum_j W_jl f(x_j)) p_l,   W_jl = w_j sum_l' p_l'(x_j) alpha_l'l

S_n touches K only through alpha, i.e. through the modified moments.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Callable, Dict, Iterator, Union

import numpy as np

from app.core.errors import DomainError, SampleMismatchError
from app.core.logging import get_logger
from app.services.connection import AlphaMatrix, alpha_for
from app.services.kernels import KernelDescriptor
from app.services.moments import MOMENT_TOLERANCE
from app.services.orthopoly import BasisSet, degree_order, orthonormal_basis
from app.services.quadrature import QuadratureRule, exact_rule

logger = get_logger(__name__)

SmoothFunction = Callable[[np.ndarray], np.ndarray]


class Provenance(str, Enum):
    CLASSICAL = "classical"
    EFFICIENT = "efficient"
    PROJECTION = "projection"


@dataclass(frozen=True)
class Expansion:
    basis: BasisSet
    coefficients: np.ndarray
    provenance: Provenance
    rank_deficient: bool = False

    def __post_init__(self) -> None:
        if self.coefficients.shape != (self.basis.dim,):
            raise DomainError(
                f"{self.coefficients.shape[0]} coefficients for a basis of dimension {self.basis.dim}"
            )
        self.coefficients.setflags(write=False)

    @property
    def n(self) -> int:
        return self.basis.max_degree

    @property
    def norm(self) -> float:
        """L2 norm, which is the coefficient 2-norm for an orthonormal basis."""
        return float(np.linalg.norm(self.coefficients))

    def evaluate(self, points) -> np.ndarray:
        return self.basis.evaluate_series(self.coefficients, points)

    def rows(self) -> Iterator[Dict[str, float]]:
        for index, value in enumerate(self.coefficients, start=1):
            degree, order = degree_order(self.basis.family, index)
            yield {
                "ell": index,
                "degree": degree,
                "order": order or 0,
                "re": float(np.real(value)),
                "im": float(np.imag(value)),
            }

    def write_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="", encoding="utf-8") as f:
            writer = csv.DictWriter(f, fieldnames=["ell", "degree", "order", "re", "im"])
            writer.writeheader()
            for row in self.rows():
                writer.writerow({**row, "re": repr(row["re"]), "im": repr(row["im"])})
        return path


@dataclass(frozen=True)
class EfficientWeights:
    rule: QuadratureRule
    n: int
    W: np.ndarray

    @property
    def rank_deficient(self) -> bool:
        return self.rule.m < self.W.shape[1]


def _check_region(kernel: KernelDescriptor, rule: QuadratureRule, operation: str) -> None:
    if kernel.region != rule.region:
        raise DomainError(
            f"kernel {kernel.label} lives on {kernel.region.kind.value}, rule on {rule.region.kind.value}",
            operation=operation,
        )


def _flag_rank(rule: QuadratureRule, basis: BasisSet, operation: str) -> bool:
    if rule.m < basis.dim:
        logger.warning(
            "Rank-deficient regime | op=%s | m=%s | d_n=%s", operation, rule.m, basis.dim
        )
        return True
    return False


def classical_hyperinterpolation(
    kernel: KernelDescriptor, f: SmoothFunction, rule: QuadratureRule, n: int
) -> Expansion:
    """Coefficients <K f, p_l>_m = sum_j w_j K(x_j) f(x_j) p_l(x_j)."""
    _check_region(kernel, rule, "classical_hyperinterpolation")
    kernel.check_nodes(rule.points)
    basis = orthonormal_basis(rule.region, n)
    rank_deficient = _flag_rank(rule, basis, "classical_hyperinterpolation")
    samples = kernel.evaluate(rule.points) * f(rule.points)
    coefficients = basis.evaluate(rule.points) @ (rule.weights * samples)
    return Expansion(basis, coefficients, Provenance.CLASSICAL, rank_deficient)


def efficient_weights(rule: QuadratureRule, n: int, alpha: AlphaMatrix) -> EfficientWeights:
    """W_jl = w_j sum_l' p_l'(x_j) alpha_l'l."""
    if alpha.n != n:
        raise DomainError(f"alpha has degree {alpha.n}, weights requested for n={n}", operation="efficient_weights")
    if alpha.basis.region != rule.region:
        raise DomainError("alpha and rule live on different regions", operation="efficient_weights")
    table = alpha.basis.evaluate(rule.points)
    W = (table.T * rule.weights[:, None]) @ alpha.entries
    return EfficientWeights(rule=rule, n=n, W=W)


def efficient_hyperinterpolation(samples, weights: EfficientWeights) -> Expansion:
    """Coefficient l is sum_j W_jl f(x_j); K is never evaluated."""
    samples = np.asarray(samples)
    if samples.shape != (weights.rule.m,):
        raise SampleMismatchError(
            f"{samples.shape[0] if samples.ndim else 0} samples for {weights.rule.m} rule points",
            operation="efficient_hyperinterpolation",
        )
    basis = orthonormal_basis(weights.rule.region, weights.n)
    rank_deficient = _flag_rank(weights.rule, basis, "efficient_hyperinterpolation")
    coefficients = weights.W.T @ samples
    return Expansion(basis, coefficients, Provenance.EFFICIENT, rank_deficient)


def efficient_hyperinterpolation_for(
    kernel: KernelDescriptor,
    f: SmoothFunction,
    rule: QuadratureRule,
    n: int,
    tolerance: float = MOMENT_TOLERANCE,
) -> Expansion:
    """Moments, alpha, W and S_nF in one call."""
    _check_region(kernel, rule, "efficient_hyperinterpolation")
    weights = efficient_weights(rule, n, alpha_for(kernel, n, tolerance))
    return efficient_hyperinterpolation(f(rule.points), weights)


def orthogonal_projection_reference(
    kernel: KernelDescriptor, f: SmoothFunction, n: int, oversample: float = 2.0
) -> Expansion:
    """Near-exact P_n(K f) through the moment route.

    f is replaced by its exact projection chi onto P_N, N = ceil(oversample * n),
    and P_n(K chi) is read off alpha of degree N. For polynomial f of degree <= N
    the result is exact up to roundoff.
    """
    if oversample < 1.0:
        raise DomainError(f"oversample must be >= 1, got {oversample}", operation="orthogonal_projection_reference")
    N = max(n, math.ceil(oversample * n))
    rule = exact_rule(kernel.region, 2 * N)
    fine_basis = orthonormal_basis(kernel.region, N)
    chi = fine_basis.evaluate(rule.points) @ (rule.weights * f(rule.points))
    alpha = alpha_for(kernel, N)
    basis = orthonormal_basis(kernel.region, n)
    coefficients = (alpha.entries @ chi)[: basis.dim]
    return Expansion(basis, np.array(coefficients), Provenance.PROJECTION)


def evaluate_expansion(expansion: Expansion, points) -> np.ndarray:
    return expansion.evaluate(points)

