"""Moments, weighted norms and the admissible weight exponents."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConstraintError, DomainError
from .grid import DensityField, quad
from .kernels import KernelSpec


@dataclass(frozen=True)
class SpaceParams:
    """Weight exponents of the norm ``int (z^-sigma1 + z^sigma2) |g| dz``."""

    sigma1: float = 0.5
    sigma2: float = 1.5

    def __post_init__(self):
        if not 0.5 <= self.sigma1 < 1.0:
            raise DomainError(f"sigma1 must lie in [1/2, 1), got {self.sigma1}")
        if not 1.0 < self.sigma2 <= 2.0:
            raise DomainError(f"sigma2 must lie in (1, 2], got {self.sigma2}")

    def contains(self, r: float) -> bool:
        return -self.sigma1 <= r <= self.sigma2


def admissibility_problems(spec: KernelSpec, sigma1: float, sigma2: float) -> list[str]:
    """Violations of ``1 < max(1+a, 1+a') <= sigma2 <= 2`` and ``1/2 <= max(1-a, 1-a') <= sigma1 < 1``."""
    a, b = spec.alpha, spec.alpha_prime
    problems = []
    if not 1.0 < sigma2 <= 2.0:
        problems.append(f"sigma2 = {sigma2} must lie in (1, 2]")
    if not 0.5 <= sigma1 < 1.0:
        problems.append(f"sigma1 = {sigma1} must lie in [1/2, 1)")
    lo2 = max(1.0 + a, 1.0 + b)
    if sigma2 < lo2:
        problems.append(
            f"sigma2 = {sigma2} < max(1+alpha, 1+alpha') = {lo2} violates the "
            "admissibility restriction 1 < max{1+alpha, 1+alpha'} <= sigma2 <= 2"
        )
    lo1 = max(1.0 - a, 1.0 - b)
    if sigma1 < lo1:
        problems.append(
            f"sigma1 = {sigma1} < max(1-alpha, 1-alpha') = {lo1} violates the "
            "admissibility restriction 1/2 <= max{(1-alpha), (1-alpha')} <= sigma1 < 1"
        )
    if lo1 >= 1.0:
        problems.append("kernel exponents leave no admissible sigma1 (need alpha, alpha' > 0)")
    return problems


def check_admissible(spec: KernelSpec, params: SpaceParams) -> None:
    problems = admissibility_problems(spec, params.sigma1, params.sigma2)
    if problems:
        raise ConstraintError("; ".join(problems))


def moment(g: DensityField, r: float) -> float:
    """``int z^r g dz`` over ``[z_min, n]`` by the midpoint rule."""
    x = g.mesh.centers
    return quad(x**r * g.values, g.mesh)


def weighted_norm(g: DensityField, params: SpaceParams) -> float:
    """Single-time weighted norm; take the sup over a trajectory separately."""
    x = g.mesh.centers
    return quad((x ** (-params.sigma1) + x**params.sigma2) * np.abs(g.values), g.mesh)
