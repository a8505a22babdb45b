"""Collision kernel, coalescence/breakage efficiencies and the breakage distribution.

All functions accept scalars or numpy arrays and broadcast like ufuncs.  The
collision kernel has the power-law form

    phi(z, z1) = c * (z**alpha * z1**alpha' + z**alpha' * z1**alpha)

and the daughter distribution produced by a breaking pair of total volume
``s = z1 + z2`` is

    P(z | z1; z2) = (theta + 2) * z**theta / s**(theta + 1),   0 <= z <= s,

which is binary breakage (two fragments, uniform in volume) for ``theta = 0``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

CONSTANT = "constant"
RATIO_BOUNDED = "ratio_bounded"
PURE_COAGULATION = "pure_coagulation"
EFFICIENCY_KINDS = (CONSTANT, RATIO_BOUNDED, PURE_COAGULATION)


@dataclass(frozen=True)
class EfficiencyModel:
    """Coalescence efficiency ``E``; the breakage efficiency is ``1 - E``.

    Parameters
    ----------
    kind:
        ``"constant"`` (``E = value``), ``"ratio_bounded"``
        (``E = z z1 / (1 + z z1)``) or ``"pure_coagulation"`` (``E = 1``).
    value:
        The constant efficiency, only read when ``kind == "constant"``.
    """

    kind: str = CONSTANT
    value: float = 0.5

    def __post_init__(self):
        if self.kind not in EFFICIENCY_KINDS:
            raise DomainError(
                f"unknown efficiency model {self.kind!r}; expected one of {EFFICIENCY_KINDS}"
            )
        if self.kind == CONSTANT and not 0.0 <= self.value <= 1.0:
            raise DomainError(f"constant efficiency must lie in [0, 1], got {self.value}")

    @classmethod
    def constant(cls, value: float) -> "EfficiencyModel":
        return cls(CONSTANT, float(value))

    @classmethod
    def ratio_bounded(cls) -> "EfficiencyModel":
        return cls(RATIO_BOUNDED, 0.0)

    @classmethod
    def pure_coagulation(cls) -> "EfficiencyModel":
        return cls(PURE_COAGULATION, 1.0)

    @property
    def is_constant(self) -> bool:
        return self.kind in (CONSTANT, PURE_COAGULATION)

    @property
    def constant_value(self) -> float:
        """Value of ``E`` for the two constant families."""
        if self.kind == PURE_COAGULATION:
            return 1.0
        if self.kind == CONSTANT:
            return self.value
        raise DomainError("ratio_bounded efficiency is not constant")

    def coalescence(self, z, z1):
        z, z1 = np.broadcast_arrays(np.asarray(z, dtype=float), np.asarray(z1, dtype=float))
        if self.kind == RATIO_BOUNDED:
            prod = z * z1
            return prod / (1.0 + prod)
        return np.full(z.shape, self.constant_value)


@dataclass(frozen=True)
class KernelSpec:
    """Parameters of the collision kernel and breakage distribution.

    ``test_mode`` lifts the ``0 < alpha, alpha' <= 1/2`` restriction so that the
    constant kernel (``alpha = alpha' = 0``) can be used by the closed-form
    oracles.  It is never produced by configuration parsing.
    """

    c: float = 1.0
    alpha: float = 0.5
    alpha_prime: float = 0.5
    efficiency: EfficiencyModel = EfficiencyModel()
    theta: float = 0.0
    test_mode: bool = False

    def __post_init__(self):
        problems = kernel_problems(self.c, self.alpha, self.alpha_prime, self.theta, self.test_mode)
        if problems:
            raise DomainError("; ".join(problems))

    @classmethod
    def constant_test_mode(cls, rate: float = 1.0, efficiency: EfficiencyModel | None = None):
        """Constant kernel ``phi == rate`` (outside the admissible power-law class)."""
        return cls(
            c=0.5 * rate,
            alpha=0.0,
            alpha_prime=0.0,
            efficiency=efficiency or EfficiencyModel.pure_coagulation(),
            theta=0.0,
            test_mode=True,
        )

    @property
    def is_constant_kernel(self) -> bool:
        return self.alpha == 0.0 and self.alpha_prime == 0.0


def kernel_problems(c, alpha, alpha_prime, theta, test_mode=False) -> list[str]:
    """Every violated kernel restriction, as human-readable strings."""
    problems = []
    if not c >= 0.0:
        problems.append(f"c must be non-negative, got {c}")
    if not theta >= 0.0:
        problems.append(f"theta must be non-negative, got {theta}")
    if test_mode:
        if not (0.0 <= alpha <= 0.5 and 0.0 <= alpha_prime <= 0.5):
            problems.append("test-mode exponents must lie in [0, 1/2]")
        return problems
    if not 0.0 < alpha <= 0.5:
        problems.append(f"alpha must lie in (0, 1/2], got {alpha}")
    if not 0.0 < alpha_prime <= 0.5:
        problems.append(f"alpha_prime must lie in (0, 1/2], got {alpha_prime}")
    return problems


def _check_volumes(*arrays):
    for a in arrays:
        if np.any(a < 0.0):
            raise DomainError("volumes must be non-negative")


def phi(z, z1, spec: KernelSpec):
    """Collision kernel ``c (z^a z1^a' + z^a' z1^a)``; symmetric bitwise in its arguments."""
    z = np.asarray(z, dtype=float)
    z1 = np.asarray(z1, dtype=float)
    _check_volumes(z, z1)
    a, b = spec.alpha, spec.alpha_prime
    out = spec.c * (z**a * z1**b + z**b * z1**a)
    return out if out.ndim else float(out)


def phi_truncated(z, z1, n: float, spec: KernelSpec):
    """Kernel cut off outside the open square ``(0, n) x (0, n)``."""
    if not n > 0.0:
        raise DomainError(f"cutoff volume must be positive, got {n}")
    z = np.asarray(z, dtype=float)
    z1 = np.asarray(z1, dtype=float)
    inside = (z > 0.0) & (z < n) & (z1 > 0.0) & (z1 < n)
    out = np.where(inside, phi(z, z1, spec), 0.0)
    return out if out.ndim else float(out)


def efficiency(z, z1, model: EfficiencyModel):
    """Return the pair ``(E, E1)`` with ``E1 = 1 - E``."""
    z = np.asarray(z, dtype=float)
    z1 = np.asarray(z1, dtype=float)
    _check_volumes(z, z1)
    e = model.coalescence(z, z1)
    e1 = 1.0 - e
    if e.ndim == 0:
        return float(e), float(e1)
    return e, e1


def breakage_p(z, z1, z2, theta: float = 0.0):
    """Number density of fragments of volume ``z`` from a breaking ``(z1, z2)`` pair."""
    z = np.asarray(z, dtype=float)
    s = np.asarray(z1, dtype=float) + np.asarray(z2, dtype=float)
    if np.any(s <= 0.0):
        raise DomainError("breakage distribution is undefined when z1 + z2 = 0")
    _check_volumes(z)
    inside = z <= s
    with np.errstate(divide="ignore", invalid="ignore"):
        dens = (theta + 2.0) * z**theta / s ** (theta + 1.0)
    out = np.where(inside, dens, 0.0)
    return out if out.ndim else float(out)


def p_moment(r, s, theta: float = 0.0):
    """Exact ``int_0^s z^r P(z|z1;z2) dz = (theta+2)/(r+theta+1) * s^r``."""
    if np.any(np.asarray(r) <= -1.0 - theta):
        raise DomainError(f"moment of order r <= -1 - theta diverges (theta={theta})")
    s = np.asarray(s, dtype=float)
    if np.any(s <= 0.0):
        raise DomainError("total volume s must be positive")
    out = (theta + 2.0) / (r + theta + 1.0) * s**r
    return out if np.ndim(out) else float(out)


def zeta_bound(r_star: float, theta: float = 0.0) -> float:
    """Sharp constant in ``int z^{-r*} P dz <= zeta * s^{-r*}`` for binary breakage."""
    if not 0.0 <= r_star < 1.0:
        raise DomainError(f"r_star must lie in [0, 1), got {r_star}")
    if theta != 0.0:
        raise DomainError("zeta_bound is only available for theta = 0")
    return 2.0 / (1.0 - r_star)


def cumulative_number(z, s, theta: float = 0.0):
    """Fragments per breakage event with volume below ``z`` (``z <= s``)."""
    return (theta + 2.0) / (theta + 1.0) * (np.asarray(z, dtype=float) / s) ** (theta + 1.0)


def cumulative_mass(z, s, theta: float = 0.0):
    """Fragment volume per breakage event carried by fragments below ``z``."""
    z = np.asarray(z, dtype=float)
    return z ** (theta + 2.0) / s ** (theta + 1.0)
