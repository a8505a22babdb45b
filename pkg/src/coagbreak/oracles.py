"""Reference solutions: the constant-kernel closed form, moment ODEs and self-convergence."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp

from .errors import DomainError, ScenarioError
from .grid import build_mesh, sample
from .kernels import PURE_COAGULATION, EfficiencyModel, KernelSpec
from .solver import Exponential, SolverConfig, run

__all__ = [
    "OracleScenario",
    "MomentCurves",
    "ConvergenceTable",
    "default_scenario",
    "smoluchowski_scenario",
    "smoluchowski_constant",
    "moment_ode_reference",
    "self_convergence",
]


@dataclass(frozen=True)
class OracleScenario:
    """A kernel, a datum and a truncated domain, plus what a reference predicts for them."""

    name: str
    spec: KernelSpec
    init: Callable = Exponential()
    z_min: float = 1e-4
    n: float = 50.0
    t_end: float = 1.0
    kind: str = "geometric"
    predicts: tuple[str, ...] = ()
    solution: Callable | None = None

    def mesh(self, cells: int):
        return build_mesh(self.z_min, self.n, cells, self.kind)


def default_scenario() -> OracleScenario:
    """``c=1``, ``alpha=alpha'=1/2``, ``E=1/2``, ``g0=e^-z`` on ``[1e-4, 50]`` to ``T=1``."""
    return OracleScenario(
        "default",
        KernelSpec(efficiency=EfficiencyModel.constant(0.5)),
        predicts=("self_convergence",),
    )


def smoluchowski_scenario() -> OracleScenario:
    """Constant kernel ``phi = 1`` with pure coagulation; the only closed-form density."""
    return OracleScenario(
        "smoluchowski_constant",
        KernelSpec.constant_test_mode(1.0, EfficiencyModel.pure_coagulation()),
        z_min=1e-4,
        n=50.0,
        predicts=("density", "M0", "M1"),
        solution=smoluchowski_constant,
    )


def _is_smoluchowski(spec: KernelSpec) -> bool:
    eff = spec.efficiency
    unit_efficiency = eff.kind == PURE_COAGULATION or (eff.is_constant and eff.constant_value == 1.0)
    return (
        spec.test_mode
        and spec.alpha == 0.0
        and spec.alpha_prime == 0.0
        and 2.0 * spec.c == 1.0
        and unit_efficiency
    )


def smoluchowski_constant(z, t: float, spec: KernelSpec | None = None):
    """``(2/(t+2))**2 * exp(-2 z / (t+2))``, the unit-kernel solution from ``g0 = e^-z``.

    Raises :class:`ScenarioError` when ``spec`` is given and is not the unit
    constant kernel with coalescence efficiency 1.
    """
    if spec is not None and not _is_smoluchowski(spec):
        raise ScenarioError(
            "the closed form needs the constant test-mode kernel phi = 1 with efficiency E = 1"
        )
    if t < 0.0:
        raise DomainError(f"time must be non-negative, got {t}")
    z = np.asarray(z, dtype=float)
    m0 = 2.0 / (t + 2.0)
    out = m0**2 * np.exp(-m0 * z)
    return out if out.ndim else float(out)


@dataclass
class MomentCurves:
    """Moment trajectories ``M0, M1, M2`` at ``t``.

    ``closed`` is False when the moment system does not close; the curves
    are then upper envelopes rather than predictions.
    """

    t: np.ndarray
    m0: np.ndarray
    m1: np.ndarray
    m2: np.ndarray
    closed: bool
    notes: list[str] = field(default_factory=list)


def moment_ode_reference(spec: KernelSpec, m0: float, m1: float, m2: float, T: float, points: int = 101) -> MomentCurves:
    """Moment ODEs of the untruncated equation.

    With a constant kernel ``phi = K``, constant efficiency ``E`` and binary
    breakage the system closes:

        dM0/dt = -K E M0^2 / 2
        dM1/dt = 0
        dM2/dt = K E (M0 M2 + M1^2) - K M0 M2 + (2/3) K (1 - E) (M0 M2 + M1^2)

    Breaking pairs destroy two particles and create two, so only coalescence
    changes the particle count.  Any other kernel returns the envelopes
    ``M0 <= Gamma0``, ``M1 <= Gamma1`` and the exponential bound on ``M2``,
    with ``closed=False``.
    """
    if T < 0.0:
        raise DomainError(f"T must be non-negative, got {T}")
    t = np.linspace(0.0, T, points)
    eff = spec.efficiency
    closes = spec.is_constant_kernel and eff.kind != "ratio_bounded" and spec.theta == 0.0
    if not closes:
        c = spec.c
        gamma2 = (m2 + 2.0 * c * m0**2) * np.exp(2.0 * c * (2.0 * m0 + m1) * t)
        return MomentCurves(
            t,
            np.full_like(t, m0),
            np.full_like(t, m1),
            gamma2,
            False,
            ["moment system does not close; curves are upper envelopes"],
        )
    K = 2.0 * spec.c
    E = 1.0 if eff.kind == PURE_COAGULATION else eff.constant_value
    if T == 0.0:
        return MomentCurves(t, np.array([m0]), np.array([m1]), np.array([m2]), True)

    def rhs(_, y):
        a, b, d = y
        pair = a * d + b * b
        return [-0.5 * K * E * a * a, 0.0, K * E * pair - K * a * d + 2.0 / 3.0 * K * (1.0 - E) * pair]

    sol = solve_ivp(rhs, (0.0, T), [m0, m1, m2], t_eval=t, rtol=1e-12, atol=1e-14, method="DOP853")
    if not sol.success:
        raise DomainError(f"moment ODE integration failed: {sol.message}")
    return MomentCurves(t, sol.y[0], sol.y[1], sol.y[2], True)


@dataclass
class ConvergenceTable:
    """Sup-norm differences between consecutive resolutions on a fixed window."""

    resolutions: list[int]
    differences: list[float]
    orders: list[float]
    window: tuple[float, float]

    @property
    def monotone(self) -> bool:
        return all(b < a for a, b in zip(self.differences, self.differences[1:]))

    @property
    def passed(self) -> bool:
        return self.monotone


def self_convergence(
    scenario: OracleScenario,
    resolutions,
    window: tuple[float, float] | None = None,
    cfg: SolverConfig | None = None,
    samples: int = 400,
    threads: int = 1,
) -> ConvergenceTable:
    """Run ``scenario`` at each cell count and compare final densities on ``window``.

    Differences are taken at ``samples`` log-spaced points.  The observed
    order uses the resolution ratio of each consecutive triple.
    """
    resolutions = list(resolutions)
    if len(resolutions) < 3:
        raise DomainError("self_convergence needs at least three resolutions")
    cfg = cfg or SolverConfig(t_end=scenario.t_end)
    lo, hi = window or (10.0 * scenario.z_min, min(10.0, scenario.n))
    if not 0.0 < lo < hi:
        raise DomainError(f"bad window {(lo, hi)}")
    z = np.geomspace(lo, hi, samples)
    finals = []
    for cells in resolutions:
        traj = run(scenario.init, scenario.mesh(cells), scenario.spec, cfg, threads=threads)
        finals.append(sample(traj.final, z))
    diffs = [float(np.max(np.abs(b - a))) for a, b in zip(finals, finals[1:])]
    orders = []
    for k in range(len(diffs) - 1):
        ratio = resolutions[k + 1] / resolutions[k]
        if diffs[k] > 0.0 and diffs[k + 1] > 0.0 and ratio > 1.0:
            orders.append(math.log(diffs[k] / diffs[k + 1]) / math.log(ratio))
        else:
            orders.append(math.nan)
    return ConvergenceTable(resolutions, diffs, orders, (lo, hi))
