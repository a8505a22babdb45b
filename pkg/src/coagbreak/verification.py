"""A-priori estimates of the truncated system turned into checks on trajectories.

Every ``check_*`` function is a pure reader: it never mutates the trajectory
or the ledger it is handed and returns a :class:`CheckReport`.

Some ledger constants are astronomically large.  The uniform bound ``S(T)``
for the default scenario has a natural logarithm of several hundred thousand,
so it is carried as ``log_S_T`` and ``S_T`` itself overflows to ``inf``.
Comparisons against it are made in log space.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConstraintError, DomainError
from .grid import DensityField, Mesh, quad, sample
from .kernels import KernelSpec, zeta_bound
from .moments import SpaceParams, admissibility_problems, moment, weighted_norm
from .solver import Trajectory

__all__ = [
    "BoundLedger",
    "CheckReport",
    "SpaceParams",
    "moment",
    "weighted_norm",
    "compute_ledger",
    "ledger_from_moments",
    "check_moment_bounds",
    "majorant_A",
    "log_majorant_A",
    "check_uniform_bound",
    "modulus_time",
    "modulus_space",
    "check_time_modulus",
    "check_space_modulus",
    "tail_bound_check",
    "q_distance",
    "theta_coefficient",
    "check_continuous_dependence",
    "check_mass_conservation_limit",
]

MOMENT_SLACK = 1e-6


def _exp(x: float) -> float:
    """``exp`` that overflows to ``inf`` instead of raising."""
    return math.exp(x) if x < 709.0 else math.inf


@dataclass(frozen=True)
class BoundLedger:
    """Explicit constants of the moment and pointwise estimates at horizon ``T``."""

    Gamma0: float
    Gamma1: float
    Gamma2T: float
    GammaNegT: float
    A0: float
    log_S_T: float
    S_T: float
    C_emp: float
    theta_coef: float
    sup_g0: float
    c: float
    sigma1: float
    T: float
    Z_o: float

    def as_dict(self) -> dict[str, float]:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@dataclass
class CheckReport:
    """Outcome of one check.

    ``ratios`` maps a bound's name to the largest ``value / bound`` attained;
    a check passes when no entry of ``failures`` was recorded.
    """

    name: str
    passed: bool
    ratios: dict[str, float] = field(default_factory=dict)
    failures: list[str] = field(default_factory=list)
    details: dict = field(default_factory=dict)

    @property
    def margin(self) -> float:
        return max(self.ratios.values()) if self.ratios else 0.0


def theta_coefficient(c: float, sigma1: float) -> float:
    """``4c + 12c / (1 - sigma1)``, the factor multiplying ``||g|| + ||h||`` in Theta."""
    return 4.0 * c + 12.0 * c / (1.0 - sigma1)


def ledger_from_moments(
    m_neg0: float,
    m0: float,
    m1: float,
    m2: float,
    sup_g0: float,
    c: float,
    sigma1: float,
    T: float,
    Z_o: float,
) -> BoundLedger:
    """Evaluate every ledger formula from initial moments and ``sup g0`` on ``[0, Z_o]``.

    Examples
    --------
    >>> led = ledger_from_moments(1.0, 1.0, 1.0, 2.0, 1.0, 1.0, 0.5, 1.0, 10.0)
    >>> round(led.Gamma2T, 2)
    1613.72
    """
    if T < 0.0 or Z_o <= 0.0:
        raise DomainError(f"need T >= 0 and Z_o > 0, got T={T}, Z_o={Z_o}")
    g0, g1 = float(m0), float(m1)
    zeta = zeta_bound(sigma1)
    gamma2 = (m2 + 2.0 * c * g0**2) * _exp(2.0 * c * (2.0 * g0 + g1) * T)
    gamma_neg = (m_neg0 + zeta * c * (2.0 * g0 * g1 + g1**2)) * _exp(zeta * c * g0 * T)
    a0 = max(float(sup_g0), 2.0 * c * (g0 + g1) * (gamma_neg + g1))
    if a0 > 0.0:
        log_s = math.log(a0) + a0 * c * (1.0 + Z_o) * Z_o * math.expm1(T) + T
    else:
        log_s = -math.inf
    s_t = _exp(log_s)
    c_emp = c * (
        (1.0 + Z_o) * Z_o * _exp(2.0 * log_s)
        + 2.0 * math.sqrt(1.0 + Z_o) * s_t * (g0 + g1)
        + 2.0 * (g0 + g1) * (gamma_neg + g1)
    )
    return BoundLedger(
        Gamma0=g0,
        Gamma1=g1,
        Gamma2T=gamma2,
        GammaNegT=gamma_neg,
        A0=a0,
        log_S_T=log_s,
        S_T=s_t,
        C_emp=c_emp,
        theta_coef=theta_coefficient(c, sigma1),
        sup_g0=float(sup_g0),
        c=float(c),
        sigma1=float(sigma1),
        T=float(T),
        Z_o=float(Z_o),
    )


def compute_ledger(
    init: DensityField, spec: KernelSpec, params: SpaceParams, T: float, Z_o: float
) -> BoundLedger:
    """Ledger for a run started from ``init``.

    ``sup g0`` is the largest sampled value with center ``<= Z_o``; for data
    singular at the origin it therefore depends on ``z_min``.
    """
    problems = admissibility_problems(spec, params.sigma1, params.sigma2)
    if problems:
        raise ConstraintError("; ".join(problems))
    x = init.mesh.centers
    window = x <= Z_o
    sup_g0 = float(np.max(init.values[window])) if np.any(window) else 0.0
    return ledger_from_moments(
        moment(init, -params.sigma1),
        moment(init, 0.0),
        moment(init, 1.0),
        moment(init, 2.0),
        sup_g0,
        spec.c,
        params.sigma1,
        T,
        Z_o,
    )


def check_moment_bounds(traj: Trajectory, ledger: BoundLedger, slack: float = MOMENT_SLACK) -> CheckReport:
    bounds = {
        "M0": ("m0", ledger.Gamma0),
        "M1": ("m1", ledger.Gamma1),
        "M2": ("m2", ledger.Gamma2T),
        "M_neg": ("m_neg", ledger.GammaNegT),
    }
    report = CheckReport("moment_bounds", True)
    for label, (attr, bound) in bounds.items():
        worst = 0.0
        for rec in traj.moment_log:
            value = getattr(rec, attr)
            if bound > 0.0:
                worst = max(worst, value / bound)
            elif value > 0.0:
                worst = math.inf
            if value > bound * (1.0 + slack) + (0.0 if bound > 0.0 else slack):
                report.failures.append(f"t={rec.t:.17g} {label}={value:.17g} exceeds bound {bound:.17g}")
        report.ratios[label] = worst
    report.passed = not report.failures
    return report


def _check_window(z, t, ledger: BoundLedger):
    z = np.asarray(z, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any((z < 0.0) | (z > ledger.Z_o)) or np.any((t < 0.0) | (t > ledger.T)):
        raise DomainError(f"majorant is defined on [0, {ledger.Z_o}] x [0, {ledger.T}]")
    return z, t


def log_majorant_A(z, t, ledger: BoundLedger, c: float | None = None, Z_o: float | None = None):
    """``log A(z, t) = log A0 + c A0 z (1 + Z_o)(e^t - 1) + t``."""
    c = ledger.c if c is None else c
    Z_o = ledger.Z_o if Z_o is None else Z_o
    z, t = _check_window(z, t, ledger)
    log_a0 = math.log(ledger.A0) if ledger.A0 > 0.0 else -math.inf
    out = log_a0 + c * ledger.A0 * z * (1.0 + Z_o) * np.expm1(t) + t
    return out if out.ndim else float(out)


def majorant_A(z, t, ledger: BoundLedger, c: float | None = None, Z_o: float | None = None):
    """Closed-form pointwise majorant ``A(0) exp(c A(0) z (1 + Z_o)(e^t - 1) + t)``.

    Overflows to ``inf`` where the exponent exceeds the float range; use
    :func:`log_majorant_A` for comparisons.
    """
    with np.errstate(over="ignore"):
        out = np.exp(log_majorant_A(z, t, ledger, c, Z_o))
    return out if np.ndim(out) else float(out)


def check_uniform_bound(traj: Trajectory, ledger: BoundLedger, Z_o: float | None = None) -> CheckReport:
    """``g <= A(z, t)`` and ``g <= S(T)`` for every snapshot sample with ``z <= Z_o``."""
    Z_o = ledger.Z_o if Z_o is None else Z_o
    mesh = traj.mesh
    if Z_o > mesh.n:
        raise DomainError(f"Z_o={Z_o} exceeds the truncation volume n={mesh.n}")
    x = mesh.centers
    window = x <= Z_o
    report = CheckReport("uniform_bound", True)
    worst_log_a = -math.inf
    worst_log_s = -math.inf
    for snap in traj.snapshots:
        g = snap.values[window]
        pos = g > 0.0
        if not np.any(pos):
            continue
        log_g = np.log(g[pos])
        log_a = log_majorant_A(x[window][pos], np.full(pos.sum(), snap.time), ledger, Z_o=Z_o)
        gap_a = log_g - log_a
        k = int(np.argmax(gap_a))
        worst_log_a = max(worst_log_a, float(gap_a[k]))
        worst_log_s = max(worst_log_s, float(np.max(log_g)) - ledger.log_S_T)
        if gap_a[k] > 0.0:
            report.failures.append(
                f"t={snap.time:.17g} z={x[window][pos][k]:.17g} g exceeds A by factor {math.exp(gap_a[k]):.6g}"
            )
        if np.max(log_g) > ledger.log_S_T:
            report.failures.append(f"t={snap.time:.17g} sup g exceeds S(T)")
    report.ratios["g/A"] = _exp(worst_log_a) if worst_log_a > -math.inf else 0.0
    report.ratios["g/S_T"] = _exp(worst_log_s) if worst_log_s > -math.inf else 0.0
    report.details["log_ratio_A"] = worst_log_a
    report.details["log_ratio_S_T"] = worst_log_s
    report.passed = not report.failures
    return report


def modulus_time(traj: Trajectory, h: float, z_max: float | None = None) -> float:
    """``sup |g(z, t + h) - g(z, t)|`` over snapshot times ``t <= T - h`` and centers ``z <= z_max``."""
    times = traj.times
    T = times[-1]
    if not 0.0 < h < T:
        raise DomainError(f"h must lie in (0, {T}), got {h}")
    x = traj.mesh.centers
    window = np.ones(x.size, bool) if z_max is None else x <= z_max
    best = 0.0
    for k, t in enumerate(times):
        if t + h > T:
            break
        diff = np.abs(traj.values_at(t + h) - traj.snapshots[k].values)[window]
        if diff.size:
            best = max(best, float(np.max(diff)))
    return best


def check_time_modulus(traj: Trajectory, ledger: BoundLedger, hs=(0.1, 0.05, 0.025)) -> CheckReport:
    """``modulus_time(h) / h <= C_emp`` on the window ``z <= Z_o``."""
    report = CheckReport("time_modulus", True)
    rates = {}
    for h in hs:
        rate = modulus_time(traj, h, ledger.Z_o) / h
        rates[h] = rate
        report.ratios[f"h={h:g}"] = rate / ledger.C_emp if ledger.C_emp > 0.0 else (math.inf if rate > 0 else 0.0)
        if rate > ledger.C_emp:
            report.failures.append(f"h={h:g}: modulus/h={rate:.6g} exceeds C_emp={ledger.C_emp:.6g}")
    report.details["rates"] = rates
    report.passed = not report.failures
    return report


def modulus_space(field: DensityField, h: float, z_max: float | None = None) -> float:
    """``sup |g(z + h) - g(z)|`` over centers with ``z + h`` still on the mesh (and ``z <= z_max``)."""
    if h < 0.0:
        raise DomainError(f"h must be non-negative, got {h}")
    if h == 0.0:
        return 0.0
    mesh = field.mesh
    x = mesh.centers
    top = mesh.n - h if z_max is None else min(z_max, mesh.n - h)
    z = x[x <= top]
    if z.size == 0:
        return 0.0
    return float(np.max(np.abs(sample(field, z + h) - sample(field, z))))


def check_space_modulus(
    field: DensityField, hs=(0.2, 0.1, 0.05), slack: float = 0.1, z_max: float | None = None
) -> CheckReport:
    """The space modulus must shrink along decreasing ``hs``, up to ``slack`` relative growth."""
    hs = sorted(hs, reverse=True)
    values = [modulus_space(field, h, z_max) for h in hs]
    report = CheckReport("space_modulus", True, details={"moduli": dict(zip(hs, values))})
    for (h0, v0), (h1, v1) in zip(zip(hs, values), zip(hs[1:], values[1:])):
        report.ratios[f"h={h1:g}/h={h0:g}"] = v1 / v0 if v0 > 0.0 else 0.0
        if v1 > v0 * (1.0 + slack):
            report.failures.append(f"modulus grew from {v0:.6g} at h={h0:g} to {v1:.6g} at h={h1:g}")
    report.passed = not report.failures
    return report


def tail_bound_check(field: DensityField, beta: float, r: float) -> tuple[float, float]:
    """``(lhs, rhs)`` of the Chebyshev-type tail bound ``int_beta g <= beta^-r int z^r g``.

    Both sides use the same node quadrature, so ``lhs <= rhs`` holds cell by
    cell for non-negative fields.
    """
    mesh = field.mesh
    if beta <= mesh.z_min:
        raise DomainError(f"beta must exceed z_min={mesh.z_min}, got {beta}")
    if r <= 0.0:
        raise DomainError(f"exponent must be positive, got {r}")
    x = mesh.centers
    tail = x >= beta
    lhs = float(np.sum(field.values[tail] * mesh.widths[tail]))
    rhs = beta ** (-r) * quad(x**r * field.values, mesh)
    return lhs, rhs


def q_distance(g: DensityField, h: DensityField, sigma1: float) -> float:
    """``int (z^-sigma1 + z) |g - h| dz``."""
    if g.mesh != h.mesh:
        raise DomainError("q_distance needs both fields on the same mesh")
    x = g.mesh.centers
    return quad((x ** (-sigma1) + x) * np.abs(g.values - h.values), g.mesh)


def _q_on(mesh: Mesh, a: np.ndarray, b: np.ndarray, sigma1: float) -> float:
    x = mesh.centers
    return quad((x ** (-sigma1) + x) * np.abs(a - b), mesh)


def check_continuous_dependence(
    run_g: Trajectory,
    run_h: Trajectory,
    spec: KernelSpec,
    params: SpaceParams,
    rel_slack: float = 1e-3,
    uniqueness_tol: float = 1e-9,
) -> CheckReport:
    """Gronwall bound ``Q(t) <= Q(0) exp(Theta t)`` between two runs.

    ``run_h`` is interpolated in time onto ``run_g``'s snapshot times.  When
    both start from the same datum the check instead requires
    ``Q(t) <= uniqueness_tol * scale``.
    """
    mesh = run_g.mesh
    if run_h.mesh != mesh:
        raise DomainError("trajectories live on different meshes")
    sigma1 = params.sigma1
    norm_g = max(weighted_norm(s, params) for s in run_g.snapshots)
    norm_h = max(weighted_norm(s, params) for s in run_h.snapshots)
    theta = theta_coefficient(spec.c, sigma1) * (norm_g + norm_h)
    q0 = _q_on(mesh, run_g.snapshots[0].values, run_h.snapshots[0].values, sigma1)
    scale = max(norm_g, norm_h, np.finfo(float).tiny)
    report = CheckReport("continuous_dependence", True, details={"Theta": theta, "Q0": q0})
    worst = 0.0
    q_curve = []
    for snap in run_g.snapshots:
        q = _q_on(mesh, snap.values, run_h.values_at(snap.time), sigma1)
        q_curve.append((snap.time, q))
        if q0 == 0.0:
            ratio = q / (uniqueness_tol * scale)
            bad = q > uniqueness_tol * scale
        else:
            bound = q0 * _exp(theta * snap.time)
            ratio = q / bound
            bad = q > bound * (1.0 + rel_slack)
        worst = max(worst, ratio)
        if bad and not report.failures:
            report.failures.append(f"first violation at t={snap.time:.17g}: Q={q:.17g}")
    report.ratios["Q/bound"] = worst
    report.details["Q"] = q_curve
    report.passed = not report.failures
    return report


def check_mass_conservation_limit(
    runs: list[Trajectory], slack: float = 0.1, creation_tol: float = 1e-9
) -> CheckReport:
    """Relative mass defect at the final time must shrink along a refinement sequence.

    The defect ``(M1(0) - M1(T)) / M1(0)`` is signed: a value below
    ``-creation_tol`` means mass was created, which fails outright.
    """
    if len(runs) < 2:
        raise DomainError("need at least two refinement levels")
    defects = []
    for tr in runs:
        first, last = tr.moment_log[0], tr.moment_log[-1]
        defects.append((first.m1 - last.m1) / first.m1 if first.m1 > 0.0 else 0.0)
    report = CheckReport("mass_conservation_limit", True, details={"defects": defects})
    for k, d in enumerate(defects):
        if d < -creation_tol:
            report.failures.append(f"level {k}: mass created, defect {d:.6g}")
    for k in range(1, len(defects)):
        prev, cur = defects[k - 1], defects[k]
        report.ratios[f"level{k}/level{k - 1}"] = cur / prev if prev > 0.0 else 0.0
        if cur > prev * (1.0 + slack) and cur > creation_tol:
            report.failures.append(f"defect grew from {prev:.6g} to {cur:.6g} at level {k}")
    report.passed = not report.failures
    return report
