"""Explicit RK4 integration of the truncated system with step-doubling control."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, asdict

import numpy as np

from .errors import DomainError, InstabilityError, StiffnessError
from .grid import DensityField, Mesh, quad
from .kernels import KernelSpec
from .moments import SpaceParams, moment
from .operators import get_operator

logger = logging.getLogger(__name__)

# RK4's stability interval on the negative real axis is about 2.79.
STABILITY_LIMIT = 2.5
# Differences this small are rounding noise and always accepted.
ROUNDING_FLOOR = 1e-14


@dataclass(frozen=True)
class SolverConfig:
    t_end: float = 1.0
    dt_init: float = 1e-3
    dt_max: float = 0.05
    safety: float = 0.9
    tol_step: float = 1e-8
    negativity_tol: float = 1e-12
    record_every: int = 1

    def __post_init__(self):
        problems = solver_problems(self)
        if problems:
            raise DomainError("; ".join(problems))


def solver_problems(cfg) -> list[str]:
    problems = []
    if not cfg.t_end >= 0.0:
        problems.append(f"t_end must be non-negative, got {cfg.t_end}")
    for name in ("dt_init", "dt_max", "tol_step", "negativity_tol"):
        if not getattr(cfg, name) > 0.0:
            problems.append(f"{name} must be positive, got {getattr(cfg, name)}")
    if not 0.0 < cfg.safety < 1.0:
        problems.append(f"safety must lie in (0, 1), got {cfg.safety}")
    if not (isinstance(cfg.record_every, (int, np.integer)) and cfg.record_every >= 1):
        problems.append(f"record_every must be a positive integer, got {cfg.record_every}")
    return problems


@dataclass(frozen=True)
class Exponential:
    """``amplitude * exp(-decay * z)``."""

    amplitude: float = 1.0
    decay: float = 1.0

    def __call__(self, z):
        return self.amplitude * np.exp(-self.decay * np.asarray(z, dtype=float))


@dataclass(frozen=True)
class TruncatedPowerExp:
    """``amplitude * z**-power * exp(-decay * z)``; integrable against ``z^-sigma1`` if ``power < 1 - sigma1``."""

    power: float = 0.25
    decay: float = 1.0
    amplitude: float = 1.0

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        return self.amplitude * z ** (-self.power) * np.exp(-self.decay * z)


@dataclass(frozen=True)
class Monodisperse:
    """Gaussian bump of the given ``width`` centred at ``z0``."""

    z0: float = 1.0
    width: float = 0.1
    amplitude: float = 1.0

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        return self.amplitude * np.exp(-0.5 * ((z - self.z0) / self.width) ** 2)


InitialDatum = Exponential | TruncatedPowerExp | Monodisperse


def initial_field(init, mesh: Mesh) -> DensityField:
    """Sample the datum at the cell centers (the mesh is its zero extension's support)."""
    values = np.asarray(init(mesh.centers), dtype=float)
    if np.any(values < 0.0):
        raise DomainError("initial datum must be non-negative")
    return DensityField(mesh, values, 0.0)


@dataclass
class MomentRecord:
    t: float
    m_neg: float
    m0: float
    m1: float
    m2: float
    flux_out: float  # cumulative mass removed past the truncation volume


@dataclass
class Trajectory:
    snapshots: list[DensityField]
    moment_log: list[MomentRecord]
    config: dict = field(default_factory=dict)
    clamped_mass: float = 0.0
    rejected_steps: int = 0

    @property
    def times(self) -> np.ndarray:
        return np.array([s.time for s in self.snapshots])

    @property
    def mesh(self) -> Mesh:
        return self.snapshots[0].mesh

    @property
    def final(self) -> DensityField:
        return self.snapshots[-1]

    def values_at(self, t: float) -> np.ndarray:
        """Snapshot values at ``t``, linear in time between snapshots."""
        times = self.times
        if t < times[0] or t > times[-1]:
            raise DomainError(f"time {t} outside the trajectory [{times[0]}, {times[-1]}]")
        k = int(np.searchsorted(times, t, side="left"))
        if times[k] == t:
            return self.snapshots[k].values
        t0, t1 = times[k - 1], times[k]
        lam = (t - t0) / (t1 - t0)
        a, b = self.snapshots[k - 1].values, self.snapshots[k].values
        return a + lam * (b - a)


def _moment_record(g: DensityField, sigma1: float, flux_out: float) -> MomentRecord:
    return MomentRecord(
        g.time, moment(g, -sigma1), moment(g, 0.0), moment(g, 1.0), moment(g, 2.0), flux_out
    )


def _rk4(op, values, dt, threads):
    """One classical RK4 step; also returns the mass lost past ``n`` during it."""
    k1 = op.evaluate(values, threads)
    k2 = op.evaluate(values + 0.5 * dt * k1.rhs, threads)
    k3 = op.evaluate(values + 0.5 * dt * k2.rhs, threads)
    k4 = op.evaluate(values + dt * k3.rhs, threads)
    new = values + dt / 6.0 * (k1.rhs + 2.0 * k2.rhs + 2.0 * k3.rhs + k4.rhs)
    lost = dt / 6.0 * (k1.mass_flux + 2.0 * k2.mass_flux + 2.0 * k3.mass_flux + k4.mass_flux)
    return new, lost


def _clamp(values, mesh: Mesh, eps: float):
    """Zero tiny negative values; fail on anything below ``-eps * scale``."""
    scale = max(float(np.max(np.abs(values))), np.finfo(float).tiny)
    worst = int(np.argmin(values))
    if values[worst] < -eps * scale:
        raise InstabilityError(
            f"density {values[worst]:.3e} at cell {worst} (z={mesh.centers[worst]:.4g}) "
            f"is below -{eps:g} * {scale:.3e}; reduce dt_max or tol_step"
        )
    neg = values < 0.0
    if not np.any(neg):
        return values, 0.0
    clamped = float(np.sum(-values[neg] * mesh.centers[neg] * mesh.widths[neg]))
    out = values.copy()
    out[neg] = 0.0
    return out, clamped


def step(g: DensityField, dt: float, spec: KernelSpec, negativity_tol: float = 1e-12, threads: int = 1) -> DensityField:
    """Advance ``g`` by one RK4 step of size ``dt``."""
    if not dt > 0.0:
        raise DomainError(f"dt must be positive, got {dt}")
    op = get_operator(g.mesh, spec)
    new, _ = _rk4(op, g.values, dt, threads)
    new, _ = _clamp(new, g.mesh, negativity_tol)
    return DensityField(g.mesh, new, g.time + dt)


def _stability_cap(op, values) -> float:
    rate = float(np.max(np.sum(op.phi * (values * op.mesh.widths)[None, :], axis=1)))
    return np.inf if rate <= 0.0 else STABILITY_LIMIT / rate


def run(
    init,
    mesh: Mesh,
    spec: KernelSpec,
    cfg: SolverConfig,
    space: SpaceParams | None = None,
    threads: int = 1,
) -> Trajectory:
    """Integrate from ``init`` (a datum or a :class:`DensityField`) to ``cfg.t_end``.

    Each step compares one step of size ``dt`` with two of size ``dt/2``; the
    step is accepted when ``|y_half - y_full| <= tol_step * dt * (1 + |y_half|)``
    in every cell, and the accepted value is the Richardson combination
    ``y_half + (y_half - y_full) / 15``.  Measuring the difference per unit
    time makes the final-time error shrink faster than ``tol_step`` itself.  The step is also capped so that
    ``dt`` times the largest collision rate stays inside RK4's stability
    interval.
    """
    space = space or SpaceParams()
    g = init.copy() if isinstance(init, DensityField) else initial_field(init, mesh)
    if g.mesh != mesh:
        raise DomainError("initial field lives on a different mesh")
    op = get_operator(mesh, spec)
    t_end = cfg.t_end
    sigma1 = space.sigma1

    echo = {"solver": asdict(cfg), "space": asdict(space)}
    traj = Trajectory([g.copy()], [_moment_record(g, sigma1, 0.0)], echo)
    values = g.values.copy()
    t = 0.0
    dt = min(cfg.dt_init, cfg.dt_max)
    lost_total = 0.0
    accepted = 0
    dt_floor = 1e-12 * t_end

    while t < t_end:
        remaining = t_end - t
        trial = min(dt, cfg.dt_max, _stability_cap(op, values))
        last_step = trial >= remaining
        if last_step:
            trial = remaining
        elif trial < dt_floor:
            raise StiffnessError(
                f"stability limit forces a step of {trial:.3e}, below {dt_floor:.3e}, at t={t:.6g}"
            )
        full, lost_full = _rk4(op, values, trial, threads)
        half, lost_a = _rk4(op, values, 0.5 * trial, threads)
        half, lost_b = _rk4(op, half, 0.5 * trial, threads)
        diff = float(np.max(np.abs(half - full) / (1.0 + np.abs(half))))
        err = diff / trial
        if not np.isfinite(err) or (err > cfg.tol_step and diff > ROUNDING_FLOOR):
            shrink = 0.2 if not np.isfinite(err) else max(0.2, cfg.safety * (cfg.tol_step / err) ** 0.25)
            dt = trial * shrink
            traj.rejected_steps += 1
            if dt < dt_floor:
                raise StiffnessError(
                    f"step size {dt:.3e} fell below {dt_floor:.3e} at t={t:.6g}"
                )
            continue

        new = half + (half - full) / 15.0
        lost = (16.0 * (lost_a + lost_b) - lost_full) / 15.0
        new, clamped = _clamp(new, mesh, cfg.negativity_tol)
        traj.clamped_mass += clamped
        values = new
        lost_total += lost
        t = t_end if last_step else t + trial
        accepted += 1
        grow = 5.0 if err == 0.0 else min(5.0, cfg.safety * (cfg.tol_step / err) ** 0.25)
        if not last_step:
            dt = trial * max(grow, 0.2)

        current = DensityField(mesh, values.copy(), t)
        traj.moment_log.append(_moment_record(current, sigma1, lost_total))
        if accepted % cfg.record_every == 0 or t >= t_end:
            traj.snapshots.append(current)

    logger.info(
        "integrated to t=%g in %d steps (%d rejected)", t_end, accepted, traj.rejected_steps
    )
    return traj
