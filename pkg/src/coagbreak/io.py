"""Run configuration, trajectory/report serialization and the verification pipeline.

Configuration files are flat INI-style sections::

    [kernel]   c alpha alpha_prime theta efficiency efficiency_value
    [mesh]     z_min n cells kind
    [space]    sigma1 sigma2
    [init]     variant amplitude decay power z0 width
    [solver]   t_end dt_init dt_max safety tol_step negativity_tol record_every
    [verify]   moment_bounds uniform_bound time_modulus space_modulus
               tail_bound continuous_dependence z_o perturbation tail_samples
    [output]   dir trajectory moments report

Every key is optional; an empty file is the default scenario.
"""
from __future__ import annotations

import configparser
import hashlib
import os
import tempfile
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from types import SimpleNamespace

import numpy as np

from .errors import CoagBreakError, ConfigError
from .grid import DensityField, Mesh, build_mesh
from .kernels import EFFICIENCY_KINDS, EfficiencyModel, KernelSpec, kernel_problems
from .moments import SpaceParams, admissibility_problems
from .solver import (
    Exponential,
    Monodisperse,
    SolverConfig,
    Trajectory,
    TruncatedPowerExp,
    initial_field,
    run,
    solver_problems,
)
from . import verification as ver

__all__ = [
    "KernelConfig",
    "MeshConfig",
    "InitConfig",
    "VerifyConfig",
    "OutputConfig",
    "RunConfig",
    "VerificationReport",
    "parse_config",
    "load_config",
    "format_config",
    "fingerprint",
    "write_trajectory",
    "read_trajectory",
    "write_moments",
    "read_moments",
    "write_report",
    "read_report",
    "verify_run",
]

INIT_VARIANTS = ("exponential", "truncated_power_exp", "monodisperse")


@dataclass(frozen=True)
class KernelConfig:
    c: float = 1.0
    alpha: float = 0.5
    alpha_prime: float = 0.5
    theta: float = 0.0
    efficiency: str = "constant"
    efficiency_value: float = 0.5

    def spec(self) -> KernelSpec:
        return KernelSpec(
            self.c, self.alpha, self.alpha_prime, EfficiencyModel(self.efficiency, self.efficiency_value), self.theta
        )


@dataclass(frozen=True)
class MeshConfig:
    z_min: float = 1e-4
    n: float = 50.0
    cells: int = 256
    kind: str = "geometric"

    def build(self) -> Mesh:
        return build_mesh(self.z_min, self.n, self.cells, self.kind)


@dataclass(frozen=True)
class InitConfig:
    variant: str = "exponential"
    amplitude: float = 1.0
    decay: float = 1.0
    power: float = 0.25
    z0: float = 1.0
    width: float = 0.1

    def datum(self):
        if self.variant == "exponential":
            return Exponential(self.amplitude, self.decay)
        if self.variant == "truncated_power_exp":
            return TruncatedPowerExp(self.power, self.decay, self.amplitude)
        return Monodisperse(self.z0, self.width, self.amplitude)


@dataclass(frozen=True)
class VerifyConfig:
    moment_bounds: bool = True
    uniform_bound: bool = True
    time_modulus: bool = True
    space_modulus: bool = True
    tail_bound: bool = True
    continuous_dependence: bool = True
    z_o: float = 10.0
    perturbation: float = 0.01
    tail_samples: int = 1000


@dataclass(frozen=True)
class OutputConfig:
    dir: str = "out"
    trajectory: str = "trajectory.csv"
    moments: str = "moments.csv"
    report: str = "report.txt"


@dataclass(frozen=True)
class RunConfig:
    kernel: KernelConfig = field(default_factory=KernelConfig)
    mesh: MeshConfig = field(default_factory=MeshConfig)
    space: SpaceParams = field(default_factory=SpaceParams)
    init: InitConfig = field(default_factory=InitConfig)
    solver: SolverConfig = field(default_factory=SolverConfig)
    verify: VerifyConfig = field(default_factory=VerifyConfig)
    output: OutputConfig = field(default_factory=OutputConfig)


SECTIONS = {
    "kernel": KernelConfig,
    "mesh": MeshConfig,
    "space": SpaceParams,
    "init": InitConfig,
    "solver": SolverConfig,
    "verify": VerifyConfig,
    "output": OutputConfig,
}


def _convert(raw: str, kind, key: str, problems: list[str]):
    text = raw.strip()
    try:
        if kind is bool:
            lowered = text.lower()
            if lowered in ("1", "true", "yes", "on"):
                return True
            if lowered in ("0", "false", "no", "off"):
                return False
            raise ValueError
        if kind is int:
            value = float(text)
            if not value.is_integer():
                raise ValueError
            return int(value)
        if kind is float:
            return float(text)
        return text
    except ValueError:
        problems.append(f"{key}: cannot read {raw!r} as {kind.__name__}")
        return None


def _field_types(cls) -> dict[str, type]:
    defaults = cls()
    return {f.name: type(getattr(defaults, f.name)) for f in fields(cls) if f.init}


def _validate(raw: dict[str, dict], problems: list[str]) -> None:
    k, m, s, i, so, v = (raw[name] for name in ("kernel", "mesh", "space", "init", "solver", "verify"))
    problems.extend(kernel_problems(k["c"], k["alpha"], k["alpha_prime"], k["theta"]))
    if k["efficiency"] not in EFFICIENCY_KINDS:
        problems.append(f"efficiency must be one of {', '.join(EFFICIENCY_KINDS)}, got {k['efficiency']!r}")
    elif k["efficiency"] == "constant" and not 0.0 <= k["efficiency_value"] <= 1.0:
        problems.append(f"efficiency_value must lie in [0, 1], got {k['efficiency_value']}")
    if k["theta"] != 0.0:
        problems.append("theta must be 0 (binary breakage) for the moment ledger")
    if not 0.0 < m["z_min"] < m["n"]:
        problems.append(f"mesh requires 0 < z_min < n, got z_min={m['z_min']}, n={m['n']}")
    if m["cells"] < 1:
        problems.append(f"cells must be positive, got {m['cells']}")
    if m["kind"] not in ("geometric", "uniform"):
        problems.append(f"kind must be geometric or uniform, got {m['kind']!r}")
    problems.extend(admissibility_problems(SimpleNamespace(**k), s["sigma1"], s["sigma2"]))
    if i["variant"] not in INIT_VARIANTS:
        problems.append(f"variant must be one of {', '.join(INIT_VARIANTS)}, got {i['variant']!r}")
    if i["amplitude"] < 0.0:
        problems.append(f"amplitude must be non-negative, got {i['amplitude']}")
    if i["decay"] <= 0.0 and i["variant"] != "monodisperse":
        problems.append(f"decay must be positive, got {i['decay']}")
    if i["variant"] == "truncated_power_exp" and not 0.0 <= i["power"] < 1.0 - s["sigma1"]:
        problems.append(
            f"power must lie in [0, 1 - sigma1) for a finite weighted norm, got {i['power']}"
        )
    if i["variant"] == "monodisperse" and (i["width"] <= 0.0 or i["z0"] <= 0.0):
        problems.append("monodisperse datum needs positive z0 and width")
    problems.extend(solver_problems(SimpleNamespace(**so)))
    if v["z_o"] <= 0.0 or v["z_o"] > m["n"]:
        problems.append(f"z_o must lie in (0, n], got {v['z_o']}")
    if v["perturbation"] <= 0.0:
        problems.append(f"perturbation must be positive, got {v['perturbation']}")
    if v["tail_samples"] < 0:
        problems.append(f"tail_samples must be non-negative, got {v['tail_samples']}")


def parse_config(text: str) -> RunConfig:
    """Parse and fully validate a configuration.

    Raises :class:`ConfigError` listing every problem found, including
    unknown sections and keys.
    """
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError([f"malformed configuration: {exc}"]) from None
    problems: list[str] = []
    raw: dict[str, dict] = {}
    for section in parser.sections():
        if section not in SECTIONS:
            problems.append(f"unknown section [{section}]")
    for name, cls in SECTIONS.items():
        types = _field_types(cls)
        values = {key: getattr(cls(), key) for key in types}
        if parser.has_section(name):
            for key, text_value in parser.items(name):
                if key not in types:
                    problems.append(f"unknown key {key!r} in [{name}]")
                    continue
                value = _convert(text_value, types[key], f"[{name}] {key}", problems)
                if value is not None:
                    values[key] = value
        raw[name] = values
    if problems:
        raise ConfigError(problems)
    _validate(raw, problems)
    if problems:
        raise ConfigError(problems)
    return RunConfig(**{name: SECTIONS[name](**raw[name]) for name in SECTIONS})


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError([f"cannot read {path}: {exc.strerror}"]) from None
    return parse_config(text)


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def format_config(cfg: RunConfig) -> str:
    """Canonical text form; ``parse_config(format_config(cfg)) == cfg``."""
    lines = []
    for name in SECTIONS:
        section = getattr(cfg, name)
        lines.append(f"[{name}]")
        for f in fields(section):
            if f.init:
                lines.append(f"{f.name} = {_format_value(getattr(section, f.name))}")
        lines.append("")
    return "\n".join(lines)


def fingerprint(cfg: RunConfig) -> str:
    """SHA-256 of the canonical config text, ignoring output paths."""
    canonical = format_config(replace(cfg, output=OutputConfig()))
    return hashlib.sha256(canonical.encode()).hexdigest()


def _atomic_write(path, text: str) -> None:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    except OSError as exc:
        raise CoagBreakError(f"cannot write {path}: {exc.strerror}") from None
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException as exc:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        if isinstance(exc, OSError):
            raise CoagBreakError(f"cannot write {path}: {exc.strerror}") from None
        raise


def _g17(x: float) -> str:
    return "%.17g" % x


def write_trajectory(traj: Trajectory, path) -> None:
    """CSV ``t,z,g`` with one row per (snapshot, cell), 17 significant digits."""
    z = [_g17(v) for v in traj.mesh.centers]
    rows = ["t,z,g"]
    for snap in traj.snapshots:
        t = _g17(snap.time)
        rows.extend(f"{t},{zc},{_g17(g)}" for zc, g in zip(z, snap.values))
    _atomic_write(path, "\n".join(rows) + "\n")


def read_trajectory(path):
    """Inverse of :func:`write_trajectory`: ``(times, centers, values[snapshot, cell])``."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    times, first = np.unique(data[:, 0], return_index=True)
    count = data.shape[0] // times.size
    centers = data[:count, 1]
    return times, centers, data[:, 2].reshape(times.size, count)


MOMENT_COLUMNS = ("t", "M_neg", "M0", "M1", "M2", "flux_out")


def write_moments(traj: Trajectory, path) -> None:
    rows = [",".join(MOMENT_COLUMNS)]
    for r in traj.moment_log:
        rows.append(",".join(_g17(v) for v in (r.t, r.m_neg, r.m0, r.m1, r.m2, r.flux_out)))
    _atomic_write(path, "\n".join(rows) + "\n")


def read_moments(path) -> dict[str, np.ndarray]:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return {name: data[:, k] for k, name in enumerate(MOMENT_COLUMNS)}


@dataclass
class VerificationReport:
    checks: list[ver.CheckReport]
    ledger: ver.BoundLedger | None
    fingerprint: str

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def write_report(report: VerificationReport, path) -> None:
    """One ``check=status margin=value`` line per check, then ledger and fingerprint lines."""
    lines = [f"fingerprint={report.fingerprint}"]
    for c in report.checks:
        status = "pass" if c.passed else "fail"
        lines.append(f"{c.name}={status} margin={_g17(c.margin)}")
    if report.ledger is not None:
        for key, value in report.ledger.as_dict().items():
            lines.append(f"ledger.{key}={_g17(value)}")
    lines.append(f"overall={'pass' if report.passed else 'fail'}")
    _atomic_write(path, "\n".join(lines) + "\n")


def read_report(path) -> dict[str, str]:
    out = {}
    for line in Path(path).read_text().splitlines():
        key, _, rest = line.partition("=")
        out[key] = rest
    return out


def _tail_sweep(mesh: Mesh, samples: int, seed: int) -> ver.CheckReport:
    rng = np.random.default_rng(seed)
    report = ver.CheckReport("tail_bound", True)
    worst = 0.0
    for k in range(samples):
        field_ = DensityField(mesh, rng.random(mesh.cell_count) * rng.exponential())
        beta = float(np.exp(rng.uniform(np.log(mesh.edges[1]), np.log(mesh.n))))
        r = float(rng.uniform(0.05, 2.0))
        lhs, rhs = ver.tail_bound_check(field_, beta, r)
        if rhs > 0.0:
            worst = max(worst, lhs / rhs)
        if lhs > rhs * (1.0 + 1e-9):
            report.failures.append(f"sample {k}: lhs={lhs:.17g} > rhs={rhs:.17g}")
    report.ratios["lhs/rhs"] = worst
    report.passed = not report.failures
    return report


def verify_run(cfg: RunConfig, threads: int = 1, seed: int = 0, traj: Trajectory | None = None):
    """Integrate ``cfg`` (unless ``traj`` is given) and run every enabled check."""
    mesh = cfg.mesh.build()
    spec = cfg.kernel.spec()
    datum = cfg.init.datum()
    if traj is None:
        traj = run(datum, mesh, spec, cfg.solver, cfg.space, threads=threads)
    v = cfg.verify
    ledger = ver.compute_ledger(traj.snapshots[0], spec, cfg.space, cfg.solver.t_end, v.z_o)
    checks = []
    if v.moment_bounds:
        checks.append(ver.check_moment_bounds(traj, ledger))
    if v.uniform_bound:
        checks.append(ver.check_uniform_bound(traj, ledger))
    t_end = cfg.solver.t_end
    if v.time_modulus and t_end > 0.0:
        hs = [h * t_end for h in (0.1, 0.05, 0.025)]
        checks.append(ver.check_time_modulus(traj, ledger, hs))
    if v.space_modulus:
        checks.append(ver.check_space_modulus(traj.final, z_max=v.z_o))
    if v.tail_bound and v.tail_samples:
        checks.append(_tail_sweep(mesh, v.tail_samples, seed))
    if v.continuous_dependence:
        start = traj.snapshots[0]
        bumped = DensityField(mesh, start.values * (1.0 + v.perturbation))
        other = run(bumped, mesh, spec, cfg.solver, cfg.space, threads=threads)
        checks.append(ver.check_continuous_dependence(traj, other, spec, cfg.space))
    return traj, VerificationReport(checks, ledger, fingerprint(cfg))


def output_paths(cfg: RunConfig, out_dir=None) -> dict[str, Path]:
    base = Path(out_dir if out_dir is not None else cfg.output.dir)
    return {
        "trajectory": base / cfg.output.trajectory,
        "moments": base / cfg.output.moments,
        "report": base / cfg.output.report,
    }


def initial_density(cfg: RunConfig) -> DensityField:
    return initial_field(cfg.init.datum(), cfg.mesh.build())
