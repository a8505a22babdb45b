"""Command-line entry point.

Exit codes: 0 success, 1 a check failed (or output could not be written),
2 invalid configuration, 3 numerical instability.
"""
from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from . import io as cio
from . import verification as ver
from .errors import CoagBreakError, ConfigError, InstabilityError, StiffnessError
from .grid import build_mesh, sample
from .moments import moment
from .oracles import OracleScenario, self_convergence, smoluchowski_constant, smoluchowski_scenario
from .solver import run

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3

ORACLE_WINDOW = (0.01, 10.0)
ORACLE_DENSITY_TOL = 0.02
ORACLE_M0_TOL = 0.01


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", metavar="DIR", help="output directory (overrides [output] dir)")
    common.add_argument("--threads", type=int, default=1, metavar="N", help="worker threads; never changes results")
    common.add_argument("--seed", type=int, default=0, metavar="S", help="seed for random-field property sweeps")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="coagbreak", description="Coagulation with collisional breakage")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", parents=[common], help="integrate and write the trajectory")
    p.add_argument("config")
    p = sub.add_parser("verify", parents=[common], help="integrate and run every estimate check")
    p.add_argument("config")
    p = sub.add_parser("convergence-study", parents=[common], help="truncation and mesh refinement study")
    p.add_argument("config")
    p.add_argument("--levels", type=int, default=3, metavar="K")
    p = sub.add_parser("oracle-compare", parents=[common], help="constant kernel against its closed form")
    p.add_argument("config", nargs="?")
    return parser


def _write_outputs(traj, paths):
    cio.write_trajectory(traj, paths["trajectory"])
    cio.write_moments(traj, paths["moments"])


def _cmd_run(cfg, args) -> int:
    mesh = cfg.mesh.build()
    traj = run(cfg.init.datum(), mesh, cfg.kernel.spec(), cfg.solver, cfg.space, threads=args.threads)
    paths = cio.output_paths(cfg, args.out)
    _write_outputs(traj, paths)
    last = traj.moment_log[-1]
    print(f"t={last.t:g} steps={len(traj.moment_log) - 1} M0={last.m0:.10g} M1={last.m1:.10g} flux_out={last.flux_out:.6g}")
    print(f"wrote {paths['trajectory']} and {paths['moments']}")
    return EXIT_OK


def _cmd_verify(cfg, args) -> int:
    traj, report = cio.verify_run(cfg, threads=args.threads, seed=args.seed)
    paths = cio.output_paths(cfg, args.out)
    _write_outputs(traj, paths)
    cio.write_report(report, paths["report"])
    for c in report.checks:
        print(f"{c.name}: {'pass' if c.passed else 'FAIL'} margin={c.margin:.6g}")
        for msg in c.failures[:5]:
            print(f"  {msg}")
    print(f"wrote {paths['report']}")
    return EXIT_OK if report.passed else EXIT_CHECK


def _cmd_convergence(cfg, args) -> int:
    k = args.levels
    if k < 3:
        raise ConfigError([f"--levels must be at least 3, got {k}"])
    spec = cfg.kernel.spec()
    m = cfg.mesh
    runs = []
    lines = []
    for j in range(k):
        shrink = 2 ** (k - 1 - j)
        cells = max(1, m.cells // shrink)
        mesh = build_mesh(m.z_min * shrink, m.n / shrink, cells, m.kind)
        traj = run(cfg.init.datum(), mesh, spec, cfg.solver, cfg.space, threads=args.threads)
        runs.append(traj)
        lines.append(f"level {j}: n={mesh.n:g} z_min={mesh.z_min:g} cells={cells}")
    mass = ver.check_mass_conservation_limit(runs)
    scenario = OracleScenario("config", spec, cfg.init.datum(), m.z_min, m.n, cfg.solver.t_end, m.kind)
    resolutions = [max(1, m.cells // 2 ** (k - 1 - j)) for j in range(k)]
    table = self_convergence(scenario, resolutions, cfg=cfg.solver, threads=args.threads)
    selfconv = ver.CheckReport(
        "self_convergence",
        table.passed,
        {f"{a}->{b}": d for a, b, d in zip(resolutions, resolutions[1:], table.differences)},
        [] if table.passed else ["differences do not decrease"],
        {"orders": table.orders},
    )
    for line, d in zip(lines, mass.details["defects"]):
        print(f"{line} mass_defect={d:.6g}")
    print("self-convergence differences: " + " ".join(f"{d:.4g}" for d in table.differences))
    print("observed orders: " + " ".join(f"{o:.3g}" for o in table.orders))
    report = cio.VerificationReport([mass, selfconv], None, cio.fingerprint(cfg))
    paths = cio.output_paths(cfg, args.out)
    cio.write_report(report, paths["report"].with_name("convergence.txt"))
    for c in report.checks:
        print(f"{c.name}: {'pass' if c.passed else 'FAIL'}")
    return EXIT_OK if report.passed else EXIT_CHECK


def oracle_compare(cfg: cio.RunConfig, threads: int = 1):
    """Run the unit constant kernel from ``e^-z`` on ``cfg``'s mesh and compare with the closed form."""
    sc = smoluchowski_scenario()
    mesh = cfg.mesh.build()
    traj = run(sc.init, mesh, sc.spec, cfg.solver, threads=threads)
    t = cfg.solver.t_end
    z = np.geomspace(*ORACLE_WINDOW, 1000)
    z = z[(z >= mesh.z_min) & (z <= mesh.n)]
    exact = smoluchowski_constant(z, t, sc.spec)
    density_err = float(np.max(np.abs(sample(traj.final, z) - exact)) / np.max(exact))
    m0_exact = 2.0 / (t + 2.0)
    m0_err = abs(moment(traj.final, 0.0) - m0_exact) / m0_exact
    checks = [
        ver.CheckReport("oracle_density", density_err <= ORACLE_DENSITY_TOL, {"rel_sup": density_err / ORACLE_DENSITY_TOL}),
        ver.CheckReport("oracle_M0", m0_err <= ORACLE_M0_TOL, {"rel": m0_err / ORACLE_M0_TOL}),
    ]
    for c in checks:
        if not c.passed:
            c.failures.append(f"{c.name} error exceeds tolerance")
    return traj, checks, density_err, m0_err


def _cmd_oracle(cfg, args) -> int:
    traj, checks, density_err, m0_err = oracle_compare(cfg, args.threads)
    print(f"density relative sup error {density_err:.4g} (tolerance {ORACLE_DENSITY_TOL})")
    print(f"M0 relative error {m0_err:.4g} (tolerance {ORACLE_M0_TOL})")
    report = cio.VerificationReport(checks, None, cio.fingerprint(cfg))
    paths = cio.output_paths(cfg, args.out)
    cio.write_report(report, paths["report"].with_name("oracle.txt"))
    return EXIT_OK if report.passed else EXIT_CHECK


COMMANDS = {
    "run": _cmd_run,
    "verify": _cmd_verify,
    "convergence-study": _cmd_convergence,
    "oracle-compare": _cmd_oracle,
}


def cli_main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        if args.threads < 1:
            raise ConfigError([f"--threads must be at least 1, got {args.threads}"])
        cfg = cio.load_config(args.config) if args.config else cio.RunConfig()
        return COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print("configuration error:", file=sys.stderr)
        for problem in exc.problems:
            print(f"  {problem}", file=sys.stderr)
        return EXIT_CONFIG
    except (InstabilityError, StiffnessError) as exc:
        print(f"numerical instability: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except CoagBreakError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CHECK


def main() -> None:
    sys.exit(cli_main())
