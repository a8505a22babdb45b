"""Acceptance criteria AC1-AC10 at their stated tolerances.

Each test records one PASS/FAIL line; the lines are printed together at the
end of the pytest run.
"""
import math
import time

import numpy as np
import pytest
from scipy import integrate

from coagbreak.cli import cli_main
from coagbreak.grid import DensityField, build_mesh, sample
from coagbreak.kernels import EfficiencyModel, KernelSpec, breakage_p, p_moment
from coagbreak.moments import moment
from coagbreak.operators import brute_force_rhs, rhs
from coagbreak.oracles import smoluchowski_constant, smoluchowski_scenario
from coagbreak.solver import Exponential, SolverConfig, run
from coagbreak.verification import (
    SpaceParams,
    check_continuous_dependence,
    check_mass_conservation_limit,
    check_moment_bounds,
    check_space_modulus,
    check_uniform_bound,
    compute_ledger,
    modulus_time,
)

Z_O = 10.0


@pytest.fixture(scope="module")
def ledger(default_traj, default_spec, default_params):
    return compute_ledger(default_traj.snapshots[0], default_spec, default_params, 1.0, Z_O)


def test_ac1_operator_matches_brute_force(acceptance):
    mesh = build_mesh(1e-4, 50.0, 64)
    rng = np.random.default_rng(1)
    worst = {}
    for model in (EfficiencyModel.constant(0.5), EfficiencyModel.ratio_bounded(), EfficiencyModel.pure_coagulation()):
        spec = KernelSpec(efficiency=model)
        err = 0.0
        for _ in range(100):
            g = DensityField(mesh, rng.random(64) * np.exp(-mesh.centers * rng.uniform(0.0, 1.0)))
            fast, slow = rhs(g, spec).rhs, brute_force_rhs(g, spec).rhs
            err = max(err, np.max(np.abs(fast - slow)) / np.max(np.abs(slow)))
        worst[model.kind] = err
    ok = max(worst.values()) <= 1e-8
    acceptance("AC1", ok, "max rel sup diff " + ", ".join(f"{k}={v:.2e}" for k, v in worst.items()) + " (tol 1e-8)")
    assert ok


def test_ac2_fragment_distribution_identities(acceptance):
    rng = np.random.default_rng(2)
    worst = 0.0
    for _ in range(100):
        z1, z2 = rng.uniform(1e-3, 10.0, 2)
        s = z1 + z2
        for r in (0, 1, 2):
            value, _ = integrate.quad(lambda z: z**r * breakage_p(z, z1, z2), 0.0, s, epsabs=0.0, epsrel=1e-12)
            exact = p_moment(r, s)
            law = 2.0 / (r + 1.0) * s**r
            worst = max(worst, abs(value - exact) / exact, abs(exact - law) / law)
            if r == 0:
                worst = max(worst, abs(value - 2.0) / 2.0)
            if r == 1:
                worst = max(worst, abs(value - s) / s)
    ok = worst <= 1e-6
    acceptance("AC2", ok, f"max rel error {worst:.2e} over 100 pairs, r in {{0,1,2}} (tol 1e-6)")
    assert ok


def test_ac3_truncated_mass_law(default_traj, acceptance):
    log = default_traj.moment_log
    m1_0, m0_0 = log[0].m1, log[0].m0
    excess_m1 = excess_rate = excess_m0 = -math.inf
    for a, b in zip(log, log[1:]):
        dt = b.t - a.t
        decrease = (a.m1 - b.m1) / (m1_0 * dt)
        flux = (b.flux_out - a.flux_out) / (m1_0 * dt)
        excess_m1 = max(excess_m1, -decrease)
        excess_rate = max(excess_rate, decrease - flux)
        excess_m0 = max(excess_m0, (b.m0 - a.m0) / (m0_0 * dt))
    ok = excess_m1 <= 1e-6 and excess_rate <= 1e-6 and excess_m0 <= 1e-6
    acceptance(
        "AC3",
        ok,
        f"max M1 growth rate {excess_m1:.2e}, max (decrease - flux) rate {excess_rate:.2e}, "
        f"max M0 growth rate {excess_m0:.2e} (tol 1e-6 per unit time)",
    )
    assert ok


def test_ac4_moment_bounds(default_traj, ledger, acceptance):
    report = check_moment_bounds(default_traj, ledger)
    last = default_traj.moment_log[-1]
    final = {"M0": last.m0 / ledger.Gamma0, "M1": last.m1 / ledger.Gamma1}
    r = report.ratios
    # M0 and M1 equal their bounds at t = 0 by definition of the bounds
    ok = (
        report.passed
        and r["M2"] < 1.0
        and r["M_neg"] < 1.0
        and r["M0"] <= 1.0 + 1e-6
        and r["M1"] <= 1.0 + 1e-6
        and final["M0"] < 1.0
        and final["M1"] < 1.0
    )
    acceptance(
        "AC4",
        ok,
        "max ratios " + ", ".join(f"{k}={v:.6g}" for k, v in r.items())
        + f"; at T: M0={final['M0']:.6g}, M1={final['M1']:.10g}",
    )
    assert ok


def test_ac5_pointwise_majorant(default_traj, ledger, acceptance):
    report = check_uniform_bound(default_traj, ledger, Z_O)
    ok = report.passed
    acceptance(
        "AC5",
        ok,
        f"max g/A = {report.ratios['g/A']:.3e} on [0,{Z_O:g}]x[0,1]; log(g/S_T) <= {report.details['log_ratio_S_T']:.4g}",
    )
    assert ok


def test_ac6_equicontinuity(default_traj, ledger, acceptance):
    rates = {h: modulus_time(default_traj, h, Z_O) / h for h in (0.1, 0.05, 0.025)}
    time_ok = all(rate <= ledger.C_emp for rate in rates.values())
    space = check_space_modulus(default_traj.final, (0.2, 0.1, 0.05), slack=0.1)
    ok = time_ok and space.passed
    moduli = space.details["moduli"]
    acceptance(
        "AC6",
        ok,
        "modulus_time/h " + ", ".join(f"h={h:g}:{v:.4g}" for h, v in rates.items())
        + f" <= C_emp={ledger.C_emp:.3g}; modulus_space "
        + ", ".join(f"h={h:g}:{v:.4g}" for h, v in moduli.items()),
    )
    assert ok


def test_ac7_uniqueness_and_continuous_dependence(default_traj, default_spec, default_mesh, default_params, acceptance):
    twin = run(Exponential(), default_mesh, default_spec, SolverConfig())
    bitwise = all(np.array_equal(a.values, b.values) for a, b in zip(default_traj.snapshots, twin.snapshots))
    same = check_continuous_dependence(default_traj, twin, default_spec, default_params)
    q_zero = all(q == 0.0 for _, q in same.details["Q"])
    bumped = run(Exponential(1.01), default_mesh, default_spec, SolverConfig())
    report = check_continuous_dependence(default_traj, bumped, default_spec, default_params, rel_slack=1e-3)
    ok = bitwise and q_zero and report.passed
    acceptance(
        "AC7",
        ok,
        f"identical runs Q==0: {q_zero}; perturbed max Q/(Q0 e^(Theta t)) = {report.ratios['Q/bound']:.4g}, "
        f"Theta = {report.details['Theta']:.4g}",
    )
    assert ok


def test_ac8_mass_conservation_in_the_limit(default_spec, acceptance):
    start = time.perf_counter()
    levels = [(25.0, 2e-4, 128), (50.0, 1e-4, 256), (100.0, 5e-5, 512)]
    runs = [run(Exponential(), build_mesh(z_min, n, cells), default_spec, SolverConfig()) for n, z_min, cells in levels]
    report = check_mass_conservation_limit(runs, slack=0.0)
    defects = report.details["defects"]
    elapsed = time.perf_counter() - start
    strictly = all(b < a for a, b in zip(defects, defects[1:]))
    ok = report.passed and strictly and elapsed <= 300.0
    acceptance("AC8", ok, "defects " + ", ".join(f"{d:.3e}" for d in defects) + f" in {elapsed:.1f}s")
    assert ok


def test_ac9_smoluchowski_oracle(acceptance):
    sc = smoluchowski_scenario()
    traj = run(sc.init, build_mesh(1e-4, 50.0, 256), sc.spec, SolverConfig())
    z = np.geomspace(0.01, 10.0, 2000)
    exact = smoluchowski_constant(z, 1.0, sc.spec)
    density = float(np.max(np.abs(sample(traj.final, z) - exact)) / np.max(exact))
    m0 = moment(traj.final, 0.0)
    m0_err = abs(m0 - 2.0 / 3.0) / (2.0 / 3.0)
    ok = density <= 0.02 and m0_err <= 0.01
    acceptance("AC9", ok, f"density rel sup error {density:.3e} (tol 2e-2), M0(1)={m0:.6f} rel error {m0_err:.2e} (tol 1e-2)")
    assert ok


def test_ac10_thread_count_determinism(tmp_path, acceptance):
    cfg = tmp_path / "default.cfg"
    cfg.write_text("")
    codes = [cli_main(["run", str(cfg), "--out", str(tmp_path / f"t{n}"), "--threads", str(n)]) for n in (1, 8)]
    a = (tmp_path / "t1" / "trajectory.csv").read_bytes()
    b = (tmp_path / "t8" / "trajectory.csv").read_bytes()
    ok = codes == [0, 0] and a == b
    acceptance("AC10", ok, f"trajectory CSVs {len(a)} bytes, identical: {a == b}")
    assert ok
