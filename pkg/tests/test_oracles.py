import math

import numpy as np
import pytest

from coagbreak.errors import DomainError, ScenarioError
from coagbreak.grid import DensityField, build_mesh, quad, sample
from coagbreak.kernels import EfficiencyModel, KernelSpec
from coagbreak.operators import brute_force_rhs
from coagbreak.oracles import (
    default_scenario,
    moment_ode_reference,
    self_convergence,
    smoluchowski_constant,
    smoluchowski_scenario,
)
from coagbreak.solver import Exponential, SolverConfig, run


def test_closed_form_at_start():
    z = np.linspace(0, 5, 11)
    assert np.allclose(smoluchowski_constant(z, 0.0), np.exp(-z))


def test_closed_form_moments():
    mesh = build_mesh(1e-8, 80.0, 4000)
    for t in (0.5, 1.0, 3.0):
        g = smoluchowski_constant(mesh.centers, t)
        assert quad(g, mesh) == pytest.approx(2 / (t + 2), rel=1e-5)
        assert quad(mesh.centers * g, mesh) == pytest.approx(1.0, rel=1e-5)


def test_closed_form_guards():
    with pytest.raises(ScenarioError):
        smoluchowski_constant(1.0, 1.0, KernelSpec())
    with pytest.raises(ScenarioError):
        smoluchowski_constant(1.0, 1.0, KernelSpec.constant_test_mode(2.0))
    with pytest.raises(ScenarioError):
        smoluchowski_constant(1.0, 1.0, KernelSpec.constant_test_mode(1.0, EfficiencyModel.constant(0.5)))
    with pytest.raises(DomainError):
        smoluchowski_constant(1.0, -1.0)
    assert smoluchowski_constant(1.0, 0.0, KernelSpec.constant_test_mode(1.0, EfficiencyModel.constant(1.0))) == math.exp(-1)


def test_closed_form_is_a_residual_free_solution():
    mesh = build_mesh(1e-4, 60.0, 256)
    spec = smoluchowski_scenario().spec
    t, dt = 0.5, 1e-4
    g = DensityField(mesh, smoluchowski_constant(mesh.centers, t))
    dgdt = (smoluchowski_constant(mesh.centers, t + dt) - smoluchowski_constant(mesh.centers, t - dt)) / (2 * dt)
    residual = dgdt - brute_force_rhs(g, spec).rhs
    window = mesh.centers < 20.0
    assert np.max(np.abs(residual[window])) <= 1e-3 * np.max(g.values)


def test_riccati_curve():
    spec = KernelSpec.constant_test_mode(1.0)
    curves = moment_ode_reference(spec, 1.0, 1.0, 2.0, 1.0)
    assert curves.closed
    assert curves.m0[-1] == pytest.approx(2 / 3, rel=1e-10)
    assert np.allclose(curves.m1, 1.0)
    assert curves.m2[-1] == pytest.approx(3.0, rel=1e-9)  # pure coagulation: dM2/dt = M1^2


def test_half_efficiency_number_decay():
    spec = KernelSpec.constant_test_mode(1.0, EfficiencyModel.constant(0.5))
    curves = moment_ode_reference(spec, 1.0, 1.0, 2.0, 1.0)
    assert curves.m0[-1] == pytest.approx(1 / (1 + 0.25), rel=1e-10)


def test_pure_breakage_keeps_number():
    spec = KernelSpec.constant_test_mode(1.0, EfficiencyModel.constant(0.0))
    curves = moment_ode_reference(spec, 1.0, 1.0, 2.0, 1.0)
    assert np.all(np.diff(curves.m0) >= 0)
    assert np.all(np.diff(curves.m2) <= 0)


def test_general_kernel_gives_envelope():
    curves = moment_ode_reference(KernelSpec(), 1.0, 1.0, 2.0, 1.0)
    assert not curves.closed and curves.notes
    assert curves.m2[-1] == pytest.approx(4 * math.exp(6))


@pytest.mark.parametrize("e", [1.0, 0.5, 0.0])
def test_solver_tracks_moment_odes(e):
    spec = KernelSpec.constant_test_mode(1.0, EfficiencyModel.constant(e))
    traj = run(Exponential(), build_mesh(1e-4, 50.0, 256), spec, SolverConfig())
    first, last = traj.moment_log[0], traj.moment_log[-1]
    curves = moment_ode_reference(spec, first.m0, first.m1, first.m2, 1.0)
    assert last.m0 == pytest.approx(curves.m0[-1], rel=1e-3)
    assert last.m2 == pytest.approx(curves.m2[-1], rel=1e-3)


def test_solver_matches_closed_form():
    sc = smoluchowski_scenario()
    traj = run(sc.init, sc.mesh(256), sc.spec, SolverConfig())
    z = np.geomspace(0.01, 10, 400)
    exact = smoluchowski_constant(z, 1.0)
    assert np.max(np.abs(sample(traj.final, z) - exact)) <= 0.02 * exact.max()


def test_self_convergence_default():
    table = self_convergence(default_scenario(), [64, 128, 256])
    assert table.passed
    assert 1.5 < table.orders[0] < 2.5


def test_self_convergence_identical_levels():
    table = self_convergence(default_scenario(), [32, 32, 32])
    assert table.differences == [0.0, 0.0]
    with pytest.raises(DomainError):
        self_convergence(default_scenario(), [32, 64])
