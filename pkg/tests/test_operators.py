import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from coagbreak.errors import CostGuardError, DomainError
from coagbreak.grid import DensityField, build_mesh, quad
from coagbreak.kernels import EfficiencyModel, KernelSpec
from coagbreak.operators import (
    brute_force_rhs,
    breakage_gain,
    coag_gain,
    collision_loss,
    rhs,
    truncation_flux,
    weak_moment_rate,
)

MODELS = [EfficiencyModel.constant(0.5), EfficiencyModel.ratio_bounded(), EfficiencyModel.pure_coagulation()]


@pytest.fixture(scope="module")
def mesh64():
    return build_mesh(1e-3, 20.0, 64)


def _random_field(mesh, rng):
    return DensityField(mesh, rng.random(mesh.cell_count) * np.exp(-mesh.centers * rng.uniform(0.05, 1.0)))


@pytest.mark.parametrize("model", MODELS, ids=lambda m: m.kind)
def test_fast_matches_brute_force(mesh64, model, rng):
    spec = KernelSpec(c=0.8, alpha=0.3, alpha_prime=0.5, efficiency=model)
    for _ in range(5):
        g = _random_field(mesh64, rng)
        fast, slow = rhs(g, spec), brute_force_rhs(g, spec)
        for part in ("gain_coag", "loss", "gain_break", "rhs"):
            a, b = getattr(fast, part), getattr(slow, part)
            assert np.max(np.abs(a - b)) <= 1e-12 * max(np.max(np.abs(b)), 1e-300)
        assert fast.mass_flux == pytest.approx(slow.mass_flux, rel=1e-12, abs=1e-300)


def test_zero_field_gives_zero(mesh64):
    out = rhs(DensityField.zeros(mesh64), KernelSpec())
    assert not np.any(out.rhs) and out.mass_flux == 0.0


def test_zero_rate_gives_zero(mesh64, rng):
    out = rhs(_random_field(mesh64, rng), KernelSpec(c=0.0))
    assert not np.any(out.rhs)


def test_partial_accessors(mesh64, rng):
    g = _random_field(mesh64, rng)
    spec = KernelSpec()
    full = rhs(g, spec)
    assert np.array_equal(coag_gain(g, spec), full.gain_coag)
    assert np.array_equal(collision_loss(g, spec), full.loss)
    assert np.array_equal(breakage_gain(g, spec), full.gain_break)
    assert truncation_flux(g, spec) == full.mass_flux


def test_pure_coagulation_has_no_breakage(mesh64, rng):
    g = _random_field(mesh64, rng)
    assert not np.any(breakage_gain(g, KernelSpec(efficiency=EfficiencyModel.pure_coagulation())))


def test_loss_is_field_times_collision_rate(mesh64, rng):
    g = _random_field(mesh64, rng)
    spec = KernelSpec(alpha=0.25)
    x = mesh64.centers
    phi = 1.0 * (x[:, None] ** 0.25 * x[None, :] ** 0.5 + x[:, None] ** 0.5 * x[None, :] ** 0.25)
    assert np.allclose(collision_loss(g, spec), g.values * (phi @ (g.values * mesh64.widths)), rtol=1e-13)


@pytest.mark.parametrize("model", MODELS, ids=lambda m: m.kind)
def test_mass_balance_is_exact(mesh64, model, rng):
    spec = KernelSpec(efficiency=model)
    g = _random_field(mesh64, rng)
    out = rhs(g, spec)
    scale = quad(mesh64.centers * out.loss, mesh64)
    assert abs(quad(mesh64.centers * out.rhs, mesh64) + out.mass_flux) <= 1e-13 * scale


def test_number_rate_matches_constant_kernel_law():
    # Breaking pairs destroy two particles and create two, so only coalescence changes the count.
    # Fragments below z_min keep their mass but not their count, an O(z_min) effect.
    mesh = build_mesh(1e-3, 200.0, 256)
    g = DensityField.from_function(mesh, lambda z: np.exp(-z))
    spec = KernelSpec.constant_test_mode(1.0, EfficiencyModel.constant(0.5))
    m0 = quad(g.values, mesh)
    assert quad(rhs(g, spec).rhs, mesh) == pytest.approx(-0.25 * m0**2, rel=5e-3)


def test_pure_breakage_number_rate_is_zero_without_truncation():
    mesh = build_mesh(1e-3, 200.0, 128)
    g = DensityField.from_function(mesh, lambda z: np.exp(-z))
    spec = KernelSpec(efficiency=EfficiencyModel.constant(0.0))
    loss = quad(rhs(g, spec).loss, mesh)
    assert abs(weak_moment_rate(g, spec, 0.0)) <= 1e-12 * loss
    assert abs(quad(rhs(g, spec).rhs, mesh)) <= 5e-3 * loss


@pytest.mark.parametrize("model", MODELS, ids=lambda m: m.kind)
def test_weak_form_mass_matches_flux(mesh64, model, rng):
    spec = KernelSpec(efficiency=model)
    g = _random_field(mesh64, rng)
    out = rhs(g, spec)
    assert weak_moment_rate(g, spec, 1.0) == pytest.approx(-out.mass_flux, abs=1e-13 * quad(mesh64.centers * out.loss, mesh64))


def test_weak_form_order_range(mesh64):
    with pytest.raises(DomainError):
        weak_moment_rate(DensityField.zeros(mesh64), KernelSpec(), 1.8)


def test_flux_vanishes_when_no_pair_reaches_cutoff():
    mesh = build_mesh(1e-3, 20.0, 32)
    values = np.where(mesh.centers < 9.0, 1.0, 0.0)
    assert rhs(DensityField(mesh, values), KernelSpec()).mass_flux == 0.0


def test_thread_count_never_changes_bits(rng):
    mesh = build_mesh(1e-4, 50.0, 200)
    g = _random_field(mesh, rng)
    base = rhs(g, KernelSpec(), threads=1)
    for threads in (2, 3, 8):
        other = rhs(g, KernelSpec(), threads=threads)
        assert np.array_equal(base.rhs, other.rhs) and base.mass_flux == other.mass_flux


def test_brute_force_cost_guard():
    mesh = build_mesh(1e-3, 20.0, 600)
    with pytest.raises(CostGuardError):
        brute_force_rhs(DensityField.zeros(mesh), KernelSpec())


@settings(max_examples=25, deadline=None)
@given(arrays(np.float64, 12, elements=st.floats(0.0, 10.0)), st.floats(0.05, 0.5), st.floats(0.0, 1.0))
def test_small_meshes_match_brute_force(values, alpha, e):
    mesh = build_mesh(0.01, 5.0, 12)
    g = DensityField(mesh, values)
    spec = KernelSpec(alpha=alpha, efficiency=EfficiencyModel.constant(e))
    fast, slow = rhs(g, spec), brute_force_rhs(g, spec)
    scale = max(np.max(np.abs(slow.loss)), np.max(np.abs(slow.gain_coag)), np.max(np.abs(slow.gain_break)), 1e-300)
    assert np.max(np.abs(fast.rhs - slow.rhs)) <= 1e-12 * scale


@settings(max_examples=25, deadline=None)
@given(arrays(np.float64, 24, elements=st.floats(0.0, 5.0)))
def test_nonnegative_field_gains_are_nonnegative(values):
    mesh = build_mesh(0.01, 8.0, 24)
    out = rhs(DensityField(mesh, values), KernelSpec())
    assert np.all(out.gain_coag >= 0) and np.all(out.gain_break >= 0) and np.all(out.loss >= 0)
    assert out.mass_flux >= 0.0
