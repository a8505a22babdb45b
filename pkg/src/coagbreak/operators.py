"""Coagulation gain, collision loss and collisional-breakage gain on a mesh.

The cell centers act as pivots.  Each colliding pair ``(x_i, x_j)`` with
``s = x_i + x_j < n`` either coalesces, producing one particle of volume ``s``
that is shared between the two pivots bracketing ``s``, or breaks into
fragments distributed by ``P(z | x_i; x_j)``.  Fragments are integrated
cell by cell in closed form and each cell's fragments are shared between the
two pivots bracketing their mean volume.  Both sharing rules preserve number
and mass, so the only mass that leaves the system is carried by pairs with
``s >= n``: the truncated operator drops their products entirely.

Two routes evaluate the same discrete operator:

* :class:`CollisionOperator` (``rhs``) scatters pair contributions with
  ``np.bincount`` and handles fragments in complete cells with suffix sums
  over the total volume ``s`` (the ``P`` factor separates into ``z`` and
  ``s`` parts), so a call costs O(N^2);
* :func:`brute_force_rhs` loops over every output cell and every pair, O(N^3).
"""
from __future__ import annotations

import functools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import CostGuardError, DomainError
from .grid import DensityField, Mesh
from .kernels import KernelSpec, efficiency, p_moment, phi
from .moments import SpaceParams

# Row-block size of the pair loop.  Fixed so that the summation order, and so
# every result bit, is independent of the thread count.
BLOCK_ROWS = 32
BRUTE_FORCE_MAX_CELLS = 512


@dataclass
class OperatorOutput:
    gain_coag: np.ndarray
    loss: np.ndarray
    gain_break: np.ndarray
    rhs: np.ndarray
    mass_flux: float = 0.0  # mass per unit time carried by pairs with x_i + x_j >= n


def _pivot_share(pivots, v):
    """Two-pivot share of particles of volume ``v`` that keeps number and mass.

    Returns ``(lo, hi, frac_lo, frac_hi)``; fractions multiply the particle
    count.  Volumes at or beyond the last pivot go to the last pivot with
    the count ``v / x_last``, which keeps the mass only.
    """
    last = pivots.size - 1
    b = np.searchsorted(pivots, v, side="right") - 1
    beyond = b >= last
    below = b < 0
    lo = np.clip(b, 0, last)
    hi = np.clip(b + 1, 0, last)
    x_lo = pivots[lo]
    x_hi = pivots[hi]
    with np.errstate(divide="ignore", invalid="ignore"):
        a = (x_hi - v) / (x_hi - x_lo)
    frac_lo = np.where(beyond, v / pivots[last], a)
    frac_lo = np.where(below, v / pivots[0], frac_lo)
    frac_hi = np.where(beyond | below, 0.0, 1.0 - a)
    return lo, hi, frac_lo, frac_hi


def _cell_average_share(pivots, cell, d_num, d_mass):
    """Share ``d_num`` fragments of total volume ``d_mass`` found in ``cell``.

    The pivots are ``cell`` and its neighbour on the side of the mean volume.
    Past either end of the mesh only the mass is kept.
    """
    last = pivots.size - 1
    d_num = np.asarray(d_num, dtype=float)
    ok = d_num > 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        mean = np.where(ok, d_mass / np.where(ok, d_num, 1.0), pivots[cell])
    upper = mean >= pivots[cell]
    lo = np.where(upper, cell, cell - 1)
    hi = np.where(upper, cell + 1, cell)
    edge = (lo < 0) | (hi > last)
    lo = np.clip(lo, 0, last)
    hi = np.clip(hi, 0, last)
    x_lo = pivots[lo]
    x_hi = pivots[hi]
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.where(edge, 0.0, (x_hi - mean) / np.where(edge, 1.0, x_hi - x_lo))
    n_lo = np.where(edge, d_mass / pivots[cell], d_num * a)
    n_hi = np.where(edge, 0.0, d_num * (1.0 - a))
    n_lo = np.where(ok, n_lo, 0.0)
    n_hi = np.where(ok, n_hi, 0.0)
    # the edge share belongs to the cell itself
    lo = np.where(edge, cell, lo)
    return lo, hi, n_lo, n_hi


class CollisionOperator:
    """Precomputed pair geometry for one ``(mesh, spec)`` combination."""

    def __init__(self, mesh: Mesh, spec: KernelSpec):
        self.mesh = mesh
        self.spec = spec
        x, e = mesh.centers, mesh.edges
        count = mesh.cell_count
        theta = spec.theta
        p1 = theta + 1.0
        p2 = theta + 2.0
        k_num = p2 / p1

        xi = x[:, None]
        xj = x[None, :]
        self.phi = np.asarray(phi(xi, xj, spec), dtype=float) * np.ones((count, count))
        e_coal, e_break = efficiency(xi * np.ones((1, count)), xj * np.ones((count, 1)), spec.efficiency)
        s = xi + xj
        inside = s < mesh.n
        self.inside = inside
        self.coag_weight = np.where(inside, 0.5 * e_coal * self.phi, 0.0)
        self.break_weight = np.where(inside, 0.5 * e_break * self.phi, 0.0)
        self.flux_weight = np.where(inside, 0.0, xi * self.phi)

        self.coag_lo, self.coag_hi, self.coag_flo, self.coag_fhi = _pivot_share(x, s)

        # Fragments of one event in complete cells scale as s**-(theta+1).
        self.s_scale = np.where(inside, s ** (-p1), 0.0)
        cell_of_s = np.clip(np.searchsorted(e, s, side="right") - 1, 0, count - 1)
        self.cell_of_s = cell_of_s
        left = e[cell_of_s]
        part_num = np.where(inside, k_num * (1.0 - (left / s) ** p1), 0.0)
        part_mass = np.where(inside, s - left**p2 / s**p1, 0.0)
        (self.part_lo, self.part_hi, self.part_nlo, self.part_nhi) = _cell_average_share(
            x, cell_of_s, part_num, part_mass
        )

        cells = np.arange(count)
        unit_num = k_num * (e[1:] ** p1 - e[:-1] ** p1)
        unit_mass = e[1:] ** p2 - e[:-1] ** p2
        (self.full_lo, self.full_hi, self.full_nlo, self.full_nhi) = _cell_average_share(
            x, cells, unit_num, unit_mass
        )
        # below z_min: keep the mass on the first pivot
        self.sub_number = mesh.z_min**p2 / x[0]

        self.blocks = [(r0, min(r0 + BLOCK_ROWS, count)) for r0 in range(0, count, BLOCK_ROWS)]

    def _block(self, r0, r1, gw):
        count = self.mesh.cell_count
        pair = gw[r0:r1, None] * gw[None, :]
        sl = slice(r0, r1)
        coag = self.coag_weight[sl] * pair
        coag_num = np.bincount(
            self.coag_lo[sl].ravel(), (coag * self.coag_flo[sl]).ravel(), minlength=count
        ) + np.bincount(self.coag_hi[sl].ravel(), (coag * self.coag_fhi[sl]).ravel(), minlength=count)
        brk = self.break_weight[sl] * pair
        brk_num = np.bincount(
            self.part_lo[sl].ravel(), (brk * self.part_nlo[sl]).ravel(), minlength=count
        ) + np.bincount(self.part_hi[sl].ravel(), (brk * self.part_nhi[sl]).ravel(), minlength=count)
        brk_bins = np.bincount(
            self.cell_of_s[sl].ravel(), (brk * self.s_scale[sl]).ravel(), minlength=count
        )
        collision_rate = np.sum(self.phi[sl] * gw[None, :], axis=1)
        flux = float(np.sum(self.flux_weight[sl] * pair))
        return coag_num, brk_num, brk_bins, collision_rate, flux

    def evaluate(self, values, threads: int = 1) -> OperatorOutput:
        mesh = self.mesh
        count = mesh.cell_count
        values = np.asarray(values, dtype=float)
        gw = values * mesh.widths
        if threads > 1 and len(self.blocks) > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                parts = list(pool.map(lambda b: self._block(b[0], b[1], gw), self.blocks))
        else:
            parts = [self._block(r0, r1, gw) for r0, r1 in self.blocks]

        coag_num = np.zeros(count)
        brk_num = np.zeros(count)
        brk_bins = np.zeros(count)
        collision_rate = np.empty(count)
        flux = 0.0
        for (r0, r1), (cn, bn, bb, cr, fl) in zip(self.blocks, parts):
            coag_num += cn
            brk_num += bn
            brk_bins += bb
            collision_rate[r0:r1] = cr
            flux += fl

        # events whose total volume lies beyond cell m fill cell m completely
        tail = np.cumsum(brk_bins[::-1])[::-1]
        beyond = np.append(tail[1:], 0.0)
        brk_num += np.bincount(self.full_lo, beyond * self.full_nlo, minlength=count)
        brk_num += np.bincount(self.full_hi, beyond * self.full_nhi, minlength=count)
        brk_num[0] += tail[0] * self.sub_number

        gain_coag = coag_num / mesh.widths
        gain_break = brk_num / mesh.widths
        loss = values * collision_rate
        rhs = gain_coag - loss + gain_break
        return OperatorOutput(gain_coag, loss, gain_break, rhs, flux)


@functools.lru_cache(maxsize=16)
def get_operator(mesh: Mesh, spec: KernelSpec) -> CollisionOperator:
    return CollisionOperator(mesh, spec)


def rhs(g: DensityField, spec: KernelSpec, threads: int = 1) -> OperatorOutput:
    """Right-hand side ``C(g) - B(g) + B*(g)`` of the truncated system."""
    return get_operator(g.mesh, spec).evaluate(g.values, threads=threads)


def coag_gain(g: DensityField, spec: KernelSpec, threads: int = 1) -> np.ndarray:
    return rhs(g, spec, threads).gain_coag


def collision_loss(g: DensityField, spec: KernelSpec, threads: int = 1) -> np.ndarray:
    return rhs(g, spec, threads).loss


def breakage_gain(g: DensityField, spec: KernelSpec, threads: int = 1) -> np.ndarray:
    return rhs(g, spec, threads).gain_break


def truncation_flux(g: DensityField, spec: KernelSpec) -> float:
    """Mass per unit time removed by collisions whose total volume reaches ``n``."""
    return rhs(g, spec).mass_flux


def brute_force_rhs(g: DensityField, spec: KernelSpec) -> OperatorOutput:
    """Reference evaluation of :func:`rhs` by direct loops over output cells and pairs."""
    from ._brute import brute_force_parts

    mesh = g.mesh
    if mesh.cell_count > BRUTE_FORCE_MAX_CELLS:
        raise CostGuardError(
            f"brute-force oracle refuses {mesh.cell_count} cells (limit {BRUTE_FORCE_MAX_CELLS})"
        )
    eff = spec.efficiency
    eff_code = {"constant": 0, "ratio_bounded": 1, "pure_coagulation": 2}[eff.kind]
    gain_coag, loss, gain_break, flux = brute_force_parts(
        mesh.edges,
        mesh.centers,
        mesh.widths,
        np.asarray(g.values, dtype=float),
        spec.c,
        spec.alpha,
        spec.alpha_prime,
        eff_code,
        eff.value,
        spec.theta,
        mesh.n,
    )
    return OperatorOutput(gain_coag, loss, gain_break, gain_coag - loss + gain_break, flux)


def weak_moment_rate(
    g: DensityField, spec: KernelSpec, r: float, space: SpaceParams | None = None
) -> float:
    """Rate of change of ``M_r`` from the symmetrized pair sums.

    Each colliding pair with ``s = x_i + x_j < n`` contributes ``s**r`` when it
    coalesces and the exact fragment moment ``p_moment(r, s)`` when it breaks;
    every pair removes ``x_i**r + x_j**r``.  This is independent of the pivot
    sharing used by :func:`rhs`; for ``r = 1`` the two agree to rounding.
    """
    space = space or SpaceParams()
    if not space.contains(r):
        raise DomainError(f"moment order {r} outside [-{space.sigma1}, {space.sigma2}]")
    op = get_operator(g.mesh, spec)
    x = g.mesh.centers
    gw = g.values * g.mesh.widths
    pair = gw[:, None] * gw[None, :]
    s = x[:, None] + x[None, :]
    inside = op.inside
    s_in = np.where(inside, s, 1.0)
    gain = np.where(inside, op.coag_weight * s_in**r + op.break_weight * p_moment(r, s_in, spec.theta), 0.0)
    loss = op.phi * x[:, None] ** r
    return float(np.sum((gain - loss) * pair))
