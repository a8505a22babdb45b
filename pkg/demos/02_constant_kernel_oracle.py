"""
A closed-form check: the constant kernel
========================================

With ``phi = 1`` and every collision merging, the equation reduces to the
classical Smoluchowski problem.  From ``g0 = exp(-z)`` its solution is

    g(z, t) = (2 / (t + 2))**2 * exp(-2 z / (t + 2)).

This kernel lies outside the power-law class the solver is built for, so it
is only available through ``KernelSpec.constant_test_mode``.
"""

import numpy as np

from coagbreak import EfficiencyModel, KernelSpec, SolverConfig, build_mesh, run, sample
from coagbreak.oracles import moment_ode_reference, smoluchowski_constant, smoluchowski_scenario

sc = smoluchowski_scenario()
traj = run(sc.init, build_mesh(1e-4, 50.0, 256), sc.spec, SolverConfig())

z = np.geomspace(0.01, 10.0, 7)
exact = smoluchowski_constant(z, 1.0, sc.spec)
numeric = sample(traj.final, z)
for zi, e, n in zip(z, exact, numeric):
    print(f"z={zi:7.3f}  exact={e:.6f}  solver={n:.6f}  rel={abs(n - e) / e:.1e}")

###############################################################################
# With breakage switched on the density has no closed form, but the moments
# do: the particle count obeys ``dM0/dt = -E M0^2 / 2`` because a breaking
# pair removes two particles and adds two.

for e in (1.0, 0.5, 0.0):
    spec = KernelSpec.constant_test_mode(1.0, EfficiencyModel.constant(e))
    tr = run(sc.init, build_mesh(1e-4, 50.0, 256), spec, SolverConfig())
    m = tr.moment_log
    ref = moment_ode_reference(spec, m[0].m0, m[0].m1, m[0].m2, 1.0)
    print(f"E={e}: M0 solver {m[-1].m0:.6f} ode {ref.m0[-1]:.6f} | M2 solver {m[-1].m2:.5f} ode {ref.m2[-1]:.5f}")
