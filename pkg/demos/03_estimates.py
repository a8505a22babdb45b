"""
Checking the a-priori estimates
===============================

The existence argument bounds moments, pointwise values and time and space
oscillations of every truncated solution by explicit constants.  Here those
constants are evaluated for the default scenario and compared with the
computed trajectory.
"""

import math

from coagbreak import EfficiencyModel, Exponential, KernelSpec, SolverConfig, build_mesh, run
from coagbreak.verification import (
    SpaceParams,
    check_continuous_dependence,
    check_moment_bounds,
    check_uniform_bound,
    compute_ledger,
    modulus_space,
    modulus_time,
)

spec = KernelSpec(efficiency=EfficiencyModel.constant(0.5))
mesh = build_mesh(1e-4, 50.0, 256)
params = SpaceParams(0.5, 1.5)
traj = run(Exponential(), mesh, spec, SolverConfig())
ledger = compute_ledger(traj.snapshots[0], spec, params, T=1.0, Z_o=10.0)

for key, value in ledger.as_dict().items():
    print(f"{key:>10} = {value:.6g}")

###############################################################################
# ``S(T)`` is far beyond the float range, so it is kept as a logarithm.
# The bounds hold with a wide margin.

print(check_moment_bounds(traj, ledger).ratios)
uniform = check_uniform_bound(traj, ledger)
print("max g/A:", uniform.ratios["g/A"], " log(g/S):", uniform.details["log_ratio_S_T"])

###############################################################################
# Time and space oscillations shrink with the increment.

for h in (0.1, 0.05, 0.025):
    print(f"h={h}: time modulus / h = {modulus_time(traj, h, 10.0) / h:.4f}")
for h in (0.2, 0.1, 0.05):
    print(f"h={h}: space modulus = {modulus_space(traj.final, h, 10.0):.4f}")

###############################################################################
# Perturbing the datum by 1% moves the solution by far less than the
# Gronwall bound ``Q(0) exp(Theta t)`` allows.

bumped = run(Exponential(1.01), mesh, spec, SolverConfig())
report = check_continuous_dependence(traj, bumped, spec, params)
theta = report.details["Theta"]
for t, q in report.details["Q"][::6]:
    print(f"t={t:.3f}  Q={q:.6f}  bound={report.details['Q0'] * math.exp(theta * t):.3e}")
