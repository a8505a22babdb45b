"""
Mass conservation in the limit
==============================

Each truncated problem loses the mass carried by collisions whose total
volume reaches ``n``.  Doubling ``n`` (and refining the mesh with it) should
drive that loss to zero.
"""

from coagbreak import EfficiencyModel, Exponential, KernelSpec, SolverConfig, build_mesh, run
from coagbreak.verification import check_mass_conservation_limit

spec = KernelSpec(efficiency=EfficiencyModel.constant(0.5))
levels = [(25.0, 2e-4, 128), (50.0, 1e-4, 256), (100.0, 5e-5, 512)]
runs = [run(Exponential(), build_mesh(z_min, n, cells), spec, SolverConfig()) for n, z_min, cells in levels]
report = check_mass_conservation_limit(runs)
for (n, z_min, cells), defect in zip(levels, report.details["defects"]):
    print(f"n={n:5.0f} z_min={z_min:.0e} cells={cells:4d}  relative mass defect {defect:.3e}")
print("monotone:", report.passed)
