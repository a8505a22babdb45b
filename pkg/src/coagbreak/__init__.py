"""Coagulation with collisional breakage: truncated solver and estimate checks."""
from .errors import (
    CoagBreakError,
    ConfigError,
    ConstraintError,
    CostGuardError,
    DomainError,
    InstabilityError,
    ScenarioError,
    StiffnessError,
)
from .grid import DensityField, Mesh, build_mesh, quad, sample
from .kernels import EfficiencyModel, KernelSpec
from .moments import SpaceParams, moment, weighted_norm
from .operators import brute_force_rhs, rhs
from .solver import Exponential, Monodisperse, SolverConfig, Trajectory, TruncatedPowerExp, run, step
from .verification import BoundLedger, compute_ledger
from .io import RunConfig, parse_config

__all__ = [
    "CoagBreakError",
    "ConfigError",
    "ConstraintError",
    "CostGuardError",
    "DomainError",
    "InstabilityError",
    "ScenarioError",
    "StiffnessError",
    "DensityField",
    "Mesh",
    "build_mesh",
    "quad",
    "sample",
    "EfficiencyModel",
    "KernelSpec",
    "SpaceParams",
    "moment",
    "weighted_norm",
    "brute_force_rhs",
    "rhs",
    "Exponential",
    "Monodisperse",
    "SolverConfig",
    "Trajectory",
    "TruncatedPowerExp",
    "run",
    "step",
    "BoundLedger",
    "compute_ledger",
    "RunConfig",
    "parse_config",
]

__version__ = "0.1.0"
