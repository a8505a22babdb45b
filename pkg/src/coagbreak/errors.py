"""Exception hierarchy shared by all modules."""


class CoagBreakError(Exception):
    """Base class for every error raised by this package."""


class DomainError(CoagBreakError, ValueError):
    """An argument lies outside the domain of a formula."""


class ConstraintError(CoagBreakError, ValueError):
    """Kernel or space parameters violate the admissibility restrictions."""


class ConfigError(CoagBreakError):
    """A run configuration could not be parsed or validated.

    ``problems`` holds every violated constraint, not only the first one.
    """

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class CostGuardError(CoagBreakError):
    """Refusal to run an oracle on a problem that is too large."""


class InstabilityError(CoagBreakError):
    """Time integration produced a significantly negative density."""


class StiffnessError(CoagBreakError):
    """Step-size control shrank the time step below the underflow limit."""


class ScenarioError(CoagBreakError):
    """A closed-form oracle was used outside the scenario it solves."""
