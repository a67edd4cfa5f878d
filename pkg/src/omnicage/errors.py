"""Exception hierarchy shared by the library and the CLI."""


class OmnicageError(Exception):
    """Base class for all library errors."""


class ParameterError(OmnicageError, ValueError):
    """A physical parameter is out of its valid range."""


class ConfigurationError(OmnicageError, ValueError):
    """Inconsistent configuration (length mismatch, unknown kind, bad value)."""


class FormationSizeError(ConfigurationError):
    """A structure needs at least three docked modules."""


class DegenerateMapperError(OmnicageError):
    """The velocity mapper has numerical rank below 3."""

    def __init__(self, message: str, rank: int | None = None):
        super().__init__(message)
        self.rank = rank


class InfeasibleFormationError(OmnicageError):
    """The formation fails a docking-geometry feasibility check."""

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report


class OptimizerError(OmnicageError):
    """No full-rank heading configuration was found."""


class SearchCostError(OmnicageError):
    """Exhaustive grid search refused because the grid is too large."""


class ScenarioError(OmnicageError):
    """A simulation stage failed; ``stage`` names which one."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"stage {stage}: {message}")
        self.stage = stage


class TraceError(OmnicageError, ValueError):
    """A trace is empty, unreadable or contains invalid rows."""
