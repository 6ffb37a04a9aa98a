"""Exception types shared across the package.

Each carries the CLI exit code it maps to.
"""


class FleetEnergyError(Exception):
    exit_code = 1


class ConfigError(FleetEnergyError):
    exit_code = 2


class DataError(FleetEnergyError):
    exit_code = 3


class SchemaError(DataError):
    """A file's header does not match the expected column layout."""


class NumericalError(FleetEnergyError):
    exit_code = 4


class NoPath(FleetEnergyError):
    """Raised when two routing-graph nodes are not connected."""


class StageError(FleetEnergyError):
    """Wraps a failure inside one pipeline stage."""

    def __init__(self, stage, cause):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause
        self.exit_code = getattr(cause, "exit_code", 1)
