"""Error types shared across modules."""


class SchemaError(ValueError):
    """A config or data file failed schema validation."""


class TrajectoryOutOfRegionError(RuntimeError):
    """A simulated camera position left the reachable region."""
