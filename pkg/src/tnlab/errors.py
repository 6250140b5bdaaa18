"""Exception types shared across the package."""


class ResourceLimitError(RuntimeError):
    """A requested computation exceeds a configured size cap."""


class DegenerateStateError(RuntimeError):
    """A normalized quantity was requested for a state with vanishing norm."""
