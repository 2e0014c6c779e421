class InstanceError(ValueError):
    """Malformed or invalid instance / allocation input."""


class EngineLimitError(RuntimeError):
    """An engine precondition or safety cap was exceeded."""
