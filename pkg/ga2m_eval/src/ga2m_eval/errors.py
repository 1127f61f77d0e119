"""Error types raised by this package."""


class InputError(ValueError):
    """Malformed file, out-of-range argument, or schema violation."""


class TrainingBackendUnavailable(EnvironmentError):
    """The requested training library is not installed in this environment."""
