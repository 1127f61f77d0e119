"""Error taxonomy shared by the library and the command line tool."""


class PtfcError(Exception):
    """Base class for all errors raised by this package."""


class InputError(PtfcError):
    """Malformed or inconsistent input (bad JSON, invalid CPT, bad ordering)."""

    exit_code = 2


class CapabilityError(PtfcError):
    """Structurally valid request that exceeds what this implementation can do

    (exhaustive enumeration past the supported variable count, node budget
    exhausted, exact width search past its cap)."""

    exit_code = 3
