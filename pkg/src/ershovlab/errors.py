"""Exception hierarchy and process exit codes.

Exit code contract: 0 = all checks passed, 1 = a verified invariant was
violated, 2 = malformed or infeasible input.
"""

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_INPUT = 2


class ErshovError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = EXIT_INPUT


class InputError(ErshovError):
    """Malformed file, out-of-range argument, or infeasible request."""

    exit_code = EXIT_INPUT


class VerificationError(ErshovError):
    """An invariant that should hold was found violated."""

    exit_code = EXIT_VIOLATION


class BoundTooWeakError(InputError):
    """The supplied mind-change bound cannot support the requested levels."""
