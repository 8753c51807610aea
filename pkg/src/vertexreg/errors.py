class ArgumentError(ValueError):
    """Bad input to an operation (exit code 1 in the CLI)."""


class NumericError(RuntimeError):
    """A numerical procedure failed to converge or went unstable.

    ``payload`` carries whatever partial diagnostics were available
    (achieved estimates, mismatch tables, step bounds).
    """

    def __init__(self, message, payload=None):
        super().__init__(message)
        self.payload = payload if payload is not None else {}
