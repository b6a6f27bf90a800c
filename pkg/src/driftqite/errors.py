"""Shared exception types."""


class DimensionError(ValueError):
    """Operands act on different numbers of qubits."""


class OracleSizeError(ValueError):
    """Dense-oracle operation requested above the configured qubit cap."""


class ConfigurationError(ValueError):
    """Invalid algorithm or pool configuration."""


class DocumentError(ValueError):
    """Problem-document parse or validation failure, with path context."""

    def __init__(self, message, path="$"):
        super().__init__(f"{path}: {message}")
        self.path = path


class SingularSystemError(RuntimeError):
    """Every singular value fell below the truncation threshold."""


class SeriesConvergenceError(RuntimeError):
    """Taylor series for the imaginary-time propagator did not converge."""


class AllocationError(ValueError):
    """Shot budget too small to distribute."""
