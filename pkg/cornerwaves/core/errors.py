"""Exception types raised by the numerical core."""


class CornerWavesError(Exception):
    """Base class for all corner-waves errors."""


class GeometryError(CornerWavesError, ValueError):
    """Invalid or degenerate domain description."""


class MeshGenerationError(CornerWavesError):
    """Mesh could not be generated or read with the required invariants."""


class DimensionError(CornerWavesError, ValueError):
    """Array or grid sizes do not match."""


class ConfigError(CornerWavesError, ValueError):
    """Bad run configuration or CLI usage."""


class SolverError(CornerWavesError):
    """A linear or eigen solve did not converge."""

    def __init__(self, message: str, residual: float | None = None,
                 iterations: int | None = None, step: int | None = None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations
        self.step = step


class NeumannCompatibilityError(CornerWavesError, ValueError):
    """Volume load and boundary flux of a Neumann problem do not balance."""

    def __init__(self, defect: float):
        super().__init__(f"Neumann compatibility violated: defect {defect:.6e}")
        self.defect = defect
