from typing import Optional


class TemplateFitError(Exception):
    """Base class for every error raised by the fitting pipeline."""


class ConfigError(TemplateFitError):
    """Invalid configuration, override or command-line path."""


class MeshParseError(TemplateFitError, ValueError):
    """Mesh text could not be turned into a valid mesh."""


class EmptyMeshError(TemplateFitError, ValueError):
    """Operation needs at least one vertex or element."""


class DegenerateGeometryError(TemplateFitError, ValueError):
    """Geometry too degenerate to define a plane, rotation or primitive."""


class RejectedCylinderError(TemplateFitError, ValueError):
    """Cylinder fails validation before ridge generation."""

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


class OpenSurfaceError(TemplateFitError, ValueError):
    """Forbidden surface for push constraints is not closed."""


class FactorizationError(TemplateFitError):
    """Global matrix is not symmetric positive definite."""

    def __init__(self, message: str, pivot: Optional[int] = None):
        super().__init__(message)
        self.pivot = pivot


class ZeroMassError(TemplateFitError):
    """A vertex carries no lumped mass."""


class DivergenceError(TemplateFitError):
    """Solve produced non-finite positions."""


class MisalignmentError(TemplateFitError):
    """Template and target never overlap enough to build correspondences."""
