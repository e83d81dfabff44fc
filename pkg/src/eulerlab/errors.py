"""Exception hierarchy shared across the package.

Physics-domain failures (detachment, vacuum, positivity loss, invalid
states) are kept distinct from generic runtime errors so the CLI can map
them to its own exit code.
"""


class EulerLabError(Exception):
    """Base class for all package-specific errors."""


class InvalidStateError(EulerLabError):
    """A gas state violates positivity (rho > 0, q > 0)."""


class VacuumError(EulerLabError):
    """The Riemann problem generates vacuum; the exact solver refuses."""


class SubsonicInflowError(EulerLabError):
    """Oblique-shock construction requires supersonic inflow."""


class DetachmentError(EulerLabError):
    """No attached oblique shock exists for the requested deflection."""


class PositivityError(EulerLabError):
    """A solver step produced an inadmissible cell state."""

    def __init__(self, message: str, cell: int | None = None):
        super().__init__(message)
        self.cell = cell


class MeshError(EulerLabError):
    """Degenerate or inconsistent mesh geometry."""


class ConfigError(EulerLabError):
    """Malformed configuration or input file."""
