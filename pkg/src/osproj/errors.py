"""Exception types shared across the package."""


class OsprojError(Exception):
    """Base class for all errors raised by this package."""


class EmptyMatrixError(OsprojError):
    """A matrix with zero rows or columns was passed where data is required."""


class ShapeError(OsprojError):
    """Operands have incompatible shapes."""


class NotHermitianError(OsprojError):
    """Input was required to be Hermitian and is not."""


class NotCompletelyPositiveError(OsprojError):
    """The Choi matrix is not positive semidefinite.

    Attributes:
        min_eigenvalue: smallest eigenvalue of the Hermitian part of the Choi
            matrix, carried for diagnostics.
    """

    def __init__(self, message: str, min_eigenvalue: float = float("nan")):
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue


class HomomorphismError(OsprojError):
    """A claimed semigroup homomorphism failed the product check."""


class QuadratureError(OsprojError):
    """Quadrature node count below the exactness threshold."""


class PowerBoundError(OsprojError):
    """A generator failed the power-boundedness probe."""


class IllConditionedError(OsprojError):
    """A matrix is too ill-conditioned for the requested operation."""


class SdpError(OsprojError):
    """SDP solver failure; carries residual diagnostics."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class VerificationError(OsprojError):
    """A property the construction guarantees failed its numerical check."""


class ConfigError(OsprojError):
    """Problem configuration is malformed; carries a field path."""

    def __init__(self, message: str, field: str = ""):
        super().__init__(message if not field else f"{field}: {message}")
        self.field = field
