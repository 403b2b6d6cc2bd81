"""Exception hierarchy."""


class MoritaError(Exception):
    """Base class for every error raised by this package."""


class InvalidShapeError(MoritaError, ValueError):
    pass


class HermiticityError(MoritaError, ValueError):
    def __init__(self, residual, what="element"):
        self.residual = float(residual)
        super().__init__(f"{what} is not self-adjoint (residual {self.residual:.3e})")


class ProjectionError(MoritaError, ValueError):
    def __init__(self, idempotence, selfadjointness):
        self.idempotence = float(idempotence)
        self.selfadjointness = float(selfadjointness)
        super().__init__(
            "projection check failed: "
            f"|p^2 - p| = {self.idempotence:.3e}, |p - p*| = {self.selfadjointness:.3e}"
        )


class InvalidSemiInnerProductError(MoritaError, ValueError):
    def __init__(self, min_eig):
        self.min_eig = float(min_eig)
        super().__init__(f"semi-inner product is not positive (min eigenvalue {self.min_eig:.3e})")


class GeneratorDeficiencyError(MoritaError):
    """The chosen generators do not generate the quotient module."""


class EmptyFrameError(MoritaError):
    pass


class AxiomViolationError(MoritaError):
    def __init__(self, axiom, residual):
        self.axiom = axiom
        self.residual = float(residual)
        super().__init__(f"{axiom} violated (residual {self.residual:.3e})")


class HomomorphismError(AxiomViolationError):
    pass


class NondegeneracyError(AxiomViolationError):
    pass


class NotCompletelyPositiveError(MoritaError, ValueError):
    def __init__(self, min_eig):
        self.min_eig = float(min_eig)
        super().__init__(f"map is not completely positive (block Gram min eigenvalue {self.min_eig:.3e})")


class RankMismatchError(MoritaError):
    def __init__(self, expected, got, what="rank"):
        self.expected = expected
        self.got = got
        super().__init__(f"{what} mismatch: expected {expected}, got {got}")


class PreconditionError(MoritaError):
    pass


class AlgebraMismatchError(MoritaError, ValueError):
    pass


class InstanceError(MoritaError):
    """Raised when an instance file cannot be parsed or validated."""
