"""Exception types shared by all modules."""


class Cmc1Error(Exception):
    """Base class for every error raised by the package."""


class PoleSignal(Cmc1Error, ArithmeticError):
    """A jet operation hit a forbidden vanishing leading coefficient."""


class StepFailure(Cmc1Error):
    """The Taylor integrator could not make progress (singularity on the path)."""


class ExcludedPointOnPath(Cmc1Error):
    """An integration segment passes through a declared excluded point."""


class DegenerateData(Cmc1Error, ValueError):
    """Cauchy data violate a positivity or consistency requirement."""


class BranchJump(Cmc1Error):
    """No branch of a two-valued algebraic solution is continuous on the interval."""


class DenominatorVanishes(Cmc1Error, ValueError):
    """The null curve meets the hyperplane nu0 + nu3 = 0; normalize the data first."""


class MaskedSingularity(Cmc1Error):
    """Evaluation requested at a zero of g_z or G_z."""


class DegeneratePoint(Cmc1Error):
    """The surface is not immersed at this point."""


class GeodesicInput(Cmc1Error, ValueError):
    """The boundary curve is a geodesic where a non-geodesic one is required."""


class ParameterConstraint(Cmc1Error, ValueError):
    """Gallery parameters violate their algebraic constraints."""


class NotAdmissible(Cmc1Error, ValueError):
    """Periodic data whose curvature function does not admit the holonomy test."""


class NotPeriodic(Cmc1Error, ValueError):
    """A period check was requested on non-periodic data."""


class EmptyGrid(Cmc1Error):
    """Every vertex of a sampled grid was masked."""


class ExprSyntaxError(Cmc1Error, SyntaxError):
    """Malformed expression text.

    ``offset`` is the 0-based byte offset of the failure and
    ``expected`` the set of token kinds that would have been accepted.
    """

    def __init__(self, message, offset, expected=()):
        super().__init__(f"{message} at offset {offset}")
        self.msg = message
        self.offset = offset
        self.expected = frozenset(expected)


class UnknownIdentifier(Cmc1Error, NameError):
    """An identifier that is neither the declared variable, a constant nor a function."""

    def __init__(self, name, offset):
        super().__init__(f"unknown identifier {name!r} at offset {offset}")
        self.name = name
        self.offset = offset


class ExportError(Cmc1Error, OSError):
    """Writing or reading an export file failed; the message names the path."""
