"""Exception taxonomy.

Every failure mode that a caller might want to catch has its own class;
anything else is a plain bug and surfaces as a standard exception.
"""


class TwistcheckError(Exception):
    pass


class MismatchedOrder(TwistcheckError):
    """Arithmetic between series truncated at different orders."""


class NotAUnit(TwistcheckError):
    """Inversion of a series with vanishing constant term."""


class NotDivisible(TwistcheckError):
    """Division by a power of the deformation parameter that does not factor out."""


class PrecisionLoss(TwistcheckError):
    """A comparison or truncation asked for more exact coefficients than survived.

    Raised when exact_to dropped below the requested order, typically because
    an expression divided by the deformation parameter more often than the
    configured working-order padding allows.  Rebuild the context with a
    larger pad; never a silent wrong answer.
    """


class DivergentContraction(TwistcheckError):
    """A contraction limit left nonzero coefficients at negative epsilon powers."""

    def __init__(self, message, degrees=()):
        super().__init__(message)
        self.degrees = tuple(degrees)


class FuelExhausted(TwistcheckError):
    """Normal ordering exceeded the rewrite-step budget."""


class DegreeCapExceeded(TwistcheckError):
    """A word grew past the configured total-degree cap."""


class UnknownGenerator(TwistcheckError):
    pass


class NonNilpotentArgument(TwistcheckError):
    """exp/log/inverse-style series of an element whose valuation is < 1."""


class ArityMismatch(TwistcheckError):
    """Tensor operands of different arity, or a slot index out of range."""


class UnmappedGenerator(TwistcheckError):
    """A substitution image is missing for a generator that occurs."""


class NoTriangularOrder(TwistcheckError):
    """Antipode solving found no generator order with triangular coproducts."""


class MissingRMatrixSpec(TwistcheckError):
    pass


class UnresolvedExponential(TwistcheckError):
    """An abstract exponential did not realize to an integer shift power."""


class MissingDerivative(TwistcheckError):
    """Exact evaluation needs a derivative the solution family cannot supply."""


class InstabilityDetected(TwistcheckError):
    """Lattice evolution samples exceeded the overflow guard."""


class UnknownEntry(TwistcheckError):
    pass


class ValidationFailed(TwistcheckError):
    """Catalog entry failed structural validation.  Carries a location string."""

    def __init__(self, message, location=""):
        super().__init__(f"{location}: {message}" if location else message)
        self.location = location


class ParseError(TwistcheckError):
    def __init__(self, message, text="", pos=None):
        at = f" at position {pos}" if pos is not None else ""
        src = f" in {text!r}" if text else ""
        super().__init__(f"{message}{at}{src}")
        self.pos = pos


class ConfigError(TwistcheckError):
    """Bad command-line or config-file input (CLI exit code 2)."""
