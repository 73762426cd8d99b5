"""Exception hierarchy for the pisotmw package."""


class PisotMWError(Exception):
    """Base class for all pisotmw errors."""


# --- basis construction ---

class NotPisot(PisotMWError):
    """The polynomial's dominant root is not a Pisot number."""


class NotIncreasing(PisotMWError):
    """Initial terms are not strictly increasing."""


class BadFirstTerm(PisotMWError):
    """The base sequence must start with U_0 = 1."""


class InsufficientTerms(PisotMWError):
    """Fewer initial terms than the recurrence degree."""


class BasisMismatch(PisotMWError):
    """Operands belong to different numeration bases."""


# --- oracle ---

class Unrepresentable(PisotMWError):
    """No expansion of the target exists over the given alphabet."""


class SearchExhausted(PisotMWError):
    """The constant search hit its cap without success."""


# --- automata ---

class AlphabetMismatch(PisotMWError):
    """Boolean operation on automata with different label sets."""


class NotDeterministic(PisotMWError):
    """Word counting requires a deterministic automaton."""


class StateExplosion(PisotMWError):
    """A construction exceeded its state budget."""


class CertificationFailed(PisotMWError):
    """A constructed automaton disagreed with the oracle."""

    def __init__(self, message, counterexample=None):
        super().__init__(message)
        self.counterexample = counterexample


class DiagnosticFailed(PisotMWError):
    """A structural diagnostic check did not hold."""


# --- spectral ---

class NotUniqueDominant(PisotMWError):
    """The dominant eigenvalue is not simple and strictly dominant."""


class PrimitivityMissing(PisotMWError):
    """The adjacency matrix is not primitive."""


class DomainError(PisotMWError):
    """Arguments violate a formula's domain of validity."""


class DepthTooLarge(PisotMWError):
    """Requested depth exceeds the exhaustive-computation budget."""


class DimensionMismatch(PisotMWError):
    """Matrices in a set have incompatible shapes."""
