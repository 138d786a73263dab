"""Exception hierarchy shared by all modules."""


class SawMapError(Exception):
    """Base class for errors raised by this package."""


class MalformedInputError(SawMapError):
    """Input arrays are empty, mis-shaped, or contain non-finite values.

    Distinct from an invariant violation: a malformed table cannot even
    be inspected, while a well-formed one gets a validation report.
    """


class InvalidMapError(SawMapError):
    """A well-formed table violates the structural map assumptions."""

    def __init__(self, report):
        self.report = report
        lines = "; ".join(str(v) for v in report.violations[:6])
        more = "" if len(report.violations) <= 6 else f" (+{len(report.violations) - 6} more)"
        super().__init__(f"invalid saw map: {lines}{more}")


class DomainError(SawMapError):
    """Evaluation point outside the map's domain [0, r0]."""


class TruncationError(SawMapError):
    """Evaluation point below the tabulated floor q_K.

    Tabulated maps are never extrapolated: dynamics near the
    accumulation point must come from real data or closed forms.
    """


class KStarUndeterminedError(SawMapError):
    """The absorbing index could not be determined at the given depth."""


class ParameterError(SawMapError):
    """(sigma, lambda) outside the admissible region sigma>1, -1<lambda<0."""


class DivergenceError(SawMapError):
    """A first-hit trajectory exceeded its iteration cap."""


class TypeMismatchError(SawMapError):
    """An operation was applied to an interval of the wrong type."""


class InternalConsistencyError(SawMapError):
    """Two independent computations of the same object disagree."""
