"""Exception hierarchy.

Everything raised on purpose derives from :class:`SpectralPerturbError`.
Errors that mean "the caller handed us something unusable" derive from
:class:`InvalidInputError`; the CLI maps those to exit code 2.
"""


class SpectralPerturbError(Exception):
    pass


class InvalidInputError(SpectralPerturbError, ValueError):
    pass


class UnsupportedParameterError(InvalidInputError):
    pass


class PreconditionError(InvalidInputError):
    pass


class DegenerateInputError(InvalidInputError):
    pass


class HypothesisFailure(SpectralPerturbError):
    """A quantitative hypothesis of an enclosure construction does not hold."""

    def __init__(self, inequality, message):
        self.inequality = inequality
        super().__init__(f"{inequality}: {message}")


class SingularPointError(SpectralPerturbError):
    pass


class SingularKernelError(SpectralPerturbError):
    pass


class ContourDegeneracyError(SpectralPerturbError):
    pass


class QuadratureFailure(SpectralPerturbError):
    pass


class AmbiguousRankError(SpectralPerturbError):
    pass


class EstimationFailure(SpectralPerturbError):
    def __init__(self, message, last_iterate=None, last_value=None):
        self.last_iterate = last_iterate
        self.last_value = last_value
        super().__init__(message)


class CriterionFailure(SpectralPerturbError):
    pass


class SimilarityFailure(SpectralPerturbError):
    pass


class DomainTooSmallError(SpectralPerturbError):
    pass


class ResolutionError(SpectralPerturbError):
    pass


class VerificationFailure(SpectralPerturbError):
    pass
