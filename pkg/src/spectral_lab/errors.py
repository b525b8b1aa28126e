"""Exception hierarchy for the spectral-lab toolkit."""


class SpectralLabError(Exception):
    """Base class for all spectral-lab errors."""


class ModelValidationError(SpectralLabError):
    """A model payload violates a construction invariant."""


class NonHermitianError(ModelValidationError):
    """A matrix required to be Hermitian is not, beyond round-off tolerance."""


class RankDeficientRiggingError(ModelValidationError):
    """The rigging matrix does not have full numerical row rank."""


class GapViolationError(ModelValidationError):
    """The isolated eigenvalue is not separated from the rest of the spectrum."""


class UnsupportedModelError(SpectralLabError):
    """The operation needs a dense-representable model."""


class RealAxisEvaluationError(SpectralLabError):
    """Resolvent-type evaluation requested at a real spectral parameter."""


class NearSingularSolveError(SpectralLabError):
    """A dense resolvent solve is too ill-conditioned to trust.

    Carries the condition estimate and, when raised inside a boundary
    schedule, the offending offset ``y``.
    """

    def __init__(self, message, condition=None, y=None):
        super().__init__(message)
        self.condition = condition
        self.y = y


class ResonantCouplingError(SpectralLabError):
    """The perturbation-identity factor ``1 + T0 J`` is numerically singular."""


class ScheduleTooShortError(SpectralLabError):
    """Boundary schedule has too few offsets for a tail-based estimate."""


class NotAtEigenvalueError(SpectralLabError):
    """Blow-up extrapolation requested away from the model's isolated eigenvalue."""


class NotConvergedError(SpectralLabError):
    """A boundary-limit estimate was required but the probe did not converge."""


class NotLocalizedError(SpectralLabError):
    """Input vector is not spectrally localized in the required window."""


class ConfigError(SpectralLabError):
    """Base class for experiment configuration problems."""


class ConfigParseError(ConfigError):
    """Experiment configuration is malformed; message names the field."""


class ModelLoadError(ConfigError):
    """Model document is malformed; message names the field."""


class NonNestedWarning(UserWarning):
    """Subspace family passed for intersection is not dimension-monotone."""
