"""Exception hierarchy shared by all specband modules."""


class SpecbandError(Exception):
    """Base class for all domain errors raised by this package."""


class ParseError(SpecbandError):
    """Malformed CSV input. Carries 1-based (row, col) when known."""

    def __init__(self, message, row=None, col=None):
        super().__init__(message)
        self.row = row
        self.col = col


class InsufficientData(SpecbandError):
    """Fewer than two time points."""


class NotCentered(SpecbandError):
    """Operation requires a centered (or known mean-zero) series."""


class LagOutOfRange(SpecbandError):
    """Requested autocovariance lag is >= T."""


class BandwidthTooLarge(SpecbandError):
    """Lag-window size must stay below the series length."""


class UnsupportedModel(SpecbandError):
    """The process model has no closed-form autocovariance/spectrum."""


class NonStationaryModel(SpecbandError):
    """Model parameters violate the stationarity region."""


class InvalidLevel(SpecbandError):
    """Confidence level outside (0, 1)."""


class DegenerateSpectrum(SpecbandError):
    """A denominator spectral diagonal is not strictly positive."""

    def __init__(self, message, freq=None):
        super().__init__(message)
        self.freq = freq


class BandUndefined(SpecbandError):
    """Band half-width formula produced a negative value under the root."""


class InsufficientInnerReps(SpecbandError):
    """Nonlinear conditional-expectation approximation needs more redraws."""


class InvalidPlan(SpecbandError):
    """Monte Carlo experiment plan violates its validity constraints."""


class DecayFitWarning(UserWarning):
    """Geometric decay fit of a dependence profile failed or is unreliable."""
