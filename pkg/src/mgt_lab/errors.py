"""Exception types shared across the package."""


class MgtLabError(Exception):
    """Base class for all mgt-lab errors."""


class NonDissipative(MgtLabError):
    """Parameters violate the dissipative window 0 < tau < beta."""


class ConservativeCase(NonDissipative):
    """tau == beta: energy-conserving limit, outside this package's scope."""


class InvalidDimension(MgtLabError):
    """Spatial dimension outside the supported range for an operation."""


class OutOfRange(MgtLabError):
    """Scalar argument outside its admissible interval."""


class DomainError(MgtLabError):
    """Evaluation requested outside the domain where a rate law is defined."""


class OutOfZone(MgtLabError):
    """Frequency magnitude outside the zone an approximation is valid in."""


class StepFailure(MgtLabError):
    """Adaptive integrator step size underflowed."""


class UnsupportedDimension(MgtLabError):
    """Grid dimension above the box solver's cap (n <= 3)."""


class RadiusExceedsBox(MgtLabError):
    """Requested radius does not fit inside the periodic box."""


class Overflow(MgtLabError):
    """Field magnitude exceeded the blow-up threshold mid-step."""


class ZeroMass(MgtLabError):
    """Data has (numerically) zero integral; mass-normalised experiment is vacuous."""


class ParameterWindowViolation(MgtLabError):
    """Energy parameters (k, eps) outside the window that keeps the energy a sum of squares."""


class DimensionTooLow(MgtLabError):
    """Experiment requires n >= 3 (Hardy-type control of the solution itself)."""


class InadmissibleTriple(MgtLabError):
    """(n, s, p) outside the global-existence regime."""


class InsufficientData(MgtLabError):
    """Too few samples inside the fit window."""


class NonPositiveValues(MgtLabError):
    """Log-space fit requested on a series with non-positive values."""


class ConfigError(MgtLabError):
    """Invalid experiment configuration; message carries the field path."""
