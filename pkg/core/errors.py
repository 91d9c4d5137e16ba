"""Exception hierarchy for lochaus."""


class LochausError(Exception):
    """Base class for every error raised by lochaus."""


class MetricValidationError(LochausError, ValueError):
    """Input distances do not form a metric (symmetry, triangle inequality, ...)."""


class SizeGuardError(LochausError, ValueError):
    """An exact or exhaustive computation was asked for on too many points."""


class CandidateExplosionError(LochausError, ValueError):
    """Candidate enumeration exceeded its cap."""


class GaugeError(LochausError, ValueError):
    """Gauge and candidate set are incompatible."""


class NoBracketError(LochausError, ValueError):
    """The exponent grid does not bracket a slope sign change."""


class EstimationError(LochausError, ValueError):
    """A regression could not be formed (too few finite scales, all costs infinite)."""
