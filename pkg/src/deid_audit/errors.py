"""Exception and warning types shared across the audit pipeline.

Every malformed input maps to one of these named errors; degenerate but
recoverable conditions (zero-length landmark denominators, implausible pose
angles) are surfaced as named warnings instead so the frame stays processable.
"""


class DeidAuditError(Exception):
    """Base class for all errors raised by this package."""


# --- ingest ---------------------------------------------------------------

class MalformedManifest(DeidAuditError):
    """Manifest file is not valid JSON or is missing required fields."""


class DuplicateSession(DeidAuditError):
    """Two sessions in one manifest share a session_id."""


class NonMonotonicFrames(DeidAuditError):
    """Frame entries are not ordered by strictly increasing frame_index."""


class DecodeError(DeidAuditError):
    """Image file could not be read or decoded."""


class UnsupportedFormat(DeidAuditError):
    """Image format or sample depth outside the supported 8-bit PNG set."""


class MalformedAnnotation(DeidAuditError):
    """Landmark or pose CSV has a bad header or unparseable row structure."""


class WrongPointCount(DeidAuditError):
    """A frame's landmark rows do not add up to exactly 68 points."""


class NonFiniteCoordinate(DeidAuditError):
    """A landmark coordinate parsed to NaN or infinity."""


# --- cue metrics ----------------------------------------------------------

class DegenerateEye(DeidAuditError):
    """Eye corner points coincide; the aspect-ratio denominator is zero."""


class DegeneratePerimeter(DeidAuditError):
    """All six eye points coincide; circularity perimeter is zero."""


class DegenerateMouth(DeidAuditError):
    """Mouth corner points coincide; the aspect-ratio denominator is zero."""


# --- image quality --------------------------------------------------------

class ShapeMismatch(DeidAuditError):
    """Paired images differ in dimensions or channel count."""


class TooSmall(DeidAuditError):
    """Image is smaller than the sliding-window size of a metric."""


class AllBandsDegenerate(DeidAuditError):
    """Every band of the reference image has a (near-)zero mean."""


# --- analysis -------------------------------------------------------------

class EmptySeries(DeidAuditError):
    """A statistic was requested over a series with no present values."""


class SeriesTooShort(DeidAuditError):
    """Series has fewer non-gap points than the anomaly window needs."""


class InsufficientVerdicts(DeidAuditError):
    """Threshold calibration needs at least one pass and one fail verdict."""


class BadThresholdConfig(DeidAuditError):
    """Threshold configuration file violates the schema or its invariants."""


# --- synthetic fixtures / service ----------------------------------------

class BadSynthSpec(DeidAuditError):
    """Synthetic session spec violates its invariants."""


class IoError(DeidAuditError):
    """Output directory or file could not be written."""


class MissingReport(DeidAuditError):
    """Review service was pointed at a report that does not exist."""


class BindError(DeidAuditError):
    """Review service bind address is unusable."""


# --- warnings ---------------------------------------------------------------

class AuditWarning(UserWarning):
    """Base class for recoverable data-quality warnings."""


class PlausibilityWarning(AuditWarning):
    """Value is finite but outside its plausible range (kept as-is)."""


class DegenerateLandmarkWarning(AuditWarning):
    """A cue could not be computed for a frame; the value is left absent."""


class DegenerateBandWarning(AuditWarning):
    """A band was excluded from a metric because its reference mean is ~0."""
