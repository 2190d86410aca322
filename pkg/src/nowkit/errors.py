"""Exception taxonomy shared across the toolkit.

Every recoverable failure raises a subclass of NowkitError so callers
(and the CLI) can distinguish toolkit errors from programming bugs.
"""


class NowkitError(Exception):
    """Base class for all toolkit errors."""


# --- parsing / file I/O ------------------------------------------------------

class ParseError(NowkitError):
    """Malformed file content; names the line and the reason."""

    def __init__(self, line: int, reason: str):
        self.line = line
        self.reason = reason
        super().__init__(f"line {line}: {reason}")


class ValidationError(NowkitError):
    """A parsed series violates a structural invariant."""

    def __init__(self, series_id: str, violations):
        self.series_id = series_id
        self.violations = list(violations)
        detail = "; ".join(str(v) for v in self.violations)
        super().__init__(f"series {series_id!r}: {detail}")


class UnknownLabel(NowkitError):
    """A catalog label outside the three-level scale."""

    def __init__(self, value: str):
        self.value = value
        super().__init__(f"unknown label {value!r}")


class MixedSeriesCodes(NowkitError):
    """An observation payload mixes more than one series code."""


class EmptyTrace(NowkitError):
    """A trace with no points cannot be written."""


class IoError(NowkitError):
    """Underlying file-system failure while reading or writing."""


# --- transforms --------------------------------------------------------------

class InsufficientData(NowkitError):
    """Too few observations for the requested operation."""


class NonPositiveBase(NowkitError):
    """Growth rate denominator is zero or negative."""


class NotApplicable(NowkitError):
    """Operation undefined for this frequency."""


class ZeroVariance(NowkitError):
    """Standardization over a constant series."""


class EmptyOverlap(NowkitError):
    """No observation falls inside the alignment grid."""


class AllMissing(NowkitError):
    """Every cell of a column (or matrix) is missing."""


# --- estimator ---------------------------------------------------------------

class ShapeMismatch(NowkitError):
    """Array dimensions inconsistent with the model."""


class LengthMismatch(NowkitError):
    """Paired vectors of different lengths."""


class EmptyInput(NowkitError):
    """A metric over zero points is undefined."""


class VariableOrderMismatch(NowkitError):
    """Matrix columns do not match the model's variable order."""


# --- evaluation / selection --------------------------------------------------

class InsufficientHistory(NowkitError):
    """A baseline needs history that does not exist."""


class AllTrialsFailed(NowkitError):
    """Every search trial errored; nothing to rank."""


# --- feasibility -------------------------------------------------------------

class NotTier1(NowkitError):
    """Classification is only defined for Tier 1 indicators."""


class NoEligibleRecords(NowkitError):
    """Agreement needs at least one classifiable record."""
