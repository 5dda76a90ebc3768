"""Exception types shared across the toolkit."""


class WarfrevError(Exception):
    """Base class for all toolkit errors."""


class SchemaError(WarfrevError):
    """Tabular input does not conform to the expected schema."""


class InvariantError(WarfrevError):
    """A domain invariant is violated (range, ordering, uniqueness)."""


class WindowError(WarfrevError):
    """Invalid measurement window bounds."""


class EmptyCohortError(WarfrevError):
    """Operation requires a non-empty cohort."""


class NoInrInWindow(WarfrevError):
    """Patient has no INR measurement inside the requested window."""


class NoSecondInr(WarfrevError):
    """Patient has no INR measurement after the first in-window one."""


class NoDoseHistory(WarfrevError):
    """Patient has no dose record early enough for the requested day."""


class DimensionMismatch(WarfrevError):
    """Design matrix and target shapes are incompatible."""


class SchemaMismatch(WarfrevError):
    """Prediction input schema differs from the schema bound at fit time."""


class DivergenceError(WarfrevError):
    """Training loss became non-finite."""


class LengthMismatch(WarfrevError):
    """Paired vectors have different lengths."""


class ZeroVarianceError(WarfrevError):
    """R^2 is undefined when all true values are equal."""


class NonPositiveTruth(WarfrevError):
    """Ideal-dose rate requires strictly positive true doses."""


class SampleTooSmall(WarfrevError):
    """Confidence interval requires at least two observations."""


class FoldError(WarfrevError):
    """Cannot build more folds than rows."""


class MissingEarlyInr(WarfrevError):
    """Patient lacks an INR measurement in the early revision window."""


class InsufficientDoseHistory(WarfrevError):
    """Patient lacks the dosing history the baseline algorithm needs."""


class UnknownTermError(WarfrevError):
    """Baseline coefficient document names a term outside the vocabulary."""


class UnknownFormat(WarfrevError):
    """Unsupported report format."""


class ConfigError(WarfrevError):
    """Configuration document is missing, malformed, or inconsistent."""
