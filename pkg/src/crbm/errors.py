"""Exception taxonomy shared by all crbm modules.

The CLI maps these onto stable exit codes: usage problems exit 1, malformed
or inconsistent input files exit 2, numeric/capacity failures exit 3.
"""


class CrbmError(Exception):
    """Base class for all errors raised by this package."""


class UsageError(CrbmError):
    """Bad command-line arguments or inconsistent options."""


class FormatError(CrbmError):
    """A binary or text file does not follow its declared layout."""


class TruncationError(FormatError):
    """File ends before the payload its header promises."""


class DataError(CrbmError):
    """Values are invalid: non-finite entries, out-of-range probabilities."""


class DimensionError(CrbmError):
    """Array shapes do not match the model or each other."""


class AlignmentError(CrbmError):
    """Paired feature matrices disagree on frame count or sampling rate."""


class CapacityError(CrbmError):
    """Problem size outside supported bounds (T < K, enumeration too large)."""


class BatchError(CrbmError):
    """Minibatch too small for the requested operation."""


class LabelError(CrbmError):
    """Category labels missing or of the wrong length."""


class DegenerateWeightError(CrbmError):
    """All aggregation weights are zero."""


class NumericError(CrbmError):
    """Computation produced non-finite values (training diverged)."""


class WriteError(CrbmError):
    """Output file could not be written."""
