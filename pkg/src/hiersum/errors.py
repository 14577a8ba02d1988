"""Error taxonomy shared across the package.

The CLI maps these onto process exit codes: usage errors exit 1, DataError
exits 2, NumericError exits 3.
"""


class HiersumError(Exception):
    """Base class for package errors."""


class DataError(HiersumError):
    """Malformed input data, schema violations, corpus/config mismatches."""


class NumericError(HiersumError):
    """Numeric failure during training or inference (NaN/Inf activations or loss)."""
