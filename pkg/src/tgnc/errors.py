"""Exception hierarchy shared across the package.

The CLI maps the three branches to stable exit codes:
ConfigError -> 2, DataError -> 3, NumericError -> 4.
"""


class TgncError(Exception):
    """Base class for all package errors."""


class ConfigError(TgncError):
    """Invalid configuration, flags, or parameter combinations."""


class DataError(TgncError):
    """Invalid, missing, or structurally inconsistent input data."""


class NumericError(TgncError):
    """Numeric failure during training or computation."""


# --- dataset layer ---------------------------------------------------------

class MissingFile(DataError):
    pass


class SchemaViolation(DataError):
    """A row violates the CSV schema or a type invariant.

    ``row`` is the 1-based line number in the file (header is line 1);
    ``None`` when the violation is file-wide.
    """

    def __init__(self, row, column, reason):
        self.row = row
        self.column = column
        self.reason = reason
        where = f"line {row}" if row is not None else "file"
        super().__init__(f"{where}, column {column!r}: {reason}")


class UnknownUserReference(DataError):
    def __init__(self, row, user_id):
        self.row = row
        self.user_id = user_id
        super().__init__(f"line {row}: reference to unknown user {user_id!r}")


class EmptyWindows(DataError):
    pass


# --- snapshotter -----------------------------------------------------------

class TooFewPosts(DataError):
    pass


class DegenerateTimestamps(DataError):
    pass


# --- embedding -------------------------------------------------------------

class EmptyGraph(DataError):
    pass


class EmptyCorpus(DataError):
    pass


# --- neural net ------------------------------------------------------------

class DimensionMismatch(DataError):
    pass


class NonFiniteLoss(NumericError):
    pass


# --- forest ----------------------------------------------------------------

class EmptyTrainingSet(DataError):
    pass


# --- spatial ---------------------------------------------------------------

class EmptyPostList(DataError):
    pass


class TooFewUsers(DataError):
    pass


class DegenerateDistances(DataError):
    pass


# --- semantic / pipeline ---------------------------------------------------

class MissingClass(DataError):
    def __init__(self, which):
        self.which = which
        super().__init__(f"no labeled {which} users available for training")


class EmptySnapshot(DataError):
    pass


class UserNeverEmbedded(DataError):
    pass


class EmptyLedger(DataError):
    pass


class KeyMismatch(DataError):
    pass


# --- synth -----------------------------------------------------------------

class InvalidSpec(ConfigError):
    pass
