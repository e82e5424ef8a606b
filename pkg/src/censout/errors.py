"""Exception hierarchy for censout.

Three branches matter for the CLI exit codes: :class:`UsageError` maps to
exit code 2, :class:`DataError` to 3, and :class:`NumericalError` to 4.
"""

from __future__ import annotations


class CensoutError(Exception):
    """Base class for every censout-specific error."""


class UsageError(CensoutError):
    """The requested operation does not apply to the given inputs."""


class DataError(CensoutError):
    """A problem with an input file or with dataset construction."""


class NumericalError(CensoutError):
    """A numerical failure while fitting or detecting."""


class MissingColumn(DataError):
    def __init__(self, column: str):
        self.column = column
        super().__init__(f"required column {column!r} not found in header")


class UnparsableCell(DataError):
    """A cell could not be parsed. Row numbers are 1-based data rows."""

    def __init__(self, row: int, column: str, value: str = ""):
        self.row = row
        self.column = column
        self.value = value
        shown = f" (value {value!r})" if value != "" else ""
        super().__init__(f"cannot parse column {column!r} at data row {row}{shown}")


class NonPositiveTime(DataError):
    def __init__(self, row: int, value: float | None = None):
        self.row = row
        self.value = value
        shown = "" if value is None else f" (value {value!r})"
        super().__init__(f"time at data row {row} is not strictly positive{shown}")


class EmptyFile(DataError):
    pass


class AlreadyTransformed(DataError):
    pass


class LengthMismatch(DataError):
    pass


class FingerprintMismatch(DataError):
    pass


class MissingFit(DataError):
    def __init__(self, taus):
        self.taus = tuple(taus)
        levels = ", ".join(f"{t:g}" for t in self.taus)
        super().__init__(
            f"artifact lacks fits at quantile level(s) {levels}; "
            "re-run detect without --fast"
        )


class DimensionMismatch(UsageError):
    pass


class WrongMethod(UsageError):
    pass


class RankDeficientDesign(NumericalError):
    def __init__(self, column: str, detail: str = ""):
        self.column = column
        msg = f"design matrix is rank deficient: column {column!r} is linearly dependent"
        if detail:
            msg = f"{msg} ({detail})"
        super().__init__(msg)


class Unbounded(NumericalError):
    """Internal-consistency failure: the pinball objective cannot be unbounded
    for tau in (0, 1) with positive weights."""


class PseudoPointUnstable(NumericalError):
    pass


class ZeroSpread(NumericalError):
    pass
