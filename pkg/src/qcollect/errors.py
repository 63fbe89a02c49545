"""Exception types shared across the package.

The CLI maps these onto exit codes: validation and schema problems exit 1,
numerical degeneracies exit 2.
"""


class QCollectError(Exception):
    """Base class for package errors."""


class StateValidationError(QCollectError, ValueError):
    """A density matrix violates one of its invariants."""

    def __init__(self, invariant, detail):
        self.invariant = invariant
        self.detail = detail
        super().__init__(f"invalid state ({invariant}): {detail}")


class BranchDegenerateError(QCollectError, ZeroDivisionError):
    """A projection branch has vanishing probability; sigma is undefined."""


class RadicandNegativeError(QCollectError, ArithmeticError):
    """G+G- - G^2 fell below the numerical-noise window; input is corrupt."""


class DegenerateDenominatorError(QCollectError, ArithmeticError):
    """cc_b - cc_n <= 0, so a corrected coincidence ratio cannot be formed."""

    def __init__(self, message, pair=None):
        self.pair = pair
        super().__init__(message)


class MissingSettingError(QCollectError, ValueError):
    """A required projection pair is absent from a counts dataset."""


class CountsSchemaError(QCollectError, ValueError):
    """A counts file violates the dataset schema; names the row/column."""
