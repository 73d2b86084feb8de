"""Exception hierarchy.

Every error carries a stable ``code`` used by the CLI to pick a process
exit status.
"""


class NlfrontError(Exception):
    code = "E_GENERIC"
    exit_status = 10


class InvalidParameter(NlfrontError, ValueError):
    code = "E_INVALID_PARAMETER"
    exit_status = 11


class NormalizationFailure(NlfrontError):
    code = "E_NORMALIZATION"
    exit_status = 12


class QuadratureOverflow(NlfrontError):
    code = "E_QUADRATURE_OVERFLOW"
    exit_status = 13


class NotKPP(NlfrontError, ValueError):
    code = "E_NOT_KPP"
    exit_status = 14


class IntervalEmpty(NlfrontError, ValueError):
    code = "E_INTERVAL_EMPTY"
    exit_status = 15


class NoConvergence(NlfrontError):
    code = "E_NO_CONVERGENCE"
    exit_status = 16


class BracketFailure(NlfrontError):
    code = "E_BRACKET_FAILURE"
    exit_status = 17


class StabilityViolation(NlfrontError):
    code = "E_STABILITY"
    exit_status = 18


class BlowUp(NlfrontError):
    code = "E_BLOWUP"
    exit_status = 19


class BracketInvalid(NlfrontError):
    code = "E_BRACKET_INVALID"
    exit_status = 20


class UndecidedBudget(NlfrontError):
    code = "E_UNDECIDED_BUDGET"
    exit_status = 21


class TruncationTooShallow(NlfrontError):
    code = "E_TRUNCATION_SHALLOW"
    exit_status = 22


class Inconclusive(NlfrontError):
    code = "E_INCONCLUSIVE"
    exit_status = 23


class DivergentFlux(NlfrontError):
    code = "E_DIVERGENT_FLUX"
    exit_status = 24


class WindowTooShort(NlfrontError):
    code = "E_WINDOW_TOO_SHORT"
    exit_status = 25


class ModelMismatch(NlfrontError):
    code = "E_MODEL_MISMATCH"
    exit_status = 26


class ParseError(NlfrontError):
    code = "E_PARSE"
    exit_status = 27

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", column {column})" if column is not None else ")")
        super().__init__(message + where)


class ValidationError(NlfrontError, ValueError):
    """Raised with the full list of violations, never just the first."""

    code = "E_VALIDATION"
    exit_status = 28

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class VersionMismatch(NlfrontError):
    code = "E_VERSION_MISMATCH"
    exit_status = 29


class CorruptCheckpoint(NlfrontError):
    code = "E_CORRUPT_CHECKPOINT"
    exit_status = 30


class ConfigDrift(VersionMismatch):
    code = "E_CONFIG_DRIFT"
    exit_status = 31


class HarnessViolation(NlfrontError):
    code = "E_HARNESS_VIOLATION"
    exit_status = 32
