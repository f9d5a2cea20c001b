"""Exception hierarchy with machine-readable codes (mirrored by CLI exit codes)."""

from __future__ import annotations


class CFError(Exception):
    code = "CF_ERROR"
    exit_code = 1

    def __init__(self, message: str = "", **details):
        super().__init__(message)
        self.details = details

    def to_dict(self) -> dict:
        return {"code": self.code, "message": str(self), "details": self.details}


class ConfigError(CFError):
    code = "CONFIG_ERROR"
    exit_code = 2


class GenerationFailed(CFError):
    code = "GENERATION_FAILED"
    exit_code = 3


class BudgetExceeded(CFError):
    code = "BUDGET_EXCEEDED"
    exit_code = 4


class ReportFail(CFError):
    code = "REPORT_FAIL"
    exit_code = 5


class ActionOverflow(CFError):
    code = "OVERFLOW"
    exit_code = 6


class ShearMismatch(CFError):
    code = "SHEAR_MISMATCH"
    exit_code = 7


class LevelOutOfRange(CFError):
    code = "LEVEL_OUT_OF_RANGE"
    exit_code = 8


class GammaZero(CFError):
    code = "GAMMA_ZERO"
    exit_code = 9


class ScheduleMismatch(CFError):
    code = "SCHEDULE_MISMATCH"
    exit_code = 10
