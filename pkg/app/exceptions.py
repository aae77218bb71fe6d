"""Error hierarchy shared by the simulator and the CLI.

Every error carries a human readable ``detail``. None of them derive from
ValueError, so pydantic validators let them propagate unchanged.
"""
from typing import Optional


class OMNetError(Exception):
    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail

    def __str__(self) -> str:
        return self.detail


class InvalidParameter(OMNetError):
    pass


class NumericalFailure(OMNetError):
    pass


class UnstableDynamics(OMNetError):
    def __init__(self, abscissa: float, detail: Optional[str] = None):
        self.abscissa = float(abscissa)
        super().__init__(detail or f"Drift is not stable (spectral abscissa {self.abscissa:.6g} >= 0)")


class InvalidComposition(OMNetError):
    pass


class SingularLimit(OMNetError):
    pass


class ConfigError(OMNetError):
    def __init__(self, detail: str, field_path: str = ""):
        self.field_path = field_path
        super().__init__(f"{field_path}: {detail}" if field_path else detail)


class IoError(OMNetError):
    pass
