"""(C,F)-actions of the real Heisenberg group."""

from .engine import (
    Cylinder,
    MeasureValue,
    Schedule,
    act,
    correlate,
    cylinder,
    measure,
    multi_correlate,
    refine,
    validate,
)
from .errors import CFError
from .folner import BoxParams
from .group import GroupElement, a, b, c
from .schedules import build_asymmetric, build_infinite, build_mixing, check_thm51
from .shearbox import BishearBox, Region, box

__version__ = "0.1.0"

__all__ = [
    "BishearBox", "BoxParams", "CFError", "Cylinder", "GroupElement", "MeasureValue", "Region",
    "Schedule", "a", "act", "b", "box", "build_asymmetric", "build_infinite", "build_mixing", "c",
    "check_thm51", "correlate", "cylinder", "measure", "multi_correlate", "refine", "validate",
]
