"""Redheffer-type parametrization of relaxed commutant lifting solutions."""

from .errors import *  # noqa: F401,F403
from .opcore import DEFAULT_TOL, ToleranceConfig, classify, defect
from .systems import LinearSystem
from .redheffer import RedhefferQuadruple, SchurParameter
from .lifting import LiftingDataSet, UnderlyingContraction

__version__ = "0.1.0"
