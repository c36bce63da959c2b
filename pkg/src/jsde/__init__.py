"""Jump-diffusion SDE simulation and empirical pathwise-uniqueness lab."""

from .errors import (
    ConfigError,
    CouplingError,
    CutoffMismatchError,
    DivergenceError,
    InvalidBandError,
    JsdeError,
    LevelBracketError,
    TaperError,
    ZeroMassBandError,
)
from .levy import (
    AbsMoment,
    CustomMeasure,
    FiniteAtomMeasure,
    LevyMeasure,
    StableMeasure,
    TemperedStableMeasure,
    build_measure,
)

__version__ = "0.1.0"
