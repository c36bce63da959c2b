"""Semantic exceptions shared across the package."""


class JsdeError(Exception):
    """Base class for all package errors."""


class InvalidBandError(JsdeError, ValueError):
    """Jump-size band (lo, hi] is malformed (lo >= hi or negative lo)."""


class ZeroMassBandError(JsdeError, ValueError):
    """Sampling requested from a band that carries no measure mass."""


class DivergenceError(JsdeError, ArithmeticError):
    """A numerically divergent integral (estimate ran past the overflow guard
    or the per-panel contributions refuse to decay)."""


class LevelBracketError(JsdeError, ArithmeticError):
    """Level equation could not be bracketed within floating-point range.

    Carries the levels found so far in ``log_levels``.
    """

    def __init__(self, msg, log_levels):
        super().__init__(msg)
        self.log_levels = log_levels


class TaperError(JsdeError, ArithmeticError):
    """Density taper failed to reach the required mass after max halvings."""


class ConfigError(JsdeError, ValueError):
    """Malformed experiment or model configuration. The message starts with a
    dotted pointer to the offending key."""


class CutoffMismatchError(JsdeError, ValueError):
    """Model and noise path disagree on the big-jump cutoff."""


class CouplingError(JsdeError, RuntimeError):
    """Coupling experiment invalid (e.g. too many replications excluded)."""
