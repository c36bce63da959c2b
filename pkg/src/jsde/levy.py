"""Levy measures on R\\{0}: band integrals, tail masses, band-restricted sampling.

Measures come from a small catalog of families (symmetric stable, tempered
stable, finite atom lists) plus a custom-density escape hatch. Band integrals
against a density are computed by adaptive quadrature on log-radius panels,
which tames the |y|^(-1-alpha) concentration at the origin; families that
admit closed forms use them for absolute-moment integrands.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from .errors import DivergenceError, InvalidBandError, ZeroMassBandError

#: Estimates beyond this magnitude are reported as divergent.
OVERFLOW_GUARD = 1e12

#: Declared relative tolerance of band_integral results.
QUAD_REL_TOL = 1e-10

_LN10 = math.log(10.0)
_MAX_PANELS = 60
_PANEL_EPSREL = 1e-12
_TAIL_RATIO_LIMIT = 0.9995
_ABS_FLOOR = 1e-300


@dataclass(frozen=True)
class AbsMoment:
    """Integrand y -> |y|**p, recognized for closed-form evaluation."""

    p: float

    def __call__(self, y):
        return abs(y) ** self.p


def _validate_band(lo: float, hi: float) -> None:
    if not (0.0 <= lo < hi):
        raise InvalidBandError(f"band requires 0 <= lo < hi, got ({lo}, {hi})")


def _quad(f, a, b):
    val, _ = integrate.quad(f, a, b, epsabs=_ABS_FLOOR, epsrel=_PANEL_EPSREL, limit=200)
    return val


def _ladder(fu: Callable[[float], float], u_start: float, step: float) -> float:
    """Sum integral panels of width |step| in u-space starting at u_start.

    Panels continue until contributions decay below the relative floor, the
    running total exceeds the overflow guard, or the panel budget is spent,
    in which case a geometric remainder is added (or divergence is raised
    when the contributions refuse to decay).
    """
    contribs = []
    total = 0.0
    u0 = u_start
    small_streak = 0
    for _ in range(_MAX_PANELS):
        u1 = u0 + step
        lo_u, hi_u = (u1, u0) if step < 0 else (u0, u1)
        c = _quad(fu, lo_u, hi_u)
        contribs.append(c)
        total += c
        if abs(total) > OVERFLOW_GUARD or not math.isfinite(total):
            raise DivergenceError(
                f"band integral exceeded overflow guard {OVERFLOW_GUARD:g}"
            )
        if abs(c) <= max(_ABS_FLOOR, 1e-15 * abs(total)):
            small_streak += 1
            if small_streak >= 2:
                return total
        else:
            small_streak = 0
        u0 = u1
    # Panel budget spent: extrapolate a geometric tail from the last panels.
    tail = abs(contribs[-1])
    ref = abs(contribs[-6])
    if ref <= _ABS_FLOOR:
        return total
    r = (tail / ref) ** 0.2
    if not (r < _TAIL_RATIO_LIMIT):
        raise DivergenceError(
            "panel contributions do not decay; integral treated as divergent"
        )
    total += contribs[-1] * r / (1.0 - r)
    return total


def _integrate_side(phi: Callable[[float], float], lo: float, hi: float) -> float:
    """Integrate phi over radii (lo, hi], phi possibly singular at 0."""
    anchor = min(max(lo, 1.0), hi) if hi != math.inf else max(lo, 1.0)
    fu = lambda u: phi(math.exp(u)) * math.exp(u)  # y = e^u substitution
    total = 0.0
    # inner part (lo, anchor]
    if anchor > lo:
        if lo == 0.0:
            total += _ladder(fu, math.log(anchor), -_LN10)
        else:
            total += _quad(fu, math.log(lo), math.log(anchor))
    # outer part (anchor, hi]
    if hi > anchor:
        if hi == math.inf:
            total += _ladder(fu, math.log(anchor), _LN10)
        else:
            total += _quad(fu, math.log(anchor), math.log(hi))
    if abs(total) > OVERFLOW_GUARD or not math.isfinite(total):
        raise DivergenceError("band integral exceeded overflow guard")
    return total


@dataclass(frozen=True)
class BandGrid:
    """Fixed quadrature nodes for repeated integrals over one jump-size band.

    ``weights`` absorb the measure density and the log-radius Jacobian, so an
    integral of g against the measure over the band is ``g(marks) @ weights``.
    ``panels[i]`` is the log-decade index of node i (0 outermost, increasing
    toward the origin); ``exact`` marks atom grids where no truncation error
    exists and no divergence classification is needed.
    """

    marks: np.ndarray
    weights: np.ndarray
    panels: np.ndarray
    exact: bool


def band_nodes(measure: "LevyMeasure", lo: float, hi: float,
               n_decades: int = 40, order: int = 16) -> BandGrid:
    """Build a fixed node/weight grid for the band {lo < |y| <= hi}."""
    _validate_band(lo, hi)
    if isinstance(measure, FiniteAtomMeasure):
        ys, ms = [], []
        for y, m in measure.atoms:
            if lo < abs(y) <= hi:
                ys.append(y)
                ms.append(m)
        return BandGrid(np.asarray(ys, dtype=float), np.asarray(ms, dtype=float),
                        np.zeros(len(ys), dtype=np.int64), True)
    if hi == math.inf:
        raise InvalidBandError("fixed node grids require a finite upper band edge")
    gl_x, gl_w = np.polynomial.legendre.leggauss(order)
    marks, weights, panels = [], [], []
    log_hi = math.log(hi)
    log_lo = math.log(lo) if lo > 0.0 else None
    for k in range(n_decades):
        u_hi = log_hi - k * _LN10
        u_lo = u_hi - _LN10
        if log_lo is not None:
            if u_hi <= log_lo:
                break
            u_lo = max(u_lo, log_lo)
        half = 0.5 * (u_hi - u_lo)
        mid = 0.5 * (u_hi + u_lo)
        u = mid + half * gl_x
        y = np.exp(u)
        for sign in (1.0, -1.0):
            ys = sign * y
            marks.append(ys)
            weights.append(measure.density(ys) * y * (half * gl_w))
            panels.append(np.full(order, k, dtype=np.int64))
        if log_lo is not None and u_lo <= log_lo:
            break
    return BandGrid(np.concatenate(marks), np.concatenate(weights),
                    np.concatenate(panels), False)


class LevyMeasure:
    """Base class for the measure catalog. Instances are immutable."""

    family_tag = "custom"

    def density(self, y):
        raise NotImplementedError

    # -- integration ------------------------------------------------------

    def band_integral(self, g, lo: float, hi: float = math.inf,
                      rel_tol: float = QUAD_REL_TOL) -> float:
        """Integral of g over the band {lo < |y| <= hi} against the measure.

        `g` is a pointwise-evaluable function of the signed mark; `AbsMoment`
        instances are routed to a family closed form when one exists.
        Raises DivergenceError when the estimate passes the overflow guard.
        """
        _validate_band(lo, hi)
        if isinstance(g, AbsMoment):
            closed = self._abs_moment_closed(g.p, lo, hi)
            if closed is not None:
                return closed
        dens = self.density
        pos = _integrate_side(lambda r: g(r) * dens(r), lo, hi)
        neg = _integrate_side(lambda r: g(-r) * dens(-r), lo, hi)
        return pos + neg

    def _abs_moment_closed(self, p: float, lo: float, hi: float):
        return None

    def abs_moment(self, p: float, lo: float, hi: float = math.inf) -> float:
        """Integral of |y|**p over the band, closed form when available."""
        return self.band_integral(AbsMoment(p), lo, hi)

    def band_mass(self, lo: float, hi: float = math.inf) -> float:
        return self.abs_moment(0.0, lo, hi)

    def tail_mass(self, c: float) -> float:
        """Mass of {|y| > c}: the big-jump compound Poisson intensity."""
        if c <= 0.0:
            raise InvalidBandError(f"cutoff must be positive, got {c}")
        return self.band_mass(c, math.inf)

    def signed_band_moment(self, lo: float, hi: float) -> float:
        """Integral of y itself over the band. Exactly 0 for symmetric families."""
        return self.band_integral(lambda y: y, lo, hi)

    def integrability_value(self) -> float:
        """The (|y| wedge 1)^2 integral over the whole mark space.

        Finiteness is the admission test for a measure; divergence raises.
        """
        return self.abs_moment(2.0, 0.0, 1.0) + self.tail_mass(1.0)

    # -- sampling ---------------------------------------------------------

    def sample_band(self, lo: float, hi: float, rng: np.random.Generator,
                    size: int | None = None):
        """Draw marks from the measure restricted to {lo < |y| <= hi}.

        Deterministic given the generator state; scalar when size is None.
        """
        raise NotImplementedError

    def cache_token(self) -> str | None:
        """Stable identity string for noise caching; None disables caching."""
        return None


@dataclass(frozen=True)
class StableMeasure(LevyMeasure):
    """Symmetric alpha-stable jump intensity: density(y) = scale * |y|^(-1-alpha)."""

    alpha: float
    scale: float = 1.0

    def __post_init__(self):
        if not (0.0 < self.alpha < 2.0):
            raise ValueError(f"alpha must lie in (0, 2), got {self.alpha}")
        if self.scale <= 0.0:
            raise ValueError(f"scale must be positive, got {self.scale}")

    @property
    def family_tag(self):
        return "stable"

    def density(self, y):
        return self.scale * np.abs(y) ** (-1.0 - self.alpha)

    def _abs_moment_closed(self, p, lo, hi):
        # 2 s * integral of y^(p-1-alpha) over (lo, hi]
        a, s = self.alpha, self.scale
        q = p - a
        if lo == 0.0 and q <= 0.0:
            raise DivergenceError(f"|y|^{p} moment diverges at 0 for alpha={a}")
        if hi == math.inf and q >= 0.0:
            raise DivergenceError(f"|y|^{p} moment diverges at infinity for alpha={a}")
        if q == 0.0:
            return 2.0 * s * math.log(hi / lo)
        hi_term = 0.0 if hi == math.inf else hi ** q
        lo_term = 0.0 if lo == 0.0 else lo ** q
        return 2.0 * s * (hi_term - lo_term) / q

    def signed_band_moment(self, lo, hi):
        return 0.0  # symmetric

    def sample_band(self, lo, hi, rng, size=None):
        _validate_band(lo, hi)
        if lo == 0.0:
            raise ZeroMassBandError(
                "stable band touching 0 has infinite mass and cannot be sampled")
        n = 1 if size is None else int(size)
        # inverse CDF of |y|: F(r) = (lo^-a - r^-a) / (lo^-a - hi^-a)
        a = self.alpha
        lo_a = lo ** -a
        hi_a = 0.0 if hi == math.inf else hi ** -a
        u = rng.random(n)
        r = (lo_a - u * (lo_a - hi_a)) ** (-1.0 / a)
        signs = rng.integers(0, 2, n) * 2.0 - 1.0
        out = signs * r
        return float(out[0]) if size is None else out

    def cache_token(self):
        return f"stable:{self.alpha!r}:{self.scale!r}"


@dataclass(frozen=True)
class TemperedStableMeasure(LevyMeasure):
    """Exponentially tempered stable intensity: scale * |y|^(-1-alpha) * exp(-tempering*|y|)."""

    alpha: float
    scale: float = 1.0
    tempering: float = 1.0

    def __post_init__(self):
        if not (0.0 < self.alpha < 2.0):
            raise ValueError(f"alpha must lie in (0, 2), got {self.alpha}")
        if self.scale <= 0.0 or self.tempering <= 0.0:
            raise ValueError("scale and tempering must be positive")

    @property
    def family_tag(self):
        return "tempered_stable"

    def density(self, y):
        ay = np.abs(y)
        return self.scale * ay ** (-1.0 - self.alpha) * np.exp(-self.tempering * ay)

    def signed_band_moment(self, lo, hi):
        return 0.0  # symmetric

    def _envelope(self):
        return StableMeasure(self.alpha, self.scale)

    def sample_band(self, lo, hi, rng, size=None):
        _validate_band(lo, hi)
        if lo == 0.0:
            raise ZeroMassBandError("tempered band touching 0 cannot be sampled")
        if hi != math.inf and self.band_mass(lo, hi) <= 0.0:
            raise ZeroMassBandError(f"no mass in band ({lo}, {hi}]")
        env = self._envelope()
        n = 1 if size is None else int(size)
        out = np.empty(n)
        filled = 0
        for _ in range(10000):
            m = n - filled
            cand = np.atleast_1d(env.sample_band(lo, hi, rng, size=m))
            accept = rng.random(m) < np.exp(-self.tempering * np.abs(cand))
            k = int(accept.sum())
            out[filled:filled + k] = cand[accept]
            filled += k
            if filled == n:
                return float(out[0]) if size is None else out
        raise ZeroMassBandError(
            f"rejection sampling failed to accept in band ({lo}, {hi}]")

    def cache_token(self):
        return f"tempered:{self.alpha!r}:{self.scale!r}:{self.tempering!r}"


@dataclass(frozen=True)
class FiniteAtomMeasure(LevyMeasure):
    """Finite discrete measure: a list of (mark, mass) atoms."""

    atoms: tuple[tuple[float, float], ...]

    def __init__(self, atoms: Sequence[tuple[float, float]]):
        object.__setattr__(self, "atoms", tuple((float(y), float(m)) for y, m in atoms))
        for y, m in self.atoms:
            if y == 0.0:
                raise ValueError("atoms must sit away from 0")
            if m <= 0.0:
                raise ValueError(f"atom masses must be positive, got {m} at {y}")

    @property
    def family_tag(self):
        return "finite_atoms"

    def density(self, y):
        raise TypeError("finite atom measures have no Lebesgue density")

    def band_integral(self, g, lo, hi=math.inf, rel_tol=QUAD_REL_TOL):
        _validate_band(lo, hi)
        return math.fsum(g(y) * m for y, m in self.atoms if lo < abs(y) <= hi)

    def signed_band_moment(self, lo, hi):
        return self.band_integral(lambda y: y, lo, hi)

    def integrability_value(self):
        return self.band_integral(lambda y: min(abs(y), 1.0) ** 2, 0.0, math.inf)

    def sample_band(self, lo, hi, rng, size=None):
        _validate_band(lo, hi)
        in_band = [(y, m) for y, m in self.atoms if lo < abs(y) <= hi]
        if not in_band:
            raise ZeroMassBandError(f"no atoms in band ({lo}, {hi}]")
        ys = np.array([y for y, _ in in_band])
        ps = np.array([m for _, m in in_band])
        ps = ps / ps.sum()
        n = 1 if size is None else int(size)
        out = rng.choice(ys, size=n, p=ps)
        return float(out[0]) if size is None else out

    def cache_token(self):
        return "atoms:" + ";".join(f"{y!r},{m!r}" for y, m in self.atoms)


@dataclass(frozen=True)
class CustomMeasure(LevyMeasure):
    """Caller-supplied density. Sampling needs a declared rejection envelope:
    a samplable catalog measure whose density dominates this one up to the
    constant ``envelope_bound``."""

    density_fn: Callable[[float], float]
    envelope: LevyMeasure | None = None
    envelope_bound: float = 1.0

    @property
    def family_tag(self):
        return "custom"

    def density(self, y):
        return self.density_fn(y)

    def sample_band(self, lo, hi, rng, size=None):
        _validate_band(lo, hi)
        if self.envelope is None:
            raise ZeroMassBandError(
                "custom measures need a rejection envelope to be samplable")
        n = 1 if size is None else int(size)
        out = np.empty(n)
        filled = 0
        for _ in range(10000):
            m = n - filled
            cand = np.atleast_1d(self.envelope.sample_band(lo, hi, rng, size=m))
            ratio = np.asarray(self.density_fn(cand)) / (
                self.envelope_bound * np.asarray(self.envelope.density(cand)))
            if np.any(ratio > 1.0 + 1e-9):
                raise ValueError(
                    "envelope_bound * envelope.density does not dominate the density")
            accept = rng.random(m) < ratio
            k = int(accept.sum())
            out[filled:filled + k] = cand[accept]
            filled += k
            if filled == n:
                return float(out[0]) if size is None else out
        raise ZeroMassBandError(
            f"rejection sampling failed to accept in band ({lo}, {hi}]")


def build_measure(cfg: dict) -> LevyMeasure:
    """Construct a catalog measure from its JSON configuration block."""
    from .errors import ConfigError

    if not isinstance(cfg, dict) or "family" not in cfg:
        raise ConfigError("levy: expected an object with a 'family' key")
    family = cfg["family"]
    known = {
        "stable": ({"family", "alpha", "scale"}, lambda: StableMeasure(
            alpha=float(cfg["alpha"]), scale=float(cfg.get("scale", 1.0)))),
        "tempered_stable": ({"family", "alpha", "scale", "tempering"},
                            lambda: TemperedStableMeasure(
                                alpha=float(cfg["alpha"]),
                                scale=float(cfg.get("scale", 1.0)),
                                tempering=float(cfg.get("tempering", 1.0)))),
        "finite_atoms": ({"family", "atoms"}, lambda: FiniteAtomMeasure(
            [(float(y), float(m)) for y, m in cfg.get("atoms", [])])),
    }
    if family not in known:
        raise ConfigError(f"levy.family: unknown family {family!r}")
    allowed, make = known[family]
    extra = set(cfg) - allowed
    if extra:
        raise ConfigError(f"levy.{sorted(extra)[0]}: unknown key")
    if family in ("stable", "tempered_stable") and "alpha" not in cfg:
        raise ConfigError("levy.alpha: required for this family")
    try:
        return make()
    except ValueError as exc:
        raise ConfigError(f"levy: {exc}") from exc
