"""SDE coefficients, continuity-modulus families, and numerical verification of
every hypothesis behind the pathwise-uniqueness gate.

Conditions are verified by sampling on declared grids, never symbolically: a
"pass" means no violation was found on the grid, and the report says exactly
which sampled point came closest. Integral conditions against the jump measure
use a fixed log-decade quadrature with geometric tail classification, so
divergent integrals are flagged rather than silently truncated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate

from .errors import ConfigError, DivergenceError
from .levy import OVERFLOW_GUARD, LevyMeasure, band_nodes, build_measure

#: Relative slack used when comparing a sampled quantity against its bound.
#: Equality cases (ratio exactly 1) are meant to pass; the slack absorbs the
#: quadrature and float noise that would otherwise flip them.
INEQ_REL_TOL = 1e-9
INTEGRAL_INEQ_REL_TOL = 1e-6

DIVERGENCE_THRESHOLD = 1e6
PLATEAU_REL_TOL = 1e-9


# ---------------------------------------------------------------------------
# continuity moduli
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PowerModulus:
    """h(u) = scale * u**gamma, the workhorse modulus family.

    gamma = 1/2 covers square-root diffusions, gamma = 1 is the Lipschitz case.
    """

    gamma: float
    scale: float = 1.0

    def __post_init__(self):
        if self.gamma <= 0.0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if self.scale <= 0.0:
            raise ValueError(f"scale must be positive, got {self.scale}")

    def __call__(self, u):
        return self.scale * np.abs(u) ** self.gamma

    def h2_integral_log(self, log_lo: float, log_hi: float) -> float:
        """Integral of h(v)**-2 dv over [exp(log_lo), exp(log_hi)].

        Closed form, evaluated directly from log endpoints so levels far below
        the smallest positive double stay usable.
        """
        s2 = self.scale ** 2
        q = 1.0 - 2.0 * self.gamma
        if q == 0.0:
            return (log_hi - log_lo) / s2
        return (math.exp(q * log_hi) - math.exp(q * log_lo)) / (q * s2)

    def h2_integral(self, lo: float, hi: float) -> float:
        return self.h2_integral_log(math.log(lo), math.log(hi))

    @property
    def analytic_divergence(self) -> bool | None:
        """Whether the h**-2 integral diverges at 0: gamma >= 1/2."""
        return self.gamma >= 0.5

    def describe(self) -> str:
        return f"power(gamma={self.gamma}, scale={self.scale})"


def linear_modulus(scale: float = 1.0) -> PowerModulus:
    return PowerModulus(gamma=1.0, scale=scale)


@dataclass(frozen=True)
class CustomModulus:
    """Arbitrary callable modulus. Divergence of h**-2 is decided numerically."""

    fn: Callable[[float], float]
    name: str = "custom"

    def __call__(self, u):
        return self.fn(u)

    def h2_integral_log(self, log_lo: float, log_hi: float) -> float:
        val, _ = integrate.quad(
            lambda u: math.exp(u) / self.fn(math.exp(u)) ** 2,
            log_lo, log_hi, epsabs=1e-300, epsrel=1e-12, limit=400)
        return val

    def h2_integral(self, lo: float, hi: float) -> float:
        return self.h2_integral_log(math.log(lo), math.log(hi))

    @property
    def analytic_divergence(self):
        return None

    def describe(self) -> str:
        return self.name


def validate_modulus(h, grid_max: float = 1.0) -> None:
    """Spot-check the modulus contract on a grid: h(0)=0, nondecreasing,
    strictly positive away from 0."""
    grid = np.linspace(0.0, grid_max, 257)
    vals = np.asarray([float(h(u)) for u in grid])
    if not np.all(np.isfinite(vals)):
        raise ValueError("modulus evaluates to a non-finite value on [0, 1]")
    if abs(vals[0]) > 1e-12:
        raise ValueError(f"modulus must vanish at 0, got h(0)={vals[0]}")
    if np.any(np.diff(vals) < -1e-12):
        raise ValueError("modulus must be nondecreasing")
    if np.any(vals[1:] <= 0.0):
        raise ValueError("modulus must be strictly positive for u > 0")


# ---------------------------------------------------------------------------
# model and report types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SampleSpec:
    """Grids over which the coefficient conditions are sampled.

    Coefficient-only checks use the full nt x nx x nx grid; checks that wrap a
    jump-measure integral run on the coarser nt_integral x nx_integral grid so
    a full gate stays at desk scale.
    """

    t_max: float = 1.0
    x_lo: float = -2.0
    x_hi: float = 2.0
    nt: int = 41
    nx: int = 81
    nt_integral: int = 11
    nx_integral: int = 21
    n_decades: int = 40
    panel_order: int = 16

    def t_points(self, integral: bool = False) -> np.ndarray:
        n = self.nt_integral if integral else self.nt
        return np.linspace(0.0, self.t_max, n)

    def x_points(self, integral: bool = False) -> np.ndarray:
        n = self.nx_integral if integral else self.nx
        return np.linspace(self.x_lo, self.x_hi, n)


@dataclass
class ConditionEntry:
    name: str
    verdict: str                      # "pass" | "fail" | "inconclusive"
    margin: float | None = None
    witness: dict | None = None
    informational: bool = False
    equality_case: bool = False       # bound attained (up to tolerance) somewhere
    note: str = ""

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "verdict": self.verdict,
            "margin": self.margin,
            "witness": self.witness,
            "informational": self.informational,
            "equality_case": self.equality_case,
            "note": self.note,
        }


@dataclass
class ConditionReport:
    entries: list[ConditionEntry] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries if not e.informational)

    def entry(self, name: str) -> ConditionEntry:
        for e in self.entries:
            if e.name == name:
                return e
        raise KeyError(name)

    def failing(self) -> list[str]:
        return [e.name for e in self.entries
                if not e.informational and e.verdict != "pass"]

    def to_dict(self) -> dict:
        return {"passed": self.passed,
                "entries": [e.to_dict() for e in self.entries]}


@dataclass
class JumpSDEModel:
    """Coefficients of a one-dimensional jump-diffusion.

    drift(t, x) and diffusion(t, x) feed the continuous part; small_jump_fn
    (marks up to the cutoff, compensated) and big_jump_fn (marks above it,
    raw) map (t, x, y) to a state increment. None means identically zero.
    Coefficient callables must be pure; the model is then freely shareable.
    """

    drift: Callable[[float, float], float]
    diffusion: Callable[[float, float], float]
    levy: LevyMeasure
    cutoff: float
    modulus: PowerModulus | CustomModulus
    lipschitz_k: float
    big_jump_fn: Callable[[float, float, float], float] | None = None
    small_jump_fn: Callable[[float, float, float], float] | None = None
    small_jump_state_independent: bool = False
    small_jump_mark_factor: Callable[[float, float], float] | None = None
    label: str = ""

    def __post_init__(self):
        if self.cutoff <= 0.0:
            raise ValueError(f"cutoff must be positive, got {self.cutoff}")
        if self.lipschitz_k < 0.0:
            raise ValueError(f"lipschitz_k must be nonnegative, got {self.lipschitz_k}")
        validate_modulus(self.modulus)
        if self.small_jump_state_independent and self.small_jump_fn is not None:
            f2 = self.small_jump_fn
            for y in (self.cutoff / 2, -self.cutoff / 7):
                for t in (0.0, 0.37):
                    if f2(t, -1.3, y) != f2(t, 2.4, y):
                        raise ValueError(
                            "small_jump_state_independent is set but the small-jump "
                            f"map depends on x at (t={t}, y={y})")

    def compensator(self, eps: float) -> Callable[[float, float], float]:
        """Drift correction for compensated small jumps on the band (eps, cutoff].

        Returns a pure callable (t, x) -> integral of the small-jump map over
        the band. Separable maps factor through a single band moment, which is
        exactly zero for symmetric measures; anything else falls back to a
        fixed-node quadrature per call.
        """
        if self.small_jump_fn is None:
            return _zero_coefficient
        if self.small_jump_mark_factor is not None:
            m1 = self.levy.signed_band_moment(eps, self.cutoff)
            if m1 == 0.0:
                return _zero_coefficient
            factor = self.small_jump_mark_factor
            return lambda t, x: factor(t, x) * m1
        grid = band_nodes(self.levy, eps, self.cutoff)
        marks = [float(y) for y in grid.marks]
        weights = grid.weights
        f2 = self.small_jump_fn
        return lambda t, x: float(
            np.asarray([f2(t, x, y) for y in marks]) @ weights)

    def omitted_jump_variance_rate(self, eps: float, x0: float) -> float:
        """Variance rate of the dropped sub-eps compensated jumps, at (0, x0)."""
        if self.small_jump_fn is None:
            return 0.0
        f2 = self.small_jump_fn
        try:
            return self.levy.band_integral(lambda y: f2(0.0, x0, y) ** 2, 0.0, eps)
        except DivergenceError:
            return math.inf


def _zero_coefficient(t: float, x: float) -> float:
    return 0.0


# ---------------------------------------------------------------------------
# coefficient-only checks
# ---------------------------------------------------------------------------

def _tabulate_txgrid(fn, ts, xs):
    vals = np.empty((len(ts), len(xs)))
    for i, t in enumerate(ts):
        for j, x in enumerate(xs):
            vals[i, j] = fn(t, x)
    return vals


def _nonfinite_entry(name, vals, ts, xs):
    i, j = np.argwhere(~np.isfinite(vals))[0]
    return ConditionEntry(
        name=name, verdict="fail", margin=None,
        witness={"t": float(ts[i]), "x": float(xs[j]), "value": float(vals[i, j])},
        note="coefficient evaluated to a non-finite value")


def _pairwise_ratio_check(name, vals, ts, xs, denom, bound):
    """Worst ratio |v(t,x) - v(t,x')| / denom(|x - x'|) against bound."""
    dx = np.abs(xs[:, None] - xs[None, :])
    mask = dx > 0.0
    den = np.where(mask, denom(dx), 1.0)
    worst = -math.inf
    witness = None
    for i in range(len(ts)):
        num = np.abs(vals[i][:, None] - vals[i][None, :])
        ratio = np.where(mask, num / den, -math.inf)
        j, k = np.unravel_index(np.argmax(ratio), ratio.shape)
        if ratio[j, k] > worst:
            worst = float(ratio[j, k])
            witness = {"t": float(ts[i]), "x": float(xs[j]),
                       "x_prime": float(xs[k]), "ratio": worst}
    margin = bound - worst
    ok = worst <= bound * (1.0 + INEQ_REL_TOL) + 1e-15
    return ConditionEntry(
        name=name,
        verdict="pass" if ok else "fail",
        margin=margin,
        witness=witness,
        equality_case=ok and abs(margin) <= INEQ_REL_TOL * max(bound, 1.0) + 1e-15,
    )


def check_drift_lipschitz(model: JumpSDEModel,
                          spec: SampleSpec = SampleSpec()) -> ConditionEntry:
    """Drift increments bounded by K |x - x'| on the sampled grid."""
    ts, xs = spec.t_points(), spec.x_points()
    vals = _tabulate_txgrid(model.drift, ts, xs)
    if not np.all(np.isfinite(vals)):
        return _nonfinite_entry("drift_lipschitz", vals, ts, xs)
    return _pairwise_ratio_check("drift_lipschitz", vals, ts, xs,
                                 denom=lambda d: d, bound=model.lipschitz_k)


def check_sigma_modulus(model: JumpSDEModel,
                        spec: SampleSpec = SampleSpec()) -> ConditionEntry:
    """Diffusion increments bounded by the declared modulus of |x - x'|."""
    ts, xs = spec.t_points(), spec.x_points()
    vals = _tabulate_txgrid(model.diffusion, ts, xs)
    if not np.all(np.isfinite(vals)):
        return _nonfinite_entry("sigma_modulus", vals, ts, xs)
    return _pairwise_ratio_check("sigma_modulus", vals, ts, xs,
                                 denom=model.modulus, bound=1.0)


def check_modulus_divergence(h, eps: float = 1.0) -> ConditionEntry:
    """Does the h**-2 integral blow up at 0?

    Power moduli are decided analytically (divergent iff gamma >= 1/2). A
    custom modulus is probed on halving lower endpoints: pass once the
    integral passes 1e6, fail once its increments plateau below 1e-9 for five
    consecutive halvings, inconclusive if neither happens within 40 halvings.
    """
    if eps <= 0.0:
        raise ValueError(f"eps must be positive, got {eps}")
    name = "modulus_divergence"
    verdict = getattr(h, "analytic_divergence", None)
    if verdict is not None:
        margin = h.gamma - 0.5
        return ConditionEntry(
            name=name, verdict="pass" if verdict else "fail", margin=margin,
            witness={"gamma": h.gamma},
            equality_case=h.gamma == 0.5,
            note="analytic verdict for the power family")
    log_eps = math.log(eps)
    prev = None
    plateau = 0
    value = 0.0
    for k in range(1, 41):
        delta_log = log_eps - k * math.log(2.0)
        try:
            value = h.h2_integral_log(delta_log, log_eps)
        except Exception as exc:
            return ConditionEntry(name=name, verdict="fail", margin=None,
                                  witness={"delta": math.exp(delta_log)},
                                  note=f"modulus not evaluable: {exc}")
        if value > DIVERGENCE_THRESHOLD:
            return ConditionEntry(
                name=name, verdict="pass", margin=value - DIVERGENCE_THRESHOLD,
                witness={"delta": math.exp(delta_log), "integral": value})
        if prev is not None and value - prev < PLATEAU_REL_TOL * value:
            plateau += 1
            if plateau >= 5:
                return ConditionEntry(
                    name=name, verdict="fail", margin=None,
                    witness={"delta": math.exp(delta_log), "integral": value},
                    note="integral converged under halving endpoints")
        else:
            plateau = 0
        prev = value
    return ConditionEntry(
        name=name, verdict="inconclusive", margin=None,
        witness={"delta": eps * 2.0 ** -40, "integral": value},
        note="neither threshold nor plateau reached within 40 halvings")


# ---------------------------------------------------------------------------
# jump-measure integral checks
# ---------------------------------------------------------------------------

def _tabulate_small_jump(model, ts, xs, grid):
    f2 = model.small_jump_fn
    marks = [float(y) for y in grid.marks]
    vals = np.empty((len(ts), len(xs), len(marks)))
    for i, t in enumerate(ts):
        for j, x in enumerate(xs):
            row = vals[i, j]
            for q, y in enumerate(marks):
                row[q] = f2(t, x, y)
    return vals


def _panel_sums(weighted, grid):
    """Collapse weighted node values (..., n_nodes) to per-decade sums."""
    if grid.exact:
        return weighted.sum(axis=-1)[..., None]
    n_panels = int(grid.panels.max()) + 1
    out = np.zeros(weighted.shape[:-1] + (n_panels,))
    for k in range(n_panels):
        sel = grid.panels == k
        out[..., k] = weighted[..., sel].sum(axis=-1)
    return out


def _classify_ladder(decade_sums):
    """Total with geometric tail correction, plus a divergence mask.

    decade_sums holds nonnegative per-decade contributions ordered from the
    band edge toward 0. A tail that refuses to decay along the last five
    decades marks the integral divergent.
    """
    d = decade_sums
    total = d.sum(axis=-1)
    if d.shape[-1] < 6:
        return total, np.zeros(total.shape, dtype=bool)
    tail = d[..., -1]
    ref = d[..., -6]
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(ref > 0.0, (tail / np.where(ref > 0, ref, 1.0)) ** 0.2, 0.0)
    relevant = tail > np.maximum(1e-13 * total, 1e-290)
    divergent = relevant & ((r >= 0.9995) | ~np.isfinite(r))
    divergent |= ~np.isfinite(total)
    remainder = np.where(relevant & ~divergent & (r > 0) & (r < 1),
                         tail * r / (1.0 - r), 0.0)
    return total + remainder, divergent


def check_jump_lipschitz(model: JumpSDEModel,
                         spec: SampleSpec = SampleSpec()) -> ConditionEntry:
    """Measure integral of small-jump increments bounded by K |x - x'|."""
    return _jump_difference_check(model, spec, name="jump_lipschitz",
                                  square=False)


def check_weak_l2_condition(model: JumpSDEModel,
                            spec: SampleSpec = SampleSpec()) -> ConditionEntry:
    """Squared small-jump increments against the squared modulus.

    Informational only: this weaker condition never feeds the gate.
    """
    entry = _jump_difference_check(model, spec, name="weak_l2", square=True)
    entry.informational = True
    entry.note = (entry.note + " " if entry.note else "") + \
        "informational: not sufficient on its own, never feeds the gate"
    return entry


def _jump_difference_check(model, spec, name, square):
    ts = spec.t_points(integral=True)
    xs = spec.x_points(integral=True)
    if model.small_jump_fn is None:
        bound = 1.0 if square else model.lipschitz_k
        return ConditionEntry(name=name, verdict="pass", margin=bound,
                              witness=None, note="no small-jump map declared",
                              equality_case=model.lipschitz_k == 0.0 and not square)
    grid = band_nodes(model.levy, 0.0, model.cutoff,
                      spec.n_decades, spec.panel_order)
    vals = _tabulate_small_jump(model, ts, xs, grid)
    if not np.all(np.isfinite(vals)):
        i, j, q = np.argwhere(~np.isfinite(vals))[0]
        return ConditionEntry(
            name=name, verdict="fail", margin=None,
            witness={"t": float(ts[i]), "x": float(xs[j]),
                     "y": float(grid.marks[q])},
            note="small-jump map evaluated to a non-finite value")
    dx = np.abs(xs[:, None] - xs[None, :])
    pair_mask = dx > 0.0
    if square:
        h = model.modulus
        bounds = np.where(pair_mask, np.asarray(h(dx)) ** 2, 1.0)
    else:
        bounds = np.where(pair_mask, model.lipschitz_k * dx, 1.0)
    worst_ratio = -math.inf
    witness = None
    any_divergent = False
    for i in range(len(ts)):
        diff = np.abs(vals[i][:, None, :] - vals[i][None, :, :])
        if square:
            diff = diff * diff
        weighted = diff * grid.weights
        totals, divergent = _classify_ladder(_panel_sums(weighted, grid))
        divergent &= pair_mask
        if divergent.any():
            j, k = np.argwhere(divergent)[0]
            return ConditionEntry(
                name=name, verdict="fail", margin=None,
                witness={"t": float(ts[i]), "x": float(xs[j]),
                         "x_prime": float(xs[k]), "integral": math.inf},
                note="measure integral diverges")
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(pair_mask & (bounds > 0), totals / bounds, -math.inf)
            # bound 0 (K = 0): only an exactly-zero integral passes
            zero_bound = pair_mask & (bounds == 0.0)
            ratio = np.where(zero_bound & (totals > 0.0), math.inf, ratio)
            ratio = np.where(zero_bound & (totals == 0.0), 1.0, ratio)
        j, k = np.unravel_index(np.argmax(ratio), ratio.shape)
        if ratio[j, k] > worst_ratio:
            worst_ratio = float(ratio[j, k])
            witness = {"t": float(ts[i]), "x": float(xs[j]),
                       "x_prime": float(xs[k]),
                       "integral": float(totals[j, k]),
                       "bound": float(bounds[j, k]) if not zero_bound[j, k] else 0.0}
    if witness is None:
        return ConditionEntry(name=name, verdict="pass", margin=None,
                              note="no sample pairs (degenerate grid)")
    ok = worst_ratio <= 1.0 + INTEGRAL_INEQ_REL_TOL
    margin = 1.0 - worst_ratio
    return ConditionEntry(
        name=name, verdict="pass" if ok else "fail",
        margin=margin, witness=witness,
        equality_case=ok and abs(margin) <= INTEGRAL_INEQ_REL_TOL)


def check_summability(model: JumpSDEModel,
                      spec: SampleSpec = SampleSpec()) -> ConditionEntry:
    """Finiteness of the (f^2 v |f|) integral of the small-jump map."""
    name = "small_jump_summability"
    ts = spec.t_points(integral=True)
    xs = spec.x_points(integral=True)
    if model.small_jump_fn is None:
        return ConditionEntry(name=name, verdict="pass", margin=OVERFLOW_GUARD,
                              witness={"supremum": 0.0},
                              note="no small-jump map declared")
    grid = band_nodes(model.levy, 0.0, model.cutoff,
                      spec.n_decades, spec.panel_order)
    vals = _tabulate_small_jump(model, ts, xs, grid)
    if not np.all(np.isfinite(vals)):
        i, j, q = np.argwhere(~np.isfinite(vals))[0]
        return ConditionEntry(
            name=name, verdict="fail", margin=None,
            witness={"t": float(ts[i]), "x": float(xs[j]),
                     "y": float(grid.marks[q])},
            note="small-jump map evaluated to a non-finite value")
    integrand = np.maximum(vals * vals, np.abs(vals)) * grid.weights
    totals, divergent = _classify_ladder(_panel_sums(integrand, grid))
    if divergent.any() or (totals > OVERFLOW_GUARD).any():
        bad = divergent | (totals > OVERFLOW_GUARD)
        i, j = np.argwhere(bad)[0]
        return ConditionEntry(
            name=name, verdict="fail", margin=None,
            witness={"t": float(ts[i]), "x": float(xs[j]), "integral": math.inf},
            note="small-jump summability integral diverges")
    i, j = np.unravel_index(np.argmax(totals), totals.shape)
    sup = float(totals[i, j])
    return ConditionEntry(
        name=name, verdict="pass", margin=OVERFLOW_GUARD - sup,
        witness={"t": float(ts[i]), "x": float(xs[j]), "supremum": sup})


def uniqueness_gate(model: JumpSDEModel,
                    spec: SampleSpec = SampleSpec()) -> tuple[bool, ConditionReport]:
    """All sufficient conditions for pathwise uniqueness, aggregated.

    True iff drift Lipschitz, diffusion modulus, modulus divergence, jump
    Lipschitz and small-jump summability all pass on the sampled grids. The
    weak L2 entry rides along for information and never affects the verdict.
    """
    report = ConditionReport()
    report.entries.append(check_drift_lipschitz(model, spec))
    report.entries.append(check_sigma_modulus(model, spec))
    report.entries.append(check_modulus_divergence(model.modulus))
    report.entries.append(check_jump_lipschitz(model, spec))
    report.entries.append(check_summability(model, spec))
    report.entries.append(check_weak_l2_condition(model, spec))
    return report.passed, report


# ---------------------------------------------------------------------------
# coefficient catalog and config parsing
# ---------------------------------------------------------------------------

_MODEL_KEYS = {"drift", "sigma", "f1", "f2", "cutoff_c", "levy", "modulus",
               "K", "x0", "check", "label"}


def _require(cfg, key, where):
    if key not in cfg:
        raise ConfigError(f"{where}.{key}: required")
    return cfg[key]


def _reject_unknown(cfg, allowed, where):
    extra = set(cfg) - allowed
    if extra:
        raise ConfigError(f"{where}.{sorted(extra)[0]}: unknown key")


def _build_drift(cfg):
    _reject_unknown(cfg, {"kind", "intercept", "slope"}, "drift")
    kind = _require(cfg, "kind", "drift")
    if kind == "zero":
        return lambda t, x: 0.0
    if kind == "affine":
        a = float(cfg.get("intercept", 0.0))
        b = float(cfg.get("slope", 0.0))
        return lambda t, x: a + b * x
    raise ConfigError(f"drift.kind: unknown kind {kind!r}")


def _build_sigma(cfg):
    _reject_unknown(cfg, {"kind", "value", "scale", "gamma"}, "sigma")
    kind = _require(cfg, "kind", "sigma")
    if kind == "constant":
        v = float(_require(cfg, "value", "sigma"))
        return lambda t, x: v
    if kind == "sqrt":
        s = float(cfg.get("scale", 1.0))
        return lambda t, x: s * math.sqrt(max(x, 0.0))
    if kind == "power":
        s = float(cfg.get("scale", 1.0))
        g = float(_require(cfg, "gamma", "sigma"))
        return lambda t, x: s * abs(x) ** g
    raise ConfigError(f"sigma.kind: unknown kind {kind!r}")


def _build_jump(cfg, where):
    """Returns (fn, state_independent, mark_factor)."""
    _reject_unknown(cfg, {"kind", "intercept", "slope", "bound", "scale",
                          "scale_slope"}, where)
    kind = _require(cfg, "kind", where)
    if kind == "zero":
        return None, True, None
    if kind == "mark":
        return (lambda t, x, y: y), True, (lambda t, x: 1.0)
    if kind == "mark_scaled":
        s = float(cfg.get("scale", 1.0))
        return (lambda t, x, y: s * y), True, (lambda t, x: s)
    if kind == "time_affine_mark":
        g0 = float(cfg.get("scale", 1.0))
        g1 = float(cfg.get("scale_slope", 0.0))
        return (lambda t, x, y: (g0 + g1 * t) * y), True, \
            (lambda t, x: g0 + g1 * t)
    if kind == "state_linear":
        a = float(cfg.get("intercept", 0.0))
        b = float(cfg.get("slope", 1.0))
        bound = float(cfg.get("bound", 1.0))
        if bound <= 0.0:
            raise ConfigError(f"{where}.bound: must be positive")

        def factor(t, x, a=a, b=b, bound=bound):
            return min(max(a + b * x, -bound), bound)

        return (lambda t, x, y: factor(t, x) * y), False, factor
    raise ConfigError(f"{where}.kind: unknown kind {kind!r}")


def _build_modulus(cfg):
    _reject_unknown(cfg, {"family", "gamma", "scale"}, "modulus")
    family = _require(cfg, "family", "modulus")
    if family == "power":
        g = float(_require(cfg, "gamma", "modulus"))
        return PowerModulus(gamma=g, scale=float(cfg.get("scale", 1.0)))
    if family == "linear":
        return linear_modulus(scale=float(cfg.get("scale", 1.0)))
    raise ConfigError(f"modulus.family: unknown family {family!r}")


def build_model(cfg: dict) -> JumpSDEModel:
    """Build a JumpSDEModel from a JSON-style configuration dict.

    Validation errors point at the offending dotted key.
    """
    if not isinstance(cfg, dict):
        raise ConfigError("config: expected a JSON object")
    _reject_unknown(cfg, _MODEL_KEYS, "config")
    for key in ("drift", "sigma", "f1", "f2", "cutoff_c", "levy", "modulus", "K"):
        _require(cfg, key, "config")
    cutoff = float(cfg["cutoff_c"])
    if cutoff <= 0.0:
        raise ConfigError("config.cutoff_c: must be positive")
    k = float(cfg["K"])
    if k < 0.0:
        raise ConfigError("config.K: must be nonnegative")
    f1, _, _ = _build_jump(cfg["f1"], "f1")
    f2, indep, factor = _build_jump(cfg["f2"], "f2")
    try:
        return JumpSDEModel(
            drift=_build_drift(cfg["drift"]),
            diffusion=_build_sigma(cfg["sigma"]),
            levy=build_measure(cfg["levy"]),
            cutoff=cutoff,
            modulus=_build_modulus(cfg["modulus"]),
            lipschitz_k=k,
            big_jump_fn=f1,
            small_jump_fn=f2,
            small_jump_state_independent=indep,
            small_jump_mark_factor=factor,
            label=str(cfg.get("label", "")),
        )
    except ValueError as exc:
        raise ConfigError(f"config: {exc}") from exc


def build_sample_spec(cfg: dict | None) -> SampleSpec:
    """SampleSpec from the optional "check" config block."""
    if cfg is None:
        return SampleSpec()
    _reject_unknown(cfg, {"t_max", "x_lo", "x_hi"}, "check")
    spec = SampleSpec(
        t_max=float(cfg.get("t_max", 1.0)),
        x_lo=float(cfg.get("x_lo", -2.0)),
        x_hi=float(cfg.get("x_hi", 2.0)),
    )
    if spec.t_max <= 0.0:
        raise ConfigError("check.t_max: must be positive")
    if spec.x_lo >= spec.x_hi:
        raise ConfigError("check.x_lo: must be below check.x_hi")
    return spec
