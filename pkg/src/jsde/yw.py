"""Yamada-Watanabe approximation machinery.

From a continuity modulus h with divergent h**-2 integral at 0, build the
classical ladder of objects used to squeeze an absolute value from below:

* shrinking levels 1 = a_0 > a_1 > ... with the h**-2 integral over each
  rung (a_n, a_{n-1}) equal to n, found by bisection in log space;
* continuous probability densities rho_n supported strictly inside each rung,
  shaped as kappa_n * taper * h**-2 so that rho_n <= 2 / (n h^2);
* C2 even functions psi_n with psi_n'' = rho_n(|y|), evaluated from
  cumulative tables on log-spaced nodes, which increase pointwise to |y|.

Levels are stored in log space: for square-root moduli they decay like
exp(-n^2/2) and would underflow doubles near n = 38 otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import LevelBracketError, TaperError

_BISECT_TOL = 1e-13          # absolute, in log units
_TAPER_MAX_HALVINGS = 60
_DEFAULT_NODES = 4096
_GL8_X, _GL8_W = np.polynomial.legendre.leggauss(8)


def compute_levels(modulus, n_max: int) -> np.ndarray:
    """Log-levels log(a_0..a_N) with a_0 = 1 and unit-increment rung integrals.

    Each a_n solves: integral of h**-2 over (a_n, a_{n-1}) equals n. The
    integral is continuous and strictly increasing as a_n shrinks, and the
    divergence of h**-2 at 0 guarantees a root; bisection runs in log space.
    Raises LevelBracketError (carrying the levels found) when the modulus
    fails to diverge within floating-point reach.
    """
    if n_max < 1:
        raise ValueError(f"n_max must be at least 1, got {n_max}")
    logs = [0.0]
    for n in range(1, n_max + 1):
        prev = logs[-1]
        target = float(n)
        offset = 1.0
        while True:
            lo = prev - offset
            try:
                val = modulus.h2_integral_log(lo, prev)
            except (OverflowError, ValueError) as exc:
                raise LevelBracketError(
                    f"level {n} not reachable: {exc}", np.asarray(logs)) from exc
            if not math.isfinite(val):
                raise LevelBracketError(
                    f"level {n}: rung integral not finite", np.asarray(logs))
            if val >= target:
                break
            offset *= 2.0
            if offset > 4096.0:
                raise LevelBracketError(
                    f"level {n} not bracketed within log offset {offset:g}; "
                    "the modulus does not diverge in float range",
                    np.asarray(logs))
        hi = prev
        while hi - lo > _BISECT_TOL:
            mid = 0.5 * (lo + hi)
            if modulus.h2_integral_log(mid, prev) >= target:
                lo = mid
            else:
                hi = mid
        logs.append(0.5 * (lo + hi))
    return np.asarray(logs)


@dataclass(frozen=True)
class TaperedDensity:
    """rho_n = kappa * taper(log v) * h(v)**-2 on one level rung.

    The taper is piecewise linear in log v: 0 at both support endpoints,
    1 across the middle, rising/falling over ``taper_width`` log units.
    Any taper shape meeting the normalization and the 2/(n h^2) cap would do;
    this one is cheap to integrate and certify.
    """

    n: int
    log_lo: float
    log_hi: float
    taper_width: float
    kappa: float
    modulus: object

    def taper(self, u):
        u = np.asarray(u, dtype=float)
        rise = (u - self.log_lo) / self.taper_width
        fall = (self.log_hi - u) / self.taper_width
        t = np.minimum(1.0, np.minimum(rise, fall))
        return np.maximum(0.0, t)

    def __call__(self, v):
        v = np.asarray(v, dtype=float)
        out = np.zeros_like(v)
        pos = v > 0.0
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            u = np.where(pos, np.log(np.where(pos, v, 1.0)), -np.inf)
        inside = pos & (u > self.log_lo) & (u < self.log_hi)
        if np.any(inside):
            vi = v[inside]
            out[inside] = self.kappa * self.taper(u[inside]) \
                / np.asarray(self.modulus(vi)) ** 2
        return out if out.ndim else float(out)


def build_density(modulus, log_lo: float, log_hi: float, n: int) -> TaperedDensity:
    """Normalized tapered density on one rung with rho <= 2/(n h^2) certified.

    The taper starts at 10% of the rung's log-width and halves until the
    un-normalized mass reaches n/2, which caps kappa = 1/mass at 2/n.
    """
    width = log_hi - log_lo
    taper_w = 0.1 * width
    for _ in range(_TAPER_MAX_HALVINGS):
        mass = _taper_mass(modulus, log_lo, log_hi, taper_w)
        if mass >= n / 2.0:
            return TaperedDensity(n=n, log_lo=log_lo, log_hi=log_hi,
                                  taper_width=taper_w, kappa=1.0 / mass,
                                  modulus=modulus)
        taper_w *= 0.5
    raise TaperError(
        f"taper failed to reach mass {n / 2} on rung {n} after "
        f"{_TAPER_MAX_HALVINGS} halvings")


def _gl_panel(f, u0, u1):
    half = 0.5 * (u1 - u0)
    u = 0.5 * (u1 + u0) + half * _GL8_X
    return float(half * (f(u) @ _GL8_W))


def _taper_mass(modulus, log_lo, log_hi, taper_w):
    """Integral of taper(log v) * h(v)**-2 dv over the rung (log substitution)."""

    def integrand(u):
        v = np.exp(u)
        t = np.minimum(1.0, np.minimum((u - log_lo) / taper_w,
                                       (log_hi - u) / taper_w))
        return np.maximum(0.0, t) * v / np.asarray(modulus(v)) ** 2

    mid_lo, mid_hi = log_lo + taper_w, log_hi - taper_w
    mass = _gl_panel(integrand, log_lo, mid_lo)
    mass += modulus.h2_integral_log(mid_lo, mid_hi)  # taper is 1 here
    mass += _gl_panel(integrand, mid_hi, log_hi)
    return mass


@dataclass(frozen=True, eq=False)
class PsiTable:
    """Cumulative tables for one level: psi' and psi at log-spaced nodes."""

    nodes: np.ndarray   # support nodes, ascending
    prime: np.ndarray   # psi' at nodes, 0 at the left edge, exactly 1 at the right
    value: np.ndarray   # psi at nodes, trapezoid-consistent with prime


def _build_table(density: TaperedDensity, n_nodes: int) -> PsiTable:
    u = np.linspace(density.log_lo, density.log_hi, n_nodes)
    breaks = np.array([density.log_lo + density.taper_width,
                       density.log_hi - density.taper_width])
    u = np.unique(np.concatenate([u, breaks]))
    v = np.exp(u)
    # per-segment mass of rho by Gauss-Legendre in the log coordinate
    u0, u1 = u[:-1], u[1:]
    half = 0.5 * (u1 - u0)
    mid = 0.5 * (u1 + u0)
    uu = mid[:, None] + half[:, None] * _GL8_X[None, :]
    vv = np.exp(uu)
    rho = density.kappa * density.taper(uu) / np.asarray(density.modulus(vv)) ** 2
    seg = half * ((rho * vv) @ _GL8_W)
    prime = np.concatenate([[0.0], np.cumsum(seg)])
    # kappa came from an independent quadrature of the same mass; renormalize
    # so the table tops out at exactly 1 and |psi'| <= 1 holds as a hard bound
    prime /= prime[-1]
    dv = np.diff(v)
    value = np.concatenate([[0.0],
                            np.cumsum(dv * 0.5 * (prime[:-1] + prime[1:]))])
    return PsiTable(nodes=v, prime=prime, value=value)


class ApproximationSequence:
    """Levels, rung densities and psi tables for a modulus, built once.

    Immutable after construction; evaluation methods are pure, vectorized,
    and O(log nodes) per point.
    """

    def __init__(self, modulus, log_levels: np.ndarray,
                 densities: list[TaperedDensity], tables: list[PsiTable]):
        self.modulus = modulus
        self.log_levels = log_levels
        self.densities = densities
        self.tables = tables

    @classmethod
    def build(cls, modulus, n_max: int = 20,
              n_nodes: int = _DEFAULT_NODES) -> "ApproximationSequence":
        log_levels = compute_levels(modulus, n_max)
        densities = []
        tables = []
        for n in range(1, n_max + 1):
            dens = build_density(modulus, log_levels[n], log_levels[n - 1], n)
            densities.append(dens)
            tables.append(_build_table(dens, n_nodes))
        return cls(modulus, log_levels, densities, tables)

    @property
    def n_max(self) -> int:
        return len(self.densities)

    @property
    def levels(self) -> np.ndarray:
        """a_0..a_N in linear scale (may underflow for very deep levels)."""
        return np.exp(self.log_levels)

    def _table(self, n: int) -> PsiTable:
        if not (1 <= n <= self.n_max):
            raise ValueError(f"level n must lie in [1, {self.n_max}], got {n}")
        return self.tables[n - 1]

    def psi_prime(self, n: int, y):
        """First derivative: odd, in [-1, 1], exactly 1 above the rung."""
        tab = self._table(n)
        y = np.asarray(y, dtype=float)
        out = np.sign(y) * np.interp(np.abs(y), tab.nodes, tab.prime)
        return out if out.ndim else float(out)

    def psi(self, n: int, y):
        """The absolute-value approximant: even, 0 at 0, squeezed between
        |y| - a_{n-1} and |y|."""
        tab = self._table(n)
        y = np.asarray(y, dtype=float)
        a = np.abs(y)
        idx = np.searchsorted(tab.nodes, a, side="right") - 1
        idx = np.clip(idx, 0, len(tab.nodes) - 2)
        below = a <= tab.nodes[0]
        above = a >= tab.nodes[-1]
        v0 = tab.nodes[idx]
        dv = a - v0
        slope = (tab.prime[idx + 1] - tab.prime[idx]) \
            / (tab.nodes[idx + 1] - tab.nodes[idx])
        mid = tab.value[idx] + dv * tab.prime[idx] + 0.5 * dv * dv * slope
        out = np.where(below, 0.0,
                       np.where(above, tab.value[-1] + (a - tab.nodes[-1]), mid))
        return out if out.ndim else float(out)

    def psi_second(self, n: int, y):
        """Second derivative: the rung density evaluated at |y| (exact form)."""
        dens = self.densities[n - 1]
        if not (1 <= n <= self.n_max):
            raise ValueError(f"level n must lie in [1, {self.n_max}], got {n}")
        y = np.asarray(y, dtype=float)
        out = dens(np.abs(y))
        return out if np.ndim(out) else float(out)

    def psi_offset(self, n: int) -> float:
        """The constant with psi_n(y) = |y| - offset above the rung; in
        [0, a_{n-1}]."""
        tab = self._table(n)
        return float(tab.nodes[-1] - tab.value[-1])

    def table_csv_rows(self, n: int, ys):
        for y in ys:
            yield (n, float(y), self.psi(n, y), self.psi_prime(n, y),
                   self.psi_second(n, y))
