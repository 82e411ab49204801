"""Analytic evaluators for the timed one- and two-box experiment layouts.

Covers the fixed-schedule correlated pair (Bob's marginal under Alice's
two choices), the timing statistics Theta and Omega of the randomized
window experiment, and the window-averaged marginal formula.

Times are elapsed seconds from the window start (the agreed instant tau);
input-time densities live on [0, dt_window].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .behaviors import Distribution, make_distribution
from .collapse import CollapseFamily, marginal_at
from .errors import (
    FormulaInconsistency,
    InvalidSpec,
    MaxDepthExceeded,
    NegativeElapsed,
    NotNormalized,
    QuadratureFailure,
)
from .quadrature import integrate, integrate2

_INVERSE_CDF_GRID = 4097  # resolution for tabulated-density inverse sampling


@dataclass(frozen=True)
class TimeDensity:
    """Input-time density g on [0, width].

    kinds: "uniform"; "truncexp" (rate > 0, truncated exponential);
    "table" (piecewise-linear density on a user grid spanning [0, width]).
    """

    kind: str
    width: float
    rate: float | None = None
    grid_times: np.ndarray | None = None
    grid_values: np.ndarray | None = None
    _inv_u: np.ndarray = field(default=None, repr=False)
    _inv_t: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.width <= 0:
            raise InvalidSpec("window width must be positive")
        if self.kind == "uniform":
            pass
        elif self.kind == "truncexp":
            if self.rate is None or self.rate <= 0:
                raise InvalidSpec("truncexp needs a positive rate")
        elif self.kind == "table":
            t = np.asarray(self.grid_times, dtype=float)
            v = np.asarray(self.grid_values, dtype=float)
            if t.ndim != 1 or t.size < 2 or np.any(np.diff(t) <= 0):
                raise InvalidSpec("density grid must be strictly increasing")
            if abs(t[0]) > 1e-12 or abs(t[-1] - self.width) > 1e-9:
                raise InvalidSpec("density grid must span [0, width]")
            if v.shape != t.shape or np.any(v < 0):
                raise InvalidSpec("density values must be non-negative, one per node")
            mass = float(np.trapezoid(v, t))
            if abs(mass - 1.0) > 1e-9:
                raise NotNormalized(f"density integrates to {mass!r}, not 1")
            object.__setattr__(self, "grid_times", t)
            object.__setattr__(self, "grid_values", v)
            fine = np.linspace(0.0, self.width, _INVERSE_CDF_GRID)
            pdf = np.interp(fine, t, v)
            cdf = np.concatenate([[0.0], np.cumsum(
                0.5 * (pdf[1:] + pdf[:-1]) * np.diff(fine))])
            cdf /= cdf[-1]
            object.__setattr__(self, "_inv_u", cdf)
            object.__setattr__(self, "_inv_t", fine)
        else:
            raise InvalidSpec(f"unknown density kind {self.kind!r}")

    def pdf(self, t):
        t = np.asarray(t, dtype=float)
        inside = (t >= 0) & (t <= self.width)
        if self.kind == "uniform":
            out = np.where(inside, 1.0 / self.width, 0.0)
        elif self.kind == "truncexp":
            norm = 1.0 - math.exp(-self.rate * self.width)
            out = np.where(inside, self.rate * np.exp(-self.rate * t) / norm, 0.0)
        else:
            out = np.where(inside, np.interp(t, self.grid_times, self.grid_values,
                                             left=0.0, right=0.0), 0.0)
        return out if out.ndim else float(out)

    def sample(self, u):
        """Inverse-CDF transform of uniforms u in [0, 1)."""
        u = np.asarray(u, dtype=float)
        if self.kind == "uniform":
            return u * self.width
        if self.kind == "truncexp":
            norm = 1.0 - np.exp(-self.rate * self.width)
            return -np.log1p(-u * norm) / self.rate
        return np.interp(u, self._inv_u, self._inv_t)

    def breakpoints(self):
        if self.kind == "table":
            return tuple(self.grid_times)
        return ()


@dataclass(frozen=True)
class WindowSpec:
    """Randomized-input time window: length and input-time density."""

    dt_window: float
    g: TimeDensity

    def __post_init__(self):
        if self.dt_window <= 0:
            raise InvalidSpec("window length must be positive")
        if abs(self.g.width - self.dt_window) > 1e-12:
            raise InvalidSpec("density width must equal the window length")


@dataclass(frozen=True)
class Schedule:
    """Fixed input times on the shared clock, and Alice's choice."""

    t_a: float
    t_b: float
    x: int

    def __post_init__(self):
        if not (math.isfinite(self.t_a) and math.isfinite(self.t_b)):
            raise InvalidSpec("schedule times must be finite")
        if self.x not in (0, 1):
            raise InvalidSpec("Alice's choice must be 0 or 1")
        if self.t_b < self.t_a:
            raise InvalidSpec("fixed-schedule scenario requires t_b >= t_a")


@dataclass(frozen=True)
class TwoBoxScenario:
    """Perfectly correlated pair: shared prior P0 and a collapse family.

    Input 0 on either side is non collapse triggering with deterministic
    output 0; input 1 triggers the collapse with first-output prior P0.
    Perfect correlation: the (1,1) joint is P0(a,b) = delta_{a,b} P0(b).
    """

    p0: Distribution
    family: CollapseFamily

    def __post_init__(self):
        fp = self.family.p0
        if fp.size != self.p0.size or np.abs(fp.weights - self.p0.weights).max() > 1e-12:
            raise InvalidSpec("collapse family is bound to a different prior")


def bob_marginal(s: TwoBoxScenario, x: int, elapsed: float) -> Distribution:
    """Bob's output distribution under Alice's choice x at the given elapsed time.

    x = 0: Alice's input triggers nothing, Bob sees the prior.
    x = 1: the pair collapses to a shared latent outcome at Alice's input;
    Bob's probe at `elapsed` is governed by the collapse family.
    """
    if elapsed < 0:
        raise NegativeElapsed(f"elapsed {elapsed} < 0")
    if x == 0:
        return s.p0
    return marginal_at(s.family, s.p0, elapsed)


def _wrap_quadrature(fn):
    try:
        return fn()
    except MaxDepthExceeded as exc:
        raise QuadratureFailure(
            f"requested tolerance not met: {exc} "
            f"(best value {exc.value!r}, error {exc.error_estimate:.3e})"
        ) from exc


def theta(w: WindowSpec, dt_min: float, tol: float = 1e-9) -> float:
    """Probability that two independent g-draws fall within dt_min of each other."""
    if dt_min < 0:
        raise InvalidSpec("dt_min must be non-negative")
    if dt_min == 0:
        return 0.0
    if dt_min >= w.dt_window:
        return 1.0
    g = w.g
    bps = (dt_min, w.dt_window - dt_min) + g.breakpoints()

    def run():
        r = integrate2(
            lambda ta, tb: g.pdf(ta) * g.pdf(tb),
            0.0, w.dt_window,
            lo=lambda ta: max(0.0, ta - dt_min),
            hi=lambda ta: min(w.dt_window, ta + dt_min),
            tol=tol, breakpoints_x=bps)
        return min(max(r.value, 0.0), 1.0)

    return _wrap_quadrature(run)


def difference_density(w: WindowSpec, u, tol: float = 1e-9) -> float:
    """Density of the signed difference D = t_B - t_A at u >= 0.

    h(u) = integral of g(t) g(t + u) dt over the overlap of the window
    with itself shifted by u.
    """
    g = w.g
    if u < 0 or u > w.dt_window:
        return 0.0

    def run():
        r = integrate(lambda t: g.pdf(t) * g.pdf(t + u), 0.0, w.dt_window - u,
                      tol=tol, breakpoints=g.breakpoints())
        return max(r.value, 0.0)

    return _wrap_quadrature(run)


def omega(w: WindowSpec, dt_min: float, tol: float = 1e-9) -> float:
    """Mass of the non-negative time difference below dt_min.

    Omega = integral over u in [0, dt_min] of the difference density; the
    normalizer of the collapse-window term of the window-averaged marginal.
    """
    if dt_min < 0:
        raise InvalidSpec("dt_min must be non-negative")
    if dt_min == 0:
        return 0.0
    hi = min(dt_min, w.dt_window)

    def run():
        r = integrate(lambda u: difference_density(w, u, tol=tol / 10.0),
                      0.0, hi, tol=tol)
        return min(max(r.value, 0.0), 1.0)

    return _wrap_quadrature(run)


def window_marginal(s: TwoBoxScenario, w: WindowSpec, tol: float = 1e-9) -> Distribution:
    """Window-averaged Bob marginal when Alice chooses the triggering input.

    Evaluates the two-term mixture literally: with probability (1 - Theta)
    the probes are farther apart than the shortest collapse time and Bob
    sees the prior; otherwise the collapse-window term applies, weighted
    by the difference density restricted to [0, dt_min] (the same density
    whose mass is Omega). Normalization beyond 1e-6 is an error, never
    silently repaired.
    """
    dt_min = s.family.dt_min
    th = theta(w, dt_min, tol=tol)
    if th == 0.0:
        return s.p0
    om = omega(w, dt_min, tol=tol)
    n = s.p0.size
    bps = tuple(float(d) for d in s.family.dt if 0.0 < d < dt_min) or ()

    inner = np.empty((n, n))
    for b in range(n):
        for bp in range(n):
            def fint(u, _b=b, _bp=bp):
                row = s.family.rows(np.array([_b]), np.array([u]))[0, _bp]
                return row * difference_density(w, u, tol=tol / 10.0)
            r = _wrap_quadrature(lambda: integrate(fint, 0.0, dt_min, tol=tol,
                                                   breakpoints=bps))
            inner[b, bp] = r.value

    out = (1.0 - th) * s.p0.weights + (th / om) * (s.p0.weights @ inner)
    mass = float(out.sum())
    if abs(mass - 1.0) > 1e-6:
        raise FormulaInconsistency(
            f"window-averaged marginal sums to {mass!r}; the two-term formula "
            "is inconsistent for this scenario")
    return make_distribution(out, atol=1e-6)


# --- serialization (external interface) ---

def density_to_dict(g: TimeDensity) -> dict:
    d = {"kind": g.kind}
    if g.rate is not None:
        d["rate"] = float(g.rate)
    if g.grid_times is not None:
        d["times"] = list(map(float, g.grid_times))
        d["values"] = list(map(float, g.grid_values))
    return d


def density_from_dict(d: dict, width: float) -> TimeDensity:
    return TimeDensity(
        kind=d["kind"], width=width, rate=d.get("rate"),
        grid_times=d.get("times"), grid_values=d.get("values"))


def window_to_dict(w: WindowSpec) -> dict:
    return {"dt_window": float(w.dt_window), "g": density_to_dict(w.g)}


def window_from_dict(d: dict) -> WindowSpec:
    width = float(d["dt_window"])
    return WindowSpec(width, density_from_dict(d["g"], width))


def schedule_to_dict(s: Schedule) -> dict:
    return {"tA": float(s.t_a), "tB": float(s.t_b), "x": int(s.x)}


def schedule_from_dict(d: dict) -> Schedule:
    return Schedule(float(d["tA"]), float(d["tB"]), int(d["x"]))
