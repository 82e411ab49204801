"""Collapse families f_{aa'}(s) and the single-box marginal evolution.

A family describes, for each latent outcome a, the probability f_{aa'}(s)
that probing the box at elapsed time s (measured from the triggering
input) yields output a'. Boundary conditions:

  1. f_{aa'}(0) = P0(a')           (initial statistics)
  2. f_{aa'}(s) = delta_{a,a'} for s >= dt_a, s > 0   (collapsed)
  3. sum_{a'} f_{aa'}(s) = 1       (normalization)

At s = 0 condition 1 takes precedence over condition 2 when dt_a = 0
(an instantaneous family is P0 at the trigger instant and a Kronecker
delta immediately after).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .behaviors import Distribution, make_distribution, tv_distance
from .errors import (
    BoundaryViolation,
    EmptyGrid,
    InvalidSpec,
    PriorMismatch,
    TimeBeforeTrigger,
    TimeOutsideWindow,
)

KINDS = ("instantaneous", "linear", "exponential", "frozen", "table")

# exponential families are clipped to an exact delta once the interpolation
# weight reaches 1 - EXP_CUTOFF; this defines their finite dt_a
EXP_CUTOFF = 1e-9


@dataclass(frozen=True)
class FamilySpec:
    """Declarative description of a collapse family.

    kind "frozen" holds the prior until dt_a, then jumps to the delta;
    "table" interpolates user-supplied grids linearly.
    """

    kind: str
    p0: Distribution
    dt: tuple | None = None          # linear / frozen
    rates: tuple | None = None       # exponential
    grid_times: tuple | None = None  # table
    grid_values: tuple | None = None  # table, shape (nt, n, n) nested lists


@dataclass(frozen=True)
class CollapseFamily:
    """Evaluated collapse family bound to a prior P0."""

    kind: str
    p0: Distribution
    dt: np.ndarray                      # per-outcome collapse durations
    rates: np.ndarray | None = None
    grid_times: np.ndarray | None = None
    grid_values: np.ndarray | None = None
    _eye: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "dt", np.asarray(self.dt, dtype=float))
        object.__setattr__(self, "_eye", np.eye(self.size))

    @property
    def size(self) -> int:
        return self.p0.size

    @property
    def dt_min(self) -> float:
        return float(self.dt.min())

    @property
    def dt_max(self) -> float:
        return float(self.dt.max())

    def profile(self, s: float) -> np.ndarray:
        """The matrix f[a, a'] at elapsed time s >= 0."""
        if s < 0:
            raise TimeBeforeTrigger(f"elapsed time {s} < 0")
        n = self.size
        latent = np.arange(n)
        return self.rows(latent, np.full(n, float(s)))

    def rows(self, latent: np.ndarray, s: np.ndarray) -> np.ndarray:
        """Vectorized f_{latent[i], .}(s[i]); returns shape (len(latent), n)."""
        latent = np.asarray(latent, dtype=int)
        s = np.asarray(s, dtype=float)
        n = self.size
        p0 = self.p0.weights
        delta = self._eye[latent]
        dt_l = self.dt[latent]

        if self.kind == "instantaneous":
            w = (s > 0).astype(float)
        elif self.kind == "frozen":
            w = ((s > 0) & (s >= dt_l)).astype(float)
        elif self.kind == "linear":
            with np.errstate(divide="ignore", invalid="ignore"):
                w = np.where(dt_l > 0, np.clip(s / np.where(dt_l > 0, dt_l, 1.0), 0, 1),
                             (s > 0).astype(float))
        elif self.kind == "exponential":
            lam = self.rates[latent]
            w = 1.0 - np.exp(-lam * s)
            w = np.where(s >= dt_l, 1.0, w)  # exact delta beyond the cutoff
            w = np.where(s <= 0, 0.0, w)
        elif self.kind == "table":
            out = np.empty((latent.shape[0], n))
            for a in range(n):
                mask = latent == a
                if not mask.any():
                    continue
                sa = s[mask]
                for ap in range(n):
                    out[mask, ap] = np.interp(sa, self.grid_times,
                                              self.grid_values[:, a, ap])
            return out
        else:  # pragma: no cover - constructor guards kinds
            raise InvalidSpec(f"unknown kind {self.kind!r}")

        return (1.0 - w)[:, None] * p0[None, :] + w[:, None] * delta


@dataclass(frozen=True)
class ValidationReport:
    passed: bool
    worst: dict  # clause name -> worst absolute violation
    tol: float

    def worst_clause(self) -> str:
        return max(self.worst, key=self.worst.get)


def make_family(spec: FamilySpec, validate: bool = True) -> CollapseFamily:
    """Construct a collapse family from its spec.

    With `validate` (the default) the boundary clauses are checked on a
    dense grid and violations raise; validation tooling passes False so it
    can report the violated clause itself.
    """
    if spec.kind not in KINDS:
        raise InvalidSpec(f"unknown family kind {spec.kind!r}")
    n = spec.p0.size

    if spec.kind == "instantaneous":
        fam = CollapseFamily("instantaneous", spec.p0, np.zeros(n))
    elif spec.kind in ("linear", "frozen"):
        if spec.dt is None or len(spec.dt) != n:
            raise InvalidSpec(f"kind {spec.kind!r} needs one dt per outcome")
        dt = np.asarray(spec.dt, dtype=float)
        if np.any(dt < 0):
            raise InvalidSpec("collapse durations must be non-negative")
        fam = CollapseFamily(spec.kind, spec.p0, dt)
    elif spec.kind == "exponential":
        if spec.rates is None or len(spec.rates) != n:
            raise InvalidSpec("exponential kind needs one rate per outcome")
        rates = np.asarray(spec.rates, dtype=float)
        if np.any(rates <= 0):
            raise InvalidSpec("rates must be positive")
        dt = -np.log(EXP_CUTOFF) / rates
        fam = CollapseFamily("exponential", spec.p0, dt, rates=rates)
    else:  # table
        if spec.grid_times is None or spec.grid_values is None:
            raise InvalidSpec("table kind needs grid_times and grid_values")
        times = np.asarray(spec.grid_times, dtype=float)
        values = np.asarray(spec.grid_values, dtype=float)
        if times.ndim != 1 or times.size < 2 or np.any(np.diff(times) <= 0):
            raise InvalidSpec("grid_times must be strictly increasing, length >= 2")
        if times[0] != 0.0:
            raise InvalidSpec("grid_times must start at 0")
        if values.shape != (times.size, n, n):
            raise InvalidSpec(
                f"grid_values shape {values.shape} != {(times.size, n, n)}"
            )
        dt = _table_collapse_times(times, values, n, strict=validate)
        fam = CollapseFamily("table", spec.p0, dt, grid_times=times,
                             grid_values=values)

    if validate:
        grid = np.linspace(0.0, max(fam.dt_max, 1e-6), 257)
        report = validate_family(fam, grid)
        if not report.passed:
            raise BoundaryViolation(
                f"spec fails boundary clause {report.worst_clause()!r} "
                f"by {max(report.worst.values()):.3e}"
            )
    return fam


def _table_collapse_times(times, values, n, strict=True):
    """Per-outcome dt_a: the earliest grid time from which row a stays a delta."""
    eye = np.eye(n)
    dt = np.empty(n)
    for a in range(n):
        is_delta = np.abs(values[:, a, :] - eye[a]).max(axis=1) <= 1e-12
        # suffix of consecutive delta rows
        k = times.size
        while k > 0 and is_delta[k - 1]:
            k -= 1
        if k == times.size:
            if strict:
                raise BoundaryViolation(
                    f"table row for outcome {a} never reaches its delta"
                )
            k = times.size - 1  # let the validator report the clause
        dt[a] = times[k]
    return dt


def validate_family(f: CollapseFamily, grid) -> ValidationReport:
    """Check all three boundary clauses plus [0,1] range on every grid point."""
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise EmptyGrid("validation grid is empty")
    tol = 1e-9
    n = f.size
    eye = np.eye(n)
    worst = {"initial": 0.0, "final": 0.0, "normalization": 0.0, "range": 0.0}

    m0 = f.profile(0.0)
    worst["initial"] = float(np.abs(m0 - f.p0.weights[None, :]).max())

    for s in grid:
        m = f.profile(float(s))
        worst["normalization"] = max(worst["normalization"],
                                     float(np.abs(m.sum(axis=1) - 1.0).max()))
        worst["range"] = max(worst["range"],
                             float(max(np.clip(-m, 0, None).max(),
                                       np.clip(m - 1, 0, None).max())))
        for a in range(n):
            if s >= f.dt[a] and s > 0:
                worst["final"] = max(worst["final"],
                                     float(np.abs(m[a] - eye[a]).max()))
    passed = all(v <= tol for v in worst.values())
    return ValidationReport(passed, worst, tol)


def marginal_at(f: CollapseFamily, p0: Distribution, elapsed: float) -> Distribution:
    """Evolved single-box marginal P(a') = sum_a f_{aa'}(elapsed) P0(a)."""
    if elapsed < 0:
        raise TimeBeforeTrigger(f"elapsed time {elapsed} < 0")
    if p0.size != f.p0.size or np.abs(p0.weights - f.p0.weights).max() > 1e-12:
        raise PriorMismatch("distribution does not match the family's bound prior")
    m = f.profile(float(elapsed))
    out = p0.weights @ m
    return make_distribution(out, atol=1e-9)


def single_box_witness(f: CollapseFamily, p0: Distribution, elapsed: float) -> float:
    """TV distance between the evolved marginal and the prior.

    Defined on the whole collapse window [0, dt_max]; beyond dt_max the
    marginal has provably returned to the prior.
    """
    if elapsed < 0 or elapsed > f.dt_max:
        raise TimeOutsideWindow(
            f"elapsed {elapsed} outside the collapse window [0, {f.dt_max}]"
        )
    return tv_distance(marginal_at(f, p0, elapsed), p0)


# --- serialization (external interface) ---

def family_spec_to_dict(spec: FamilySpec) -> dict:
    d = {"kind": spec.kind, "p0": list(map(float, spec.p0.weights))}
    if spec.dt is not None:
        d["dt"] = list(map(float, spec.dt))
    if spec.rates is not None:
        d["rates"] = list(map(float, spec.rates))
    if spec.grid_times is not None:
        d["grid"] = {
            "times": list(map(float, spec.grid_times)),
            "values": np.asarray(spec.grid_values, dtype=float).tolist(),
        }
    return d


def family_spec_from_dict(d: dict, p0: Distribution | None = None) -> FamilySpec:
    """Parse a FamilySpec; `p0` supplies the prior when the dict omits it."""
    if "p0" in d:
        prior = make_distribution(d["p0"])
        if p0 is not None and (prior.size != p0.size
                               or np.abs(prior.weights - p0.weights).max() > 1e-12):
            raise InvalidSpec("family p0 disagrees with the scenario prior")
    elif p0 is not None:
        prior = p0
    else:
        raise InvalidSpec("family spec needs a p0")
    grid = d.get("grid") or {}
    return FamilySpec(
        kind=d["kind"],
        p0=prior,
        dt=tuple(d["dt"]) if "dt" in d else None,
        rates=tuple(d["rates"]) if "rates" in d else None,
        grid_times=tuple(grid["times"]) if "times" in grid else None,
        grid_values=grid.get("values"),
    )
