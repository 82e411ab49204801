"""Finite probability distributions and bipartite box behaviors.

Provides validated probability vectors, conditional behavior tables
P(a,b|x,y), non-signaling checks, membership in the local deterministic
polytope, and the CHSH value.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .errors import (
    AlphabetMismatch,
    EmptyAlphabet,
    NegativeWeight,
    NotNormalized,
    ScenarioTooLarge,
    WrongScenarioShape,
)

STRATEGY_ENUMERATION_LIMIT = 10**7


@dataclass(frozen=True)
class Distribution:
    """Probability vector over a finite outcome alphabet."""

    weights: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=float))
        self.weights.setflags(write=False)

    @property
    def size(self) -> int:
        return self.weights.shape[0]

    def __getitem__(self, i):
        return self.weights[i]

    def __len__(self):
        return self.size


def make_distribution(weights, atol: float = 1e-9) -> Distribution:
    """Build a validated Distribution. No silent renormalization."""
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or w.size == 0:
        raise EmptyAlphabet("distribution needs at least one outcome")
    if np.any(w < 0):
        raise NegativeWeight(f"negative weight in {w.tolist()}")
    s = float(w.sum())
    if abs(s - 1.0) > atol:
        raise NotNormalized(f"weights sum to {s!r}, not 1 within {atol}")
    return Distribution(w)


def tv_distance(p: Distribution, q: Distribution) -> float:
    """Total variation distance (1/2) sum_i |p_i - q_i|."""
    if p.size != q.size:
        raise AlphabetMismatch(f"alphabet sizes differ: {p.size} vs {q.size}")
    return 0.5 * float(np.abs(p.weights - q.weights).sum())


@dataclass(frozen=True)
class BoxBehavior:
    """Conditional table P(a,b|x,y), stored with axes (x, y, a, b)."""

    table: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.table, dtype=float)
        if t.ndim != 4:
            raise WrongScenarioShape(f"expected 4 axes (x,y,a,b), got {t.ndim}")
        if np.any(t < -1e-15):
            raise NegativeWeight("negative entry in behavior table")
        sums = t.sum(axis=(2, 3))
        if np.any(np.abs(sums - 1.0) > 1e-9):
            raise NotNormalized(
                f"per-(x,y) sums deviate from 1 by up to {np.abs(sums - 1).max():.3e}"
            )
        object.__setattr__(self, "table", t)
        t.setflags(write=False)

    @property
    def shape(self):
        """(n_x, n_y, n_a, n_b)"""
        return self.table.shape


@dataclass(frozen=True)
class NonsignalingReport:
    passed: bool
    max_violation: float
    violating_marginal: tuple | None  # (party, output, own_input, input_pair)


@dataclass(frozen=True)
class LocalityReport:
    member: bool
    weights: np.ndarray | None  # convex weights over deterministic vertices
    residual: float
    facet: tuple | None = None  # (coeffs over table entries, bound, violation)
    vertices: np.ndarray = field(default=None, repr=False)


def is_nonsignaling(b: BoxBehavior, tol: float = 1e-9) -> NonsignalingReport:
    """Check that each party's marginal is independent of the remote input."""
    t = b.table
    nx, ny, na, nb = t.shape
    worst = 0.0
    where = None
    # Alice marginal P(a|x, y) must not depend on y
    pa = t.sum(axis=3)  # (x, y, a)
    for x in range(nx):
        for a in range(na):
            v = float(pa[x, :, a].max() - pa[x, :, a].min())
            if v > worst:
                worst, where = v, ("alice", a, x, tuple(range(ny)))
    # Bob marginal P(b|y, x) must not depend on x
    pb = t.sum(axis=2)  # (x, y, b)
    for y in range(ny):
        for bb in range(nb):
            v = float(pb[:, y, bb].max() - pb[:, y, bb].min())
            if v > worst:
                worst, where = v, ("bob", bb, y, tuple(range(nx)))
    return NonsignalingReport(worst <= tol, worst, None if worst <= tol else where)


def local_deterministic_vertices(nx, ny, na, nb) -> np.ndarray:
    """All deterministic local strategies, as flattened behavior tables.

    Returns an array of shape (n_vertices, nx*ny*na*nb); vertex order is
    (alice strategy) major, (bob strategy) minor, with strategies in
    lexicographic order of their output assignments.
    """
    n_vertices = na**nx * nb**ny
    if n_vertices > STRATEGY_ENUMERATION_LIMIT:
        raise ScenarioTooLarge(
            f"{n_vertices} deterministic strategies exceed enumeration guard"
        )
    verts = np.zeros((n_vertices, nx, ny, na, nb))
    i = 0
    for fa in itertools.product(range(na), repeat=nx):
        for gb in itertools.product(range(nb), repeat=ny):
            for x in range(nx):
                for y in range(ny):
                    verts[i, x, y, fa[x], gb[y]] = 1.0
            i += 1
    return verts.reshape(n_vertices, -1)


def is_local(b: BoxBehavior, tol: float = 1e-9) -> LocalityReport:
    """Decide membership in the local deterministic polytope.

    Solves min-infinity-norm linear feasibility over the enumerated
    deterministic vertices; on membership returns convex weights, on
    non-membership a separating Bell-type inequality.
    """
    nx, ny, na, nb = b.shape
    verts = local_deterministic_vertices(nx, ny, na, nb)
    p = b.table.reshape(-1)
    nv, d = verts.shape

    # variables: w (nv), t (1); minimize t s.t. |V^T w - p| <= t, sum w = 1
    c = np.zeros(nv + 1)
    c[-1] = 1.0
    vt = verts.T  # (d, nv)
    a_ub = np.block([[vt, -np.ones((d, 1))], [-vt, -np.ones((d, 1))]])
    b_ub = np.concatenate([p, -p])
    a_eq = np.zeros((1, nv + 1))
    a_eq[0, :nv] = 1.0
    bounds = [(0, None)] * nv + [(0, None)]
    res = linprog(c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=[1.0], bounds=bounds,
                  method="highs")
    if not res.success:
        raise RuntimeError(f"feasibility LP failed: {res.message}")
    residual = float(res.x[-1])
    if residual <= tol:
        w = np.clip(res.x[:nv], 0.0, None)
        return LocalityReport(True, w, residual, None, verts)

    # separating functional: max h.p - c0 s.t. h.v - c0 <= 0, |h| <= 1
    c_obj = np.concatenate([-p, [1.0]])
    a_sep = np.hstack([verts, -np.ones((nv, 1))])
    bounds_sep = [(-1.0, 1.0)] * d + [(None, None)]
    res2 = linprog(c_obj, A_ub=a_sep, b_ub=np.zeros(nv), bounds=bounds_sep,
                   method="highs")
    if not res2.success:
        raise RuntimeError(f"separation LP failed: {res2.message}")
    h = res2.x[:d]
    c0 = float(res2.x[-1])
    violation = float(h @ p - c0)
    return LocalityReport(False, None, residual,
                          (h.reshape(nx, ny, na, nb), c0, violation), verts)


def chsh_value(b: BoxBehavior) -> float:
    """CHSH expression E(0,0)+E(0,1)+E(1,0)-E(1,1) for a 2x2x2x2 behavior."""
    if b.shape != (2, 2, 2, 2):
        raise WrongScenarioShape(f"CHSH needs a 2-input/2-output box, got {b.shape}")
    sign = np.array([[1.0, -1.0], [-1.0, 1.0]])  # (-1)^(a xor b)
    e = np.einsum("xyab,ab->xy", b.table, sign)
    return float(e[0, 0] + e[0, 1] + e[1, 0] - e[1, 1])


# --- convenience constructors used throughout tests and demos ---

def pr_box() -> BoxBehavior:
    """The extremal non-signaling box: P = 1/2 iff a xor b = x*y."""
    t = np.zeros((2, 2, 2, 2))
    for x, y, a, bb in itertools.product(range(2), repeat=4):
        if (a ^ bb) == (x * y):
            t[x, y, a, bb] = 0.5
    return BoxBehavior(t)


def uniform_box(nx=2, ny=2, na=2, nb=2) -> BoxBehavior:
    t = np.full((nx, ny, na, nb), 1.0 / (na * nb))
    return BoxBehavior(t)


def deterministic_box(fa, gb, na=2, nb=2) -> BoxBehavior:
    """Local deterministic box a = fa[x], b = gb[y]."""
    nx, ny = len(fa), len(gb)
    t = np.zeros((nx, ny, na, nb))
    for x in range(nx):
        for y in range(ny):
            t[x, y, fa[x], gb[y]] = 1.0
    return BoxBehavior(t)


def product_box(p: Distribution, q: Distribution, nx=2, ny=2) -> BoxBehavior:
    """Input-independent product behavior P(a,b|x,y) = p(a) q(b)."""
    t = np.tile(np.outer(p.weights, q.weights), (nx, ny, 1, 1))
    return BoxBehavior(t)


# --- serialization (external interface) ---

def box_to_dict(b: BoxBehavior) -> dict:
    nx, ny, na, nb = b.shape
    return {
        "alphabets": {"a": na, "b": nb, "x": nx, "y": ny},
        "table": b.table.tolist(),
    }


def box_from_dict(d: dict) -> BoxBehavior:
    t = np.asarray(d["table"], dtype=float)
    al = d.get("alphabets")
    if al is not None:
        expected = (al["x"], al["y"], al["a"], al["b"])
        if t.shape != expected:
            raise WrongScenarioShape(
                f"table shape {t.shape} disagrees with alphabets {expected}"
            )
    return BoxBehavior(t)
