"""Seeded Monte Carlo engine for the collapse model.

Randomness is counter-based: replica i consumes exactly one Philox
counter block (four uniform doubles), keyed by the master seed and
located by advancing the counter to block i. Results are therefore a
pure function of (scenario, N, seed), independent of how replicas are
partitioned across workers.

Operational semantics of a triggered collapse: draw the latent outcome
from the prior, then draw the observed output from the latent outcome's
collapse-family row at the probe's elapsed time.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .behaviors import Distribution
from .collapse import CollapseFamily
from .errors import AlphabetMismatch, InvalidSpec
from .scenarios import Schedule, TwoBoxScenario, WindowSpec

_WILSON_Z = 1.959963984540054  # 95% two-sided

# cells beyond this many exact-test terms fall back to the chi-square path
_EXACT_ENUMERATION_LIMIT = 200_000


@dataclass(frozen=True)
class SimConfig:
    n: int
    seed: int
    workers: int = 1

    def __post_init__(self):
        if self.n < 1:
            raise InvalidSpec("replica count must be >= 1")
        if self.workers < 1:
            raise InvalidSpec("worker count must be >= 1")


@dataclass(frozen=True)
class EmpiricalDist:
    counts: np.ndarray
    n: int

    @property
    def freqs(self) -> np.ndarray:
        return self.counts / self.n

    def wilson_interval(self):
        """Per-cell 95% Wilson intervals; returns (lo, hi) arrays."""
        p = self.freqs
        n = self.n
        z2 = _WILSON_Z**2
        denom = 1.0 + z2 / n
        center = (p + z2 / (2 * n)) / denom
        half = _WILSON_Z * np.sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / denom
        return center - half, center + half

    def wilson_halfwidth(self) -> np.ndarray:
        lo, hi = self.wilson_interval()
        return 0.5 * (hi - lo)


def replica_uniforms(seed: int, lo: int, hi: int) -> np.ndarray:
    """Uniform doubles for replicas [lo, hi), shape (hi-lo, 4).

    One Philox counter block per replica; partition-invariant by
    construction.
    """
    bg = np.random.Philox(key=seed).advance(lo)
    return np.random.Generator(bg).random((hi - lo, 4))


def _blocks(n: int, workers: int):
    edges = np.linspace(0, n, workers + 1).astype(int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def _run_blocked(cfg: SimConfig, block_fn, n_out: int) -> EmpiricalDist:
    workers = cfg.workers
    blocks = _blocks(cfg.n, workers)
    if workers == 1 or len(blocks) == 1:
        parts = [block_fn(lo, hi) for lo, hi in blocks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda be: block_fn(*be), blocks))
    counts = np.sum(parts, axis=0).astype(np.int64)
    return EmpiricalDist(counts, cfg.n)


def _sample_discrete(cum: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Inverse-transform draws given cumulative weights (1D) and uniforms."""
    idx = np.searchsorted(cum, u, side="right")
    return np.minimum(idx, cum.size - 1)


def _sample_rows(rows: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Per-replica draw from per-replica probability rows."""
    cum = np.cumsum(rows, axis=1)
    idx = (u[:, None] > cum).sum(axis=1)
    return np.minimum(idx, rows.shape[1] - 1)


def default_workers() -> int:
    env = os.environ.get("COLLAPSE_BOX_THREADS")
    if env:
        return max(1, int(env))
    return 1


def simulate_single(f: CollapseFamily, p0: Distribution, probe_elapsed: float,
                    cfg: SimConfig) -> EmpiricalDist:
    """Single box: trigger at 0, probe at `probe_elapsed`."""
    if probe_elapsed < 0:
        raise InvalidSpec("probe time must be >= 0")
    n = p0.size
    cum_p0 = np.cumsum(p0.weights)
    rows_cum = np.cumsum(f.profile(float(probe_elapsed)), axis=1)

    def block(lo, hi):
        u = replica_uniforms(cfg.seed, lo, hi)
        latent = _sample_discrete(cum_p0, u[:, 0])
        c = rows_cum[latent]
        out = np.minimum((u[:, 1, None] > c).sum(axis=1), n - 1)
        return np.bincount(out, minlength=n)

    return _run_blocked(cfg, block, n)


def simulate_twobox(s: TwoBoxScenario, sched: Schedule,
                    cfg: SimConfig) -> EmpiricalDist:
    """Fixed-schedule correlated pair; aggregates Bob's outputs."""
    n = s.p0.size
    cum_p0 = np.cumsum(s.p0.weights)
    if sched.x == 1:
        elapsed = sched.t_b - sched.t_a
        rows_cum = np.cumsum(s.family.profile(float(elapsed)), axis=1)

        def block(lo, hi):
            u = replica_uniforms(cfg.seed, lo, hi)
            latent = _sample_discrete(cum_p0, u[:, 0])
            c = rows_cum[latent]
            out = np.minimum((u[:, 1, None] > c).sum(axis=1), n - 1)
            return np.bincount(out, minlength=n)
    else:
        # Alice's input is non-triggering; Bob's own probe triggers the
        # collapse and his output is the fresh latent.
        def block(lo, hi):
            u = replica_uniforms(cfg.seed, lo, hi)
            out = _sample_discrete(cum_p0, u[:, 0])
            return np.bincount(out, minlength=n)

    return _run_blocked(cfg, block, n)


def simulate_window(s: TwoBoxScenario, w: WindowSpec,
                    cfg: SimConfig) -> EmpiricalDist:
    """Randomized-window experiment with Alice choosing the triggering input.

    Both input times are drawn independently from the window density. The
    earlier input triggers the collapse and fixes the shared latent
    outcome; the later party's output is drawn from the collapse family at
    the elapsed difference. If Bob acts first he triggers, and his output
    is the latent itself.
    """
    n = s.p0.size
    cum_p0 = np.cumsum(s.p0.weights)

    def block(lo, hi):
        u = replica_uniforms(cfg.seed, lo, hi)
        t_a = w.g.sample(u[:, 0])
        t_b = w.g.sample(u[:, 1])
        latent = _sample_discrete(cum_p0, u[:, 2])
        out = latent.copy()  # Bob-first replicas emit the latent
        alice_first = t_b >= t_a
        if alice_first.any():
            rows = s.family.rows(latent[alice_first],
                                 t_b[alice_first] - t_a[alice_first])
            out[alice_first] = _sample_rows(rows, u[alice_first, 3])
        return np.bincount(out, minlength=n)

    return _run_blocked(cfg, block, n)


@dataclass(frozen=True)
class GofReport:
    statistic: float | None
    pvalue: float
    reject: bool
    method: str  # "chi2" or "exact"


def gof_test(e: EmpiricalDist, p: Distribution, alpha: float = 0.01) -> GofReport:
    """Goodness of fit of empirical counts against a reference distribution.

    Pearson chi-square when all expected counts are >= 5; otherwise an
    exact multinomial test (sum of outcome probabilities no larger than
    the observed one), falling back to chi-square if enumeration would be
    too large.
    """
    if e.counts.size != p.size:
        raise AlphabetMismatch(
            f"alphabet sizes differ: {e.counts.size} vs {p.size}")
    expected = e.n * p.weights
    if np.all(expected >= 5):
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(expected > 0,
                             (e.counts - expected) ** 2 / expected, 0.0)
        # cells with zero expectation but observed counts are an automatic reject
        if np.any((expected == 0) & (e.counts > 0)):
            return GofReport(math.inf, 0.0, True, "chi2")
        stat = float(terms.sum())
        pval = float(stats.chi2.sf(stat, df=p.size - 1))
        return GofReport(stat, pval, pval < alpha, "chi2")
    return _exact_multinomial(e, p, alpha)


def _exact_multinomial(e: EmpiricalDist, p: Distribution, alpha: float) -> GofReport:
    n, k = e.n, p.size
    n_terms = math.comb(n + k - 1, k - 1)
    if n_terms > _EXACT_ENUMERATION_LIMIT:
        stat = float((((e.counts - e.n * p.weights) ** 2)
                      / np.maximum(e.n * p.weights, 1e-300)).sum())
        pval = float(stats.chi2.sf(stat, df=k - 1))
        return GofReport(stat, pval, pval < alpha, "chi2")
    obs_p = float(stats.multinomial.pmf(e.counts, n, p.weights))
    pval = 0.0
    for c in _compositions(n, k):
        q = float(stats.multinomial.pmf(c, n, p.weights))
        if q <= obs_p + 1e-15:
            pval += q
    pval = min(pval, 1.0)
    return GofReport(None, pval, pval < alpha, "exact")


def _compositions(n, k):
    if k == 1:
        yield (n,)
        return
    for head in range(n + 1):
        for tail in _compositions(n - head, k - 1):
            yield (head,) + tail


def empirical_rows(e: EmpiricalDist):
    """CSV-ready rows: (outcome, count, freq, ci_lo, ci_hi)."""
    lo, hi = e.wilson_interval()
    f = e.freqs
    return [(i, int(e.counts[i]), float(f[i]), float(lo[i]), float(hi[i]))
            for i in range(e.counts.size)]
