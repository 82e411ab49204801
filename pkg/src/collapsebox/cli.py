"""Command-line surface: scenario ingestion, dispatch, sweeps, CSV emission.

Exit codes: 0 pass, 1 operational failure (I/O, parse, precondition),
2 validation/detection semantics (a check ran and failed).
"""

from __future__ import annotations

import argparse
import hashlib
import itertools
import json
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__
from .behaviors import Distribution, make_distribution
from .collapse import (
    CollapseFamily,
    FamilySpec,
    family_spec_from_dict,
    make_family,
    validate_family,
)
from .errors import CollapseBoxError, EmptyGrid, FormulaInconsistency
from .mc import SimConfig, default_workers, empirical_rows, gof_test, simulate_twobox, simulate_window
from .scenarios import (
    Schedule,
    TwoBoxScenario,
    WindowSpec,
    omega,
    schedule_from_dict,
    theta,
    window_from_dict,
    window_marginal,
)
from .signaling import channel_capacity, induced_channel, witness_sweep


@dataclass(frozen=True)
class RunManifest:
    command: str
    scenario_path: str
    out_dir: str
    seed: int = 0
    n: int = 100_000
    alpha: float = 0.01
    grid: str | None = None
    workers: int = 1


@dataclass(frozen=True)
class ScenarioBundle:
    p0: Distribution
    family_spec: FamilySpec
    family: CollapseFamily
    window: WindowSpec | None
    schedule: Schedule | None
    raw: dict

    @property
    def scenario(self) -> TwoBoxScenario:
        return TwoBoxScenario(self.p0, self.family)


def load_scenario(path: str, validate: bool = True) -> ScenarioBundle:
    with open(path) as fh:
        raw = json.load(fh)
    p0 = make_distribution(raw["p0"])
    spec = family_spec_from_dict(raw["family"], p0=p0)
    family = make_family(spec, validate=validate)
    window = window_from_dict(raw["window"]) if "window" in raw else None
    schedule = schedule_from_dict(raw["schedule"]) if "schedule" in raw else None
    return ScenarioBundle(p0, spec, family, window, schedule, raw)


def scenario_hash(raw: dict) -> str:
    canon = json.dumps(raw, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:12]


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)


def write_csv(path: str, header_meta: dict, columns, rows) -> None:
    meta = " ".join(f"{k}={v}" for k, v in header_meta.items())
    with open(path, "w", newline="") as fh:
        fh.write(f"# {meta}\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _meta(manifest: RunManifest, bundle: ScenarioBundle) -> dict:
    return {
        "scenario": scenario_hash(bundle.raw),
        "seed": manifest.seed,
        "version": __version__,
    }


def parse_time_grid(spec: str | None, family: CollapseFamily):
    """Time grids: 'a:b:n' linspace or a comma-separated list."""
    if spec is None:
        top = family.dt_max if family.dt_max > 0 else 1.0
        return np.linspace(0.0, top, 21)
    spec = spec.strip()
    if not spec:
        raise EmptyGrid("empty time grid")
    if ":" in spec:
        a, b, n = spec.split(":")
        return np.linspace(float(a), float(b), int(n))
    return np.array([float(v) for v in spec.split(",")])


def parse_sweep_grid(spec: str | None) -> dict:
    """Sweep grids: 'param=v1,v2;param2=...'; params: dt, dt_window, n."""
    if not spec:
        raise EmptyGrid("sweep needs a --grid specification")
    grid = {}
    for part in spec.split(";"):
        key, _, vals = part.partition("=")
        key = key.strip()
        if key not in ("dt", "dt_window", "n"):
            raise CollapseBoxError(f"unknown sweep parameter {key!r}")
        conv = int if key == "n" else float
        grid[key] = [conv(v) for v in vals.split(",")]
    return grid


def cmd_validate(manifest: RunManifest) -> int:
    bundle = load_scenario(manifest.scenario_path, validate=False)
    fam = bundle.family
    grid = np.linspace(0.0, max(fam.dt_max, 1.0), 1000)
    report = validate_family(fam, grid)
    print(f"scenario {scenario_hash(bundle.raw)}: family kind {fam.kind!r}, "
          f"dt_min={fam.dt_min:.6g} dt_max={fam.dt_max:.6g}")
    for clause, v in report.worst.items():
        status = "ok" if v <= report.tol else "VIOLATED"
        print(f"  clause {clause:<14} worst {v:.3e}  {status}")
    if not report.passed:
        print(f"validation FAILED: clause {report.worst_clause()!r}")
        return 2
    print("validation passed")
    return 0


def cmd_witness(manifest: RunManifest) -> int:
    bundle = load_scenario(manifest.scenario_path)
    s = bundle.scenario
    grid = parse_time_grid(manifest.grid, bundle.family)
    if grid.size == 0:
        raise EmptyGrid("witness grid is empty")
    cfg = SimConfig(manifest.n, manifest.seed, manifest.workers)
    reports = witness_sweep(s, grid, cfg, alpha=manifest.alpha)

    os.makedirs(manifest.out_dir, exist_ok=True)
    out = os.path.join(manifest.out_dir, "witness.csv")
    cols = ("elapsed", "tv_analytic", "tv_empirical", "ci_lo", "ci_hi",
            "pvalue", "verdict")
    write_csv(out, _meta(manifest, bundle), cols,
              [(r.elapsed, r.tv_analytic, r.tv_empirical, r.ci_lo, r.ci_hi,
                r.pvalue, r.verdict) for r in reports])

    best = max(reports, key=lambda r: r.tv_analytic)
    cap = channel_capacity(induced_channel(s, best.elapsed), tol=1e-9)
    verdict = "signaling" if any(r.signaling for r in reports) else "non-signaling"
    print(f"max TV {best.tv_analytic:.3e} at s={best.elapsed:.6g}, "
          f"capacity {cap:.6f} bits, verdict: {verdict}")
    print(f"wrote {out}")
    return 0


def cmd_simulate(manifest: RunManifest) -> int:
    bundle = load_scenario(manifest.scenario_path)
    s = bundle.scenario
    cfg = SimConfig(manifest.n, manifest.seed, manifest.workers)

    if bundle.schedule is not None:
        emp = simulate_twobox(s, bundle.schedule, cfg)
        if bundle.schedule.x == 0:
            ref = s.p0
        else:
            from .scenarios import bob_marginal
            ref = bob_marginal(s, 1, bundle.schedule.t_b - bundle.schedule.t_a)
        targets = [("analytic", ref)]
    elif bundle.window is not None:
        emp = simulate_window(s, bundle.window, cfg)
        targets = [("prior", s.p0)]
        try:
            targets.append(("analytic", window_marginal(s, bundle.window)))
        except FormulaInconsistency as exc:
            print(f"analytic window formula inconsistent, skipped: {exc}")
    else:
        print("scenario has neither a schedule nor a window; nothing to simulate",
              file=sys.stderr)
        return 1

    os.makedirs(manifest.out_dir, exist_ok=True)
    out = os.path.join(manifest.out_dir, "empirical.csv")
    sid = scenario_hash(bundle.raw)
    cols = ("scenario_id", "seed", "n", "outcome", "count", "freq",
            "ci_lo", "ci_hi")
    write_csv(out, _meta(manifest, bundle), cols,
              [(sid, manifest.seed, manifest.n) + row
               for row in empirical_rows(emp)])
    for name, ref in targets:
        gof = gof_test(emp, ref, alpha=manifest.alpha)
        tag = "reject" if gof.reject else "pass"
        stat = "" if gof.statistic is None else f" stat={gof.statistic:.4g}"
        print(f"gof vs {name}: p={gof.pvalue:.4g}{stat} [{gof.method}] -> {tag}")
    print(f"wrote {out}")
    return 0


def _cell_bundle(bundle: ScenarioBundle, dt=None, dt_window=None) -> ScenarioBundle:
    spec = bundle.family_spec
    family = bundle.family
    raw = dict(bundle.raw)
    if dt is not None:
        if spec.kind not in ("linear", "frozen", "instantaneous"):
            raise CollapseBoxError(
                f"dt sweep is not supported for kind {spec.kind!r}")
        kind = spec.kind if spec.kind != "instantaneous" else "linear"
        n = bundle.p0.size
        spec = FamilySpec(kind=kind, p0=bundle.p0, dt=(float(dt),) * n)
        family = make_family(spec)
        raw["family"] = {"kind": kind, "dt": [float(dt)] * n}
    window = bundle.window
    if dt_window is not None:
        if window is None:
            raise CollapseBoxError("dt_window sweep needs a window in the scenario")
        if window.g.kind == "table":
            raise CollapseBoxError("dt_window sweep is not supported for table densities")
        from .scenarios import TimeDensity
        g = TimeDensity(window.g.kind, float(dt_window), rate=window.g.rate)
        window = WindowSpec(float(dt_window), g)
        rw = dict(raw.get("window", {}))
        rw["dt_window"] = float(dt_window)
        raw["window"] = rw
    return ScenarioBundle(bundle.p0, spec, family, window, bundle.schedule, raw)


def cmd_sweep(manifest: RunManifest) -> int:
    bundle = load_scenario(manifest.scenario_path)
    grid = parse_sweep_grid(manifest.grid)
    keys = list(grid)
    cells = list(itertools.product(*(grid[k] for k in keys)))

    os.makedirs(manifest.out_dir, exist_ok=True)
    out = os.path.join(manifest.out_dir, "sweep.csv")
    partial = os.path.join(manifest.out_dir, "MANIFEST.partial")
    cols = tuple(keys) + ("theta", "omega", "max_tv", "elapsed_at_max",
                          "capacity", "verdict")
    meta = " ".join(f"{k}={v}" for k, v in _meta(manifest, bundle).items())

    with open(out, "w", newline="") as fh:
        fh.write(f"# {meta}\n")
        fh.write(",".join(cols) + "\n")
        for cell in cells:
            params = dict(zip(keys, cell))
            try:
                cb = _cell_bundle(bundle,
                                  dt=params.get("dt"),
                                  dt_window=params.get("dt_window"))
                n = int(params.get("n", manifest.n))
                cfg = SimConfig(n, manifest.seed, manifest.workers)
                s = cb.scenario
                tgrid = parse_time_grid(None, cb.family)
                reports = witness_sweep(s, tgrid, cfg, alpha=manifest.alpha)
                best = max(reports, key=lambda r: r.tv_analytic)
                cap = channel_capacity(induced_channel(s, best.elapsed))
                verdict = ("signaling" if any(r.signaling for r in reports)
                           else "non-signaling")
                th = om = None
                if cb.window is not None:
                    th = theta(cb.window, cb.family.dt_min)
                    om = omega(cb.window, cb.family.dt_min)
                row = tuple(params[k] for k in keys) + (
                    th, om, best.tv_analytic, best.elapsed, cap, verdict)
                fh.write(",".join(_fmt(v) for v in row) + "\n")
                fh.flush()
            except CollapseBoxError as exc:
                with open(partial, "w") as pf:
                    pf.write(f"failed at cell {params}: {exc}\n")
                print(f"sweep failed at cell {params}: {exc}", file=sys.stderr)
                return 1
    print(f"wrote {out}")
    return 0


COMMANDS = {
    "validate": cmd_validate,
    "witness": cmd_witness,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="collapse-box",
        description="Finite-time collapse model: validation, witnesses, "
                    "simulation, and sweeps")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--scenario", required=True, help="scenario JSON file")
    p.add_argument("--out", default=".", help="output directory for CSVs")
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--n", type=int, default=100_000, help="replica count")
    p.add_argument("--alpha", type=float, default=0.01,
                   help="significance level for detection")
    p.add_argument("--grid", default=None,
                   help="time grid 'a:b:n' or list for witness; "
                        "'param=v1,v2;...' for sweep (dt, dt_window, n)")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    manifest = RunManifest(
        command=args.command,
        scenario_path=args.scenario,
        out_dir=args.out,
        seed=args.seed,
        n=args.n,
        alpha=args.alpha,
        grid=args.grid,
        workers=default_workers(),
    )
    try:
        return COMMANDS[args.command](manifest)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except CollapseBoxError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
