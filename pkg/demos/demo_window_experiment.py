"""Timing-window experiment: random query times on both boxes.

Both parties draw their query times independently from a density g on a
window of width dt_window. The chance that the two queries land within
the shortest collapse duration of each other is Theta; Omega is the
one-sided version weighting the ordered time difference. The observable
window-averaged marginal mixes the prior (when collapse finished in
time) with a mid-collapse term. This script evaluates Theta, Omega, and
the window marginal analytically and checks them against a seeded
simulation of the full experiment.

Run:  python3 demos/demo_window_experiment.py
"""

import numpy as np

from collapsebox import (
    FamilySpec,
    SimConfig,
    TimeDensity,
    TwoBoxScenario,
    WindowSpec,
    make_distribution,
    make_family,
    omega,
    simulate_window,
    theta,
    window_marginal,
)

P0 = make_distribution([0.3, 0.7])


def main():
    fam = make_family(FamilySpec("linear", P0, dt=(0.25, 1.0)))
    scen = TwoBoxScenario(P0, fam)

    print(f"prior P0 = {P0.weights}, shortest collapse duration "
          f"dt_min = {fam.dt_min}")
    print()
    print("window      density    Theta     Omega     window marginal")
    windows = [
        ("width 1.0", WindowSpec(1.0, TimeDensity("uniform", 1.0))),
        ("width 2.0", WindowSpec(2.0, TimeDensity("uniform", 2.0))),
        ("width 1.0", WindowSpec(1.0, TimeDensity("truncexp", 1.0, rate=2.0))),
    ]
    for label, w in windows:
        th = theta(w, fam.dt_min)
        om = omega(w, fam.dt_min)
        m = window_marginal(scen, w)
        print(f"{label}   {w.g.kind:8}  {th:8.5f}  {om:8.5f}  {m.weights}")

    print()
    print("Monte Carlo check (uniform window, width 1.0, n = 400000):")
    w = windows[0][1]
    emp = simulate_window(scen, w, SimConfig(n=400_000, seed=7))
    ana = window_marginal(scen, w)
    lo, hi = emp.wilson_interval()
    print(f"  analytic marginal : {ana.weights}")
    print(f"  empirical freqs   : {emp.freqs}")
    for k in range(2):
        print(f"  outcome {k}: 95% CI [{lo[k]:.5f}, {hi[k]:.5f}]")
    gap = float(np.abs(emp.freqs - ana.weights).max())
    prior_gap = float(np.abs(emp.freqs - P0.weights).max())
    print(f"  |empirical - analytic| = {gap:.4f}  "
          f"(vs |empirical - prior| = {prior_gap:.4f})")

    print()
    print("The two-term window formula mixes the prior with a single averaged")
    print("mid-collapse term, so it tracks the simulated marginal only")
    print("approximately -- but both agree on the direction and rough size of")
    print("the drift away from the prior, and both reduce exactly to the")
    print("prior when collapse is instantaneous.")


if __name__ == "__main__":
    main()
