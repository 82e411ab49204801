import numpy as np
import pytest

from collapsebox.behaviors import make_distribution
from collapsebox.collapse import (
    FamilySpec,
    family_spec_from_dict,
    family_spec_to_dict,
    make_family,
    marginal_at,
    single_box_witness,
    validate_family,
)
from collapsebox.errors import (
    BoundaryViolation,
    EmptyGrid,
    InvalidSpec,
    PriorMismatch,
    TimeBeforeTrigger,
    TimeOutsideWindow,
)

P0 = make_distribution([0.3, 0.7])


def asym_family():
    """Outcome 0 collapses instantly, outcome 1 holds the prior until 1 s."""
    return make_family(FamilySpec("frozen", P0, dt=(0.0, 1.0)))


def builtin_families():
    return [
        make_family(FamilySpec("instantaneous", P0)),
        make_family(FamilySpec("linear", P0, dt=(1.0, 1.0))),
        make_family(FamilySpec("linear", P0, dt=(0.25, 1.0))),
        make_family(FamilySpec("exponential", P0, rates=(2.0, 3.0))),
        asym_family(),
        make_family(FamilySpec("frozen", P0, dt=(0.4, 1.0))),
    ]


class TestMakeFamily:
    def test_instantaneous_is_delta_after_trigger(self):
        f = make_family(FamilySpec("instantaneous", P0))
        for eps in (1e-9, 0.5, 10.0):
            m = f.profile(eps)
            assert m[0, 0] == 1.0 and m[0, 1] == 0.0
            assert m[1, 1] == 1.0 and m[1, 0] == 0.0

    def test_linear_initial_condition(self):
        f = make_family(FamilySpec("linear", P0, dt=(1.0, 1.0)))
        m = f.profile(0.0)
        assert np.allclose(m, [[0.3, 0.7], [0.3, 0.7]])

    def test_linear_interpolation_value(self):
        f = make_family(FamilySpec("linear", P0, dt=(1.0, 1.0)))
        assert f.profile(0.5)[0, 0] == pytest.approx(0.65, abs=1e-12)

    def test_invalid_specs(self):
        with pytest.raises(InvalidSpec):
            make_family(FamilySpec("linear", P0, dt=(1.0,)))
        with pytest.raises(InvalidSpec):
            make_family(FamilySpec("exponential", P0, rates=(0.0, 1.0)))
        with pytest.raises(InvalidSpec):
            make_family(FamilySpec("wavelet", P0))

    def test_table_family(self):
        # hold-then-jump expressed as a grid: prior rows, then deltas
        times = [0.0, 0.5, 0.5 + 1e-9, 1.0]
        prior = [[0.3, 0.7], [0.3, 0.7]]
        delta = [[1.0, 0.0], [0.0, 1.0]]
        f = make_family(FamilySpec("table", P0, grid_times=tuple(times),
                                   grid_values=(prior, prior, delta, delta)))
        assert f.dt_max == pytest.approx(0.5 + 1e-9)
        assert np.allclose(f.profile(0.25), prior)
        assert np.allclose(f.profile(0.75), delta)

    def test_table_never_collapsing_rejected(self):
        prior = [[0.3, 0.7], [0.3, 0.7]]
        with pytest.raises(BoundaryViolation):
            make_family(FamilySpec("table", P0, grid_times=(0.0, 1.0),
                                   grid_values=(prior, prior)))


class TestValidateFamily:
    @pytest.mark.parametrize("fam", builtin_families(),
                             ids=lambda f: f"{f.kind}-{f.dt_min:g}-{f.dt_max:g}")
    def test_builtins_pass(self, fam):
        grid = np.linspace(0.0, max(fam.dt_max, 1.0), 500)
        rep = validate_family(fam, grid)
        assert rep.passed, rep.worst

    def test_final_clause_violation_named(self):
        # f_00 stuck at 0.9 at and beyond its collapse time
        times = (0.0, 1.0, 2.0)
        bad_row = [[0.9, 0.1], [0.0, 1.0]]
        fam = make_family(FamilySpec("frozen", P0, dt=(1.0, 1.0)))
        broken = fam.__class__("table", P0, np.array([1.0, 1.0]),
                               grid_times=np.array(times),
                               grid_values=np.array([[[0.3, 0.7], [0.3, 0.7]],
                                                     bad_row, bad_row]))
        rep = validate_family(broken, np.linspace(0, 2, 50))
        assert not rep.passed
        assert rep.worst_clause() == "final"
        assert rep.worst["final"] == pytest.approx(0.1, abs=1e-12)

    def test_empty_grid(self):
        with pytest.raises(EmptyGrid):
            validate_family(asym_family(), [])


class TestMarginalAt:
    def test_prior_at_trigger(self):
        for fam in builtin_families():
            assert np.allclose(marginal_at(fam, P0, 0.0).weights, P0.weights,
                               atol=1e-12)

    def test_equal_dt_linear_preserves_prior(self):
        fam = make_family(FamilySpec("linear", P0, dt=(1.0, 1.0)))
        for s in (0.0, 0.2, 0.5, 0.9, 1.0):
            assert np.allclose(marginal_at(fam, P0, s).weights, P0.weights,
                               atol=1e-12)

    def test_asymmetric_hand_value(self):
        m = marginal_at(asym_family(), P0, 0.5)
        assert np.allclose(m.weights, [0.51, 0.49], atol=1e-14)

    def test_latent_enumeration_oracle(self):
        # independent oracle: explicit sum over latent outcomes
        rng = np.random.default_rng(3)
        for fam in builtin_families():
            for s in rng.uniform(0, fam.dt_max + 0.5, size=5):
                rows = fam.profile(float(s))
                expected = np.zeros(2)
                for a in range(2):
                    for ap in range(2):
                        expected[ap] += P0[a] * rows[a, ap]
                got = marginal_at(fam, P0, float(s)).weights
                assert np.abs(got - expected).max() <= 1e-14

    def test_post_collapse_returns_prior(self):
        for fam in builtin_families():
            for s in (fam.dt_max, fam.dt_max + 0.1, fam.dt_max + 10):
                m = marginal_at(fam, P0, s)
                assert np.abs(m.weights - P0.weights).max() <= 1e-12

    def test_valid_distribution_on_dense_grid(self):
        for fam in builtin_families():
            for s in np.linspace(0, fam.dt_max + 0.2, 100):
                m = marginal_at(fam, P0, float(s))  # raises if invalid
                assert np.all(m.weights >= 0)

    def test_errors(self):
        fam = asym_family()
        with pytest.raises(TimeBeforeTrigger):
            marginal_at(fam, P0, -0.1)
        with pytest.raises(PriorMismatch):
            marginal_at(fam, make_distribution([0.5, 0.5]), 0.1)


class TestSingleBoxWitness:
    def test_instantaneous_always_zero(self):
        fam = make_family(FamilySpec("instantaneous", P0))
        for s in (0.0,):
            assert single_box_witness(fam, P0, s) == 0.0
        rng = np.random.default_rng(5)
        for _ in range(10):
            w = rng.random(3) + 1e-3
            p = make_distribution(w / w.sum())
            fi = make_family(FamilySpec("instantaneous", p))
            assert single_box_witness(fi, p, 0.0) <= 1e-12

    def test_equal_dt_linear_zero(self):
        fam = make_family(FamilySpec("linear", P0, dt=(1.0, 1.0)))
        assert single_box_witness(fam, P0, 0.5) == pytest.approx(0.0, abs=1e-12)

    def test_asymmetric_value(self):
        assert single_box_witness(asym_family(), P0, 0.5) == pytest.approx(
            0.21, abs=1e-12)

    def test_outside_window(self):
        with pytest.raises(TimeOutsideWindow):
            single_box_witness(asym_family(), P0, 1.5)
        with pytest.raises(TimeOutsideWindow):
            single_box_witness(asym_family(), P0, -0.1)

    def test_monotone_on_shared_window(self):
        # built-in with positive shortest collapse time
        fam = make_family(FamilySpec("frozen", P0, dt=(0.4, 1.0)))
        grid = np.linspace(0.0, fam.dt_min, 50)
        vals = [single_box_witness(fam, P0, float(s)) for s in grid]
        assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))


class TestFamilySpecSerialization:
    def test_roundtrip(self):
        spec = FamilySpec("frozen", P0, dt=(0.0, 1.0))
        d = family_spec_to_dict(spec)
        spec2 = family_spec_from_dict(d)
        assert spec2.kind == "frozen" and spec2.dt == (0.0, 1.0)
        assert np.allclose(spec2.p0.weights, P0.weights)

    def test_prior_inherited_and_checked(self):
        spec2 = family_spec_from_dict({"kind": "instantaneous"}, p0=P0)
        assert np.allclose(spec2.p0.weights, P0.weights)
        with pytest.raises(InvalidSpec):
            family_spec_from_dict({"kind": "instantaneous", "p0": [0.5, 0.5]},
                                  p0=P0)
