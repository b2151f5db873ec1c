import json
import math

import numpy as np
import pytest

from gapsol import (
    CoefficientSpec,
    DefectSpec,
    Field,
    GridSpec,
    NonlinearitySpec,
    PotentialSpec,
    sample_model,
    validate_hypotheses,
    write_field,
)
from gapsol.errors import ModelError
from gapsol.model import (
    ProbeConfig,
    apply_F,
    apply_G,
    apply_f,
    apply_g,
    check_subcritical,
    critical_exponent,
    with_defect_amplitude,
    with_gamma_amplitude,
    zero_defect,
)

from _models import dual_power, kerr_flat, mathieu_problem, mixed_lattice


class TestCoefficientSpec:
    def test_constant_and_cosine_sampling(self):
        g = GridSpec(1, 4.0, 64)
        assert np.all(CoefficientSpec.constant(2.5).sample(g, 1.0) == 2.5)
        got = CoefficientSpec.cosine(1.0, 0.5).sample(g, 2.0)
        want = 1.0 + 0.5 * np.cos(2 * np.pi * g.coords[0] / 2.0)
        assert np.max(np.abs(got - want)) == 0.0

    def test_table_linear_interpolation(self):
        # two samples per period: interpolant hits the midpoint average
        g = GridSpec(1, 4.0, 64)
        got = CoefficientSpec.from_table([1.0, 3.0]).sample(g, 1.0)
        x = g.coords[0]
        frac = (x % 1.0) * 2.0
        assert got[np.isclose(x % 1.0, 0.0)].max() == 1.0
        assert got[np.isclose(x % 1.0, 0.5)].min() == 3.0
        assert got[np.isclose(frac % 1.0, 0.5)] == pytest.approx(2.0)

    def test_file_coefficient_grid_mismatch(self, tmp_path):
        g = GridSpec(1, 4.0, 64)
        other = GridSpec(1, 4.0, 32)
        p = tmp_path / "k.bin"
        write_field(p, Field(np.ones(32), other))
        with pytest.raises(ModelError, match="grid"):
            CoefficientSpec.from_file(p).sample(g, 1.0)

    def test_unknown_kind_rejected(self):
        with pytest.raises(ModelError):
            CoefficientSpec(kind="spline")

    def test_is_zero_is_conservative(self):
        assert CoefficientSpec.constant(0.0).is_zero
        assert CoefficientSpec.cosine(0.0, 0.0).is_zero
        assert not CoefficientSpec.from_file("whatever.bin").is_zero


class TestDefectSpec:
    def test_gaussian_closed_form(self):
        g = GridSpec(1, 16.0, 64)
        d = DefectSpec(kind="gaussian", amplitude=-0.5, width=2.0).sample(g)
        x = g.coords[0]
        dist = np.minimum(np.abs(x - 8.0), 16.0 - np.abs(x - 8.0))
        assert np.max(np.abs(d - (-0.5) * np.exp(-(dist**2) / 4.0))) <= 1e-15

    def test_explicit_center(self):
        g = GridSpec(1, 16.0, 64)
        d = DefectSpec(kind="gaussian", amplitude=1.0, width=1.0, center=(4.0,)).sample(g)
        assert d.reshape(-1)[np.argmin(np.abs(g.axes[0] - 4.0))] == pytest.approx(1.0)

    def test_zero_defect_and_bad_width(self):
        g = GridSpec(1, 16.0, 64)
        assert np.all(DefectSpec().sample(g) == 0.0)
        with pytest.raises(ModelError):
            DefectSpec(kind="gaussian", amplitude=1.0, width=0.0)


class TestSampleModel:
    def test_cells_per_period(self):
        prob = kerr_flat(n=128, box=8.0, period=1.0)
        assert prob.cells_per_period == (16,)
        assert prob.vloc_is_zero and prob.gamma_is_zero
        assert np.all(prob.vtot.values == 1.0)

    def test_box_must_tile_the_period(self):
        grid = GridSpec(1, 10.0, 64)
        pot = PotentialSpec(period=3.0, vper=CoefficientSpec.constant(1.0))
        with pytest.raises(ModelError, match="integer multiple"):
            sample_model(pot, NonlinearitySpec(), grid)

    def test_period_count_must_divide_points(self):
        # 5 periods cannot divide a power-of-two point count
        grid = GridSpec(1, 5.0, 64)
        pot = PotentialSpec(period=1.0, vper=CoefficientSpec.constant(1.0))
        with pytest.raises(ModelError, match="divide"):
            sample_model(pot, NonlinearitySpec(), grid)

    def test_nonperiodic_vper_file_rejected(self, tmp_path):
        grid = GridSpec(1, 8.0, 64)
        ramp = Field(np.linspace(1.0, 2.0, 64), grid)
        p = tmp_path / "v.bin"
        write_field(p, ramp)
        pot = PotentialSpec(period=1.0, vper=CoefficientSpec.from_file(p))
        with pytest.raises(ModelError, match="not periodic"):
            sample_model(pot, NonlinearitySpec(), grid)

    def test_wide_defect_rejected(self):
        with pytest.raises(ModelError, match="decay"):
            mathieu_problem(-0.5, n=64, box=16.0, width=8.0)

    def test_negative_gamma_rejected(self):
        grid = GridSpec(1, 8.0, 64)
        pot = PotentialSpec(period=1.0, vper=CoefficientSpec.constant(1.0))
        nl = NonlinearitySpec(
            kind="dual_power", p=8.0, q=4.0, gamma=CoefficientSpec.cosine(0.1, 0.5)
        )
        with pytest.raises(ModelError, match="Gamma negative"):
            sample_model(pot, nl, grid)

    def test_nonpositive_kcoef_rejected(self):
        grid = GridSpec(1, 8.0, 64)
        pot = PotentialSpec(period=1.0, vper=CoefficientSpec.constant(1.0))
        nl = NonlinearitySpec(kcoef=CoefficientSpec.cosine(1.0, 1.5))
        with pytest.raises(ModelError, match="inf K"):
            sample_model(pot, nl, grid)


class TestNonlinearitySpec:
    def test_q2_with_gamma_rejected_at_construction(self):
        with pytest.raises(ModelError, match="q = 2"):
            NonlinearitySpec(
                kind="dual_power", p=4.0, q=2.0, gamma=CoefficientSpec.constant(1.0)
            )

    def test_exponent_ordering(self):
        with pytest.raises(ModelError):
            NonlinearitySpec(p=3.0, q=3.0)
        with pytest.raises(ModelError):
            NonlinearitySpec(p=4.0, q=1.5)

    def test_custom_needs_both_callables(self):
        with pytest.raises(ModelError, match="both"):
            NonlinearitySpec(kind="custom", f=lambda x, u: u**3)

    def test_callables_only_for_custom(self):
        with pytest.raises(ModelError):
            NonlinearitySpec(kind="power", f=lambda x, u: u**3, F=lambda x, u: u**4 / 4)


def test_critical_exponent_values():
    assert critical_exponent(1) == math.inf
    assert critical_exponent(2) == math.inf
    assert critical_exponent(3) == 6.0
    assert critical_exponent(4) == 4.0


def test_check_subcritical_in_dim_3():
    check_subcritical(5.9, 2.0, 3)
    with pytest.raises(ModelError, match="subcritical"):
        check_subcritical(6.0, 2.0, 3)


class TestApply:
    def test_power_closed_forms(self):
        grid = GridSpec(1, 8.0, 64)
        pot = PotentialSpec(period=1.0, vper=CoefficientSpec.constant(1.0))
        nl = NonlinearitySpec(p=4.0, q=2.0, kcoef=CoefficientSpec.constant(2.0))
        prob = sample_model(pot, nl, grid)
        u = Field(np.linspace(-2.0, 2.0, 64), grid)
        assert np.max(np.abs(apply_f(prob, u).values - 2.0 * u.values**3)) <= 1e-14
        assert np.max(np.abs(apply_F(prob, u).values - 0.5 * u.values**4)) <= 1e-14

    def test_gamma_split(self):
        prob = dual_power(gamma=0.7)
        u = Field(np.linspace(-1.5, 1.5, 128), prob.grid)
        f = apply_f(prob, u).values
        g = apply_g(prob, u).values
        conc = 0.7 * np.abs(u.values) ** 2.0 * u.values
        assert np.max(np.abs(g - (f - conc))) <= 1e-14
        F = apply_F(prob, u).values
        G = apply_G(prob, u).values
        assert np.max(np.abs(G - (F - 0.7 * np.abs(u.values) ** 4.0 / 4.0))) <= 1e-14

    def test_custom_callable_broadcasts(self):
        grid = GridSpec(1, 8.0, 64)
        pot = PotentialSpec(period=1.0, vper=CoefficientSpec.constant(1.0))
        nl = NonlinearitySpec(
            kind="custom",
            p=4.0,
            q=2.0,
            f=lambda x, u: np.sin(2 * np.pi * x[0]) ** 2 * u**3,
            F=lambda x, u: np.sin(2 * np.pi * x[0]) ** 2 * u**4 / 4.0,
        )
        prob = sample_model(pot, nl, grid)
        u = Field(np.ones(64), grid)
        want = np.sin(2 * np.pi * grid.coords[0]) ** 2
        assert np.max(np.abs(apply_f(prob, u).values - want.reshape(-1))) <= 1e-14


class TestRebuilds:
    def test_zero_defect_strips_vloc(self):
        prob = mathieu_problem(-0.5)
        per = zero_defect(prob)
        assert per.vloc_is_zero
        assert np.array_equal(per.vper.values, prob.vper.values)

    def test_with_defect_amplitude(self):
        prob = mathieu_problem(-0.5)
        deeper = with_defect_amplitude(prob, -1.0)
        assert np.min(deeper.vloc.values) == pytest.approx(-1.0)
        with pytest.raises(ModelError):
            with_defect_amplitude(zero_defect(prob), -1.0)

    def test_with_gamma_amplitude(self):
        prob = dual_power(gamma=1.0)
        doubled = with_gamma_amplitude(prob, 2.0)
        assert np.all(doubled.gamma.values == 2.0)
        with pytest.raises(ModelError):
            with_gamma_amplitude(mixed_lattice(), 2.0)


class TestValidateHypotheses:
    @pytest.mark.parametrize(
        "prob", [kerr_flat(), dual_power(), mixed_lattice()], ids=["kerr", "dual", "mix"]
    )
    def test_builtin_models_pass(self, prob):
        rep = validate_hypotheses(prob)
        assert rep.passed, [c.name for c in rep.failures()]
        # low dimension: no upper restriction on p, and the report says so
        assert any("dimension" in note for note in rep.notes)

    def test_report_is_json_serializable(self):
        rep = validate_hypotheses(kerr_flat())
        payload = json.dumps(rep.to_jsonable())
        assert '"passed": true' in payload

    def test_nonmonotone_ratio_violator(self):
        # f = u^3 - 2u^5: the fiber ratio f/u = u^2 - 2u^4 peaks at u = 1/2
        # and decreases beyond, so monotonicity fails just past 0.5
        nl = NonlinearitySpec(
            kind="custom",
            p=6.0,
            q=2.0,
            f=lambda x, u: u**3 - 2.0 * u**5,
            F=lambda x, u: u**4 / 4.0 - u**6 / 3.0,
        )
        grid = GridSpec(1, 8.0, 128)
        pot = PotentialSpec(period=1.0, vper=CoefficientSpec.constant(1.0))
        rep = validate_hypotheses(sample_model(pot, nl, grid))
        assert not rep.passed
        fiber = rep.check("fiber_ratio_increasing")
        assert not fiber.passed
        # the reported onset pair brackets the analytic peak at probe
        # resolution (8 points per decade, spacing factor 10^(1/8))
        spacing = 10.0 ** (1.0 / 8.0)
        assert fiber.data["u_lo"] <= 0.5 * spacing**2
        assert fiber.data["u_hi"] >= 0.5
        assert not rep.check("f_superlinear_at_infinity").passed

    def test_custom_antiderivative_mismatch_caught(self):
        nl = NonlinearitySpec(
            kind="custom",
            p=4.0,
            q=2.0,
            f=lambda x, u: u**3,
            F=lambda x, u: u**4 / 2.0,  # off by a factor of 2
        )
        grid = GridSpec(1, 8.0, 128)
        pot = PotentialSpec(period=1.0, vper=CoefficientSpec.constant(1.0))
        rep = validate_hypotheses(sample_model(pot, nl, grid))
        assert not rep.check("custom_fF_consistent").passed

    def test_custom_consistent_pair_passes(self):
        nl = NonlinearitySpec(
            kind="custom",
            p=4.0,
            q=2.0,
            f=lambda x, u: np.abs(u) ** 2.0 * u,
            F=lambda x, u: np.abs(u) ** 4.0 / 4.0,
        )
        grid = GridSpec(1, 8.0, 128)
        pot = PotentialSpec(period=1.0, vper=CoefficientSpec.constant(1.0))
        rep = validate_hypotheses(sample_model(pot, nl, grid))
        assert rep.passed, [c.name for c in rep.failures()]

    def test_probe_config_is_adjustable(self):
        rep = validate_hypotheses(
            kerr_flat(), ProbeConfig(u_min=1e-4, u_max=1e2, per_decade=4)
        )
        assert rep.passed
