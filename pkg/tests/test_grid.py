import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gapsol import Field, GridSpec
from gapsol.errors import DegenerateCentroidError, FieldError, GridMismatchError
from gapsol.grid import (
    centroid,
    constant_field,
    dirichlet,
    gradient,
    inner_h1v,
    inner_l2,
    integrate,
    laplacian,
    lp_norm,
    periodic_delta,
    random_smooth_field,
    sample_function,
    translate,
)

from _models import sech_soliton


class TestGridSpec:
    def test_scalar_box_broadcasts(self):
        g = GridSpec(2, 16.0, 32)
        assert g.box_lengths == (16.0, 16.0)
        assert g.shape == (32, 32)
        assert g.spacing == (0.5, 0.5)
        assert g.cell_volume == 0.25

    @pytest.mark.parametrize("bad_n", [0, 15, 17, 100, -32])
    def test_rejects_non_power_of_two(self, bad_n):
        with pytest.raises(ValueError):
            GridSpec(1, 8.0, bad_n)

    @pytest.mark.parametrize("dim", [0, 3])
    def test_rejects_unsupported_dim(self, dim):
        with pytest.raises(ValueError):
            GridSpec(dim, 8.0, 32)

    def test_rejects_bad_box(self):
        with pytest.raises(ValueError):
            GridSpec(1, -4.0, 32)
        with pytest.raises(ValueError):
            GridSpec(2, (8.0,), 32)

    def test_wavenumbers_include_nyquist(self):
        g = GridSpec(1, 2.0 * np.pi, 32)
        k = g.wavenumbers[0]
        assert k.max() == 15.0 and k.min() == -16.0
        # the pointwise-derivative convention drops the Nyquist entry
        assert g.deriv_wavenumbers[0][16] == 0.0
        assert g.laplacian_symbol.max() == 256.0


class TestField:
    def test_values_are_flat_frozen_copies(self):
        g = GridSpec(1, 8.0, 16)
        src = np.arange(16.0)
        u = Field(src, g)
        src[0] = 99.0
        assert u.values[0] == 0.0
        with pytest.raises(ValueError):
            u.values[0] = 1.0

    def test_rejects_nan_and_wrong_size(self):
        g = GridSpec(1, 8.0, 16)
        with pytest.raises(FieldError):
            Field(np.full(16, np.nan), g)
        with pytest.raises(FieldError):
            Field(np.zeros(15), g)

    def test_arithmetic_and_grid_guard(self):
        g = GridSpec(1, 8.0, 16)
        u = constant_field(g, 2.0)
        v = constant_field(g, 3.0)
        assert np.all((u + v).values == 5.0)
        assert np.all((u - v).values == -1.0)
        assert np.all((2.0 * u).values == 4.0)
        assert np.all((-u).values == -2.0)
        w = constant_field(GridSpec(1, 8.0, 32), 1.0)
        with pytest.raises(GridMismatchError):
            u + w


# frozen reference: independent dense DFT differentiation matrix
def _dense_laplacian_matrix(n, L):
    k = 2.0 * np.pi * np.fft.fftfreq(n, d=L / n)
    F = np.fft.fft(np.eye(n), axis=0)
    return -(np.fft.ifft(F * (-(k**2))[:, None], axis=0)).real


def test_laplacian_matches_dense_matrix():
    n, L = 32, 5.0
    g = GridSpec(1, L, n)
    A = _dense_laplacian_matrix(n, L)
    rng = np.random.default_rng(0)
    u = Field(rng.standard_normal(n), g)
    got = laplacian(u).values
    want = -(A @ u.values)
    assert np.max(np.abs(got - want)) <= 1e-10 * max(1.0, np.max(np.abs(want)))


def test_laplacian_eigenfunction_closed_form():
    g = GridSpec(1, 4.0, 64)
    for m in (1, 3, 7):
        u = sample_function(g, lambda x: np.cos(2.0 * np.pi * m * x / 4.0))
        lam = (2.0 * np.pi * m / 4.0) ** 2
        err = np.max(np.abs(laplacian(u).values + lam * u.values))
        assert err <= 1e-10 * lam


def test_laplacian_2d_separates():
    g = GridSpec(2, (4.0, 2.0), 32)
    u = sample_function(
        g, lambda x, y: np.sin(2 * np.pi * x / 4.0) * np.cos(2 * np.pi * 3 * y / 2.0)
    )
    lam = (2 * np.pi / 4.0) ** 2 + (2 * np.pi * 3 / 2.0) ** 2
    assert np.max(np.abs(laplacian(u).values + lam * u.values)) <= 1e-9 * lam


def test_dirichlet_is_dual_to_laplacian():
    # exact duality including the Nyquist mode: a checkerboard field
    g = GridSpec(1, 8.0, 32)
    rng = np.random.default_rng(5)
    u = Field(rng.standard_normal(32), g)
    v = Field(rng.standard_normal(32), g)
    lhs = dirichlet(u, v)
    rhs = -inner_l2(laplacian(u), v)
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs))
    assert abs(dirichlet(u, v) - dirichlet(v, u)) <= 1e-12 * max(1.0, abs(lhs))
    # same-object fast path
    assert abs(dirichlet(u, u) + inner_l2(laplacian(u), u)) <= 1e-12 * dirichlet(u, u)


def test_dirichlet_parseval_oracle():
    n, L = 64, 7.0
    g = GridSpec(1, L, n)
    rng = np.random.default_rng(11)
    u = Field(rng.standard_normal(n), g)
    uhat = np.fft.fft(u.shaped)
    k = 2.0 * np.pi * np.fft.fftfreq(n, d=L / n)
    want = float(np.sum(k**2 * np.abs(uhat) ** 2)) * L / n**2
    assert abs(dirichlet(u, u) - want) <= 1e-12 * want


def test_inner_h1v_expands_the_operator():
    g = GridSpec(1, 8.0, 64)
    rng = np.random.default_rng(1)
    u = random_smooth_field(g, rng)
    v = random_smooth_field(g, rng)
    vtot = sample_function(g, lambda x: 1.0 + 0.5 * np.cos(2 * np.pi * x / 8.0))
    op = Field(-laplacian(u).values + vtot.values * u.values, g)
    assert abs(inner_h1v(u, v, vtot) - inner_l2(op, v)) <= 1e-11


def test_integrate_soliton_mass():
    # integral of 2 sech^2 over the line is 4; tails at L/2 = 20 are e-17
    g = GridSpec(1, 40.0, 1024)
    u = sech_soliton(g)
    mass = integrate(Field(u.values**2, g))
    assert abs(mass - 4.0) <= 1e-12


def test_lp_norm_soliton_closed_form():
    # ||sqrt2 sech||_4^4 = 4 * integral sech^4 = 16/3
    g = GridSpec(1, 40.0, 1024)
    u = sech_soliton(g)
    assert abs(lp_norm(u, 4) - (16.0 / 3.0) ** 0.25) <= 1e-12
    with pytest.raises(ValueError):
        lp_norm(u, 0.5)


def test_translate_moves_bump_forward():
    g = GridSpec(1, 16.0, 64)
    u = sech_soliton(g, center=4.0)
    v = translate(u, 8)  # 8 cells = 2.0 length units
    w = sech_soliton(g, center=6.0)
    assert np.max(np.abs(v.values - w.values)) <= 1e-12
    with pytest.raises(ValueError):
        translate(u, 1.5)


def test_translate_wraps_periodically():
    g = GridSpec(1, 16.0, 64)
    u = sech_soliton(g, center=14.0)
    v = translate(u, 16)  # +4.0 wraps past the boundary to x = 2
    w = sech_soliton(g, center=2.0)
    assert np.max(np.abs(v.values - w.values)) <= 1e-12


@settings(max_examples=30, deadline=None)
@given(
    a=st.integers(min_value=-64, max_value=64),
    b=st.integers(min_value=-64, max_value=64),
)
def test_translate_composes_additively(a, b):
    g = GridSpec(1, 8.0, 32)
    u = Field(np.sin(2 * np.pi * np.arange(32) / 32.0) + 0.3, g)
    lhs = translate(translate(u, a), b)
    rhs = translate(u, a + b)
    assert np.array_equal(lhs.values, rhs.values)


def test_centroid_of_centered_and_wrapped_bumps():
    g = GridSpec(1, 40.0, 512)
    c = centroid(sech_soliton(g, center=5.0))
    assert abs(c[0] - 5.0) <= 1e-6
    # mass straddling the boundary still gets the right circular mean
    c2 = centroid(sech_soliton(g, center=0.5))
    assert abs(c2[0] - 0.5) <= 1e-6


def test_centroid_degenerate_and_zero():
    g = GridSpec(1, 40.0, 512)
    two = Field(
        sech_soliton(g, center=10.0).values + sech_soliton(g, center=30.0).values, g
    )
    with pytest.raises(DegenerateCentroidError):
        centroid(two)
    with pytest.raises(FieldError):
        centroid(Field(np.zeros(512), g))


def test_centroid_2d():
    g = GridSpec(2, 16.0, 64)
    u = sample_function(
        g,
        lambda x, y: np.exp(-((x - 5.0) ** 2 + (y - 11.0) ** 2)),
    )
    c = centroid(u)
    assert np.max(np.abs(c - np.array([5.0, 11.0]))) <= 1e-6


@settings(max_examples=30, deadline=None)
@given(
    a=st.floats(min_value=0.0, max_value=16.0, allow_nan=False),
    b=st.floats(min_value=0.0, max_value=16.0, allow_nan=False),
)
def test_periodic_delta_min_image(a, b):
    d = periodic_delta(np.array([a]), np.array([b]), np.array([16.0]))[0]
    assert abs(d) <= 8.0 + 1e-12
    assert abs((a - b) - d) % 16.0 <= 1e-9 or abs(abs((a - b) - d) % 16.0 - 16.0) <= 1e-9


def test_random_smooth_field_reproducible_and_bandlimited():
    g = GridSpec(1, 8.0, 64)
    u1 = random_smooth_field(g, np.random.default_rng(9))
    u2 = random_smooth_field(g, np.random.default_rng(9))
    assert np.array_equal(u1.values, u2.values)
    assert np.max(np.abs(u1.values)) == pytest.approx(1.0)
    spec = np.abs(np.fft.fft(u1.shaped))
    m = np.abs(np.fft.fftfreq(64, d=1.0 / 64))
    assert np.all(spec[m > 0.25 * 32] <= 1e-12)  # nothing beyond the cutoff


def test_gradient_closed_form_and_nyquist_zeroing():
    g = GridSpec(1, 2.0 * np.pi, 32)
    u = sample_function(g, lambda x: np.sin(3.0 * x))
    du = gradient(u)[0]
    want = 3.0 * np.cos(3.0 * g.axes[0])
    assert np.max(np.abs(du.values - want)) <= 1e-10
    # pure Nyquist checkerboard has no consistent real derivative: maps to 0
    cb = Field((-1.0) ** np.arange(32), g)
    assert np.max(np.abs(gradient(cb)[0].values)) == 0.0
