import json

import numpy as np
import pytest

from gapsol import Field, GridSpec
from gapsol.errors import ConvergenceError, HypothesisViolationError
from gapsol.grid import constant_field, inner_l2, laplacian, lp_norm, sample_function
from gapsol.spectrum import assert_positive_spectrum, min_eigenvalue

# dense-matrix reference (scipy.linalg.eigh on the full operator), frozen
MATHIEU_LAMBDA_MIN = 0.987338405184578  # V = 1 + cos(2 pi x), L = 8, n = 256


def _mathieu_potential(n=256, L=8.0):
    g = GridSpec(1, L, n)
    return sample_function(g, lambda x: 1.0 + np.cos(2 * np.pi * x))


def test_constant_potential_exact():
    g = GridSpec(1, 8.0, 64)
    rep = min_eigenvalue(constant_field(g, 1.0))
    assert abs(rep.lambda_min - 1.0) <= 1e-10
    assert rep.eigen_residual <= 1e-8


def test_negative_constant_potential_and_refusal():
    g = GridSpec(1, 8.0, 64)
    rep = min_eigenvalue(constant_field(g, -2.0))
    assert abs(rep.lambda_min + 2.0) <= 1e-10
    with pytest.raises(HypothesisViolationError, match="spectr"):
        assert_positive_spectrum(rep)


def test_matches_frozen_dense_oracle():
    rep = min_eigenvalue(_mathieu_potential())
    assert abs(rep.lambda_min - MATHIEU_LAMBDA_MIN) <= 1e-8


def test_shift_covariance():
    v = _mathieu_potential()
    base = min_eigenvalue(v).lambda_min
    shifted = min_eigenvalue(Field(v.values + 3.25, v.grid)).lambda_min
    assert abs((shifted - base) - 3.25) <= 2e-8


def test_attractive_defect_lowers_lambda():
    g = GridSpec(1, 16.0, 128)
    x = g.coords[0]
    lam = []
    for amp in (0.0, -0.3, -0.6):
        v = sample_function(
            g, lambda x: 1.0 + amp * np.exp(-((x - 8.0) ** 2))
        )
        lam.append(min_eigenvalue(v).lambda_min)
    assert lam[0] > lam[1] > lam[2]


def test_eigenvector_residual_recomputed():
    rep = min_eigenvalue(_mathieu_potential())
    phi = rep.eigenvector
    assert phi is not None
    v = _mathieu_potential()
    op = Field(
        -laplacian(phi).values + v.values * phi.values - rep.lambda_min * phi.values,
        phi.grid,
    )
    assert lp_norm(op, 2) / lp_norm(phi, 2) <= 1e-7


def test_budget_exhaustion_raises_with_best_iterate():
    with pytest.raises(ConvergenceError) as exc:
        min_eigenvalue(_mathieu_potential(), tol=1e-14, max_iters=3)
    err = exc.value
    assert isinstance(err.best, Field)
    assert err.iterations == 3
    assert err.residual > 0.0


def test_seed_determinism():
    v = _mathieu_potential(n=64)
    a = min_eigenvalue(v, seed=4)
    b = min_eigenvalue(v, seed=4)
    assert a.lambda_min == b.lambda_min
    assert np.array_equal(a.eigenvector.values, b.eigenvector.values)


def test_2d_constant():
    g = GridSpec(2, 8.0, 32)
    rep = min_eigenvalue(constant_field(g, 1.5))
    assert abs(rep.lambda_min - 1.5) <= 1e-9


def test_report_jsonable_drops_eigenvector():
    rep = min_eigenvalue(_mathieu_potential(n=64))
    payload = rep.to_jsonable()
    assert "eigenvector" not in payload
    json.dumps(payload)
    assert payload["method"] == "preconditioned_iteration"


def test_eigenvector_is_l2_normalized():
    rep = min_eigenvalue(_mathieu_potential(n=64))
    phi = rep.eigenvector
    assert inner_l2(phi, phi) == pytest.approx(1.0, abs=1e-10)
