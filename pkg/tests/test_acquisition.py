import math

import numpy as np
import pytest

from probo.acquisition import (
    AcquisitionSpec,
    ei_values,
    glcb_values,
    lcb_values,
    parse_acquisition,
    score_ei,
    score_glcb,
    score_lcb,
)
from probo.errors import ConfigError
from probo.gp import Prediction


# --------------------------------------------------------------------- lcb

def test_lcb_zero_variance_is_the_mean():
    assert score_lcb(Prediction(mu=2.0, var=0.0), tau=5.0).value == 2.0


def test_lcb_arithmetic():
    assert score_lcb(Prediction(mu=2.0, var=4.0), tau=1.0).value == 0.0


def test_lcb_tau_zero_ignores_variance():
    for var in (0.0, 1.0, 100.0):
        assert score_lcb(Prediction(mu=2.0, var=var), tau=0.0).value == 2.0


# ---------------------------------------------------------------------- ei

def test_ei_degenerate_variance():
    assert score_ei(Prediction(mu=1.0, var=0.0), psi_min=1.0).value == 0.0
    # a deterministic one-unit improvement scores -1 (lower is better)
    assert score_ei(Prediction(mu=0.0, var=0.0), psi_min=1.0).value == -1.0
    # no improvement possible
    assert score_ei(Prediction(mu=2.0, var=0.0), psi_min=1.0).value == 0.0


def test_ei_standard_normal_value():
    # E max(-Z, 0) = 1 / sqrt(2 pi) for Z standard normal
    got = -score_ei(Prediction(mu=0.0, var=1.0), psi_min=0.0).value
    assert got == pytest.approx(1.0 / math.sqrt(2 * math.pi), abs=1e-12)


def test_ei_matches_monte_carlo():
    rng = np.random.default_rng(30)
    n = 100_000
    for _ in range(5):
        mu = rng.uniform(-2, 2)
        var = rng.uniform(0.1, 4.0)
        psi_min = rng.uniform(-2, 2)
        draws = rng.normal(mu, math.sqrt(var), size=n)
        samples = np.maximum(psi_min - draws, 0.0)
        mc = samples.mean()
        se = samples.std(ddof=1) / math.sqrt(n)
        closed = -score_ei(Prediction(mu=mu, var=var), psi_min=psi_min).value
        assert abs(closed - mc) <= 3 * se


def test_ei_nonnegative_and_monotone_in_mean():
    rng = np.random.default_rng(31)
    for _ in range(50):
        var = rng.uniform(0, 2)
        psi_min = rng.uniform(-1, 1)
        mus = np.sort(rng.uniform(-3, 3, size=4))
        eis = [-score_ei(Prediction(mu=m, var=var), psi_min=psi_min).value for m in mus]
        assert all(e >= 0 for e in eis)
        assert all(a >= b - 1e-12 for a, b in zip(eis, eis[1:]))


# -------------------------------------------------------------------- glcb

def test_glcb_zero_rho_is_lcb():
    rng = np.random.default_rng(32)
    for _ in range(50):
        pred = Prediction(mu=rng.normal(), var=rng.uniform(0, 3))
        width = rng.uniform(0, 5)
        tau = rng.uniform(0, 3)
        assert score_glcb(pred, width, tau=tau, rho=0.0).value == pytest.approx(
            score_lcb(pred, tau).value, abs=1e-12)


def test_glcb_zero_width_is_lcb():
    pred = Prediction(mu=0.7, var=2.0)
    assert score_glcb(pred, 0.0, tau=1.3, rho=4.0).value == score_lcb(pred, 1.3).value


def test_glcb_arithmetic():
    assert score_glcb(Prediction(mu=1.0, var=1.0), width=2.0, tau=1.0, rho=0.5).value == -1.0


def test_glcb_rewards_imprecision():
    pred = Prediction(mu=0.0, var=1.0)
    widths = [0.0, 0.5, 1.0, 2.0]
    scores = [score_glcb(pred, w, tau=1.0, rho=0.7).value for w in widths]
    assert all(a > b for a, b in zip(scores, scores[1:]))


def test_glcb_rejects_negative_width():
    with pytest.raises(ValueError):
        score_glcb(Prediction(mu=0.0, var=1.0), width=-0.1, tau=1.0, rho=1.0)


def test_constant_mean_shift_preserves_the_argmin():
    rng = np.random.default_rng(33)
    mu = rng.normal(size=20)
    var = rng.uniform(0.1, 2.0, size=20)
    width = rng.uniform(0.0, 3.0, size=20)
    shift = 7.3
    psi_min = float(mu.min())
    for values, kwargs in (
        (lcb_values, {"tau": 1.0}),
        (glcb_values, {"width": width, "tau": 1.0, "rho": 0.5}),
    ):
        base = values(mu, var, **kwargs)
        moved = values(mu + shift, var, **kwargs)
        assert np.allclose(moved - base, shift, atol=1e-12)
        assert np.argmin(moved) == np.argmin(base)
    # EI's incumbent shifts along with the surface
    base = ei_values(mu, var, psi_min)
    moved = ei_values(mu + shift, var, psi_min + shift)
    assert np.allclose(moved, base, atol=1e-12)
    assert np.argmin(moved) == np.argmin(base)


# ----------------------------------------------------------------- parsing

def test_parse_plain_forms():
    assert parse_acquisition("ei") == AcquisitionSpec(kind="ei")
    assert parse_acquisition("lcb:tau=2.5") == AcquisitionSpec(kind="lcb", tau=2.5)
    got = parse_acquisition("glcb:tau=1,rho=1,c=100")
    assert got == AcquisitionSpec(kind="glcb", tau=1.0, rho=1.0, c=100.0)


def test_parse_shorthand():
    got = parse_acquisition("glcb-1-100")
    assert got == AcquisitionSpec(kind="glcb", tau=1.0, rho=1.0, c=100.0)
    assert parse_acquisition("GLCB-10-50").rho == 10.0


def test_parse_rejects_garbage():
    for bad in ("ucb", "lcb:tau=x", "glcb:beta=1", "glcb-1", "lcb:tau"):
        with pytest.raises(ConfigError):
            parse_acquisition(bad)


def test_spec_validation_and_labels():
    with pytest.raises(ConfigError):
        AcquisitionSpec(kind="glcb", c=0.0)
    with pytest.raises(ConfigError):
        AcquisitionSpec(kind="lcb", tau=-1.0)
    assert AcquisitionSpec(kind="ei").label == "ei"
    assert AcquisitionSpec(kind="lcb", tau=1.0).label == "lcb_tau1"
    assert AcquisitionSpec(kind="glcb", tau=1.0, rho=1.0, c=100.0).label == "glcb_tau1_rho1_c100"


def test_spec_dict_round_trip():
    spec = AcquisitionSpec(kind="glcb", tau=0.5, rho=2.0, c=10.0)
    assert AcquisitionSpec.from_dict(spec.to_dict()) == spec
