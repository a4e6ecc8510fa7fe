import math

import numpy as np
import pytest

from killing_cmc_lab import geometry as geo
from killing_cmc_lab.geometry import (
    ModelError,
    area_density,
    bakry_emery_yy,
    ball_volume,
    isoperimetric_ratio,
    make_model,
    ratio_monotone_scan,
)

HYP_COROLLARY = {"name": "corollary_weighted", "base": {"name": "hyperbolic", "n": 2, "kappa": 1}, "c": 1}


def test_euclidean_basics():
    m = geo.euclidean(2)
    assert m.xi(1.0) == 1.0
    assert m.psi(0.7) == 0.0
    assert math.isinf(m.R)


def test_corollary_weight():
    m = make_model(HYP_COROLLARY)
    assert m.psi(1.0) == pytest.approx(0.5 * math.log(math.sinh(1.0)), rel=1e-14)
    assert m.psi(0.0) == 0.0


def test_spherical_radius():
    assert geo.spherical(2, 4.0).R == pytest.approx(math.pi / 2)


def test_custom_wrong_derivative_rejected():
    with pytest.raises(ModelError) as info:
        geo.custom(2, "r", "2*r")
    assert info.value.check == "derivative_consistency:xi_prime"


@pytest.mark.parametrize("spec,check", [
    ({"name": "nope"}, "unknown_model"),
    ({"name": "custom", "n": 2, "xi": "r + 1", "xi_prime": "1"}, "xi(0)=0"),
    ({"name": "custom", "n": 2, "xi": "2*r", "xi_prime": "2"}, "xi'(0)=1"),
    ({"name": "custom", "n": 2, "xi": "r", "xi_prime": "1", "psi": "r", "psi_prime": "1"}, "psi'(0)=0"),
    ({"name": "custom", "n": 2, "R": 5, "xi": "sin(r)", "xi_prime": "cos(r)"}, "xi>0"),
])
def test_invalid_models_name_the_check(spec, check):
    with pytest.raises(ModelError) as info:
        make_model(spec)
    assert info.value.check == check


def test_area_density_examples():
    assert area_density(geo.euclidean(3), 2.0, 0) == 4.0
    assert area_density(make_model(HYP_COROLLARY), 1.0, 2) == pytest.approx(1.0, rel=1e-14)
    assert area_density(geo.hyperbolic(2), 1.0, 1) == pytest.approx(math.sinh(1.0), rel=1e-15)


def test_area_density_out_of_range():
    with pytest.raises(geo.DomainRangeError):
        area_density(geo.spherical(2), math.pi, 0)
    with pytest.raises(geo.DomainRangeError):
        area_density(geo.euclidean(2), -0.1, 0)


def test_area_density_weight_scaling():
    m = make_model(HYP_COROLLARY)
    r = np.linspace(0.1, 2.0, 7)
    for k in (0.5, 1.0, 2.0, 3.0):
        np.testing.assert_allclose(area_density(m, r, k), area_density(m, r, 0) * np.exp(-k * m.psi(r)),
                                   rtol=1e-15)


def test_ball_volume_examples():
    assert ball_volume(geo.euclidean(3), 1.0, 0) == pytest.approx(1 / 3, rel=1e-14)
    assert ball_volume(geo.hyperbolic(2), 1.0, 1) == pytest.approx(math.cosh(1) - 1, rel=1e-13)
    assert ball_volume(geo.spherical(3), 0.0, 2) == 0.0


def test_ball_volume_tolerance_halving():
    m = make_model(HYP_COROLLARY)
    coarse = geo.QuadratureConfig(1e-8, 1e-8)
    fine = geo.QuadratureConfig(5e-9, 5e-9)
    a = ball_volume(m, 1.5, 2, coarse)
    b = ball_volume(m, 1.5, 2, fine)
    assert abs(a - b) <= 1e-8 * abs(a)


def test_isoperimetric_ratio_examples():
    for n in (2, 3, 4):
        for k in (0, 1, 2):
            for r in (1e-9, 0.3, 2.0):
                assert isoperimetric_ratio(geo.euclidean(n), r, k) == pytest.approx(n / r, rel=1e-10)
    assert isoperimetric_ratio(geo.hyperbolic(2), 1.0, 1) == pytest.approx(1 / math.tanh(0.5), rel=1e-12)
    assert isoperimetric_ratio(geo.spherical(2), math.pi / 2, 1) == pytest.approx(1.0, rel=1e-12)


def test_isoperimetric_ratio_small_r_branch_is_continuous():
    m = make_model(HYP_COROLLARY)
    below = isoperimetric_ratio(m, 0.99 * geo.SMALL_R, 2)
    above = isoperimetric_ratio(m, 1.01 * geo.SMALL_R, 2)
    assert below * 0.99 == pytest.approx(above * 1.01, rel=1e-6)


def test_monotone_scans_pass():
    assert ratio_monotone_scan(geo.euclidean(2), 0)
    assert ratio_monotone_scan(geo.hyperbolic(2), 1)
    assert ratio_monotone_scan(make_model(HYP_COROLLARY), 2)


def test_monotone_scan_reports_rise():
    # xi = r exp(r^2) grows fast enough that A/V turns upward near r = 1.5
    m = geo.custom(2, "r*exp(r^2)", "exp(r^2)*(1 + 2*r^2)", R=3.0)
    res = ratio_monotone_scan(m, 0)
    assert not res
    lo, hi = res.interval
    dense = np.linspace(lo, hi, 9)
    vals = geo.ratio_curve(m, dense, 0)
    assert vals[-1] > vals[0]
    with pytest.raises(ValueError):
        ratio_monotone_scan(m, 0, resolution=8)


def test_bakry_emery():
    assert bakry_emery_yy(geo.hyperbolic(3), 0.8) == 0.0
    m = geo.custom(2, "r", "1", "r^2/2", "r")
    assert bakry_emery_yy(m, 1.0) == pytest.approx(math.exp(-1), rel=1e-8)
    near = make_model(HYP_COROLLARY)
    vals = [bakry_emery_yy(near, r) for r in (1e-3, 1e-2, 1e-1)]
    assert all(math.isfinite(v) for v in vals)
    assert abs(vals[0] - vals[1]) < 1e-2


def test_model_listing_has_six_entries():
    assert list(geo.BUILTIN_MODELS) == ["euclidean", "hyperbolic", "spherical", "corollary_weighted",
                                        "corollary_unweighted", "custom"]
