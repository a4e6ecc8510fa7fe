import math

import numpy as np
import pytest

from killing_cmc_lab.quadrature import (
    QuadratureConfig,
    QuadratureError,
    cumulative,
    integrate,
    integrate_intervals,
    row_means,
)


def test_polynomials_are_exact():
    res = integrate(lambda x: x ** 6 - 3 * x ** 2, 0.0, 2.0)
    assert res.value == pytest.approx(2 ** 7 / 7 - 8, rel=1e-14)
    assert res.evaluations == 15


def test_integrable_endpoint_singularity():
    # the error estimate has to drive bisection toward the singular end
    res = integrate(lambda x: x ** -0.25, 0.0, 1.0)
    assert res.value == pytest.approx(4 / 3, rel=1e-9)


def test_batched_intervals_are_independent():
    a = np.array([0.0, 1.0, 0.0])
    b = np.array([math.pi, 2.0, 1e-3])
    vals, errs, _ = integrate_intervals(np.sin, a, b)
    np.testing.assert_allclose(vals, [2.0, math.cos(1) - math.cos(2), 2 * math.sin(5e-4) ** 2], rtol=1e-12)
    assert np.all(errs >= 0)


def test_row_means_short_intervals():
    lo = np.array([1.0, 1.0])
    hi = np.array([1.0 + 1e-12, 3.0])
    means = row_means(np.exp, lo, hi)
    assert means[0] == pytest.approx(math.e, rel=1e-12)
    assert means[1] == pytest.approx((math.exp(3) - math.e) / 2, rel=1e-12)


def test_cumulative_either_side_of_start():
    pts = np.array([2.0, -1.0, 0.5, 0.0])
    out = cumulative(lambda x: 2 * x, pts, 0.0)
    np.testing.assert_allclose(out, pts ** 2, atol=1e-14)


def test_failure_reports_error_estimate():
    with pytest.raises(QuadratureError) as info:
        integrate(lambda x: np.sin(1 / x) / x ** 2, 1e-6, 1.0, QuadratureConfig(1e-14, 1e-14, max_depth=3))
    assert info.value.error_estimate > 0


@pytest.mark.parametrize("bad", [dict(abs_tol=0), dict(rel_tol=-1), dict(max_depth=0)])
def test_config_validation(bad):
    with pytest.raises(ValueError):
        QuadratureConfig(**bad)
