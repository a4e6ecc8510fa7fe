"""Randomized invariants over model parameters (kappa, c, H0)."""
import numpy as np
from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st

from killing_cmc_lab import constructor as cons
from killing_cmc_lab import geometry as geo
from killing_cmc_lab import report
from killing_cmc_lab import verifier as ver

kappas = st.floats(0.25, 4.0)
cs = st.floats(0.25, 2.0)
H0s = st.floats(-4.0, -0.25)


@st.composite
def model_specs(draw):
    family = draw(st.sampled_from(["euclidean", "hyperbolic", "spherical", "corollary_weighted",
                                   "corollary_unweighted"]))
    n = draw(st.integers(2, 4))
    if family == "euclidean":
        return {"name": family, "n": n}
    if family in ("hyperbolic", "spherical"):
        return {"name": family, "n": n, "kappa": draw(kappas)}
    base = draw(st.sampled_from(["hyperbolic", "spherical"]))
    return {"name": family, "base": {"name": base, "n": n, "kappa": draw(kappas)}, "c": draw(cs)}


def construct(spec, H0, variant):
    m = geo.make_model(spec)
    try:
        return cons.build_profile_quadrature(m, H0, variant)
    except (cons.RadiusError, cons.NonMonotoneRatioError):
        return None


@settings(max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(model_specs(), H0s, st.sampled_from(["weighted", "unweighted"]))
def test_solution_invariants(spec, H0, variant):
    sol = construct(spec, H0, variant)
    assume(sol is not None)
    m = sol.model

    # V_k is strictly increasing
    radii = np.linspace(0, sol.r0, 9)
    V = geo.ball_volumes(m, radii, sol.k)
    assert np.all(np.diff(V) > 0)

    # 0 < 1/W <= exp(-psi) inside
    angle = ver.angle_function_check(sol)[0]
    assert angle.name == "angle_function" and angle.passed

    # n|H0| V_k(r0) = A_k(r0) defines r0; strict inequality inside
    inner, edge = ver.salavessa_check(m, sol, [0.5 * sol.r0, sol.r0])
    assert inner.passed and inner.margin > 0
    assert edge.passed

    # the first integral holds pointwise
    assert ver.flux_identity_check(sol).passed

    # height positivity and monotone profile
    u = sol.profile.u
    assert np.all(u[:-1] > 0) and u[-1] == 0 and np.all(np.diff(u) <= 0)

    # rebuilding gives byte-identical CSV text
    again = construct(spec, H0, variant)
    rows = lambda s: [tuple(r) for r in np.column_stack([s.profile.r, s.profile.u, s.profile.W])]
    assert report.csv_text("r,u,W".split(","), rows(sol)) == report.csv_text("r,u,W".split(","), rows(again))


@settings(max_examples=40, deadline=None)
@given(kappas, st.floats(1.0, 2.0), H0s, st.integers(2, 4))
def test_integral_bound_is_the_sharper_one(kappa, c, H0, n):
    # on euclidean, spherical and corollary weights with c >= 1 both bounds hold
    # and the rotational integral bound is never the weaker one
    base = {"name": "spherical", "n": n, "kappa": kappa}
    specs = [{"name": "euclidean", "n": n}, base,
             {"name": "corollary_weighted", "base": {**base, "name": "hyperbolic"}, "c": c},
             {"name": "corollary_weighted", "base": base, "c": c}]
    for spec in specs:
        sol = construct(spec, H0, "weighted")
        if sol is None:
            continue
        checks = {x.name: x for x in ver.height_bound_check(sol)}
        a, b = checks["height_theorem_a"], checks["height_integral"]
        assert a.passed and b.passed
        assert a.margin >= b.margin - 1e-9 * a.target
