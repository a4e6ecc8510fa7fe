"""End-to-end acceptance criteria; a per-criterion summary prints at the end of the run."""
import math
import time

import numpy as np
import pytest

from killing_cmc_lab import constructor as cons
from killing_cmc_lab import geometry as geo
from killing_cmc_lab import verifier as ver

HYP = {"name": "hyperbolic", "n": 2, "kappa": 1.0}
SPH = {"name": "spherical", "n": 2, "kappa": 1.0}
EUC = {"name": "euclidean", "n": 2}

BUILTINS = [EUC, {"name": "euclidean", "n": 3}, {"name": "euclidean", "n": 4},
            HYP, {**HYP, "n": 3}, SPH, {**SPH, "n": 3}]
BUILTINS += [{"name": name, "base": base, "c": 1.0}
             for base in (EUC, HYP, SPH) for name in ("corollary_weighted", "corollary_unweighted")]
VARIANTS = ("weighted", "unweighted")

# the ratio A/V rises again before R here, so no graph is built (see the decisions log)
NON_MONOTONE = [({"name": "corollary_unweighted", "base": SPH, "c": 1.0}, "weighted")]


def label(spec):
    if "base" in spec:
        return f"{spec['name']}({label(spec['base'])},c={spec['c']:g})"
    return f"{spec['name']}({spec['n']}" + (f",{spec['kappa']:g})" if "kappa" in spec else ")")


@pytest.fixture(scope="module")
def constructions():
    """Quadrature and ODE solutions for every built-in model and variant at H0 = -1."""
    built, start = [], time.perf_counter()
    for spec in BUILTINS:
        m = geo.make_model(spec)
        for variant in VARIANTS:
            if (spec, variant) in NON_MONOTONE:
                continue
            quad = cons.build_profile_quadrature(m, -1.0, variant)
            ode = cons.build_profile_ode(m, -1.0, variant, r0=quad.r0)
            built.append((label(spec), variant, quad, ode))
    return built, time.perf_counter() - start


@pytest.mark.criterion(1)
@pytest.mark.parametrize("n", [2, 3, 4])
@pytest.mark.parametrize("H0", [-0.5, -1.0, -2.0])
def test_euclidean_sharpness(n, H0, record_property):
    start = time.perf_counter()
    sol = cons.build_profile_quadrature(geo.euclidean(n), H0, "weighted")
    elapsed = time.perf_counter() - start
    err = abs(sol.max_height - 1 / abs(H0))
    record_property("summary", "9 euclidean cases, |max u - 1/|H0|| <= 1e-8, < 1 s each")
    assert err <= 1e-8
    assert elapsed < 1.0


@pytest.mark.criterion(2)
def test_known_radii(record_property):
    start = time.perf_counter()
    r_hyp = cons.solve_radius(geo.make_model(HYP), -1.0, 1.0)
    r_sph = cons.solve_radius(geo.make_model(SPH), -1.0, 1.0)
    elapsed = time.perf_counter() - start
    e1, e2 = abs(r_hyp - math.log(3)), abs(r_sph - 2 * math.atan(0.5))
    record_property("summary", f"|r0 - ln 3| = {e1:.1e}, |r0 - 2 atan(1/2)| = {e2:.1e}, {elapsed:.3f} s")
    assert e1 <= 1e-10 and e2 <= 1e-10
    assert elapsed < 0.1


@pytest.mark.criterion(3)
def test_ode_quadrature_agreement(constructions, record_property):
    built, elapsed = constructions
    worst = max(ver.method_agreement_check(q, o).measured for _, _, q, o in built)
    record_property("summary", f"{len(built)} constructions, sup |u_ode - u_quad| = {worst:.1e}, {elapsed:.2f} s")
    assert worst <= 1e-6
    assert elapsed < 5.0


@pytest.mark.criterion(3)
@pytest.mark.parametrize("spec,variant", NON_MONOTONE)
def test_non_monotone_case_is_refused(spec, variant, record_property):
    record_property("summary", "corollary_unweighted(spherical(2,1),c=1) weighted: ratio not monotone, refused")
    with pytest.raises(cons.NonMonotoneRatioError):
        cons.build_profile_quadrature(geo.make_model(spec), -1.0, variant)


@pytest.mark.criterion(4)
def test_curvature_residual(constructions, record_property):
    built, _ = constructions
    worst = max(ver.curvature_residual(s).measured for _, _, q, o in built for s in (q, o))
    record_property("summary", f"sup |nH - nH0| over both methods = {worst:.1e}")
    assert worst <= 1e-5


@pytest.mark.criterion(5)
def test_height_bounds_on_corollary(record_property):
    m = geo.make_model({"name": "corollary_weighted", "base": HYP, "c": 1.0})
    sol = cons.build_profile_quadrature(m, -1.0, "weighted")
    top = float(sol.weighted_height().max())
    upper = math.exp(0.5 * math.log(math.sinh(1.0)))
    checks = {c.name: c for c in ver.height_bound_check(sol)}
    a, b = checks["height_theorem_a"], checks["height_integral"]
    record_property("summary", f"max u e^-psi = {top:.6f}, margins: integral {b.margin:.4f} <= theorem A {a.margin:.4f}")
    assert sol.r0 == pytest.approx(1.0, abs=1e-10)
    assert 1.0 <= top <= upper
    assert a.margin >= 0 and b.margin >= 0
    assert b.margin <= a.margin


@pytest.mark.criterion(6)
def test_flux_identity(constructions, record_property):
    built, _ = constructions
    worst = max(ver.flux_identity_check(s).measured for _, _, q, o in built for s in (q, o))
    record_property("summary", f"sup flux defect over both methods = {worst:.1e}")
    assert worst <= 1e-8


@pytest.fixture(scope="module")
def hemisphere():
    return cons.build_profile_ode(geo.euclidean(2), -1.0, "weighted")


@pytest.mark.criterion(7)
@pytest.mark.parametrize("R", [0.25, 0.5, 1.0])
@pytest.mark.parametrize("delta", [1.0, 2.0])
@pytest.mark.parametrize("D", [0.0, 2.0])
def test_volume_lemma(hemisphere, R, delta, D, record_property):
    contain, lemma = ver.volume_lemma_check(hemisphere, R, delta, D)
    record_property("summary", "containment and volume inequality on 12 (R, delta, D) cases")
    assert contain.passed and lemma.passed
    if (R, delta, D) == (1.0, 1.0, 0.0):
        cap = 2 * math.pi * (1 - math.cos(1.0))
        record_property("summary", f"cap area defect {abs(lemma.measured - cap):.1e}")
        assert lemma.measured == pytest.approx(cap, abs=1e-8)


@pytest.mark.criterion(8)
def test_volume_growth(record_property):
    flat = ver.volume_growth_probe(geo.euclidean(2), 1.0, np.linspace(5, 20, 7))
    hyp = ver.volume_growth_probe(geo.make_model(HYP), 1.0, np.linspace(5, 20, 7))
    record_property("summary", f"euclidean slope {flat.measured:.4f}, hyperbolic slope {hyp.measured:.2f} ({hyp.status})")
    assert flat.measured == pytest.approx(2.0, abs=0.02) and flat.passed
    assert hyp.measured >= 2.5 and not hyp.passed


@pytest.mark.criterion(9)
def test_property_suites(record_property):
    import test_properties as props

    start = time.perf_counter()
    props.test_solution_invariants()
    elapsed = time.perf_counter() - start
    record_property("summary", f"200 randomized cases in {elapsed:.1f} s")
    assert elapsed < 60.0
