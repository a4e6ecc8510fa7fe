"""Rotationally symmetric weighted model manifolds.

A model is ``P = [0, R) x_xi S^{n-1}`` with metric ``dr^2 + xi(r)^2 dtheta^2``
and a radial weight ``psi = -log|Y|``.  Weighted densities carry the factor
``exp(-k psi)``: ``k = 2`` is the weighted-mean-curvature setting, ``k = 1``
the plain mean-curvature setting, ``k = 0`` the Riemannian one.  The sphere
area ``|S^{n-1}|`` is left out of every area and volume, as in the usual
normalisation of the rotational problem.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import expr
from .quadrature import DEFAULT, QuadratureConfig, cumulative, integrate

R_MAX_DEFAULT = 50.0
# below this radius the ratio A/V is replaced by its leading term n/r
SMALL_R = 1e-7
DERIV_TOL = 1e-6


class ModelError(ValueError):
    """Model definition rejected; ``check`` names the failed test."""

    def __init__(self, message: str, check: str = "", r: float | None = None):
        self.check = check
        self.r = r
        where = f" at r={r:.6g}" if r is not None else ""
        super().__init__(f"{message}{where}" + (f" [{check}]" if check else ""))


class DomainRangeError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ModelManifold:
    n: int
    R: float
    xi: Callable
    xi_prime: Callable
    psi: Callable
    psi_prime: Callable
    label: str
    spec: dict = field(default_factory=dict)
    R_max: float = R_MAX_DEFAULT

    @property
    def r_cap(self) -> float:
        return self.R if math.isfinite(self.R) else self.R_max


def sphere_area(n: int) -> float:
    """Area of the unit sphere ``S^{n-1}``."""
    return 2 * math.pi ** (n / 2) / math.gamma(n / 2)


# --- warping-function families ---------------------------------------------


def _coth_minus_inv(x):
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-2
    xs = np.where(small, 1.0, x)
    x2 = x * x
    series = x * (1 / 3 - x2 * (1 / 45 - x2 * (2 / 945 - x2 / 4725)))
    with np.errstate(all="ignore"):
        direct = 1 / np.tanh(xs) - 1 / xs
    return np.where(small, series, direct)


def _cot_minus_inv(x):
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-2
    xs = np.where(small, 1.0, x)
    x2 = x * x
    series = -x * (1 / 3 + x2 * (1 / 45 + x2 * (2 / 945 + x2 / 4725)))
    with np.errstate(all="ignore"):
        direct = 1 / np.tan(xs) - 1 / xs
    return np.where(small, series, direct)


def _sinhc(x):
    x = np.asarray(x, dtype=float)
    xs = np.where(x == 0, 1.0, x)
    return np.where(x == 0, 1.0, np.sinh(xs) / xs)


def _sinc(x):
    x = np.asarray(x, dtype=float)
    xs = np.where(x == 0, 1.0, x)
    return np.where(x == 0, 1.0, np.sin(xs) / xs)


def _family(name: str, kappa: float):
    """Return ``(xi, xi', log(xi/r), d/dr log(xi/r), R)`` for a base family."""
    if name == "euclidean":
        return (
            lambda r: np.asarray(r, dtype=float) * 1.0,
            lambda r: np.ones_like(np.asarray(r, dtype=float)),
            lambda r: np.zeros_like(np.asarray(r, dtype=float)),
            lambda r: np.zeros_like(np.asarray(r, dtype=float)),
            math.inf,
        )
    a = math.sqrt(kappa)
    if name == "hyperbolic":
        return (
            lambda r: np.sinh(a * np.asarray(r, dtype=float)) / a,
            lambda r: np.cosh(a * np.asarray(r, dtype=float)),
            lambda r: np.log(_sinhc(a * np.asarray(r, dtype=float))),
            lambda r: a * _coth_minus_inv(a * np.asarray(r, dtype=float)),
            math.inf,
        )
    if name == "spherical":
        return (
            lambda r: np.sin(a * np.asarray(r, dtype=float)) / a,
            lambda r: np.cos(a * np.asarray(r, dtype=float)),
            lambda r: np.log(_sinc(a * np.asarray(r, dtype=float))),
            lambda r: a * _cot_minus_inv(a * np.asarray(r, dtype=float)),
            math.pi / a,
        )
    raise ModelError(f"unknown base model {name!r}", "unknown_model")


def _zero(r):
    return np.zeros_like(np.asarray(r, dtype=float))


def _scalarize(fn):
    def wrapped(r):
        out = fn(r)
        return float(out) if np.ndim(r) == 0 else out

    return wrapped


BUILTIN_MODELS = {
    "euclidean": {"n": "integer >= 2"},
    "hyperbolic": {"n": "integer >= 2", "kappa": "real > 0 (curvature -kappa)"},
    "spherical": {"n": "integer >= 2", "kappa": "real > 0 (curvature kappa)"},
    "corollary_weighted": {
        "base": "euclidean | hyperbolic | spherical model object",
        "c": "real > 0; psi = c (n-1)/2 log(xi/r)",
    },
    "corollary_unweighted": {
        "base": "euclidean | hyperbolic | spherical model object",
        "c": "real > 0; psi = c (n-1) log(xi/r)",
    },
    "custom": {
        "n": "integer >= 2",
        "R": "positive real or null for +infinity",
        "xi": "expression in r",
        "xi_prime": "expression in r",
        "psi": "expression in r",
        "psi_prime": "expression in r",
        "params": "object name -> real (optional)",
        "label": "string (optional)",
    },
}


def _dimension(spec) -> int:
    n = spec.get("n", 2)
    if isinstance(n, bool) or not isinstance(n, (int, float)) or int(n) != n or n < 2:
        raise ModelError(f"dimension n must be an integer >= 2, got {n!r}", "dimension")
    return int(n)


def _kappa(spec) -> float:
    kappa = spec.get("kappa", 1.0)
    if not isinstance(kappa, (int, float)) or not kappa > 0:
        raise ModelError(f"kappa must be a positive real, got {kappa!r}", "kappa")
    return float(kappa)


def make_model(spec: dict, validate: bool = True) -> ModelManifold:
    """Build a model from a JSON-style spec such as ``{"name": "hyperbolic", "n": 2}``."""
    if not isinstance(spec, dict) or "name" not in spec:
        raise ModelError("model spec must be an object with a 'name'", "unknown_model")
    name = spec["name"]
    r_max = float(spec.get("R_max", R_MAX_DEFAULT))
    if name in ("euclidean", "hyperbolic", "spherical"):
        n = _dimension(spec)
        kappa = 1.0 if name == "euclidean" else _kappa(spec)
        xi, dxi, _, _, R = _family(name, kappa)
        label = f"{name}(n={n})" if name == "euclidean" else f"{name}(n={n}, kappa={kappa:g})"
        canon = {"name": name, "n": n} if name == "euclidean" else {"name": name, "n": n, "kappa": kappa}
        m = ModelManifold(n, R, _scalarize(xi), _scalarize(dxi), _scalarize(_zero), _scalarize(_zero),
                          label, canon, r_max)
    elif name in ("corollary_weighted", "corollary_unweighted"):
        base = spec.get("base", {"name": "hyperbolic", "n": 2, "kappa": 1.0})
        if not isinstance(base, dict) or base.get("name") not in ("euclidean", "hyperbolic", "spherical"):
            raise ModelError("corollary base must be euclidean, hyperbolic or spherical", "unknown_model")
        c = spec.get("c", 1.0)
        if not isinstance(c, (int, float)) or not c > 0:
            raise ModelError(f"c must be a positive real, got {c!r}", "c")
        c = float(c)
        n = _dimension(base)
        kappa = 1.0 if base["name"] == "euclidean" else _kappa(base)
        xi, dxi, logratio, dlogratio, R = _family(base["name"], kappa)
        scale = c * (n - 1) / (2 if name == "corollary_weighted" else 1)
        base_canon = make_model(base, validate=False).spec
        label = f"{name}({make_model(base, validate=False).label}, c={c:g})"
        m = ModelManifold(
            n, R, _scalarize(xi), _scalarize(dxi),
            _scalarize(lambda r: scale * logratio(r)),
            _scalarize(lambda r: scale * dlogratio(r)),
            label, {"name": name, "base": base_canon, "c": c}, r_max,
        )
    elif name == "custom":
        m = _custom(spec, r_max)
    else:
        raise ModelError(f"unknown model name {name!r}", "unknown_model")
    if validate:
        validate_model(m)
    return m


def _custom(spec, r_max) -> ModelManifold:
    n = _dimension(spec)
    R = spec.get("R")
    R = math.inf if R is None else float(R)
    if not R > 0:
        raise ModelError("R must be positive", "radius")
    params = {str(k): float(v) for k, v in (spec.get("params") or {}).items()}
    asts = {}
    for key in ("xi", "xi_prime", "psi", "psi_prime"):
        src = spec.get(key, "0" if key.startswith("psi") else None)
        if src is None:
            raise ModelError(f"custom model needs expression {key!r}", key)
        try:
            asts[key] = expr.parse(str(src), params.keys())
        except expr.ExprError as exc:
            raise ModelError(f"{key}: {exc}", key) from exc

    def fn(ast):
        return lambda r: ast(r, params)

    canon = {"name": "custom", "n": n, "R": None if math.isinf(R) else R,
             **{k: str(spec.get(k, "0")) for k in asts}, "params": params}
    label = spec.get("label") or f"custom(n={n}, xi={spec['xi']})"
    return ModelManifold(n, R, fn(asts["xi"]), fn(asts["xi_prime"]), fn(asts["psi"]),
                         fn(asts["psi_prime"]), label, canon, r_max)


def euclidean(n: int = 2) -> ModelManifold:
    return make_model({"name": "euclidean", "n": n})


def hyperbolic(n: int = 2, kappa: float = 1.0) -> ModelManifold:
    return make_model({"name": "hyperbolic", "n": n, "kappa": kappa})


def spherical(n: int = 2, kappa: float = 1.0) -> ModelManifold:
    return make_model({"name": "spherical", "n": n, "kappa": kappa})


def corollary_weighted(base: dict, c: float = 1.0) -> ModelManifold:
    return make_model({"name": "corollary_weighted", "base": base, "c": c})


def corollary_unweighted(base: dict, c: float = 1.0) -> ModelManifold:
    return make_model({"name": "corollary_unweighted", "base": base, "c": c})


def custom(n, xi, xi_prime, psi="0", psi_prime="0", R=None, params=None, label=None) -> ModelManifold:
    return make_model({"name": "custom", "n": n, "R": R, "xi": xi, "xi_prime": xi_prime,
                       "psi": psi, "psi_prime": psi_prime, "params": params or {}, "label": label})


def _call(fn, r, check):
    try:
        return float(fn(r))
    except expr.DomainError as exc:
        raise ModelError(f"{check}: {exc}", check, r) from exc


def validation_sample(m: ModelManifold, count: int = 12) -> np.ndarray:
    cap = m.r_cap if math.isfinite(m.R) else min(m.R_max, 10.0)
    geo = np.geomspace(1e-3, 0.5, count // 2) * cap
    uni = np.linspace(0.5, 0.9, count - count // 2) * cap
    return np.concatenate([geo, uni])


def validate_model(m: ModelManifold) -> None:
    """Check the model conditions; raise :class:`ModelError` on the first failure."""
    scale = min(1.0, m.r_cap / 2)
    xi0 = _call(m.xi, 0.0, "xi(0)=0")
    if abs(xi0) > 1e-12:
        raise ModelError(f"xi(0) = {xi0:.3g}, expected 0", "xi(0)=0", 0.0)
    h = 1e-6 * scale
    slope = _call(m.xi, h, "xi'(0)=1") / h
    if abs(slope - 1) > 1e-5:
        raise ModelError(f"xi(h)/h = {slope:.8g}, expected 1", "xi'(0)=1", h)
    try:
        dpsi0 = float(m.psi_prime(0.0))
    except expr.DomainError:
        dpsi0 = _call(m.psi_prime, 1e-8 * scale, "psi'(0)=0")
    if abs(dpsi0) > 1e-6:
        raise ModelError(f"psi'(0) = {dpsi0:.3g}, expected 0", "psi'(0)=0", 0.0)
    for r in np.linspace(0, m.r_cap if math.isfinite(m.R) else min(m.R_max, 10.0), 201)[1:-1]:
        if not _call(m.xi, r, "xi>0") > 0:
            raise ModelError("xi must be positive on (0, R)", "xi>0", float(r))
    sample = validation_sample(m)
    for name, f, fp in (("xi_prime", m.xi, m.xi_prime), ("psi_prime", m.psi, m.psi_prime)):
        try:
            dev = expr.derivative_deviation(f, fp, sample)
        except expr.DomainError as exc:
            raise ModelError(f"{name}: {exc}", f"derivative_consistency:{name}") from exc
        if not dev <= DERIV_TOL:
            raise ModelError(f"{name} deviates from the central difference by {dev:.3g}",
                             f"derivative_consistency:{name}")


# --- weighted densities ----------------------------------------------------


def _check_range(m: ModelManifold, r):
    rr = np.asarray(r, dtype=float)
    if np.any(rr < 0) or np.any(rr >= m.R) or np.any(~np.isfinite(rr)):
        raise DomainRangeError(f"radius outside [0, R) with R={m.R}")


def area_density(m: ModelManifold, r, k: float):
    """``exp(-k psi(r)) xi(r)^(n-1)``."""
    _check_range(m, r)
    return _area(m, r, k)


def _area(m, r, k):
    return np.exp(-k * m.psi(r)) * m.xi(r) ** (m.n - 1)


def area_density_slope(m: ModelManifold, r, k: float):
    """d/dr of :func:`area_density`, written without the 1/r singularity."""
    n = m.n
    xi = m.xi(r)
    return np.exp(-k * m.psi(r)) * xi ** (n - 2) * ((n - 1) * m.xi_prime(r) - k * m.psi_prime(r) * xi)


def cylinder_curvature(m: ModelManifold, r, k: float):
    """``-k psi' + (n-1) xi'/xi``: n times the mean curvature of the cylinder over
    the geodesic sphere (weighted by ``k``)."""
    return -k * m.psi_prime(r) + (m.n - 1) * m.xi_prime(r) / m.xi(r)


def ball_volume(m: ModelManifold, r: float, k: float, q: QuadratureConfig = DEFAULT) -> float:
    """``integral_0^r exp(-k psi) xi^(n-1) dtau``."""
    _check_range(m, r)
    if r == 0:
        return 0.0
    return integrate(lambda x: _area(m, x, k), 0.0, float(r), q).value


def ball_volumes(m: ModelManifold, rs, k: float, q: QuadratureConfig = DEFAULT):
    """Vectorised :func:`ball_volume` over an array of radii."""
    _check_range(m, rs)
    return cumulative(lambda x: _area(m, x, k), rs, 0.0, q)


def isoperimetric_ratio(m: ModelManifold, r: float, k: float, q: QuadratureConfig = DEFAULT) -> float:
    """``A_k(r) / V_k(r)``; for ``r < SMALL_R`` the leading term ``n/r``."""
    if not 0 < r < m.R:
        raise DomainRangeError(f"ratio needs 0 < r < R, got r={r}")
    if r < SMALL_R:
        return m.n / r
    return float(_area(m, r, k)) / ball_volume(m, r, k, q)


def ratio_curve(m: ModelManifold, rs, k: float, q: QuadratureConfig = DEFAULT):
    rs = np.asarray(rs, dtype=float)
    out = np.empty_like(rs)
    small = rs < SMALL_R
    out[small] = m.n / rs[small]
    if np.any(~small):
        big = rs[~small]
        out[~small] = _area(m, big, k) / ball_volumes(m, big, k, q)
    return out


@dataclass(frozen=True)
class ScanResult:
    passed: bool
    interval: tuple | None
    radii: np.ndarray
    ratios: np.ndarray

    def __bool__(self):
        return self.passed


def scan_grid(m: ModelManifold, resolution: int) -> np.ndarray:
    cap = m.r_cap
    eps = 1e-6 * min(1.0, cap)
    geo = np.geomspace(eps, 0.05 * cap, resolution // 2, endpoint=False)
    uni = np.linspace(0.05 * cap, cap - eps, resolution - resolution // 2)
    return np.concatenate([geo, uni])


def ratio_monotone_scan(m: ModelManifold, k: float, resolution: int = 128,
                        q: QuadratureConfig = DEFAULT) -> ScanResult:
    """Check that ``A_k/V_k`` is non-increasing on a composite grid over (eps, R-eps)."""
    if resolution < 16:
        raise ValueError("grid resolution must be >= 16")
    rs = scan_grid(m, resolution)
    vals = ratio_curve(m, rs, k, q)
    rise = np.diff(vals) > 1e-10 * (1 + np.abs(vals[:-1]))
    if np.any(rise):
        i = int(np.argmax(rise))
        return ScanResult(False, (float(rs[i]), float(rs[i + 1])), rs, vals)
    return ScanResult(True, None, rs, vals)


def psi_second_derivative(m: ModelManifold, r: float) -> float:
    h = 1e-5 * max(1.0, r)
    return (float(m.psi_prime(r + h)) - float(m.psi_prime(r - h))) / (2 * h)


def bakry_emery_yy(m: ModelManifold, r: float) -> float:
    """Radial ``Ric_psi(Y, Y) = exp(-2 psi) (psi'' + (n-1) xi'/xi psi' - psi'^2)``."""
    if not 0 < r < m.R:
        raise DomainRangeError(f"needs 0 < r < R, got r={r}")
    dpsi = float(m.psi_prime(r))
    lap = psi_second_derivative(m, r) + (m.n - 1) * float(m.xi_prime(r)) / float(m.xi(r)) * dpsi - dpsi ** 2
    return math.exp(-2 * float(m.psi(r))) * lap
