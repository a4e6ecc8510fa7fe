"""Rotationally symmetric Killing graphs of constant (weighted) mean curvature.

A profile is a radial height ``u(r)`` on ``[0, r0]`` with ``u(r0) = 0``,
``u' <= 0`` and ``H0 < 0``.  With the weight exponent ``k`` (2 for the
weighted problem, 1 for the plain one) the radial equation has the first
integral

    (u'/W) A_k(r) = n H0 V_k(r),    W = sqrt(exp(2 psi) + u'^2),

so ``sin(phi) = -u'/W = n|H0| V_k / A_k``.  Two independent builders are
provided: quadrature of the slope from the axis, and integration of the
arc-length system from the boundary circle.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from . import geometry as geo
from .geometry import ModelManifold, area_density_slope, ball_volume, ball_volumes, isoperimetric_ratio
from .quadrature import DEFAULT, QuadratureConfig, QuadratureError, cumulative, row_means

VARIANT_K = {"weighted": 2.0, "unweighted": 1.0}
DEFAULT_GRID = 257
ODE_RTOL = 1e-12
ODE_ATOL = 1e-14
# the ODE stops this fraction of r0 short of the axis; a series closes the cap
AXIS_STOP = 1e-2


class ConstructionError(ArithmeticError):
    """The requested graph could not be built."""


class RadiusError(ConstructionError):
    def __init__(self, message, infimum=None, supremum=None):
        self.infimum = infimum
        self.supremum = supremum
        super().__init__(message)


class NonMonotoneRatioError(ConstructionError):
    def __init__(self, interval):
        self.interval = interval
        super().__init__(
            "isoperimetric ratio is not non-increasing on (0, R); first rise in "
            f"[{interval[0]:.6g}, {interval[1]:.6g}]"
        )


class GraphError(ConstructionError):
    """The meridian folds back (or turns early) so the surface is no graph."""

    def __init__(self, message, state=None):
        self.state = state
        super().__init__(message)


class SignConventionError(ValueError):
    pass


def weight_exponent(variant: str, k: float | None = None) -> float:
    if variant not in VARIANT_K:
        raise ValueError(f"variant must be 'weighted' or 'unweighted', got {variant!r}")
    return VARIANT_K[variant] if k is None else float(k)


@dataclass(frozen=True, eq=False)
class GraphProfile:
    variant: str
    r: np.ndarray
    u: np.ndarray
    u_prime: np.ndarray
    W: np.ndarray
    phi: np.ndarray
    t: np.ndarray

    def __len__(self):
        return self.r.size


@dataclass(frozen=True, eq=False)
class OdeTrace:
    """Dense output of the arc-length system, time measured from the boundary.

    Below ``r_end`` the cap is closed by odd/even series in ``r`` whose
    leading coefficient is exact (``phi ~ |H0| r``) and whose next
    coefficient is fitted to the state at ``r_end``.
    """

    sol: object
    t_end: float
    length: float
    r_end: float
    s_end: float
    psi0: float
    alpha: float  # phi ~ alpha r + beta r^3
    beta: float
    gamma: float  # exp(psi) tan(phi) ~ exp(psi0) (alpha r + gamma r^3)
    delta: float  # 1 / cos(phi) ~ 1 + delta r^2

    def state(self, tau):
        """``(r, s, phi)`` at boundary time ``tau``."""
        tau = np.asarray(tau, dtype=float)
        r = np.empty(tau.shape)
        s = np.empty(tau.shape)
        phi = np.empty(tau.shape)
        inside = tau <= self.t_end
        if np.any(inside):
            r[inside], s[inside], phi[inside] = self.sol(tau[inside])
        if np.any(~inside):
            rho = np.clip(self.length - tau[~inside], 0.0, None)
            rr = rho - self.delta * rho ** 3 / 3
            r[~inside] = rr
            s[~inside] = self.s_end + self._cap_height(self.r_end) - self._cap_height(rr)
            phi[~inside] = self.alpha * rr + self.beta * rr ** 3
        return r, s, phi

    def _cap_height(self, r):
        """``int_0^r exp(psi) tan(phi)`` from the series."""
        return math.exp(self.psi0) * (self.alpha * r ** 2 / 2 + self.gamma * r ** 4 / 4)

    def apex_height(self):
        return self.s_end + self._cap_height(self.r_end)


@dataclass(frozen=True, eq=False)
class GraphSolution:
    profile: GraphProfile
    H0: float
    r0: float
    model: ModelManifold
    k: float
    method: str
    diagnostics: dict = field(default_factory=dict)
    trace: OdeTrace | None = None
    field: "SlopeField | None" = None

    @property
    def variant(self):
        return self.profile.variant

    @property
    def max_height(self):
        return float(np.max(self.profile.u))

    def weighted_height(self):
        return self.profile.u * np.exp(-np.asarray(self.model.psi(self.profile.r)))


# --- radius and flux --------------------------------------------------------


def _target(m: ModelManifold, H0: float) -> float:
    return m.n * abs(H0)


def solve_radius(m: ModelManifold, H0: float, k: float, q: QuadratureConfig = DEFAULT,
                 check_monotone: bool = True) -> float:
    """Radius where ``A_k/V_k = n|H0|``, by bisection on the decreasing ratio.

    The returned radius is the lower end of the final bracket, so the ratio
    there is never below the target.
    """
    if not H0 < 0:
        raise SignConventionError(f"H0 must be negative (got {H0}); boundary at u=0 needs H0 < 0")
    if check_monotone:
        scan = geo.ratio_monotone_scan(m, k, q=q)
        if not scan.passed:
            raise NonMonotoneRatioError(scan.interval)
    target = _target(m, H0)
    hi = geo.scan_grid(m, 16)[-1]

    def ratio(r):
        return isoperimetric_ratio(m, r, k, q)

    try:
        at_hi = ratio(hi)
    except QuadratureError:
        at_hi = math.inf
    if at_hi >= target:
        raise RadiusError(
            f"n|H0| = {target:.6g} is not attained: the ratio stays above {at_hi:.6g} on (0, {hi:.6g})",
            infimum=at_hi,
        )
    lo = min(hi / 2, m.n / target / 2)
    while ratio(lo) < target:
        lo /= 2
        if lo < geo.SMALL_R:
            raise RadiusError(f"ratio below n|H0| = {target:.6g} near the pole", supremum=ratio(lo))
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if ratio(mid) >= target:
            lo = mid
        else:
            hi = mid
    return lo


def flux_integral(m: ModelManifold, r, H0: float, k: float, q: QuadratureConfig = DEFAULT):
    """``I(r) = n H0 V_k(r)``; scalar or array ``r``."""
    if np.ndim(r) == 0:
        return m.n * H0 * ball_volume(m, float(r), k, q)
    return m.n * H0 * ball_volumes(m, np.asarray(r, dtype=float), k, q)


def radial_grid(r0: float, size: int = DEFAULT_GRID):
    """Radii on ``[0, r0]`` with ``w = sqrt(r0 - r)`` at Chebyshev-Lobatto nodes.

    Returns ``(r, w)``; nodes cluster at both the axis and the boundary.
    """
    if size < 9:
        raise ValueError("grid size must be >= 9")
    x = 0.5 * (1 - np.cos(np.pi * np.arange(size) / (size - 1)))
    x[0], x[-1] = 0.0, 1.0
    w = math.sqrt(r0) * (1 - x)
    r = r0 * (1 - (1 - x) ** 2)
    r[0], r[-1] = 0.0, r0
    return r, w


# --- slope field --------------------------------------------------------------


class SlopeField:
    """``sin(phi)``, ``cos(phi)`` and their gap ``D = A - n|H0| V`` at any radius.

    ``D`` vanishes at ``r0``, so close to the boundary it is computed as
    ``(r0 - r) * mean(n|H0| A - A')`` over ``[r, r0]`` rather than as a
    difference; near the axis ``V`` itself is integrated.
    """

    def __init__(self, m: ModelManifold, H0: float, k: float, r0: float, q: QuadratureConfig = DEFAULT):
        self.m, self.H0, self.k, self.r0, self.q = m, H0, k, r0, q
        self.nh = _target(m, H0)

    def _area(self, r):
        return np.exp(-self.k * self.m.psi(r)) * self.m.xi(r) ** (self.m.n - 1)

    def _gap_rate(self, r):
        return self.nh * self._area(r) - area_density_slope(self.m, r, self.k)

    def terms(self, r, w=None):
        """Return ``(A, s, E, D)`` with ``E = D / (r0 - r)``.

        ``w = sqrt(r0 - r)`` may be passed to avoid the cancellation in ``r0 - r``.
        """
        r = np.clip(np.asarray(r, dtype=float), 0.0, self.r0)
        w2 = (self.r0 - r) if w is None else np.asarray(w, dtype=float) ** 2
        flat = r.ravel()
        w2f = np.broadcast_to(w2, r.shape).ravel()
        A = self._area(flat)
        s = np.zeros(flat.size)
        E = np.zeros(flat.size)
        D = np.zeros(flat.size)
        pos = flat > 0
        if np.any(pos):
            rp = flat[pos]
            V = rp * row_means(self._area, np.zeros(rp.size), rp, self.q)
            s[pos] = self.nh * V / A[pos]
            D[pos] = A[pos] - self.nh * V
        near = s > 0.5
        if np.any(near):
            E[near] = row_means(self._gap_rate, flat[near], flat[near] + w2f[near], self.q)
            D[near] = w2f[near] * E[near]
            s[near] = 1 - D[near] / A[near]
        far = ~near & (w2f > 0)
        E[far] = D[far] / w2f[far]
        shape = r.shape
        return A.reshape(shape), s.reshape(shape), E.reshape(shape), D.reshape(shape)

    def _check(self, A, E, D):
        if np.any(E <= 0) or np.any(D > A):
            raise ConstructionError(
                "slope denominator vanishes inside (0, r0): the isoperimetric ratio "
                "hypothesis is violated"
            )

    def height_integrand(self, w):
        """``d u / d w`` with ``r = r0 - w^2`` (bounded at ``w = 0``)."""
        r = self.r0 - w * w
        A, s, E, D = self.terms(r, w)
        self._check(A, E, D)
        return 2 * np.exp(self.m.psi(r)) * s * A / np.sqrt(E * (2 * A - D))

    def length_integrand(self, w):
        r = self.r0 - w * w
        A, s, E, D = self.terms(r, w)
        self._check(A, E, D)
        return 2 * A / np.sqrt(E * (2 * A - D))

    def tan_integrand(self, w):
        """Like :meth:`height_integrand` without the ``exp(psi)`` factor."""
        r = self.r0 - w * w
        A, s, E, D = self.terms(r, w)
        self._check(A, E, D)
        return 2 * s * A / np.sqrt(E * (2 * A - D))

    def height(self, r):
        r = np.asarray(r, dtype=float)
        w = np.sqrt(np.clip(self.r0 - r, 0.0, None))
        return cumulative(self.height_integrand, w, 0.0, self.q)

    def angles(self, r, w=None):
        """``(sin phi, cos phi, phi)`` with ``phi = pi/2 - 2 asin(sqrt(D / 2A))``."""
        A, s, E, D = self.terms(r, w)
        with np.errstate(invalid="ignore", divide="ignore"):
            half = np.where(A > 0, D / (2 * A), 0.5)
        phi = np.pi / 2 - 2 * np.arcsin(np.sqrt(np.clip(half, 0.0, 0.5)))
        c = np.where(A > 0, np.sqrt(np.clip(D * (2 * A - D), 0.0, None)) / np.where(A > 0, A, 1), 1.0)
        return np.where(A > 0, s, 0.0), c, phi


def _profile_from_angles(m, variant, r, u, sin_phi, cos_phi, phi, t):
    e_psi = np.exp(np.asarray(m.psi(r), dtype=float))
    with np.errstate(divide="ignore"):
        u_prime = np.where(cos_phi > 0, -e_psi * sin_phi / np.where(cos_phi > 0, cos_phi, 1), -np.inf)
        W = np.where(cos_phi > 0, e_psi / np.where(cos_phi > 0, cos_phi, 1), np.inf)
    return GraphProfile(variant, r, u, u_prime, W, phi, t)


# --- builders -----------------------------------------------------------------


def flat_profile(m: ModelManifold, r0: float, variant: str = "weighted", k: float | None = None,
                 grid_size: int = DEFAULT_GRID) -> GraphSolution:
    """The ``H0 = 0`` graph over ``B_r0``: a flat disk ``u = 0``."""
    k = weight_exponent(variant, k)
    if not 0 < r0 < m.R:
        raise RadiusError(f"r0 must lie in (0, R), got {r0}")
    r, _ = radial_grid(r0, grid_size)
    zero = np.zeros_like(r)
    prof = GraphProfile(variant, r, zero, zero.copy(), np.exp(np.asarray(m.psi(r), dtype=float)),
                        zero.copy(), r.copy())
    return GraphSolution(prof, 0.0, r0, m, k, "flat", {"length": r0})


def build_profile_quadrature(m: ModelManifold, H0: float, variant: str = "weighted",
                             k: float | None = None, grid_size: int = DEFAULT_GRID,
                             q: QuadratureConfig = DEFAULT, r0: float | None = None) -> GraphSolution:
    """Integrate ``u' = -exp(psi) tan(phi)`` from the boundary inwards.

    Every panel uses ``r = r0 - w^2`` so the square-root blow-up of the slope
    at ``r0`` becomes a bounded integrand.
    """
    k = weight_exponent(variant, k)
    if H0 == 0:
        if r0 is None:
            raise RadiusError("H0 = 0 needs an explicit r0")
        return flat_profile(m, r0, variant, k, grid_size)
    if H0 > 0:
        raise SignConventionError(f"H0 must be negative (got {H0}); boundary at u=0 needs H0 < 0")
    if r0 is None:
        r0 = solve_radius(m, H0, k, q)
    sf = SlopeField(m, H0, k, r0, q)
    r, w = radial_grid(r0, grid_size)
    u = cumulative(sf.height_integrand, w, 0.0, q)
    to_boundary = cumulative(sf.length_integrand, w, 0.0, q)
    length = float(to_boundary[0])
    t = length - to_boundary
    u[-1] = 0.0
    t[0], t[-1] = 0.0, length
    sin_phi, cos_phi, phi = sf.angles(r, w)
    sin_phi[0], cos_phi[0], phi[0] = 0.0, 1.0, 0.0
    sin_phi[-1], cos_phi[-1], phi[-1] = 1.0, 0.0, np.pi / 2
    prof = _profile_from_angles(m, variant, r, u, sin_phi, cos_phi, phi, t)
    diag = {"length": length, "grid_size": grid_size, "abs_tol": q.abs_tol, "rel_tol": q.rel_tol}
    return GraphSolution(prof, H0, r0, m, k, "quadrature", diag, field=sf)


def _rhs(m: ModelManifold, H0: float, k: float):
    n = m.n
    nH0 = n * H0

    def f(t, y):
        r, _, phi = y
        sp = math.sin(phi)
        coef = -k * float(m.psi_prime(r)) + (n - 1) * float(m.xi_prime(r)) / float(m.xi(r))
        return [-math.cos(phi), math.exp(float(m.psi(r))) * sp, nH0 + sp * coef]

    return f


def build_profile_ode(m: ModelManifold, H0: float, variant: str = "weighted", k: float | None = None,
                      grid_size: int = DEFAULT_GRID, q: QuadratureConfig = DEFAULT,
                      rtol: float = ODE_RTOL, atol: float = ODE_ATOL, r0: float | None = None) -> GraphSolution:
    """Integrate the arc-length system from the boundary circle toward the axis.

    State ``(r, s, phi)`` with time ``tau`` running from the boundary:
    ``r' = -cos phi``, ``s' = exp(psi) sin phi`` and
    ``phi' = n H0 + sin phi (-k psi' + (n-1) xi'/xi)``; ``s`` is the height.
    """
    k = weight_exponent(variant, k)
    if H0 == 0:
        raise RadiusError("H0 = 0 has no ODE construction; use flat_profile")
    if r0 is None:
        r0 = solve_radius(m, -abs(H0), k, q)
    r_stop = AXIS_STOP * r0
    rhs = _rhs(m, H0, k)

    def hit_stop(t, y):
        return y[0] - r_stop

    def turned(t, y):
        return y[2]

    def folded(t, y):
        return (np.pi / 2 + 1e-9) - y[2]

    def outside(t, y):
        return r0 * (1 + 1e-12) - y[0]

    for ev in (hit_stop, turned, folded, outside):
        ev.terminal = True
        ev.direction = -1
    t_max = 20 * (r0 + math.pi / abs(H0))
    sol = solve_ivp(rhs, (0.0, t_max), [r0, 0.0, np.pi / 2], method="DOP853", rtol=rtol, atol=atol,
                    events=(hit_stop, turned, folded, outside), dense_output=True)
    last = sol.y[:, -1]
    if sol.status == -1:
        raise ConstructionError(f"ODE integration failed ({sol.message}); last state r={last[0]:.6g}, "
                                f"s={last[1]:.6g}, phi={last[2]:.6g}")
    if len(sol.t_events[2]) or len(sol.t_events[3]):
        raise GraphError("meridian folds past the vertical: the surface is not a graph "
                         "(H0 must be negative)", state=tuple(last))
    if len(sol.t_events[1]):
        raise GraphError(f"meridian turned horizontal at r={last[0]:.6g} before reaching the axis",
                         state=tuple(last))
    if not len(sol.t_events[0]):
        raise ConstructionError(f"axis not reached within arc length {t_max:.3g}")
    if np.any(np.diff(sol.y[0]) > 0):
        raise GraphError("r(t) is not monotone: fold detected", state=tuple(last))
    t_end = float(sol.t[-1])
    r_end, s_end, phi_end = (float(v) for v in last)
    a = abs(H0)
    psi0 = float(m.psi(0.0))
    beta = (phi_end - a * r_end) / r_end ** 3
    gamma = (math.exp(float(m.psi(r_end)) - psi0) * math.tan(phi_end) - a * r_end) / r_end ** 3
    delta = (1 / math.cos(phi_end) - 1) / r_end ** 2
    length = t_end + r_end + delta * r_end ** 3 / 3
    trace = OdeTrace(sol.sol, t_end, length, r_end, s_end, psi0, a, beta, gamma, delta)

    r, _ = radial_grid(r0, grid_size)
    tau = _invert_radius(sol, r, trace)
    rr, s, phi = trace.state(tau)
    u = s.copy()
    u[-1] = 0.0
    phi[-1] = np.pi / 2
    phi[0] = 0.0
    sin_phi, cos_phi = np.sin(phi), np.cos(phi)
    cos_phi[-1] = 0.0
    prof = _profile_from_angles(m, variant, r, u, sin_phi, cos_phi, phi, length - tau)
    diag = {
        "length": length,
        "grid_size": grid_size,
        "rtol": rtol,
        "atol": atol,
        "nfev": int(sol.nfev),
        "steps": int(sol.t.size - 1),
        "axis_phi_gap": abs(phi_end - a * r_end),
        "axis_sin_phi": math.sin(phi_end),
        "r_end": r_end,
    }
    return GraphSolution(prof, H0, r0, m, k, "ode", diag, trace=trace)


def _invert_radius(sol, targets, trace: OdeTrace):
    """Boundary time at which ``r(tau)`` equals each target radius."""
    ts, rs = sol.t, sol.y[0]
    tau = np.empty(targets.size)
    cap = targets < trace.r_end
    # arc length from the apex, from the series 1/cos(phi) ~ 1 + delta r^2
    rho = targets[cap]
    tau[cap] = trace.length - (rho + trace.delta * rho ** 3 / 3)
    body = ~cap
    goal = targets[body]
    # rs is decreasing: locate the step bracketing each goal
    j = np.searchsorted(-rs, -goal, side="left")
    j = np.clip(j, 1, ts.size - 1)
    lo, hi = ts[j - 1].copy(), ts[j].copy()
    x = 0.5 * (lo + hi)
    active = np.ones(x.size, dtype=bool)
    tol = 1e-15 * ts[-1]
    # safeguarded Newton with dr/dtau = -cos(phi); bisect when a step leaves the bracket
    for _ in range(60):
        idx = np.nonzero(active)[0]
        if idx.size == 0:
            break
        xa, la, ha, ga = x[idx], lo[idx], hi[idx], goal[idx]
        r, _, phi = sol.sol(xa)
        above = r > ga
        la = np.where(above, xa, la)
        ha = np.where(above, ha, xa)
        with np.errstate(divide="ignore", invalid="ignore"):
            newton = xa + (r - ga) / np.cos(phi)
        ok = np.isfinite(newton) & (newton >= la) & (newton <= ha)
        nxt = np.where(r == ga, xa, np.where(ok, newton, 0.5 * (la + ha)))
        settled = (np.abs(nxt - xa) <= tol) | (ha - la <= tol)
        x[idx], lo[idx], hi[idx] = nxt, la, ha
        active[idx[settled]] = False
    lo = hi = x
    tau[body] = np.where(goal >= rs[0], 0.0, 0.5 * (lo + hi))
    return tau


# --- closed forms ---------------------------------------------------------------


def corollary_profile(base: dict, c: float, H0: float, variant: str = "weighted",
                      grid_size: int = DEFAULT_GRID, q: QuadratureConfig = DEFAULT) -> GraphSolution:
    """The explicit corollary graphs with ``r0 = 1/|H0|``.

    The weighted form is ``u = int_r^r0 |H0| tau exp(psi) / sqrt(1 - H0^2 tau^2)``;
    the unweighted one is taken literally, without the ``exp(psi)`` factor.
    Neither is checked against the radial equation here (that is the
    verifier's job).
    """
    if not c > 0:
        raise ValueError("c must be positive")
    if not H0 < 0:
        raise SignConventionError(f"H0 must be negative (got {H0})")
    name = "corollary_weighted" if variant == "weighted" else "corollary_unweighted"
    m = geo.make_model({"name": name, "base": base, "c": c})
    k = weight_exponent(variant)
    a = abs(H0)
    r0 = 1 / a
    if not r0 < m.R:
        raise RadiusError(f"r0 = 1/|H0| = {r0:.6g} is not below R = {m.R:.6g}")
    weighted = variant == "weighted"

    def factor(x):
        return np.exp(m.psi(x)) if weighted else np.ones_like(x)

    def du(w):
        x = r0 - w * w
        # 1 - a x = a w^2, so the square root loses its zero at w = 0
        return 2 * a * x * factor(x) / np.sqrt(a * (1 + a * x))

    def dt(w):
        x = r0 - w * w
        slope2 = a * x * x * factor(x) ** 2 * np.exp(-2 * m.psi(x)) / (1 + a * x)
        return 2 * np.sqrt(w * w + slope2)

    r, w = radial_grid(r0, grid_size)
    u = cumulative(du, w, 0.0, q)
    to_boundary = cumulative(dt, w, 0.0, q)
    length = float(to_boundary[0])
    u[-1] = 0.0
    e_psi = np.exp(np.asarray(m.psi(r), dtype=float))
    with np.errstate(divide="ignore", invalid="ignore"):
        u_prime = -a * r * factor(r) / np.sqrt((1 - a * r) * (1 + a * r))
        W = np.sqrt(e_psi ** 2 + u_prime ** 2)
        phi = np.arcsin(np.clip(-u_prime / W, -1, 1))
    u_prime[-1], W[-1], phi[-1] = -np.inf, np.inf, np.pi / 2
    t = length - to_boundary
    t[0], t[-1] = 0.0, length
    prof = GraphProfile(variant, r, u, u_prime, W, phi, t)
    return GraphSolution(prof, H0, r0, m, k, "closed_form", {"length": length, "c": c})


def height_at(sol: GraphSolution, r):
    """Height ``u`` at arbitrary radii in ``[0, r0]``."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0) or np.any(r > sol.r0 * (1 + 1e-15)):
        raise geo.DomainRangeError("radius outside [0, r0]")
    if sol.method == "flat":
        return np.zeros_like(r)
    if sol.field is not None:
        return sol.field.height(r)
    if sol.trace is not None:
        return sol.trace.state(_trace_times(sol, r))[1]
    return np.interp(r, sol.profile.r, sol.profile.u)


def angles_at(sol: GraphSolution, r):
    """``(sin phi, cos phi)`` at arbitrary radii in ``[0, r0]``."""
    r = np.asarray(r, dtype=float)
    if sol.method == "flat":
        return np.zeros_like(r), np.ones_like(r)
    if sol.field is not None:
        s, c, _ = sol.field.angles(r)
        return s, c
    if sol.trace is not None:
        phi = sol.trace.state(_trace_times(sol, r))[2]
        return np.sin(phi), np.cos(phi)
    phi = np.interp(r, sol.profile.r, sol.profile.phi)
    return np.sin(phi), np.cos(phi)


def _trace_times(sol, r):
    tr = sol.trace
    return _invert_radius(_DenseView(tr), np.ravel(r), tr).reshape(np.shape(r))


class _DenseView:
    """Adapter giving an :class:`OdeTrace` the ``t / y / sol`` shape of a solve_ivp result."""

    def __init__(self, trace: OdeTrace):
        self.sol = trace.sol
        self.t = np.linspace(0.0, trace.t_end, 513)
        self.y = trace.sol(self.t)
