"""Command-line entry point: ``killing-cmc-lab {models|construct|verify|sweep}``.

Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 numerical failure.  Errors are also written to stderr as one JSON object.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import constructor as cons
from . import expr
from . import geometry as geo
from . import report
from . import verifier as ver
from .quadrature import QuadratureConfig, QuadratureError

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3

CHECKS = (
    "curvature_residual",
    "flux_identity",
    "method_agreement",
    "height_bounds",
    "angle_function",
    "laplacian_identity",
    "salavessa",
    "volume_lemma",
    "volume_growth",
)
DEFAULT_CHECKS = CHECKS[:-1]
PROFILE_HEADER = ("r", "u", "u_prime", "W", "phi", "t", "u_times_exp_minus_psi")
SWEEP_HEADER = ("parameter", "value", "r0", "delta_psi", "max_weighted_height", "bound_sharp",
                "bound_theoremA", "margin_sharp", "margin_theoremA", "error")


class ConfigError(ValueError):
    pass


def _number(d, key, default=None, positive=False):
    v = d.get(key, default)
    if v is None:
        return None
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(f"{key!r} must be a finite number, got {v!r}")
    if positive and not v > 0:
        raise ConfigError(f"{key!r} must be positive, got {v!r}")
    return float(v)


def _numbers(d, key, default):
    v = d.get(key, default)
    if not isinstance(v, list) or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in v):
        raise ConfigError(f"{key!r} must be a list of numbers")
    return [float(x) for x in v]


@dataclass
class RunConfig:
    model: dict
    H0: float
    variant: str = "weighted"
    weight_exponent: float | None = None
    method: str = "quadrature"
    quadrature: QuadratureConfig = field(default_factory=QuadratureConfig)
    ode_rtol: float = cons.ODE_RTOL
    ode_atol: float = cons.ODE_ATOL
    grid_size: int = cons.DEFAULT_GRID
    out: str = "."
    checks: tuple = DEFAULT_CHECKS
    c_relax: float | None = None
    G: float | None = None
    expected_fail: tuple = ()
    lemma: dict = field(default_factory=dict)
    salavessa_fractions: tuple = (0.25, 0.5, 0.75, 1.0)
    laplacian_C: tuple = (2.0, 3.0)
    growth: dict | None = None
    sweep: dict | None = None

    @property
    def k(self) -> float:
        return cons.weight_exponent(self.variant, self.weight_exponent)

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        known = {"model", "H0", "variant", "weight_exponent", "method", "quadrature", "ode", "grid_size", "out",
                 "checks", "bounds", "expected_fail", "lemma", "salavessa_fractions", "laplacian_C", "growth",
                 "sweep"}
        extra = sorted(set(d) - known)
        if extra:
            raise ConfigError(f"unknown config keys: {', '.join(extra)}")
        if "model" not in d or not isinstance(d["model"], dict):
            raise ConfigError("config needs a 'model' object")
        if "H0" not in d:
            raise ConfigError("config needs 'H0'")
        H0 = _number(d, "H0")
        if not H0 < 0:
            raise ConfigError(f"H0 must be negative (sign convention: u >= 0, u' <= 0, boundary at u = 0); got {H0}")
        variant = d.get("variant", "weighted")
        if variant not in cons.VARIANT_K:
            raise ConfigError(f"variant must be 'weighted' or 'unweighted', got {variant!r}")
        method = d.get("method", "quadrature")
        if method not in ("quadrature", "closed_form"):
            raise ConfigError(f"method must be 'quadrature' or 'closed_form', got {method!r}")
        if method == "closed_form" and d["model"].get("name") not in ("corollary_weighted", "corollary_unweighted"):
            raise ConfigError("method 'closed_form' needs a corollary model")
        qd = d.get("quadrature", {})
        od = d.get("ode", {})
        if not isinstance(qd, dict) or not isinstance(od, dict):
            raise ConfigError("'quadrature' and 'ode' must be objects")
        try:
            q = QuadratureConfig(_number(qd, "abs_tol", 1e-12, True), _number(qd, "rel_tol", 1e-10, True),
                                 int(qd.get("max_depth", 50)))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"quadrature: {exc}") from exc
        grid = d.get("grid_size", cons.DEFAULT_GRID)
        if isinstance(grid, bool) or not isinstance(grid, int) or grid < 9:
            raise ConfigError("grid_size must be an integer >= 9")
        checks = d.get("checks", list(DEFAULT_CHECKS) + (["volume_growth"] if "growth" in d else []))
        if not isinstance(checks, list) or any(c not in CHECKS for c in checks):
            raise ConfigError(f"checks must be a list drawn from: {', '.join(CHECKS)}")
        bounds = d.get("bounds", {})
        c_relax = _number(bounds, "c_relax")
        if c_relax is not None and not 0 < c_relax <= 1:
            raise ConfigError("bounds.c_relax must lie in (0, 1]")
        G = _number(bounds, "G")
        if G is not None and G < 0:
            raise ConfigError("bounds.G must be nonnegative")
        expected = d.get("expected_fail", [])
        if not isinstance(expected, list) or not all(isinstance(x, str) for x in expected):
            raise ConfigError("expected_fail must be a list of check names")
        lemma = d.get("lemma", {})
        if not isinstance(lemma, dict):
            raise ConfigError("lemma must be an object")
        lemma = {"R": _numbers(lemma, "R", []), "delta": _numbers(lemma, "delta", [1.0, 2.0]),
                 "D": _numbers(lemma, "D", [0.0, 2.0])}
        if any(x <= 0 for x in lemma["R"] + lemma["delta"]):
            raise ConfigError("lemma R and delta values must be positive")
        fractions = _numbers(d, "salavessa_fractions", [0.25, 0.5, 0.75, 1.0])
        if any(not 0 < f <= 1 for f in fractions):
            raise ConfigError("salavessa_fractions must lie in (0, 1]")
        growth = d.get("growth")
        if growth is not None:
            if not isinstance(growth, dict):
                raise ConfigError("growth must be an object")
            R_list = _numbers(growth, "R", [])
            if len(R_list) < 2 or any(b <= a for a, b in zip(R_list, R_list[1:])) or R_list[0] <= 0:
                raise ConfigError("growth.R must be an increasing list of at least two positive radii")
            growth = {"R": R_list, "k": _number(growth, "k", 1.0),
                      "max_slope": _number(growth, "max_slope", ver.GROWTH_MAX_SLOPE)}
        sweep = d.get("sweep")
        if sweep is not None:
            if not isinstance(sweep, dict) or sweep.get("parameter") not in ("c", "H0"):
                raise ConfigError("sweep.parameter must be 'c' or 'H0'")
            values = _numbers(sweep, "values", [])
            if not values:
                raise ConfigError("sweep.values must be a nonempty list")
            if sweep["parameter"] == "c" and d["model"].get("name") not in ("corollary_weighted",
                                                                             "corollary_unweighted"):
                raise ConfigError("sweeping c needs a corollary model")
            sweep = {"parameter": sweep["parameter"], "values": values}
        ode_rtol = _number(od, "rtol", cons.ODE_RTOL, True)
        ode_atol = _number(od, "atol", cons.ODE_ATOL, True)
        out = d.get("out", ".")
        if not isinstance(out, str):
            raise ConfigError("out must be a path string")
        return cls(
            model=d["model"], H0=H0, variant=variant, weight_exponent=_number(d, "weight_exponent"),
            method=method, quadrature=q, ode_rtol=ode_rtol, ode_atol=ode_atol, grid_size=grid, out=out,
            checks=tuple(checks), c_relax=c_relax, G=G, expected_fail=tuple(expected), lemma=lemma,
            salavessa_fractions=tuple(fractions), laplacian_C=tuple(_numbers(d, "laplacian_C", [2.0, 3.0])),
            growth=growth, sweep=sweep,
        )


def load_config(path: str) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return RunConfig.from_dict(data)


def make_model(cfg: RunConfig) -> geo.ModelManifold:
    try:
        return geo.make_model(cfg.model)
    except (geo.ModelError, expr.ExprError) as exc:
        raise ConfigError(f"model: {exc}") from exc


# --- building ---------------------------------------------------------------------


def build(cfg: RunConfig, m: geo.ModelManifold):
    """Primary solution (quadrature or closed form) and the ODE solution on the same grid."""
    q = cfg.quadrature
    if cfg.method == "closed_form":
        variant = "weighted" if cfg.model["name"] == "corollary_weighted" else "unweighted"
        primary = cons.corollary_profile(m.spec["base"], m.spec["c"], cfg.H0, variant, cfg.grid_size, q)
    else:
        primary = cons.build_profile_quadrature(m, cfg.H0, cfg.variant, cfg.weight_exponent, cfg.grid_size, q)
    try:
        ode = cons.build_profile_ode(m, cfg.H0, primary.variant, primary.k, cfg.grid_size, q,
                                     cfg.ode_rtol, cfg.ode_atol, r0=primary.r0)
    except cons.GraphError as exc:
        # a closed form need not solve the radial equation; the checks then report why
        if primary.method != "closed_form":
            raise
        ode = exc
    return primary, ode


def profile_rows(sol: cons.GraphSolution):
    p = sol.profile
    wh = sol.weighted_height()
    return [tuple(float(v) for v in row) for row in zip(p.r, p.u, p.u_prime, p.W, p.phi, p.t, wh)]


def summary(cfg: RunConfig, m, primary, ode) -> dict:
    failed = isinstance(ode, Exception)
    return {
        "model": m.label,
        "model_spec": m.spec,
        "variant": primary.variant,
        "weight_exponent": primary.k,
        "method": primary.method,
        "H0": primary.H0,
        "r0": primary.r0,
        "max_height": primary.max_height,
        "max_weighted_height": float(np.max(primary.weighted_height())),
        "profile_length": primary.diagnostics["length"],
        "method_agreement": None if failed else float(np.max(np.abs(primary.profile.u - ode.profile.u))),
        "grid_size": cfg.grid_size,
        "ode": ({"error": str(ode)} if failed else
                {k: ode.diagnostics[k] for k in ("nfev", "steps", "rtol", "atol", "axis_phi_gap")}),
    }


def _unavailable(name: str, exc: Exception) -> ver.CheckResult:
    return ver.CheckResult(name, ver.FAIL, math.inf, 0.0, -math.inf, 0.0,
                           {"error": f"{type(exc).__name__}: {exc}"})


def run_checks(cfg: RunConfig, m, primary, ode) -> ver.VerificationReport:
    """Run the configured checks; ``ode`` may be the exception from a failed ODE build."""
    q = cfg.quadrature
    rep = ver.VerificationReport()
    needs_ode = {"method_agreement", "laplacian_identity", "volume_lemma"}
    for name in cfg.checks:
        if isinstance(ode, Exception) and name in needs_ode:
            rep.add(_unavailable(name, ode))
            continue
        if name == "curvature_residual":
            rep.add(ver.curvature_residual(primary))
            rep.checks[-1].name = "curvature_residual[primary]"
            if isinstance(ode, Exception):
                rep.add(_unavailable("curvature_residual[ode]", ode))
            else:
                ode_res = ver.curvature_residual(ode)
                ode_res.name = "curvature_residual[ode]"
                rep.add(ode_res)
        elif name == "flux_identity":
            rep.add(ver.flux_identity_check(primary, q))
        elif name == "method_agreement":
            rep.add(ver.method_agreement_check(primary, ode))
        elif name == "height_bounds":
            bp = ver.BoundParams.over(primary, cfg.c_relax, cfg.G)
            rep.add(*ver.height_bound_check(primary, bp, q))
        elif name == "angle_function":
            rep.add(*ver.angle_function_check(primary))
        elif name == "laplacian_identity":
            for C in cfg.laplacian_C:
                rep.add(ver.laplacian_identity_check(ode, C))
        elif name == "salavessa":
            radii = [f * primary.r0 for f in cfg.salavessa_fractions]
            rep.add(*ver.salavessa_check(m, primary, radii, primary.k, q))
        elif name == "volume_lemma":
            R_list = cfg.lemma["R"] or [0.25 * primary.r0, 0.5 * primary.r0, primary.r0]
            for R in R_list:
                for delta in cfg.lemma["delta"]:
                    for D in cfg.lemma["D"]:
                        rep.add(*ver.volume_lemma_check(ode, R, delta, D, q))
        elif name == "volume_growth":
            g = cfg.growth or {"R": [1.0, 2.0, 4.0, 8.0], "k": 1.0, "max_slope": ver.GROWTH_MAX_SLOPE}
            rep.add(ver.volume_growth_probe(m, g["k"], g["R"], q, g["max_slope"]))
    rep.mark_expected(cfg.expected_fail)
    return rep


def sweep_row(cfg: RunConfig, value: float):
    param = cfg.sweep["parameter"]
    H0 = cfg.H0
    spec = dict(cfg.model)
    if param == "c":
        spec["c"] = value
    else:
        H0 = value
    try:
        if not H0 < 0:
            raise cons.SignConventionError(f"H0 must be negative, got {H0}")
        m = geo.make_model(spec)
        sol = cons.build_profile_quadrature(m, H0, cfg.variant, cfg.weight_exponent, cfg.grid_size,
                                            cfg.quadrature)
        bp = ver.BoundParams.over(sol)
        top = float(np.max(sol.weighted_height()))
        sharp = ver.integral_height_bound(sol, bp, cfg.quadrature)
        theorem_a = math.exp(2 * bp.oscillation) / abs(H0)
        return (param, value, sol.r0, bp.oscillation, top, sharp, theorem_a, sharp - top, theorem_a - top, None)
    except (ArithmeticError, ValueError) as exc:
        return (param, value, None, None, None, None, None, None, None, f"{type(exc).__name__}: {exc}")


def sweep_threads(count: int) -> int:
    raw = os.environ.get("KCL_THREADS")
    limit = os.cpu_count() or 1
    if raw:
        try:
            limit = max(1, int(raw))
        except ValueError as exc:
            raise ConfigError(f"KCL_THREADS must be a positive integer, got {raw!r}") from exc
    return max(1, min(limit, count))


# --- commands -------------------------------------------------------------------


def cmd_models(args) -> int:
    listing = [{"name": name, "params": params} for name, params in geo.BUILTIN_MODELS.items()]
    if args.json:
        sys.stdout.write(report.dumps(listing))
    else:
        for item in listing:
            sys.stdout.write(f"{item['name']}\n")
            for key, desc in item["params"].items():
                sys.stdout.write(f"    {key:<10} {desc}\n")
    return EXIT_OK


def _out_dir(cfg: RunConfig, args) -> str:
    out = args.out or cfg.out
    try:
        report.ensure_dir(out)
    except OSError as exc:
        raise ConfigError(f"output directory: {exc}") from exc
    return out


def cmd_construct(args) -> int:
    cfg = load_config(args.config)
    m = make_model(cfg)
    out = _out_dir(cfg, args)
    primary, ode = build(cfg, m)
    info = summary(cfg, m, primary, ode)
    report.write_csv(os.path.join(out, "profile.csv"), PROFILE_HEADER, profile_rows(primary))
    report.write_json(os.path.join(out, "summary.json"), info)
    if args.json:
        sys.stdout.write(report.dumps(info))
    else:
        for key in ("model", "variant", "method", "H0", "r0", "max_height", "max_weighted_height",
                    "method_agreement"):
            v = info[key]
            sys.stdout.write(f"{key:<22}{report.fmt(v) if isinstance(v, float) else v}\n")
    return EXIT_OK


def format_table(rep: ver.VerificationReport) -> str:
    width = max([44] + [len(c.name) + 2 for c in rep.checks])
    lines = [f"{'check':<{width}}{'status':<15}margin", "-" * (width + 15 + 24)]
    for c in rep.checks:
        lines.append(f"{c.name:<{width}}{c.status:<15}{c.margin: .6e}")
    return "\n".join(lines) + "\n"


def cmd_verify(args) -> int:
    cfg = load_config(args.config)
    m = make_model(cfg)
    out = _out_dir(cfg, args)
    primary, ode = build(cfg, m)
    rep = run_checks(cfg, m, primary, ode)
    doc = {"model": m.label, "model_spec": m.spec, "variant": primary.variant, "weight_exponent": primary.k,
           "method": primary.method, "H0": primary.H0, "r0": primary.r0, **rep.to_dict()}
    report.write_json(os.path.join(out, "report.json"), doc)
    sys.stdout.write(report.dumps(doc) if args.json else format_table(rep))
    return EXIT_OK if rep.passed else EXIT_VERIFY


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    if cfg.sweep is None:
        raise ConfigError("sweep needs a 'sweep' object with 'parameter' and nonempty 'values'")
    make_model(cfg)
    out = _out_dir(cfg, args)
    values = cfg.sweep["values"]
    with ThreadPoolExecutor(max_workers=sweep_threads(len(values))) as pool:
        rows = list(pool.map(lambda v: sweep_row(cfg, v), values))
    report.write_csv(os.path.join(out, "sweep.csv"), SWEEP_HEADER, rows)
    if args.json:
        sys.stdout.write(report.dumps([dict(zip(SWEEP_HEADER, row)) for row in rows]))
    else:
        sys.stdout.write(report.csv_text(SWEEP_HEADER, rows))
    return EXIT_OK


def parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="killing-cmc-lab",
                                description="Rotational constant mean curvature Killing graphs: build and verify.")
    sub = p.add_subparsers(dest="command", required=True)
    for name, needs_config in (("models", False), ("construct", True), ("verify", True), ("sweep", True)):
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=needs_config, help="JSON run configuration")
        sp.add_argument("--json", action="store_true", help="print machine-readable JSON")
        sp.add_argument("--out", help="output directory (overrides the config)")
    return p


COMMANDS = {"models": cmd_models, "construct": cmd_construct, "verify": cmd_verify, "sweep": cmd_sweep}


def _fail(code: int, exc: BaseException) -> int:
    sys.stderr.write(report.dumps({"error": type(exc).__name__, "message": str(exc), "exit_code": code}))
    return code


def main(argv=None) -> int:
    try:
        args = parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, cons.SignConventionError) as exc:
        return _fail(EXIT_CONFIG, exc)
    except (cons.ConstructionError, QuadratureError, ArithmeticError, geo.DomainRangeError, expr.ExprError) as exc:
        return _fail(EXIT_NUMERIC, exc)


if __name__ == "__main__":
    sys.exit(main())
