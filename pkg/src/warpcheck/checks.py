"""Named verification checks, run-config handling, and report assembly.

A run-config names one space (plus optional potential and conformal field)
and a list of check identifiers.  The suite samples Halton points in the
chart box, evaluates every requested check at every point, and aggregates
worst-case residuals into a :class:`VerificationReport`.  PASS/FAIL compares
the max relative residual against the check's tolerance; preconditions that
fail numerically produce SKIP with a reason, never a silent pass.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Callable

import numpy as np

from . import dsl
from .conformal import ConformalAnalysis, rotation_field, sphere_gradient_field, zero_field
from .geometry import CurvatureBundle, MetricChart
from .ode import (
    OdeWarpingFunction,
    WarpOdeParams,
    c1_for_fiber_scalar,
    find_periodic_solution,
    rbar_from_initial,
)
from .residuals import PreconditionSkip, Residual
from .spaces import (
    ConformalFieldSpec,
    FiberSpec,
    FlatTorus,
    Hyperbolic,
    ProductFiber,
    Sphere,
    StaticPotentialSpec,
    WarpedGeometry,
    WarpedProductSpec,
    basicex_geometry,
    build_fiber,
    build_warped_geometry,
    hyperbolic_static_potential,
    make_hyperbolic_chart,
    make_sphere_chart,
    sphere_height_potential,
)
from .statics import (
    StaticAnalysis,
    equivalence_clauses,
    hdot_field,
    icotton_warped_residual,
    inrp_product_check,
    lgh_closed_forms,
    nonconstant_r_cotton_formulas,
    propddoth_check,
    warpedproduct3_residual,
)

__all__ = [
    "ConfigError",
    "RunConfig",
    "CheckOutcome",
    "VerificationReport",
    "CHECK_DESCRIPTIONS",
    "DEFAULT_TOLERANCES",
    "SPACE_KINDS",
    "POTENTIAL_BUILTINS",
    "FIELD_BUILTINS",
    "EXAMPLE_CONFIGS",
    "build_context",
    "run_suite",
    "report_to_json",
]


class ConfigError(ValueError):
    """Run-config schema violation; message carries the offending field path."""


# -- registry ------------------------------------------------------------------

CHECK_DESCRIPTIONS = {
    "vss_residual": "vacuum static equation: full, trace, and trace-free residuals",
    "lgh_forms": "closed forms of L* on warped products (all slots + warped Laplacian)",
    "wp3_identity": "L* hdot = -C(.,xi,.) on constant-scalar warped products",
    "icotton_zero": "i_{d/dt} C = 0 on constant-scalar warped products",
    "nein3_forms": "explicit warped Cotton components (nonconstant scalar allowed)",
    "t_algebra": "T-tensor antisymmetry, cyclic sum, and traces",
    "tfe_identity": "contraction identity E_ik T_ijk f_j = (n-2)/(2(n-1)) |T|^2",
    "decompose_ids": "curvature decomposition identities for generalized solutions",
    "xicvf_forms": "two contraction formulas tying f, phi, P, and C(.,xi,.)",
    "propddoth": "h*fbar assembly: fiber + warping equations imply the total equation",
    "inrp": "product criterion: f'' + Rbar f/(n-1) = 0 over an Einstein fiber",
    "firstthm": "L* phi = Phi for the characteristic function of a conformal field",
    "ixi_cotton": "i_xi C formula (general form; closed reduction when applicable)",
    "cxi_div": "Xi_ik xi^i = 0 for closed fields with constant scalar curvature",
    "equiv_chain": "joint verdict of the four warped vacuum-static equivalence clauses",
}

DEFAULT_TOLERANCES = {
    "vss_residual": 1e-8,
    "lgh_forms": 1e-8,
    "wp3_identity": 1e-8,
    "icotton_zero": 1e-8,
    "nein3_forms": 1e-7,
    "t_algebra": 1e-10,
    "tfe_identity": 1e-7,
    "decompose_ids": 1e-7,
    "xicvf_forms": 1e-6,
    "propddoth": 1e-8,
    "inrp": 1e-8,
    "firstthm": 1e-7,
    "ixi_cotton": 1e-7,
    "cxi_div": 1e-6,
    "equiv_chain": 1e-6,
}

_CHECK_ORDER = {
    "vss_residual": 2,
    "t_algebra": 2,
    "tfe_identity": 2,
    "propddoth": 2,
    "inrp": 2,
    "lgh_forms": 3,
    "wp3_identity": 3,
    "icotton_zero": 3,
    "nein3_forms": 3,
    "decompose_ids": 3,
    "xicvf_forms": 3,
    "equiv_chain": 3,
    "firstthm": 4,
    "ixi_cotton": 4,
    "cxi_div": 4,
}

_NEEDS_WARPED = {"lgh_forms", "wp3_identity", "icotton_zero", "nein3_forms", "propddoth", "inrp", "equiv_chain"}
_NEEDS_POTENTIAL = {"vss_residual", "t_algebra", "tfe_identity", "decompose_ids", "xicvf_forms"}
_NEEDS_FIELD = {"firstthm", "ixi_cotton", "cxi_div", "xicvf_forms"}
_NEEDS_CONSTANT_R = {"wp3_identity", "icotton_zero", "cxi_div"}

SPACE_KINDS = ("sphere", "hyperbolic", "flat_torus", "product", "warped", "basicex", "ode_warped")
POTENTIAL_BUILTINS = ("warped_hdot", "basicex", "sphere_height", "hyperbolic_x0")
FIELD_BUILTINS = ("warped_xi", "sphere_gradient", "rotation", "zero")

R_CONSTANT_REL_TOL = 1e-8


# -- run configuration -----------------------------------------------------------


@dataclass(frozen=True)
class RunConfig:
    space: dict
    checks: tuple[str, ...]
    potential: dict | None = None
    fld: dict | None = None
    samples: int = 100
    offset: int = 0
    tolerances: dict[str, float] = field(default_factory=dict)
    label: str | None = None
    report_path: str | None = None
    csv_path: str | None = None

    @staticmethod
    def from_dict(raw: dict) -> "RunConfig":
        def expect(cond: bool, path: str, msg: str):
            if not cond:
                raise ConfigError(f"{path}: {msg}")

        expect(isinstance(raw, dict), "$", "config must be a JSON object")
        expect("space" in raw, "space", "missing required field")
        expect(isinstance(raw["space"], dict), "space", "must be an object")
        expect("kind" in raw["space"], "space.kind", "missing required field")
        expect(
            raw["space"]["kind"] in SPACE_KINDS,
            "space.kind",
            f"must be one of {SPACE_KINDS}",
        )
        expect("checks" in raw, "checks", "missing required field")
        expect(isinstance(raw["checks"], list) and raw["checks"], "checks", "must be a nonempty list")
        for i, c in enumerate(raw["checks"]):
            expect(c in CHECK_DESCRIPTIONS, f"checks[{i}]", f"unknown check id {c!r}")
        samples = raw.get("samples", 100)
        expect(isinstance(samples, int) and samples >= 1, "samples", "must be an integer >= 1")
        offset = raw.get("offset", 0)
        expect(isinstance(offset, int) and offset >= 0, "offset", "must be an integer >= 0")
        tols = raw.get("tolerances", {})
        expect(isinstance(tols, dict), "tolerances", "must be an object")
        for key, value in tols.items():
            expect(key in CHECK_DESCRIPTIONS, f"tolerances.{key}", "unknown check id")
            expect(isinstance(value, (int, float)) and value > 0, f"tolerances.{key}", "must be positive")
        pot = raw.get("potential")
        expect(pot is None or isinstance(pot, dict), "potential", "must be an object")
        fld = raw.get("field")
        expect(fld is None or isinstance(fld, dict), "field", "must be an object")
        output = raw.get("output", {})
        expect(isinstance(output, dict), "output", "must be an object")
        for key in output:
            expect(key in ("report", "csv"), f"output.{key}", "unknown output path key")
            expect(isinstance(output[key], str), f"output.{key}", "must be a path string")
        return RunConfig(
            space=raw["space"],
            checks=tuple(raw["checks"]),
            potential=pot,
            fld=fld,
            samples=samples,
            offset=offset,
            tolerances=dict(tols),
            label=raw.get("label"),
            report_path=output.get("report"),
            csv_path=output.get("csv"),
        )

    def tolerance(self, check: str) -> float:
        return float(self.tolerances.get(check, DEFAULT_TOLERANCES[check]))


def _fiber_from_dict(raw: dict, path: str) -> FiberSpec:
    if not isinstance(raw, dict) or "kind" not in raw:
        raise ConfigError(f"{path}: fiber spec must be an object with a 'kind'")
    kind = raw["kind"]
    if kind == "sphere":
        return Sphere(int(raw["dim"]), float(raw.get("radius", 1.0)))
    if kind == "hyperbolic":
        return Hyperbolic(int(raw["dim"]), float(raw.get("radius", 1.0)))
    if kind == "flat_torus":
        return FlatTorus(int(raw["dim"]))
    if kind == "product":
        return ProductFiber(
            _fiber_from_dict(raw["left"], path + ".left"),
            _fiber_from_dict(raw["right"], path + ".right"),
        )
    raise ConfigError(f"{path}.kind: unknown fiber kind {kind!r}")


@dataclass
class CheckContext:
    chart: MetricChart
    warped: WarpedGeometry | None
    potential: StaticPotentialSpec | None
    fld: ConformalFieldSpec | None
    potential_t_ast: dsl.ExprAst | None = None


def build_context(config: RunConfig) -> CheckContext:
    """Construct chart, potential, and field from the config dicts."""
    space = config.space
    kind = space["kind"]
    warped: WarpedGeometry | None = None
    try:
        if kind == "sphere":
            chart = make_sphere_chart(int(space["dim"]), float(space.get("radius", 1.0)))
        elif kind == "hyperbolic":
            chart = make_hyperbolic_chart(int(space["dim"]), float(space.get("radius", 1.0)))
        elif kind == "flat_torus":
            chart = build_fiber(FlatTorus(int(space["dim"])))
        elif kind == "product":
            chart = build_fiber(
                ProductFiber(
                    _fiber_from_dict(space["left"], "space.left"),
                    _fiber_from_dict(space["right"], "space.right"),
                )
            )
        elif kind == "warped":
            spec = WarpedProductSpec.from_strings(
                tuple(space["interval"]),
                space["warping"],
                _fiber_from_dict(space["fiber"], "space.fiber"),
                bool(space.get("periodic", False)),
            )
            warped = build_warped_geometry(spec)
            chart = warped.chart
        elif kind == "basicex":
            warped, pot = basicex_geometry(int(space["n"]), int(space["k"]))
            chart = warped.chart
        elif kind == "ode_warped":
            warped = _build_ode_warped(space)
            chart = warped.chart
        else:  # pragma: no cover - guarded by RunConfig validation
            raise ConfigError(f"space.kind: unknown kind {kind!r}")
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"space: missing or malformed field ({exc})") from exc
    except dsl.ParseError as exc:
        raise ConfigError(f"space.warping: {exc}") from exc

    potential = _build_potential(config, space, chart)
    fld = _build_field(config, chart, warped)
    pot_ast = None
    if config.potential and "potential_t" in config.potential:
        pot_ast = dsl.parse(config.potential["potential_t"])
    return CheckContext(chart=chart, warped=warped, potential=potential, fld=fld, potential_t_ast=pot_ast)


def _build_ode_warped(space: dict) -> WarpedGeometry:
    """Warping from the constant-scalar ODE; fiber scalar fixes c1 via the first integral."""
    fiber_spec = _fiber_from_dict(space["fiber"], "space.fiber")
    fiber_chart = build_fiber(fiber_spec)
    if fiber_chart.known_scalar is None:
        raise ConfigError("space.fiber: ode_warped needs a fiber with known scalar curvature")
    n = fiber_chart.dim + 1
    scalar = float(space["scalar"])
    h0 = float(space["h0"])
    hdot0 = float(space.get("hdot0", 0.0))
    if "c1" in space:
        c1 = float(space["c1"])
        rbar = rbar_from_initial(WarpOdeParams(n, scalar, 0.0, c1), h0, hdot0)
        if abs(rbar - fiber_chart.known_scalar) > 1e-8 * (1.0 + abs(rbar)):
            raise ConfigError(
                f"space.c1: first integral gives fiber scalar {rbar:.6g}, "
                f"fiber has {fiber_chart.known_scalar:.6g}"
            )
    else:
        c1 = c1_for_fiber_scalar(n, scalar, fiber_chart.known_scalar, h0, hdot0)
    params = WarpOdeParams(n, scalar, fiber_chart.known_scalar, c1)
    dt = float(space.get("dt", 1e-3))
    from .ode import NoPeriodicOrbit, PositivityLost

    try:
        traj, period = find_periodic_solution(params, h0, dt=dt)
    except (NoPeriodicOrbit, PositivityLost) as exc:
        raise ConfigError(f"space: no periodic warping for these parameters ({exc})") from exc
    warping = OdeWarpingFunction(params, traj, period=period or None)
    from .spaces import _assemble_warped

    label = f"S^1 x_h {fiber_chart.label} [h: ode n={n} R={scalar:g} c1={c1:g}]"
    return _assemble_warped(warping, fiber_chart, (0.0, period if period > 0 else 1.0), True, label)


def _build_potential(config: RunConfig, space: dict, chart: MetricChart) -> StaticPotentialSpec | None:
    pot = config.potential
    if pot is None:
        if space["kind"] == "basicex":
            from .spaces import basicex_potential

            return basicex_potential(int(space["n"]), int(space["k"]))
        return None
    if "builtin" in pot:
        name = pot["builtin"]
        if name == "warped_hdot":
            return None  # handled as hdot jets by the checks that use it
        if name == "basicex":
            from .spaces import basicex_potential

            return basicex_potential(int(space["n"]), int(space["k"]))
        if name == "sphere_height":
            return sphere_height_potential(
                chart.dim, float(space.get("radius", 1.0)), int(pot.get("axis", chart.dim + 1)), float(pot.get("shift", 0.0))
            )
        if name == "hyperbolic_x0":
            return hyperbolic_static_potential(chart.dim, float(space.get("radius", 1.0)))
        raise ConfigError(f"potential.builtin: unknown builtin {name!r} (have {POTENTIAL_BUILTINS})")
    if "potential_t" in pot:
        try:
            ast = dsl.parse(pot["potential_t"])
        except dsl.ParseError as exc:
            raise ConfigError(f"potential.potential_t: {exc}") from exc

        def builder(coords):
            value = dsl.eval_expr(ast, coords[0])
            return value

        return StaticPotentialSpec(
            label=f"f(t)={pot['potential_t']}",
            builder=builder,
            a=float(pot.get("a", 0.0)),
            b=float(pot.get("b", 0.0)),
        )
    raise ConfigError("potential: provide 'builtin' or 'potential_t'")


def _build_field(config: RunConfig, chart: MetricChart, warped: WarpedGeometry | None) -> ConformalFieldSpec | None:
    fld = config.fld
    if fld is None:
        return warped.xi if warped is not None else None
    if "builtin" in fld:
        name = fld["builtin"]
        if name == "warped_xi":
            if warped is None:
                raise ConfigError("field.builtin: warped_xi needs a warped space")
            return warped.xi
        if name == "sphere_gradient":
            return sphere_gradient_field(
                chart.dim, float(config.space.get("radius", 1.0)), int(fld.get("axis", chart.dim + 1))
            )
        if name == "rotation":
            axes = fld.get("axes", [0, 1])
            return rotation_field(chart.dim, int(axes[0]), int(axes[1]))
        if name == "zero":
            return zero_field(chart.dim)
        raise ConfigError(f"field.builtin: unknown builtin {name!r} (have {FIELD_BUILTINS})")
    if "components" in fld:
        comps = fld["components"]
        if not isinstance(comps, list) or len(comps) != chart.dim:
            raise ConfigError(f"field.components: need exactly {chart.dim} component expressions")
        try:
            asts = [dsl.parse(src) for src in comps]
        except dsl.ParseError as exc:
            raise ConfigError(f"field.components: {exc}") from exc

        def builder(coords):
            out = []
            for ast in asts:
                value = dsl.eval_expr(ast, coords[0])
                out.append(value)
            return out

        return ConformalFieldSpec(label="components(t)", builder=builder)
    raise ConfigError("field: provide 'builtin' or 'components'")


# -- per-point scratch -------------------------------------------------------------


class PointScratch:
    """One point's bundle plus lazily shared analyses."""

    def __init__(self, ctx: CheckContext, point: np.ndarray, order: int):
        self.ctx = ctx
        self.point = point
        self.bundle = CurvatureBundle(ctx.chart, point, order=order)

    @cached_property
    def conformal(self) -> ConformalAnalysis:
        if self.ctx.fld is None:
            raise PreconditionSkip("no conformal field configured")
        return ConformalAnalysis(self.bundle, self.ctx.fld)

    @cached_property
    def static(self) -> StaticAnalysis:
        ctx = self.ctx
        if ctx.potential is not None:
            return StaticAnalysis(self.bundle, ctx.potential)
        if ctx.warped is not None:
            pot = StaticPotentialSpec(label="hdot", builder=None)
            return StaticAnalysis(self.bundle, pot, f_jets=hdot_field(self.bundle, ctx.warped))
        raise PreconditionSkip("no potential configured")


# -- per-point evaluators ------------------------------------------------------------


def _eval_vss(ctx: CheckContext, sc: PointScratch) -> dict[str, Residual]:
    return sc.static.vacuum_residuals()


def _eval_t_algebra(ctx: CheckContext, sc: PointScratch) -> dict[str, Residual]:
    return sc.static.t_algebra()


def _eval_tfe(ctx: CheckContext, sc: PointScratch) -> dict[str, Residual]:
    return {"tfe": sc.static.tfe_defect()}


def _eval_decompose(ctx: CheckContext, sc: PointScratch) -> dict[str, Residual]:
    return sc.static.decompose_residuals()


def _eval_xicvf(ctx: CheckContext, sc: PointScratch) -> dict[str, Residual]:
    from .statics import xicvf_residuals

    return xicvf_residuals(sc.static, sc.conformal)


def _eval_lgh(ctx: CheckContext, sc: PointScratch) -> dict[str, Residual]:
    if ctx.warped is None:
        raise PreconditionSkip("closed forms need a warped space")
    if ctx.potential_t_ast is not None:
        return lgh_closed_forms(ctx.warped, sc.point, f_ast=ctx.potential_t_ast)
    return lgh_closed_forms(ctx.warped, sc.point, use_hdot=True)


def _eval_wp3(ctx: CheckContext, sc: PointScratch) -> dict[str, Residual]:
    resid, _, _ = warpedproduct3_residual(ctx.warped, sc.point)
    return {"wp3": resid}


def _eval_icotton(ctx: CheckContext, sc: PointScratch) -> dict[str, Residual]:
    return {"icotton": icotton_warped_residual(ctx.warped, sc.point)}


def _eval_nein3(ctx: CheckContext, sc: PointScratch) -> dict[str, Residual]:
    return nonconstant_r_cotton_formulas(ctx.warped, sc.point)


def _eval_propddoth(ctx: CheckContext, sc: PointScratch) -> dict[str, Residual]:
    if ctx.warped is None:
        raise PreconditionSkip("assembly criterion needs a warped space")
    if ctx.potential is None or ctx.potential.factored is None:
        raise PreconditionSkip("assembly criterion needs a factored potential u(t)*fbar")
    res = propddoth_check(ctx.warped, ctx.potential.factored.fiber_builder, sc.point)
    for premise in ("fiber_vss", "warping_equation"):
        if res[premise].rel > 1e-6:
            raise PreconditionSkip(f"premise {premise} fails (residual {res[premise].rel:.2e})")
    return {"total_vss": res["total_vss"], "fiber_vss": res["fiber_vss"], "warping_equation": res["warping_equation"]}


def _eval_inrp(ctx: CheckContext, sc: PointScratch) -> dict[str, Residual]:
    if ctx.warped is None:
        raise PreconditionSkip("product criterion needs a warped space with h == 1")
    if ctx.potential_t_ast is None:
        raise PreconditionSkip("product criterion needs a t-expression potential")
    return inrp_product_check(ctx.warped, ctx.potential_t_ast, sc.point)


def _eval_firstthm(ctx: CheckContext, sc: PointScratch) -> dict[str, Residual]:
    cf = sc.conformal
    defect = cf.conformal_defect()
    if defect.rel > 1e-7:
        raise PreconditionSkip(f"field {ctx.fld.label!r} is not conformal (residual {defect.rel:.2e})")
    return {
        "firstthm": cf.firstthm_defect(),
        "phi_symmetry": cf.phi_symmetry_defect(),
        "trace_identity": cf.trace_identity_defect(),
    }


def _eval_ixi(ctx: CheckContext, sc: PointScratch) -> dict[str, Residual]:
    cf = sc.conformal
    out = {"general": cf.ixi_cotton_defect("general")}
    if cf.is_closed:
        out["closed_form"] = cf.ixi_cotton_defect("closed")
    return out


def _eval_cxi(ctx: CheckContext, sc: PointScratch) -> dict[str, Residual]:
    cf = sc.conformal
    return {
        "cotton_contraction": cf.cxi_contraction_defect(),
        "divergence_contraction": cf.cxi_divergence_defect(),
    }


_EVALUATORS: dict[str, Callable[[CheckContext, PointScratch], dict[str, Residual]]] = {
    "vss_residual": _eval_vss,
    "t_algebra": _eval_t_algebra,
    "tfe_identity": _eval_tfe,
    "decompose_ids": _eval_decompose,
    "xicvf_forms": _eval_xicvf,
    "lgh_forms": _eval_lgh,
    "wp3_identity": _eval_wp3,
    "icotton_zero": _eval_icotton,
    "nein3_forms": _eval_nein3,
    "propddoth": _eval_propddoth,
    "inrp": _eval_inrp,
    "firstthm": _eval_firstthm,
    "ixi_cotton": _eval_ixi,
    "cxi_div": _eval_cxi,
}


# -- outcomes and report -----------------------------------------------------------


@dataclass
class CheckOutcome:
    check: str
    status: str
    tolerance: float
    max_abs_residual: float = 0.0
    max_rel_residual: float = 0.0
    worst_point: list[float] | None = None
    samples: int = 0
    wall_time: float = 0.0
    reason: str | None = None
    details: dict[str, float] = field(default_factory=dict)
    # per-point rows (point, abs, rel), kept out of the JSON report
    point_rows: list[tuple[tuple[float, ...], float, float]] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "check": self.check,
            "status": self.status,
            "tolerance": self.tolerance,
            "max_abs_residual": self.max_abs_residual,
            "max_rel_residual": self.max_rel_residual,
            "samples": self.samples,
            "wall_time_s": self.wall_time,
        }
        if self.worst_point is not None:
            out["worst_point"] = self.worst_point
        if self.reason is not None:
            out["reason"] = self.reason
        if self.details:
            out["details"] = self.details
        return out


@dataclass
class VerificationReport:
    schema: int
    label: str
    checks: list[CheckOutcome]
    summary: dict[str, Any]
    timestamp: str | None = None

    @property
    def any_fail(self) -> bool:
        return any(c.status == "FAIL" for c in self.checks)

    def to_dict(self) -> dict[str, Any]:
        out = {
            "schema": self.schema,
            "label": self.label,
            "checks": [c.to_dict() for c in self.checks],
            "summary": self.summary,
        }
        if self.timestamp is not None:
            out["timestamp"] = self.timestamp
        return out


def report_to_json(report: VerificationReport) -> str:
    return json.dumps(report.to_dict(), sort_keys=True, indent=2) + "\n"


# -- suite runner --------------------------------------------------------------------


def _scalar_survey(ctx: CheckContext, points: np.ndarray) -> tuple[bool, float, float]:
    values = [CurvatureBundle(ctx.chart, p, order=2).scalar for p in points]
    lo, hi = min(values), max(values)
    mean = sum(values) / len(values)
    constant = (hi - lo) <= R_CONSTANT_REL_TOL * (1.0 + abs(mean))
    return constant, mean, hi - lo


def _run_equiv_chain(ctx: CheckContext, points: np.ndarray, tol: float) -> CheckOutcome:
    start = time.perf_counter()
    if ctx.warped is None:
        return CheckOutcome(
            check="equiv_chain", status="SKIP", tolerance=tol, reason="needs a warped space"
        )
    maxima = {"lstar_hdot": 0.0, "cotton_mid_dt": 0.0, "cotton": 0.0, "fiber_efield": 0.0}
    for p in points:
        clause = equivalence_clauses(ctx.warped, p)
        for key, value in clause.items():
            maxima[key] = max(maxima[key], value)
    verdicts = {key: value < tol for key, value in maxima.items()}
    coherent = len(set(verdicts.values())) == 1
    details = {f"max_{k}": v for k, v in maxima.items()}
    details["all_below_tol"] = float(all(verdicts.values()))
    return CheckOutcome(
        check="equiv_chain",
        status="PASS" if coherent else "FAIL",
        tolerance=tol,
        max_abs_residual=0.0 if coherent else 1.0,
        max_rel_residual=0.0 if coherent else 1.0,
        samples=len(points),
        wall_time=time.perf_counter() - start,
        details=details,
        reason=None if coherent else "equivalence clauses disagree",
    )


def run_suite(config: RunConfig, point_override: np.ndarray | None = None) -> VerificationReport:
    """Execute the configured checks over the chart's Halton samples."""
    ctx = build_context(config)
    if point_override is not None:
        points = np.asarray(point_override, dtype=float).reshape(1, -1)
        if points.shape[1] != ctx.chart.dim:
            raise ConfigError(f"--point: expected {ctx.chart.dim} coordinates")
    else:
        points = ctx.chart.sample_points(config.samples, config.offset)

    needs_survey = bool(_NEEDS_CONSTANT_R.intersection(config.checks))
    r_constant, r_mean, r_spread = (True, 0.0, 0.0)
    if needs_survey:
        r_constant, r_mean, r_spread = _scalar_survey(ctx, points)

    outcomes: list[CheckOutcome] = []
    for check in config.checks:
        tol = config.tolerance(check)
        if check == "equiv_chain":
            outcomes.append(_run_equiv_chain(ctx, points, tol))
            continue
        start = time.perf_counter()
        if check in _NEEDS_WARPED and ctx.warped is None:
            outcomes.append(CheckOutcome(check, "SKIP", tol, reason="needs a warped space"))
            continue
        if check in _NEEDS_POTENTIAL and ctx.potential is None and ctx.warped is None:
            outcomes.append(CheckOutcome(check, "SKIP", tol, reason="needs a potential"))
            continue
        if check in _NEEDS_FIELD and ctx.fld is None:
            outcomes.append(CheckOutcome(check, "SKIP", tol, reason="needs a conformal field"))
            continue
        if check in _NEEDS_CONSTANT_R and not r_constant:
            outcomes.append(
                CheckOutcome(
                    check,
                    "SKIP",
                    tol,
                    reason=f"scalar curvature not constant (spread {r_spread:.3e} about {r_mean:.6g})",
                )
            )
            continue

        evaluator = _EVALUATORS[check]
        order = _CHECK_ORDER[check]
        max_abs = 0.0
        max_rel = -1.0
        worst: np.ndarray | None = None
        details: dict[str, float] = {}
        rows: list[tuple[tuple[float, ...], float, float]] = []
        skip_reason: str | None = None
        evaluated = 0
        for p in points:
            try:
                residuals = evaluator(ctx, PointScratch(ctx, p, order))
            except PreconditionSkip as skip:
                skip_reason = skip.reason
                break
            evaluated += 1
            point_abs = 0.0
            point_rel = 0.0
            for name, residual in residuals.items():
                details[name] = max(details.get(name, 0.0), residual.rel)
                if residual.rel > point_rel:
                    point_rel = residual.rel
                    point_abs = residual.abs
                if residual.rel > max_rel:
                    max_rel = residual.rel
                    max_abs = residual.abs
                    worst = p
            rows.append((tuple(float(x) for x in p), point_abs, point_rel))
        if skip_reason is not None:
            outcomes.append(
                CheckOutcome(check, "SKIP", tol, reason=skip_reason, wall_time=time.perf_counter() - start)
            )
            continue
        status = "PASS" if max_rel <= tol else "FAIL"
        outcomes.append(
            CheckOutcome(
                check=check,
                status=status,
                tolerance=tol,
                max_abs_residual=max_abs,
                max_rel_residual=max(max_rel, 0.0),
                worst_point=[float(x) for x in worst] if worst is not None else None,
                samples=evaluated,
                wall_time=time.perf_counter() - start,
                details=details,
                point_rows=rows,
            )
        )

    counts = {"PASS": 0, "FAIL": 0, "SKIP": 0}
    skip_reasons = []
    for outcome in outcomes:
        counts[outcome.status] += 1
        if outcome.status == "SKIP":
            skip_reasons.append({"check": outcome.check, "reason": outcome.reason})
    summary: dict[str, Any] = {
        "pass": counts["PASS"],
        "fail": counts["FAIL"],
        "skip": counts["SKIP"],
        "skip_reasons": skip_reasons,
    }
    label = config.label or ctx.chart.label
    return VerificationReport(schema=1, label=label, checks=outcomes, summary=summary)


# -- canned example configs ------------------------------------------------------------

EXAMPLE_CONFIGS: dict[str, dict] = {
    "ejiri": {
        "label": "ejiri",
        "space": {
            "kind": "warped",
            "interval": [0.0, 6.283185307179586],
            "warping": "sqrt(2+sin(t))",
            "periodic": True,
            "fiber": {"kind": "sphere", "dim": 3, "radius": 1.0},
        },
        "checks": [
            "vss_residual",
            "icotton_zero",
            "wp3_identity",
            "lgh_forms",
            "firstthm",
            "ixi_cotton",
            "cxi_div",
            "t_algebra",
            "equiv_chain",
        ],
        "samples": 60,
    },
    "basicex-n5-k2": {
        "label": "basicex-n5-k2",
        "space": {"kind": "basicex", "n": 5, "k": 2},
        "checks": [
            "vss_residual",
            "t_algebra",
            "tfe_identity",
            "decompose_ids",
            "xicvf_forms",
            "propddoth",
            "firstthm",
            "cxi_div",
            "wp3_identity",
        ],
        "samples": 40,
    },
    "nonconstant-exp": {
        "label": "nonconstant-exp",
        "space": {
            "kind": "warped",
            "interval": [-1.0, 1.0],
            "warping": "exp(t/5)",
            "fiber": {"kind": "sphere", "dim": 3, "radius": 1.0},
        },
        "checks": ["lgh_forms", "nein3_forms", "ixi_cotton", "firstthm", "icotton_zero"],
        "samples": 40,
    },
    "equiv-fail": {
        "label": "equiv-fail",
        "space": {
            "kind": "ode_warped",
            "scalar": 2.0,
            "h0": 1.0,
            "fiber": {
                "kind": "product",
                "left": {"kind": "sphere", "dim": 2, "radius": 1.0},
                "right": {"kind": "sphere", "dim": 2, "radius": 2.0},
            },
        },
        "checks": ["equiv_chain", "wp3_identity", "icotton_zero", "firstthm"],
        "samples": 30,
    },
    "sphere-s4": {
        "label": "sphere-s4",
        "space": {"kind": "sphere", "dim": 4, "radius": 1.0},
        "potential": {"builtin": "sphere_height", "axis": 5},
        "field": {"builtin": "sphere_gradient", "axis": 1},
        "checks": ["vss_residual", "t_algebra", "decompose_ids", "xicvf_forms", "firstthm", "ixi_cotton"],
        "samples": 40,
    },
}
