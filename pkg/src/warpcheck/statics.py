"""Vacuum-static-equation residuals and the warped-product identity family.

Covers: L*_g f and the three forms of the vacuum static equation, the
generalized equation Hess f + R f g/(n(n-1)) = (f+a)E + b g, the T tensor
and its algebra, the curvature decomposition identities for solutions, the
closed forms of L*_g on warped products (all slots plus the warped
Laplacian), i_{d/dt} C = 0 and L*_g hdot = -C(., xi, .) on constant-scalar
warped products, the explicit Cotton components when the scalar curvature
is not constant, the h*fbar assembly criterion, the Riemannian-product
criterion, and the two conformal-field contraction formulas.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .dsl import ExprAst, eval_expr
from .geometry import CurvatureBundle, MetricChart
from .jets import Jet, JetTensor, jet_space, jt_einsum
from .residuals import PreconditionSkip, Residual, ResidualSet
from .spaces import ConformalFieldSpec, StaticPotentialSpec, WarpedGeometry
from .conformal import ConformalAnalysis

__all__ = [
    "StaticTriple",
    "StaticAnalysis",
    "lstar",
    "vacuum_static_residual",
    "generalized_residual",
    "t_tensor",
    "t_algebra_defects",
    "decompose_identities",
    "tfe_identity_residual",
    "lgh_closed_forms",
    "icotton_warped_residual",
    "warpedproduct3_residual",
    "equivalence_clauses",
    "nonconstant_r_cotton_formulas",
    "propddoth_check",
    "inrp_product_check",
    "xicvf_two_formulas",
    "warping_jet",
    "warping_derivatives",
    "hdot_field",
    "SOLUTION_REL_TOL",
]

SOLUTION_REL_TOL = 1e-6


@dataclass(frozen=True)
class StaticTriple:
    chart: MetricChart
    potential: StaticPotentialSpec
    xi: ConformalFieldSpec | None = None


class StaticAnalysis:
    """Jet-level residuals of one potential at one point.

    The potential usually comes from ``potential.builder``; passing
    ``f_jets`` instead supports potentials that exist only as jets (hdot of
    a numerically defined warping, say).
    """

    def __init__(
        self,
        bundle: CurvatureBundle,
        potential: StaticPotentialSpec,
        f_jets: JetTensor | None = None,
    ):
        self.bundle = bundle
        self.potential = potential
        self.n = bundle.dim
        if f_jets is not None:
            self.__dict__["f"] = f_jets

    @cached_property
    def f(self) -> JetTensor:
        return self.bundle.scalar_field(self.potential.builder)

    @cached_property
    def df(self) -> JetTensor:
        return self.f.partials()

    @cached_property
    def df_up(self) -> JetTensor:
        return jt_einsum("ia,a->i", self.bundle.ginv, self.df)

    @cached_property
    def hess(self) -> JetTensor:
        return self.bundle.hessian(self.f)

    @cached_property
    def lap(self) -> JetTensor:
        return jt_einsum("ij,ij->", self.bundle.ginv, self.hess)

    @cached_property
    def lstar_f(self) -> JetTensor:
        b = self.bundle
        return self.hess - jt_einsum(",ij->ij", self.lap, b.g) - jt_einsum(",ij->ij", self.f, b.ric)

    @cached_property
    def f_plus_a(self) -> JetTensor:
        return self.f + self.potential.a

    # -- vacuum static equation ------------------------------------------

    def vacuum_residuals(self) -> ResidualSet:
        b = self.bundle
        n = self.n
        scale2 = b.jnorm(self.hess, ("l", "l")) + abs(float(self.lap.value)) + b.jnorm(
            jt_einsum(",ij->ij", self.f, b.ric), ("l", "l")
        )
        out: ResidualSet = {
            "full": Residual(b.jnorm(self.lstar_f, ("l", "l")), scale2),
        }
        trace = self.lap + b.scalar_jet * self.f / (n - 1.0)
        out["trace"] = Residual(
            abs(float(trace.value)),
            abs(float(self.lap.value)) + abs(b.scalar * float(self.f.value) / (n - 1.0)),
        )
        tf = (
            self.hess
            + jt_einsum(",ij->ij", b.scalar_jet * self.f, b.g) / (n * (n - 1.0))
            - jt_einsum(",ij->ij", self.f, b.efield)
        )
        out["trace_free"] = Residual(b.jnorm(tf, ("l", "l")), scale2)
        return out

    def generalized_defect(self) -> Residual:
        """Residual of Hess f + R f g/(n(n-1)) = (f+a) E + b g."""
        b = self.bundle
        n = self.n
        lhs = self.hess + jt_einsum(",ij->ij", b.scalar_jet * self.f, b.g) / (n * (n - 1.0))
        rhs = jt_einsum(",ij->ij", self.f_plus_a, b.efield) + JetTensor.const(
            b.space, self.potential.b * b.g0
        )
        scale = b.jnorm(lhs, ("l", "l")) + b.jnorm(rhs, ("l", "l"))
        return Residual(b.jnorm(lhs - rhs, ("l", "l")), scale)

    def require_solution(self, what: str) -> None:
        defect = self.generalized_defect()
        if defect.rel > SOLUTION_REL_TOL:
            raise PreconditionSkip(
                f"{what}: potential {self.potential.label!r} does not solve the "
                f"generalized equation here (residual {defect.rel:.2e})"
            )

    # -- T tensor -----------------------------------------------------------

    @cached_property
    def t_jets(self) -> JetTensor:
        b = self.bundle
        n = self.n
        ef = jt_einsum("jl,l->j", b.efield, self.df_up)
        term1 = jt_einsum("ik,j->ijk", b.efield, self.df) - jt_einsum("ij,k->ijk", b.efield, self.df)
        term2 = jt_einsum("ik,j->ijk", b.g, ef) - jt_einsum("ij,k->ijk", b.g, ef)
        return term1 * ((n - 1.0) / (n - 2.0)) + term2 * (1.0 / (n - 2.0))

    def t_algebra(self) -> ResidualSet:
        b = self.bundle
        t = self.t_jets
        tnorm = b.jnorm(t, ("l",) * 3)
        out: ResidualSet = {}
        skew = t + t.transpose("ijk->ikj")
        out["skew"] = Residual(b.jnorm(skew, ("l",) * 3), tnorm)
        cyc = t + t.transpose("ijk->jki") + t.transpose("ijk->kij")
        out["cyclic"] = Residual(b.jnorm(cyc, ("l",) * 3), tnorm)
        tr1 = jt_einsum("ij,ijk->k", b.ginv, t)
        tr2 = jt_einsum("ik,ijk->j", b.ginv, t)
        out["trace12"] = Residual(b.jnorm(tr1, ("l",)), tnorm)
        out["trace13"] = Residual(b.jnorm(tr2, ("l",)), tnorm)
        return out

    # -- decomposition identities --------------------------------------------

    def decompose_residuals(self, checked: bool = True) -> ResidualSet:
        if checked:
            self.require_solution("decomposition identities")
        b = self.bundle
        n = self.n
        fa = self.f_plus_a
        fa_c = jt_einsum(",ijk->ijk", fa, b.cotton)

        m = b.efield - jt_einsum(",ij->ij", b.scalar_jet, b.g) / (n * (n - 1.0))
        lhs1 = jt_einsum("lijk,l->ijk", b.riemann13, self.df)
        rhs1 = jt_einsum("ij,k->ijk", m, self.df) - jt_einsum("ik,j->ijk", m, self.df) + fa_c
        scale1 = b.jnorm(lhs1, ("l",) * 3) + b.jnorm(rhs1, ("l",) * 3)

        iw = jt_einsum("sijk,s->ijk", b.weyl, self.df_up)
        rhs2 = iw + self.t_jets
        scale2 = b.jnorm(fa_c, ("l",) * 3) + b.jnorm(rhs2, ("l",) * 3)
        return {
            "riemann_gradient": Residual(b.jnorm(lhs1 - rhs1, ("l",) * 3), scale1),
            "cotton_decomposition": Residual(b.jnorm(fa_c - rhs2, ("l",) * 3), scale2),
        }

    def tfe_defect(self, checked: bool = True) -> Residual:
        """E_ik T_ijk f_j = (n-2)/(2(n-1)) ||T||^2."""
        if checked:
            self.require_solution("E-T contraction identity")
        b = self.bundle
        n = self.n
        e_up = b.ginv0 @ b.efield.value @ b.ginv0
        f_up = b.ginv0 @ self.df.value
        lhs = float(np.einsum("ik,ijk,j->", e_up, self.t_jets.value, f_up))
        tnorm_sq = b.norm_sq(self.t_jets.value, ("l",) * 3)
        rhs = (n - 2.0) / (2.0 * (n - 1.0)) * tnorm_sq
        return Residual(abs(lhs - rhs), tnorm_sq)


# -- spec-surface wrappers ------------------------------------------------------


def lstar(chart: MetricChart, potential: StaticPotentialSpec, point, order: int = 2):
    b = CurvatureBundle(chart, point, order=max(order, 2))
    analysis = StaticAnalysis(b, potential)
    return b._tv(analysis.lstar_f, ("l", "l"))


def vacuum_static_residual(triple: StaticTriple, point, order: int = 2) -> ResidualSet:
    b = CurvatureBundle(triple.chart, point, order=max(order, 2))
    return StaticAnalysis(b, triple.potential).vacuum_residuals()


def generalized_residual(triple: StaticTriple, point) -> Residual:
    b = CurvatureBundle(triple.chart, point, order=2)
    return StaticAnalysis(b, triple.potential).generalized_defect()


def t_tensor(triple: StaticTriple, point):
    b = CurvatureBundle(triple.chart, point, order=2)
    analysis = StaticAnalysis(b, triple.potential)
    return b._tv(analysis.t_jets, ("l", "l", "l"))


def t_algebra_defects(triple: StaticTriple, point) -> ResidualSet:
    b = CurvatureBundle(triple.chart, point, order=2)
    return StaticAnalysis(b, triple.potential).t_algebra()


def decompose_identities(triple: StaticTriple, point) -> ResidualSet:
    b = CurvatureBundle(triple.chart, point, order=3)
    return StaticAnalysis(b, triple.potential).decompose_residuals()


def tfe_identity_residual(triple: StaticTriple, point) -> Residual:
    b = CurvatureBundle(triple.chart, point, order=2)
    return StaticAnalysis(b, triple.potential).tfe_defect()


# -- warped-product helpers -------------------------------------------------------


def warping_jet(wg: WarpedGeometry, t0: float, order: int) -> Jet:
    h = wg.warping(Jet.variable(0, t0, 1, order))
    if not isinstance(h, Jet):
        h = Jet.constant(float(h), 1, order)
    return h


def warping_derivatives(wg: WarpedGeometry, t0: float, order: int) -> list[float]:
    h = warping_jet(wg, t0, order)
    return [h.partial((j,)) for j in range(order + 1)]


def hdot_field(bundle: CurvatureBundle, wg: WarpedGeometry) -> JetTensor:
    """hdot(t) as a scalar jet field on the total chart."""
    h1 = warping_jet(wg, bundle.point[0], bundle.order + 1)
    hd = JetTensor(h1.space, h1.coeffs).partials()
    hd1 = JetTensor(jet_space(1, bundle.order), hd.data[0])
    return hd1.embed(bundle.space, (0,))


def _fiber_bundle(wg: WarpedGeometry, point, order: int) -> CurvatureBundle:
    return CurvatureBundle(wg.fiber_chart, np.asarray(point)[1:], order=order)


def _fiber_ric0(fb: CurvatureBundle) -> np.ndarray:
    """Trace-free fiber Ricci (components w.r.t. the shared fiber coordinates)."""
    m = fb.dim
    if m == 1:
        return np.zeros((1, 1))
    return fb.ric.value - (fb.scalar / m) * fb.g0


def t_expr_field(bundle: CurvatureBundle, ast: ExprAst) -> JetTensor:
    f = eval_expr(ast, bundle.coords[0])
    if not isinstance(f, Jet):
        f = Jet.constant(float(f), bundle.dim, bundle.order)
    return JetTensor(f.space, f.coeffs)


def lgh_closed_forms(
    wg: WarpedGeometry,
    point,
    f_ast: ExprAst | None = None,
    use_hdot: bool = False,
    order: int = 3,
) -> ResidualSet:
    """Slot-by-slot residuals between generic L*_g f and the warped closed forms.

    The potential is a function of t alone (an expression, or hdot itself),
    so the fiber Hessian/Laplacian terms of the closed forms drop out.  No
    constancy of the scalar curvature is assumed.
    """
    point = np.asarray(point, dtype=float)
    b = CurvatureBundle(wg.chart, point, order=order)
    n = b.dim
    if use_hdot:
        f = hdot_field(b, wg)
    elif f_ast is not None:
        f = t_expr_field(b, f_ast)
    else:
        raise ValueError("provide f_ast or use_hdot=True")

    analysis = StaticAnalysis(b, StaticPotentialSpec(label="f(t)", builder=None), f_jets=f)

    hderivs = warping_derivatives(wg, point[0], 4)
    h, hd, hdd, hddd = hderivs[0], hderivs[1], hderivs[2], hderivs[3]
    zeros = (0,) * (n - 1)
    fj = f.jet(())
    f0, ft, ftt = fj.value, fj.partial((1,) + zeros), fj.partial((2,) + zeros)

    lstar_v = analysis.lstar_f.value
    lap_v = float(analysis.lap.value)
    scal = b.scalar

    fb = _fiber_bundle(wg, point, order=2)
    ric0 = _fiber_ric0(fb)
    g_fiber = b.g0[1:, 1:]

    out: ResidualSet = {}
    pred_l1 = (n - 1.0) / h * (hdd * f0 - hd * ft)
    out["tt_slot"] = Residual(abs(lstar_v[0, 0] - pred_l1), abs(lstar_v[0, 0]) + abs(pred_l1))

    mixed = np.concatenate([lstar_v[0, 1:], lstar_v[1:, 0]])
    out["mixed_slot"] = Residual(float(np.max(np.abs(mixed))) if mixed.size else 0.0, abs(ft) + abs(f0))

    bracket = lap_v + scal * f0 / (n - 1.0) + (hdd * f0 - hd * ft) / h
    pred_l3 = -f0 * ric0 - bracket * g_fiber
    resid_l3 = lstar_v[1:, 1:] - pred_l3
    out["fiber_slot"] = Residual(
        float(np.max(np.abs(resid_l3))), b.norm(lstar_v, ("l", "l")) + abs(bracket)
    )

    pred_lap = ftt + (n - 1.0) * hd / h * ft
    out["laplacian"] = Residual(abs(lap_v - pred_lap), abs(lap_v) + abs(pred_lap))

    if use_hdot:
        # -L* hdot = hdot ric0 + h^2 [h''' + (n-1) hd hdd / h + R hd/(n-1)] gbar
        gbar = g_fiber / h**2
        pred = -(hd * ric0 + h * h * (hddd + (n - 1.0) * hd * hdd / h + scal * hd / (n - 1.0)) * gbar)
        out["hdot_form"] = Residual(
            float(np.max(np.abs(lstar_v[1:, 1:] - pred))),
            b.norm(lstar_v, ("l", "l")) + float(np.max(np.abs(pred))),
        )
    return out


def icotton_warped_residual(wg: WarpedGeometry, point, order: int = 3) -> Residual:
    """|| i_{d/dt} C || at the point (zero when the scalar curvature is constant)."""
    b = CurvatureBundle(wg.chart, np.asarray(point, dtype=float), order=order)
    c0 = b.cotton.value[0]
    return Residual(b.norm(c0, ("l", "l")), b.jnorm(b.cotton, ("l",) * 3))


def warpedproduct3_residual(wg: WarpedGeometry, point, order: int = 3) -> tuple[Residual, float, float]:
    """Residual of L*_g hdot = -C(., xi, .) plus the norms of both sides."""
    b = CurvatureBundle(wg.chart, np.asarray(point, dtype=float), order=order)
    f = hdot_field(b, wg)
    analysis = StaticAnalysis(b, StaticPotentialSpec(label="hdot", builder=None), f_jets=f)
    lstar_v = analysis.lstar_f.value
    xi_vec = b.vector_field(wg.xi.builder)
    c_mid = jt_einsum("ilj,l->ij", b.cotton, xi_vec).value
    lhs_norm = b.norm(lstar_v, ("l", "l"))
    rhs_norm = b.norm(c_mid, ("l", "l"))
    resid = Residual(b.norm(lstar_v + c_mid, ("l", "l")), lhs_norm + rhs_norm)
    return resid, lhs_norm, rhs_norm


def equivalence_clauses(wg: WarpedGeometry, point, order: int = 3) -> dict[str, float]:
    """The four clause magnitudes of the warped vacuum-static equivalence chain."""
    point = np.asarray(point, dtype=float)
    b = CurvatureBundle(wg.chart, point, order=order)
    f = hdot_field(b, wg)
    analysis = StaticAnalysis(b, StaticPotentialSpec(label="hdot", builder=None), f_jets=f)
    fb = _fiber_bundle(wg, point, order=2)
    ric0 = _fiber_ric0(fb)
    return {
        "lstar_hdot": b.norm(analysis.lstar_f.value, ("l", "l")),
        "cotton_mid_dt": b.norm(b.cotton.value[:, 0, :], ("l", "l")),
        "cotton": b.jnorm(b.cotton, ("l",) * 3),
        "fiber_efield": fb.norm(ric0, ("l", "l")),
    }


def nonconstant_r_cotton_formulas(wg: WarpedGeometry, point, order: int = 3) -> ResidualSet:
    """Generic Cotton components vs the explicit warped-product formulas.

    Valid whether or not the scalar curvature is constant; for constant R
    everything on both sides degenerates to zero.  The fiber branch is
    C(X,Y,Z) = [Z(R) g(X,Y) - Y(R) g(X,Z)]/4 for n=3 and
    Cbar + Z(Theta) g(X,Y) - Y(Theta) g(X,Z), Theta = Rbar h^-2/(2(n-2))
    - R/(2(n-1)), for n >= 4.
    """
    point = np.asarray(point, dtype=float)
    b = CurvatureBundle(wg.chart, point, order=order)
    n = b.dim
    c = b.cotton.value
    cnorm = b.jnorm(b.cotton, ("l",) * 3)
    dr = b.scalar_jet.partials().value  # covariant dR components
    hderivs = warping_derivatives(wg, point[0], 2)
    h, hd = hderivs[0], hderivs[1]

    fiber_order = 3 if (n >= 4 and wg.fiber_chart.dim >= 3) else 2
    fb = _fiber_bundle(wg, point, order=fiber_order)
    ric0 = _fiber_ric0(fb)
    g0 = b.g0

    out: ResidualSet = {}
    pred = -dr[1:] / (2.0 * (n - 1.0))
    out["ttX"] = Residual(float(np.max(np.abs(c[0, 0, 1:] - pred))), cnorm)
    out["tXt"] = Residual(float(np.max(np.abs(c[0, 1:, 0] + pred))), cnorm)
    out["tXY"] = Residual(float(np.max(np.abs(c[0, 1:, 1:]))), cnorm)

    pred_mid = hd * ric0
    out["XhdtY"] = Residual(float(np.max(np.abs(h * c[1:, 0, 1:] - pred_mid))), cnorm + float(np.max(np.abs(pred_mid))))

    if n == 3:
        pred_f = 0.25 * (
            np.einsum("c,ab->abc", dr[1:], g0[1:, 1:]) - np.einsum("b,ac->abc", dr[1:], g0[1:, 1:])
        )
    else:
        # Theta as a jet field on the total chart: embed the fiber scalar,
        # multiply by h(t)^-2, subtract R/(2(n-1)).
        rbar = fb.scalar_jet.embed(b.space, tuple(range(1, n)))
        h1 = warping_jet(wg, point[0], b.order)
        h_tot = JetTensor(h1.space, h1.coeffs).embed(b.space, (0,))
        theta = rbar / (2.0 * (n - 2.0)) / (h_tot * h_tot) - b.scalar_jet / (2.0 * (n - 1.0))
        dtheta = theta.partials().value
        cbar = fb.cotton.value if fb.dim >= 3 else np.zeros((fb.dim,) * 3)
        pred_f = (
            cbar
            + np.einsum("c,ab->abc", dtheta[1:], g0[1:, 1:])
            - np.einsum("b,ac->abc", dtheta[1:], g0[1:, 1:])
        )
    out["XYZ"] = Residual(
        float(np.max(np.abs(c[1:, 1:, 1:] - pred_f))), cnorm + float(np.max(np.abs(pred_f)))
    )
    return out


def propddoth_check(wg: WarpedGeometry, fiber_builder, point, order: int = 2) -> ResidualSet:
    """Residuals of the h*fbar assembly: fiber, warping, and total equations.

    ``fiber_builder`` supplies fbar on the fiber chart.  The returned set
    carries the fiber vacuum residual and the warping-equation residual (the two
    premises) alongside the total-space vacuum residual for h(t)*fbar.
    """
    point = np.asarray(point, dtype=float)
    b = CurvatureBundle(wg.chart, point, order=order)
    n = b.dim

    fb = _fiber_bundle(wg, point, order=2)
    fiber_pot = StaticPotentialSpec(label="fbar", builder=fiber_builder)
    fiber_res = StaticAnalysis(fb, fiber_pot).vacuum_residuals()["full"]

    hderivs = warping_derivatives(wg, point[0], 2)
    h, hdd = hderivs[0], hderivs[2]
    warping_eq = hdd + b.scalar * h / (n * (n - 1.0))

    def total_builder(coords):
        return wg.warping(coords[0]) * fiber_builder(coords[1:])

    total_pot = StaticPotentialSpec(label="h fbar", builder=total_builder)
    total_res = StaticAnalysis(b, total_pot).vacuum_residuals()["full"]
    return {
        "fiber_vss": fiber_res,
        "warping_equation": Residual(abs(warping_eq), abs(hdd) + abs(h)),
        "total_vss": total_res,
    }


def inrp_product_check(wg: WarpedGeometry, f_ast: ExprAst, point, order: int = 2) -> ResidualSet:
    """Residuals for the Riemannian-product criterion (h == 1, f = f(t)).

    Checks f'' + Rbar f/(n-1) = 0 against the fiber scalar curvature and the
    full vacuum equation on the product, and reports the fiber Einstein
    defect alongside.
    """
    point = np.asarray(point, dtype=float)
    b = CurvatureBundle(wg.chart, point, order=order)
    n = b.dim
    hvals = warping_derivatives(wg, point[0], 1)
    if abs(hvals[0] - 1.0) > 1e-12 or abs(hvals[1]) > 1e-12:
        raise PreconditionSkip("product criterion requires h == 1")

    fb = _fiber_bundle(wg, point, order=2)
    rbar = fb.scalar
    f = t_expr_field(b, f_ast)
    zeros = (0,) * (n - 1)
    fj = f.jet(())
    f0, ftt = fj.value, fj.partial((2,) + zeros)
    ddotf = ftt + rbar * f0 / (n - 1.0)

    analysis = StaticAnalysis(b, StaticPotentialSpec(label="f(t)", builder=None), f_jets=f)
    full = analysis.vacuum_residuals()["full"]
    ric0 = _fiber_ric0(fb)
    return {
        "ddotf": Residual(abs(ddotf), abs(ftt) + abs(f0)),
        "full": full,
        "fiber_einstein": Residual(fb.norm(ric0, ("l", "l")), fb.jnorm(fb.ric, ("l", "l"))),
    }


def xicvf_two_formulas(triple: StaticTriple, point, order: int = 3, checked: bool = True) -> ResidualSet:
    """The two contraction identities tying f, phi, P, and C(., xi, .) together.

    Item (1):
        n (f_j phi_k - f_k phi_j) + R/(n-1) (f_j xi^b_k - f_k xi^b_j)
          = P_jk,i f_i + f_j P_ik,i - f_k P_ij,i - (f+a) C_ijk xi^i
    Item (2):
        xi(f) E_ik - <grad phi + R xi/(n(n-1)), grad f> g_ik
          = -f_k (n phi_i + R/(n-1) xi^b_i) + f_j P_ji,k + f_k P_li,l
            + (f+a) C_ijk xi^j
    """
    if triple.xi is None:
        raise ValueError("triple carries no conformal field")
    point = np.asarray(point, dtype=float)
    b = CurvatureBundle(triple.chart, point, order=order)
    st = StaticAnalysis(b, triple.potential)
    cf = ConformalAnalysis(b, triple.xi)
    return xicvf_residuals(st, cf, checked=checked)


def xicvf_residuals(st: StaticAnalysis, cf: ConformalAnalysis, checked: bool = True) -> ResidualSet:
    b = st.bundle
    n = b.dim
    if checked:
        st.require_solution("conformal-field contraction identities")

    f, df, df_up = st.f, st.df, st.df_up
    fa = st.f_plus_a
    phi, dphi = cf.phi, cf.dphi
    xi, xib = cf.xi, cf.xi_flat
    dp = cf.dp
    r_jet = b.scalar_jet

    # item (1)
    fphi = jt_einsum("j,k->jk", df, dphi)
    fxib = jt_einsum("j,k->jk", df, xib)
    lhs1 = float(n) * (fphi - fphi.transpose("jk->kj")) + jt_einsum(
        ",jk->jk", r_jet, fxib - fxib.transpose("jk->kj")
    ) / (n - 1.0)
    div_p = jt_einsum("ab,akb->k", b.ginv, dp)
    rhs1 = jt_einsum("jki,i->jk", dp, df_up)
    rhs1 = rhs1 + jt_einsum("j,k->jk", df, div_p) - jt_einsum("k,j->jk", df, div_p)
    rhs1 = rhs1 - jt_einsum(",jk->jk", fa, jt_einsum("ijk,i->jk", b.cotton, xi))
    scale1 = b.jnorm(lhs1, ("l", "l")) + b.jnorm(rhs1, ("l", "l"))

    # item (2)
    xif = jt_einsum("a,a->", xi, df)
    dphi_up = jt_einsum("ab,b->a", b.ginv, dphi)
    inner = jt_einsum("b,b->", dphi_up, df) + jt_einsum(",->", r_jet, xif) / (n * (n - 1.0))
    lhs2 = jt_einsum(",ik->ik", xif, b.efield) - jt_einsum(",ik->ik", inner, b.g)
    vec = float(n) * dphi + jt_einsum(",i->i", r_jet, xib) / (n - 1.0)
    rhs2 = -jt_einsum("k,i->ik", df, vec)
    rhs2 = rhs2 + jt_einsum("jik,j->ik", dp, df_up)
    rhs2 = rhs2 + jt_einsum("k,i->ik", df, div_p)
    rhs2 = rhs2 + jt_einsum(",ik->ik", fa, jt_einsum("ijk,j->ik", b.cotton, xi))
    scale2 = b.jnorm(lhs2, ("l", "l")) + b.jnorm(rhs2, ("l", "l"))

    return {
        "item1": Residual(b.jnorm(lhs1 - rhs1, ("l", "l")), scale1),
        "item2": Residual(b.jnorm(lhs2 - rhs2, ("l", "l")), scale2),
    }
