"""Conformal-vector-field machinery.

For a field xi on (M, g): the characteristic function phi = div(xi)/n, the
skew tensor P_jk = (xi^b_{j,k} - xi^b_{k,j})/2, the closed-field curvature
identities, the symmetric tensor

    Phi_ik = -C_kli xi^l - (grad_i R xi^b_k - xi(R) g_ik)/(2(n-1))
             + P_{jk,ji} + R_il P_lk,

and the identity L*_g phi = Phi, which reduces to L*_g phi = -C(., xi, .)
for closed fields on constant-scalar-curvature metrics.  Everything is
evaluated in jet arithmetic so phi can itself be differentiated twice.
"""

from __future__ import annotations

from functools import cached_property

import numpy as np

from .geometry import CurvatureBundle, MetricChart
from .jets import Jet, JetTensor, jt_einsum
from .residuals import PreconditionSkip, Residual, ResidualSet
from .spaces import ConformalFieldSpec

__all__ = [
    "ConformalAnalysis",
    "characteristic_function",
    "conformal_residual",
    "p_tensor",
    "closed_cvf_identities",
    "phi_tensor",
    "firstthm_residual",
    "ixi_cotton_residual",
    "cxi_divergence_residual",
    "sphere_gradient_field",
    "rotation_field",
    "zero_field",
    "CLOSED_REL_TOL",
]

CLOSED_REL_TOL = 1e-9


class ConformalAnalysis:
    """Jet-level analysis of one conformal field at one point of one chart."""

    def __init__(self, bundle: CurvatureBundle, xi: ConformalFieldSpec):
        self.bundle = bundle
        self.spec = xi
        self.n = bundle.dim

    # -- field jets -------------------------------------------------------

    @cached_property
    def xi(self) -> JetTensor:
        return self.bundle.vector_field(self.spec.builder)

    @cached_property
    def xi_flat(self) -> JetTensor:
        return jt_einsum("ij,j->i", self.bundle.g, self.xi)

    @cached_property
    def dxi_flat(self) -> JetTensor:
        """xi^b_{j,i} laid out as [j, i] (derivative index last)."""
        return self.bundle.covariant_derivative(self.xi_flat, ("l",))

    @cached_property
    def phi(self) -> JetTensor:
        """Characteristic function phi = div(xi)/n as a jet field."""
        return jt_einsum("ji,ji->", self.bundle.ginv, self.dxi_flat) / float(self.n)

    @cached_property
    def dphi(self) -> JetTensor:
        return self.phi.partials()

    @cached_property
    def p(self) -> JetTensor:
        """P_jk = (xi^b_{j,k} - xi^b_{k,j}) / 2 (skew part of dxi^b)."""
        return (self.dxi_flat - self.dxi_flat.transpose("jk->kj")) * 0.5

    @cached_property
    def dp(self) -> JetTensor:
        return self.bundle.covariant_derivative(self.p, ("l", "l"))

    @cached_property
    def d2p(self) -> JetTensor:
        return self.bundle.covariant_derivative(self.dp, ("l", "l", "l"))

    # -- scalar diagnostics -------------------------------------------------

    def conformal_defect(self) -> Residual:
        """|| xi^b_{i,j} + xi^b_{j,i} - 2 phi g_ij ||."""
        sym = self.dxi_flat + self.dxi_flat.transpose("jk->kj")
        resid = sym - jt_einsum(",ij->ij", self.phi, self.bundle.g) * 2.0
        scale = self.bundle.jnorm(self.dxi_flat, ("l", "l"))
        return Residual(self.bundle.jnorm(resid, ("l", "l")), 2.0 * scale)

    def closedness_defect(self) -> Residual:
        return Residual(
            self.bundle.jnorm(self.p, ("l", "l")),
            self.bundle.jnorm(self.dxi_flat, ("l", "l")),
        )

    @property
    def is_closed(self) -> bool:
        return self.closedness_defect().rel < CLOSED_REL_TOL

    # -- identities -----------------------------------------------------------

    def closed_identities(self) -> ResidualSet:
        """Residuals (a)-(e) of the closed/general conformal-field identities.

        (a) and (d)/(e) assume a closed field and are reported only when the
        closedness defect passes; (b) and (c) hold for any conformal field.
        """
        b = self.bundle
        out: ResidualSet = {}
        closed = self.is_closed

        # (b) general: R^l_ijk xi^b_l = g_ij phi_k - g_ik phi_j - P_jk,i
        rxi = jt_einsum("lijk,l->ijk", b.riemann13, self.xi_flat)
        gphi = jt_einsum("ij,k->ijk", b.g, self.dphi)
        rhs = gphi - gphi.transpose("ijk->ikj") - self.dp.transpose("jki->ijk")
        scale = b.jnorm(rxi, ("l",) * 3) + b.jnorm(gphi, ("l",) * 3)
        out["nabla_p"] = Residual(b.jnorm(rxi - rhs, ("l",) * 3), scale)

        # (c) divergence: g^ij P_jk,i = R_kl xi^l + (n-1) phi_k
        div_p = jt_einsum("ij,jki->k", b.ginv, self.dp)
        ric_xi = jt_einsum("kl,l->k", b.ric, self.xi)
        rhs_c = ric_xi + (self.n - 1.0) * self.dphi
        out["div_p"] = Residual(
            b.jnorm(div_p - rhs_c, ("l",)),
            b.jnorm(div_p, ("l",)) + b.jnorm(rhs_c, ("l",)),
        )

        if closed:
            # (a) nabla_i xi^j = phi delta^j_i
            dxi_vec = b.covariant_derivative(self.xi, ("u",))
            eye = JetTensor.const(b.space, np.eye(self.n))
            resid_a = dxi_vec - jt_einsum(",ji->ji", self.phi, eye)
            out["nabla_xi"] = Residual(
                b.jnorm(resid_a, ("u", "l")), b.jnorm(dxi_vec, ("u", "l"))
            )

            # (d) R(X, xi)Y identity: R^l_ijk xi^b_l - g_ij phi_k + g_ik phi_j = 0
            resid_d = rxi - gphi + gphi.transpose("ijk->ikj")
            out["curvature_xi"] = Residual(b.jnorm(resid_d, ("l",) * 3), scale)

            # (e) Ric(xi) + (n-1) grad phi = 0
            resid_e = ric_xi + (self.n - 1.0) * self.dphi
            out["ric_xi"] = Residual(
                b.jnorm(resid_e, ("l",)),
                b.jnorm(ric_xi, ("l",)) + (self.n - 1.0) * b.jnorm(self.dphi, ("l",)),
            )
        return out

    @cached_property
    def phi_tensor_jets(self) -> JetTensor:
        b = self.bundle
        n = self.n
        term1 = -jt_einsum("kli,l->ik", b.cotton, self.xi)
        dscal = b.scalar_jet.partials()
        xi_of_r = jt_einsum("l,l->", self.xi, dscal)
        term2 = (
            jt_einsum("i,k->ik", dscal, self.xi_flat) - jt_einsum(",ik->ik", xi_of_r, b.g)
        ) * (-1.0 / (2.0 * (n - 1.0)))
        term3 = jt_einsum("jd,jkdi->ik", b.ginv, self.d2p)
        p_up = jt_einsum("ab,bk->ak", b.ginv, self.p)
        term4 = jt_einsum("ia,ak->ik", b.ric, p_up)
        return term1 + term2 + term3 + term4

    def phi_tensor_value(self) -> np.ndarray:
        return self.phi_tensor_jets.value

    @cached_property
    def lstar_phi(self) -> JetTensor:
        return self.bundle.lstar(self.phi)

    def firstthm_defect(self) -> Residual:
        """|| L*_g phi - Phi ||, the pointwise defect of the main identity."""
        b = self.bundle
        resid = self.lstar_phi - self.phi_tensor_jets
        scale = b.jnorm(self.lstar_phi, ("l", "l")) + b.jnorm(self.phi_tensor_jets, ("l", "l"))
        return Residual(b.jnorm(resid, ("l", "l")), scale)

    def phi_symmetry_defect(self) -> Residual:
        phi_t = self.phi_tensor_jets
        resid = phi_t - phi_t.transpose("ik->ki")
        return Residual(self.bundle.jnorm(resid, ("l", "l")), self.bundle.jnorm(phi_t, ("l", "l")))

    def trace_identity_defect(self) -> Residual:
        """Delta phi + R phi/(n-1) + xi(R)/(2(n-1)) = 0."""
        b = self.bundle
        n = self.n
        lap = b.laplacian(self.phi)
        xi_of_r = jt_einsum("l,l->", self.xi, b.scalar_jet.partials())
        resid = lap + b.scalar_jet * self.phi / (n - 1.0) + xi_of_r / (2.0 * (n - 1.0))
        scale = abs(float(lap.value)) + abs(b.scalar * float(self.phi.value) / (n - 1.0))
        return Residual(abs(float(resid.value)), scale)

    def ixi_cotton_defect(self, mode: str = "general") -> Residual:
        """Residual of i_xi C = dR wedge xi^b /(2(n-1)) - d delta d xi^b/2 + Ric(d xi^b).

        mode 'general' checks the full coordinate identity
        C_ljk xi^l = (grad_j R xi^b_k - grad_k R xi^b_j)/(2(n-1))
                     + P_ij,ik - P_ik,ij + R_kl P_lj + P_kl R_lj;
        mode 'closed' drops the P terms (valid when xi is closed).
        """
        b = self.bundle
        n = self.n
        lhs = jt_einsum("ljk,l->jk", b.cotton, self.xi)
        dscal = b.scalar_jet.partials()
        wedge = jt_einsum("j,k->jk", dscal, self.xi_flat)
        rhs = (wedge - wedge.transpose("jk->kj")) * (1.0 / (2.0 * (n - 1.0)))
        if mode == "general":
            rhs = rhs + jt_einsum("pd,pjdk->jk", b.ginv, self.d2p)
            rhs = rhs - jt_einsum("pd,pkdj->jk", b.ginv, self.d2p)
            p_up = jt_einsum("ab,bj->aj", b.ginv, self.p)
            rhs = rhs + jt_einsum("ka,aj->jk", b.ric, p_up)
            ric_up = jt_einsum("ab,bj->aj", b.ginv, b.ric)
            rhs = rhs + jt_einsum("ka,aj->jk", self.p, ric_up)
        elif mode == "closed":
            if not self.is_closed:
                raise PreconditionSkip(
                    f"field {self.spec.label!r} is not closed (defect {self.closedness_defect().rel:.2e})"
                )
        else:
            raise ValueError(f"unknown mode {mode!r}")
        scale = b.jnorm(lhs, ("l", "l")) + b.jnorm(rhs, ("l", "l"))
        return Residual(b.jnorm(lhs - rhs, ("l", "l")), scale)

    def cxi_contraction_defect(self) -> Residual:
        """|| C_ijk xi^i || (vanishes for closed fields with constant R)."""
        b = self.bundle
        contracted = jt_einsum("ijk,i->jk", b.cotton, self.xi)
        scale = b.jnorm(b.cotton, ("l",) * 3) * b.jnorm(self.xi, ("u",))
        return Residual(b.jnorm(contracted, ("l", "l")), scale)

    def cxi_divergence_defect(self) -> Residual:
        """|| Xi_ik xi^i || with Xi the Cotton divergence."""
        if not self.is_closed:
            raise PreconditionSkip(
                f"field {self.spec.label!r} is not closed (defect {self.closedness_defect().rel:.2e})"
            )
        b = self.bundle
        contracted = jt_einsum("ik,i->k", b.cotton_divergence, self.xi)
        scale = b.jnorm(b.cotton_divergence, ("l", "l")) * b.jnorm(self.xi, ("u",))
        return Residual(b.jnorm(contracted, ("l",)), scale)


# -- spec-surface wrappers -----------------------------------------------------


def _analysis(xi: ConformalFieldSpec, chart: MetricChart, point, order: int = 3) -> ConformalAnalysis:
    return ConformalAnalysis(CurvatureBundle(chart, point, order=order), xi)


def characteristic_function(xi: ConformalFieldSpec, chart: MetricChart, point) -> float:
    """phi = div(xi)/n at the point."""
    return float(_analysis(xi, chart, point, order=2).phi.value)


def conformal_residual(xi: ConformalFieldSpec, chart: MetricChart, point) -> float:
    return _analysis(xi, chart, point, order=2).conformal_defect().abs


def p_tensor(xi: ConformalFieldSpec, chart: MetricChart, point):
    a = _analysis(xi, chart, point, order=2)
    return a.bundle._tv(a.p, ("l", "l"))


def closed_cvf_identities(xi: ConformalFieldSpec, chart: MetricChart, point) -> ResidualSet:
    return _analysis(xi, chart, point, order=3).closed_identities()


def phi_tensor(xi: ConformalFieldSpec, chart: MetricChart, point):
    a = _analysis(xi, chart, point, order=4)
    return a.bundle._tv(a.phi_tensor_jets, ("l", "l"))


def firstthm_residual(xi: ConformalFieldSpec, chart: MetricChart, point) -> Residual:
    return _analysis(xi, chart, point, order=4).firstthm_defect()


def ixi_cotton_residual(xi: ConformalFieldSpec, chart: MetricChart, point, mode: str = "general") -> Residual:
    return _analysis(xi, chart, point, order=4).ixi_cotton_defect(mode)


def cxi_divergence_residual(xi: ConformalFieldSpec, chart: MetricChart, point) -> Residual:
    return _analysis(xi, chart, point, order=4).cxi_divergence_defect()


# -- built-in fields ------------------------------------------------------------


def sphere_gradient_field(m: int, r: float, axis: int) -> ConformalFieldSpec:
    """Gradient of the ambient height function y_axis on the stereographic chart.

    A closed (gradient) conformal field with characteristic function
    -y_axis / r^2.
    """
    if not 1 <= axis <= m + 1:
        raise ValueError(f"axis must be in 1..{m + 1}")
    r2 = r * r

    def builder(coords):
        s = coords[0] * coords[0]
        for c in coords[1:]:
            s = s + c * c
        lam = (2.0 * r2) / (r2 + s)
        inv_lam2 = 1.0 / (lam * lam)
        if axis == m + 1:
            f = r * (s - r2) / (r2 + s)
        else:
            f = 2.0 * r2 * coords[axis - 1] / (r2 + s)
        # xi^i = g^ij d_j f = lam^-2 d_i f; the partials come from f's own jet,
        # so the components live one jet order below the coordinates.
        df = JetTensor(f.space, f.coeffs).partials()
        return [
            inv_lam2.truncate(df.space.order) * Jet(df.space, df.data[i].copy())
            for i in range(m)
        ]

    return ConformalFieldSpec(label=f"grad y_{axis} on S^{m}({r:g})", builder=builder)


def rotation_field(dim: int, i: int = 0, j: int = 1) -> ConformalFieldSpec:
    """Killing rotation x_i d_j - x_j d_i (Killing for any radial conformal factor)."""

    def builder(coords):
        zero = Jet.constant(0.0, coords[0].num_vars, coords[0].order)
        out = [zero] * dim
        out[j] = coords[i]
        out[i] = -coords[j]
        return out

    return ConformalFieldSpec(label=f"rotation({i},{j})", builder=builder)


def zero_field(dim: int) -> ConformalFieldSpec:
    def builder(coords):
        zero = Jet.constant(0.0, coords[0].num_vars, coords[0].order)
        return [zero] * dim

    return ConformalFieldSpec(label="zero", builder=builder)
