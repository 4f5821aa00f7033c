"""Curvature of a metric chart via jet arithmetic.

Everything downstream of the metric (Christoffel symbols, Riemann, Ricci,
scalar, Schouten, trace-free Ricci, Weyl, Cotton, Cotton divergence) is
computed as jet-valued tensors at one point, so covariant derivatives of
any computed field are one :meth:`CurvatureBundle.covariant_derivative`
call away.  Index conventions:

* ``R^l_{ijk} d_l = R(d_j, d_k) d_i`` and ``R_ijkl = g_is R^s_jkl`` --
  hence ``R_ijkl`` is antisymmetric in (i,j) and (k,l) and symmetric under
  swapping the pairs, and a constant-curvature metric has
  ``R = (kappa/2) (g KN g)``.
* ``Ric_ij = g^kl R_ikjl``, ``A = Ric - R/(2(n-1)) g``,
  ``C_ijk = A_{ij,k} - A_{ik,j}``, ``Xi_ik = C_{ijk,j}``.
* Comma derivatives append the derivative index last, so
  ``T_{ij,k}`` is ``cov(T)[i, j, k]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from .jets import Jet, JetTensor, jet_space, jt_einsum
from .sampling import halton_points
from .tensors import TensorValue, tensor_norm_sq
from .tensors import tensor_norm as _components_norm

__all__ = [
    "MetricChart",
    "CurvatureBundle",
    "SingularMetricError",
    "christoffel",
    "riemann",
    "curvature_bundle",
    "kulkarni_nomizu",
    "interior_mult",
    "tensor_norm",
]

COND_LIMIT = 1e12


class SingularMetricError(ValueError):
    """Metric matrix not usably positive definite at the requested point."""


MetricBuilder = Callable[[Sequence[Jet]], Sequence[Sequence[Jet | float]]]


@dataclass(frozen=True)
class MetricChart:
    """A coordinate chart with jet-evaluable metric components.

    ``builder`` maps the coordinate jets (one Jet per coordinate, all in one
    space) to the n x n matrix of metric component jets; plain numbers are
    accepted for constant components.
    """

    dim: int
    label: str
    builder: MetricBuilder
    box: tuple[np.ndarray, np.ndarray]
    exclude: Callable[[np.ndarray], bool] | None = None
    known_scalar: float | None = None
    periods: tuple[float | None, ...] | None = None

    def coordinate_jets(self, point: np.ndarray, order: int) -> list[Jet]:
        point = np.asarray(point, dtype=float)
        if point.shape != (self.dim,):
            raise ValueError(f"point has shape {point.shape}, chart dim is {self.dim}")
        return [Jet.variable(i, point[i], self.dim, order) for i in range(self.dim)]

    def metric_jets(self, point: np.ndarray, order: int) -> JetTensor:
        coords = self.coordinate_jets(point, order)
        rows = self.builder(coords)
        jets = [
            [
                entry if isinstance(entry, Jet) else Jet.constant(float(entry), self.dim, order)
                for entry in row
            ]
            for row in rows
        ]
        return JetTensor.from_jets(jets)

    def contains(self, point: np.ndarray) -> bool:
        lo, hi = self.box
        point = np.asarray(point, dtype=float)
        if np.any(point < lo) or np.any(point > hi):
            return False
        return not (self.exclude is not None and self.exclude(point))

    def sample_points(self, count: int, offset: int = 0) -> np.ndarray:
        """Low-discrepancy (Halton) points inside the box, exclusion applied."""
        lo, hi = self.box
        out = []
        index = offset
        while len(out) < count:
            batch = halton_points(self.dim, count, index)
            index += count
            for u in batch:
                p = lo + u * (hi - lo)
                if self.contains(p):
                    out.append(p)
                    if len(out) == count:
                        break
        return np.array(out)


def _jt_const_matmul(mat: np.ndarray, t: JetTensor) -> JetTensor:
    return JetTensor(t.space, np.einsum("ij,jkz->ikz", mat, t.data))


class CurvatureBundle:
    """All curvature data of one chart at one point, computed lazily as jets.

    ``order`` is the metric jet order: 2 suffices for Riemann/Ricci/scalar,
    3 adds the Cotton tensor, 4 adds the Cotton divergence and anything that
    differentiates a computed field twice.
    """

    def __init__(self, chart: MetricChart, point: np.ndarray, order: int = 3):
        self.chart = chart
        self.point = np.asarray(point, dtype=float)
        self.order = order
        self.dim = chart.dim
        self.space = jet_space(chart.dim, order)

    # -- metric ----------------------------------------------------------

    @cached_property
    def g(self) -> JetTensor:
        return self.chart.metric_jets(self.point, self.order)

    @cached_property
    def g0(self) -> np.ndarray:
        return self.g.value

    @cached_property
    def ginv0(self) -> np.ndarray:
        g0 = self.g0
        try:
            np.linalg.cholesky(g0)
        except np.linalg.LinAlgError:
            raise SingularMetricError(
                f"metric not positive definite at {self.point} on {self.chart.label!r}"
            ) from None
        if np.linalg.cond(g0) > COND_LIMIT:
            raise SingularMetricError(
                f"singular metric (cond > {COND_LIMIT:g}) at {self.point} on {self.chart.label!r}"
            )
        return np.linalg.inv(g0)

    @cached_property
    def ginv(self) -> JetTensor:
        # Neumann series: with g = g0 + N, inverse = sum_j (-G0 N)^j G0,
        # exact at jet order k after k terms because N has no value part.
        g0inv = self.ginv0
        n_mat = self.g - JetTensor.const(self.space, self.g0)
        x = JetTensor.const(self.space, g0inv)
        for _ in range(self.order):
            x = JetTensor.const(self.space, g0inv) - _jt_const_matmul(g0inv, jt_einsum("ij,jk->ik", n_mat, x))
        return x

    # -- connection and curvature ----------------------------------------

    @cached_property
    def gamma(self) -> JetTensor:
        """Christoffel symbols, axes (k, i, j) for Gamma^k_ij."""
        dg = self.g.partials()  # (i, j, deriv)
        # d_i g_jl + d_j g_il - d_l g_ij, laid out as (i, j, l)
        sym = dg.transpose("jli->ijl") + dg.transpose("ilj->ijl") - dg
        return jt_einsum("kl,ijl->kij", self.ginv, sym) * 0.5

    @cached_property
    def riemann13(self) -> JetTensor:
        """R^l_{ijk}, axes (l, i, j, k)."""
        gamma = self.gamma
        dgamma = gamma.partials()  # (upper, low1, low2, deriv)
        term = dgamma.transpose("lkij->lijk") - dgamma.transpose("ljik->lijk")
        term = term + jt_einsum("mki,ljm->lijk", gamma, gamma)
        term = term - jt_einsum("mji,lkm->lijk", gamma, gamma)
        return term

    @cached_property
    def riemann4(self) -> JetTensor:
        """R_ijkl = g_is R^s_jkl."""
        return jt_einsum("is,sjkl->ijkl", self.g, self.riemann13)

    @cached_property
    def ric(self) -> JetTensor:
        """Ric_ij = g^kl R_ikjl."""
        return jt_einsum("kl,ikjl->ij", self.ginv, self.riemann4)

    @cached_property
    def scalar_jet(self) -> JetTensor:
        return jt_einsum("ij,ij->", self.ginv, self.ric)

    @property
    def scalar(self) -> float:
        return float(self.scalar_jet.value)

    @cached_property
    def schouten(self) -> JetTensor:
        self._need_dim(3, "Schouten tensor")
        return self.ric - self.scalar_jet_times_g / (2.0 * (self.dim - 1))

    @cached_property
    def scalar_jet_times_g(self) -> JetTensor:
        return jt_einsum(",ij->ij", self.scalar_jet, self.g)

    @cached_property
    def efield(self) -> JetTensor:
        """Trace-free Ricci E_ij = Ric_ij - (R/n) g_ij."""
        return self.ric - self.scalar_jet_times_g / float(self.dim)

    @cached_property
    def weyl(self) -> JetTensor:
        self._need_dim(3, "Weyl tensor")
        return self.riemann4 - kulkarni_nomizu_jets(self.schouten, self.g) / (self.dim - 2.0)

    @cached_property
    def cotton(self) -> JetTensor:
        """C_ijk = A_{ij,k} - A_{ik,j}."""
        self._need_dim(3, "Cotton tensor")
        da = self.covariant_derivative(self.schouten, ("l", "l"))
        return da - da.transpose("ijk->ikj")

    @cached_property
    def cotton_divergence(self) -> JetTensor:
        """Xi_ik = C_{ijk,j} (divergence over the middle slot)."""
        dc = self.covariant_derivative(self.cotton, ("l", "l", "l"))
        return jt_einsum("jl,ijkl->ik", self.ginv, dc)

    @cached_property
    def nabla_riemann(self) -> JetTensor:
        """R_{ijkl,m} with the derivative index last."""
        return self.covariant_derivative(self.riemann4, ("l", "l", "l", "l"))

    def _need_dim(self, minimum: int, what: str) -> None:
        if self.dim < minimum:
            raise ValueError(f"{what} requires dim >= {minimum}, chart has dim {self.dim}")

    # -- field evaluation --------------------------------------------------

    @cached_property
    def coords(self) -> list[Jet]:
        return self.chart.coordinate_jets(self.point, self.order)

    def scalar_field(self, builder) -> JetTensor:
        """Evaluate a scalar field builder at this point as a jet."""
        out = builder(self.coords)
        if not isinstance(out, Jet):
            out = Jet.constant(float(out), self.dim, self.order)
        return JetTensor(out.space, out.coeffs)

    def vector_field(self, builder) -> JetTensor:
        """Evaluate a vector field builder; components are contravariant."""
        comps = [
            c if isinstance(c, Jet) else Jet.constant(float(c), self.dim, self.order)
            for c in builder(self.coords)
        ]
        if len(comps) != self.dim:
            raise ValueError(f"vector field has {len(comps)} components, chart dim {self.dim}")
        return JetTensor.from_jets(comps)

    # -- derived operators -------------------------------------------------

    def covariant_derivative(self, t: JetTensor, variance: tuple[str, ...]) -> JetTensor:
        """One covariant derivative; the new (covariant) index goes last."""
        rank = len(variance)
        if t.data.ndim - 1 != rank:
            raise ValueError(f"tensor rank {t.data.ndim - 1} != variance length {rank}")
        out = t.partials()
        letters = "abcdefgh"[:rank]
        for pos, flag in enumerate(variance):
            tsub = letters[:pos] + "s" + letters[pos + 1 :]
            if flag == "l":
                out = out - jt_einsum(f"si{letters[pos]},{tsub}->{letters}i", self.gamma, t)
            else:
                out = out + jt_einsum(f"{letters[pos]}is,{tsub}->{letters}i", self.gamma, t)
        return out

    def gradient(self, f: JetTensor) -> JetTensor:
        """df as a covariant rank-1 jet tensor (f scalar-shaped)."""
        return f.partials()

    def hessian(self, f: JetTensor) -> JetTensor:
        """Hess f (0,2); symmetric up to round-off."""
        return self.covariant_derivative(self.gradient(f), ("l",))

    def laplacian(self, f: JetTensor) -> JetTensor:
        return jt_einsum("ij,ij->", self.ginv, self.hessian(f))

    def lstar(self, f: JetTensor) -> JetTensor:
        """Formal adjoint of the linearized scalar curvature: Hess f - (Lap f) g - f Ric."""
        hess = self.hessian(f)
        lap_g = jt_einsum(",ij->ij", self.laplacian(f), self.g)
        f_ric = jt_einsum(",ij->ij", f, self.ric)
        return hess - lap_g - f_ric

    def raise_index(self, t: JetTensor, axis: int, rank: int) -> JetTensor:
        letters = "abcdefgh"[:rank]
        tsub = letters[:axis] + "s" + letters[axis + 1 :]
        return jt_einsum(f"{letters[axis]}s,{tsub}->{letters}", self.ginv, t)

    def norm(self, components: np.ndarray, variance: tuple[str, ...]) -> float:
        return _components_norm(components, variance, self.g0, self.ginv0)

    def norm_sq(self, components: np.ndarray, variance: tuple[str, ...]) -> float:
        return tensor_norm_sq(components, variance, self.g0, self.ginv0)

    def jnorm(self, t: JetTensor, variance: tuple[str, ...]) -> float:
        return self.norm(t.value, variance)

    # -- pointwise views ----------------------------------------------------

    def _tv(self, t: JetTensor, variance: tuple[str, ...]) -> TensorValue:
        return TensorValue(t.value, variance, self.point)

    @property
    def christoffel_value(self) -> TensorValue:
        return self._tv(self.gamma, ("u", "l", "l"))

    @property
    def riemann_value(self) -> TensorValue:
        return self._tv(self.riemann4, ("l",) * 4)

    @property
    def ricci_value(self) -> TensorValue:
        return self._tv(self.ric, ("l", "l"))

    @property
    def schouten_value(self) -> TensorValue:
        return self._tv(self.schouten, ("l", "l"))

    @property
    def efield_value(self) -> TensorValue:
        return self._tv(self.efield, ("l", "l"))

    @property
    def weyl_value(self) -> TensorValue:
        return self._tv(self.weyl, ("l",) * 4)

    @property
    def cotton_value(self) -> TensorValue:
        return self._tv(self.cotton, ("l", "l", "l"))

    @property
    def cotton_divergence_value(self) -> TensorValue:
        return self._tv(self.cotton_divergence, ("l", "l"))


# -- module-level operations (spec surface) ---------------------------------


def christoffel(chart: MetricChart, point: np.ndarray) -> TensorValue:
    """Levi-Civita connection coefficients Gamma^k_ij at a point."""
    return CurvatureBundle(chart, point, order=1).christoffel_value


def riemann(chart: MetricChart, point: np.ndarray) -> TensorValue:
    """Covariant curvature tensor R_ijkl at a point."""
    return CurvatureBundle(chart, point, order=2).riemann_value


def curvature_bundle(chart: MetricChart, point: np.ndarray, want_xi_div: bool = False, order: int | None = None) -> CurvatureBundle:
    """Full curvature hierarchy at a point (jets retained for differentiation)."""
    if order is None:
        order = 4 if want_xi_div else 3
    bundle = CurvatureBundle(chart, point, order=order)
    if want_xi_div:
        bundle.cotton_divergence  # force evaluation so errors surface here
    return bundle


def tensor_norm(t: TensorValue, chart: MetricChart) -> float:
    """g-norm of a pointwise tensor, indices raised/lowered by the chart metric."""
    bundle = CurvatureBundle(chart, t.point, order=1)
    return bundle.norm(t.components, t.variance)


def kulkarni_nomizu_jets(u: JetTensor, v: JetTensor) -> JetTensor:
    t1 = jt_einsum("ik,jl->ijkl", u, v)
    t2 = jt_einsum("il,jk->ijkl", u, v)
    return t1 + t1.transpose("ijkl->jilk") - t2 - t2.transpose("ijkl->jilk")


def kulkarni_nomizu(u: TensorValue, v: TensorValue) -> TensorValue:
    """(U KN V)_ijkl = U_ik V_jl + U_jl V_ik - U_il V_jk - U_jk V_il."""
    if u.variance != ("l", "l") or v.variance != ("l", "l"):
        raise ValueError("Kulkarni-Nomizu product expects two covariant 2-tensors")
    if u.components.shape != v.components.shape:
        raise ValueError("Kulkarni-Nomizu operands must share dimensions")
    a, b = u.components, v.components
    comps = (
        np.einsum("ik,jl->ijkl", a, b)
        + np.einsum("jl,ik->ijkl", a, b)
        - np.einsum("il,jk->ijkl", a, b)
        - np.einsum("jk,il->ijkl", a, b)
    )
    return TensorValue(comps, ("l",) * 4, u.point)


def interior_mult(xi: TensorValue, t: TensorValue) -> TensorValue:
    """Left interior multiplication: (i_xi T)(X_1, ..) = T(xi, X_1, ..)."""
    if xi.variance != ("u",):
        raise ValueError("interior multiplication expects a contravariant vector")
    if t.rank < 1 or t.variance[0] != "l":
        raise ValueError("interior multiplication expects a covariant tensor of rank >= 1")
    comps = np.einsum("a,a...->...", xi.components, t.components)
    return TensorValue(np.asarray(comps), t.variance[1:], t.point)
