"""Model-space catalog: spheres, hyperbolic balls, tori, products, warped products.

Constant-curvature factors use conformally flat charts (stereographic for
spheres, Poincare ball for hyperbolic space) so jets stay smooth on the whole
sample box; hyperbolic boxes are shrunk to 0.8 of the ball radius.  Warped
products put the base coordinate first: x^0 = t, metric dt^2 + h(t)^2 gbar.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from . import dsl
from .dsl import ExprAst
from .geometry import MetricChart
from .jets import Jet

__all__ = [
    "Sphere",
    "Hyperbolic",
    "FlatTorus",
    "ProductFiber",
    "CustomFiber",
    "FiberSpec",
    "WarpedProductSpec",
    "StaticPotentialSpec",
    "FactoredPotential",
    "ConformalFieldSpec",
    "WarpedGeometry",
    "make_sphere_chart",
    "make_hyperbolic_chart",
    "make_flat_torus_chart",
    "make_product_chart",
    "make_warped_chart",
    "make_basicex",
    "basicex_geometry",
    "basicex_radii",
    "build_fiber",
    "build_warped_geometry",
    "fiber_einstein_constant",
    "hyperbolic_static_potential",
    "sphere_height_potential",
    "basicex_potential",
    "ejiri_space",
    "basicex_space",
    "expwarp_space",
]


# -- fiber specifications ----------------------------------------------------


@dataclass(frozen=True)
class Sphere:
    dim: int
    radius: float = 1.0


@dataclass(frozen=True)
class Hyperbolic:
    dim: int
    radius: float = 1.0


@dataclass(frozen=True)
class FlatTorus:
    dim: int


@dataclass(frozen=True)
class ProductFiber:
    left: "FiberSpec"
    right: "FiberSpec"


@dataclass(frozen=True)
class CustomFiber:
    chart: MetricChart
    known_scalar: float | None = None
    known_einstein_constant: float | None = None


FiberSpec = Union[Sphere, Hyperbolic, FlatTorus, ProductFiber, CustomFiber]


@dataclass(frozen=True)
class WarpedProductSpec:
    interval: tuple[float, float]
    warping: ExprAst
    fiber: FiberSpec
    periodic: bool = False

    @staticmethod
    def from_strings(interval, warping: str, fiber: FiberSpec, periodic: bool = False) -> "WarpedProductSpec":
        return WarpedProductSpec(tuple(interval), dsl.parse(warping), fiber, periodic)


@dataclass(frozen=True)
class FactoredPotential:
    """f(t, y) = u(t) * fbar(y) with fbar living on the fiber chart."""

    u_of_t: Callable
    fiber_builder: Callable[[Sequence[Jet]], Jet]


@dataclass(frozen=True)
class StaticPotentialSpec:
    label: str
    builder: Callable[[Sequence[Jet]], Jet]
    a: float = 0.0
    b: float = 0.0
    factored: FactoredPotential | None = None

    def kappa(self, dim: int, scalar: float) -> float:
        return self.b + scalar * self.a / (dim * (dim - 1))


@dataclass(frozen=True)
class ConformalFieldSpec:
    label: str
    builder: Callable[[Sequence[Jet]], Sequence[Jet]]


@dataclass(frozen=True)
class WarpedGeometry:
    """A warped chart together with the pieces the closed-form checks need."""

    chart: MetricChart
    fiber_chart: MetricChart
    warping: Callable
    interval: tuple[float, float]
    periodic: bool
    xi: ConformalFieldSpec

    @property
    def dim(self) -> int:
        return self.chart.dim


# -- constant-curvature charts ----------------------------------------------


def _sum_squares(coords: Sequence[Jet]) -> Jet:
    s = coords[0] * coords[0]
    for c in coords[1:]:
        s = s + c * c
    return s


def make_sphere_chart(m: int, r: float) -> MetricChart:
    """Stereographic chart of S^m(r): g = (2r^2/(r^2+|x|^2))^2 delta, |x| < 3r."""
    if m < 1 or r <= 0:
        raise ValueError(f"sphere needs m >= 1, r > 0 (got m={m}, r={r})")
    r2 = r * r

    def builder(coords):
        lam = (2.0 * r2) / (r2 + _sum_squares(coords))
        lam2 = lam * lam
        return [[lam2 if i == j else 0.0 for j in range(m)] for i in range(m)]

    half = 3.0 * r / math.sqrt(m)
    return MetricChart(
        dim=m,
        label=f"S^{m}({r:g})",
        builder=builder,
        box=(np.full(m, -half), np.full(m, half)),
        known_scalar=m * (m - 1) / r2,
    )


def make_hyperbolic_chart(m: int, r: float) -> MetricChart:
    """Poincare-ball chart of H^m(r): g = (2r^2/(r^2-|x|^2))^2 delta, |x| <= 0.8r."""
    if m < 1 or r <= 0:
        raise ValueError(f"hyperbolic space needs m >= 1, r > 0 (got m={m}, r={r})")
    r2 = r * r

    def builder(coords):
        lam = (2.0 * r2) / (r2 - _sum_squares(coords))
        lam2 = lam * lam
        return [[lam2 if i == j else 0.0 for j in range(m)] for i in range(m)]

    half = 0.8 * r / math.sqrt(m)
    return MetricChart(
        dim=m,
        label=f"H^{m}({r:g})",
        builder=builder,
        box=(np.full(m, -half), np.full(m, half)),
        exclude=lambda p: float(np.dot(p, p)) >= (0.85 * r) ** 2,
        known_scalar=-m * (m - 1) / r2,
    )


def make_flat_torus_chart(m: int, length: float = 2.0 * math.pi) -> MetricChart:
    def builder(coords):
        return [[1.0 if i == j else 0.0 for j in range(m)] for i in range(m)]

    return MetricChart(
        dim=m,
        label=f"T^{m}",
        builder=builder,
        box=(np.zeros(m), np.full(m, length)),
        known_scalar=0.0,
        periods=(length,) * m,
    )


def make_product_chart(a: MetricChart, b: MetricChart) -> MetricChart:
    da, db = a.dim, b.dim

    def builder(coords):
        rows_a = a.builder(coords[:da])
        rows_b = b.builder(coords[da:])
        n = da + db
        out = [[0.0] * n for _ in range(n)]
        for i in range(da):
            for j in range(da):
                out[i][j] = rows_a[i][j]
        for i in range(db):
            for j in range(db):
                out[da + i][da + j] = rows_b[i][j]
        return out

    def exclude(p):
        if a.exclude is not None and a.exclude(p[:da]):
            return True
        return b.exclude is not None and b.exclude(p[da:])

    known = None
    if a.known_scalar is not None and b.known_scalar is not None:
        known = a.known_scalar + b.known_scalar
    periods = (a.periods or (None,) * da) + (b.periods or (None,) * db)
    return MetricChart(
        dim=da + db,
        label=f"{a.label} x {b.label}",
        builder=builder,
        box=(np.concatenate([a.box[0], b.box[0]]), np.concatenate([a.box[1], b.box[1]])),
        exclude=exclude if (a.exclude or b.exclude) else None,
        known_scalar=known,
        periods=periods if any(p is not None for p in periods) else None,
    )


def build_fiber(spec: FiberSpec) -> MetricChart:
    if isinstance(spec, Sphere):
        return make_sphere_chart(spec.dim, spec.radius)
    if isinstance(spec, Hyperbolic):
        return make_hyperbolic_chart(spec.dim, spec.radius)
    if isinstance(spec, FlatTorus):
        return make_flat_torus_chart(spec.dim)
    if isinstance(spec, ProductFiber):
        return make_product_chart(build_fiber(spec.left), build_fiber(spec.right))
    if isinstance(spec, CustomFiber):
        return spec.chart
    raise TypeError(f"not a fiber spec: {spec!r}")


def fiber_einstein_constant(spec: FiberSpec) -> float | None:
    """Ric = c g constant when the fiber is Einstein, else None."""
    if isinstance(spec, Sphere):
        return (spec.dim - 1) / spec.radius**2
    if isinstance(spec, Hyperbolic):
        return -(spec.dim - 1) / spec.radius**2
    if isinstance(spec, FlatTorus):
        return 0.0
    if isinstance(spec, ProductFiber):
        ca = fiber_einstein_constant(spec.left)
        cb = fiber_einstein_constant(spec.right)
        if ca is not None and cb is not None and abs(ca - cb) < 1e-12:
            return ca
        return None
    if isinstance(spec, CustomFiber):
        return spec.known_einstein_constant
    raise TypeError(f"not a fiber spec: {spec!r}")


# -- warped products ----------------------------------------------------------


def _assemble_warped(
    warping: Callable,
    fiber_chart: MetricChart,
    interval: tuple[float, float],
    periodic: bool,
    label: str,
) -> WarpedGeometry:
    t0, t1 = float(interval[0]), float(interval[1])
    if not t1 > t0:
        raise ValueError(f"empty interval {interval}")
    hs = [float(warping(t)) for t in np.linspace(t0, t1, 257)]
    if min(hs) <= 0.0:
        raise ValueError(f"warping function is nonpositive on [{t0}, {t1}] (min {min(hs):g})")
    dfib = fiber_chart.dim
    n = 1 + dfib
    if n < 3:
        raise ValueError(f"warped product needs total dim >= 3, got {n}")

    def builder(coords):
        h = warping(coords[0])
        h2 = h * h
        fiber_rows = fiber_chart.builder(coords[1:])
        out = [[0.0] * n for _ in range(n)]
        out[0][0] = 1.0
        for i in range(dfib):
            for j in range(dfib):
                entry = fiber_rows[i][j]
                if isinstance(entry, Jet) or entry != 0.0:
                    out[1 + i][1 + j] = h2 * entry
        return out

    def exclude(p):
        return fiber_chart.exclude is not None and fiber_chart.exclude(p[1:])

    chart = MetricChart(
        dim=n,
        label=label,
        builder=builder,
        box=(
            np.concatenate([[t0], fiber_chart.box[0]]),
            np.concatenate([[t1], fiber_chart.box[1]]),
        ),
        exclude=exclude if fiber_chart.exclude else None,
        periods=((t1 - t0 if periodic else None,) + (fiber_chart.periods or (None,) * dfib)),
    )

    def xi_builder(coords):
        h = warping(coords[0])
        zero = Jet.constant(0.0, coords[0].num_vars, coords[0].order)
        return [h] + [zero] * dfib

    xi = ConformalFieldSpec(label="h d/dt", builder=xi_builder)
    return WarpedGeometry(chart, fiber_chart, warping, (t0, t1), periodic, xi)


def build_warped_geometry(spec: WarpedProductSpec) -> WarpedGeometry:
    fiber_chart = build_fiber(spec.fiber)
    h_src = dsl.unparse(spec.warping)

    def warping(t):
        return dsl.eval_expr(spec.warping, t)

    label = f"I x_h {fiber_chart.label} [h={h_src}]"
    return _assemble_warped(warping, fiber_chart, spec.interval, spec.periodic, label)


def make_warped_chart(spec: WarpedProductSpec) -> tuple[MetricChart, ConformalFieldSpec]:
    """Warped chart dt^2 + h(t)^2 gbar plus the distinguished field h d/dt."""
    wg = build_warped_geometry(spec)
    return wg.chart, wg.xi


# -- static potentials ---------------------------------------------------------


def hyperbolic_static_potential(m: int, r: float) -> StaticPotentialSpec:
    """The x0 hyperboloid coordinate on the Poincare ball: Hess f = (f/r^2) g."""
    if m < 1:
        raise ValueError("hyperbolic potential needs m >= 1")
    r2 = r * r

    def builder(coords):
        s = _sum_squares(coords)
        return r * (r2 + s) / (r2 - s)

    return StaticPotentialSpec(label=f"x0 on H^{m}({r:g})", builder=builder)


def sphere_height_potential(m: int, r: float, axis: int, shift: float = 0.0) -> StaticPotentialSpec:
    """Ambient height function y_axis (+ shift) on the stereographic chart.

    Solves Hess f + (f - shift)/r^2 g = 0; as a generalized-equation solution
    it carries a = 0, b = shift/r^2.
    """
    if not 1 <= axis <= m + 1:
        raise ValueError(f"axis must be in 1..{m + 1}")
    r2 = r * r

    def builder(coords):
        s = _sum_squares(coords)
        if axis == m + 1:
            f = r * (s - r2) / (r2 + s)
        else:
            f = 2.0 * r2 * coords[axis - 1] / (r2 + s)
        return f + shift if shift else f

    return StaticPotentialSpec(
        label=f"y_{axis}{f'+{shift:g}' if shift else ''} on S^{m}({r:g})",
        builder=builder,
        b=shift / r2,
    )


# -- Example-1 style assemblies -------------------------------------------------


def basicex_radii(n: int, k: int) -> tuple[float, float]:
    return math.sqrt(k / (n - 1)), math.sqrt((n - k - 2) / (n - 1))


def basicex_potential(n: int, k: int) -> StaticPotentialSpec:
    """cosh(t) times the x0 potential of the first hyperbolic factor."""
    r_k, _ = basicex_radii(n, k)
    r2 = r_k * r_k

    def fiber_builder(coords):
        s = _sum_squares(coords[:k])
        return r_k * (r2 + s) / (r2 - s)

    def builder(coords):
        return coords[0].elem("cosh") * fiber_builder(coords[1:])

    def u_of_t(t):
        return t.elem("cosh") if isinstance(t, Jet) else math.cosh(t)

    return StaticPotentialSpec(
        label=f"cosh(t) f_{{{k},r_{k}}}",
        builder=builder,
        factored=FactoredPotential(u_of_t=u_of_t, fiber_builder=fiber_builder),
    )


def basicex_geometry(n: int, k: int) -> tuple[WarpedGeometry, StaticPotentialSpec]:
    if not (1 <= k <= n - 3):
        raise ValueError(f"basicex needs 1 <= k <= n-3, got n={n}, k={k}")
    r_k, s_k = basicex_radii(n, k)
    fiber = ProductFiber(Hyperbolic(k, r_k), Hyperbolic(n - k - 1, s_k))
    spec = WarpedProductSpec.from_strings((-1.2, 1.2), "cosh(t)", fiber)
    wg = build_warped_geometry(spec)
    label = f"R x_cosh (H^{k}({r_k:.4g}) x H^{n - k - 1}({s_k:.4g})), n={n}"
    chart = MetricChart(
        dim=wg.chart.dim,
        label=label,
        builder=wg.chart.builder,
        box=wg.chart.box,
        exclude=wg.chart.exclude,
        known_scalar=-n * (n - 1),
        periods=wg.chart.periods,
    )
    wg = WarpedGeometry(chart, wg.fiber_chart, wg.warping, wg.interval, wg.periodic, wg.xi)
    return wg, basicex_potential(n, k)


def make_basicex(n: int, k: int) -> tuple[MetricChart, StaticPotentialSpec]:
    """The warped vacuum static space R x_cosh (H^k x H^(n-k-1)) with its potential."""
    wg, pot = basicex_geometry(n, k)
    return wg.chart, pot


# -- named catalog spaces --------------------------------------------------------


def ejiri_space() -> WarpedGeometry:
    """S^1 x_h S^3(1) with h = sqrt(2 + sin t): constant scalar curvature 3."""
    spec = WarpedProductSpec.from_strings((0.0, 2.0 * math.pi), "sqrt(2+sin(t))", Sphere(3, 1.0), periodic=True)
    wg = build_warped_geometry(spec)
    chart = MetricChart(
        dim=wg.chart.dim,
        label="S^1 x_h S^3(1) [h=sqrt(2+sin t)]",
        builder=wg.chart.builder,
        box=wg.chart.box,
        exclude=wg.chart.exclude,
        known_scalar=3.0,
        periods=wg.chart.periods,
    )
    return WarpedGeometry(chart, wg.fiber_chart, wg.warping, wg.interval, wg.periodic, wg.xi)


def basicex_space(n: int, k: int) -> WarpedGeometry:
    return basicex_geometry(n, k)[0]


def expwarp_space(n: int) -> WarpedGeometry:
    """Nonconstant scalar curvature example: h = exp(t/5) over a round fiber."""
    fiber = Sphere(n - 1, 1.0)
    spec = WarpedProductSpec.from_strings((-1.0, 1.0), "exp(t/5)", fiber)
    return build_warped_geometry(spec)
