"""Numerical verification of curvature identities on warped-product metrics."""

from .geometry import (
    CurvatureBundle,
    MetricChart,
    SingularMetricError,
    christoffel,
    curvature_bundle,
    interior_mult,
    kulkarni_nomizu,
    riemann,
    tensor_norm,
)
from .jets import Jet, JetTensor, extract_partial, jet_arith, jet_elem, jet_var
from .spaces import (
    ConformalFieldSpec,
    StaticPotentialSpec,
    WarpedProductSpec,
    make_basicex,
    make_hyperbolic_chart,
    make_product_chart,
    make_sphere_chart,
    make_warped_chart,
)
from .tensors import TensorValue

__version__ = "0.1.0"

__all__ = [
    "CurvatureBundle",
    "MetricChart",
    "SingularMetricError",
    "TensorValue",
    "Jet",
    "JetTensor",
    "ConformalFieldSpec",
    "StaticPotentialSpec",
    "WarpedProductSpec",
    "christoffel",
    "curvature_bundle",
    "interior_mult",
    "kulkarni_nomizu",
    "riemann",
    "tensor_norm",
    "jet_var",
    "jet_arith",
    "jet_elem",
    "extract_partial",
    "make_basicex",
    "make_hyperbolic_chart",
    "make_product_chart",
    "make_sphere_chart",
    "make_warped_chart",
    "__version__",
]
