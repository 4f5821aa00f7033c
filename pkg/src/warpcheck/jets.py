"""Truncated multivariate Taylor (jet) arithmetic.

A jet stores the normalized Taylor coefficients d^a f / a! of a scalar
function at a base point, for all multi-indices a with |a| <= order.  With
that normalization, multiplication is a plain truncated convolution and the
whole layer reduces to index bookkeeping on flat numpy arrays.

Two views are provided:

* :class:`Jet` -- a single scalar jet with operator sugar.  Arithmetic
  between two jets requires identical ``(num_vars, order)``.
* :class:`JetTensor` -- an ndarray of jets sharing one :class:`JetSpace`
  (coefficient axis last).  This is the workhorse of the curvature
  pipeline; :func:`jt_einsum` fuses tensor contraction with the Cauchy
  product so geometry code reads like ordinary einsum code.

Multi-indices are ordered graded-lexicographically (total degree first).
Because that ordering is degree-graded, the coefficient array of a
lower-order jet is a prefix of the higher-order layout, which makes
truncation a slice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable

import numpy as np

__all__ = [
    "Jet",
    "JetTensor",
    "JetSpace",
    "JetDomainError",
    "JetShapeError",
    "jet_space",
    "jet_var",
    "jet_arith",
    "jet_elem",
    "extract_partial",
    "jt_einsum",
    "ELEMENTARY_FUNCTIONS",
]


class JetShapeError(ValueError):
    """Arithmetic between jets with mismatched (num_vars, order)."""


class JetDomainError(ValueError):
    """Elementary function evaluated outside its domain at the jet value."""


def _multi_indices(num_vars: int, order: int) -> list[tuple[int, ...]]:
    """All multi-indices with |a| <= order, graded-lexicographic."""

    def compositions(total: int, parts: int) -> Iterable[tuple[int, ...]]:
        if parts == 1:
            yield (total,)
            return
        for first in range(total, -1, -1):
            for rest in compositions(total - first, parts - 1):
                yield (first,) + rest

    out: list[tuple[int, ...]] = []
    for degree in range(order + 1):
        out.extend(compositions(degree, num_vars))
    return out


class JetSpace:
    """Index tables for jets in ``num_vars`` variables up to ``order``.

    Instances are interned via :func:`jet_space`; everything on them is
    immutable after construction except lazily built lookup tables.
    """

    def __init__(self, num_vars: int, order: int):
        if num_vars < 1:
            raise ValueError(f"num_vars must be >= 1, got {num_vars}")
        if order < 0:
            raise ValueError(f"order must be >= 0, got {order}")
        self.num_vars = num_vars
        self.order = order
        self.multi_indices = _multi_indices(num_vars, order)
        self.index = {alpha: i for i, alpha in enumerate(self.multi_indices)}
        self.n_coeffs = len(self.multi_indices)
        self.degrees = np.array([sum(a) for a in self.multi_indices])
        self.factorials = np.array(
            [math.prod(math.factorial(ai) for ai in alpha) for alpha in self.multi_indices],
            dtype=float,
        )
        self._mul_table: tuple[np.ndarray, np.ndarray, np.ndarray] | None = None
        self._diff_tables: dict[int, tuple[np.ndarray, np.ndarray]] = {}
        self._embed_tables: dict[tuple[int, tuple[int, ...]], np.ndarray] = {}

    # -- lookup tables -------------------------------------------------

    @property
    def mul_table(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(a_idx, b_idx, group_starts) for the truncated Cauchy product.

        Pairs are sorted by output slot so a segmented sum
        (``np.add.reduceat``) finishes the convolution.
        """
        if self._mul_table is None:
            triples = []
            for p, alpha in enumerate(self.multi_indices):
                da = sum(alpha)
                for q, beta in enumerate(self.multi_indices):
                    if da + sum(beta) > self.order:
                        continue
                    gamma = tuple(x + y for x, y in zip(alpha, beta))
                    triples.append((self.index[gamma], p, q))
            triples.sort()
            g_idx = np.array([t[0] for t in triples])
            a_idx = np.array([t[1] for t in triples])
            b_idx = np.array([t[2] for t in triples])
            starts = np.searchsorted(g_idx, np.arange(self.n_coeffs))
            self._mul_table = (a_idx, b_idx, starts)
        return self._mul_table

    def diff_table(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        """(source slot, scale) mapping coefficients of f to those of df/dx_i.

        The result lives in the space of one lower order:
        coeff(df/dx_i)[b] = coeff(f)[b + e_i] * (b_i + 1).
        """
        if i not in self._diff_tables:
            lower = jet_space(self.num_vars, self.order - 1)
            src = np.empty(lower.n_coeffs, dtype=int)
            fac = np.empty(lower.n_coeffs, dtype=float)
            for j, beta in enumerate(lower.multi_indices):
                shifted = tuple(b + (1 if a == i else 0) for a, b in enumerate(beta))
                src[j] = self.index[shifted]
                fac[j] = beta[i] + 1
            self._diff_tables[i] = (src, fac)
        return self._diff_tables[i]

    def embed_table(self, sub: "JetSpace", var_positions: tuple[int, ...]) -> np.ndarray:
        """Slot mapping that places a jet of ``sub`` into this space.

        ``var_positions[j]`` is the coordinate of this space carrying the
        j-th variable of ``sub``; all other partials are zero.
        """
        key = (id(sub), var_positions)
        if key not in self._embed_tables:
            tgt = np.empty(sub.n_coeffs, dtype=int)
            for j, alpha in enumerate(sub.multi_indices):
                full = [0] * self.num_vars
                for a, pos in zip(alpha, var_positions):
                    full[pos] = a
                tgt[j] = self.index[tuple(full)]
            self._embed_tables[key] = tgt
        return self._embed_tables[key]

    def __repr__(self) -> str:
        return f"JetSpace(num_vars={self.num_vars}, order={self.order})"


@lru_cache(maxsize=None)
def jet_space(num_vars: int, order: int) -> JetSpace:
    return JetSpace(num_vars, order)


# -- raw-array kernels --------------------------------------------------


def _raw_mul(space: JetSpace, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a_idx, b_idx, starts = space.mul_table
    prod = a[..., a_idx] * b[..., b_idx]
    return np.add.reduceat(prod, starts, axis=-1)


def _raw_compose(space: JetSpace, series: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Compose a univariate power series with a jet (Horner form).

    ``series`` has shape (order+1, *slot_shape): series[j] is the j-th
    Taylor coefficient of the outer function at the jet's value part.
    """
    tilde = x.copy()
    tilde[..., 0] = 0.0
    out = np.zeros_like(x)
    out[..., 0] = series[space.order] if space.order < len(series) else 0.0
    for j in range(min(space.order, len(series) - 1) - 1, -1, -1):
        out = _raw_mul(space, out, tilde)
        out[..., 0] += series[j]
    if space.order == 0:
        out[..., 0] = series[0]
    return out


def _series_cyclic(values4, v: np.ndarray, order: int) -> np.ndarray:
    """Taylor coefficients for functions whose derivatives cycle (period 4 or 2)."""
    coeffs = np.empty((order + 1,) + np.shape(v))
    for j in range(order + 1):
        coeffs[j] = values4[j % len(values4)](v) / math.factorial(j)
    return coeffs


def _check_positive(name: str, v: np.ndarray) -> None:
    bad = np.asarray(v) <= 0
    if np.any(bad):
        off = np.asarray(v)[bad].flat[0] if np.ndim(v) else v
        raise JetDomainError(f"{name} requires a positive value part, got {off!r}")


def _elem_series(name: str, v: np.ndarray, order: int, exponent: float | None = None) -> np.ndarray:
    if name == "exp":
        e = np.exp(v)
        return np.stack([e / math.factorial(j) for j in range(order + 1)])
    if name == "log":
        _check_positive("log", v)
        coeffs = [np.log(v)]
        for j in range(1, order + 1):
            coeffs.append((-1.0) ** (j - 1) / (j * v**j))
        return np.stack(coeffs)
    if name == "sqrt":
        _check_positive("sqrt", v)
        coeffs = [np.sqrt(v)]
        c = 0.5
        for j in range(1, order + 1):
            coeffs.append(c * v ** (0.5 - j))
            c *= (0.5 - j) / (j + 1)
        return np.stack(coeffs)
    if name == "sin":
        return _series_cyclic([np.sin, np.cos, lambda x: -np.sin(x), lambda x: -np.cos(x)], v, order)
    if name == "cos":
        return _series_cyclic([np.cos, lambda x: -np.sin(x), lambda x: -np.cos(x), np.sin], v, order)
    if name == "sinh":
        return _series_cyclic([np.sinh, np.cosh], v, order)
    if name == "cosh":
        return _series_cyclic([np.cosh, np.sinh], v, order)
    if name == "pow_const":
        if exponent is None:
            raise ValueError("pow_const requires an exponent")
        p = float(exponent)
        if not float(p).is_integer():
            _check_positive(f"pow_const({p})", v)
        elif p < 0 and np.any(np.asarray(v) == 0):
            raise JetDomainError(f"pow_const({p}) requires a nonzero value part")
        coeffs = []
        c = 1.0
        for j in range(order + 1):
            with np.errstate(invalid="ignore"):
                term = np.where(c == 0.0, 0.0, c * v ** (p - j)) if float(p).is_integer() else c * v ** (p - j)
            coeffs.append(np.asarray(term, dtype=float))
            c *= (p - j) / (j + 1)
        return np.stack(coeffs)
    raise ValueError(f"unknown elementary function {name!r}")


def _raw_elem(space: JetSpace, name: str, x: np.ndarray, exponent: float | None = None) -> np.ndarray:
    if name == "tan":
        return _raw_div(space, _raw_elem(space, "sin", x), _raw_elem(space, "cos", x), fn="tan")
    if name == "tanh":
        return _raw_div(space, _raw_elem(space, "sinh", x), _raw_elem(space, "cosh", x), fn="tanh")
    series = _elem_series(name, x[..., 0], space.order, exponent)
    return _raw_compose(space, series, x)


def _raw_div(space: JetSpace, a: np.ndarray, b: np.ndarray, fn: str | None = None) -> np.ndarray:
    v = b[..., 0]
    if np.any(v == 0.0):
        what = f"{fn} pole" if fn else "division by jet with zero value part"
        raise JetDomainError(what)
    series = _elem_series("pow_const", v, space.order, exponent=-1.0)
    return _raw_mul(space, a, _raw_compose(space, series, b))


# -- scalar jets ---------------------------------------------------------


@dataclass(frozen=True)
class Jet:
    """A single scalar jet: normalized Taylor coefficients at a point."""

    space: JetSpace
    coeffs: np.ndarray

    # construction

    @staticmethod
    def variable(i: int, value: float, num_vars: int, order: int) -> "Jet":
        if order < 1:
            raise ValueError(f"order must be >= 1, got {order}")
        if not 0 <= i < num_vars:
            raise IndexError(f"variable index {i} out of range for {num_vars} variables")
        space = jet_space(num_vars, order)
        coeffs = np.zeros(space.n_coeffs)
        coeffs[0] = value
        unit = tuple(1 if j == i else 0 for j in range(num_vars))
        coeffs[space.index[unit]] = 1.0
        return Jet(space, coeffs)

    @staticmethod
    def constant(value: float, num_vars: int, order: int) -> "Jet":
        space = jet_space(num_vars, order)
        coeffs = np.zeros(space.n_coeffs)
        coeffs[0] = float(value)
        return Jet(space, coeffs)

    # basic queries

    @property
    def num_vars(self) -> int:
        return self.space.num_vars

    @property
    def order(self) -> int:
        return self.space.order

    @property
    def value(self) -> float:
        return float(self.coeffs[0])

    def partial(self, alpha: tuple[int, ...]) -> float:
        """Return the raw partial derivative d^alpha f at the base point."""
        alpha = tuple(int(a) for a in alpha)
        if len(alpha) != self.num_vars:
            raise JetShapeError(f"multi-index length {len(alpha)} != num_vars {self.num_vars}")
        if sum(alpha) > self.order:
            raise JetShapeError(f"|alpha| = {sum(alpha)} exceeds jet order {self.order}")
        i = self.space.index[alpha]
        return float(self.coeffs[i] * self.space.factorials[i])

    def truncate(self, order: int) -> "Jet":
        if order > self.order:
            raise JetShapeError(f"cannot extend a jet of order {self.order} to {order}")
        lower = jet_space(self.num_vars, order)
        return Jet(lower, self.coeffs[: lower.n_coeffs].copy())

    # arithmetic

    def _coerce(self, other) -> "Jet":
        if isinstance(other, Jet):
            if other.space is not self.space:
                raise JetShapeError(
                    f"jet shape mismatch: ({self.num_vars},{self.order}) vs "
                    f"({other.num_vars},{other.order})"
                )
            return other
        if isinstance(other, (int, float, np.floating, np.integer)):
            return Jet.constant(float(other), self.num_vars, self.order)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return Jet(self.space, self.coeffs + o.coeffs)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return Jet(self.space, self.coeffs - o.coeffs)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return Jet(self.space, o.coeffs - self.coeffs)

    def __neg__(self):
        return Jet(self.space, -self.coeffs)

    def __mul__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            return Jet(self.space, self.coeffs * float(other))
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return Jet(self.space, _raw_mul(self.space, self.coeffs, o.coeffs))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            return Jet(self.space, self.coeffs / float(other))
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return Jet(self.space, _raw_div(self.space, self.coeffs, o.coeffs))

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return Jet(self.space, _raw_div(self.space, o.coeffs, self.coeffs))

    def __pow__(self, p):
        if isinstance(p, (int, np.integer)) or (isinstance(p, float) and p.is_integer()):
            p = int(p)
            if p == 0:
                return Jet.constant(1.0, self.num_vars, self.order)
            if p > 0 and p <= 8:
                out = self
                for _ in range(p - 1):
                    out = out * self
                return out
        return Jet(self.space, _raw_elem(self.space, "pow_const", self.coeffs, exponent=float(p)))

    def elem(self, fn: str, exponent: float | None = None) -> "Jet":
        return Jet(self.space, _raw_elem(self.space, fn, self.coeffs, exponent))


ELEMENTARY_FUNCTIONS = ("sin", "cos", "tan", "sinh", "cosh", "tanh", "exp", "log", "sqrt", "pow_const")


def jet_var(i: int, value: float, num_vars: int, order: int) -> Jet:
    """Jet of the coordinate function x_i at the given point."""
    return Jet.variable(i, value, num_vars, order)


def jet_arith(a: Jet, b: Jet, kind: str) -> Jet:
    """Truncated Taylor arithmetic on two jets of identical (num_vars, order)."""
    if kind == "add":
        return a + b
    if kind == "sub":
        return a - b
    if kind == "mul":
        return a * b
    if kind == "div":
        return a / b
    raise ValueError(f"unknown arithmetic kind {kind!r}")


def jet_elem(a: Jet, fn: str, exponent: float | None = None) -> Jet:
    """Apply an elementary function to a jet by univariate Taylor composition."""
    if fn not in ELEMENTARY_FUNCTIONS:
        raise ValueError(f"unknown elementary function {fn!r}")
    return a.elem(fn, exponent)


def extract_partial(a: Jet, alpha: tuple[int, ...]) -> float:
    """Raw partial derivative d^alpha f from a jet (coefficient times alpha!)."""
    return a.partial(alpha)


# -- jet tensors ----------------------------------------------------------


@dataclass(frozen=True)
class JetTensor:
    """An ndarray of jets sharing one space; coefficient axis last."""

    space: JetSpace
    data: np.ndarray

    def __post_init__(self):
        if self.data.shape[-1] != self.space.n_coeffs:
            raise JetShapeError(
                f"coefficient axis {self.data.shape[-1]} != space size {self.space.n_coeffs}"
            )

    @staticmethod
    def zeros(space: JetSpace, shape: tuple[int, ...] = ()) -> "JetTensor":
        return JetTensor(space, np.zeros(shape + (space.n_coeffs,)))

    @staticmethod
    def const(space: JetSpace, values: np.ndarray | float) -> "JetTensor":
        values = np.asarray(values, dtype=float)
        data = np.zeros(values.shape + (space.n_coeffs,))
        data[..., 0] = values
        return JetTensor(space, data)

    @staticmethod
    def from_jets(jets) -> "JetTensor":
        """Stack a (possibly nested) sequence of scalar Jets."""
        arr = np.asarray(jets, dtype=object)
        space = arr.flat[0].space
        data = np.empty(arr.shape + (space.n_coeffs,))
        for idx in np.ndindex(arr.shape):
            j = arr[idx]
            if j.space is not space:
                raise JetShapeError("all jets in a JetTensor must share one space")
            data[idx] = j.coeffs
        return JetTensor(space, data)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape[:-1]

    @property
    def order(self) -> int:
        return self.space.order

    @property
    def value(self) -> np.ndarray:
        return self.data[..., 0].copy()

    def jet(self, index=()) -> Jet:
        return Jet(self.space, self.data[index].copy())

    def truncate(self, order: int) -> "JetTensor":
        if order == self.order:
            return self
        if order > self.order:
            raise JetShapeError(f"cannot extend order {self.order} to {order}")
        lower = jet_space(self.space.num_vars, order)
        return JetTensor(lower, np.ascontiguousarray(self.data[..., : lower.n_coeffs]))

    def partials(self) -> "JetTensor":
        """All first partials, as a new tensor axis appended before the jet axis."""
        if self.order < 1:
            raise JetShapeError(
                "insufficient jet order: cannot differentiate an order-0 jet"
            )
        lower = jet_space(self.space.num_vars, self.order - 1)
        cols = []
        for i in range(self.space.num_vars):
            src, fac = self.space.diff_table(i)
            cols.append(self.data[..., src] * fac)
        return JetTensor(lower, np.stack(cols, axis=-2))

    def embed(self, target: JetSpace, var_positions: tuple[int, ...]) -> "JetTensor":
        """Re-express in a larger variable set (other partials vanish)."""
        tgt = target.embed_table(self.space, var_positions)
        data = np.zeros(self.shape + (target.n_coeffs,))
        data[..., tgt] = self.data
        return JetTensor(target, data)

    # arithmetic (auto-truncating to the lower order)

    def _align(self, other: "JetTensor") -> tuple["JetTensor", "JetTensor"]:
        if self.space.num_vars != other.space.num_vars:
            raise JetShapeError("jet tensors with different variable counts")
        k = min(self.order, other.order)
        return self.truncate(k), other.truncate(k)

    def __add__(self, other):
        if isinstance(other, JetTensor):
            a, b = self._align(other)
            return JetTensor(a.space, a.data + b.data)
        return JetTensor(self.space, self.data + self._const_data(other))

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, JetTensor):
            a, b = self._align(other)
            return JetTensor(a.space, a.data - b.data)
        return JetTensor(self.space, self.data - self._const_data(other))

    def __rsub__(self, other):
        return -(self - other)

    def __neg__(self):
        return JetTensor(self.space, -self.data)

    def __mul__(self, other):
        if isinstance(other, JetTensor):
            a, b = self._align(other)
            return JetTensor(a.space, _raw_mul(a.space, a.data, b.data))
        return JetTensor(self.space, self.data * float(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, JetTensor):
            a, b = self._align(other)
            return JetTensor(a.space, _raw_div(a.space, a.data, b.data))
        return JetTensor(self.space, self.data / float(other))

    def _const_data(self, other) -> np.ndarray:
        data = np.zeros_like(self.data)
        data[..., 0] = float(other)
        return data

    def elem(self, fn: str, exponent: float | None = None) -> "JetTensor":
        return JetTensor(self.space, _raw_elem(self.space, fn, self.data, exponent))

    def transpose(self, spec: str) -> "JetTensor":
        """Pure index permutation, e.g. 'lkij->lijk' (jet axis rides along)."""
        lhs, rhs = spec.split("->")
        return JetTensor(self.space, np.einsum(f"{lhs}...->{rhs}...", self.data))


def jt_einsum(spec: str, a: JetTensor, b: JetTensor) -> JetTensor:
    """Binary einsum whose scalar product is the truncated Cauchy product.

    ``spec`` uses ordinary einsum syntax over the tensor axes only, e.g.
    ``jt_einsum('kl,ikjl->ij', ginv, riem)``.
    """
    a, b = a._align(b)
    space = a.space
    a_idx, b_idx, starts = space.mul_table
    lhs, rhs = spec.split("->")
    sa, sb = lhs.split(",")
    prod = np.einsum(f"{sa}z,{sb}z->{rhs}z", a.data[..., a_idx], b.data[..., b_idx])
    return JetTensor(space, np.add.reduceat(prod, starts, axis=-1))
