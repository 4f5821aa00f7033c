import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from pytest import approx

from warpcheck.jets import (
    Jet,
    JetDomainError,
    JetShapeError,
    extract_partial,
    jet_arith,
    jet_elem,
    jet_var,
)


def test_coefficient_count_is_binomial():
    for m, k in [(1, 4), (2, 3), (3, 3), (5, 4)]:
        j = jet_var(0, 0.0, m, k)
        assert len(j.coeffs) == math.comb(m + k, k)


def test_square_of_coordinate():
    t = jet_var(0, 3.0, 1, 4)
    sq = jet_arith(t, t, "mul")
    assert sq.value == approx(9.0)
    assert extract_partial(sq, (1,)) == approx(6.0)
    # normalized second coefficient f''/2! = 1
    assert sq.coeffs[2] == approx(1.0)


def test_variable_jet_at_zero():
    t = jet_var(0, 0.0, 1, 2)
    assert list(t.coeffs) == [0.0, 1.0, 0.0]


def test_variable_jet_multivariate():
    j = jet_var(2, 1.5, 3, 3)
    assert j.value == approx(1.5)
    assert j.space.index[(0, 0, 1)] is not None
    assert j.coeffs[j.space.index[(0, 0, 1)]] == approx(1.0)
    assert np.count_nonzero(j.coeffs) == 2


def test_variable_index_out_of_range():
    with pytest.raises(IndexError):
        jet_var(3, 0.0, 3, 2)


def test_geometric_series():
    t = jet_var(0, 0.0, 1, 3)
    inv = jet_arith(Jet.constant(1.0, 1, 3), 1.0 + t, "div")
    assert list(inv.coeffs) == approx([1.0, -1.0, 1.0, -1.0])


def test_second_derivative_of_product_against_fd(fd):
    t0 = 0.7
    t = jet_var(0, t0, 1, 2)
    base = 2.0 + jet_elem(t, "sin")
    prod = jet_arith(base, base, "mul")

    def fn(x):
        return (2.0 + math.sin(x)) ** 2

    assert extract_partial(prod, (2,)) == approx(fd(fn, t0, 2, 1e-4), abs=1e-6)


def test_sqrt_jet_values(fd):
    t = jet_var(0, 0.0, 1, 1)
    j = jet_elem(2.0 + jet_elem(t, "sin"), "sqrt")
    assert j.value == approx(math.sqrt(2.0))
    assert extract_partial(j, (1,)) == approx(1.0 / (2.0 * math.sqrt(2.0)))

    def fn(x):
        return math.sqrt(2.0 + math.sin(x))

    assert extract_partial(j, (1,)) == approx(fd(fn, 0.0, 1, 1e-5), abs=1e-8)


def test_cosh_series():
    j = jet_elem(jet_var(0, 0.0, 1, 4), "cosh")
    assert list(j.coeffs) == approx([1.0, 0.0, 0.5, 0.0, 1.0 / 24.0])


def test_log_domain_error():
    with pytest.raises(JetDomainError):
        jet_elem(Jet.constant(0.0, 1, 3), "log")
    with pytest.raises(JetDomainError):
        jet_elem(Jet.constant(-2.0, 1, 3), "sqrt")


def test_extract_partial_t4():
    t = jet_var(0, 0.0, 1, 4)
    j = t * t * t * t
    assert extract_partial(j, (4,)) == approx(24.0)


def test_extract_partial_sin_third():
    j = jet_elem(jet_var(0, 0.0, 1, 4), "sin")
    assert extract_partial(j, (3,)) == approx(-1.0)


def test_extract_partial_sqrt_fd(fd):
    t0 = 1.2
    j = jet_elem(2.0 + jet_elem(jet_var(0, t0, 1, 2), "sin"), "sqrt")

    def fn(x):
        return math.sqrt(2.0 + math.sin(x))

    assert extract_partial(j, (2,)) == approx(fd(fn, t0, 2, 1e-3), abs=1e-5)


def test_extract_partial_order_overflow():
    j = jet_var(0, 0.0, 1, 2)
    with pytest.raises(JetShapeError):
        extract_partial(j, (3,))


def test_arithmetic_shape_mismatch():
    a = jet_var(0, 0.0, 1, 2)
    b = jet_var(0, 0.0, 1, 3)
    with pytest.raises(JetShapeError):
        jet_arith(a, b, "add")
    c = jet_var(0, 0.0, 2, 2)
    with pytest.raises(JetShapeError):
        jet_arith(a, c, "mul")


def test_division_by_zero_value():
    a = jet_var(0, 1.0, 1, 2)
    b = jet_var(0, 0.0, 1, 2)
    with pytest.raises(JetDomainError):
        jet_arith(a, b, "div")


def test_tan_is_sin_over_cos():
    t0 = 0.4
    t = jet_var(0, t0, 1, 3)
    tan = jet_elem(t, "tan")
    quotient = jet_elem(t, "sin") / jet_elem(t, "cos")
    assert tan.coeffs == approx(quotient.coeffs)


def test_pow_const_matches_exp_log():
    t = jet_var(0, 2.0, 1, 4)
    base = 1.0 + t * t
    direct = jet_elem(base, "pow_const", exponent=-1.7)
    via_exp = jet_elem(jet_elem(base, "log") * (-1.7), "exp")
    assert direct.coeffs == approx(via_exp.coeffs)


def test_integer_power():
    t = jet_var(0, 1.3, 1, 3)
    assert (t**3).coeffs == approx((t * t * t).coeffs)
    assert (t ** (-2)).coeffs == approx((1.0 / (t * t)).coeffs)


# -- properties -------------------------------------------------------------

finite = st.floats(min_value=-3.0, max_value=3.0, allow_nan=False)


@given(a0=finite, a1=finite, b0=finite, b1=finite)
def test_leibniz_rule(a0, a1, b0, b1):
    """First partials of a product obey the product rule exactly."""
    space_args = (2, 3)
    a = a0 + a1 * jet_var(0, 0.5, *space_args) * jet_var(1, -0.2, *space_args)
    b = b0 + b1 * jet_var(1, -0.2, *space_args)
    prod = a * b
    for i, alpha in enumerate([(1, 0), (0, 1)]):
        expected = extract_partial(a, alpha) * b.value + a.value * extract_partial(b, alpha)
        assert extract_partial(prod, alpha) == approx(expected, rel=1e-13, abs=1e-13)


@given(
    b0=st.floats(min_value=0.2, max_value=3.0),
    b1=finite,
    a0=finite,
    a1=finite,
)
@settings(max_examples=60)
def test_div_mul_roundtrip(b0, b1, a0, a1):
    """(a/b)*b == a to 1e-13 relative when |b| is bounded away from zero."""
    a = a0 + a1 * jet_var(0, 0.3, 1, 4) + jet_elem(jet_var(0, 0.3, 1, 4), "sin")
    b = b0 + b1 * 0.05 * jet_var(0, 0.3, 1, 4)
    back = (a / b) * b
    scale = np.max(np.abs(a.coeffs)) + 1.0
    assert np.max(np.abs(back.coeffs - a.coeffs)) <= 1e-13 * scale


def _random_expression(rng, depth):
    """Random composite expression builder for the chain-rule oracle."""
    import warpcheck.dsl as dsl

    if depth == 0:
        return rng.choice(["t", "t", str(round(rng.uniform(0.3, 2.0), 3))])
    kind = rng.randrange(6)
    left = _random_expression(rng, depth - 1)
    right = _random_expression(rng, depth - 1)
    if kind == 0:
        return f"({left})+({right})"
    if kind == 1:
        return f"({left})*({right})"
    if kind == 2:
        return f"({left})-({right})"
    if kind == 3:
        return f"sin({left})"
    if kind == 4:
        return f"cos({left})"
    if kind == 5:
        return f"exp(0.3*({left}))"
    raise AssertionError


def test_chain_rule_against_finite_differences(fd):
    """50 random composites: partials up to order 3 match central differences.

    Points where some derivative up to order 5 exceeds 30 in magnitude are
    redrawn: there the finite-difference oracle itself loses the tolerance.
    """
    import random

    import warpcheck.dsl as dsl

    rng = random.Random(20240817)
    steps = {1: 1e-5, 2: 1e-4, 3: 1e-3}
    checked = 0
    attempts = 0
    while checked < 50 and attempts < 500:
        attempts += 1
        src = _random_expression(rng, rng.choice([2, 2, 3]))
        ast = dsl.parse(src)
        t0 = rng.uniform(-1.0, 1.0)
        probe = dsl.eval_expr(ast, jet_var(0, t0, 1, 5))
        if not isinstance(probe, Jet):
            continue
        if max(abs(extract_partial(probe, (k,))) for k in range(6)) > 30.0:
            continue
        jet = dsl.eval_expr(ast, jet_var(0, t0, 1, 3))

        def fn(x, _ast=ast):
            return dsl.eval_expr(_ast, x)

        for order in (1, 2, 3):
            got = extract_partial(jet, (order,))
            want = fd(fn, t0, order, steps[order])
            assert got == approx(want, abs=max(1e-5, 1e-5 * abs(want)))
        checked += 1
    assert checked >= 50
