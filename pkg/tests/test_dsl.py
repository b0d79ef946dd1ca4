import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lightcone.charts import catalog_chart, sample_grid
from lightcone.dsl import (chart_from_source, evaluate, free_parameters,
                           parse_expression, parse_program,
                           print_expression, print_program)
from lightcone.errors import (ArityMismatch, DomainError, ParseError,
                              UnknownIdentifier)
from lightcone.jets import seed_point

TORUS_SOURCE = """raw6 [cos(t*u/sqrt(t*t-1))*cos(v),
                        cos(t*u/sqrt(t*t-1))*sin(v),
                        sin(t*u/sqrt(t*t-1))*cos(v),
                        sin(t*u/sqrt(t*t-1))*sin(v),
                        cos(u/sqrt(t*t-1)),
                        sin(u/sqrt(t*t-1))]"""


def test_parse_simple_program():
    form, exprs = parse_program("r3 [u, v, u*v]")
    assert form == "r3"
    assert exprs[0] == ("name", "u")
    assert exprs[2] == ("bin", "*", ("name", "u"), ("name", "v"))


def test_precedence_and_associativity():
    assert parse_expression("u + v * u") == \
        ("bin", "+", ("name", "u"),
         ("bin", "*", ("name", "v"), ("name", "u")))
    assert parse_expression("u ^ 2 ^ 3") == \
        ("bin", "^", ("name", "u"),
         ("bin", "^", ("num", 2.0), ("num", 3.0)))
    assert parse_expression("-u^2") == \
        ("neg", ("bin", "^", ("name", "u"), ("num", 2.0)))
    assert parse_expression("u - v - u") == \
        ("bin", "-", ("bin", "-", ("name", "u"), ("name", "v")),
         ("name", "u"))


def test_number_literals():
    assert parse_expression("1.5e-2") == ("num", 0.015)
    assert parse_expression("2E3") == ("num", 2000.0)
    assert parse_expression(".5") == ("num", 0.5)


def test_parse_error_carries_position():
    with pytest.raises(ParseError) as err:
        parse_program("r3 [u,, v]")
    assert err.value.line == 1
    assert err.value.col == 7
    with pytest.raises(ParseError) as err:
        parse_program("r3 [u,\n  v @ 2, u]")
    assert err.value.line == 2


def test_unknown_function_at_parse_time():
    with pytest.raises(UnknownIdentifier):
        parse_program("r3 [foo(u), v, u]")


def test_unknown_form():
    with pytest.raises(UnknownIdentifier):
        parse_program("r7 [u, v]")


def test_component_arity_mismatch():
    with pytest.raises(ArityMismatch):
        parse_program("r3 [u, v]")
    with pytest.raises(ArityMismatch):
        parse_program("raw6 [u, v, u, v]")


def test_function_arity_mismatch():
    with pytest.raises(ArityMismatch):
        parse_program("r3 [sin(u, v), u, v]")


def test_unbound_name_at_eval_time():
    chart = chart_from_source("r3 [q*u, v, u]")
    U, V = seed_point(0.1, 0.2, 2)
    with pytest.raises(UnknownIdentifier):
        chart.evaluate(U, V)


def test_exponent_must_be_constant():
    chart = chart_from_source("r3 [u^v, u, v]")
    U, V = seed_point(0.5, 2.0, 3)
    with pytest.raises(DomainError):
        chart.evaluate(U, V)


def test_integer_power_at_origin():
    chart = chart_from_source("r3 [u^3, v, u]")
    U, V = seed_point(0.0, 0.0, 4)
    w = chart.evaluate(U, V)
    x1 = w.component(1)
    assert x1.du().du().du().value == pytest.approx(6.0)


def test_pi_and_params_bound():
    chart = chart_from_source("r3 [cos(pi*u), k*v, u]", params={"k": 3.0})
    U, V = seed_point(1.0, 0.5, 1)
    w = chart.evaluate(U, V)
    assert w.component(1).value == pytest.approx(np.cos(np.pi) + 0j)
    assert w.component(2).value == pytest.approx(1.5 + 0j)


def test_scalar_subtree_keeps_full_order():
    # a constant call like sin(1) must not truncate jet order
    chart = chart_from_source("r3 [sin(1)*u, v, u*v]")
    U, V = seed_point(0.3, 0.4, 5)
    w = chart.evaluate(U, V)
    assert w.order == 5
    assert w.component(1).value == pytest.approx(np.sin(1.0) * 0.3)


def test_dsl_torus_matches_catalog():
    t = 2.0
    cat = catalog_chart("torus", t=t)
    dsl = chart_from_source(TORUS_SOURCE, params={"t": t},
                            domain=cat.domain, periodic=cat.periodic)
    u, v = sample_grid(cat, 6, 6)
    a = cat.lift_at(u, v, order=4)
    b = dsl.lift_at(u, v, order=4)
    assert np.max(np.abs(a.c - b.c)) < 1e-12


def test_free_parameters():
    assert free_parameters(TORUS_SOURCE) == ["t"]
    assert free_parameters("r3 [a*u, b*v, u+c]") == ["a", "b", "c"]
    assert free_parameters("r3 [u, v, pi]") == []


def test_print_round_trip_handwritten():
    cases = [
        "r3 [u + v * u, u ^ 2 ^ 3, -u ^ 2]",
        "r3 [(u + v) * u, u / v / 2, sin(cos(u))]",
        "raw6 [u, v, u - (v - 1), -(u * v), 2 ^ u, sqrt(u + 2)]",
    ]
    for text in cases:
        form, exprs = parse_program(text)
        printed = print_program(form, exprs)
        assert parse_program(printed) == (form, exprs)


_leaf = st.sampled_from([("name", "u"), ("name", "v"), ("name", "t"),
                         ("num", 2.0), ("num", 0.5), ("num", 3.0)])


def _extend(children):
    return st.one_of(
        st.tuples(st.just("neg"), children),
        st.tuples(st.just("call"), st.sampled_from(["sin", "cos", "exp"]),
                  children),
        st.tuples(st.just("bin"), st.sampled_from(["+", "-", "*", "/", "^"]),
                  children, children),
    )


ast_trees = st.recursive(_leaf, _extend, max_leaves=12)


@given(ast_trees)
@settings(max_examples=120, deadline=None)
def test_print_parse_round_trip_random(tree):
    printed = print_expression(tree)
    assert parse_expression(printed) == tree


def test_evaluate_matches_manual_jets():
    U, V = seed_point(0.7, 0.3, 4)
    env = {"u": U, "v": V, "pi": np.pi}
    node = parse_expression("(u + 2*v)^2 / cosh(v)")
    got = evaluate(node, env)
    want = (U + V * 2.0).power(2) / V.cosh()
    assert np.max(np.abs(got.c - want.c)) < 1e-13


def test_batched_evaluation():
    chart = chart_from_source("r3 [cosh(u)*cos(v), cosh(u)*sin(v), u]",
                              domain=((-1, 1), (0, 2 * np.pi)),
                              periodic=(False, True))
    u, v = sample_grid(chart, 4, 4)
    w = chart.lift_at(u, v, order=2)
    assert w.batch_shape == (4, 4)
    cat = catalog_chart("catenoid")
    w2 = cat.lift_at(u, v, order=2)
    assert np.max(np.abs(w.c - w2.c)) < 1e-13
