import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from magflow.dsl import (BinOp, Call, Neg, Num, Var, compile, count_nodes, eval_ast, format_profile,
                         parse_expr, parse_profile, to_text)
from magflow.errors import DomainError, ParityViolation, ParseError
from magflow.fixtures import BAD_TEXT, E1_TEXT, E2_TEXT
from magflow.jets import EVEN, ODD, Jet3, SeriesProfile


def test_fixture_texts_parse():
    for text in (E1_TEXT, E2_TEXT, BAD_TEXT):
        spec = parse_profile(text)
        assert spec.L == pytest.approx(np.pi)


def test_precedence():
    # ^ binds tighter than unary minus
    assert eval_ast(parse_expr("-2^2"), 0.0, 1.0) == -4
    assert eval_ast(parse_expr("2*3^2"), 0.0, 1.0) == 18
    assert eval_ast(parse_expr("8/2/2"), 0.0, 1.0) == 2
    assert eval_ast(parse_expr("1-2-3"), 0.0, 1.0) == -4


def test_ast_size_of_nonuniform_lambda():
    ast = parse_expr("cos(r) + 0.3*cos(2*r)")
    assert count_nodes(ast) == 9


def test_jet_evaluation():
    ast = parse_expr("sin(r)^2 + L*r")
    J = eval_ast(ast, Jet3.variable(0.4), 2.0)
    assert J.value == pytest.approx(np.sin(0.4) ** 2 + 0.8)
    assert J.d1 == pytest.approx(np.sin(0.8) + 2.0)


@pytest.mark.parametrize("text,line,col", [
    ("L = pi\nf = sin(r\nlambda = 1\n", 2, 10),
    ("L = pi\nf = sin(r)\nlambda = cos(r) +\n", 3, 18),
    ("L = pi\nf = sin(r)\n", 3, 1),
    ("L = pi\ng = sin(r)\nlambda = 1\n", 2, 1),
    ("L = pi\nf = r^1.5\nlambda = 1\n", 2, 7),
    ("L = pi\nf.series = []\nlambda = 1\n", 2, 13),
])
def test_parse_errors_carry_position(text, line, col):
    with pytest.raises(ParseError) as exc:
        parse_profile(text)
    assert exc.value.line == line
    assert exc.value.column == col


def test_constant_L_may_not_use_r():
    with pytest.raises(DomainError):
        parse_profile("L = r\nf = sin(r)\nlambda = 1\n")


def test_series_and_tolerances():
    spec = parse_profile("L = 2*pi\nf.series = [2, 0]\nlambda.series = [0, -1, 0.25]\ntol.zero = 1e-11\n")
    assert spec.L == pytest.approx(2 * np.pi)
    assert spec.f_source.coeffs == [2.0, 0.0]
    assert spec.lambda_source.coeffs == [0.0, -1.0, 0.25]
    assert spec.tolerances == {"zero": 1e-11}


def test_format_round_trip():
    for text in (E1_TEXT, E2_TEXT):
        spec = parse_profile(text)
        again = parse_profile(format_profile(spec))
        assert format_profile(again) == format_profile(spec)


_atoms = st.sampled_from(["r", "L", "pi", "1", "0.5", "2"])


def _exprs():
    return st.recursive(
        _atoms,
        lambda sub: st.one_of(
            st.tuples(sub, st.sampled_from(["+", "-", "*"]), sub).map(lambda t: "(%s %s %s)" % t),
            sub.map(lambda s: "sin(%s)" % s),
            sub.map(lambda s: "cos(%s)" % s),
            sub.map(lambda s: "-%s" % s),
            sub.map(lambda s: "(%s)^2" % s),
        ),
        max_leaves=8)


@settings(max_examples=80)
@given(_exprs())
def test_printer_round_trip(text):
    ast = parse_expr(text)
    again = parse_expr(to_text(ast))
    r = np.linspace(-1, 1, 5)
    assert again == ast


def test_unclosed_call_reports_column():
    with pytest.raises(ParseError) as exc:
        parse_profile("L = pi\nf = sin(\nlambda = 1\n")
    assert (exc.value.line, exc.value.column) == (2, 9)
    assert "expected expression" in str(exc.value)
    assert "sin" in exc.value.expected


def test_compile_matches_series():
    g = compile(parse_expr("sin(pi*r/L)"), ODD, np.pi)
    s = SeriesProfile([1.0], ODD, np.pi)
    r = np.random.default_rng(0).uniform(0, np.pi, 100)
    Jg, Js = g.jet(r), s.jet(r)
    for i in range(4):
        np.testing.assert_allclose(Jg.astuple()[i], Js.astuple()[i], atol=1e-12)


def test_compile_parity_probe():
    compile(parse_expr("cos(2*r)"), EVEN, np.pi)
    with pytest.raises(ParityViolation) as exc:
        compile(parse_expr("sin(r)"), EVEN, np.pi)
    assert exc.value.defect > 1e-3


def test_compile_division_floor():
    with pytest.raises(DomainError):
        compile(parse_expr("1/sin(r)"), ODD, np.pi)


def test_division_by_literal_zero_rejected():
    with pytest.raises(ParseError):
        parse_expr("r/0")


CORPUS = ["sin(r)", "-cos(r)", "cos(r) + 0.3*cos(2*r)", "r^2 - L/pi", "(1 - r)^0 * sin(r)"]


def _productions(node, seen):
    if isinstance(node, Num):
        seen.add("number")
    elif isinstance(node, Var):
        seen.add("var:" + node.name)
    elif isinstance(node, Neg):
        seen.add("neg")
        _productions(node.operand, seen)
    elif isinstance(node, Call):
        seen.add("call:" + node.func)
        _productions(node.arg, seen)
    else:
        seen.add("op:" + node.op)
        _productions(node.left, seen)
        _productions(node.right, seen)
    return seen


def test_corpus_reaches_every_production():
    seen = set()
    for text in CORPUS:
        _productions(parse_expr(text), seen)
    want = {"number", "var:r", "var:L", "var:pi", "neg", "call:sin", "call:cos",
            "op:+", "op:-", "op:*", "op:/", "op:^"}
    assert want <= seen
