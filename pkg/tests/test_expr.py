import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from killing_cmc_lab import expr
from killing_cmc_lab.expr import (
    DomainError,
    ExprSyntaxError,
    UnboundParameterError,
    UnknownFunctionError,
    UnknownIdentifierError,
    derivative_consistency,
    evaluate,
    parse,
    to_source,
)


def test_call_node():
    ast = parse("sinh(r)")
    assert ast.root == expr.Call("sinh", expr.Var())


def test_precedence_shape():
    ast = parse("0.5*log(sinh(r)/r)")
    root = ast.root
    assert isinstance(root, expr.BinOp) and root.op == "*"
    assert root.left == expr.Num(0.5)
    assert root.right.func == "log"
    assert root.right.arg.op == "/"


def test_power_is_right_associative():
    assert evaluate(parse("2^3^2"), 0.7) == 512.0
    assert evaluate(parse("-2^2"), 0.0) == -4.0
    assert evaluate(parse("2^-1"), 0.0) == 0.5


def test_whitespace_ignored():
    assert to_source(parse(" 1 +\tr * 2 ")) == to_source(parse("1+r*2"))


@pytest.mark.parametrize("src,r,expected", [
    ("r^2", 3.0, 9.0),
    ("sinh(r)/r", 1.0, 1.1752011936438014),
    ("exp(1) - e", 0.0, 0.0),
    ("cos(pi)", 0.0, -1.0),
    ("--r", 2.0, 2.0),
])
def test_evaluate_values(src, r, expected):
    assert evaluate(parse(src), r) == pytest.approx(expected, rel=1e-15, abs=1e-15)


def test_array_evaluation_matches_scalar():
    ast = parse("sqrt(1 - r^2) + 3")
    rs = np.linspace(0, 1, 11)
    np.testing.assert_array_equal(evaluate(ast, rs), [evaluate(ast, x) for x in rs])
    assert evaluate(parse("2"), rs).shape == rs.shape


@pytest.mark.parametrize("src,sub", [
    ("log(r)", "log(r)"),
    ("1/r", "(1.0 / r)"),
    ("sqrt(r - 1)", "sqrt((r - 1.0))"),
])
def test_domain_errors_name_subexpression(src, sub):
    with pytest.raises(DomainError) as info:
        evaluate(parse(src), 0.0)
    assert info.value.subexpr == sub


def test_syntax_error_offset_and_expected():
    with pytest.raises(ExprSyntaxError) as info:
        parse("1 + * r")
    assert info.value.offset == 4
    assert "(" in info.value.expected


def test_syntax_error_offset_is_in_bytes():
    with pytest.raises(ExprSyntaxError) as info:
        parse("1 + é")
    assert info.value.offset == 4
    with pytest.raises(ExprSyntaxError) as info:
        parse("(r + 1")
    assert info.value.offset == 6
    assert ")" in info.value.expected


def test_unknown_names():
    with pytest.raises(UnknownFunctionError) as info:
        parse("foo(r)")
    assert info.value.name == "foo"
    with pytest.raises(UnknownIdentifierError):
        parse("x + 1")


def test_parameters():
    ast = parse("a*r + b", params=["a", "b"])
    assert evaluate(ast, 2.0, {"a": 3.0, "b": 1.0}) == 7.0
    with pytest.raises(UnboundParameterError) as info:
        evaluate(ast, 2.0, {"a": 1.0})
    assert info.value.names == ("b",)


def test_derivative_consistency():
    sample = [0.5, 1.0, 2.0]
    assert derivative_consistency(parse("r^2"), parse("2*r"), sample) < 1e-8
    assert derivative_consistency(parse("sinh(r)"), parse("cosh(r)"), sample) < 1e-8
    # |2 - 1| / max(1, |1|): a wrong derivative is flagged loudly
    assert derivative_consistency(parse("r^2"), parse("r"), [1.0]) == pytest.approx(1.0, abs=1e-8)


def test_evaluation_is_pure():
    ast = parse("0.5*log(sinh(r)/r) + r^3/7")
    a = evaluate(ast, 0.37)
    b = evaluate(ast, 0.37)
    assert a.hex() == b.hex()


# --- random expressions ------------------------------------------------------

# precedence levels used by the minimal-parenthesis printer
_LEVEL = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}

leaves = st.one_of(
    st.integers(1, 9).map(lambda v: ("num", float(v))),
    st.just(("r",)),
)


def _extend(children):
    return st.one_of(
        st.tuples(st.sampled_from("+-*/^"), children, children),
        st.tuples(st.just("neg"), children),
    )


trees = st.recursive(leaves, _extend, max_leaves=12)


def _level(t):
    return 5 if t[0] in ("num", "r") else _LEVEL[t[0]]


def minimal(t) -> str:
    """Print with only the parentheses the grammar needs."""
    kind = t[0]
    if kind == "num":
        return str(int(t[1]))
    if kind == "r":
        return "r"
    if kind == "neg":
        inner = minimal(t[1])
        return "-" + (f"({inner})" if _level(t[1]) < 3 else inner)
    op, a, b = t
    la, lb = _level(a), _level(b)
    if op == "^":
        left_paren = la <= 4
        right_paren = lb < 3
    else:
        left_paren = la < _LEVEL[op]
        right_paren = lb <= _LEVEL[op]
    left = f"({minimal(a)})" if left_paren else minimal(a)
    right = f"({minimal(b)})" if right_paren else minimal(b)
    return f"{left} {op} {right}"


def reference(t, r):
    kind = t[0]
    if kind == "num":
        return t[1]
    if kind == "r":
        return r
    if kind == "neg":
        return -reference(t[1], r)
    op, a, b = t
    x, y = reference(a, r), reference(b, r)
    if op == "+":
        return x + y
    if op == "-":
        return x - y
    if op == "*":
        return x * y
    if op == "/":
        return x / y
    if x == 0 and y < 0:
        raise ZeroDivisionError
    if x < 0 and y != math.floor(y):
        raise ValueError
    return math.pow(x, y)


@settings(max_examples=200, deadline=None)
@given(trees, st.sampled_from([0.5, 1.0, 2.0, 3.0]))
def test_precedence_matches_reference(tree, r):
    src = minimal(tree)
    try:
        want = reference(tree, r)
        ok = math.isfinite(want)
    except (ZeroDivisionError, OverflowError, ValueError):
        ok = False
    if not ok:
        with pytest.raises(DomainError):
            evaluate(parse(src), r)
        return
    got = evaluate(parse(src), r)
    assert got == pytest.approx(want, rel=1e-12, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(trees)
def test_print_parse_round_trip(tree):
    ast = parse(minimal(tree))
    again = parse(to_source(ast))
    assert again.root == ast.root
