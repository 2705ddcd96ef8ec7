"""The system-description language.

A description file is line oriented::

    # comment
    L = pi
    f = sin(r)
    lambda.series = [0, -1]
    tol.zero = 1e-11

Expressions use ``r``, ``L``, ``pi``, ``sin``, ``cos``, numbers, ``+ - * / ^``
and parentheses.  ``^`` binds tighter than unary minus, which binds tighter
than ``*`` and ``/``.  Exponents are integer literals 0..6.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DomainError, ParityViolation, ParseError
from .jets import EVEN, ODD, Jet3, SeriesProfile, SmoothProfile, jet_cos, jet_sin

PROBE_POINTS = 64
PARITY_TOL = 1e-10
DIVISION_FLOOR = 1e-14

# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str  # "r", "L" or "pi"


@dataclass(frozen=True)
class Neg:
    operand: object


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class Call:
    func: str
    arg: object


def count_nodes(node) -> int:
    if isinstance(node, (Num, Var)):
        return 1
    if isinstance(node, Neg):
        return 1 + count_nodes(node.operand)
    if isinstance(node, Call):
        return 1 + count_nodes(node.arg)
    return 1 + count_nodes(node.left) + count_nodes(node.right)


def uses_r(node) -> bool:
    if isinstance(node, Var):
        return node.name == "r"
    if isinstance(node, Num):
        return False
    if isinstance(node, Neg):
        return uses_r(node.operand)
    if isinstance(node, Call):
        return uses_r(node.arg)
    return uses_r(node.left) or uses_r(node.right)


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}


def to_text(node, parent_prec: int = 0, right_side: bool = False) -> str:
    """Render an AST with the minimal parentheses needed to re-parse it."""
    if isinstance(node, Num):
        s = repr(float(node.value))
        if s.endswith(".0"):
            s = s[:-2]
        return s
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Call):
        return "%s(%s)" % (node.func, to_text(node.arg))
    if isinstance(node, Neg):
        s = "-" + to_text(node.operand, 3)
        return "(%s)" % s if parent_prec > 3 else s
    p = _PREC[node.op]
    if node.op == "^":
        s = "%s^%s" % (to_text(node.left, 5), to_text(node.right, 5))
    else:
        s = "%s %s %s" % (to_text(node.left, p), node.op, to_text(node.right, p, True))
    if p < parent_prec or (right_side and p == parent_prec):
        return "(%s)" % s
    return s


# ---------------------------------------------------------------------------
# tokenizer and parser

_TOKEN = re.compile(r"""
    (?P<ws>[ \t]+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()\[\],=.])
""", re.VERBOSE)

_FUNCS = ("sin", "cos")
_NAMES = ("r", "L", "pi")
_EXPR_START = ("number", "r", "L", "pi", "sin", "cos", "'('", "'-'")


@dataclass
class _Tok:
    kind: str   # num, ident, op, end
    text: str
    col: int


def _tokenize(line: str, lineno: int, col0: int = 1):
    toks = []
    pos = 0
    while pos < len(line):
        m = _TOKEN.match(line, pos)
        if not m:
            raise ParseError("unexpected character %r" % line[pos], lineno, col0 + pos)
        if m.lastgroup != "ws":
            toks.append(_Tok(m.lastgroup, m.group(), col0 + pos))
        pos = m.end()
    toks.append(_Tok("end", "", col0 + len(line)))
    return toks


class _Parser:
    def __init__(self, toks, lineno):
        self.toks = toks
        self.i = 0
        self.lineno = lineno

    @property
    def tok(self):
        return self.toks[self.i]

    def fail(self, message, expected=()):
        raise ParseError(message, self.lineno, self.tok.col, expected)

    def eat(self, text):
        if self.tok.text != text or self.tok.kind == "end":
            self.fail("expected %r" % text, ("'%s'" % text,))
        self.i += 1

    def at_end(self):
        if self.tok.kind != "end":
            self.fail("unexpected %r" % self.tok.text, ("end of line",))

    def expr(self):
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.tok.text
            self.i += 1
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.tok.text
            self.i += 1
            rhs = self.unary()
            if op == "/" and isinstance(rhs, Num) and rhs.value == 0.0:
                self.fail("division by literal zero")
            node = BinOp(op, node, rhs)
        return node

    def unary(self):
        if self.tok.kind == "op" and self.tok.text == "-":
            self.i += 1
            return Neg(self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        if self.tok.kind == "op" and self.tok.text == "^":
            self.i += 1
            t = self.tok
            if t.kind != "num" or not re.fullmatch(r"\d+", t.text) or int(t.text) > 6:
                self.fail("exponent must be an integer literal 0..6", ("integer 0..6",))
            self.i += 1
            return BinOp("^", base, Num(float(int(t.text))))
        return base

    def atom(self):
        t = self.tok
        if t.kind == "num":
            self.i += 1
            return Num(float(t.text))
        if t.kind == "ident":
            if t.text in _FUNCS:
                self.i += 1
                self.eat("(")
                arg = self.expr()
                self.eat(")")
                return Call(t.text, arg)
            if t.text in _NAMES:
                self.i += 1
                return Var(t.text)
            self.fail("unknown identifier %r" % t.text, _EXPR_START)
        if t.kind == "op" and t.text == "(":
            self.i += 1
            node = self.expr()
            self.eat(")")
            return node
        if t.kind == "end":
            self.fail("expected expression", _EXPR_START)
        self.fail("unexpected %r" % t.text, _EXPR_START)


def parse_expr(text: str, lineno: int = 1, col0: int = 1):
    p = _Parser(_tokenize(text, lineno, col0), lineno)
    node = p.expr()
    p.at_end()
    return node


# ---------------------------------------------------------------------------
# evaluation


def eval_ast(node, r, L: float):
    """Evaluate an AST at r, which may be a float, an array or a Jet3."""
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        if node.name == "r":
            return r
        return L if node.name == "L" else np.pi
    if isinstance(node, Neg):
        return -eval_ast(node.operand, r, L)
    if isinstance(node, Call):
        a = eval_ast(node.arg, r, L)
        return jet_sin(a) if node.func == "sin" else jet_cos(a)
    a = eval_ast(node.left, r, L)
    b = eval_ast(node.right, r, L)
    if node.op == "+":
        return a + b
    if node.op == "-":
        return a - b
    if node.op == "*":
        return a * b
    if node.op == "/":
        bv = b.value if isinstance(b, Jet3) else b
        if np.any(np.abs(bv) < DIVISION_FLOOR):
            raise DomainError("division by a value below %g" % DIVISION_FLOOR)
        return a / b
    n = int(b)
    if isinstance(a, Jet3):
        return a ** n
    return a ** n


def eval_constant(node) -> float:
    if uses_r(node):
        raise DomainError("constant expression may not use r")
    if _uses_L(node):
        raise DomainError("L may not refer to itself")
    return float(eval_ast(node, 0.0, float("nan")))


def _uses_L(node) -> bool:
    if isinstance(node, Var):
        return node.name == "L"
    if isinstance(node, Num):
        return False
    if isinstance(node, Neg):
        return _uses_L(node.operand)
    if isinstance(node, Call):
        return _uses_L(node.arg)
    return _uses_L(node.left) or _uses_L(node.right)


class ExprProfile(SmoothProfile):
    """Profile defined by a compiled expression."""

    def __init__(self, ast, parity: str, L: float, text: Optional[str] = None):
        self.ast = ast
        self.parity = parity
        self.half_period = float(L)
        self.text = text if text is not None else to_text(ast)

    def __repr__(self):
        return "ExprProfile(%r, %r, L=%r)" % (self.text, self.parity, self.half_period)

    def jet(self, r) -> Jet3:
        r_arr = np.asarray(r, dtype=float)
        out = eval_ast(self.ast, Jet3.variable(r_arr if r_arr.ndim else float(r_arr)), self.half_period)
        if not isinstance(out, Jet3):
            out = Jet3.const(np.full(r_arr.shape, float(out)) if r_arr.ndim else float(out))
        elif r_arr.ndim:
            out = Jet3(*(np.broadcast_to(np.asarray(x, dtype=float), r_arr.shape).copy()
                         for x in out.astuple()))
        return out


def compile(ast, parity: str, L: float, text: Optional[str] = None) -> ExprProfile:
    """Compile an expression AST and verify parity and 2L-periodicity numerically."""
    if parity not in (ODD, EVEN):
        raise ValueError("parity must be 'odd' or 'even'")
    prof = ExprProfile(ast, parity, L, text)
    probe = np.linspace(0.0, 2.0 * L, PROBE_POINTS, endpoint=False) + L / (3.0 * PROBE_POINTS)
    g = prof(probe)
    g_neg = prof(-probe)
    g_shift = prof(probe + 2.0 * L)
    sign = -1.0 if parity == ODD else 1.0
    defect = np.maximum(np.abs(g_neg - sign * g), np.abs(g_shift - g))
    # the probe also covers r = 0 for odd profiles
    if parity == ODD:
        defect = np.append(defect, abs(prof(0.0)))
        probe = np.append(probe, 0.0)
    worst = int(np.argmax(defect))
    if not np.all(np.isfinite(defect)) or defect[worst] > PARITY_TOL:
        raise ParityViolation(float(probe[worst]), float(defect[worst]), parity)
    return prof


# ---------------------------------------------------------------------------
# file format


@dataclass
class SeriesSource:
    coeffs: list


@dataclass
class ExprSource:
    text: str
    ast: object


@dataclass
class ProfileSpec:
    L: float
    f_source: object
    lambda_source: object
    tolerances: dict = field(default_factory=dict)
    L_text: str = "pi"


def _parse_number_list(text: str, lineno: int, col0: int):
    toks = _tokenize(text, lineno, col0)
    i = 0

    def fail(msg, exp):
        raise ParseError(msg, lineno, toks[i].col, exp)

    if toks[i].text != "[":
        fail("expected '['", ("'['",))
    i += 1
    out = []
    if toks[i].text == "]":
        fail("series may not be empty", ("number",))
    while True:
        neg = False
        if toks[i].text == "-":
            neg = True
            i += 1
        elif toks[i].text == "+":
            i += 1
        if toks[i].kind != "num":
            fail("expected number", ("number",))
        v = float(toks[i].text)
        out.append(-v if neg else v)
        i += 1
        if toks[i].text == ",":
            i += 1
            continue
        if toks[i].text == "]":
            i += 1
            break
        fail("expected ',' or ']'", ("','", "']'"))
    if toks[i].kind != "end":
        fail("unexpected %r" % toks[i].text, ("end of line",))
    return out


_KEY = re.compile(r"\s*(L|f|lambda|f\.series|lambda\.series|tol\.[A-Za-z_][A-Za-z_0-9]*)\s*=")


def parse_profile(text: str) -> ProfileSpec:
    """Parse a system-description document."""
    L_val = None
    L_text = None
    sources = {}
    tols = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        m = _KEY.match(line)
        if not m:
            col = len(line) - len(line.lstrip()) + 1
            raise ParseError("expected a key", lineno, col,
                             ("L", "f", "lambda", "f.series", "lambda.series", "tol.<name>"))
        key = m.group(1)
        rhs = line[m.end():]
        col0 = m.end() + 1
        if key == "L":
            if L_val is not None:
                raise ParseError("duplicate L", lineno, 1)
            ast = parse_expr(rhs, lineno, col0)
            L_val = eval_constant(ast)
            L_text = rhs.strip()
            if not L_val > 0:
                raise ParseError("L must be positive", lineno, col0)
        elif key.startswith("tol."):
            ast = parse_expr(rhs, lineno, col0)
            tols[key[4:]] = eval_constant(ast)
        else:
            name = key.split(".")[0]
            if name in sources:
                raise ParseError("duplicate definition of %s" % name, lineno, 1)
            if key.endswith(".series"):
                sources[name] = SeriesSource(_parse_number_list(rhs, lineno, col0))
            else:
                sources[name] = ExprSource(rhs.strip(), parse_expr(rhs, lineno, col0))
    n_lines = len(text.splitlines()) + 1
    if L_val is None:
        raise ParseError("missing definition of L", n_lines, 1, ("L",))
    for name in ("f", "lambda"):
        if name not in sources:
            raise ParseError("missing definition of %s" % name, n_lines, 1, (name, name + ".series"))
    return ProfileSpec(L=L_val, f_source=sources["f"], lambda_source=sources["lambda"],
                       tolerances=tols, L_text=L_text)


def build_profile(source, parity: str, L: float) -> SmoothProfile:
    if isinstance(source, SeriesSource):
        return SeriesProfile(source.coeffs, parity, L)
    return compile(source.ast, parity, L, source.text)


def format_profile(spec: ProfileSpec) -> str:
    """Serialize a ProfileSpec back to the text format."""
    lines = ["L = %s" % (spec.L_text or repr(spec.L))]
    for name, src in (("f", spec.f_source), ("lambda", spec.lambda_source)):
        if isinstance(src, SeriesSource):
            lines.append("%s.series = [%s]" % (name, ", ".join(repr(float(c)) for c in src.coeffs)))
        else:
            lines.append("%s = %s" % (name, to_text(src.ast)))
    for k in sorted(spec.tolerances):
        lines.append("tol.%s = %r" % (k, spec.tolerances[k]))
    return "\n".join(lines) + "\n"
