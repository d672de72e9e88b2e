"""A small language for analytic expressions in one variable.

Grammar (whitespace between tokens is ignored)::

    expr   = term , { ( "+" | "-" ) , term } ;
    term   = unary , { ( "*" | "/" ) , unary } ;
    unary  = "-" , unary | power ;
    power  = atom , [ "^" , unary ] ;
    atom   = number | constant | variable | func , "(" , expr , ")" | "(" , expr , ")" ;
    number = digits , [ "." , [ digits ] ] , [ exponent ] | "." , digits , [ exponent ] ;
    exponent = ( "e" | "E" ) , [ "+" | "-" ] , digits ;
    constant = "pi" | "i" | "e" ;
    func   = "exp" | "log" | "sqrt" | "sin" | "cos" | "tan" | "sinh" | "cosh" | "tanh" ;

``^`` binds tightest and associates to the right, so ``-z^2`` is ``-(z^2)``
and ``2^3^2`` is ``2^9``.  There is no implicit multiplication.
"""

from __future__ import annotations

import cmath
import math
import re
from dataclasses import dataclass

from . import jets as J
from .analytic import AnalyticMap
from .errors import ExprSyntaxError, PoleSignal, UnknownIdentifier
from .jets import Jet

CONSTANTS = {"pi": math.pi, "i": 1j, "e": math.e}
FUNCTIONS = {
    "exp": J.exp, "log": J.log, "sqrt": J.sqrt, "sin": J.sin, "cos": J.cos, "tan": J.tan,
    "sinh": J.sinh, "cosh": J.cosh, "tanh": J.tanh,
}


# -- AST -----------------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: complex


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class Bin:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expr"


Expr = Num | Const | Var | Neg | Bin | Call

_BINARY_POWER = {"+": 10, "-": 10, "*": 20, "/": 20, "^": 40}
_PREFIX_POWER = 30
_ATOM_POWER = 100


# -- lexer ----------------------------------------------------------------------

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
""", re.VERBOSE)


@dataclass(frozen=True)
class _Tok:
    kind: str      # number, name, op, end
    text: str
    offset: int


def _byte_offset(text, index):
    return len(text[:index].encode("utf-8"))


def tokenize(text):
    out, pos = [], 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", _byte_offset(text, pos),
                                  {"number", "identifier", "operator", "(", ")"})
        if m.lastgroup != "ws":
            out.append(_Tok(m.lastgroup, m.group(), _byte_offset(text, pos)))
        pos = m.end()
    out.append(_Tok("end", "", _byte_offset(text, len(text))))
    return out


# -- parser ---------------------------------------------------------------------

_OPERAND_START = frozenset({"number", "identifier", "(", "-"})


class _Parser:
    def __init__(self, text, var):
        self.toks = tokenize(text)
        self.pos = 0
        self.var = var

    def peek(self):
        return self.toks[self.pos]

    def take(self):
        tok = self.toks[self.pos]
        self.pos += 1
        return tok

    def expect(self, text):
        tok = self.take()
        if tok.text != text or tok.kind == "end":
            raise ExprSyntaxError(f"expected {text!r}", tok.offset, {text})
        return tok

    def expression(self, rbp=0):
        left = self.prefix()
        while True:
            tok = self.peek()
            lbp = _BINARY_POWER.get(tok.text, 0) if tok.kind == "op" else 0
            if lbp <= rbp:
                return left
            self.take()
            # right associativity for ^
            left = Bin(tok.text, left, self.expression(lbp - 1 if tok.text == "^" else lbp))

    def prefix(self):
        tok = self.take()
        if tok.kind == "number":
            value = float(tok.text)
            if not math.isfinite(value):
                raise ExprSyntaxError("numeric literal out of range", tok.offset, {"number"})
            return Num(complex(value))
        if tok.kind == "name":
            return self.identifier(tok)
        if tok.text == "-":
            return Neg(self.expression(_PREFIX_POWER))
        if tok.text == "(":
            inner = self.expression()
            self.expect(")")
            return inner
        what = "end of input" if tok.kind == "end" else repr(tok.text)
        raise ExprSyntaxError(f"unexpected {what}", tok.offset, _OPERAND_START)

    def identifier(self, tok):
        name = tok.text
        if name in FUNCTIONS:
            self.expect("(")
            arg = self.expression()
            self.expect(")")
            return Call(name, arg)
        if name == self.var:
            return Var(name)
        if name in CONSTANTS:
            return Const(name)
        raise UnknownIdentifier(name, tok.offset)


def parse(text, var="z"):
    """Parse ``text`` as an expression in the single variable ``var``."""
    if var in FUNCTIONS:
        raise ValueError(f"{var!r} is a function name")
    p = _Parser(text, var)
    tree = p.expression()
    tok = p.peek()
    if tok.kind != "end":
        raise ExprSyntaxError(f"unexpected {tok.text!r}", tok.offset, {"operator", "end of input"})
    return tree


# -- printer --------------------------------------------------------------------


def _power(e):
    if isinstance(e, Bin):
        return _BINARY_POWER[e.op]
    if isinstance(e, Neg):
        return _PREFIX_POWER
    if isinstance(e, Num) and (e.value.imag != 0 or e.value.real < 0
                               or math.copysign(1.0, e.value.real) < 0):
        return 0
    return _ATOM_POWER


def _num_text(v):
    if v.imag == 0:
        r = v.real
        if r.is_integer() and abs(r) < 1e16 and math.copysign(1.0, r) > 0:
            return str(int(r))
        return repr(r)
    return f"({_num_text(complex(v.real))}+{_num_text(complex(v.imag))}*i)"


def to_text(e):
    """Canonical text for ``e``; parsing it gives back an identical tree."""
    if isinstance(e, Num):
        t = _num_text(e.value)
        return t if _power(e) == _ATOM_POWER or t.startswith("(") else f"({t})"
    if isinstance(e, (Const, Var)):
        return e.name
    if isinstance(e, Call):
        return f"{e.func}({to_text(e.arg)})"
    if isinstance(e, Neg):
        inner = to_text(e.operand)
        return "-" + (inner if _power(e.operand) >= _PREFIX_POWER else f"({inner})")
    bp = _BINARY_POWER[e.op]
    left, right = to_text(e.left), to_text(e.right)
    if e.op == "^":
        if _power(e.left) <= bp:
            left = f"({left})"
        if _power(e.right) < bp and not isinstance(e.right, Neg):
            right = f"({right})"
    else:
        if _power(e.left) < bp:
            left = f"({left})"
        if _power(e.right) <= bp and not isinstance(e.right, Neg):
            right = f"({right})"
    return f"{left}{e.op}{right}"


# -- evaluation -----------------------------------------------------------------


def has_var(e):
    if isinstance(e, Var):
        return True
    if isinstance(e, (Num, Const)):
        return False
    if isinstance(e, Neg):
        return has_var(e.operand)
    if isinstance(e, Call):
        return has_var(e.arg)
    return has_var(e.left) or has_var(e.right)


def _exponent(p):
    if isinstance(p, complex) and p.imag == 0 and p.real.is_integer() and abs(p.real) <= 64:
        return int(p.real)
    return p


def _eval(e, x):
    try:
        if isinstance(e, Num):
            return e.value
        if isinstance(e, Const):
            return complex(CONSTANTS[e.name])
        if isinstance(e, Var):
            return x
        if isinstance(e, Neg):
            return -_eval(e.operand, x)
        if isinstance(e, Call):
            return FUNCTIONS[e.func](_eval(e.arg, x))
        a = _eval(e.left, x)
        b = _eval(e.right, x)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        if e.op == "/":
            if not isinstance(b, Jet) and b == 0:
                raise PoleSignal("division by zero")
            return a / b
        return J.power(a, _exponent(b) if not isinstance(b, Jet) else b)
    except PoleSignal as err:
        if getattr(err, "expr", None) is None:
            sub = to_text(e)
            new = PoleSignal(f"{err} in subexpression {sub!r}")
            new.expr = sub
            raise new from err
        raise
    except (ZeroDivisionError, OverflowError, ValueError) as err:
        new = PoleSignal(f"{err} in subexpression {to_text(e)!r}")
        new.expr = to_text(e)
        raise new from err


def evaluate(e, at):
    """Value of ``e`` at the complex point ``at``."""
    return complex(_eval(e, complex(at)))


def eval_jet(e, at, order):
    """Taylor jet of ``e`` at ``at`` up to ``order``."""
    out = _eval(e, Jet.variable(complex(at), order))
    if not isinstance(out, Jet):
        out = Jet.constant(out, at, order)
    return out


def to_map(e, *, real=False, name=""):
    """The expression as an :class:`AnalyticMap`."""
    return AnalyticMap(lambda z, n: eval_jet(e, z, n), real=real, name=name or to_text(e))


def compile_map(text, var="z", **kw):
    """Parse and wrap in one step."""
    return to_map(parse(text, var), **kw)
