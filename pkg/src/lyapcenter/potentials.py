"""Potential definitions: a small text DSL, exact coefficients, and second-order jets.

A potential is one of three kinds:

* ``radial``        U(x) = phi(||x||^2) with phi a univariate polynomial in t,
* ``blockradial``   U(x) = omega^2/2 * ||x||^2 + eps/2 * W(t_1, .., t_m) where
                    t_i is the squared radius of the i-th coordinate pair,
* ``expr``          U(x) an arbitrary polynomial-style expression in x1..xn.

Source text looks like ``radial: -2*t^2 + 5/3*t^3 - 1/4*t^4``.  Coefficients
are parsed into exact Fractions and differentiated symbolically, so Hessians
at rational critical points come out integer-exact.  Float lowering happens
once per potential; evaluation is plain Horner / term summation in floats.

For the ``expr`` kind derivatives come from forward-mode jets carrying
(value, gradient, Hessian).  All jet operations build the Hessian from
manifestly symmetric pieces, so ``jet.hessian == jet.hessian.T`` holds
bit-for-bit.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Optional, Union

import numpy as np

__all__ = [
    "ParseError",
    "DomainError",
    "Jet2",
    "RadialPolynomial",
    "BlockRadialPolynomial",
    "Expression",
    "parse_potential",
    "print_potential",
    "eval_jet2",
]


class ParseError(ValueError):
    """Raised for any problem in the potential text itself."""

    def __init__(self, message: str, line: int = 1, col: int = 1):
        super().__init__(f"line {line}, column {col}: {message}")
        self.line = line
        self.col = col


class DomainError(ArithmeticError):
    """Raised when evaluation hits an undefined operation (e.g. 1/0)."""


# ---------------------------------------------------------------------------
# tokens and AST


@dataclass(frozen=True)
class _Token:
    kind: str  # NUM, IDENT, OP, EOF
    text: str
    line: int
    col: int


_NUM_RE = re.compile(r"\d+(\.\d*)?([eE][+-]?\d+)?|\.\d+([eE][+-]?\d+)?")
_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")
_OPS = set("+-*/^(),=:")


def _tokenize(src: str, col_offset: int = 0) -> list[_Token]:
    toks = []
    line, col = 1, 1 + col_offset
    i = 0
    while i < len(src):
        c = src[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if c.isspace():
            i += 1
            col += 1
            continue
        m = _NUM_RE.match(src, i)
        if m:
            toks.append(_Token("NUM", m.group(), line, col))
            col += m.end() - i
            i = m.end()
            continue
        m = _IDENT_RE.match(src, i)
        if m:
            toks.append(_Token("IDENT", m.group(), line, col))
            col += m.end() - i
            i = m.end()
            continue
        if c in _OPS:
            toks.append(_Token("OP", c, line, col))
            i += 1
            col += 1
            continue
        raise ParseError(f"unexpected character {c!r}", line, col)
    toks.append(_Token("EOF", "", line, col))
    return toks


@dataclass(frozen=True)
class Num:
    value: Fraction


@dataclass(frozen=True)
class Var:
    index: int
    name: str


@dataclass(frozen=True)
class Ident:
    # unresolved name, only present between parsing and binding
    name: str
    line: int
    col: int


@dataclass(frozen=True)
class Neg:
    child: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Pow:
    base: "Node"
    exponent: int


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple
    line: int
    col: int


Node = Union[Num, Var, Ident, Neg, BinOp, Pow, Call]


class _Parser:
    """Pratt parser over the token stream; ^ binds tightest and associates right."""

    def __init__(self, tokens: list[_Token]):
        self.toks = tokens
        self.pos = 0

    def peek(self) -> _Token:
        return self.toks[self.pos]

    def advance(self) -> _Token:
        tok = self.toks[self.pos]
        self.pos += 1
        return tok

    def expect(self, text: str) -> _Token:
        tok = self.advance()
        if tok.text != text:
            raise ParseError(f"expected {text!r}, found {tok.text or 'end of input'!r}",
                             tok.line, tok.col)
        return tok

    _LBP = {"+": 10, "-": 10, "*": 20, "/": 20, "^": 30}

    def expression(self, rbp: int = 0) -> Node:
        left = self._nud(self.advance())
        while self.peek().kind == "OP" and self._LBP.get(self.peek().text, 0) > rbp:
            left = self._led(self.advance(), left)
        return left

    def _nud(self, tok: _Token) -> Node:
        if tok.kind == "NUM":
            return Num(Fraction(tok.text))
        if tok.kind == "IDENT":
            if self.peek().text == "(":
                self.advance()
                args = []
                if self.peek().text != ")":
                    args.append(self.expression())
                    while self.peek().text == ",":
                        self.advance()
                        args.append(self.expression())
                self.expect(")")
                return Call(tok.text, tuple(args), tok.line, tok.col)
            return Ident(tok.text, tok.line, tok.col)
        if tok.text == "(":
            inner = self.expression()
            self.expect(")")
            return inner
        if tok.text == "-":
            return Neg(self.expression(25))
        if tok.text == "+":
            return self.expression(25)
        raise ParseError(f"unexpected token {tok.text or 'end of input'!r}", tok.line, tok.col)

    def _led(self, tok: _Token, left: Node) -> Node:
        if tok.text == "^":
            exp_tok = self.peek()
            exponent = self.expression(29)
            k = _const_fraction(exponent)
            if k is None or k.denominator != 1:
                raise ParseError("non-integer exponent", exp_tok.line, exp_tok.col)
            return Pow(left, int(k))
        right = self.expression(self._LBP[tok.text])
        return BinOp(tok.text, left, right)


def _const_fraction(node: Node) -> Optional[Fraction]:
    """Exact value of a constant subtree, or None if it mentions a variable."""
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Neg):
        v = _const_fraction(node.child)
        return None if v is None else -v
    if isinstance(node, Pow):
        v = _const_fraction(node.base)
        if v is None:
            return None
        if node.exponent < 0 and v == 0:
            raise DomainError("0 raised to a negative power")
        return v ** node.exponent
    if isinstance(node, BinOp):
        a = _const_fraction(node.left)
        b = _const_fraction(node.right)
        if a is None or b is None:
            return None
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if b == 0:
            raise DomainError("division by zero in constant expression")
        return a / b
    return None


# ---------------------------------------------------------------------------
# potential kinds


@dataclass(frozen=True)
class Jet2:
    """Value, gradient and symmetric Hessian of a potential at one point."""

    value: float
    gradient: np.ndarray
    hessian: np.ndarray


def _poly_float(coeffs: dict) -> np.ndarray:
    if not coeffs:
        return np.zeros(1)
    deg = max(coeffs)
    dense = np.zeros(deg + 1)
    for d, c in coeffs.items():
        dense[d] = float(c)
    return dense


def _horner(dense: np.ndarray, s: float) -> float:
    acc = 0.0
    for c in dense[::-1]:
        acc = acc * s + c
    return acc


def _uni_derivative(coeffs: dict) -> dict:
    return {d - 1: c * d for d, c in coeffs.items() if d >= 1}


@dataclass(frozen=True)
class RadialPolynomial:
    """U(x) = phi(||x||^2) with phi given by exact rational coefficients."""

    coeffs: tuple  # ((degree, Fraction), ...) ascending, zero coeffs dropped

    @staticmethod
    def from_dict(coeffs: dict) -> "RadialPolynomial":
        items = tuple(sorted((int(d), Fraction(c)) for d, c in coeffs.items() if c != 0))
        return RadialPolynomial(items)

    @property
    def n(self) -> Optional[int]:
        return None  # radial potentials make sense in any ambient dimension

    @cached_property
    def phi_coeffs(self) -> dict:
        return dict(self.coeffs)

    @cached_property
    def dphi_coeffs(self) -> dict:
        return _uni_derivative(self.phi_coeffs)

    @cached_property
    def d2phi_coeffs(self) -> dict:
        return _uni_derivative(self.dphi_coeffs)

    @cached_property
    def _phi_f(self) -> np.ndarray:
        return _poly_float(self.phi_coeffs)

    @cached_property
    def _dphi_f(self) -> np.ndarray:
        return _poly_float(self.dphi_coeffs)

    @cached_property
    def _d2phi_f(self) -> np.ndarray:
        return _poly_float(self.d2phi_coeffs)

    def phi(self, s: float) -> float:
        return _horner(self._phi_f, s)

    def dphi(self, s: float) -> float:
        return _horner(self._dphi_f, s)

    def d2phi(self, s: float) -> float:
        return _horner(self._d2phi_f, s)

    def value(self, x: np.ndarray) -> float:
        x = np.asarray(x, dtype=float)
        return self.phi(float(x @ x))

    def gradient(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return (2.0 * self.dphi(float(x @ x))) * x

    def hessian(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        s = float(x @ x)
        h = (4.0 * self.d2phi(s)) * np.outer(x, x)
        h[np.diag_indices_from(h)] += 2.0 * self.dphi(s)
        return h

    def jet2(self, x: np.ndarray) -> Jet2:
        x = np.asarray(x, dtype=float)
        return Jet2(self.value(x), self.gradient(x), self.hessian(x))


def _terms_float(terms: tuple) -> list:
    return [(float(c), exps) for exps, c in terms]


def _eval_terms(terms_f: list, tpow: list) -> float:
    total = 0.0
    for c, exps in terms_f:
        prod = c
        for i, e in enumerate(exps):
            if e:
                prod *= tpow[i][e]
        total += prod
    return total


def _multi_partial(terms: tuple, i: int) -> tuple:
    out = {}
    for exps, c in terms:
        if exps[i] == 0:
            continue
        new = list(exps)
        new[i] -= 1
        key = tuple(new)
        out[key] = out.get(key, Fraction(0)) + c * exps[i]
    return tuple(sorted((k, v) for k, v in out.items() if v != 0))


@dataclass(frozen=True)
class BlockRadialPolynomial:
    """U(x) = omega^2/2 ||x||^2 + eps/2 W(t), t_i = squared radius of pair i.

    Coordinates are consumed in consecutive pairs: t_1 = x_1^2 + x_2^2 and so
    on, so the ambient dimension is 2m.  The SO(2)^m invariance is built in.
    """

    omega: Fraction
    eps: Fraction
    m: int
    terms: tuple  # ((exps tuple of length m, Fraction), ...) graded-lex sorted

    @property
    def n(self) -> int:
        return 2 * self.m

    @property
    def block_dims(self) -> tuple:
        return (2,) * self.m

    @cached_property
    def _w2(self) -> float:
        return float(self.omega * self.omega)

    @cached_property
    def _eps_f(self) -> float:
        return float(self.eps)

    @cached_property
    def _terms_f(self) -> list:
        return _terms_float(self.terms)

    @cached_property
    def partials(self) -> list:
        return [_multi_partial(self.terms, i) for i in range(self.m)]

    @cached_property
    def _partials_f(self) -> list:
        return [_terms_float(p) for p in self.partials]

    @cached_property
    def _second_f(self) -> list:
        rows = []
        for i in range(self.m):
            rows.append([_terms_float(_multi_partial(self.partials[i], j))
                         for j in range(self.m)])
        return rows

    def _tpow(self, t: np.ndarray) -> list:
        dmax = max((max(e) for e, _ in self.terms), default=0)
        return [[ti ** e for e in range(dmax + 1)] for ti in t]

    def partial_value(self, i: int, t: np.ndarray) -> float:
        """dW/dt_i at block radii squared t (the bare W-part, no prefactor)."""
        return _eval_terms(self._partials_f[i], self._tpow(np.asarray(t, dtype=float)))

    def second_partial_value(self, i: int, j: int, t: np.ndarray) -> float:
        """d2W/dt_i dt_j at block radii squared t."""
        return _eval_terms(self._second_f[i][j], self._tpow(np.asarray(t, dtype=float)))

    def block_radii_sq(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return x[0::2] ** 2 + x[1::2] ** 2

    def value(self, x: np.ndarray) -> float:
        x = np.asarray(x, dtype=float)
        t = self.block_radii_sq(x)
        w = _eval_terms(self._terms_f, self._tpow(t))
        return 0.5 * self._w2 * float(x @ x) + 0.5 * self._eps_f * w

    def _coef_per_block(self, t: np.ndarray) -> np.ndarray:
        tpow = self._tpow(t)
        return np.array([self._w2 + self._eps_f * _eval_terms(self._partials_f[i], tpow)
                         for i in range(self.m)])

    def gradient(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        c = self._coef_per_block(self.block_radii_sq(x))
        return x * np.repeat(c, 2)

    def hessian(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        t = self.block_radii_sq(x)
        tpow = self._tpow(t)
        c = self._coef_per_block(t)
        dd = np.array([[_eval_terms(self._second_f[i][j], tpow) for j in range(self.m)]
                       for i in range(self.m)])
        dd = np.repeat(np.repeat(dd, 2, axis=0), 2, axis=1)
        h = (2.0 * self._eps_f) * np.outer(x, x) * dd
        h[np.diag_indices_from(h)] += np.repeat(c, 2)
        return h

    def jet2(self, x: np.ndarray) -> Jet2:
        x = np.asarray(x, dtype=float)
        return Jet2(self.value(x), self.gradient(x), self.hessian(x))


class _Jet:
    """Internal forward-mode node: value, gradient, optionally a Hessian."""

    __slots__ = ("v", "g", "h")

    def __init__(self, v: float, g: np.ndarray, h: Optional[np.ndarray]):
        self.v = v
        self.g = g
        self.h = h


def _jet_const(c: float, n: int, second: bool) -> _Jet:
    return _Jet(c, np.zeros(n), np.zeros((n, n)) if second else None)


def _jet_var(x: np.ndarray, i: int, second: bool) -> _Jet:
    n = len(x)
    g = np.zeros(n)
    g[i] = 1.0
    return _Jet(float(x[i]), g, np.zeros((n, n)) if second else None)


def _jet_add(a: _Jet, b: _Jet) -> _Jet:
    h = None if a.h is None else a.h + b.h
    return _Jet(a.v + b.v, a.g + b.g, h)


def _jet_sub(a: _Jet, b: _Jet) -> _Jet:
    h = None if a.h is None else a.h - b.h
    return _Jet(a.v - b.v, a.g - b.g, h)


def _jet_neg(a: _Jet) -> _Jet:
    return _Jet(-a.v, -a.g, None if a.h is None else -a.h)


def _jet_mul(a: _Jet, b: _Jet) -> _Jet:
    h = None
    if a.h is not None:
        cross = np.outer(a.g, b.g)
        # cross + cross.T is symmetric in exact float arithmetic
        h = a.h * b.v + b.h * a.v + cross + cross.T
    return _Jet(a.v * b.v, a.g * b.v + b.g * a.v, h)


def _jet_div(a: _Jet, b: _Jet) -> _Jet:
    if b.v == 0.0:
        raise DomainError("division by zero while evaluating potential")
    v = a.v / b.v
    g = (a.g - v * b.g) / b.v
    h = None
    if a.h is not None:
        cross = np.outer(g, b.g)
        h = (a.h - (cross + cross.T) - v * b.h) / b.v
    return _Jet(v, g, h)


def _jet_pow(a: _Jet, k: int) -> _Jet:
    if k == 0:
        n = len(a.g)
        return _jet_const(1.0, n, a.h is not None)
    if a.v == 0.0 and k < 0:
        raise DomainError("0 raised to a negative power while evaluating potential")
    v = a.v ** k
    d1 = k * a.v ** (k - 1)
    g = d1 * a.g
    h = None
    if a.h is not None:
        d2 = k * (k - 1) * a.v ** (k - 2) if k != 1 else 0.0
        h = d1 * a.h + d2 * np.outer(a.g, a.g)
    return _Jet(v, g, h)


def _eval_jet(node: Node, x: np.ndarray, second: bool) -> _Jet:
    if isinstance(node, Num):
        return _jet_const(float(node.value), len(x), second)
    if isinstance(node, Var):
        return _jet_var(x, node.index, second)
    if isinstance(node, Neg):
        return _jet_neg(_eval_jet(node.child, x, second))
    if isinstance(node, Pow):
        return _jet_pow(_eval_jet(node.base, x, second), node.exponent)
    if isinstance(node, BinOp):
        a = _eval_jet(node.left, x, second)
        b = _eval_jet(node.right, x, second)
        if node.op == "+":
            return _jet_add(a, b)
        if node.op == "-":
            return _jet_sub(a, b)
        if node.op == "*":
            return _jet_mul(a, b)
        return _jet_div(a, b)
    raise TypeError(f"unbound node {node!r} in expression evaluation")


def _eval_float_ast(node: Node, x: np.ndarray) -> float:
    if isinstance(node, Num):
        return float(node.value)
    if isinstance(node, Var):
        return float(x[node.index])
    if isinstance(node, Neg):
        return -_eval_float_ast(node.child, x)
    if isinstance(node, Pow):
        base = _eval_float_ast(node.base, x)
        if base == 0.0 and node.exponent < 0:
            raise DomainError("0 raised to a negative power while evaluating potential")
        return base ** node.exponent
    if isinstance(node, BinOp):
        a = _eval_float_ast(node.left, x)
        b = _eval_float_ast(node.right, x)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if b == 0.0:
            raise DomainError("division by zero while evaluating potential")
        return a / b
    raise TypeError(f"unbound node {node!r} in expression evaluation")


@dataclass(frozen=True)
class Expression:
    """General potential on R^n given by a bound expression tree in x1..xn."""

    n: int
    ast: Node

    def value(self, x: np.ndarray) -> float:
        x = np.asarray(x, dtype=float)
        self._check_dim(x)
        return _eval_float_ast(self.ast, x)

    def gradient(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        self._check_dim(x)
        return _eval_jet(self.ast, x, second=False).g

    def hessian(self, x: np.ndarray) -> np.ndarray:
        return self.jet2(x).hessian

    def jet2(self, x: np.ndarray) -> Jet2:
        x = np.asarray(x, dtype=float)
        self._check_dim(x)
        jet = _eval_jet(self.ast, x, second=True)
        return Jet2(jet.v, jet.g, jet.h)

    def _check_dim(self, x: np.ndarray) -> None:
        if len(x) != self.n:
            raise ValueError(f"expected a point in R^{self.n}, got length {len(x)}")


PotentialSpec = Union[RadialPolynomial, BlockRadialPolynomial, Expression]


def eval_jet2(spec: PotentialSpec, x: np.ndarray) -> Jet2:
    """Value, gradient, Hessian of any potential kind at x."""
    return spec.jet2(x)


# ---------------------------------------------------------------------------
# binding: resolve identifiers per kind, convert to exact polynomials


def _subst_params(node: Node, params: dict) -> Node:
    if isinstance(node, Ident) and node.name in params:
        val = params[node.name]
        return Neg(Num(-val)) if val < 0 else Num(val)
    if isinstance(node, Neg):
        return Neg(_subst_params(node.child, params))
    if isinstance(node, Pow):
        return Pow(_subst_params(node.base, params), node.exponent)
    if isinstance(node, BinOp):
        return BinOp(node.op, _subst_params(node.left, params),
                     _subst_params(node.right, params))
    if isinstance(node, Call):
        return Call(node.name, tuple(_subst_params(a, params) for a in node.args),
                    node.line, node.col)
    return node


_TVAR_RE = re.compile(r"^t([1-9][0-9]*)$")
_XVAR_RE = re.compile(r"^x([1-9][0-9]*)$")


def _collect_idents(node: Node, out: list) -> None:
    if isinstance(node, Ident):
        out.append(node)
    elif isinstance(node, Neg):
        _collect_idents(node.child, out)
    elif isinstance(node, Pow):
        _collect_idents(node.base, out)
    elif isinstance(node, BinOp):
        _collect_idents(node.left, out)
        _collect_idents(node.right, out)
    elif isinstance(node, Call):
        for a in node.args:
            _collect_idents(a, out)


def _bind(node: Node, mapping: dict) -> Node:
    if isinstance(node, Ident):
        return Var(mapping[node.name], node.name)
    if isinstance(node, Neg):
        return Neg(_bind(node.child, mapping))
    if isinstance(node, Pow):
        return Pow(_bind(node.base, mapping), node.exponent)
    if isinstance(node, BinOp):
        return BinOp(node.op, _bind(node.left, mapping), _bind(node.right, mapping))
    if isinstance(node, Call):
        return Call(node.name, tuple(_bind(a, mapping) for a in node.args),
                    node.line, node.col)
    return node


def _desugar_normsq(node: Node) -> Node:
    if isinstance(node, Call):
        if node.name != "normsq":
            raise ParseError(f"unknown function {node.name!r}", node.line, node.col)
        if not node.args:
            raise ParseError("normsq needs at least one argument", node.line, node.col)
        total: Node = Pow(_desugar_normsq(node.args[0]), 2)
        for arg in node.args[1:]:
            total = BinOp("+", total, Pow(_desugar_normsq(arg), 2))
        return total
    if isinstance(node, Neg):
        return Neg(_desugar_normsq(node.child))
    if isinstance(node, Pow):
        return Pow(_desugar_normsq(node.base), node.exponent)
    if isinstance(node, BinOp):
        return BinOp(node.op, _desugar_normsq(node.left), _desugar_normsq(node.right))
    return node


def _reject_calls(node: Node, kind: str) -> None:
    if isinstance(node, Call):
        raise ParseError(f"function calls are not allowed in {kind} potentials",
                         node.line, node.col)
    if isinstance(node, Neg):
        _reject_calls(node.child, kind)
    elif isinstance(node, Pow):
        _reject_calls(node.base, kind)
    elif isinstance(node, BinOp):
        _reject_calls(node.left, kind)
        _reject_calls(node.right, kind)


def _to_poly(node: Node, nvars: int):
    """Interpret a bound AST inside Q[t_1..t_nvars]; keys are exponent tuples."""
    zero = (0,) * nvars
    if isinstance(node, Num):
        return {zero: node.value} if node.value != 0 else {}
    if isinstance(node, Var):
        key = tuple(1 if i == node.index else 0 for i in range(nvars))
        return {key: Fraction(1)}
    if isinstance(node, Neg):
        return {k: -v for k, v in _to_poly(node.child, nvars).items()}
    if isinstance(node, Pow):
        if node.exponent < 0:
            raise ParseError("negative exponent in a polynomial potential")
        base = _to_poly(node.base, nvars)
        acc = {zero: Fraction(1)}
        for _ in range(node.exponent):
            acc = _poly_mul(acc, base, nvars)
        return acc
    if isinstance(node, BinOp):
        a = _to_poly(node.left, nvars)
        b = _to_poly(node.right, nvars)
        if node.op == "+":
            return _poly_add(a, b, 1)
        if node.op == "-":
            return _poly_add(a, b, -1)
        if node.op == "*":
            return _poly_mul(a, b, nvars)
        # division: only by a nonzero constant stays polynomial
        if not b:
            raise DomainError("division by zero in potential coefficients")
        if set(b) != {zero}:
            raise ParseError("division by a non-constant in a polynomial potential")
        c = b[zero]
        return {k: v / c for k, v in a.items()}
    raise TypeError(f"unexpected node {node!r} in polynomial conversion")


def _poly_add(a: dict, b: dict, sign: int) -> dict:
    out = dict(a)
    for k, v in b.items():
        out[k] = out.get(k, Fraction(0)) + sign * v
    return {k: v for k, v in out.items() if v != 0}


def _poly_mul(a: dict, b: dict, nvars: int) -> dict:
    out = {}
    for ka, va in a.items():
        for kb, vb in b.items():
            key = tuple(ka[i] + kb[i] for i in range(nvars))
            out[key] = out.get(key, Fraction(0)) + va * vb
    return {k: v for k, v in out.items() if v != 0}


def parse_potential(source: str) -> PotentialSpec:
    """Parse DSL text into one of the three potential kinds.

    Grammar: ``kind ":" (name "=" const ",")* ["U" "="] expression`` with kind
    in radial | blockradial | expr.  Parameters are exact constants substituted
    into the expression; blockradial additionally reads omega and eps as the
    prefactor parameters.
    """
    head, sep, body_src = source.partition(":")
    if not sep:
        raise ParseError("missing ':' after potential kind")
    kind = head.strip()
    if kind not in ("radial", "blockradial", "expr"):
        raise ParseError(f"unknown potential kind {kind!r}")

    toks = _tokenize(body_src, col_offset=len(head) + 1)
    parser = _Parser(toks)

    params: dict = {}
    while (parser.peek().kind == "IDENT"
           and parser.toks[parser.pos + 1].text == "="
           and parser.peek().text != "U"):
        name_tok = parser.advance()
        parser.advance()  # '='
        val_node = parser.expression()
        val = _const_fraction(val_node)
        if val is None:
            raise ParseError(f"parameter {name_tok.text!r} must be a constant",
                             name_tok.line, name_tok.col)
        if name_tok.text in params:
            raise ParseError(f"duplicate parameter {name_tok.text!r}",
                             name_tok.line, name_tok.col)
        params[name_tok.text] = val
        if parser.peek().text != ",":
            tok = parser.peek()
            raise ParseError("expected ',' after parameter", tok.line, tok.col)
        parser.advance()

    if parser.peek().text == "U" and parser.toks[parser.pos + 1].text == "=":
        parser.advance()
        parser.advance()

    ast = parser.expression()
    tail = parser.peek()
    if tail.kind != "EOF":
        raise ParseError(f"unexpected trailing input {tail.text!r}", tail.line, tail.col)

    dim_param = params.pop("n", None)
    block_param = params.pop("m", None)
    if kind == "blockradial":
        omega = params.pop("omega", Fraction(0))
        eps = params.pop("eps", Fraction(1))
    ast = _subst_params(ast, params)

    idents: list = []
    _collect_idents(ast, idents)

    if kind == "radial":
        _reject_calls(ast, "radial")
        for ident in idents:
            if ident.name != "t":
                raise ParseError(f"unknown identifier {ident.name!r}", ident.line, ident.col)
        bound = _bind(ast, {"t": 0})
        poly = _to_poly(bound, 1)
        return RadialPolynomial.from_dict({k[0]: v for k, v in poly.items()})

    if kind == "blockradial":
        _reject_calls(ast, "blockradial")
        m = 0
        for ident in idents:
            match = _TVAR_RE.match(ident.name)
            if not match:
                raise ParseError(f"unknown identifier {ident.name!r}", ident.line, ident.col)
            m = max(m, int(match.group(1)))
        if block_param is not None:
            if block_param.denominator != 1 or block_param < m:
                raise ParseError("parameter m must be an integer >= the largest block index")
            m = int(block_param)
        if m == 0:
            raise ParseError("blockradial potential mentions no block variables t1, t2, ...")
        bound = _bind(ast, {f"t{i + 1}": i for i in range(m)})
        poly = _to_poly(bound, m)
        terms = tuple(sorted(poly.items(), key=lambda kv: (sum(kv[0]), kv[0])))
        return BlockRadialPolynomial(omega, eps, m, terms)

    ast = _desugar_normsq(ast)
    idents = []
    _collect_idents(ast, idents)
    n = 0
    for ident in idents:
        match = _XVAR_RE.match(ident.name)
        if not match:
            raise ParseError(f"unknown identifier {ident.name!r}", ident.line, ident.col)
        n = max(n, int(match.group(1)))
    if dim_param is not None:
        if dim_param.denominator != 1 or dim_param < n:
            raise ParseError("parameter n must be an integer >= the largest coordinate index")
        n = int(dim_param)
    if n == 0:
        raise ParseError("expr potential mentions no coordinates x1, x2, ...")
    bound = _bind(ast, {f"x{i + 1}": i for i in range(n)})
    return Expression(n, bound)


# ---------------------------------------------------------------------------
# canonical printing


def _frac_text(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def _monomial_text(c: Fraction, vars_text: list) -> str:
    body = "*".join(vars_text)
    if not body:
        return _frac_text(abs(c))
    if abs(c) == 1:
        return body
    return f"{_frac_text(abs(c))}*{body}"


def _poly_text(terms: list, var_name) -> str:
    # terms: list of (exps tuple, Fraction) already in canonical order
    if not terms:
        return "0"
    pieces = []
    for idx, (exps, c) in enumerate(terms):
        vars_text = []
        for i, e in enumerate(exps):
            if e == 1:
                vars_text.append(var_name(i))
            elif e > 1:
                vars_text.append(f"{var_name(i)}^{e}")
        mono = _monomial_text(c, vars_text)
        if idx == 0:
            pieces.append(f"-{mono}" if c < 0 else mono)
        else:
            pieces.append(f" - {mono}" if c < 0 else f" + {mono}")
    return "".join(pieces)


_PREC = {"+": 10, "-": 10, "*": 20, "/": 20}


def _ast_text(node: Node, ctx: int = 0) -> str:
    if isinstance(node, Num):
        text = _frac_text(node.value)
        bp = 20 if node.value.denominator != 1 else 99
        return f"({text})" if bp <= ctx else text
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        text = f"-{_ast_text(node.child, 25)}"
        return f"({text})" if ctx >= 20 else text
    if isinstance(node, Pow):
        text = f"{_ast_text(node.base, 30)}^{node.exponent}"
        return f"({text})" if ctx >= 30 else text
    if isinstance(node, BinOp):
        bp = _PREC[node.op]
        text = f"{_ast_text(node.left, bp - 1)} {node.op} {_ast_text(node.right, bp)}"
        return f"({text})" if bp <= ctx else text
    raise TypeError(f"cannot print node {node!r}")


def print_potential(spec: PotentialSpec) -> str:
    """Canonical text form; parse(print(spec)) reproduces spec exactly."""
    if isinstance(spec, RadialPolynomial):
        terms = [((d,), c) for d, c in spec.coeffs]
        return f"radial: {_poly_text(terms, lambda i: 't')}"
    if isinstance(spec, BlockRadialPolynomial):
        body = _poly_text(list(spec.terms), lambda i: f"t{i + 1}")
        return (f"blockradial: omega={_frac_text(spec.omega)}, "
                f"eps={_frac_text(spec.eps)}, m={spec.m}, U = {body}")
    if isinstance(spec, Expression):
        return f"expr: n={spec.n}, {_ast_text(spec.ast)}"
    raise TypeError(f"not a potential spec: {spec!r}")
