"""Arithmetic in the Euler ring of the circle group, and induction from it.

Elements are written over the basis I (the class of the full quotient
S^1/S^1) and Z_k, k >= 1 (classes of the quotients by the cyclic subgroups).
With x = (a0, A) and y = (b0, B) splitting off the I-coefficient, the product
is (a0*b0, a0*B + b0*A): any product of two torus-part generators vanishes.
Consequently an element is invertible iff its I-coefficient is +-1, and the
inverse simply flips the torus part.

chi_sphere sends a finite-dimensional representation of S^1 (trivial part of
dimension d, plus two-dimensional rotation modes) to the reduced Euler class
of its one-point-compactified sphere: (-1)^d * (I - sum_i mult_i * Z_{mode_i}).

Coefficients are Python integers, so arithmetic can never silently wrap; any
"overflow" simply grows the integer.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Mapping, Optional, Union

__all__ = [
    "S1Representation",
    "EulerRingElement",
    "UGElement",
    "NotInvertibleError",
    "LabelingError",
    "ring_add",
    "ring_mul",
    "chi_sphere",
    "invert",
    "induce_to_G",
    "parse_rep",
    "parse_euler_expr",
    "RING_ZERO",
    "RING_ONE",
]


class NotInvertibleError(ValueError):
    """Inversion requested for an element whose I-coefficient is not +-1."""


class LabelingError(ValueError):
    """A class relabeling collapses two distinct basis elements."""


@dataclass(frozen=True)
class S1Representation:
    """Trivial part plus rotation modes; modes stored as (multiplicity, mode)."""

    trivial_dim: int = 0
    modes: tuple = ()  # ((mult, k), ...) with k >= 1 strictly increasing

    def __post_init__(self):
        if self.trivial_dim < 0:
            raise ValueError("trivial dimension must be >= 0")
        last = 0
        for mult, k in self.modes:
            if mult < 1 or k < 1:
                raise ValueError("modes need multiplicity >= 1 and mode >= 1")
            if k <= last:
                raise ValueError("modes must be strictly increasing")
            last = k

    @staticmethod
    def build(trivial_dim: int = 0, modes: Mapping[int, int] = ()) -> "S1Representation":
        pairs = sorted(((m, k) for k, m in dict(modes).items() if m),
                       key=lambda mk: mk[1])
        return S1Representation(trivial_dim, tuple(pairs))

    @property
    def dim(self) -> int:
        return self.trivial_dim + 2 * sum(m for m, _ in self.modes)

    def mode_multiplicity(self, k: int) -> int:
        for mult, mode in self.modes:
            if mode == k:
                return mult
        return 0

    def direct_sum(self, other: "S1Representation") -> "S1Representation":
        merged = {k: m for m, k in self.modes}
        for m, k in other.modes:
            merged[k] = merged.get(k, 0) + m
        return S1Representation.build(self.trivial_dim + other.trivial_dim, merged)

    def text(self) -> str:
        pieces = []
        if self.trivial_dim:
            pieces.append(f"R[{self.trivial_dim},0]")
        for mult, k in self.modes:
            pieces.append(f"R[{mult},{k}]")
        return "+".join(pieces) if pieces else "0"


_REP_TERM = re.compile(r"^R\[\s*(\d+)\s*,\s*(\d+)\s*\]$")


def parse_rep(text: str) -> S1Representation:
    """Parse representation strings such as ``R[1,0]+R[2,3]``."""
    text = text.strip()
    if text == "0":
        return S1Representation()
    trivial = 0
    modes: dict = {}
    for piece in text.split("+"):
        m = _REP_TERM.match(piece.strip())
        if not m:
            raise ValueError(f"bad representation term {piece.strip()!r}")
        mult, mode = int(m.group(1)), int(m.group(2))
        if mult == 0:
            continue
        if mode == 0:
            trivial += mult
        else:
            modes[mode] = modes.get(mode, 0) + mult
    return S1Representation.build(trivial, modes)


@dataclass(frozen=True)
class EulerRingElement:
    """Element a0*I + sum c_k*Z_k of the Euler ring of S^1."""

    unit: int = 0
    torus: tuple = ()  # ((k, coeff), ...) sorted by k, coeff != 0

    def __post_init__(self):
        last = 0
        for k, c in self.torus:
            if k < 1 or c == 0:
                raise ValueError("torus terms need k >= 1 and nonzero coefficients")
            if k <= last:
                raise ValueError("torus terms must be sorted by k")
            last = k

    @staticmethod
    def build(unit: int = 0, torus: Mapping[int, int] = ()) -> "EulerRingElement":
        items = tuple(sorted((k, c) for k, c in dict(torus).items() if c != 0))
        return EulerRingElement(int(unit), items)

    def torus_dict(self) -> dict:
        return dict(self.torus)

    def __add__(self, other: "EulerRingElement") -> "EulerRingElement":
        merged = self.torus_dict()
        for k, c in other.torus:
            merged[k] = merged.get(k, 0) + c
        return EulerRingElement.build(self.unit + other.unit, merged)

    def __neg__(self) -> "EulerRingElement":
        return EulerRingElement.build(-self.unit, {k: -c for k, c in self.torus})

    def __sub__(self, other: "EulerRingElement") -> "EulerRingElement":
        return self + (-other)

    def __mul__(self, other: "EulerRingElement") -> "EulerRingElement":
        merged = {k: self.unit * c for k, c in other.torus}
        for k, c in self.torus:
            merged[k] = merged.get(k, 0) + other.unit * c
        return EulerRingElement.build(self.unit * other.unit, merged)

    def text(self) -> str:
        pieces = []
        if self.unit:
            if abs(self.unit) == 1:
                pieces.append(("-" if self.unit < 0 else "") + "I")
            else:
                pieces.append(f"{self.unit}*I")
        for k, c in self.torus:
            term = f"Z{k}" if abs(c) == 1 else f"{abs(c)}*Z{k}"
            if not pieces:
                pieces.append(("-" if c < 0 else "") + term)
            else:
                pieces.append(("- " if c < 0 else "+ ") + term)
        return " ".join(pieces) if pieces else "0"


RING_ZERO = EulerRingElement()
RING_ONE = EulerRingElement(unit=1)


def ring_add(x: EulerRingElement, y: EulerRingElement) -> EulerRingElement:
    return x + y


def ring_mul(x: EulerRingElement, y: EulerRingElement) -> EulerRingElement:
    return x * y


def chi_sphere(rep: S1Representation) -> EulerRingElement:
    """Reduced Euler class of the representation sphere S^rep."""
    sign = -1 if rep.trivial_dim % 2 else 1
    return EulerRingElement.build(sign, {k: -sign * m for m, k in rep.modes})


def invert(x: EulerRingElement) -> EulerRingElement:
    """Multiplicative inverse; exists exactly when the I-coefficient is +-1."""
    if x.unit not in (1, -1):
        raise NotInvertibleError(
            f"I-coefficient is {x.unit}; only units +-1 are invertible")
    result = EulerRingElement.build(x.unit, {k: -c for k, c in x.torus})
    assert x * result == RING_ONE
    return result


@dataclass(frozen=True)
class UGElement:
    """Element of the Euler ring of a larger group G, over labeled classes."""

    coeffs: tuple  # ((label, coeff), ...) sorted by label, coeff != 0

    @staticmethod
    def build(coeffs: Mapping[str, int]) -> "UGElement":
        items = tuple(sorted((l, c) for l, c in dict(coeffs).items() if c != 0))
        return UGElement(items)

    def coeff_dict(self) -> dict:
        return dict(self.coeffs)

    def __add__(self, other: "UGElement") -> "UGElement":
        merged = self.coeff_dict()
        for l, c in other.coeffs:
            merged[l] = merged.get(l, 0) + c
        return UGElement.build(merged)

    def text(self) -> str:
        if not self.coeffs:
            return "0"
        pieces = []
        for label, c in self.coeffs:
            term = label if abs(c) == 1 else f"{abs(c)}*{label}"
            if not pieces:
                pieces.append(("-" if c < 0 else "") + term)
            else:
                pieces.append(("- " if c < 0 else "+ ") + term)
        return " ".join(pieces)


def default_labeling(key: Union[str, int]) -> str:
    """Name the classes transported from U(S^1) into U(Gamma x S^1)."""
    return "(S1)" if key == "S1" else f"(Z{key})"


def induce_to_G(x: EulerRingElement,
                labeling: Optional[Union[Mapping, Callable]] = None) -> UGElement:
    """Relabel an Euler-ring element of S^1 into the ring of a larger group.

    The relabeling must keep distinct basis classes distinct; that injectivity
    is exactly what admissibility of the pair (G, S^1-factor) guarantees, so a
    collision raises LabelingError rather than silently merging coefficients.
    """
    if labeling is None:
        label = default_labeling
    elif callable(labeling):
        label = labeling
    else:
        mapping = dict(labeling)

        def label(key):
            if key not in mapping:
                raise LabelingError(f"labeling gives no class for key {key!r}")
            return mapping[key]

    used = []
    if x.unit:
        used.append("S1")
    used.extend(k for k, _ in x.torus)
    labels = [label(k) for k in used]
    if len(set(labels)) != len(labels):
        raise LabelingError("labeling collapses distinct classes; "
                            "the pair is not admissible")
    out = {}
    if x.unit:
        out[label("S1")] = x.unit
    for k, c in x.torus:
        out[label(k)] = c
    return UGElement.build(out)


# ---------------------------------------------------------------------------
# expression grammar for the command line:  inv(chi(S^"R[1,0]")) * (-I + 2*Z3)


_EULER_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+)|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<str>\"[^\"]*\")|(?P<op>[-+*()^]))")


def _euler_tokens(text: str) -> list:
    toks = []
    pos = 0
    while pos < len(text):
        m = _EULER_TOKEN.match(text, pos)
        if not m:
            if text[pos:].strip():
                raise ValueError(f"bad character {text[pos:].strip()[0]!r} "
                                 f"in ring expression at offset {pos}")
            break
        if m.group("num"):
            toks.append(("num", m.group("num")))
        elif m.group("ident"):
            toks.append(("ident", m.group("ident")))
        elif m.group("str"):
            toks.append(("str", m.group("str")[1:-1]))
        else:
            toks.append(("op", m.group("op")))
        pos = m.end()
    toks.append(("eof", ""))
    return toks


class _EulerParser:
    def __init__(self, text: str):
        self.toks = _euler_tokens(text)
        self.pos = 0

    def peek(self):
        return self.toks[self.pos]

    def advance(self):
        tok = self.toks[self.pos]
        self.pos += 1
        return tok

    def expect_op(self, op: str):
        kind, text = self.advance()
        if kind != "op" or text != op:
            raise ValueError(f"expected {op!r}, found {text or 'end of input'!r}")

    def sum(self) -> EulerRingElement:
        value = self.product()
        while self.peek() == ("op", "+") or self.peek() == ("op", "-"):
            _, op = self.advance()
            rhs = self.product()
            value = value + rhs if op == "+" else value - rhs
        return value

    def product(self) -> EulerRingElement:
        value = self.unary()
        while self.peek() == ("op", "*"):
            self.advance()
            value = value * self.unary()
        return value

    def unary(self) -> EulerRingElement:
        if self.peek() == ("op", "-"):
            self.advance()
            return -self.unary()
        return self.atom()

    def atom(self) -> EulerRingElement:
        kind, text = self.advance()
        if kind == "num":
            return EulerRingElement.build(int(text))
        if kind == "op" and text == "(":
            inner = self.sum()
            self.expect_op(")")
            return inner
        if kind == "ident":
            if text == "I":
                return RING_ONE
            zmatch = re.match(r"^Z(\d+)$", text)
            if zmatch:
                k = int(zmatch.group(1))
                if k < 1:
                    raise ValueError("Z indices start at 1")
                return EulerRingElement.build(0, {k: 1})
            if text == "inv":
                self.expect_op("(")
                inner = self.sum()
                self.expect_op(")")
                return invert(inner)
            if text == "chi":
                self.expect_op("(")
                kind2, name = self.advance()
                if kind2 != "ident" or name != "S":
                    raise ValueError("chi expects the form chi(S^\"R[..]\")")
                self.expect_op("^")
                kind3, rep_text = self.advance()
                if kind3 != "str":
                    raise ValueError("chi expects a quoted representation string")
                rep = parse_rep(rep_text)
                self.expect_op(")")
                return chi_sphere(rep)
        raise ValueError(f"unexpected token {text or 'end of input'!r} in ring expression")


def parse_euler_expr(text: str) -> EulerRingElement:
    """Evaluate a ring expression over I, Z_k, integers, chi(S^"..."), inv."""
    parser = _EulerParser(text)
    value = parser.sum()
    kind, tail = parser.peek()
    if kind != "eof":
        raise ValueError(f"unexpected trailing input {tail!r} in ring expression")
    return value
