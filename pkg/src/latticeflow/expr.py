"""Elliptic expressions: rational combinations of the p-function and presets.

An expression is either one of the quasi-elliptic presets (sigma, zeta,
jacobi cn) or a combination R1(P) + P' * R2(P) with rational R1, R2 in
the p-function value P.  A small text language covers exactly that
shape; values live on the Riemann sphere with a single infinity, so
evaluation is total (poles are values, not errors).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .elliptic import (
    POLE,
    LatticeInvariants,
    _theta_all,
    _theta_constants,
    wp,
    wp_prime,
    zeta_w,
    sigma_w,
)
from .errors import ParseError
from .lattice import Lattice

# --- polynomial helpers (coefficient lists, ascending degree) --------------


def _ptrim(c: list[complex]) -> tuple[complex, ...]:
    c = list(c)
    while len(c) > 1 and c[-1] == 0:
        c.pop()
    return tuple(complex(x) for x in c)


def _padd(a, b):
    n = max(len(a), len(b))
    return _ptrim([(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)])


def _pmul(a, b):
    out = [0j] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return _ptrim(out)


def _pis_zero(a) -> bool:
    return all(x == 0 for x in a)


def _peval(a, w):
    """Horner evaluation; w may be a scalar or an array."""
    acc = np.zeros_like(np.asarray(w, dtype=np.complex128)) + a[-1]
    for c in reversed(a[:-1]):
        acc = acc * w + c
    return acc


def _pdeflate(a, w0):
    """Synthetic division of a by (w - w0); drops the remainder."""
    if len(a) == 1:
        return (0j,)
    out = [0j] * (len(a) - 1)
    carry = a[-1]
    for i in range(len(a) - 2, -1, -1):
        out[i] = carry
        carry = a[i] + carry * w0
    return _ptrim(out)


@dataclass(frozen=True)
class RationalFunction:
    """Quotient of two polynomials, coefficients ascending by degree."""

    num: tuple[complex, ...]
    den: tuple[complex, ...]

    def __post_init__(self):
        num = _ptrim(self.num)
        den = _ptrim(self.den)
        if _pis_zero(den):
            raise ValueError("denominator is identically zero")
        if _pis_zero(num):
            num, den = (0j,), (1 + 0j,)
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    @staticmethod
    def constant(c: complex) -> "RationalFunction":
        return RationalFunction((complex(c),), (1 + 0j,))

    @staticmethod
    def variable() -> "RationalFunction":
        return RationalFunction((0j, 1 + 0j), (1 + 0j,))

    @property
    def is_zero(self) -> bool:
        return _pis_zero(self.num)

    def __add__(self, other):
        return RationalFunction(
            _padd(_pmul(self.num, other.den), _pmul(other.num, self.den)),
            _pmul(self.den, other.den),
        )

    def __neg__(self):
        return RationalFunction(tuple(-c for c in self.num), self.den)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        return RationalFunction(_pmul(self.num, other.num), _pmul(self.den, other.den))

    def __truediv__(self, other):
        if other.is_zero:
            raise ZeroDivisionError("division by the zero rational function")
        return RationalFunction(_pmul(self.num, other.den), _pmul(self.den, other.num))


_ZERO_R = RationalFunction.constant(0)
_ONE_R = RationalFunction.constant(1)


def _isinf(w):
    arr = np.asarray(w)
    return np.isinf(arr.real) | np.isinf(arr.imag)


def eval_rational(R: RationalFunction, w):
    """Evaluate on the extended plane; total (returns POLE, never raises).

    Infinity is resolved by degree comparison; 0/0 points get one shared
    root deflated and are re-evaluated, else they map to POLE.
    """
    arr = np.atleast_1d(np.asarray(w, dtype=np.complex128))
    scalar = np.asarray(w).ndim == 0
    with np.errstate(all="ignore"):
        nv = _peval(R.num, arr)
        dv = _peval(R.den, arr)
        out = nv / dv
    inf_in = _isinf(arr)
    if inf_in.any():
        dn, dd = len(R.num) - 1, len(R.den) - 1
        if R.is_zero or dn < dd:
            at_inf = 0j
        elif dn > dd:
            at_inf = POLE
        else:
            at_inf = R.num[-1] / R.den[-1]
        out = np.where(inf_in, at_inf, out)
    pole = (dv == 0) & (nv != 0) & ~inf_in
    both = (dv == 0) & (nv == 0) & ~inf_in
    out = np.where(pole, POLE, out)
    if both.any():
        for idx in np.argwhere(both):
            w0 = arr[tuple(idx)]
            n2 = _pdeflate(R.num, w0)
            d2 = _pdeflate(R.den, w0)
            dv2 = complex(_peval(d2, w0))
            out[tuple(idx)] = complex(_peval(n2, w0)) / dv2 if dv2 != 0 else POLE
    return complex(out[0]) if scalar else out.reshape(np.shape(w))


KIND_COMBO = "combo"
KIND_SIGMA = "sigma"
KIND_ZETA = "zeta"
KIND_CN = "cn"


@dataclass(frozen=True)
class EllipticExpr:
    """R1(P) + P'*R2(P), or one of the named quasi-elliptic presets."""

    kind: str
    r1: RationalFunction | None = None
    r2: RationalFunction | None = None

    @staticmethod
    def combo(r1: RationalFunction, r2: RationalFunction) -> "EllipticExpr":
        return EllipticExpr(KIND_COMBO, r1, r2)

    @staticmethod
    def preset(name: str) -> "EllipticExpr":
        assert name in (KIND_SIGMA, KIND_ZETA, KIND_CN)
        return EllipticExpr(name)


# --- parsing ---------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:"
    r"(?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?i?|i)"
    r"|(?P<pprime>P')"
    r"|(?P<name>[A-Za-z]+)"
    r"|(?P<op>[-+*/^()])"
    r")"
)


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == m.start():
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            off = len(text) - len(stripped)
            raise ParseError(off, ("number", "P", "P'", "operator"),
                             f"parse error at offset {off}: unexpected character {stripped[0]!r}")
        for kind in ("num", "pprime", "name", "op"):
            val = m.group(kind)
            if val is not None:
                start = m.end() - len(val)
                tokens.append((kind, val, start))
                break
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


@dataclass
class _Value:
    """Element R1 + P' * R2 of the expression algebra."""

    r1: RationalFunction
    r2: RationalFunction

    @property
    def has_prime(self) -> bool:
        return not self.r2.is_zero


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def fail(self, expected):
        raise ParseError(self.peek()[2], expected)

    def parse(self) -> _Value:
        v = self.parse_sum()
        if self.peek()[0] != "end":
            self.fail(("operator", "end of input"))
        return v

    def parse_sum(self) -> _Value:
        v = self.parse_term()
        while self.peek()[1] in ("+", "-"):
            op = self.advance()[1]
            t = self.parse_term()
            if op == "-":
                t = _Value(-t.r1, -t.r2)
            v = _Value(v.r1 + t.r1, v.r2 + t.r2)
        return v

    def parse_term(self) -> _Value:
        v = self.parse_factor()
        while self.peek()[1] in ("*", "/"):
            kind, op, off = self.advance()
            rhs = self.parse_factor()
            if op == "*":
                if v.has_prime and rhs.has_prime:
                    raise ParseError(off, ("P'-free factor",),
                                     f"parse error at offset {off}: product is nonlinear in P'")
                v = _Value(
                    v.r1 * rhs.r1,
                    v.r1 * rhs.r2 + rhs.r1 * v.r2,
                )
            else:
                if rhs.has_prime:
                    raise ParseError(off, ("P'-free divisor",),
                                     f"parse error at offset {off}: cannot divide by P'")
                if rhs.r1.is_zero:
                    raise ParseError(off, ("nonzero divisor",),
                                     f"parse error at offset {off}: division by zero")
                v = _Value(v.r1 / rhs.r1, v.r2 / rhs.r1)
        return v

    def parse_factor(self) -> _Value:
        if self.peek()[1] == "-":
            self.advance()
            v = self.parse_factor()
            return _Value(-v.r1, -v.r2)
        if self.peek()[1] == "+":
            self.advance()
            return self.parse_factor()
        v = self.parse_atom()
        if self.peek()[1] == "^":
            _, _, off = self.advance()
            sign = 1
            if self.peek()[1] == "-":
                self.advance()
                sign = -1
            kind, text, noff = self.peek()
            if kind != "num" or not text.isdigit():
                self.fail(("integer exponent",))
            self.advance()
            n = int(text)
            if v.has_prime and (sign < 0 or n != 1):
                raise ParseError(off, ("P'-free base",),
                                 f"parse error at offset {off}: power is nonlinear in P'")
            base = v.r1
            acc = _ONE_R
            for _ in range(n):
                acc = acc * base
            if sign < 0:
                if acc.is_zero:
                    raise ParseError(off, ("nonzero base",),
                                     f"parse error at offset {off}: zero to a negative power")
                acc = _ONE_R / acc
            return _Value(acc, _ZERO_R)
        return v

    def parse_atom(self) -> _Value:
        kind, text, off = self.peek()
        if kind == "num":
            self.advance()
            if text == "i":
                return _Value(RationalFunction.constant(1j), _ZERO_R)
            if text.endswith("i"):
                return _Value(RationalFunction.constant(float(text[:-1]) * 1j), _ZERO_R)
            return _Value(RationalFunction.constant(float(text)), _ZERO_R)
        if kind == "pprime":
            self.advance()
            return _Value(_ZERO_R, _ONE_R)
        if kind == "name":
            if text == "P":
                self.advance()
                return _Value(RationalFunction.variable(), _ZERO_R)
            self.fail(("number", "P", "P'", "("))
        if text == "(":
            self.advance()
            v = self.parse_sum()
            if self.peek()[1] != ")":
                self.fail((")",))
            self.advance()
            return v
        self.fail(("number", "P", "P'", "("))


def parse_expr(text: str) -> EllipticExpr:
    """Parse the expression language into a normalized EllipticExpr."""
    stripped = text.strip()
    if stripped in (KIND_SIGMA, KIND_ZETA, KIND_CN):
        return EllipticExpr.preset(stripped)
    v = _Parser(text).parse()
    return EllipticExpr.combo(v.r1, v.r2)


def _format_complex(c: complex) -> str:
    re_, im = c.real, c.imag
    sign = "+" if im >= 0 else "-"
    return f"({re_!r}{sign}{abs(im)!r}i)"


def _format_poly(coeffs) -> str:
    terms = []
    for k, c in enumerate(coeffs):
        if c == 0 and len(coeffs) > 1:
            continue
        lit = _format_complex(complex(c))
        if k == 0:
            terms.append(lit)
        elif k == 1:
            terms.append(f"{lit}*P")
        else:
            terms.append(f"{lit}*P^{k}")
    return " + ".join(terms) if terms else "(0.0+0.0i)"


def _format_rational(R: RationalFunction) -> str:
    num = f"({_format_poly(R.num)})"
    if R.den == (1 + 0j,):
        return num
    return f"{num}/({_format_poly(R.den)})"


def format_expr(e: EllipticExpr) -> str:
    """Print an expression so that parse_expr round-trips the coefficients."""
    if e.kind != KIND_COMBO:
        return e.kind
    parts = []
    if not e.r1.is_zero or e.r2.is_zero:
        parts.append(_format_rational(e.r1))
    if not e.r2.is_zero:
        parts.append(f"P'*{_format_rational(e.r2)}")
    return " + ".join(parts)


# --- evaluation ------------------------------------------------------------


def _xadd(a, b):
    with np.errstate(all="ignore"):
        out = a + b
    out = np.where(_isinf(a) | _isinf(b), POLE, out)
    return out


def _xmul(a, b):
    with np.errstate(all="ignore"):
        out = a * b
    ia, ib = _isinf(a), _isinf(b)
    out = np.where(ia | ib, POLE, out)
    conflict = (ia & (b == 0)) | (ib & (a == 0))
    out = np.where(conflict, complex(float("nan"), 0.0), out)
    return out


def _cn_of_lattice(z, inv: LatticeInvariants):
    """Jacobi cn attached to the flow: argument scaled so z = period1/2 is
    the quarter period of the modulus m(tau)."""
    q = inv.q
    t2, t3, t4 = _theta_constants(q, inv.qterms)
    v = math.pi * np.asarray(z, dtype=np.complex128) / inv.period1
    with np.errstate(all="ignore"):
        _, th2, _, th4 = _theta_all(v, q, inv.qterms)
        out = (t4 / t2) * th2 / th4
    return np.where(_isinf(out), POLE, out)


def eval_expr(e: EllipticExpr, z, L: Lattice, inv: LatticeInvariants):
    """Evaluate an elliptic expression on the extended plane (total, no NaN).

    0 * infinity collisions are resolved by nudging the offending points by
    1e-9 * |omega1| and re-evaluating, which is exact at pixel resolution.
    """
    scalar = np.asarray(z).ndim == 0
    arr = np.atleast_1d(np.asarray(z, dtype=np.complex128)).copy()
    out = np.empty_like(arr)
    todo = np.ones(arr.shape, dtype=bool)
    nudge = 1e-9 * abs(L.omega1) * complex(1, 1) / math.sqrt(2)
    for _ in range(4):
        vals = _eval_once(e, arr[todo], L, inv)
        out[todo] = vals
        bad = np.zeros(arr.shape, dtype=bool)
        bad[todo] = np.isnan(vals.real) | np.isnan(vals.imag)
        if not bad.any():
            break
        arr[bad] += nudge
        todo = bad
    else:
        out[todo] = POLE  # give up: treat stubborn indeterminate points as poles
    return complex(out[0]) if scalar else out.reshape(np.shape(z))


def _eval_once(e: EllipticExpr, z, L: Lattice, inv: LatticeInvariants):
    if e.kind == KIND_SIGMA:
        return np.atleast_1d(sigma_w(z, L, inv))
    if e.kind == KIND_ZETA:
        return np.atleast_1d(zeta_w(z, L, inv))
    if e.kind == KIND_CN:
        return np.atleast_1d(_cn_of_lattice(z, inv))
    p = np.atleast_1d(wp(z, L, inv))
    a = eval_rational(e.r1, p)
    if e.r2.is_zero:
        return a
    pp = np.atleast_1d(wp_prime(z, L, inv))
    b = eval_rational(e.r2, p)
    return _xadd(a, _xmul(pp, b))
