"""Exact symbolic kernel for curvature and soliton computations.

The expression language is deliberately small: exact rational constants,
coordinate symbols, named functions of a single coordinate (with a tracked
derivative order), sums, products, rational powers, and exponentials.
Everything the toolkit manipulates lives in this class, and the class is
closed under differentiation.  That makes canonicalization decidable:
``simplify`` maps equal expressions of the exp-polynomial fragment to
*identical* trees, so structural equality doubles as mathematical equality
there, and ``is_zero`` only has to fall back on numeric probing for the
rare forms outside that fragment (fractional powers of genuine sums and
similar inert atoms).

Canonical form
--------------
A canonical expression is a sum of terms, each term a rational coefficient
times a product of atom powers, with

* atoms ordered by a deterministic total order on node structure,
* at most one exponential factor per term, rational exponents folded into
  its argument (``exp(u)^q -> exp(q*u)``), arguments themselves canonical,
* like atoms merged by exponent addition, integer powers of sums expanded,
* rational constants kept exact (``fractions.Fraction``), with roots of
  constants reduced to products of prime surds.

Expressions are immutable values; all operations are pure.
"""

from __future__ import annotations

import math
import random
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Union

__all__ = [
    "Expr",
    "Rational",
    "Coord",
    "Func",
    "Exp",
    "Power",
    "Sum",
    "Product",
    "symbol",
    "as_expr",
    "simplify",
    "diff",
    "substitute",
    "is_zero",
    "zero_verdict",
    "ZeroVerdict",
    "eval_numeric",
    "solve_linear",
    "parse_expr",
    "to_text",
    "free_coords",
    "free_functions",
    "contains_symbol",
    "const_value",
    "ZERO",
    "ONE",
    "ExprError",
    "EvalDomainError",
    "UnboundSymbolError",
    "InconclusiveZeroTest",
    "NonAffineError",
    "ParseError",
    "Point",
]

Point = Mapping[str, float]

_PROBE_SEED = 0xF0F0
_PROBE_POINTS = 32
_PROBE_TOL = 1e-9
_PROBE_LO, _PROBE_HI = -2.0, 2.0


class ExprError(Exception):
    """Base class for kernel errors."""


class EvalDomainError(ExprError):
    """Numeric evaluation left the real domain (division by zero, even
    root of a negative value, ...)."""


class UnboundSymbolError(ExprError):
    """A coordinate or named function had no numeric binding."""


class InconclusiveZeroTest(ExprError):
    """Zero test could not be decided structurally and probing was
    disabled or impossible."""


class NonAffineError(ExprError):
    """solve_linear was given an equation that is not affine in the
    requested symbol."""


# ---------------------------------------------------------------------------
# Nodes


def _fraction(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, Rational):
        return v.value
    if isinstance(v, float):
        raise TypeError(
            "floats are not exact; use Fraction, an int, or a rational string"
        )
    raise TypeError(f"cannot interpret {v!r} as an exact rational")


class Expr:
    """Immutable expression node.  Arithmetic operators return canonical
    forms; raw trees built from the constructors are canonicalized by
    :func:`simplify`."""

    __slots__ = ("_key", "_hash", "_canonical", "_poly")

    def _seal(self, key):
        object.__setattr__(self, "_key", key)
        object.__setattr__(self, "_hash", hash(key))
        object.__setattr__(self, "_canonical", False)
        object.__setattr__(self, "_poly", None)

    def __setattr__(self, name, value):  # pragma: no cover - discipline guard
        raise AttributeError("expressions are immutable")

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        if isinstance(other, Expr):
            return self._key == other._key
        if isinstance(other, (int, Fraction)):
            return self._key == (0, _fraction(other))
        return NotImplemented

    def __bool__(self):
        raise TypeError("truth value of an expression is ambiguous; use is_zero()")

    def __repr__(self):
        return to_text(self)

    __str__ = __repr__

    # -- arithmetic -------------------------------------------------------

    def __add__(self, other):
        return _from_poly(_poly_add(_to_poly(self), _to_poly(as_expr(other))))

    __radd__ = __add__

    def __neg__(self):
        return _from_poly(_poly_scale(_to_poly(self), Fraction(-1)))

    def __sub__(self, other):
        return self + (-as_expr(other))

    def __rsub__(self, other):
        return as_expr(other) + (-self)

    def __mul__(self, other):
        return _from_poly(_poly_mul(_to_poly(self), _to_poly(as_expr(other))))

    __rmul__ = __mul__

    def __pow__(self, exponent):
        return _from_poly(_poly_pow(_to_poly(self), _fraction(exponent)))

    def __truediv__(self, other):
        other = as_expr(other)
        if not _to_poly(other):
            raise ZeroDivisionError("division by zero expression")
        return self * other ** -1

    def __rtruediv__(self, other):
        if not _to_poly(self):
            raise ZeroDivisionError("division by zero expression")
        return as_expr(other) * self ** -1


class Rational(Expr):
    """Exact rational constant."""

    __slots__ = ("value",)

    def __init__(self, numerator, denominator=1):
        v = _fraction(numerator) / _fraction(denominator)
        object.__setattr__(self, "value", v)
        self._seal((0, v))
        object.__setattr__(self, "_canonical", True)
        object.__setattr__(self, "_poly", {(): v} if v else {})


_IDENT_OK = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_")


def _check_ident(name: str) -> str:
    if not name or name[0].isdigit() or not set(name) <= _IDENT_OK:
        raise ValueError(f"invalid identifier {name!r}")
    if name == "exp":
        raise ValueError("'exp' is reserved for the exponential")
    return name


class Coord(Expr):
    """Coordinate symbol.  Symbols that are not chart coordinates act as
    free constants (their derivative along any coordinate is zero)."""

    __slots__ = ("name",)

    def __init__(self, name: str):
        object.__setattr__(self, "name", _check_ident(name))
        self._seal((1, name))
        object.__setattr__(self, "_canonical", True)
        object.__setattr__(self, "_poly", {((self, Fraction(1)),): Fraction(1)})


def symbol(name: str) -> Coord:
    """A free symbolic constant (a coordinate not bound to any chart)."""
    return Coord(name)


class Func(Expr):
    """Named function of a single coordinate, e.g. ``psi(w4)``, with a
    derivative order.  ``psi``, ``psi'``, ``psi''`` are independent atoms;
    no relation is assumed between them unless substituted."""

    __slots__ = ("name", "coord", "order")

    def __init__(self, name: str, coord: str, order: int = 0):
        if not isinstance(order, int) or order < 0:
            raise ValueError("derivative order must be a non-negative integer")
        object.__setattr__(self, "name", _check_ident(name))
        object.__setattr__(self, "coord", _check_ident(coord))
        object.__setattr__(self, "order", order)
        self._seal((2, name, coord, order))
        object.__setattr__(self, "_canonical", True)
        object.__setattr__(self, "_poly", {((self, Fraction(1)),): Fraction(1)})


class Exp(Expr):
    """Exponential of an expression."""

    __slots__ = ("arg",)

    def __init__(self, arg):
        arg = as_expr(arg)
        object.__setattr__(self, "arg", arg)
        self._seal((3, arg._key))
        if arg._canonical and arg._key != (0, Fraction(0)):
            object.__setattr__(self, "_canonical", True)
            object.__setattr__(self, "_poly", {((self, Fraction(1)),): Fraction(1)})


class Power(Expr):
    """Rational power of an expression."""

    __slots__ = ("base", "exponent")

    def __init__(self, base, exponent):
        base = as_expr(base)
        exponent = _fraction(exponent)
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "exponent", exponent)
        self._seal((4, base._key, exponent))


class Sum(Expr):
    """Sum of terms."""

    __slots__ = ("terms",)

    def __init__(self, *terms):
        if len(terms) == 1 and isinstance(terms[0], (tuple, list)):
            terms = tuple(terms[0])
        terms = tuple(as_expr(t) for t in terms)
        object.__setattr__(self, "terms", terms)
        self._seal((6, tuple(t._key for t in terms)))


class Product(Expr):
    """Product of factors."""

    __slots__ = ("factors",)

    def __init__(self, *factors):
        if len(factors) == 1 and isinstance(factors[0], (tuple, list)):
            factors = tuple(factors[0])
        factors = tuple(as_expr(f) for f in factors)
        object.__setattr__(self, "factors", factors)
        self._seal((5, tuple(f._key for f in factors)))


ZERO = Rational(0)
ONE = Rational(1)

ExprLike = Union[Expr, int, Fraction, str]


def as_expr(v: ExprLike) -> Expr:
    """Coerce ints, Fractions, and expression strings to expressions."""
    if isinstance(v, Expr):
        return v
    if isinstance(v, (int, Fraction)):
        return Rational(v)
    if isinstance(v, str):
        return parse_expr(v)
    if isinstance(v, float):
        raise TypeError(
            "floats are not exact; use Fraction, an int, or a rational string"
        )
    raise TypeError(f"cannot interpret {v!r} as an expression")


# ---------------------------------------------------------------------------
# Canonicalization: expressions <-> polynomial normal form
#
# A poly is a dict {monomial: Fraction}; a monomial is a sorted tuple of
# (atom, exponent) pairs.  Atom bases are Coord, Func, Exp (exponent always
# 1), Rational (prime surds, exponent in (0,1), plus inert out-of-class
# leftovers), and canonical Sum nodes (unexpandable sum powers).

_ONE_POLY = {(): Fraction(1)}


def _poly_add(a, b):
    out = dict(a)
    _poly_iadd(out, b)
    return out


def _poly_iadd(out, b, scale=Fraction(1)):
    for mono, c in b.items():
        nc = out.get(mono, Fraction(0)) + c * scale
        if nc:
            out[mono] = nc
        else:
            out.pop(mono, None)


def _poly_scale(p, s: Fraction):
    if not s:
        return {}
    return {m: c * s for m, c in p.items()}


def _poly_mul(a, b):
    if not a or not b:
        return {}
    out = {}
    for m1, c1 in a.items():
        for m2, c2 in b.items():
            _poly_iadd(out, _mono_mul(m1, m2), c1 * c2)
    return out


def _mono_mul(m1, m2):
    """Product of two monomials as a poly (usually a single entry; sum
    powers whose merged exponent becomes a positive integer expand)."""
    exps = {}
    exp_args = []
    for base, q in m1 + m2:
        if isinstance(base, Exp):
            exp_args.append((base.arg, q))
        else:
            exps[base] = exps.get(base, Fraction(0)) + q
    coeff = Fraction(1)
    atoms = []
    expansions = []
    for base, q in exps.items():
        if not q:
            continue
        if isinstance(base, Rational):
            coeff2, surds = _const_power(base.value, q)
            if surds is None:
                atoms.append((base, q))  # inert out-of-class power
            else:
                coeff *= coeff2
                atoms.extend(surds)
        elif isinstance(base, Sum) and q.denominator == 1 and q > 0:
            expansions.append(_poly_int_pow(_to_poly(base), int(q)))
        else:
            atoms.append((base, q))
    if exp_args:
        arg = _from_poly(_exp_arg_poly(exp_args))
        if arg._key != (0, Fraction(0)):
            atoms.append((Exp(arg), Fraction(1)))
    mono = tuple(sorted(atoms, key=lambda aq: (aq[0]._key, aq[1])))
    out = {mono: coeff}
    for p in expansions:
        out = _poly_mul(out, p)
    return out


def _exp_arg_poly(exp_args):
    out = {}
    for arg, q in exp_args:
        _poly_iadd(out, _to_poly(arg), q)
    return out


def _poly_int_pow(p, n: int):
    out = _ONE_POLY
    base = p
    while n:
        if n & 1:
            out = _poly_mul(out, base)
        base = _poly_mul(base, base)
        n >>= 1
    return out


def _factorize(n: int):
    """Prime factorization by trial division; a large leftover cofactor is
    kept whole and treated like a prime."""
    out = {}
    for p in (2, 3, 5):
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    f = 7
    while f * f <= n and f < 1_000_000:
        while n % f == 0:
            out[f] = out.get(f, 0) + 1
            n //= f
        f += 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def _const_power(c: Fraction, q: Fraction):
    """c**q as (coefficient, surd atom list), or (1, None) when the power
    has no real value in the class (negative base, even root)."""
    if q.denominator == 1:
        if c == 0 and q < 0:
            return Fraction(1), None  # inert 0^negative
        return c ** int(q), []
    if c == 0:
        return Fraction(0), []
    sign = Fraction(1)
    if c < 0:
        if q.denominator % 2 == 0:
            return Fraction(1), None
        sign = Fraction(-1) if q.numerator % 2 else Fraction(1)
        c = -c
    coeff = sign
    surds = []
    factors = dict(_factorize(c.numerator))
    for p, m in _factorize(c.denominator).items():
        factors[p] = factors.get(p, 0) - m
    for p in sorted(factors):
        t = factors[p] * q
        k = math.floor(t)
        coeff *= Fraction(p) ** k
        r = t - k
        if r:
            surds.append((Rational(p), r))
    return coeff, surds


def _poly_pow(p, q: Fraction):
    if not q:
        return dict(_ONE_POLY)
    if not p:
        if q > 0:
            return {}
        return {((Rational(0), q),): Fraction(1)}  # inert 0^negative
    if len(p) == 1:
        return _mono_pow(p, q)
    if q.denominator == 1 and q > 0:
        return _poly_int_pow(p, int(q))
    # negative or fractional power of a genuine sum: factor out the rational
    # content and the common monomial, keep the primitive sum as an atom
    content, common, prim = _factor_poly(p)
    coeff, surds = _const_power(content, q)
    if surds is None:
        return {((_from_poly(p), q),): Fraction(1)}
    base = _from_poly(prim)
    out = _finish_mono([], surds + [(base, q)], coeff)
    if common:
        out = _poly_mul(out, _mono_pow({common: Fraction(1)}, q))
    return out


def _mono_scale_exponents(mono, s: Fraction):
    return tuple((b, q * s) for b, q in mono)


def _mono_pow(p, q: Fraction):
    """Power of a single-term poly.  Fractional powers distribute over the
    factors, assuming positive values for symbol atoms (metric entries and
    frame scale factors are positive on their charts)."""
    (mono, coeff), = p.items()
    ncoeff, surds = _const_power(coeff, q)
    if surds is None:
        return {((_from_poly(p), q),): Fraction(1)}
    atoms = list(surds)
    exp_args = []
    expansions = []
    for base, e in mono:
        t = e * q
        if isinstance(base, Exp):
            exp_args.append((base.arg, t))
        elif isinstance(base, Rational):
            c2, s2 = _const_power(base.value, t)
            if s2 is None:
                atoms.append((base, t))
            else:
                ncoeff *= c2
                atoms.extend(s2)
        elif isinstance(base, Sum) and t.denominator == 1 and t > 0:
            expansions.append(_poly_int_pow(_to_poly(base), int(t)))
        else:
            atoms.append((base, t))
    out = _finish_mono(exp_args, atoms, ncoeff)
    for ep in expansions:
        out = _poly_mul(out, ep)
    return out


def _finish_mono(exp_args, atoms, coeff):
    if exp_args:
        arg = _from_poly(_exp_arg_poly(exp_args))
        if arg._key != (0, Fraction(0)):
            atoms = atoms + [(Exp(arg), Fraction(1))]
    mono = tuple(sorted(atoms, key=lambda aq: (aq[0]._key, aq[1])))
    return {mono: coeff}


def _factor_poly(p):
    """Split p = content * common_monomial * primitive.

    content is the coefficient of the minimal monomial (so the primitive
    part starts with coefficient 1); common_monomial collects per-atom
    minimal exponents (exponential atoms are left alone)."""
    monos = sorted(p, key=_mono_key)
    content = p[monos[0]]
    mins = None
    for mono in monos:
        exps = {b: q for b, q in mono if not isinstance(b, Exp)}
        if mins is None:
            mins = exps
        else:
            for b in list(mins):
                mins[b] = min(mins[b], exps.get(b, Fraction(0)))
            for b, q in exps.items():
                if b not in mins and q < 0:
                    mins[b] = q
    common = tuple(sorted(((b, q) for b, q in (mins or {}).items() if q),
                          key=lambda aq: (aq[0]._key, aq[1])))
    if content == 1 and not common:
        return Fraction(1), (), dict(p)
    inv = {_mono_scale_exponents(common, Fraction(-1)): Fraction(1) / content}
    prim = _poly_mul(p, inv)
    return content, common, prim


def _mono_key(mono):
    return tuple((b._key, q) for b, q in mono)


def _to_poly(e: Expr):
    p = e._poly
    if p is not None:
        return p
    if isinstance(e, Sum):
        p = {}
        for t in e.terms:
            _poly_iadd(p, _to_poly(t))
    elif isinstance(e, Product):
        p = dict(_ONE_POLY)
        for f in e.factors:
            p = _poly_mul(p, _to_poly(f))
    elif isinstance(e, Power):
        p = _poly_pow(_to_poly(e.base), e.exponent)
    elif isinstance(e, Exp):
        a = simplify(e.arg)
        if a._key == (0, Fraction(0)):
            p = dict(_ONE_POLY)
        else:
            atom = e if a is e.arg else Exp(a)
            p = {((atom, Fraction(1)),): Fraction(1)}
    else:  # pragma: no cover - all node kinds handled above
        raise TypeError(f"unknown node {type(e).__name__}")
    object.__setattr__(e, "_poly", p)
    return p


def _atom_power(base: Expr, q: Fraction) -> Expr:
    if q == 1:
        return base
    node = Power(base, q)
    object.__setattr__(node, "_canonical", True)
    return node


def _from_poly(p) -> Expr:
    p = _cancel_sum_powers(p)
    if not p:
        return ZERO
    items = sorted(p.items(), key=lambda mc: _mono_key(mc[0]))
    terms = []
    for mono, coeff in items:
        factors = [_atom_power(b, q) for b, q in mono]
        if not factors:
            term = Rational(coeff)
        elif coeff == 1 and len(factors) == 1:
            term = factors[0]
        else:
            fs = factors if coeff == 1 else [Rational(coeff)] + factors
            term = fs[0] if len(fs) == 1 else Product(tuple(fs))
            if isinstance(term, Product):
                object.__setattr__(term, "_canonical", True)
        object.__setattr__(term, "_poly", {mono: coeff})
        terms.append(term)
    if len(terms) == 1:
        expr = terms[0]
    else:
        expr = Sum(tuple(terms))
        object.__setattr__(expr, "_canonical", True)
    object.__setattr__(expr, "_poly", p)
    return expr


def _cancel_sum_powers(p):
    """Cancel sum-power denominators against the numerator polynomial:
    groups terms sharing the same negative-integer sum powers and attempts
    exact division.  Leaves the poly untouched when nothing applies."""
    if not any(isinstance(b, Sum) and q.denominator == 1 and q < 0
               for mono in p for b, q in mono):
        return p
    groups = {}
    for mono, c in p.items():
        denom = tuple((b, q) for b, q in mono
                      if isinstance(b, Sum) and q.denominator == 1 and q < 0)
        rest = tuple(bq for bq in mono if bq not in denom)
        bucket = groups.setdefault(denom, {})
        bucket[rest] = bucket.get(rest, Fraction(0)) + c
    out = {}
    for denom, num in groups.items():
        num = {m: c for m, c in num.items() if c}
        if not num:
            continue
        new_denom = []
        for base, q in denom:
            k = int(q)
            d = _to_poly(base)
            while k < 0:
                divided = _poly_div_exact(num, d)
                if divided is None:
                    break
                num = divided
                k += 1
            if k:
                new_denom.append((base, Fraction(k)))
        for mono, c in num.items():
            full = tuple(sorted(list(mono) + new_denom,
                                key=lambda aq: (aq[0]._key, aq[1])))
            nc = out.get(full, Fraction(0)) + c
            if nc:
                out[full] = nc
            else:
                out.pop(full, None)
    return out


def _poly_div_exact(num, den):
    """Exact multivariate division num/den, or None if it does not divide
    (or is not recognized as dividing within the step cap)."""
    if not num:
        return {}
    atoms = sorted({b for mono in list(num) + list(den) for b, _ in mono},
                   key=lambda b: b._key)
    index = {b: i for i, b in enumerate(atoms)}

    def vec(mono):
        v = [Fraction(0)] * len(atoms)
        for b, q in mono:
            if b in index:
                v[index[b]] = q
            else:
                return None  # merged exponential created a new atom
        return tuple(v)

    def leading(p):
        best = None
        for mono in p:
            v = vec(mono)
            if v is None:
                return None, None
            if best is None or v > best[1]:
                best = (mono, v)
        return best if best is not None else (None, None)

    lead_d = leading(den)
    if lead_d[0] is None:
        return None
    quotient = {}
    rem = dict(num)
    cap = 16 * len(num) + 256
    while rem:
        if cap <= 0:
            return None
        cap -= 1
        lead_r = leading(rem)
        if lead_r[0] is None:
            return None
        t_poly = _mono_mul(lead_r[0], _mono_scale_exponents(lead_d[0], Fraction(-1)))
        if len(t_poly) != 1:
            return None
        (t_mono, t_extra), = t_poly.items()
        t_coeff = rem[lead_r[0]] / den[lead_d[0]] * t_extra
        quotient[t_mono] = quotient.get(t_mono, Fraction(0)) + t_coeff
        _poly_iadd(rem, _poly_mul({t_mono: t_coeff}, den), Fraction(-1))
    return quotient


def simplify(e: ExprLike) -> Expr:
    """Canonical form.  Idempotent: simplify(simplify(e)) is simplify(e),
    and structurally equal inputs map to identical outputs."""
    e = as_expr(e)
    if e._canonical:
        return e
    return _from_poly(_to_poly(e))


def const_value(e: Expr):
    """The Fraction value of a canonical rational constant, else None."""
    e = simplify(e)
    return e.value if isinstance(e, Rational) else None


# ---------------------------------------------------------------------------
# Differentiation


def diff(e: ExprLike, coord: Union[str, Coord]) -> Expr:
    """Exact partial derivative, in canonical form."""
    name = coord.name if isinstance(coord, Coord) else str(coord)
    return simplify(_diff(simplify(e), name))


def _diff(e: Expr, x: str) -> Expr:
    if isinstance(e, Rational):
        return ZERO
    if isinstance(e, Coord):
        return ONE if e.name == x else ZERO
    if isinstance(e, Func):
        return Func(e.name, e.coord, e.order + 1) if e.coord == x else ZERO
    if isinstance(e, Exp):
        return _diff(e.arg, x) * e
    if isinstance(e, Power):
        return Rational(e.exponent) * Power(e.base, e.exponent - 1) * _diff(e.base, x)
    if isinstance(e, Sum):
        out = ZERO
        for t in e.terms:
            out = out + _diff(t, x)
        return out
    if isinstance(e, Product):
        out = ZERO
        fs = e.factors
        for i, f in enumerate(fs):
            d = _diff(f, x)
            if d._key == (0, Fraction(0)):
                continue
            rest = Product(fs[:i] + fs[i + 1:]) if len(fs) > 1 else ONE
            out = out + d * rest
        return out
    raise TypeError(f"unknown node {type(e).__name__}")  # pragma: no cover


# ---------------------------------------------------------------------------
# Substitution


def _norm_func_key(key):
    """Normalize 'psi', \"psi'\", ('psi', 2), or a Func atom to (name, order)."""
    if isinstance(key, Func):
        return key.name, key.order
    if isinstance(key, tuple) and len(key) == 2:
        return str(key[0]), int(key[1])
    if isinstance(key, str):
        name = key.rstrip("'")
        return name, len(key) - len(name)
    raise TypeError(f"cannot interpret function key {key!r}")


def substitute(e: ExprLike, bindings: Mapping) -> Expr:
    """Simultaneous substitution followed by simplify.

    Keys may be Coord atoms / coordinate-name strings, or Func atoms /
    "psi'"-style strings / (name, order) pairs.  Keys not present in the
    expression are ignored.  Substituting a coordinate into an expression
    that contains a named function *of that coordinate* is refused unless
    the function atom itself is also bound.
    """
    coord_map = {}
    func_map = {}
    for key, val in bindings.items():
        val = as_expr(val)
        if isinstance(key, Coord):
            coord_map[key.name] = val
        elif isinstance(key, Func) or isinstance(key, tuple):
            func_map[_norm_func_key(key)] = val
        elif isinstance(key, str) and "'" not in key:
            coord_map[key] = val
        else:
            func_map[_norm_func_key(key)] = val
    return simplify(_subst(as_expr(e), coord_map, func_map))


def _subst(e: Expr, coords, funcs) -> Expr:
    if isinstance(e, Rational):
        return e
    if isinstance(e, Coord):
        return coords.get(e.name, e)
    if isinstance(e, Func):
        if (e.name, e.order) in funcs:
            return funcs[(e.name, e.order)]
        if e.coord in coords:
            raise ValueError(
                f"cannot substitute coordinate {e.coord!r} inside {e.name!r};"
                " bind the function atom as well"
            )
        return e
    if isinstance(e, Exp):
        return Exp(_subst(e.arg, coords, funcs))
    if isinstance(e, Power):
        return Power(_subst(e.base, coords, funcs), e.exponent)
    if isinstance(e, Sum):
        return Sum(tuple(_subst(t, coords, funcs) for t in e.terms))
    if isinstance(e, Product):
        return Product(tuple(_subst(f, coords, funcs) for f in e.factors))
    raise TypeError(f"unknown node {type(e).__name__}")  # pragma: no cover


# ---------------------------------------------------------------------------
# Structure queries


def _walk(e: Expr):
    yield e
    if isinstance(e, Exp):
        yield from _walk(e.arg)
    elif isinstance(e, Power):
        yield from _walk(e.base)
    elif isinstance(e, Sum):
        for t in e.terms:
            yield from _walk(t)
    elif isinstance(e, Product):
        for f in e.factors:
            yield from _walk(f)


def free_coords(e: ExprLike) -> frozenset:
    """Names of all coordinates the expression depends on (a named
    function contributes the coordinate it is applied to)."""
    out = set()
    for n in _walk(as_expr(e)):
        if isinstance(n, Coord):
            out.add(n.name)
        elif isinstance(n, Func):
            out.add(n.coord)
    return frozenset(out)


def free_functions(e: ExprLike) -> frozenset:
    """(name, order) pairs of all named-function atoms present."""
    return frozenset((n.name, n.order) for n in _walk(as_expr(e))
                     if isinstance(n, Func))


def contains_symbol(e: ExprLike, sym: Union[str, Coord, Func, tuple]) -> bool:
    e = as_expr(e)
    if isinstance(sym, (Func, tuple)) or (isinstance(sym, str) and "'" in sym):
        key = _norm_func_key(sym)
        return key in free_functions(e)
    name = sym.name if isinstance(sym, Coord) else str(sym)
    return any(isinstance(n, Coord) and n.name == name for n in _walk(e))


def _decidable(e: Expr) -> bool:
    """True when the canonical form lies in the fragment where distinct
    canonical forms denote distinct functions (no sum-power or inert
    constant-power atoms)."""
    for n in _walk(e):
        if isinstance(n, Power) and not isinstance(n.base, (Coord, Func)):
            if isinstance(n.base, Rational):
                if n.base.value <= 0 or not (0 < n.exponent < 1):
                    return False  # inert out-of-class power
            else:
                return False
    return True


# ---------------------------------------------------------------------------
# Numeric evaluation


def _norm_fn_bindings(fn_bindings) -> dict:
    out = {}
    for key, fn in (fn_bindings or {}).items():
        out[_norm_func_key(key)] = fn
    return out


def eval_numeric(e: ExprLike, point: Point, fn_bindings: Mapping = None) -> float:
    """Floating evaluation of the canonical form.

    ``point`` binds every coordinate; ``fn_bindings`` supplies a numeric
    callable for every named-function atom, keyed like substitute keys
    ("psi", "psi'", ("psi", 2), or Func atoms).
    """
    funcs = _norm_fn_bindings(fn_bindings)
    return _eval(simplify(e), point, funcs)


def _eval(e: Expr, pt: Point, funcs) -> float:
    if isinstance(e, Rational):
        return float(e.value)
    if isinstance(e, Coord):
        try:
            return float(pt[e.name])
        except KeyError:
            raise UnboundSymbolError(f"coordinate {e.name!r} not bound") from None
    if isinstance(e, Func):
        fn = funcs.get((e.name, e.order))
        if fn is None:
            raise UnboundSymbolError(
                f"unbound function {e.name!r} (order {e.order})")
        try:
            x = float(pt[e.coord])
        except KeyError:
            raise UnboundSymbolError(f"coordinate {e.coord!r} not bound") from None
        return float(fn(x))
    if isinstance(e, Exp):
        try:
            return math.exp(_eval(e.arg, pt, funcs))
        except OverflowError:
            raise EvalDomainError("exponential overflow") from None
    if isinstance(e, Power):
        b = _eval(e.base, pt, funcs)
        q = e.exponent
        try:
            if q.denominator == 1:
                if b == 0.0 and q < 0:
                    raise EvalDomainError("division by zero")
                return b ** int(q)
            if b < 0.0:
                if q.denominator % 2 == 1:
                    r = (-b) ** float(q)
                    return -r if q.numerator % 2 else r
                raise EvalDomainError("even root of a negative value")
            if b == 0.0 and q < 0:
                raise EvalDomainError("division by zero")
            return b ** float(q)
        except OverflowError:
            raise EvalDomainError("power overflow") from None
    if isinstance(e, Sum):
        return math.fsum(_eval(t, pt, funcs) for t in e.terms)
    if isinstance(e, Product):
        out = 1.0
        for f in e.factors:
            out *= _eval(f, pt, funcs)
        return out
    raise TypeError(f"unknown node {type(e).__name__}")  # pragma: no cover


# ---------------------------------------------------------------------------
# Zero testing


class ZeroVerdict:
    """Outcome of a zero test: the boolean plus whether it was decided
    structurally ("exact") or by seeded numeric probing ("probabilistic")."""

    __slots__ = ("is_zero", "mode")

    def __init__(self, value: bool, mode: str):
        self.is_zero = value
        self.mode = mode

    def __bool__(self):
        return self.is_zero

    def __repr__(self):
        return f"ZeroVerdict({self.is_zero}, {self.mode!r})"


def zero_verdict(e: ExprLike, probe: bool = True, points: int = _PROBE_POINTS,
                 tol: float = _PROBE_TOL, seed: int = _PROBE_SEED) -> ZeroVerdict:
    """Zero test with provenance.

    Structural decision whenever the canonical form is decisive; numeric
    probing at ``points`` seeded uniform samples from [-2, 2] (tolerance
    ``tol``, relative to the term scale) otherwise.  With probing disabled
    an undecidable form raises :class:`InconclusiveZeroTest`.
    """
    c = simplify(e)
    if not c._poly:
        return ZeroVerdict(True, "exact")
    if _decidable(c):
        return ZeroVerdict(False, "exact")
    if not probe:
        raise InconclusiveZeroTest(
            f"cannot decide structurally whether {c} is zero (probing disabled)")
    return ZeroVerdict(_probe_zero(c, points, tol, seed), "probabilistic")


def is_zero(e: ExprLike, probe: bool = True, points: int = _PROBE_POINTS,
            tol: float = _PROBE_TOL, seed: int = _PROBE_SEED) -> bool:
    """True iff the canonical form is the zero constant, with a seeded
    numeric-probing fallback for forms outside the decidable fragment."""
    return zero_verdict(e, probe=probe, points=points, tol=tol, seed=seed).is_zero


def _probe_zero(c: Expr, points: int, tol: float, seed: int) -> bool:
    rng = random.Random(seed)
    coords = sorted(free_coords(c))
    funcs = sorted(free_functions(c))
    terms = c.terms if isinstance(c, Sum) else (c,)
    done = 0
    attempts = 0
    while done < points:
        attempts += 1
        if attempts > 50 * points:
            raise InconclusiveZeroTest(
                "probing failed: samples kept leaving the real domain")
        pt = {name: rng.uniform(_PROBE_LO, _PROBE_HI) for name in coords}
        fb = {key: (lambda v: (lambda _x: v))(rng.uniform(_PROBE_LO, _PROBE_HI))
              for key in funcs}
        try:
            vals = [_eval(simplify(t), pt, fb) for t in terms]
        except EvalDomainError:
            continue
        scale = max(1.0, max(abs(v) for v in vals))
        if abs(math.fsum(vals)) > tol * scale:
            return False
        done += 1
    return True


# ---------------------------------------------------------------------------
# Linear solving (single unknown)


def solve_linear(e: ExprLike, sym: Union[str, Coord, Func]) -> Expr:
    """Solve e == 0 for ``sym`` when e is affine in it; raises
    :class:`NonAffineError` otherwise."""
    if isinstance(sym, str):
        sym = Func(*_norm_func_key(sym)) if "'" in sym else Coord(sym)
    if isinstance(sym, Func):
        atom = sym

        def depends(b):
            return (sym.name, sym.order) in free_functions(b)
    else:
        atom = sym

        def depends(b):
            # free_coords also catches named functions *of* the coordinate
            return sym.name in free_coords(b)

    p = _to_poly(simplify(e))
    lin = {}
    rest = {}
    for mono, c in p.items():
        q = Fraction(0)
        stripped = []
        for b, k in mono:
            if b == atom:
                q = k
            else:
                if depends(b):
                    raise NonAffineError(
                        f"{atom} occurs inside a composite factor; not affine")
                stripped.append((b, k))
        if q == 0:
            rest[mono] = c
        elif q == 1:
            lin[tuple(stripped)] = lin.get(tuple(stripped), Fraction(0)) + c
        else:
            raise NonAffineError(f"{atom} appears with exponent {q}")
    if not lin:
        raise NonAffineError(f"{atom} does not occur linearly")
    a = _from_poly(lin)
    b = _from_poly(rest)
    return simplify((-b) / a)


# ---------------------------------------------------------------------------
# Text rendering (round-trips through parse_expr)


def _needs_sign_flip(term: Expr) -> bool:
    if isinstance(term, Rational):
        return term.value < 0
    if isinstance(term, Product) and term.factors and \
            isinstance(term.factors[0], Rational):
        return term.factors[0].value < 0
    return False


def _render_frac(v: Fraction) -> str:
    return str(v.numerator) if v.denominator == 1 else \
        f"{v.numerator}/{v.denominator}"


def _render_power_base(b: Expr) -> str:
    s = to_text(b)
    if isinstance(b, (Coord, Func, Exp)):
        return s
    if isinstance(b, Rational) and b.value.denominator == 1 and b.value >= 0:
        return s
    return f"({s})"


def to_text(e: Expr) -> str:
    """Expression-grammar text; parse_expr(to_text(e)) == simplify(e) for
    canonical e."""
    if isinstance(e, Rational):
        return _render_frac(e.value)
    if isinstance(e, Coord):
        return e.name
    if isinstance(e, Func):
        return f"{e.name}{chr(39) * e.order}({e.coord})"
    if isinstance(e, Exp):
        return f"exp({to_text(e.arg)})"
    if isinstance(e, Power):
        q = e.exponent
        es = _render_frac(q) if q.denominator == 1 and q >= 0 else \
            f"({_render_frac(q)})"
        return f"{_render_power_base(e.base)}^{es}"
    if isinstance(e, Product):
        factors = e.factors
        prefix = ""
        if factors and isinstance(factors[0], Rational) \
                and factors[0].value == -1 and len(factors) > 1:
            prefix = "-"
            factors = factors[1:]
        parts = []
        for f in factors:
            s = to_text(f)
            if isinstance(f, Sum):
                s = f"({s})"
            elif isinstance(f, Rational) and f.value < 0 and parts:
                s = f"({s})"
            parts.append(s)
        return prefix + ("*".join(parts) if parts else "1")
    if isinstance(e, Sum):
        if not e.terms:
            return "0"
        out = [to_text(e.terms[0])]
        for t in e.terms[1:]:
            if _needs_sign_flip(t):
                out.append(f" - {to_text(-t)}")
            else:
                out.append(f" + {to_text(t)}")
        return "".join(out)
    raise TypeError(f"unknown node {type(e).__name__}")  # pragma: no cover


# ---------------------------------------------------------------------------
# Parser for the expression grammar
#
#   expr   := term (('+'|'-') term)*
#   term   := unary (('*'|'/') unary)*
#   unary  := ('+'|'-') unary | power
#   power  := atom ('^' unary)?            (right-assoc; exponent must be
#                                           an exact rational constant)
#   atom   := NUMBER | 'exp' '(' expr ')' | IDENT primes ['(' IDENT ')']
#           | '(' expr ')'
#
# Whitespace-insensitive; decimal literals are exact (0.5 -> 1/2).


class ParseError(ExprError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{message} (line {line}, column {col})")
        self.line = line
        self.col = col


class _Tokenizer:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.tokens = []
        self._scan()
        self.i = 0

    def _loc(self, pos):
        line = self.text.count("\n", 0, pos) + 1
        col = pos - (self.text.rfind("\n", 0, pos) + 1) + 1
        return line, col

    def _scan(self):
        text, n = self.text, len(self.text)
        i = 0
        while i < n:
            ch = text[i]
            if ch.isspace():
                i += 1
                continue
            start = i
            if ch.isdigit() or (ch == "." and i + 1 < n and text[i + 1].isdigit()):
                i += 1
                seen_dot = ch == "."
                while i < n and (text[i].isdigit() or (text[i] == "." and not seen_dot)):
                    seen_dot = seen_dot or text[i] == "."
                    i += 1
                self.tokens.append(("num", text[start:i], start))
            elif ch.isalpha() or ch == "_":
                i += 1
                while i < n and (text[i].isalnum() or text[i] == "_"):
                    i += 1
                while i < n and text[i] == "'":
                    i += 1
                self.tokens.append(("ident", text[start:i], start))
            elif ch in "+-*/^()":
                self.tokens.append((ch, ch, start))
                i += 1
            else:
                line, col = self._loc(i)
                raise ParseError(f"unexpected character {ch!r}", line, col)
        self.tokens.append(("end", "", n))

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, message, tok=None):
        tok = tok or self.peek()
        line, col = self._loc(tok[2])
        raise ParseError(message, line, col)


def parse_expr(text: str) -> Expr:
    """Parse expression text and return its canonical form."""
    tz = _Tokenizer(text)
    e = _parse_sum(tz)
    if tz.peek()[0] != "end":
        tz.error(f"unexpected {tz.peek()[1]!r}")
    return simplify(e)


def _parse_sum(tz):
    e = _parse_term(tz)
    while tz.peek()[0] in "+-":
        op = tz.next()[0]
        rhs = _parse_term(tz)
        e = e + rhs if op == "+" else e - rhs
    return e


def _parse_term(tz):
    e = _parse_unary(tz)
    while tz.peek()[0] in "*/":
        op = tz.next()[0]
        rhs = _parse_unary(tz)
        if op == "*":
            e = e * rhs
        else:
            if not _to_poly(rhs):
                tz.error("division by zero")
            e = e / rhs
    return e


def _parse_unary(tz):
    if tz.peek()[0] in "+-":
        op = tz.next()[0]
        e = _parse_unary(tz)
        return -e if op == "-" else e
    return _parse_power(tz)


def _parse_power(tz):
    base = _parse_atom(tz)
    if tz.peek()[0] == "^":
        tz.next()
        tok = tz.peek()
        exponent = _parse_unary(tz)
        q = const_value(exponent)
        if q is None:
            tz.error("exponent must be an exact rational constant", tok)
        return base ** q
    return base


def _parse_atom(tz):
    kind, value, _ = tz.peek()
    if kind == "num":
        tok = tz.next()
        try:
            return Rational(Fraction(value))
        except ValueError:
            tz.error(f"malformed number {value!r}", tok)
    if kind == "(":
        tz.next()
        e = _parse_sum(tz)
        if tz.peek()[0] != ")":
            tz.error("expected ')'")
        tz.next()
        return e
    if kind == "ident":
        tok = tz.next()
        name = tok[1]
        order = len(name) - len(name.rstrip("'"))
        name = name.rstrip("'")
        if name == "exp":
            if order:
                tz.error("'exp' takes no derivative primes", tok)
            if tz.peek()[0] != "(":
                tz.error("expected '(' after exp", tok)
            tz.next()
            arg = _parse_sum(tz)
            if tz.peek()[0] != ")":
                tz.error("expected ')'")
            tz.next()
            return Exp(arg)
        if tz.peek()[0] == "(":
            tz.next()
            inner = tz.peek()
            if inner[0] != "ident" or "'" in inner[1]:
                tz.error("function argument must be a coordinate name")
            tz.next()
            if tz.peek()[0] != ")":
                tz.error("expected ')'")
            tz.next()
            return Func(name, inner[1], order)
        if order:
            tz.error("derivative primes require a coordinate argument", tok)
        return Coord(name)
    tz.error(f"unexpected {value!r}" if value else "unexpected end of input")
