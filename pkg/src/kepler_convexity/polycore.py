"""Exact sparse multivariate polynomials over the rationals.

Coefficients are Python ints or :class:`fractions.Fraction`; monomials are
packed into a single integer key (12 bits per exponent) so that monomial
multiplication is one integer addition.  Values are immutable.

The default ring has the variables ``(z1, z2, w1, w2, c)``; other rings
(e.g. ``(a, b, c)``) are created with :class:`Ring`.
"""
from __future__ import annotations

import itertools
import re
from fractions import Fraction
from numbers import Rational
from typing import Callable, Mapping, Sequence

from .errors import DegreeError

__all__ = [
    "DegreeError",
    "Ring",
    "ZW",
    "SparsePoly",
    "PolyMatrix3",
    "poly_arith",
    "poly_diff",
    "poly_eval",
    "pseudo_rem_linear",
    "poly_det3",
    "identity_on_grid",
]

_BITS = 12
_MASK = (1 << _BITS) - 1
_MAX_EXP = _MASK


def _norm(v):
    if type(v) is Fraction and v.denominator == 1:
        return v.numerator
    return v


class Ring:
    """An ordered tuple of variable names.  Rings compare by their names."""

    __slots__ = ("names", "nvars", "_shifts")

    def __init__(self, names: Sequence[str]):
        self.names = tuple(names)
        self.nvars = len(self.names)
        if len(set(self.names)) != self.nvars:
            raise ValueError("duplicate variable names")
        # first variable in the most significant slot
        self._shifts = tuple(_BITS * (self.nvars - 1 - i) for i in range(self.nvars))

    def __eq__(self, other):
        return isinstance(other, Ring) and self.names == other.names

    def __hash__(self):
        return hash(self.names)

    def __repr__(self):
        return f"Ring({self.names!r})"

    def index(self, var: int | str) -> int:
        if isinstance(var, str):
            return self.names.index(var)
        if not 0 <= var < self.nvars:
            raise IndexError(f"variable index {var} out of range for {self}")
        return var

    def pack(self, exps: Sequence[int]) -> int:
        if len(exps) != self.nvars:
            raise ValueError(f"exponent vector of length {len(exps)} for a ring of {self.nvars} variables")
        key = 0
        for e, sh in zip(exps, self._shifts):
            if not 0 <= e <= _MAX_EXP:
                raise ValueError(f"exponent {e} out of range")
            key |= e << sh
        return key

    def unpack(self, key: int) -> tuple[int, ...]:
        return tuple((key >> sh) & _MASK for sh in self._shifts)

    def gens(self) -> tuple["SparsePoly", ...]:
        return tuple(SparsePoly.var(i, self) for i in range(self.nvars))


ZW = Ring(("z1", "z2", "w1", "w2", "c"))


class SparsePoly:
    """Immutable polynomial: a map from monomials to nonzero rational coefficients."""

    __slots__ = ("ring", "_t", "_hash")

    def __init__(self, terms: Mapping[Sequence[int], Rational] | None = None, ring: Ring = ZW):
        self.ring = ring
        t = {}
        for exps, coeff in (terms or {}).items():
            k = ring.pack(tuple(exps))
            t[k] = t.get(k, 0) + coeff
        self._t = {k: _norm(v) for k, v in t.items() if v != 0}
        self._hash = None

    @classmethod
    def _raw(cls, ring: Ring, t: dict) -> "SparsePoly":
        p = object.__new__(cls)
        p.ring = ring
        p._t = t
        p._hash = None
        return p

    # constructors -------------------------------------------------------

    @classmethod
    def const(cls, value: Rational, ring: Ring = ZW) -> "SparsePoly":
        value = _norm(Fraction(value)) if not isinstance(value, int) else value
        return cls._raw(ring, {0: value} if value != 0 else {})

    @classmethod
    def zero(cls, ring: Ring = ZW) -> "SparsePoly":
        return cls._raw(ring, {})

    @classmethod
    def var(cls, var: int | str, ring: Ring = ZW) -> "SparsePoly":
        i = ring.index(var)
        return cls._raw(ring, {1 << ring._shifts[i]: 1})

    # inspection ---------------------------------------------------------

    @property
    def terms(self) -> dict[tuple[int, ...], Rational]:
        """Exponent tuple -> coefficient, in canonical (descending grlex) order."""
        return {self.ring.unpack(k): v for k, v in self._sorted_items()}

    def __len__(self):
        return len(self._t)

    def is_zero(self) -> bool:
        return not self._t

    def _sorted_items(self):
        unpack = self.ring.unpack

        def key(item):
            e = unpack(item[0])
            return (sum(e), e)

        return sorted(self._t.items(), key=key, reverse=True)

    def degree(self, var: int | str | None = None) -> int:
        """Degree in one variable, or total degree when ``var`` is None.  -1 for zero."""
        if not self._t:
            return -1
        if var is None:
            return max(sum(self.ring.unpack(k)) for k in self._t)
        sh = self.ring._shifts[self.ring.index(var)]
        return max((k >> sh) & _MASK for k in self._t)

    def weighted_degrees(self, weights: Sequence[int]) -> set[int]:
        """Set of weighted degrees of the monomials (one element iff weighted homogeneous)."""
        return {sum(w * e for w, e in zip(weights, self.ring.unpack(k))) for k in self._t}

    def coeff_of(self, var: int | str, k: int) -> "SparsePoly":
        """Coefficient of ``var**k`` as a polynomial free of ``var``."""
        i = self.ring.index(var)
        sh = self.ring._shifts[i]
        out = {}
        for key, v in self._t.items():
            if (key >> sh) & _MASK == k:
                out[key - (k << sh)] = v
        return SparsePoly._raw(self.ring, out)

    # arithmetic ---------------------------------------------------------

    def _coerce(self, other) -> "SparsePoly":
        if isinstance(other, SparsePoly):
            if other.ring != self.ring:
                raise ValueError(f"ring mismatch: {self.ring} vs {other.ring}")
            return other
        if isinstance(other, Rational):
            return SparsePoly.const(other, self.ring)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        t = dict(self._t)
        for k, v in other._t.items():
            s = t.get(k, 0) + v
            if s:
                t[k] = _norm(s)
            else:
                t.pop(k, None)
        return SparsePoly._raw(self.ring, t)

    __radd__ = __add__

    def __neg__(self):
        return SparsePoly._raw(self.ring, {k: -v for k, v in self._t.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Rational):
            if other == 0:
                return SparsePoly.zero(self.ring)
            return SparsePoly._raw(self.ring, {k: _norm(v * other) for k, v in self._t.items()})
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        a, b = self._t, other._t
        if len(a) < len(b):
            a, b = b, a
        t: dict = {}
        get = t.get
        for kb, vb in b.items():
            for ka, va in a.items():
                k = ka + kb
                t[k] = get(k, 0) + va * vb
        return SparsePoly._raw(self.ring, {k: _norm(v) for k, v in t.items() if v})

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("exponent must be a non-negative int")
        result = SparsePoly.const(1, self.ring)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __eq__(self, other):
        if isinstance(other, Rational):
            other = SparsePoly.const(other, self.ring)
        if not isinstance(other, SparsePoly):
            return NotImplemented
        return self.ring == other.ring and self._t == other._t

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.ring, frozenset(self._t.items())))
        return self._hash

    def leading(self) -> tuple[tuple[int, ...], Rational]:
        """Leading (exponents, coefficient) in descending grlex order."""
        if not self._t:
            raise ValueError("zero polynomial has no leading term")
        k, v = self._sorted_items()[0]
        return self.ring.unpack(k), v

    def exact_div(self, d: "SparsePoly") -> "SparsePoly":
        """Quotient ``q`` with ``self == q * d``; ArithmeticError if ``d`` does not divide."""
        d = self._coerce(d)
        if d.is_zero():
            raise ZeroDivisionError("division by the zero polynomial")
        lexp, lcoef = d.leading()
        lkey = self.ring.pack(lexp)
        r = self
        q: dict = {}
        while not r.is_zero():
            rexp, rcoef = r.leading()
            if any(e < f for e, f in zip(rexp, lexp)):
                raise ArithmeticError("polynomial is not divisible")
            key = self.ring.pack(rexp) - lkey
            coef = _norm(Fraction(rcoef) / lcoef)
            q[key] = coef
            r = r - SparsePoly._raw(self.ring, {key: coef}) * d
        return SparsePoly._raw(self.ring, q)

    # calculus / evaluation ----------------------------------------------

    def diff(self, var: int | str) -> "SparsePoly":
        i = self.ring.index(var)
        sh = self.ring._shifts[i]
        unit = 1 << sh
        t = {}
        for k, v in self._t.items():
            e = (k >> sh) & _MASK
            if e:
                t[k - unit] = v * e
        return SparsePoly._raw(self.ring, t)

    def eval(self, point: Sequence) -> Rational:
        """Evaluate at a point; exact when the point is rational."""
        if len(point) != self.ring.nvars:
            raise ValueError(f"point of length {len(point)} for a ring of {self.ring.nvars} variables")
        pts = [Fraction(x) if isinstance(x, Rational) else x for x in point]
        cache = [dict() for _ in pts]
        total = 0
        for k, v in self._t.items():
            term = v
            for i, e in enumerate(self.ring.unpack(k)):
                if e:
                    pw = cache[i].get(e)
                    if pw is None:
                        pw = cache[i][e] = pts[i] ** e
                    term = term * pw
            total = total + term
        return _norm(total) if isinstance(total, Fraction) else total

    def compose(self, values: Sequence["SparsePoly"]) -> "SparsePoly":
        """Substitute one polynomial (of a common target ring) for each variable."""
        if len(values) != self.ring.nvars:
            raise ValueError("need one value per variable")
        target = values[0].ring
        powers = [{0: SparsePoly.const(1, target)} for _ in values]

        def pw(i, e):
            d = powers[i]
            if e not in d:
                d[e] = pw(i, e - 1) * values[i]
            return d[e]

        out = SparsePoly.zero(target)
        for k, v in self._t.items():
            term = SparsePoly.const(v, target)
            for i, e in enumerate(self.ring.unpack(k)):
                if e:
                    term = term * pw(i, e)
            out = out + term
        return out

    def substitute_rational(self, var: int | str, num: "SparsePoly", den: "SparsePoly") -> "SparsePoly":
        """Return ``den**d * p|_{var = num/den}`` with ``d = deg_var(p)``, a polynomial."""
        i = self.ring.index(var)
        d = self.degree(i)
        out = SparsePoly.zero(self.ring)
        for k in range(d + 1):
            ck = self.coeff_of(i, k)
            if ck.is_zero():
                continue
            out = out + ck * num ** k * den ** (d - k)
        return out

    # text ---------------------------------------------------------------

    def to_text(self) -> str:
        if not self._t:
            return "0"
        parts = []
        for exps, v in ((self.ring.unpack(k), v) for k, v in self._sorted_items()):
            v = Fraction(v)
            coeff = f"{v.numerator}" if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
            factors = [coeff]
            for name, e in zip(self.ring.names, exps):
                if e == 1:
                    factors.append(name)
                elif e > 1:
                    factors.append(f"{name}^{e}")
            parts.append("*".join(factors))
        return " + ".join(parts).replace("+ -", "- ")

    __str__ = to_text

    def __repr__(self):
        return f"SparsePoly({self.to_text()!r}, ring={self.ring.names})"

    @classmethod
    def parse(cls, text: str, ring: Ring = ZW) -> "SparsePoly":
        """Inverse of :meth:`to_text`."""
        text = text.strip()
        if text == "0":
            return cls.zero(ring)
        text = re.sub(r"\s+", "", text)
        text = re.sub(r"(?<=.)-", "+-", text)
        terms: dict = {}
        for chunk in text.split("+"):
            if not chunk:
                continue
            sign = 1
            if chunk.startswith("-"):
                sign, chunk = -1, chunk[1:]
            factors = chunk.split("*")
            # coefficient may be omitted ("w2" means "1*w2")
            if re.fullmatch(r"[0-9/]+", factors[0]):
                coeff = sign * Fraction(factors[0])
                factors = factors[1:]
            else:
                coeff = Fraction(sign)
            exps = [0] * ring.nvars
            for f in factors:
                name, _, e = f.partition("^")
                exps[ring.index(name)] += int(e) if e else 1
            key = tuple(exps)
            terms[key] = terms.get(key, 0) + coeff
        return cls(terms, ring)


class PolyMatrix3:
    """A 3x3 matrix of polynomials."""

    __slots__ = ("entries",)

    def __init__(self, entries: Sequence[Sequence[SparsePoly]]):
        if len(entries) != 3 or any(len(row) != 3 for row in entries):
            raise ValueError("PolyMatrix3 needs 3x3 entries")
        self.entries = tuple(tuple(row) for row in entries)

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def is_symmetric(self) -> bool:
        e = self.entries
        return all(e[i][j] == e[j][i] for i in range(3) for j in range(i + 1, 3))


def poly_arith(op: str, p: SparsePoly, q: SparsePoly) -> SparsePoly:
    if op == "add":
        return p + q
    if op == "sub":
        return p - q
    if op == "mul":
        return p * q
    raise ValueError(f"unknown op {op!r}")


def poly_diff(p: SparsePoly, var_index: int | str) -> SparsePoly:
    return p.diff(var_index)


def poly_eval(p: SparsePoly, point: Sequence) -> Rational:
    return p.eval(point)


def pseudo_rem_linear(p: SparsePoly, d: SparsePoly, var: int | str) -> SparsePoly:
    """Pseudo-remainder of ``p`` by ``d``, where ``d`` is linear in ``var``.

    Returns ``r`` free of ``var`` with ``lc(d)**k * p = q*d + r``.
    """
    i = p.ring.index(var)
    if d.degree(i) != 1:
        raise DegreeError(f"divisor has degree {d.degree(i)} in {p.ring.names[i]}, expected 1")
    lead = d.coeff_of(i, 1)
    x = SparsePoly.var(i, p.ring)
    r = p
    k = r.degree(i)
    while k >= 1:
        ck = r.coeff_of(i, k)
        r = lead * r - ck * x ** (k - 1) * d
        k = r.degree(i)
    return r


def poly_det3(M: PolyMatrix3 | Sequence[Sequence[SparsePoly]]) -> SparsePoly:
    """Determinant by cofactor expansion along the first row."""
    e = M.entries if isinstance(M, PolyMatrix3) else M
    return (
        e[0][0] * (e[1][1] * e[2][2] - e[1][2] * e[2][1])
        - e[0][1] * (e[1][0] * e[2][2] - e[1][2] * e[2][0])
        + e[0][2] * (e[1][0] * e[2][1] - e[1][1] * e[2][0])
    )


def identity_on_grid(
    lhs: Callable[..., Rational],
    rhs: Callable[..., Rational],
    degree_bounds: Sequence[int],
    offset: int = 1,
) -> tuple[bool, tuple | None]:
    """Deterministic identity test of two polynomial functions.

    Both sides are evaluated exactly on the integer grid
    ``{offset, ..., offset + D_i}`` in every variable, where ``D_i`` bounds the
    degree of ``lhs - rhs`` in variable ``i``.  A polynomial vanishing on such a
    grid is zero.  The default offset keeps the grid away from 0 so sides with
    rational substitutions stay defined.  Returns ``(ok, witness)``.
    """
    axes = [range(offset, offset + d + 1) for d in degree_bounds]
    for pt in itertools.product(*axes):
        x = tuple(Fraction(v) for v in pt)
        if lhs(*x) != rhs(*x):
            return False, x
    return True, None
