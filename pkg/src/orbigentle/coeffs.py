"""Truncated multivariate polynomial coefficients over the rationals.

Deformation coefficients live in Q[r0, r[(m,j)], h] modulo all monomials of
total degree >= N.  Every generator sits in the maximal ideal, so products of
N generators vanish; arithmetic is exact throughout.
"""
from __future__ import annotations

from fractions import Fraction

R0 = ("r0",)
HBAR = ("h",)


def orb_var(point, winding):
    """Coefficient variable attached to the orbifold point (point, winding)."""
    if winding < 1:
        raise ValueError("winding must be >= 1")
    return ("orb", point, int(winding))


def _var_key(v):
    if v[0] == "r0":
        return (0, "", 0)
    if v[0] == "orb":
        return (1, v[1], v[2])
    return (2, "", 0)


def _mono_key(mono):
    # graded lexicographic: total degree first, then variable order
    return (len(mono), tuple(_var_key(v) for v in mono))


def _render_var(v):
    if v[0] == "r0":
        return "r0"
    if v[0] == "orb":
        return "r[%s,%d]" % (v[1], v[2])
    return "h"


class TruncatedSeries:
    """Element of the truncated polynomial ring at total-degree bound `order`."""

    __slots__ = ("order", "terms")

    def __init__(self, order, terms=None):
        if order < 1:
            raise ValueError("truncation order must be >= 1")
        self.order = order
        clean = {}
        if terms:
            for mono, coeff in terms.items():
                if len(mono) >= order:
                    continue
                c = coeff if isinstance(coeff, Fraction) else Fraction(coeff)
                if not c:
                    continue
                mono = tuple(sorted(mono, key=_var_key))
                acc = clean.get(mono)
                total = c if acc is None else acc + c
                if total:
                    clean[mono] = total
                elif mono in clean:
                    del clean[mono]
        self.terms = clean

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, order):
        return cls(order)

    @classmethod
    def one(cls, order):
        return cls(order, {(): Fraction(1)})

    @classmethod
    def rational(cls, q, order):
        return cls(order, {(): Fraction(q)})

    @classmethod
    def variable(cls, v, order):
        return cls(order, {(v,): Fraction(1)})

    # -- predicates --------------------------------------------------------

    def is_zero(self):
        return not self.terms

    def is_constant(self):
        return all(not mono for mono in self.terms)

    def constant_value(self):
        return self.terms.get((), Fraction(0))

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return self.order == other.order and self.terms == other.terms

    def __hash__(self):
        return hash((self.order, frozenset(self.terms.items())))

    # -- arithmetic --------------------------------------------------------

    def _check(self, other):
        if self.order != other.order:
            raise ValueError("truncation order mismatch: %d vs %d"
                             % (self.order, other.order))

    def __add__(self, other):
        self._check(other)
        terms = dict(self.terms)
        for mono, c in other.terms.items():
            acc = terms.get(mono)
            total = c if acc is None else acc + c
            if total:
                terms[mono] = total
            elif mono in terms:
                del terms[mono]
        out = TruncatedSeries.__new__(TruncatedSeries)
        out.order = self.order
        out.terms = terms
        return out

    def __neg__(self):
        out = TruncatedSeries.__new__(TruncatedSeries)
        out.order = self.order
        out.terms = {m: -c for m, c in self.terms.items()}
        return out

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        self._check(other)
        terms = {}
        order = self.order
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                if len(m1) + len(m2) >= order:
                    continue
                mono = tuple(sorted(m1 + m2, key=_var_key))
                acc = terms.get(mono)
                total = c1 * c2 if acc is None else acc + c1 * c2
                if total:
                    terms[mono] = total
                elif mono in terms:
                    del terms[mono]
        out = TruncatedSeries.__new__(TruncatedSeries)
        out.order = order
        out.terms = terms
        return out

    __rmul__ = __mul__

    def scale(self, q):
        q = Fraction(q)
        if not q:
            return TruncatedSeries(self.order)
        out = TruncatedSeries.__new__(TruncatedSeries)
        out.order = self.order
        out.terms = {m: c * q for m, c in self.terms.items()}
        return out

    # -- extraction / substitution -----------------------------------------

    def extract_order(self, v, k):
        """Coefficient series of v**k, as a series in the remaining variables."""
        terms = {}
        for mono, c in self.terms.items():
            cnt = sum(1 for w in mono if w == v)
            if cnt != k:
                continue
            rest = tuple(w for w in mono if w != v)
            terms[rest] = terms.get(rest, Fraction(0)) + c
        return TruncatedSeries(self.order, terms)

    def set_zero(self, pred=None):
        """Set variables to zero (all of them when pred is None)."""
        if pred is None:
            pred = lambda v: True
        terms = {m: c for m, c in self.terms.items()
                 if not any(pred(v) for v in m)}
        out = TruncatedSeries.__new__(TruncatedSeries)
        out.order = self.order
        out.terms = dict(terms)
        return out

    def variables(self):
        seen = set()
        for mono in self.terms:
            seen.update(mono)
        return seen

    # -- rendering ----------------------------------------------------------

    def render(self):
        if not self.terms:
            return "0"
        parts = []
        for mono in sorted(self.terms, key=_mono_key):
            c = self.terms[mono]
            body = "*".join(_render_var(v) for v in mono)
            mag = abs(c)
            if not body:
                piece = str(mag)
            elif mag == 1:
                piece = body
            else:
                piece = "%s*%s" % (mag, body)
            if not parts:
                parts.append(piece if c > 0 else "-" + piece)
            else:
                parts.append(("+ " if c > 0 else "- ") + piece)
        return " ".join(parts)

    def __repr__(self):
        return "<series N=%d %s>" % (self.order, self.render())
