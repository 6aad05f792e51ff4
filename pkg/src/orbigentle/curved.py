"""Curved higher products on the gentle algebra.

Every orbigon with reduced sequence (a_k, ..., a_1) induces a k-ary product:
aligned inputs that carry one extra composable angle at the front (leftmost
entry) return that angle, at the back (rightmost entry) return it with the
sign (-1)^{|leftover|}, and an exact match closes the disc and returns the
vertex idempotent.  Each contribution is weighted by the product of the
deformation coefficients attached to the orbigon's branch points; tree-gons
have weight one.  Arity two additionally carries the sign-twisted ordinary
product mu2(a, b) = (-1)^{|b|} a.b.

Input tuples are written like compositions: xs[0] is the leftmost factor and
xs[-1] the first one consumed.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .coeffs import TruncatedSeries
from .gentle import (Algebra, Element, basis_is_idem, basis_parity,
                     basis_length, basis_tail, compose_basis, idem)
from .orbigons import OrbigonEngine
from .surface import other_end


class BoundsError(ValueError):
    """An evaluation exceeded the configured arity or length bounds."""


class DeformationParams:
    """Central deformation parameter: scalar part plus one coefficient per
    orbifold point (marked point, winding)."""

    def __init__(self, order, r0=None, orb=None):
        self.order = order
        self.r0 = r0 if r0 is not None else TruncatedSeries.zero(order)
        self.orb: Dict[Tuple[str, int], TruncatedSeries] = {}
        if self.r0.order != order:
            raise ValueError("r0 truncation order mismatch")
        if self.r0.terms.get(()):
            raise ValueError("r0 must lie in the maximal ideal")
        for p, series in (orb or {}).items():
            if series.order != order:
                raise ValueError("coefficient order mismatch at %s" % (p,))
            if series.terms.get(()):
                raise ValueError("coefficient at %s has a constant term" % (p,))
            if series:
                self.orb[p] = series

    @classmethod
    def zero(cls, order):
        return cls(order)

    def support(self):
        return frozenset(self.orb)

    def is_zero(self):
        return self.r0.is_zero() and not self.orb

    def weight(self, type_counts) -> TruncatedSeries:
        out = TruncatedSeries.one(self.order)
        for p in type_counts:
            series = self.orb.get(p)
            if series is None:
                return TruncatedSeries.zero(self.order)
            out = out * series
        return out


class CurvedStructure:
    """The deformed products over one algebra, with explicit evaluation
    bounds (exceeding them raises, nothing is silently truncated)."""

    def __init__(self, alg: Algebra, engine: OrbigonEngine,
                 params: DeformationParams, max_arity=6, max_len=6):
        if params.order != alg.order:
            raise ValueError("parameter/algebra truncation order mismatch")
        self.alg = alg
        self.engine = engine
        self.params = params
        self.max_arity = max_arity
        self.max_len = max_len
        self._mu_memo: Dict[tuple, Element] = {}
        self._max_type = alg.order - 1

    def with_params(self, params) -> "CurvedStructure":
        return CurvedStructure(self.alg, self.engine, params,
                               self.max_arity, self.max_len)

    def reduce_uncurved(self) -> "CurvedStructure":
        return self.with_params(DeformationParams.zero(self.alg.order))

    # -- products -----------------------------------------------------------

    def curvature(self) -> Element:
        out = self.alg.unit().scale(self.params.r0)
        for (m, j), series in sorted(self.params.orb.items()):
            out = out + self.alg.ell(m, j).scale(series)
        return out

    def mu_basis(self, bs: tuple) -> Element:
        hit = self._mu_memo.get(bs)
        if hit is None:
            hit = self._mu_basis(bs)
            self._mu_memo[bs] = hit
        return hit

    def _mu_basis(self, bs: tuple) -> Element:
        alg = self.alg
        q = alg.quiver
        k = len(bs)
        if k > self.max_arity:
            raise BoundsError("arity %d exceeds bound %d" % (k, self.max_arity))
        for b in bs:
            if basis_length(b) > self.max_len:
                raise BoundsError("entry length %d exceeds bound %d"
                                  % (basis_length(b), self.max_len))
        out = alg.zero()
        if k == 0:
            return self.curvature()
        if any(basis_is_idem(b) for b in bs):
            if k != 2:
                return out
            x2, x1 = bs
            sign = -1 if basis_parity(q, x1) else 1
            return (alg.basis(x2) * alg.basis(x1)).scale(sign)
        if k == 2:
            x2, x1 = bs
            sign = -1 if basis_parity(q, x1) else 1
            out = out + (alg.basis(x2) * alg.basis(x1)).scale(sign)
        walk = [(b[1], b[2], b[3]) for b in reversed(bs)]
        # exact alignment: the disc closes and returns an idempotent
        closing = idem(basis_tail(q, bs[-1]))
        for o, mult in self._matches(tuple(walk)):
            w = self.params.weight(o.type)
            if w:
                out = out + alg.basis(closing, w.scale(mult))
        # front leftover: cut the leftmost entry
        m, s, l = walk[-1]
        v = q.valence(m)
        for c in range(1, l):
            alpha = (m, s, c)
            beta = ("p", m, (s + c) % v, l - c)
            query = tuple(walk[:-1] + [alpha])
            for o, mult in self._matches(query):
                w = self.params.weight(o.type)
                if w:
                    out = out + alg.basis(beta, w.scale(mult))
        # back leftover: cut the rightmost entry, with its parity sign
        m, s, l = walk[0]
        v = q.valence(m)
        for c in range(1, l):
            gamma = ("p", m, s, c)
            alpha = (m, (s + c) % v, l - c)
            sign = -1 if basis_parity(q, gamma) else 1
            query = tuple([alpha] + walk[1:])
            for o, mult in self._matches(query):
                w = self.params.weight(o.type)
                if w:
                    out = out + alg.basis(gamma, w.scale(sign * mult))
        return out

    def _matches(self, walk_pattern):
        """Orbigon classes whose reduced sequence matches the linear pattern,
        with their rotational multiplicities."""
        eng = self.engine
        if not eng.pattern_is_cyclic(walk_pattern):
            return
        for o in eng.enumerate_matching(walk_pattern, self._max_type,
                                        allowed_points=self.params.support()):
            mult = eng.alignment_count(o, walk_pattern)
            if mult:
                yield o, mult

    def mu_elements(self, inputs) -> Element:
        """Multilinear extension; inputs may mix basis elements and Elements."""
        alg = self.alg
        expanded = [([(b, None)] if isinstance(b, tuple)
                     else list(b.terms.items())) for b in inputs]
        out = alg.zero()

        def rec(i, chosen, coeff):
            nonlocal out
            if i == len(expanded):
                val = self.mu_basis(tuple(chosen))
                if val:
                    out = out + (val if coeff is None else val.scale(coeff))
                return
            for b, c in expanded[i]:
                if c is None:
                    rec(i + 1, chosen + [b], coeff)
                else:
                    nc = c if coeff is None else coeff * c
                    if nc:
                        rec(i + 1, chosen + [b], nc)

        rec(0, [], None)
        return out

    # -- axiom machinery -----------------------------------------------------

    def axiom_residual(self, bs: List[tuple]) -> Element:
        """Signed double sum of all ways to nest one product inside another,
        including the curvature insertions; zero iff the tuple passes."""
        alg = self.alg
        q = alg.quiver
        k = len(bs)
        out = alg.zero()
        for n_right in range(k + 1):
            right = bs[k - n_right:]
            sign_exp = sum(basis_parity(q, b) + 1 for b in right) % 2
            sign = -1 if sign_exp else 1
            for j in range(0, k - n_right + 1):
                i0 = k - n_right - j
                inner = self.mu_basis(tuple(bs[i0:k - n_right]))
                if not inner:
                    continue
                val = self.mu_elements(list(bs[:i0]) + [inner] + right)
                if val:
                    out = out + val.scale(sign)
        return out


def chained_tuples(alg: Algebra, max_arity, max_total):
    """Arc-to-arc chained tuples of basis paths with bounded total length."""
    q = alg.quiver
    paths = []
    for m in q.map.marked_points:
        v = q.valence(m)
        for s in range(v):
            for l in range(1, max_total + 1):
                paths.append(("p", m, s, l))
    by_tail = {}
    for b in paths:
        by_tail.setdefault(basis_tail(q, b), []).append(b)
    out = []

    def extend(chain, total):
        if 1 <= len(chain) <= max_arity:
            out.append(list(chain))
        if len(chain) == max_arity:
            return
        from .gentle import basis_head
        for nxt in by_tail.get(basis_head(q, chain[-1]), []):
            if total + nxt[3] <= max_total:
                extend(chain + [nxt], total + nxt[3])

    for b in paths:
        extend([b], b[3])
    return out


@dataclass
class AxiomReport:
    order: int
    max_arity: int
    max_total_len: int
    tuples_checked: int
    by_arity: Dict[int, int]
    violations: List[dict] = field(default_factory=list)

    @property
    def ok(self):
        return not self.violations

    def to_dict(self):
        return {
            "order": self.order,
            "max_arity": self.max_arity,
            "max_total_len": self.max_total_len,
            "tuples_checked": self.tuples_checked,
            "by_arity": {str(k): v for k, v in sorted(self.by_arity.items())},
            "violations": self.violations,
            "ok": self.ok,
        }


def verify_axioms(cs: CurvedStructure, max_arity=None, max_total=None,
                  threads=1) -> AxiomReport:
    """Check the curved axiom residual on every chained tuple within bounds.

    Inner and outer evaluations can exceed the caller's bounds by one arity
    (curvature insertion) and by the curvature's own path length, so the
    check runs on a widened copy of the structure.
    """
    max_arity = max_arity if max_arity is not None else cs.max_arity
    max_total = max_total if max_total is not None else cs.max_len
    q = cs.alg.quiver
    curv_len = max((j * q.valence(m) for (m, j) in cs.params.orb), default=0)
    wide = CurvedStructure(cs.alg, cs.engine, cs.params,
                           max_arity + 1, max_total + curv_len)
    tuples = chained_tuples(cs.alg, max_arity, max_total)
    by_arity = {}
    violations = []

    def check(bs):
        res = wide.axiom_residual(bs)
        if res:
            return {"tuple": [list(b) for b in bs], "residual": res.render()}
        return None

    results = _parallel_map(check, tuples, threads)
    # arity-0 axiom: mu1 applied to the curvature
    res0 = wide.axiom_residual([])
    if res0:
        violations.append({"tuple": [], "residual": res0.render()})
    for bs, bad in zip(tuples, results):
        by_arity[len(bs)] = by_arity.get(len(bs), 0) + 1
        if bad:
            violations.append(bad)
    return AxiomReport(cs.alg.order, max_arity, max_total,
                       len(tuples) + 1, by_arity, violations)


def _parallel_map(fn, items, threads):
    if threads and threads > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


@dataclass
class ParityReport:
    tuples_checked: int
    parity_violations: List[dict]
    grading_violations: List[dict]

    @property
    def ok(self):
        return not self.parity_violations and not self.grading_violations

    def to_dict(self):
        return {"tuples_checked": self.tuples_checked,
                "parity_violations": self.parity_violations,
                "grading_violations": self.grading_violations,
                "ok": self.ok}


def parity_check(cs: CurvedStructure, grading, max_arity=None,
                 max_total=None) -> ParityReport:
    """Outputs of the products must have parity sum(inputs) + arity, and
    their group degree must match the inputs once each branch-point
    coefficient is weighted by the degree of the full turn it deletes."""
    from .gentle import basis_parity as bp
    max_arity = max_arity if max_arity is not None else cs.max_arity
    max_total = max_total if max_total is not None else cs.max_len
    alg = cs.alg
    q = alg.quiver
    span = grading.span
    nvars = len(grading.arrow_ids)
    ell_vec = {}
    for m in q.map.marked_points:
        vec = [0] * nvars
        for arr in q.by_point[m]:
            vec[grading.arrow_index[arr.id]] += 1
        ell_vec[m] = vec
    parity_bad = []
    grading_bad = []
    tuples = chained_tuples(alg, max_arity, max_total)
    for bs in tuples:
        val = cs.mu_basis(tuple(bs))
        if not val:
            continue
        want_parity = (sum(bp(q, b) for b in bs) + len(bs)) % 2
        in_vec = [0] * nvars
        for b in bs:
            for i, x in enumerate(grading.arrow_vector(b)):
                in_vec[i] += x
        for b, series in val.terms.items():
            if bp(q, b) != want_parity:
                parity_bad.append({"tuple": [list(t) for t in bs],
                                   "term": list(b)})
            base = grading.arrow_vector(b)
            for mono in series.terms:
                vec = list(base)
                for var in mono:
                    if var[0] == "orb":
                        mvec = ell_vec[var[1]]
                        for i in range(nvars):
                            vec[i] += var[2] * mvec[i]
                diff = [a - c for a, c in zip(vec, in_vec)]
                if not span.contains(diff):
                    grading_bad.append({"tuple": [list(t) for t in bs],
                                        "term": list(b)})
    return ParityReport(len(tuples), parity_bad, grading_bad)


def strictness_check(cs: CurvedStructure, max_arity=None) -> bool:
    """Idempotent entries kill every product except the binary one."""
    alg = cs.alg
    q = alg.quiver
    arrows = list(alg.arrow_elements())
    idems = [idem(a.id) for a in q.map.arcs]
    max_arity = max_arity if max_arity is not None else cs.max_arity
    for k in range(1, min(max_arity, 4) + 1):
        if k == 2:
            continue
        for e in idems:
            for pos in range(k):
                for filler in arrows[:3]:
                    bs = [filler] * k
                    bs[pos] = e
                    if cs.mu_basis(tuple(bs)):
                        return False
    return True
