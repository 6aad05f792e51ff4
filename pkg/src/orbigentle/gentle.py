"""The angle quiver and gentle algebra of an arc collection.

Vertices are arcs; one angle arrow per corner of a face, spanning the
anticlockwise angle between consecutive arc ends at a marked point.  Basis
elements are vertex idempotents and angle paths; an angle path is stored as
(marked point, start index into the rotation, length), never as an arrow
list, so composition is O(1) and the representation is canonical.

Basis encoding used throughout:
    ("i", arc_id)                     vertex idempotent
    ("p", point, start, length)       angle path, 0 <= start < valence
"""
from __future__ import annotations

from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .coeffs import TruncatedSeries
from .intlinalg import (IntRowSpan, int_left_kernel, rational_rank,
                        solve_sparse, nullspace_sparse)
from .surface import CombinatorialMap, other_end


class Arrow:
    __slots__ = ("id", "point", "idx", "dart", "next_dart",
                 "tail_arc", "head_arc", "face", "deg")

    def __init__(self, id, point, idx, dart, next_dart, face, deg):
        self.id = id
        self.point = point
        self.idx = idx
        self.dart = dart
        self.next_dart = next_dart
        self.tail_arc = dart[0]
        self.head_arc = next_dart[0]
        self.face = face
        self.deg = deg

    def __repr__(self):
        return "<arrow %s %s->%s deg %d>" % (
            self.id, self.tail_arc, self.head_arc, self.deg)


class Quiver:
    """Angle quiver of a validated combinatorial map."""

    def __init__(self, cmap: CombinatorialMap):
        self.map = cmap
        self.arrows: Dict[str, Arrow] = {}
        self.arrow_at_dart: Dict[tuple, Arrow] = {}
        self.by_point: Dict[str, List[Arrow]] = {}
        for m in cmap.marked_points:
            cyc = cmap.rotation[m]
            v = len(cyc)
            seq = []
            for i, d in enumerate(cyc):
                nxt = cyc[(i + 1) % v]
                deg = 0 if d[1] == nxt[1] else 1
                face = cmap.face_of_dart[other_end(d)]
                arrow = Arrow("%s:%d" % (m, i), m, i, d, nxt, face, deg)
                self.arrows[arrow.id] = arrow
                self.arrow_at_dart[d] = arrow
                seq.append(arrow)
            self.by_point[m] = seq
        # parity prefix sums per point (full turns are always even)
        self._pref: Dict[str, List[int]] = {}
        for m, seq in self.by_point.items():
            pref = [0]
            for a in seq:
                pref.append(pref[-1] + a.deg)
            self._pref[m] = pref
        self.face_corner_arrows: Dict[int, Tuple[str, ...]] = {}
        for f in cmap.faces:
            self.face_corner_arrows[f.index] = tuple(
                self.arrow_at_dart[c.in_end].id for c in f.corners)

    def valence(self, m):
        return len(self.by_point[m])

    def arrow(self, m, i):
        return self.by_point[m][i % self.valence(m)]

    def path_parity(self, m, start, length):
        v = self.valence(m)
        full, rem = divmod(length, v)
        s = start % v
        pref = self._pref[m]
        if s + rem <= v:
            p = pref[s + rem] - pref[s]
        else:
            p = (pref[v] - pref[s]) + pref[s + rem - v]
        return p % 2  # full turns contribute evenly

    def path_tail_arc(self, m, start, length):
        return self.by_point[m][start % self.valence(m)].tail_arc

    def path_head_arc(self, m, start, length):
        return self.by_point[m][(start + length) % self.valence(m)].tail_arc


# -- basis helpers -------------------------------------------------------------

def idem(arc_id):
    return ("i", arc_id)


def path(m, start, length, valence=None):
    if valence:
        start %= valence
    return ("p", m, start, length)


def basis_is_idem(b):
    return b[0] == "i"


def basis_parity(q: Quiver, b):
    if b[0] == "i":
        return 0
    return q.path_parity(b[1], b[2], b[3])


def basis_length(b):
    return 0 if b[0] == "i" else b[3]


def basis_tail(q: Quiver, b):
    return b[1] if b[0] == "i" else q.path_tail_arc(b[1], b[2], b[3])


def basis_head(q: Quiver, b):
    return b[1] if b[0] == "i" else q.path_head_arc(b[1], b[2], b[3])


def compose_basis(q: Quiver, x, y):
    """Product x . y (y acts first); None encodes zero."""
    if x[0] == "i":
        if y[0] == "i":
            return x if x[1] == y[1] else None
        return y if x[1] == basis_head(q, y) else None
    if y[0] == "i":
        return x if y[1] == basis_tail(q, x) else None
    if x[1] != y[1]:
        return None
    v = q.valence(x[1])
    if (y[2] + y[3]) % v != x[2] % v:
        return None
    return ("p", x[1], y[2] % v, x[3] + y[3])


def render_basis(b):
    if b[0] == "i":
        return "1[%s]" % b[1]
    return "%s:%d+%d" % (b[1], b[2], b[3])


def basis_sort_key(b):
    return (0, b[1], "", 0) if b[0] == "i" else (1, b[1], b[2], b[3])


# -- algebra elements ----------------------------------------------------------

class Algebra:
    """Gentle algebra with coefficients truncated at total degree `order`."""

    def __init__(self, quiver: Quiver, order: int = 2):
        self.quiver = quiver
        self.order = order
        self._one_series = TruncatedSeries.one(order)

    def zero(self):
        return Element(self, {})

    def element(self, terms):
        out = {}
        for b, c in terms.items():
            if isinstance(c, (int, Fraction)):
                c = TruncatedSeries.rational(c, self.order)
            if c:
                acc = out.get(b)
                s = c if acc is None else acc + c
                if s:
                    out[b] = s
                elif b in out:
                    del out[b]
        return Element(self, out)

    def basis(self, b, coeff=1):
        return self.element({b: coeff})

    def unit(self):
        return self.element({idem(a.id): 1 for a in self.quiver.map.arcs})

    def ell(self, m, j=1):
        """Central full-turn element: sum of all rotations of j full turns."""
        v = self.quiver.valence(m)
        return self.element({("p", m, s, j * v): 1 for s in range(v)})

    def arrow_elements(self):
        for m in self.quiver.map.marked_points:
            for i in range(self.quiver.valence(m)):
                yield ("p", m, i, 1)

    def series(self, q):
        return TruncatedSeries.rational(q, self.order)


class Element:
    """Finite linear combination of basis elements with series coefficients."""

    __slots__ = ("alg", "terms")

    def __init__(self, alg: Algebra, terms):
        self.alg = alg
        self.terms = terms

    def is_zero(self):
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        return (isinstance(other, Element) and self.alg is other.alg
                and self.terms == other.terms)

    def __add__(self, other):
        terms = dict(self.terms)
        for b, c in other.terms.items():
            acc = terms.get(b)
            s = c if acc is None else acc + c
            if s:
                terms[b] = s
            elif b in terms:
                del terms[b]
        return Element(self.alg, terms)

    def __neg__(self):
        return Element(self.alg, {b: -c for b, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        if isinstance(c, (int, Fraction)):
            if not c:
                return self.alg.zero()
            return Element(self.alg, {b: v.scale(c) for b, v in self.terms.items()})
        if c.is_zero():
            return self.alg.zero()
        terms = {}
        for b, v in self.terms.items():
            s = v * c
            if s:
                terms[b] = s
        return Element(self.alg, terms)

    def __mul__(self, other):
        if not isinstance(other, Element):
            return self.scale(other)
        q = self.alg.quiver
        terms = {}
        for bx, cx in self.terms.items():
            for by, cy in other.terms.items():
                b = compose_basis(q, bx, by)
                if b is None:
                    continue
                c = cx * cy
                if not c:
                    continue
                acc = terms.get(b)
                s = c if acc is None else acc + c
                if s:
                    terms[b] = s
                elif b in terms:
                    del terms[b]
        return Element(self.alg, terms)

    def coeff(self, b) -> TruncatedSeries:
        return self.terms.get(b, TruncatedSeries.zero(self.alg.order))

    def map_coeffs(self, fn):
        terms = {}
        for b, c in self.terms.items():
            s = fn(c)
            if s:
                terms[b] = s
        return Element(self.alg, terms)

    def parity_decomposition(self):
        q = self.alg.quiver
        even = {}
        odd = {}
        for b, c in self.terms.items():
            (odd if basis_parity(q, b) else even)[b] = c
        return Element(self.alg, even), Element(self.alg, odd)

    def render(self):
        if not self.terms:
            return "0"
        parts = []
        for b in sorted(self.terms, key=basis_sort_key):
            c = self.terms[b]
            if c.is_constant():
                val = c.constant_value()
                mag = abs(val)
                piece = render_basis(b) if mag == 1 else "%s*%s" % (mag, render_basis(b))
                sign = val > 0
            else:
                piece = "(%s)*%s" % (c.render(), render_basis(b))
                sign = True
            if not parts:
                parts.append(piece if sign else "-" + piece)
            else:
                parts.append(("+ " if sign else "- ") + piece)
        return " ".join(parts)

    def __repr__(self):
        return "<elt %s>" % self.render()


# -- center --------------------------------------------------------------------

def is_central(x: Element) -> bool:
    """True iff x commutes (plainly) with every arrow and every idempotent."""
    alg = x.alg
    for b in alg.arrow_elements():
        a = alg.basis(b)
        if x * a != a * x:
            return False
    for arc in alg.quiver.map.arcs:
        e = alg.basis(idem(arc.id))
        if x * e != e * x:
            return False
    return True


def center_basis(alg: Algebra, max_winding: int) -> List[Element]:
    out = [alg.unit()]
    for m in alg.quiver.map.marked_points:
        for j in range(1, max_winding + 1):
            out.append(alg.ell(m, j))
    return out


def central_elements_up_to_length(alg: Algebra, max_len: int):
    """Basis of the space of central elements supported on paths of length
    <= max_len (plus idempotents), computed by exact linear algebra."""
    q = alg.quiver
    unknowns = [idem(a.id) for a in q.map.arcs]
    for m in q.map.marked_points:
        for s in range(q.valence(m)):
            for l in range(1, max_len + 1):
                unknowns.append(("p", m, s, l))
    rows = []
    gens = [alg.basis(b) for b in alg.arrow_elements()]
    gens += [alg.basis(idem(a.id)) for a in q.map.arcs]
    for g in gens:
        row_by_out = {}
        for b in unknowns:
            e = alg.basis(b)
            comm = e * g - g * e
            for out_b, c in comm.terms.items():
                row_by_out.setdefault(out_b, {})[b] = c.constant_value()
        rows.extend(row_by_out.values())
    return [alg.element(vec) for vec in nullspace_sparse(rows, unknowns)]


# -- derivations ----------------------------------------------------------------

class Derivation:
    """k-linear derivation determined by its values on arrows.

    parity 0 gives the plain Leibniz rule; parity 1 inserts the sign
    (-1)^{|prefix|} when the derivation moves past a prefix.
    """

    def __init__(self, alg: Algebra, values: Dict[str, Element], parity=0):
        self.alg = alg
        self.parity = parity % 2
        q = alg.quiver
        self.values = {}
        for arrow_id, val in values.items():
            arrow = q.arrows[arrow_id]
            for b in val.terms:
                if (basis_tail(q, b) != arrow.tail_arc
                        or basis_head(q, b) != arrow.head_arc):
                    raise ValueError(
                        "value for %s has head/tail mismatch on %s"
                        % (arrow_id, render_basis(b)))
            self.values[arrow_id] = val

    def on_arrow(self, arrow_id) -> Element:
        return self.values.get(arrow_id, self.alg.zero())

    def __call__(self, b) -> Element:
        """Extend by the Leibniz rule to a basis element."""
        alg = self.alg
        q = alg.quiver
        if b[0] == "i":
            return alg.zero()
        _, m, s, l = b
        out = alg.zero()
        suffix_deg = 0
        for i in range(l):
            arrow = q.arrow(m, s + l - 1 - i)  # from the left end inwards
            dv = self.on_arrow(arrow.id)
            if dv:
                left = ("p", m, (s + l - i) % q.valence(m), i) if i else None
                right = ("p", m, s, l - 1 - i) if l - 1 - i else None
                term = dv
                if left is not None:
                    term = alg.basis(left) * term
                if right is not None:
                    term = term * alg.basis(right)
                sign = -1 if (self.parity and suffix_deg % 2) else 1
                out = out + term.scale(sign)
            suffix_deg += arrow.deg
        return out

    def apply(self, x: Element) -> Element:
        out = self.alg.zero()
        for b, c in x.terms.items():
            out = out + self(b).scale(c)
        return out

    def is_derivation(self, length_bound: int) -> bool:
        """Leibniz on composable pairs and vanishing on face relations."""
        alg = self.alg
        q = alg.quiver
        # Leibniz holds by construction on composable angle paths; the real
        # constraint is that face-relation products are still killed.
        for m in q.map.marked_points:
            v = q.valence(m)
            for s in range(v):
                for lx in range(1, length_bound + 1):
                    for ly in range(1, length_bound + 1):
                        x = ("p", m, (s + ly) % v, lx)
                        y = ("p", m, s, ly)
                        lhs = self(compose_basis(q, x, y))
                        sign = -1 if (self.parity and basis_parity(q, x) % 2) else 1
                        rhs = self(x) * alg.basis(y) + (alg.basis(x) * self(y)).scale(sign)
                        if lhs != rhs:
                            return False
        for a_id, arrow in q.arrows.items():
            for b_id, other in q.arrows.items():
                if arrow.tail_arc == other.head_arc and arrow.face == other.face:
                    # relation arrow.other = 0 must be preserved
                    x = alg.basis(("p", arrow.point, arrow.idx, 1))
                    y = alg.basis(("p", other.point, other.idx, 1))
                    sign = -1 if (self.parity and arrow.deg) else 1
                    img = self(("p", arrow.point, arrow.idx, 1)) * y \
                        + (x * self(("p", other.point, other.idx, 1))).scale(sign)
                    if img:
                        return False
        return True


def graded_commutator(alg: Algebra, x: Element, a: Element) -> Element:
    """[x, a] = x a - (-1)^{|x||a|} a x, per homogeneous components."""
    q = alg.quiver
    out = alg.zero()
    for bx, cx in x.terms.items():
        px = basis_parity(q, bx)
        for ba, ca in a.terms.items():
            sign = -1 if (px and basis_parity(q, ba)) else 1
            left = compose_basis(q, bx, ba)
            right = compose_basis(q, ba, bx)
            c = cx * ca
            if left is not None:
                out = out + alg.basis(left, c)
            if right is not None:
                out = out + alg.basis(right, c.scale(-sign))
    return out


class InnerDerivationSolver:
    """Finds x supported on paths of length <= bound (and idempotents) with
    [x, arrow] = D(arrow) for all arrows.  The commutator images are
    precomputed once so repeated queries stay cheap."""

    def __init__(self, alg: Algebra, bound: int):
        self.alg = alg
        self.bound = bound
        q = alg.quiver
        self.unknowns = [idem(a.id) for a in q.map.arcs]
        for m in q.map.marked_points:
            for s in range(q.valence(m)):
                for l in range(1, bound + 1):
                    self.unknowns.append(("p", m, s, l))
        self.columns = {}  # unknown -> {(arrow_id, out_basis): Fraction}
        for b in self.unknowns:
            col = {}
            xb = alg.basis(b)
            for arr in alg.arrow_elements():
                comm = graded_commutator(alg, xb, alg.basis(arr))
                for out_b, c in comm.terms.items():
                    col[(arr, out_b)] = c.constant_value()
            self.columns[b] = col

    def solve(self, targets: Dict[str, Element]) -> Optional[Element]:
        """targets maps arrow id -> required commutator value."""
        alg = self.alg
        q = alg.quiver
        eq_keys = set()
        for b in self.unknowns:
            eq_keys.update(self.columns[b])
        rhs = {}
        for arrow_id, val in targets.items():
            arr_basis = ("p", q.arrows[arrow_id].point, q.arrows[arrow_id].idx, 1)
            for out_b, c in val.terms.items():
                key = (arr_basis, out_b)
                if key not in eq_keys:
                    return None  # unreachable output
                rhs[key] = c.constant_value()
        rows = []
        for key in sorted(eq_keys, key=lambda k: (basis_sort_key(k[0]),
                                                  basis_sort_key(k[1]))):
            coeffs = {}
            for b in self.unknowns:
                v = self.columns[b].get(key)
                if v:
                    coeffs[b] = v
            rows.append((coeffs, rhs.get(key, Fraction(0))))
        sol = solve_sparse(rows)
        if sol is None:
            return None
        return alg.element(sol)


def inner_derivation_test(alg: Algebra, D: Derivation, length_bound: int):
    """Witness x with D(arrow) = [x, arrow] for all arrows, or None."""
    solver = InnerDerivationSolver(alg, length_bound)
    targets = {a: D.on_arrow(a) for a in alg.quiver.arrows}
    return solver.solve(targets)


# -- gradings --------------------------------------------------------------------

class GradingData:
    """Group grading by Z^{arrows} modulo face-boundary relations, with the
    natural boundary map pi and the full-turn map iota."""

    def __init__(self, quiver: Quiver):
        self.quiver = quiver
        self.arrow_ids = sorted(quiver.arrows)
        self.arrow_index = {a: i for i, a in enumerate(self.arrow_ids)}
        n = len(self.arrow_ids)
        faces = quiver.map.faces
        self.face_matrix = []
        for f in faces:
            row = [0] * n
            for a in quiver.face_corner_arrows[f.index]:
                row[self.arrow_index[a]] += 1
            self.face_matrix.append(row)
        self.span = IntRowSpan(self.face_matrix, ncols=n)
        arcs = sorted(a.id for a in quiver.map.arcs)
        arc_index = {a: i for i, a in enumerate(arcs)}
        self.arc_ids = arcs
        self.pi_matrix = []
        for a in self.arrow_ids:
            arrow = quiver.arrows[a]
            row = [0] * len(arcs)
            row[arc_index[arrow.head_arc]] += 1
            row[arc_index[arrow.tail_arc]] -= 1
            self.pi_matrix.append(row)
        points = sorted(quiver.map.marked_points)
        self.point_ids = points
        self.iota_matrix = []
        for m in points:
            row = [0] * n
            for arr in quiver.by_point[m]:
                row[self.arrow_index[arr.id]] += 1
            self.iota_matrix.append(row)

    def arrow_vector(self, b):
        vec = [0] * len(self.arrow_ids)
        if b[0] == "p":
            q = self.quiver
            _, m, s, l = b
            for i in range(l):
                vec[self.arrow_index[q.arrow(m, s + i).id]] += 1
        return vec

    def degree(self, b):
        """Canonical coset representative of the basis element's degree."""
        return self.span.coset_rep(self.arrow_vector(b))

    def element_degree(self, x: Element):
        """Common degree of a homogeneous element, or None if mixed/zero."""
        degs = {self.degree(b) for b in x.terms}
        if len(degs) == 1:
            return degs.pop()
        return None

    def degrees_equal(self, v1, v2):
        return self.span.contains([a - b for a, b in zip(v1, v2)])

    # -- structural checks -------------------------------------------------

    def pi_after_iota_is_zero(self):
        for row in self.iota_matrix:
            img = [0] * len(self.arc_ids)
            for j, mult in enumerate(row):
                if mult:
                    for k, v in enumerate(self.pi_matrix[j]):
                        img[k] += mult * v
            if any(img):
                return False
        return True

    def pi_image_corank(self):
        return len(self.arc_ids) - rational_rank(self.pi_matrix)

    def iota_kernel_is_diagonal(self):
        """True iff ker(iota) into the graded group is generated by (1,..,1)."""
        stacked = [list(r) for r in self.iota_matrix]
        stacked += [[-x for x in row] for row in self.face_matrix]
        kernel = int_left_kernel(stacked)
        npts = len(self.point_ids)
        vparts = [vec[:npts] for vec in kernel]
        vparts = [v for v in vparts if any(v)]
        if not vparts:
            return False
        coeffs = []
        for v in vparts:
            if len(set(v)) != 1:
                return False
            coeffs.append(abs(v[0]))
        g = 0
        for c in coeffs:
            while c:
                g, c = c, g % c
        return g == 1


def compute_z_lift(quiver: Quiver) -> Dict[str, int]:
    """Integer lift of the Z2 degrees: within each face the angles keep their
    parity degree except the last one, which absorbs (size - 2) minus the
    rest, so every face sums to its size minus two."""
    lift = {}
    for f in quiver.map.faces:
        arrows = quiver.face_corner_arrows[f.index]
        total = 0
        for a in arrows[:-1]:
            d = quiver.arrows[a].deg
            lift[a] = d
            total += d
        lift[arrows[-1]] = (f.size - 2) - total
    return lift


def ell_degree(quiver: Quiver, lift: Dict[str, int], m) -> int:
    return sum(lift[a.id] for a in quiver.by_point[m])
