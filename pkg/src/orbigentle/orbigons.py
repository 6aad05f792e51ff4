"""Orbigons: disc-shaped gluings of face instances with interior branch points.

An orbigon is stored as a gluing complex: a tuple of face instances plus an
involutive pairing of boundary-arc occurrences.  A pairing always joins the
two opposite sides of one arc, which makes the angle compositions at the two
ends of a glued arc automatic.  Spanning trees of the face graph (nodes =
instances, edges = gluings) correspond exactly to bracketed-sequence
presentations: walking the boundary of the tree-glued disc emits one angle
token per corner, a comma at every unglued occurrence and a bracket at every
non-tree crossing.  The canonical key is the least rendered token sequence
over all spanning trees and rotations, so keys agree exactly for orbigons
with the same labeled planar face graph.

Pattern entries are triples (point, start, length) describing angle paths,
listed in boundary-walk order; consecutive entries must satisfy the dart
continuity start(e_{i+1}) = other_end(end(e_i)).
"""
from __future__ import annotations

from collections import defaultdict, deque
from itertools import combinations
from typing import Dict, List, Optional, Tuple

from .surface import other_end
from .gentle import Quiver


class StructureError(ValueError):
    """The complex does not present a valid orbigon."""


Slot = Tuple[int, int]          # (instance, occurrence index)
Entry = Tuple[str, int, int]    # (point, start index, length)


class Orbigon:
    __slots__ = ("engine", "faces", "glue", "_key", "_reduced", "_type",
                 "_base_render")

    def __init__(self, engine, faces, glue):
        self.engine = engine
        self.faces = tuple(faces)
        self.glue = dict(glue)
        self._key = None
        self._reduced = None
        self._type = None
        self._base_render = None

    # -- basic geometry ------------------------------------------------------

    def size(self, inst):
        return self.engine.face_sizes[self.faces[inst]]

    def slot_dart(self, slot: Slot):
        inst, occ = slot
        return self.engine.face_darts[self.faces[inst]][occ]

    def corner_arrow(self, inst, ci):
        return self.engine.face_corners[self.faces[inst]][ci]

    def boundary_slots(self) -> List[Slot]:
        out = []
        for inst in range(len(self.faces)):
            for occ in range(self.size(inst)):
                if (inst, occ) not in self.glue:
                    out.append((inst, occ))
        return out

    def edges(self):
        return sorted({frozenset((s, p)) for s, p in self.glue.items()},
                      key=lambda e: sorted(e))

    @property
    def n_instances(self):
        return len(self.faces)

    @property
    def n_edges(self):
        return len(self.glue) // 2

    # -- walks and renders -----------------------------------------------------

    def _walk(self, tree_edges):
        total = sum(self.size(i) for i in range(len(self.faces)))
        tokens = []
        pos = (0, 0)
        visited = set()
        while True:
            inst, ci = pos
            if (inst, ci) in visited:
                raise StructureError("boundary walk revisits a corner")
            visited.add((inst, ci))
            tokens.append(("a", (inst, ci)))
            slot = (inst, (ci + 1) % self.size(inst))
            partner = self.glue.get(slot)
            if partner is not None:
                edge = frozenset((slot, partner))
                if edge in tree_edges:
                    pos = partner
                else:
                    tokens.append(("f", edge))
                    pos = (inst, slot[1])
            else:
                tokens.append((",", slot))
                pos = (inst, slot[1])
            if pos == (0, 0):
                break
        if len(visited) != total:
            raise StructureError("boundary walk misses corners")
        return tokens

    def _compose_run(self, arrow_ids) -> Entry:
        q = self.engine.quiver
        first = q.arrows[arrow_ids[0]]
        m, idx = first.point, first.idx
        v = q.valence(m)
        for step, aid in enumerate(arrow_ids[1:], start=1):
            arr = q.arrows[aid]
            if arr.point != m or arr.idx != (idx + step) % v:
                raise StructureError("corner run is not consecutive")
        return (m, idx, len(arrow_ids))

    def _render(self, tree_edges):
        """Return (token tuple, entries, fold types) for one spanning tree."""
        raw = self._walk(tree_edges)
        first_comma = next((i for i, t in enumerate(raw) if t[0] == ","), None)
        if first_comma is None:
            raise StructureError("orbigon has empty boundary")
        lin = raw[first_comma + 1:] + raw[:first_comma + 1]
        out = []
        stack = []       # [edge, direct corner ids]
        opened = set()
        entries = []
        current = []
        types = []
        for t in lin:
            kind = t[0]
            if kind == "a":
                inst, ci = t[1]
                aid = self.corner_arrow(inst, ci)
                out.append((3, aid))
                (stack[-1][1] if stack else current).append(aid)
            elif kind == ",":
                if stack:
                    raise StructureError("boundary occurrence inside a fold")
                out.append((0,))
                entries.append(self._compose_run(current))
                current = []
            else:
                edge = t[1]
                if stack and stack[-1][0] == edge:
                    _, corners = stack.pop()
                    out.append((2,))
                    m, s, length = self._compose_run(corners)
                    v = self.engine.quiver.valence(m)
                    if length % v:
                        raise StructureError("fold content is not a full turn")
                    types.append((m, length // v))
                elif edge in opened:
                    raise StructureError("fold crossings interleave")
                else:
                    opened.add(edge)
                    stack.append([edge, []])
                    out.append((1,))
        if stack:
            raise StructureError("unbalanced fold brackets")
        return tuple(out), tuple(entries), tuple(sorted(types))

    def _spanning_trees(self):
        edges = self.edges()
        need = len(self.faces) - 1
        if len(edges) == need:
            yield frozenset(edges)
            return
        for combo in combinations(edges, need):
            parent = list(range(len(self.faces)))

            def find(x):
                while parent[x] != x:
                    parent[x] = parent[parent[x]]
                    x = parent[x]
                return x

            ok = True
            for e in combo:
                (a, _), (b, _) = sorted(e)
                ra, rb = find(a), find(b)
                if ra == rb:
                    ok = False
                    break
                parent[ra] = rb
            if ok and len({find(i) for i in range(len(self.faces))}) == 1:
                yield frozenset(combo)

    def _base_tree(self):
        """Deterministic spanning tree picked greedily from sorted edges."""
        parent = list(range(len(self.faces)))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        tree = set()
        for e in self.edges():
            (a, _), (b, _) = sorted(e)
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[ra] = rb
                tree.add(e)
        return frozenset(tree)

    def _base(self):
        if self._base_render is None:
            self._base_render = self._render(self._base_tree())
        return self._base_render

    # -- canonical data ---------------------------------------------------------

    @staticmethod
    def _min_rotation(seq):
        n = len(seq)
        return min(tuple(seq[i:] + seq[:i]) for i in range(n)) if n else tuple(seq)

    @property
    def canonical_key(self):
        if self._key is None:
            best = None
            for tree in self._spanning_trees():
                tokens, _, types = self._render(tree)
                rot = self._min_rotation(list(tokens))
                if best is None or rot < best:
                    best = rot
            self._key = best
        return self._key

    @property
    def reduced_pattern(self) -> Tuple[Entry, ...]:
        if self._reduced is None:
            _, entries, types = self._base()
            self._reduced = self._min_rotation(list(entries))
            self._type = types
        return self._reduced

    @property
    def type(self) -> Tuple[Tuple[str, int], ...]:
        if self._type is None:
            _ = self.reduced_pattern
        return self._type

    def shift_orbit(self):
        """All rendered linear token sequences over spanning trees and starts."""
        orbit = set()
        for tree in self._spanning_trees():
            tokens, _, _ = self._render(tree)
            n = len(tokens)
            for i in range(n):
                orbit.add(tuple(tokens[i:] + tokens[:i]))
        return orbit

    def treegon_entry_count(self):
        """Entries of the underlying tree-gon (fold gluings cut open)."""
        tree = self._base_tree()
        glue = {s: p for s, p in self.glue.items()
                if frozenset((s, p)) in tree}
        opened = Orbigon(self.engine, self.faces, glue)
        _, entries, _ = opened._render(tree)
        return len(entries)

    def sigma(self):
        """Pairing of corner positions across glued arcs (tree-gons only).

        Returns the permutation as a list over corners in walk order; fixed
        points sit exactly at the boundary occurrences.
        """
        if self.type:
            raise ValueError("sigma is defined for tree-gons")
        sigma = {}
        pending = {}
        corner_pos = -1
        pos = (0, 0)
        for _ in range(sum(self.size(i) for i in range(len(self.faces)))):
            inst, ci = pos
            corner_pos += 1
            slot = (inst, (ci + 1) % self.size(inst))
            partner = self.glue.get(slot)
            if partner is None:
                sigma[corner_pos] = corner_pos
                pos = (inst, slot[1])
            else:
                edge = frozenset((slot, partner))
                if edge in pending:
                    j = pending.pop(edge)
                    sigma[corner_pos] = j
                    sigma[j] = corner_pos
                else:
                    pending[edge] = corner_pos
                pos = partner
        if pending:
            raise StructureError("unpaired crossing")
        return [sigma[i] for i in range(len(sigma))]

    def __repr__(self):
        return "<orbigon faces=%s type=%s reduced=%s>" % (
            [self.engine.quiver.map.faces[f].id for f in self.faces],
            list(self.type), list(self.reduced_pattern))


class OrbigonEngine:
    """Constructs, canonicalizes and enumerates orbigons over one quiver."""

    def __init__(self, quiver: Quiver):
        self.quiver = quiver
        cmap = quiver.map
        self.face_darts = [f.darts for f in cmap.faces]
        self.face_sizes = [f.size for f in cmap.faces]
        self.face_corners = [quiver.face_corner_arrows[f.index]
                             for f in cmap.faces]
        self.max_face_size = max(self.face_sizes)
        self._enum_memo: Dict[tuple, List[Orbigon]] = {}

    # -- constructors -----------------------------------------------------------

    def basic_treegons(self) -> List[Orbigon]:
        return [self.basic(i) for i in range(len(self.face_sizes))]

    def basic(self, face_idx) -> Orbigon:
        return Orbigon(self, (face_idx,), {})

    def stitch(self, x: Orbigon, y: Orbigon, sx: Slot, sy: Slot) -> Orbigon:
        if sx in x.glue or sy in y.glue:
            raise ValueError("stitch slot already glued")
        dx = x.slot_dart(sx)
        dy = y.slot_dart(sy)
        if dy != other_end(dx):
            raise ValueError("stitch needs the two sides of one arc")
        if len(x.boundary_slots()) + len(y.boundary_slots()) <= 2:
            raise ValueError("stitch would close the surface")
        off = len(x.faces)
        glue = dict(x.glue)
        for s, p in y.glue.items():
            glue[(s[0] + off, s[1])] = (p[0] + off, p[1])
        sy_off = (sy[0] + off, sy[1])
        glue[sx] = sy_off
        glue[sy_off] = sx
        out = Orbigon(self, x.faces + y.faces, glue)
        out._base()  # validates existing folds
        return out

    def fold(self, x: Orbigon, s1: Slot, s2: Slot) -> Orbigon:
        if s1 == s2:
            raise ValueError("fold needs two distinct occurrences")
        if s1 in x.glue or s2 in x.glue:
            raise ValueError("fold slot already glued")
        d1 = x.slot_dart(s1)
        d2 = x.slot_dart(s2)
        if d2 != other_end(d1):
            raise ValueError("fold needs the two sides of one arc")
        glue = dict(x.glue)
        glue[s1] = s2
        glue[s2] = s1
        out = Orbigon(self, x.faces, glue)
        # validate against a spanning tree avoiding the new edge
        old = Orbigon(self, x.faces, x.glue)
        tree = old._base_tree()
        try:
            out._render(tree)
        except StructureError as exc:
            raise ValueError("invalid fold: %s" % exc)
        return out

    def unstitch(self, x: Orbigon, edge) -> Tuple[Orbigon, Orbigon]:
        """Cut a bridge gluing; returns the two halves (Remark-style re-cut)."""
        slots = sorted(edge)
        glue = {s: p for s, p in x.glue.items()
                if frozenset((s, p)) != edge}
        adj = defaultdict(set)
        for s, p in glue.items():
            adj[s[0]].add(p[0])
        comp = {0}
        stack = [0]
        while stack:
            for nxt in adj[stack.pop()]:
                if nxt not in comp:
                    comp.add(nxt)
                    stack.append(nxt)
        if len(comp) == len(x.faces):
            raise ValueError("edge is not a bridge")
        rest = set(range(len(x.faces))) - comp
        halves = []
        for group in (sorted(comp), sorted(rest)):
            rn = {old: new for new, old in enumerate(group)}
            faces = tuple(x.faces[i] for i in group)
            sub = {(rn[s[0]], s[1]): (rn[p[0]], p[1])
                   for s, p in glue.items() if s[0] in rn and p[0] in rn}
            halves.append(Orbigon(self, faces, sub))
        return halves[0], halves[1]

    # -- pattern helpers ---------------------------------------------------------

    def entry_start_dart(self, e: Entry):
        m, s, _ = e
        rot = self.quiver.map.rotation[m]
        return rot[s % len(rot)]

    def entry_end_dart(self, e: Entry):
        m, s, l = e
        rot = self.quiver.map.rotation[m]
        return rot[(s + l) % len(rot)]

    def pattern_is_cyclic(self, pattern) -> bool:
        if not pattern:
            return False
        for i, e in enumerate(pattern):
            nxt = pattern[(i + 1) % len(pattern)]
            if any(l < 1 for (_, _, l) in (e,)):
                return False
            if self.entry_start_dart(nxt) != other_end(self.entry_end_dart(e)):
                return False
        return True

    @staticmethod
    def canon_pattern(pattern):
        pattern = list(pattern)
        n = len(pattern)
        return min(tuple(pattern[i:] + pattern[:i]) for i in range(n))

    @staticmethod
    def pattern_corners(pattern):
        return sum(l for (_, _, l) in pattern)

    def alignment_count(self, orbigon: Orbigon, linear) -> int:
        red = list(orbigon.reduced_pattern)
        n = len(red)
        if n != len(linear):
            return 0
        linear = tuple(linear)
        return sum(1 for i in range(n)
                   if tuple(red[i:] + red[:i]) == linear)

    # -- enumeration ---------------------------------------------------------------

    def enumerate_matching(self, pattern, max_type_order,
                           max_faces=None, allowed_points=None):
        """All orbigon classes with the given reduced sequence and at most
        max_type_order branch points.

        Folding is unbounded in general, so at least one of max_faces or
        allowed_points (the set of admissible (point, winding) pairs) must be
        supplied whenever max_type_order > 0.
        """
        if max_type_order > 0 and max_faces is None and allowed_points is None:
            raise ValueError("unbounded enumeration: pass max_faces "
                             "or allowed_points")
        pattern = tuple((m, s % self.quiver.valence(m), l)
                        for (m, s, l) in pattern)
        if not self.pattern_is_cyclic(pattern):
            return []
        canon = self.canon_pattern(pattern)
        allowed = None if allowed_points is None else frozenset(allowed_points)
        memo_key = (canon, max_type_order, max_faces, allowed)
        hit = self._enum_memo.get(memo_key)
        if hit is not None:
            return hit
        self._enum_memo[memo_key] = []  # cut accidental cycles
        results: Dict[tuple, Orbigon] = {}

        def add(o: Orbigon):
            if len(o.type) > max_type_order:
                return
            if max_faces is not None and len(o.faces) > max_faces:
                return
            if allowed is not None and any(p not in allowed for p in o.type):
                return
            if self.canon_pattern(list(o.reduced_pattern)) != canon:
                return
            results.setdefault(o.canonical_key, o)

        k = len(canon)
        # base: one face, every entry a single corner
        if all(l == 1 for (_, _, l) in canon):
            arrows = tuple(self.quiver.arrow(m, s).id for (m, s, _) in canon)
            want = Orbigon._min_rotation(list(arrows))
            for fi, corners in enumerate(self.face_corners):
                if len(corners) == k and \
                        Orbigon._min_rotation(list(corners)) == want:
                    add(self.basic(fi))
        # first interior cut
        i0 = next((i for i, (_, _, l) in enumerate(canon) if l > 1), None)
        if i0 is None:
            out = sorted(results.values(), key=lambda o: o.canonical_key)
            self._enum_memo[memo_key] = out
            return out
        m_i, s_i, l_i = canon[i0]
        v_i = self.quiver.valence(m_i)
        cut_dart = self.quiver.map.rotation[m_i][(s_i + 1) % v_i]
        opp = other_end(cut_dart)
        a_piece = (m_i, s_i, 1)
        b_piece = (m_i, (s_i + 1) % v_i, l_i - 1)

        # branch A: undo a stitch at the cut; partner cut must sit on the
        # opposite side of the same arc
        for j, (m_j, s_j, l_j) in enumerate(canon):
            v_j = self.quiver.valence(m_j)
            for c2 in range(1, l_j):
                if j == i0 and c2 == 1:
                    continue
                if self.quiver.map.rotation[m_j][(s_j + c2) % v_j] != opp:
                    continue
                if j == i0:
                    if c2 < 2:
                        continue
                    part1 = ((m_i, (s_i + 1) % v_i, c2 - 1),)
                    part2 = ((m_j, (s_j + c2) % v_j, l_j - c2),) \
                        + tuple(canon[i0 + 1:] + canon[:i0]) + (a_piece,)
                else:
                    between_fwd = [canon[(i0 + 1 + t) % k]
                                   for t in range((j - i0 - 1) % k)]
                    between_bwd = [canon[(j + 1 + t) % k]
                                   for t in range((i0 - j - 1) % k)]
                    part1 = (b_piece,) + tuple(between_fwd) + ((m_j, s_j, c2),)
                    part2 = ((m_j, (s_j + c2) % v_j, l_j - c2),) \
                        + tuple(between_bwd) + (a_piece,)
                for o1 in self.enumerate_matching(part1, max_type_order,
                                                  max_faces, allowed):
                    for o2 in self.enumerate_matching(part2, max_type_order,
                                                      max_faces, allowed):
                        if len(o1.type) + len(o2.type) > max_type_order:
                            continue
                        if max_faces is not None and \
                                len(o1.faces) + len(o2.faces) > max_faces:
                            continue
                        for b1 in o1.boundary_slots():
                            if o1.slot_dart(b1) != opp:
                                continue
                            for b2 in o2.boundary_slots():
                                if o2.slot_dart(b2) != cut_dart:
                                    continue
                                try:
                                    add(self.stitch(o1, o2, b1, b2))
                                except ValueError:
                                    pass

        # branch B: undo a fold at the cut; the inserted entry is a full turn
        # around the marked point on the far side of the cut arc
        m_w = self.quiver.map.point_of_dart[opp]
        v_w = self.quiver.valence(m_w)
        w_start = self.quiver.map.rotation[m_w].index(opp)
        if max_type_order >= 1:
            if allowed is not None:
                windings = sorted(r for (p, r) in allowed if p == m_w)
            else:
                budget = max_faces * self.max_face_size \
                    - self.pattern_corners(canon)
                windings = range(1, budget // v_w + 1)
            for r in windings:
                w_entry = (m_w, w_start, r * v_w)
                inner = canon[:i0] + (a_piece, w_entry, b_piece) \
                    + canon[i0 + 1:]
                for o in self.enumerate_matching(inner, max_type_order - 1,
                                                 max_faces, allowed):
                    slots_a = [s for s in o.boundary_slots()
                               if o.slot_dart(s) == cut_dart]
                    slots_b = [s for s in o.boundary_slots()
                               if o.slot_dart(s) == opp]
                    for sa in slots_a:
                        for sb in slots_b:
                            try:
                                add(self.fold(o, sa, sb))
                            except ValueError:
                                pass

        out = sorted(results.values(), key=lambda o: o.canonical_key)
        self._enum_memo[memo_key] = out
        return out

    # -- forward oracle ---------------------------------------------------------

    def oracle_closure(self, max_faces, max_type_order):
        """Exhaustive forward closure under stitching and folding.

        Returns {canonical key -> orbigon} for every class reachable within
        the face and branch-point budgets.
        """
        known: Dict[tuple, Orbigon] = {}
        by_count = defaultdict(list)
        agenda = deque()

        def add(o: Orbigon) -> bool:
            if len(o.faces) > max_faces or len(o.type) > max_type_order:
                return False
            key = o.canonical_key
            if key in known:
                return False
            known[key] = o
            by_count[len(o.faces)].append(o)
            agenda.append(o)
            return True

        for fi in range(len(self.face_sizes)):
            add(self.basic(fi))
        while agenda:
            x = agenda.popleft()
            # folds
            if len(x.type) < max_type_order:
                slots = x.boundary_slots()
                for i, s1 in enumerate(slots):
                    d1 = x.slot_dart(s1)
                    for s2 in slots[i + 1:]:
                        if x.slot_dart(s2) != other_end(d1):
                            continue
                        try:
                            add(self.fold(x, s1, s2))
                        except ValueError:
                            pass
            # stitches with everything known so far (including itself)
            budget = max_faces - len(x.faces)
            for ny in range(1, budget + 1):
                for y in list(by_count[ny]):
                    for sx in x.boundary_slots():
                        want = other_end(x.slot_dart(sx))
                        for sy in y.boundary_slots():
                            if y.slot_dart(sy) != want:
                                continue
                            try:
                                add(self.stitch(x, y, sx, sy))
                            except ValueError:
                                pass
        return known

    @staticmethod
    def census(known) -> Dict[tuple, List[tuple]]:
        """Group a closure by (reduced pattern, type) into key lists."""
        grouped = defaultdict(list)
        for key, o in known.items():
            grouped[(OrbigonEngine.canon_pattern(list(o.reduced_pattern)),
                     o.type)].append(key)
        return {k: sorted(v) for k, v in grouped.items()}
