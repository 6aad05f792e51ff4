"""Combinatorial maps of arc collections on closed marked surfaces.

A surface is never stored directly: a rotation system (anticlockwise cyclic
order of arc ends around every marked point) determines a unique closed
oriented surface, so faces and genus are derived.  Darts are arc ends,
encoded as (arc_id, "tail"|"head").
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

Dart = Tuple[str, str]

TAIL = "tail"
HEAD = "head"


class MapValidationError(ValueError):
    """Surface file failed validation; `code` names the failed check."""

    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def other_end(dart: Dart) -> Dart:
    arc, end = dart
    return (arc, HEAD if end == TAIL else TAIL)


def dart_token(dart: Dart) -> str:
    return "%s.%s" % dart


def parse_dart(token: str) -> Dart:
    arc, dot, end = token.rpartition(".")
    if not dot or end not in (TAIL, HEAD):
        raise MapValidationError("rotation-bad-token",
                                 "malformed arc end %r" % token)
    return (arc, end)


@dataclass(frozen=True)
class Arc:
    id: str
    tail: str
    head: str


@dataclass(frozen=True)
class Corner:
    point: str
    in_end: Dart
    out_end: Dart


@dataclass(frozen=True)
class Face:
    index: int
    darts: Tuple[Dart, ...]
    corners: Tuple[Corner, ...]

    @property
    def size(self):
        return len(self.darts)

    @property
    def id(self):
        return "f%d" % self.index


@dataclass(frozen=True)
class SurfaceReport:
    genus: int
    n_points: int
    n_arcs: int
    n_faces: int
    euler_char_marked: int   # 2 - 2g - n
    nmd: bool
    nl2: bool
    dimer: bool
    face_signs: Optional[Tuple[str, ...]]  # "+"/"-" per face when dimer


class CombinatorialMap:
    """Validated rotation system with derived faces and genus."""

    def __init__(self, marked_points, arcs, rotation):
        self.marked_points: Tuple[str, ...] = tuple(marked_points)
        self.arcs: Tuple[Arc, ...] = tuple(arcs)
        self.arc_by_id: Dict[str, Arc] = {a.id: a for a in self.arcs}
        self.rotation: Dict[str, Tuple[Dart, ...]] = {
            m: tuple(ends) for m, ends in rotation.items()}
        self._validate()
        self.point_of_dart: Dict[Dart, str] = {}
        self.sigma: Dict[Dart, Dart] = {}
        self.dart_pos: Dict[Dart, Tuple[str, int]] = {}
        for m, cyc in self.rotation.items():
            k = len(cyc)
            for i, d in enumerate(cyc):
                self.point_of_dart[d] = m
                self.sigma[d] = cyc[(i + 1) % k]
                self.dart_pos[d] = (m, i)
        self.faces: Tuple[Face, ...] = self._trace_faces()
        self.face_of_dart: Dict[Dart, int] = {}
        for f in self.faces:
            for d in f.darts:
                self.face_of_dart[d] = f.index
        chi = len(self.marked_points) - len(self.arcs) + len(self.faces)
        if chi % 2:
            raise MapValidationError("genus-constraint",
                                     "odd Euler characteristic %d" % chi)
        self.genus = (2 - chi) // 2
        self.euler_char_marked = 2 - 2 * self.genus - len(self.marked_points)
        if self.euler_char_marked >= 0:
            raise MapValidationError(
                "genus-constraint",
                "need 2 - 2g - n < 0, got %d (g=%d, n=%d)"
                % (self.euler_char_marked, self.genus, len(self.marked_points)))

    # -- validation ---------------------------------------------------------

    def _validate(self):
        seen = set()
        for m in self.marked_points:
            if m in seen:
                raise MapValidationError("duplicate-id",
                                         "duplicate marked point %r" % m)
            seen.add(m)
        seen = set()
        for a in self.arcs:
            if a.id in seen:
                raise MapValidationError("duplicate-id",
                                         "duplicate arc id %r" % a.id)
            seen.add(a.id)
        points = set(self.marked_points)
        for a in self.arcs:
            for endpoint, end in ((a.tail, TAIL), (a.head, HEAD)):
                if endpoint not in points:
                    raise MapValidationError(
                        "dangling-arc-end",
                        "arc end %s attached to unknown point %r"
                        % (dart_token((a.id, end)), endpoint))
        expected: Dict[Dart, str] = {}
        for a in self.arcs:
            expected[(a.id, TAIL)] = a.tail
            expected[(a.id, HEAD)] = a.head
        placed = {}
        for m, cyc in self.rotation.items():
            if m not in points:
                raise MapValidationError("rotation-unknown-point",
                                         "rotation at unknown point %r" % m)
            for d in cyc:
                if d not in expected:
                    raise MapValidationError(
                        "dangling-arc-end",
                        "rotation mentions unknown arc end %s" % dart_token(d))
                if expected[d] != m:
                    raise MapValidationError(
                        "rotation-misplaced-end",
                        "arc end %s listed at %r but belongs to %r"
                        % (dart_token(d), m, expected[d]))
                if d in placed:
                    raise MapValidationError(
                        "rotation-duplicate-end",
                        "arc end %s appears twice" % dart_token(d))
                placed[d] = m
        for d, m in expected.items():
            if d not in placed:
                raise MapValidationError(
                    "rotation-missing-end",
                    "rotation at %r is missing arc end %s" % (m, dart_token(d)))
        for m in self.marked_points:
            if m not in self.rotation:
                self.rotation[m] = ()
        # connectivity of the underlying graph
        if not self.arcs:
            raise MapValidationError("disconnected", "no arcs")
        adj: Dict[str, set] = {m: set() for m in self.marked_points}
        for a in self.arcs:
            adj[a.tail].add(a.head)
            adj[a.head].add(a.tail)
        stack = [self.marked_points[0]]
        seen = {self.marked_points[0]}
        while stack:
            for nxt in adj[stack.pop()]:
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        if len(seen) != len(self.marked_points):
            missing = sorted(set(self.marked_points) - seen)
            raise MapValidationError(
                "disconnected",
                "marked points %s unreachable" % ", ".join(missing))

    # -- face tracing -------------------------------------------------------

    def iota(self, dart: Dart) -> Dart:
        return other_end(dart)

    def phi(self, dart: Dart) -> Dart:
        # next dart anticlockwise around the face to the left of `dart`
        return self.sigma[other_end(dart)]

    def _trace_faces(self):
        faces = []
        unused = set(self.sigma)
        while unused:
            start = min(unused, key=dart_token)
            orbit = []
            d = start
            while True:
                orbit.append(d)
                unused.discard(d)
                d = self.phi(d)
                if d == start:
                    break
            corners = []
            k = len(orbit)
            for i, di in enumerate(orbit):
                inc = other_end(di)
                out = orbit[(i + 1) % k]
                corners.append(Corner(self.point_of_dart[inc], inc, out))
            faces.append(Face(len(faces), tuple(orbit), tuple(corners)))
        return tuple(faces)

    def valence(self, m):
        return len(self.rotation[m])

    def arc(self, arc_id) -> Arc:
        return self.arc_by_id[arc_id]


# -- file format -------------------------------------------------------------

def parse_surface(text: str) -> CombinatorialMap:
    """Parse and validate a surface file (UTF-8 JSON)."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MapValidationError("bad-json", "invalid JSON: %s" % exc)
    for key in ("marked_points", "arcs", "rotation"):
        if key not in data:
            raise MapValidationError("bad-json", "missing key %r" % key)
    arcs = []
    for entry in data["arcs"]:
        try:
            arcs.append(Arc(entry["id"], entry["tail"], entry["head"]))
        except (TypeError, KeyError):
            raise MapValidationError("bad-json", "malformed arc entry %r" % (entry,))
    rotation = {m: tuple(parse_dart(tok) for tok in ends)
                for m, ends in data["rotation"].items()}
    return CombinatorialMap(data["marked_points"], arcs, rotation)


def load_surface(path) -> CombinatorialMap:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_surface(fh.read())


def surface_to_json(cmap: CombinatorialMap) -> str:
    data = {
        "marked_points": list(cmap.marked_points),
        "arcs": [{"id": a.id, "tail": a.tail, "head": a.head}
                 for a in cmap.arcs],
        "rotation": {m: [dart_token(d) for d in cmap.rotation[m]]
                     for m in cmap.marked_points},
    }
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


# -- reports and predicates ---------------------------------------------------

def trace_faces(cmap: CombinatorialMap) -> List[Face]:
    return list(cmap.faces)


def check_condition(cmap: CombinatorialMap, which: str):
    """Check NMD / NL2 / dimer; returns (bool, witness or None)."""
    if which == "NMD":
        for f in cmap.faces:
            if f.size < 3:
                return False, {"face": f.id, "size": f.size,
                               "arcs": sorted({d[0] for d in f.darts})}
        return True, None
    if which == "NL2":
        for a in cmap.arcs:
            if a.tail == a.head:
                return False, {"loop": a.id}
        ends: Dict[frozenset, str] = {}
        for a in cmap.arcs:
            key = frozenset((a.tail, a.head))
            if key in ends:
                return False, {"pair": sorted((ends[key], a.id))}
            ends[key] = a.id
        return True, None
    if which == "dimer":
        signs = []
        for f in cmap.faces:
            kinds = {d[1] for d in f.darts}
            if len(kinds) != 1:
                return False, {"face": f.id}
            signs.append("+" if kinds == {TAIL} else "-")
        return True, {"signs": tuple(signs)}
    raise ValueError("unknown condition %r" % which)


def topology(cmap: CombinatorialMap) -> SurfaceReport:
    nmd, _ = check_condition(cmap, "NMD")
    nl2, _ = check_condition(cmap, "NL2")
    dim, wit = check_condition(cmap, "dimer")
    return SurfaceReport(
        genus=cmap.genus,
        n_points=len(cmap.marked_points),
        n_arcs=len(cmap.arcs),
        n_faces=len(cmap.faces),
        euler_char_marked=cmap.euler_char_marked,
        nmd=nmd,
        nl2=nl2,
        dimer=dim,
        face_signs=wit["signs"] if dim else None,
    )


# -- duality ------------------------------------------------------------------

def dual_collection(cmap: CombinatorialMap) -> CombinatorialMap:
    """Dual arc collection: marked points become the faces of the input.

    The dual of arc `a` keeps the id `a`; it runs from the face right of `a`
    to the face left of `a`.  The rotation around a face point is the traced
    boundary order of that face.
    """
    points = [f.id for f in cmap.faces]
    left = {}    # arc id -> face left of the arc
    right = {}
    for a in cmap.arcs:
        left[a.id] = cmap.faces[cmap.face_of_dart[(a.id, TAIL)]].id
        right[a.id] = cmap.faces[cmap.face_of_dart[(a.id, HEAD)]].id
    arcs = [Arc(a.id, right[a.id], left[a.id]) for a in cmap.arcs]
    rotation = {}
    for f in cmap.faces:
        ends = []
        for d in f.darts:
            arc_id, end = d
            # crossing dart d lands the dual arc's head in the left face
            ends.append((arc_id, HEAD if end == TAIL else TAIL))
        rotation[f.id] = tuple(ends)
    return CombinatorialMap(points, arcs, rotation)


def double_dual_point_map(cmap: CombinatorialMap,
                          ddual: CombinatorialMap) -> Dict[str, str]:
    """Canonical relabeling: points of dual(dual(cmap)) -> points of cmap."""
    relabel = {}
    for m2 in ddual.marked_points:
        cyc = ddual.rotation[m2]
        originals = {cmap.point_of_dart[d] for d in cyc}
        if len(originals) != 1:
            raise ValueError("double dual point %r is not canonical" % m2)
        relabel[m2] = originals.pop()
    return relabel


def maps_equal_up_to_rotation_start(a: CombinatorialMap,
                                    b: CombinatorialMap,
                                    point_map=None) -> bool:
    """Equality of rotation systems modulo cyclic starts (and a point renaming)."""
    if point_map is None:
        point_map = {m: m for m in a.marked_points}
    if sorted(point_map.values()) != sorted(b.marked_points):
        return False
    arcs_a = {(x.id, point_map[x.tail], point_map[x.head]) for x in a.arcs}
    arcs_b = {(x.id, x.tail, x.head) for x in b.arcs}
    if arcs_a != arcs_b:
        return False
    for m in a.marked_points:
        ca = a.rotation[m]
        cb = b.rotation[point_map[m]]
        if len(ca) != len(cb):
            return False
        if not ca:
            continue
        n = len(ca)
        if not any(tuple(cb[(i + s) % n] for i in range(n)) == ca
                   for s in range(n)):
            return False
    return True
