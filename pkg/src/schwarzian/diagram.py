"""Chord diagrams on the circle and on an interval, and their face decompositions.

A set of non-crossing chords cuts the disk (or the upper half plane over an
interval) into N + 1 faces.  Each face carries a Fourier variable; the exact
formulas need, for every face, the total length of boundary arcs it owns and,
for every chord, the two faces on either side of it.  The faces form a
nesting forest rooted at the face that contains the basepoint (circle) or the
unbounded face (interval).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

__all__ = [
    "ENDPOINT_TOL",
    "DiagramError",
    "InterlacedError",
    "Chord",
    "CircleDiagram",
    "IntervalDiagram",
    "Face",
    "FaceDecomposition",
    "check_non_interlaced",
    "decompose_circle",
    "decompose_interval",
    "cut_circle_at",
    "face_of_point",
]

ENDPOINT_TOL = 1e-12


class DiagramError(ValueError):
    """Malformed chord or diagram."""


class InterlacedError(DiagramError):
    """Two chords cross in the interior of the disk."""

    def __init__(self, i: int, j: int, ci: "Chord", cj: "Chord"):
        self.pair = (i, j)
        super().__init__(
            f"chords {i} ({ci.s:g}, {ci.t:g}) and {j} ({cj.s:g}, {cj.t:g}) are interlaced"
        )


@dataclass(frozen=True)
class Chord:
    """Observable endpoints s, t with integer power l."""

    s: float
    t: float
    l: int = 1

    def __post_init__(self):
        if int(self.l) != self.l or self.l < 1:
            raise DiagramError(f"chord power must be a positive integer, got {self.l}")


def _same(x: float, y: float) -> bool:
    return abs(x - y) <= ENDPOINT_TOL


def _validate(chords: Sequence[Chord], geometry: str, T: float = 1.0) -> None:
    for idx, c in enumerate(chords):
        if geometry == "circle":
            if not (-ENDPOINT_TOL <= c.s < 1.0 + ENDPOINT_TOL) or not (
                -ENDPOINT_TOL <= c.t < 1.0 + ENDPOINT_TOL
            ):
                raise DiagramError(f"chord {idx}: endpoints must lie in [0, 1)")
            if _same(c.s, c.t) or _same(abs(c.s - c.t), 1.0):
                raise DiagramError(f"chord {idx}: s and t coincide")
        elif geometry == "interval":
            if c.s < -ENDPOINT_TOL or c.t > T + ENDPOINT_TOL:
                raise DiagramError(f"chord {idx}: endpoints must lie in [0, T]")
            if c.t - c.s <= ENDPOINT_TOL:
                raise DiagramError(f"chord {idx}: need s < t on the interval")
        else:
            raise DiagramError(f"unknown geometry {geometry!r}")


def _strictly_inside_arc(x: float, a: float, b: float) -> bool:
    """x in the open counterclockwise arc from a to b (positions mod 1)."""
    if _same(x % 1.0, a % 1.0) or _same(x % 1.0, b % 1.0):
        return False
    return ((x - a) % 1.0) < ((b - a) % 1.0)


def _pair_interlaced(c1: Chord, c2: Chord, geometry: str) -> bool:
    if geometry == "circle":
        shared = any(_same(p % 1.0, q % 1.0) for p in (c1.s, c1.t) for q in (c2.s, c2.t))
        if shared:
            return False
        return _strictly_inside_arc(c2.s, c1.s, c1.t) != _strictly_inside_arc(
            c2.t, c1.s, c1.t
        )
    a, b = sorted((c1.s, c1.t))
    c, d = sorted((c2.s, c2.t))
    if a > c or (_same(a, c) and b < d):
        a, b, c, d = c, d, a, b
    # a <= c now; crossing means a < c < b < d strictly.
    return (c - a > ENDPOINT_TOL) and (b - c > ENDPOINT_TOL) and (d - b > ENDPOINT_TOL)


def check_non_interlaced(chords: Sequence[Chord], geometry: str = "circle", T: float = 1.0) -> bool:
    """True iff no two chords cross.  Shared endpoints are not crossings."""
    _validate(chords, geometry, T)
    for (i, c1), (j, c2) in itertools.combinations(enumerate(chords), 2):
        if _pair_interlaced(c1, c2, geometry):
            return False
    return True


def _first_interlaced_pair(chords, geometry):
    for (i, c1), (j, c2) in itertools.combinations(enumerate(chords), 2):
        if _pair_interlaced(c1, c2, geometry):
            return i, j
    return None


@dataclass(frozen=True)
class CircleDiagram:
    """Non-interlaced chords on the unit circle, positions in [0, 1)."""

    chords: tuple[Chord, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "chords", tuple(self.chords))
        _validate(self.chords, "circle")
        bad = _first_interlaced_pair(self.chords, "circle")
        if bad is not None:
            i, j = bad
            raise InterlacedError(i, j, self.chords[i], self.chords[j])

    @property
    def n_chords(self) -> int:
        return len(self.chords)

    def rotated(self, shift: float) -> "CircleDiagram":
        return CircleDiagram(
            tuple(Chord((c.s + shift) % 1.0, (c.t + shift) % 1.0, c.l) for c in self.chords)
        )


@dataclass(frozen=True)
class IntervalDiagram:
    """Laminar chords on [0, T] with endpoint datum a for the bridge."""

    T: float = 1.0
    a: complex = 0.0
    chords: tuple[Chord, ...] = ()

    def __post_init__(self):
        if not self.T > 0:
            raise DiagramError("T must be positive")
        object.__setattr__(self, "chords", tuple(self.chords))
        _validate(self.chords, "interval", self.T)
        bad = _first_interlaced_pair(self.chords, "interval")
        if bad is not None:
            i, j = bad
            raise InterlacedError(i, j, self.chords[i], self.chords[j])

    @property
    def n_chords(self) -> int:
        return len(self.chords)


@dataclass(frozen=True)
class Face:
    """One face: id, boundary arc length tau, parent id and its boundary arcs.

    Arcs are (start, end) pairs with end - start the arc length.  On the
    circle start lies in [0, 1) and end may exceed 1 when the arc wraps.
    """

    id: int
    tau: float
    parent: int | None
    arcs: tuple[tuple[float, float], ...] = ()


@dataclass(frozen=True)
class FaceDecomposition:
    """Faces, per-chord adjacency (parent face, child face) and the root id.

    Face 0 is the root.  Face j + 1 is the face enclosed by chord j (its
    child side), so chord j is adjacent to (parent(j + 1), j + 1).
    """

    faces: tuple[Face, ...]
    chord_adjacency: tuple[tuple[int, int], ...]
    root_face: int = 0
    powers: tuple[int, ...] = ()
    total_length: float = 1.0

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    @property
    def taus(self) -> list[float]:
        return [f.tau for f in self.faces]

    def children(self, m: int) -> list[tuple[int, int]]:
        """(chord index, child face) pairs hanging below face m."""
        return [(j, c) for j, (p, c) in enumerate(self.chord_adjacency) if p == m]

    def postorder(self) -> list[int]:
        order: list[int] = []

        def visit(m: int) -> None:
            for _, c in self.children(m):
                visit(c)
            order.append(m)

        visit(self.root_face)
        return order

    def shape_signature(self):
        """Rotation-invariant description: nested (tau, power, children) tuples."""

        def sig(m: int, power: int):
            kids = sorted(sig(c, self.powers[j]) for j, c in self.children(m))
            return (round(self.faces[m].tau, 10), power, tuple(kids))

        return sig(self.root_face, 0)


def _laminar_forest(intervals: Sequence[tuple[float, float]]) -> list[int | None]:
    """Parent chord index (or None) for each interval of a laminar family.

    Ties: equal left endpoints nest by right endpoint with the longer one as
    parent; identical intervals nest in input order.
    """
    order = sorted(range(len(intervals)), key=lambda i: (intervals[i][0], -intervals[i][1], i))
    parent: list[int | None] = [None] * len(intervals)
    stack: list[int] = []
    for i in order:
        s, t = intervals[i]
        while stack and intervals[stack[-1]][1] <= s + ENDPOINT_TOL:
            stack.pop()
        if stack:
            ps, pt = intervals[stack[-1]]
            if t > pt + ENDPOINT_TOL:
                raise InterlacedError(stack[-1], i, Chord(ps, pt), Chord(s, t))
            parent[i] = stack[-1]
        stack.append(i)
    return parent


def _subtract_segments(lo: float, hi: float, holes: Iterable[tuple[float, float]]):
    arcs = []
    cur = lo
    for s, t in sorted(holes):
        if s - cur > ENDPOINT_TOL:
            arcs.append((cur, s))
        cur = max(cur, t)
    if hi - cur > ENDPOINT_TOL:
        arcs.append((cur, hi))
    return arcs


def _decompose_segments(intervals, powers, total: float, offset: float = 0.0, wrap: bool = False):
    parent = _laminar_forest(intervals)
    n = len(intervals)
    kids: dict[int | None, list[int]] = {None: []}
    for j in range(n):
        kids.setdefault(j, [])
    for j, p in enumerate(parent):
        kids[p].append(j)

    def shift(arcs):
        if not wrap:
            return tuple(arcs)
        return tuple(((a + offset) % 1.0, (a + offset) % 1.0 + (b - a)) for a, b in arcs)

    faces = []
    top_spans = [intervals[j] for j in kids[None]]
    root_tau = total - sum(t - s for s, t in top_spans)
    faces.append(Face(0, max(root_tau, 0.0), None, shift(_subtract_segments(0.0, total, top_spans))))
    for j in range(n):
        s, t = intervals[j]
        child_spans = [intervals[c] for c in kids[j]]
        tau = (t - s) - sum(b - a for a, b in child_spans)
        pf = 0 if parent[j] is None else parent[j] + 1
        faces.append(Face(j + 1, max(tau, 0.0), pf, shift(_subtract_segments(s, t, child_spans))))
    adjacency = tuple(
        (0 if parent[j] is None else parent[j] + 1, j + 1) for j in range(n)
    )
    return FaceDecomposition(tuple(faces), adjacency, 0, tuple(powers), total)


def decompose_interval(d: IntervalDiagram) -> FaceDecomposition:
    """Faces of an interval diagram; face 0 is the unbounded face."""
    intervals = [(c.s, c.t) for c in d.chords]
    return _decompose_segments(intervals, [c.l for c in d.chords], d.T)


def _basepoint(chords: Sequence[Chord]) -> float:
    """Midpoint of the widest gap between consecutive endpoints."""
    pts = sorted({round(p % 1.0, 15) for c in chords for p in (c.s, c.t)})
    if not pts:
        return 0.0
    best, base = -1.0, 0.0
    for i, p in enumerate(pts):
        q = pts[(i + 1) % len(pts)]
        gap = (q - p) % 1.0 if len(pts) > 1 else 1.0
        if gap > best:
            best, base = gap, (p + gap / 2.0) % 1.0
    return base


def _rotate_to(chords: Sequence[Chord], base: float):
    # Each chord maps to the arc that does not contain the basepoint.
    intervals = []
    for c in chords:
        a = (c.s - base) % 1.0
        b = (c.t - base) % 1.0
        intervals.append((min(a, b), max(a, b)))
    return intervals


def decompose_circle(d: CircleDiagram, basepoint: float | None = None) -> FaceDecomposition:
    """Faces of a circle diagram; face 0 contains the basepoint.

    Arc lengths are measured counterclockwise.  The basepoint defaults to the
    middle of the widest gap between endpoints.
    """
    base = _basepoint(d.chords) if basepoint is None else basepoint % 1.0
    if any(_same((p - base) % 1.0, 0.0) or _same((p - base) % 1.0, 1.0)
           for c in d.chords for p in (c.s, c.t)):
        raise DiagramError("basepoint coincides with a chord endpoint")
    intervals = _rotate_to(d.chords, base)
    return _decompose_segments(intervals, [c.l for c in d.chords], 1.0, offset=base, wrap=True)


def _in_arc(x: float, start: float, length: float, circle: bool) -> bool:
    rel = (x - start) % 1.0 if circle else x - start
    return ENDPOINT_TOL < rel < length - ENDPOINT_TOL


def face_of_point(decomp: FaceDecomposition, r: float, circle: bool = True) -> int:
    """Face whose boundary arcs contain r strictly in their interior."""
    if circle and decomp.n_faces == 1:
        return decomp.root_face
    for f in decomp.faces:
        for a, b in f.arcs:
            if _in_arc(r, a, b - a, circle):
                return f.id
    raise DiagramError(f"point {r:g} is a chord endpoint or outside every face arc")


def cut_circle_at(d: CircleDiagram, m: int, decomp: FaceDecomposition | None = None):
    """Cut the circle inside face m and unroll it to an interval of length 1.

    The cut point is the middle of the longest boundary arc of face m, so
    face m becomes the unbounded face of the result.  Returns the interval
    diagram and a dict mapping old face ids to new face ids.
    """
    if decomp is None:
        decomp = decompose_circle(d)
    face = decomp.faces[m]
    arcs = [ab for ab in face.arcs if ab[1] - ab[0] > ENDPOINT_TOL]
    if not arcs:
        raise DiagramError(f"face {m} has no boundary arc of positive length")
    a, b = max(arcs, key=lambda ab: ab[1] - ab[0])
    cut = (a + (b - a) / 2.0) % 1.0
    intervals = _rotate_to(d.chords, cut)
    chords = tuple(Chord(s, t, c.l) for (s, t), c in zip(intervals, d.chords))
    interval = IntervalDiagram(1.0, 0.0, chords)
    new = decompose_interval(interval)
    mapping = {old.id: 0 if old.id == m else _match_face(decomp, new, old, cut) for old in decomp.faces}
    return interval, mapping


def _bounding_chords(dec: FaceDecomposition, f: int) -> frozenset[int]:
    return frozenset(j for j, pc in enumerate(dec.chord_adjacency) if f in pc)


def _match_face(old: FaceDecomposition, new: FaceDecomposition, face: Face, cut: float) -> int:
    for a, b in face.arcs:
        if b - a > ENDPOINT_TOL:
            probe = ((a + (b - a) / 2.0) - cut) % 1.0
            return face_of_point(new, probe, circle=False)
    # Degenerate face: identify it through the chords around it.
    target = _bounding_chords(old, face.id)
    hits = [f.id for f in new.faces if not any(b - a > ENDPOINT_TOL for a, b in f.arcs)
            and _bounding_chords(new, f.id) == target]
    if len(hits) != 1:
        raise DiagramError("could not match a degenerate face across the cut")
    return hits[0]
