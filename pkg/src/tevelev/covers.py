"""Explicit tropical admissible covers for the cells of an all-simple grid.

A cover is assembled by sweeping the target spine from left to right while
tracking the sheets of the source sitting over the current spine edge:

* the genus part starts with a degree 2 loop and then, for each letter of the
  genus word, adds a loop that raises (U) or lowers (D) the degree of the
  active edge;
* the marked part cuts and joins single sheets so the active edge ends at
  degree 2 over the last transposition, with the marks hanging on a left tree,
  the spine and a right tree.

Each compact target edge k carries one length symbol y_k.  A source edge of
expansion factor f over edge k has length (lcm_k / f) * y_k, where lcm_k is
the lcm of the factors over k, so every length is an integer form in the y's.
"""
from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .core import DomainError, InternalFault, Params, ValidityReport, require_valid
from .grid import GridCell, build_grid
from .hurwitz import LocalHurwitzQuery, local_hurwitz

TRANSPOSITION = "transposition"
MARK = "mark"


class ConstructionFault(InternalFault):
    """The builder produced something that is not a valid cover."""


class StabilizationMismatch(InternalFault):
    """The stable source or target has the wrong combinatorial type."""


class NonSquareFault(InternalFault):
    """Row and column counts of a dilation matrix differ."""


# ---------------------------------------------------------------- data model

@dataclass(frozen=True)
class TargetEnd:
    id: int
    vertex: int
    kind: str  # TRANSPOSITION or MARK
    label: int  # transposition index or mark
    genus_part: bool = False


@dataclass
class TargetTree:
    vertices: list[int] = field(default_factory=list)
    # compact edge k -> (left vertex, right vertex); k is also the index of y_k
    edges: dict[int, tuple[int, int]] = field(default_factory=dict)
    ends: dict[int, TargetEnd] = field(default_factory=dict)

    def directions(self, w: int) -> list[tuple[str, int]]:
        out = [("edge", k) for k, (a, b) in self.edges.items() if w in (a, b)]
        out += [("end", e.id) for e in self.ends.values() if e.vertex == w]
        return out

    def transpositions(self) -> list[TargetEnd]:
        return [e for e in self.ends.values() if e.kind == TRANSPOSITION]

    def marks(self) -> list[TargetEnd]:
        return [e for e in self.ends.values() if e.kind == MARK]


@dataclass
class SourceVertex:
    id: int
    image: int
    genus: int = 0

    def record(self, local_degree: int) -> dict:
        return {"id": self.id, "image": self.image, "genus": self.genus,
                "local_degree": local_degree}


@dataclass
class SourceEdge:
    id: int
    tail: int
    head: Optional[int]  # None for an end
    image: int  # target edge id, or target end id when head is None
    factor: int
    mark: Optional[int] = None

    @property
    def is_end(self) -> bool:
        return self.head is None

    def direction(self) -> tuple[str, int]:
        return ("end", self.image) if self.is_end else ("edge", self.image)


@dataclass
class TropicalCover:
    params: Params
    cell: Optional[GridCell]
    target: TargetTree
    vertices: dict[int, SourceVertex]
    edges: dict[int, SourceEdge]
    plan: str = ""
    # y_1..y_genus_symbols belong to the genus part
    genus_symbols: int = 0

    @property
    def edge_map(self) -> dict[int, tuple[str, int]]:
        return {e.id: e.direction() for e in self.edges.values()}

    def lcms(self) -> dict[int, int]:
        """lcm of the expansion factors over each compact target edge."""
        out: dict[int, int] = {}
        for e in self.edges.values():
            if not e.is_end:
                out[e.image] = math.lcm(out.get(e.image, 1), e.factor)
        return out

    def lcm(self, k: int) -> int:
        return self.lcms()[k]

    def length(self, edge_id: int, lcms: Optional[dict[int, int]] = None) -> dict[int, int]:
        e = self.edges[edge_id]
        if e.is_end:
            raise DomainError("ends have no length")
        lcms = lcms or self.lcms()
        return {e.image: lcms[e.image] // e.factor}

    def incidence(self) -> dict[int, list[SourceEdge]]:
        """Edges at each vertex; a loop would appear twice (none are built here)."""
        out: dict[int, list[SourceEdge]] = {v: [] for v in self.vertices}
        for e in self.edges.values():
            out[e.tail].append(e)
            if e.head is not None:
                out[e.head].append(e)
        return out

    def incident(self, v: int) -> list[SourceEdge]:
        return self.incidence()[v]

    def local_profile(self, v: int, direction: tuple[str, int],
                      incidence: Optional[dict] = None) -> list[SourceEdge]:
        edges = incidence[v] if incidence is not None else self.incident(v)
        return [e for e in edges if e.direction() == direction]

    def local_degree(self, v: int, incidence: Optional[dict] = None) -> int:
        w = self.vertices[v].image
        dirs = self.target.directions(w)
        return sum(e.factor for e in self.local_profile(v, dirs[0], incidence)) if dirs else 0

    def length_symbols(self) -> list[int]:
        return sorted(self.target.edges)

    def record(self) -> dict:
        inc = self.incidence()
        lcms = self.lcms()
        return {
            "instance": {"g": self.params.g, "ell": self.params.ell},
            "cell": self.cell.record() if self.cell else None,
            "plan": self.plan,
            "vertices": [v.record(self.local_degree(v.id, inc)) for v in self.vertices.values()],
            "edges": [
                {"id": e.id, "endpoints": [e.tail, e.head], "factor": e.factor,
                 "is_end": e.is_end, "mark": e.mark,
                 "length": None if e.is_end else _form_text(self.length(e.id, lcms)),
                 "image": list(e.direction())}
                for e in self.edges.values()
            ],
            "target": {
                "edges": {f"y{k}": list(ab) for k, ab in self.target.edges.items()},
                "ends": [
                    {"id": t.id, "vertex": t.vertex, "kind": t.kind, "label": t.label,
                     "genus_part": t.genus_part}
                    for t in self.target.ends.values()
                ],
            },
        }


def _form_text(form: dict[int, int]) -> str:
    parts = []
    for k in sorted(form):
        c = form[k]
        if c:
            parts.append(f"y{k}" if c == 1 else f"{c}y{k}")
    return " + ".join(parts) if parts else "0"


# ---------------------------------------------------------------- builder

@dataclass
class _Strand:
    vertex: int  # source vertex over the current spine vertex
    factor: int
    role: str  # active, arc, fresh, free, cut
    carry: frozenset = frozenset()  # marks this sheet picks up further right


@dataclass(frozen=True)
class MarkedPlan:
    """Order of events in the marked part.

    ``ends_ramified`` selects the shape of the right end: True ends with a
    transposition and the right tree hanging under a degree 2 active edge,
    False ends with the active edge at degree 1 over the cherry of marks 1, 2.
    """
    cuts_before: int
    cuts_after: int
    ends_ramified: bool = True

    def text(self) -> str:
        tail = "T" if self.ends_ramified else "E"
        return f"c{self.cuts_before}-L-J-c{self.cuts_after}-{tail}"


class _Builder:
    def __init__(self, params: Params):
        self.params = params
        self.t = TargetTree()
        self.vertices: dict[int, SourceVertex] = {}
        self.edges: dict[int, SourceEdge] = {}
        self._next_end = 1
        self._next_transposition = 1
        self.spine: Optional[int] = None
        self.strands: list[_Strand] = []

    # -- target
    def genus_symbols(self) -> int:
        return len(self.t.edges)

    def _tv(self) -> int:
        w = len(self.t.vertices) + 1
        self.t.vertices.append(w)
        return w

    def _te(self, a: int, b: int) -> int:
        k = len(self.t.edges) + 1
        self.t.edges[k] = (a, b)
        return k

    def _tend(self, w: int, kind: str, label: Optional[int] = None, genus_part=False) -> int:
        if kind == TRANSPOSITION:
            label = self._next_transposition
            self._next_transposition += 1
        end = TargetEnd(self._next_end, w, kind, label, genus_part)
        self.t.ends[end.id] = end
        self._next_end += 1
        return end.id

    def _branch(self, w: int, marks: list[int]) -> tuple:
        """Hang the caterpillar of ``marks`` at w (nearest mark first)."""
        if len(marks) == 1:
            return ("end", self._tend(w, MARK, marks[0]))
        top = self._tv()
        k = self._te(w, top)
        cur = top
        for mark in marks[:-2]:
            self._tend(cur, MARK, mark)
            nxt = self._tv()
            self._te(cur, nxt)
            cur = nxt
        self._tend(cur, MARK, marks[-2])
        self._tend(cur, MARK, marks[-1])
        return ("branch", k, top)

    def _cherry(self, w: int, genus_part: bool) -> tuple:
        c = self._tv()
        k = self._te(w, c)
        self._tend(c, TRANSPOSITION, genus_part=genus_part)
        self._tend(c, TRANSPOSITION, genus_part=genus_part)
        return ("branch", k, c)

    # -- source
    def _sv(self, w: int) -> int:
        v = len(self.vertices) + 1
        self.vertices[v] = SourceVertex(v, w)
        return v

    def _se(self, tail: int, head: Optional[int], image: int, factor: int, mark=None) -> int:
        e = len(self.edges) + 1
        self.edges[e] = SourceEdge(e, tail, head, image, factor, mark)
        return e

    def _lift_end(self, v: int, end_id: int, parts: list[int], marks=frozenset()):
        end = self.t.ends[end_id]
        marked = end.kind == MARK and end.label in marks
        for i, f in enumerate(parts):
            self._se(v, None, end_id, f, end.label if marked and i == 0 else None)

    def _copy(self, v: int, attachment: tuple, marks=frozenset()) -> None:
        """Degree one preimage of an attachment hanging below v."""
        if attachment[0] == "end":
            self._lift_end(v, attachment[1], [1], marks)
            return
        _, k, top = attachment
        u = self._sv(top)
        self._se(v, u, k, 1)
        self._copy_below(u, top, k, marks)

    def _copy_below(self, u: int, w: int, came_from: int, marks) -> None:
        for kind, x in self.t.directions(w):
            if kind == "end":
                self._lift_end(u, x, [1], marks)
            elif x != came_from:
                child = self.t.edges[x][1]
                c = self._sv(child)
                self._se(u, c, x, 1)
                self._copy_below(c, child, x, marks)

    def _step(self, genus_part=False, kind=TRANSPOSITION, branch=None, mark=None):
        """New spine vertex to the right with one attachment; returns (w, k, attachment)."""
        w = self._tv()
        k = self._te(self.spine, w)
        if branch == "cherry":
            att = self._cherry(w, genus_part)
        elif branch is not None:
            att = self._branch(w, branch)
        elif kind == MARK:
            att = ("end", self._tend(w, MARK, mark))
        else:
            att = ("end", self._tend(w, TRANSPOSITION, genus_part=genus_part))
        self.spine = w
        return w, k, att

    def _arrive(self, strand: _Strand, v: int, k: int) -> None:
        self._se(strand.vertex, v, k, strand.factor)

    def _pass(self, skip: list[_Strand], w: int, k: int, attachments) -> list[_Strand]:
        """Unramified continuation of every strand not in ``skip``."""
        out = []
        for s in self.strands:
            if any(s is x for x in skip):
                continue
            if s.factor != 1:
                raise ConstructionFault(f"strand of factor {s.factor} cannot pass unramified")
            v = self._sv(w)
            self._arrive(s, v, k)
            for att in attachments:
                self._copy(v, att, s.carry)
            out.append(_Strand(v, 1, s.role, s.carry))
        return out

    def _take(self, role: str) -> _Strand:
        for s in self.strands:
            if s.role == role:
                return s
        raise ConstructionFault(f"no {role} sheet left")

    # -- genus part
    def start_loop(self, fresh: int, joining: list[frozenset]) -> None:
        w = self._tv()
        a = self._tend(w, TRANSPOSITION, genus_part=True)
        b = self._tend(w, TRANSPOSITION, genus_part=True)
        self.spine = w
        v0 = self._sv(w)
        self._lift_end(v0, a, [2])
        self._lift_end(v0, b, [2])
        self.strands = [_Strand(v0, 1, "arc"), _Strand(v0, 1, "arc")]
        for _ in range(fresh):
            v = self._sv(w)
            self._lift_end(v, a, [1])
            self._lift_end(v, b, [1])
            self.strands.append(_Strand(v, 1, "fresh"))
        for carry in joining:
            v = self._sv(w)
            self._lift_end(v, a, [1])
            self._lift_end(v, b, [1])
            self.strands.append(_Strand(v, 1, "joining", carry))

    def close_loop(self) -> None:
        arcs = [s for s in self.strands if s.role == "arc"]
        w, k, att = self._step(genus_part=True)
        v = self._sv(w)
        for s in arcs:
            self._arrive(s, v, k)
        self._lift_end(v, att[1], [2])
        rest = self._pass(arcs, w, k, [att])
        self.strands = [_Strand(v, 2, "active")] + rest

    def _ramified_branch(self, att, up: list[int]) -> None:
        _, k, c = att
        cv = self._sv(c)
        for u in up:
            self._se(u, cv, k, 1)
        for kind, x in self.t.directions(c):
            if kind == "end":
                self._lift_end(cv, x, [2])

    def raise_loop(self) -> None:
        """Letter U: the active degree a becomes a+1."""
        act, fresh = self._take("active"), self._take("fresh")
        a = act.factor
        w, k, att = self._step(genus_part=True, branch="cherry")
        q, r = self._sv(w), self._sv(w)
        self._arrive(act, q, k)
        self._arrive(fresh, r, k)
        self._ramified_branch(att, [q, r])
        for _ in range(a - 1):
            self._copy(q, att)
        rest = self._pass([act, fresh], w, k, [att])
        self.strands = [_Strand(q, a, "arc1"), _Strand(r, 1, "arc2")] + rest
        arc1, arc2 = self.strands[0], self.strands[1]
        w, k, att = self._step(genus_part=True)
        p = self._sv(w)
        self._arrive(arc1, p, k)
        self._arrive(arc2, p, k)
        self._lift_end(p, att[1], [2] + [1] * (a - 1))
        rest = self._pass([arc1, arc2], w, k, [att])
        self.strands = [_Strand(p, a + 1, "active")] + rest

    def lower_loop(self) -> None:
        """Letter D: the active degree a becomes a-1 and a free sheet splits off."""
        act = self._take("active")
        a = act.factor
        if a < 2:
            raise ConstructionFault("active degree fell below one")
        w, k, att = self._step(genus_part=True)
        p = self._sv(w)
        self._arrive(act, p, k)
        self._lift_end(p, att[1], [2] + [1] * (a - 2))
        rest = self._pass([act], w, k, [att])
        self.strands = [_Strand(p, a - 1, "arc1"), _Strand(p, 1, "arc2")] + rest
        arc1, arc2 = self.strands[0], self.strands[1]
        w, k, att = self._step(genus_part=True, branch="cherry")
        q, r = self._sv(w), self._sv(w)
        self._arrive(arc1, q, k)
        self._arrive(arc2, r, k)
        self._ramified_branch(att, [q, r])
        for _ in range(a - 2):
            self._copy(q, att)
        rest = self._pass([arc1, arc2], w, k, [att])
        self.strands = [_Strand(q, a - 1, "active"), _Strand(r, 1, "free")] + rest

    # -- marked part
    def cut(self, carry: int) -> None:
        act = self._take("active")
        a = act.factor
        if a < 2:
            raise ConstructionFault("cannot cut an active edge of degree one")
        w, k, att = self._step()
        p = self._sv(w)
        self._arrive(act, p, k)
        self._lift_end(p, att[1], [2] + [1] * (a - 2))
        rest = self._pass([act], w, k, [att])
        self.strands = [_Strand(p, a - 1, "active"), _Strand(p, 1, "cut", frozenset({carry}))] + rest

    def join(self) -> None:
        act, sheet = self._take("active"), self._take("joining")
        a = act.factor
        w, k, att = self._step()
        p = self._sv(w)
        self._arrive(act, p, k)
        self._arrive(sheet, p, k)
        self._lift_end(p, att[1], [2] + [1] * (a - 1))
        rest = self._pass([act, sheet], w, k, [att])
        self.strands = [_Strand(p, a + 1, "active")] + rest

    def hang(self, marks: list[int], active_marks: frozenset) -> None:
        """Spine vertex carrying a mark tree (or a single mark) under the active edge."""
        act = self._take("active")
        a = act.factor
        w, k, att = self._step(branch=marks) if len(marks) > 1 else self._step(kind=MARK, mark=marks[0])
        p = self._sv(w)
        self._arrive(act, p, k)
        labels = sorted(active_marks)
        for i in range(a):
            self._copy(p, att, frozenset({labels[i]}) if i < len(labels) else frozenset())
        rest = self._pass([act], w, k, [att])
        self.strands = [_Strand(p, a, "active")] + rest

    def end_ramified(self, marks: list[int]) -> None:
        """Last spine vertex: final transposition plus the right tree."""
        act = self._take("active")
        if act.factor != 2:
            raise ConstructionFault(f"active degree {act.factor} at a ramified right end")
        w = self._tv()
        k = self._te(self.spine, w)
        t = ("end", self._tend(w, TRANSPOSITION))
        tree = self._branch(w, marks)
        self.spine = w
        p = self._sv(w)
        self._arrive(act, p, k)
        self._lift_end(p, t[1], [2])
        self._copy(p, tree, frozenset({1}))
        self._copy(p, tree, frozenset({2}))
        self._pass([act], w, k, [t, tree])
        self.strands = []

    def end_cherry(self) -> None:
        """Last spine vertex: the marks 1 and 2 over a degree one active edge."""
        act = self._take("active")
        if act.factor != 1:
            raise ConstructionFault(f"active degree {act.factor} at an unramified right end")
        w = self._tv()
        k = self._te(self.spine, w)
        one = ("end", self._tend(w, MARK, 1))
        two = ("end", self._tend(w, MARK, 2))
        self.spine = w
        p = self._sv(w)
        self._arrive(act, p, k)
        self._copy(p, one, frozenset({1}))
        self._copy(p, two, frozenset({2}))
        self._pass([act], w, k, [one, two])
        self.strands = []


def build_cover_with_plan(params: Params, word, joined: int, plan: MarkedPlan,
                          cell: Optional[GridCell] = None) -> TropicalCover:
    """Assemble the cover for a genus word, a number of joined sheets and a marked plan."""
    n = params.n
    c1, c2 = plan.cuts_before, plan.cuts_after
    if min(c1, c2, joined) < 0:
        raise DomainError("negative event count")
    j = c2 + 2 if plan.ends_ramified else c2 + 1
    left = list(range(j + 2, n + 1))
    if len(left) != c1 + 1 + joined:
        raise DomainError(f"plan {plan.text()} does not place {n} marks")
    b = _Builder(params)
    ups = word.letters.count("U")
    joining = [frozenset({n - c1 - 1 - r}) for r in range(joined)]
    b.start_loop(ups, joining)
    b.close_loop()
    for letter in word.letters:
        if letter == "U":
            b.raise_loop()
        else:
            b.lower_loop()
    genus_symbols = b.genus_symbols()
    for r in range(c1):
        b.cut(n - r)
    b.hang(left, frozenset({n - c1}))
    for _ in range(joined):
        b.join()
    if plan.ends_ramified:
        b.hang([j + 1], frozenset({j + 1}))
        for r in range(c2):
            b.cut(j - r)
        b.end_ramified(list(range(j, 0, -1)))
    else:
        for r in range(c2):
            b.cut(j + 1 - r)
        for mark in range(j + 1, 2, -1):
            b.hang([mark], frozenset())
        b.end_cherry()
    return TropicalCover(params, cell, b.t, b.vertices, b.edges, plan.text(), genus_symbols)


def plan_for_cell(cell: GridCell) -> MarkedPlan:
    """Marked plan realizing column j of a row.

    Column j >= 2 ends with the last transposition and the right tree under a
    degree 2 active edge, after j-2 trailing cuts.  Column 1 (only present
    when no sheets are joined) ends unramified over the cherry of marks 1, 2.
    """
    budget = cell.delta + cell.joined_ends
    if cell.j >= 2:
        return MarkedPlan(budget - cell.j, cell.j - 2, True)
    return MarkedPlan(budget - 1, 0, False)


def build_cover(cell: GridCell, params: Params) -> TropicalCover:
    require_valid(params)
    if not params.is_all_simple:
        raise DomainError("explicit covers are built for all-simple profiles only")
    cover = build_cover_with_plan(params, cell.word, cell.joined_ends, plan_for_cell(cell), cell)
    report = validate_cover(cover)
    if not report.ok:
        raise ConstructionFault(f"cover for {cell.record()} is invalid: {report}")
    expected = 5 * params.g + 4 * params.ell
    if len(cover.target.edges) != expected:
        raise ConstructionFault(f"{len(cover.target.edges)} length symbols, expected {expected}")
    return cover


def build_covers(g: int, ell: int) -> list[TropicalCover]:
    params = Params.all_simple(g, ell)
    return [build_cover(cell, params) for cell in build_grid(g, ell)]


# ---------------------------------------------------------------- validation

def validate_cover(cover: TropicalCover) -> ValidityReport:
    params = cover.params
    t = cover.target
    bad: list[str] = []
    inc = cover.incidence()
    for v in cover.vertices.values():
        dirs = t.directions(v.image)
        sums = [sum(e.factor for e in cover.local_profile(v.id, dr, inc)) for dr in dirs]
        if len(set(sums)) != 1 or sums[0] < 1:
            bad.append(f"harmonicity at vertex {v.id}: {sums}")
            continue
        val = len(inc[v.id])
        if val + 2 * v.genus - 2 != sums[0] * (len(dirs) - 2):
            bad.append(f"Riemann-Hurwitz at vertex {v.id}: valence {val}, genus {v.genus}, "
                       f"local degree {sums[0]}")
    for e in cover.edges.values():
        if e.is_end:
            ok = e.image in t.ends and t.ends[e.image].vertex == cover.vertices[e.tail].image
        else:
            ok = e.image in t.edges and t.edges[e.image] == (
                cover.vertices[e.tail].image, cover.vertices[e.head].image)
        if not ok:
            bad.append(f"edge map at edge {e.id}")
    fibres: dict[tuple, list[SourceEdge]] = defaultdict(list)
    for e in cover.edges.values():
        fibres[e.direction()].append(e)
    for k in t.edges:
        total = sum(e.factor for e in fibres[("edge", k)])
        if total != params.d:
            bad.append(f"fibre degree {total} over y{k}")
    for end in t.ends.values():
        parts = sorted((e.factor for e in fibres[("end", end.id)]), reverse=True)
        if sum(parts) != params.d:
            bad.append(f"fibre degree {sum(parts)} over end {end.id}")
        elif end.kind == TRANSPOSITION and parts != [2] + [1] * (params.d - 2):
            bad.append(f"transposition end {end.id} has profile {parts}")
        elif end.kind == MARK:
            marked = [e for e in fibres[("end", end.id)] if e.mark == end.label]
            if len(marked) != 1 or marked[0].factor != 1:
                bad.append(f"mark {end.label} is not carried by exactly one simple preimage")
    trans = t.transpositions()
    if len(trans) != 4 * params.g + 2 * params.ell:
        bad.append(f"{len(trans)} transpositions, expected {4 * params.g + 2 * params.ell}")
    genus_trans = sum(1 for e in trans if e.genus_part)
    if genus_trans != 3 * params.g:
        bad.append(f"{genus_trans} transpositions in the genus part, expected {3 * params.g}")
    labels = sorted(e.label for e in t.marks())
    if labels != list(range(1, params.n + 1)):
        bad.append(f"mark labels {labels}")
    compact = [e for e in cover.edges.values() if not e.is_end]
    if not _connected(cover.vertices, [(e.tail, e.head) for e in compact]):
        bad.append("source is disconnected")
    else:
        genus = len(compact) - len(cover.vertices) + 1 + sum(v.genus for v in cover.vertices.values())
        if genus != params.g:
            bad.append(f"source genus {genus}, expected {params.g}")
    return ValidityReport(tuple(bad))


def _connected(vertices, pairs) -> bool:
    if not vertices:
        return True
    adj = defaultdict(list)
    for a, b in pairs:
        adj[a].append(b)
        adj[b].append(a)
    start = next(iter(vertices))
    seen = {start}
    stack = [start]
    while stack:
        x = stack.pop()
        for y in adj[x]:
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return len(seen) == len(vertices)


# ---------------------------------------------------------------- stabilization

Form = dict  # y index -> integer coefficient


def _add(a: Form, b: Form) -> Form:
    out = dict(a)
    for k, c in b.items():
        out[k] = out.get(k, 0) + c
    return out


class _Graph:
    """Small multigraph with legs, used for forgetting and contracting."""

    def __init__(self):
        self.edges: dict[int, list] = {}  # id -> [u, v, form]
        self.adj: dict[int, set[int]] = defaultdict(set)
        self.legs: dict[int, list[int]] = defaultdict(list)
        self.nodes: set[int] = set()
        self._next = 0

    def add_edge(self, u: int, v: int, form: Form) -> int:
        self._next += 1
        self.edges[self._next] = [u, v, form]
        self.adj[u].add(self._next)
        self.adj[v].add(self._next)
        self.nodes.update((u, v))
        return self._next

    def drop_edge(self, e: int) -> None:
        u, v, _ = self.edges.pop(e)
        self.adj[u].discard(e)
        self.adj[v].discard(e)

    def valence(self, v: int) -> int:
        loops = sum(1 for e in self.adj[v] if self.edges[e][0] == self.edges[e][1])
        return len(self.adj[v]) + loops + len(self.legs[v])

    def other(self, e: int, v: int) -> int:
        u, w, _ = self.edges[e]
        return w if u == v else u

    def reduce(self) -> None:
        """Prune unmarked leaves and contract 2-valent vertices until stable."""
        work = list(self.nodes)
        while work:
            v = work.pop()
            if v not in self.nodes:
                continue
            val = self.valence(v)
            legs = self.legs[v]
            if val <= 1 and not legs:
                for e in list(self.adj[v]):
                    work.append(self.other(e, v))
                    self.drop_edge(e)
                self.nodes.discard(v)
            elif val == 2:
                es = list(self.adj[v])
                if len(es) == 2 and not legs:
                    e1, e2 = es
                    x, y = self.other(e1, v), self.other(e2, v)
                    form = _add(self.edges[e1][2], self.edges[e2][2])
                    self.drop_edge(e1)
                    self.drop_edge(e2)
                    self.nodes.discard(v)
                    self.add_edge(x, y, form)
                    work.extend((x, y))
                elif len(es) == 1 and len(legs) == 1 and self.edges[es[0]][0] != self.edges[es[0]][1]:
                    x = self.other(es[0], v)
                    self.drop_edge(es[0])
                    self.legs[x].extend(legs)
                    self.legs[v] = []
                    self.nodes.discard(v)
                    work.append(x)

    def neighbours(self, v: int) -> list[tuple[int, int]]:
        return sorted((e, self.other(e, v)) for e in self.adj[v])


@dataclass
class Stabilization:
    """Length forms of the stable source edges x_1.. and stable target edges L_1.."""
    source_forms: list[Form]
    target_forms: list[Form]
    # (index of the shorter arc, index of the longer) pairs that could not be ordered
    unordered_arcs: list[tuple[int, int]] = field(default_factory=list)
    source_graph: Optional[_Graph] = None
    target_graph: Optional[_Graph] = None


def _source_graph(cover: TropicalCover) -> _Graph:
    gr = _Graph()
    gr.nodes.update(cover.vertices)
    lcms = cover.lcms()
    for e in cover.edges.values():
        if e.is_end:
            if e.mark is not None:
                gr.legs[e.tail].append(e.mark)
        else:
            gr.add_edge(e.tail, e.head, cover.length(e.id, lcms))
    return gr


def _target_graph(cover: TropicalCover) -> _Graph:
    gr = _Graph()
    gr.nodes.update(cover.target.vertices)
    lcms = cover.lcms()
    for k, (a, b) in cover.target.edges.items():
        gr.add_edge(a, b, {k: lcms[k]})
    for end in cover.target.marks():
        gr.legs[end.vertex].append(end.label)
    return gr


def _leg_vertex(gr: _Graph, legs: set[int]) -> int:
    hits = [v for v in gr.nodes if set(gr.legs[v]) == legs]
    if len(hits) != 1:
        raise StabilizationMismatch(f"no unique vertex with legs {sorted(legs)}")
    return hits[0]


def _caterpillar(gr: _Graph, n: int, tail_free: bool) -> tuple[list[Form], int, Optional[int]]:
    """Walk from the vertex with legs {1,2} towards mark n.

    Returns the edge forms ordered from the mark-n end, the vertex carrying
    mark n, and the edge leaving it away from the caterpillar (if tail_free).
    """
    cur = _leg_vertex(gr, {1, 2})
    prev_edge = None
    forms = []
    for mark in range(3, n + 1):
        nxt = [(e, x) for e, x in gr.neighbours(cur) if e != prev_edge]
        if len(nxt) != 1:
            raise StabilizationMismatch(f"caterpillar branches before mark {mark}")
        prev_edge, cur = nxt[0]
        if sorted(gr.legs[cur]) != [mark]:
            raise StabilizationMismatch(f"expected mark {mark} next on the caterpillar")
        forms.append(gr.edges[prev_edge][2])
    rest = [(e, x) for e, x in gr.neighbours(cur) if e != prev_edge]
    forms.reverse()
    if tail_free:
        if len(rest) != 1:
            raise StabilizationMismatch("mark n does not lead to the genus part")
        return forms, cur, rest[0][0]
    if rest:
        raise StabilizationMismatch("target caterpillar continues past mark n")
    return forms, cur, None


def _le(a: Form, b: Form) -> bool:
    return all(b.get(k, 0) >= c for k, c in a.items())


def _match_source(gr: _Graph, g: int, n: int) -> tuple[list[Form], list[tuple[int, int]]]:
    if g < 1:
        raise StabilizationMismatch("genus zero sources are not handled")
    cat_forms, u1, bridge = _caterpillar(gr, n, tail_free=True)
    x: dict[int, Form] = {}
    unordered = []
    for t, form in enumerate(cat_forms, start=1):
        x[3 * g - 1 + t] = form
    x[3 * g - 1] = gr.edges[bridge][2]
    cur = gr.other(bridge, u1)
    came = bridge
    for k in range(g, 1, -1):
        rest = [(e, y) for e, y in gr.neighbours(cur) if e != came]
        if len(rest) != 2 or rest[0][1] != rest[1][1] or rest[0][1] == cur:
            raise StabilizationMismatch(f"loop {k} is not a pair of parallel arcs")
        q = rest[0][1]
        a, b = gr.edges[rest[0][0]][2], gr.edges[rest[1][0]][2]
        if _le(b, a) and not _le(a, b):
            a, b = b, a
        elif not _le(a, b):
            unordered.append((3 * k - 3, 3 * k - 2))
        x[3 * k - 3], x[3 * k - 2] = a, b
        nxt = [(e, y) for e, y in gr.neighbours(q) if e not in (rest[0][0], rest[1][0])]
        if len(nxt) != 1 or gr.legs[q] or gr.legs[cur]:
            raise StabilizationMismatch(f"loop {k} has the wrong attachments")
        came, cur = nxt[0]
        x[3 * k - 4] = gr.edges[came][2]
    loops = [e for e in gr.adj[cur] if gr.edges[e][0] == gr.edges[e][1]]
    if len(loops) != 1 or gr.legs[cur] or len(gr.adj[cur]) != 2:
        raise StabilizationMismatch("the first loop is not a self-loop")
    x[1] = gr.edges[loops[0]][2]
    count = 3 * g - 3 + n
    if sorted(x) != list(range(1, count + 1)) or len(gr.edges) != count:
        raise StabilizationMismatch(f"stable source has {len(gr.edges)} edges, expected {count}")
    return [x[i] for i in range(1, count + 1)], unordered


def _match_target(gr: _Graph, n: int) -> list[Form]:
    if n == 3:
        _leg_vertex(gr, {1, 2, 3})
        if gr.edges:
            raise StabilizationMismatch("target with three marks must be a single vertex")
        return []
    return _caterpillar_target(gr, n)


def _caterpillar_target(gr: _Graph, n: int) -> list[Form]:
    # the far vertex carries both n-1 and n
    cur = _leg_vertex(gr, {1, 2})
    prev = None
    forms = []
    for mark in range(3, n - 1):
        nxt = [(e, x) for e, x in gr.neighbours(cur) if e != prev]
        if len(nxt) != 1:
            raise StabilizationMismatch(f"target branches before mark {mark}")
        prev, cur = nxt[0]
        if sorted(gr.legs[cur]) != [mark]:
            raise StabilizationMismatch(f"expected mark {mark} on the target")
        forms.append(gr.edges[prev][2])
    nxt = [(e, x) for e, x in gr.neighbours(cur) if e != prev]
    if len(nxt) != 1:
        raise StabilizationMismatch("target does not reach the last cherry")
    prev, cur = nxt[0]
    forms.append(gr.edges[prev][2])
    if sorted(gr.legs[cur]) != [n - 1, n] or len(gr.adj[cur]) != 1:
        raise StabilizationMismatch("target does not end in the cherry of the two top marks")
    if len(gr.edges) != n - 3:
        raise StabilizationMismatch("target is not a caterpillar")
    forms.reverse()
    return forms


def stabilize(cover: TropicalCover) -> Stabilization:
    p = cover.params
    src = _source_graph(cover)
    src.reduce()
    tgt = _target_graph(cover)
    tgt.reduce()
    x, unordered = _match_source(src, p.g, p.n)
    L = _match_target(tgt, p.n)
    return Stabilization(x, L, unordered, src, tgt)


# ---------------------------------------------------------------- dilation matrix

@dataclass
class DilationMatrix:
    rows: list[str]
    columns: list[str]
    entries: list[list[int]]

    @property
    def is_square(self) -> bool:
        return len(self.rows) == len(self.columns) and all(len(r) == len(self.columns) for r in self.entries)

    def text(self) -> str:
        width = max(len(c) for c in self.columns + self.rows) + 1
        head = " " * width + "".join(c.rjust(width) for c in self.columns)
        body = [r.ljust(width) + "".join(str(x).rjust(width) for x in row)
                for r, row in zip(self.rows, self.entries)]
        return "\n".join([head] + body)


def _matrix(cover: TropicalCover, stab: Stabilization) -> DilationMatrix:
    cols = cover.length_symbols()
    forms = stab.source_forms + stab.target_forms
    rows = [f"x{i}" for i in range(1, len(stab.source_forms) + 1)]
    rows += [f"L{i}" for i in range(1, len(stab.target_forms) + 1)]
    entries = [[f.get(k, 0) for k in cols] for f in forms]
    return DilationMatrix(rows, [f"y{k}" for k in cols], entries)


def exact_determinant(m: DilationMatrix) -> int:
    """Fraction-free Gaussian elimination (Bareiss) over the integers."""
    if not m.is_square:
        raise NonSquareFault(f"{len(m.rows)} rows against {len(m.columns)} columns")
    a = [list(r) for r in m.entries]
    size = len(a)
    sign = 1
    prev = 1
    for k in range(size - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, size) if a[i][k] != 0), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, size):
            for col in range(k + 1, size):
                a[i][col] = (a[i][col] * a[k][k] - a[i][k] * a[k][col]) // prev
            a[i][k] = 0
        prev = a[k][k]
    return sign * a[-1][-1] if size else 1


def solve_exact(m: DilationMatrix, rhs: list) -> Optional[list[Fraction]]:
    """Solve entries * y = rhs over the rationals; None when singular."""
    if not m.is_square:
        raise NonSquareFault(f"{len(m.rows)} rows against {len(m.columns)} columns")
    size = len(m.rows)
    a = [[Fraction(x) for x in row] + [Fraction(r)] for row, r in zip(m.entries, rhs)]
    for col in range(size):
        piv = next((i for i in range(col, size) if a[i][col] != 0), None)
        if piv is None:
            return None
        a[col], a[piv] = a[piv], a[col]
        p = a[col][col]
        a[col] = [x / p for x in a[col]]
        for i in range(size):
            if i != col and a[i][col] != 0:
                f = a[i][col]
                a[i] = [x - f * y for x, y in zip(a[i], a[col])]
    return [a[i][size] for i in range(size)]


GENERIC_BASE = 10 ** 6


def generic_point(rows: int) -> list[int]:
    """Lengths x_1 << x_2 << ... << L_1 << ... of the stable curves."""
    return [GENERIC_BASE ** (i + 1) for i in range(rows)]


def preimage_lengths(m: DilationMatrix) -> Optional[list[Fraction]]:
    """Edge lengths of the cover over the generic point, or None if it is not a preimage."""
    y = solve_exact(m, generic_point(len(m.rows)))
    if y is None or any(v <= 0 for v in y):
        return None
    return y


def _swap_rows(m: DilationMatrix, pair: tuple[int, int]) -> DilationMatrix:
    a, b = pair[0] - 1, pair[1] - 1
    entries = [list(r) for r in m.entries]
    entries[a], entries[b] = entries[b], entries[a]
    return DilationMatrix(list(m.rows), list(m.columns), entries)


def dilation_matrix(cover: TropicalCover, stab: Optional[Stabilization] = None) -> DilationMatrix:
    """Matrix of the stable lengths in the y's.

    Arcs of an inner loop whose forms are not comparable are ordered so the
    cover sits over the generic point, when one of the two orders does.
    """
    stab = stab or stabilize(cover)
    m = _matrix(cover, stab)
    if not m.is_square:
        raise NonSquareFault(f"{len(m.rows)} rows against {len(m.columns)} columns")
    for pair in stab.unordered_arcs:
        if preimage_lengths(m) is None:
            flipped = _swap_rows(m, pair)
            if preimage_lengths(flipped) is not None:
                m = flipped
    return m


def is_generic_preimage(cover: TropicalCover) -> bool:
    try:
        return preimage_lengths(dilation_matrix(cover)) is not None
    except StabilizationMismatch:
        return False


# ---------------------------------------------------------------- multiplicity

def _bridges(cover: TropicalCover) -> set[int]:
    adj = defaultdict(list)
    for e in cover.edges.values():
        if not e.is_end:
            adj[e.tail].append((e.head, e.id))
            adj[e.head].append((e.tail, e.id))
    disc, low, out = {}, {}, set()
    counter = 0
    for root in cover.vertices:
        if root in disc:
            continue
        disc[root] = low[root] = counter
        counter += 1
        stack = [(root, None, iter(adj[root]))]
        while stack:
            v, via, it = stack[-1]
            advanced = False
            for w, eid in it:
                if eid == via:
                    continue
                if w in disc:
                    low[v] = min(low[v], disc[w])
                else:
                    disc[w] = low[w] = counter
                    counter += 1
                    stack.append((w, eid, iter(adj[w])))
                    advanced = True
                    break
            if not advanced:
                stack.pop()
                if stack:
                    parent = stack[-1][0]
                    low[parent] = min(low[parent], low[v])
                    if low[v] > disc[parent]:
                        out.add(via)
    return out


def _labelled_edges(cover: TropicalCover) -> set[tuple[int, int]]:
    """(vertex, edge) pairs whose preimage must be told apart at that vertex.

    Marked ends and compact edges are labelled, except bridges whose far side
    carries no mark.
    """
    marked_at = {e.tail for e in cover.edges.values() if e.is_end and e.mark is not None}
    adj = defaultdict(list)
    for e in cover.edges.values():
        if not e.is_end:
            adj[e.tail].append((e.head, e.id))
            adj[e.head].append((e.tail, e.id))
    bridges = _bridges(cover)
    out = set()
    for e in cover.edges.values():
        if e.is_end:
            if e.mark is not None:
                out.add((e.tail, e.id))
            continue
        for near, far in ((e.tail, e.head), (e.head, e.tail)):
            if e.id not in bridges:
                out.add((near, e.id))
                continue
            seen = {far}
            stack = [far]
            found = far in marked_at
            while stack and not found:
                x = stack.pop()
                for y, eid in adj[x]:
                    if eid != e.id and y not in seen:
                        seen.add(y)
                        found = y in marked_at
                        stack.append(y)
            if found:
                out.add((near, e.id))
    return out


def hurwitz_queries(cover: TropicalCover) -> dict[int, LocalHurwitzQuery]:
    labelled = _labelled_edges(cover)
    inc = cover.incidence()
    out = {}
    for v in cover.vertices.values():
        profiles, labels = [], []
        for dr in cover.target.directions(v.image):
            es = cover.local_profile(v.id, dr, inc)
            profiles.append(tuple(e.factor for e in es))
            labels.append(tuple(e.factor for e in es if (v.id, e.id) in labelled))
        out[v.id] = LocalHurwitzQuery(sum(profiles[0]), tuple(profiles), tuple(labels))
    return out


def automorphism_factor(cover: TropicalCover, stab: Optional[Stabilization] = None) -> Fraction:
    """|Aut of the stable source| / |Aut of the cover| from the structural catalog.

    The stable source only has the flip of its self-loop.  The cover has a swap
    for every target vertex carrying two transposition ends, and a swap for
    every group of parallel source edges with equal image and factor.
    """
    stab = stab or stabilize(cover)
    gr = stab.source_graph
    loops = sum(1 for u, v, _ in gr.edges.values() if u == v)
    source = 2 ** loops
    cherries = Counter(e.vertex for e in cover.target.transpositions())
    cover_aut = 2 ** sum(1 for c in cherries.values() if c == 2)
    parallel = Counter((e.tail, e.head, e.image, e.factor) for e in cover.edges.values() if not e.is_end)
    for size in parallel.values():
        cover_aut *= math.factorial(size)
    return Fraction(source, cover_aut)


def lcm_factor(cover: TropicalCover) -> Fraction:
    out = Fraction(1)
    for k in cover.target.edges:
        factors = [e.factor for e in cover.edges.values() if not e.is_end and e.image == k]
        out *= Fraction(math.prod(factors), math.lcm(*factors))
    return out


@dataclass(frozen=True)
class Multiplicity:
    automorphisms: Fraction
    hurwitz: Fraction
    determinant: int
    lcm: Fraction

    @property
    def value(self) -> Fraction:
        return self.automorphisms * self.hurwitz * abs(self.determinant) * self.lcm


def multiplicity_breakdown(cover: TropicalCover) -> Multiplicity:
    stab = stabilize(cover)
    m = dilation_matrix(cover, stab)
    h = Fraction(1)
    for q in hurwitz_queries(cover).values():
        h *= local_hurwitz(q)
    return Multiplicity(automorphism_factor(cover, stab), h, exact_determinant(m), lcm_factor(cover))


def multiplicity(cover: TropicalCover) -> Fraction:
    return multiplicity_breakdown(cover).value


def split_blocks(cover: TropicalCover, m: DilationMatrix) -> tuple[DilationMatrix, DilationMatrix]:
    """Genus block (rows x_1..x_s, columns y_1..y_s) and the complementary block.

    Raises InternalFault unless the genus rows vanish outside the genus columns,
    which makes the matrix block triangular.
    """
    s = cover.genus_symbols
    for row in m.entries[:s]:
        if any(row[s:]):
            raise InternalFault("genus rows reach into the marked part")
    genus = DilationMatrix(m.rows[:s], m.columns[:s], [r[:s] for r in m.entries[:s]])
    marked = DilationMatrix(m.rows[s:], m.columns[s:], [r[s:] for r in m.entries[s:]])
    return genus, marked


# ---------------------------------------------------------------- export

def to_dot(cover: TropicalCover) -> str:
    """Source and target as two clusters of an undirected graph."""
    lines = ["graph cover {", "  node [shape=point];"]
    lines.append("  subgraph cluster_source {")
    lines.append('    label="source";')
    lcms = cover.lcms()
    for v in cover.vertices.values():
        lines.append(f"    s{v.id};")
    for e in cover.edges.values():
        if e.is_end:
            label = f"m{e.mark}" if e.mark is not None else ""
            lines.append(f'    se{e.id} [shape=none, label="{label}"];')
            lines.append(f'    s{e.tail} -- se{e.id} [label="{e.factor}", style=dashed];')
        else:
            lines.append(f'    s{e.tail} -- s{e.head} [label="{e.factor}: {_form_text(cover.length(e.id, lcms))}"];')
    lines.append("  }")
    lines.append("  subgraph cluster_target {")
    lines.append('    label="target";')
    for w in cover.target.vertices:
        lines.append(f"    t{w};")
    for k, (a, b) in cover.target.edges.items():
        lines.append(f'    t{a} -- t{b} [label="y{k}"];')
    for end in cover.target.ends.values():
        tag = f"m{end.label}" if end.kind == MARK else f"t{end.label}"
        lines.append(f'    te{end.id} [shape=none, label="{tag}"];')
        lines.append(f"    t{end.vertex} -- te{end.id} [style=dashed];")
    lines.append("  }")
    lines.append("}")
    return "\n".join(lines) + "\n"
