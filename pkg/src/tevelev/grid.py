"""The grid of solutions: rows are genus words, columns are marked fragments.

Column j (1 <= j <= n-2) stands for the fragment whose right tree carries the
marks 1..j, whose middle carries j+1 and whose left tree carries j+2..n.  A row
whose word has i D's joins m = i+ell extra sheets and accepts the columns
m+1 <= j <= n-2-m, i.e. g+1-2i of them.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Optional, Sequence

from .core import DomainError, Params, require_valid
from .paths import GenusWord, enumerate_words


@dataclass(frozen=True)
class FragmentClass:
    j: int
    left_marks: tuple[int, ...] = ()
    middle_marks: tuple[int, ...] = ()
    right_marks: tuple[int, ...] = ()
    merge_size: int = 1
    # columns of the classical grid identified into this class (just (j,) unless merged)
    columns: tuple[int, ...] = field(default=())

    def __post_init__(self):
        if self.merge_size < 1:
            raise DomainError("merge_size must be positive")
        if not self.columns:
            object.__setattr__(self, "columns", (self.j,))


@dataclass(frozen=True)
class GridCell:
    word: GenusWord
    fragment: FragmentClass
    joined_ends: int

    @property
    def j(self) -> int:
        return self.fragment.j

    @property
    def delta(self) -> int:
        return self.word.active_degree

    @property
    def merge_size(self) -> int:
        return self.fragment.merge_size

    def record(self) -> dict:
        return {
            "word": self.word.text(),
            "j": self.j,
            "delta": self.delta,
            "joined_ends": self.joined_ends,
            "merge_size": self.merge_size,
        }


def classical_fragment(j: int, n: int) -> FragmentClass:
    return FragmentClass(
        j=j,
        left_marks=tuple(range(j + 2, n + 1)),
        middle_marks=(j + 1,),
        right_marks=tuple(range(1, j + 1)),
    )


def column_band(m: int, n: int) -> range:
    """Columns compatible with a row that has m joined ends."""
    return range(m + 1, n - 1 - m)


def _check_simple_instance(g: int, ell: int) -> None:
    if g < 1:
        raise DomainError(f"grids need g >= 1, got g={g}")
    require_valid(Params.all_simple(g, ell))


def build_grid(g: int, ell: int) -> list[GridCell]:
    _check_simple_instance(g, ell)
    n = g + 3 + 2 * ell
    cells = []
    for word in enumerate_words(g, max(0, -ell)):
        m = word.joined_ends(ell)
        for j in column_band(m, n):
            cells.append(GridCell(word, classical_fragment(j, n), m))
    return cells


# ---------------------------------------------------------------- general profiles

def _mark_owner(params: Params) -> list[int]:
    """owner[c-1] = profile index (1-based) holding classical mark c.

    The first profile takes the lowest marks, the last profile the highest.
    """
    owner = []
    for h, mag in enumerate(params.magnitudes(), start=1):
        owner.extend([h] * mag)
    return owner


def transform_fragment(j: int, params: Params) -> Optional[FragmentClass]:
    """Place the profile marks on fragment j, or return None when impossible.

    Marks of one profile sitting on the same tree are combined.  A middle
    profile spread over two trees is moved onto the middle.  The first profile
    must fit in the right tree and the last one in the left tree.
    """
    require_valid(params)
    n = params.n_simple
    if not 1 <= j <= n - 2:
        raise DomainError(f"fragment index j={j} outside [1, {n - 2}]")
    mags = params.magnitudes()
    k = len(mags)
    if mags[0] > j or mags[-1] > n - j - 1:
        return None
    owner = _mark_owner(params)
    right = sorted({owner[c - 1] for c in range(1, j + 1)})
    middle = {owner[j]}
    left = sorted({owner[c - 1] for c in range(j + 2, n + 1)})
    # a middle profile touching two places goes to the middle
    for h in range(2, k):
        places = (h in right) + (h in middle) + (h in left)
        if places > 1:
            right = [x for x in right if x != h]
            left = [x for x in left if x != h]
            middle.add(h)
    return FragmentClass(j, tuple(left), tuple(sorted(middle)), tuple(right))


def _interior(m: int, n: int, first: int, last: int) -> range:
    """Columns of a row that survive the first/last profile removals."""
    lo = max(m + 1, first)
    hi = min(n - 2 - m, n - 1 - last)
    return range(lo, hi + 1)


def _row_plan(params: Params, m: int) -> tuple[set[int], list[tuple[int, ...]], set[int]]:
    """For one row: (dropped columns, merged groups, untouched interior columns)."""
    n = params.n_simple
    mags = params.magnitudes()
    pool = list(_interior(m, n, mags[0], mags[-1]))
    dropped: set[int] = set()
    groups: list[tuple[int, ...]] = []
    for mag in mags[1:-1]:
        excess = mag - m - 1
        if excess <= 0:
            continue
        if m == 0:
            # no joins: the lost fragments are simply gone
            take, pool = pool[:excess], pool[excess:]
            dropped.update(take)
        else:
            take, pool = pool[: excess + 1], pool[excess + 1:]
            groups.append(tuple(take))
        if len(take) < (excess if m == 0 else excess + 1):
            raise DomainError("row too narrow for the middle-profile rule")
    return dropped, groups, set(pool)


def build_grid_general(params: Params, merge_first: bool = True) -> list[GridCell]:
    """Classes of the grid for arbitrary profiles.

    Rules: columns j < |mu_1| and j > n-1-|mu_k| disappear; for every middle
    profile h and every row with m <= |mu_h|-2, |mu_h|-m-1 cells collapse away
    (merged into one class when the row has joins, dropped otherwise).
    ``merge_first`` only changes the order in which the rules are applied.
    """
    require_valid(params)
    g, ell = params.g, params.ell
    if g < 1:
        raise DomainError(f"grids need g >= 1, got g={g}")
    n = params.n_simple
    mags = params.magnitudes()
    base = build_grid(g, ell)
    if params.is_all_simple:
        return base

    def column_rules(cells):
        return [
            c for c in cells
            if mags[0] <= c.j <= n - 1 - mags[-1]
        ]

    def merge_rules(cells):
        out = []
        by_row: dict[GenusWord, list[GridCell]] = {}
        for c in cells:
            by_row.setdefault(c.word, []).append(c)
        for word, row in by_row.items():
            m = word.joined_ends(ell)
            dropped, groups, _ = _row_plan(params, m)
            lead = {grp[0]: grp for grp in groups}
            absorbed = {c for grp in groups for c in grp[1:]}
            for c in row:
                if c.j in dropped or c.j in absorbed:
                    continue
                if c.j in lead:
                    grp = lead[c.j]
                    frag = c.fragment
                    c = GridCell(word, FragmentClass(
                        frag.j, frag.left_marks, frag.middle_marks, frag.right_marks,
                        merge_size=len(grp), columns=grp), m)
                out.append(c)
        return out

    def relabel(cells):
        out = []
        for c in cells:
            placed = transform_fragment(c.j, params)
            if placed is None:
                raise DomainError(f"fragment {c.j} cannot carry the profiles")
            f = c.fragment
            out.append(GridCell(c.word, FragmentClass(
                f.j, placed.left_marks, placed.middle_marks, placed.right_marks,
                f.merge_size, f.columns), c.joined_ends))
        return out

    cells = merge_rules(column_rules(base)) if not merge_first else column_rules(merge_rules(base))
    return relabel(cells)


def class_count(cells: Sequence[GridCell]) -> int:
    return len(cells)


# ---------------------------------------------------------------- cut/join bound

def l2_feasibility(d: int, j1: int, j2: int, L1: int, L2: int, L3: int,
                   decomposition: Sequence[int]) -> bool:
    """Whether a (cuts, joins) configuration satisfies all the counting hypotheses."""
    if j1 < 0 or j2 < 0 or L1 < 0 or L2 < 0 or L3 < 0:
        return False
    if j1 + j2 > (d - 1) // 2:
        return False
    if d - 2 * (j1 + j2) <= 0:
        return False
    if L1 + L2 + L3 != d - 2:
        return False
    if L3 < L2:
        return False
    parts = list(decomposition)
    if not parts or sum(parts) != L1 + 1:
        return False
    if len(parts) > d - j1 - j2:
        return False
    return all(1 <= p <= L2 + 1 for p in parts)


def _compositions(total: int, max_parts: int, max_part: int):
    """Compositions of ``total`` into at most ``max_parts`` parts, each <= max_part."""
    if total == 0:
        yield ()
        return
    if max_parts == 0:
        return
    for first in range(1, min(total, max_part) + 1):
        for rest in _compositions(total - first, max_parts - 1, max_part):
            yield (first,) + rest


def l2_scan(d_max: int, l2_min: int = 4):
    """Exhaustively search d <= d_max for feasible tuples with L2 >= l2_min.

    Returns (feasible tuples found, number of tuples examined).  The
    decomposition search is exhaustive but stops at the first witness per
    tuple, since one witness already makes the tuple feasible.
    """
    found = []
    examined = 0
    for d in range(1, d_max + 1):
        half = (d - 1) // 2
        for j1, j2 in product(range(half + 1), repeat=2):
            if j1 + j2 > half:
                continue
            for L2 in range(l2_min, d - 1):
                for L3 in range(L2, d - 1 - L2):
                    L1 = d - 2 - L2 - L3
                    if L1 < 0:
                        continue
                    examined += 1
                    for dec in _compositions(L1 + 1, d - j1 - j2, L2 + 1):
                        if l2_feasibility(d, j1, j2, L1, L2, L3, dec):
                            found.append((d, j1, j2, L1, L2, L3, dec))
                            break
    return found, examined
