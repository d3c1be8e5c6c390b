"""U/D genus words: lattice paths that index the genus part of a cover.

The active edge starts with degree 2 after the first loop.  Each further loop
is a U (degree +1) or a D (degree -1); the degree may never drop below 1.
"""
from __future__ import annotations

from dataclasses import dataclass

from .core import DomainError

START_DEGREE = 2
FLOOR = 1


@dataclass(frozen=True, order=True)
class GenusWord:
    letters: str

    def __post_init__(self):
        if set(self.letters) - {"U", "D"}:
            raise DomainError(f"genus words use only U and D, got {self.letters!r}")
        height = START_DEGREE
        for ch in self.letters:
            height += 1 if ch == "U" else -1
            if height < FLOOR:
                raise DomainError(f"word {self.letters!r} drops the active degree below {FLOOR}")

    @property
    def genus(self) -> int:
        return len(self.letters) + 1

    @property
    def d_count(self) -> int:
        return self.letters.count("D")

    @property
    def active_degree(self) -> int:
        return START_DEGREE + self.letters.count("U") - self.letters.count("D")

    def joined_ends(self, ell: int) -> int:
        return self.d_count + ell

    def degrees(self) -> list[int]:
        """Active degree before the first letter and after each letter."""
        out = [START_DEGREE]
        for ch in self.letters:
            out.append(out[-1] + (1 if ch == "U" else -1))
        return out

    def text(self) -> str:
        return self.letters or "-"

    @classmethod
    def parse(cls, text: str) -> "GenusWord":
        return cls("" if text == "-" else text)


def enumerate_words(g: int, min_d_count: int = 0) -> list[GenusWord]:
    """All valid words of length g-1 with at least ``min_d_count`` D's, lex order U < D."""
    if g < 1:
        raise DomainError(f"genus words need g >= 1, got {g}")
    length = g - 1
    out: list[GenusWord] = []

    def walk(prefix: str, height: int, downs: int) -> None:
        remaining = length - len(prefix)
        if remaining == 0:
            if downs >= min_d_count:
                out.append(GenusWord(prefix))
            return
        # prune: even all-D from here cannot reach the required count
        if downs + remaining < min_d_count:
            return
        walk(prefix + "U", height + 1, downs)
        if height - 1 >= FLOOR:
            walk(prefix + "D", height - 1, downs + 1)

    walk("", START_DEGREE, 0)
    return out


def _height_table(g: int) -> dict[int, int]:
    """Number of valid words of length g-1 ending at each height (ballot recursion)."""
    if g < 1:
        raise DomainError(f"g={g} < 1")
    layer = {START_DEGREE: 1}
    for _ in range(g - 1):
        nxt: dict[int, int] = {}
        for h, c in layer.items():
            nxt[h + 1] = nxt.get(h + 1, 0) + c
            if h - 1 >= FLOOR:
                nxt[h - 1] = nxt.get(h - 1, 0) + c
        layer = nxt
    return layer


def count_exact(g: int, i: int) -> int:
    """Words with exactly i D's (equivalently final active degree g+1-2i)."""
    if i < 0:
        return 0
    return _height_table(g).get(g + 1 - 2 * i, 0)


def count_at_least(g: int, i: int) -> int:
    """Words whose final active degree is at least g+1-2i, i.e. with at most i D's."""
    if not 0 <= i <= g // 2:
        raise DomainError(f"need 0 <= i <= floor(g/2), got i={i}, g={g}")
    table = _height_table(g)
    return sum(c for h, c in table.items() if h >= g + 1 - 2 * i)
