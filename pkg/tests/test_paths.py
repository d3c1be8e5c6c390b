from __future__ import annotations

from collections import Counter

import pytest
from hypothesis import given, strategies as st

from tevelev.core import DomainError, binomial
from tevelev.paths import GenusWord, count_at_least, count_exact, enumerate_words


def test_small_enumerations():
    assert [w.text() for w in enumerate_words(3)] == ["UU", "UD", "DU"]
    assert [w.text() for w in enumerate_words(4, 2)] == ["UDD", "DUD"]
    assert [w.text() for w in enumerate_words(1)] == ["-"]


def test_counts_for_small_genus():
    assert count_exact(3, 1) == 2
    assert count_exact(4, 2) == 2
    assert count_at_least(3, 1) == 3
    assert count_at_least(6, 3) == 20


@pytest.mark.parametrize("g", range(1, 17))
def test_counts_agree_with_exhaustive_enumeration(g):
    by_downs = Counter(w.d_count for w in enumerate_words(g))
    for i in range(0, g // 2 + 1):
        assert count_exact(g, i) == by_downs[i] == binomial(g, i) - binomial(g, i - 1)
        assert count_at_least(g, i) == sum(by_downs[x] for x in range(i + 1)) == binomial(g, i)


def test_count_at_least_range():
    with pytest.raises(DomainError):
        count_at_least(4, 3)
    with pytest.raises(DomainError):
        count_at_least(4, -1)


def test_invalid_words():
    with pytest.raises(DomainError):
        GenusWord("DD")
    with pytest.raises(DomainError):
        GenusWord("UX")
    assert GenusWord("UDD").degrees() == [2, 3, 2, 1]


@given(st.text(alphabet="UD", max_size=14))
def test_word_validity_matches_floor(letters):
    heights = [2]
    for ch in letters:
        heights.append(heights[-1] + (1 if ch == "U" else -1))
    if min(heights) >= 1:
        w = GenusWord(letters)
        assert w.active_degree == heights[-1]
        assert w.genus == len(letters) + 1
        assert GenusWord.parse(w.text()) == w
    else:
        with pytest.raises(DomainError):
            GenusWord(letters)


@given(st.integers(1, 12), st.integers(0, 6))
def test_enumeration_respects_minimum(g, i):
    words = enumerate_words(g, i)
    assert all(w.d_count >= i for w in words)
    assert len(words) == len({w.letters for w in words})
    assert len(words) == sum(1 for w in enumerate_words(g) if w.d_count >= i)
