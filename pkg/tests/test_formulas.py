from __future__ import annotations

import pytest
from hypothesis import assume, given, settings, strategies as st

from tevelev.core import DomainError, Params, Profile, binomial, validate
from tevelev.formulas import Provenance, negative_twist_deficit, tev_classical, tev_ell, tev_general
from tevelev.grid import build_grid, build_grid_general


def test_classical_values():
    assert tev_classical(0).value == 1
    assert tev_classical(3).value == 8
    value = 1
    for _ in range(20):
        value *= 2
    assert tev_classical(20).value == value == 1048576
    assert tev_classical(3).provenance is Provenance.CLASSICAL


@pytest.mark.parametrize("g, ell, want", [
    (1, 1, 2), (2, 1, 4), (1, 2, 2), (2, -1, 1), (3, -1, 4),
])
def test_twisted_values_from_the_worked_examples(g, ell, want):
    assert tev_ell(g, ell).value == want


def test_negative_twist_against_grid_enumeration():
    # the grid is an independent route: it counts cells row by row
    assert tev_ell(4, -2).value == len(build_grid(4, -2)) == 2


def test_provenance_tags():
    assert tev_ell(2, 1).provenance is Provenance.POSITIVE_TWIST
    assert tev_ell(3, -1).provenance is Provenance.NEGATIVE_TWIST
    assert tev_ell(0, 1).provenance is Provenance.EXTRAPOLATED


def test_negative_twist_needs_enough_genus():
    with pytest.raises(DomainError):
        tev_ell(1, -1)
    with pytest.raises(DomainError):
        tev_ell(-1, 0)


@pytest.mark.parametrize("g, ell, mu, want", [
    (2, 0, "1,1;1;1;1", 3),
    (2, 0, "1,1,1;1;1", 1),
    (1, 1, "1,1,1;1;1;1", 1),
    (2, 0, "2;2;1", 2),
])
def test_general_values(g, ell, mu, want):
    value = tev_general(Params.from_text(g, ell, mu))
    assert value.value == want
    assert value.provenance is Provenance.GENERAL


def test_two_doubled_points_give_two():
    # magnitudes (2,2,1): 4 - 1 - 1, confirmed by counting grid classes
    p = Params.from_text(2, 0, "1,1;1,1;1")
    assert tev_general(p).value == 2
    assert len(build_grid_general(p)) == 2


def test_general_rejects_invalid_profiles():
    with pytest.raises(DomainError):
        tev_general(Params.from_text(2, 0, "1,1;1;1"))


@st.composite
def instances(draw):
    g = draw(st.integers(1, 8))
    ell = draw(st.integers(-3, 3))
    base = Params.all_simple(g, ell)
    assume(validate(base).ok)
    n = base.n_simple
    k = draw(st.integers(3, n))
    cuts = sorted(draw(st.lists(st.integers(1, n - 1), min_size=k - 1, max_size=k - 1, unique=True)))
    mags = sorted((b - a for a, b in zip([0] + cuts, cuts + [n])), reverse=True)
    assume(max(mags) <= base.d)
    return g, ell, mags


def _split(m: int, pieces: int) -> tuple[int, ...]:
    pieces = max(1, min(pieces, m))
    return tuple([m // pieces + (1 if i < m % pieces else 0) for i in range(pieces)])


@settings(max_examples=150, deadline=None)
@given(instances(), st.integers(1, 4))
def test_value_depends_only_on_magnitudes(inst, pieces):
    g, ell, mags = inst
    flat = Params(g, ell, tuple(Profile((1,) * m) for m in mags))
    lumped = Params(g, ell, tuple(Profile(_split(m, pieces)) for m in mags))
    assert tev_general(flat).value == tev_general(lumped).value


@settings(max_examples=150, deadline=None)
@given(instances())
def test_general_value_is_bounded_by_classical(inst):
    g, ell, mags = inst
    v = tev_general(Params(g, ell, tuple(Profile((m,)) for m in mags))).value
    assert 0 <= v <= 2 ** g


@pytest.mark.parametrize("g", range(1, 11))
@pytest.mark.parametrize("ell", range(-3, 4))
def test_all_simple_reduction(g, ell):
    base = Params.all_simple(g, ell)
    if not validate(base).ok:
        return
    explicit = Params(g, ell, tuple(Profile((1,)) for _ in range(base.n)))
    assert tev_general(explicit).value == tev_ell(g, ell).value


@pytest.mark.parametrize("g", range(0, 17))
def test_weighted_row_identity(g):
    total = sum((binomial(g, i) - binomial(g, i - 1)) * (g + 1 - 2 * i) for i in range(g // 2 + 1))
    assert total == 2 ** g


def test_deficit_is_zero_without_negative_twist():
    assert negative_twist_deficit(5, 0) == 0
    assert negative_twist_deficit(4, -1) == 5
