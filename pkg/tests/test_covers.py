from __future__ import annotations

import copy
import json
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from tevelev.core import Params, validate
from tevelev.formulas import tev_ell
from tevelev.covers import (DilationMatrix, MarkedPlan, NonSquareFault, StabilizationMismatch, _Graph,
                            automorphism_factor, build_cover_with_plan, build_covers, dilation_matrix,
                            exact_determinant, is_generic_preimage, lcm_factor, multiplicity,
                            multiplicity_breakdown, preimage_lengths, solve_exact, split_blocks, stabilize,
                            to_dot, validate_cover)
from tevelev.paths import GenusWord

# printed dilation matrices for (g, ell) = (1, 1); rows x1..x6, L1..L3
PRINTED_M1 = [
    [2, 0, 0, 0, 0, 0, 0, 0, 0],
    [0, 1, 0, 0, 0, 0, 0, 0, 0],
    [0, 0, 1, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 1, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 1, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, 1, 0],
    [0, 0, 0, 0, 0, 1, 0, 0, 0],
    [0, 0, 0, 1, 1, 0, 2, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, 2, 1],
]
PRINTED_M2 = [
    [2, 0, 0, 0, 0, 0, 0, 0, 0],
    [0, 1, 0, 0, 0, 0, 0, 0, 0],
    [0, 0, 1, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 1, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 1, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 1, 0, 0],
    [0, 0, 2, 1, 3, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 3, 2, 1, 0],
    [0, 0, 0, 0, 0, 0, 0, 0, 1],
]
# printed matrix for (g, ell) = (2, -1); rows x1..x6
PRINTED_NEG = [
    [2, 0, 0, 0, 0, 0],
    [0, 1, 0, 0, 0, 0],
    [0, 0, 1, 0, 0, 0],
    [0, 0, 1, 2, 0, 0],
    [0, 0, 0, 0, 1, 0],
    [0, 0, 0, 0, 0, 1],
]


def column_matching(a, b):
    """Column map c -> c' with a[:, c] == b[:, c'] for every c, rows kept in place, or None."""
    cols_a = [tuple(r[c] for r in a) for c in range(len(a[0]))]
    cols_b = [tuple(r[c] for r in b) for c in range(len(b[0]))]
    if sorted(cols_a) != sorted(cols_b):
        return None
    free = list(range(len(cols_b)))
    out = {}
    for c, col in enumerate(cols_a):
        hit = next(i for i in free if cols_b[i] == col)
        free.remove(hit)
        out[c] = hit
    return out


@pytest.fixture(scope="module")
def covers_1_1():
    return build_covers(1, 1)


def test_covers_for_g1_ell1_match_the_printed_matrices(covers_1_1):
    assert len(covers_1_1) == 2
    mats = [dilation_matrix(c).entries for c in covers_1_1]
    assert column_matching(mats[0], PRINTED_M1) is not None
    assert column_matching(mats[1], PRINTED_M2) is not None
    for m in mats:
        assert abs(exact_determinant(DilationMatrix([""] * 9, [""] * 9, m))) == 2
    assert abs(exact_determinant(DilationMatrix([""] * 9, [""] * 9, PRINTED_M1))) == 2
    assert abs(exact_determinant(DilationMatrix([""] * 9, [""] * 9, PRINTED_M2))) == 2


def test_stabilized_lengths_in_printed_labels(covers_1_1):
    c = covers_1_1[0]
    stab = stabilize(c)
    assert stab.source_forms[0] == {1: 2}
    mapping = column_matching(dilation_matrix(c, stab).entries, PRINTED_M1)
    L2 = {mapping[k - 1] + 1: v for k, v in stab.target_forms[1].items()}
    assert L2 == {4: 1, 5: 1, 7: 2}


def test_cut_join_order_of_the_two_g1_covers(covers_1_1):
    # first: a cut before the join; second: the join before a cut
    assert [c.plan for c in covers_1_1] == ["c1-L-J-c0-T", "c0-L-J-c1-T"]


def test_negative_twist_cover():
    (c,) = build_covers(2, -1)
    m = dilation_matrix(c)
    assert m.entries == PRINTED_NEG
    assert exact_determinant(m) == 4
    stab = stabilize(c)
    assert stab.source_forms[3] == {3: 1, 4: 2}
    # two loops with disjoint supports
    assert set(stab.source_forms[0]).isdisjoint(set(stab.source_forms[2]) | set(stab.source_forms[3]))
    br = multiplicity_breakdown(c)
    assert (br.automorphisms, br.hurwitz, abs(br.determinant), br.lcm) == (Fraction(1, 4), 1, 4, 1)
    assert br.value == 1


def test_g1_ell1_multiplicity_factors(covers_1_1):
    for c in covers_1_1:
        br = multiplicity_breakdown(c)
        assert (br.automorphisms, br.hurwitz, abs(br.determinant)) == (Fraction(1, 2), 1, 2)
        assert multiplicity(c) == 1


def test_genus_three_covers_are_pairwise_distinct():
    covers = build_covers(3, 0)
    assert len(covers) == 8
    # isomorphic covers give the same matrix up to a column permutation
    keys = {tuple(sorted(zip(*dilation_matrix(c).entries))) for c in covers}
    assert len(keys) == 8
    assert all(multiplicity(c) == 1 for c in covers)


@pytest.mark.parametrize("g", range(1, 7))
def test_genus_block_determinant(g):
    for c in build_covers(g, 0)[:4]:
        genus, marked = split_blocks(c, dilation_matrix(c))
        assert abs(exact_determinant(genus)) == 2 ** g
        assert abs(exact_determinant(marked)) == 1
        assert lcm_factor(c) == 1


@pytest.mark.parametrize("g, ell", [(g, ell) for g in range(1, 5) for ell in range(-2, 3)
                                    if validate(Params.all_simple(g, ell)).ok])
def test_every_cover_is_valid_and_counts_once(g, ell):
    covers = build_covers(g, ell)
    for c in covers:
        assert validate_cover(c).ok
        assert len(c.length_symbols()) == 5 * g + 4 * ell
        assert is_generic_preimage(c)
        assert automorphism_factor(c) == Fraction(1, 2 ** g)
        assert multiplicity(c) == 1
    assert len(covers) == tev_ell(g, ell).value


def test_a_plan_off_the_generic_point_is_rejected():
    p = Params.all_simple(1, 0)
    fake = build_cover_with_plan(p, GenusWord(""), 0, MarkedPlan(0, 1, False))
    assert validate_cover(fake).ok
    assert not is_generic_preimage(fake)


def test_bumped_factor_breaks_harmonicity_at_both_ends():
    c = copy.deepcopy(build_covers(1, 1)[0])
    e = next(e for e in c.edges.values() if not e.is_end and e.factor == 1)
    e.factor += 1
    report = validate_cover(c)
    assert not report.ok
    text = str(report)
    assert f"harmonicity at vertex {e.tail}:" in text
    assert f"harmonicity at vertex {e.head}:" in text


def test_positive_genus_vertex_breaks_riemann_hurwitz():
    c = copy.deepcopy(build_covers(1, 1)[0])
    v = next(iter(c.vertices.values()))
    v.genus = 1
    assert any("Riemann-Hurwitz" in x for x in validate_cover(c).violations)


def test_lost_mark_is_a_stabilization_mismatch():
    c = copy.deepcopy(build_covers(1, 1)[0])
    e = next(e for e in c.edges.values() if e.mark == 1)
    e.mark = None
    with pytest.raises(StabilizationMismatch):
        stabilize(c)


def test_stable_graph_is_left_alone():
    gr = _Graph()
    gr.add_edge(1, 1, {1: 1})
    gr.add_edge(1, 2, {2: 1})
    gr.legs[2].extend([1, 2])
    before = {k: (u, v, dict(f)) for k, (u, v, f) in gr.edges.items()}
    gr.reduce()
    assert {k: (u, v, dict(f)) for k, (u, v, f) in gr.edges.items()} == before


def test_contraction_adds_lengths():
    gr = _Graph()
    gr.add_edge(1, 1, {1: 2})
    gr.add_edge(1, 2, {2: 1})
    gr.add_edge(2, 3, {3: 1})
    gr.add_edge(3, 4, {4: 1})  # 4 is an unmarked leaf
    gr.legs[3].extend([1, 2])
    gr.reduce()
    forms = sorted(sorted(f.items()) for _, _, f in gr.edges.values())
    assert forms == [[(1, 2)], [(2, 1), (3, 1)]]


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 6).flatmap(lambda n: st.lists(
    st.lists(st.integers(-6, 6), min_size=n, max_size=n), min_size=n, max_size=n)))
def test_bareiss_matches_sympy(rows):
    m = DilationMatrix([""] * len(rows), [""] * len(rows), rows)
    assert exact_determinant(m) == sympy.Matrix(rows).det()


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 5).flatmap(lambda n: st.tuples(
    st.lists(st.lists(st.integers(-4, 4), min_size=n, max_size=n), min_size=n, max_size=n),
    st.lists(st.integers(-9, 9), min_size=n, max_size=n))))
def test_exact_solve(args):
    rows, rhs = args
    m = DilationMatrix([""] * len(rows), [""] * len(rows), rows)
    y = solve_exact(m, rhs)
    if exact_determinant(m) == 0:
        assert y is None
    else:
        assert [sum(a * b for a, b in zip(r, y)) for r in rows] == rhs


def test_non_square_matrix_is_a_fault():
    with pytest.raises(NonSquareFault):
        exact_determinant(DilationMatrix(["x1"], ["y1", "y2"], [[1, 0]]))


def test_preimage_lengths_are_positive(covers_1_1):
    y = preimage_lengths(dilation_matrix(covers_1_1[1]))
    assert y is not None and all(v > 0 for v in y)


def test_exports(covers_1_1):
    c = covers_1_1[0]
    text = to_dot(c)
    assert text.startswith("graph cover {") and text.rstrip().endswith("}")
    assert 'label="2"' in text and "m1" in text
    rec = json.loads(json.dumps(c.record()))
    assert len(rec["target"]["edges"]) == 9
    assert sum(1 for e in rec["edges"] if e["mark"] is not None) == 6
