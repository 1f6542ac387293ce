import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from strategies import N2, P2, small_words
from symptangle import betti, cerf
from symptangle import corrcalc as cc
from symptangle import holovar as hv
from symptangle import tanglelang as tl
from symptangle.corrcalc import Membership, Product
from symptangle.errors import BoundaryMismatch, NotALink, NotApplicable, NotEliminable

P3 = tl.Marking(1, tl.one(3))


def word(r, incoming, *gens):
    return tl.TangleWord(r, tuple(incoming), tuple(gens))


def evaluate(wd, vals, r):
    out = np.eye(r, dtype=complex)
    for v, e in wd:
        out = out @ (vals[v] if e > 0 else vals[v].conj().T)
    return out


def relation_residual(system, vals):
    worst = 0.0
    for rel in system.relations:
        m = evaluate(rel.word, vals, system.rank)
        if isinstance(rel, Product):
            worst = max(worst, np.linalg.norm(m - np.eye(system.rank)))
        else:
            ang = hv.eigenangles(m)
            worst = max(worst, np.max(np.abs(ang - [float(e) for e in rel.label.entries])))
    return worst


@pytest.fixture(scope="module")
def m5():
    return hv.solve(hv.problem(2, [tl.one(2)] * 5), hv.SolverConfig(seed=0, restarts=5)).b


# ---------------------------------------------------------------------------
# word helpers


@given(st.lists(st.tuples(st.sampled_from(["x1", "m1", "y1"]), st.sampled_from([1, -1])), max_size=8))
def test_reduce_and_invert(wd):
    red = cc.reduce_word(tuple(wd))
    assert all(not (a[0] == b[0] and a[1] == -b[1]) for a, b in zip(red, red[1:]))
    assert cc.reduce_word(red + cc.invert(red)) == ()
    assert cc.reduce_word(red) == red


def test_var_key_orders_sides():
    assert sorted(["y1", "m2", "x3", "x1"], key=cc.var_key) == ["x1", "x3", "m2", "y1"]


# ---------------------------------------------------------------------------
# generator systems


def test_cup_over_three_spectators():
    c = cc.correspondence_of(tl.cup(1, tl.one(2)), (P2, P2, P2), 2)
    prods = [r for r in c.relations if isinstance(r, Product)]
    assert len(prods) == 4
    assert Product((("y1", 1), ("y2", 1))) in c.relations
    assert c.simply_connected and c.disk_invariant == "zero"


def test_braid_graph():
    c = cc.correspondence_of(tl.braid(1, 1), (P2, P2), 2)
    assert set(c.relations) == {
        cc.Equal("y1", (("x2", 1),)),
        cc.Equal("y2", (("x2", -1), ("x1", 1), ("x2", 1))),
    }


def test_merge_membership():
    c = cc.correspondence_of(tl.merge(1), (P3, P3), 3)
    mem = [r for r in c.relations if isinstance(r, Membership)]
    assert mem == [Membership((("x1", 1), ("x2", 1)), tl.two(3))]


def test_inapplicable_generator():
    with pytest.raises(NotApplicable):
        cc.correspondence_of(tl.cap(1), (P2, P2), 2)


def test_relations_use_declared_variables():
    for g in (tl.braid(3, -1), tl.cup(3), tl.cap(2)):
        c = cc.correspondence_of(g, (P2, P2, N2, N2), 2)
        for rel in c.relations:
            assert rel.variables() <= c.declared()


# ---------------------------------------------------------------------------
# composition


def test_cup_then_cap_is_diagonal():
    marks = (P2, P2, P2)
    c1 = cc.correspondence_of(tl.cup(1), marks, 2)
    c2 = cc.correspondence_of(tl.cap(2), tl.step(marks, tl.cup(1), 2), 2)
    comp = cc.compose_embedded(c1, c2)
    assert cc.is_diagonal(comp)
    assert comp.canonical_string() == cc.diagonal(marks, 2).canonical_string()


@pytest.mark.parametrize("g", [tl.braid(1, 1), tl.braid(3, -1), tl.cup(2), tl.cap(2)])
def test_diagonal_is_identity(g):
    marks = (P2, P2, N2, N2)
    c = cc.correspondence_of(g, marks, 2)
    d_left = cc.diagonal(marks, 2)
    d_right = cc.diagonal([m for _, m in c.right], 2)
    assert cc.compose_embedded(d_left, c).canonical_string() == c.canonical_string()
    assert cc.compose_embedded(c, d_right).canonical_string() == c.canonical_string()


def test_merge_then_cap_is_single_vertex():
    marks = (P3, P3, tl.Marking(-1, tl.alcove.involution(tl.two(3))))
    c1 = cc.correspondence_of(tl.merge(1), marks, 3)
    c2 = cc.correspondence_of(tl.cap(1), tl.step(marks, tl.merge(1), 3), 3)
    comp = cc.compose_embedded(c1, c2)
    vcap = cc.correspondence_of(tl.vcap(1), marks, 3)
    assert comp.canonical_string() == vcap.canonical_string()
    assert [str(r) for r in comp.relations] == ["x1 x2 x3 = 1"]


def test_braid_composition_matches_substitution(m5):
    marks = (P2,) * 5
    c1 = cc.correspondence_of(tl.braid(2, 1), marks, 2)
    c2 = cc.correspondence_of(tl.braid(3, -1), marks, 2)
    comp = cc.compose_embedded(c1, c2)
    x = list(m5)
    m = [x[0], x[2], x[2].conj().T @ x[1] @ x[2], x[3], x[4]]
    a, b = m[2], m[3]
    y = [m[0], m[1], a @ b @ a.conj().T, a, m[4]]
    vals = {f"x{k + 1}": x[k] for k in range(5)} | {f"y{k + 1}": y[k] for k in range(5)}
    assert relation_residual(comp, vals) < 1e-12
    wrong = dict(vals, y3=y[3], y4=y[2])
    assert relation_residual(comp, wrong) > 1e-3


def test_boundary_mismatch():
    c1 = cc.correspondence_of(tl.cup(1), (P2,), 2)
    with pytest.raises(BoundaryMismatch):
        cc.compose_embedded(c1, c1)


def test_free_circle_is_not_embedded():
    c1 = cc.correspondence_of(tl.cup(1), (), 2)
    c2 = cc.correspondence_of(tl.cap(1), (P2, N2), 2)
    with pytest.raises(NotEliminable):
        cc.compose_embedded(c1, c2)
    fib = cc.compose_fibred(c1, c2)
    assert fib.fibres and not fib.relations


def test_associativity_on_small_triples():
    checked = 0
    for w in (w for w in small_words(max_len=3) if len(w) == 3):
        a, b, c = cc.raw_sequence(w).systems
        try:
            left = cc.compose_embedded(cc.compose_embedded(a, b), c)
            right = cc.compose_embedded(a, cc.compose_embedded(b, c))
        except NotEliminable:
            continue
        assert left.canonical_string() == right.canonical_string(), tl.serialize(w)
        checked += 1
    assert checked > 100


# ---------------------------------------------------------------------------
# sequences


def test_empty_word_gives_empty_sequence():
    assert len(cc.sequence_of_word(word(2, [P2, N2]))) == 0


def test_zigzag_reduces_to_empty():
    w = word(2, [P2], tl.cup(1), tl.cap(2))
    assert len(cc.sequence_of_word(w, reduce=False)) == 2
    assert len(cc.sequence_of_word(w)) == 0


def test_sequence_boundaries_chain():
    w = word(2, [P2, P2, P2], tl.cup(2), tl.braid(1, 1), tl.braid(1, -1), tl.cap(2))
    seq = cc.raw_sequence(w)
    for s, t in zip(seq.systems, seq.systems[1:]):
        assert [m for _, m in s.right] == [m for _, m in t.left]
    assert seq.disk_flag() == "zero"


def test_cerf_coherence_exhaustive():
    for w in small_words():
        nf = cerf.normalize(w)
        assert cc.normal_form(cc.sequence_of_word(w)) == cc.normal_form(cc.sequence_of_word(nf)), tl.serialize(w)


# ---------------------------------------------------------------------------
# pipeline


@pytest.mark.parametrize("r", [2, 3, 4])
def test_unknot(r):
    w = tl.parse(f"group SU({r})\nword: cup 1; cap 1\n")
    rep = cc.invariant_pipeline(w, r)
    assert rep.hf_poly.coeffs == betti.unknot_hf(r).coeffs
    assert list(rep.hf_poly.coeffs) == [1, 0] * (r - 1) + [1]
    assert rep.disk_flag == "zero"
    doc = json.loads(json.dumps(rep.to_json()))
    assert {"disk_flag", "sequence", "hf_poly"} <= set(doc)


def test_trefoil_is_passed_through():
    w = tl.parse("group SU(2)\nword: cup 1; cup 2; braid 1 +; braid 1 +; braid 1 +; cap 2; cap 1\n")
    rep = cc.invariant_pipeline(w, 2)
    assert rep.hf_poly is None and rep.note.startswith("HF not computed")
    assert rep.sequence and rep.disk_flag == "zero"


def test_open_word_is_not_a_link():
    with pytest.raises(NotALink):
        cc.invariant_pipeline(word(2, [P2, N2], tl.cap(1)), 2)


# ---------------------------------------------------------------------------
# numerics


def test_cross_check_zigzag(m5):
    marks = (P2,) * 5
    c1 = cc.correspondence_of(tl.cup(1), marks, 2)
    c2 = cc.correspondence_of(tl.cap(2), tl.step(marks, tl.cup(1), 2), 2)
    res = cc.cross_check(c1, c2, cc.compose_embedded(c1, c2), m5)
    assert res.agree and res.max_distance < 1e-8


def test_cross_check_braids(m5):
    marks = (P2,) * 5
    c1 = cc.correspondence_of(tl.braid(2, 1), marks, 2)
    c2 = cc.correspondence_of(tl.braid(3, -1), marks, 2)
    res = cc.cross_check(c1, c2, cc.compose_embedded(c1, c2), m5)
    assert res.agree


def test_cross_check_detects_wrong_composite(m5):
    marks = (P2,) * 5
    c1 = cc.correspondence_of(tl.braid(2, 1), marks, 2)
    c2 = cc.correspondence_of(tl.braid(3, -1), marks, 2)
    wrong = cc.compose_embedded(c2, cc.correspondence_of(tl.braid(2, 1), marks, 2))
    assert not cc.cross_check(c1, c2, wrong, m5).agree


def test_vertex_fibre_dimension():
    dim_l, dim_plus, residual = cc.vertex_dimension_check()
    assert dim_l - dim_plus == 2
    assert residual < 1e-10
