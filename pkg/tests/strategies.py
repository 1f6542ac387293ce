"""Hypothesis strategies shared by the test modules."""
from hypothesis import strategies as st

from symptangle import alcove as al
from symptangle import tanglelang as tl
from symptangle.errors import SymptangleError


def candidates(marks, r):
    n = len(marks)
    out = [tl.cup(i) for i in range(1, n + 2)]
    out += [tl.cup(i, al.half_vertex(r, r - 1)) for i in range(1, n + 2)]
    for i in range(1, n):
        out += [tl.braid(i, 1), tl.braid(i, -1), tl.cap(i), tl.merge(i)]
    for i in range(1, n + 1):
        out.append(tl.split(i))
    for i in range(1, n - 1):
        out.append(tl.vcap(i))
    out += [tl.vcup(i) for i in range(1, n + 2)]
    return out


@st.composite
def words(draw, max_len=6, ranks=(2, 3), max_width=9):
    """Random valid words: at each level pick among generators that apply."""
    r = draw(st.sampled_from(ranks))
    one = tl.Marking(1, tl.one(r))
    k = draw(st.integers(0, 2))
    incoming = tuple([one, one.dual()] * k)
    if draw(st.booleans()):
        incoming = tuple([one] * (2 * r + 1 if r == 2 else 4))
    marks = incoming
    gens = []
    for _ in range(draw(st.integers(0, max_len))):
        ok = []
        for g in candidates(marks, r):
            try:
                nxt = tl.step(marks, g, r)
            except SymptangleError:
                continue
            if len(nxt) <= max_width:
                ok.append((g, nxt))
        if not ok:
            break
        g, marks = draw(st.sampled_from(ok))
        gens.append(g)
    return tl.TangleWord(r, incoming, tuple(gens))


P2 = tl.Marking(1, tl.one(2))
N2 = P2.dual()


def small_words(max_len=4, width=5):
    """All words of length <= max_len from (+,+,+,-,-) whose levels have <= width strands."""
    inc = (P2, P2, P2, N2, N2)
    out = []

    def rec(gens, marks):
        out.append(gens)
        if len(gens) == max_len:
            return
        n = len(marks)
        cands = [tl.braid(i, s) for i in range(1, n) for s in (1, -1)]
        cands += [tl.cap(i) for i in range(1, n)] + [tl.cup(i) for i in range(1, n + 2)]
        for g in cands:
            try:
                nxt = tl.step(marks, g, 2)
            except SymptangleError:
                continue
            if len(nxt) <= width:
                rec(gens + (g,), nxt)

    rec((), inc)
    return [tl.TangleWord(2, inc, g) for g in out]
