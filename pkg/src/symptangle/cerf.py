"""Cerf-move rewriting on tangle words.

Moves act on one or two adjacent generators. Forward moves either swap two
generators supported on disjoint strands (with reindexing) or shorten the
word; each forward move has an inverse carried as an explicit replacement,
which is how traces are reversed. ``normalize`` is greedy cancellation plus a
bubble sort of commuting neighbours; ``equivalent`` tries normal forms first
and falls back to a bidirectional breadth-first search.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

from . import tanglelang as tl
from .errors import BoundaryMismatch, InvalidWord, NotApplicable, SymptangleError

MAX_VISITED = 100_000
DEFAULT_DEPTH = 6

KIND_ORDER = {"cup": 0, "cap": 1, "merge": 2, "split": 3, "braid": 4, "vcup": 5, "vcap": 6}


class MoveKind(str, enum.Enum):
    CUP_CAP_CANCEL = "CupCapCancel"
    DISTANT_COMMUTE = "DistantCommute"
    CYLINDER_GLUE = "CylinderGlue"
    VERTEX_CRIT_SWITCH = "VertexCritSwitch"
    VERTEX_VERTEX_SWITCH = "VertexVertexSwitch"
    VERTEX_CRIT_CANCEL = "VertexCritCancel"


COMMUTES = (MoveKind.DISTANT_COMMUTE, MoveKind.VERTEX_CRIT_SWITCH, MoveKind.VERTEX_VERTEX_SWITCH)
CANCELS = (MoveKind.CUP_CAP_CANCEL, MoveKind.CYLINDER_GLUE, MoveKind.VERTEX_CRIT_CANCEL)


@dataclass(frozen=True)
class Move:
    """``params`` is ``()`` or ``("left",)``/``("right",)`` for a forward move,
    ``("inverse", n_replaced, segment)`` for the inverse of one."""

    kind: MoveKind
    position: int
    params: tuple = ()

    @property
    def is_inverse(self):
        return bool(self.params) and self.params[0] == "inverse"

    def __str__(self):
        if self.is_inverse:
            seg = " ; ".join(str(g) for g in self.params[2])
            return f"{self.kind.value}^-1 @{self.position} [{seg}]"
        extra = f" {self.params[0]}" if self.params else ""
        return f"{self.kind.value} @{self.position}{extra}"


@dataclass
class EquivalenceProof:
    verdict: str
    trace: list = field(default_factory=list)

    @property
    def proved(self):
        return self.verdict == "yes"


# ---------------------------------------------------------------------------
# local rewrites on generator pairs


def commute_pair(g1, g2, variant=None):
    """Swap ``g1`` (below) and ``g2`` (above) if they act on disjoint strands.

    Returns the new ``(lower, upper)`` pair or ``None``. When both sides are
    possible (a cap directly followed by a cup at the same slot) ``variant``
    selects one; the default prefers ``right``.
    """
    in1, out1 = g1.arity
    in2, out2 = g2.arity
    d1, d2 = out1 - in1, out2 - in2
    right = g2.i >= g1.i + out1 and g2.i - d1 >= 1
    left = g2.i + in2 <= g1.i
    if variant in (None, "right") and right:
        return g2.shifted(-d1), g1
    if variant in (None, "left") and left:
        return g2, g1.shifted(d2)
    return None


def commute_kind(g1, g2):
    v1, v2 = g1.is_vertex, g2.is_vertex
    if v1 and v2:
        return MoveKind.VERTEX_VERTEX_SWITCH
    crit = ("cup", "cap")
    if (v1 and g2.kind in crit) or (v2 and g1.kind in crit):
        return MoveKind.VERTEX_CRIT_SWITCH
    return MoveKind.DISTANT_COMMUTE


def _vertex_crit_pair(w, p):
    """Replacement for a vertex next to a critical point, or ``None``."""
    g1, g2 = w.generators[p], w.generators[p + 1]
    if g1.kind == "merge" and g2.kind == "cap" and g2.i in (g1.i, g1.i - 1):
        return tl.vcap(g2.i)
    if g1.kind == "cup" and g2.kind == "split" and g2.i in (g1.i, g1.i + 1):
        lv = tl.levels(w.with_generators(w.generators[: p + 2]))
        return tl.vcup(g1.i, lv[-1][g1.i - 1 : g1.i + 2])
    return None


def _forward(w, m):
    gens = list(w.generators)
    p = m.position
    if not 0 <= p < len(gens) - 1:
        raise NotApplicable(f"{m}: position out of range")
    g1, g2 = gens[p], gens[p + 1]
    if m.kind in COMMUTES:
        variant = m.params[0] if m.params else None
        pair = commute_pair(g1, g2, variant)
        if pair is None or commute_kind(g1, g2) != m.kind:
            raise NotApplicable(f"{m}: {g1} and {g2} do not commute as {m.kind.value}")
        gens[p : p + 2] = pair
    elif m.kind == MoveKind.CUP_CAP_CANCEL:
        if not (g1.kind == "cup" and g2.kind == "cap" and g2.i in (g1.i - 1, g1.i + 1)):
            raise NotApplicable(f"{m}: no zigzag at {p}")
        del gens[p : p + 2]
    elif m.kind == MoveKind.CYLINDER_GLUE:
        if not (g1.kind == "braid" and g2.kind == "braid" and g1.i == g2.i and g1.sign == -g2.sign):
            raise NotApplicable(f"{m}: no inverse braid pair at {p}")
        del gens[p : p + 2]
    elif m.kind == MoveKind.VERTEX_CRIT_CANCEL:
        repl = _vertex_crit_pair(w, p)
        if repl is None:
            raise NotApplicable(f"{m}: no vertex/critical-point pair at {p}")
        gens[p : p + 2] = [repl]
    else:
        raise NotApplicable(f"unknown move {m.kind}")
    return w.with_generators(gens)


def _result_length(kind):
    if kind in COMMUTES:
        return 2
    return 1 if kind == MoveKind.VERTEX_CRIT_CANCEL else 0


def inverse_of(m, before):
    """The move undoing forward move ``m`` applied to ``before``."""
    seg = before.generators[m.position : m.position + 2]
    return Move(m.kind, m.position, ("inverse", _result_length(m.kind), tuple(seg)))


def _inverse(w, m):
    _, n_repl, seg = m.params
    p = m.position
    if not 0 <= p <= len(w) - n_repl:
        raise NotApplicable(f"{m}: position out of range")
    cand = w.with_generators(w.generators[:p] + tuple(seg) + w.generators[p + n_repl :])
    variants = [("left",), ("right",)] if m.kind in COMMUTES else [()]
    for params in variants:
        try:
            if _forward(cand, Move(m.kind, p, params)) == w:
                return cand
        except (NotApplicable, SymptangleError):
            continue
    raise NotApplicable(f"{m}: segment does not rewrite to the current word")


def apply_move(w, m):
    """Apply ``m``; the boundary profile is checked to be unchanged."""
    before = tl.boundary_profile(w)
    try:
        out = _inverse(w, m) if m.is_inverse else _forward(w, m)
        after = tl.boundary_profile(out)
    except InvalidWord as exc:
        raise NotApplicable(f"{m}: {exc}") from exc
    if after != before:
        raise NotApplicable(f"{m} would change the boundary")
    return out


def forward_moves(w):
    """All applicable forward moves, ordered by (position, kind)."""
    out = []
    gens = w.generators
    for p in range(len(gens) - 1):
        g1, g2 = gens[p], gens[p + 1]
        kind = commute_kind(g1, g2)
        seen_pairs = set()
        for variant in ("right", "left"):
            pair = commute_pair(g1, g2, variant)
            if pair is not None and pair not in seen_pairs:
                seen_pairs.add(pair)
                out.append(Move(kind, p, (variant,)))
        for kind in CANCELS:
            try:
                _forward(w, Move(kind, p))
            except (NotApplicable, SymptangleError):
                continue
            out.append(Move(kind, p))
    return out


# ---------------------------------------------------------------------------
# normalization


def sort_key(g):
    return (g.i, KIND_ORDER[g.kind], g.sign)


def _first_cancellation(w):
    for p in range(len(w) - 1):
        for kind in CANCELS:
            m = Move(kind, p)
            try:
                _forward(w, m)
            except (NotApplicable, SymptangleError):
                continue
            return m
    return None


def _first_sorting_swap(w):
    gens = w.generators
    for p in range(len(gens) - 1):
        for variant in ("right", "left"):
            pair = commute_pair(gens[p], gens[p + 1], variant)
            if pair is None:
                continue
            if (sort_key(pair[0]), sort_key(pair[1])) < (sort_key(gens[p]), sort_key(gens[p + 1])):
                return Move(commute_kind(gens[p], gens[p + 1]), p, (variant,))
    return None


def normalize_with_trace(w, max_steps=10_000):
    w = tl.propagate_labels(w)
    trace = []
    seen = {w}
    for _ in range(max_steps):
        m = _first_cancellation(w) or _first_sorting_swap(w)
        if m is None:
            break
        nxt = apply_move(w, m)
        if nxt in seen:
            break
        seen.add(nxt)
        trace.append((m, nxt))
        w = nxt
    return w, trace


def normalize(w):
    return normalize_with_trace(w)[0]


# ---------------------------------------------------------------------------
# equivalence


def reverse_trace(start, trace):
    """Turn a trace ``start -> ... -> end`` into one ``end -> ... -> start``."""
    words = [start] + [x for _, x in trace]
    out = []
    for k in range(len(trace) - 1, -1, -1):
        m, _ = trace[k]
        out.append((inverse_of(m, words[k]), words[k]))
    return out


def replay(w, trace):
    """Apply every move of ``trace`` to ``w``, checking each intermediate word."""
    for m, expected in trace:
        w = apply_move(w, m)
        if w != expected:
            raise NotApplicable(f"trace step {m} produced an unexpected word")
    return w


def _bfs_layer(frontier, parents, other):
    nxt = []
    for x in frontier:
        for m in forward_moves(x):
            y = _forward(x, m)
            if y in parents:
                continue
            parents[y] = (x, m)
            nxt.append(y)
            if y in other:
                return nxt, y
    return nxt, None


def _path_to(parents, x):
    path = []
    while parents[x] is not None:
        prev, m = parents[x]
        path.append((m, x))
        x = prev
    path.reverse()
    return path


def equivalent(w1, w2, depth=DEFAULT_DEPTH):
    """Prove ``w1 ~ w2`` by Cerf moves; ``unknown`` is not a disproof."""
    if tl.boundary_profile(w1) != tl.boundary_profile(w2):
        raise BoundaryMismatch("words have different boundary profiles")
    a, b = tl.propagate_labels(w1), tl.propagate_labels(w2)
    if a == b:
        return EquivalenceProof("yes", [])
    na, ta = normalize_with_trace(a)
    nb, tb = normalize_with_trace(b)
    if na == nb and len(ta) + len(tb) <= 2 * depth:
        return EquivalenceProof("yes", ta + reverse_trace(b, tb))
    pa, pb = {a: None}, {b: None}
    fa, fb = [a], [b]
    for _ in range(depth):
        fa, meet = _bfs_layer(fa, pa, pb)
        if meet is None:
            fb, meet = _bfs_layer(fb, pb, pa)
        if meet is not None:
            return EquivalenceProof("yes", _path_to(pa, meet) + reverse_trace(b, _path_to(pb, meet)))
        if len(pa) + len(pb) > MAX_VISITED or not (fa or fb):
            break
    return EquivalenceProof("unknown", [])
