"""Lagrangian correspondences presented by holonomy constraints.

A :class:`ConstraintSystem` relates the relator factors ``x_1..x_n`` at the
bottom of a tangle piece to ``y_1..y_m`` at the top. Relations are free-group
words that must equal the identity (``Product``) or lie in a conjugacy class
(``Membership``). Composition glues ``y`` of the first system to ``x`` of the
second as middle variables ``m_k`` and eliminates them by isolating a middle
variable that occurs exactly once in some product relation. A middle
variable with nothing to solve it leaves the composition undefined here
(:class:`NotEliminable`), which is conservative: no geometric claim is made.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import expm, schur
from scipy.optimize import least_squares

from . import alcove, betti, cerf
from . import holovar as hv
from . import tanglelang as tl
from .errors import BoundaryMismatch, NotALink, NotApplicable, NotEliminable

# ---------------------------------------------------------------------------
# free-group words: tuples of (variable, +-1)


def reduce_word(word):
    out = []
    for v, e in word:
        if out and out[-1][0] == v and out[-1][1] == -e:
            out.pop()
        else:
            out.append((v, e))
    return tuple(out)


def cyclic_reduce(word):
    word = list(reduce_word(word))
    while len(word) > 1 and word[0][0] == word[-1][0] and word[0][1] == -word[-1][1]:
        word = word[1:-1]
    return tuple(word)


def invert(word):
    return tuple((v, -e) for v, e in reversed(word))


def rotations(word):
    return [word[k:] + word[:k] for k in range(max(len(word), 1))]


_VAR = re.compile(r"^([a-z]+)(\d+)$")
_SIDE = {"x": 0, "m": 1, "y": 2}


def var_key(name):
    m = _VAR.match(name)
    return (_SIDE.get(m.group(1), 3), int(m.group(2))) if m else (9, name)


def word_key(word):
    return tuple((var_key(v), -e) for v, e in word)


def format_word(word):
    if not word:
        return "1"
    return " ".join(v if e > 0 else f"{v}^-1" for v, e in word)


def substitute(word, var, expr):
    out = []
    for v, e in word:
        if v == var:
            out.extend(expr if e > 0 else invert(expr))
        else:
            out.append((v, e))
    return reduce_word(out)


def rename(word, mapping):
    return tuple((mapping.get(v, v), e) for v, e in word)


# ---------------------------------------------------------------------------
# relations and systems


@dataclass(frozen=True)
class Product:
    """``word = 1``."""

    word: tuple

    def variables(self):
        return {v for v, _ in self.word}

    def mapped(self, f):
        return Product(reduce_word(f(self.word)))

    def canonical(self):
        w = cyclic_reduce(self.word)
        cands = rotations(w) + rotations(invert(w))
        return Product(min(cands, key=word_key))

    def __str__(self):
        return f"{format_word(self.word)} = 1"


@dataclass(frozen=True)
class Membership:
    """``word`` lies in the conjugacy class of ``label``."""

    word: tuple
    label: alcove.Label

    def variables(self):
        return {v for v, _ in self.word}

    def mapped(self, f):
        return Membership(reduce_word(f(self.word)), self.label)

    def canonical(self):
        w = cyclic_reduce(self.word)
        cands = [(rot, self.label) for rot in rotations(w)]
        cands += [(rot, alcove.involution(self.label)) for rot in rotations(invert(w))]
        best = min(cands, key=lambda c: (word_key(c[0]), c[1].entries))
        return Membership(*best)

    def __str__(self):
        return f"{format_word(self.word)} in C[{alcove.format_label(self.label)}]"


def Equal(var, word):
    """``var = word`` as a product relation."""
    return Product(reduce_word(((var, -1),) + tuple(word)))


@dataclass(frozen=True)
class ConstraintSystem:
    """``left`` and ``right`` are tuples of ``(name, Marking)``."""

    rank: int
    left: tuple
    right: tuple
    relations: tuple
    mid: tuple = ()
    simply_connected: bool = True
    disk_invariant: str = "zero"
    source: str = ""
    fibres: tuple = ()

    def labels(self):
        out = {name: m.label for name, m in self.left + self.right}
        out.update({name: lab for name, lab in self.mid})
        return out

    def declared(self):
        return set(self.labels())

    def canonical(self):
        return canonicalize(self)

    def canonical_string(self):
        c = canonicalize(self)
        left = " ".join(f"{n}:{m}" for n, m in c.left)
        right = " ".join(f"{n}:{m}" for n, m in c.right)
        rels = " ; ".join(str(r) for r in c.relations)
        out = f"[{left}] -> [{right}] {{{rels}}}"
        if c.fibres:
            out += " fibres " + " ".join(alcove.format_label(f) for f in c.fibres)
        return out

    def __str__(self):
        return self.canonical_string()


def class_of_letter(labels, v, e):
    lab = labels[v]
    return lab if e > 0 else alcove.involution(lab)


def membership_implied(mem, products, labels):
    """True when ``mem`` follows from a product relation and one variable's class."""
    w = cyclic_reduce(mem.word)
    if len(w) == 1:
        return class_of_letter(labels, *w[0]) == mem.label
    if not w:
        return mem.label == alcove.zero(mem.label.rank)
    for p in products:
        pw = cyclic_reduce(p.word)
        for cand in rotations(pw) + rotations(invert(pw)):
            if len(cand) == len(w) + 1 and cand[:-1] == w:
                v, e = cand[-1]
                # w * v^e = 1  =>  w = v^-e
                if class_of_letter(labels, v, -e) == mem.label:
                    return True
    return False


def _define_right(system):
    """Substitute relations ``y_k = word(x...)`` into the others, left to right."""
    rels = list(system.relations)
    left_names = {n for n, _ in system.left}
    done = []
    for name, _ in system.right:
        for k, rel in enumerate(rels):
            if not isinstance(rel, Product):
                continue
            occ = [i for i, (v, _) in enumerate(rel.word) if v == name]
            if len(occ) != 1:
                continue
            others = {v for v, _ in rel.word if v != name}
            if not others <= left_names:
                continue
            expr = _isolate(rel.word, occ[0])
            rest = rels[:k] + rels[k + 1 :]
            rels = [r.mapped(lambda w: substitute(w, name, expr)) for r in rest]
            done.append(Equal(name, expr))
            break
    return done + rels


def _side_substitutions(rels, side):
    """Use relations among one boundary side to rewrite the others.

    Each such relation in turn pivots on its highest-indexed variable that
    occurs once, which is substituted into every other relation.
    """
    rels = list(rels)
    pivots = set()
    while True:
        rels.sort(key=lambda r: (0 if isinstance(r, Product) else 1, word_key(r.word), str(r)))
        hit = None
        for k, rel in enumerate(rels):
            if not isinstance(rel, Product) or not rel.word:
                continue
            names = [v for v, _ in rel.word]
            if side is not None and any(var_key(v)[0] != side for v in names):
                continue
            if pivots & set(names):
                continue
            once = [v for v in set(names) if names.count(v) == 1]
            if once:
                hit = (k, max(once, key=var_key))
                break
        if hit is None:
            return rels
        k, v = hit
        pivots.add(v)
        word = rels[k].word
        expr = _isolate(word, [u for u, _ in word].index(v))
        rels = [r if j == k else r.mapped(lambda w: substitute(w, v, expr)) for j, r in enumerate(rels)]


def canonicalize(system):
    rels = list(system.relations)
    for side in (_SIDE["x"], _SIDE["y"], None):
        rels = _side_substitutions(rels, side)
    rels = _define_right(replace(system, relations=tuple(rels)))
    labels = system.labels()
    out = []
    for rel in rels:
        rel = rel.canonical()
        if isinstance(rel, Product) and not rel.word:
            continue
        out.append(rel)
    products = [r for r in out if isinstance(r, Product)]
    out = [r for r in out if not (isinstance(r, Membership) and membership_implied(r, products, labels))]
    uniq = sorted(set(out), key=lambda r: (0 if isinstance(r, Product) else 1, word_key(r.word), str(r)))
    fibres = tuple(sorted(system.fibres, key=lambda f: f.entries))
    return replace(system, relations=tuple(uniq), fibres=fibres)


def _isolate(word, i):
    """From ``word = 1`` with the letter at ``i`` occurring once, return its value."""
    v, e = word[i]
    before, after = word[:i], word[i + 1 :]
    # before * v^e * after = 1  =>  v^e = before^-1 after^-1
    val = reduce_word(invert(before) + invert(after))
    return val if e > 0 else invert(val)


# ---------------------------------------------------------------------------
# elementary correspondences


def _names(prefix, n):
    return [f"{prefix}{k}" for k in range(1, n + 1)]


def correspondence_of(g, marks, r):
    """Constraint system of one generator acting on ``marks``."""
    marks = tuple(marks)
    try:
        out_marks = tl.step(marks, g, r)
    except Exception as exc:
        raise NotApplicable(f"{g} does not apply: {exc}") from exc
    xs, ys = _names("x", len(marks)), _names("y", len(out_marks))
    x = lambda k: ((xs[k], 1),)  # noqa: E731
    k0 = g.i - 1
    consumed, produced = g.arity
    rels = []
    for k in range(k0):
        rels.append(Equal(ys[k], x(k)))
    for k in range(k0 + consumed, len(marks)):
        rels.append(Equal(ys[k - consumed + produced], x(k)))
    if g.kind == "braid":
        a, b = x(k0), x(k0 + 1)
        if g.sign > 0:
            rels += [Equal(ys[k0], b), Equal(ys[k0 + 1], invert(b) + a + b)]
        else:
            rels += [Equal(ys[k0], a + b + invert(a)), Equal(ys[k0 + 1], a)]
    elif g.kind == "cup":
        rels.append(Product(((ys[k0], 1), (ys[k0 + 1], 1))))
    elif g.kind == "cap":
        rels.append(Product(x(k0) + x(k0 + 1)))
    elif g.kind == "merge":
        prod = x(k0) + x(k0 + 1)
        rels += [Equal(ys[k0], prod), Membership(prod, out_marks[k0].label)]
    elif g.kind == "split":
        rels.append(Equal(xs[k0], ((ys[k0], 1), (ys[k0 + 1], 1))))
    elif g.kind == "vcap":
        rels.append(Product(x(k0) + x(k0 + 1) + x(k0 + 2)))
    elif g.kind == "vcup":
        rels.append(Product(tuple((ys[k0 + j], 1) for j in range(3))))
    return ConstraintSystem(
        r, tuple(zip(xs, marks)), tuple(zip(ys, out_marks)), tuple(rels), source=str(g)
    )


def diagonal(marks, r):
    xs, ys = _names("x", len(marks)), _names("y", len(marks))
    return ConstraintSystem(
        r, tuple(zip(xs, marks)), tuple(zip(ys, marks)),
        tuple(Equal(y, ((x, 1),)) for x, y in zip(xs, ys)), source="diagonal",
    )


def is_diagonal(system):
    if system.fibres:
        return False
    if [m for _, m in system.left] != [m for _, m in system.right]:
        return False
    return canonicalize(system).relations == canonicalize(diagonal([m for _, m in system.left], system.rank)).relations


# ---------------------------------------------------------------------------
# composition


def glue(c1, c2):
    """Fiber product of two systems with the shared boundary renamed ``m_k``."""
    if [m for _, m in c1.right] != [m for _, m in c2.left]:
        raise BoundaryMismatch("right boundary of the first system differs from the left of the second")
    mids = _names("m", len(c1.right))
    to_mid_1 = {n: mids[k] for k, (n, _) in enumerate(c1.right)}
    to_mid_2 = {n: mids[k] for k, (n, _) in enumerate(c2.left)}
    rels = [r.mapped(lambda w: rename(w, to_mid_1)) for r in c1.relations]
    rels += [r.mapped(lambda w: rename(w, to_mid_2)) for r in c2.relations]
    mid = tuple((mids[k], m.label) for k, (_, m) in enumerate(c1.right))
    return ConstraintSystem(
        c1.rank, c1.left, c2.right, tuple(rels), mid,
        c1.simply_connected and c2.simply_connected,
        "zero" if c1.disk_invariant == c2.disk_invariant == "zero" else "unknown",
        source=f"({c1.source}) o ({c2.source})",
        fibres=c1.fibres + c2.fibres,
    )


def _drop_trivial(rels, labels):
    out = []
    for rel in rels:
        w = cyclic_reduce(rel.word)
        if isinstance(rel, Product) and not w:
            continue
        if isinstance(rel, Membership) and len(w) <= 1 and membership_implied(rel, [], labels):
            continue
        out.append(rel)
    return out


def eliminate(system, fibred=False):
    """Remove every middle variable by isolation, keeping class conditions.

    With ``fibred`` a middle variable that no relation mentions is dropped
    and its class recorded in ``fibres``: the result is then a fibred, not an
    embedded, composite.
    """
    rels = list(system.relations)
    mids = dict(system.mid)
    labels = system.labels()
    progress = True
    while mids and progress:
        progress = False
        for name in list(mids):
            for k, rel in enumerate(rels):
                if not isinstance(rel, Product):
                    continue
                occ = [i for i, (v, _) in enumerate(rel.word) if v == name]
                if len(occ) != 1:
                    continue
                expr = _isolate(rel.word, occ[0])
                rest = rels[:k] + rels[k + 1 :]
                rels = [r.mapped(lambda w: substitute(w, name, expr)) for r in rest]
                rels.append(Membership(expr, labels[name]))
                del mids[name]
                progress = True
                break
            if progress:
                break
    fibres = system.fibres
    rels = _drop_trivial(rels, labels)
    if mids and fibred:
        used = set().union(*(r.variables() for r in rels)) if rels else set()
        if not used & set(mids):
            fibres = fibres + tuple(mids.values())
            mids = {}
    if mids:
        raise NotEliminable(f"middle variables {', '.join(mids)} cannot be solved for")
    return canonicalize(replace(system, relations=tuple(rels), mid=(), fibres=fibres))


def compose_embedded(c1, c2):
    return eliminate(glue(c1, c2))


def compose_fibred(c1, c2):
    return eliminate(glue(c1, c2), fibred=True)


# ---------------------------------------------------------------------------
# words


@dataclass
class GeneralizedCorrespondence:
    systems: list = field(default_factory=list)

    def canonical_strings(self):
        return [s.canonical_string() for s in self.systems]

    def disk_flag(self):
        return "zero" if all(s.disk_invariant == "zero" for s in self.systems) else "unknown"

    def __len__(self):
        return len(self.systems)


def raw_sequence(w):
    w = tl.propagate_labels(w)
    r = w.group_rank
    lv = tl.levels(w)
    return GeneralizedCorrespondence([correspondence_of(g, lv[k], r) for k, g in enumerate(w.generators)])


def greedy_reduce(seq, compose=None):
    """Compose neighbours left to right wherever elimination succeeds; drop diagonals."""
    compose = compose or compose_embedded
    systems = list(seq.systems)
    changed = True
    while changed:
        changed = False
        systems = [s for s in systems if not is_diagonal(s)]
        for k in range(len(systems) - 1):
            try:
                composed = compose(systems[k], systems[k + 1])
            except NotEliminable:
                continue
            systems[k : k + 2] = [composed]
            changed = True
            break
    systems = [s for s in systems if not is_diagonal(s)]
    return GeneralizedCorrespondence(systems)


def sequence_of_word(w, reduce=True):
    seq = raw_sequence(w)
    return greedy_reduce(seq) if reduce else seq


def normal_form(seq):
    """Canonical strings of ``seq`` after embedded, then fibred, composition.

    Embedded composition alone depends on where a free circle sits in the
    word; absorbing free middle variables as fibres removes that dependence.
    """
    return greedy_reduce(greedy_reduce(seq), compose_fibred).canonical_strings()


# ---------------------------------------------------------------------------
# link pipeline


@dataclass
class InvariantReport:
    rank: int
    disk_flag: str
    sequence: list
    hf_poly: object = None
    note: str = ""

    def to_json(self):
        doc = {"disk_flag": self.disk_flag, "sequence": self.sequence}
        doc["hf_poly"] = list(self.hf_poly.trimmed()) if self.hf_poly is not None else None
        if self.note:
            doc["note"] = self.note
        return doc


def with_spectators(w, r):
    """Append ``r + 1`` trivial strands labelled ``w1/2`` to the right of a closed word."""
    if w.incoming:
        raise NotALink("a link word has no incoming strands")
    _, out = tl.boundary_profile(w)
    if out:
        raise NotALink("a link word has no outgoing strands")
    spect = tuple(tl.Marking(1, tl.one(r)) for _ in range(r + 1))
    return tl.TangleWord(r, spect, w.generators, w.genus)


def braid_shape(w):
    """Reorder into cups, then braids, then caps when Cerf moves allow it."""
    order = {"cup": 0, "braid": 1, "cap": 2}
    def shaped(x):
        ranks = [order.get(g.kind, 3) for g in x.generators]
        return all(k < 3 for k in ranks) and ranks == sorted(ranks)
    if shaped(w):
        return w, True
    nf = cerf.normalize(w)
    return (nf, True) if shaped(nf) else (w, False)


def _is_unknot(w, n_spect):
    gens = w.generators
    return (
        len(gens) == 2 and gens[0].kind == "cup" and gens[1].kind == "cap"
        and gens[1].i == gens[0].i
    )


def invariant_pipeline(w, r):
    if w.group_rank != r:
        w = tl.TangleWord(r, (), tuple(_relabel(g, r) for g in w.generators), w.genus)
    padded = with_spectators(w, r)
    shaped, ok = braid_shape(padded)
    seq = sequence_of_word(shaped)
    report = InvariantReport(r, seq.disk_flag(), seq.canonical_strings())
    if _is_unknot(cerf.normalize(padded), r + 1):
        report.hf_poly = betti.unknot_hf(r)
        report.note = "unknot: pair (L(Cup), L(Cap)) reduces to H(CP^{r-1})"
    else:
        report.note = "HF not computed" + ("" if ok else "; word is not in cups/braids/caps shape")
    return report


def _relabel(g, r):
    if g.kind == "cup" and g.label is not None:
        return replace(g, label=None)
    if g.kind == "vcup":
        return replace(g, markings=None)
    return g


# ---------------------------------------------------------------------------
# numeric cross-checks


def _class_params(r):
    return len(hv.su_basis(r))


def solve_system(system, fixed, seed=0, restarts=5, tol=1e-10):
    """Numerically solve ``system`` with some variables fixed to matrices.

    Unknown variables are parametrized as conjugates of their class
    representative. Returns the list of converged assignments (dicts).
    """
    r = system.rank
    labels = system.labels()
    unknown = [v for v in sorted(labels, key=var_key) if v not in fixed]
    basis = hv.su_basis(r)
    dim = len(basis)
    reps = {v: hv.class_rep(labels[v]) for v in unknown}
    power_targets = {}

    def assign(theta, q0):
        vals = dict(fixed)
        for k, v in enumerate(unknown):
            X = hv.from_coords(theta[k * dim : (k + 1) * dim], basis)
            q = expm(X) @ q0[k]
            vals[v] = q @ reps[v] @ q.conj().T
        return vals

    def evaluate(word, vals):
        out = np.eye(r, dtype=complex)
        for v, e in word:
            out = out @ (vals[v] if e > 0 else vals[v].conj().T)
        return out

    def residual(theta, q0):
        vals = assign(theta, q0)
        parts = []
        for rel in system.relations:
            m = evaluate(rel.word, vals)
            if isinstance(rel, Product):
                parts.append(hv.realify(m - np.eye(r)))
            else:
                key = rel.label
                if key not in power_targets:
                    d = hv.class_rep(key)
                    power_targets[key] = [np.trace(np.linalg.matrix_power(d, k)) for k in range(1, r)]
                got = [np.trace(np.linalg.matrix_power(m, k)) for k in range(1, r)]
                diff = np.array(got) - np.array(power_targets[key])
                parts.append(np.concatenate([diff.real, diff.imag]))
        return np.concatenate(parts) if parts else np.zeros(1)

    found = []
    for k in range(restarts):
        rng = hv.rng_for(seed, k)
        q0 = [hv.haar_unitary(r, rng) for _ in unknown]
        if not unknown:
            vals = dict(fixed)
            if np.linalg.norm(residual(np.zeros(0), q0)) < tol:
                found.append(vals)
            continue
        sol = least_squares(residual, np.zeros(dim * len(unknown)), args=(q0,), xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=2000)
        if np.linalg.norm(residual(sol.x, q0)) < tol:
            found.append(assign(sol.x, q0))
    return found


def joint_invariants(vals, left, right):
    """Conjugation invariants of the boundary tuple: traces of right singles, and of
    left-right pairs and left-left-right triples."""
    xs = [vals[n] for n, _ in left]
    ys = [vals[n] for n, _ in right]
    out = [np.trace(y) for y in ys]
    out += [np.trace(a @ b) for a in xs + ys for b in ys]
    out += [np.trace(a @ b @ c) for a, b in itertools.combinations(xs, 2) for c in ys]
    out = np.array(out)
    return np.concatenate([out.real, out.imag]) if out.size else np.zeros(0)


@dataclass
class CrossCheck:
    composed_clusters: int
    factor_clusters: int
    agree: bool
    max_distance: float


def cross_check(c1, c2, composed, left_values, seed=0, restarts=6, tol=1e-5):
    """Compare boundary clusters of the composed system with the glued factors, left side fixed."""
    fixed = {n: left_values[k] for k, (n, _) in enumerate(composed.left)}
    direct = solve_system(composed, fixed, seed, restarts)
    glued = glue(c1, c2)
    lifted = solve_system(glued, fixed, seed + 1, restarts)
    a = hv.cluster([joint_invariants(v, composed.left, composed.right) for v in direct], tol)
    b = hv.cluster([joint_invariants(v, glued.left, glued.right) for v in lifted], tol)
    dist = 0.0
    for u in a:
        dist = max(dist, min((np.max(np.abs(u - w)) for w in b), default=np.inf))
    for u in b:
        dist = max(dist, min((np.max(np.abs(u - w)) for w in a), default=np.inf))
    ok = bool(a) and bool(b) and bool(dist < tol)
    return CrossCheck(len(a), len(b), ok, float(dist))


# ---------------------------------------------------------------------------
# vertex fibre dimension


def _eigenframe(u):
    t, z = schur(u, output="complex")
    order = np.argsort(-np.angle(np.diag(t)))
    return z[:, order]


def _conjugator(src, dst):
    """Unitary ``h`` with ``h src h^-1 = dst`` for two elements of one class."""
    return _eigenframe(dst) @ _eigenframe(src).conj().T


def vertex_dimension_check(cfg=None, extra=5):
    """``dim L - dim M(X+)`` for the merge correspondence in SU(3).

    ``X-`` has ``extra + 2`` copies of ``w1/2``; ``X+`` merges the first two
    into ``w2/2``. Points of ``L`` are built by splitting a solved point of
    ``M(X+)`` along a solution of the vertex triple.
    """
    cfg = cfg or hv.SolverConfig(seed=0, restarts=10)
    r = 3
    one, two = tl.one(r), tl.two(r)
    plus = hv.problem(r, [two] + [one] * extra)
    p_plus = hv.solve(plus, cfg)
    triple = hv.problem(r, [one, one, alcove.involution(two)])
    t = hv.solve(triple, cfg)
    d1, d2, d3 = t.c
    target = p_plus.c[0]
    h = _conjugator(d3.conj().T, target)
    c1, c2 = h @ d1 @ h.conj().T, h @ d2 @ h.conj().T
    minus = hv.ModuliProblem(r, tuple((1, one) for _ in range(extra + 2)), 0, ((1, 2, two),))
    d = hv.class_rep(one)
    qs = [_conjugator(d, c) for c in [c1, c2] + list(p_plus.c[1:])]
    p_minus = hv.HolonomyPoint(minus, tuple(qs))
    dim_l = hv.tangent_dimension(p_minus, minus)
    dim_plus = hv.tangent_dimension(p_plus, plus)
    return dim_l, dim_plus, hv.relator_residual(p_minus)
