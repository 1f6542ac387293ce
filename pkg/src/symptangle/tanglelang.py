"""Text form and replay semantics for cylindrical tangle and graph words.

A word is read bottom to top. Each generator acts on the list of markings at
the current level; ``levels`` replays the whole word. A marking label is the
conjugacy class of the holonomy factor contributed by that strand to the
surface relator, so a cup creates ``(+, mu), (-, *mu)``.

Grammar (``#`` starts a comment)::

    group SU(3)
    genus 0
    marks: +w1/2 +w1/2 -w2/2
    word: braid 1 + ; cup 2 w1/2
          cap 2 ; merge 1 ; split 1 ; vcap 1 ; vcup 1
"""
from __future__ import annotations

import re
from dataclasses import dataclass, replace

from . import alcove
from .alcove import Label
from .errors import (
    BadLabel,
    BadVertexLabels,
    InvalidIndex,
    InvalidWord,
    LabelMismatch,
    ParseError,
    SymptangleError,
)

KINDS = ("braid", "cup", "cap", "merge", "split", "vcap", "vcup")

# strands consumed and produced by each generator
ARITY = {
    "braid": (2, 2),
    "cup": (0, 2),
    "cap": (2, 0),
    "merge": (2, 1),
    "split": (1, 2),
    "vcap": (3, 0),
    "vcup": (0, 3),
}


@dataclass(frozen=True)
class Marking:
    orientation: int
    label: Label

    def __post_init__(self):
        if self.orientation not in (1, -1):
            raise InvalidWord(f"orientation must be +1 or -1, got {self.orientation!r}")

    def dual(self):
        """The marking a cup pairs with this one."""
        return Marking(-self.orientation, alcove.involution(self.label))

    def __str__(self):
        return ("+" if self.orientation > 0 else "-") + alcove.format_label(self.label)


@dataclass(frozen=True)
class Generator:
    kind: str
    i: int
    sign: int = 0
    label: Label | None = None
    markings: tuple | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidWord(f"unknown generator kind {self.kind!r}")
        if not isinstance(self.i, int) or self.i < 1:
            raise InvalidIndex(f"strand position must be >= 1, got {self.i!r}")
        if self.kind == "braid" and self.sign not in (1, -1):
            raise InvalidWord("braid needs sign +1 or -1")

    @property
    def arity(self):
        return ARITY[self.kind]

    @property
    def is_vertex(self):
        return self.kind in ("merge", "split", "vcap", "vcup")

    def shifted(self, delta):
        return replace(self, i=self.i + delta)

    def __str__(self):
        if self.kind == "braid":
            return f"braid {self.i} {'+' if self.sign > 0 else '-'}"
        if self.kind == "cup" and self.label is not None:
            return f"cup {self.i} {alcove.format_label(self.label)}"
        if self.kind == "vcup" and self.markings is not None:
            return f"vcup {self.i} " + " ".join(str(m) for m in self.markings)
        return f"{self.kind} {self.i}"


def braid(i, sign=1):
    return Generator("braid", i, sign=sign)


def cup(i, label=None):
    return Generator("cup", i, label=label)


def cap(i):
    return Generator("cap", i)


def merge(i):
    return Generator("merge", i)


def split(i):
    return Generator("split", i)


def vcap(i):
    return Generator("vcap", i)


def vcup(i, markings=None):
    return Generator("vcup", i, markings=None if markings is None else tuple(markings))


@dataclass(frozen=True)
class TangleWord:
    group_rank: int
    incoming: tuple
    generators: tuple = ()
    genus: int = 0

    def __post_init__(self):
        object.__setattr__(self, "incoming", tuple(self.incoming))
        object.__setattr__(self, "generators", tuple(self.generators))

    def __len__(self):
        return len(self.generators)

    def with_generators(self, gens):
        return replace(self, generators=tuple(gens))

    def then(self, other):
        """Stack ``other`` on top; its incoming boundary must be our outgoing one."""
        _, out = boundary_profile(self)
        if tuple(out) != tuple(other.incoming):
            raise InvalidWord("outgoing boundary does not match the next incoming boundary")
        return self.with_generators(self.generators + other.generators)


# ---------------------------------------------------------------------------
# vertex labels


def one(r):
    return alcove.half_vertex(r, 1)


def two(r):
    return alcove.half_vertex(r, 2)


def vertex_triple_ok(triple, r):
    """A triple meeting at a vertex: a rotation of ``(e,a), (e,a), (-e,*2a)`` with ``a`` in ``{1, *1}``."""
    triple = tuple(triple)
    for shift in range(3):
        x, y, z = triple[shift:] + triple[:shift]
        if x != y or z.orientation != -x.orientation:
            continue
        if x.label == one(r) and z.label == alcove.involution(two(r)):
            return True
        if x.label == alcove.involution(one(r)) and z.label == two(r):
            return True
    return False


def default_vcup_markings(r):
    return (Marking(1, one(r)), Marking(1, one(r)), Marking(-1, alcove.involution(two(r))))


def merged_marking(a, b, r):
    if a != b:
        raise BadVertexLabels(f"merge needs equal markings, got {a} and {b}")
    if a.label == one(r):
        return Marking(a.orientation, two(r))
    if a.label == alcove.involution(one(r)):
        return Marking(a.orientation, alcove.involution(two(r)))
    raise BadVertexLabels(f"merge needs standard labels, got {a}")


def split_markings(m, r):
    if m.label == two(r):
        part = Marking(m.orientation, one(r))
    elif m.label == alcove.involution(two(r)):
        part = Marking(m.orientation, alcove.involution(one(r)))
    else:
        raise BadVertexLabels(f"split needs a standard label, got {m}")
    return part, part


# ---------------------------------------------------------------------------
# replay


def step(marks, g, r):
    """Markings one level above ``marks`` after applying ``g``."""
    marks = list(marks)
    n = len(marks)
    k = g.i - 1
    consumed, _ = g.arity
    limit = n + 1 if consumed == 0 else n - consumed + 1
    if g.i > limit:
        raise InvalidIndex(f"{g} needs position <= {limit} on {n} strands")
    if g.kind == "braid":
        if marks[k] != marks[k + 1]:
            raise LabelMismatch(f"{g}: strands carry {marks[k]} and {marks[k + 1]}")
        marks[k], marks[k + 1] = marks[k + 1], marks[k]
    elif g.kind == "cup":
        m = Marking(1, g.label if g.label is not None else one(r))
        if m.label.rank != r:
            raise BadLabel(f"{g}: label rank {m.label.rank} != {r}")
        marks[k:k] = [m, m.dual()]
    elif g.kind == "cap":
        a, b = marks[k], marks[k + 1]
        if b != a.dual():
            raise LabelMismatch(f"{g}: {a} and {b} are not dual")
        del marks[k : k + 2]
    elif g.kind == "merge":
        marks[k : k + 2] = [merged_marking(marks[k], marks[k + 1], r)]
    elif g.kind == "split":
        marks[k : k + 1] = list(split_markings(marks[k], r))
    elif g.kind == "vcap":
        if not vertex_triple_ok(marks[k : k + 3], r):
            raise BadVertexLabels(f"{g}: {' '.join(map(str, marks[k:k + 3]))} do not meet at a vertex")
        del marks[k : k + 3]
    elif g.kind == "vcup":
        triple = g.markings if g.markings is not None else default_vcup_markings(r)
        if len(triple) != 3 or not vertex_triple_ok(triple, r):
            raise BadVertexLabels(f"{g}: markings do not meet at a vertex")
        marks[k:k] = list(triple)
    return tuple(marks)


def levels(w):
    """Markings at every level, bottom first (``len(w) + 1`` entries)."""
    out = [tuple(w.incoming)]
    for g in w.generators:
        out.append(step(out[-1], g, w.group_rank))
    return out


def boundary_profile(w):
    try:
        lv = levels(w)
    except SymptangleError as exc:
        raise InvalidWord(f"replay failed: {exc}") from exc
    return lv[0], lv[-1]


def strand_count_formula(w):
    counts = {k: 0 for k in KINDS}
    for g in w.generators:
        counts[g.kind] += 1
    return (
        len(w.incoming)
        + 2 * counts["cup"] - 2 * counts["cap"]
        + counts["split"] - counts["merge"]
        + 3 * counts["vcup"] - 3 * counts["vcap"]
    )


def propagate_labels(w):
    """Fill in default cup and vertex labels and validate every level.

    If the incoming labels are admissible, the outgoing labels are checked to
    be admissible as well.
    """
    r = w.group_rank
    marks = tuple(w.incoming)
    gens = []
    for g in w.generators:
        if g.kind == "cup" and g.label is None:
            g = replace(g, label=one(r))
        elif g.kind == "vcup" and g.markings is None:
            g = replace(g, markings=default_vcup_markings(r))
        marks = step(marks, g, r)
        gens.append(g)
    out = w.with_generators(gens)
    if w.incoming and alcove.is_admissible([m.label for m in w.incoming], r).ok:
        final = [m.label for m in marks]
        assert final and alcove.is_admissible(final, r).ok, "admissibility lost along the word"
    return out


# ---------------------------------------------------------------------------
# text form

_GROUP = re.compile(r"^group\s+SU\(\s*(\d+)\s*\)$")
_GENUS = re.compile(r"^genus\s+(\d+)$")


@dataclass
class _Token:
    text: str
    line: int
    column: int


def _tokens(body, line, offset):
    return [_Token(m.group(0), line, offset + m.start() + 1) for m in re.finditer(r"\S+", body)]


def _parse_marking(tok, r):
    if tok.text[0] not in "+-" or len(tok.text) < 2:
        raise ParseError(f"marking {tok.text!r} must start with + or -", tok.line, tok.column)
    try:
        label = alcove.parse_label(tok.text[1:], r)
    except BadLabel as exc:
        raise BadLabel(f"line {tok.line}, column {tok.column}: {exc}") from exc
    return Marking(1 if tok.text[0] == "+" else -1, label)


def _parse_generator(toks, r):
    head = toks[0]
    kind = head.text.lower()
    if kind not in KINDS:
        raise ParseError(f"unknown generator {head.text!r}", head.line, head.column)
    if len(toks) < 2:
        raise ParseError(f"{kind} needs a strand position", head.line, head.column + len(head.text))
    try:
        i = int(toks[1].text)
    except ValueError:
        raise ParseError(f"strand position {toks[1].text!r} is not an integer", toks[1].line, toks[1].column) from None
    if i < 1:
        raise InvalidIndex(f"line {toks[1].line}, column {toks[1].column}: strand position {i} < 1")
    rest = toks[2:]
    if kind == "braid":
        if len(rest) != 1 or rest[0].text not in "+-":
            where = rest[0] if rest else toks[1]
            raise ParseError("braid needs a sign + or -", where.line, where.column)
        return braid(i, 1 if rest[0].text == "+" else -1)
    if kind == "cup":
        if len(rest) > 1:
            raise ParseError("cup takes at most one label", rest[1].line, rest[1].column)
        if not rest:
            return cup(i)
        try:
            return cup(i, alcove.parse_label(rest[0].text, r))
        except BadLabel as exc:
            raise BadLabel(f"line {rest[0].line}, column {rest[0].column}: {exc}") from exc
    if kind == "vcup":
        if rest and len(rest) != 3:
            raise ParseError("vcup takes zero or three markings", rest[0].line, rest[0].column)
        return vcup(i, [_parse_marking(t, r) for t in rest] if rest else None)
    if rest:
        raise ParseError(f"unexpected token {rest[0].text!r}", rest[0].line, rest[0].column)
    return Generator(kind, i)


def parse(text):
    """Parse and validate a word; raises ParseError, InvalidIndex, BadLabel or label errors."""
    r = None
    genus = 0
    marks = []
    gen_tokens = []
    in_word = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        stripped = line.strip()
        if not stripped:
            continue
        indent = len(line) - len(line.lstrip())
        if stripped.startswith("group"):
            m = _GROUP.match(stripped)
            if not m:
                raise ParseError("expected 'group SU(r)'", lineno, indent + 1)
            r = int(m.group(1))
            if r < 2:
                raise ParseError(f"rank {r} < 2", lineno, indent + 1)
            in_word = False
        elif stripped.startswith("genus"):
            m = _GENUS.match(stripped)
            if not m:
                raise ParseError("expected 'genus g'", lineno, indent + 1)
            genus = int(m.group(1))
            in_word = False
        elif stripped.startswith("marks:"):
            if r is None:
                raise ParseError("'marks:' before 'group'", lineno, indent + 1)
            start = line.index("marks:") + len("marks:")
            marks.extend(_parse_marking(t, r) for t in _tokens(line[start:], lineno, start))
            in_word = False
        elif stripped.startswith("word:"):
            if r is None:
                raise ParseError("'word:' before 'group'", lineno, indent + 1)
            start = line.index("word:") + len("word:")
            gen_tokens.append((line[start:], lineno, start))
            in_word = True
        elif in_word:
            gen_tokens.append((line, lineno, 0))
        else:
            raise ParseError(f"unexpected line {stripped!r}", lineno, indent + 1)
    if r is None:
        raise ParseError("missing 'group SU(r)' line", 1, 1)
    gens = []
    for body, lineno, offset in gen_tokens:
        pos = 0
        for chunk in body.split(";"):
            toks = _tokens(chunk, lineno, offset + pos)
            pos += len(chunk) + 1
            if toks:
                gens.append(_parse_generator(toks, r))
    word = TangleWord(r, tuple(marks), tuple(gens), genus)
    marks_now = word.incoming
    for g in word.generators:
        marks_now = step(marks_now, g, r)
    return word


def serialize(w):
    lines = [f"group SU({w.group_rank})"]
    if w.genus:
        lines.append(f"genus {w.genus}")
    lines.append("marks:" + "".join(" " + str(m) for m in w.incoming))
    lines.append("word:" + (" " + " ; ".join(str(g) for g in w.generators) if w.generators else ""))
    return "\n".join(lines) + "\n"


def load(path):
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())
