"""Exact arithmetic in the SU(r) Weyl alcove.

Labels are stored with weakly decreasing entries; every input is sorted into
that order on construction. All computations use :class:`fractions.Fraction`.
"""
from __future__ import annotations

import functools
import itertools
import re
from dataclasses import dataclass
from fractions import Fraction
from math import gcd

from . import betti
from .errors import BadLabel, InvalidIndex, InvalidRank, OutOfAlcove, RankMismatch, TooLarge


@dataclass(frozen=True)
class Label:
    """A point of the alcove: ``sum = 0`` and ``lambda_1 - lambda_r <= 1``."""

    entries: tuple

    def __post_init__(self):
        try:
            es = tuple(sorted((Fraction(e) for e in self.entries), reverse=True))
        except (TypeError, ValueError) as exc:
            raise BadLabel(f"non-rational label entries {self.entries!r}") from exc
        if len(es) < 2:
            raise InvalidRank(f"label of rank {len(es)} < 2")
        if sum(es) != 0:
            raise OutOfAlcove(f"entries {fmt_vector(es)} do not sum to zero")
        if es[0] - es[-1] > 1:
            raise OutOfAlcove(f"entries {fmt_vector(es)} have spread > 1")
        object.__setattr__(self, "entries", es)

    @property
    def rank(self):
        return len(self.entries)

    def __mul__(self, c):
        return Label(tuple(Fraction(c) * e for e in self.entries))

    __rmul__ = __mul__

    def __truediv__(self, c):
        return Label(tuple(e / Fraction(c) for e in self.entries))

    def __str__(self):
        return format_label(self)

    def __repr__(self):
        return f"Label({fmt_vector(self.entries)})"


@dataclass(frozen=True)
class ClassInfo:
    multiplicities: tuple
    real_dimension: int
    poincare: betti.PolySeries


@dataclass(frozen=True)
class AdmissibilityReport:
    ok: bool
    d: int | None = None
    reason: str = ""


def fmt_vector(es):
    return "(" + ",".join(str(e) for e in es) + ")"


def _check_rank(r):
    if not isinstance(r, int) or r < 2:
        raise InvalidRank(f"rank must be an integer >= 2, got {r!r}")


@functools.lru_cache(maxsize=None)
def vertex(r, k):
    """``omega_k``: ``(r-k)/r`` repeated ``k`` times, then ``-k/r`` repeated ``r-k`` times."""
    _check_rank(r)
    if not 0 <= k <= r - 1:
        raise InvalidIndex(f"vertex index {k} outside 0..{r - 1}")
    return Label((Fraction(r - k, r),) * k + (Fraction(-k, r),) * (r - k))


@functools.lru_cache(maxsize=None)
def half_vertex(r, k):
    """``omega_k / 2``; ``k`` is read modulo ``r`` so that ``omega_r = omega_0 = 0``."""
    return vertex(r, k % r) / 2


def zero(r):
    return vertex(r, 0)


def barycenter(r):
    """``rho / r``; ``rho`` has unit gaps and extremes ``+-(r-1)/2``."""
    _check_rank(r)
    return Label(tuple(Fraction(r - 1 - 2 * i, 2 * r) for i in range(r)))


def involution(label):
    """Label of the inverse conjugacy class: ``(-lambda_r, ..., -lambda_1)``."""
    return Label(tuple(-e for e in reversed(label.entries)))


def in_alcove(entries):
    es = [Fraction(e) for e in entries]
    ordered = all(es[i] >= es[i + 1] for i in range(len(es) - 1))
    return ordered and sum(es) == 0 and es[0] - es[-1] <= 1


@functools.lru_cache(maxsize=4096)
def half_vertex_index(label):
    """Return ``k`` with ``label == omega_k/2`` or ``None``."""
    r = label.rank
    for k in range(r):
        if half_vertex(r, k) == label:
            return k
    return None


# ---------------------------------------------------------------------------
# exact linear algebra


def solve_rational(A, b):
    """One exact solution of ``A x = b`` (free variables set to 0), or ``None``."""
    rows = [[Fraction(v) for v in row] + [Fraction(bv)] for row, bv in zip(A, b)]
    ncols = len(A[0]) if A else 0
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        p = rows[r][c]
        rows[r] = [v / p for v in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [vi - f * vr for vi, vr in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    if any(all(v == 0 for v in row[:-1]) and row[-1] != 0 for row in rows):
        return None
    x = [Fraction(0)] * ncols
    for i, c in enumerate(pivots):
        x[c] = rows[i][-1]
    return x


def _alcove_hyperplanes(r):
    """Normals and offsets ``(n, c)`` of the walls ``<n, x> = c`` (decreasing convention)."""
    walls = []
    for i in range(r - 1):
        n = [0] * r
        n[i], n[i + 1] = 1, -1
        walls.append((n, Fraction(0)))
    n = [0] * r
    n[0], n[-1] = 1, -1
    walls.append((n, Fraction(1)))
    return walls


def project_affine(point, normals, offsets):
    """Orthogonal projection of ``point`` onto ``{x : N x = c}`` in ``Q^r``."""
    if not normals:
        return list(point)
    gram = [[sum(a * b for a, b in zip(ni, nj)) for nj in normals] for ni in normals]
    rhs = [sum(a * p for a, p in zip(ni, point)) - c for ni, c in zip(normals, offsets)]
    y = solve_rational(gram, rhs)
    if y is None:
        return None
    return [p - sum(yk * nk[i] for yk, nk in zip(y, normals)) for i, p in enumerate(point)]


def monotone_labels(r):
    """Projections of ``rho/r`` onto every face of the alcove that land in the alcove."""
    _check_rank(r)
    rho = list(barycenter(r).entries)
    walls = _alcove_hyperplanes(r)
    out = set()
    for size in range(len(walls) + 1):
        for subset in itertools.combinations(walls, size):
            normals = [[1] * r] + [w[0] for w in subset]
            offsets = [Fraction(0)] + [w[1] for w in subset]
            if solve_rational(normals, offsets) is None:
                continue
            x = project_affine(rho, normals, offsets)
            if x is not None and in_alcove(x):
                out.add(Label(tuple(x)))
    return out


def is_monotone(label):
    return label in monotone_labels(label.rank)


# ---------------------------------------------------------------------------
# admissibility


def coroot_coordinates(x):
    """Coordinates of a sum-zero vector in the basis ``e_i - e_{i+1}`` (exact solve)."""
    r = len(x)
    A = [[0] * (r - 1) for _ in range(r)]
    for k in range(r - 1):
        A[k][k] = 1
        A[k + 1][k] = -1
    return solve_rational(A, list(x))


def reduce_mod_lattice(x):
    """Return ``d`` in ``0..r-1`` with ``x = omega_d mod Lambda``, or ``None``."""
    r = len(x)
    for d in range(r):
        diff = [a - b for a, b in zip(x, vertex(r, d).entries)]
        coords = coroot_coordinates(diff)
        if coords is not None and all(c.denominator == 1 for c in coords):
            return d
    return None


def _check_ranks(labels, r):
    for lab in labels:
        if lab.rank != r:
            raise RankMismatch(f"label {lab} has rank {lab.rank}, expected {r}")


def is_admissible(labels, r):
    """Half-vertex labels whose doubled sum is ``omega_d mod Lambda`` with ``gcd(d, r) = 1``."""
    _check_rank(r)
    labels = tuple(labels)
    _check_ranks(labels, r)
    return _admissible(labels, r)


@functools.lru_cache(maxsize=4096)
def _admissible(labels, r):
    for lab in labels:
        if half_vertex_index(lab) is None:
            return AdmissibilityReport(False, None, f"label {lab} is not half a vertex")
    doubled = [2 * sum(col) for col in zip(*(lab.entries for lab in labels))] if labels else [Fraction(0)] * r
    d = reduce_mod_lattice(doubled)
    if d is None:
        return AdmissibilityReport(False, None, "doubled sum is not congruent to a vertex")
    if d == 0 or gcd(d, r) != 1:
        return AdmissibilityReport(False, None, f"doubled sum reduces to omega_{d}, not coprime to {r}")
    return AdmissibilityReport(True, d, "")


def wall_check_bruteforce(labels, r, n_cap=6):
    """True iff no Weyl-permuted sum of the labels pairs integrally with any ``omega_j``."""
    _check_rank(r)
    labels = list(labels)
    _check_ranks(labels, r)
    if r > 4 or len(labels) > n_cap:
        raise TooLarge(f"enumeration guard exceeded (r={r}, n={len(labels)}, cap={n_cap})")
    omegas = [vertex(r, j).entries for j in range(1, r)]
    orbits = [sorted(set(itertools.permutations(lab.entries))) for lab in labels]
    for combo in itertools.product(*orbits):
        v = [sum(col) for col in zip(*combo)] if combo else [Fraction(0)] * r
        for om in omegas:
            if sum(a * b for a, b in zip(v, om)).denominator == 1:
                return False
    return True


# ---------------------------------------------------------------------------
# conjugacy classes


def eigenvalue_multiplicities(label):
    """Multiplicities of the eigenvalues of ``exp(2 pi i diag(label))``.

    Equal entries give equal eigenvalues; when ``lambda_1 - lambda_r = 1`` the
    first and last runs also coincide and are merged.
    """
    runs = [len(list(g)) for _, g in itertools.groupby(label.entries)]
    es = label.entries
    if len(runs) > 1 and es[0] - es[-1] == 1:
        runs = [runs[0] + runs[-1]] + runs[1:-1]
    return tuple(runs)


def conj_class_info(label):
    r = label.rank
    mults = eigenvalue_multiplicities(label)
    dim = (r * r - 1) - (sum(m * m for m in mults) - 1)
    return ClassInfo(mults, dim, betti.flag_poincare(list(mults)))


# ---------------------------------------------------------------------------
# text form

_HALF_VERTEX = re.compile(r"^w(\d+)/2$")
_VECTOR = re.compile(r"^\((.*)\)$")


def parse_label(token, r):
    """Parse ``wK/2``, an explicit vector ``(a,b,...)``, or (SU(2) only) ``p/q``."""
    token = token.strip()
    m = _HALF_VERTEX.match(token)
    try:
        if m:
            k = int(m.group(1))
            if not 0 <= k <= r:
                raise BadLabel(f"vertex index {k} outside 0..{r} in {token!r}")
            return half_vertex(r, k)
        m = _VECTOR.match(token)
        if m:
            parts = [p.strip() for p in m.group(1).split(",")]
            if len(parts) != r:
                raise BadLabel(f"label {token!r} has {len(parts)} entries, expected {r}")
            return Label(tuple(Fraction(p) for p in parts))
        if r == 2:
            lam = Fraction(token)
            if not 0 <= lam <= Fraction(1, 2):
                raise BadLabel(f"SU(2) label {token!r} outside [0, 1/2]")
            return Label((lam, -lam))
    except (ValueError, ZeroDivisionError, OutOfAlcove) as exc:
        raise BadLabel(f"bad label {token!r}: {exc}") from exc
    raise BadLabel(f"unknown label token {token!r}")


def format_label(label):
    k = half_vertex_index(label)
    if k is not None:
        return f"w{k}/2"
    if label.rank == 2:
        return str(label.entries[0])
    return fmt_vector(label.entries)
