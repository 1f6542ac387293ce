"""Numerical representation varieties of punctured spheres.

A point is a tuple of special unitary matrices ``b_j = q_j D_j q_j^H`` with
``D_j`` the diagonal representative of the prescribed conjugacy class, so
class membership holds by construction. The relator is
``prod_i [a_{2i-1}, a_{2i}] * prod_j c_j`` with ``c_j = b_j^{eps_j}``.

The solver is a multistart Gauss-Newton iteration on ``prod_j c_j - I`` over
the parameters ``q_j``; a step ``X_j`` in ``su(r)`` moves ``q_j`` to
``expm(X_j) q_j`` and ``c_j`` to ``c_j + [X_j, c_j]`` to first order.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.linalg import expm
from scipy.optimize import linear_sum_assignment

from . import alcove
from .errors import (
    EmptyModuli,
    LabelMismatch,
    NoConvergence,
    NotOnVariety,
    ShapeError,
    Unsupported,
)

TAU_GRP = 1e-10
# singular values below this count as zero whatever the matrix scale
RANK_FLOOR = 1e-9


# ---------------------------------------------------------------------------
# Lie algebra helpers


def inner(a, b):
    """``<a, b> = -Re tr(ab)``, positive definite on ``su(r)``."""
    return -np.real(np.trace(a @ b))


def su_basis(r):
    """Orthonormal basis of ``su(r)`` for ``inner``."""
    basis = []
    for k in range(r):
        for l in range(k + 1, r):
            e = np.zeros((r, r), complex)
            e[k, l], e[l, k] = 1, -1
            basis.append(e / math.sqrt(2))
            e = np.zeros((r, r), complex)
            e[k, l] = e[l, k] = 1j
            basis.append(e / math.sqrt(2))
    for m in range(1, r):
        d = np.zeros(r)
        d[:m] = 1
        d[m] = -m
        basis.append(np.diag(1j * d / np.linalg.norm(d)))
    return basis


def from_coords(coords, basis):
    return sum(c * e for c, e in zip(coords, basis))


def to_coords(x, basis):
    return np.array([inner(x, e) for e in basis])


def realify(m):
    m = np.asarray(m)
    return np.concatenate([m.real.ravel(), m.imag.ravel()])


def numeric_rank(mat, rank_threshold=1e-6):
    mat = np.atleast_2d(mat)
    if mat.size == 0:
        return 0
    s = np.linalg.svd(mat, compute_uv=False)
    if s.size == 0 or s[0] <= RANK_FLOOR:
        return 0
    return int(np.sum(s > max(rank_threshold * s[0], RANK_FLOOR)))


def nullity(mat, rank_threshold=1e-6):
    return np.atleast_2d(mat).shape[1] - numeric_rank(mat, rank_threshold)


def haar_unitary(r, rng):
    """Haar-random unitary via QR of a complex Gaussian with phase correction."""
    z = (rng.standard_normal((r, r)) + 1j * rng.standard_normal((r, r))) / math.sqrt(2)
    q, R = np.linalg.qr(z)
    d = np.diag(R)
    return q * (d / np.abs(d))


def rng_for(seed, restart):
    return np.random.default_rng(np.random.SeedSequence([int(seed) & (2**64 - 1), int(restart)]))


def chain(mats, r):
    out = np.eye(r, dtype=complex)
    for m in mats:
        out = out @ m
    return out


def is_group_element(u, tol=TAU_GRP):
    u = np.asarray(u)
    r = u.shape[0]
    return (
        np.linalg.norm(u.conj().T @ u - np.eye(r)) < tol
        and abs(np.linalg.det(u) - 1) < tol
    )


# ---------------------------------------------------------------------------
# problems and points


def class_rep(label):
    return np.diag(np.exp(2j * np.pi * np.array([float(e) for e in label.entries])))


def eigenangles(u):
    """Eigenvalue angles of ``u`` divided by ``2 pi``, sorted decreasing."""
    return np.sort(np.angle(np.linalg.eigvals(u)) / (2 * np.pi))[::-1]


@dataclass(frozen=True)
class ModuliProblem:
    """Labels are ``(eps, Label)`` with ``b_j`` in the class of ``Label``.

    ``memberships`` are optional extra constraints ``(start, stop, Label)``
    meaning ``c_start ... c_stop`` (1-based, inclusive) lies in that class; they
    enter tangent computations only.
    """

    rank: int
    labels: tuple
    genus: int = 0
    memberships: tuple = ()

    def __post_init__(self):
        labels = tuple((int(e), lab) for e, lab in self.labels)
        for e, lab in labels:
            if e not in (1, -1):
                raise ShapeError(f"orientation {e} is not +-1")
            if lab.rank != self.rank:
                raise ShapeError(f"label {lab} has rank {lab.rank}, expected {self.rank}")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "memberships", tuple(self.memberships))

    @property
    def n(self):
        return len(self.labels)

    @property
    def signs(self):
        return tuple(e for e, _ in self.labels)

    def factor_labels(self):
        """Class of each relator factor ``c_j``."""
        return tuple(lab if e > 0 else alcove.involution(lab) for e, lab in self.labels)


def problem(r, labels, signs=None, genus=0):
    """Convenience constructor from a list of labels (all positive by default)."""
    labels = list(labels)
    signs = [1] * len(labels) if signs is None else list(signs)
    return ModuliProblem(r, tuple(zip(signs, labels)), genus)


def problem_from_markings(markings, r):
    """Markings carry the class of ``c_j``; a negative marking stores ``b_j`` in ``*label``."""
    return ModuliProblem(
        r, tuple((m.orientation, m.label if m.orientation > 0 else alcove.involution(m.label)) for m in markings)
    )


@dataclass(eq=False)
class HolonomyPoint:
    problem: ModuliProblem
    q: tuple
    a: tuple = ()

    def __post_init__(self):
        self.q = tuple(np.asarray(x, complex) for x in self.q)
        self.a = tuple(np.asarray(x, complex) for x in self.a)
        self._D = tuple(class_rep(lab) for _, lab in self.problem.labels)

    @property
    def b(self):
        return [q @ d @ q.conj().T for q, d in zip(self.q, self._D)]

    @property
    def c(self):
        return [bj if e > 0 else bj.conj().T for bj, e in zip(self.b, self.problem.signs)]

    def conjugated(self, h):
        return HolonomyPoint(self.problem, tuple(h @ q for q in self.q), tuple(h @ x @ h.conj().T for x in self.a))


def _check_shape(p, pr):
    r = pr.rank
    if len(p.q) != pr.n or len(p.a) != 2 * pr.genus:
        raise ShapeError(f"point has {len(p.q)} class and {len(p.a)} surface factors; problem needs {pr.n} and {2 * pr.genus}")
    for m in itertools.chain(p.q, p.a):
        if m.shape != (r, r):
            raise ShapeError(f"matrix of shape {m.shape}, expected {(r, r)}")


def relator(p, pr=None):
    pr = pr or p.problem
    _check_shape(p, pr)
    r = pr.rank
    out = np.eye(r, dtype=complex)
    for k in range(pr.genus):
        x, y = p.a[2 * k], p.a[2 * k + 1]
        out = out @ x @ y @ x.conj().T @ y.conj().T
    return out @ chain(p.c, r)


def relator_residual(p, pr=None):
    pr = pr or p.problem
    return float(np.linalg.norm(relator(p, pr) - np.eye(pr.rank)))


# ---------------------------------------------------------------------------
# solver


@dataclass(frozen=True)
class SolverConfig:
    seed: int = 0
    restarts: int = 10
    max_iter: int = 200
    tol_residual: float = 1e-10
    rank_threshold: float = 1e-6

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")


@dataclass
class RestartResult:
    index: int
    residual: float
    iterations: int
    point: HolonomyPoint = field(repr=False)


def relator_jacobian(cs, basis):
    """Real Jacobian of ``prod c_j`` with respect to ``X_j`` coordinates."""
    r = cs[0].shape[0]
    n = len(cs)
    prefix = [np.eye(r, dtype=complex)]
    for c in cs:
        prefix.append(prefix[-1] @ c)
    suffix = [np.eye(r, dtype=complex)]
    for c in reversed(cs):
        suffix.append(c @ suffix[-1])
    suffix.reverse()
    cols = []
    for j in range(n):
        L, R, c = prefix[j], suffix[j + 1], cs[j]
        for e in basis:
            cols.append(realify(L @ (e @ c - c @ e) @ R))
    return np.array(cols).T


def _factors(qs, Ds, signs):
    out = []
    for q, d, e in zip(qs, Ds, signs):
        b = q @ d @ q.conj().T
        out.append(b if e > 0 else b.conj().T)
    return out


def _descend(pr, qs, cfg):
    r = pr.rank
    basis = su_basis(r)
    Ds = [class_rep(lab) for _, lab in pr.labels]
    signs = pr.signs
    eye = np.eye(r)
    cs = _factors(qs, Ds, signs)
    F = realify(chain(cs, r) - eye)
    f = 0.5 * F @ F
    target = 0.5 * (cfg.tol_residual / 100) ** 2
    it = 0
    for it in range(1, cfg.max_iter + 1):
        if f <= target:
            break
        J = relator_jacobian(cs, basis)
        grad = J.T @ F
        step = np.linalg.lstsq(J, -F, rcond=None)[0]
        slope = grad @ step
        if slope >= 0:
            step, slope = -grad, -(grad @ grad)
        if slope == 0:
            break
        t = 1.0
        dim = len(basis)
        accepted = False
        while t > 1e-12:
            trial = [
                expm(from_coords(t * step[j * dim : (j + 1) * dim], basis)) @ q for j, q in enumerate(qs)
            ]
            tcs = _factors(trial, Ds, signs)
            tF = realify(chain(tcs, r) - eye)
            tf = 0.5 * tF @ tF
            if tf <= f + 1e-4 * t * slope:
                accepted = True
                break
            t *= 0.5
        if not accepted or f - tf <= 1e-16 * max(f, 1e-300):
            if accepted and tf < f:
                qs, cs, F, f = trial, tcs, tF, tf
            break
        qs, cs, F, f = trial, tcs, tF, tf
    return qs, it


def run_restarts(pr, cfg):
    """Run every restart; results are ordered by restart index."""
    if pr.genus != 0:
        raise Unsupported("only genus 0 problems can be solved")
    if pr.n == 0:
        raise ShapeError("problem has no labels")
    out = []
    for k in range(cfg.restarts):
        rng = rng_for(cfg.seed, k)
        qs = [haar_unitary(pr.rank, rng) for _ in range(pr.n)]
        qs, iters = _descend(pr, qs, cfg)
        p = HolonomyPoint(pr, tuple(qs))
        out.append(RestartResult(k, relator_residual(p, pr), iters, p))
    return out


def best_result(results):
    return min(results, key=lambda res: (res.residual, res.index))


def solve(pr, cfg):
    """Best restart, or EmptyModuli / NoConvergence."""
    cert = certificate_for(pr)
    if cert is not None:
        raise EmptyModuli(cert)
    best = best_result(run_restarts(pr, cfg))
    if best.residual >= cfg.tol_residual:
        raise NoConvergence(f"no restart reached residual {cfg.tol_residual:g}", best.residual)
    return best.point


def converged_points(pr, cfg):
    return [res.point for res in run_restarts(pr, cfg) if res.residual < cfg.tol_residual]


# ---------------------------------------------------------------------------
# linear algebra at a point


def commutant_dimension(p, rank_threshold=1e-6):
    r = p.problem.rank
    basis = su_basis(r)
    gens = list(p.b) + list(p.a)
    if not gens:
        return len(basis)
    rows = np.array([np.concatenate([realify(e @ g - g @ e) for g in gens]) for e in basis]).T
    return nullity(rows, rank_threshold)


def class_normal_projector(g, rank_threshold=1e-6):
    """Projector (on realified matrices) onto the normal space of ``g``'s class inside ``g u(r)``."""
    r = g.shape[0]
    basis = su_basis(r)
    tangent = np.array([realify(e @ g - g @ e) for e in basis]).T
    u, s, _ = np.linalg.svd(tangent, full_matrices=False)
    k = int(np.sum(s > rank_threshold * s[0])) if s.size and s[0] > 0 else 0
    T = u[:, :k]
    full = np.array([realify(g @ e) for e in basis + [1j * np.eye(r)]]).T
    uf, sf, _ = np.linalg.svd(full, full_matrices=False)
    A = uf[:, : int(np.sum(sf > rank_threshold * sf[0]))]
    N = A - T @ (T.T @ A)
    un, sn, _ = np.linalg.svd(N, full_matrices=False)
    N = un[:, : int(np.sum(sn > rank_threshold))] if sn.size else N[:, :0]
    return N


def constraint_matrix(p, pr=None, rank_threshold=1e-6):
    """Linearized relator (and membership) constraints in the ``X_j`` coordinates."""
    pr = pr or p.problem
    basis = su_basis(pr.rank)
    cs = p.c
    blocks = [relator_jacobian(cs, basis)]
    dim = len(basis)
    for start, stop, lab in pr.memberships:
        seg = cs[start - 1 : stop]
        prod = chain(seg, pr.rank)
        N = class_normal_projector(prod, rank_threshold)
        J = relator_jacobian(seg, basis)
        full = np.zeros((J.shape[0], dim * pr.n))
        full[:, (start - 1) * dim : stop * dim] = J
        blocks.append(N.T @ full)
    return np.vstack(blocks)


def level_set_dimension(p, pr=None, rank_threshold=1e-6, tol=1e-8):
    pr = pr or p.problem
    if relator_residual(p, pr) > tol:
        raise NotOnVariety(f"relator residual {relator_residual(p, pr):.3e} exceeds {tol:g}")
    basis = su_basis(pr.rank)
    stab = 0
    for b in p.b:
        stab += nullity(np.array([realify(e @ b - b @ e) for e in basis]).T, rank_threshold)
    return nullity(constraint_matrix(p, pr, rank_threshold), rank_threshold) - stab


def gauge_dimension(p, rank_threshold=1e-6):
    return len(su_basis(p.problem.rank)) - commutant_dimension(p, rank_threshold)


def tangent_dimension(p, pr=None, rank_threshold=1e-6, tol=1e-8):
    """Dimension of the moduli space at ``p``: level-set tangent minus gauge orbit."""
    return level_set_dimension(p, pr, rank_threshold, tol) - gauge_dimension(p, rank_threshold)


# ---------------------------------------------------------------------------
# gauge classes


def invariant_vector(p):
    """Traces of the relator factors and of all their ordered pair and triple products."""
    cs = p.c
    vals = [np.trace(c) for c in cs]
    for j, k in itertools.combinations(range(len(cs)), 2):
        vals.append(np.trace(cs[j] @ cs[k]))
    for j, k, l in itertools.combinations(range(len(cs)), 3):
        vals.append(np.trace(cs[j] @ cs[k] @ cs[l]))
    vals = np.array(vals)
    return np.concatenate([vals.real, vals.imag])


def cluster(vectors, tol=1e-5):
    reps = []
    for v in vectors:
        if not any(np.max(np.abs(v - w)) < tol for w in reps):
            reps.append(v)
    return reps


def count_gauge_classes(pr, cfg, tol=1e-5):
    if certificate_for(pr) is not None:
        return 0
    return len(cluster([invariant_vector(p) for p in converged_points(pr, cfg)], tol))


# ---------------------------------------------------------------------------
# braid action and Goldman function


def braid_act(p, i):
    """Half-twist of markings ``i, i+1`` (1-based) acting on the relator factors."""
    pr = p.problem
    if not 1 <= i < pr.n:
        raise LabelMismatch(f"no strand pair at {i} for {pr.n} markings")
    k = i - 1
    if pr.labels[k] != pr.labels[k + 1]:
        raise LabelMismatch(f"markings {i} and {i + 1} differ")
    b = p.b
    qs = list(p.q)
    if pr.labels[k][0] > 0:
        new_q = b[k + 1].conj().T @ qs[k]
    else:
        new_q = b[k + 1] @ qs[k]
    qs[k], qs[k + 1] = qs[k + 1], new_q
    return HolonomyPoint(pr, tuple(qs), p.a)


def goldman(p, j, k):
    """``arccos(Re tr(c_j c_k) / 2) / 2 pi`` for SU(2); 1-based indices."""
    if p.problem.rank != 2:
        raise Unsupported("the Goldman function is only defined here for SU(2)")
    if j == k:
        raise ValueError("goldman needs two different markings")
    cs = p.c
    x = np.clip(0.5 * np.real(np.trace(cs[j - 1] @ cs[k - 1])), -1.0, 1.0)
    return float(np.arccos(x) / (2 * np.pi))


# ---------------------------------------------------------------------------
# emptiness


@dataclass(frozen=True)
class EmptinessCertificate:
    """Spherical triangle inequality: ``n * |pi - 2 pi mu| < pi`` with ``n`` odd."""

    n: int
    mu: Fraction
    lhs: float
    rhs: float

    def __str__(self):
        return f"{self.n} * |pi - 2pi*{self.mu}| = {self.lhs:.6g} < {self.rhs:.6g} = pi (n odd)"


def empty_chamber_certificate(n, mu):
    """Certificate that ``M_n(mu)`` for SU(2) is empty, or ``None``.

    Writing each holonomy as ``-d_j`` with ``d_j`` at distance
    ``pi - 2 pi mu`` from the identity, an odd product must reach ``-I`` at
    distance ``pi``; that is impossible when the total length is below ``pi``.
    For even ``n`` the product only has to reach ``I`` and no certificate is
    issued.
    """
    mu = Fraction(mu)
    if n % 2 == 0:
        return None
    if n * abs(1 - 2 * mu) < 1:
        return EmptinessCertificate(n, mu, n * abs(math.pi - 2 * math.pi * float(mu)), math.pi)
    return None


def certificate_for(pr):
    if pr.rank != 2 or pr.genus != 0 or not pr.labels:
        return None
    mus = {lab.entries[0] for _, lab in pr.labels}
    if len(mus) != 1:
        return None
    return empty_chamber_certificate(pr.n, mus.pop())


# ---------------------------------------------------------------------------
# product of two half-vertex classes


def random_class_element(label, rng):
    q = haar_unitary(label.rank, rng)
    return q @ class_rep(label) @ q.conj().T


def _match_error(u, v):
    cost = np.abs(u[:, None] - v[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max())


def product_spectrum_fit(g1, g2):
    """Fit ``eps`` in ``[-1/2, 0]`` with ``spec(g1 g2) = exp(2 pi i (omega_1 + eps alpha_1))``.

    Returns ``(eps, max eigenvalue mismatch)``.
    """
    r = g1.shape[0]
    ev = np.linalg.eigvals(g1 @ g2)
    shifted = np.angle(ev * np.exp(2j * np.pi / r))
    theta = float(np.mean(np.sort(np.abs(shifted))[-2:]))
    eps = -theta / (2 * np.pi)
    w1 = np.array([float(e) for e in alcove.vertex(r, 1).entries])
    alpha = np.zeros(r)
    alpha[0], alpha[1] = 1, -1
    target = np.exp(2j * np.pi * (w1 + eps * alpha))
    return eps, _match_error(ev, target)


# ---------------------------------------------------------------------------
# persistence


def _mat_json(m):
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m)]


def _mat_from_json(rows):
    return np.array([[complex(re, im) for re, im in row] for row in rows])


def point_to_json(p, seed=None, residual=None):
    pr = p.problem
    doc = {
        "group": f"SU({pr.rank})",
        "genus": pr.genus,
        "labels": [["+" if e > 0 else "-", alcove.format_label(lab)] for e, lab in pr.labels],
        "matrices": {"a": [_mat_json(x) for x in p.a], "q": [_mat_json(x) for x in p.q]},
        "residual": relator_residual(p) if residual is None else residual,
    }
    if seed is not None:
        doc["seed"] = seed
    return doc


def point_from_json(doc):
    r = int(doc["group"][3:-1])
    labels = tuple((1 if s == "+" else -1, alcove.parse_label(t, r)) for s, t in doc["labels"])
    pr = ModuliProblem(r, labels, int(doc.get("genus", 0)))
    m = doc["matrices"]
    return HolonomyPoint(pr, tuple(_mat_from_json(x) for x in m["q"]), tuple(_mat_from_json(x) for x in m.get("a", [])))
