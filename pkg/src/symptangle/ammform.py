"""Group-valued 2-forms on products of surface groups and conjugacy classes.

Tangent vectors are ordinary matrices ``v`` at a base matrix ``u`` with
``u^{-1} v`` in ``su(r)``. The form on a product is assembled by fusion:
``omega(B1 B2) = omega(B1) + omega(B2) + <Phi_1^* theta ^ Phi_2^* thetabar>/2``
where ``<alpha ^ beta>(v, w) = <alpha(v), beta(w)> - <alpha(w), beta(v)>``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import holovar as hv
from .errors import BaseMismatch, NotInClass, NotOnVariety, Reducible, ShapeError
from .holovar import inner, su_basis

# Weight of the conjugacy-class form inside a fusion product. The class form
# below follows ``<theta(v_eta) + thetabar(v_eta), xi>``; fusing it with the
# halved cross terms only has the gauge directions in its kernel on the level
# set when it is halved as well.
CLASS_WEIGHT = 0.5


@dataclass(eq=False)
class TangentVector:
    """One component per surface generator ``a_i`` then per class factor ``b_j``."""

    base: hv.HolonomyPoint
    components: tuple

    def __post_init__(self):
        self.components = tuple(np.asarray(x, complex) for x in self.components)
        if len(self.components) != len(self.base.a) + len(self.base.q):
            raise ShapeError("tangent vector has the wrong number of components")

    def __add__(self, other):
        _same_base(self, other)
        return TangentVector(self.base, tuple(x + y for x, y in zip(self.components, other.components)))

    def __mul__(self, s):
        return TangentVector(self.base, tuple(s * x for x in self.components))

    __rmul__ = __mul__

    def a_parts(self):
        return self.components[: len(self.base.a)]

    def b_parts(self):
        return self.components[len(self.base.a) :]

    def c_parts(self):
        """Components transported to the relator factors ``c_j = b_j^{eps_j}``."""
        out = []
        for v, c, e in zip(self.b_parts(), self.base.c, self.base.problem.signs):
            out.append(v if e > 0 else -c @ v @ c)
        return out

    def validity_residual(self):
        """Largest failure of ``u^{-1} v`` to be traceless anti-Hermitian, and of class tangency."""
        worst = 0.0
        bases = list(self.base.a) + list(self.base.b)
        for u, v in zip(bases, self.components):
            x = u.conj().T @ v
            worst = max(worst, np.linalg.norm(x + x.conj().T), abs(np.trace(x)))
        for b, v in zip(self.base.b, self.b_parts()):
            _, res = generator_of(b, v)
            worst = max(worst, res)
        return worst


def _same_base(v, w):
    if v.base is not w.base:
        raise BaseMismatch("tangent vectors are based at different points")


def generating_vector(g, xi):
    """Tangent of ``t -> exp(t xi) g exp(-t xi)`` at ``t = 0``."""
    return xi @ g - g @ xi


def generator_of(g, v):
    """Least-squares ``xi`` in ``su(r)`` with ``[xi, g] = v``, and the fit residual."""
    basis = su_basis(g.shape[0])
    A = np.array([hv.realify(generating_vector(g, e)) for e in basis]).T
    y = hv.realify(v)
    coords = np.linalg.lstsq(A, y, rcond=None)[0]
    return hv.from_coords(coords, basis), float(np.linalg.norm(A @ coords - y))


def tangent_from_algebra(p, xis_b, xis_a=None):
    """Tangent vector moving ``b_j`` by ``[xi_j, b_j]`` and ``a_i`` by ``a_i X_i``."""
    xis_a = xis_a if xis_a is not None else [np.zeros_like(x) for x in p.a]
    comps = [a @ x for a, x in zip(p.a, xis_a)] + [generating_vector(b, x) for b, x in zip(p.b, xis_b)]
    return TangentVector(p, tuple(comps))


def omega_conjugacy(mu, g, xi, eta, tol=1e-8):
    """``<Ad(g^-1) eta - Ad(g) eta, xi>`` for ``g`` in the class of ``mu``."""
    g = np.asarray(g, complex)
    ang = hv.eigenangles(g)
    ref = np.array([float(e) for e in mu.entries])
    if not hv.is_group_element(g, 1e-8) or _angle_gap(ang, ref) > tol:
        raise NotInClass(f"matrix is not in the class {mu}")
    gi = g.conj().T
    return float(inner(gi @ eta @ g - g @ eta @ gi, xi))


def _angle_gap(a, b):
    """Distance between two multisets of angles (in turns) modulo 1."""
    a = np.exp(2j * np.pi * np.asarray(a))
    b = np.exp(2j * np.pi * np.asarray(b))
    return hv._match_error(a, b)


def _class_form(g, v, w):
    xi, _ = generator_of(g, v)
    eta, _ = generator_of(g, w)
    gi = g.conj().T
    return CLASS_WEIGHT * float(inner(gi @ eta @ g - g @ eta @ gi, xi))


def _wedge(alpha_v, alpha_w, beta_v, beta_w):
    return inner(alpha_v, beta_w) - inner(alpha_w, beta_v)


def _pair_form(a, b, va, vb, wa, wb):
    ai, bi = a.conj().T, b.conj().T
    first = _wedge(ai @ va, ai @ wa, vb @ bi, wb @ bi)
    second = _wedge(va @ ai, wa @ ai, bi @ vb, bi @ wb)
    return 0.5 * first + 0.5 * second


def _commutator_and_tangent(a, b, va, vb):
    ai, bi = a.conj().T, b.conj().T
    phi = a @ b @ ai @ bi
    d = va @ b @ ai @ bi + a @ vb @ ai @ bi - a @ b @ ai @ va @ ai @ bi - a @ b @ ai @ bi @ vb @ bi
    return phi, d


class _Atom:
    """A fusion factor: a commutator pair or a single class element."""

    def __init__(self, kind, value, v, w, extra=None):
        self.kind, self.value, self.v, self.w, self.extra = kind, value, v, w, extra


def _atoms(p, v, w):
    atoms = []
    a, va, wa = p.a, v.a_parts(), w.a_parts()
    for k in range(len(a) // 2):
        x, y = a[2 * k], a[2 * k + 1]
        phi, dv = _commutator_and_tangent(x, y, va[2 * k], va[2 * k + 1])
        _, dw = _commutator_and_tangent(x, y, wa[2 * k], wa[2 * k + 1])
        own = _pair_form(x, y, va[2 * k], va[2 * k + 1], wa[2 * k], wa[2 * k + 1])
        atoms.append(_Atom("pair", phi, dv, dw, own))
    for c, cv, cw in zip(p.c, v.c_parts(), w.c_parts()):
        atoms.append(_Atom("class", c, cv, cw, _class_form(c, cv, cw)))
    return atoms


def _product(atoms, r):
    """Value and the two tangent images of the product of ``atoms``."""
    val = np.eye(r, dtype=complex)
    dv = np.zeros((r, r), complex)
    dw = np.zeros((r, r), complex)
    for at in atoms:
        dv = dv @ at.value + val @ at.v
        dw = dw @ at.value + val @ at.w
        val = val @ at.value
    return val, dv, dw


def _cross(left, right, r):
    g1, v1, w1 = _product(left, r)
    g2, v2, w2 = _product(right, r)
    g1i, g2i = g1.conj().T, g2.conj().T
    return 0.5 * _wedge(g1i @ v1, g1i @ w1, v2 @ g2i, w2 @ g2i)


def _fuse(atoms, r, splitting):
    if len(atoms) == 1:
        return atoms[0].extra
    cut = 1 if splitting == "left" else len(atoms) - 1
    left, right = atoms[:cut], atoms[cut:]
    return _fuse(left, r, splitting) + _fuse(right, r, splitting) + _cross(left, right, r)


def omega_total(pr, p, v, w, splitting="left"):
    """Fused form on ``G^{2g} x prod C_j`` evaluated on ``v, w``.

    ``splitting`` is ``left`` (peel off the first factor) or ``right`` (the
    last); the two agree by associativity of fusion.
    """
    if v.base is not p or w.base is not p:
        raise BaseMismatch("tangent vectors are not based at the given point")
    if pr is not None and pr != p.problem:
        raise BaseMismatch("point does not belong to the given problem")
    atoms = _atoms(p, v, w)
    if not atoms:
        return 0.0
    return float(_fuse(atoms, p.problem.rank, splitting))


def gram_matrix(p, vectors, splitting="left"):
    k = len(vectors)
    G = np.zeros((k, k))
    for i in range(k):
        for j in range(i + 1, k):
            G[i, j] = omega_total(None, p, vectors[i], vectors[j], splitting)
            G[j, i] = -G[i, j]
    return G


def _vector_from_flat(p, flat):
    r = p.problem.rank
    n = len(p.q)
    comps = []
    for j in range(n):
        re = flat[2 * r * r * j : 2 * r * r * j + r * r]
        im = flat[2 * r * r * j + r * r : 2 * r * r * (j + 1)]
        comps.append((re + 1j * im).reshape(r, r))
    return TangentVector(p, tuple(comps))


def level_tangent_basis(p, rank_threshold=1e-6):
    """Orthonormal basis (as tangent vectors) of the tangent space to the identity level set."""
    pr = p.problem
    if pr.genus:
        raise ShapeError("level-set bases are only built for genus 0")
    basis = su_basis(pr.rank)
    dim = len(basis)
    C = hv.constraint_matrix(p, pr, rank_threshold)
    _, s, vt = np.linalg.svd(C)
    rank = int(np.sum(s > rank_threshold * s[0])) if s.size and s[0] > 0 else 0
    null = vt[rank:].T
    images = []
    for col in null.T:
        flat = []
        for j, b in enumerate(p.b):
            xi = hv.from_coords(col[j * dim : (j + 1) * dim], basis)
            flat.append(hv.realify(generating_vector(b, xi)))
        images.append(np.concatenate(flat))
    M = np.array(images).T
    u, s, _ = np.linalg.svd(M, full_matrices=False)
    k = int(np.sum(s > rank_threshold * s[0])) if s.size and s[0] > 0 else 0
    return [_vector_from_flat(p, u[:, i]) for i in range(k)]


def gauge_vectors(p):
    basis = su_basis(p.problem.rank)
    return [tangent_from_algebra(p, [e] * len(p.q), [e] * len(p.a)) for e in basis]


@dataclass(frozen=True)
class KernelReport:
    level_tangent_dim: int
    gauge_dim: int
    form_rank: int
    max_gauge_pairing: float

    def triple(self):
        return (self.level_tangent_dim, self.gauge_dim, self.form_rank)


def reduced_kernel_report(pr, p, rank_threshold=1e-6, tol=1e-8):
    if pr is not None and pr != p.problem:
        raise BaseMismatch("point does not belong to the given problem")
    if hv.relator_residual(p) > tol:
        raise NotOnVariety(f"relator residual {hv.relator_residual(p):.3e} exceeds {tol:g}")
    if hv.commutant_dimension(p, rank_threshold) != 0:
        raise Reducible("point has a non-trivial commutant")
    tangents = level_tangent_basis(p, rank_threshold)
    G = gram_matrix(p, tangents)
    gauge = gauge_vectors(p)
    pairing = max(
        (abs(omega_total(None, p, g, t)) for g in gauge for t in tangents),
        default=0.0,
    )
    gauge_dim = hv.gauge_dimension(p, rank_threshold)
    return KernelReport(len(tangents), gauge_dim, hv.numeric_rank(G, rank_threshold), pairing)


def cup_fiber_vectors(p, j, tol=1e-8):
    """Tangents along the antidiagonal ``{(h, h^-1)}`` at relator factors ``j, j+1`` (1-based)."""
    cs = p.c
    if not 1 <= j < len(cs):
        raise ShapeError(f"no factor pair at {j}")
    r = p.problem.rank
    if np.linalg.norm(cs[j - 1] @ cs[j] - np.eye(r)) > tol:
        raise NotOnVariety(f"factors {j} and {j + 1} are not mutually inverse")
    zero = np.zeros((r, r), complex)
    out = []
    for e in su_basis(r):
        xis = [zero] * len(p.q)
        xis[j - 1] = xis[j] = e
        out.append(tangent_from_algebra(p, xis, [zero] * len(p.a)))
    return out


def cup_fiber_isotropy(p, j, splitting="left"):
    """Largest ``|omega(v, w)|`` over pairs of cup-fiber tangents."""
    vs = cup_fiber_vectors(p, j)
    G = gram_matrix(p, vs, splitting)
    return float(np.max(np.abs(G))) if G.size else 0.0
