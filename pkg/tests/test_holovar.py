import json
import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from symptangle import alcove as al
from symptangle import holovar as hv
from symptangle.errors import EmptyModuli, NotOnVariety, ShapeError, Unsupported

Q = al.half_vertex(2, 1)
S1 = np.array([[0, 1], [1, 0]], complex)
S2 = np.array([[0, -1j], [1j, 0]])
S3 = np.array([[1, 0], [0, -1]], complex)
CFG = hv.SolverConfig(seed=0, restarts=10)


def frame(b, d):
    """Unitary q with q d q^H = b, for diagonal d and b in its class."""
    w, v = np.linalg.eig(b)
    order = [int(np.argmin(np.abs(w - z))) for z in np.diag(d)]
    q, _ = np.linalg.qr(v[:, order])
    return q


def pauli_point():
    pr = hv.problem(2, [Q] * 3)
    d = hv.class_rep(Q)
    return pr, hv.HolonomyPoint(pr, tuple(frame(1j * s, d) for s in (S1, S2, S3)))


def fd_dimension(p, h=1e-6, threshold=1e-6):
    """Moduli dimension from a finite-difference Jacobian of the relator in the class frames."""
    pr = p.problem
    r = pr.rank
    basis = hv.su_basis(r)
    dim = len(basis)
    n = pr.n
    base = np.concatenate([np.zeros(dim * n)])

    def f(x):
        qs = [expm(hv.from_coords(x[j * dim:(j + 1) * dim], basis)) @ q for j, q in enumerate(p.q)]
        return hv.realify(hv.relator(hv.HolonomyPoint(pr, tuple(qs))))

    J = np.array([(f(base + h * e) - f(base - h * e)) / (2 * h) for e in np.eye(dim * n)]).T
    s = np.linalg.svd(J, compute_uv=False)
    rank = int(np.sum(s > threshold * s[0]))
    class_dims = sum(al.conj_class_info(lab).real_dimension for _, lab in pr.labels)
    gens = [b for b in p.b]
    comm = np.array([np.concatenate([hv.realify(e @ g - g @ e) for g in gens]) for e in basis]).T
    sc = np.linalg.svd(comm, compute_uv=False)
    commutant = dim - int(np.sum(sc > threshold * sc[0]))
    return class_dims - rank - (dim - commutant)


def test_class_rep():
    assert np.allclose(hv.class_rep(Q), np.diag([1j, -1j]))
    assert abs(np.trace(hv.class_rep(Q))) < 1e-15
    assert np.allclose(hv.class_rep(al.zero(3)), np.eye(3))


@given(st.integers(2, 4), st.data())
def test_eigenangle_recovery(r, data):
    k = data.draw(st.integers(0, r - 1))
    lab = al.half_vertex(r, k)
    ang = hv.eigenangles(hv.class_rep(lab))
    assert np.allclose(ang, [float(e) for e in lab.entries])


def test_su_basis_orthonormal():
    for r in (2, 3, 4):
        b = hv.su_basis(r)
        G = np.array([[hv.inner(x, y) for y in b] for x in b])
        assert len(b) == r * r - 1 and np.allclose(G, np.eye(len(b)))


def test_pauli_relator():
    pr, p = pauli_point()
    assert np.allclose(p.b[0], 1j * S1)
    assert hv.relator_residual(p) < 1e-14


def test_trivial_relator():
    z = al.zero(3)
    pr = hv.problem(3, [z] * 4)
    p = hv.HolonomyPoint(pr, tuple(np.eye(3) for _ in range(4)))
    assert hv.relator_residual(p) == 0


def test_residual_nonnegative(rng):
    pr = hv.problem(2, [Q] * 4)
    p = hv.HolonomyPoint(pr, tuple(hv.haar_unitary(2, rng) for _ in range(4)))
    assert hv.relator_residual(p) >= 0


def test_shape_errors():
    pr = hv.problem(2, [Q] * 3)
    with pytest.raises(ShapeError):
        hv.relator_residual(hv.HolonomyPoint(pr, (np.eye(2),)))


def test_solve_m5():
    pr = hv.problem(2, [Q] * 5)
    p = hv.solve(pr, CFG)
    assert hv.relator_residual(p) < 1e-8
    for b, (_, lab) in zip(p.b, pr.labels):
        assert hv.is_group_element(b, 1e-9)
        assert np.allclose(hv.eigenangles(b), [float(e) for e in lab.entries], atol=1e-9)


def test_solve_is_deterministic():
    pr = hv.problem(2, [Q] * 5)
    a = hv.solve(pr, hv.SolverConfig(seed=7, restarts=3))
    b = hv.solve(pr, hv.SolverConfig(seed=7, restarts=3))
    assert all(np.array_equal(x, y) for x, y in zip(a.q, b.q))


def test_empty_chamber_raises():
    pr = hv.problem(2, [al.Label((F(9, 20), F(-9, 20)))] * 5)
    with pytest.raises(EmptyModuli) as exc:
        hv.solve(pr, CFG)
    assert exc.value.certificate.n == 5


def test_triple_is_pauli_up_to_gauge():
    pr = hv.problem(2, [Q] * 3)
    p = hv.solve(pr, CFG)
    _, ref = pauli_point()
    assert np.allclose(hv.invariant_vector(p), hv.invariant_vector(ref), atol=1e-8)


@pytest.mark.parametrize(
    "r, labels, expected",
    [
        (2, [Q] * 3, 0),
        (2, [Q] * 5, 4),
        (3, [al.half_vertex(3, 1), al.half_vertex(3, 1), al.involution(al.half_vertex(3, 2))], 0),
    ],
)
def test_tangent_dimension_against_fd_oracle(r, labels, expected):
    pr = hv.problem(r, labels)
    p = hv.solve(pr, CFG)
    assert hv.tangent_dimension(p, pr) == expected
    assert fd_dimension(p) == expected


def test_tangent_dimension_off_variety(rng):
    pr = hv.problem(2, [Q] * 5)
    p = hv.HolonomyPoint(pr, tuple(hv.haar_unitary(2, rng) for _ in range(5)))
    with pytest.raises(NotOnVariety):
        hv.tangent_dimension(p, pr)


def test_commutant_examples():
    _, p = pauli_point()
    assert hv.commutant_dimension(p) == 0
    pr = hv.problem(2, [Q] * 4)
    diag = hv.HolonomyPoint(pr, tuple(np.eye(2) for _ in range(4)))
    assert hv.commutant_dimension(diag) == 1
    pr = hv.problem(3, [al.zero(3)] * 3)
    triv = hv.HolonomyPoint(pr, tuple(np.eye(3) for _ in range(3)))
    assert hv.commutant_dimension(triv) == 8


def test_gauge_classes():
    assert hv.count_gauge_classes(hv.problem(2, [Q] * 3), CFG) == 1
    assert hv.count_gauge_classes(hv.problem(2, [al.Label((F(9, 20), F(-9, 20)))] * 5), CFG) == 0


def test_invariant_vector_is_gauge_invariant(rng):
    p = hv.solve(hv.problem(2, [Q] * 5), CFG)
    h = hv.haar_unitary(2, rng)
    assert np.allclose(hv.invariant_vector(p), hv.invariant_vector(p.conjugated(h)))


@pytest.fixture(scope="module")
def m5_points():
    return hv.converged_points(hv.problem(2, [Q] * 5), hv.SolverConfig(seed=3, restarts=30))


def test_braid_preserves_residual(m5_points):
    for p in m5_points:
        for i in range(1, 5):
            assert hv.relator_residual(hv.braid_act(p, i)) < 1e-12


def test_braid_full_twist_matches_substitution(m5_points):
    for p in m5_points[:10]:
        for i in range(1, 5):
            b = p.b
            x, y = b[i - 1], b[i]
            u = y.conj().T @ x @ y
            expected = (u, u.conj().T @ y @ u)
            twice = hv.braid_act(hv.braid_act(p, i), i).b
            assert np.allclose(twice[i - 1], expected[0], atol=1e-10)
            assert np.allclose(twice[i], expected[1], atol=1e-10)


def test_braid_fixes_equal_neighbours():
    pr = hv.problem(2, [Q] * 2)
    q = hv.haar_unitary(2, np.random.default_rng(0))
    p = hv.HolonomyPoint(pr, (q, q))
    out = hv.braid_act(p, 1)
    assert all(np.allclose(a, b) for a, b in zip(p.b, out.b))


def test_braid_with_negative_markings(m5_points):
    pr = hv.ModuliProblem(2, ((1, Q), (1, Q), (-1, Q), (-1, Q)))
    p = hv.solve(pr, CFG)
    out = hv.braid_act(p, 3)
    assert hv.relator_residual(out) < 1e-12


def test_goldman_extremes():
    pr = hv.problem(2, [Q] * 2)
    d = hv.class_rep(Q)
    b = 1j * S1
    q1 = frame(b, d)
    q2 = frame(b.conj().T, d)
    assert hv.goldman(hv.HolonomyPoint(pr, (q1, q2)), 1, 2) == pytest.approx(0, abs=1e-7)
    assert hv.goldman(hv.HolonomyPoint(pr, (q1, q1)), 1, 2) == pytest.approx(0.5, abs=1e-7)


def test_goldman_su3_unsupported():
    pr = hv.problem(3, [al.zero(3)] * 2)
    with pytest.raises(Unsupported):
        hv.goldman(hv.HolonomyPoint(pr, (np.eye(3), np.eye(3))), 1, 2)


def test_certificates():
    c = hv.empty_chamber_certificate(5, F(9, 20))
    assert c is not None and c.lhs == pytest.approx(math.pi / 2) and c.rhs == pytest.approx(math.pi)
    assert hv.empty_chamber_certificate(5, F(1, 4)) is None
    for n in (1, 3, 5, 7):
        assert hv.empty_chamber_certificate(n, F(1, 2)) is not None


@pytest.mark.parametrize("n", [2, 4, 6])
def test_no_certificate_for_even_n_at_half(n):
    # every holonomy is -I and the product of an even number of them is I
    half = al.Label((F(1, 2), F(-1, 2)))
    pr = hv.problem(2, [half] * n)
    p = hv.HolonomyPoint(pr, tuple(np.eye(2) for _ in range(n)))
    assert hv.relator_residual(p) < 1e-14
    assert hv.empty_chamber_certificate(n, F(1, 2)) is None


@settings(max_examples=30)
@given(st.integers(0, 10**6), st.sampled_from([2, 3, 4]))
def test_product_spectrum_law(seed, r):
    rng = np.random.default_rng(seed)
    w = al.half_vertex(r, 1)
    g1, g2 = hv.random_class_element(w, rng), hv.random_class_element(w, rng)
    eps, err = hv.product_spectrum_fit(g1, g2)
    assert err < 1e-9 and -0.5 - 1e-12 <= eps <= 1e-12


def test_persistence_round_trip():
    pr = hv.problem(2, [Q] * 5)
    p = hv.solve(pr, CFG)
    doc = json.loads(json.dumps(hv.point_to_json(p, seed=0)))
    assert set(doc) >= {"group", "genus", "labels", "matrices", "residual", "seed"}
    back = hv.point_from_json(doc)
    assert back.problem == pr
    assert all(np.array_equal(a, b) for a, b in zip(p.q, back.q))


def test_genus_relator_accepted_but_not_solved(rng):
    pr = hv.ModuliProblem(2, ((1, Q), (1, Q)), genus=1)
    a = (hv.haar_unitary(2, rng), hv.haar_unitary(2, rng))
    p = hv.HolonomyPoint(pr, (np.eye(2), np.eye(2)), a)
    assert hv.relator_residual(p) >= 0
    with pytest.raises(Unsupported):
        hv.solve(pr, CFG)
