"""A symmetric Frobenius algebra as a linear model of tangle words.

Each strand carries ``V = M_2(R)`` (dimension 4). Cup and cap are the
copairing and the trace pairing, merge is multiplication, split its dual,
``vcap`` is ``tr(abc)`` and ``vcup`` its dual; a braid is a fixed random
invertible map. Every Cerf move preserves the resulting linear map, so two
words related by moves must evaluate identically on any input.
"""
import numpy as np

D = 4


def _structure():
    basis = []
    for i in range(2):
        for j in range(2):
            e = np.zeros((2, 2))
            e[i, j] = 1
            basis.append(e)
    flat = np.array([b.ravel() for b in basis])
    m = np.zeros((D, D, D))  # m[c, a, b]: coefficient of e_c in e_a e_b
    for a in range(D):
        for b in range(D):
            m[:, a, b] = np.linalg.solve(flat.T, (basis[a] @ basis[b]).ravel())
    g = np.array([[np.trace(x @ y) for y in basis] for x in basis])
    gi = np.linalg.inv(g)
    split = np.einsum("ax,by,cxy,cd->abd", gi, gi, m, g)  # split[a, b, c_in]
    t3 = np.array([[[np.trace(x @ y @ z) for z in basis] for y in basis] for x in basis])
    t3_up = np.einsum("ax,by,cz,xyz->abc", gi, gi, gi, t3)
    rng = np.random.default_rng(2024)
    R = rng.normal(size=(D * D, D * D)) + 4 * np.eye(D * D)
    return m, g, gi, split, t3, t3_up, R.reshape(D, D, D, D), np.linalg.inv(R).reshape(D, D, D, D)


M, G, GI, SPLIT, T3, T3UP, R, RINV = _structure()


def _apply(x, k, n_in, T):
    """Contract ``T`` (out axes then ``n_in`` in axes) into axes ``k..k+n_in-1`` of ``x``."""
    n_out = T.ndim - n_in
    x = np.moveaxis(x, list(range(k, k + n_in)), list(range(n_in)))
    y = np.tensordot(T, x, axes=(list(range(n_out, T.ndim)), list(range(n_in))))
    return np.moveaxis(y, list(range(n_out)), list(range(k, k + n_out)))


def apply_generator(x, g):
    k = g.i - 1
    if g.kind == "braid":
        return _apply(x, k, 2, R if g.sign > 0 else RINV)
    if g.kind == "cup":
        return _apply(x, k, 0, GI)
    if g.kind == "cap":
        return _apply(x, k, 2, G)
    if g.kind == "merge":
        return _apply(x, k, 2, M)
    if g.kind == "split":
        return _apply(x, k, 1, SPLIT)
    if g.kind == "vcap":
        return _apply(x, k, 3, T3)
    if g.kind == "vcup":
        return _apply(x, k, 0, T3UP)
    raise ValueError(g.kind)


def evaluate(w, x):
    for g in w.generators:
        x = apply_generator(x, g)
    return x


def random_input(w, seed=0):
    n = len(w.incoming)
    return np.random.default_rng(seed).normal(size=(D,) * n)
