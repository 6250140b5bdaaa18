"""Exact contraction of site-tensor networks on the torus.

Every network handled here is a ring of column transfer matrices: the sites of
one lattice column are contracted over their vertical bond ring, giving a
matrix from the column's combined left legs to its combined right legs; the
torus value is the trace of the matrix product around the horizontal ring.
Works for single-layer networks (bond extent D, e.g. overlaps with product
states) and double-layer bra-ket networks (bond extent D^2, e.g. norms and
local expectations), with or without open physical legs.

Contraction is always performed along the shorter lattice side (the grid is
transposed first if needed), which keeps the largest intermediate at
chi^(2*min(l1,l2)) for bond extent chi.
"""

import numpy as np


def site_double_tensor(ket, bra=None, op=None):
    """Double-layer site tensor with combined (ket, bra) legs of extent D^2.

    ket/bra are 5-leg site tensors (a, b, g, l, j); bra defaults to ket. With
    `op` (a d x d matrix) the physical legs are closed through <j'|op|j>,
    otherwise through the identity.
    """
    if bra is None:
        bra = ket
    if op is None:
        e = np.einsum("abglj,ABGLj->aAbBgGlL", ket, bra.conj())
    else:
        e = np.einsum("abglj,ABGLk,kj->aAbBgGlL", ket, bra.conj(), op)
    D = ket.shape[0]
    return e.reshape(D * D, D * D, D * D, D * D)


def site_single_tensor(ket, site_vector):
    """Single-layer site tensor <v|A>: physical leg closed with conj(site_vector)."""
    return np.einsum("abglj,j->abgl", ket, site_vector.conj())


def column_transfer(tensors):
    """Contract one column's vertical ring; returns a matrix [left legs, right legs].

    `tensors` lists the column's 4-leg site tensors (a, b, g, l) in vertical
    order (at least two); leg g of each site is contracted with leg a of the
    next, cyclically.
    """
    cur = tensors[0]
    for t in tensors[1:-1]:
        na, nB, _, nL = cur.shape
        _, nb, nh, nl = t.shape
        # (a, B, g, L) x (g, b, h, l) -> (a, B, L, b, h, l) -> (a, Bb, h, Ll)
        cur = np.tensordot(cur, t, axes=[(2,), (0,)])
        cur = cur.transpose(0, 1, 3, 4, 2, 5).reshape(na, nB * nb, nh, nL * nl)
    t = tensors[-1]
    _, nB, _, nL = cur.shape
    _, nb, _, nl = t.shape
    out = np.tensordot(cur, t, axes=[(0, 2), (2, 0)])  # (B, L, b, l)
    return out.transpose(0, 2, 1, 3).reshape(nB * nb, nL * nl)


def column_transfer_phys(tensors):
    """Column transfer keeping physical legs open; returns [left, phys, right]."""
    t0 = tensors[0]
    cur = t0.transpose(0, 1, 4, 2, 3)  # (a, B, J, g, L)
    for t in tensors[1:-1]:
        na, nB, nJ, _, nL = cur.shape
        _, nb, nh, nl, nj = t.shape
        cur = np.einsum("aBJgL,gbhlj->aBbJjhLl", cur, t).reshape(
            na, nB * nb, nJ * nj, nh, nL * nl)
    t = tensors[-1]
    _, nB, nJ, _, nL = cur.shape
    _, nb, _, nl, nj = t.shape
    out = np.einsum("aBJgL,gbalj->BbJjLl", cur, t)
    return out.reshape(nB * nb, nJ * nj, nL * nl)


def ring_value(columns):
    """Trace of the product of column transfer matrices around the ring."""
    acc = columns[0]
    for m in columns[1:]:
        acc = acc @ m
    return complex(np.trace(acc))


def ring_environments(columns):
    """Per-column ring environments.

    Returns (value, envs) where envs[y] is the matrix E such that replacing
    column y by T' gives ring value sum_ab T'[a, b] E[b, a]; i.e. E is the
    product of the other columns in ring order starting after y.
    """
    k = len(columns)
    n = columns[0].shape[0]
    eye = np.eye(n, dtype=columns[0].dtype)
    prefix = [eye]
    for m in columns:
        prefix.append(prefix[-1] @ m)
    suffix = [eye] * (k + 1)
    for y in range(k - 1, -1, -1):
        suffix[y] = columns[y] @ suffix[y + 1]
    envs = [suffix[y + 1] @ prefix[y] for y in range(k)]
    return complex(np.trace(prefix[k])), envs


def replace_value(replacement, env):
    """Ring value with one column replaced, given that column's environment."""
    return complex(np.sum(replacement * env.T))


def ring_statevector(columns):
    """Contract a ring of physical-leg columns [left, phys, right]; returns [phys...].

    The output physical index is the concatenation of the per-column physical
    groups in ring order.
    """
    k = len(columns)
    half = (k + 1) // 2

    def chain(cols):
        acc = cols[0]
        for c in cols[1:]:
            na, nJ, _ = acc.shape
            _, nj, nr = c.shape
            acc = np.einsum("aJb,bjc->aJjc", acc, c).reshape(na, nJ * nj, nr)
        return acc

    left = chain(columns[:half])
    right = chain(columns[half:])
    out = np.tensordot(left, right, axes=[(0, 2), (2, 0)])
    return out.reshape(-1)


def oriented_grid(grid_fn, l1, l2):
    """Site grid as nested lists, transposed so columns run along the shorter side.

    grid_fn(x, y) yields the site object at original coordinates. Returns
    (grid, transposed): grid[col][row] lists column contents; when transposed,
    grid column index is the original x and the site legs must be swapped by
    the caller.
    """
    if l1 <= l2:
        return [[grid_fn(x, y) for x in range(l1)] for y in range(l2)], False
    return [[grid_fn(x, y) for y in range(l2)] for x in range(l1)], True


def swap_tensor_axes(t):
    """Swap the vertical/horizontal roles of a site tensor's legs."""
    if t.ndim == 4:
        return t.transpose(1, 0, 3, 2)
    return t.transpose(1, 0, 3, 2, 4)
