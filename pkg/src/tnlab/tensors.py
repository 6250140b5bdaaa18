"""Dense tensor arithmetic, Haar sampling, and the analytic two-fold Haar average.

Tensors are plain complex numpy arrays (row-major). A "label list" assigns one
hashable label per tensor leg; legs sharing a label are contracted.
"""

from dataclasses import dataclass

import numpy as np

UNITARITY_TOL = 1e-12
HERMITICITY_TOL = 1e-14


def haar_unitary(dim, rng):
    """Draw a dim x dim unitary from the Haar measure.

    Uses the Ginibre + QR construction with the diagonal phase fix that makes
    the distribution exactly Haar (not just approximately).
    """
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r)
    return q * (diag / np.abs(diag))


def haar_unitaries(dim, count, rng):
    """Batch of `count` independent Haar unitaries, shape (count, dim, dim)."""
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    z = (rng.standard_normal((count, dim, dim))
         + 1j * rng.standard_normal((count, dim, dim))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r, axis1=-2, axis2=-1)
    return q * (diag / np.abs(diag))[:, None, :]


def random_hermitian(dim, rng):
    """Gaussian-ensemble Hermitian matrix H = (A + A^dag)/2 with A complex standard normal."""
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return (a + a.conj().T) / 2.0


def is_unitary(u, tol=UNITARITY_TOL):
    dim = u.shape[0]
    return np.abs(u.conj().T @ u - np.eye(dim)).max() <= tol


def contract(tensors, index_labels, output_labels=()):
    """Contract a list of tensors over repeated leg labels.

    Every label must appear either twice (with equal extents; the pair is
    summed over) or once (a free leg, which must then be listed in
    `output_labels`). A label may repeat within a single tensor (a trace).
    Pairwise order is chosen by numpy's greedy path heuristic.
    """
    if len(tensors) != len(index_labels):
        raise ValueError("need one label list per tensor")
    extents = {}
    counts = {}
    for t, labels in zip(tensors, index_labels):
        t = np.asarray(t)
        if t.ndim != len(labels):
            raise ValueError(f"tensor of rank {t.ndim} got {len(labels)} labels")
        for ax, lab in zip(t.shape, labels):
            if lab in extents and extents[lab] != ax:
                raise ValueError(f"label {lab!r} has extents {extents[lab]} and {ax}")
            extents[lab] = ax
            counts[lab] = counts.get(lab, 0) + 1
    for lab, c in counts.items():
        if c > 2:
            raise ValueError(f"label {lab!r} appears {c} times (max 2)")
        if c == 1 and lab not in output_labels:
            raise ValueError(f"free label {lab!r} missing from output_labels")
    for lab in output_labels:
        if lab not in extents:
            raise ValueError(f"output label {lab!r} absent from inputs")
        if counts[lab] != 1:
            raise ValueError(f"output label {lab!r} is contracted")
    ids = {lab: i for i, lab in enumerate(extents)}
    args = []
    for t, labels in zip(tensors, index_labels):
        args.append(np.asarray(t, dtype=complex))
        args.append([ids[lab] for lab in labels])
    args.append([ids[lab] for lab in output_labels])
    return np.einsum(*args, optimize="greedy")


@dataclass(frozen=True)
class SecondMomentWeights:
    """Diagrammatic pairing weights of the two-fold Haar average at dimension `dim`.

    w_same / w_cross are the same-pairing and cross-pairing diagram weights;
    dividing both by (dim + 1) gives the coefficients of the exact channel.
    """

    dim: int

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError("dim must be >= 2")

    @property
    def w_same(self):
        return 1.0 / (self.dim - 1)

    @property
    def w_cross(self):
        return -1.0 / ((self.dim - 1) * self.dim)


def second_moment_channel(weights, tensor):
    """Average (U x U) X (U x U)^dag over Haar U, applied to a four-leg tensor.

    Leg convention: X[i, j, k, l] = <i|x1|j> <k|x2|l> for X = x1 (x) x2, i.e.
    legs alternate (out, in, out, in). The result is a_I * I + a_S * SWAP with
    coefficients fixed by Tr(X) and Tr(X SWAP).
    """
    n = weights.dim
    x = np.asarray(tensor, dtype=complex)
    if x.shape != (n, n, n, n):
        raise ValueError(f"expected shape {(n, n, n, n)}, got {x.shape}")
    t_id = np.einsum("iikk->", x)
    t_sw = np.einsum("ikki->", x)
    c_same = weights.w_same / (n + 1)
    c_cross = weights.w_cross / (n + 1)
    a_id = t_id * c_same + t_sw * c_cross
    a_sw = t_sw * c_same + t_id * c_cross
    eye = np.eye(n)
    out = np.einsum("ij,kl->ijkl", a_id * eye, eye)
    out += np.einsum("il,kj->ijkl", a_sw * eye, eye)
    return out
