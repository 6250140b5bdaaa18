"""Unitarily embedded random tensor-network states on the torus.

Each site (x, y) carries a D^2 d x D^2 d unitary U = u_minus exp(-i theta G)
u_plus acting on (up bond, left bond, physical-in); the site tensor
A[a, b, g, l, j] = <g l j| U |a b 0> feeds legs g/l to the down/right
neighbors. theta is the site's single variational parameter and G its
Hermitian generator.
"""

import json
from dataclasses import dataclass

import numpy as np

from . import network
from .lattice import LatticeSpec
from .tensors import haar_unitary, random_hermitian

EMBED_TOL = 1e-10
STATE_FORMAT = "tnlab-state-v1"


@dataclass(frozen=True)
class SiteParams:
    """One site's unitary factorization U = u_minus exp(-i theta G) u_plus."""

    u_minus: np.ndarray
    u_plus: np.ndarray
    generator: np.ndarray
    theta: float

    def embedded_unitary(self):
        return self.u_minus @ _expm_herm(-self.theta, self.generator) @ self.u_plus

    def derivative_unitary(self):
        """d/d theta of the embedded unitary: -iG inserted next to the exponential."""
        mid = (-1j * self.generator) @ _expm_herm(-self.theta, self.generator)
        return self.u_minus @ mid @ self.u_plus

    def with_theta(self, theta):
        return SiteParams(self.u_minus, self.u_plus, self.generator, float(theta))


def _expm_herm(scale, h):
    """exp(1j * scale * h) for Hermitian h via eigendecomposition."""
    w, v = np.linalg.eigh(h)
    return (v * np.exp(1j * scale * w)) @ v.conj().T


@dataclass(frozen=True)
class TNState:
    spec: LatticeSpec
    sites: tuple  # tuple of tuples of SiteParams, indexed [x][y]

    def site(self, x, y):
        return self.sites[x][y]


def build_state(spec, rng):
    """Independent Haar u_minus/u_plus, Gaussian Hermitian generator, uniform theta per site."""
    spec.check_cap()
    n = spec.unitary_dim
    rows = []
    for _ in range(spec.l1):
        row = []
        for _ in range(spec.l2):
            row.append(SiteParams(
                u_minus=haar_unitary(n, rng),
                u_plus=haar_unitary(n, rng),
                generator=random_hermitian(n, rng),
                theta=float(rng.uniform(0.0, 2.0 * np.pi)),
            ))
        rows.append(tuple(row))
    return TNState(spec, tuple(rows))


def _tensor_from_unitary(u, D, d):
    # A[a, b, g, l, j] = U[(g, l, j), (a, b, 0)]
    u6 = np.asarray(u).reshape(D, D, d, D, D, d)
    return np.ascontiguousarray(u6[:, :, :, :, :, 0].transpose(3, 4, 0, 1, 2))


def local_tensor(site, D, d):
    """Site tensor A[a, b, g, l, j]: the embedded unitary applied to |0> on the physical input."""
    return _tensor_from_unitary(site.embedded_unitary(), D, d)


def local_derivative_tensor(site, D, d):
    """d/d theta of the site tensor."""
    return _tensor_from_unitary(site.derivative_unitary(), D, d)


def _ket_grid(state):
    spec = state.spec
    return [[local_tensor(state.site(x, y), spec.D, spec.d) for y in range(spec.l2)]
            for x in range(spec.l1)]


def _oriented_columns(grid, l1, l2, make_site):
    cols, transposed = network.oriented_grid(lambda x, y: grid[x][y], l1, l2)
    out = []
    for col in cols:
        ts = [make_site(t) for t in col]
        if transposed:
            ts = [network.swap_tensor_axes(t) for t in ts]
        out.append(ts)
    return out, transposed


def to_statevector(state):
    """Dense amplitude tensor, one leg of extent d per site in row-major (x, y) order."""
    spec = state.spec
    spec.check_cap()
    grid = _ket_grid(state)
    col_sites, transposed = _oriented_columns(grid, spec.l1, spec.l2, lambda t: t)
    columns = [network.column_transfer_phys(ts) for ts in col_sites]
    psi = network.ring_statevector(columns)
    # ring order is (column, row-within-column); map back to row-major sites
    n_cols = len(col_sites)
    n_rows = len(col_sites[0])
    psi = psi.reshape((spec.d,) * (n_cols * n_rows))
    axis = np.arange(n_cols * n_rows).reshape(n_cols, n_rows)
    if transposed:
        perm = [axis[x, y] for x in range(n_cols) for y in range(n_rows)]
    else:
        perm = [axis[y, x] for x in range(n_rows) for y in range(n_cols)]
    return np.ascontiguousarray(psi.transpose(perm))


def norm_squared(state):
    """<psi|psi> by bra-ket network contraction (no statevector materialized)."""
    spec = state.spec
    grid = _ket_grid(state)
    col_sites, _ = _oriented_columns(grid, spec.l1, spec.l2, network.site_double_tensor)
    val = network.ring_value([network.column_transfer(ts) for ts in col_sites])
    assert abs(val.imag) <= 1e-9 * max(1.0, abs(val.real))
    return float(val.real)


def _check_product_state(spec, product_state):
    phi = np.asarray(product_state, dtype=complex)
    if phi.shape != (spec.l1, spec.l2, spec.d):
        raise ValueError(f"product state must have shape {(spec.l1, spec.l2, spec.d)}")
    norms = np.linalg.norm(phi, axis=2)
    if np.abs(norms - 1.0).max() > 1e-10:
        raise ValueError("product-state site vectors must be normalized")
    return phi


def overlap(state, product_state):
    """<phi|psi> for a normalized per-site product state phi, shape (l1, l2, d)."""
    spec = state.spec
    phi = _check_product_state(spec, product_state)
    grid = _ket_grid(state)
    cols, transposed = network.oriented_grid(
        lambda x, y: network.site_single_tensor(grid[x][y], phi[x, y]), spec.l1, spec.l2)
    columns = []
    for col in cols:
        ts = [network.swap_tensor_axes(t) if transposed else t for t in col]
        columns.append(network.column_transfer(ts))
    return complex(network.ring_value(columns))


def local_expectation(state, site_index, observable):
    """Unnormalized <psi| O at site |psi> for a Hermitian d x d observable."""
    spec = state.spec
    obs = np.asarray(observable, dtype=complex)
    if obs.shape != (spec.d, spec.d):
        raise ValueError(f"observable must be {spec.d} x {spec.d}")
    if np.abs(obs - obs.conj().T).max() > 1e-12:
        raise ValueError("observable must be Hermitian")
    xi, yi = site_index
    grid = _ket_grid(state)

    def make(x, y):
        return network.site_double_tensor(grid[x][y], op=obs if (x, y) == (xi, yi) else None)

    cols, transposed = network.oriented_grid(make, spec.l1, spec.l2)
    columns = []
    for col in cols:
        ts = [network.swap_tensor_axes(t) if transposed else t for t in col]
        columns.append(network.column_transfer(ts))
    val = network.ring_value(columns)
    assert abs(val.imag) <= 1e-9 * max(1.0, abs(val.real))
    return float(val.real)


def save_state(state, path, seed=None):
    """Versioned hybrid format: one JSON header line, then raw little-endian arrays.

    Per site, in row-major order: u_minus, u_plus, generator as complex128 and
    theta as float64.
    """
    spec = state.spec
    header = {"format": STATE_FORMAT, "l1": spec.l1, "l2": spec.l2,
              "D": spec.D, "d": spec.d, "cap": spec.cap, "seed": seed}
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=True).encode() + b"\n")
        for x in range(spec.l1):
            for y in range(spec.l2):
                s = state.site(x, y)
                for arr in (s.u_minus, s.u_plus, s.generator):
                    fh.write(np.ascontiguousarray(arr, dtype="<c16").tobytes())
                fh.write(np.float64(s.theta).astype("<f8").tobytes())


def load_state(path):
    with open(path, "rb") as fh:
        header = json.loads(fh.readline().decode())
        if header.get("format") != STATE_FORMAT:
            raise ValueError(f"unsupported state format {header.get('format')!r}")
        spec = LatticeSpec(header["l1"], header["l2"], header["D"], header["d"],
                           cap=header.get("cap", LatticeSpec.cap))
        n = spec.unitary_dim
        mat_bytes = n * n * 16
        rows = []
        for _ in range(spec.l1):
            row = []
            for _ in range(spec.l2):
                mats = []
                for _ in range(3):
                    mats.append(np.frombuffer(fh.read(mat_bytes), dtype="<c16").reshape(n, n))
                theta = float(np.frombuffer(fh.read(8), dtype="<f8")[0])
                row.append(SiteParams(mats[0], mats[1], mats[2], theta))
            rows.append(tuple(row))
    return TNState(spec, tuple(rows))
