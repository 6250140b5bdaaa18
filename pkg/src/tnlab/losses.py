"""Loss functions on tensor-network states and their exact parameter gradients.

Four loss kinds: fidelity against a product state (pure or normalized by
Z = <psi|psi>) and a single-site observable expectation (unnormalized or
normalized). Values are evaluated densely through the statevector; gradients
are evaluated by network contraction with the derivative tensor inserted at
one site, which stays cheap on lattices where the statevector would be
rebuilt once per parameter.
"""

from dataclasses import dataclass

import numpy as np

from . import network
from .errors import DegenerateStateError
from .states import local_derivative_tensor, local_tensor, to_statevector

GLOBAL_PURE = "global_pure"
GLOBAL_NORMALIZED = "global_normalized"
LOCAL_UNNORMALIZED = "local_unnormalized"
LOCAL_NORMALIZED = "local_normalized"

GLOBAL_KINDS = (GLOBAL_PURE, GLOBAL_NORMALIZED)
LOCAL_KINDS = (LOCAL_UNNORMALIZED, LOCAL_NORMALIZED)
NORMALIZED_KINDS = (GLOBAL_NORMALIZED, LOCAL_NORMALIZED)

Z_FLOOR = 1e-14


@dataclass(frozen=True, eq=False)
class LossSpec:
    """Loss descriptor: a global target state or a local observable plus site.

    target has shape (l1, l2, d) with one normalized vector per site. In
    theory mode the local observable must additionally be traceless, matching
    the setting of the variance statements being checked.
    """

    kind: str
    target: np.ndarray = None
    observable: np.ndarray = None
    site: tuple = None
    theory_mode: bool = False

    def __post_init__(self):
        if self.kind not in GLOBAL_KINDS + LOCAL_KINDS:
            raise ValueError(f"unknown loss kind {self.kind!r}")
        if self.kind in GLOBAL_KINDS:
            if self.target is None:
                raise ValueError("global losses need a target product state")
        else:
            if self.observable is None or self.site is None:
                raise ValueError("local losses need an observable and a site")
            obs = np.asarray(self.observable)
            if np.abs(obs - obs.conj().T).max() > 1e-12:
                raise ValueError("observable must be Hermitian")
            if self.theory_mode and abs(np.trace(obs)) > 1e-12:
                raise ValueError("theory mode requires a traceless observable")

    @property
    def normalized(self):
        return self.kind in NORMALIZED_KINDS

    def describe(self):
        out = {"kind": self.kind}
        if self.site is not None:
            out["site"] = list(self.site)
        return out


def plus_target(spec):
    """Product target with the uniform-superposition vector on every site."""
    v = np.full(spec.d, 1.0 / np.sqrt(spec.d), dtype=complex)
    return np.broadcast_to(v, (spec.l1, spec.l2, spec.d)).copy()


def plus_projector(d):
    v = np.full(d, 1.0 / np.sqrt(d), dtype=complex)
    return np.outer(v, v.conj())


def traceless_observable(d):
    """diag(1, -1, 0, ...): traceless Hermitian with tr(O^2) = 2."""
    o = np.zeros((d, d), dtype=complex)
    o[0, 0], o[1, 1] = 1.0, -1.0
    return o


def _dense_overlap(psi, target):
    l1, l2, d = target.shape
    w = psi.reshape(-1)
    for x in range(l1):
        for y in range(l2):
            w = target[x, y].conj() @ w.reshape(d, -1)
    return complex(w[0])


def loss_value(state, loss):
    """Exact dense loss evaluation (statevector within the lattice cap)."""
    spec = state.spec
    psi = to_statevector(state).reshape(-1)
    if loss.kind in GLOBAL_KINDS:
        target = _check_target(spec, loss.target)
        w = _dense_overlap(psi, target)
        val = abs(w) ** 2
    else:
        val = _dense_local_expectation(psi, spec, loss.site, np.asarray(loss.observable))
    if loss.normalized:
        z = float(np.vdot(psi, psi).real)
        if z < Z_FLOOR:
            raise DegenerateStateError(f"norm^2 = {z} below {Z_FLOOR}")
        val = val / z
    if loss.kind in GLOBAL_KINDS:
        return 1.0 - val
    return float(val)


def _check_target(spec, target):
    t = np.asarray(target, dtype=complex)
    if t.shape != (spec.l1, spec.l2, spec.d):
        raise ValueError(f"target must have shape {(spec.l1, spec.l2, spec.d)}")
    if np.abs(np.linalg.norm(t, axis=2) - 1.0).max() > 1e-10:
        raise ValueError("target site vectors must be normalized")
    return t


def _dense_local_expectation(psi, spec, site, obs):
    k = site[0] * spec.l2 + site[1]
    d = spec.d
    psi_nd = psi.reshape((d,) * spec.n_sites)
    front = np.moveaxis(psi_nd, k, 0).reshape(d, -1)
    return float(np.vdot(front, obs @ front).real)


class _OrientedState:
    """Per-site ket/derivative tensors in column-major layout along the short side."""

    def __init__(self, state):
        spec = state.spec
        D, d = spec.D, spec.d
        ket = [[local_tensor(state.site(x, y), D, d) for y in range(spec.l2)]
               for x in range(spec.l1)]
        dket = [[local_derivative_tensor(state.site(x, y), D, d) for y in range(spec.l2)]
                for x in range(spec.l1)]
        self.transposed = spec.l1 > spec.l2
        if self.transposed:
            self.n_cols, self.n_rows = spec.l1, spec.l2
        else:
            self.n_cols, self.n_rows = spec.l2, spec.l1
        self.ket = [[self._orient(ket, c, r) for r in range(self.n_rows)]
                    for c in range(self.n_cols)]
        self.dket = [[self._orient(dket, c, r) for r in range(self.n_rows)]
                     for c in range(self.n_cols)]
        self.spec = spec

    def coords(self, c, r):
        return (c, r) if self.transposed else (r, c)

    def _orient(self, grid, c, r):
        x, y = self.coords(c, r)
        t = grid[x][y]
        return network.swap_tensor_axes(t) if self.transposed else t


def _column_with(base_tensors, c, r, tensor):
    ts = list(base_tensors[c])
    ts[r] = tensor
    return network.column_transfer(ts)


def gradient_map(state, loss):
    """d(loss)/d(theta) for every site's parameter, as an (l1, l2) array."""
    spec = state.spec
    orient = _OrientedState(state)
    n_cols, n_rows = orient.n_cols, orient.n_rows
    grads = np.zeros((spec.l1, spec.l2))

    need_z = loss.normalized
    z = dz = None
    e_base = None
    if need_z or loss.kind in LOCAL_KINDS:
        e_base = [[network.site_double_tensor(orient.ket[c][r]) for r in range(n_rows)]
                  for c in range(n_cols)]
    if need_z:
        cols_z = [network.column_transfer(e_base[c]) for c in range(n_cols)]
        zval, envs_z = network.ring_environments(cols_z)
        z = zval.real
        if z < Z_FLOOR:
            raise DegenerateStateError(f"norm^2 = {z} below {Z_FLOOR}")
        dz = np.zeros((spec.l1, spec.l2))
        for c in range(n_cols):
            for r in range(n_rows):
                e_der = network.site_double_tensor(orient.dket[c][r], bra=orient.ket[c][r])
                col = _column_with(e_base, c, r, e_der)
                dz[orient.coords(c, r)] = 2.0 * network.replace_value(col, envs_z[c]).real

    if loss.kind in GLOBAL_KINDS:
        target = _check_target(spec, loss.target)
        m = [[network.site_single_tensor(orient.ket[c][r], target[orient.coords(c, r)])
              for r in range(n_rows)] for c in range(n_cols)]
        cols_w = [network.column_transfer(m[c]) for c in range(n_cols)]
        w, envs_w = network.ring_environments(cols_w)
        for c in range(n_cols):
            for r in range(n_rows):
                m_der = network.site_single_tensor(
                    orient.dket[c][r], target[orient.coords(c, r)])
                dw = network.replace_value(_column_with(m, c, r, m_der), envs_w[c])
                d_fid = 2.0 * (np.conj(w) * dw).real
                x, y = orient.coords(c, r)
                if loss.kind == GLOBAL_PURE:
                    grads[x, y] = -d_fid
                else:
                    grads[x, y] = -(d_fid * z - abs(w) ** 2 * dz[x, y]) / z**2
        return grads

    obs = np.asarray(loss.observable, dtype=complex)
    xi, yi = loss.site
    c_obs, r_obs = ((xi, yi) if orient.transposed else (yi, xi))
    e_obs = network.site_double_tensor(orient.ket[c_obs][r_obs], op=obs)
    cols_n = [network.column_transfer(e_base[c]) if c != c_obs
              else _column_with(e_base, c_obs, r_obs, e_obs)
              for c in range(n_cols)]
    nval, envs_n = network.ring_environments(cols_n)
    nval = nval.real
    for c in range(n_cols):
        for r in range(n_rows):
            if (c, r) == (c_obs, r_obs):
                e_der = network.site_double_tensor(
                    orient.dket[c][r], bra=orient.ket[c][r], op=obs)
            else:
                e_der = network.site_double_tensor(orient.dket[c][r], bra=orient.ket[c][r])
            ts = list(e_base[c])
            ts[r] = e_der
            if c == c_obs and r != r_obs:
                ts[r_obs] = e_obs
            col = network.column_transfer(ts)
            dn = 2.0 * network.replace_value(col, envs_n[c]).real
            x, y = orient.coords(c, r)
            if loss.kind == LOCAL_UNNORMALIZED:
                grads[x, y] = dn
            else:
                grads[x, y] = (dn * z - nval * dz[x, y]) / z**2
    return grads


def analytic_gradient(state, site, loss):
    """d(loss)/d(theta) at one site (see gradient_map for the full grid)."""
    return float(gradient_map(state, loss)[site[0], site[1]])
