"""Closed-form variance and concentration bounds, compared against exact and
empirical quantities.

All bounds are checked as one-sided inequalities with explicit slack; the
unspecified constants of the underlying statements are either dropped (pure
upper-bound chains), or fitted once at the smallest size and held fixed.
"""

from dataclasses import dataclass

from .polyomino import directed_gf
from .spinmodel import global_loss_weights, norm_weights

NORM_DECAY_RATE = 0.97      # headline rate of the norm-concentration statement
OFFSITE_DECAY_RATE = 0.93   # off-site local-loss decay rate
GF_RESCALE = 25.0 / 26.0    # area rescale keeping the generating function finite


@dataclass(frozen=True)
class BoundReport:
    name: str
    params: dict
    bound: float
    compared: float
    satisfied: bool
    slack: float  # bound / compared for upper bounds, compared / bound for floors

    def to_json_dict(self):
        return {"name": self.name, "params": self.params, "bound": self.bound,
                "compared": self.compared, "satisfied": bool(self.satisfied),
                "slack": self.slack}


def _upper_report(name, params, bound, compared):
    return BoundReport(name, params, float(bound), float(compared),
                       compared <= bound, float(bound / max(compared, 1e-300)))


def norm_excess_bound(L, D, d, rescale=GF_RESCALE):
    """Upper bound on Z - 1 for the L x L norm partition function.

    Chains the per-configuration area/perimeter decay through the plane
    generating function: with q_a = f(up,up,up), p_u = f(down,down,up)^2 and
    S = rescale^L * G(q_a/rescale, p_u) >= sum_{m >= L} D_{m,n} q_a^m p_u^n,
    the toric-to-plane counting gives
    Z - 1 <= L/(1-p_u) * max_{k <= L} (L^2 S / p_u)^k.
    """
    tab = norm_weights(D, d)
    q_a = tab(1, 1, 1)
    p_u = tab(0, 0, 1) ** 2
    s = rescale**L * directed_gf(q_a / rescale, p_u)
    x = L * L / p_u * s
    return (L / (1.0 - p_u)) * max(x, x**L)


def norm_excess_report(L, D, d, z_exact):
    return _upper_report("norm_excess", {"L": L, "D": D, "d": d},
                         norm_excess_bound(L, D, d), z_exact - 1.0)


def global_variance_ratio(D, d):
    """Per-site decay ratio 2 (D^4 - 1/d) / ((D^2 d)^2 - 1) of the global-loss bound."""
    return 2.0 * (D**4 - 1.0 / d) / ((D**2 * d) ** 2 - 1.0)


def global_variance_bound(n_sites, D, d, scale=1.0):
    """scale * 2^V * g_max^(V-1): the global-loss variance bound at V sites."""
    g_max = global_loss_weights(D, d)(0, 0, 0)
    return scale * 2.0**n_sites * g_max ** (n_sites - 1)


def fit_global_scale(n_sites, empirical_variance, D, d):
    """Constant making the bound tight at one (smallest) size; held fixed elsewhere."""
    return empirical_variance / global_variance_bound(n_sites, D, d, scale=1.0)


def global_variance_reports(size_variances, D, d):
    """Bound-vs-empirical reports across sizes, scale fitted at the smallest size.

    size_variances: list of (n_sites, empirical mean variance), any order.
    """
    pairs = sorted(size_variances)
    scale = fit_global_scale(pairs[0][0], pairs[0][1], D, d)
    return [_upper_report("global_variance",
                          {"n_sites": v, "D": D, "d": d, "scale": scale},
                          global_variance_bound(v, D, d, scale=scale), var)
            for v, var in pairs]


def offsite_reference_profile(deltas, D):
    """Reference decay shape 0.93^delta / D^2 for the off-site local-loss variance."""
    return [OFFSITE_DECAY_RATE**delta / D**2 for delta in deltas]


def offsite_profile_reports(profile, D):
    """Check an empirical distance profile against the reference decay shape.

    profile: {delta: mean variance}. The scale is fitted at the smallest
    positive distance; each larger distance must lie below the fitted
    reference curve (the reference rate is an upper bound on the decay, so
    faster empirical decay satisfies it).
    """
    deltas = sorted(k for k in profile if k > 0)
    ref = dict(zip(deltas, offsite_reference_profile(deltas, D)))
    scale = profile[deltas[0]] / ref[deltas[0]]
    return [_upper_report("offsite_decay", {"delta": delta, "D": D, "scale": scale},
                          scale * ref[delta], profile[delta])
            for delta in deltas]


def onsite_floor_prefactors(D, d, tr_o2, tr_o=0.0):
    """The two explicit on-site variance floor prefactors.

    Returns (D^2 (1 - 1/d) / ((D^2 d)^2 - 1), D^2 (tr O^2 - (tr O)^2/d) / ((D^2 d)^2 - 1)).
    """
    if tr_o2 <= 0:
        raise ValueError("tr(O^2) must be positive")
    den = (D**2 * d) ** 2 - 1.0
    return (D**2 * (1.0 - 1.0 / d) / den,
            D**2 * (tr_o2 - tr_o**2 / d) / den)


def onsite_floor_reports(records, tr_o2):
    """Size-independence check: every on-site variance within a factor-3 band.

    records: output of variance.onsite_floor_check. The compared quantity for
    each size is the on-site variance; the bound is 3x the minimum across
    sizes (a floor statement, so slack = compared / bound).
    """
    values = [r["onsite_variance"] for r in records]
    lo = min(values)
    out = []
    for r in records:
        v = r["onsite_variance"]
        ok = v <= 3.0 * lo and v >= lo
        out.append(BoundReport(
            "onsite_floor_band",
            {"l1": r["l1"], "l2": r["l2"], "D": r["D"], "d": r["d"], "tr_o2": tr_o2},
            3.0 * lo, v, ok, v / (3.0 * lo)))
    return out
