"""Tests for the closed-form bound evaluators."""

import numpy as np
import pytest

import tnlab
from tnlab.bounds import (GF_RESCALE, NORM_DECAY_RATE, fit_global_scale,
                          global_variance_bound, global_variance_ratio,
                          global_variance_reports, norm_excess_bound,
                          norm_excess_report, offsite_profile_reports,
                          offsite_reference_profile, onsite_floor_prefactors)
from tnlab.lattice import LatticeSpec
from tnlab.losses import GLOBAL_PURE, LossSpec, plus_target
from tnlab.spinmodel import exact_partition_function, norm_weights
from tnlab.variance import variance_scan


def test_decay_parameters_at_2_2():
    tab = norm_weights(2, 2)
    q_a = tab(1, 1, 1)
    p_u = tab(0, 0, 1) ** 2
    assert q_a <= 0.5
    assert p_u <= 0.25


def test_norm_excess_bound_dominates_exact_values():
    tab = norm_weights(2, 2)
    for L in (2, 3, 4):
        z = exact_partition_function(L, L, tab).z
        report = norm_excess_report(L, 2, 2, z)
        assert report.satisfied
        assert report.compared == z - 1.0
        assert report.slack > 1.0


def test_norm_excess_bound_asymptotic_rate():
    # once the single-string branch dominates, successive bounds shrink at
    # least as fast as the headline rate times the polynomial correction
    for L in (400, 500):
        ratio = norm_excess_bound(L + 1, 2, 2) / norm_excess_bound(L, 2, 2)
        assert ratio <= NORM_DECAY_RATE * (1 + 1.0 / L) ** 3
        assert ratio <= 1.0
    assert GF_RESCALE < NORM_DECAY_RATE


def test_global_variance_ratio_below_one_on_grid():
    for D in (2, 3, 4):
        for d in (2, 3, 4):
            assert global_variance_ratio(D, d) < 1.0
    assert abs(global_variance_ratio(2, 2) - 31.0 / 63.0) < 1e-15


def test_global_variance_bound_decreases_with_volume():
    vals = [global_variance_bound(v, 2, 2) for v in (4, 6, 8, 9, 12, 16)]
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_global_variance_reports_fitted_at_smallest_size():
    # empirical decay must stay below the fitted 2^V g_max^(V-1) envelope
    variances = {}
    for l1, l2 in [(2, 2), (3, 3)]:
        spec = LatticeSpec(l1, l2, 2, 2)
        loss = LossSpec(kind=GLOBAL_PURE, target=plus_target(spec))
        report = variance_scan(spec, loss, 800, seed=606)
        variances[spec.n_sites] = float(np.mean(report.variance))
    reports = global_variance_reports(sorted(variances.items()), 2, 2)
    assert all(r.satisfied for r in reports)
    # the empirical (3,3)/(2,2) ratio sits far below ratio^5 with 10x slack
    ratio = variances[9] / variances[4]
    assert ratio <= global_variance_ratio(2, 2) ** 5 * 10.0


def test_fit_global_scale_roundtrip():
    scale = fit_global_scale(4, 1e-2, 2, 2)
    assert abs(global_variance_bound(4, 2, 2, scale=scale) - 1e-2) < 1e-18


def test_offsite_reference_profile():
    prof = offsite_reference_profile([0, 1, 2, 3], 2)
    assert prof[0] == 0.25
    assert all(b < a for a, b in zip(prof, prof[1:]))


def test_offsite_profile_reports_accept_fast_decay():
    profile = {0: 1.0, 1: 0.1, 2: 0.01, 3: 0.001}
    reports = offsite_profile_reports(profile, 2)
    assert all(r.satisfied for r in reports)


def test_offsite_profile_reports_flag_slow_decay():
    profile = {1: 0.1, 2: 0.099, 3: 0.098}
    reports = offsite_profile_reports(profile, 2)
    assert not all(r.satisfied for r in reports)


def test_onsite_floor_prefactors():
    generic, scaled = onsite_floor_prefactors(2, 2, tr_o2=2.0)
    assert abs(generic - 2.0 / 63.0) < 1e-15
    assert abs(scaled - 8.0 / 63.0) < 1e-15
    with pytest.raises(ValueError):
        onsite_floor_prefactors(2, 2, tr_o2=0.0)


def test_onsite_floor_prefactor_asymptotics():
    # vanishes like 1/(D^2 d^2) at large bond dimension
    vals = [onsite_floor_prefactors(D, 2, 2.0)[0] for D in (8, 16, 32)]
    for D, v in zip((8, 16, 32), vals):
        assert 0.2 < v * (D**2 * 4) < 1.2
    assert vals[0] / vals[1] == pytest.approx(4.0, rel=0.05)
