"""Tests for variance scans, jackknife errors, and distance profiles."""

import numpy as np
import pytest

import tnlab
from tnlab.lattice import LatticeSpec
from tnlab.losses import (GLOBAL_NORMALIZED, LOCAL_NORMALIZED, LOCAL_UNNORMALIZED,
                          LossSpec, plus_projector, plus_target, traceless_observable)
from tnlab.variance import (distance_profile, jackknife_variance_se,
                            onsite_floor_check, variance_scan)


def local_loss(site=(0, 0), normalized=True):
    kind = LOCAL_NORMALIZED if normalized else LOCAL_UNNORMALIZED
    return LossSpec(kind=kind, observable=plus_projector(2), site=site)


def test_jackknife_matches_brute_force():
    rng = np.random.default_rng(30)
    x = rng.standard_normal(40)
    n = len(x)
    brute = []
    for i in range(n):
        brute.append(np.var(np.delete(x, i), ddof=1))
    brute = np.asarray(brute)
    expected = np.sqrt((n - 1) / n * np.sum((brute - brute.mean()) ** 2))
    assert abs(jackknife_variance_se(x) - expected) < 1e-12


def test_scan_reproducible_bit_for_bit():
    spec = LatticeSpec(2, 2, 2, 2)
    loss = local_loss()
    r1 = variance_scan(spec, loss, 2, seed=12)
    r2 = variance_scan(spec, loss, 2, seed=12)
    assert np.array_equal(r1.variance, r2.variance)
    assert np.array_equal(r1.mean, r2.mean)
    assert r1.n_failures == r2.n_failures == 0


def test_scan_worker_count_does_not_change_results():
    spec = LatticeSpec(2, 2, 2, 2)
    loss = LossSpec(kind=GLOBAL_NORMALIZED, target=plus_target(spec))
    serial = variance_scan(spec, loss, 8, seed=13, workers=1)
    parallel = variance_scan(spec, loss, 8, seed=13, workers=2)
    assert np.array_equal(serial.variance, parallel.variance)
    assert np.array_equal(serial.mean, parallel.mean)


def test_variances_nonnegative():
    spec = LatticeSpec(2, 3, 2, 2)
    report = variance_scan(spec, local_loss(), 30, seed=14)
    assert np.all(report.variance >= 0.0)
    assert report.n_samples == 30


def test_scan_rejects_tiny_sample_counts():
    with pytest.raises(ValueError):
        variance_scan(LatticeSpec(2, 2, 2, 2), local_loss(), 1, seed=0)


def test_distance_profile_groups():
    spec = LatticeSpec(3, 4, 2, 2)
    report = variance_scan(spec, local_loss(site=(1, 2)), 25, seed=15)
    profile = distance_profile(report)
    assert profile[0][2] == 1  # exactly one on-site entry
    assert sum(v[2] for v in profile.values()) == spec.n_sites
    assert set(profile) == {0, 1, 2, 3}


def test_distance_profile_requires_local_loss():
    spec = LatticeSpec(2, 2, 2, 2)
    loss = LossSpec(kind=GLOBAL_NORMALIZED, target=plus_target(spec))
    report = variance_scan(spec, loss, 5, seed=16)
    with pytest.raises(ValueError):
        distance_profile(report)


def test_zero_observable_gives_zero_variances():
    specs = [LatticeSpec(2, 2, 2, 2)]
    records = onsite_floor_check(specs, np.zeros((2, 2)), 5, seed=17)
    assert records[0]["onsite_variance"] == 0.0


def test_onsite_variance_positive_for_traceless_observable():
    records = onsite_floor_check([LatticeSpec(2, 2, 2, 2)],
                                 traceless_observable(2), 60, seed=18)
    rec = records[0]
    assert rec["onsite_variance"] > 3 * rec["std_error"] > 0


def test_report_serialization():
    spec = LatticeSpec(2, 2, 2, 2)
    report = variance_scan(spec, local_loss(), 10, seed=19)
    doc = report.to_json_dict()
    assert doc["loss"]["kind"] == LOCAL_NORMALIZED
    assert len(doc["variance"]) == 2
    assert "samples" not in doc
    rows = report.csv_rows()
    assert rows[0] == ("site_x", "site_y", "variance", "std_error", "n")
    assert len(rows) == 1 + spec.n_sites
