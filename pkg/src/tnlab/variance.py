"""Monte-Carlo estimation of per-parameter gradient variances.

Each sample is an independently drawn random state; its full gradient grid is
evaluated analytically. Per-sample random sources are spawned from one root
seed, so results are identical for any worker count, and partial results are
merged in sample order.
"""

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateStateError
from .losses import LOCAL_KINDS, gradient_map
from .states import build_state


def jackknife_variance_se(values):
    """Delete-one jackknife standard error of the unbiased sample variance."""
    x = np.asarray(values, dtype=float)
    n = x.shape[0]
    if n < 3:
        return np.full(x.shape[1:], np.nan) if x.ndim > 1 else float("nan")
    s1 = np.sum(x, axis=0)
    s2 = np.sum(x * x, axis=0)
    m = n - 1
    s1_i = s1 - x
    s2_i = s2 - x * x
    var_i = (s2_i - s1_i * s1_i / m) / (m - 1)
    var_bar = np.mean(var_i, axis=0)
    se = np.sqrt((n - 1) / n * np.sum((var_i - var_bar) ** 2, axis=0))
    return se if x.ndim > 1 else float(se)


@dataclass(frozen=True)
class VarianceReport:
    """Per-site gradient statistics from one Monte-Carlo scan."""

    l1: int
    l2: int
    D: int
    d: int
    loss: dict
    n_samples: int
    n_failures: int
    seed: int
    variance: np.ndarray  # (l1, l2), unbiased
    mean: np.ndarray
    std_error: np.ndarray  # jackknife SE of the variance
    elapsed_seconds: float = 0.0
    samples: np.ndarray = None  # raw (n, l1, l2) gradient grid; not serialized

    def csv_rows(self):
        rows = [("site_x", "site_y", "variance", "std_error", "n")]
        for x in range(self.l1):
            for y in range(self.l2):
                rows.append((x, y, repr(float(self.variance[x, y])),
                             repr(float(self.std_error[x, y])), self.n_samples))
        return rows

    def to_json_dict(self):
        return {
            "l1": self.l1, "l2": self.l2, "D": self.D, "d": self.d,
            "loss": self.loss, "n_samples": self.n_samples,
            "n_failures": self.n_failures, "seed": self.seed,
            "variance": self.variance.tolist(), "mean": self.mean.tolist(),
            "std_error": self.std_error.tolist(),
            "elapsed_seconds": self.elapsed_seconds,
        }


def _scan_chunk(args):
    spec, loss, seeds = args
    grads = []
    failures = 0
    for ss in seeds:
        rng = np.random.default_rng(ss)
        try:
            state = build_state(spec, rng)
            grads.append(gradient_map(state, loss))
        except (DegenerateStateError, FloatingPointError):
            failures += 1
    return grads, failures


def variance_scan(spec, loss, n_samples, seed, workers=1):
    """Empirical per-site Var(d loss/d theta) over n_samples independent states."""
    if n_samples < 2:
        raise ValueError("need at least 2 samples")
    start = time.monotonic()
    sample_keys = np.random.SeedSequence(seed).spawn(n_samples)

    if workers and workers > 1:
        chunks = np.array_split(np.arange(n_samples), min(workers, n_samples))
        jobs = [(spec, loss, [sample_keys[i] for i in idx]) for idx in chunks if len(idx)]
        grads, failures = [], 0
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for g, f in pool.map(_scan_chunk, jobs):
                grads.extend(g)
                failures += f
    else:
        grads, failures = _scan_chunk((spec, loss, sample_keys))

    samples = np.array(grads)  # (n, l1, l2)
    n_ok = samples.shape[0]
    if n_ok < 2:
        raise RuntimeError(f"only {n_ok} usable samples ({failures} failures)")
    report = VarianceReport(
        l1=spec.l1, l2=spec.l2, D=spec.D, d=spec.d,
        loss=loss.describe(), n_samples=n_ok, n_failures=failures, seed=seed,
        variance=np.var(samples, axis=0, ddof=1),
        mean=np.mean(samples, axis=0),
        std_error=jackknife_variance_se(samples),
        elapsed_seconds=time.monotonic() - start,
        samples=samples,
    )
    return report


def distance_profile(report):
    """Mean gradient variance grouped by toric Manhattan distance to the observable site.

    Returns {distance: (mean_variance, std_error, n_sites)}. With the raw
    sample grid available the SE of each group mean is jackknifed over
    samples; otherwise per-site SEs are combined assuming independence.
    """
    from .lattice import LatticeSpec

    if report.loss.get("kind") not in LOCAL_KINDS:
        raise ValueError("distance profile requires a local loss report")
    samples = report.samples
    spec = LatticeSpec(report.l1, report.l2, report.D, report.d)
    obs = tuple(report.loss["site"])
    groups = {}
    for x in range(spec.l1):
        for y in range(spec.l2):
            groups.setdefault(spec.toric_manhattan((x, y), obs), []).append((x, y))
    profile = {}
    for delta in sorted(groups):
        sites = groups[delta]
        mean_var = float(np.mean([report.variance[s] for s in sites]))
        if samples is not None:
            per_site = np.stack([samples[:, s[0], s[1]] for s in sites], axis=1)
            n = per_site.shape[0]
            s1 = per_site.sum(axis=0)
            s2 = (per_site**2).sum(axis=0)
            m = n - 1
            var_i = ((s2 - per_site**2) - (s1 - per_site) ** 2 / m) / (m - 1)
            stat_i = var_i.mean(axis=1)
            se = float(np.sqrt((n - 1) / n * np.sum((stat_i - stat_i.mean()) ** 2)))
        else:
            se = float(np.sqrt(np.sum([report.std_error[s] ** 2 for s in sites]))
                       / len(sites))
        profile[delta] = (mean_var, se, len(sites))
    return profile


def onsite_floor_check(specs, observable, n_samples, seed, site=(0, 0), workers=1):
    """On-site gradient variance of the unnormalized local loss across lattice sizes.

    Returns one record per spec with the variance at the observable site, its
    jackknife SE, and the sample count; used to check that the on-site floor
    does not decay with volume.
    """
    from .losses import LOCAL_UNNORMALIZED, LossSpec

    records = []
    for i, spec in enumerate(specs):
        loss = LossSpec(kind=LOCAL_UNNORMALIZED, observable=observable,
                        site=site, theory_mode=True)
        report = variance_scan(spec, loss, n_samples, seed + i, workers=workers)
        records.append({
            "l1": spec.l1, "l2": spec.l2, "D": spec.D, "d": spec.d,
            "n_samples": report.n_samples,
            "onsite_variance": float(report.variance[site]),
            "std_error": float(report.std_error[site]),
        })
    return records
