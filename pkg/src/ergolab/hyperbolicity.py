"""Finite-time Lyapunov exponents, central observables, entropy and
unstable-entropy estimators, and the entropy-gap hypothesis checker.

Stable entropy is computed literally as the unstable entropy of the
inverse system, reusing one estimator.  All entropy-type quantities are
reported as slope brackets.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._parallel import parallel_map
from .errors import InvalidModel, NoSmoothStructure
from .potentials import birkhoff_sum, oscillation, zero_potential
from .pressure import _fit_slope, pressure_at_scale
from .systems import BACKWARD, FORWARD, ToralAuto


# ---------------------------------------------------------------------------
# Finite-time exponents
# ---------------------------------------------------------------------------

def finite_time_exponent(system, x, n, label):
    """(1/n) * Birkhoff sum of the bundle log-norm along the orbit of x."""
    if n < 1:
        raise ValueError("n must be >= 1")
    s = birkhoff_sum(system, lambda p: system.bundle_log_norm(p, label), x, n)
    return s / n


@dataclass
class ExponentReport:
    horizon: int
    seed_point: object
    per_bundle: dict            # label -> finite-time exponent
    exact_rates: dict = None    # label -> log-rate (linear models)

    def to_dict(self):
        return {"horizon": self.horizon,
                "per_bundle": dict(self.per_bundle),
                "exact_rates": dict(self.exact_rates or {})}


def exponent_report(system, x, n):
    if system.splitting is None:
        raise NoSmoothStructure(f"{system.variant} carries no smooth splitting")
    per = {b.label: finite_time_exponent(system, x, n, b.label)
           for b in system.splitting.bundles}
    exact = {b.label: b.log_rate for b in system.splitting.bundles}
    return ExponentReport(horizon=n, seed_point=x, per_bundle=per,
                          exact_rates=exact)


# ---------------------------------------------------------------------------
# Central observables
# ---------------------------------------------------------------------------

def central_observables(system, split_index):
    """(beta1, beta2_hat) for splitting the central stack after bundle
    ``split_index``: beta1 = max of the first i forward central log-norms,
    beta2_hat = min of the last k-i backward ones."""
    labels = system.central_labels()
    k = len(labels)
    if k < 2:
        raise InvalidModel("need at least 2 central bundles to split")
    if not (1 <= split_index <= k - 1):
        raise InvalidModel(f"split index must lie in [1, {k - 1}]")
    first = labels[:split_index]
    last = labels[split_index:]

    def beta1(p):
        return max(system.bundle_log_norm(p, lab, FORWARD) for lab in first)

    def beta2_hat(p):
        return min(system.bundle_log_norm(p, lab, BACKWARD) for lab in last)

    return beta1, beta2_hat


def default_observables(system):
    """Central observables for the report pipelines: the middle split when
    central bundles exist, None (trivial decomposition) otherwise."""
    try:
        labels = system.central_labels()
    except NoSmoothStructure:
        return None
    if len(labels) < 2:
        return None
    return central_observables(system, len(labels) // 2)


# ---------------------------------------------------------------------------
# Entropy estimators
# ---------------------------------------------------------------------------

def entropy_estimate(system, delta_list, n_range, grid, workers=1):
    """Pressure-at-scale brackets at the zero potential, one per delta.

    Returns (per_delta, headline) where headline is the smallest-delta
    bracket."""
    z = zero_potential()
    per_delta = {}
    for delta in delta_list:
        per_delta[delta] = pressure_at_scale(system, z, None, delta, 0.0,
                                             n_range, grid, workers=workers)
    headline = per_delta[min(delta_list)]
    return per_delta, headline


@dataclass
class UnstableEntropyEstimate:
    sep_scale: float
    disk_radius: float
    samples: list               # (n, log count lower, log count upper)
    slope_lower: float
    slope_upper: float
    rate: float                 # exact leaf expansion rate (linear model)

    def bracket(self):
        return self.slope_lower, self.slope_upper

    def to_dict(self):
        return {"sep_scale": self.sep_scale, "disk_radius": self.disk_radius,
                "samples": [list(s) for s in self.samples],
                "slope_lower": self.slope_lower,
                "slope_upper": self.slope_upper, "rate": self.rate}


def _leaf_separated_count(R, rate, n, sep):
    """Greedy sweep count of an (n, sep)-separated subset of a 1-d unstable
    disk of radius R; the leaf metric is |dt| and d_n = e^{rate (n-1)} |dt|.

    On the uniform grid of spacing gap/4 the sweep admits every 5th point
    (strict separation), which the closed form below reproduces exactly.
    """
    gap = sep * math.exp(-rate * (n - 1))
    grid_step = gap / 4.0
    m = int(math.floor(2.0 * R / grid_step + 1e-12))
    return m // 5 + 1


def unstable_entropy_estimate(system, sep_scale, n_range, disk_radius, seeds,
                              workers=1, count_cap=2_000_000):
    """Growth-rate bracket of maximal separated subsets of unstable disks.

    Linear models only: the unstable leaf through a seed is the affine line
    in the u-eigendirection, on which the Bowen leaf metric scales exactly
    by e^{rate} per step.  Seeds are scanned in parallel; for linear systems
    counts are seed-independent."""
    if not isinstance(system, ToralAuto):
        raise NoSmoothStructure("unstable disks need a toral automorphism")
    rate = system.splitting.by_label("u").log_rate
    ns = sorted(set(int(n) for n in n_range))
    usable = [n for n in ns
              if 2 * disk_radius * math.exp(rate * (n - 1)) / sep_scale
              < count_cap]
    if len(usable) < 3:
        raise InvalidModel("count cap leaves fewer than 3 usable horizons")

    def counts_for_seed(_seed):
        return [_leaf_separated_count(disk_radius, rate, n, sep_scale)
                for n in usable]

    per_seed = parallel_map(counts_for_seed, list(seeds) or [None],
                            workers=workers)
    best = [max(c[i] for c in per_seed) for i in range(len(usable))]
    # covering upper bound: spanning at sep/2 dominates any separated set
    upper = [int(math.floor(2 * disk_radius
                            * math.exp(rate * (n - 1)) / (sep_scale / 2.0)))
             + 1 for n in usable]
    samples = [(n, math.log(lo), math.log(hi))
               for n, lo, hi in zip(usable, best, upper)]
    window = usable[len(usable) // 2:]
    ws = [s for s in samples if s[0] in set(window)]
    slopes = sorted((_fit_slope([s[0] for s in ws], [s[1] for s in ws]),
                     _fit_slope([s[0] for s in ws], [s[2] for s in ws])))
    # widen by the fit residual plus the integer-rounding envelope of the
    # counts; a finite-window slope of clean geometric data can sit up to
    # this far from the growth rate
    span = float(window[-1] - window[0])
    wset = set(window)
    count_min = min(b for u, b in zip(usable, best) if u in wset)
    rounding = math.log1p(2.0 / max(count_min, 1))
    wiggle = 2.0 * rounding / max(span, 1.0)
    for logs in ([s[1] for s in ws], [s[2] for s in ws]):
        xs = np.array([s[0] for s in ws], dtype=np.float64)
        ys = np.array(logs)
        coef = np.polyfit(xs, ys, 1)
        resid = float(np.max(np.abs(ys - np.polyval(coef, xs))))
        wiggle = max(wiggle, 2.0 * resid / max(span, 1.0))
    return UnstableEntropyEstimate(
        sep_scale=sep_scale, disk_radius=disk_radius, samples=samples,
        slope_lower=slopes[0] - wiggle, slope_upper=slopes[1] + wiggle,
        rate=rate)


def stable_entropy_estimate(system, sep_scale, n_range, disk_radius, seeds,
                            workers=1):
    """h^s as the unstable entropy of the inverse system."""
    return unstable_entropy_estimate(system.inverse(), sep_scale, n_range,
                                     disk_radius, seeds, workers=workers)


# ---------------------------------------------------------------------------
# Entropy gap hypothesis
# ---------------------------------------------------------------------------

@dataclass
class EntropyGapReport:
    h_top: tuple                # (lower, upper)
    h_u: tuple
    h_s: tuple
    sup_phi: float
    inf_phi: float
    margin_lower: float
    margin_upper: float
    holds: bool
    detail: dict = field(default_factory=dict)

    def margin_bracket(self):
        return self.margin_lower, self.margin_upper

    def to_dict(self):
        return {"h_top": list(self.h_top), "h_u": list(self.h_u),
                "h_s": list(self.h_s), "sup_phi": self.sup_phi,
                "inf_phi": self.inf_phi,
                "margin": [self.margin_lower, self.margin_upper],
                "holds": self.holds, "detail": self.detail}


def entropy_gap_report(system, potential, delta_list, n_range, grid,
                       u_sep, u_radius, u_n_range, seeds, osc_grid,
                       workers=1):
    """Assembles h_top, h^u, h^s brackets and the gap margin
    h_top - max(h^u, h^s) - (sup phi - inf phi); ``holds`` compares the
    unfavorable bracket ends."""
    _per_delta, htop = entropy_estimate(system, delta_list, n_range, grid,
                                        workers=workers)
    hu = unstable_entropy_estimate(system, u_sep, u_n_range, u_radius, seeds,
                                   workers=workers)
    hs = stable_entropy_estimate(system, u_sep, u_n_range, u_radius, seeds,
                                 workers=workers)
    sup_est, inf_est = oscillation(potential, system, osc_grid)
    osc = sup_est - inf_est
    margin_lower = htop.slope_lower - max(hu.slope_upper, hs.slope_upper) - osc
    margin_upper = htop.slope_upper - max(hu.slope_lower, hs.slope_lower) - osc
    return EntropyGapReport(
        h_top=(htop.slope_lower, htop.slope_upper),
        h_u=hu.bracket(), h_s=hs.bracket(),
        sup_phi=sup_est, inf_phi=inf_est,
        margin_lower=margin_lower, margin_upper=margin_upper,
        holds=margin_lower > 0.0,
        detail={"h_top_samples": [list(s) for s in htop.samples],
                "h_u": hu.to_dict(), "h_s": hs.to_dict()})
