"""Partition functions, pressure-at-scale brackets, empirical equilibrium
measures and the exact subshift transfer-matrix oracle.

Every pressure value is a bracket: the lower end comes from the weight sum
of a certified greedy separated set, the upper end from the companion
(n, delta/2)-spanning set with a Holder envelope on the covered
candidates.  The limsup in n is replaced by a least-squares slope over the
upper half of the n range; the fit window is part of the estimate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._parallel import parallel_map
from .bowen import SamplingSpec, dual_greedy, phi_eps
from .errors import DegenerateFit, InvalidModel
from .potentials import Potential


# ---------------------------------------------------------------------------
# Partition function
# ---------------------------------------------------------------------------

@dataclass
class PartitionValue:
    n: int
    lower: float
    upper: float
    flagged_empty: bool = False
    admitted: int = 0
    spanning: int = 0
    meta: dict = field(default_factory=dict)

    def __iter__(self):
        return iter((self.lower, self.upper))

    def log_bracket(self):
        lo = math.log(self.lower) if self.lower > 0 else -math.inf
        hi = math.log(self.upper) if self.upper > 0 else -math.inf
        return lo, hi


def _logsumexp(values):
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0:
        return -math.inf
    m = float(np.max(v))
    return m + math.log(float(np.sum(np.exp(v - m))))


def partition_function(system, potential, segment_filter, n, delta, eps, grid,
                       sampling=SamplingSpec()):
    """Bracket for the weighted separated-sum Lambda at one horizon n.

    lower: sum of e^{Phi_eps} over the greedy (n, delta)-separated subset of
    filtered grid candidates.  upper: the (n, delta/2)-spanning companion
    with Holder envelope n*Q*((delta/2)^alpha + eps^alpha) applied to members
    that cover rejected candidates.  An empty filtered candidate set yields
    (0, 0) with flagged_empty set.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    if n < 1:
        raise ValueError("n must be >= 1")
    data = dual_greedy(system, potential, n, delta, grid, segment_filter)
    idx_lo = np.nonzero(data.admitted)[0]
    idx_hi = np.nonzero(data.admitted_half)[0]
    if len(idx_lo) == 0:
        return PartitionValue(n=n, lower=0.0, upper=0.0, flagged_empty=True,
                              meta={"strategy": data.strategy})

    def smeared(idx):
        if eps == 0.0 or potential.kind in ("zero", "constant"):
            return data.log_weights[idx]
        out = np.empty(len(idx), dtype=np.float64)
        for j, i in enumerate(idx):
            out[j] = phi_eps(system, potential, data.points[i], n, eps,
                             SamplingSpec(sampling.count, sampling.seed + int(i)))
        return out

    log_lower = _logsumexp(smeared(idx_lo))
    envelope = n * potential.holder_Q * ((delta / 2.0) ** potential.holder_alpha
                                         + (eps ** potential.holder_alpha
                                            if eps > 0 else 0.0))
    log_terms_hi = smeared(idx_hi) + envelope * data.covers_extra_half[idx_hi]
    log_upper = _logsumexp(log_terms_hi)
    log_upper = max(log_upper, log_lower)
    return PartitionValue(
        n=n, lower=math.exp(log_lower), upper=math.exp(log_upper),
        admitted=int(len(idx_lo)), spanning=int(len(idx_hi)),
        meta={"strategy": data.strategy, "log_lower": log_lower,
              "log_upper": log_upper, "warning": data.warning})


# ---------------------------------------------------------------------------
# Pressure at scale
# ---------------------------------------------------------------------------

@dataclass
class PressureEstimate:
    delta: float
    eps: float
    samples: list            # (n, log lower, log upper)
    slope_lower: float
    slope_upper: float
    fit_window: tuple
    meta: dict = field(default_factory=dict)

    def bracket(self):
        return self.slope_lower, self.slope_upper

    def contains(self, value, tolerance=0.0):
        slack = tolerance * abs(value)
        return (self.slope_lower <= value + slack
                and self.slope_upper >= value - slack)

    def width(self):
        return self.slope_upper - self.slope_lower

    def to_dict(self):
        return {
            "delta": self.delta, "eps": self.eps,
            "samples": [list(s) for s in self.samples],
            "slope_lower": self.slope_lower, "slope_upper": self.slope_upper,
            "fit_window": list(self.fit_window), "meta": self.meta,
        }


def _fit_slope(ns, logs):
    pts = [(n, v) for n, v in zip(ns, logs) if math.isfinite(v)]
    if len(pts) < 2:
        raise DegenerateFit("fewer than two finite partition values in fit window")
    xs = np.array([p[0] for p in pts], dtype=np.float64)
    ys = np.array([p[1] for p in pts], dtype=np.float64)
    slope = float(np.polyfit(xs, ys, 1)[0])
    return slope


def pressure_at_scale(system, potential, segment_filter, delta, eps, n_range,
                      grid, workers=1, sampling=SamplingSpec(),
                      record_monotonicity=False):
    """Least-squares growth-rate bracket of log Lambda over the upper half
    of n_range, separately for the lower/upper partition brackets."""
    ns = sorted(set(int(n) for n in n_range))
    if len(ns) < 5:
        raise InvalidModel("n_range must span at least 5 values")
    values = parallel_map(
        lambda n: partition_function(system, potential, segment_filter, n,
                                     delta, eps, grid, sampling=sampling),
        ns, workers=workers)
    samples = []
    for v in values:
        lo, hi = v.log_bracket()
        samples.append((v.n, lo, hi))
    window = ns[len(ns) // 2:]
    wsamples = [s for s in samples if s[0] in set(window)]
    slope_lo = _fit_slope([s[0] for s in wsamples], [s[1] for s in wsamples])
    slope_hi = _fit_slope([s[0] for s in wsamples], [s[2] for s in wsamples])
    slope_lower, slope_upper = min(slope_lo, slope_hi), max(slope_lo, slope_hi)
    meta = {
        "flagged_empty": all(v.flagged_empty for v in values),
        "any_empty": any(v.flagged_empty for v in values),
        "admitted_max": max(v.admitted for v in values),
        "strategy": values[-1].meta.get("strategy", ""),
    }
    if record_monotonicity:
        coarse = parallel_map(
            lambda n: partition_function(system, potential, segment_filter, n,
                                         2 * delta, eps, grid, sampling=sampling),
            window, workers=workers)
        fine_by_n = {s[0]: s[1] for s in wsamples}
        meta["monotone_in_delta"] = all(
            c.log_bracket()[0] <= fine_by_n[c.n] + 1e-9 for c in coarse)
    return PressureEstimate(delta=delta, eps=eps, samples=samples,
                            slope_lower=slope_lower, slope_upper=slope_upper,
                            fit_window=(window[0], window[-1]), meta=meta)


# ---------------------------------------------------------------------------
# Transfer-matrix oracle (exact subshift pressure)
# ---------------------------------------------------------------------------

def transfer_pressure_oracle(k, potential, tol=1e-12, max_iter=100_000):
    """log of the leading eigenvalue of the weighted word-transition matrix;
    the exact topological pressure of the full k-shift for potentials that
    are locally constant on the first m symbols."""
    if potential.kind == "zero":
        return math.log(k)
    if potential.kind == "constant":
        return math.log(k) + potential.sup_bound
    if potential.kind != "locally_constant":
        raise InvalidModel("oracle needs a locally constant potential")
    m = potential.params["depth"]
    if potential.params["k"] != k:
        raise InvalidModel("potential alphabet does not match k")
    vals = np.asarray(potential.params["values"], dtype=np.float64)
    size = k ** m
    M = np.zeros((size, size))
    for w in range(size):
        # successors share the length-(m-1) suffix of w as prefix
        suffix = w % (k ** (m - 1)) if m > 1 else 0
        for a in range(k):
            wp = suffix * k + a if m > 1 else a
            M[w, wp] = math.exp(vals[w])
    v = np.full(size, 1.0 / size)
    lam = 0.0
    for _ in range(max_iter):
        Mv = M @ v
        lam = float(np.dot(v, Mv) / np.dot(v, v))
        nv = Mv / np.linalg.norm(Mv)
        if np.linalg.norm(M @ nv - lam * nv, ord=np.inf) < tol * max(lam, 1.0):
            v = nv
            break
        v = nv
    return math.log(lam)


def shift_partition_bruteforce(k, potential, n):
    """Independent check: direct sum of e^{Phi_0} over all words of length
    n + depth - 1 restricted to the first n window sums, divided by the
    overcount of free tail symbols."""
    if potential.kind != "locally_constant":
        raise InvalidModel("brute force needs a locally constant potential")
    m = potential.params["depth"]
    vals = np.asarray(potential.params["values"], dtype=np.float64)
    total_len = n + m - 1
    if k ** total_len > 40_000_000:
        raise InvalidModel("brute force too large")
    acc = 0.0
    for w in range(k ** total_len):
        digits = [(w // (k ** (total_len - 1 - j))) % k for j in range(total_len)]
        s = 0.0
        for i in range(n):
            idx = 0
            for j in range(m):
                idx = idx * k + digits[i + j]
            s += vals[idx]
        acc += math.exp(s)
    return acc / (k ** (m - 1))


# ---------------------------------------------------------------------------
# Empirical near-equilibrium measures
# ---------------------------------------------------------------------------

@dataclass
class EmpiricalMeasure:
    atoms: list             # (point, weight)
    n: int

    def total_weight(self):
        return math.fsum(w for _, w in self.atoms)

    def integrate(self, obs):
        ev = obs.evaluator if isinstance(obs, Potential) else obs
        return math.fsum(w * ev(p) for p, w in self.atoms)


def empirical_equilibrium(system, potential, n, delta, grid):
    """Orbit-averaged weighted empirical measure on the greedy separated set:
    atoms are the n orbit points of each member, with weight
    e^{Phi_0(x)} / (n * sum)."""
    from .bowen import build_separated_set

    sep = build_separated_set(system, potential, n, delta, grid)
    if len(sep) == 0:
        raise InvalidModel("empty separated set; no empirical measure")
    lw = sep.log_weights
    m = float(np.max(lw))
    wnorm = np.exp(lw - m)
    wnorm = wnorm / np.sum(wnorm)
    atoms = []
    for x, w in zip(sep.points, wnorm):
        cur = x
        for _ in range(n):
            atoms.append((cur, float(w) / n))
            cur = system.step(cur)
    return EmpiricalMeasure(atoms=atoms, n=n)
