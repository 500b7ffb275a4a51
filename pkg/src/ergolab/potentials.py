"""Holder potentials, Birkhoff sums and oscillation bounds.

Potentials come from a fixed parametric family (no user code evaluation):
zero, constant, trig (cosine in one torus coordinate), locally_constant
(on the first m symbols of a shift) and tent (circle distance to the
origin).  Each instance carries declared Holder data (Q, alpha) plus
sup/inf bounds, and is certified by pair sampling at construction.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidModel
from .systems import BACKWARD, FORWARD, ShiftPoint, UnsupportedDirection


@dataclass(frozen=True)
class Potential:
    kind: str
    params: dict
    holder_Q: float
    holder_alpha: float
    sup_bound: float
    inf_bound: float
    evaluator: object = field(repr=False)

    def __call__(self, p):
        return self.evaluator(p)

    def spec(self):
        return {"kind": self.kind, **self.params,
                "Q": self.holder_Q, "alpha": self.holder_alpha}


def zero_potential():
    return Potential("zero", {}, 0.0, 1.0, 0.0, 0.0, lambda p: 0.0)


def constant_potential(c):
    c = float(c)
    return Potential("constant", {"c": c}, 0.0, 1.0, c, c, lambda p: c)


def trig_potential(amplitude, axis=0, frequency=1):
    """amp * cos(2 pi f x_axis) on torus/circle points."""
    amp, f = float(amplitude), int(frequency)

    def ev(p):
        x = np.atleast_1d(np.asarray(p, dtype=np.float64))
        return amp * math.cos(2.0 * math.pi * f * x[axis])

    Q = abs(amp) * 2.0 * math.pi * f
    return Potential("trig", {"amplitude": amp, "axis": axis, "frequency": f},
                     Q, 1.0, abs(amp), -abs(amp), ev)


def tent_potential(scale=1.0):
    """scale * d(x, 0) on the circle; 1-Lipschitz for the circle metric."""
    s = float(scale)

    def ev(p):
        x = float(np.atleast_1d(p)[0]) % 1.0
        return s * min(x, 1.0 - x)

    return Potential("tent", {"scale": s}, abs(s), 1.0, abs(s) * 0.5, 0.0, ev)


def locally_constant_potential(values, k=2, depth=None):
    """Potential on a k-shift depending on symbols x_0 .. x_{m-1}.

    ``values`` is a flat table of length k^m indexed by the base-k word.
    """
    vals = tuple(float(v) for v in values)
    m = depth
    if m is None:
        m = round(math.log(len(vals), k))
    if k ** m != len(vals):
        raise InvalidModel(f"need k^m = {k ** m} values, got {len(vals)}")
    if m > 6:
        raise InvalidModel("locally constant depth capped at 6 symbols")

    def ev(p):
        if not isinstance(p, ShiftPoint):
            raise InvalidModel("locally constant potential expects shift points")
        idx = 0
        for j in range(m):
            idx = idx * k + p.at(j)
        return vals[idx]

    osc = max(vals) - min(vals)
    # disagreement inside [0, m) forces d >= 2^{-(m-1)}
    Q = osc * (2.0 ** (m - 1))
    return Potential("locally_constant",
                     {"values": list(vals), "k": k, "depth": m},
                     Q, 1.0, max(vals), min(vals), ev)


def potential_from_spec(spec):
    kind = spec.get("kind")
    if kind == "zero":
        return zero_potential()
    if kind == "constant":
        return constant_potential(spec["c"])
    if kind == "trig":
        return trig_potential(spec["amplitude"], spec.get("axis", 0),
                              spec.get("frequency", 1))
    if kind == "tent":
        return tent_potential(spec.get("scale", 1.0))
    if kind == "locally_constant":
        return locally_constant_potential(spec["values"], spec.get("k", 2),
                                          spec.get("depth"))
    raise InvalidModel(f"unknown potential kind {kind!r}")


# ---------------------------------------------------------------------------
# Birkhoff sums
# ---------------------------------------------------------------------------

def birkhoff_sum(system, obs, x, n, direction=FORWARD):
    """Sum of obs along the first n orbit points of x in the stated direction.

    Compensated summation (math.fsum); n = 0 gives 0.  Backward requires an
    invertible system.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    if direction == BACKWARD and not system.invertible:
        raise UnsupportedDirection("backward Birkhoff sum on non-invertible system")
    ev = obs.evaluator if isinstance(obs, Potential) else obs
    vals = []
    cur = x
    for _ in range(n):
        vals.append(ev(cur))
        cur = system.step(cur, direction)
    return math.fsum(vals)


def birkhoff_values(system, obs, x, n, direction=FORWARD):
    """The n values obs(f^i x) along the orbit (list, not summed)."""
    if direction == BACKWARD and not system.invertible:
        raise UnsupportedDirection("backward orbit on non-invertible system")
    ev = obs.evaluator if isinstance(obs, Potential) else obs
    vals = []
    cur = x
    for _ in range(n):
        vals.append(ev(cur))
        cur = system.step(cur, direction)
    return vals


def oscillation(pot, system, grid):
    """(sup, inf) of the potential over a sampling grid.

    ``grid`` is a GridSpec (see ergolab.grids) or an iterable of points.
    """
    from .grids import GridSpec

    if isinstance(grid, GridSpec):
        points = grid.generate(system).points
    else:
        points = list(grid)
    if len(points) == 0:
        raise InvalidModel("oscillation needs a nonempty grid")
    vals = [pot(p) for p in points]
    sup_est, inf_est = max(vals), min(vals)
    sup_est = min(sup_est, pot.sup_bound)
    inf_est = max(inf_est, pot.inf_bound)
    return sup_est, inf_est


def certify_holder(pot, system, pairs=10_000, seed=0, tolerance=0.01):
    """Sample-based Holder certificate.

    Draws random point pairs, checks |phi(p) - phi(q)| <= Q d(p,q)^alpha and
    the sup/inf bounds; returns the observed max ratio.  Raises InvalidModel
    if the declared constant is exceeded by more than ``tolerance``.
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    for p, q in _sample_pairs(system, pairs, rng):
        d = system.distance(p, q)
        fp, fq = pot(p), pot(q)
        for v in (fp, fq):
            if not (pot.inf_bound - 1e-12 <= v <= pot.sup_bound + 1e-12):
                raise InvalidModel(f"value {v} outside declared bounds")
        if d <= 0:
            continue
        ratio = abs(fp - fq) / (d ** pot.holder_alpha)
        worst = max(worst, ratio)
    if pot.holder_Q > 0 and worst > pot.holder_Q * (1.0 + tolerance):
        raise InvalidModel(
            f"Holder certificate failed: observed Q {worst:.6g} > declared {pot.holder_Q:.6g}")
    if pot.holder_Q == 0 and worst > 1e-12:
        raise InvalidModel("potential declared constant but varies on samples")
    return worst


def _sample_pairs(system, count, rng):
    variant = system.variant
    if variant in ("toral_auto",):
        d = system.dim
        for _ in range(count):
            p = rng.random(d)
            q = (p + rng.normal(scale=0.2, size=d)) % 1.0
            yield p, q
    elif variant == "expanding_circle":
        for _ in range(count):
            p = rng.random()
            q = (p + rng.normal(scale=0.2)) % 1.0
            yield p, q
    elif variant == "full_shift":
        for _ in range(count):
            w = rng.integers(1, 12)
            a = system.random_point(rng, -w, w + 8)
            syms = list(a.symbols)
            flips = rng.integers(0, len(syms) + 1)
            for _ in range(flips):
                j = rng.integers(0, len(syms))
                syms[j] = rng.integers(0, system.k)
            yield a, ShiftPoint(tuple(int(s) for s in syms), a.offset)
    else:
        span = system.ambient_diameter
        for _ in range(count):
            p = rng.random() * span
            q = min(max(p + rng.normal(scale=0.1 * span), 0.0), span)
            yield p, q
