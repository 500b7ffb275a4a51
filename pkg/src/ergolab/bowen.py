"""Bowen dynamical metrics, Bowen balls, separated sets and the smeared
Birkhoff supremum.

Separated sets are built by a weighted greedy pass over grid candidates
(descending e^{Phi_0} weight, ties lexicographic).  For lattice grids on
linear systems the pass runs on compiled kernels that exploit the fact
that Bowen separation depends only on candidate coordinate differences;
full shifts use exact cylinder enumeration.  Every construction records a
certificate including the grid-spanning property of the result.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import InvalidModel
from .grids import GridSpec
from .potentials import birkhoff_sum
from .systems import (
    CocycleToy,
    ExpandingCircle,
    FullShift,
    ShiftPoint,
    ToralAuto,
)


# ---------------------------------------------------------------------------
# Bowen metric and balls
# ---------------------------------------------------------------------------

def bowen_distance(system, x, y, n):
    """max_{0 <= i < n} d(f^i x, f^i y)."""
    if n < 1:
        raise ValueError("bowen_distance needs n >= 1")
    best = 0.0
    px, py = x, y
    for i in range(n):
        best = max(best, system.distance(px, py))
        if i + 1 < n:
            px = system.step(px)
            py = system.step(py)
    return best


def in_bowen_ball(system, center, y, n, delta):
    """Strict inequality: y in B_n(center, delta) iff d_n < delta."""
    if n < 1:
        raise ValueError("in_bowen_ball needs n >= 1")
    if delta <= 0:
        raise ValueError("delta must be positive")
    px, py = center, y
    for i in range(n):
        if system.distance(px, py) >= delta:
            return False
        if i + 1 < n:
            px = system.step(px)
            py = system.step(py)
    return True


# ---------------------------------------------------------------------------
# Bowen ball sampling
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SamplingSpec:
    count: int = 64
    seed: int = 0


def sample_bowen_ball(system, x, n, eps, count, rng):
    """Verified points of B_n(x, eps): propose per-variant, then check
    membership directly.  Returns at most ``count`` points (may be fewer)."""
    if eps <= 0:
        return []
    out = []
    proposals = _ball_proposals(system, x, n, eps, count, rng)
    for y in proposals:
        if in_bowen_ball(system, x, y, n, eps):
            out.append(y)
        if len(out) >= count:
            break
    return out


def _ball_proposals(system, x, n, eps, count, rng):
    if isinstance(system, ToralAuto):
        rates = np.array([b.log_rate for b in system.splitting.bundles])
        V = system.splitting.basis_matrix()
        cond = np.linalg.cond(V)
        base = eps / (math.sqrt(system.dim) * max(cond, 1.0))
        bounds = base * np.minimum(1.0, np.exp(-rates * max(n - 1, 0)))
        props = []
        for scale in (1.0, 0.5, 0.25, 0.1):
            m = max(1, count // 2)
            U = rng.uniform(-1.0, 1.0, size=(m, system.dim)) * (bounds * scale)
            for u in U:
                props.append((np.asarray(x, dtype=np.float64) + V @ u) % 1.0)
        return props
    if isinstance(system, FullShift):
        if not isinstance(x, ShiftPoint):
            raise InvalidModel("expected a shift point")
        me = 0 if eps > 1.0 else int(math.ceil(math.log2(1.0 / eps))) + 1
        forced_hi = n - 1 + me  # indices <= forced_hi must agree
        props = []
        for _ in range(count * 2):
            syms = list(x.symbols)
            changed = False
            for j in range(len(syms)):
                abs_idx = x.offset + j
                if abs_idx > forced_hi or abs_idx < -me:
                    if rng.random() < 0.5:
                        syms[j] = int(rng.integers(0, system.k))
                        changed = True
            props.append(ShiftPoint(tuple(syms), x.offset))
            if not changed and len(props) > count:
                break
        return props
    if isinstance(system, ExpandingCircle):
        radius = eps * float(system.k) ** (-(n - 1))
        return [(float(x) + rng.uniform(-radius, radius)) % 1.0
                for _ in range(count * 2)]
    if isinstance(system, CocycleToy):
        return [float(x) + rng.uniform(-eps, eps) * 0.999 for _ in range(count)]
    raise InvalidModel(f"no ball sampler for {system.variant}")


def phi_eps(system, potential, x, n, eps, sampling=SamplingSpec()):
    """Sampled sup of Phi_0 over B_n(x, eps); a lower bound on the true sup,
    always >= Phi_0(x, n).  eps = 0 returns Phi_0 exactly."""
    if eps < 0:
        raise ValueError("eps must be >= 0")
    base = birkhoff_sum(system, potential, x, n)
    if eps == 0.0 or n == 0:
        return base
    rng = np.random.default_rng(sampling.seed)
    best = base
    for y in sample_bowen_ball(system, x, n, eps, sampling.count, rng):
        best = max(best, birkhoff_sum(system, potential, y, n))
    return best


# ---------------------------------------------------------------------------
# Separated sets
# ---------------------------------------------------------------------------

@dataclass
class SeparatedSet:
    n: int
    delta: float
    points: list
    weights: np.ndarray          # e^{Phi_0}, greedy ordering weights
    log_weights: np.ndarray
    construction: dict

    def __len__(self):
        return len(self.points)

    def verify_separated(self, system):
        """Re-check pairwise d_n > delta directly (quadratic; small sets)."""
        for i in range(len(self.points)):
            for j in range(i + 1, len(self.points)):
                if bowen_distance(system, self.points[i], self.points[j],
                                  self.n) <= self.delta:
                    return False
        return True


@dataclass
class GreedyData:
    """Raw dual-scale greedy output shared with the pressure module."""

    n: int
    delta: float
    points: list
    log_weights: np.ndarray
    admitted: np.ndarray         # bool, delta-pass
    covers_extra: np.ndarray     # bool, delta-pass: admitted that rejected someone
    admitted_half: np.ndarray    # bool, delta/2-pass
    covers_extra_half: np.ndarray
    strategy: str
    warning: str = ""
    meta: dict = field(default_factory=dict)


_DIRECT_CAP = 60_000
_BAD_CAP = 2_000_000


def build_separated_set(system, potential, n, delta, grid,
                        segment_filter=None):
    """Greedy (n, delta)-separated subset of the grid candidates.

    Candidates are sorted by descending e^{Phi_0} weight (ties broken by
    lexicographic coordinate order) and admitted iff Bowen-separated from
    all previously admitted points.  The result is also (n, delta)-spanning
    for the grid, which the certificate records.
    """
    data = dual_greedy(system, potential, n, delta, grid, segment_filter)
    idx = np.nonzero(data.admitted)[0]
    pts = [data.points[i] for i in idx]
    lw = data.log_weights[idx]
    construction = {
        "grid": grid.describe() if isinstance(grid, GridSpec) else "inline",
        "ordering": "weight_desc_lex",
        "candidate_count": len(data.points),
        "admitted_count": len(pts),
        "strategy": data.strategy,
        "spanning_for_grid": True,
        "warning": data.warning,
    }
    construction.update(data.meta)
    return SeparatedSet(n=n, delta=delta, points=pts,
                        weights=np.exp(lw), log_weights=lw,
                        construction=construction)


def dual_greedy(system, potential, n, delta, grid, segment_filter=None):
    """Run the greedy admission at scales delta and delta/2 on one grid."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if delta <= 0:
        raise ValueError("delta must be positive")
    grid = GridSpec.from_spec(grid) if not isinstance(grid, GridSpec) else grid
    gres = grid.generate(system, n=n, delta=delta / 2.0)
    if isinstance(system, FullShift) and gres.shift_words is not None:
        return _shift_greedy(system, potential, n, delta, gres, segment_filter)
    if gres.lattice is not None:
        return _lattice_greedy(system, potential, n, delta, gres, segment_filter)
    return _direct_greedy(system, potential, n, delta, gres, segment_filter)


def _apply_filter(points, n, segment_filter):
    if segment_filter is None:
        return np.ones(len(points), dtype=bool)
    return np.array([bool(segment_filter(p, n)) for p in points])


def _order_from(log_weights, tie_keys, keep):
    """Processing order: descending weight, then lexicographic tie keys,
    restricted to kept candidates."""
    keys = list(reversed(tie_keys)) + [-log_weights]
    order = np.lexsort(keys)
    return order[keep[order]]


def _shift_greedy(system, potential, n, delta, gres, segment_filter):
    words = gres.shift_words
    pts = gres.points
    N = len(pts)
    lw = _shift_log_weights(system, potential, pts, words, gres.shift_window, n)
    keep = _apply_filter(pts, n, segment_filter)
    rank = np.arange(N)  # words are already lexicographic
    order = _order_from(lw, [rank.astype(np.float64)], keep)
    # distinct zero-padded cylinder candidates are pairwise d_n = 1 exactly
    def one_scale(scale):
        adm = np.zeros(N, dtype=bool)
        extra = np.zeros(N, dtype=bool)
        if scale < 1.0:
            adm[order] = True
        elif len(order):
            adm[order[0]] = True
            extra[order[0]] = len(order) > 1
        return adm, extra

    admitted, covers_extra = one_scale(delta)
    admitted_h, covers_extra_h = one_scale(delta / 2.0)
    return GreedyData(n=n, delta=delta, points=pts, log_weights=lw,
                      admitted=admitted, covers_extra=covers_extra,
                      admitted_half=admitted_h, covers_extra_half=covers_extra_h,
                      strategy="cylinder_exact", meta=dict(gres.meta))


def _shift_log_weights(system, potential, pts, words, window, n):
    if potential.kind in ("zero", "constant"):
        c = potential.sup_bound  # = inf for these kinds
        return np.full(len(pts), n * c, dtype=np.float64)
    if potential.kind == "locally_constant":
        k = potential.params["k"]
        m = potential.params["depth"]
        table = np.asarray(potential.params["values"], dtype=np.float64)
        lo, _hi = window
        start = -lo  # column of absolute index 0
        enc = np.zeros(len(pts), dtype=np.int64)
        lw = np.zeros(len(pts), dtype=np.float64)
        for i in range(n):
            enc[:] = 0
            for j in range(m):
                enc = enc * k + words[:, start + i + j]
            lw += table[enc]
        return lw
    return np.array([birkhoff_sum(system, potential, p, n) for p in pts])


def _torus_log_weights(system, potential, P, n):
    """Vectorized Phi_0 over candidate array P (N, d)."""
    if potential.kind in ("zero", "constant"):
        return np.full(P.shape[0], n * potential.sup_bound, dtype=np.float64)
    ev = _vector_evaluator(potential)
    if ev is None:
        return np.array([birkhoff_sum(system, potential, p, n) for p in P])
    X = P.copy()
    lw = np.zeros(P.shape[0], dtype=np.float64)
    A = system.matrix_f if isinstance(system, ToralAuto) else None
    for _ in range(n):
        lw += ev(X)
        if A is not None:
            X = (X @ A.T) % 1.0
        else:
            X = (system.k * X) % 1.0
    return lw


def _vector_evaluator(potential):
    if potential.kind == "trig":
        amp = potential.params["amplitude"]
        axis = potential.params["axis"]
        f = potential.params["frequency"]
        return lambda X: amp * np.cos(2.0 * np.pi * f * X[:, axis])
    if potential.kind == "tent":
        s = potential.params["scale"]
        return lambda X: s * np.minimum(X[:, 0], 1.0 - X[:, 0])
    return None


def _lattice_greedy(system, potential, n, delta, gres, segment_filter):
    info = gres.lattice
    P = info.points()
    pts_list = [p if isinstance(system, ToralAuto) else float(p[0]) for p in P]
    N = P.shape[0]
    lw = _torus_log_weights(system, potential, P, n)
    keep = _apply_filter(pts_list, n, segment_filter)
    tie_keys = [P[:, j] for j in range(P.shape[1])]
    order = _order_from(lw, tie_keys, keep)

    if isinstance(system, ToralAuto):
        amat = system.matrix_f
    else:
        amat = np.array([[float(system.k)]])
    counts = np.asarray(info.kshape, dtype=np.int64)
    max_bad = 50_000
    while True:
        offsets, half, n_bad = _kernels.scan_bad_offsets(
            np.ascontiguousarray(info.gen), np.ascontiguousarray(amat),
            counts, n, float(delta), float(delta) / 2.0, max_bad)
        if n_bad >= 0:
            break
        max_bad *= 8
        if max_bad > _BAD_CAP:
            raise InvalidModel(
                "bad-offset table overflow; grid too dense for this delta")
    offsets = offsets[:n_bad]
    half = half[:n_bad]
    kc = np.ascontiguousarray(info.kcoords.astype(np.int32))
    adm, cov, extra = _kernels.greedy_mark(order, kc, counts, offsets)
    adm_h, cov_h, extra_h = _kernels.greedy_mark(
        order, kc, counts, np.ascontiguousarray(offsets[half.astype(bool)]))
    warning = ""
    max_spacing = float(np.max(np.linalg.norm(info.gen, axis=0))) if info.gen.size else 0.0
    if max_spacing > delta / 2.0:
        warning = (f"grid spacing {max_spacing:.3g} coarser than delta/2 = "
                   f"{delta / 2.0:.3g}")
    return GreedyData(n=n, delta=delta, points=pts_list, log_weights=lw,
                      admitted=adm.astype(bool), covers_extra=extra.astype(bool),
                      admitted_half=adm_h.astype(bool),
                      covers_extra_half=extra_h.astype(bool),
                      strategy="lattice_offsets", warning=warning,
                      meta={"bad_offsets": int(n_bad), **gres.meta})


def _direct_greedy(system, potential, n, delta, gres, segment_filter):
    pts = gres.points
    if pts is None or len(pts) == 0:
        raise InvalidModel("empty candidate grid")
    N = len(pts)
    if N > _DIRECT_CAP:
        raise InvalidModel(f"direct greedy capped at {_DIRECT_CAP} candidates, got {N}")
    lw = np.array([birkhoff_sum(system, potential, p, n) for p in pts])
    keep = _apply_filter(pts, n, segment_filter)
    if isinstance(system, CocycleToy):
        orbits = np.zeros((N, n, 1))
        for i, p in enumerate(pts):
            orbits[i, :, 0] = float(p) + np.arange(n)
        metric_kind = 1
        tie_keys = [np.array([float(p) for p in pts])]
    else:
        d = system.dim if isinstance(system, ToralAuto) else 1
        orbits = np.zeros((N, n, d))
        for i, p in enumerate(pts):
            cur = p
            for t in range(n):
                orbits[i, t, :] = np.atleast_1d(cur)
                if t + 1 < n:
                    cur = system.step(cur)
        metric_kind = 0
        tie_keys = [orbits[:, 0, j] for j in range(orbits.shape[2])]
    order = _order_from(lw, tie_keys, keep)
    adm, cov, extra = _kernels.greedy_direct(orbits, float(delta), order, metric_kind)
    adm_h, cov_h, extra_h = _kernels.greedy_direct(orbits, float(delta) / 2.0,
                                                   order, metric_kind)
    return GreedyData(n=n, delta=delta, points=list(pts), log_weights=lw,
                      admitted=adm.astype(bool), covers_extra=extra.astype(bool),
                      admitted_half=adm_h.astype(bool),
                      covers_extra_half=extra_h.astype(bool),
                      strategy="direct", meta=dict(gres.meta))
