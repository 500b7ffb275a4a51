"""Candidate grids for separated-set construction and sampling.

Torus grids are lattices (uniform or eigen-aligned); lattice structure is
exposed so the separated-set builder can reason about candidate differences.
Shift grids enumerate cylinders over the free window [0, n) with a canonical
zero padding wide enough to make every Bowen-distance evaluation exact.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidModel
from .systems import CocycleToy, ExpandingCircle, FullShift, ShiftPoint, ToralAuto


@dataclass
class LatticeInfo:
    """Lattice candidates: point i is frac(offset + gen @ kcoords[i])."""

    gen: np.ndarray        # (d, m) generator matrix, columns are lattice steps
    offset: np.ndarray     # (d,)
    kcoords: np.ndarray    # (N, m) integer coordinates, all >= 0
    kshape: tuple          # per-axis extents (k in [0, kshape[j]))

    def points(self):
        P = self.offset[None, :] + self.kcoords.astype(np.float64) @ self.gen.T
        return P - np.floor(P)


@dataclass
class GridResult:
    points: list
    lattice: LatticeInfo = None
    shift_words: np.ndarray = None   # (N, window) int array for shift grids
    shift_window: tuple = None       # (lo, hi) absolute indices
    warning: str = ""
    meta: dict = field(default_factory=dict)


@dataclass(frozen=True)
class GridSpec:
    """Declarative grid description; JSON friendly."""

    kind: str
    params: dict = field(default_factory=dict)

    @staticmethod
    def uniform(resolution):
        return GridSpec("uniform", {"resolution": int(resolution)})

    @staticmethod
    def eigen_box(span=1.0, contracting_span=1.0, safety=0.9,
                  offset_seed=None, offset=None):
        return GridSpec("eigen_box", {
            "span": float(span), "contracting_span": float(contracting_span),
            "safety": float(safety), "offset_seed": offset_seed,
            "offset": list(offset) if offset is not None else None})

    @staticmethod
    def cylinders(pad_extra=2):
        return GridSpec("cylinders", {"pad_extra": int(pad_extra)})

    @staticmethod
    def interval(lo, hi, count):
        return GridSpec("interval", {"lo": float(lo), "hi": float(hi),
                                     "count": int(count)})

    @staticmethod
    def explicit(points):
        return GridSpec("explicit", {"points": list(points)})

    @staticmethod
    def from_spec(spec):
        if isinstance(spec, GridSpec):
            return spec
        spec = dict(spec)
        kind = spec.pop("kind")
        return GridSpec(kind, spec)

    def generate(self, system, n=None, delta=None):
        if self.kind == "uniform":
            return _uniform_grid(system, self.params["resolution"])
        if self.kind == "eigen_box":
            return _eigen_box_grid(system, n, delta, **self.params)
        if self.kind == "cylinders":
            return _cylinder_grid(system, n, delta, **self.params)
        if self.kind == "interval":
            p = self.params
            pts = list(np.linspace(p["lo"], p["hi"], p["count"]))
            return GridResult(points=pts)
        if self.kind == "explicit":
            return GridResult(points=list(self.params["points"]))
        raise InvalidModel(f"unknown grid kind {self.kind!r}")

    def describe(self):
        return {"kind": self.kind, **{k: v for k, v in self.params.items()
                                      if k != "points"}}


def _uniform_grid(system, resolution):
    if isinstance(system, ToralAuto):
        d = system.dim
        if resolution ** d > 4_000_000:
            raise InvalidModel(f"uniform grid {resolution}^{d} too large")
        axes = [np.arange(resolution) for _ in range(d)]
        K = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
        info = LatticeInfo(
            gen=np.eye(d) / resolution,
            offset=np.zeros(d),
            kcoords=K.astype(np.int64),
            kshape=(resolution,) * d,
        )
        return GridResult(points=list(info.points()), lattice=info)
    if isinstance(system, ExpandingCircle):
        K = np.arange(resolution, dtype=np.int64).reshape(-1, 1)
        info = LatticeInfo(
            gen=np.array([[1.0 / resolution]]),
            offset=np.zeros(1),
            kcoords=K,
            kshape=(resolution,),
        )
        pts = [float(p[0]) for p in info.points()]
        return GridResult(points=pts, lattice=info)
    if isinstance(system, CocycleToy):
        pts = list(np.linspace(0.0, system.ambient_diameter, resolution))
        return GridResult(points=pts)
    raise InvalidModel(f"uniform grid unsupported for {system.variant}")


def _eigen_box_grid(system, n, delta, span=1.0, contracting_span=1.0,
                    safety=0.9, offset_seed=None, offset=None):
    """Anisotropic lattice aligned with the eigen splitting.

    Spacing along each bundle scales like delta * rate^{-(n-1)} for expanding
    bundles and delta for the rest, so the lattice resolves Bowen balls at
    horizon n without wasting candidates.
    """
    if not isinstance(system, ToralAuto):
        raise InvalidModel("eigen_box grid requires a toral automorphism")
    if n is None or delta is None:
        raise InvalidModel("eigen_box grid needs (n, delta) context")
    V = system.splitting.basis_matrix()
    rates = np.array([b.log_rate for b in system.splitting.bundles])
    spacings = safety * delta * np.minimum(1.0, np.exp(-rates * max(n - 1, 0)))
    spans = np.where(rates > 0, span, contracting_span)
    counts = np.maximum(1, np.ceil(spans / spacings).astype(np.int64))
    total = int(np.prod(counts.astype(np.float64)))
    if total > 30_000_000:
        raise InvalidModel(f"eigen_box grid would have {total} candidates")
    axes = [np.arange(c) for c in counts]
    K = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(counts))
    gen = V * spacings[None, :]
    if offset is not None:
        base = np.asarray(offset, dtype=np.float64) % 1.0
    elif offset_seed is not None:
        base = np.random.default_rng(offset_seed).random(system.dim)
    else:
        base = np.zeros(system.dim)
    info = LatticeInfo(gen=gen, offset=base, kcoords=K.astype(np.int64),
                       kshape=tuple(int(c) for c in counts))
    return GridResult(points=None, lattice=info,
                      meta={"spacings": spacings.tolist(), "counts": counts.tolist()})


def _cylinder_grid(system, n, delta, pad_extra=2):
    """All k^n cylinders over [0, n), zero padded to make d_n exact."""
    if not isinstance(system, FullShift):
        raise InvalidModel("cylinder grid requires a full shift")
    if n is None or delta is None:
        raise InvalidModel("cylinder grid needs (n, delta) context")
    k = system.k
    if k ** n > 2_000_000:
        raise InvalidModel(f"cylinder grid {k}^{n} too large")
    pad = max(int(math.ceil(math.log2(1.0 / delta))) + 1 if delta < 1.0 else 1,
              pad_extra, 6)
    lo, hi = -pad, n + pad
    words = np.zeros((k ** n, hi - lo), dtype=np.int8)
    free = _all_words(k, n)
    words[:, pad:pad + n] = free
    pts = [ShiftPoint(tuple(int(s) for s in row), lo) for row in words]
    return GridResult(points=pts, shift_words=words, shift_window=(lo, hi),
                      meta={"pad": pad})


def _all_words(k, n):
    """(k^n, n) array of all base-k words, lexicographic order."""
    out = np.zeros((k ** n, n), dtype=np.int8)
    for j in range(n):
        block = k ** (n - 1 - j)
        out[:, j] = (np.arange(k ** n) // block) % k
    return out
