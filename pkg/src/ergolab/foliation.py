"""Minimality diagnostics for stable leaves of linear toral models.

A stable leaf disk is an affine segment through a point in the stable
eigendirection; minimality asks every target-grid point to have a leaf
sample within eps.  The threshold radius R0(eps) is located by doubling
followed by bisection.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .errors import InvalidModel, NoSmoothStructure
from .systems import ToralAuto


@dataclass
class LeafDisk:
    center: np.ndarray
    direction_label: str
    radius: float
    samples: np.ndarray       # (m, d) points on the leaf segment, mod 1

    def __len__(self):
        return len(self.samples)


def stable_leaf_disk(system, x, R, sample_count, direction=None):
    """Uniform samples on {x + t v : |t| <= R} mod 1, v the stable
    eigendirection (or an explicit override direction)."""
    if not isinstance(system, ToralAuto):
        raise NoSmoothStructure("leaf disks need a toral automorphism")
    if R < 0:
        raise InvalidModel("radius must be >= 0")
    if direction is None:
        v = system.splitting.by_label("s").direction
        label = "s"
    else:
        v = np.asarray(direction, dtype=np.float64)
        v = v / np.linalg.norm(v)
        label = "override"
    x = np.asarray(x, dtype=np.float64)
    if R == 0 or sample_count <= 1:
        pts = x[None, :] % 1.0
        ts = np.zeros(1)
    else:
        ts = np.linspace(-R, R, sample_count)
        pts = (x[None, :] + ts[:, None] * v[None, :]) % 1.0
    # residual: each sample must equal x + t v mod 1 at its parameter
    recon = (x[None, :] + ts[:, None] * v[None, :]) % 1.0
    resid = np.abs(pts - recon)
    resid = np.minimum(resid, 1.0 - resid)
    if float(resid.max()) > 1e-10:
        raise InvalidModel("leaf samples off the affine line")
    return LeafDisk(center=x % 1.0, direction_label=label, radius=float(R),
                    samples=pts)


@dataclass
class MinimalityReport:
    dense: bool
    worst_gap: float
    eps: float
    R: float
    per_seed: list = field(default_factory=list)

    def to_dict(self):
        return {"dense": self.dense, "worst_gap": self.worst_gap,
                "eps": self.eps, "R": self.R, "per_seed": self.per_seed}


def _target_grid(system, resolution):
    d = system.dim
    if resolution ** d > 2_000_000:
        raise InvalidModel("target grid too large")
    axes = [np.arange(resolution) / resolution for _ in range(d)]
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)


def eps_minimality_check(system, R, eps, target_resolution, seed_points,
                         sample_spacing=None, direction=None):
    """Every target-grid point must have a leaf sample within eps, for the
    leaf disk of radius R through each seed."""
    if eps <= 0:
        raise InvalidModel("eps must be positive")
    targets = _target_grid(system, target_resolution)
    if sample_spacing is None:
        sample_spacing = eps / 3.0
    count = max(3, int(math.ceil(2 * R / sample_spacing)) + 1)
    per_seed = []
    worst = 0.0
    dense = True
    for x in seed_points:
        disk = stable_leaf_disk(system, x, R, count, direction=direction)
        tree = cKDTree(disk.samples, boxsize=1.0)
        dists, _ = tree.query(targets, k=1)
        gap = float(dists.max())
        per_seed.append({"gap": gap, "dense": gap < eps})
        worst = max(worst, gap)
        dense = dense and gap < eps
    return MinimalityReport(dense=dense, worst_gap=worst, eps=eps, R=R,
                            per_seed=per_seed)


def minimal_radius_search(system, eps, target_resolution, seed_points,
                          R_start=1.0, R_cap=4096.0, bisection_steps=6,
                          direction=None):
    """Doubling-then-bisection search for the smallest radius whose leaf
    disks are eps-dense; returns (R0, report_at_R0) or (None, last_report)
    when the cap is reached without density."""
    R = R_start
    report = eps_minimality_check(system, R, eps, target_resolution,
                                  seed_points, direction=direction)
    while not report.dense:
        R *= 2.0
        if R > R_cap:
            return None, report
        report = eps_minimality_check(system, R, eps, target_resolution,
                                      seed_points, direction=direction)
    lo, hi = R / 2.0, R
    best = report
    for _ in range(bisection_steps):
        mid = 0.5 * (lo + hi)
        rep = eps_minimality_check(system, mid, eps, target_resolution,
                                   seed_points, direction=direction)
        if rep.dense:
            hi, best = mid, rep
        else:
            lo = mid
    return hi, best
