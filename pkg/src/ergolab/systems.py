"""Model dynamical systems and their geometric data.

Four exactly-solvable families:

* ``FullShift(k)`` -- two-sided full shift on k symbols, points are finite
  symbol windows.
* ``ExpandingCircle(k)`` -- x -> k*x mod 1 on the circle (non-invertible).
* ``ToralAuto(A)`` -- hyperbolic automorphism of the d-torus given by an
  integer matrix with |det A| = 1; carries an eigenvector bundle splitting.
* ``CocycleToy`` -- translation t -> t+1 on an interval of the line with
  prescribed observable profiles, used to exercise orbit-decomposition
  logic against arbitrary sequences.

All systems are immutable after construction and safe to share across
workers.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    InsufficientWindow,
    InvalidModel,
    NoSmoothStructure,
    UnsupportedDirection,
    VariantMismatch,
)

FORWARD = "forward"
BACKWARD = "backward"

_DATA_DIR = Path(__file__).parent / "data"


def _check_direction(direction):
    if direction not in (FORWARD, BACKWARD):
        raise ValueError(f"direction must be 'forward' or 'backward', got {direction!r}")


# ---------------------------------------------------------------------------
# Points
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ShiftPoint:
    """Finite window of a two-sided symbol sequence.

    ``symbols[i]`` is the symbol at absolute index ``offset + i``.  Reading
    outside the window raises InsufficientWindow instead of inventing
    symbols.
    """

    symbols: tuple
    offset: int = 0

    @property
    def lo(self):
        return self.offset

    @property
    def hi(self):
        """One past the last represented index."""
        return self.offset + len(self.symbols)

    def at(self, j):
        if not (self.lo <= j < self.hi):
            raise InsufficientWindow(
                f"index {j} outside represented window [{self.lo}, {self.hi})")
        return self.symbols[j - self.offset]

    def covers(self, j):
        return self.lo <= j < self.hi

    def shifted(self, steps):
        """The point sigma^steps(x); represented window moves accordingly."""
        return ShiftPoint(self.symbols, self.offset - steps)


def torus_point(coords):
    """Reduce coordinates mod 1 into [0, 1)^d."""
    x = np.asarray(coords, dtype=np.float64)
    return x - np.floor(x)


# ---------------------------------------------------------------------------
# Bundle splittings
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Bundle:
    label: str
    direction: np.ndarray
    log_rate: float


@dataclass(frozen=True)
class BundleSplitting:
    """Ordered list of one-dimensional bundles, log-rates strictly increasing."""

    bundles: tuple

    def __post_init__(self):
        rates = [b.log_rate for b in self.bundles]
        if any(r2 - r1 <= 0 for r1, r2 in zip(rates, rates[1:])):
            raise InvalidModel(f"bundle log-rates not strictly increasing: {rates}")
        labels = [b.label for b in self.bundles]
        if "s" in labels and self.by_label("s").log_rate >= 0:
            raise InvalidModel("s-bundle must have negative log-rate")
        if "u" in labels and self.by_label("u").log_rate <= 0:
            raise InvalidModel("u-bundle must have positive log-rate")

    def labels(self):
        return [b.label for b in self.bundles]

    def by_label(self, label):
        for b in self.bundles:
            if b.label == label:
                return b
        raise NoSmoothStructure(f"unknown bundle label {label!r}")

    def central_labels(self):
        return [b.label for b in self.bundles if b.label.startswith("c")]

    def basis_matrix(self):
        """Columns are the bundle directions, in listed order."""
        return np.column_stack([b.direction for b in self.bundles])


def _splitting_from_matrix(A, allow_nonhyperbolic=False):
    """Eigen splitting of an integer matrix, labels assigned by log-rate order."""
    w, V = np.linalg.eig(A)
    if np.max(np.abs(w.imag)) > 1e-10:
        raise InvalidModel("matrix has non-real eigenvalues; no 1-d eigen splitting")
    lam = w.real
    if not allow_nonhyperbolic and np.any(np.abs(np.abs(lam) - 1.0) < 1e-10):
        raise InvalidModel("matrix has an eigenvalue on the unit circle (not hyperbolic)")
    rates = np.log(np.abs(lam))
    order = np.argsort(rates)
    d = A.shape[0]
    bundles = []
    n_central = d - 2
    for pos, i in enumerate(order):
        v = V[:, i].real
        v = v / np.linalg.norm(v)
        # canonical sign: first nonzero component positive
        nz = np.nonzero(np.abs(v) > 1e-12)[0][0]
        if v[nz] < 0:
            v = -v
        resid = np.linalg.norm(A @ v - lam[i] * v)
        if resid > 1e-10:
            raise InvalidModel(f"eigenvector residual {resid:.2e} exceeds 1e-10")
        if pos == 0:
            label = "s"
        elif pos == d - 1:
            label = "u"
        else:
            label = f"c{pos}"
        bundles.append(Bundle(label, v, float(rates[i])))
    del n_central
    return BundleSplitting(tuple(bundles))


# ---------------------------------------------------------------------------
# System models
# ---------------------------------------------------------------------------

class SystemModel:
    """Base class; concrete variants implement step/distance and metadata."""

    variant = "abstract"
    invertible = True
    ambient_diameter = 1.0
    splitting = None

    def step(self, p, direction=FORWARD):
        raise NotImplementedError

    def distance(self, p, q):
        raise NotImplementedError

    def bundle_log_norm(self, p, label, direction=FORWARD):
        raise NoSmoothStructure(f"{self.variant} carries no smooth splitting")

    def orbit(self, p, n, direction=FORWARD):
        """The n points p, f p, ..., f^{n-1} p (or backward)."""
        pts = []
        cur = p
        for _ in range(n):
            pts.append(cur)
            cur = self.step(cur, direction)
        return pts

    def central_labels(self):
        if self.splitting is None:
            raise NoSmoothStructure(f"{self.variant} carries no smooth splitting")
        return self.splitting.central_labels()

    def _require_same_variant(self, other_desc):
        raise VariantMismatch(other_desc)


class FullShift(SystemModel):
    """Two-sided full shift on k symbols with metric 2^{-m}, m the smallest
    |index| of disagreement."""

    variant = "full_shift"
    invertible = True
    ambient_diameter = 1.0

    def __init__(self, k):
        if k < 2:
            raise InvalidModel("full shift needs at least 2 symbols")
        self.k = int(k)

    def point(self, symbols, offset=0):
        syms = tuple(int(s) for s in symbols)
        if any(not (0 <= s < self.k) for s in syms):
            raise InvalidModel(f"symbols must lie in [0, {self.k})")
        return ShiftPoint(syms, offset)

    def step(self, p, direction=FORWARD):
        _check_direction(direction)
        if not isinstance(p, ShiftPoint):
            raise VariantMismatch("full shift expects ShiftPoint")
        return p.shifted(1 if direction == FORWARD else -1)

    def distance(self, p, q):
        """2^{-m}, m the smallest |index| of disagreement on the common
        represented window; agreement there gives 0 (the infimum over
        window extensions, so finite windows act as cylinder classes)."""
        if not (isinstance(p, ShiftPoint) and isinstance(q, ShiftPoint)):
            raise VariantMismatch("full shift expects ShiftPoint operands")
        lo = max(p.lo, q.lo)
        hi = min(p.hi, q.hi)
        if lo >= hi:
            raise InsufficientWindow("windows do not overlap; distance undetermined")
        # scan |j| = 0, 1, ... within the common window
        reach = max(abs(lo), abs(hi - 1))
        for m in range(reach + 1):
            for j in (m, -m) if m else (0,):
                if lo <= j < hi and p.at(j) != q.at(j):
                    return 2.0 ** (-m)
        return 0.0

    def random_point(self, rng, lo, hi):
        syms = tuple(int(s) for s in rng.integers(0, self.k, size=hi - lo))
        return ShiftPoint(syms, lo)


class ExpandingCircle(SystemModel):
    """x -> k x mod 1 on the circle. Forward-only."""

    variant = "expanding_circle"
    invertible = False
    ambient_diameter = 0.5

    def __init__(self, k):
        if k < 2:
            raise InvalidModel("expanding circle map needs degree >= 2")
        self.k = int(k)

    def step(self, p, direction=FORWARD):
        _check_direction(direction)
        if direction == BACKWARD:
            raise UnsupportedDirection("expanding circle map is not invertible")
        return (self.k * float(p)) % 1.0

    def distance(self, p, q):
        w = abs(float(p) - float(q)) % 1.0
        return min(w, 1.0 - w)


class ToralAuto(SystemModel):
    """Automorphism of T^d from an integer matrix with |det| = 1."""

    variant = "toral_auto"
    invertible = True

    def __init__(self, matrix, xi=None, allow_nonhyperbolic=False):
        A = np.asarray(matrix, dtype=np.int64)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise InvalidModel("matrix must be square")
        det = int(round(np.linalg.det(A.astype(np.float64))))
        if abs(det) != 1:
            raise InvalidModel(f"|det A| must be 1, got {det}")
        self.matrix = A
        self.matrix_f = A.astype(np.float64)
        Ainv = np.linalg.inv(self.matrix_f)
        self.inv_matrix = np.rint(Ainv).astype(np.int64)
        if not np.allclose(self.matrix_f @ self.inv_matrix, np.eye(A.shape[0]), atol=1e-9):
            raise InvalidModel("integer inverse check failed")
        self.inv_matrix_f = self.inv_matrix.astype(np.float64)
        self.dim = A.shape[0]
        self.allow_nonhyperbolic = bool(allow_nonhyperbolic)
        self.splitting = _splitting_from_matrix(self.matrix_f, allow_nonhyperbolic)
        self.ambient_diameter = 0.5 * math.sqrt(self.dim)
        contraction = max(
            math.exp(self.splitting.bundles[0].log_rate),
            math.exp(-self.splitting.bundles[-1].log_rate),
        )
        if xi is None:
            xi = min(0.999, contraction * 1.05)
        if not (contraction <= xi < 1.0) and not allow_nonhyperbolic:
            raise InvalidModel(
                f"xi={xi} must dominate the strong bundles (need >= {contraction:.6f}, < 1)")
        self.xi = float(xi)

    def point(self, coords):
        x = torus_point(coords)
        if x.shape != (self.dim,):
            raise VariantMismatch(f"expected point in T^{self.dim}")
        return x

    def step(self, p, direction=FORWARD):
        _check_direction(direction)
        M = self.matrix_f if direction == FORWARD else self.inv_matrix_f
        y = M @ np.asarray(p, dtype=np.float64)
        return y - np.floor(y)

    def distance(self, p, q):
        w = (np.asarray(p, dtype=np.float64) - np.asarray(q, dtype=np.float64)) % 1.0
        w = np.minimum(w, 1.0 - w)
        return float(np.linalg.norm(w))

    def bundle_log_norm(self, p, label, direction=FORWARD):
        _check_direction(direction)
        rate = self.splitting.by_label(label).log_rate
        return rate if direction == FORWARD else -rate

    def inverse(self):
        """The system given by A^{-1}, with labels reassigned by rate order."""
        return ToralAuto(self.inv_matrix, xi=self.xi,
                         allow_nonhyperbolic=self.allow_nonhyperbolic)

    def eigen_coords(self, w):
        """Coordinates of an R^d vector in the bundle basis."""
        return np.linalg.solve(self.splitting.basis_matrix(), np.asarray(w, dtype=np.float64))

    def from_eigen_coords(self, u):
        return self.splitting.basis_matrix() @ np.asarray(u, dtype=np.float64)


@dataclass(frozen=True)
class Profile:
    """Real profile over an integer-indexed window, interpolated on the line."""

    values: tuple
    lo: int = 0
    interp: str = "floor"  # or "linear"

    @property
    def hi(self):
        return self.lo + len(self.values)

    def eval(self, t):
        t = float(t)
        i = math.floor(t)
        if self.interp == "floor":
            if not (self.lo <= i < self.hi):
                raise InsufficientWindow(f"profile index {i} outside [{self.lo}, {self.hi})")
            return self.values[i - self.lo]
        frac = t - i
        if frac == 0.0:
            if not (self.lo <= i < self.hi):
                raise InsufficientWindow(f"profile index {i} outside [{self.lo}, {self.hi})")
            return self.values[i - self.lo]
        if not (self.lo <= i and i + 1 < self.hi):
            raise InsufficientWindow(
                f"profile interpolation at {t} needs [{i}, {i + 1}] inside [{self.lo}, {self.hi})")
        a = self.values[i - self.lo]
        b = self.values[i + 1 - self.lo]
        return a + frac * (b - a)


class CocycleToy(SystemModel):
    """Translation t -> t + 1 on the line with prescribed observable profiles.

    ``forward[label]`` plays the role of the forward bundle log-norm along the
    orbit, ``backward[label]`` the backward one.  Exists so decomposition
    logic can be tested against arbitrary sequences.
    """

    variant = "cocycle_toy"
    invertible = True
    splitting = None

    def __init__(self, forward, backward, diameter=None):
        self.forward = dict(forward)
        self.backward = dict(backward)
        if set(self.forward) != set(self.backward):
            raise InvalidModel("forward/backward profile labels must match")
        if not self.forward:
            raise InvalidModel("cocycle toy needs at least one labelled profile")
        spans = [p.hi - p.lo for p in self.forward.values()]
        self.ambient_diameter = float(diameter if diameter is not None else max(spans))

    def step(self, p, direction=FORWARD):
        _check_direction(direction)
        return float(p) + (1.0 if direction == FORWARD else -1.0)

    def distance(self, p, q):
        return abs(float(p) - float(q))

    def bundle_log_norm(self, p, label, direction=FORWARD):
        _check_direction(direction)
        table = self.forward if direction == FORWARD else self.backward
        if label not in table:
            raise NoSmoothStructure(f"unknown profile label {label!r}")
        return table[label].eval(p)

    def central_labels(self):
        return sorted(self.forward)


# ---------------------------------------------------------------------------
# Spec operations (module-level, per the external interface)
# ---------------------------------------------------------------------------

def step(system, p, direction=FORWARD):
    return system.step(p, direction)


def distance(system, p, q):
    return system.distance(p, q)


def bundle_log_norm(system, p, label, direction=FORWARD):
    return system.bundle_log_norm(p, label, direction)


# ---------------------------------------------------------------------------
# JSON loading
# ---------------------------------------------------------------------------

def system_from_spec(spec):
    """Build a system from a JSON-style dict: {"variant": ..., ...}."""
    variant = spec.get("variant")
    if variant == "full_shift":
        return FullShift(spec["k"])
    if variant == "expanding_circle":
        return ExpandingCircle(spec["k"])
    if variant == "toral_auto":
        return ToralAuto(
            spec["matrix"],
            xi=spec.get("xi"),
            allow_nonhyperbolic=spec.get("allow_nonhyperbolic", False),
        )
    if variant == "cocycle_toy":
        def build(profs):
            return {
                label: Profile(tuple(float(v) for v in p["values"]),
                               int(p.get("lo", 0)), p.get("interp", "floor"))
                for label, p in profs.items()
            }
        return CocycleToy(build(spec["forward"]), build(spec["backward"]),
                          diameter=spec.get("diameter"))
    raise InvalidModel(f"unknown system variant {variant!r}")


def load_system(path):
    with open(path) as fh:
        return system_from_spec(json.load(fh))


def builtin_system(name):
    """Load one of the shipped example systems by name."""
    path = _DATA_DIR / f"{name}.json"
    if not path.exists():
        names = sorted(p.stem for p in _DATA_DIR.glob("*.json"))
        raise InvalidModel(f"unknown builtin system {name!r}; available: {names}")
    return load_system(path)


def builtin_system_names():
    return sorted(p.stem for p in _DATA_DIR.glob("*.json"))
