import numpy as np
import pytest
from ergolab.errors import NoSmoothStructure
from ergolab.foliation import (
    eps_minimality_check,
    minimal_radius_search,
    stable_leaf_disk,
)


def test_leaf_disk_radius_zero(cat):
    disk = stable_leaf_disk(cat, cat.point([0.3, 0.4]), 0.0, 5)
    assert len(disk) == 1
    assert np.allclose(disk.samples[0], [0.3, 0.4])


def test_leaf_disk_slope_matches_eigenvector(cat):
    # the stable line of the golden cat map has slope -(sqrt(5)+1)/2 in
    # (x1, x2), i.e. direction proportional to (1, -(1+sqrt 5)/2); compare
    # against the eigen oracle
    disk = stable_leaf_disk(cat, cat.point([0.0, 0.0]), 0.4, 21)
    w, V = np.linalg.eig(cat.matrix_f)
    vs = V[:, np.argmin(np.abs(w))].real
    vs = vs / np.linalg.norm(vs)
    mid = disk.samples[10]
    nxt = disk.samples[11]
    step = ((nxt - mid) + 0.5) % 1.0 - 0.5   # mod-1 centered difference
    step = step / np.linalg.norm(step)
    assert min(np.linalg.norm(step - vs), np.linalg.norm(step + vs)) < 1e-9


def test_leaf_disk_two_samples(cat):
    disk = stable_leaf_disk(cat, cat.point([0.2, 0.9]), 3.0, 2)
    assert len(disk) == 2


def test_leaf_disk_needs_structure(shift2):
    with pytest.raises(NoSmoothStructure):
        stable_leaf_disk(shift2, shift2.point([0, 1]), 1.0, 5)


def test_minimality_trivial_at_huge_eps(cat):
    rep = eps_minimality_check(cat, 0.5, 0.9, 16, [cat.point([0.1, 0.1])])
    assert rep.dense


def test_minimality_radius_search_cat(cat):
    seeds = [cat.point([0.15, 0.35]), cat.point([0.6, 0.8])]
    R0, rep = minimal_radius_search(cat, 0.05, 40, seeds)
    assert R0 is not None
    assert rep.dense and rep.worst_gap < 0.05
    # worst gap shrinks (weakly) when the disk grows
    bigger = eps_minimality_check(cat, 2 * R0, 0.05, 40, seeds)
    assert bigger.worst_gap <= rep.worst_gap + 1e-12


def test_minimality_monotone_in_eps(cat):
    seeds = [cat.point([0.15, 0.35])]
    # fixed sample spacing so the two runs use identical leaf samples
    rep = eps_minimality_check(cat, 20.0, 0.05, 32, seeds,
                               sample_spacing=0.01)
    rep2 = eps_minimality_check(cat, 20.0, 0.1, 32, seeds,
                                sample_spacing=0.01)
    if rep.dense:
        assert rep2.dense
    assert rep.worst_gap == rep2.worst_gap  # same samples, same gap


def test_rational_direction_control_never_dense(cat):
    seeds = [cat.point([0.15, 0.35])]
    for R in (10.0, 100.0, 1000.0):
        rep = eps_minimality_check(cat, R, 0.05, 32, seeds,
                                   direction=[1.0, 0.0])
        assert not rep.dense
        assert rep.worst_gap > 0.4  # half the torus away from a closed leaf
