import math

import numpy as np
import pytest

import ergolab as eg
from ergolab.decomposition import (
    brute_force_decompose,
    classify,
    confirm_triple,
    continuity_modulus,
    decompose,
    g_shrink_check,
)
from ergolab.errors import InvalidModel
from ergolab.hyperbolicity import central_observables
from ergolab.systems import Profile


def random_toy(rng, n, scale=1.0):
    """CocycleToy with independent random forward/backward profiles."""
    fwd = Profile(values=tuple(rng.uniform(-scale, scale, size=n + 1)), lo=0)
    bwd = Profile(values=tuple(rng.uniform(-scale, scale, size=n + 1)), lo=0)
    toy = eg.CocycleToy({"c1": fwd, "c2": fwd}, {"c1": bwd, "c2": bwd})
    return toy, central_observables(toy, 1)


def test_t4_small_r_everything_core(t4, t4_rates):
    obs = central_observables(t4, 1)
    r_small = 0.5 * min(-math.log(t4_rates[1]), math.log(t4_rates[2]))
    x = t4.point([0.31, 0.62, 0.13, 0.84])
    for n in (0, 1, 5, 17):
        triple = decompose(t4, obs, x, n, r_small)
        assert triple.as_tuple() == (0, n, 0)
        flags = classify(t4, obs, x, n, r_small)
        if n >= 1:
            assert flags.in_G and not flags.in_P and not flags.in_S


def test_t4_large_r_all_prefix(t4, t4_rates):
    obs = central_observables(t4, 1)
    r_large = 1.2 * (-math.log(t4_rates[1]))
    x = t4.point([0.31, 0.62, 0.13, 0.84])
    triple = decompose(t4, obs, x, 9, r_large)
    assert triple.as_tuple() == (9, 0, 0)


def test_decompose_n_zero(t4):
    obs = central_observables(t4, 1)
    assert decompose(t4, obs, t4.point([0.1] * 4), 0, 0.3).as_tuple() == (0, 0, 0)


def test_classify_not_in_p_when_steep():
    r = 0.25
    prof = Profile(values=(-2 * r,) * 12, lo=0)
    toy = eg.CocycleToy({"c1": prof, "c2": prof}, {"c1": prof, "c2": prof})
    obs = central_observables(toy, 1)
    for n in (1, 4, 9):
        assert not classify(toy, obs, 0.0, n, r).in_P


def test_boundary_sums_are_inclusive():
    r = 0.3
    prof = Profile(values=(-r,) * 10, lo=0)
    toy = eg.CocycleToy({"c1": prof, "c2": prof}, {"c1": prof, "c2": prof})
    obs = central_observables(toy, 1)
    flags = classify(toy, obs, 0.0, 6, r)
    assert flags.in_P       # sums sit exactly at -rn, >= is inclusive
    assert decompose(toy, obs, 0.0, 6, r).as_tuple() == (6, 0, 0)


def test_trivial_decomposition_without_centrals(cat):
    triple = decompose(cat, None, cat.point([0.2, 0.4]), 7, 0.3)
    assert triple.as_tuple() == (0, 7, 0)
    flags = classify(cat, None, cat.point([0.2, 0.4]), 7, 0.3)
    assert flags.in_G and not flags.in_P and not flags.in_S


def test_bruteforce_equivalence_sample():
    rng = np.random.default_rng(21)
    for _ in range(500):
        n = int(rng.integers(0, 33))
        toy, obs = random_toy(rng, max(n, 1))
        r = float(rng.uniform(0.05, 1.0))
        fast = decompose(toy, obs, 0.0, n, r)
        slow = brute_force_decompose(toy, obs, 0.0, n, r)
        assert fast.as_tuple() == slow
        assert sum(fast.as_tuple()) == n
        assert confirm_triple(toy, obs, 0.0, n, r, fast)


def test_core_monotone_in_r():
    rng = np.random.default_rng(22)
    hits = 0
    for _ in range(300):
        n = int(rng.integers(1, 20))
        toy, obs = random_toy(rng, n)
        r_small = float(rng.uniform(0.05, 0.4))
        r_big = r_small + float(rng.uniform(0.05, 0.5))
        big = classify(toy, obs, 0.0, n, r_big)
        small = classify(toy, obs, 0.0, n, r_small)
        if big.in_G:
            hits += 1
            assert small.in_G  # G(r) subset of G(r') for r' < r
    assert hits > 0


def test_continuity_modulus_constant_observables(t4):
    obs = central_observables(t4, 1)
    res = continuity_modulus(t4, obs, r=0.3, pair_count=500, seed=1)
    assert res.certified
    assert res.eps_hat == t4.ambient_diameter  # top of the ladder


def test_continuity_modulus_lipschitz_bound():
    # piecewise linear profile with slope L = 2: eps_hat >= r / (2 L)
    r, L = 0.4, 2.0
    vals = tuple(((-1) ** i) * L / 2.0 for i in range(24))
    prof = Profile(values=vals, lo=0, interp="linear")
    toy = eg.CocycleToy({"c1": prof, "c2": prof}, {"c1": prof, "c2": prof},
                        diameter=8.0)
    obs = central_observables(toy, 1)
    res = continuity_modulus(toy, obs, r=r, pair_count=4000, seed=2)
    assert res.certified
    # the Lipschitz bound guarantees eps = r/(2L) works; the dyadic ladder
    # certifies at worst the next rung below it
    assert res.eps_hat >= r / (4 * L)
    assert res.certificate["worst_gap"] <= r / 2


def test_continuity_modulus_step_profile():
    # near-step: ramp of width w = 1/16 and height 1.0 inside a flat profile
    r = 0.4
    knots = np.zeros(33)
    knots[16] = 1.0  # linear interp gives a spike of width 1 around knot 16
    prof = Profile(values=tuple(knots), lo=0, interp="linear")
    flat = Profile(values=(0.0,) * 33, lo=0)
    toy = eg.CocycleToy({"c1": prof, "c2": flat}, {"c1": prof, "c2": flat},
                        diameter=16.0)
    obs = central_observables(toy, 1)
    res = continuity_modulus(toy, obs, r=r, pair_count=6000, seed=3)
    # pairs straddling the spike force the rung below the ramp width
    assert res.eps_hat < 1.0


def test_g_shrink_zero_violations_linear(t4):
    obs = central_observables(t4, 1)
    r = 0.3
    res = continuity_modulus(t4, obs, r=r, pair_count=300, seed=4)
    segments = [(t4.point([0.2, 0.4, 0.6, 0.8]), 12),
                (t4.point([0.9, 0.1, 0.5, 0.3]), 8)]
    rep = g_shrink_check(t4, obs, segments, r, min(res.eps_hat, 0.2), seed=5)
    assert rep.violations == 0
    assert rep.checked > 0


def test_g_shrink_requires_core_segments(t4, t4_rates):
    obs = central_observables(t4, 1)
    r_large = 1.2 * (-math.log(t4_rates[1]))
    with pytest.raises(InvalidModel):
        g_shrink_check(t4, obs, [(t4.point([0.1] * 4), 5)], r_large, 0.05)


def test_g_shrink_engineered_violation():
    """A spike one knot off the orbit: at the certified modulus the core
    shrinks cleanly, with the modulus deliberately doubled the sampled
    neighbours climb the spike and violate the half-rate core condition."""
    r = 0.4
    vals = np.full(10, -2.0 * r)
    vals[3] = -0.016          # spike at knot t = 1; x-orbit passes at 0.5
    fwd = Profile(values=tuple(vals), lo=-2, interp="linear")
    flat = Profile(values=tuple(np.full(10, -2.0 * r)), lo=-2,
                   interp="linear")
    toy = eg.CocycleToy({"c1": fwd, "c2": flat}, {"c1": flat, "c2": flat},
                        diameter=4.0)
    obs = central_observables(toy, 1)
    seg = (0.5, 6)
    assert classify(toy, obs, seg[0], seg[1], r).in_G
    res = continuity_modulus(toy, obs, r=r, pair_count=4000, seed=6)
    assert res.certified and res.eps_hat == pytest.approx(0.25)
    ok = g_shrink_check(toy, obs, [seg], r, res.eps_hat,
                        samples_per_segment=200, seed=7)
    assert ok.violations == 0
    bad = g_shrink_check(toy, obs, [seg], r, 2.0 * res.eps_hat,
                         samples_per_segment=200, seed=7)
    assert bad.violations >= 1
