import math

import numpy as np
import pytest

import ergolab as eg
from ergolab.errors import InvalidModel, UnsupportedDirection
from ergolab.grids import GridSpec
from ergolab.potentials import certify_holder
from ergolab.systems import BACKWARD, FORWARD


def test_birkhoff_zero_and_constant(cat):
    x = cat.point([0.2, 0.6])
    assert eg.birkhoff_sum(cat, eg.zero_potential(), x, 10) == 0.0
    c = 0.37
    assert abs(eg.birkhoff_sum(cat, eg.constant_potential(c), x, 5) - 5 * c) < 1e-12


def test_birkhoff_of_unstable_log_norm(cat, cat_rate):
    x = cat.point([0.11, 0.83])
    obs = lambda p: cat.bundle_log_norm(p, "u")
    s = eg.birkhoff_sum(cat, obs, x, 7)
    assert abs(s - 7 * cat_rate) < 1e-12


def test_birkhoff_n_zero(cat):
    assert eg.birkhoff_sum(cat, eg.trig_potential(0.3), cat.point([0.4, 0.1]), 0) == 0.0


def test_backward_needs_invertible(doubling):
    with pytest.raises(UnsupportedDirection):
        eg.birkhoff_sum(doubling, eg.zero_potential(), 0.3, 3, BACKWARD)


def test_cocycle_additivity(cat):
    pot = eg.trig_potential(0.25, axis=1, frequency=2)
    rng = np.random.default_rng(4)
    for _ in range(1000):
        x = cat.point(rng.random(2))
        m, n = int(rng.integers(0, 12)), int(rng.integers(0, 12))
        fm = x
        for _ in range(m):
            fm = cat.step(fm)
        lhs = eg.birkhoff_sum(cat, pot, x, m + n)
        rhs = eg.birkhoff_sum(cat, pot, x, m) + eg.birkhoff_sum(cat, pot, fm, n)
        assert abs(lhs - rhs) < 1e-10


def test_backward_equals_forward_of_inverse(cat):
    pot = eg.trig_potential(0.2)
    inv = cat.inverse()
    rng = np.random.default_rng(5)
    for _ in range(50):
        x = cat.point(rng.random(2))
        n = int(rng.integers(1, 15))
        bwd = eg.birkhoff_sum(cat, pot, x, n, BACKWARD)
        fwd_inv = eg.birkhoff_sum(inv, pot, x, n, FORWARD)
        assert abs(bwd - fwd_inv) < 1e-12


def test_oscillation_examples(cat, shift2):
    sup, inf = eg.oscillation(eg.zero_potential(), cat, GridSpec.uniform(8))
    assert (sup, inf) == (0.0, 0.0)
    pot = eg.trig_potential(0.1)
    sup, inf = eg.oscillation(pot, cat, GridSpec.uniform(256))
    assert abs(sup - 0.1) < 1e-3 and abs(inf + 0.1) < 1e-3
    lc = eg.locally_constant_potential([0.2, 0.5], k=2)
    words = [shift2.point([a], offset=0) for a in (0, 1)]
    sup, inf = eg.oscillation(lc, shift2, words)
    assert (sup, inf) == (0.5, 0.2)


def test_oscillation_respects_declared_bounds(cat):
    pot = eg.trig_potential(0.1)
    sup, inf = eg.oscillation(pot, cat, GridSpec.uniform(7))
    assert pot.inf_bound <= inf <= sup <= pot.sup_bound


def test_holder_certificates(cat, shift2, doubling):
    assert certify_holder(eg.trig_potential(0.3, axis=0), cat, pairs=2000) \
        <= eg.trig_potential(0.3).holder_Q * 1.01
    certify_holder(eg.locally_constant_potential([0.1, 0.4, -0.2, 0.0], k=2),
                   shift2, pairs=2000)
    certify_holder(eg.tent_potential(), doubling, pairs=2000)
    certify_holder(eg.zero_potential(), cat, pairs=500)


def test_holder_certificate_rejects_understated_constant(cat):
    good = eg.trig_potential(0.5)
    bad = eg.Potential("trig", good.params, holder_Q=0.05, holder_alpha=1.0,
                       sup_bound=0.5, inf_bound=-0.5, evaluator=good.evaluator)
    with pytest.raises(InvalidModel):
        certify_holder(bad, cat, pairs=2000)


def test_locally_constant_validation():
    with pytest.raises(InvalidModel):
        eg.locally_constant_potential([0.1, 0.2, 0.3], k=2)  # not k^m values
    pot = eg.locally_constant_potential([0.1, 0.2, 0.3, 0.4], k=2)
    assert pot.params["depth"] == 2


def test_potential_from_spec_roundtrip():
    spec = {"kind": "trig", "amplitude": 0.2, "axis": 1, "frequency": 3}
    pot = eg.potential_from_spec(spec)
    assert pot.kind == "trig" and pot.holder_Q == pytest.approx(0.2 * 2 * math.pi * 3)
    with pytest.raises(InvalidModel):
        eg.potential_from_spec({"kind": "mystery"})
