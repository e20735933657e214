import math

import numpy as np
import pytest

from renyi2 import linalg
from renyi2.channel import (
    depolarizing_channel,
    identity_channel,
    random_channel,
    random_ppt_channel,
)
from renyi2.optimize import (
    additivity_gap,
    ascend,
    brute_force_max_purity,
    joint_max_purity,
    max_output_purity,
    output_purity,
    renyi_entropy,
)
from renyi2.replica import purity_operator
from renyi2.werner_holevo import WHParams, wh_channel


# ---------------------------------------------------------------- entropy

def test_renyi_entropy_values():
    assert renyi_entropy(np.eye(4) / 4, 2) == pytest.approx(math.log(4))
    assert renyi_entropy(np.eye(4) / 4, 2, base="2") == pytest.approx(2)
    assert renyi_entropy(np.diag([0.75, 0.25]), 2) == pytest.approx(-math.log(5 / 8))


@pytest.mark.parametrize("p", [0.5, 2, 3.7])
def test_renyi_entropy_of_pure_state_is_zero(p, rng):
    phi = linalg.random_unit_vector(3, rng)
    assert renyi_entropy(np.outer(phi, phi.conj()), p) == pytest.approx(0, abs=1e-12)


@pytest.mark.parametrize("bad", [np.eye(2), np.diag([1.5, -0.5])])
def test_renyi_entropy_rejects_non_density(bad):
    with pytest.raises(ValueError):
        renyi_entropy(bad, 2)


def test_renyi_entropy_rejects_order_one():
    with pytest.raises(ValueError):
        renyi_entropy(np.eye(2) / 2, 1)


# ---------------------------------------------------------------- single channel

def test_identity_and_depolarizing_anchor_values():
    r = max_output_purity(identity_channel(3), restarts=4)
    assert r.max_purity == pytest.approx(1, abs=1e-12)
    assert r.min_h2 == pytest.approx(0, abs=1e-12)
    for d in (2, 3, 4):
        r = max_output_purity(depolarizing_channel(d), restarts=4)
        assert r.max_purity == pytest.approx(1 / d, abs=1e-12)
        assert r.min_h2 == pytest.approx(math.log(d), abs=1e-12)


def test_wh_anchor():
    r = max_output_purity(wh_channel(WHParams(0.2, 0.05, 10)), restarts=8)
    assert r.max_purity == pytest.approx(0.15625, abs=1e-8)


def test_result_invariants(rng):
    ch = random_channel(3, rng, n_kraus=2)
    r = max_output_purity(ch, restarts=8, seed=3)
    assert r.converged
    assert r.min_h2 == pytest.approx(-math.log(r.max_purity), abs=1e-12)
    assert np.linalg.norm(r.argmax_state) == pytest.approx(1, abs=1e-12)
    assert output_purity(ch, r.argmax_state) == pytest.approx(r.max_purity, abs=1e-10)
    rho = np.outer(r.argmax_state, r.argmax_state.conj())
    assert purity_operator(ch).expectation(rho) == pytest.approx(r.max_purity, abs=1e-10)
    assert 1 / 3 - 1e-12 <= r.max_purity <= 1 + 1e-12
    assert r.restarts_used == 8
    base2 = max_output_purity(ch, restarts=8, seed=3, base="2")
    assert base2.min_h2 == pytest.approx(r.min_h2 / math.log(2))


def test_monotone_ascent(rng):
    for _ in range(10):
        ch = random_channel(3, rng, n_kraus=int(rng.integers(1, 5)))
        _, trace, _ = ascend(ch, linalg.random_unit_vector(3, rng))
        assert np.all(np.diff(trace) >= -1e-12)


def test_reproducible_with_seed(rng):
    ch = random_channel(2, rng)
    a = max_output_purity(ch, restarts=5, seed=11)
    b = max_output_purity(ch, restarts=5, seed=11)
    assert a.max_purity == b.max_purity
    np.testing.assert_array_equal(a.argmax_state, b.argmax_state)


def test_argument_validation():
    with pytest.raises(ValueError):
        max_output_purity(identity_channel(2), restarts=0)
    with pytest.raises(ValueError):
        max_output_purity(identity_channel(2), tol=0)


def test_nonconvergence_is_reported(rng):
    ch = random_channel(3, rng, n_kraus=2)
    r = max_output_purity(ch, restarts=1, max_iter=1, tol=1e-300)
    assert not r.converged


# ---------------------------------------------------------------- brute force oracle

def test_brute_force_anchors():
    assert brute_force_max_purity(identity_channel(2), samples=1000) >= 1 - 1e-9
    assert brute_force_max_purity(depolarizing_channel(2), samples=200) == pytest.approx(0.5, abs=1e-9)


def test_optimizer_dominates_brute_force(rng):
    for _ in range(20):
        ch = random_channel(2, rng, n_kraus=int(rng.integers(1, 5)))
        oracle = brute_force_max_purity(ch, samples=200, seed=1)
        assert oracle <= max_output_purity(ch, restarts=16).max_purity + 1e-8


# ---------------------------------------------------------------- joint / additivity

def test_joint_anchor_values():
    assert joint_max_purity(identity_channel(2), identity_channel(2), restarts=4).max_purity == pytest.approx(1)
    dep = depolarizing_channel(2)
    assert joint_max_purity(dep, dep, restarts=4).max_purity == pytest.approx(0.25, abs=1e-12)


def test_joint_ppt_pair_is_multiplicative(rng):
    c1, c2 = random_ppt_channel(2, rng), random_ppt_channel(2, rng)
    joint = joint_max_purity(c1, c2, restarts=16).max_purity
    prod = max_output_purity(c1).max_purity * max_output_purity(c2).max_purity
    assert joint == pytest.approx(prod, abs=1e-6)


def test_additivity_with_identity(rng):
    rep = additivity_gap(random_channel(2, rng, n_kraus=2), identity_channel(2), restarts=8)
    assert abs(rep.gap) <= 1e-6 and rep.additive


def test_additivity_ppt_with_non_ppt(rng):
    from renyi2.channel import is_ppt_inducing

    gamma = random_channel(2, rng, n_kraus=2)
    assert not is_ppt_inducing(gamma)
    rep = additivity_gap(random_ppt_channel(2, rng), gamma, restarts=16)
    assert rep.additive
    assert rep.joint_max_purity >= rep.product_of_maxima - 1e-8
