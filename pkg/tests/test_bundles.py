import numpy as np
import pytest

from boxplan.core import rng_from_seed
from boxplan.environments import GoRightConfig, GoRightEnv
from boxplan.learned_models import (
    GoRightFullStateAdapter,
    LearnedModelSet,
    ObservationAdapter,
    make_adapter,
)
from boxplan.planning import Transition


def collect_transitions(n_steps, seed=0):
    env = GoRightEnv(GoRightConfig())
    rng = rng_from_seed(seed)
    obs = env.reset(rng)
    prev_state = env.state
    out = []
    for _ in range(n_steps):
        a = int(rng.integers(2))
        prev = obs
        before = prev_state
        obs, r = env.step(a)
        prev_state = env.state
        out.append(
            Transition(prev, a, r, obs, info={"underlying": env.state, "underlying_prev": before})
        )
    return out, rng


@pytest.mark.parametrize("family", ["tree", "nn"])
def test_bundle_learns_and_steps(family):
    transitions, rng = collect_transitions(600)
    adapter = ObservationAdapter(4)
    model = LearnedModelSet(
        family, adapter, 2, rng_from_seed(1), stochastic=False, hidden=16, with_iqn=True
    )
    for tr in transitions:
        model.observe(tr, rng)
    state = model.rollout_start(transitions[-1])
    nxt, reward = model.step(state, 1, rng)
    assert nxt.shape == (4,)
    assert np.isfinite(reward)
    var_total, range_total = model.step_statistics(state, 1)
    assert var_total >= 0.0 and range_total >= 0.0


@pytest.mark.parametrize("family", ["tree", "nn"])
def test_bundle_box_step_contains_expectation(family):
    transitions, rng = collect_transitions(800, seed=3)
    adapter = ObservationAdapter(4)
    model = LearnedModelSet(family, adapter, 2, rng_from_seed(2), stochastic=False, hidden=16)
    for tr in transitions:
        model.observe(tr, rng)
    tr = transitions[-1]
    box = model.box_start(tr)
    state = model.rollout_start(tr)
    for family_action in (0, 1):
        nxt_box, r_iv = model.box_step(box, (family_action,))
        nxt, reward = model.step(state, family_action, rng)
        if family == "tree":
            # outcome bounds cover observed outcomes, and the expectation is
            # a mean of observed outcomes per leaf
            assert np.all(nxt_box.lower <= nxt + 1e-9)
            assert np.all(nxt + 1e-9 >= nxt_box.lower)
        assert r_iv.lo <= r_iv.hi


def test_full_state_adapter_appends_prev_status():
    transitions, _ = collect_transitions(5)
    adapter = GoRightFullStateAdapter(4)
    tr = transitions[0]
    feats = adapter.features_of_next(tr)
    assert feats.shape == (5,)
    assert feats[4] == tr.info["underlying"].status_prev
    cur = adapter.features_of_current(tr)
    assert cur[4] == tr.info["underlying_prev"].status_prev


def test_full_state_observation_projection():
    transitions, rng = collect_transitions(50)
    adapter = GoRightFullStateAdapter(4)
    model = LearnedModelSet("tree", adapter, 2, rng_from_seed(4))
    for tr in transitions:
        model.observe(tr, rng)
    state = model.rollout_start(transitions[-1])
    assert model.observation(state).shape == (4,)
    box = model.box_start(transitions[-1])
    assert model.observation_box(box).dim == 4


def test_sampling_flavor_uses_rng():
    transitions, rng = collect_transitions(400, seed=5)
    model = LearnedModelSet("tree", ObservationAdapter(4), 2, rng_from_seed(5), stochastic=True)
    for tr in transitions:
        model.observe(tr, rng)
    state = model.rollout_start(transitions[-1])
    s1, _ = model.step(state, 1, rng_from_seed(7))
    s2, _ = model.step(state, 1, rng_from_seed(7))
    s3, _ = model.step(state, 1, rng_from_seed(8))
    assert np.array_equal(s1, s2)
    assert not np.array_equal(s1, s3)


def test_query_defaults_before_data():
    model = LearnedModelSet("tree", ObservationAdapter(4), 2, rng_from_seed(6))
    state = np.zeros(4)
    nxt, reward = model.step(state, 0, rng_from_seed(0))
    assert np.array_equal(nxt, state) and reward == 0.0
    assert model.step_statistics(state, 0) == (0.0, 0.0)


@pytest.mark.parametrize("family", ["tree", "nn"])
def test_checkpoint_roundtrip(tmp_path, family):
    transitions, rng = collect_transitions(400, seed=8)
    model = LearnedModelSet(
        family, ObservationAdapter(4), 2, rng_from_seed(9), stochastic=(family == "nn"),
        hidden=8, with_iqn=(family == "nn"),
    )
    for tr in transitions:
        model.observe(tr, rng)
    path = tmp_path / "model.npz"
    model.save(str(path))
    clone = LearnedModelSet.load(str(path), rng_from_seed(9))
    assert clone.family == family
    state = model.rollout_start(transitions[-1])
    a_next, a_r = model.step(state, 0, rng_from_seed(1))
    b_next, b_r = clone.step(state, 0, rng_from_seed(1))
    assert np.allclose(a_next, b_next) and a_r == pytest.approx(b_r)
    box = model.box_start(transitions[-1])
    ba = model.box_step(box, (0, 1))
    bb = clone.box_step(box, (0, 1))
    assert np.allclose(ba[0].lower, bb[0].lower)
    assert np.allclose(ba[0].upper, bb[0].upper)


def test_make_adapter():
    assert make_adapter("identity", 4).feature_dim == 4
    assert make_adapter("goright-full-state", 4).feature_dim == 5
    with pytest.raises(ValueError):
        make_adapter("bogus", 4)
