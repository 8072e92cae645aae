import math

import numpy as np
import pytest

from boxplan.core import InvalidInputError, rng_from_seed
from boxplan.environments import (
    LEFT,
    RIGHT,
    AcrobotConfig,
    AcrobotEnv,
    GoRightConfig,
    GoRightEnv,
    GoRightOffsets,
    GoRightUnderlyingState,
    acrobot_terminal,
    enumerate_reachable_states,
    goright_observe,
    goright_reset,
    goright_status_next,
    goright_step,
)

STATUS_TABLE = {
    (0, 0): 5, (0, 5): 0, (0, 10): 5,
    (5, 0): 10, (5, 5): 10, (5, 10): 10,
    (10, 0): 0, (10, 5): 5, (10, 10): 0,
}


def make_state(pos, prev, cur, prizes):
    return GoRightUnderlyingState(pos, prev, cur, tuple(prizes))


def test_status_table_matches():
    for (prev, cur), nxt in STATUS_TABLE.items():
        assert goright_status_next(prev, cur) == nxt


def test_status_next_rejects_bad_values():
    with pytest.raises(InvalidInputError):
        goright_status_next(1, 5)


def test_entry_with_full_status_wins():
    # status pair (5, 5) transitions to 10 on the entry step
    s = make_state(9, 5, 5, (0, 0))
    nxt, r = goright_step(s, RIGHT)
    assert nxt.position == 10
    assert nxt.prize_intensities == (1, 1)
    assert nxt.won
    assert r == -1.0


def test_won_state_pays_on_right():
    s = make_state(10, 0, 5, (1, 1))
    nxt, r = goright_step(s, RIGHT)
    assert r == 3.0
    assert nxt.position == 10
    assert nxt.prize_intensities == (1, 1)


def test_left_at_wall_no_move_zero_reward():
    s = make_state(0, 0, 0, (0, 0))
    nxt, r = goright_step(s, LEFT)
    assert nxt.position == 0 and r == 0.0


def test_flash_pattern_advances():
    s = make_state(10, 0, 0, (0, 0))
    nxt, _ = goright_step(s, RIGHT)  # stays at 10 via clamping
    assert nxt.prize_intensities == (1, 0)
    nxt2, _ = goright_step(nxt, RIGHT)
    assert nxt2.prize_intensities == (0, 1)
    nxt3, _ = goright_step(nxt2, RIGHT)
    assert nxt3.prize_intensities == (0, 0)


def test_entry_without_full_status_starts_flash_all_off():
    # (10, 0) -> next status 0: not a win
    s = make_state(9, 10, 0, (0, 0))
    nxt, r = goright_step(s, RIGHT)
    assert nxt.position == 10 and nxt.prize_intensities == (0, 0) and r == -1.0


def test_leaving_prize_location_clears_indicators():
    s = make_state(10, 0, 5, (1, 1))
    nxt, r = goright_step(s, LEFT)
    assert nxt.position == 9 and nxt.prize_intensities == (0, 0) and r == 0.0


def test_right_off_prize_costs_one():
    s = make_state(3, 0, 5, (0, 0))
    nxt, r = goright_step(s, RIGHT)
    assert nxt.position == 4 and r == -1.0


def test_observe_offsets():
    s = make_state(4, 0, 10, (1, 0))
    zero = GoRightOffsets(0.0, 0.0, (0.0, 0.0))
    assert goright_observe(s, zero)[0] == 4.0
    shifted = GoRightOffsets(0.0, -1.25, (0.25, 0.0))
    obs = goright_observe(s, shifted)
    assert obs[1] == pytest.approx(8.75)
    assert obs[2] == pytest.approx(1.25)


def test_reset_bounds_and_determinism():
    cfg = GoRightConfig()
    for seed in (0, 1, 2):
        state, offsets, obs = goright_reset(cfg, rng_from_seed(seed))
        assert state.position == 0
        assert state.prize_intensities == (0, 0)
        assert -0.25 <= obs[0] <= 0.25
        assert all(-0.25 <= obs[2 + d] <= 0.25 for d in range(2))
    s1, o1, obs1 = goright_reset(cfg, rng_from_seed(42))
    s2, o2, obs2 = goright_reset(cfg, rng_from_seed(42))
    assert s1 == s2 and o1 == o2 and np.array_equal(obs1, obs2)


def test_config_validation():
    with pytest.raises(InvalidInputError):
        GoRightConfig(num_prize_indicators=1)
    with pytest.raises(InvalidInputError):
        GoRightConfig(gamma=0.0)
    with pytest.raises(InvalidInputError):
        GoRightConfig(interaction_length=0)


@pytest.mark.parametrize("n", [2, 10])
def test_state_invariants_hold_exhaustively(n):
    """Every reachable state x action yields a state satisfying the
    indicator/position invariants."""
    for s in enumerate_reachable_states(n):
        for a in (LEFT, RIGHT):
            nxt, _ = goright_step(s, a)
            if nxt.position != 10:
                assert all(v == 0 for v in nxt.prize_intensities)
            elif not nxt.won:
                assert sum(nxt.prize_intensities) <= 1
            assert (nxt.status_prev, nxt.status_cur) in STATUS_TABLE


def test_offsets_fixed_within_interaction_fresh_across_resets():
    env = GoRightEnv(GoRightConfig())
    rng = rng_from_seed(5)
    env.reset(rng)
    first = env.offsets
    for _ in range(50):
        env.step(RIGHT)
    assert env.offsets == first
    env.reset(rng)
    assert env.offsets != first


def test_acrobot_rest_equilibrium():
    env = AcrobotEnv(AcrobotConfig())
    rng = rng_from_seed(0)
    obs = env.reset(rng)
    assert np.array_equal(obs, np.zeros(4))
    obs, r, term = env.step(1, rng)  # zero torque
    assert np.allclose(obs, 0.0)
    assert r == -1.0 and not term


def test_acrobot_terminal_condition():
    # tip fully up: -cos(pi) - cos(pi) = 2 > 1
    assert acrobot_terminal(math.pi, 0.0)
    assert not acrobot_terminal(0.0, 0.0)


def test_acrobot_velocities_clipped_angles_wrapped():
    env = AcrobotEnv(AcrobotConfig())
    rng = rng_from_seed(1)
    env.reset(rng)
    for _ in range(300):
        obs, _, term = env.step(2, rng)
        assert -math.pi <= obs[0] < math.pi and -math.pi <= obs[1] < math.pi
        assert abs(obs[2]) <= 4 * math.pi + 1e-12
        assert abs(obs[3]) <= 9 * math.pi + 1e-12
        if term:
            break


def test_distractor_resampled_in_range_every_step():
    env = AcrobotEnv(AcrobotConfig(distractor=True))
    rng = rng_from_seed(2)
    obs = env.reset(rng)
    assert obs.shape == (5,)
    values = set()
    for _ in range(20):
        obs, _, _ = env.step(1, rng)
        assert abs(obs[4]) <= 4 * math.pi
        values.add(round(float(obs[4]), 12))
    assert len(values) > 15  # resampled essentially every step


def test_acrobot_init_noise_option():
    env = AcrobotEnv(AcrobotConfig(init_noise=0.1))
    obs = env.reset(rng_from_seed(3))
    assert np.all(np.abs(obs) <= 0.1)
    assert not np.allclose(obs, 0.0)
