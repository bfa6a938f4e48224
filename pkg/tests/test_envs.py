"""Environment tests: hand-integrated physics, BFS path oracle, geometry."""

import math
from collections import deque

import numpy as np
import pytest

from qevo import envs


def scripted_balancer(obs):
    """Keeps the pole up and the cart centered; verified to reach 500 steps."""
    x, x_dot, theta, theta_dot = obs
    return 1 if 3.0 * theta + theta_dot + 0.05 * x + 0.2 * x_dot > 0 else 0


def run_episode(env, policy, rng):
    obs = env.reset(rng)
    total = 0.0
    steps = 0
    while True:
        transition = env.step(policy(obs))
        total += transition.reward
        steps += 1
        if transition.done:
            return total, steps
        obs = transition.observation


# ---------------------------------------------------------------------------
# cart-pole

def test_reset_bounds_and_determinism():
    env = envs.CartPoleEnv()
    for seed in range(50):
        obs = env.reset(np.random.default_rng(seed))
        assert np.all(np.abs(obs) <= 0.05)
    a = envs.CartPoleEnv().reset(np.random.default_rng(7))
    b = envs.CartPoleEnv().reset(np.random.default_rng(7))
    np.testing.assert_array_equal(a, b)


def test_observation_is_the_state_tuple():
    env = envs.CartPoleEnv()
    obs = env.reset(np.random.default_rng(0))
    np.testing.assert_array_equal(obs, env._state)


def test_single_step_hand_integration():
    # From the exact zero state, pushing right:
    #   temp      = 10 / 1.1
    #   theta_acc = (-10/1.1) / (0.5 * (4/3 - 0.1/1.1)) = -600/41
    #   x_acc     = 10/1.1 - 0.05 * theta_acc / 1.1     =  400/41
    # positions keep the old (zero) velocities; velocities pick up tau*acc
    env = envs.CartPoleEnv()
    env.reset(np.random.default_rng(0))
    env._state = np.zeros(4)
    transition = env.step(1)
    x, x_dot, theta, theta_dot = transition.observation
    assert x == 0.0 and theta == 0.0
    assert x_dot == pytest.approx(8 / 41, abs=1e-15)
    assert theta_dot == pytest.approx(-12 / 41, abs=1e-15)
    assert transition.reward == 1.0 and not transition.done
    # mirrored push
    env._state = np.zeros(4)
    transition = env.step(0)
    assert transition.observation[1] == pytest.approx(-8 / 41, abs=1e-15)
    assert transition.observation[3] == pytest.approx(12 / 41, abs=1e-15)


def test_terminates_outside_position_limit():
    env = envs.CartPoleEnv()
    env.reset(np.random.default_rng(0))
    env._state = np.array([2.405, 0.5, 0.0, 0.0])
    assert env.step(1).done  # x moves past 2.4


def test_terminates_outside_angle_limit():
    env = envs.CartPoleEnv()
    env.reset(np.random.default_rng(0))
    env._state = np.array([0.0, 0.0, math.radians(15.0) - 1e-4, 2.0])
    assert env.step(1).done


def test_angle_threshold_is_configurable():
    env = envs.CartPoleEnv(theta_threshold_deg=12.0)
    assert env.theta_limit == pytest.approx(math.radians(12.0))


def test_full_survival_episode_scores_exactly_500():
    env = envs.CartPoleEnv()
    for seed in (0, 1, 2):
        total, steps = run_episode(env, scripted_balancer,
                                   np.random.default_rng(seed))
        assert total == 500.0 and steps == 500


def test_score_equals_episode_length():
    env = envs.CartPoleEnv()
    always_right = lambda obs: 1
    total, steps = run_episode(env, always_right, np.random.default_rng(3))
    assert total == steps <= 500


def test_step_after_done_raises():
    env = envs.CartPoleEnv()
    env.reset(np.random.default_rng(0))
    env._state = np.array([3.0, 0.0, 0.0, 0.0])
    assert env.step(1).done
    with pytest.raises(RuntimeError, match="finished"):
        env.step(1)
    with pytest.raises(RuntimeError, match="finished"):
        envs.CartPoleEnv().step(0)  # never reset


def test_rejects_bad_action():
    env = envs.CartPoleEnv()
    env.reset(np.random.default_rng(0))
    with pytest.raises(ValueError, match="action"):
        env.step(2)


# ---------------------------------------------------------------------------
# minigrid: BFS oracle over (position, direction)

def bfs_shortest_path(n):
    """Fewest turn/forward actions from ((1,1), east) to the goal cell."""
    goal = (n - 2, n - 2)
    start = ((1, 1), 0)
    seen = {start}
    queue = deque([(start, 0)])
    while queue:
        ((pos, direction), depth) = queue.popleft()
        if pos == goal:
            return depth
        moves = [((pos, (direction - 1) % 4)), ((pos, (direction + 1) % 4))]
        fx, fy = envs.DIR_VECTORS[direction]
        target = (pos[0] + fx, pos[1] + fy)
        if 1 <= target[0] <= n - 2 and 1 <= target[1] <= n - 2:
            moves.append((target, direction))
        for state in moves:
            if state not in seen:
                seen.add(state)
                queue.append((state, depth + 1))
    raise AssertionError("goal unreachable")


@pytest.mark.parametrize("n,expected", [(5, 5), (6, 7), (8, 11)])
def test_bfs_shortest_paths(n, expected):
    assert bfs_shortest_path(n) == expected


@pytest.mark.parametrize("n,expected_reward", [
    (5, 0.955), (6, 0.95625), (8, 1.0 - 0.9 * 11 / 256)])
def test_optimal_path_rewards(n, expected_reward):
    env = envs.MiniGridEnv(n)
    env.reset()
    straight = n - 3  # interior span from (1,1) to (n-2, 1)
    actions = [2] * straight + [1] + [2] * straight
    assert len(actions) == bfs_shortest_path(n)
    transition = None
    for action in actions:
        transition = env.step(action)
    assert transition.done
    assert transition.reward == pytest.approx(expected_reward, abs=1e-12)


def test_reset_geometry():
    env = envs.MiniGridEnv(5)
    obs = env.reset()
    assert env.agent_pos == (1, 1) and env.agent_dir == 0
    assert env.goal_pos == (3, 3)
    assert env.max_steps == 100
    assert obs.shape == (147,)
    np.testing.assert_array_equal(obs, env.reset())  # deterministic layout


def test_rejects_unsupported_sizes():
    with pytest.raises(ValueError, match="grid size"):
        envs.MiniGridEnv(7)


def test_four_lefts_compose_to_identity():
    env = envs.MiniGridEnv(5)
    start = env.reset()
    for _ in range(4):
        transition = env.step(0)
    assert env.agent_dir == 0
    np.testing.assert_array_equal(transition.observation, start)


def test_forward_into_wall_is_blocked():
    env = envs.MiniGridEnv(5)
    env.reset()
    env.step(3)  # face north via left turn is dir 3; action 3 is a no-op
    assert env.agent_pos == (1, 1)
    env.step(0)  # now actually turn left -> north
    assert env.agent_dir == 3
    transition = env.step(2)  # forward into the top wall
    assert env.agent_pos == (1, 1)
    assert not transition.done


def test_noop_actions_consume_steps_only():
    env = envs.MiniGridEnv(5)
    env.reset()
    for action in (3, 4, 5):
        transition = env.step(action)
        assert env.agent_pos == (1, 1) and env.agent_dir == 0
        assert transition.reward == 0.0
    assert env.steps == 3


def test_timeout_gives_zero_reward():
    env = envs.MiniGridEnv(5)
    env.reset()
    transition = None
    for _ in range(env.max_steps):
        transition = env.step(0)  # spin in place
    assert transition.done and transition.reward == 0.0
    with pytest.raises(RuntimeError, match="finished"):
        env.step(0)


def test_reward_range_when_goal_reached():
    # slow goal-reaching episodes still land strictly inside (0.1, 1)
    env = envs.MiniGridEnv(5)
    env.reset()
    for _ in range(env.max_steps - 6):
        env.step(3)  # no-op keeps the heading
    for action in (2, 2, 1, 2, 2):
        transition = env.step(action)
    assert transition.done
    assert transition.reward == pytest.approx(1 - 0.9 * 99 / 100, abs=1e-12)
    assert 0.1 < transition.reward < 1.0


def test_goal_on_final_step_still_rewards():
    env = envs.MiniGridEnv(5)
    env.reset()
    for _ in range(env.max_steps - 5):
        env.step(3)
    for action in (2, 2, 1, 2, 2):
        transition = env.step(action)
    assert transition.done
    assert transition.reward == pytest.approx(0.1, abs=1e-12)
    assert transition.reward > 0.0


def test_rejects_bad_action_index():
    env = envs.MiniGridEnv(5)
    env.reset()
    with pytest.raises(ValueError, match="action"):
        env.step(6)


# ---------------------------------------------------------------------------
# minigrid observations

def view_channels(obs, row, col):
    base = (row * envs.VIEW_SIZE + col) * 3
    return obs[base], obs[base + 1], obs[base + 2]


def test_observation_entries_in_unit_interval():
    env = envs.MiniGridEnv(8)
    obs = env.reset()
    for _ in range(60):
        assert obs.min() >= 0.0 and obs.max() <= 1.0
        obs = env.step(np.random.default_rng(int(obs.sum() * 1e6) % 2**31)
                       .integers(0, 3)).observation
        if env._done:
            break


def test_wall_directly_ahead_is_visible():
    env = envs.MiniGridEnv(5)
    env.reset()
    env.step(0)  # face north; wall at (1, 0) is one cell ahead
    obs = env._observation()
    obj, color, state = view_channels(obs, row=5, col=3)
    assert obj == pytest.approx(envs.OBJECT_WALL / envs.OBJECT_SCALE)
    assert color == pytest.approx(envs.COLOR_GREY / envs.COLOR_SCALE)
    assert state == 0.0


def test_agent_cell_is_floor():
    env = envs.MiniGridEnv(5)
    obs = env.reset()
    obj, _, _ = view_channels(obs, row=6, col=3)
    assert obj == pytest.approx(envs.OBJECT_EMPTY / envs.OBJECT_SCALE)


def test_goal_visible_with_its_color():
    env = envs.MiniGridEnv(5)
    env.reset()
    env.step(2), env.step(2)  # stand at (3,1) facing east; goal at (3,3)
    env.step(1)  # face south: goal two cells ahead -> view row 4, col 3
    obs = env._observation()
    obj, color, _ = view_channels(obs, row=4, col=3)
    assert obj == pytest.approx(envs.OBJECT_GOAL / envs.OBJECT_SCALE)
    assert color == pytest.approx(envs.COLOR_GREEN / envs.COLOR_SCALE)


def test_cells_beyond_grid_read_unseen():
    env = envs.MiniGridEnv(5)
    obs = env.reset()  # facing east from (1,1): row 0 is 6 cells ahead, off-grid
    obj, color, state = view_channels(obs, row=0, col=3)
    assert obj == envs.OBJECT_UNSEEN and color == 0.0 and state == 0.0


def test_rotation_changes_view_not_position():
    env = envs.MiniGridEnv(6)
    before = env.reset()
    after = env.step(1).observation
    assert env.agent_pos == (1, 1)
    assert not np.array_equal(before, after)
