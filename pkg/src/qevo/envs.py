"""Episodic environments, implemented from scratch.

Both environments expose the same minimal interface:

    obs = env.reset(rng)          # rng may be ignored by deterministic envs
    transition = env.step(action) # EnvTransition(observation, reward, done)

CartPoleEnv: classic pole balancing.  Physics constants are fixed here so
results are reproducible without any external dependency: gravity 9.8,
cart mass 1.0, pole mass 0.1, half pole length 0.5, force magnitude 10.0,
time step 0.02, semi-implicit Euler integration.  The failure angle is
15 degrees by default (a configurable knob; some conventions use 12).

MiniGridEnv: an empty n x n room (n in {5, 6, 8}) with a 1-cell wall
border.  The agent starts at (1, 1) facing east; the goal sits at
(n-2, n-2).  Observations are an egocentric 7 x 7 view of the cells ahead,
3 channels per cell (object id, color id, state id), scaled into [0, 1]
and flattened to length 147.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass
class EnvTransition:
    observation: np.ndarray
    reward: float
    done: bool


# ---------------------------------------------------------------------------
# cart-pole

class CartPoleEnv:
    GRAVITY = 9.8
    CART_MASS = 1.0
    POLE_MASS = 0.1
    HALF_POLE_LENGTH = 0.5
    FORCE_MAG = 10.0
    TAU = 0.02
    X_LIMIT = 2.4
    MAX_STEPS = 500

    def __init__(self, theta_threshold_deg: float = 15.0):
        self.theta_limit = math.radians(theta_threshold_deg)
        self._state: np.ndarray | None = None
        self._done = True
        self.steps = 0

    def reset(self, rng: np.random.Generator) -> np.ndarray:
        """All four components uniform in [-0.05, 0.05]."""
        self._state = rng.uniform(-0.05, 0.05, size=4)
        self._done = False
        self.steps = 0
        return self._state.copy()

    def step(self, action: int) -> EnvTransition:
        if self._done or self._state is None:
            raise RuntimeError("episode is finished; call reset() first")
        if action not in (0, 1):
            raise ValueError(f"action must be 0 (left) or 1 (right), got {action}")

        x, x_dot, theta, theta_dot = self._state
        force = self.FORCE_MAG if action == 1 else -self.FORCE_MAG
        cos_t = math.cos(theta)
        sin_t = math.sin(theta)

        total_mass = self.CART_MASS + self.POLE_MASS
        pole_mass_length = self.POLE_MASS * self.HALF_POLE_LENGTH
        temp = (force + pole_mass_length * theta_dot ** 2 * sin_t) / total_mass
        theta_acc = (self.GRAVITY * sin_t - cos_t * temp) / (
            self.HALF_POLE_LENGTH * (4.0 / 3.0 - self.POLE_MASS * cos_t ** 2 / total_mass))
        x_acc = temp - pole_mass_length * theta_acc * cos_t / total_mass

        # positions advance with the old velocities, then velocities update
        x = x + self.TAU * x_dot
        x_dot = x_dot + self.TAU * x_acc
        theta = theta + self.TAU * theta_dot
        theta_dot = theta_dot + self.TAU * theta_acc

        self._state = np.array([x, x_dot, theta, theta_dot])
        self.steps += 1
        self._done = (abs(x) > self.X_LIMIT or abs(theta) > self.theta_limit
                      or self.steps >= self.MAX_STEPS)
        return EnvTransition(self._state.copy(), 1.0, self._done)


# ---------------------------------------------------------------------------
# empty gridworld

# object ids follow the common gridworld tables; the channel scales below
# are the table maxima, mapping every channel into [0, 1]
OBJECT_UNSEEN = 0
OBJECT_EMPTY = 1
OBJECT_WALL = 2
OBJECT_GOAL = 8
COLOR_NONE = 0
COLOR_GREEN = 1
COLOR_GREY = 5
OBJECT_SCALE = 10.0
COLOR_SCALE = 5.0
STATE_SCALE = 2.0

VIEW_SIZE = 7
OBS_LENGTH = VIEW_SIZE * VIEW_SIZE * 3

# direction index -> forward unit vector (x right, y down)
DIR_VECTORS = ((1, 0), (0, 1), (-1, 0), (0, -1))  # east, south, west, north

ACTION_LEFT = 0
ACTION_RIGHT = 1
ACTION_FORWARD = 2
# 3 (pickup), 4 (drop), 5 (toggle): consume a step, change nothing here
N_ACTIONS = 6


class MiniGridEnv:
    SUPPORTED_SIZES = (5, 6, 8)

    def __init__(self, grid_size: int):
        if grid_size not in self.SUPPORTED_SIZES:
            raise ValueError(
                f"grid size must be one of {self.SUPPORTED_SIZES}, got {grid_size}")
        self.grid_size = grid_size
        self.goal_pos = (grid_size - 2, grid_size - 2)
        self.max_steps = 4 * grid_size * grid_size
        self.agent_pos = (1, 1)
        self.agent_dir = 0
        self.steps = 0
        self._done = True
        self._obs_cache: dict[tuple[tuple[int, int], int], np.ndarray] = {}

    def reset(self, rng: np.random.Generator | None = None) -> np.ndarray:
        """Deterministic layout: agent at (1, 1) facing east; rng unused."""
        self.agent_pos = (1, 1)
        self.agent_dir = 0
        self.steps = 0
        self._done = False
        return self._observation()

    def step(self, action: int) -> EnvTransition:
        if self._done:
            raise RuntimeError("episode is finished; call reset() first")
        if not 0 <= action < N_ACTIONS:
            raise ValueError(f"action must be in [0, {N_ACTIONS - 1}], got {action}")

        self.steps += 1
        reward = 0.0
        if action == ACTION_LEFT:
            self.agent_dir = (self.agent_dir - 1) % 4
        elif action == ACTION_RIGHT:
            self.agent_dir = (self.agent_dir + 1) % 4
        elif action == ACTION_FORWARD:
            fx, fy = DIR_VECTORS[self.agent_dir]
            target = (self.agent_pos[0] + fx, self.agent_pos[1] + fy)
            if self._cell_object(*target) != OBJECT_WALL:
                self.agent_pos = target

        if self.agent_pos == self.goal_pos:
            reward = 1.0 - 0.9 * self.steps / self.max_steps
            self._done = True
        elif self.steps >= self.max_steps:
            self._done = True
        return EnvTransition(self._observation(), reward, self._done)

    # -- observation ---------------------------------------------------------

    def _cell_object(self, x: int, y: int) -> int:
        n = self.grid_size
        if not (0 <= x < n and 0 <= y < n):
            return OBJECT_UNSEEN
        if x == 0 or y == 0 or x == n - 1 or y == n - 1:
            return OBJECT_WALL
        if (x, y) == self.goal_pos:
            return OBJECT_GOAL
        return OBJECT_EMPTY

    def _observation(self) -> np.ndarray:
        key = (self.agent_pos, self.agent_dir)
        cached = self._obs_cache.get(key)
        if cached is None:
            cached = self._encode_view()
            cached.flags.writeable = False
            self._obs_cache[key] = cached
        return cached

    def _encode_view(self) -> np.ndarray:
        """Egocentric view: the agent sits at view row 6, column 3.

        View cell (row, col) maps to the world cell
        pos + forward * (6 - row) + right * (col - 3), so row 0 is farthest
        ahead and columns grow to the agent's right.
        """
        fx, fy = DIR_VECTORS[self.agent_dir]
        rx, ry = -fy, fx  # right-hand vector
        px, py = self.agent_pos
        view = np.zeros((VIEW_SIZE, VIEW_SIZE, 3))
        for row in range(VIEW_SIZE):
            ahead = VIEW_SIZE - 1 - row
            for col in range(VIEW_SIZE):
                side = col - 3
                obj = self._cell_object(px + fx * ahead + rx * side,
                                        py + fy * ahead + ry * side)
                if obj == OBJECT_WALL:
                    color = COLOR_GREY
                elif obj == OBJECT_GOAL:
                    color = COLOR_GREEN
                else:
                    color = COLOR_NONE
                view[row, col, 0] = obj / OBJECT_SCALE
                view[row, col, 1] = color / COLOR_SCALE
                view[row, col, 2] = 0.0 / STATE_SCALE
        return view.reshape(-1)


# ---------------------------------------------------------------------------
# factories (top-level, picklable, usable as worker initializers)

ENV_NAMES = ("cartpole", "minigrid-5", "minigrid-6", "minigrid-8")


def make_cartpole() -> CartPoleEnv:
    return CartPoleEnv()


def make_minigrid_5() -> MiniGridEnv:
    return MiniGridEnv(5)


def make_minigrid_6() -> MiniGridEnv:
    return MiniGridEnv(6)


def make_minigrid_8() -> MiniGridEnv:
    return MiniGridEnv(8)


_FACTORIES = {
    "cartpole": make_cartpole,
    "minigrid-5": make_minigrid_5,
    "minigrid-6": make_minigrid_6,
    "minigrid-8": make_minigrid_8,
}


def env_factory(name: str):
    """Zero-argument constructor for a named environment."""
    try:
        return _FACTORIES[name]
    except KeyError:
        raise ValueError(f"unknown environment {name!r}; choose from {ENV_NAMES}")
