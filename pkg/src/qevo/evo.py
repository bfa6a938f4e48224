"""Truncation-selection evolution strategy with deterministic seeding.

Per generation:

1. every agent plays `repeats_all` episodes; its fitness is the mean score
2. rank fitness descending (stable sort: ties keep the lower index) and
   keep the top `truncation` genomes as parents
3. every parent plays `repeats_parents` fresh episodes; the parent with
   the best fresh mean becomes the elite
4. next population: slots 0..N-2 hold mutated children (uniformly chosen
   parent + mutation_power * standard normal noise), slot N-1 holds the
   elite copied verbatim

Every random draw comes from a named stream
np.random.SeedSequence([master_seed, TAG, generation, index]), so results
are byte-identical for any worker count and any evaluation order, and a
checkpoint holding only the ranked parents and the elite reconstructs the
next population exactly by re-running the mutation stream.
"""

from __future__ import annotations

import math
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .agents import AgentArchitecture

TAG_EVAL = 0
TAG_ELITE = 1
TAG_MUTATE = 2
TAG_INIT = 3

ROLLING_WINDOW = 100


@dataclass(frozen=True)
class EvoConfig:
    population: int
    truncation: int
    mutation_power: float
    generations: int
    repeats_all: int = 3      # episodes per agent for ranking
    repeats_parents: int = 5  # fresh episodes per parent for elite selection
    master_seed: int = 0
    init_scale: float = 0.01

    def __post_init__(self) -> None:
        if not 1 <= self.truncation < self.population:
            raise ValueError("need 1 <= truncation < population")
        if self.mutation_power <= 0.0:
            raise ValueError("mutation_power must be positive")
        if self.repeats_all < 1 or self.repeats_parents < 1:
            raise ValueError("episode repeat counts must be >= 1")
        if self.generations < 0:
            raise ValueError("generations must be >= 0")
        if self.init_scale < 0.0:
            raise ValueError("init_scale must be >= 0")


@dataclass
class GenerationStats:
    generation: int
    top5_avg: float
    pop_mean: float
    pop_std: float
    elite_score: float
    rolling_mean_100: float
    rolling_std_100: float


@dataclass
class GenerationSnapshot:
    """Everything needed to checkpoint and later resume after `generation`."""

    generation: int
    parents: np.ndarray
    parent_fitness: np.ndarray
    elite: np.ndarray
    elite_score: float
    window: tuple[tuple[int, float, float], ...]
    best_genome: np.ndarray
    best_score: float


@dataclass
class ResumeState:
    next_generation: int
    population: np.ndarray
    window: Sequence[tuple[int, float, float]]
    best_genome: np.ndarray | None
    best_score: float


# ---------------------------------------------------------------------------
# primitive operations

def init_population(config: EvoConfig, genome_length: int) -> np.ndarray:
    """N genomes, entries Normal(0, 1) * init_scale, one stream per agent."""
    if genome_length < 1:
        raise ValueError("genome_length must be positive")
    rows = [
        np.random.default_rng(
            np.random.SeedSequence([config.master_seed, TAG_INIT, 0, i])
        ).standard_normal(genome_length)
        for i in range(config.population)
    ]
    return config.init_scale * np.stack(rows)


def mutate(genome: np.ndarray, sigma: float, rng: np.random.Generator) -> np.ndarray:
    """Gaussian perturbation; the parent is left untouched."""
    if sigma < 0.0:
        raise ValueError("sigma must be >= 0")
    return genome + sigma * rng.standard_normal(genome.shape)


def play_episode(agent, env, rng: np.random.Generator,
                 memo: dict | None = None) -> float:
    """One rollout; returns the undiscounted sum of rewards.

    `memo` caches observation -> action per agent: the policy is a pure
    function of the observation, so repeat states skip the circuit.
    """
    if memo is None:
        memo = {}
    obs = env.reset(rng)
    total = 0.0
    while True:
        key = obs.tobytes()
        action = memo.get(key)
        if action is None:
            action = agent.act(obs)
            memo[key] = action
        transition = env.step(action)
        total += transition.reward
        if transition.done:
            return total
        obs = transition.observation


def evaluate_fitness(genome: np.ndarray, architecture: AgentArchitecture,
                     env, repeats: int, seed_entropy: Sequence[int]) -> float:
    """Mean score of `repeats` episodes, all seeded from `seed_entropy`."""
    rng = np.random.default_rng(np.random.SeedSequence(list(seed_entropy)))
    agent = architecture.build(genome)
    memo: dict = {}
    total = 0.0
    for _ in range(repeats):
        total += play_episode(agent, env, rng, memo)
    return total / repeats


def rank_indices(fitness: np.ndarray) -> np.ndarray:
    """Indices sorted by descending fitness; ties keep the lower index."""
    return np.argsort(-np.asarray(fitness, dtype=np.float64), kind="stable")


def spawn_children(parents: np.ndarray, elite: np.ndarray, config: EvoConfig,
                   generation: int) -> np.ndarray:
    """Next population from ranked parents: N-1 mutants plus the elite last."""
    rng = np.random.default_rng(
        np.random.SeedSequence([config.master_seed, TAG_MUTATE, generation]))
    n_children = config.population - 1
    picks = rng.integers(0, len(parents), size=n_children)
    children = parents[picks] + config.mutation_power * rng.standard_normal(
        (n_children, parents.shape[1]))
    return np.concatenate([children, elite[None, :]], axis=0)


def _window_stats(window) -> tuple[float, float]:
    count = sum(n for n, _, _ in window)
    total = sum(s for _, s, _ in window)
    total_sq = sum(ss for _, _, ss in window)
    mean = total / count
    var = max(0.0, total_sq / count - mean * mean)
    return mean, math.sqrt(var)


# ---------------------------------------------------------------------------
# evaluators

class _FunctionEvaluator:
    """Deterministic objective on the genome itself; repeats are moot."""

    def __init__(self, objective: Callable[[np.ndarray], float]):
        self._objective = objective

    def batch(self, genomes: np.ndarray, generation: int, tag: int,
              repeats: int) -> np.ndarray:
        return np.array([float(self._objective(g)) for g in genomes])

    def close(self) -> None:
        pass


class _SerialEnvEvaluator:
    def __init__(self, env_factory, architecture: AgentArchitecture,
                 master_seed: int):
        self._env = env_factory()
        self._architecture = architecture
        self._master_seed = master_seed

    def batch(self, genomes: np.ndarray, generation: int, tag: int,
              repeats: int) -> np.ndarray:
        return np.array([
            evaluate_fitness(genome, self._architecture, self._env, repeats,
                             [self._master_seed, tag, generation, i])
            for i, genome in enumerate(genomes)
        ])

    def close(self) -> None:
        pass


_WORKER_ENV = None
_WORKER_ARCH = None


def _init_worker(env_factory, architecture) -> None:
    global _WORKER_ENV, _WORKER_ARCH
    _WORKER_ENV = env_factory()
    _WORKER_ARCH = architecture


def _eval_task(task) -> float:
    genome, entropy, repeats = task
    return evaluate_fitness(genome, _WORKER_ARCH, _WORKER_ENV, repeats, entropy)


class _PoolEnvEvaluator:
    def __init__(self, env_factory, architecture: AgentArchitecture,
                 master_seed: int, workers: int):
        self._master_seed = master_seed
        self._workers = workers
        self._pool = ProcessPoolExecutor(
            max_workers=workers, initializer=_init_worker,
            initargs=(env_factory, architecture))

    def batch(self, genomes: np.ndarray, generation: int, tag: int,
              repeats: int) -> np.ndarray:
        tasks = [(genome, [self._master_seed, tag, generation, i], repeats)
                 for i, genome in enumerate(genomes)]
        chunk = max(1, math.ceil(len(tasks) / (4 * self._workers)))
        scores = self._pool.map(_eval_task, tasks, chunksize=chunk)
        return np.fromiter(scores, dtype=np.float64, count=len(tasks))

    def close(self) -> None:
        self._pool.shutdown()


# ---------------------------------------------------------------------------
# main loop

def _evolve(config: EvoConfig, evaluator, genome_length: int,
            stop_condition: Callable[[GenerationStats], bool] | None,
            on_generation: Callable[[GenerationStats, GenerationSnapshot], None] | None,
            resume: ResumeState | None) -> list[GenerationStats]:
    if resume is None:
        population = init_population(config, genome_length)
        start = 0
        window: deque = deque(maxlen=ROLLING_WINDOW)
        best_genome: np.ndarray | None = None
        best_score = -math.inf
    else:
        population = np.asarray(resume.population, dtype=np.float64)
        start = resume.next_generation
        window = deque(resume.window, maxlen=ROLLING_WINDOW)
        best_genome = resume.best_genome
        best_score = resume.best_score

    if population.shape != (config.population, genome_length):
        raise ValueError(f"population must have shape "
                         f"{(config.population, genome_length)}, "
                         f"got {population.shape}")

    history: list[GenerationStats] = []
    for generation in range(start, config.generations):
        fitness = evaluator.batch(population, generation, TAG_EVAL,
                                  config.repeats_all)
        order = rank_indices(fitness)
        parents = population[order[:config.truncation]].copy()
        parent_fitness = fitness[order[:config.truncation]].copy()

        elite_scores = evaluator.batch(parents, generation, TAG_ELITE,
                                       config.repeats_parents)
        elite_index = int(np.argmax(elite_scores))  # first max: ties break low
        elite = parents[elite_index].copy()
        elite_score = float(elite_scores[elite_index])

        window.append((fitness.size, float(fitness.sum()),
                       float(np.square(fitness).sum())))
        rolling_mean, rolling_std = _window_stats(window)
        top_k = min(5, fitness.size)
        stats = GenerationStats(
            generation=generation,
            top5_avg=float(fitness[order[:top_k]].mean()),
            pop_mean=float(fitness.mean()),
            pop_std=float(fitness.std()),
            elite_score=elite_score,
            rolling_mean_100=rolling_mean,
            rolling_std_100=rolling_std,
        )
        history.append(stats)

        if elite_score > best_score:
            best_genome = elite.copy()
            best_score = elite_score

        if on_generation is not None:
            on_generation(stats, GenerationSnapshot(
                generation, parents, parent_fitness, elite, elite_score,
                tuple(window), best_genome, best_score))
        if stop_condition is not None and stop_condition(stats):
            break
        population = spawn_children(parents, elite, config, generation)
    return history


def run(config: EvoConfig, env_factory, architecture: AgentArchitecture,
        workers: int = 1,
        stop_condition: Callable[[GenerationStats], bool] | None = None,
        on_generation: Callable[[GenerationStats, GenerationSnapshot], None] | None = None,
        resume: ResumeState | None = None) -> list[GenerationStats]:
    """Train on an environment; see the module docstring for the loop."""
    if workers < 1:
        raise ValueError("workers must be >= 1")
    if workers == 1:
        evaluator = _SerialEnvEvaluator(env_factory, architecture,
                                        config.master_seed)
    else:
        evaluator = _PoolEnvEvaluator(env_factory, architecture,
                                      config.master_seed, workers)
    try:
        return _evolve(config, evaluator, architecture.genome_length,
                       stop_condition, on_generation, resume)
    finally:
        evaluator.close()


def run_function(config: EvoConfig, objective: Callable[[np.ndarray], float],
                 genome_length: int,
                 stop_condition: Callable[[GenerationStats], bool] | None = None,
                 on_generation: Callable[[GenerationStats, GenerationSnapshot], None] | None = None,
                 ) -> list[GenerationStats]:
    """Run the strategy on a closed-form objective instead of an environment."""
    return _evolve(config, _FunctionEvaluator(objective), genome_length,
                   stop_condition, on_generation, None)
