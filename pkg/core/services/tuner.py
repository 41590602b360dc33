"""
N-Tuple Bandit Evolutionary Algorithm.

The fitness landscape is modelled by running statistics over every
1-tuple, every 2-tuple and the full tuple of parameter indices. Each step
evaluates the current point once, then moves to the best of a batch of
single-dimension mutations ranked by a UCB estimate built from those
statistics.

HeuristicTuner wires this to the heuristic's Offence, Defence and action
order, with fitness measured by games against a target agent.
"""
import csv
import logging
import math
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path

import numpy as np

from .engine import Side
from .exceptions import ConfigError
from .experiments import GameTask, MAP_STREAM, GAME_STREAM, derive_seed, run_games, subject_side
from .heuristics import HeuristicParams
from .maps import generate_map

logger = logging.getLogger(__name__)


class SearchSpace:
    """Named dimensions, each a finite ordered list of values; points are index tuples."""

    def __init__(self, dimensions):
        self.dimensions = [(name, tuple(values)) for name, values in dimensions]
        if not self.dimensions:
            raise ConfigError("a search space needs at least one dimension")
        for name, values in self.dimensions:
            if len(values) < 2:
                raise ConfigError(f"dimension {name!r} needs at least two values")

    @property
    def names(self):
        return [name for name, _ in self.dimensions]

    @property
    def shape(self):
        return tuple(len(values) for _, values in self.dimensions)

    @property
    def size(self):
        return math.prod(self.shape)

    def __len__(self):
        return len(self.dimensions)

    def random_point(self, rng):
        return tuple(int(rng.integers(n)) for n in self.shape)

    def neighbour(self, point, rng):
        """Resample one dimension, chosen uniformly, to a different value."""
        dim = int(rng.integers(len(self.dimensions)))
        n = self.shape[dim]
        value = (point[dim] + int(rng.integers(1, n))) % n
        return point[:dim] + (value,) + point[dim + 1:]

    def values(self, point):
        return {name: values[i] for (name, values), i in zip(self.dimensions, point)}


class NTupleModel:
    """(count, sum of fitness) for each tuple pattern and each index combination seen."""

    def __init__(self, dimensions):
        patterns = [(d,) for d in range(dimensions)]
        patterns += list(combinations(range(dimensions), 2))
        full = tuple(range(dimensions))
        if full not in patterns:
            patterns.append(full)
        self.patterns = patterns
        self.stats = {pattern: {} for pattern in patterns}
        self.evaluations = 0

    @staticmethod
    def project(point, pattern):
        return tuple(point[d] for d in pattern)

    def add(self, point, fitness):
        for pattern in self.patterns:
            entry = self.stats[pattern].setdefault(self.project(point, pattern), [0, 0.0])
            entry[0] += 1
            entry[1] += fitness
        self.evaluations += 1

    def count(self, point, pattern):
        entry = self.stats[pattern].get(self.project(point, pattern))
        return entry[0] if entry else 0

    def mean(self, point, pattern):
        entry = self.stats[pattern].get(self.project(point, pattern))
        return entry[1] / entry[0] if entry else None

    def estimate(self, point):
        """Average of the means of the tuples of `point` seen so far (0 if none)."""
        means = [m for m in (self.mean(point, p) for p in self.patterns) if m is not None]
        return sum(means) / len(means) if means else 0.0

    def ucb(self, point, k_explore, epsilon):
        log_total = math.log(self.evaluations + 1)
        bonus = sum(
            math.sqrt(log_total / (self.count(point, p) + epsilon)) for p in self.patterns
        ) / len(self.patterns)
        return self.estimate(point) + k_explore * bonus

    @property
    def total_count(self):
        return sum(entry[0] for table in self.stats.values() for entry in table.values())

    def best_point(self):
        """Full-tuple point with the best mean, ties to the higher count."""
        full = self.patterns[-1]
        best = None
        for key, (count, total) in sorted(self.stats[full].items()):
            rank = (total / count, count)
            if best is None or rank > best[0]:
                best = (rank, key)
        return best[1] if best else None


@dataclass(frozen=True)
class Evaluation:
    iteration: int
    point: tuple
    fitness: float
    estimate: float


@dataclass
class TuningResult:
    best: tuple
    model: NTupleModel
    log: list

    @property
    def best_fitness(self):
        return self.model.mean(self.best, self.model.patterns[-1])


def ntbea_optimize(space, evaluate, budget, rng, neighbours=50, k_explore=2.0, epsilon=0.5, progress=None):
    """
    Run NTBEA for `budget` evaluations of `evaluate(point)` and return a
    TuningResult whose best point is the evaluated point with the best mean.
    """
    if budget < 1:
        raise ConfigError(f"budget must be at least 1, got {budget}")
    model = NTupleModel(len(space))
    log = []
    current = space.random_point(rng)

    for iteration in range(budget):
        estimate = model.estimate(current)
        fitness = float(evaluate(current))
        if not math.isfinite(fitness):
            raise ValueError(f"fitness of {current} is not finite: {fitness}")
        model.add(current, fitness)
        log.append(Evaluation(iteration, current, fitness, estimate))
        if progress is not None:
            progress(iteration + 1, budget)
        if iteration == budget - 1:
            break

        candidates = sorted({space.neighbour(current, rng) for _ in range(neighbours)})
        scores = [model.ucb(p, k_explore, epsilon) for p in candidates]
        top = max(scores)
        ties = [p for p, s in zip(candidates, scores) if s == top]
        current = ties[int(rng.integers(len(ties)))]

    best = model.best_point()
    logger.info("NTBEA finished %d evaluations; best %s", budget, space.values(best))
    return TuningResult(best, model, log)


def heuristic_space(tune):
    return SearchSpace([
        ('offence', tune.offence),
        ('defence', tune.defence),
        ('actions', tune.action_orders),
    ])


class HeuristicTuner:
    """
    Fitness of a heuristic point: mean score sign (+1 win, 0 draw, -1 loss)
    over a batch of games against the target, sides alternating, each batch
    on fresh seeded maps.
    """

    def __init__(self, config, seed=None, workers=None):
        self.config = config
        self.tune = config.tune
        self.space = heuristic_space(self.tune)
        self.seed = config.seed if seed is None else seed
        self.workers = workers
        self.evaluations = 0

    def params(self, point):
        values = self.space.values(point)
        return HeuristicParams.from_values(values['offence'], values['defence'], values['actions'])

    def tasks(self, point, batch):
        spec = str(self.params(point))
        lo, hi = self.config.maps.min_nodes, self.config.maps.max_nodes
        tasks = []
        for g in range(self.tune.games_per_evaluation):
            rng = np.random.default_rng(derive_seed(self.seed, batch, g, MAP_STREAM))
            map_graph = generate_map(rng, int(rng.integers(lo, hi + 1)))
            blue, red = (spec, self.tune.target) if subject_side(g) == Side.BLUE else (self.tune.target, spec)
            tasks.append(GameTask(batch, map_graph, blue, red, derive_seed(self.seed, batch, g, GAME_STREAM)))
        return spec, tasks

    def __call__(self, point):
        _, tasks = self.tasks(point, self.evaluations)
        self.evaluations += 1
        records = run_games(tasks, self.config, self.workers)
        return sum(2.0 * r.points(subject_side(g)) - 1.0 for g, r in enumerate(records)) / len(records)

    def run(self, rng=None, progress=None):
        ntbea = self.tune.ntbea
        rng = rng if rng is not None else np.random.default_rng(self.seed)
        return ntbea_optimize(
            self.space, self, ntbea.budget, rng,
            neighbours=ntbea.neighbours, k_explore=ntbea.k_explore, epsilon=ntbea.epsilon,
            progress=progress,
        )


def write_evaluation_log(result, space, path):
    path = Path(path)
    with open(path, 'w', newline='', encoding='utf-8') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(['iteration', 'point'] + space.names + ['fitness', 'modelEstimate'])
        for e in result.log:
            values = space.values(e.point)
            writer.writerow(
                [e.iteration, '-'.join(str(i) for i in e.point)]
                + [values[name] for name in space.names]
                + [f"{e.fitness:.6f}", f"{e.estimate:.6f}"]
            )
    return path
