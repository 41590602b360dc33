"""
Statistical forward planning: MCTS and RHEA.

Both planners clone the real state and use the engine as a forward model.
Inside their simulations the opponent's decision points are answered by an
opponent model; MCTS can instead grow a second tree for the opponent.

Scores are the planning side's material advantage at the end of a
simulation, discounted per elapsed tick.
"""
import logging
import math
import time
from dataclasses import dataclass

from .actionspace import (
    block_length, decode_action, mutate_genome, random_genome, sample_distinct_actions,
)
from .engine import (
    WAIT_FOREVER, Side, advance, copy_state, issue_or_wait, material_score, state_key,
)
from .exceptions import ConfigError
from .opponents import DoNothingModel, MctsTreeModel, random_decide

logger = logging.getLogger(__name__)

MOST_VISITS = 'most_visits'
HIGHEST_SCORE = 'highest_score'


@dataclass(frozen=True)
class MctsConfig:
    iterations: int = 50
    exploration_c: float = 3.0
    rollout_ticks: int = 100
    discount: float = 0.999
    actions_per_node: int = 20
    final_selection: str = MOST_VISITS
    time_budget_ms: float | None = None

    def __post_init__(self):
        if self.iterations < 1:
            raise ConfigError(f"MCTS iterations must be at least 1, got {self.iterations}")
        if not 0.0 < self.discount <= 1.0:
            raise ConfigError(f"discount must be in (0, 1], got {self.discount}")
        if self.exploration_c < 0:
            raise ConfigError(f"exploration constant must be non-negative, got {self.exploration_c}")
        if self.actions_per_node < 1 or self.rollout_ticks < 1:
            raise ConfigError("actions_per_node and rollout_ticks must be positive")
        if self.final_selection not in (MOST_VISITS, HIGHEST_SCORE):
            raise ConfigError(f"unknown final selection {self.final_selection!r}")


@dataclass(frozen=True)
class RheaConfig:
    iterations: int = 50
    plan_length: int = 4
    mutation_rate: float = 0.5
    horizon_ticks: int = 100
    discount: float = 0.999
    shift_buffer: bool = False
    time_budget_ms: float | None = None

    def __post_init__(self):
        if self.iterations < 1:
            raise ConfigError(f"RHEA iterations must be at least 1, got {self.iterations}")
        if self.plan_length < 1:
            raise ConfigError(f"plan length must be at least 1, got {self.plan_length}")
        if not 0.0 < self.mutation_rate <= 1.0:
            raise ConfigError(f"mutation rate must be in (0, 1], got {self.mutation_rate}")
        if not 0.0 < self.discount <= 1.0:
            raise ConfigError(f"discount must be in (0, 1], got {self.discount}")
        if self.horizon_ticks < 1:
            raise ConfigError("horizon_ticks must be positive")


@dataclass
class SearchStats:
    iterations: int = 0
    events: int = 0
    elapsed_ms: float = 0.0
    tree_sizes: tuple = ()
    best_value: float = 0.0


def uct_value(q, n, parent_visits, c):
    """Q(a) + C * sqrt(ln N / n(a)); untried actions rank first."""
    if n == 0:
        return math.inf
    if c == 0:
        return q
    return q + c * math.sqrt(math.log(parent_visits) / n)


def _argmax(values, rng):
    best = max(values)
    ties = [i for i, v in enumerate(values) if v == best]
    return ties[0] if len(ties) == 1 else ties[int(rng.integers(len(ties)))]


class TreeNode:
    """One decision state in a transposition table, with per-action statistics."""

    __slots__ = ('key', 'actions', 'visits', 'values', 'total')

    def __init__(self, key, actions):
        self.key = key
        self.actions = actions
        self.visits = [0] * len(actions)
        self.values = [0.0] * len(actions)
        self.total = 0

    def select(self, c, rng):
        untried = [i for i, n in enumerate(self.visits) if n == 0]
        if untried:
            return untried[int(rng.integers(len(untried)))]
        scores = [uct_value(q, n, self.total, c) for q, n in zip(self.values, self.visits)]
        return _argmax(scores, rng)

    def update(self, index, value):
        self.visits[index] += 1
        self.total += 1
        self.values[index] += (value - self.values[index]) / self.visits[index]


class SearchTree:
    """Transposition table for one side: state key -> TreeNode."""

    def __init__(self, side, actions_per_node, rng):
        self.side = side
        self.actions_per_node = actions_per_node
        self.rng = rng
        self.nodes = {}

    def expand(self, key, state):
        actions = sample_distinct_actions(state, self.side, self.actions_per_node, self.rng)
        node = TreeNode(key, actions)
        self.nodes[key] = node
        return node

    def __len__(self):
        return len(self.nodes)


class _Descent:
    """Per-iteration bookkeeping for one tree."""

    __slots__ = ('tree', 'path', 'seen', 'in_tree')

    def __init__(self, tree):
        self.tree = tree
        self.path = []
        self.seen = set()
        self.in_tree = True


class MctsPlanner:
    """
    MCTS over a transposition table keyed by state_key().

    With an MctsTree opponent model a second table is grown for the
    opponent; each iteration adds at most one node to each tree and the
    opponent tree is backed up with the negated score.
    """

    def __init__(self, side, config=None, opponent_model=None, rng=None):
        self.side = Side(side)
        self.config = config or MctsConfig()
        self.opponent_model = opponent_model or DoNothingModel()
        self.rng = rng
        self.dual = isinstance(self.opponent_model, MctsTreeModel)
        self.stats = SearchStats()
        self.tree = None
        self.opponent_tree = None

    def decide(self, state):
        config = self.config
        started = time.perf_counter()
        self.tree = SearchTree(self.side, config.actions_per_node, self.rng)
        self.opponent_tree = (
            SearchTree(self.side.opponent, config.actions_per_node, self.rng) if self.dual else None
        )
        root = self.tree.expand(state_key(state), state)

        events = 0
        iterations = 0
        while iterations < config.iterations:
            if config.time_budget_ms is not None and iterations > 0:
                if (time.perf_counter() - started) * 1000.0 >= config.time_budget_ms:
                    break
            events += self._iterate(state, root)
            iterations += 1

        index = self._final_choice(root)
        sizes = (len(self.tree),) + ((len(self.opponent_tree),) if self.dual else ())
        self.stats = SearchStats(
            iterations=iterations,
            events=events,
            elapsed_ms=(time.perf_counter() - started) * 1000.0,
            tree_sizes=sizes,
            best_value=root.values[index],
        )
        logger.debug(
            "MCTS %s: %d iterations, %d events, trees %s, %.2f ms",
            self.side.name, iterations, events, sizes, self.stats.elapsed_ms,
        )
        return root.actions[index]

    def _final_choice(self, root):
        if self.config.final_selection == HIGHEST_SCORE:
            scores = [q if n > 0 else -math.inf for q, n in zip(root.values, root.visits)]
            return _argmax(scores, self.rng)
        return _argmax(root.visits, self.rng)

    def _iterate(self, root_state, root):
        config = self.config
        sim = copy_state(root_state)
        start = sim.tick
        max_ticks = sim.params.max_ticks
        descents = {self.side: _Descent(self.tree)}
        if self.dual:
            descents[self.side.opponent] = _Descent(self.opponent_tree)
        horizon = None

        while True:
            sim, request = advance(sim, horizon)
            if not request.is_decision:
                break
            side = request.side
            descent = descents.get(side)

            if descent is None:
                order = self.opponent_model.decide(sim, side, self.rng)
            elif not descent.in_tree:
                order = random_decide(sim, side, self.rng, config.actions_per_node)
            else:
                key = root.key if not descent.path and side == self.side else state_key(sim)
                node = descent.tree.nodes.get(key)
                if key in descent.seen:
                    # the descent came back to a state it already passed: leave the tree here
                    descent.in_tree = False
                    node = None
                elif node is None:
                    node = descent.tree.expand(key, sim)
                    descent.in_tree = False
                if node is None:
                    order = random_decide(sim, side, self.rng, config.actions_per_node)
                else:
                    descent.seen.add(key)
                    index = node.select(config.exploration_c, self.rng)
                    descent.path.append((node, index))
                    order = node.actions[index]
                if not descent.in_tree and side == self.side:
                    horizon = min(sim.tick + config.rollout_ticks, max_ticks)

            issue_or_wait(sim, side, order)

        value = material_score(sim, self.side) * config.discount ** (sim.tick - start)
        for side, descent in descents.items():
            backed = value if side == self.side else -value
            for node, index in descent.path:
                node.update(index, backed)
        return sim.events


class RheaPlanner:
    """(1+1) EA over digit genomes; the first action of the best plan is played."""

    def __init__(self, side, config=None, opponent_model=None, rng=None):
        self.side = Side(side)
        self.config = config or RheaConfig()
        self.opponent_model = opponent_model or DoNothingModel()
        self.rng = rng
        self.stats = SearchStats()
        self.best_history = []
        self._previous = None

    def decide(self, state):
        config = self.config
        started = time.perf_counter()
        length = block_length(state.map)

        if config.shift_buffer and self._previous is not None:
            parent = self._previous.shifted(self.rng, length)
        else:
            parent = random_genome(self.rng, config.plan_length, state.map)
        parent_score, events = self.evaluate(state, parent)
        self.best_history = [parent_score]

        evaluations = 1
        while evaluations < config.iterations:
            if config.time_budget_ms is not None:
                if (time.perf_counter() - started) * 1000.0 >= config.time_budget_ms:
                    break
            child = mutate_genome(parent, config.mutation_rate, self.rng)
            score, used = self.evaluate(state, child)
            events += used
            evaluations += 1
            if score >= parent_score:
                parent, parent_score = child, score
            self.best_history.append(parent_score)

        self._previous = parent
        order = decode_action(parent.digits, 0, state, self.side).order
        self.stats = SearchStats(
            iterations=evaluations,
            events=events,
            elapsed_ms=(time.perf_counter() - started) * 1000.0,
            best_value=parent_score,
        )
        logger.debug(
            "RHEA %s: %d evaluations, %d events, best %.2f (%s), %.2f ms",
            self.side.name, evaluations, events, parent_score, parent, self.stats.elapsed_ms,
        )
        return order

    def evaluate(self, state, genome):
        sim = copy_state(state)
        score = evaluate_plan(sim, self.side, genome, self.opponent_model, self.config, self.rng, cloned=True)
        return score, sim.events


def evaluate_plan(state, side, genome, opponent_model, config, rng=None, cloned=False):
    """
    Play `genome` for `side` from `state` up to config.horizon_ticks, the
    opponent answered by `opponent_model`, and return the discounted material
    advantage. Each step is decoded against the state it is reached in, so
    steps that became invalid degrade to Wait. After the last step the side
    waits out the horizon.
    """
    side = Side(side)
    sim = state if cloned else copy_state(state)
    start = sim.tick
    horizon = min(start + config.horizon_ticks, sim.params.max_ticks)
    length = block_length(sim.map)
    step = 0

    while True:
        sim, request = advance(sim, horizon)
        if not request.is_decision:
            break
        if request.side == side:
            if step < genome.actions:
                order = decode_action(genome.digits, step * length, sim, side).order
                step += 1
            else:
                order = WAIT_FOREVER
            issue_or_wait(sim, side, order)
        else:
            issue_or_wait(sim, request.side, opponent_model.decide(sim, request.side, rng))

    return material_score(sim, side) * config.discount ** (sim.tick - start)


def mcts_decide(state, side, config, opponent_model, rng):
    return MctsPlanner(side, config, opponent_model, rng).decide(state)


def mcts_dual_decide(state, side, config, rng):
    return MctsPlanner(side, config, MctsTreeModel(), rng).decide(state)


def rhea_decide(state, side, config, opponent_model, rng):
    return RheaPlanner(side, config, opponent_model, rng).decide(state)
