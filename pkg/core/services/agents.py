"""
Agents and agent specification strings.

A spec names either a scripted policy or a planner with an optional
opponent model:

    NONE, RND, H0..H5, H(10,1.0,RD|W|A|RF)
    MCTS, MCTS+H3, MCTS+RND, MCTS+MCTS, MCTS+H(3,0.5,W|A)
    RHEA, RHEA+H3, RHEA+RND

A planner without a model plans against DoNothing.
"""
import logging
import re
import time
from dataclasses import dataclass

from .engine import Side
from .exceptions import AgentSpecError, ConfigError
from .heuristics import ROSTER, HeuristicParams, heuristic_decide
from .opponents import (
    DoNothingModel, HeuristicModel, MctsTreeModel, RandomModel, do_nothing_decide, random_decide,
)
from .search import MctsConfig, MctsPlanner, RheaConfig, RheaPlanner, SearchStats

logger = logging.getLogger(__name__)

PLANNERS = ('MCTS', 'RHEA')

_INLINE_HEURISTIC = re.compile(r'^H\(\s*([^,]+)\s*,\s*([^,]+)\s*,\s*([A-Za-z|/, ]+)\)$')


class Agent:
    """Decides for one side at a time; last_stats describes the latest decision."""

    def __init__(self, name):
        self.name = name
        self.last_stats = SearchStats()

    def decide(self, state, side):
        started = time.perf_counter()
        order = self._decide(state, Side(side))
        self.last_stats = SearchStats(elapsed_ms=(time.perf_counter() - started) * 1000.0)
        return order

    def _decide(self, state, side):
        raise NotImplementedError

    def __str__(self):
        return self.name


class DoNothingAgent(Agent):

    def _decide(self, state, side):
        return do_nothing_decide(state, side)


class RandomAgent(Agent):

    def __init__(self, name, rng):
        super().__init__(name)
        self.rng = rng

    def _decide(self, state, side):
        return random_decide(state, side, self.rng)


class HeuristicAgent(Agent):

    def __init__(self, name, params):
        super().__init__(name)
        self.params = params

    def _decide(self, state, side):
        return heuristic_decide(state, side, self.params)


class PlannerAgent(Agent):
    """Wraps one planner per side it is asked to play."""

    planner_class = None

    def __init__(self, name, config, opponent_model, rng):
        super().__init__(name)
        self.config = config
        self.opponent_model = opponent_model
        self.rng = rng
        self._planners = {}

    def planner(self, side):
        if side not in self._planners:
            self._planners[side] = self.planner_class(side, self.config, self.opponent_model, self.rng)
        return self._planners[side]

    def decide(self, state, side):
        planner = self.planner(Side(side))
        order = planner.decide(state)
        self.last_stats = planner.stats
        return order


class MctsAgent(PlannerAgent):
    planner_class = MctsPlanner


class RheaAgent(PlannerAgent):
    planner_class = RheaPlanner


@dataclass(frozen=True)
class AgentSpec:
    """Parsed agent specification; build() turns it into an Agent for one game."""
    text: str
    kind: str
    heuristic: HeuristicParams | None = None
    model: str | None = None
    model_heuristic: HeuristicParams | None = None

    @property
    def is_planner(self):
        return self.kind in PLANNERS

    def opponent_model(self):
        if self.model is None or self.model == 'NONE':
            return DoNothingModel()
        if self.model == 'RND':
            return RandomModel()
        if self.model == 'MCTS':
            return MctsTreeModel()
        return HeuristicModel(self.model_heuristic, self.model)

    def build(self, rng, mcts=None, rhea=None):
        if self.kind == 'NONE':
            return DoNothingAgent(self.text)
        if self.kind == 'RND':
            return RandomAgent(self.text, rng)
        if self.kind == 'H':
            return HeuristicAgent(self.text, self.heuristic)
        if self.kind == 'MCTS':
            return MctsAgent(self.text, mcts or MctsConfig(), self.opponent_model(), rng)
        return RheaAgent(self.text, rhea or RheaConfig(), self.opponent_model(), rng)

    def __str__(self):
        return self.text


def parse_heuristic(text, roster=None):
    """Roster name ('H3') or inline 'H(offence,defence,actions)'."""
    roster = ROSTER if roster is None else roster
    text = text.strip()
    for name in (text, text.upper()):
        if name in roster:
            return name, roster[name]
    match = _INLINE_HEURISTIC.match(text)
    if match is None:
        return None
    offence, defence, actions = match.groups()
    try:
        params = HeuristicParams.from_values(offence, defence, actions)
    except (ConfigError, ValueError) as e:
        raise AgentSpecError(f"bad inline heuristic {text!r}: {e}") from e
    return str(params), params


def parse_agent_spec(text, roster=None):
    """Parse an agent spec string, raising AgentSpecError when it is not one."""
    if not isinstance(text, str) or not text.strip():
        raise AgentSpecError(f"empty agent spec {text!r}")
    text = text.strip()
    head, plus, tail = text.partition('+')
    head_upper = head.strip().upper()

    if head_upper in PLANNERS:
        if not plus:
            return AgentSpec(head_upper, head_upper)
        tail = tail.strip()
        tail_upper = tail.upper()
        if tail_upper in ('NONE', 'RND'):
            return AgentSpec(f"{head_upper}+{tail_upper}", head_upper, model=tail_upper)
        if tail_upper == 'MCTS':
            if head_upper != 'MCTS':
                raise AgentSpecError(f"{text!r}: only MCTS can model its opponent with a tree")
            return AgentSpec('MCTS+MCTS', 'MCTS', model='MCTS')
        heuristic = parse_heuristic(tail, roster)
        if heuristic is None:
            raise AgentSpecError(f"{text!r}: unknown opponent model {tail!r}")
        name, params = heuristic
        return AgentSpec(f"{head_upper}+{name}", head_upper, model=name, model_heuristic=params)

    if plus:
        raise AgentSpecError(f"{text!r}: only MCTS and RHEA take an opponent model")
    if head_upper in ('NONE', 'RND'):
        return AgentSpec(head_upper, head_upper)
    heuristic = parse_heuristic(text, roster)
    if heuristic is None:
        raise AgentSpecError(f"unknown agent spec {text!r}")
    name, params = heuristic
    return AgentSpec(name, 'H', heuristic=params)


def build_agent(text, rng, roster=None, mcts=None, rhea=None):
    return parse_agent_spec(text, roster).build(rng, mcts, rhea)
