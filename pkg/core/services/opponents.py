"""
Cheap scripted policies and the opponent models built from them.

An opponent model answers the adversary's decision points inside a
planner's simulations. The variants are DoNothing, Random, Heuristic and
MctsTree; the last has no policy of its own and only tells MCTS to grow a
second tree for the opponent.
"""
from .actionspace import sample_distinct_actions
from .engine import WAIT_FOREVER
from .heuristics import heuristic_decide

RANDOM_SAMPLE_SIZE = 20


def random_decide(state, side, rng, k=RANDOM_SAMPLE_SIZE):
    """
    Uniform choice among up to k sampled distinct actions.

    The position is drawn first and sampling stops there. If the sample runs
    out early the choice is uniform over what was found, so every member of
    the sample is still picked with probability 1/len(sample).
    """
    position = int(rng.integers(k)) + 1
    actions = sample_distinct_actions(state, side, k, rng, stop_after=position)
    if len(actions) == position:
        return actions[-1]
    return actions[int(rng.integers(len(actions)))]


def do_nothing_decide(state, side):
    """Never initiates anything; an interruption just yields another endless Wait."""
    return WAIT_FOREVER


class OpponentModel:
    name = 'model'

    def decide(self, state, side, rng):
        raise NotImplementedError

    def __str__(self):
        return self.name


class DoNothingModel(OpponentModel):
    name = 'NONE'

    def decide(self, state, side, rng):
        return do_nothing_decide(state, side)


class RandomModel(OpponentModel):
    name = 'RND'

    def decide(self, state, side, rng):
        return random_decide(state, side, rng)


class HeuristicModel(OpponentModel):

    def __init__(self, params, name=None):
        self.params = params
        self.name = name or str(params)

    def decide(self, state, side, rng):
        return heuristic_decide(state, side, self.params)


class MctsTreeModel(OpponentModel):
    """Marker: the opponent is modelled by its own search tree (MCTS only)."""
    name = 'MCTS'

    def decide(self, state, side, rng):
        raise TypeError("the MctsTree opponent model is only meaningful inside MCTS")
