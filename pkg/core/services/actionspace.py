"""
Digit-genome action codec.

A genome is a string of base-10 digits read in blocks, one block per action:
  1. source node A (one digit for maps under 10 nodes, two for 10-99)
  2. arc index from A (taken modulo A's arc count; two digits if any node
     has more than 10 arcs)
  3. proportion of A's garrison to send, d -> (d+1) x 10%
  4. wait after the action, d -> d^2 ticks, raised to the C2 minimum
If A is not held by the side or has no garrison the block decodes to a Wait.

RHEA evolves genomes; MCTS decodes random blocks to sample its node actions.
"""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .engine import MIN_FORCE, LaunchExpedition, Wait


def source_width(map_graph):
    return map_graph.source_digits


def arc_width(map_graph):
    return map_graph.arc_digits


def block_length(map_graph):
    """Digits consumed by one encoded action."""
    return map_graph.source_digits + map_graph.arc_digits + 2


def _number(digits, offset, width):
    if width == 1:
        return digits[offset]
    value = 0
    for d in digits[offset:offset + width]:
        value = value * 10 + d
    return value


def _wait_ticks(digit, c2):
    return max(digit * digit, c2, 1)


def _launch_size(garrison, proportion):
    """Strength sent for a proportion digit, or None when nothing would leave."""
    if proportion == 9:
        size = garrison
    else:
        size = min(garrison, round((proportion + 1) / 10 * garrison, 6))
    return size if size > MIN_FORCE else None


@dataclass(frozen=True, slots=True)
class DecodedAction:
    order: object
    wait_after: int
    consumed: int


def decode_action(digits, offset, state, side):
    """
    Decode one action block starting at `offset`.

    Every block decodes: an unusable source gives a Wait lasting the block's
    wait duration.
    """
    map_graph = state.map
    sw = map_graph.source_digits
    aw = map_graph.arc_digits
    consumed = sw + aw + 2

    source = _number(digits, offset, sw)
    arc_digit = _number(digits, offset + sw, aw)
    proportion = digits[offset + sw + aw]
    wait = _wait_ticks(digits[offset + sw + aw + 1], state.params.side(side).c2_min_delay)

    if source >= map_graph.node_count or state.owner[source] != side:
        return DecodedAction(Wait(wait), wait, consumed)
    garrison = state.garrison[source]
    if garrison <= MIN_FORCE:
        return DecodedAction(Wait(wait), wait, consumed)

    arcs = map_graph.neighbour_ids[source]
    target = arcs[arc_digit % len(arcs)]
    size = _launch_size(garrison, proportion)
    if size is None:
        return DecodedAction(Wait(wait), wait, consumed)
    return DecodedAction(LaunchExpedition(size, source, target, wait), wait, consumed)


@dataclass(frozen=True)
class Genome:
    digits: tuple
    actions: int

    def __str__(self):
        return ''.join(str(d) for d in self.digits)

    @classmethod
    def from_string(cls, text, actions):
        return cls(tuple(int(c) for c in text), actions)

    def block(self, index, length):
        return self.digits[index * length:(index + 1) * length]

    def shifted(self, rng, length):
        """Drop the first action and refill the tail with random digits."""
        tail = tuple(int(d) for d in rng.integers(0, 10, size=length))
        return Genome(self.digits[length:] + tail, self.actions)


@dataclass(frozen=True)
class DecodedPlan:
    steps: tuple

    def __len__(self):
        return len(self.steps)


def decode_genome(genome, state, side):
    """
    Static decode of every block against one state snapshot.
    Execution re-decodes each block against the state it is reached in.
    """
    steps = []
    offset = 0
    for _ in range(genome.actions):
        decoded = decode_action(genome.digits, offset, state, side)
        steps.append((decoded.order, decoded.wait_after))
        offset += decoded.consumed
    return DecodedPlan(tuple(steps))


def random_genome(rng, actions, map_graph):
    length = actions * block_length(map_graph)
    return Genome(tuple(int(d) for d in rng.integers(0, 10, size=length)), actions)


def mutate_genome(genome, rate, rng):
    """
    Redraw each digit with probability `rate`. The child always differs from
    the parent in at least one digit.
    """
    if not 0.0 <= rate <= 1.0:
        raise ValueError(f"mutation rate must be in [0, 1], got {rate}")
    parent = np.fromiter(genome.digits, dtype=np.int64, count=len(genome.digits))
    redraw = rng.random(parent.size) < rate
    child = np.where(redraw, rng.integers(0, 10, size=parent.size), parent)
    if np.array_equal(child, parent):
        position = int(rng.integers(parent.size))
        child[position] = (parent[position] + int(rng.integers(1, 10))) % 10
    return Genome(tuple(int(d) for d in child), genome.actions)


WAIT_IDENTITY = ('wait',)


def action_identity(order):
    """Semantic identity used for distinctness: all Waits count as one action."""
    if isinstance(order, Wait):
        return WAIT_IDENTITY
    return ('launch', order.source, order.target, round(order.size, 6), order.wait_after)


@lru_cache(maxsize=None)
def _wait_table(c2):
    return tuple(_wait_ticks(d, c2) for d in range(10))


class _BlockSampler:
    """
    Draws random blocks against one state.

    A block whose source is not a garrisoned node of the side decodes to a
    Wait, so the draw is split in two: a geometric run of such blocks, then
    one block with a usable source chosen uniformly. The decoded sequence has
    the same distribution as decoding uniform blocks one by one.
    """

    def __init__(self, state, side):
        map_graph = state.map
        self.state = state
        self.aw = map_graph.arc_digits
        self.waits = _wait_table(state.params.side(side).c2_min_delay)
        self.sources = [
            n for n, (o, g) in enumerate(zip(state.owner, state.garrison)) if o == side and g > MIN_FORCE
        ]
        self.p_usable = len(self.sources) / 10 ** map_graph.source_digits
        # source index, then arc, proportion and wait digits
        self.highs = [len(self.sources)] + [10] * (self.aw + 2)
        self.neighbours = map_graph.neighbour_ids

    def draw(self, rng, n):
        """n usable blocks as (preceding wait blocks, block) rows."""
        gaps = rng.geometric(self.p_usable, size=n) - 1
        blocks = rng.integers(0, self.highs, size=(n, len(self.highs)))
        return zip(gaps.tolist(), blocks.tolist())

    def wait(self, rng):
        return Wait(self.waits[int(rng.integers(10))])

    def launch(self, block):
        """(identity, order) for a block with a usable source."""
        aw = self.aw
        source = self.sources[block[0]]
        arcs = self.neighbours[source]
        target = arcs[_number(block, 1, aw) % len(arcs)]
        wait = self.waits[block[aw + 2]]
        size = _launch_size(self.state.garrison[source], block[aw + 1])
        if size is None:
            return WAIT_IDENTITY, Wait(wait)
        return ('launch', source, target, round(size, 6), wait), LaunchExpedition(size, source, target, wait)


def sample_distinct_actions(state, side, k, rng, attempts_per_action=100, stop_after=None):
    """
    Up to `k` semantically distinct orders, drawn by decoding random digit
    blocks against `state`, in the order they were first drawn. At most
    k x attempts_per_action blocks are tried.

    With `stop_after` the draw ends once that many distinct orders are found.
    """
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    sampler = _BlockSampler(state, side)
    if not sampler.sources:
        return [sampler.wait(rng)]

    wanted = k if stop_after is None else max(1, min(stop_after, k))
    budget = k * attempts_per_action
    found = {}
    drawn = 0
    while drawn < budget and len(found) < wanted:
        for gap, block in sampler.draw(rng, 2 * (wanted - len(found))):
            if gap and WAIT_IDENTITY not in found:
                found[WAIT_IDENTITY] = sampler.wait(rng)
                if len(found) >= wanted:
                    break
            drawn += gap + 1
            if drawn > budget:
                break
            identity, order = sampler.launch(block)
            found.setdefault(identity, order)
            if len(found) >= wanted:
                break
    return list(found.values())
