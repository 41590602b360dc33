"""
Ground War forward model.

An event-driven simulation of ground combat on an arc-and-node map:
  - forces are plain numeric strengths, per-side speed and attrition coefficient
  - combat is instantaneous Lanchester square-law attrition, one force removed
  - orders are LaunchExpedition or Wait, irrevocable once issued
  - a C2 delay sets the minimum gap in ticks between a side's orders

Time only advances to the next tick where something happens (an arrival, an
arc meeting, a Wait running out), so planning cost tracks the number of
decisions rather than the number of ticks.

States are mutable and owned by one game or search task at a time. Planners
work on copy_state() clones.
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum, IntEnum

from .exceptions import ConfigError, OrderError, StateError

logger = logging.getLogger(__name__)

NEUTRAL = -1

# Forces at or below this strength are treated as gone
MIN_FORCE = 1e-6

# Wait length used for "never act again"; interruptions still wake the side
FOREVER = 10 ** 9

# Garrison/expedition strengths are quantised to this step in state keys
KEY_PRECISION = 1e-6


class Side(IntEnum):
    BLUE = 0
    RED = 1

    @property
    def opponent(self):
        return Side(1 - self)


SIDES = (Side.BLUE, Side.RED)


@dataclass(frozen=True)
class SideParams:
    speed: float = 1.0
    lanchester_coeff: float = 1.0
    c2_min_delay: int = 10

    def __post_init__(self):
        if self.speed <= 0:
            raise ConfigError(f"speed must be positive, got {self.speed}")
        if self.lanchester_coeff <= 0:
            raise ConfigError(f"lanchester_coeff must be positive, got {self.lanchester_coeff}")
        if self.c2_min_delay < 0 or int(self.c2_min_delay) != self.c2_min_delay:
            raise ConfigError(f"c2_min_delay must be a non-negative integer, got {self.c2_min_delay}")


@dataclass(frozen=True)
class GameParams:
    node_points: int = 5
    unit_points: int = 1
    max_ticks: int = 1000
    blue: SideParams = field(default_factory=SideParams)
    red: SideParams = field(default_factory=SideParams)
    arc_battles: bool = True
    start_force: float = 100.0

    def __post_init__(self):
        if self.max_ticks <= 0:
            raise ConfigError(f"max_ticks must be positive, got {self.max_ticks}")
        if self.node_points < 0 or self.unit_points < 0:
            raise ConfigError("node_points and unit_points must be non-negative")

    def side(self, side):
        return self.blue if side == Side.BLUE else self.red


@dataclass(frozen=True, slots=True)
class LaunchExpedition:
    """Send `size` from `source` to adjacent `target`, then idle `wait_after` ticks."""
    size: float
    source: int
    target: int
    wait_after: int = 0

    def __str__(self):
        return f"Launch({self.size:.2f}, {self.source}->{self.target}, +{self.wait_after})"


@dataclass(frozen=True, slots=True)
class Wait:
    ticks: int

    def __str__(self):
        return "Wait(forever)" if self.ticks >= FOREVER else f"Wait({self.ticks})"


WAIT_FOREVER = Wait(FOREVER)


@dataclass(frozen=True, slots=True)
class Expedition:
    side: int
    size: float
    source: int
    target: int
    depart: int
    arrive: int
    seq: int


class RequestKind(Enum):
    DECIDE = 'decide'
    TERMINAL = 'terminal'
    HORIZON = 'horizon'


@dataclass(slots=True)
class DecisionRequest:
    kind: RequestKind
    tick: int
    side: Side | None = None

    @property
    def is_decision(self):
        return self.kind is RequestKind.DECIDE


class Winner(Enum):
    BLUE = 'Blue'
    RED = 'Red'
    DRAW = 'Draw'


class GameState:
    """
    Full world snapshot: map, rules, clock, ownership, garrisons, forces in
    transit and per-side order clocks.

    wake_tick[side] is the tick at which the side is next asked for an order.
    It never precedes next_order_tick[side] (the C2 clock).
    """

    __slots__ = (
        'map', 'params', 'tick', 'owner', 'garrison', 'expeditions',
        'next_order_tick', 'wake_tick', 'last_decision_tick',
        'seed', 'events', 'trace', '_seq',
    )

    def __init__(self, map_graph, params, seed=0):
        self.map = map_graph
        self.params = params
        self.tick = 0
        self.owner = [NEUTRAL] * map_graph.node_count
        self.garrison = [0.0] * map_graph.node_count
        self.expeditions = []
        self.next_order_tick = [0, 0]
        self.wake_tick = [0, 0]
        self.last_decision_tick = [-1, -1]
        self.seed = seed
        self.events = 0
        self.trace = None
        self._seq = 0

    def strength(self, side):
        total = sum(g for o, g in zip(self.owner, self.garrison) if o == side)
        return total + sum(e.size for e in self.expeditions if e.side == side)

    def strengths(self):
        """(Blue, Red) strength in one pass."""
        totals = [0.0, 0.0, 0.0]  # NEUTRAL indexes the last slot
        for o, g in zip(self.owner, self.garrison):
            totals[o] += g
        for e in self.expeditions:
            totals[e.side] += e.size
        return totals[0], totals[1]

    def owned_nodes(self, side):
        return [n for n, o in enumerate(self.owner) if o == side]

    def inbound(self, side, node):
        """Strength of `side` expeditions heading for `node`."""
        return sum(e.size for e in self.expeditions if e.side == side and e.target == node)

    def __repr__(self):
        return (
            f"GameState(tick={self.tick}, blue={self.strength(Side.BLUE):.1f}, "
            f"red={self.strength(Side.RED):.1f}, expeditions={len(self.expeditions)})"
        )


def create_state(map_graph, params, blue_start, red_start, start_force=None, seed=0):
    """
    Opening position: each side holds one node with `start_force` units,
    every other node is neutral.
    """
    n = map_graph.node_count
    if blue_start == red_start:
        raise StateError(f"start nodes must differ, both are {blue_start}")
    for start in (blue_start, red_start):
        if not (isinstance(start, int) and 0 <= start < n):
            raise StateError(f"start node {start!r} is not a node id of a {n}-node map")
    force = params.start_force if start_force is None else float(start_force)
    if force <= 0:
        raise StateError(f"start force must be positive, got {force}")

    state = GameState(map_graph, params, seed=seed)
    state.owner[blue_start] = Side.BLUE
    state.owner[red_start] = Side.RED
    state.garrison[blue_start] = force
    state.garrison[red_start] = force
    return state


def copy_state(state):
    """Deep, independent copy; the clone carries no trace and a fresh event counter."""
    clone = GameState.__new__(GameState)
    clone.map = state.map
    clone.params = state.params
    clone.tick = state.tick
    clone.owner = state.owner[:]
    clone.garrison = state.garrison[:]
    clone.expeditions = state.expeditions[:]
    clone.next_order_tick = state.next_order_tick[:]
    clone.wake_tick = state.wake_tick[:]
    clone.last_decision_tick = state.last_decision_tick[:]
    clone.seed = state.seed
    clone.events = 0
    clone.trace = None
    clone._seq = state._seq
    return clone


def travel_ticks(length, speed):
    return max(1, math.ceil(length / speed - 1e-9))


def validate_order(state, side, order):
    """Raise OrderError if `side` may not issue `order` now."""
    if state.tick < state.next_order_tick[side]:
        raise OrderError(
            OrderError.C2_VIOLATION,
            f"{Side(side).name} may not order before tick {state.next_order_tick[side]} (now {state.tick})",
        )
    if isinstance(order, Wait):
        if int(order.ticks) != order.ticks or order.ticks < 1:
            raise OrderError(OrderError.INVALID_ORDER, f"wait must be at least one tick, got {order.ticks}")
        return
    if not isinstance(order, LaunchExpedition):
        raise OrderError(OrderError.INVALID_ORDER, f"unknown order {order!r}")
    if not order.size > MIN_FORCE or order.wait_after < 0:
        raise OrderError(OrderError.INVALID_ORDER, f"bad expedition {order}")
    if not 0 <= order.source < state.map.node_count or state.owner[order.source] != side:
        raise OrderError(OrderError.UNOWNED_SOURCE, f"node {order.source} is not held by {Side(side).name}")
    if not state.map.is_adjacent(order.source, order.target):
        raise OrderError(OrderError.NOT_ADJACENT, f"no arc from {order.source} to {order.target}")
    if state.garrison[order.source] < order.size - KEY_PRECISION:
        raise OrderError(
            OrderError.INSUFFICIENT_FORCE,
            f"node {order.source} holds {state.garrison[order.source]:.2f}, cannot send {order.size:.2f}",
        )


def issue_order(state, side, order):
    """
    Apply `order` for `side` at the current tick.

    Both order kinds restart the side's C2 clock. A LaunchExpedition splits
    the garrison and interrupts the opponent's Wait.
    """
    validate_order(state, side, order)
    tick = state.tick
    side_params = state.params.side(side)
    state.next_order_tick[side] = tick + side_params.c2_min_delay
    state.last_decision_tick[side] = tick

    if isinstance(order, Wait):
        state.wake_tick[side] = max(tick + order.ticks, state.next_order_tick[side])
        _record(state, tick, side, 'wait', size=order.ticks)
        return state

    size = min(order.size, state.garrison[order.source])
    state.garrison[order.source] -= size
    length = state.map.arc_length(order.source, order.target)
    arrive = tick + travel_ticks(length, side_params.speed)
    state.expeditions.append(
        Expedition(int(side), size, order.source, order.target, tick, arrive, state._seq)
    )
    state._seq += 1
    state.wake_tick[side] = max(tick + max(1, order.wait_after), state.next_order_tick[side])
    _record(state, tick, side, 'launch', order.source, order.target, size)
    _interrupt(state, 1 - side, tick)
    return state


def issue_or_wait(state, side, order, fallback_ticks=None):
    """
    Issue `order`, substituting a Wait if the engine rejects it.
    Returns the order actually issued (None when the C2 clock forbids any order).
    """
    try:
        issue_order(state, side, order)
        return order
    except OrderError as e:
        if e.code == OrderError.C2_VIOLATION:
            return None
        ticks = fallback_ticks or max(1, getattr(order, 'wait_after', 0) or getattr(order, 'ticks', 1))
        substitute = Wait(max(1, int(ticks)))
        issue_order(state, side, substitute)
        return substitute


def _interrupt(state, side, tick):
    """Wake a waiting side now, or as soon as its C2 clock allows."""
    earliest = max(tick, state.next_order_tick[side], state.last_decision_tick[side] + 1)
    if state.wake_tick[side] > earliest:
        state.wake_tick[side] = earliest


def resolve_lanchester(a, b, alpha, beta):
    """
    Lanchester square law: dA/dt = -beta*B, dB/dt = -alpha*A, fought to
    annihilation of one side.

    Returns (winner, survivors) where winner is 'A', 'B' or 'draw'.
    """
    value = alpha * a * a - beta * b * b
    if value > 0:
        return 'A', math.sqrt(max(0.0, a * a - (beta / alpha) * b * b))
    if value < 0:
        return 'B', math.sqrt(max(0.0, b * b - (alpha / beta) * a * a))
    return 'draw', 0.0


def meeting_tick(blue, red):
    """
    First tick at which two opposing expeditions on the same arc, heading in
    opposite directions, have crossed; None if they never share the arc.
    """
    if blue.source != red.target or blue.target != red.source:
        return None
    t1 = blue.arrive - blue.depart
    t2 = red.arrive - red.depart
    # positions along the arc: (t - d1)/t1 + (t - d2)/t2 >= 1
    numerator = t1 * t2 + blue.depart * t2 + red.depart * t1
    crossing = -(-numerator // (t1 + t2))
    tick = max(max(blue.depart, red.depart) + 1, crossing)
    if tick > min(blue.arrive, red.arrive):
        return None
    return tick


def next_event_tick(state):
    """Earliest tick after now at which anything can happen."""
    tick = state.tick
    best = math.inf
    for e in state.expeditions:
        if e.arrive < best:
            best = e.arrive
    for w in state.wake_tick:
        if tick < w < best:
            best = w
    if state.params.arc_battles:
        for b, r in _crossing_pairs(state):
            m = meeting_tick(b, r)
            if m is not None and tick < m < best:
                best = m
    return best


def _crossing_pairs(state):
    """(Blue, Red) expeditions on the same arc heading in opposite directions."""
    blues = {}
    reds = []
    for e in state.expeditions:
        if e.side == Side.BLUE:
            blues.setdefault((e.source, e.target), []).append(e)
        else:
            reds.append(e)
    if not blues or not reds:
        return ()
    return [(b, r) for r in reds for b in blues.get((r.target, r.source), ())]


def advance(state, limit=None):
    """
    Run the simulation forward to the next decision point.

    Events at a tick resolve in a fixed order: arc meetings, then arrivals
    (and the node battles they cause), then decision requests, Blue before
    Red. Returns (state, DecisionRequest); the request is TERMINAL when the
    game is over and HORIZON when `limit` is reached first.
    """
    max_ticks = state.params.max_ticks
    bound = max_ticks if limit is None else min(limit, max_ticks)
    wake = state.wake_tick
    while True:
        tick = state.tick
        if tick >= max_ticks:
            return state, DecisionRequest(RequestKind.TERMINAL, tick)
        blue, red = state.strengths()
        if blue <= MIN_FORCE or red <= MIN_FORCE:
            return state, DecisionRequest(RequestKind.TERMINAL, tick)
        if wake[0] <= tick:
            return state, DecisionRequest(RequestKind.DECIDE, tick, Side.BLUE)
        if wake[1] <= tick:
            return state, DecisionRequest(RequestKind.DECIDE, tick, Side.RED)
        if limit is not None and tick >= limit:
            return state, DecisionRequest(RequestKind.HORIZON, tick)

        nxt = next_event_tick(state)
        if nxt > bound:
            state.tick = bound
            continue
        state.tick = nxt
        resolve_tick(state, nxt)


def resolve_tick(state, tick):
    """Resolve every movement event that falls on `tick`."""
    state.events += 1
    if state.params.arc_battles:
        resolve_meetings(state, tick)
    arriving = [e for e in state.expeditions if e.arrive <= tick]
    if arriving:
        state.expeditions = [e for e in state.expeditions if e.arrive > tick]
        arriving.sort(key=lambda e: (e.side, e.target, e.seq))
        for e in arriving:
            resolve_arrival(state, e, tick)


def resolve_meetings(state, tick):
    """Fight every opposing pair that has crossed on an arc by `tick`."""
    while True:
        pair = None
        for b, r in _crossing_pairs(state):
            m = meeting_tick(b, r)
            if m is not None and m <= tick and (pair is None or (b.seq, r.seq) < (pair[0].seq, pair[1].seq)):
                pair = (b, r)
        if pair is None:
            return
        fight_on_arc(state, pair[0], pair[1], tick)


def fight_on_arc(state, blue, red, tick):
    alpha = state.params.blue.lanchester_coeff
    beta = state.params.red.lanchester_coeff
    winner, survivors = resolve_lanchester(blue.size, red.size, alpha, beta)
    remaining = []
    for e in state.expeditions:
        if e is blue:
            if winner == 'A':
                remaining.append(_resized(e, survivors))
        elif e is red:
            if winner == 'B':
                remaining.append(_resized(e, survivors))
        else:
            remaining.append(e)
    state.expeditions = remaining
    side = {'A': Side.BLUE, 'B': Side.RED}.get(winner)
    _record(state, tick, side, 'battle_arc', blue.source, blue.target, blue.size + red.size, survivors)
    _interrupt(state, Side.BLUE, tick)
    _interrupt(state, Side.RED, tick)


def _resized(e, size):
    return Expedition(e.side, size, e.source, e.target, e.depart, e.arrive, e.seq)


def resolve_arrival(state, e, tick):
    node = e.target
    holder = state.owner[node]
    if holder == e.side:
        state.garrison[node] += e.size
        _record(state, tick, e.side, 'reinforce', e.source, node, e.size)
        return
    if holder == NEUTRAL or state.garrison[node] <= 0.0:
        state.owner[node] = e.side
        state.garrison[node] = e.size
        _record(state, tick, e.side, 'capture', e.source, node, e.size)
        return

    attacker = state.params.side(e.side).lanchester_coeff
    defender = state.params.side(holder).lanchester_coeff
    defenders = state.garrison[node]
    winner, survivors = resolve_lanchester(e.size, defenders, attacker, defender)
    if winner == 'A':
        state.owner[node] = e.side
        state.garrison[node] = survivors
        victor = e.side
    elif winner == 'B':
        state.garrison[node] = survivors
        victor = holder
    else:
        # both forces gone; the node stays with its holder, empty
        state.garrison[node] = 0.0
        victor = None
    _record(state, tick, victor, 'battle_node', e.source, node, e.size + defenders, survivors)
    _interrupt(state, Side.BLUE, tick)
    _interrupt(state, Side.RED, tick)


def material_score(state, side):
    """
    Material advantage of `side`: node_points per owned node plus
    unit_points per surviving unit, own total minus opponent total.
    """
    params = state.params
    totals = [0.0, 0.0]
    for o, g in zip(state.owner, state.garrison):
        if o != NEUTRAL:
            totals[o] += params.node_points + params.unit_points * g
    for e in state.expeditions:
        totals[e.side] += params.unit_points * e.size
    return totals[side] - totals[1 - side]


def is_terminal(state, params=None):
    params = params or state.params
    if state.tick >= params.max_ticks:
        return True
    blue, red = state.strengths()
    return blue <= MIN_FORCE or red <= MIN_FORCE


def winner_of(state):
    score = material_score(state, Side.BLUE)
    if score > 0:
        return Winner.BLUE
    if score < 0:
        return Winner.RED
    return Winner.DRAW


def _quantise(x):
    return round(x / KEY_PRECISION)


def state_key(state):
    """
    Hashable transposition key: ownership, quantised garrisons, expeditions
    and clocks, all relative to the current tick.
    """
    tick = state.tick
    expeditions = tuple(sorted(
        (e.side, e.source, e.target, _quantise(e.size), e.depart - tick, e.arrive - tick)
        for e in state.expeditions
    ))
    clocks = tuple(max(0, c - tick) for c in state.next_order_tick)
    wakes = tuple(FOREVER if w - tick >= FOREVER // 2 else max(0, w - tick) for w in state.wake_tick)
    return (
        tuple(state.owner),
        tuple(_quantise(g) for g in state.garrison),
        expeditions,
        clocks,
        wakes,
    )


@dataclass(frozen=True, slots=True)
class TraceEvent:
    tick: int
    side: str
    event_type: str
    source: int | None
    target: int | None
    size: float | None
    survivors: float | None
    score_blue: float


class GameTrace:
    """Event log of one game: orders, arrivals, captures and battles."""

    FIELDS = ['tick', 'side', 'eventType', 'from', 'to', 'size', 'survivors', 'scoreBlue']

    def __init__(self):
        self.events = []

    def add(self, event):
        self.events.append(event)

    def rows(self):
        for e in self.events:
            yield [
                e.tick,
                e.side,
                e.event_type,
                '' if e.source is None else e.source,
                '' if e.target is None else e.target,
                '' if e.size is None else f"{e.size:.6f}",
                '' if e.survivors is None else f"{e.survivors:.6f}",
                f"{e.score_blue:.6f}",
            ]

    def orders(self, side=None):
        return [
            e for e in self.events
            if e.event_type in ('launch', 'wait') and (side is None or e.side == Side(side).name)
        ]

    def __len__(self):
        return len(self.events)


def _record(state, tick, side, event_type, source=None, target=None, size=None, survivors=None):
    if state.trace is None:
        return
    state.trace.add(TraceEvent(
        tick,
        Side(side).name if side is not None else 'NONE',
        event_type,
        source,
        target,
        None if size is None else float(size),
        survivors,
        material_score(state, Side.BLUE),
    ))
