"""
Naive tick-by-tick reference simulator.

Steps the clock one tick at a time and looks for crossings and arrivals by
direct inspection instead of computing the next event. Used by the tests and
the selftest command to check the event-skipping engine.
"""
from .engine import (
    SIDES, DecisionRequest, RequestKind, Side,
    fight_on_arc, is_terminal, resolve_arrival,
)


def _crossed(blue, red, tick):
    """Both on the same arc in opposite directions and past each other at `tick`."""
    if blue.source != red.target or blue.target != red.source:
        return False
    if tick <= blue.depart or tick <= red.depart:
        return False
    if tick > blue.arrive or tick > red.arrive:
        return False
    t1 = blue.arrive - blue.depart
    t2 = red.arrive - red.depart
    return (tick - blue.depart) * t2 + (tick - red.depart) * t1 >= t1 * t2


def step(state):
    """Move the clock forward exactly one tick and resolve what happens there."""
    state.tick += 1
    tick = state.tick
    if state.params.arc_battles:
        while True:
            candidates = [
                (b, r)
                for b in state.expeditions if b.side == Side.BLUE
                for r in state.expeditions if r.side == Side.RED
                if _crossed(b, r, tick)
            ]
            if not candidates:
                break
            blue, red = min(candidates, key=lambda pair: (pair[0].seq, pair[1].seq))
            fight_on_arc(state, blue, red, tick)

    arriving = sorted(
        (e for e in state.expeditions if e.arrive == tick),
        key=lambda e: (e.side, e.target, e.seq),
    )
    if arriving:
        state.expeditions = [e for e in state.expeditions if e.arrive != tick]
        for e in arriving:
            resolve_arrival(state, e, tick)


def naive_advance(state, limit=None):
    """Same contract as engine.advance(), one tick at a time."""
    bound = state.params.max_ticks if limit is None else min(limit, state.params.max_ticks)
    while True:
        if is_terminal(state):
            return state, DecisionRequest(RequestKind.TERMINAL, state.tick)
        for side in SIDES:
            if state.wake_tick[side] <= state.tick:
                return state, DecisionRequest(RequestKind.DECIDE, state.tick, side)
        if limit is not None and state.tick >= limit:
            return state, DecisionRequest(RequestKind.HORIZON, state.tick)
        if state.tick >= bound:
            continue
        step(state)
