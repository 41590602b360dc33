"""
Parameterised Heuristic policy.

Three parameters, tuned with NTBEA for the preset roster:
  - Offence: strength odds (attacker:defender) required to Attack
  - Defence: odds (defenders:inbound) below which a node Withdraws
  - Actions: ordered subset of Attack, Withdraw, Reinforce, Redeploy;
    the first valid one is executed, otherwise the side Waits
"""
import math
from dataclasses import dataclass
from enum import Enum

from .engine import MIN_FORCE, NEUTRAL, LaunchExpedition, Wait
from .exceptions import ConfigError


class HeuristicAction(Enum):
    ATTACK = 'A'
    WITHDRAW = 'W'
    REINFORCE = 'RF'
    REDEPLOY = 'RD'


@dataclass(frozen=True)
class HeuristicParams:
    offence: float
    defence: float
    actions: tuple
    count_inbound: bool = True

    OFFENCE_RANGE = (1.0, 10.0)
    DEFENCE_RANGE = (0.0, 5.0)

    def __post_init__(self):
        lo, hi = self.OFFENCE_RANGE
        if not lo <= self.offence <= hi:
            raise ConfigError(f"offence must be in [{lo}, {hi}], got {self.offence}")
        lo, hi = self.DEFENCE_RANGE
        if not lo <= self.defence <= hi:
            raise ConfigError(f"defence must be in [{lo}, {hi}], got {self.defence}")
        if not self.actions:
            raise ConfigError("a heuristic needs at least one action")
        if len(set(self.actions)) != len(self.actions):
            raise ConfigError(f"duplicate actions in {self.action_string}")

    @property
    def action_string(self):
        return ','.join(a.value for a in self.actions)

    @classmethod
    def parse_actions(cls, text):
        """'RD,A,W,RF' (commas, pipes or slashes) -> tuple of HeuristicAction."""
        parts = [p.strip().upper() for p in text.replace('|', ',').replace('/', ',').split(',') if p.strip()]
        try:
            return tuple(HeuristicAction(p) for p in parts)
        except ValueError as e:
            raise ConfigError(f"unknown heuristic action in {text!r}") from e

    @classmethod
    def from_values(cls, offence, defence, actions, count_inbound=True):
        if isinstance(actions, str):
            actions = cls.parse_actions(actions)
        return cls(float(offence), float(defence), tuple(actions), count_inbound)

    def with_odds(self, offence, defence):
        return HeuristicParams(float(offence), float(defence), self.actions, self.count_inbound)

    def __str__(self):
        return f"H({self.offence:g},{self.defence:g},{self.action_string.replace(',', '|')})"


A, W, RF, RD = (HeuristicAction.ATTACK, HeuristicAction.WITHDRAW,
                HeuristicAction.REINFORCE, HeuristicAction.REDEPLOY)

# Heuristic roster; H0 handcrafted, H1-H5 tuned against the listed targets
ROSTER = {
    'H0': HeuristicParams(3.0, 1.2, (W, A)),
    'H1': HeuristicParams(1.0, 0.5, (RD, A, W, RF)),
    'H2': HeuristicParams(10.0, 1.5, (RD, A, W, RF)),
    'H3': HeuristicParams(10.0, 1.0, (RD, W, A, RF)),
    'H4': HeuristicParams(10.0, 1.2, (A, W, RF, RD)),
    'H5': HeuristicParams(3.0, 0.5, (W, RD, A, RF)),
}

IDLE_WAIT = 20


class Situation:
    """Threat picture of one side, computed once per decision."""

    def __init__(self, state, side):
        self.state = state
        self.side = side
        self.enemy = enemy = 1 - side
        self.map = state.map
        n = self.map.node_count
        self.inbound_enemy = [0.0] * n
        self.inbound_own = [0.0] * n
        for e in state.expeditions:
            if e.side == enemy:
                self.inbound_enemy[e.target] += e.size
            else:
                self.inbound_own[e.target] += e.size
        self.owned = []
        self.enemy_adjacent = [False] * n
        for i, o in enumerate(state.owner):
            if o == side:
                self.owned.append(i)
            elif o == enemy:
                for j in self.map.neighbour_ids[i]:
                    self.enemy_adjacent[j] = True
        self._enemy_neighbours = {}

    def is_threatened(self, node):
        return self.enemy_adjacent[node] or self.inbound_enemy[node] > 0.0

    def unthreatened_owned(self, node):
        return self.state.owner[node] == self.side and not self.is_threatened(node)

    def enemy_neighbours(self, node):
        if not self.enemy_adjacent[node]:
            return ()
        found = self._enemy_neighbours.get(node)
        if found is None:
            owner = self.state.owner
            found = self._enemy_neighbours[node] = [
                j for j in self.map.neighbour_ids[node] if owner[j] == self.enemy
            ]
        return found

    def defender_strength(self, node, count_inbound):
        strength = self.state.garrison[node]
        if count_inbound:
            strength += self.inbound_enemy[node]
        return strength


def _increments_needed(need, garrison):
    """Smallest k in 1..10 with k/10 x garrison >= need, or None."""
    if garrison <= MIN_FORCE:
        return None
    k = max(1, math.ceil(need / garrison * 10 - 1e-9))
    return k if k <= 10 else None


def _portion(garrison, k):
    return garrison if k >= 10 else min(garrison, round(k / 10 * garrison, 6))


def attack_order(state, side, offence, count_inbound=True, situation=None):
    """
    Full-strength attack from an owned node on an adjacent enemy node where
    garrison(A) >= offence x defenders(B). Best odds win; ties go to the
    lowest target id, then lowest source id.
    """
    sit = situation or Situation(state, side)
    best = None
    for a in sit.owned:
        force = state.garrison[a]
        if force <= MIN_FORCE:
            continue
        for b in sit.enemy_neighbours(a):
            defenders = sit.defender_strength(b, count_inbound)
            if force < offence * defenders:
                continue
            odds = math.inf if defenders <= 0.0 else force / defenders
            key = (-odds, b, a)
            if best is None or key < best[0]:
                best = (key, a, b)
    if best is None:
        return None
    _, a, b = best
    return LaunchExpedition(state.garrison[a], a, b)


def _retreat_target(sit, node):
    """Nearest unthreatened owned or neutral neighbour (arc length, then id)."""
    options = []
    for j, length in sit.map.neighbours[node]:
        holder = sit.state.owner[j]
        if holder == sit.enemy or sit.is_threatened(j):
            continue
        if holder == sit.side or holder == NEUTRAL:
            options.append((length, j))
    return min(options)[1] if options else None


def withdraw_order(state, side, defence, situation=None):
    """
    Pull the whole garrison out of an owned node whose defenders are fewer
    than defence x inbound enemy strength, to the nearest unthreatened node.
    """
    sit = situation or Situation(state, side)
    for b in sit.owned:
        inbound = sit.inbound_enemy[b]
        defenders = state.garrison[b]
        if inbound <= 0.0 or defenders <= MIN_FORCE:
            continue
        if defenders >= defence * inbound:
            continue
        target = _retreat_target(sit, b)
        if target is not None:
            return LaunchExpedition(defenders, b, target)
    return None


def reinforce_order(state, side, defence, situation=None):
    """
    Top up an owned node that the largest adjacent enemy garrison could
    force into a Withdraw, from the biggest unthreatened neighbour, with the
    smallest 10% step of the source garrison that is enough (capped at 100%).
    """
    sit = situation or Situation(state, side)
    for b in sit.owned:
        enemies = sit.enemy_neighbours(b)
        if not enemies:
            continue
        threat = max(state.garrison[e] for e in enemies)
        if threat <= 0.0 or state.garrison[b] >= defence * threat:
            continue
        sources = [
            x for x in sit.map.neighbour_ids[b]
            if sit.unthreatened_owned(x) and state.garrison[x] > MIN_FORCE
        ]
        if not sources:
            continue
        source = min(sources, key=lambda x: (-state.garrison[x], x))
        need = defence * threat - state.garrison[b]
        k = _increments_needed(need, state.garrison[source]) or 10
        return LaunchExpedition(_portion(state.garrison[source], k), source, b)
    return None


def redeploy_order(state, side, offence, count_inbound=True, situation=None):
    """
    Move force from an unthreatened node to an adjacent owned front-line
    node so that it could then Attack. Smallest sufficient shipment wins;
    ties go to the lowest target id.
    """
    sit = situation or Situation(state, side)
    best = None
    for t in sit.owned:
        enemies = sit.enemy_neighbours(t)
        if not enemies:
            continue
        for x in sit.map.neighbour_ids[t]:
            if not sit.unthreatened_owned(x):
                continue
            source_force = state.garrison[x]
            if source_force <= MIN_FORCE:
                continue
            for e in enemies:
                need = offence * sit.defender_strength(e, count_inbound) - state.garrison[t]
                if need <= 0.0:
                    # already able to attack on its own
                    continue
                k = _increments_needed(need, source_force)
                if k is None:
                    continue
                sent = _portion(source_force, k)
                key = (sent, t, x)
                if best is None or key < best[0]:
                    best = (key, x, t)
    if best is None:
        return None
    (sent, _, _), x, t = best
    return LaunchExpedition(sent, x, t)


def heuristic_decide(state, side, params):
    """Run through params.actions and return the first valid one, else Wait."""
    sit = Situation(state, side)
    for action in params.actions:
        if action is HeuristicAction.ATTACK:
            order = attack_order(state, side, params.offence, params.count_inbound, sit)
        elif action is HeuristicAction.WITHDRAW:
            order = withdraw_order(state, side, params.defence, sit)
        elif action is HeuristicAction.REINFORCE:
            order = reinforce_order(state, side, params.defence, sit)
        else:
            order = redeploy_order(state, side, params.offence, params.count_inbound, sit)
        if order is not None:
            return order
    return Wait(IDLE_WAIT)
