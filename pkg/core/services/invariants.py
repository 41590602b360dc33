"""
Property checks used by the selftest command and the test suite.

Each check returns a CheckResult; sizes are arguments so the tests can run
small versions and selftest the full ones.
"""
import logging
import math
import statistics
import time
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.integrate import solve_ivp

from .agents import build_agent
from .engine import (
    LaunchExpedition, GameParams, GameTrace, Side, SideParams,
    advance, copy_state, create_state, issue_or_wait, resolve_lanchester,
)
from .experiments import derive_seed, play_game
from .maps import ArcSpec, MapGraph, NodeSpec, generate_map
from .opponents import HeuristicModel, random_decide
from .heuristics import ROSTER, heuristic_decide
from .oracle import naive_advance
from .search import MctsConfig, MctsPlanner, RheaConfig, RheaPlanner
from .stats import binomial_lower_tail, simulated_wilson_coverage
from .tuner import SearchSpace, ntbea_optimize

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    elapsed_ms: float = 0.0

    def __str__(self):
        status = 'PASS' if self.passed else 'FAIL'
        return f"[{status}] {self.name}: {self.detail} ({self.elapsed_ms / 1000.0:.1f}s)"


def _timed(name, fn):
    started = time.perf_counter()
    passed, detail = fn()
    return CheckResult(name, passed, detail, (time.perf_counter() - started) * 1000.0)


def small_random_map(rng, node_count):
    """Random tree plus a couple of chords; arc lengths 1-6."""
    arcs = {}
    for i in range(1, node_count):
        j = int(rng.integers(i))
        arcs[(j, i)] = int(rng.integers(1, 7))
    for _ in range(int(rng.integers(0, 3))):
        a, b = sorted(int(x) for x in rng.choice(node_count, size=2, replace=False))
        arcs.setdefault((a, b), int(rng.integers(1, 7)))
    nodes = [NodeSpec(i, float(rng.random()), float(rng.random())) for i in range(node_count)]
    return MapGraph(nodes, [ArcSpec(a, b, length) for (a, b), length in sorted(arcs.items())])


def scripted_scenario(seed):
    """A small seeded game setup with randomised rules, for engine-vs-oracle runs."""
    rng = np.random.default_rng(seed)
    map_graph = small_random_map(rng, int(rng.integers(3, 7)))
    sides = [
        SideParams(
            speed=float(rng.choice([0.5, 1.0, 1.5])),
            lanchester_coeff=float(rng.choice([0.8, 1.0, 1.25])),
            c2_min_delay=int(rng.choice([0, 1, 3, 10])),
        )
        for _ in range(2)
    ]
    params = GameParams(max_ticks=int(rng.integers(60, 200)), blue=sides[0], red=sides[1],
                        arc_battles=bool(rng.random() < 0.8))
    blue, red = (int(x) for x in rng.choice(map_graph.node_count, size=2, replace=False))
    return create_state(map_graph, params, blue, red, start_force=float(rng.integers(20, 120)), seed=seed)


def run_scripted(state, advance_fn, seed):
    """Random-policy self-play driven by `advance_fn`; returns (trace rows, final state)."""
    state = copy_state(state)
    state.trace = GameTrace()
    rng = np.random.default_rng(seed)
    while True:
        state, request = advance_fn(state)
        if not request.is_decision:
            break
        issue_or_wait(state, request.side, random_decide(state, request.side, rng, k=5))
    return list(state.trace.rows()), state


def check_oracle_equivalence(scenarios=200, seed=0):
    def run():
        for i in range(scenarios):
            scenario_seed = derive_seed(seed, i)
            state = scripted_scenario(scenario_seed)
            fast_rows, fast = run_scripted(state, advance, scenario_seed)
            slow_rows, slow = run_scripted(state, naive_advance, scenario_seed)
            if fast_rows != slow_rows or fast.owner != slow.owner or fast.garrison != slow.garrison:
                return False, f"scenario {i} (seed {scenario_seed}) diverges"
        return True, f"{scenarios} scenarios, identical traces"
    return _timed('engine vs per-tick oracle', run)


def lanchester_ode(a, b, alpha, beta):
    """Integrate dA/dt = -beta*B, dB/dt = -alpha*A until one force is gone."""
    def rhs(t, y):
        return [-beta * y[1], -alpha * y[0]]

    def gone(t, y):
        return min(y[0], y[1])
    gone.terminal = True
    gone.direction = -1

    # the loser is gone well before this unless the battle is an exact draw
    horizon = 1000.0 / math.sqrt(alpha * beta)
    sol = solve_ivp(rhs, (0.0, horizon), [a, b], method='DOP853', events=gone, rtol=1e-12, atol=1e-12)
    end = sol.y_events[0][0] if sol.y_events and len(sol.y_events[0]) else sol.y[:, -1]
    return max(0.0, float(end[0])), max(0.0, float(end[1]))


def check_lanchester(trials=1000, seed=0, tolerance=1e-6):
    def run():
        rng = np.random.default_rng(seed)
        worst = 0.0
        for _ in range(trials):
            a, b = (float(x) for x in rng.uniform(1.0, 100.0, size=2))
            alpha, beta = (float(x) for x in rng.uniform(0.5, 2.0, size=2))
            winner, survivors = resolve_lanchester(a, b, alpha, beta)
            ode_a, ode_b = lanchester_ode(a, b, alpha, beta)
            expected = ode_a if winner == 'A' else ode_b
            scale = max(a, b)
            worst = max(worst, abs(survivors - expected) / scale)
            invariant = alpha * a * a - beta * b * b
            after = alpha * survivors ** 2 if winner == 'A' else -beta * survivors ** 2
            if abs(invariant - after) > 1e-9 * max(alpha * a * a, beta * b * b):
                return False, f"square-law invariant broken for a={a}, b={b}"
        return worst <= tolerance, f"{trials} battles, worst relative error {worst:.2e}"
    return _timed('Lanchester closed form vs ODE', run)


def check_conservation(games=1000, seed=0):
    """Random self-play: per-side strength never grows; replays are identical."""
    def run():
        params = GameParams()
        for g in range(games):
            game_seed = derive_seed(seed, g)
            rng = np.random.default_rng(game_seed)
            map_graph = generate_map(rng)
            blue, red = (int(x) for x in rng.choice(map_graph.node_count, size=2, replace=False))
            state = create_state(map_graph, params, blue, red, seed=game_seed)
            previous = [state.strength(Side.BLUE), state.strength(Side.RED)]
            while True:
                state, request = advance(state)
                now = [state.strength(Side.BLUE), state.strength(Side.RED)]
                if any(n > p + 1e-9 for n, p in zip(now, previous)):
                    return False, f"strength grew in game {g} at tick {state.tick}"
                previous = now
                if not request.is_decision:
                    break
                issue_or_wait(state, request.side, random_decide(state, request.side, rng))
            if g % 50 == 0:
                first = play_game(map_graph, 'RND', 'RND', params, game_seed)
                second = play_game(map_graph, 'RND', 'RND', params, game_seed)
                if first != second:
                    return False, f"game {g} is not reproducible"
        return True, f"{games} random games"
    return _timed('conservation and determinism', run)


def dominant_attack_scenario(seed, leaves=7):
    """
    Star map: Red holds the hub with a small force, Blue holds every leaf
    with a large one. Attacking the hub with more than its garrison ends the
    game at once and is the best move.
    """
    rng = np.random.default_rng(seed)
    nodes = [NodeSpec(0, 0.5, 0.5)]
    arcs = []
    for i in range(1, leaves + 1):
        angle = 2 * math.pi * i / leaves
        nodes.append(NodeSpec(i, 0.5 + 0.3 * math.cos(angle), 0.5 + 0.3 * math.sin(angle)))
        arcs.append(ArcSpec(0, i, int(rng.integers(2, 6))))
    map_graph = MapGraph(nodes, arcs)
    state = create_state(map_graph, GameParams(), 1, 0, seed=seed)
    red_force = float(rng.integers(5, 11))
    state.garrison[0] = red_force
    for i in range(1, leaves + 1):
        state.owner[i] = Side.BLUE
        state.garrison[i] = float(rng.integers(50, 101))
    return state, red_force


def is_dominant_attack(order, red_force):
    return isinstance(order, LaunchExpedition) and order.target == 0 and order.size > red_force


def check_dominant_attack(runs=100, seed=0, threshold=0.9):
    agents = ('RHEA', 'MCTS', 'MCTS+MCTS')

    def run():
        hits = {a: 0 for a in agents}
        for i in range(runs):
            scenario_seed = derive_seed(seed, i)
            for spec in agents:
                state, red_force = dominant_attack_scenario(scenario_seed)
                agent = build_agent(spec, np.random.default_rng(scenario_seed))
                hits[spec] += is_dominant_attack(agent.decide(state, Side.BLUE), red_force)
        rates = {a: hits[a] / runs for a in agents}
        detail = ', '.join(f"{a} {rates[a]:.0%}" for a in agents)
        return all(r >= threshold for r in rates.values()), detail
    return _timed('dominant attack found', run)


def check_binomial_tails(seed=0, cases=200):
    """scipy's binomial tail against an exact rational PMF sum."""

    def run():
        rng = np.random.default_rng(seed)
        worst = 0.0
        for _ in range(cases):
            n = int(rng.integers(1, 1001))
            k = int(rng.integers(0, n + 1))
            a = int(rng.integers(1, 100))
            mass = sum(math.comb(n, i) * a ** i * (100 - a) ** (n - i) for i in range(k + 1))
            exact = float(Fraction(mass, 100 ** n))
            worst = max(worst, abs(binomial_lower_tail(k, n, a / 100) - exact))
        return worst <= 1e-12, f"{cases} tails, worst absolute error {worst:.2e}"
    return _timed('exact binomial tails', run)


def check_wilson_calibration(trials=10000, seed=0, games=200, p=0.5):
    def run():
        coverage = simulated_wilson_coverage(games, p, trials, np.random.default_rng(seed))
        return coverage >= 0.99, f"99% interval covered p={p} in {coverage:.2%} of {trials} trials"
    return _timed('Wilson interval calibration', run)


def check_ntbea(runs=20, budget=200, seed=0, required=18):
    space = SearchSpace([('x', range(7)), ('y', range(7)), ('z', range(7))])
    optimum = (5, 1, 3)

    def fitness(point):
        return -sum(abs(a - b) for a, b in zip(point, optimum))

    def run():
        found = 0
        for r in range(runs):
            result = ntbea_optimize(space, fitness, budget, np.random.default_rng(derive_seed(seed, r)))
            found += result.best == optimum
        return found >= required, f"optimum found in {found}/{runs} runs"
    return _timed('NTBEA on a synthetic landscape', run)


def decision_timings(decisions=30, seed=0):
    """Median decision ms and mean forward-model events per decision on 10-node maps."""
    results = {}
    setups = {
        'RHEA': (RheaPlanner, RheaConfig(), None),
        'MCTS': (MctsPlanner, MctsConfig(), None),
        'RHEA+H1': (RheaPlanner, RheaConfig(), HeuristicModel(ROSTER['H1'], 'H1')),
        'MCTS+H1': (MctsPlanner, MctsConfig(), HeuristicModel(ROSTER['H1'], 'H1')),
    }
    for name, (planner_class, config, model) in setups.items():
        times, events = [], []
        for d in range(decisions):
            rng = np.random.default_rng(derive_seed(seed, d))
            map_graph = generate_map(rng, 10)
            state = create_state(map_graph, GameParams(), 0, map_graph.node_count - 1)
            planner = planner_class(Side.BLUE, config, model, rng)
            planner.decide(state)
            times.append(planner.stats.elapsed_ms)
            events.append(planner.stats.events)
        results[name] = (statistics.median(times), statistics.mean(events))
    return results


def heuristic_timing(decisions=500, seed=0, name='H1'):
    """Median microseconds per heuristic decision over positions from heuristic self-play."""
    params = ROSTER[name]
    times = []
    game = 0
    while len(times) < decisions:
        rng = np.random.default_rng(derive_seed(seed, game))
        map_graph = generate_map(rng, 10)
        state = create_state(map_graph, GameParams(), 0, map_graph.node_count - 1)
        while len(times) < decisions:
            state, request = advance(state)
            if not request.is_decision:
                break
            started = time.perf_counter()
            order = heuristic_decide(state, request.side, params)
            times.append((time.perf_counter() - started) * 1e6)
            issue_or_wait(state, request.side, order)
        game += 1
    return statistics.median(times)


def check_performance(decisions=30, seed=0):
    def run():
        t = decision_timings(decisions, seed)
        rhea_ms, rhea_events = t['RHEA']
        mcts_ms, mcts_events = t['MCTS']
        ratios = [t['RHEA+H1'][1] / max(1.0, rhea_events), t['MCTS+H1'][1] / max(1.0, mcts_events)]
        heuristic_us = heuristic_timing(max(50, 10 * decisions), seed)
        passed = rhea_ms <= 5.0 and mcts_ms <= 10.0 and max(ratios) <= 2.2
        detail = (
            f"median RHEA {rhea_ms:.2f} ms, MCTS {mcts_ms:.2f} ms, H1 {heuristic_us:.1f} us; "
            f"event ratio with a heuristic model {ratios[0]:.2f} (RHEA), {ratios[1]:.2f} (MCTS)"
        )
        return passed, detail
    return _timed('decision cost', run)


def run_all(scale=1.0, seed=0):
    """Every check, sizes multiplied by `scale` (1.0 is the full suite)."""
    def n(full):
        return max(1, int(round(full * scale)))

    return [
        check_oracle_equivalence(n(200), seed),
        check_lanchester(n(1000), seed),
        check_conservation(n(1000), seed),
        check_dominant_attack(n(100), seed),
        check_binomial_tails(seed, n(200)),
        check_wilson_calibration(n(10000), seed),
        check_ntbea(n(20), 200, seed, required=math.ceil(0.9 * n(20))),
        check_performance(n(30), seed),
    ]
