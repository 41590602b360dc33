"""
Game orchestration and the two experiment protocols.

  - round_robin(): every pair of agents plays every map twice, sides swapped
  - accuracy_sweep(): a planner against a heuristic, with the heuristic's
    Offence/Defence swept either in the planner's opponent model or in the
    opponent itself

Games are independent work items run through a joblib pool. Each game's
seed is derived from (master seed, map id, pair id, side order) with numpy's
SeedSequence, so results do not depend on worker count or scheduling.
"""
import csv
import json
import logging
from collections import defaultdict
from dataclasses import dataclass, field
from importlib import metadata
from itertools import combinations
from pathlib import Path

import numpy as np
from joblib import Parallel, delayed

from .agents import parse_agent_spec
from .engine import (
    GameTrace, Side, Winner, advance, create_state, issue_or_wait, material_score, winner_of,
)
from .exceptions import AgentSpecError, RunInterrupted
from .heuristics import HeuristicParams
from .maps import generate_map
from .stats import binomial_best, rate_point, wilson_interval

logger = logging.getLogger(__name__)

# Stream tags keep map seeds and game seeds apart
MAP_STREAM = 0
GAME_STREAM = 1
BASELINE_CELL = 10_000

PACKAGES = ('Django', 'numpy', 'scipy', 'networkx', 'joblib')


def derive_seed(*entropy):
    """64-bit seed from a tuple of non-negative integers."""
    state = np.random.SeedSequence([int(e) for e in entropy]).generate_state(2, dtype=np.uint32)
    return (int(state[0]) << 32) | int(state[1])


@dataclass(frozen=True)
class GameRecord:
    map_id: int
    seed: int
    blue: str
    red: str
    blue_start: int
    red_start: int
    winner: Winner
    score_blue: float
    ticks: int
    decisions_blue: int
    decisions_red: int
    events: int = 0
    decision_ms_blue: float = field(default=0.0, compare=False)
    decision_ms_red: float = field(default=0.0, compare=False)

    FIELDS = (
        'mapId', 'seed', 'blue', 'red', 'blueStart', 'redStart',
        'winner', 'scoreBlue', 'ticks', 'decisionsBlue', 'decisionsRed', 'events',
    )

    def row(self):
        return [
            self.map_id, self.seed, self.blue, self.red, self.blue_start, self.red_start,
            self.winner.value, f"{self.score_blue:.6f}", self.ticks,
            self.decisions_blue, self.decisions_red, self.events,
        ]

    def points(self, side):
        """1 for a win, 0.5 for a draw, 0 for a loss."""
        if self.winner is Winner.DRAW:
            return 0.5
        won = Winner.BLUE if Side(side) == Side.BLUE else Winner.RED
        return 1.0 if self.winner is won else 0.0


def subject_side(game):
    """Side the subject plays in game `game` of a series that swaps sides every game."""
    return Side.BLUE if game % 2 == 0 else Side.RED


def pick_starts(map_graph, rng):
    blue, red = rng.choice(map_graph.node_count, size=2, replace=False)
    return int(blue), int(red)


def play_game(map_graph, blue_spec, red_spec, params, seed, map_id=0,
              roster=None, mcts=None, rhea=None, starts=None, trace=False):
    """
    Play one game to the end. Deterministic per (map, specs, params, seed).
    Returns a GameRecord, or (GameRecord, GameTrace) when trace=True.
    """
    blue_parsed = parse_agent_spec(blue_spec, roster)
    red_parsed = parse_agent_spec(red_spec, roster)
    start_seq, blue_seq, red_seq = np.random.SeedSequence(seed).spawn(3)
    if starts is None:
        starts = pick_starts(map_graph, np.random.default_rng(start_seq))
    agents = {
        Side.BLUE: blue_parsed.build(np.random.default_rng(blue_seq), mcts, rhea),
        Side.RED: red_parsed.build(np.random.default_rng(red_seq), mcts, rhea),
    }

    state = create_state(map_graph, params, starts[0], starts[1], seed=seed)
    if trace:
        state.trace = GameTrace()
    decisions = [0, 0]
    elapsed = [0.0, 0.0]
    events = 0

    while True:
        state, request = advance(state)
        if not request.is_decision:
            break
        side = request.side
        agent = agents[side]
        order = agent.decide(state, side)
        issue_or_wait(state, side, order)
        decisions[side] += 1
        elapsed[side] += agent.last_stats.elapsed_ms
        events += agent.last_stats.events

    record = GameRecord(
        map_id=map_id,
        seed=seed,
        blue=blue_parsed.text,
        red=red_parsed.text,
        blue_start=starts[0],
        red_start=starts[1],
        winner=winner_of(state),
        score_blue=material_score(state, Side.BLUE),
        ticks=state.tick,
        decisions_blue=decisions[Side.BLUE],
        decisions_red=decisions[Side.RED],
        events=events,
        decision_ms_blue=elapsed[Side.BLUE] / max(1, decisions[Side.BLUE]),
        decision_ms_red=elapsed[Side.RED] / max(1, decisions[Side.RED]),
    )
    logger.debug(
        "Map %d seed %d: %s (Blue) vs %s (Red) -> %s, score %.2f at tick %d",
        map_id, seed, record.blue, record.red, record.winner.value, record.score_blue, record.ticks,
    )
    if trace:
        return record, state.trace
    return record


@dataclass(frozen=True)
class GameTask:
    map_id: int
    map_graph: object
    blue: str
    red: str
    seed: int


def _play_task(task, config):
    return play_game(
        task.map_graph, task.blue, task.red, config.game, task.seed, map_id=task.map_id,
        roster=config.roster, mcts=config.mcts, rhea=config.rhea,
    )


def run_games(tasks, config, workers=None, progress=None, chunk_size=None):
    """
    Play `tasks` on a joblib pool, in chunks so that an interrupt keeps the
    games already finished. Results come back in task order.
    """
    workers = config.workers if workers is None else workers
    chunk_size = chunk_size or max(8, 8 * (workers if workers > 0 else 8))
    records = []
    try:
        with Parallel(n_jobs=workers) as parallel:
            for start in range(0, len(tasks), chunk_size):
                chunk = tasks[start:start + chunk_size]
                records.extend(parallel(delayed(_play_task)(task, config) for task in chunk))
                if progress is not None:
                    progress(len(records), len(tasks))
    except KeyboardInterrupt:
        logger.warning("Interrupted after %d of %d games", len(records), len(tasks))
        raise RunInterrupted(records)
    return records


def experiment_maps(config, count, seed):
    """`count` maps, map i drawn from its own seed stream."""
    maps = []
    lo, hi = config.maps.min_nodes, config.maps.max_nodes
    for map_id in range(count):
        rng = np.random.default_rng(derive_seed(seed, map_id, MAP_STREAM))
        maps.append(generate_map(rng, int(rng.integers(lo, hi + 1))))
    return maps


class WinRateTable:
    """
    Pairwise win rates in percent; rate(i, j) is row agent i against column
    agent j. Draws give half a win to each side.
    """

    def __init__(self, agents):
        self.agents = list(agents)
        n = len(self.agents)
        self.index = {a: i for i, a in enumerate(self.agents)}
        self.wins = np.zeros((n, n))
        self.games = np.zeros((n, n), dtype=np.int64)

    def add(self, record):
        b, r = self.index[record.blue], self.index[record.red]
        self.wins[b, r] += record.points(Side.BLUE)
        self.wins[r, b] += record.points(Side.RED)
        self.games[b, r] += 1
        self.games[r, b] += 1

    @classmethod
    def from_records(cls, agents, records):
        table = cls(agents)
        for record in records:
            table.add(record)
        return table

    @property
    def games_per_pair(self):
        off = self.games[~np.eye(len(self.agents), dtype=bool)]
        return int(off.max()) if off.size else 0

    def rate(self, i, j):
        if i == j or self.games[i, j] == 0:
            return 50.0
        return 100.0 * self.wins[i, j] / self.games[i, j]

    def matrix(self):
        n = len(self.agents)
        return [[self.rate(i, j) for j in range(n)] for i in range(n)]

    def average(self, i):
        """Row mean over every column, the 50 on the diagonal included."""
        return float(np.mean([self.rate(i, j) for j in range(len(self.agents))]))

    def marks(self, alpha=0.05):
        """
        marks[i][j] is True when row i's result against column j is not
        significantly below the best result in that column.
        """
        n = len(self.agents)
        marks = [[False] * n for _ in range(n)]
        for j in range(n):
            rows = [i for i in range(n) if i != j and self.games[i, j] > 0]
            if not rows:
                continue
            column = binomial_best(
                [float(self.wins[i, j]) for i in rows], [int(self.games[i, j]) for i in rows], alpha,
            )
            for i, marked in zip(rows, column):
                marks[i][j] = marked
        return marks


def round_robin_tasks(agents, maps, seed):
    tasks = []
    for pair_id, (i, j) in enumerate(combinations(range(len(agents)), 2)):
        for map_id, map_graph in enumerate(maps):
            for order in (0, 1):
                blue, red = (agents[i], agents[j]) if order == 0 else (agents[j], agents[i])
                tasks.append(GameTask(map_id, map_graph, blue, red, derive_seed(seed, map_id, pair_id, order)))
    return tasks


def canonical_agents(specs, roster=None):
    names = [parse_agent_spec(s, roster).text for s in specs]
    if len(set(names)) != len(names):
        raise AgentSpecError(f"duplicate agents in {', '.join(specs)}")
    return names


def round_robin(agent_specs, n_maps, config, seed=None, workers=None, progress=None):
    """Returns (WinRateTable, records)."""
    seed = config.seed if seed is None else seed
    agents = canonical_agents(agent_specs, config.roster)
    if len(agents) < 2:
        raise AgentSpecError("a round robin needs at least two agents")
    maps = experiment_maps(config, n_maps, seed)
    tasks = round_robin_tasks(agents, maps, seed)
    logger.info(
        "Round robin: %d agents, %d maps, %d games", len(agents), n_maps, len(tasks),
    )
    records = run_games(tasks, config, workers, progress)
    return WinRateTable.from_records(agents, records), records


@dataclass
class SweepCell:
    offence: float
    defence: float
    wins: float = 0.0
    games: int = 0

    @property
    def rate(self):
        return self.wins / self.games if self.games else 0.0


@dataclass
class SweepResult:
    """
    Win rate of the subject (the planner) over the Offence x Defence grid,
    plus the same games played by the planner without an opponent model.
    """
    mode: str
    subject: str
    opponent: str
    cells: list
    baseline: list
    records: list = field(default_factory=list)

    def cell(self, offence, defence):
        for c in self.cells:
            if c.offence == offence and c.defence == defence:
                return c
        raise KeyError((offence, defence))

    @property
    def baseline_rate(self):
        games = sum(c.games for c in self.baseline)
        return sum(c.wins for c in self.baseline) / games if games else 0.0

    def curve(self, confidence=0.99):
        """Defence-marginalised win rate per Offence value, tested against the baseline."""
        offences = sorted({c.offence for c in self.cells})
        points = []
        for o in offences:
            row = [c for c in self.cells if c.offence == o]
            base = [c for c in self.baseline if c.offence == o] or self.baseline
            base_games = sum(c.games for c in base)
            base_rate = sum(c.wins for c in base) / base_games if base_games else None
            points.append((
                rate_point(o, sum(c.wins for c in row), sum(c.games for c in row), base_rate, confidence),
                base_rate,
            ))
        return points


def _sweep_specs(sweep, offence, defence):
    """(subject planner spec, opponent spec) for one grid cell."""
    swept = str(HeuristicParams.from_values(offence, defence, sweep.actions))
    if sweep.mode == 'model':
        return f"{sweep.algo}+{swept}", sweep.fixed
    return f"{sweep.algo}+{sweep.fixed}", swept


def _sweep_tasks(cell_id, subject, opponent, games, seed, config):
    tasks = []
    lo, hi = config.maps.min_nodes, config.maps.max_nodes
    for g in range(games):
        rng = np.random.default_rng(derive_seed(seed, cell_id, g, MAP_STREAM))
        map_graph = generate_map(rng, int(rng.integers(lo, hi + 1)))
        blue, red = (subject, opponent) if subject_side(g) == Side.BLUE else (opponent, subject)
        tasks.append(GameTask(g, map_graph, blue, red, derive_seed(seed, cell_id, g, GAME_STREAM)))
    return tasks


def accuracy_sweep(config, seed=None, workers=None, progress=None):
    """
    Play config.sweep.games_per_cell games per Offence x Defence cell, the
    subject alternating sides on fresh random maps. The baseline plays the
    planner with no opponent model: once overall in model mode, once per
    cell in opponent mode (where the opponent changes with the cell).
    """
    sweep = config.sweep
    seed = config.seed if seed is None else seed
    games = sweep.games_per_cell
    grid = [(o, d) for o in sweep.offence for d in sweep.defence]

    jobs = []
    for cell_id, (o, d) in enumerate(grid):
        subject, opponent = _sweep_specs(sweep, o, d)
        jobs.append(('cell', o, d, subject, opponent, cell_id))
    if sweep.mode == 'model':
        jobs.append(('baseline', None, None, sweep.algo, sweep.fixed, BASELINE_CELL))
    else:
        for cell_id, (o, d) in enumerate(grid):
            _, opponent = _sweep_specs(sweep, o, d)
            jobs.append(('baseline', o, d, sweep.algo, opponent, BASELINE_CELL + cell_id))

    tasks = []
    owners = []
    for index, (_, _, _, subject, opponent, cell_id) in enumerate(jobs):
        subject = parse_agent_spec(subject, config.roster).text
        opponent = parse_agent_spec(opponent, config.roster).text
        jobs[index] = jobs[index][:3] + (subject, opponent, cell_id)
        for g, task in enumerate(_sweep_tasks(cell_id, subject, opponent, games, seed, config)):
            tasks.append(task)
            owners.append((index, subject_side(g)))

    logger.info(
        "Sweep (%s mode, %s vs %s): %d cells x %d games, %d games in total",
        sweep.mode, sweep.algo, sweep.fixed, len(grid), games, len(tasks),
    )
    records = run_games(tasks, config, workers, progress)

    totals = defaultdict(lambda: [0.0, 0])
    for (owner, side), record in zip(owners, records):
        totals[owner][0] += record.points(side)
        totals[owner][1] += 1

    cells, baseline = [], []
    for index, (kind, o, d, subject, opponent, _) in enumerate(jobs):
        wins, played = totals[index]
        if kind == 'cell':
            cells.append(SweepCell(o, d, wins, played))
        else:
            baseline.append(SweepCell(o, d, wins, played))
    subject_name = sweep.algo if sweep.mode == 'opponent' else f"{sweep.algo}+H(o,d,{sweep.actions})"
    return SweepResult(sweep.mode, subject_name, sweep.fixed, cells, baseline, records)


def _write_csv(path, header, rows):
    with open(path, 'w', newline='', encoding='utf-8') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(header)
        writer.writerows(rows)
    return path


def write_records(records, path):
    return _write_csv(path, GameRecord.FIELDS, (r.row() for r in records))


def write_trace(trace, path):
    return _write_csv(path, GameTrace.FIELDS, trace.rows())


def write_win_table(table, out_dir, alpha=0.05):
    """win_rates.csv (percent to 0.1 plus the Avg column) and best_marks.csv."""
    out_dir = Path(out_dir)
    n = len(table.agents)
    matrix = table.matrix()
    rates = _write_csv(
        out_dir / 'win_rates.csv',
        [''] + table.agents + ['Avg'],
        ([table.agents[i]] + [f"{matrix[i][j]:.1f}" for j in range(n)] + [f"{table.average(i):.1f}"]
         for i in range(n)),
    )
    marks = table.marks(alpha)
    best = _write_csv(
        out_dir / 'best_marks.csv',
        [''] + table.agents,
        ([table.agents[i]] + ['*' if marks[i][j] else '' for j in range(n)] for i in range(n)),
    )
    return [rates, best]


def write_sweep(result, out_dir, confidence=0.99):
    """sweep_grid.csv (one row per cell) and sweep_curve.csv (marginalised over Defence)."""
    out_dir = Path(out_dir)
    grid_rows = []
    for c in result.cells:
        low, high = wilson_interval(c.wins, c.games, confidence)
        grid_rows.append([f"{c.offence:g}", f"{c.defence:g}", c.games, f"{c.rate:.4f}", f"{low:.4f}", f"{high:.4f}"])
    grid = _write_csv(
        out_dir / 'sweep_grid.csv',
        ['offence', 'defence', 'games', 'winRate', 'ci99Low', 'ci99High'],
        grid_rows,
    )
    curve_rows = []
    for point, base_rate in result.curve(confidence):
        curve_rows.append([
            f"{point.label:g}", point.games, f"{point.rate:.4f}", f"{point.low:.4f}", f"{point.high:.4f}",
            '' if base_rate is None else f"{base_rate:.4f}",
            '' if point.p_above is None else f"{point.p_above:.6g}",
            '' if point.p_below is None else f"{point.p_below:.6g}",
        ])
    curve = _write_csv(
        out_dir / 'sweep_curve.csv',
        ['offence', 'games', 'winRate', 'ci99Low', 'ci99High', 'baselineRate', 'pAboveBaseline', 'pBelowBaseline'],
        curve_rows,
    )
    return [grid, curve]


def emit_results(result, out_dir, records=None):
    """Write the CSVs for a WinRateTable or SweepResult; returns the paths written."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if isinstance(result, WinRateTable):
        paths = write_win_table(result, out_dir)
    elif isinstance(result, SweepResult):
        paths = write_sweep(result, out_dir)
        records = result.records if records is None else records
    else:
        raise TypeError(f"cannot emit {type(result).__name__}")
    if records is not None:
        paths.append(write_records(records, out_dir / 'games.csv'))
    return paths


def package_versions():
    versions = {}
    for name in PACKAGES:
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = None
    return versions


def write_manifest(out_dir, command, argv, config, outputs=(), extra=None):
    """run_manifest.json: what was run, with which config, producing which files."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = {
        'command': command,
        'argv': list(argv),
        'seed': config.seed,
        'workers': config.workers,
        'config': config.resolved(),
        'outputs': sorted(Path(p).name for p in outputs),
        'packages': package_versions(),
    }
    if extra:
        manifest.update(extra)
    path = out_dir / 'run_manifest.json'
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(manifest, f, indent=2, sort_keys=True, default=str)
        f.write('\n')
    return path


def side_balance(records):
    """(map, unordered pair) -> count of games with the first agent as Blue and as Red."""
    balance = defaultdict(lambda: [0, 0])
    for r in records:
        a, b = sorted((r.blue, r.red))
        balance[(r.map_id, a, b)][0 if r.blue == a else 1] += 1
    return dict(balance)
