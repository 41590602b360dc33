"""
Experiment configuration.

Every run starts from configs/defaults.json; a run config is merged over it
section by section and validated into frozen dataclasses. Command flags
are applied last through ExperimentConfig.with_overrides().
"""
import json
import logging
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

from django.conf import settings

from .engine import GameParams, SideParams
from .exceptions import ConfigError
from .heuristics import ROSTER, HeuristicParams
from .maps import MapGenerator
from .search import MctsConfig, RheaConfig

logger = logging.getLogger(__name__)

SECTIONS = ('run', 'game', 'maps', 'mcts', 'rhea', 'heuristics', 'tournament', 'sweep', 'tune')


@dataclass(frozen=True)
class MapConfig:
    min_nodes: int = 8
    max_nodes: int = 10

    def __post_init__(self):
        lo, hi = MapGenerator.MIN_NODES, MapGenerator.MAX_NODES
        if not lo <= self.min_nodes <= self.max_nodes <= hi:
            raise ConfigError(f"maps: node counts must satisfy {lo} <= min_nodes <= max_nodes <= {hi}")


@dataclass(frozen=True)
class TournamentConfig:
    agents: tuple = ()
    maps: int = 50

    def __post_init__(self):
        if self.maps < 1:
            raise ConfigError(f"tournament.maps must be at least 1, got {self.maps}")


@dataclass(frozen=True)
class SweepConfig:
    mode: str = 'model'
    fixed: str = 'H3'
    algo: str = 'RHEA'
    actions: str = 'RD,W,A,RF'
    games_per_cell: int = 100
    offence: tuple = tuple(float(o) for o in range(1, 11))
    defence: tuple = tuple(d / 2 for d in range(1, 11))

    def __post_init__(self):
        if self.mode not in ('model', 'opponent'):
            raise ConfigError(f"sweep.mode must be 'model' or 'opponent', got {self.mode!r}")
        if self.algo not in ('RHEA', 'MCTS'):
            raise ConfigError(f"sweep.algo must be RHEA or MCTS, got {self.algo!r}")
        if self.games_per_cell < 1:
            raise ConfigError(f"sweep.games_per_cell must be at least 1, got {self.games_per_cell}")
        if not self.offence or not self.defence:
            raise ConfigError("sweep.offence and sweep.defence must not be empty")


@dataclass(frozen=True)
class NtbeaConfig:
    budget: int = 200
    neighbours: int = 50
    k_explore: float = 2.0
    epsilon: float = 0.5

    def __post_init__(self):
        if self.budget < 1:
            raise ConfigError(f"tune.budget must be at least 1, got {self.budget}")
        if self.neighbours < 1:
            raise ConfigError(f"tune.neighbours must be at least 1, got {self.neighbours}")
        if self.k_explore < 0 or self.epsilon <= 0:
            raise ConfigError("tune.k_explore must be >= 0 and tune.epsilon > 0")


@dataclass(frozen=True)
class TuneConfig:
    target: str = 'H0'
    games_per_evaluation: int = 5
    ntbea: NtbeaConfig = field(default_factory=NtbeaConfig)
    offence: tuple = tuple(float(o) for o in range(1, 11))
    defence: tuple = tuple(d / 2 for d in range(1, 11))
    action_orders: tuple = ('W,A', 'A,W', 'RD,A,W,RF', 'RD,W,A,RF', 'A,W,RF,RD', 'W,RD,A,RF')

    def __post_init__(self):
        if self.games_per_evaluation < 1:
            raise ConfigError("tune.games_per_evaluation must be at least 1")


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int = 42
    workers: int = 1
    output_dir: Path | None = None
    game: GameParams = field(default_factory=GameParams)
    maps: MapConfig = field(default_factory=MapConfig)
    mcts: MctsConfig = field(default_factory=MctsConfig)
    rhea: RheaConfig = field(default_factory=RheaConfig)
    roster: dict = field(default_factory=lambda: dict(ROSTER))
    tournament: TournamentConfig = field(default_factory=TournamentConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    tune: TuneConfig = field(default_factory=TuneConfig)
    source: tuple = ()
    document: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.workers == 0 or self.workers < -1:
            raise ConfigError(f"workers must be positive or -1 (all cores), got {self.workers}")

    def with_overrides(self, seed=None, workers=None, output_dir=None, games=None, maps=None):
        """Apply command-line overrides; None leaves a value alone."""
        config = self
        if seed is not None:
            config = replace(config, seed=int(seed))
        if workers is not None:
            config = replace(config, workers=int(workers))
        if output_dir is not None:
            config = replace(config, output_dir=Path(output_dir))
        if games is not None:
            config = replace(config, sweep=replace(config.sweep, games_per_cell=int(games)),
                             tune=replace(config.tune, games_per_evaluation=int(games)))
        if maps is not None:
            config = replace(config, tournament=replace(config.tournament, maps=int(maps)))
        return config

    def resolved(self):
        """JSON-ready view of the effective configuration, for the run manifest."""
        doc = merge(self.document, {
            'run': {
                'seed': self.seed,
                'workers': self.workers,
                'output_dir': None if self.output_dir is None else str(self.output_dir),
            },
            'tournament': {'agents': list(self.tournament.agents), 'maps': self.tournament.maps},
            'maps': asdict(self.maps),
            'mcts': asdict(self.mcts),
            'rhea': asdict(self.rhea),
            'sweep': asdict(self.sweep),
            'tune': {
                **{k: v for k, v in asdict(self.tune).items() if k != 'ntbea'},
                **asdict(self.tune.ntbea),
            },
        })
        doc['sources'] = [str(p) for p in self.source]
        return doc


def default_config_path():
    return Path(settings.GROUNDWAR['DEFAULT_CONFIG'])


def resolve_config_path(name):
    """Accept a path or a bare file name from the configs directory."""
    path = Path(name)
    if path.exists():
        return path
    candidate = Path(settings.GROUNDWAR['CONFIG_DIR']) / path
    if candidate.exists():
        return candidate
    raise ConfigError(f"config file not found: {name}")


def read_json(path):
    try:
        with open(path, encoding='utf-8') as f:
            doc = json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: not valid JSON ({e})") from e
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return doc


def merge(base, override):
    """Recursive dict merge; lists and scalars in `override` replace `base`."""
    result = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(result.get(key), dict):
            result[key] = merge(result[key], value)
        else:
            result[key] = value
    return result


def load_config(path=None):
    """defaults.json, with the config at `path` (if any) merged over it."""
    base_path = default_config_path()
    doc = read_json(base_path)
    sources = [base_path]
    if path is not None:
        path = resolve_config_path(path)
        if path.resolve() != base_path.resolve():
            doc = merge(doc, read_json(path))
            sources.append(path)
    return build_config(doc, tuple(sources))


def _section(doc, name):
    value = doc.get(name, {})
    if not isinstance(value, dict):
        raise ConfigError(f"{name}: expected an object")
    return value


def _build(cls, values, section):
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(values) - known)
    if unknown:
        raise ConfigError(f"{section}: unknown key(s) {', '.join(unknown)}")
    try:
        return cls(**values)
    except TypeError as e:
        raise ConfigError(f"{section}: {e}") from e


def _game_params(values):
    values = dict(values)
    for side in ('blue', 'red'):
        if side in values:
            side_values = values[side]
            if not isinstance(side_values, dict):
                raise ConfigError(f"game.{side}: expected an object")
            values[side] = _build(SideParams, side_values, f"game.{side}")
    return _build(GameParams, values, 'game')


def _roster(values):
    roster = {}
    for name, entry in values.items():
        if not isinstance(entry, dict):
            raise ConfigError(f"heuristics.{name}: expected an object")
        missing = {'offence', 'defence', 'actions'} - set(entry)
        if missing:
            raise ConfigError(f"heuristics.{name}: missing {', '.join(sorted(missing))}")
        roster[name] = HeuristicParams.from_values(
            entry['offence'], entry['defence'], entry['actions'], entry.get('count_inbound', True),
        )
    return roster or dict(ROSTER)


def _tuples(values, *names):
    values = dict(values)
    for name in names:
        if name in values:
            values[name] = tuple(values[name])
    return values


def build_config(doc, sources=()):
    for key in sorted(set(doc) - set(SECTIONS)):
        logger.warning("Ignoring unknown config section %r", key)

    run = _section(doc, 'run')
    unknown = sorted(set(run) - {'seed', 'workers', 'output_dir'})
    if unknown:
        raise ConfigError(f"run: unknown key(s) {', '.join(unknown)}")

    tune = dict(_section(doc, 'tune'))
    ntbea_values = {k: tune.pop(k) for k in ('budget', 'neighbours', 'k_explore', 'epsilon') if k in tune}

    try:
        return ExperimentConfig(
            seed=int(run.get('seed', 42)),
            workers=int(run.get('workers', settings.GROUNDWAR['WORKERS'])),
            output_dir=Path(run['output_dir']) if run.get('output_dir') else None,
            game=_game_params(_section(doc, 'game')),
            maps=_build(MapConfig, _section(doc, 'maps'), 'maps'),
            mcts=_build(MctsConfig, _section(doc, 'mcts'), 'mcts'),
            rhea=_build(RheaConfig, _section(doc, 'rhea'), 'rhea'),
            roster=_roster(_section(doc, 'heuristics')),
            tournament=_build(TournamentConfig, _tuples(_section(doc, 'tournament'), 'agents'), 'tournament'),
            sweep=_build(SweepConfig, _tuples(_section(doc, 'sweep'), 'offence', 'defence'), 'sweep'),
            tune=_build(
                TuneConfig,
                {**_tuples(tune, 'offence', 'defence', 'action_orders'),
                 'ntbea': _build(NtbeaConfig, ntbea_values, 'tune')},
                'tune',
            ),
            source=tuple(sources),
            document=doc,
        )
    except (TypeError, ValueError) as e:
        raise ConfigError(f"invalid config: {e}") from e
