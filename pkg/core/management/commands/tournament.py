"""
Management command to run a round robin between agents.
Every pair plays every map twice with sides swapped.
"""
from core.management.experiment import ExperimentCommand, positive_int
from core.services.agents import parse_agent_spec
from core.services.exceptions import ConfigError
from core.services.experiments import emit_results, round_robin, write_records


class Command(ExperimentCommand):
    help = 'Round robin tournament, e.g. --agents RHEA,MCTS,H0,H1 --maps 50'
    kind = 'tournament'
    default_config = 'rhea_table.json'

    def add_experiment_arguments(self, parser):
        parser.add_argument(
            '--agents',
            type=str,
            default=None,
            help='Comma-separated agent specs (default: the config roster)',
        )
        parser.add_argument('--maps', type=positive_int, default=None, help='Number of random maps')

    def configure(self, config, options):
        if options['agents']:
            self.agents = [a.strip() for a in options['agents'].split(',') if a.strip()]
        else:
            self.agents = list(config.tournament.agents)
        if len(self.agents) < 2:
            raise ConfigError("tournament needs at least two agents (--agents or tournament.agents)")
        for spec in self.agents:
            parse_agent_spec(spec, config.roster)
        return config

    def run(self, config, options, record):
        agents = self.agents
        n_maps = config.tournament.maps
        self.stdout.write(f"Round robin: {', '.join(agents)} on {n_maps} maps")
        table, records = round_robin(
            agents, n_maps, config, workers=config.workers, progress=self.progress,
        )

        outputs = emit_results(table, self.out_dir, records)
        outputs.append(self.manifest(config, outputs, {'agents': table.agents}))
        self._print_table(table)

        summary = {
            'agents': table.agents,
            'maps': n_maps,
            'games': len(records),
            'averages': {a: round(table.average(i), 1) for i, a in enumerate(table.agents)},
        }
        return summary, records

    def _print_table(self, table):
        marks = table.marks()
        width = max(len(a) for a in table.agents) + 2
        self.stdout.write('')
        self.stdout.write(' ' * width + ''.join(f"{a:>{width}}" for a in table.agents) + f"{'Avg':>8}")
        for i, agent in enumerate(table.agents):
            cells = []
            for j in range(len(table.agents)):
                cell = f"{table.rate(i, j):.1f}" + ('*' if marks[i][j] else ' ')
                cells.append(f"{cell:>{width}}")
            self.stdout.write(f"{agent:<{width}}" + ''.join(cells) + f"{table.average(i):>8.1f}")
        self.stdout.write(f"\n{table.games_per_pair} games per pair; * = not significantly below the column best")

    def flush_partial(self, config, options, records):
        self.out_dir.mkdir(parents=True, exist_ok=True)
        outputs = [write_records(records, self.out_dir / 'games.csv')]
        self.manifest(config, outputs, {'interrupted': True})
