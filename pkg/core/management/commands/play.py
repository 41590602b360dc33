"""
Management command to play one logged game between two agents.
Writes the game record, the event trace, the map and a run manifest.
"""
import numpy as np

from core.management.experiment import ExperimentCommand, positive_int
from core.services.agents import parse_agent_spec
from core.services.experiments import derive_seed, play_game, write_records, write_trace
from core.services.maps import MapGraph, generate_map


class Command(ExperimentCommand):
    help = 'Play one game, e.g. --blue MCTS+MCTS --red H1 --seed 7'
    kind = 'play'

    def add_experiment_arguments(self, parser):
        parser.add_argument('--blue', type=str, default='RHEA', help='Blue agent spec')
        parser.add_argument('--red', type=str, default='H0', help='Red agent spec')
        parser.add_argument('--map', type=str, default=None, help='Map JSON file (default: random map)')
        parser.add_argument('--nodes', type=positive_int, default=None, help='Node count of the random map')

    def configure(self, config, options):
        for spec in (options['blue'], options['red']):
            parse_agent_spec(spec, config.roster)
        return config

    def run(self, config, options, record):
        if options['map']:
            map_graph = MapGraph.load(options['map'])
            map_id = 0
        else:
            rng = np.random.default_rng(derive_seed(config.seed, 0))
            lo, hi = config.maps.min_nodes, config.maps.max_nodes
            nodes = options['nodes'] or int(rng.integers(lo, hi + 1))
            map_graph = generate_map(rng, nodes)
            map_id = 0

        self.stdout.write(
            f"Playing {options['blue']} (Blue) vs {options['red']} (Red) on a "
            f"{map_graph.node_count}-node map, seed {config.seed}"
        )
        game, trace = play_game(
            map_graph, options['blue'], options['red'], config.game, config.seed, map_id=map_id,
            roster=config.roster, mcts=config.mcts, rhea=config.rhea, trace=True,
        )

        self.out_dir.mkdir(parents=True, exist_ok=True)
        outputs = [
            write_records([game], self.out_dir / 'games.csv'),
            write_trace(trace, self.out_dir / 'trace.csv'),
            map_graph.save(self.out_dir / 'map.json'),
        ]
        outputs.append(self.manifest(config, outputs))

        for event in trace.orders():
            self.stdout.write(f"  t={event.tick:4d} {event.side:4s} {event.event_type} "
                              f"{'' if event.source is None else event.source}"
                              f"{'' if event.target is None else '->' + str(event.target)} "
                              f"{'' if event.size is None else f'{event.size:.1f}'}")
        style = self.style.SUCCESS if game.winner.value != 'Draw' else self.style.WARNING
        self.stdout.write(style(
            f"Winner: {game.winner.value}, Blue score {game.score_blue:+.2f} after {game.ticks} ticks "
            f"({game.decisions_blue} Blue / {game.decisions_red} Red decisions, "
            f"{game.decision_ms_blue:.2f} / {game.decision_ms_red:.2f} ms per decision)"
        ))
        summary = {
            'winner': game.winner.value,
            'score_blue': game.score_blue,
            'ticks': game.ticks,
            'trace_events': len(trace),
        }
        return summary, [game]
