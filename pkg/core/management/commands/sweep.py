"""
Management command to run an opponent-model accuracy sweep.
A planner plays a heuristic while Offence/Defence are swept over a grid,
either inside the planner's opponent model or in the opponent itself.
"""
from dataclasses import replace

from core.management.experiment import ExperimentCommand, positive_int
from core.services.experiments import accuracy_sweep, emit_results, write_records


class Command(ExperimentCommand):
    help = 'Opponent model accuracy sweep, e.g. --mode model --fixed H3 --algo RHEA'
    kind = 'sweep'
    default_config = 'sweep_h3.json'

    def add_experiment_arguments(self, parser):
        parser.add_argument('--mode', choices=['model', 'opponent'], default=None,
                            help='Sweep the opponent model (model) or the opponent (opponent)')
        parser.add_argument('--fixed', type=str, default=None,
                            help='Fixed heuristic: the opponent in model mode, the model in opponent mode')
        parser.add_argument('--algo', choices=['RHEA', 'MCTS'], default=None, help='Planner')
        parser.add_argument('--actions', type=str, default=None, help='Action order of the swept heuristic')
        parser.add_argument('--games', type=positive_int, default=None, help='Games per grid cell')
        parser.add_argument('--plan-length', type=positive_int, default=None,
                            help='RHEA plan length (horizon ablation)')

    def configure(self, config, options):
        changes = {
            key: options[key] for key in ('mode', 'fixed', 'algo', 'actions') if options.get(key) is not None
        }
        if changes:
            config = replace(config, sweep=replace(config.sweep, **changes))
        if options.get('plan_length') is not None:
            config = replace(config, rhea=replace(config.rhea, plan_length=options['plan_length']))
        return config

    def run(self, config, options, record):
        sweep = config.sweep
        self.stdout.write(
            f"Sweep ({sweep.mode} mode): {sweep.algo} vs {sweep.fixed}, "
            f"{len(sweep.offence)}x{len(sweep.defence)} cells, {sweep.games_per_cell} games each"
        )
        result = accuracy_sweep(config, workers=config.workers, progress=self.progress)

        outputs = emit_results(result, self.out_dir)
        outputs.append(self.manifest(config, outputs, {'subject': result.subject, 'opponent': result.opponent}))

        self.stdout.write(f"\n{'offence':>8} {'winRate':>8} {'99% CI':>17} {'baseline':>9}")
        for point, base_rate in result.curve():
            flag = ''
            if point.p_above is not None and point.p_above < 0.01:
                flag = ' +'
            elif point.p_below is not None and point.p_below < 0.01:
                flag = ' -'
            base = '' if base_rate is None else f"{base_rate:.3f}"
            self.stdout.write(
                f"{point.label:>8g} {point.rate:>8.3f} [{point.low:.3f}, {point.high:.3f}] {base:>9}{flag}"
            )
        self.stdout.write("+/- = significantly above/below the no-model baseline (p < 0.01)")

        summary = {
            'mode': result.mode,
            'subject': result.subject,
            'opponent': result.opponent,
            'games': len(result.records),
            'baseline_rate': round(result.baseline_rate, 4),
        }
        return summary, result.records

    def flush_partial(self, config, options, records):
        self.out_dir.mkdir(parents=True, exist_ok=True)
        outputs = [write_records(records, self.out_dir / 'games.csv')]
        self.manifest(config, outputs, {'interrupted': True})
