"""
Management command to tune a heuristic's Offence, Defence and action order
with NTBEA, fitness measured by games against a target agent.
"""
import json
from dataclasses import replace

from core.management.experiment import ExperimentCommand, positive_int
from core.services.agents import parse_agent_spec
from core.services.tuner import HeuristicTuner, write_evaluation_log


class Command(ExperimentCommand):
    help = 'Tune a heuristic with NTBEA, e.g. --target H0 --budget 200 --games 5'
    kind = 'tune'
    default_config = 'tune_h1.json'

    def add_experiment_arguments(self, parser):
        parser.add_argument('--target', type=str, default=None, help='Agent spec to tune against')
        parser.add_argument('--budget', type=positive_int, default=None, help='NTBEA evaluations')
        parser.add_argument('--games', type=positive_int, default=None, help='Games per evaluation')

    def configure(self, config, options):
        tune = config.tune
        if options.get('target') is not None:
            tune = replace(tune, target=options['target'])
        if options.get('budget') is not None:
            tune = replace(tune, ntbea=replace(tune.ntbea, budget=options['budget']))
        # Fail on a bad target before any game is played
        parse_agent_spec(tune.target, config.roster)
        return replace(config, tune=tune)

    def run(self, config, options, record):
        tune = config.tune
        self.stdout.write(
            f"Tuning against {tune.target}: budget {tune.ntbea.budget}, "
            f"{tune.games_per_evaluation} games per evaluation"
        )
        tuner = HeuristicTuner(config, workers=config.workers)
        result = tuner.run(progress=self._progress)

        best = tuner.params(result.best)
        best_doc = {
            'target': tune.target,
            'spec': str(best),
            'offence': best.offence,
            'defence': best.defence,
            'actions': tuner.space.values(result.best)['actions'],
            'fitness': result.best_fitness,
            'evaluations': len(result.log),
        }

        self.out_dir.mkdir(parents=True, exist_ok=True)
        best_path = self.out_dir / 'best.json'
        with open(best_path, 'w', encoding='utf-8') as f:
            json.dump(best_doc, f, indent=2, sort_keys=True)
            f.write('\n')
        outputs = [write_evaluation_log(result, tuner.space, self.out_dir / 'evaluation_log.csv'), best_path]
        outputs.append(self.manifest(config, outputs))

        self.stdout.write(self.style.SUCCESS(
            f"Best: {best} (mean fitness {result.best_fitness:+.3f} over "
            f"{result.model.count(result.best, result.model.patterns[-1])} evaluations)"
        ))
        return best_doc, None

    def _progress(self, done, total):
        if done % 10 == 0 or done == total:
            self.stdout.write(f"  {done}/{total} evaluations")
