"""
Shared plumbing for the experiment commands: common flags, config
loading, output directories, run records and error translation.
"""
import argparse
import logging
import sys

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError
from django.db import DatabaseError, transaction

from core.models import ExperimentRun, GameResult
from core.services.config import load_config
from core.services.exceptions import AgentSpecError, ConfigError, GroundWarError, RunInterrupted
from core.services.experiments import write_manifest

logger = logging.getLogger(__name__)

MAX_SEED = 2 ** 64 - 1
INTERRUPTED = 130

# Options every Django command has; everything else is echoed into the manifest
DJANGO_OPTIONS = {
    'verbosity', 'settings', 'pythonpath', 'traceback', 'no_color', 'force_color', 'skip_checks',
    'stdout', 'stderr',
}


def seed_type(value):
    try:
        seed = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {value!r}")
    if not 0 <= seed <= MAX_SEED:
        raise argparse.ArgumentTypeError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return seed


def positive_int(value):
    try:
        number = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value!r}")
    if number < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {number}")
    return number


class ExperimentCommand(BaseCommand):
    """
    Base for play/tournament/sweep/tune. Subclasses set `kind` and
    implement run(config, options, run_record) returning
    (summary dict, game records or None).
    """

    kind = None
    default_config = None

    def add_arguments(self, parser):
        parser.add_argument(
            '--config',
            type=str,
            default=self.default_config,
            help='Experiment config (path or name under configs/), merged over defaults.json',
        )
        parser.add_argument('--seed', type=seed_type, default=None, help='Master seed (64-bit unsigned)')
        parser.add_argument('--out', type=str, default=None, help='Output directory')
        parser.add_argument(
            '--workers',
            type=int,
            default=None,
            help='Parallel game workers (-1 for all cores)',
        )
        parser.add_argument(
            '--no-record',
            action='store_true',
            help='Do not store the run and its games in the database',
        )
        self.add_experiment_arguments(parser)

    def add_experiment_arguments(self, parser):
        pass

    def load(self, options):
        config = load_config(options['config'])
        config = config.with_overrides(
            seed=options['seed'],
            workers=options['workers'],
            output_dir=options['out'],
            games=options.get('games'),
            maps=options.get('maps'),
        )
        return self.configure(config, options)

    def configure(self, config, options):
        """Apply subcommand-specific overrides."""
        return config

    def output_dir(self, config):
        if config.output_dir is not None:
            return config.output_dir
        return settings.GROUNDWAR['OUTPUT_DIR'] / f"{self.kind}-{config.seed}"

    def handle(self, *args, **options):
        try:
            config = self.load(options)
        except GroundWarError as e:
            raise CommandError(str(e), returncode=2)

        out_dir = self.output_dir(config)
        self.out_dir = out_dir
        self.argv = list(sys.argv[1:])
        self.flags = {k: v for k, v in options.items() if k not in DJANGO_OPTIONS}
        record = None if options['no_record'] else self.start_record(config, out_dir)

        try:
            summary, records = self.run(config, options, record)
        except RunInterrupted as e:
            self.stdout.write(self.style.WARNING(f"Interrupted; {len(e.records)} finished games kept"))
            self.flush_partial(config, options, e.records)
            self.finish_record(record, 'interrupted', {'games': len(e.records)}, e.records)
            raise CommandError("interrupted", returncode=INTERRUPTED)
        except KeyboardInterrupt:
            self.finish_record(record, 'interrupted', {})
            raise CommandError("interrupted", returncode=INTERRUPTED)
        except (ConfigError, AgentSpecError) as e:
            self.finish_record(record, 'failed', {'error': str(e)})
            raise CommandError(str(e), returncode=2)
        except GroundWarError as e:
            self.finish_record(record, 'failed', {'error': str(e)})
            raise CommandError(str(e), returncode=1)

        self.finish_record(record, 'complete', summary, records)
        self.stdout.write(self.style.SUCCESS(f"Outputs written to {out_dir}"))

    def run(self, config, options, record):
        raise NotImplementedError

    def flush_partial(self, config, options, records):
        """Write whatever can be written from games finished before an interrupt."""

    def manifest(self, config, outputs, extra=None):
        extra = {'flags': self.flags, **(extra or {})}
        return write_manifest(self.out_dir, self.kind, self.argv, config, outputs, extra)

    def progress(self, done, total):
        self.stdout.write(f"  {done}/{total} games")

    def start_record(self, config, out_dir):
        try:
            return ExperimentRun.objects.create(
                kind=self.kind,
                seed=str(config.seed),
                config=config.resolved(),
                output_dir=str(out_dir),
            )
        except DatabaseError as e:
            logger.warning("Run not recorded (%s); run `manage.py migrate` or pass --no-record", e)
            return None

    def finish_record(self, record, status, summary, records=None):
        if record is None:
            return
        with transaction.atomic():
            if records:
                GameResult.objects.bulk_create(
                    [GameResult.from_record(record, r) for r in records], batch_size=500,
                )
            record.finish(status, summary)
