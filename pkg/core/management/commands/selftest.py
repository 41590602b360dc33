"""
Management command to run the invariant suite: oracle equivalence,
Lanchester, conservation, search sanity, statistics, NTBEA and timing.
"""
from django.core.management.base import BaseCommand, CommandError

from core.management.experiment import seed_type
from core.services.invariants import run_all


class Command(BaseCommand):
    help = 'Run the invariant checks (--scale 0.1 for a quick pass)'

    def add_arguments(self, parser):
        parser.add_argument(
            '--scale',
            type=float,
            default=1.0,
            help='Multiply every check size by this factor',
        )
        parser.add_argument('--seed', type=seed_type, default=0, help='Seed for the checks')

    def handle(self, *args, **options):
        scale = options['scale']
        if scale <= 0:
            raise CommandError(f"--scale must be positive, got {scale}", returncode=2)

        self.stdout.write(f"Running invariant checks (scale {scale:g}, seed {options['seed']})...")
        results = run_all(scale, options['seed'])

        for result in results:
            style = self.style.SUCCESS if result.passed else self.style.ERROR
            self.stdout.write(style(str(result)))

        failed = [r.name for r in results if not r.passed]
        if failed:
            raise CommandError(f"{len(failed)} check(s) failed: {', '.join(failed)}", returncode=1)
        self.stdout.write(self.style.SUCCESS(f"All {len(results)} checks passed"))
