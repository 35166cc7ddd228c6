from pathlib import Path

from django.core.management.base import BaseCommand, CommandError

from game.exceptions import ConfigError, ConvergenceFailure
from game.experiments import check_study_eps, convergence_study, load_scenarios, write_study_csv

from .solve import CONFIG_ERROR, CONVERGENCE_FAILURE


class Command(BaseCommand):
    help = ("Convergence study of the softmax value towards the unregularized game: solve each "
            "scenario along its decreasing eps list and write study_<id>.csv.")

    def add_arguments(self, parser):
        parser.add_argument('config', help="Path to the TOML scenario file.")
        parser.add_argument('--out', dest='out', default=None, help="Output directory.")
        parser.add_argument('--validate', action='store_true',
                            help="Parse and check the scenario file without solving.")

    def handle(self, *args, **options):
        try:
            scenarios = load_scenarios(options['config'])
            for scenario in scenarios:
                check_study_eps(scenario)
        except ConfigError as exc:
            raise CommandError(str(exc), returncode=CONFIG_ERROR)

        if options['validate']:
            self.stdout.write(self.style.SUCCESS(f"{options['config']} is valid: {len(scenarios)} scenario(s)."))
            return

        for scenario in scenarios:
            directory = Path(scenario.output_dir(options['out']))
            directory.mkdir(parents=True, exist_ok=True)
            try:
                rows = convergence_study(scenario)
            except ConvergenceFailure as exc:
                raise CommandError(f"Study {scenario.id} did not converge: {exc}", returncode=CONVERGENCE_FAILURE)
            path = directory / f'study_{scenario.id}.csv'
            write_study_csv(path, rows)
            self.stdout.write(self.style.SUCCESS(f"{scenario.id}: {len(rows)} eps values -> {path}"))
