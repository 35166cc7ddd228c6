from django.core.management.base import BaseCommand, CommandError

from game.exceptions import ConfigError
from game.experiments import load_scenarios, run_scenario

CONFIG_ERROR = 2
CONVERGENCE_FAILURE = 3


def eps_list(value):
    """Comma separated floats, e.g. ``0.1,0.01``."""
    try:
        return [float(item) for item in value.split(',') if item.strip()]
    except ValueError:
        raise CommandError(f"Invalid --eps-override {value!r}: expected comma separated numbers.",
                           returncode=CONFIG_ERROR)


class Command(BaseCommand):
    help = ("Solve every (scenario, eps) pair of a TOML scenario file, writing one classifier "
            "CSV per pair and a summary.csv, and archive the runs.")

    def add_arguments(self, parser):
        parser.add_argument('config', help="Path to the TOML scenario file.")
        parser.add_argument('--out', dest='out', default=None,
                            help="Output directory (overrides [output] dir of every scenario).")
        parser.add_argument('--eps-override', dest='eps_override', default=None,
                            help="Comma separated eps list replacing every scenario's solver.eps.")
        parser.add_argument('--tol', type=float, default=None, help="Gradient sup-norm tolerance.")
        parser.add_argument('--max-iter', dest='max_iter', type=int, default=None,
                            help="Optimizer iteration budget per run.")
        parser.add_argument('--seed', type=int, default=None,
                            help="Seed of random measure generators; never affects the solver.")
        parser.add_argument('--validate', action='store_true',
                            help="Parse and check the scenario file without solving.")

    def handle(self, *args, **options):
        override = eps_list(options['eps_override']) if options['eps_override'] is not None else None
        try:
            scenarios = load_scenarios(options['config'], eps_override=override, tol=options['tol'],
                                       max_iter=options['max_iter'], seed=options['seed'])
        except ConfigError as exc:
            raise CommandError(str(exc), returncode=CONFIG_ERROR)

        if options['validate']:
            runs = sum(len(scenario.eps_list) for scenario in scenarios)
            self.stdout.write(self.style.SUCCESS(
                f"{options['config']} is valid: {len(scenarios)} scenario(s), {runs} run(s)."))
            return

        records, failures = run_scenario(options['config'], out_dir=options['out'], scenarios=scenarios)
        for record in records:
            line = f"{record.scenario_id} eps={record.eps:g}: {record.status} -> {record.classifier_csv}"
            self.stdout.write(self.style.SUCCESS(line) if record.status == 'ok' else self.style.WARNING(line))
        if failures:
            raise CommandError(
                f"{len(failures)} of {len(records)} run(s) did not converge; partial outputs were written.",
                returncode=CONVERGENCE_FAILURE,
            )
        self.stdout.write(self.style.SUCCESS(f"Solved {len(records)} run(s)."))
