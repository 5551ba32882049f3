from pathlib import Path

from django.conf import settings
from django.core.exceptions import ValidationError
from django.core.management.base import BaseCommand, CommandError

from cli.enums import Command as RunCommand
from cli.enums import ExitCode
from cli.forms import parse_config
from cli.services import RunStageError, run
from samplers.rng import MAX_SEED


class Command(BaseCommand):
    help = "Run adaptive MCMC batches and numerical checks from a JSON config"

    def add_arguments(self, parser):
        subparsers = parser.add_subparsers(dest="subcommand", required=True)
        for command in RunCommand:
            subparser = subparsers.add_parser(command.value, help=command.label)
            subparser.add_argument(
                "--config", required=True, help="Path of the JSON run configuration"
            )
            subparser.add_argument(
                "--seed",
                type=int,
                default=None,
                help="64-bit seed, overrides the config's seed",
            )
            subparser.add_argument(
                "--out",
                default=None,
                help="Output directory (default: MCMC_OUTPUT_DIR)",
            )

    def handle(self, *args, **options):
        subcommand = options["subcommand"]
        seed = options["seed"]
        if seed is not None and not 0 <= seed <= MAX_SEED:
            raise CommandError(
                f"--seed must be a 64-bit unsigned integer, got {seed}.",
                returncode=ExitCode.CONFIG_ERROR,
            )

        try:
            text = Path(options["config"]).read_text(encoding="utf-8")
        except OSError as error:
            raise CommandError(
                f"Cannot read config: {error}", returncode=ExitCode.CONFIG_ERROR
            )

        try:
            cfg = parse_config(text, command=subcommand)
        except ValidationError as error:
            raise CommandError(
                "Invalid config: " + "; ".join(error.messages),
                returncode=ExitCode.CONFIG_ERROR,
            )

        out_dir = Path(options["out"] or settings.MCMC_OUTPUT_DIR)
        try:
            result = run(cfg, out_dir, seed=seed)
        except RunStageError as error:
            raise CommandError(str(error), returncode=ExitCode.RUNTIME_ERROR)

        for path in result.files:
            self.stdout.write(f"  {path}")
        self.stdout.write(
            self.style.SUCCESS(
                f"{subcommand} finished with seed {result.config.seed}: "
                f"{len(result.files)} file(s) in {out_dir}"
            )
        )
