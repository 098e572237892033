import time

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from cli.output import output_dir, write_timings
from cli.serializers import load_config
from geometry.exceptions import LabError


class LabCommand(BaseCommand):
    """Shared flags and error reporting of the laboratory subcommands.

    Subclasses implement ``run(config, out, options)`` and return the
    timings worth recording, or None.
    """

    def add_arguments(self, parser):
        parser.add_argument(
            "--config", required=True, help="JSON run configuration"
        )
        parser.add_argument(
            "--out", default=None, help="output directory for results"
        )
        parser.add_argument(
            "--threads", type=int, default=None, help="worker processes"
        )
        parser.add_argument(
            "--budget-cells",
            type=int,
            default=None,
            help="refuse grids with more cells than this",
        )

    def handle(self, *args, **options):
        started = time.perf_counter()
        try:
            config = self.load(options)
            out = output_dir(
                options["out"] or config["output"],
                settings.LAB["OUTPUT_DIR"],
            )
            timings = self.run(config, out, options) or {}
        except LabError as exc:
            raise CommandError(f"[{exc.module}] {exc}") from exc
        timings["total"] = time.perf_counter() - started
        write_timings(out, {self.name: timings})
        self.stdout.write(self.style.SUCCESS(f"Results written to {out}"))

    @property
    def name(self) -> str:
        return self.__module__.rsplit(".", 1)[-1]

    def load(self, options) -> dict:
        config = dict(load_config(options["config"]))
        if options["threads"] is not None:
            config["threads"] = options["threads"]
        if options["budget_cells"] is not None:
            config["budget_cells"] = options["budget_cells"]
        return config

    def run(self, config, out, options):
        raise NotImplementedError
