from cli.management.base import LabCommand
from cli.output import write_json
from cli.pipeline import run_convergence


class Command(LabCommand):
    help = "Three-or-more-level self-convergence of the observer series."

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument(
            "--levels",
            type=int,
            default=None,
            help="number of resolutions, at least 3",
        )
        parser.add_argument(
            "--coarsen",
            action="store_true",
            help="keep the configured step as the finest level",
        )

    def run(self, config, out, options):
        levels = options["levels"] or config["convergence_levels"] or 3
        report = run_convergence(
            config,
            levels,
            threads=config["threads"],
            coarsen=options["coarsen"],
        )
        write_json(out / "convergence.json", report, schema="convergence")

        for curve, fields in report["factors"].items():
            for field, entries in fields.items():
                factors = ", ".join(
                    "exact" if e["exact"] else f"{e['factor']:.4g}"
                    for e in entries
                    if e["exact"] or e["factor"] is not None
                )
                self.stdout.write(f"{curve} {field}: {factors}")
        style = self.style.SUCCESS if report["passes"] else self.style.WARNING
        verdict = "within" if report["passes"] else "outside"
        self.stdout.write(style(f"Factors {verdict} 4 +- 0.4"))
