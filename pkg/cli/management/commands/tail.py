from pathlib import Path

from cli.exceptions import CliError
from cli.management.base import LabCommand
from cli.output import fit_table, read_json, read_series, write_json
from cli.pipeline import prepare, run_constants, run_tail
from np_constants.serializers import NpReportSerializer


class Command(LabCommand):
    help = "Fit the late-time tails of evolved series against the constants."

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument(
            "--npreport",
            default=None,
            help="NpReport JSON; computed from the data when omitted",
        )
        parser.add_argument(
            "--series-dir",
            default=None,
            help="directory holding the observer CSVs (default: --out)",
        )

    def load_report(self, run, path):
        if path is None:
            return run_constants(run)[0]
        serializer = NpReportSerializer(data=read_json(path))
        if not serializer.is_valid():
            raise CliError(f"{path} is not an NpReport: {serializer.errors}")
        return serializer.save()

    def run(self, config, out, options):
        run = prepare(config)
        report = self.load_report(run, options["npreport"])
        series_dir = Path(options["series_dir"] or out)
        offsets = {}
        if (series_dir / "diagnostics.json").exists():
            diagnostics = read_json(series_dir / "diagnostics.json")
            offsets = diagnostics["diagnostics"]["tau_offsets"]

        curves = sorted({scenario.curve for scenario in run.scenarios})
        series = {
            curve: read_series(series_dir, curve, offsets.get(curve, 0.0))
            for curve in curves
        }
        _, payload = run_tail(series, report, run.scenarios)
        write_json(out / "tailfit.json", payload, schema="tailfit")

        table = fit_table(payload["fits"])
        (out / "tailfit.txt").write_text(table, encoding="utf-8")
        self.stdout.write(table)
        for failure in payload["failures"]:
            self.stdout.write(
                self.style.WARNING(
                    f"{failure['step']}: [{failure['module']}] "
                    f"{failure['error']}"
                )
            )
