from cli.management.base import LabCommand
from cli.output import write_csv, write_json
from cli.pipeline import chain_profiles, prepare, run_constants
from np_constants.serializers import NpReportSerializer


class Command(LabCommand):
    help = "Compute I0, C0 and the time-inverted constants of the data."

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument(
            "--construct",
            action="store_true",
            help="build the time integrals and check both oracles",
        )
        parser.add_argument(
            "--orders",
            type=int,
            default=None,
            help="highest time-inverted order to report",
        )

    def run(self, config, out, options):
        run = prepare(config)
        report, remark, chain = run_constants(
            run,
            order=options["orders"],
            construct=options["construct"] or None,
        )
        write_json(
            out / "npreport.json",
            NpReportSerializer(report).data,
            schema="npreport",
        )
        if remark is not None:
            write_json(out / "static_slice.json", remark)
        for k, columns in chain_profiles(run, chain).items():
            write_csv(out / f"chain_{k}.csv", columns)

        self.stdout.write(f"I0 = {report.I0.value:.16g}")
        for entry in report.inverted:
            line = f"I0^({entry.k}) = {entry.value:.16g}"
            if entry.constructed is not None:
                line += f" (constructed {entry.constructed.value:.16g})"
            self.stdout.write(line)
