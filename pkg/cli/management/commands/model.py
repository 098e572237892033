from cli.management.base import LabCommand
from cli.output import write_csv
from cli.pipeline import prepare, run_model


class Command(LabCommand):
    help = "Tabulate r, D, D' and r* for the configured spacetime model."

    def run(self, config, out, options):
        run = prepare(config)
        path = write_csv(out / "model.csv", run_model(run))
        self.stdout.write(f"Model table for {run.model.kind}: {path}")
