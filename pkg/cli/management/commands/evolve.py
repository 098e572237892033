import time

from cli.management.base import LabCommand
from cli.pipeline import prepare, run_evolve, write_evolution


class Command(LabCommand):
    help = "Evolve the characteristic problem and sample every observer."

    def run(self, config, out, options):
        run = prepare(config)
        started = time.perf_counter()
        result = run_evolve(run)
        elapsed = time.perf_counter() - started
        write_evolution(out, result)

        diagnostics = result.diagnostics
        self.stdout.write(
            f"{diagnostics.cells} cells in {elapsed:.1f} s, "
            f"residual max {diagnostics.residual_max:.3g}"
        )
        if diagnostics.np_drift is not None:
            self.stdout.write(f"NP drift {diagnostics.np_drift:.3g}")
        return {"evolve": elapsed}
