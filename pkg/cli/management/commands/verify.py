from django.core.management.base import CommandError

from cli.management.base import LabCommand
from cli.output import write_json, write_timings
from cli.pipeline import run_verify, write_evolution


class Command(LabCommand):
    help = "Run constants, construction, evolution, tails and convergence."

    def run(self, config, out, options):
        payload, result, timings = run_verify(
            config, threads=config["threads"]
        )
        if result is not None:
            write_evolution(out, result)
        write_json(out / "verify.json", payload, schema="verify")

        for name, passed in sorted(payload["checks"].items()):
            style = self.style.SUCCESS if passed else self.style.ERROR
            self.stdout.write(style(f"{name}: {'pass' if passed else 'FAIL'}"))
        for failure in payload["failures"]:
            self.stdout.write(
                self.style.ERROR(
                    f"{failure['step']}: [{failure['module']}] "
                    f"{failure['error']}"
                )
            )
        if not payload["passed"]:
            write_timings(out, {self.name: timings})
            raise CommandError(f"Verification failed, see {out}")
        return timings
