"""
`verify-lemmas`: the lemma battery over a catalog, with a summary table.
"""
from collections import defaultdict
from pathlib import Path
from typing import List, Optional

import typer
from rich.table import Table

from src.api.models.report_models import LemmaReport
from src.cli.common import CommandContext, console, run_command
from src.core.lemmas.battery import run_battery
from src.core.lemmas.catalog import DEFAULT_CATALOG_PATH, load_catalog
from src.utils.file_utils import write_json


def summary_table(reports: List[LemmaReport]) -> Table:
    rows = defaultdict(lambda: {"checks": 0, "held": 0, "skipped": 0, "controls": 0, "not_passed": 0})
    for report in reports:
        row = rows[report.lemma_id]
        if report.expected_failure:
            row["controls"] += 1
        else:
            row["checks"] += 1
            row["held"] += int(report.holds and not report.skipped)
        row["skipped"] += int(report.skipped)
        row["not_passed"] += int(not report.passed)

    table = Table(title="Lemma battery")
    for column in ("check", "regular", "held", "skipped", "negative controls", "not passed"):
        table.add_column(column, justify="left" if column == "check" else "right")
    for lemma_id in sorted(rows):
        row = rows[lemma_id]
        style = "red" if row["not_passed"] else None
        table.add_row(lemma_id, str(row["checks"]), str(row["held"]), str(row["skipped"]),
                      str(row["controls"]), str(row["not_passed"]), style=style)
    return table


def verify_lemmas(
    ctx: typer.Context,
    suite: str = typer.Option("all", "--suite", help="lemmas | gate | pipeline | all"),
    catalog: str = typer.Option("default", "--catalog", help="'default' or a catalog YAML file"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Seed of the randomized catalog part"),
):
    """Run every checker over the catalog; exit 0 iff every check (and negative control) passes."""
    def body(context: CommandContext):
        settings = context.settings
        used_seed = settings.seed if seed is None else seed
        if catalog == "default":
            entries = load_catalog(DEFAULT_CATALOG_PATH, seed=used_seed, finite_sets=settings.random_finite_sets,
                                   linear_maps=settings.random_linear_maps)
        else:
            entries = load_catalog(Path(catalog), seed=used_seed)
        with context.timed("battery"):
            with console.status("Running the lemma battery") as status:
                result = run_battery(entries, suite=suite, window=settings.window, resolution=settings.resolution,
                                     tol=settings.tolerance, gate_tol=settings.gate_tolerance, seed=used_seed,
                                     progress=lambda label: status.update(f"Lemma battery: {label}"))
        payload = [r.model_dump(mode="json") for r in result.reports]
        write_json(context.output("lemmas.json"), payload)
        console.print(summary_table(result.reports))
        failures = result.failures
        console.print(f"{len(result.reports)} reports over {len(entries)} operators; "
                      f"{'all passed' if not failures else f'{len(failures)} not passed'}")
        return {"suite": suite, "operators": len(entries), "passed": result.passed,
                "reports": len(payload), "failures": [r.model_dump(mode="json") for r in failures]}, \
            0 if result.passed else 1

    run_command(ctx, "verify-lemmas", {"suite": suite, "catalog": catalog, "seed": seed}, body)


def register(app: typer.Typer) -> None:
    app.command("verify-lemmas")(verify_lemmas)
