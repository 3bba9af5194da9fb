"""
`gate`, `extract` and `cw-example` commands.
"""
from pathlib import Path
from typing import Optional

import typer

from src.cli.common import CommandContext, console, load_grid_function, run_command
from src.core.gates.cw import cw_pipeline
from src.core.gates.gate import extract_operator, run_gate
from src.utils.file_utils import write_grid_csv, write_json, write_mask_csv
from src.validation.error_handler import AssertionViolation

DECLARED_DOMAIN_HELP = "Description of P1 D(h) recorded with the gate (the domain condition is not tested)"


def gate(
    ctx: typer.Context,
    input_file: Path = typer.Argument(..., help="Grid function h over X x X* (CSV or JSON)"),
    method: str = typer.Option("llt", "--method", help="llt | bruteforce"),
    declared_domain: str = typer.Option("full window box", "--declared-domain", help=DECLARED_DOMAIN_HELP),
    tol: Optional[float] = typer.Option(None, "--tol", help="Gate tolerance (default from the configuration)"),
):
    """Representability gate: h >= pi and Jh >= pi on the grid."""
    def body(context: CommandContext):
        h = load_grid_function(input_file)
        with context.timed("gate"):
            report, jh = run_gate(h, tol or context.settings.gate_tolerance, method, declared_domain)
        write_grid_csv(context.output("jh.csv"), jh.function)
        write_mask_csv(context.output("jh_mask.csv"), jh.function.spec, jh.saturation_mask)
        console.print(f"Gate: h >= pi {report.h_ge_pi.holds}, Jh >= pi {report.jh_ge_pi.holds}")
        if not report.holds:
            raise AssertionViolation("Representability gate failed",
                                     report.h_ge_pi.witness or report.jh_ge_pi.witness,
                                     report.model_dump(mode="json"))
        return report.model_dump(mode="json"), 0

    run_command(ctx, "gate", {"input": str(input_file), "method": method, "declared_domain": declared_domain,
                              "tol": tol}, body)


def extract(
    ctx: typer.Context,
    input_file: Path = typer.Argument(..., help="Grid function h over X x X* (CSV or JSON)"),
    tol: Optional[float] = typer.Option(None, "--tol", help="Equality tolerance for Jh - pi (default: grid spacing)"),
    method: str = typer.Option("llt", "--method", help="llt | bruteforce"),
):
    """Extract the monotone operator {Jh = pi} from a grid h that passes the gate."""
    def body(context: CommandContext):
        h = load_grid_function(input_file)
        with context.timed("extract"):
            result = extract_operator(h, tol=tol, gate_tol=context.settings.gate_tolerance, method=method)
        write_json(context.output("extracted.json"), result.model_dump(mode="json"))
        console.print(f"Extracted {len(result.graph)} nodes from {result.candidates} candidates "
                      f"({result.fiber_minima} fiber minima, {result.rejected} rejected), monotone {result.monotone}")
        if not result.monotone:
            raise AssertionViolation("Extracted graph is not monotone", None, {"candidates": result.candidates})
        return result.model_dump(mode="json"), 0

    run_command(ctx, "extract", {"input": str(input_file), "tol": tol, "method": method}, body)


def cw_example(
    ctx: typer.Context,
    resolution: int = typer.Option(17, "--resolution", help="Nodes per axis of the R^4 grid (at least 9)"),
    window: float = typer.Option(2.0, "--window", help="Half-width of the symmetric window"),
):
    """Bounded-range instance on R^4: gate, extraction, range bound and fiber coverage."""
    def body(context: CommandContext):
        with context.timed("pipeline"):
            report = cw_pipeline(resolution=resolution, window=window, gate_tol=context.settings.gate_tolerance)
        payload = report.model_dump(mode="json")
        write_json(context.output("cw_example.json"), payload)
        console.print(f"Bounded-range instance: holds {report.holds}, L = {report.range_bound}, "
                      f"fibers {report.fibers_covered}/{report.fibers_required}, "
                      f"Hausdorff {report.hausdorff_to_reference} (limit {report.hausdorff_limit})")
        return payload, 0 if report.holds else 1

    run_command(ctx, "cw-example", {"resolution": resolution, "window": window}, body)


def register(app: typer.Typer) -> None:
    app.command("gate")(gate)
    app.command("extract")(extract)
    app.command("cw-example")(cw_example)
