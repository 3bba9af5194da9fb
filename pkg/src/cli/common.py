"""
Shared plumbing of the CLI commands: settings, output paths, timings and the run report.

Every command body runs inside `run_command`, which maps exceptions onto the exit-code
contract (0 = all assertions hold, 1 = violation, 2 = input/config error, 3 = internal
error) and always writes `<command>_report.json` into the output directory.
"""
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, Optional, Tuple

import typer
from rich.console import Console

from src.api.models.report_models import RunReport
from src.config.app_config import AppConfig
from src.core.convex.functions import GridFn, GridSpec
from src.core.serialization import decode_function, decode_operator
from src.utils.file_utils import read_grid_csv, read_json, write_json
from src.utils.helpers import parse_axis_option
from src.utils.logging import logger
from src.validation.error_handler import (
    AssertionViolation,
    BaseFitzkitError,
    InternalError,
    UnsupportedRepresentationError,
    exit_code_for,
)

console = Console()
err_console = Console(stderr=True)


@dataclass
class CommandContext:
    settings: AppConfig
    output_dir: Path
    timings: Dict[str, float] = field(default_factory=dict)

    @contextmanager
    def timed(self, label: str):
        start = time.perf_counter()
        try:
            yield
        finally:
            self.timings[label] = round(time.perf_counter() - start, 6)

    def output(self, name: str) -> Path:
        return self.output_dir / name


def get_context(ctx: typer.Context) -> CommandContext:
    return ctx.obj


def _echo(name: str, params: Dict[str, Any]) -> list:
    return [name] + [f"--{key.replace('_', '-')}={value}" for key, value in params.items() if value is not None]


def run_command(ctx: typer.Context, name: str, config: Dict[str, Any],
                body: Callable[[CommandContext], Tuple[Any, int]]) -> None:
    """
    Run `body`, write the RunReport, exit with the contract code.

    Args:
        name: command name, also the report file stem
        config: grid specs, tolerances and seed echoed into the report
        body: returns (results, exit code)
    """
    context = get_context(ctx)
    logger.info(f"Command {name} started: {config}")
    try:
        results, code = body(context)
    except AssertionViolation as e:
        logger.warning(f"{name}: {e.message}")
        err_console.print(f"[red]Assertion violated:[/red] {e.message}")
        results, code = {"error": e.message, "witness": e.witness, "details": e.details}, exit_code_for(e)
    except BaseFitzkitError as e:
        logger.error(f"{name}: {e}")
        err_console.print(f"[red]Error:[/red] {e}")
        results, code = {"error": e.message, "details": e.details}, exit_code_for(e)
    except Exception as e:
        internal = InternalError.wrap(e)
        logger.exception(f"{name}: {internal.message}")
        err_console.print(f"[red]Internal error:[/red] {internal}")
        results, code = {"error": internal.message, "details": internal.details, "internal": True}, \
            exit_code_for(internal)

    report = RunReport(command=_echo(name, ctx.params), config=config, results=results, exit_code=code,
                       timings=context.timings)
    try:
        write_json(context.output(f"{name}_report.json"), report.model_dump(mode="json"))
    except OSError as e:
        logger.error(f"Could not write the {name} report: {e}")
        code = 2
    logger.info(f"Command {name} finished with exit code {code}")
    raise typer.Exit(code)


# --------------------------------------------------------------------------- #
# Input loading
# --------------------------------------------------------------------------- #

def load_function(path: Path):
    """A function document (JSON) or a grid dump (CSV)."""
    path = Path(path)
    if path.suffix.lower() == ".csv":
        return read_grid_csv(path)
    return decode_function(read_json(path))


def load_grid_function(path: Path) -> GridFn:
    f = load_function(path)
    if not isinstance(f, GridFn):
        raise UnsupportedRepresentationError("This command needs grid data", type(f).__name__)
    return f


def load_operator(path: Path):
    return decode_operator(read_json(path))


def grid_spec_option(option: Optional[str], dimension: int, window: float, resolution: int) -> GridSpec:
    """`--grid` value, or the symmetric default window."""
    if option is None:
        return GridSpec.symmetric(dimension, window, resolution)
    return GridSpec.from_triples(parse_axis_option(option, dimension))
