"""
CLI application: global options, settings and command registration.
"""
from pathlib import Path
from typing import Optional

import typer

from src.cli import gates, transforms, verify
from src.cli.common import CommandContext, err_console
from src.config.app_config import load_config
from src.utils.logging import logger, set_logging_level
from src.validation.error_handler import ConfigurationError, exit_code_for


def _configure(
    ctx: typer.Context,
    config: Optional[Path] = typer.Option(None, "--config", help="Settings YAML (default config/app_config.yaml)"),
    output_dir: Optional[Path] = typer.Option(None, "--output-dir", help="Directory for CSV and JSON artifacts"),
    log_level: Optional[str] = typer.Option(None, "--log-level", help="Overrides logging_level of the settings"),
):
    """Fitzpatrick functions and maximal monotone operators on grids and in exact form."""
    try:
        settings = load_config(config)
        set_logging_level(log_level or settings.logging_level)
    except (ConfigurationError, ValueError) as e:
        err_console.print(f"[red]Configuration error:[/red] {e}")
        raise typer.Exit(exit_code_for(e))
    ctx.obj = CommandContext(settings=settings, output_dir=Path(output_dir or settings.output_dir))


def create_app() -> typer.Typer:
    """Creates the typer application with every command group registered."""
    logger.debug("Creating CLI application")
    app = typer.Typer(name="fitzkit", no_args_is_help=True, add_completion=False,
                      pretty_exceptions_enable=False)
    app.callback()(_configure)
    transforms.register(app)
    gates.register(app)
    verify.register(app)
    return app
