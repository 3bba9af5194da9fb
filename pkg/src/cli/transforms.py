"""
`conjugate` and `fitzpatrick` commands.
"""
from pathlib import Path
from typing import Optional

import numpy as np
import typer

from src.cli.common import CommandContext, console, grid_spec_option, load_function, load_operator, run_command
from src.core.convex.extended import to_float
from src.core.convex.functions import GridFn, MaxAffineFn
from src.core.fitzpatrick.constructions import (
    phi_finite,
    phi_linear_eval,
    phi_pwl1d_grid,
    sigma_finite,
    sigma_linear_eval,
)
from src.core.legendre.transform import (
    METHODS,
    ConjugateResult,
    conjugate_bruteforce,
    conjugate_exact,
    conjugate_grid,
    j_transform,
)
from src.core.operators.models import FiniteOperator, LinearOperator, PwlCurve1d
from src.core.serialization import encode_function
from src.utils.file_utils import write_grid_csv, write_json, write_mask_csv
from src.utils.logging import logger
from src.validation.error_handler import InputError, UnsupportedRepresentationError

WHICH = ("phi", "sigma", "both")

# generator forms on X x X* with n = 2 solve one LP per node
_MAX_DEFAULT_NODES = 20_000


def _write_result(context: CommandContext, stem: str, result: ConjugateResult) -> dict:
    fn = result.function
    if isinstance(fn, GridFn):
        files = [write_grid_csv(context.output(f"{stem}.csv"), fn)]
        if result.saturation_mask is not None:
            files.append(write_mask_csv(context.output(f"{stem}_mask.csv"), fn.spec, result.saturation_mask))
        trusted = int(result.trusted.sum()) if result.trusted is not None else fn.spec.size
        return {"form": "grid", "shape": list(fn.spec.shape), "finite_nodes": int(fn.finite_mask.sum()),
                "trusted_nodes": trusted, "files": [p.name for p in files]}
    path = write_json(context.output(f"{stem}.json"), encode_function(fn))
    size = len(fn.pieces) if isinstance(fn, MaxAffineFn) else len(fn.generators)
    return {"form": encode_function(fn)["kind"], "size": size, "files": [path.name]}


def conjugate(
    ctx: typer.Context,
    input_file: Path = typer.Argument(..., help="Function document (JSON) or grid dump (CSV)"),
    grid: Optional[str] = typer.Option(None, "--grid", help="lo:hi:m per axis (comma separated) or one triple"),
    method: str = typer.Option("llt", "--method", help="llt | bruteforce | exact"),
    j: bool = typer.Option(False, "--j", help="Apply the block swap after conjugating (the J transform)"),
):
    """Fenchel conjugate (or J transform) of a function."""
    def body(context: CommandContext):
        if method not in METHODS:
            raise InputError(f"Unknown method; expected one of {', '.join(METHODS)}", method)
        f = load_function(input_file)
        with context.timed("conjugate"):
            if method == "exact":
                if isinstance(f, GridFn):
                    raise UnsupportedRepresentationError("The exact method needs a max-affine or generator form")
                result = j_transform(f) if j else ConjugateResult(conjugate_exact(f))
            else:
                if not isinstance(f, GridFn):
                    if grid is None:
                        raise InputError("Sampling an exact form for a grid method needs --grid")
                    f = f.sample(grid_spec_option(grid, f.dim, context.settings.window, context.settings.resolution))
                target = None if grid is None else grid_spec_option(grid, f.spec.d, 0, 0)
                if j:
                    result = j_transform(f, output_spec=target, method=method)
                else:
                    transform = conjugate_grid if method == "llt" else conjugate_bruteforce
                    result = transform(f, target)
        results = _write_result(context, "jtransform" if j else "conjugate", result)
        console.print(f"{'J transform' if j else 'Conjugate'} ({method}): {results}")
        return results, 0

    run_command(ctx, "conjugate", {"input": str(input_file), "grid": grid, "method": method, "j": j}, body)


# --------------------------------------------------------------------------- #
# Fitzpatrick functions
# --------------------------------------------------------------------------- #

def _default_grid(T, context: CommandContext, grid: Optional[str]):
    n = T.n
    resolution = context.settings.resolution
    if grid is None and resolution ** (2 * n) > _MAX_DEFAULT_NODES:
        resolution = int(_MAX_DEFAULT_NODES ** (1 / (2 * n)))
        logger.warning(f"Default grid reduced to {resolution} nodes per axis for n = {n}")
    return grid_spec_option(grid, 2 * n, context.settings.window, resolution)


def _exact_grid(evaluate, spec) -> GridFn:
    values = [to_float(evaluate(spec.exact_node(index))) for index in np.ndindex(*spec.shape)]
    return GridFn(spec, np.array(values, dtype=float).reshape(spec.shape))


def _fitzpatrick_grids(T, spec, which: str) -> dict:
    """Grid samples of phi_T and sigma_T as requested; sigma of a curve comes as J phi with its mask."""
    grids = {}
    if isinstance(T, FiniteOperator):
        if which in ("phi", "both"):
            grids["phi"] = ConjugateResult(phi_finite(T).sample(spec))
        if which in ("sigma", "both"):
            grids["sigma"] = ConjugateResult(sigma_finite(T).sample(spec))
    elif isinstance(T, PwlCurve1d):
        phi = phi_pwl1d_grid(T, spec)
        if which in ("phi", "both"):
            grids["phi"] = ConjugateResult(phi)
        if which in ("sigma", "both"):
            grids["sigma"] = j_transform(phi)
    elif isinstance(T, LinearOperator):
        if which in ("phi", "both"):
            grids["phi"] = ConjugateResult(_exact_grid(lambda z: phi_linear_eval(T, z), spec))
        if which in ("sigma", "both"):
            grids["sigma"] = ConjugateResult(_exact_grid(lambda z: sigma_linear_eval(T, z), spec))
    else:
        raise InputError("Unsupported operator", type(T).__name__)
    return grids


def _envelope_on_grid(phi: GridFn, sigma: ConjugateResult, tol: float) -> dict:
    """phi <= sigma at every node where sigma is finite (and trusted, for grid-derived sigma)."""
    mask = sigma.function.finite_mask
    if sigma.trusted is not None:
        mask = mask & sigma.trusted
    gaps = np.where(mask, phi.values - sigma.function.values, -np.inf)
    if not mask.any():
        return {"holds": True, "worst_gap": None, "nodes_checked": 0, "witness": None}
    k = np.unravel_index(int(np.argmax(gaps)), gaps.shape)
    worst = float(gaps[k])
    holds = worst <= tol
    witness = None if holds else phi.spec.nodes()[np.ravel_multi_index(k, phi.spec.shape)].tolist()
    return {"holds": holds, "worst_gap": worst, "nodes_checked": int(mask.sum()), "witness": witness}


def fitzpatrick(
    ctx: typer.Context,
    operator_file: Path = typer.Argument(..., help="Operator document (JSON)"),
    which: str = typer.Option("phi", "--which", help="phi | sigma | both"),
    grid: Optional[str] = typer.Option(None, "--grid", help="lo:hi:m per axis over (x, x*)"),
):
    """Fitzpatrick function phi_T and/or sigma_T of an operator."""
    def body(context: CommandContext):
        if which not in WHICH:
            raise InputError(f"Unknown --which; expected one of {', '.join(WHICH)}", which)
        T = load_operator(operator_file)
        results = {"operator": type(T).__name__, "n": T.n}
        if isinstance(T, FiniteOperator):
            exact = {"phi": phi_finite(T), "sigma": sigma_finite(T)}
            for key in ("phi", "sigma"):
                if which in (key, "both"):
                    path = write_json(context.output(f"{key}.json"), encode_function(exact[key]))
                    results[f"{key}_form"] = path.name
        spec = _default_grid(T, context, grid)
        with context.timed("sample"):
            grids = _fitzpatrick_grids(T, spec, which)
        for key, result in grids.items():
            results[key] = _write_result(context, key, result)

        code = 0
        if which == "both":
            with context.timed("envelope"):
                envelope = _envelope_on_grid(grids["phi"].function, grids["sigma"], context.settings.gate_tolerance)
            results["phi_le_sigma"] = envelope
            code = 0 if envelope["holds"] else 1
        console.print(f"Fitzpatrick ({which}) on grid {list(spec.shape)}: written to {context.output_dir}")
        return results, code

    run_command(ctx, "fitzpatrick", {"operator": str(operator_file), "which": which, "grid": grid}, body)


def register(app: typer.Typer) -> None:
    app.command("conjugate")(conjugate)
    app.command("fitzpatrick")(fitzpatrick)
