import json
import os
from pathlib import Path
from typing import Any, Callable, Optional

import numpy as np
import pandas as pd

from src.core.convex.functions import GridFn, GridSpec
from src.utils.logging import logger
from src.validation.error_handler import InputError

INF_LITERAL = "+inf"


def atomic_write(path: Path, write: Callable[[Path], None]) -> Path:
    """
    Write through a temporary sibling file, then rename over the target.

    Args:
        path: final location
        write: callback receiving the temporary path
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    temp_path = path.with_name(path.name + '.tmp')
    try:
        write(temp_path)
        os.replace(str(temp_path), str(path))
    except Exception as e:
        logger.error(f"Failed to write {path}: {e}")
        if temp_path.exists():
            try:
                temp_path.unlink()
            except OSError:
                pass
        raise
    logger.debug(f"Wrote {path}")
    return path


def write_text(path: Path, text: str) -> Path:
    def write(temp_path: Path) -> None:
        with open(temp_path, 'w', encoding='utf-8') as f:
            f.write(text)
    return atomic_write(path, write)


def write_json(path: Path, payload: Any) -> Path:
    """Pretty JSON in the order the payload is built (pydantic dumps keep field order)."""
    return write_text(path, json.dumps(payload, indent=2, ensure_ascii=False) + "\n")


def read_json(path: Path) -> Any:
    path = Path(path)
    try:
        with open(path, 'r', encoding='utf-8') as f:
            return json.load(f)
    except FileNotFoundError as e:
        raise InputError("File not found", str(path)) from e
    except json.JSONDecodeError as e:
        raise InputError(f"Malformed JSON in {path}", f"line {e.lineno}, column {e.colno}: {e.msg}") from e


def _grid_frame(spec: GridSpec, values: np.ndarray, value_format: Optional[Callable] = None) -> pd.DataFrame:
    nodes = spec.nodes()
    frame = pd.DataFrame(nodes, columns=[f"axis{i + 1}" for i in range(spec.d)])
    flat = values.ravel()
    frame["value"] = [value_format(v) for v in flat] if value_format else flat
    return frame


def _format_value(value: float) -> Any:
    return INF_LITERAL if np.isposinf(value) else repr(float(value))


def write_grid_csv(path: Path, f: GridFn) -> Path:
    """One row per node in C order, header axis1..axisd,value, +inf for the sentinel."""
    frame = _grid_frame(f.spec, f.values, _format_value)
    return atomic_write(path, lambda temp: frame.to_csv(temp, index=False, float_format="%.17g"))


def write_mask_csv(path: Path, spec: GridSpec, mask: np.ndarray) -> Path:
    frame = _grid_frame(spec, np.asarray(mask, dtype=np.int64))
    return atomic_write(path, lambda temp: frame.to_csv(temp, index=False, float_format="%.17g"))


def read_grid_csv(path: Path) -> GridFn:
    """Inverse of write_grid_csv; the grid is recovered from the distinct axis values."""
    path = Path(path)
    try:
        frame = pd.read_csv(path, dtype={"value": str})
    except FileNotFoundError as e:
        raise InputError("File not found", str(path)) from e
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise InputError(f"Malformed grid CSV {path}", str(e)) from e
    axes = [c for c in frame.columns if c.startswith("axis")]
    if not axes or "value" not in frame.columns:
        raise InputError("Grid CSV needs columns axis1..axisd,value", list(frame.columns))
    triples = []
    for column in axes:
        coords = np.unique(frame[column].to_numpy(dtype=float))
        if len(coords) < 2:
            raise InputError("Grid axis needs at least two nodes", column)
        triples.append((float(coords[0]), float(coords[-1]), len(coords)))
    spec = GridSpec.from_triples(triples)
    if len(frame) != spec.size:
        raise InputError("Grid CSV rows do not form a full rectangular grid", f"{len(frame)} != {spec.size}")
    ordered = frame.sort_values(axes, kind="stable")
    values = np.array([np.inf if v.strip() == INF_LITERAL else float(v) for v in ordered["value"]], dtype=float)
    logger.info(f"Loaded grid {spec.shape} from {path}")
    return GridFn(spec, values.reshape(spec.shape))
