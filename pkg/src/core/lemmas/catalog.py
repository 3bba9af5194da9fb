"""
Verification catalog: named operators from YAML plus seeded random ones.

All randomness comes from one numpy Generator built from the seed, so a catalog is a
pure function of (file, seed, counts).
"""
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import List, Optional

import numpy as np
import yaml

from src.config.app_config import PROJECT_ROOT
from src.core.operators.models import FiniteOperator, LinearOperator, Operator
from src.core.serialization import decode_operator
from src.utils.helpers import random_rationals
from src.utils.logging import logger
from src.validation.error_handler import InputError

DEFAULT_CATALOG_PATH = PROJECT_ROOT / "config" / "catalog" / "default.yaml"


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    operator: Operator
    randomized: bool = False


def _matmul(a, b) -> List[List[Fraction]]:
    n = len(a)
    return [[sum((a[i][k] * b[k][j] for k in range(n)), Fraction(0)) for j in range(n)] for i in range(n)]


def _transpose(a) -> List[List[Fraction]]:
    return [list(row) for row in zip(*a)]


def random_monotone_matrix(rng: np.random.Generator, n: int, shift: bool = True) -> List[List[Fraction]]:
    """
    A^T A + c I + K with rational entries: positive semidefinite symmetric part (definite
    when `shift`), K skew.
    """
    a = random_rationals(rng, (n, n), bound=2, denominator=4)
    m = _matmul(_transpose(a), a)
    if shift:
        c = Fraction(int(rng.integers(1, 9)), 8)
        for i in range(n):
            m[i][i] += c
    if n == 2:
        k = random_rationals(rng, (1, 1), bound=2, denominator=4)[0][0]
        m[0][1] += k
        m[1][0] -= k
    return m


def random_linear_maps(rng: np.random.Generator, count: int) -> List[CatalogEntry]:
    entries = []
    for i in range(count):
        n = 1 + i % 2
        entries.append(CatalogEntry(f"random linear #{i + 1} (n={n})",
                                    LinearOperator(tuple(tuple(r) for r in random_monotone_matrix(rng, n))),
                                    randomized=True))
    return entries


def random_finite_sets(rng: np.random.Generator, count: int) -> List[CatalogEntry]:
    """
    n = 1: sorted primal values paired with sorted dual values (comonotone, hence monotone).
    n = 2: y* = M y for a random monotone M.
    """
    entries = []
    for i in range(count):
        n = 1 + i % 2
        size = int(rng.integers(3, 7))
        if n == 1:
            ys = sorted(random_rationals(rng, (1, size))[0])
            ystars = sorted(random_rationals(rng, (1, size))[0])
            pairs = list(zip(ys, ystars))
        else:
            m = random_monotone_matrix(rng, 2, shift=False)
            points = random_rationals(rng, (size, 2))
            pairs = [(y, [m[0][0] * y[0] + m[0][1] * y[1], m[1][0] * y[0] + m[1][1] * y[1]]) for y in points]
        entries.append(CatalogEntry(f"random finite #{i + 1} (n={n})", FiniteOperator.of(pairs), randomized=True))
    return entries


def load_catalog(path: Optional[Path] = None, seed: int = 20240611, finite_sets: Optional[int] = None,
                 linear_maps: Optional[int] = None) -> List[CatalogEntry]:
    """
    Named operators of the YAML file followed by the random part.

    Counts given here override the file's `random` section.
    """
    path = Path(path or DEFAULT_CATALOG_PATH)
    try:
        with open(path, 'r', encoding='utf-8') as f:
            data = yaml.safe_load(f) or {}
    except FileNotFoundError as e:
        raise InputError("Catalog file not found", str(path)) from e
    except yaml.YAMLError as e:
        raise InputError(f"Invalid YAML in catalog {path}", str(e)) from e
    if not isinstance(data, dict):
        raise InputError(f"Catalog {path} must be a mapping")

    entries = []
    for i, doc in enumerate(data.get("operators") or []):
        if not isinstance(doc, dict):
            raise InputError("Catalog operator must be a mapping", f"operators/{i}")
        entries.append(CatalogEntry(str(doc.get("name", f"operator #{i + 1}")), decode_operator(doc)))

    random_section = data.get("random") or {}
    finite_sets = random_section.get("finite_sets", 0) if finite_sets is None else finite_sets
    linear_maps = random_section.get("linear_maps", 0) if linear_maps is None else linear_maps
    rng = np.random.default_rng(seed)
    entries += random_linear_maps(rng, int(linear_maps))
    entries += random_finite_sets(rng, int(finite_sets))
    logger.info(f"Catalog {path.name}: {len(entries)} operators (seed {seed})")
    return entries
