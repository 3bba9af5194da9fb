"""
Lower convex envelope of finitely many (point, value) generators, evaluated exactly.

    env(z) = min { sum l_k v_k : l >= 0, sum l_k = 1, sum l_k p_k = z }

HiGHS (through scipy.optimize.linprog) proposes an optimal basis in floating point.
The basis is then certified in rationals: primal weights must be nonnegative and the
interpolating affine minorant through the basis must lie below every generator.
When certification fails or HiGHS reports anything but an optimum, the same LP is
solved by the rational simplex method (exact.simplex_min), so every value returned,
+inf included, is exact.
"""
from fractions import Fraction
from functools import cached_property
from typing import List, Optional, Sequence

import numpy as np
from scipy.optimize import linprog

from src.core.convex.exact import AffineFrame, rank, simplex_min, solve
from src.core.convex.extended import INF, ExtReal
from src.utils.logging import logger

_SUPPORT_EPS = 1e-9


class EnvelopeSolver:
    """Evaluates the closed convex envelope of generators at rational points."""

    def __init__(self, points: Sequence[Sequence[Fraction]], values: Sequence[Fraction]):
        if len(points) == 0 or len(points) != len(values):
            raise ValueError("EnvelopeSolver needs matching nonempty points and values")
        self.points = [list(p) for p in points]
        self.values = list(values)
        self.frame = AffineFrame(self.points)
        self.coords = [self.frame.coordinates(p) for p in self.points]

    @property
    def dim(self) -> int:
        return self.frame.dim

    @cached_property
    def _lp_matrix(self) -> np.ndarray:
        rows = [[float(t[i]) for t in self.coords] for i in range(self.dim)]
        rows.append([1.0] * len(self.coords))
        return np.array(rows, dtype=float)

    @cached_property
    def _lp_costs(self) -> np.ndarray:
        return np.array([float(v) for v in self.values], dtype=float)

    def value(self, z: Sequence[Fraction]) -> ExtReal:
        t = self.frame.coordinates(list(z))
        if t is None:
            return INF
        if self.dim == 0:
            return min(self.values)
        return self._value_intrinsic(t)

    def contains(self, z: Sequence[Fraction]) -> bool:
        return self.value(z) != INF

    def _solve_lp(self, t: Sequence[Fraction]):
        b_eq = np.array([float(v) for v in t] + [1.0])
        return linprog(self._lp_costs, A_eq=self._lp_matrix, b_eq=b_eq,
                       bounds=(0, None), method="highs")

    def _value_intrinsic(self, t: List[Fraction]) -> ExtReal:
        res = self._solve_lp(t)
        if res.status == 0:
            certified = self._certify(t, res)
            if certified is not None:
                return certified
            logger.debug("Envelope certification failed; solving exactly")
        else:
            logger.debug(f"Envelope LP status {res.status}; solving exactly")
        return self._exact(t)

    def _independent(self, indices: Sequence[int]) -> bool:
        rows = [list(self.coords[k]) + [Fraction(1)] for k in indices]
        return rank(rows) == len(rows)

    def _certify(self, t: List[Fraction], res) -> Optional[Fraction]:
        weights = np.asarray(res.x)
        support = sorted(range(len(weights)), key=lambda k: -weights[k])
        support = [k for k in support if weights[k] > _SUPPORT_EPS]
        basis: List[int] = []
        for k in support:
            if self._independent(basis + [k]):
                basis.append(k)
        if len(basis) < self.dim + 1:
            duals = np.asarray(res.eqlin.marginals, dtype=float)
            slopes, intercept = duals[:self.dim], duals[self.dim]
            slack = self._lp_costs - (self._lp_matrix[:self.dim].T @ slopes + intercept)
            for k in np.argsort(slack, kind="stable"):
                k = int(k)
                if k in basis:
                    continue
                if self._independent(basis + [k]):
                    basis.append(k)
                if len(basis) == self.dim + 1:
                    break
        if len(basis) != self.dim + 1:
            return None
        matrix = [list(self.coords[k]) + [Fraction(1)] for k in basis]
        transposed = [[matrix[j][i] for j in range(len(basis))] for i in range(self.dim + 1)]
        weights_exact = solve(transposed, list(t) + [Fraction(1)])
        if weights_exact is None or any(w < 0 for w in weights_exact):
            return None
        minorant = solve(matrix, [self.values[k] for k in basis])
        if minorant is None:
            return None
        slopes_exact, intercept_exact = minorant[:self.dim], minorant[self.dim]
        for coords, value in zip(self.coords, self.values):
            if sum((a * b for a, b in zip(slopes_exact, coords)), intercept_exact) > value:
                return None
        return sum((w * self.values[k] for w, k in zip(weights_exact, basis)), Fraction(0))

    def _exact(self, t: List[Fraction]) -> ExtReal:
        """The envelope LP itself, solved by the rational simplex method; +inf when infeasible."""
        rows = [[c[i] for c in self.coords] for i in range(self.dim)]
        rows.append([Fraction(1)] * len(self.coords))
        solution = simplex_min(self.values, rows, list(t) + [Fraction(1)])
        return INF if solution is None else solution[0]

    def value_float(self, z: Sequence[float]) -> float:
        """Floating-point evaluation (no certification), for bulk grid sampling."""
        t = self.frame.coordinates([Fraction(repr(float(v))) for v in z])
        if t is None:
            return INF
        if self.dim == 0:
            return float(min(self.values))
        res = self._solve_lp(t)
        if res.status != 0:
            return INF
        return float(res.fun)
