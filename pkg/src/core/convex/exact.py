"""
Exact linear algebra over the rationals (Gaussian elimination on Fractions).

Matrices are lists of rows of Fractions. Sizes here never exceed a handful of rows,
so plain elimination is the right tool.
"""
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

Matrix = List[List[Fraction]]


def _copy(rows: Sequence[Sequence[Fraction]]) -> Matrix:
    return [[Fraction(v) for v in row] for row in rows]


def row_reduce(rows: Sequence[Sequence[Fraction]], ncols: Optional[int] = None) -> Tuple[Matrix, List[int]]:
    """
    Reduced row echelon form.

    Args:
        rows: input matrix
        ncols: eliminate only within the first `ncols` columns (augmented systems)

    Returns:
        (reduced matrix, pivot column list)
    """
    m = _copy(rows)
    if not m:
        return m, []
    width = len(m[0]) if ncols is None else ncols
    pivots: List[int] = []
    r = 0
    for c in range(width):
        pivot = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        lead = m[r][c]
        m[r] = [v / lead for v in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                factor = m[i][c]
                m[i] = [a - factor * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m, pivots


def rank(rows: Sequence[Sequence[Fraction]]) -> int:
    return len(row_reduce(rows)[1])


def solve(a: Sequence[Sequence[Fraction]], b: Sequence[Fraction]) -> Optional[List[Fraction]]:
    """Unique solution of a x = b, or None when the system is singular or inconsistent."""
    if not a:
        return None
    n = len(a[0])
    augmented = [list(row) + [rhs] for row, rhs in zip(a, b)]
    reduced, pivots = row_reduce(augmented, ncols=n)
    for row in reduced[len(pivots):]:
        if row[n] != 0:
            return None
    if len(pivots) != n:
        return None
    solution = [Fraction(0)] * n
    for i, c in enumerate(pivots):
        solution[c] = reduced[i][n]
    return solution


def solve_any(a: Sequence[Sequence[Fraction]], b: Sequence[Fraction]) -> Optional[List[Fraction]]:
    """Some solution of a x = b (free variables set to 0), or None when inconsistent."""
    n = len(a[0])
    augmented = [list(row) + [rhs] for row, rhs in zip(a, b)]
    reduced, pivots = row_reduce(augmented, ncols=n)
    for row in reduced[len(pivots):]:
        if row[n] != 0:
            return None
    solution = [Fraction(0)] * n
    for i, c in enumerate(pivots):
        solution[c] = reduced[i][n]
    return solution


def sub(a: Sequence[Fraction], b: Sequence[Fraction]) -> List[Fraction]:
    return [x - y for x, y in zip(a, b)]


def det(rows: Sequence[Sequence[Fraction]]) -> Fraction:
    """Determinant by elimination with row swaps."""
    m = _copy(rows)
    n = len(m)
    sign = 1
    result = Fraction(1)
    for c in range(n):
        pivot = next((i for i in range(c, n) if m[i][c] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != c:
            m[c], m[pivot] = m[pivot], m[c]
            sign = -sign
        result *= m[c][c]
        for i in range(c + 1, n):
            if m[i][c] != 0:
                factor = m[i][c] / m[c][c]
                m[i] = [a - factor * b for a, b in zip(m[i], m[c])]
    return result * sign


class AffineFrame:
    """
    Affine hull of a finite point set with intrinsic coordinates.

    `basis` indexes an affinely independent subset spanning the hull; `coordinates(z)`
    expresses z in the frame, or returns None when z lies off the hull.
    """

    def __init__(self, points: Sequence[Sequence[Fraction]]):
        if not points:
            raise ValueError("AffineFrame needs at least one point")
        self.origin = list(points[0])
        self.ambient_dim = len(self.origin)
        self.basis: List[int] = [0]
        self.directions: Matrix = []
        for index, point in enumerate(points[1:], start=1):
            candidate = self.directions + [sub(point, self.origin)]
            if rank(candidate) == len(candidate):
                self.directions = candidate
                self.basis.append(index)
            if len(self.directions) == self.ambient_dim:
                break

    @property
    def dim(self) -> int:
        return len(self.directions)

    def coordinates(self, z: Sequence[Fraction]) -> Optional[List[Fraction]]:
        offset = sub(z, self.origin)
        if self.dim == 0:
            return [] if all(v == 0 for v in offset) else None
        # columns = directions; solve for t in  sum_i t_i dir_i = offset
        a = [[self.directions[j][i] for j in range(self.dim)] for i in range(self.ambient_dim)]
        augmented = [row + [rhs] for row, rhs in zip(a, offset)]
        reduced, pivots = row_reduce(augmented, ncols=self.dim)
        for row in reduced[len(pivots):]:
            if row[self.dim] != 0:
                return None
        t = [Fraction(0)] * self.dim
        for i, c in enumerate(pivots):
            t[c] = reduced[i][self.dim]
        return t


def _pivot(tableau: Matrix, basis: List[int], row: int, col: int) -> None:
    lead = tableau[row][col]
    tableau[row] = [v / lead for v in tableau[row]]
    for i, other in enumerate(tableau):
        if i != row and other[col] != 0:
            factor = other[col]
            tableau[i] = [a - factor * b for a, b in zip(other, tableau[row])]
    basis[row] = col


def _minimize(tableau: Matrix, basis: List[int], costs: Sequence[Fraction], columns: int) -> bool:
    """Bland's rule over the first `columns` columns. False when the objective is unbounded."""
    while True:
        entering = None
        for j in range(columns):
            reduced = costs[j] - sum((costs[b] * row[j] for b, row in zip(basis, tableau)), Fraction(0))
            if reduced < 0:
                entering = j
                break
        if entering is None:
            return True
        leaving, best = None, None
        for i, row in enumerate(tableau):
            if row[entering] > 0:
                ratio = row[-1] / row[entering]
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leaving]):
                    leaving, best = i, ratio
        if leaving is None:
            return False
        _pivot(tableau, basis, leaving, entering)


def simplex_min(costs: Sequence[Fraction], a_eq: Sequence[Sequence[Fraction]],
                b_eq: Sequence[Fraction]) -> Optional[Tuple[Fraction, List[Fraction]]]:
    """
    min costs . x  subject to  a_eq x = b_eq, x >= 0, by the two-phase simplex method.

    Returns:
        (optimal value, optimal x), or None when the constraints are infeasible

    Raises:
        ValueError: the objective is unbounded below
    """
    n = len(costs)
    tableau: Matrix = []
    for i, (row, rhs) in enumerate(zip(a_eq, b_eq)):
        sign = -1 if rhs < 0 else 1
        tableau.append([sign * Fraction(v) for v in row] + [Fraction(int(k == i)) for k in range(len(b_eq))]
                       + [sign * Fraction(rhs)])
    basis = [n + i for i in range(len(tableau))]
    artificial = [Fraction(0)] * n + [Fraction(1)] * len(tableau)
    _minimize(tableau, basis, artificial, n + len(tableau))
    if any(row[-1] != 0 for b, row in zip(basis, tableau) if b >= n):
        return None
    # drive zero-level artificials out of the basis; rows with no original entry are redundant
    for i in reversed(range(len(tableau))):
        if basis[i] >= n:
            col = next((j for j in range(n) if tableau[i][j] != 0), None)
            if col is None:
                del tableau[i], basis[i]
            else:
                _pivot(tableau, basis, i, col)
    tableau = [row[:n] + row[-1:] for row in tableau]
    if not _minimize(tableau, basis, [Fraction(v) for v in costs], n):
        raise ValueError("Linear program is unbounded below")
    x = [Fraction(0)] * n
    for b, row in zip(basis, tableau):
        x[b] = row[-1]
    return sum((Fraction(c) * v for c, v in zip(costs, x)), Fraction(0)), x
