"""Exact rational linear algebra on small dense matrices.

Everything here operates on lists of lists of ``fractions.Fraction`` and is
meant for stoichiometric matrices with at most a few dozen rows/columns, where
exactness matters more than speed (rank and conservation laws must never
depend on a floating-point tolerance).
"""

from __future__ import annotations

from fractions import Fraction

Row = list[Fraction]
Matrix = list[Row]


def copy_matrix(rows: Matrix) -> Matrix:
    return [list(row) for row in rows]


def rref(rows: Matrix) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form.

    Returns the RREF of ``rows`` (a new matrix) and the list of pivot column
    indices. Pivots are normalised to 1 and appear in increasing column order.
    """
    mat = copy_matrix(rows)
    n_rows = len(mat)
    n_cols = len(mat[0]) if n_rows else 0
    pivots: list[int] = []
    r = 0
    for col in range(n_cols):
        pivot_row = None
        for i in range(r, n_rows):
            if mat[i][col] != 0:
                pivot_row = i
                break
        if pivot_row is None:
            continue
        mat[r], mat[pivot_row] = mat[pivot_row], mat[r]
        inv = Fraction(1, 1) / mat[r][col]
        mat[r] = [v * inv for v in mat[r]]
        for i in range(n_rows):
            if i != r and mat[i][col] != 0:
                factor = mat[i][col]
                mat[i] = [a - factor * b for a, b in zip(mat[i], mat[r])]
        pivots.append(col)
        r += 1
        if r == n_rows:
            break
    return mat, pivots


def rank(rows: Matrix) -> int:
    if not rows or not rows[0]:
        return 0
    _, pivots = rref(rows)
    return len(pivots)


def transpose(rows: Matrix) -> Matrix:
    if not rows:
        return []
    return [[rows[i][j] for i in range(len(rows))] for j in range(len(rows[0]))]


def nullspace(rows: Matrix, n_cols: int) -> Matrix:
    """Basis of the right kernel {v : rows @ v = 0}, canonicalised by RREF.

    ``n_cols`` is required explicitly so that a matrix with zero rows still
    yields the full space.
    """
    if not rows:
        basis = [[Fraction(int(i == j)) for j in range(n_cols)] for i in range(n_cols)]
        return basis
    red, pivots = rref(rows)
    pivot_set = set(pivots)
    free = [j for j in range(n_cols) if j not in pivot_set]
    basis: Matrix = []
    for f in free:
        v = [Fraction(0)] * n_cols
        v[f] = Fraction(1)
        for i, p in enumerate(pivots):
            v[p] = -red[i][f]
        basis.append(v)
    if not basis:
        return []
    # canonical form: RREF of the stacked basis, rows have leading entry +1
    canon, _ = rref(basis)
    return [row for row in canon if any(v != 0 for v in row)]


def left_nullspace(rows: Matrix) -> Matrix:
    """Basis of {w : w^t @ rows = 0}, canonicalised as in :func:`nullspace`."""
    n = len(rows)
    return nullspace(transpose(rows), n)


def solve_square(mat: Matrix, rhs: list[Fraction]) -> list[Fraction]:
    """Solve ``mat @ x = rhs`` for invertible square ``mat``. Raises ValueError if singular."""
    n = len(mat)
    aug = [list(mat[i]) + [rhs[i]] for i in range(n)]
    red, pivots = rref(aug)
    if pivots != list(range(n)):
        raise ValueError("matrix is singular")
    return [red[i][n] for i in range(n)]


def invert(mat: Matrix) -> Matrix:
    """Inverse of a square invertible rational matrix."""
    n = len(mat)
    aug = [list(mat[i]) + [Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    red, pivots = rref(aug)
    if pivots[:n] != list(range(n)):
        raise ValueError("matrix is singular")
    return [row[n:] for row in red]


def matmul(a: Matrix, b: Matrix) -> Matrix:
    if not a or not b:
        return []
    return [
        [sum((a[i][k] * b[k][j] for k in range(len(b))), Fraction(0)) for j in range(len(b[0]))]
        for i in range(len(a))
    ]

