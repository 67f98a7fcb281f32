"""Exact rational linear algebra plus the small symmetric float kernel.

All exact computation in the package funnels through this module: ranks,
nullspaces, and integer lattice normal forms use arbitrary-precision
rationals (``fractions.Fraction``) with no floating shortcut. The float side
(``SymMatrix`` / ``sym_eigen`` / ``psd_project``) wraps the backend kernels.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from . import kernels
from .errors import NonConvergence

# Exact scalars must stay reduced with positive denominator at arbitrary
# precision; fractions.Fraction guarantees all three by construction.
Rational = Fraction


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError("rational entries must be Fraction, int, or string, got %r" % type(x))


class RationalMatrix:
    """Dense exact matrix. Degenerate (0-row or 0-column) shapes are rejected."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, rows: int, cols: int, entries):
        if rows <= 0 or cols <= 0:
            raise ValueError("matrix must have at least one row and one column")
        entries = [_frac(e) for e in entries]
        if len(entries) != rows * cols:
            raise ValueError("expected %d entries, got %d" % (rows * cols, len(entries)))
        self.rows = rows
        self.cols = cols
        self.entries = entries

    @classmethod
    def from_rows(cls, rows) -> "RationalMatrix":
        rows = [list(r) for r in rows]
        if not rows:
            raise ValueError("matrix must have at least one row")
        ncols = len(rows[0])
        if any(len(r) != ncols for r in rows):
            raise ValueError("ragged rows")
        flat = [e for r in rows for e in r]
        return cls(len(rows), ncols, flat)

    def row_list(self):
        c = self.cols
        return [self.entries[i * c:(i + 1) * c] for i in range(self.rows)]

    def transpose(self) -> "RationalMatrix":
        rows = self.row_list()
        return RationalMatrix.from_rows([[rows[i][j] for i in range(self.rows)]
                                         for j in range(self.cols)])

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i * self.cols + j]

    def __eq__(self, other):
        return (isinstance(other, RationalMatrix) and self.rows == other.rows
                and self.cols == other.cols and self.entries == other.entries)

    def __repr__(self):
        return "RationalMatrix(%d x %d)" % (self.rows, self.cols)


def rref(rows):
    """Reduced row echelon form over the rationals.

    Takes a list of rows (lists of Fraction/int); returns (nonzero reduced
    rows, pivot column indices). Input is not mutated.
    """
    mat = [[_frac(e) for e in r] for r in rows]
    if not mat:
        return [], []
    ncols = len(mat[0])
    pivots = []
    r = 0
    for c in range(ncols):
        pivot_row = None
        for i in range(r, len(mat)):
            if mat[i][c] != 0:
                pivot_row = i
                break
        if pivot_row is None:
            continue
        mat[r], mat[pivot_row] = mat[pivot_row], mat[r]
        pv = mat[r][c]
        if pv != 1:
            mat[r] = [e / pv for e in mat[r]]
        for i in range(len(mat)):
            if i != r and mat[i][c] != 0:
                f = mat[i][c]
                mat[i] = [a - f * b for a, b in zip(mat[i], mat[r])]
        pivots.append(c)
        r += 1
        if r == len(mat):
            break
    return mat[:r], pivots


def exact_rank(rows) -> int:
    return len(rref(rows)[0])


def nullspace(rows, ncols=None):
    """Basis of {v : A v = 0}, exact. Rows may be empty (then ncols required)."""
    rows = list(rows)
    if not rows:
        if ncols is None:
            raise ValueError("ncols required for an empty row list")
        basis = []
        for j in range(ncols):
            v = [Fraction(0)] * ncols
            v[j] = Fraction(1)
            basis.append(v)
        return basis
    ncols = len(rows[0])
    red, pivots = rref(rows)
    pivset = set(pivots)
    free = [c for c in range(ncols) if c not in pivset]
    basis = []
    for fc in free:
        v = [Fraction(0)] * ncols
        v[fc] = Fraction(1)
        for r, pc in zip(red, pivots):
            v[pc] = -r[fc]
        basis.append(v)
    return basis


def rank_and_nullspace(A: RationalMatrix):
    """Exact rank and nullspace basis; rank + len(basis) == cols."""
    rows = A.row_list()
    red, pivots = rref(rows)
    basis = nullspace(rows, A.cols)
    return len(red), basis


def solve_exact(rows, rhs):
    """One exact solution x of A x = b, or None if inconsistent."""
    rows = [list(r) + [b] for r, b in zip(rows, rhs)]
    ncols = len(rows[0]) - 1
    red, pivots = rref(rows)
    if ncols in pivots:
        return None
    x = [Fraction(0)] * ncols
    for r, pc in zip(red, pivots):
        x[pc] = r[-1]
    return x


def in_row_span(rows, v) -> bool:
    """Exact membership of v in the row span of `rows`."""
    rows = list(rows)
    if not rows:
        return all(_frac(e) == 0 for e in v)
    base = exact_rank(rows)
    return exact_rank(rows + [list(v)]) == base


def mat_vec(rows, v):
    return [sum((a * b for a, b in zip(r, v)), Fraction(0)) for r in rows]


# ---------------------------------------------------------------------------
# Integer lattice normal forms.


def lattice_index(diff_rows) -> int:
    """|det| of the lattice generated by integer row vectors, inside Z^m.

    Rows must span a finite-index sublattice of Z^m (full rank). Unimodular
    row reduction only, so the lattice is preserved; the result equals the
    product of the Smith invariant factors.
    """
    rows = [list(map(int, r)) for r in diff_rows if any(r)]
    if not rows:
        raise ValueError("zero lattice has infinite index")
    m = len(rows[0])
    det = 1
    for c in range(m):
        pivot = None
        for i in range(len(rows)):
            if rows[i][c] != 0:
                pivot = i
                break
        if pivot is None:
            raise ValueError("rows do not span a full-rank lattice")
        rows[0], rows[pivot] = rows[pivot], rows[0]
        # gcd elimination down column c
        while True:
            done = True
            for i in range(1, len(rows)):
                if rows[i][c] == 0:
                    continue
                if abs(rows[i][c]) < abs(rows[0][c]):
                    rows[0], rows[i] = rows[i], rows[0]
                q = rows[i][c] // rows[0][c]
                if q != 0:
                    rows[i] = [a - q * b for a, b in zip(rows[i], rows[0])]
                if rows[i][c] != 0:
                    done = False
            if done:
                break
        det *= abs(rows[0][c])
        rows = rows[1:]
        if not rows and c < m - 1:
            raise ValueError("rows do not span a full-rank lattice")
    return det


def integer_diagonalize(rows_in):
    """Diagonalize an integer matrix by unimodular row and column operations.

    Returns (invariants, W, W_inv) where invariants are the positive diagonal
    entries (length = rank), W is the accumulated column transform, and
    W_inv its exact integer inverse. Row operations are applied untracked.

    Used for: saturation of a difference lattice (rows of W_inv[:rank] are a
    basis of span_R(rows) ∩ Z^N) and coordinates in it (u ↦ (u·W)[:rank]).
    """
    A = [list(map(int, r)) for r in rows_in]
    if not A:
        raise ValueError("empty matrix")
    ncols = len(A[0])
    W = [[1 if i == j else 0 for j in range(ncols)] for i in range(ncols)]

    def col_swap(c1, c2):
        for r in A:
            r[c1], r[c2] = r[c2], r[c1]
        for r in W:
            r[c1], r[c2] = r[c2], r[c1]

    def col_addmul(dst, src, q):
        # column dst += q * column src
        for r in A:
            r[dst] += q * r[src]
        for r in W:
            r[dst] += q * r[src]

    def col_negate(c):
        for r in A:
            r[c] = -r[c]
        for r in W:
            r[c] = -r[c]

    t = 0
    nrows = len(A)
    while t < min(nrows, ncols):
        # find a nonzero pivot at or below/right of (t, t)
        pi = pj = None
        best = None
        for i in range(t, nrows):
            for j in range(t, ncols):
                if A[i][j] != 0 and (best is None or abs(A[i][j]) < best):
                    best = abs(A[i][j])
                    pi, pj = i, j
        if pi is None:
            break
        A[t], A[pi] = A[pi], A[t]
        if pj != t:
            col_swap(t, pj)
        while True:
            # clear column t below the pivot by row ops
            for i in range(t + 1, nrows):
                if A[i][t] != 0:
                    q = A[i][t] // A[t][t]
                    if q != 0:
                        A[i] = [a - q * b for a, b in zip(A[i], A[t])]
                    if A[i][t] != 0:
                        A[t], A[i] = A[i], A[t]
            if any(A[i][t] != 0 for i in range(t + 1, nrows)):
                continue
            # clear row t to the right of the pivot by column ops
            for j in range(t + 1, ncols):
                if A[t][j] != 0:
                    q = A[t][j] // A[t][t]
                    if q != 0:
                        col_addmul(j, t, -q)
                    if A[t][j] != 0:
                        col_swap(t, j)
            if any(A[t][j] != 0 for j in range(t + 1, ncols)) or \
               any(A[i][t] != 0 for i in range(t + 1, nrows)):
                continue
            break
        if A[t][t] < 0:
            col_negate(t)
        t += 1
    invariants = [A[i][i] for i in range(t)]
    W_inv_rows = _invert_unimodular(W)
    return invariants, [list(r) for r in W], W_inv_rows


def _invert_unimodular(W):
    n = len(W)
    aug = [list(map(Fraction, W[i])) + [Fraction(1 if j == i else 0) for j in range(n)]
           for i in range(n)]
    red, pivots = rref(aug)
    if pivots != list(range(n)):
        raise ValueError("matrix is singular")
    inv = [r[n:] for r in red]
    out = []
    for r in inv:
        row = []
        for e in r:
            if e.denominator != 1:
                raise ValueError("matrix is not unimodular")
            row.append(int(e))
        out.append(row)
    return out


# ---------------------------------------------------------------------------
# Float symmetric kernel.


class SymMatrix:
    """Symmetric double matrix; only the upper triangle is stored, so symmetry
    is exact by construction."""

    __slots__ = ("dim", "upper")

    def __init__(self, dim: int, upper: np.ndarray):
        if dim <= 0:
            raise ValueError("dimension must be positive")
        upper = np.asarray(upper, dtype=np.float64)
        if upper.shape != (dim * (dim + 1) // 2,):
            raise ValueError("packed upper triangle has wrong length")
        self.dim = dim
        self.upper = upper

    @classmethod
    def from_full(cls, a) -> "SymMatrix":
        a = np.asarray(a, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("expected a square array")
        n = a.shape[0]
        sym = 0.5 * (a + a.T)
        iu = np.triu_indices(n)
        return cls(n, sym[iu])

    def full(self) -> np.ndarray:
        n = self.dim
        out = np.zeros((n, n))
        iu = np.triu_indices(n)
        out[iu] = self.upper
        out = out + np.triu(out, 1).T
        return out

    def frobenius(self) -> float:
        return float(np.linalg.norm(self.full()))

    def __repr__(self):
        return "SymMatrix(dim=%d)" % self.dim


def sym_eigen(S: SymMatrix, tol: float = kernels.DEFAULT_EIG_TOL):
    """Eigenvalues (ascending) and orthonormal eigenvector columns of S.

    Postcondition checked: ||S - V diag(w) V^T||_F <= tol * max(1, ||S||_F).
    """
    a = S.full()
    w, V = kernels.symmetric_eigen(a, tol)
    recon = (V * w) @ V.T
    err = float(np.linalg.norm(a - recon))
    if err > tol * max(1.0, float(np.linalg.norm(a))) * 4.0:
        raise NonConvergence("reconstruction error %.3e exceeds tolerance" % err)
    return w, V


def psd_project(S: SymMatrix) -> SymMatrix:
    """Frobenius-nearest positive semidefinite matrix."""
    P, _ = kernels.project_psd(S.full())
    return SymMatrix.from_full(P)


def to_float(rows) -> np.ndarray:
    return np.array([[float(e) for e in r] for r in rows], dtype=np.float64)


def fraction_from_float(x: float, bits: int = 48) -> Fraction:
    """Dyadic rational snap of a float (used where a rational value is needed
    from a float estimate; exact binary representation would be overkill)."""
    if not math.isfinite(x):
        raise ValueError("cannot convert non-finite float")
    scaled = int(math.floor(x * (1 << bits)))
    return Fraction(scaled, 1 << bits)
