"""Exact integer and rational linear algebra.

Everything here runs on arbitrary-precision Python integers and
`fractions.Fraction`; no floating point is allowed in this module.  These
routines back every lattice computation in the package: Smith normal form,
saturated integer kernels, finite cokernel orders and exact rational solves.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Optional, Sequence


Vector = tuple[int, ...]


@dataclass(frozen=True)
class IntMatrix:
    """Immutable integer matrix stored as a tuple of row tuples."""

    entries: tuple[Vector, ...]

    def __post_init__(self):
        if len(self.entries) < 1 or len(self.entries[0]) < 1:
            raise ValueError("IntMatrix must have at least one row and one column")
        width = len(self.entries[0])
        for row in self.entries:
            if len(row) != width:
                raise ValueError("ragged rows")
            for x in row:
                if not isinstance(x, int) or isinstance(x, bool):
                    raise TypeError(f"non-integer entry {x!r}")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]]) -> "IntMatrix":
        return cls(tuple(tuple(int(x) for x in row) for row in rows))

    @property
    def rows(self) -> int:
        return len(self.entries)

    @property
    def cols(self) -> int:
        return len(self.entries[0])

    def row(self, i: int) -> Vector:
        return self.entries[i]

    def col(self, j: int) -> Vector:
        return tuple(r[j] for r in self.entries)

    def transpose(self) -> "IntMatrix":
        return IntMatrix(tuple(zip(*self.entries)))

    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        if self.cols != other.rows:
            raise ValueError("shape mismatch")
        ot = other.transpose().entries
        return IntMatrix(
            tuple(
                tuple(sum(a * b for a, b in zip(row, col)) for col in ot)
                for row in self.entries
            )
        )


def identity_matrix(n: int) -> IntMatrix:
    return IntMatrix(tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n)))


def mat_vec(A: IntMatrix, v: Sequence) -> tuple:
    """A @ v for a vector of ints or Fractions; exact."""
    if len(v) != A.cols:
        raise ValueError("shape mismatch")
    return tuple(sum(a * x for a, x in zip(row, v)) for row in A.entries)


def det(A: IntMatrix) -> int:
    """Exact determinant of a square integer matrix (fraction-free Bareiss)."""
    if A.rows != A.cols:
        raise ValueError("determinant of non-square matrix")
    n = A.rows
    m = [list(row) for row in A.entries]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k] != 0:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
            m[i][k] = 0
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


@dataclass(frozen=True)
class SNFDecomposition:
    """U @ A @ V = S with U, V unimodular and S diagonal, d_1 | d_2 | ..."""

    U: IntMatrix
    S: IntMatrix
    V: IntMatrix

    @property
    def diagonal(self) -> Vector:
        n = min(self.S.rows, self.S.cols)
        return tuple(self.S.entries[i][i] for i in range(n))

    @property
    def rank(self) -> int:
        return sum(1 for d in self.diagonal if d != 0)


def _pivot(s, t, m, n):
    """Deterministic pivot in s[t:, t:]: smallest |value|, ties by row-major index."""
    best = None
    for i in range(t, m):
        for j in range(t, n):
            v = abs(s[i][j])
            if v != 0 and (best is None or v < best[0]):
                best = (v, i, j)
    return None if best is None else (best[1], best[2])


def smith_normal_form(A: IntMatrix) -> SNFDecomposition:
    """Smith normal form with transformation matrices.

    Returns U, S, V with U @ A @ V = S, |det U| = |det V| = 1, S diagonal
    with nonnegative entries satisfying the divisibility chain.  The pivot
    rule (smallest nonzero absolute value, then lowest row-major index) makes
    the output deterministic across runs and platforms.
    """
    m, n = A.rows, A.cols
    s = [list(row) for row in A.entries]
    u = [list(row) for row in identity_matrix(m).entries]
    v = [list(row) for row in identity_matrix(n).entries]

    def swap_rows(i, j):
        s[i], s[j] = s[j], s[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for row in s:
            row[i], row[j] = row[j], row[i]
        for row in v:
            row[i], row[j] = row[j], row[i]

    def add_row(dst, src, c):
        # row_dst += c * row_src
        s[dst] = [a + c * b for a, b in zip(s[dst], s[src])]
        u[dst] = [a + c * b for a, b in zip(u[dst], u[src])]

    def add_col(dst, src, c):
        for row in s:
            row[dst] += c * row[src]
        for row in v:
            row[dst] += c * row[src]

    t = 0
    while True:
        piv = _pivot(s, t, m, n)
        if piv is None:
            break
        i, j = piv
        if i != t:
            swap_rows(t, i)
        if j != t:
            swap_cols(t, j)

        while True:
            # Reduce column t below the pivot.
            dirty = False
            for i in range(t + 1, m):
                if s[i][t] != 0:
                    q = s[i][t] // s[t][t]
                    add_row(i, t, -q)
                    if s[i][t] != 0:
                        swap_rows(t, i)
                        dirty = True
            if dirty:
                continue
            # Reduce row t right of the pivot.
            for j in range(t + 1, n):
                if s[t][j] != 0:
                    q = s[t][j] // s[t][t]
                    add_col(j, t, -q)
                    if s[t][j] != 0:
                        swap_cols(t, j)
                        dirty = True
            if dirty:
                continue
            # Pivot must divide every remaining entry for the chain property.
            witness = None
            for i in range(t + 1, m):
                for j in range(t + 1, n):
                    if s[i][j] % s[t][t] != 0:
                        witness = (i, j)
                        break
                if witness:
                    break
            if witness is None:
                break
            add_col(t, witness[1], 1)

        if s[t][t] < 0:
            s[t] = [-x for x in s[t]]
            u[t] = [-x for x in u[t]]
        t += 1

    return SNFDecomposition(
        U=IntMatrix.from_rows(u), S=IntMatrix.from_rows(s), V=IntMatrix.from_rows(v)
    )


def integer_kernel(A: IntMatrix) -> list[Vector]:
    """Z-basis of ker(A), saturated in Z^cols.

    The returned vectors are the columns of the SNF column transform that map
    to zero; since that transform is unimodular, they span a direct summand,
    i.e. the kernel of the Q-linear map intersected with the integer lattice.
    """
    snf = smith_normal_form(A)
    return [snf.V.col(j) for j in range(snf.rank, A.cols)]


def cokernel_order(A: IntMatrix) -> Optional[int]:
    """Order of Z^rows / im(A); None when the cokernel is infinite."""
    snf = smith_normal_form(A)
    if snf.rank < A.rows:
        return None
    order = 1
    for d in snf.diagonal:
        if d != 0:
            order *= d
    return order


def rational_solve(
    A: IntMatrix, b: Sequence
) -> Optional[tuple[Fraction, ...]]:
    """Exact particular solution of A x = b over Q, or None if inconsistent.

    Entries of b may be ints or Fractions.  When the system is
    underdetermined the free variables are set to zero.
    """
    if len(b) != A.rows:
        raise ValueError("shape mismatch")
    m, n = A.rows, A.cols
    aug = [[Fraction(x) for x in row] + [Fraction(b[i])] for i, row in enumerate(A.entries)]
    pivots: list[tuple[int, int]] = []
    r = 0
    for c in range(n):
        pr = next((i for i in range(r, m) if aug[i][c] != 0), None)
        if pr is None:
            continue
        aug[r], aug[pr] = aug[pr], aug[r]
        pv = aug[r][c]
        aug[r] = [x / pv for x in aug[r]]
        for i in range(m):
            if i != r and aug[i][c] != 0:
                f = aug[i][c]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[r])]
        pivots.append((r, c))
        r += 1
        if r == m:
            break
    for i in range(r, m):
        if aug[i][n] != 0:
            return None
    x = [Fraction(0)] * n
    for pr, pc in pivots:
        x[pc] = aug[pr][n]
    return tuple(x)


def lcm(a: int, b: int) -> int:
    return abs(a * b) // gcd(a, b) if a and b else abs(a or b)
