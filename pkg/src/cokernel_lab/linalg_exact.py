"""Exact integer linear algebra: Bareiss determinants, Smith normal form
with unimodular transforms, cokernel extraction, and a plain-text matrix
format for fixtures.

Everything works on arbitrary-precision Python ints; no floating point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .abelian import AbelianGroup, make_group
from .errors import NotSquare, SingularMatrix


@dataclass
class IntMatrix:
    """Dense integer matrix (row-major list of lists)."""

    rows: int
    cols: int
    entries: list[list[int]]

    def __post_init__(self):
        if len(self.entries) != self.rows or any(len(r) != self.cols for r in self.entries):
            raise ValueError("entry shape does not match declared dimensions")

    @classmethod
    def from_rows(cls, rows) -> "IntMatrix":
        data = [[int(x) for x in r] for r in rows]
        if not data:
            return cls(0, 0, [])
        return cls(len(data), len(data[0]), data)

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls(n, n, [[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "IntMatrix":
        return cls(rows, cols, [[0] * cols for _ in range(rows)])

    def copy(self) -> "IntMatrix":
        return IntMatrix(self.rows, self.cols, [r[:] for r in self.entries])

    def transpose(self) -> "IntMatrix":
        return IntMatrix(self.cols, self.rows, [list(c) for c in zip(*self.entries)] if self.entries else [])

    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        if self.cols != other.rows:
            raise ValueError("inner dimensions do not match")
        bt = list(zip(*other.entries)) if other.entries else []
        out = [[sum(x * y for x, y in zip(row, col)) for col in bt] for row in self.entries]
        return IntMatrix(self.rows, other.cols, out)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, IntMatrix)
            and self.rows == other.rows
            and self.cols == other.cols
            and self.entries == other.entries
        )

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]


def write_matrix(m: IntMatrix, path) -> None:
    """Text format: first line "rows cols", then row-major entries."""
    with open(path, "w") as fh:
        fh.write(f"{m.rows} {m.cols}\n")
        for row in m.entries:
            fh.write(" ".join(str(x) for x in row) + "\n")


def read_matrix(path) -> IntMatrix:
    with open(path) as fh:
        tokens = fh.read().split()
    if len(tokens) < 2:
        raise ValueError("matrix file needs a 'rows cols' header")
    rows, cols = int(tokens[0]), int(tokens[1])
    body = tokens[2:]
    if len(body) != rows * cols:
        raise ValueError(f"expected {rows * cols} entries, found {len(body)}")
    vals = [int(t) for t in body]
    return IntMatrix(rows, cols, [vals[i * cols : (i + 1) * cols] for i in range(rows)])


def det_exact(m: IntMatrix) -> int:
    """Exact determinant by fraction-free (Bareiss) elimination."""
    if m.rows != m.cols:
        raise NotSquare(f"determinant needs square input, got {m.rows}x{m.cols}")
    n = m.rows
    if n == 0:
        return 1
    a = [row[:] for row in m.entries]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        akk = a[k][k]
        for i in range(k + 1, n):
            aik = a[i][k]
            row_i = a[i]
            row_k = a[k]
            for j in range(k + 1, n):
                row_i[j] = (row_i[j] * akk - aik * row_k[j]) // prev
            row_i[k] = 0
        prev = akk
    return sign * a[n - 1][n - 1]


def gram_det(m: IntMatrix) -> int:
    """det(m^T m), exact."""
    return det_exact(m.transpose() @ m)


@dataclass
class SnfResult:
    """U @ A @ V == S with U, V unimodular and S in Smith normal form."""

    U: IntMatrix
    S: IntMatrix
    V: IntMatrix
    invariant_factors: tuple[int, ...] = field(default_factory=tuple)


def _nearest_quotient(a: int, b: int) -> int:
    # quotient minimizing |a - q*b|; deterministic for ties (rounds toward zero)
    q, r = divmod(a, b)
    if 2 * abs(r) > abs(b):
        q += 1
    return q


class _SnfWork:
    """In-place SNF elimination with optional transform tracking."""

    def __init__(self, m: IntMatrix, track: bool):
        self.s = [row[:] for row in m.entries]
        self.rows = m.rows
        self.cols = m.cols
        self.u = [[1 if i == j else 0 for j in range(m.rows)] for i in range(m.rows)] if track else None
        self.v = [[1 if i == j else 0 for j in range(m.cols)] for i in range(m.cols)] if track else None

    def swap_rows(self, i, j):
        if i == j:
            return
        self.s[i], self.s[j] = self.s[j], self.s[i]
        if self.u is not None:
            self.u[i], self.u[j] = self.u[j], self.u[i]

    def swap_cols(self, i, j):
        if i == j:
            return
        for row in self.s:
            row[i], row[j] = row[j], row[i]
        if self.v is not None:
            for row in self.v:
                row[i], row[j] = row[j], row[i]

    def add_row(self, dst, src, q):
        # row_dst += q * row_src
        if q == 0:
            return
        sd, ss = self.s[dst], self.s[src]
        for j in range(self.cols):
            sd[j] += q * ss[j]
        if self.u is not None:
            ud, us = self.u[dst], self.u[src]
            for j in range(self.rows):
                ud[j] += q * us[j]

    def add_col(self, dst, src, q):
        if q == 0:
            return
        for row in self.s:
            row[dst] += q * row[src]
        if self.v is not None:
            for row in self.v:
                row[dst] += q * row[src]

    def negate_row(self, i):
        self.s[i] = [-x for x in self.s[i]]
        if self.u is not None:
            self.u[i] = [-x for x in self.u[i]]

    def _find_pivot(self, t):
        # smallest nonzero magnitude; ties broken by (row, col)
        best = None
        best_mag = None
        for i in range(t, self.rows):
            row = self.s[i]
            for j in range(t, self.cols):
                x = row[j]
                if x != 0:
                    mag = abs(x)
                    if best_mag is None or mag < best_mag:
                        best, best_mag = (i, j), mag
                        if mag == 1:
                            return best
        return best

    def diagonalize(self):
        t = 0
        bound = min(self.rows, self.cols)
        while t < bound:
            pos = self._find_pivot(t)
            if pos is None:
                break
            self.swap_rows(t, pos[0])
            self.swap_cols(t, pos[1])
            while True:
                pivot = self.s[t][t]
                dirty = False
                for i in range(t + 1, self.rows):
                    x = self.s[i][t]
                    if x != 0:
                        self.add_row(i, t, -_nearest_quotient(x, pivot))
                        if self.s[i][t] != 0:
                            dirty = True
                for j in range(t + 1, self.cols):
                    x = self.s[t][j]
                    if x != 0:
                        self.add_col(j, t, -_nearest_quotient(x, pivot))
                        if self.s[t][j] != 0:
                            dirty = True
                if not dirty:
                    break
                # a nonzero remainder is strictly smaller than the pivot;
                # re-pick so magnitudes keep shrinking
                pos = self._find_pivot(t)
                self.swap_rows(t, pos[0])
                self.swap_cols(t, pos[1])
            if self.s[t][t] < 0:
                self.negate_row(t)
            t += 1

    def enforce_divisibility(self):
        k = min(self.rows, self.cols)
        diag = lambda i: self.s[i][i]
        changed = True
        while changed:
            changed = False
            for i in range(k - 1):
                for j in range(i + 1, k):
                    # re-read both entries: earlier merges in this sweep
                    # may have rewritten diag(i)
                    a = diag(i)
                    if a == 0 or a == 1:
                        break
                    b = diag(j)
                    if b == 0 or b % a == 0:
                        continue
                    changed = True
                    # merge diag(a, b) into diag(gcd, lcm) with tracked ops
                    self.add_row(i, j, 1)  # row_i += row_j -> [[a, b], [0, b]]
                    g = math.gcd(a, b)
                    x, y = _bezout(a, b)
                    # right-multiply by [[x, -b//g], [y, a//g]] on columns (i, j)
                    self._col_pair_op(i, j, x, y, -(b // g), a // g)
                    # now [[g, 0], [y*b, a*b//g]]; clear the stray entry
                    self.add_row(j, i, -(self.s[j][i] // g))
                    if self.s[i][i] < 0:
                        self.negate_row(i)
                    if self.s[j][j] < 0:
                        self.negate_row(j)

    def _col_pair_op(self, i, j, a, c, b, d):
        # columns (i, j) <- (a*ci + c*cj, b*ci + d*cj); requires a*d - b*c = +-1
        for row in self.s:
            ci, cj = row[i], row[j]
            row[i] = a * ci + c * cj
            row[j] = b * ci + d * cj
        if self.v is not None:
            for row in self.v:
                ci, cj = row[i], row[j]
                row[i] = a * ci + c * cj
                row[j] = b * ci + d * cj


def _bezout(a: int, b: int) -> tuple[int, int]:
    """x, y with x*a + y*b == gcd(a, b)."""
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        old_s, old_t = -old_s, -old_t
    return old_s, old_t


def smith_normal_form(m: IntMatrix) -> SnfResult:
    """Smith normal form with unimodular transforms: U @ A @ V == S.

    Pivoting picks the smallest nonzero magnitude in the working submatrix
    (ties by row then column); rows/cols are reduced by nearest-quotient
    steps to limit entry growth. Diagonal entries are nonnegative and form
    a divisibility chain; zero entries sit at the end.
    """
    work = _SnfWork(m, track=True)
    work.diagonalize()
    work.enforce_divisibility()
    s = IntMatrix(m.rows, m.cols, work.s)
    u = IntMatrix(m.rows, m.rows, work.u)
    v = IntMatrix(m.cols, m.cols, work.v)
    k = min(m.rows, m.cols)
    factors = tuple(s.entries[i][i] for i in range(k) if s.entries[i][i] != 0)
    return SnfResult(u, s, v, factors)


def invariant_factors(m: IntMatrix) -> tuple[int, ...]:
    """Nonzero Smith diagonal entries, without tracking transforms (faster)."""
    work = _SnfWork(m, track=False)
    work.diagonalize()
    work.enforce_divisibility()
    k = min(m.rows, m.cols)
    return tuple(work.s[i][i] for i in range(k) if work.s[i][i] != 0)


def cokernel(m: IntMatrix) -> AbelianGroup:
    """Z^n / rowspan(m) for square nonsingular m, as an abelian group.

    Raises NotSquare / SingularMatrix when the quotient would be infinite.
    """
    if m.rows != m.cols:
        raise NotSquare(f"cokernel of a finite quotient needs a square matrix, got {m.rows}x{m.cols}")
    facs = invariant_factors(m)
    if len(facs) < m.rows:
        raise SingularMatrix("matrix is singular; cokernel has free rank")
    return make_group([d for d in facs if d > 1])


def cokernel_structure(m: IntMatrix) -> tuple[int, AbelianGroup]:
    """General mode: (free rank, torsion part) for any rows x cols matrix."""
    facs = invariant_factors(m)
    free_rank = m.cols - len(facs)
    return free_rank, make_group([d for d in facs if d > 1])
