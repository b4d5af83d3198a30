"""Random 2-dimensional hypertrees via signed triple incidence matrices.

The incidence matrix I_n has one row per 2-subset of [n-1] and one column
per 3-subset of [n] (both in lexicographic order); a column B = {x1 < x2
< x3} hits the row A with sign (-1)^i exactly when A = B with x_i removed.
Complexes are sampled by the determinantal measure proportional to
det(I_n^T[K])^2 over column subsets K of size C(n-1, 2); the first
homology of a sampled complex is the cokernel of the resulting square
matrix, and the squared-determinant total identically equals
n^C(n-2, 2) (the weighted count of spanning hypertrees).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from . import seeds
from .abelian import AbelianGroup, sylow
from .dpp import sample_projection_dpp
from .errors import BudgetExceeded, NumericalDegeneracy, OutOfRange
from .linalg_exact import IntMatrix, cokernel, det_exact

_MAX_RESAMPLE_ATTEMPTS = 8

Face = tuple[int, ...]


def k_subsets(universe: int, k: int) -> list[Face]:
    """All k-subsets of [universe] as sorted 1-based tuples, lex order.

    Single enumeration shared by the matrix builder and the sampler, so
    column ranks always agree.
    """
    return list(combinations(range(1, universe + 1), k))


def boundary_matrix(n: int) -> IntMatrix:
    """Signed incidence matrix: C(n-1,2) rows by C(n,3) columns."""
    if n < 3:
        raise OutOfRange("need n >= 3")
    rows = k_subsets(n - 1, 2)
    cols = k_subsets(n, 3)
    row_rank = {a: i for i, a in enumerate(rows)}
    m = [[0] * len(cols) for _ in rows]
    for j, b in enumerate(cols):
        for i_removed in range(3):
            facet = tuple(x for pos, x in enumerate(b) if pos != i_removed)
            ri = row_rank.get(facet)
            if ri is not None:
                m[ri][j] = (-1) ** (i_removed + 1)
    return IntMatrix.from_rows(m)


def hypertree_gram_det(n: int) -> int:
    """det(I_n I_n^T), exact; verified against the closed form n^C(n-2,2)."""
    inc = boundary_matrix(n)
    value = det_exact(inc @ inc.transpose())
    expected = n ** math.comb(n - 2, 2)
    if value != expected:
        raise ArithmeticError(
            f"Gram determinant {value} disagrees with closed form {expected}"
        )
    return value


@dataclass(frozen=True)
class HypertreeSample:
    """A sampled spanning complex: chosen 3-faces plus seed provenance."""

    n: int
    faces: tuple[Face, ...]
    seed: int
    resamples: int = 0

    def digest(self) -> str:
        payload = ";".join(",".join(str(x) for x in f) for f in self.faces)
        return seeds.stable_digest(payload.encode("ascii"))


def _face_submatrix(inc: IntMatrix, faces: list[int]) -> IntMatrix:
    rows = [[inc.entries[i][j] for j in faces] for i in range(inc.rows)]
    return IntMatrix.from_rows(rows)


def sample_hypertree(n: int, seed: int) -> HypertreeSample:
    """Draw a complex from the squared-determinant measure on column sets.

    Chain-rule projection sampling on the rows of I_n^T; degenerate draws
    resample deterministically from hash(seed, attempt).
    """
    inc = boundary_matrix(n)
    features = np.array(inc.entries, dtype=float).T  # C(n,3) x C(n-1,2)
    cols = k_subsets(n, 3)
    last_error: Exception | None = None
    for attempt in range(_MAX_RESAMPLE_ATTEMPTS):
        rng = seeds.make_rng(seed if attempt == 0 else seeds.derive_seed(seed, attempt))
        try:
            picked = sorted(sample_projection_dpp(features, rng))
        except NumericalDegeneracy as exc:
            last_error = exc
            continue
        square = _face_submatrix(inc, picked)
        if det_exact(square) == 0:
            last_error = NumericalDegeneracy("selected faces are not spanning")
            continue
        return HypertreeSample(
            n, tuple(cols[j] for j in picked), seed, resamples=attempt
        )
    raise NumericalDegeneracy(
        f"hypertree sampling failed after {_MAX_RESAMPLE_ATTEMPTS} attempts: {last_error}"
    )


def homology(sample: HypertreeSample) -> AbelianGroup:
    """First homology of the sampled complex (finite by construction)."""
    inc = boundary_matrix(sample.n)
    cols = k_subsets(sample.n, 3)
    rank = {f: j for j, f in enumerate(cols)}
    picked = [rank[f] for f in sample.faces]
    return cokernel(_face_submatrix(inc, picked))


@dataclass(frozen=True)
class KalaiCheck:
    """Exhaustive squared-determinant total versus the closed form."""

    n: int
    total: int
    expected: int
    subset_count: int
    spanning_count: int

    @property
    def matches(self) -> bool:
        return self.total == self.expected


def kalai_check(n: int, budget: int = 300_000) -> KalaiCheck:
    """Sum det^2 over every column subset of full size and compare.

    Enumeration cost is C(C(n,3), C(n-1,2)); n <= 6 stays inside the
    default budget.
    """
    inc = boundary_matrix(n)
    k = inc.rows
    ncols = inc.cols
    count = math.comb(ncols, k)
    if count > budget:
        raise BudgetExceeded(f"C({ncols}, {k}) = {count} exceeds budget {budget}")
    total = 0
    spanning = 0
    col_vectors = [[inc.entries[i][j] for i in range(k)] for j in range(ncols)]
    for combo in combinations(range(ncols), k):
        m = IntMatrix.from_rows([col_vectors[j] for j in combo])
        d = det_exact(m)
        if d:
            spanning += 1
            total += d * d
    return KalaiCheck(
        n=n,
        total=total,
        expected=n ** math.comb(n - 2, 2),
        subset_count=count,
        spanning_count=spanning,
    )


@dataclass
class HypertreeCensus:
    """Empirical homology Sylow statistics over sampled complexes."""

    n: int
    prime: int
    replicas: int
    counts: dict[tuple[int, ...], int]
    note: str | None = None

    def frequency(self, parts: tuple[int, ...]) -> float:
        return self.counts.get(parts, 0) / self.replicas

    def standard_error(self, parts: tuple[int, ...]) -> float:
        f = self.frequency(parts)
        return math.sqrt(f * (1.0 - f) / self.replicas)


def sylow_census_hypertree(n: int, p: int, replicas: int, seed: int) -> HypertreeCensus:
    """Sample complexes and tally the partition of the p-part of H1.

    p = 2 is allowed (torsion there is interesting) but the matching
    heuristic is known to fail at 2, so such runs carry a warning note.
    """
    if replicas < 1:
        raise OutOfRange("need at least one replica")
    counts: dict[tuple[int, ...], int] = {}
    for r in range(replicas):
        sample = sample_hypertree(n, seeds.derive_seed(seed, r))
        part = sylow(homology(sample), p)
        counts[part.parts] = counts.get(part.parts, 0) + 1
    note = None
    if p == 2:
        note = (
            "p = 2 census: the reference-mass comparison is known to be "
            "false at the prime 2; frequencies are reported for study only"
        )
    return HypertreeCensus(n=n, prime=p, replicas=replicas, counts=counts, note=note)
