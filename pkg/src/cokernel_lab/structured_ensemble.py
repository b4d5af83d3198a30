"""The structured random matrix ensemble and its exact subset sampler.

The ground set is all n^3 ordered triples t = (x1, x2, x3) over [n]
(duplicate coordinates allowed, triples enumerated lexicographically).
Each triple contributes the row e_{x1} + e_{x2} + e_{x3} of the tall
matrix B_n, and the random matrix A_n stacks the n rows indexed by a
subset K drawn with P(K) proportional to det(B_n[K])^2, i.e. the
projection DPP with kernel B_n (B_n^T B_n)^{-1} B_n^T.

The Gram matrix has the closed form B_n^T B_n = 3n^2 I + 6n J, which the
sampler exploits to avoid ever materializing the n^3 x n feature matrix:
every inner product against a basis vector h is h[x1] + h[x2] + h[x3],
computed for all triples at once by a broadcast outer sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

import numpy as np

from . import seeds
from .dpp import REORTH_INTERVAL, draw_categorical
from .errors import (
    BudgetExceeded,
    NumericalDegeneracy,
    OutOfRange,
    WrongCardinality,
)
from .linalg_exact import IntMatrix, det_exact

Triple = tuple[int, int, int]

_MAX_RESAMPLE_ATTEMPTS = 8
_LEVERAGE_FLOOR = 1e-12


def triple_index(t: Triple, n: int) -> int:
    """Lexicographic rank of a 1-based triple in [n]^3."""
    x1, x2, x3 = t
    for x in (x1, x2, x3):
        if not 1 <= x <= n:
            raise OutOfRange(f"coordinate {x} outside [1, {n}]")
    return (x1 - 1) * n * n + (x2 - 1) * n + (x3 - 1)


def index_triple(r: int, n: int) -> Triple:
    if not 0 <= r < n**3:
        raise OutOfRange(f"rank {r} outside [0, {n ** 3})")
    x1, rest = divmod(r, n * n)
    x2, x3 = divmod(rest, n)
    return (x1 + 1, x2 + 1, x3 + 1)


def build_row(t: Triple, n: int) -> list[int]:
    """Row e_{x1} + e_{x2} + e_{x3} of the structured matrix."""
    row = [0] * n
    for x in t:
        if not 1 <= x <= n:
            raise OutOfRange(f"coordinate {x} outside [1, {n}]")
        row[x - 1] += 1
    return row


def build_full_matrix(n: int) -> IntMatrix:
    """All n^3 rows in lexicographic triple order."""
    rows = [build_row(index_triple(r, n), n) for r in range(n**3)]
    return IntMatrix.from_rows(rows)


def structured_gram_det(n: int) -> int:
    """det(B_n^T B_n) = 3^(n+1) * n^(2n), cross-checked explicitly for n <= 6."""
    if n < 1:
        raise OutOfRange("n must be >= 1")
    value = 3 ** (n + 1) * n ** (2 * n)
    if n <= 6:
        from .linalg_exact import gram_det

        explicit = gram_det(build_full_matrix(n))
        if explicit != value:
            raise ArithmeticError(
                f"closed form {value} disagrees with explicit Gram determinant {explicit}"
            )
    return value


def assemble_matrix(subset) -> IntMatrix:
    """Stack the rows of a sampled subset into the square matrix A_n."""
    triples = list(subset.triples) if isinstance(subset, SampleSubset) else list(subset)
    n = len(triples)
    return IntMatrix.from_rows([build_row(t, n) for t in triples])


def exact_subset_prob(n: int, subset) -> Fraction:
    """P(K) = det(B_n[K])^2 / det(B_n^T B_n), exact."""
    triples = list(subset.triples) if isinstance(subset, SampleSubset) else list(subset)
    if len(set(triples)) != n:
        raise WrongCardinality(f"subset must contain n = {n} distinct triples")
    m = IntMatrix.from_rows([build_row(t, n) for t in triples])
    d = det_exact(m)
    return Fraction(d * d, 3 ** (n + 1) * n ** (2 * n))


def exact_law(n: int, budget: int = 10**7) -> dict[tuple[Triple, ...], Fraction]:
    """Full law by enumeration: every n-subset with nonzero probability.

    Separate code path from the sampler (rational arithmetic over all
    C(n^3, n) subsets); used to cross-validate sampled frequencies at
    tiny n. Raises BudgetExceeded when the subset count is too large.
    """
    total = math.comb(n**3, n)
    if total > budget:
        raise BudgetExceeded(f"C({n ** 3}, {n}) = {total} exceeds budget {budget}")
    denom = 3 ** (n + 1) * n ** (2 * n)
    all_triples = [index_triple(r, n) for r in range(n**3)]
    law: dict[tuple[Triple, ...], Fraction] = {}
    for combo in combinations(all_triples, n):
        m = IntMatrix.from_rows([build_row(t, n) for t in combo])
        d = det_exact(m)
        if d:
            law[tuple(sorted(combo))] = Fraction(d * d, denom)
    return law


@dataclass(frozen=True)
class SampleSubset:
    """A sampled size-n subset of triples plus its seed provenance."""

    n: int
    triples: tuple[Triple, ...]
    seed: int
    resamples: int = 0

    def to_json_dict(self) -> dict:
        return {"triples": [list(t) for t in self.triples], "seed": self.seed}

    @classmethod
    def from_json_dict(cls, obj: dict) -> "SampleSubset":
        triples = tuple(tuple(int(x) for x in t) for t in obj["triples"])
        return cls(len(triples), triples, int(obj["seed"]))

    def digest(self) -> str:
        payload = ";".join(",".join(str(x) for x in t) for t in self.triples)
        return seeds.stable_digest(payload.encode("ascii"))


def _initial_leverages(n: int) -> np.ndarray:
    # K(r, r) = phi_r S^-1 phi_r with S^-1 = I/(3n^2) - (2/(9n^3)) J;
    # the J part contributes 9 * beta, the I part alpha * (3 + 2 * #equal pairs).
    alpha = 1.0 / (3.0 * n * n)
    beta = -2.0 / (9.0 * n**3)
    ar = np.arange(n)
    eq_ab = (ar[:, None, None] == ar[None, :, None])
    eq_ac = (ar[:, None, None] == ar[None, None, :])
    eq_bc = (ar[None, :, None] == ar[None, None, :])
    w = 3.0 + 2.0 * (eq_ab.astype(float) + eq_ac.astype(float) + eq_bc.astype(float))
    return (alpha * w + 9.0 * beta).reshape(-1)


def _triple_sums(h: np.ndarray) -> np.ndarray:
    # d[r] = h[x1] + h[x2] + h[x3] for every triple, flattened lexicographically
    return (h[:, None, None] + h[None, :, None] + h[None, None, :]).reshape(-1)


def _s_apply(n: int, v: np.ndarray) -> np.ndarray:
    # S v for S = 3n^2 I + 6n J without forming S
    return 3.0 * n * n * v + 6.0 * n * v.sum()


def _s_orthonormalize(n: int, basis: list[np.ndarray]) -> None:
    for _ in range(2):
        for i in range(len(basis)):
            v = basis[i]
            for j in range(i):
                v = v - (v @ _s_apply(n, basis[j])) * basis[j]
            nrm2 = float(v @ _s_apply(n, v))
            if nrm2 <= 0:
                raise NumericalDegeneracy("metric Gram-Schmidt collapsed")
            basis[i] = v / math.sqrt(nrm2)


def _sample_once(n: int, rng: np.random.Generator, lev0: np.ndarray) -> tuple[Triple, ...]:
    alpha = 1.0 / (3.0 * n * n)
    beta = -2.0 / (9.0 * n**3)
    lev = lev0.copy()
    basis: list[np.ndarray] = []
    chosen: list[int] = []
    for t in range(n):
        idx = draw_categorical(lev, chosen, rng)
        triple = index_triple(idx, n)
        # S^-1 phi for the selected row, in closed form
        s_inv_phi = np.full(n, 3.0 * beta)
        for x in triple:
            s_inv_phi[x - 1] += alpha
        u = s_inv_phi
        for h in basis:
            u = u - (h[triple[0] - 1] + h[triple[1] - 1] + h[triple[2] - 1]) * h
        norm2 = float(u @ _s_apply(n, u))
        if norm2 <= _LEVERAGE_FLOOR * alpha:
            raise NumericalDegeneracy(f"residual collapsed at step {t}")
        h_new = u / math.sqrt(norm2)
        basis.append(h_new)
        chosen.append(idx)
        lev = lev - _triple_sums(h_new) ** 2
        if (t + 1) % REORTH_INTERVAL == 0 and t + 1 < n:
            _s_orthonormalize(n, basis)
            lev = lev0.copy()
            for h in basis:
                lev -= _triple_sums(h) ** 2
    return tuple(sorted(index_triple(i, n) for i in chosen))


def sample_subset(n: int, seed: int) -> SampleSubset:
    """Draw one subset from the exact determinantal law.

    Runs the chain rule in the n-dimensional column space under the
    Gram-metric inner product; numerically degenerate draws (or an
    assembled matrix with zero determinant) trigger a deterministic
    resample keyed by hash(seed, attempt), with the attempt count kept
    on the returned subset.
    """
    if n < 1:
        raise OutOfRange("n must be >= 1")
    lev0 = _initial_leverages(n)
    last_error: Exception | None = None
    for attempt in range(_MAX_RESAMPLE_ATTEMPTS):
        rng = seeds.make_rng(seed if attempt == 0 else seeds.derive_seed(seed, attempt))
        try:
            triples = _sample_once(n, rng, lev0)
        except NumericalDegeneracy as exc:
            last_error = exc
            continue
        if det_exact(assemble_matrix(triples)) == 0:
            last_error = NumericalDegeneracy("assembled matrix is singular")
            continue
        return SampleSubset(n, triples, seed, resamples=attempt)
    raise NumericalDegeneracy(
        f"sampling failed after {_MAX_RESAMPLE_ATTEMPTS} attempts: {last_error}"
    )
