"""Kernel-vector probabilities and surjection moments for the structured
ensemble.

For a finite abelian group G and a vector q in G^n, the probability that
the sampled matrix kills q (A_n q = 0 over G) depends only on the type of
q: the count vector (n_a)_{a in G}. The closed form is

    P = (1/3) * n^(-2n) * det(M) * prod_{a in supp} m_a^(n_a - 1),

where m_a = sum_b n_b n_{-a-b} and M is the support-indexed symmetric
matrix with M(a,b) = 2 sqrt(n_a n_b) n_{-a-b} + [a=b] m_a. Conjugating by
diag(sqrt(n_a)) turns M into the integer matrix Mt(a,b) = 2 n_a n_{-a-b}
+ [a=b] m_a with the same determinant, which gives an exact rational
evaluation route. A fully independent oracle evaluates the same
probability as a ratio of exact Gram determinants (Cauchy-Binet over the
rows of the tall matrix that q annihilates); the two routes are kept
separate so they can check each other.

Summing the per-type expected counts E(type) over all types whose support
generates G yields the expected number of surjections from the cokernel
onto G. The scan engine enumerates the type space in blocks (lexicographic
over the non-identity counts, identity count eliminated) and works in
log space, so it handles n in the hundreds; the exact rational path covers
small n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.special import gammaln

from .abelian import (
    AbelianGroup,
    Subgroup,
    addition_index,
    element_index,
    elements,
    identity,
    negation_index,
    subgroup_generated_by,
    subgroups,
)
from .errors import BudgetExceeded, OutOfRange, ZeroMu
from .linalg_exact import IntMatrix, det_exact
from .structured_ensemble import build_row, index_triple

DEFAULT_TYPE_BUDGET = 5_000_000

# Exact rational evaluation is the default up to this n; log-space beyond.
EXACT_MODE_MAX_N = 12


@dataclass(frozen=True)
class TypeVector:
    """Count vector (n_a)_{a in G} of a vector q in G^n, element order fixed."""

    group: AbelianGroup
    counts: tuple[int, ...]

    def __post_init__(self):
        if len(self.counts) != self.group.order:
            raise OutOfRange("count vector length must equal |G|")
        if any(c < 0 for c in self.counts) or sum(self.counts) < 1:
            raise OutOfRange("counts must be nonnegative and sum to n >= 1")

    @property
    def n(self) -> int:
        return sum(self.counts)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(i for i, c in enumerate(self.counts) if c > 0)

    def support_elements(self):
        elems = elements(self.group)
        return [elems[i] for i in self.support]

    def generates(self) -> bool:
        gen = subgroup_generated_by(self.group, self.support_elements())
        return len(gen) == self.group.order


def type_of(group: AbelianGroup, q) -> TypeVector:
    """Type (count vector) of a sequence of group elements."""
    idx = element_index(group)
    counts = [0] * group.order
    for a in q:
        key = tuple(a)
        if key not in idx:
            raise OutOfRange(f"{a} is not an element of {group}")
        counts[idx[key]] += 1
    return TypeVector(group, tuple(counts))


def _neg_add_table(group: AbelianGroup) -> np.ndarray:
    # T[a, b] = index of -(a + b)
    return negation_index(group)[addition_index(group)]


def m_vector(t: TypeVector) -> tuple[int, ...]:
    """m_a = sum_b n_b * n_{-a-b} (pair-convolution counts, unnormalized)."""
    table = _neg_add_table(t.group)
    k = t.group.order
    c = t.counts
    return tuple(sum(c[b] * c[table[a, b]] for b in range(k)) for a in range(k))


@dataclass(frozen=True)
class MomentMatrix:
    """Support-indexed matrix M of the probability formula (float route)."""

    support: tuple[int, ...]
    matrix: np.ndarray


def moment_matrix(t: TypeVector) -> MomentMatrix:
    """M(a,b) = 2 sqrt(n_a n_b) n_{-a-b} + [a=b] m_a over the support."""
    table = _neg_add_table(t.group)
    supp = t.support
    m = m_vector(t)
    c = t.counts
    size = len(supp)
    out = np.empty((size, size))
    for i, a in enumerate(supp):
        for j, b in enumerate(supp):
            out[i, j] = 2.0 * math.sqrt(c[a] * c[b]) * c[table[a, b]]
        out[i, i] += m[a]
    return MomentMatrix(supp, out)


def integer_moment_matrix(t: TypeVector) -> IntMatrix:
    """Integer matrix similar to M (conjugation by diag(sqrt(n_a))): same det."""
    table = _neg_add_table(t.group)
    supp = t.support
    m = m_vector(t)
    c = t.counts
    rows = []
    for a in supp:
        row = [2 * c[a] * c[table[a, b]] for b in supp]
        rows.append(row)
    for i, a in enumerate(supp):
        rows[i][i] += m[a]
    return IntMatrix.from_rows(rows) if rows else IntMatrix(0, 0, [])


def multinomial(t: TypeVector) -> int:
    """Number of vectors q with this type: n! / prod n_a!."""
    total = math.factorial(t.n)
    for c in t.counts:
        total //= math.factorial(c)
    return total


def prob_kernel_vector(group: AbelianGroup, q, exact: bool | None = None):
    """P(A_n q = 0) for a specific vector q in G^n.

    Exact mode returns a Fraction via the integer-similar determinant;
    log-space mode returns a float and is the default for n > 12.
    """
    t = type_of(group, q)
    n = t.n
    if exact is None:
        exact = n <= EXACT_MODE_MAX_N
    if exact:
        return _prob_exact(t)
    return _prob_float(t)


def _prob_exact(t: TypeVector) -> Fraction:
    n = t.n
    det = det_exact(integer_moment_matrix(t))
    m = m_vector(t)
    prod = 1
    for a in t.support:
        prod *= m[a] ** (t.counts[a] - 1)
    return Fraction(det * prod, 3 * n ** (2 * n))


def _prob_float(t: TypeVector) -> float:
    n = t.n
    m = m_vector(t)
    if any(m[a] == 0 for a in t.support):
        return 0.0
    mm = moment_matrix(t)
    sign, logdet = np.linalg.slogdet(mm.matrix)
    if sign <= 0:
        return 0.0
    log_p = (
        logdet
        - math.log(3.0)
        - 2.0 * n * math.log(n)
        + sum((t.counts[a] - 1) * math.log(m[a]) for a in t.support)
    )
    return math.exp(log_p)


def cauchy_binet_prob(group: AbelianGroup, q) -> Fraction:
    """Oracle route for P(A_n q = 0): ratio of exact Gram determinants.

    Keeps only the triple rows annihilating q and divides their Gram
    determinant by the full one. Shares no code with the formula route.
    """
    qs = [tuple(a) for a in q]
    idx = element_index(group)
    for a in qs:
        if a not in idx:
            raise OutOfRange(f"{a} is not an element of {group}")
    n = len(qs)
    zero = identity(group)
    fold = group.invariant_factors
    rows = []
    for r in range(n**3):
        x1, x2, x3 = index_triple(r, n)
        s = tuple(
            (qa + qb + qc) % d
            for qa, qb, qc, d in zip(qs[x1 - 1], qs[x2 - 1], qs[x3 - 1], fold)
        )
        if s == zero:
            rows.append(build_row((x1, x2, x3), n))
    if len(rows) < n:
        # rank bound: fewer than n annihilating rows cannot span, so the
        # Gram determinant is zero
        return Fraction(0)
    b = IntMatrix.from_rows(rows)
    gram = b.transpose() @ b
    return Fraction(det_exact(gram), 3 ** (n + 1) * n ** (2 * n))


# ---------------------------------------------------------------------------
# Per-type expected counts and their alpha/KL rewriting


def type_contribution(t: TypeVector, exact: bool | None = None):
    """E(type) = multinomial * P(A_n q = 0) for any q of this type."""
    if exact is None:
        exact = t.n <= EXACT_MODE_MAX_N
    if exact:
        return multinomial(t) * _prob_exact(t)
    logc = log_type_contribution(t)
    return 0.0 if logc == -math.inf else math.exp(logc)


def log_type_contribution(t: TypeVector) -> float:
    """log of the expected count, -inf when it vanishes."""
    n = t.n
    m = m_vector(t)
    if any(m[a] == 0 for a in t.support):
        return -math.inf
    mm = moment_matrix(t)
    sign, logdet = np.linalg.slogdet(mm.matrix)
    if sign <= 0:
        return -math.inf
    log_mult = math.lgamma(n + 1) - sum(math.lgamma(c + 1) for c in t.counts)
    return (
        log_mult
        - math.log(3.0)
        - 2.0 * n * math.log(n)
        + logdet
        + sum((t.counts[a] - 1) * math.log(m[a]) for a in t.support)
    )


def alpha(t: TypeVector) -> float:
    """Multinomial mass relative to the entropy exponential; always in (0, 1]."""
    n = t.n
    log_mult = math.lgamma(n + 1) - sum(math.lgamma(c + 1) for c in t.counts)
    entropy = -sum((c / n) * math.log(c / n) for c in t.counts if c > 0)
    return math.exp(log_mult - n * entropy)


def kl_form_contribution(t: TypeVector) -> float:
    """E(type) rewritten as alpha * det(M)/(3 prod m_a) * exp(-n * KL(nu || mu)).

    Raises ZeroMu when the pair-convolution mass vanishes on the support
    (the rewriting divides by m_a there).
    """
    n = t.n
    m = m_vector(t)
    supp = t.support
    if any(m[a] == 0 for a in supp):
        raise ZeroMu("pair-convolution count vanishes on the support")
    mm = moment_matrix(t)
    sign, logdet = np.linalg.slogdet(mm.matrix)
    if sign <= 0:
        return 0.0
    kl = sum(
        (t.counts[a] / n) * math.log((t.counts[a] / n) / (m[a] / n**2)) for a in supp
    )
    log_val = (
        math.log(alpha(t))
        + logdet
        - math.log(3.0)
        - sum(math.log(m[a]) for a in supp)
        - n * kl
    )
    return math.exp(log_val)


def moment_upper_bound(t: TypeVector) -> float:
    """Envelope 3^|G| n^(2|G|) exp(-n KL(nu || mu)); +inf if mu hits zero."""
    n = t.n
    k = t.group.order
    m = m_vector(t)
    if any(m[a] == 0 for a in t.support):
        return math.inf
    kl = sum(
        (t.counts[a] / n) * math.log((t.counts[a] / n) / (m[a] / n**2))
        for a in t.support
    )
    return math.exp(k * math.log(3.0) + 2 * k * math.log(n) - n * kl)


# ---------------------------------------------------------------------------
# Windows around subgroup-uniform types


@dataclass(frozen=True)
class WindowParams:
    """Concentration window scales: t_n for the box, r_n for the tail mass."""

    group: AbelianGroup
    n: int
    constant: float = 1.0

    def __post_init__(self):
        if self.n < 2:
            raise OutOfRange("windows need n >= 2")
        if self.constant <= 0:
            raise OutOfRange("window constant must be positive")

    @property
    def t_n(self) -> float:
        g = self.group.order
        return 2.0 * self.constant * math.sqrt(g * self.n * math.log(self.n))

    @property
    def r_n(self) -> float:
        g = self.group.order
        return 4.0 * self.constant * g * math.log(self.n)


@dataclass(frozen=True)
class WindowMembership:
    """Split membership verdict for one type against one subgroup window."""

    in_window: bool
    m_positive: bool
    generating: bool

    def __bool__(self) -> bool:
        return self.in_window and self.m_positive and self.generating


def window_membership(t: TypeVector, sub: Subgroup, w: WindowParams) -> WindowMembership:
    """Check whether a type sits in the window around uniform-on-subgroup.

    The geometric part needs the sup-norm distance to n * u_H within t_n
    and the off-subgroup tail within r_n; full membership additionally
    requires positive pair-convolution counts on the support and a
    generating support.
    """
    if t.n != w.n:
        raise OutOfRange("type size and window size disagree")
    idx = element_index(t.group)
    member_idx = {idx[a] for a in sub.members}
    target = t.n / sub.order
    sup_dist = 0.0
    tail = 0
    for i, c in enumerate(t.counts):
        if i in member_idx:
            sup_dist = max(sup_dist, abs(c - target))
        else:
            sup_dist = max(sup_dist, float(c))
            tail += c
    m = m_vector(t)
    return WindowMembership(
        in_window=(sup_dist <= w.t_n and tail <= w.r_n),
        m_positive=all(m[a] > 0 for a in t.support),
        generating=t.generates(),
    )


# ---------------------------------------------------------------------------
# Type-space scan engine


def _iter_count_blocks(n: int, k: int, block: int = 65536):
    """Count vectors in blocks, ordered lexicographically over the
    non-identity coordinates (identity count is the eliminated remainder)."""
    if k == 1:
        yield np.array([[n]], dtype=np.int64)
        return
    free = k - 1
    pending: list[np.ndarray] = []
    size = 0
    vals = [0] * (free - 1)
    while True:
        rem = n - sum(vals)
        cnt = rem + 1
        chunk = np.empty((cnt, k), dtype=np.int64)
        inner = np.arange(cnt, dtype=np.int64)
        chunk[:, 0] = rem - inner
        for d, v in enumerate(vals):
            chunk[:, 1 + d] = v
        chunk[:, k - 1] = inner
        pending.append(chunk)
        size += cnt
        if size >= block:
            yield np.concatenate(pending, axis=0)
            pending, size = [], 0
        # lexicographic odometer over the prefix coordinates
        pos = free - 2
        while pos >= 0:
            vals[pos] += 1
            if sum(vals) <= n:
                break
            vals[pos] = 0
            pos -= 1
        else:
            break
    if pending:
        yield np.concatenate(pending, axis=0)


def type_space_size(n: int, k: int) -> int:
    return math.comb(n + k - 1, k - 1)


@dataclass
class TypeScanResult:
    """Aggregates of one pass over the type space."""

    group: AbelianGroup
    n: int
    total: float
    type_count: int
    generating_count: int
    positive_count: int
    bound_slack_max: float
    window: WindowParams | None = None
    subgroup_sums: tuple[float, ...] | None = None
    residual: float | None = None
    overlap_count: int | None = None


def scan_types(
    group: AbelianGroup,
    n: int,
    window: WindowParams | None = None,
    budget: int = DEFAULT_TYPE_BUDGET,
) -> TypeScanResult:
    """One vectorized pass over all types of size n.

    Accumulates the expected surjection count (over generating types), the
    per-subgroup window sums when a window is given, and the worst slack
    of the log-envelope bound. Deterministic: blocks are visited in
    enumeration order and reduced sequentially.
    """
    k = group.order
    count = type_space_size(n, k)
    if count > budget:
        raise BudgetExceeded(f"type space has {count} members, budget {budget}")
    table = _neg_add_table(group)
    subs = subgroups(group)
    idx = element_index(group)
    proper_masks = []
    for sub in subs:
        if not sub.is_full:
            mask = np.zeros(k, dtype=bool)
            for a in sub.members:
                mask[idx[a]] = True
            proper_masks.append(mask)
    win_targets = None
    if window is not None:
        if window.n != n or window.group != group:
            raise OutOfRange("window parameters do not match the scan")
        win_targets = []
        for sub in subs:
            mask = np.zeros(k, dtype=bool)
            for a in sub.members:
                mask[idx[a]] = True
            win_targets.append((mask, n / sub.order))
    eye = np.eye(k)
    log3 = math.log(3.0)
    logn = math.log(n)
    total = 0.0
    type_count = 0
    generating_count = 0
    positive_count = 0
    slack_max = -math.inf
    sub_sums = np.zeros(len(subs)) if window is not None else None
    overlap = 0
    for counts in _iter_count_blocks(n, k):
        b = counts.shape[0]
        type_count += b
        gathered = counts[:, table]  # [t, a, b] = n_{-a-b}
        m = np.einsum("tb,tab->ta", counts, gathered)
        supp = counts > 0
        # support generates G iff it sits inside no proper subgroup
        contained = np.zeros(b, dtype=bool)
        for mask in proper_masks:
            contained |= ~np.any(counts[:, ~mask] > 0, axis=1)
        generating = ~contained
        generating_count += int(generating.sum())
        mu_ok = ~np.any(supp & (m == 0), axis=1)
        mt = 2.0 * counts[:, :, None] * gathered
        mt += eye[None, :, :] * m[:, None, :]
        pair_mask = supp[:, :, None] & supp[:, None, :]
        mfix = np.where(pair_mask, mt, eye[None, :, :])
        dets = np.linalg.det(mfix)
        msafe = np.maximum(m, 1)
        log_mult = gammaln(n + 1) - gammaln(counts + 1).sum(axis=1)
        log_tail = np.where(supp, (counts - 1) * np.log(msafe), 0.0).sum(axis=1)
        valid = generating & mu_ok & (dets > 0.0)
        log_e = np.where(
            valid,
            log_mult - log3 - 2.0 * n * logn + np.log(np.maximum(dets, 1e-300)) + log_tail,
            -np.inf,
        )
        e_vals = np.exp(np.where(valid, log_e, -np.inf))
        positive_count += int((e_vals > 0).sum())
        total += float(e_vals.sum())
        # envelope slack in log space, only where the bound is finite
        nu = counts / n
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(supp & (m > 0), nu / (m / n**2), 1.0)
            kl = np.where(supp & (m > 0), nu * np.log(ratio), 0.0).sum(axis=1)
        rhs = k * log3 + 2.0 * k * logn - n * kl
        here = np.where(valid, log_e - rhs, -np.inf)
        if here.size:
            slack_max = max(slack_max, float(here.max()))
        if window is not None:
            member = np.zeros((b, len(subs)), dtype=bool)
            for s, (mask, target) in enumerate(win_targets):
                dist_in = np.abs(counts[:, mask] - target).max(axis=1) if mask.any() else np.zeros(b)
                outside = counts[:, ~mask]
                dist_out = outside.max(axis=1) if outside.shape[1] else np.zeros(b, dtype=np.int64)
                tail = outside.sum(axis=1) if outside.shape[1] else np.zeros(b, dtype=np.int64)
                geo = (np.maximum(dist_in, dist_out) <= window.t_n) & (tail <= window.r_n)
                member[:, s] = geo & mu_ok & generating
            overlap += int((member.sum(axis=1) > 1).sum())
            sub_sums += (member * e_vals[:, None]).sum(axis=0)
    result = TypeScanResult(
        group=group,
        n=n,
        total=total,
        type_count=type_count,
        generating_count=generating_count,
        positive_count=positive_count,
        bound_slack_max=slack_max,
    )
    if window is not None:
        result.window = window
        result.subgroup_sums = tuple(float(x) for x in sub_sums)
        result.residual = total - float(sub_sums.sum())
        result.overlap_count = overlap
    return result


def iter_types(group: AbelianGroup, n: int, budget: int = DEFAULT_TYPE_BUDGET):
    """All TypeVectors of size n in scan order (small spaces only)."""
    count = type_space_size(n, group.order)
    if count > budget:
        raise BudgetExceeded(f"type space has {count} members, budget {budget}")
    for block in _iter_count_blocks(n, group.order, block=4096):
        for row in block:
            yield TypeVector(group, tuple(int(x) for x in row))


def exact_sur_moment(
    group: AbelianGroup,
    n: int,
    exact: bool | None = None,
    budget: int = DEFAULT_TYPE_BUDGET,
):
    """Expected surjection count onto G: sum of E(type) over generating types.

    Exact rational for small n (default n <= 12), log-space float beyond.
    """
    if exact is None:
        exact = n <= EXACT_MODE_MAX_N
    if exact:
        total = Fraction(0)
        for t in iter_types(group, n, budget):
            if t.generates():
                total += type_contribution(t, exact=True)
        return total
    return scan_types(group, n, budget=budget).total


def window_decomposition_report(
    group: AbelianGroup,
    n: int,
    constant: float = 1.0,
    budget: int = DEFAULT_TYPE_BUDGET,
) -> TypeScanResult:
    """Moment total split into per-subgroup window sums plus a residual.

    The subgroup sums align with abelian.subgroups(group) order; the
    residual is total minus the (possibly overlapping) window sums.
    """
    w = WindowParams(group, n, constant)
    return scan_types(group, n, window=w, budget=budget)
