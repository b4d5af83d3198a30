"""Divergence toolkit for distributions on a finite abelian group.

Covers KL divergence with the usual zero conventions, the pair
convolution nu -> law of -(X1 + X2), Fourier coefficients against the
character table, near-uniformity certificates, and detection of the
subgroup a near-subgroup-uniform distribution concentrates on.

All logarithms are natural.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .abelian import (
    AbelianGroup,
    Character,
    character_table,
    characters,
    element_index,
    elements,
    negation_index,
    addition_index,
    subgroup_generated_by,
    _subset_invariant_factors,
)
from .errors import OutOfRange

_NORMALIZATION_TOL = 1e-12

# Absolute Fourier-distance threshold used when no scaled one is supplied.
# Safe separation relies on |G| not divisible by 3, which keeps character
# values of non-kernel elements far from 1.
DEFAULT_DETECTION_THRESHOLD = 0.25

_CERTIFICATE_FLOOR = 1e-9


@dataclass
class Distribution:
    """Probability vector over group elements, in enumeration order."""

    group: AbelianGroup
    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.shape != (self.group.order,):
            raise OutOfRange(f"need {self.group.order} probabilities, got shape {p.shape}")
        if np.any(p < 0):
            raise OutOfRange("probabilities must be nonnegative")
        if abs(float(p.sum()) - 1.0) > _NORMALIZATION_TOL:
            raise OutOfRange(f"probabilities sum to {p.sum()}, not 1")
        self.probs = p

    @classmethod
    def uniform(cls, group: AbelianGroup) -> "Distribution":
        k = group.order
        return cls(group, np.full(k, 1.0 / k))

    @classmethod
    def uniform_on(cls, group: AbelianGroup, members) -> "Distribution":
        idx = element_index(group)
        p = np.zeros(group.order)
        ms = list(members)
        for a in ms:
            p[idx[tuple(a)]] = 1.0 / len(ms)
        return cls(group, p)

    @classmethod
    def from_counts(cls, group: AbelianGroup, counts) -> "Distribution":
        c = np.asarray(counts, dtype=float)
        return cls(group, c / c.sum())


def kl(nu: Distribution, mu: Distribution) -> float:
    """KL(nu || mu) in nats; 0 log 0 = 0, +inf when nu escapes mu's support."""
    if nu.group != mu.group:
        raise OutOfRange("distributions live on different groups")
    total = 0.0
    for p, q in zip(nu.probs, mu.probs):
        if p == 0.0:
            continue
        if q == 0.0:
            return math.inf
        total += p * math.log(p / q)
    return total


def l1_distance(nu: Distribution, mu: Distribution) -> float:
    return float(np.abs(nu.probs - mu.probs).sum())


def pair_convolution(nu: Distribution) -> Distribution:
    """Law of -(X1 + X2) for X1, X2 iid nu."""
    group = nu.group
    table = negation_index(group)[addition_index(group)]  # [a, b] -> -(a+b)
    p = nu.probs
    out = np.zeros(group.order)
    for a in range(group.order):
        out[a] = float((p * p[table[a]]).sum())
    # exact mass is preserved; renormalize only the float dust
    return Distribution(group, out / out.sum())


def fourier(nu: Distribution) -> np.ndarray:
    """Fourier coefficients nu_hat(rho) = sum_a rho(a) nu(a), character order."""
    return character_table(nu.group) @ nu.probs


@dataclass
class DetectedSubgroup:
    """Subgroup cut out by the near-trivial characters, with witnesses."""

    group: AbelianGroup
    members: frozenset
    invariant_factors: tuple[int, ...]
    witnesses: dict[int, float]  # character index -> |nu_hat - 1|

    @property
    def order(self) -> int:
        return len(self.members)


def detect_subgroup(nu: Distribution, threshold: float | None = None) -> DetectedSubgroup:
    """Intersect the kernels of characters with nu_hat within threshold of 1.

    Kernel membership is an exact congruence on character phases, so the
    returned member set is a genuine subgroup regardless of float noise
    in the coefficients.
    """
    if threshold is None:
        threshold = DEFAULT_DETECTION_THRESHOLD
    group = nu.group
    coeffs = fourier(nu)
    chars = characters(group)
    close = [(i, abs(coeffs[i] - 1.0)) for i in range(len(chars)) if abs(coeffs[i] - 1.0) <= threshold]
    elems = elements(group)
    members = []
    for a in elems:
        if all(chars[i].is_in_kernel(a) for i, _ in close):
            members.append(a)
    member_set = frozenset(members)
    return DetectedSubgroup(
        group=group,
        members=member_set,
        invariant_factors=_subset_invariant_factors(group, member_set),
        witnesses={i: float(d) for i, d in close},
    )


def pinsker_gap(nu: Distribution, mu: Distribution) -> tuple[float, float]:
    """(l1 distance, sqrt(2 KL)) so callers can confirm l1 <= sqrt(2 KL)."""
    d = kl(nu, mu)
    bound = math.inf if d == math.inf else math.sqrt(2.0 * d)
    return l1_distance(nu, mu), bound


def refinement_bound(nu: Distribution, mu: Distribution, event) -> float:
    """Two-point divergence of the indicator of an event (a set of elements).

    Coarsening to {event, complement} can only lose divergence, so this
    lower-bounds kl(nu, mu).
    """
    idx = element_index(nu.group)
    sel = np.zeros(nu.group.order, dtype=bool)
    for a in event:
        sel[idx[tuple(a)]] = True
    # complements summed directly: 1-p would leave float dust on full events
    pairs = (
        (float(nu.probs[sel].sum()), float(mu.probs[sel].sum())),
        (float(nu.probs[~sel].sum()), float(mu.probs[~sel].sum())),
    )
    total = 0.0
    for pv, qv in pairs:
        if pv <= 0.0:
            continue
        if qv <= 0.0:
            return math.inf
        total += pv * math.log(pv / qv)
    return total


@dataclass
class UniformityCertificate:
    """How close nu is to uniform on the subgroup its Fourier mass selects."""

    subgroup: DetectedSubgroup
    sup_dist: float
    tail_mass: float
    kl_to_conv: float
    threshold: float

    @property
    def sqrt_kl(self) -> float:
        return math.sqrt(self.kl_to_conv)

    def ratios(self) -> tuple[float, float]:
        """(sup_dist / sqrt(kl), tail_mass / kl); nan when kl is zero."""
        if self.kl_to_conv <= 0.0:
            return (math.nan, math.nan)
        return (self.sup_dist / self.sqrt_kl, self.tail_mass / self.kl_to_conv)


def uniformity_certificate(nu: Distribution, scale: float = 2.0) -> UniformityCertificate:
    """Certify near-uniformity on a detected subgroup.

    The detection threshold scales with delta = ||nu - pair_convolution(nu)||_1
    (floored so exactly-self-convolved inputs still resolve), echoing the
    stability argument that drives the certificate. Requires |G| not
    divisible by 3.
    """
    group = nu.group
    if group.order % 3 == 0:
        raise OutOfRange("certificate needs |G| not divisible by 3")
    mu = pair_convolution(nu)
    delta = l1_distance(nu, mu)
    threshold = max(scale * delta, _CERTIFICATE_FLOOR)
    det = detect_subgroup(nu, threshold)
    idx = element_index(group)
    h_order = det.order
    sup_dist = 0.0
    tail = 0.0
    for a, p in zip(elements(group), nu.probs):
        if a in det.members:
            sup_dist = max(sup_dist, abs(float(p) - 1.0 / h_order))
        else:
            sup_dist = max(sup_dist, float(p))
            tail += float(p)
    return UniformityCertificate(
        subgroup=det,
        sup_dist=sup_dist,
        tail_mass=tail,
        kl_to_conv=kl(nu, mu),
        threshold=threshold,
    )
