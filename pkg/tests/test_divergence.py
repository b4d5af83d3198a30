import math

import numpy as np
import pytest

from cokernel_lab.abelian import elements, make_group, subgroups
from cokernel_lab.divergence import (
    Distribution,
    detect_subgroup,
    fourier,
    kl,
    l1_distance,
    pair_convolution,
    pinsker_gap,
    refinement_bound,
    uniformity_certificate,
)
from cokernel_lab.errors import OutOfRange
from cokernel_lab.seeds import make_rng

G2 = make_group([2])
G3 = make_group([3])
G4 = make_group([4])
G5 = make_group([5])
G25 = make_group([25])
G55 = make_group([5, 5])


def _random_dist(group, rng, floor=0.0):
    p = rng.random(group.order) + floor
    return Distribution(group, p / p.sum())


def test_distribution_validation():
    with pytest.raises(OutOfRange):
        Distribution(G2, np.array([0.5, 0.5, 0.0]))
    with pytest.raises(OutOfRange):
        Distribution(G2, np.array([1.2, -0.2]))
    with pytest.raises(OutOfRange):
        Distribution(G2, np.array([0.7, 0.7]))


def test_kl_hand_values():
    u = Distribution.uniform(G2)
    point = Distribution(G2, np.array([1.0, 0.0]))
    assert kl(u, u) == 0.0
    assert abs(kl(point, u) - math.log(2.0)) < 1e-15
    assert kl(u, point) == math.inf
    # 0 log 0 convention: the escaping direction only
    assert kl(point, point) == 0.0


def test_kl_group_mismatch():
    with pytest.raises(OutOfRange):
        kl(Distribution.uniform(G2), Distribution.uniform(G3))


def test_l1_hand_value():
    a = Distribution(G3, np.array([0.5, 0.3, 0.2]))
    b = Distribution.uniform(G3)
    expect = abs(0.5 - 1 / 3) + abs(0.3 - 1 / 3) + abs(0.2 - 1 / 3)
    assert abs(l1_distance(a, b) - expect) < 1e-15


def test_pinsker_gap_holds_randomly():
    rng = make_rng(11)
    for _ in range(200):
        g = (G2, G3, G4, G5)[int(rng.integers(4))]
        nu = _random_dist(g, rng, floor=1e-6)
        mu = _random_dist(g, rng, floor=1e-6)
        l1, bound = pinsker_gap(nu, mu)
        assert l1 <= bound + 1e-12


def test_pair_convolution_hand_case():
    nu = Distribution(G3, np.array([0.5, 0.3, 0.2]))
    out = pair_convolution(nu).probs
    # law of -(X1+X2): P(0)=p0^2+2p1p2, P(1)=2p0p2+p1^2, P(2)=2p0p1+p2^2
    assert abs(out[0] - (0.25 + 2 * 0.06)) < 1e-15
    assert abs(out[1] - (2 * 0.10 + 0.09)) < 1e-15
    assert abs(out[2] - (2 * 0.15 + 0.04)) < 1e-15


def test_pair_convolution_fixes_uniform():
    for g in (G2, G5, G55):
        u = Distribution.uniform(g)
        assert l1_distance(pair_convolution(u), u) < 1e-14


def test_fourier_uniform_is_delta():
    coeffs = fourier(Distribution.uniform(G5))
    assert abs(coeffs[0] - 1.0) < 1e-14
    assert np.abs(coeffs[1:]).max() < 1e-14


def test_convolution_transform_identity():
    # hat of -(X1+X2) law equals conj(nu_hat)^2, coefficient by coefficient
    rng = make_rng(12)
    for g in (G3, G4, G5, G55):
        nu = _random_dist(g, rng)
        lhs = fourier(pair_convolution(nu))
        rhs = np.conj(fourier(nu)) ** 2
        assert np.abs(lhs - rhs).max() < 1e-12


def test_detect_subgroup_exact():
    for g in (G4, G5, G25, G55):
        for sub in subgroups(g):
            nu = Distribution.uniform_on(g, sub.members)
            det = detect_subgroup(nu)
            assert det.members == frozenset(sub.members)
            assert det.invariant_factors == sub.invariant_factors


def test_detect_subgroup_trivial_threshold():
    rng = make_rng(13)
    nu = _random_dist(G5, rng, floor=0.3)
    det = detect_subgroup(nu, threshold=1e-6)
    # generic distribution has no near-trivial nontrivial characters
    assert det.order == 1 or det.order == G5.order
    # uniform keeps everything
    det_u = detect_subgroup(Distribution.uniform(G5), threshold=1e-6)
    assert det_u.order == G5.order


def test_refinement_is_a_lower_bound():
    rng = make_rng(14)
    els = elements(G5)
    for _ in range(100):
        nu = _random_dist(G5, rng, floor=1e-9)
        mu = _random_dist(G5, rng, floor=1e-9)
        k = int(rng.integers(1, len(els)))
        event = [els[i] for i in rng.choice(len(els), size=k, replace=False)]
        rb = refinement_bound(nu, mu, event)
        assert rb <= kl(nu, mu) + 1e-12


def test_refinement_full_event_is_zero():
    # regression: the complement of the whole group must contribute exactly 0
    rng = make_rng(15)
    nu = _random_dist(G5, rng)
    mu = _random_dist(G5, rng)
    assert refinement_bound(nu, mu, elements(G5)) == 0.0
    assert refinement_bound(nu, mu, []) == 0.0


def test_certificate_clean_subgroup():
    for sub in subgroups(G25):
        nu = Distribution.uniform_on(G25, sub.members)
        cert = uniformity_certificate(nu)
        assert cert.subgroup.members == frozenset(sub.members)
        assert cert.sup_dist < 1e-12
        assert cert.tail_mass < 1e-12
        assert cert.kl_to_conv < 1e-12


def test_certificate_perturbed_subgroup():
    sub = [s for s in subgroups(G25) if s.order == 5][0]
    base = Distribution.uniform_on(G25, sub.members).probs
    eps = 1e-3
    p = base * (1.0 - eps) + eps / G25.order
    cert = uniformity_certificate(Distribution(G25, p))
    assert cert.subgroup.members == frozenset(sub.members)
    assert cert.sup_dist < 5 * eps
    assert cert.tail_mass < 5 * eps


def test_certificate_rejects_order_divisible_by_three():
    for g in (G3, make_group([6]), make_group([3, 3])):
        with pytest.raises(OutOfRange):
            uniformity_certificate(Distribution.uniform(g))
