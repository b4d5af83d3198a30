import math
from itertools import product

import numpy as np
import pytest

from cokernel_lab.abelian import make_group
from cokernel_lab.errors import BoundaryPoint, OutOfRange, OutOfWindow
from cokernel_lab.laplace import (
    SimplexPoint,
    analytic_gradient,
    analytic_hessian,
    f_value,
    fd_gradient,
    fd_hessian,
    gaussian_riemann_sum,
    q_matrix,
    taylor_residual,
)
from cokernel_lab.linalg_exact import det_exact
from cokernel_lab.seeds import make_rng

G4 = make_group([4])
G5 = make_group([5])
G22 = make_group([2, 2])


def test_simplex_point_validation():
    with pytest.raises(OutOfRange):
        SimplexPoint(G5, (0.2, 0.2))
    bad = SimplexPoint(G5, (0.5, 0.5, 0.2, 0.2))  # nu(0) < 0
    with pytest.raises(BoundaryPoint):
        bad.require_interior()
    with pytest.raises(BoundaryPoint):
        SimplexPoint(G5, (0.0, 0.3, 0.3, 0.2)).require_interior()


def test_uniform_point_identities():
    for g in (G4, G5, G22):
        u = SimplexPoint.uniform(g)
        assert abs(f_value(u)) < 1e-14
        assert np.abs(analytic_gradient(u)).max() < 1e-12
        q = np.array(q_matrix(g.order).entries, dtype=float)
        assert np.abs(analytic_hessian(u) - q).max() < 1e-9


def test_f_nonnegative_interior():
    rng = make_rng(21)
    for _ in range(50):
        u = SimplexPoint.uniform(G5)
        off = (rng.random(4) - 0.5) * 0.1
        assert f_value(u.shifted(off)) >= -1e-15


def _random_interior(group, rng, spread):
    u = SimplexPoint.uniform(group)
    off = (rng.random(group.order - 1) - 0.5) * spread
    return u.shifted(off)


def test_fd_gradient_matches_analytic():
    rng = make_rng(22)
    for g in (G4, G5, G22):
        for _ in range(8):
            x = _random_interior(g, rng, 0.08)
            diff = np.abs(fd_gradient(x) - analytic_gradient(x)).max()
            assert diff < 1e-6


def test_fd_hessian_matches_analytic():
    rng = make_rng(23)
    for g in (G4, G5, G22):
        for _ in range(5):
            x = _random_interior(g, rng, 0.08)
            h_an = analytic_hessian(x)
            h_fd = fd_hessian(x)
            rel = np.abs(h_fd - h_an).max() / max(1.0, np.abs(h_an).max())
            assert rel < 1e-4


def test_hessian_symmetric_and_psd_near_uniform():
    rng = make_rng(24)
    for _ in range(10):
        x = _random_interior(G5, rng, 0.02)
        h = analytic_hessian(x)
        assert np.abs(h - h.T).max() < 1e-8
        assert np.linalg.eigvalsh(h).min() > 0.0


def test_q_matrix_det_closed_form():
    for g in range(1, 13):
        assert det_exact(q_matrix(g)) == g**g
    with pytest.raises(OutOfRange):
        q_matrix(0)


def test_q_matrix_shape_and_entries():
    q = q_matrix(5)
    assert (q.rows, q.cols) == (4, 4)
    for i in range(4):
        for j in range(4):
            assert q.entries[i][j] == (10 if i == j else 5)
    zero = q_matrix(1)
    assert (zero.rows, zero.cols) == (0, 0)


def test_taylor_residual_zero_offset():
    assert taylor_residual(G5, 100, [0.0] * 4) < 1e-12


def test_taylor_residual_guards():
    with pytest.raises(OutOfRange):
        taylor_residual(G5, 100, [0.0] * 3)
    # window box at n = 10^4 is t_n/n ~ 0.136, so 0.2 is outside
    with pytest.raises(OutOfWindow):
        taylor_residual(G5, 10_000, [0.2] * 4)


def test_taylor_residual_decays_like_cubic():
    # offset y/sqrt(n) with fixed y: n f - quad = O(n |x|^3) = O(n^{-1/2})
    y = np.array([0.3, -0.2, 0.25, -0.15])
    vals = [taylor_residual(G5, n, y / math.sqrt(n)) for n in (256, 1024, 4096, 16384)]
    for a, b in zip(vals, vals[1:]):
        assert b < 0.75 * a


def _brute_riemann(order, n, box_radius):
    g = order
    dim = g - 1
    q = np.array(q_matrix(g).entries, dtype=float)
    kmax = int(math.floor(box_radius * math.sqrt(n)))
    total = 0.0
    for k in product(range(-kmax, kmax + 1), repeat=dim):
        v = np.array(k, dtype=float)
        total += math.exp(-0.5 * float(v @ q @ v) / n)
    return total * g ** (g / 2.0) / (2.0 * math.pi * n) ** (dim / 2.0)


def test_riemann_sum_matches_bruteforce():
    for order, n, radius in [(2, 30, 2.0), (3, 16, 1.5), (4, 9, 1.0)]:
        fast = gaussian_riemann_sum(order, n, radius)
        brute = _brute_riemann(order, n, radius)
        assert abs(fast - brute) < 1e-12 * brute


def test_riemann_sum_converges_to_one():
    assert abs(gaussian_riemann_sum(5, 10_000, 8.0) - 1.0) < 1e-3
    assert abs(gaussian_riemann_sum(2, 1_000_000, 8.0) - 1.0) < 1e-3


def test_riemann_sum_guards():
    with pytest.raises(OutOfRange):
        gaussian_riemann_sum(1, 100, 4.0)
    with pytest.raises(OutOfRange):
        gaussian_riemann_sum(3, 0, 4.0)
    with pytest.raises(OutOfRange):
        gaussian_riemann_sum(3, 100, 0.0)
