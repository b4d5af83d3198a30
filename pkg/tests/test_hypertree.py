import math
from collections import Counter

import pytest

from cokernel_lab.errors import BudgetExceeded, OutOfRange
from cokernel_lab.hypertree import (
    boundary_matrix,
    homology,
    hypertree_gram_det,
    k_subsets,
    kalai_check,
    sample_hypertree,
    sylow_census_hypertree,
)
from cokernel_lab.linalg_exact import IntMatrix, det_exact


def test_k_subsets_lex_order():
    got = k_subsets(4, 2)
    assert got == [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)]
    assert len(k_subsets(7, 3)) == math.comb(7, 3)
    assert k_subsets(7, 3) == sorted(k_subsets(7, 3))


def test_boundary_matrix_shapes():
    for n in (3, 4, 5, 6):
        m = boundary_matrix(n)
        assert (m.rows, m.cols) == (math.comb(n - 1, 2), math.comb(n, 3))
    with pytest.raises(OutOfRange):
        boundary_matrix(2)


def test_boundary_matrix_smallest_case():
    m = boundary_matrix(3)
    assert (m.rows, m.cols) == (1, 1)
    assert abs(m.entries[0][0]) == 1


def test_boundary_matrix_signs_n4():
    m = boundary_matrix(4)
    rows = k_subsets(3, 2)  # (1,2), (1,3), (2,3)
    cols = k_subsets(4, 3)  # (1,2,3), (1,2,4), (1,3,4), (2,3,4)
    e = {(r, c): m.entries[i][j] for i, r in enumerate(rows) for j, c in enumerate(cols)}
    # column (1,2,3): remove pos0 -> (2,3) sign -, pos1 -> (1,3) sign +, pos2 -> (1,2) sign -
    assert e[((2, 3), (1, 2, 3))] == -1
    assert e[((1, 3), (1, 2, 3))] == 1
    assert e[((1, 2), (1, 2, 3))] == -1
    # column (1,2,4): only the facet inside [3] survives
    assert e[((1, 2), (1, 2, 4))] == -1
    assert e[((1, 3), (1, 2, 4))] == 0
    assert e[((2, 3), (1, 2, 4))] == 0


def test_gram_det_closed_form():
    for n in (3, 4, 5, 6, 7):
        assert hypertree_gram_det(n) == n ** math.comb(n - 2, 2)


def test_sample_shape_and_determinism():
    a = sample_hypertree(5, seed=99)
    b = sample_hypertree(5, seed=99)
    assert a.faces == b.faces
    assert a.digest() == b.digest()
    assert len(a.faces) == math.comb(4, 2)
    assert all(f in k_subsets(5, 3) for f in a.faces)
    c = sample_hypertree(5, seed=100)
    assert c.faces != a.faces or c.seed != a.seed


def test_homology_order_is_squared_det_weight():
    # |H1| equals |det| of the selected square incidence block
    inc = boundary_matrix(5)
    cols = k_subsets(5, 3)
    rank = {f: j for j, f in enumerate(cols)}
    for seed in range(6):
        s = sample_hypertree(5, seed=seed)
        picked = [rank[f] for f in s.faces]
        sub = IntMatrix.from_rows(
            [[inc.entries[i][j] for j in picked] for i in range(inc.rows)]
        )
        h = homology(s)
        assert h.order == abs(det_exact(sub))


def test_kalai_small_cases():
    k4 = kalai_check(4)
    assert k4.matches and k4.total == 4  # 4^C(2,2)
    assert k4.subset_count == math.comb(4, 3)
    k5 = kalai_check(5)
    assert k5.matches and k5.total == 125  # 5^C(3,2)
    assert 0 < k5.spanning_count <= k5.subset_count


def test_kalai_budget_guard():
    with pytest.raises(BudgetExceeded):
        kalai_check(6, budget=100)


def test_census_counts_and_note():
    cen = sylow_census_hypertree(4, p=5, replicas=25, seed=7)
    assert sum(cen.counts.values()) == 25
    assert cen.note is None
    freq_total = sum(cen.frequency(k) for k in cen.counts)
    assert abs(freq_total - 1.0) < 1e-12
    cen2 = sylow_census_hypertree(4, p=2, replicas=5, seed=7)
    assert cen2.note is not None and "2" in cen2.note
    with pytest.raises(OutOfRange):
        sylow_census_hypertree(4, p=5, replicas=0, seed=7)


def test_census_determinism():
    a = sylow_census_hypertree(5, p=3, replicas=20, seed=42)
    b = sylow_census_hypertree(5, p=3, replicas=20, seed=42)
    assert Counter(a.counts) == Counter(b.counts)
