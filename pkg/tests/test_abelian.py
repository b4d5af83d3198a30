import math
from fractions import Fraction
from itertools import product

import numpy as np
import pytest

from cokernel_lab.abelian import (
    AbelianGroup,
    PGroupPartition,
    add,
    aut_order,
    character_table,
    characters,
    cl_mass,
    element_order,
    elements,
    hom_count,
    identity,
    make_group,
    neg,
    partitions_up_to,
    scalar_mul,
    subgroup_generated_by,
    subgroups,
    sur_count,
    sylow,
    trivial_group,
)
from cokernel_lab.errors import GroupTooLarge, InvalidFactor, NonDivisibleChain


def test_make_group_validation():
    assert make_group([2, 4]).invariant_factors == (2, 4)
    assert make_group([]).order == 1
    with pytest.raises(InvalidFactor):
        make_group([0])
    with pytest.raises(InvalidFactor):
        make_group([1, 2])
    with pytest.raises(NonDivisibleChain):
        make_group([2, 3])


def test_str_names():
    assert str(trivial_group()) == "trivial"
    assert str(make_group([6])) == "Z/6"
    assert str(make_group([2, 4])) == "Z/2 x Z/4"


def test_element_arithmetic():
    g = make_group([2, 4])
    e = identity(g)
    a = (1, 3)
    assert add(g, a, a) == (0, 2)
    assert add(g, a, neg(g, a)) == e
    assert scalar_mul(g, 4, a) == (0, 0)
    assert element_order(g, a) == 4
    assert element_order(g, e) == 1


def test_elements_lex_order_and_cap():
    g = make_group([2, 4])
    els = elements(g)
    assert len(els) == 8
    assert els[0] == (0, 0)
    assert els == sorted(els)
    with pytest.raises(GroupTooLarge):
        elements(make_group([2, 4096]), cap=4096)


def test_characters_orthogonality():
    for factors in ([2], [4], [2, 2], [6], [2, 4]):
        g = make_group(factors)
        tab = character_table(g)
        # rows are characters, columns elements; orthogonality over elements
        gram = tab @ tab.conj().T
        assert np.allclose(gram, g.order * np.eye(g.order), atol=1e-12)


def test_character_kernel_membership_exact():
    g = make_group([4])
    chars = characters(g)
    for chi in chars:
        for a in elements(g):
            in_kernel = chi.is_in_kernel(a)
            val = chi(a)
            assert in_kernel == (abs(val - 1.0) < 1e-12)


def brute_aut_order(factors):
    """Count bijective endomorphisms by enumerating generator images."""
    g = make_group(factors)
    els = elements(g)
    k = len(factors)
    gens = []
    for i, d in enumerate(factors):
        gen = tuple(1 if j == i else 0 for j in range(k))
        gens.append((gen, d))
    count = 0
    for images in product(els, repeat=k):
        # must be a homomorphism: image order divides generator order
        if any(element_order(g, img) not in _divisors(d) for img, (gen, d) in zip(images, gens)):
            continue
        seen = set()
        for coeffs in product(*[range(d) for _, d in gens]):
            total = identity(g)
            for c, img in zip(coeffs, images):
                total = add(g, total, scalar_mul(g, c, img))
            seen.add(total)
        if len(seen) == g.order:
            count += 1
    return count


def _divisors(d):
    return {x for x in range(1, d + 1) if d % x == 0}


@pytest.mark.parametrize(
    "factors",
    [[2], [4], [8], [2, 2], [2, 4], [3], [9], [3, 3], [5]],
)
def test_aut_order_against_enumeration(factors):
    g = make_group(factors)
    p = next(p for p in (2, 3, 5) if g.order % p == 0)
    part = sylow(g, p)
    assert aut_order(part) == brute_aut_order(factors)


def test_aut_order_known_values():
    # |Aut(Z/p^k)| = p^(k-1)(p-1); |Aut((Z/p)^n)| = |GL_n(F_p)|
    assert aut_order(PGroupPartition(5, (1,))) == 4
    assert aut_order(PGroupPartition(5, (2,))) == 20
    assert aut_order(PGroupPartition(2, (1, 1))) == 6
    assert aut_order(PGroupPartition(3, (1, 1))) == 48
    assert aut_order(PGroupPartition(2, (1, 1, 1))) == 168


def test_cl_mass_values():
    # mass(trivial at p) = prod_{j>=1}(1 - p^-j); ratios follow 1/|Aut|
    m0 = cl_mass(PGroupPartition(5, ()))
    expected = 1.0
    for j in range(1, 60):
        expected *= 1.0 - 5.0 ** (-j)
    assert abs(m0 - expected) < 1e-12
    m1 = cl_mass(PGroupPartition(5, (1,)))
    assert abs(m1 - m0 / 4.0) < 1e-12
    m2 = cl_mass(PGroupPartition(5, (2,)))
    assert abs(m2 - m0 / 20.0) < 1e-12


def test_sylow_decomposition():
    g = make_group([2, 12])
    assert sylow(g, 2).parts == (2, 1)
    assert sylow(g, 3).parts == (1,)
    assert sylow(g, 5).parts == ()


def test_partitions_up_to():
    parts = partitions_up_to(4)
    assert () in parts
    assert (4,) in parts and (2, 1, 1) in parts and (1, 1, 1, 1) in parts
    assert len(parts) == 1 + 1 + 2 + 3 + 5
    for p in parts:
        assert tuple(sorted(p, reverse=True)) == p


def test_subgroup_counts_known():
    # subgroup lattice sizes for small groups
    assert len(subgroups(make_group([4]))) == 3
    assert len(subgroups(make_group([2, 2]))) == 5
    assert len(subgroups(make_group([6]))) == 4
    assert len(subgroups(make_group([2, 4]))) == 8
    assert len(subgroups(make_group([5, 5]))) == 8  # 1 + 6 lines + full


def test_subgroup_abstract_types():
    g = make_group([2, 4])
    found = sorted(s.invariant_factors for s in subgroups(g))
    assert found.count((2,)) == 3
    assert found.count((4,)) == 2
    assert found.count((2, 2)) == 1
    assert found.count(()) == 1
    assert found.count((2, 4)) == 1


def test_subgroup_generated_by():
    g = make_group([2, 4])
    members = subgroup_generated_by(g, [(0, 2), (1, 0)])
    assert len(members) == 4
    assert (1, 2) in members


def test_hom_count_brute():
    # every map of generators with compatible orders is a hom
    for src, dst in [([2], [4]), ([4], [2]), ([2, 2], [2, 4]), ([6], [4])]:
        a, b = make_group(src), make_group(dst)
        brute = 0
        els = elements(b)
        k = len(src)
        for images in product(els, repeat=k):
            ok = all(
                scalar_mul(b, d, img) == identity(b)
                for d, img in zip(src, images)
            )
            brute += ok
        assert hom_count(a, b) == brute


def brute_sur_count(src_factors, dst_factors):
    a, b = make_group(src_factors), make_group(dst_factors)
    els = elements(b)
    k = len(src_factors)
    total = 0
    for images in product(els, repeat=k):
        if not all(
            scalar_mul(b, d, img) == identity(b)
            for d, img in zip(src_factors, images)
        ):
            continue
        span = subgroup_generated_by(b, images)
        total += len(span) == b.order
    return total


@pytest.mark.parametrize(
    "src,dst",
    [
        ([2], [2]),
        ([4], [2]),
        ([2, 2], [2]),
        ([2, 4], [2, 2]),
        ([4, 4], [2, 4]),
        ([6], [6]),
        ([2, 2, 2], [2, 2]),
    ],
)
def test_sur_count_against_enumeration(src, dst):
    assert sur_count(make_group(src), make_group(dst)) == brute_sur_count(src, dst)


def test_sur_count_large_source():
    # source far above the enumeration cap; only the target is enumerated
    big = make_group([2 * 3 * 5 * 7 * 11 * 13])
    assert sur_count(big, make_group([5])) == 4
    assert sur_count(big, make_group([5, 5])) == 0
