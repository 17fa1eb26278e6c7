import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vosperstab import (CapExceeded, ModulusTooSmall, PreconditionError, RelationVector, TorusHom, TrigPolynomial,
                        bounded_bezout, complete_matrix, find_relation, reduce_dimension)
from vosperstab.config import Caps, Config
from vosperstab.lattice import det, gcd_all, reference_relation_scan


def brute_completion_exists(a, bound):
    """Some second row with entries <= bound, orthogonal to a, giving det = |a|^2/gcd (d = 2)."""
    target = (a[0] ** 2 + a[1] ** 2) // math.gcd(*a)
    for u, v in itertools.product(range(-bound, bound + 1), repeat=2):
        if a[0] * u + a[1] * v == 0 and abs(a[0] * v - a[1] * u) == target:
            return True
    return False


def test_det_matches_numpy():
    rng = np.random.default_rng(0)
    for _ in range(50):
        A = rng.integers(-9, 10, size=(4, 4))
        assert det(A.tolist()) == round(np.linalg.det(A))


def test_complete_base_case():
    A = complete_matrix([1])
    assert A.rows == ((1,),) and A.det() == 1


def test_complete_3_4():
    A = complete_matrix([3, 4])
    assert A.rows[0] == (3, 4)
    assert A.det() == 25
    assert 3 * A.rows[1][0] + 4 * A.rows[1][1] == 0
    assert A.max_entry() <= 4
    assert brute_completion_exists((3, 4), 4)


def test_complete_2_4():
    A = complete_matrix([2, 4])
    assert A.det() == 10
    assert 2 * A.rows[1][0] + 4 * A.rows[1][1] == 0
    assert A.max_entry() <= 4
    assert brute_completion_exists((2, 4), 4)


def test_complete_zero_rejected():
    with pytest.raises(PreconditionError):
        complete_matrix([0, 0, 0])


def test_bezout_examples():
    assert bounded_bezout([1], 7, 7) == (7,)
    c = bounded_bezout([2, 3], 1, 3)
    assert 2 * c[0] + 3 * c[1] == 1 and max(map(abs, c)) <= 3
    assert c == (-1, 1)
    c = bounded_bezout([5, 7], 2, 7)
    assert 5 * c[0] + 7 * c[1] == 2 and max(map(abs, c)) <= 7


def test_bezout_rejects_bad_input():
    with pytest.raises(PreconditionError):
        bounded_bezout([2, 4], 2, 5)
    with pytest.raises(PreconditionError):
        bounded_bezout([2, 9], 1, 5)


def test_find_relation_examples():
    assert find_relation(TorusHom(7, (0,)), 2).k == (1,)
    rel = find_relation(TorusHom(7, (1, 3)), 3)
    assert rel.k == (1, 2)
    assert find_relation(TorusHom(7, (1, 2)), 2) is None


def test_find_relation_cap_without_mitm():
    cfg = Config(caps=Caps(box_cap=100))
    with pytest.raises(CapExceeded):
        find_relation(TorusHom(1009, (1, 57, 300)), 10, method="box", config=cfg)


def test_mitm_agrees_with_box():
    rng = np.random.default_rng(1)
    for _ in range(60):
        p = int(rng.choice([101, 211, 401]))
        d = int(rng.integers(1, 4))
        phi = TorusHom(p, tuple(int(r) for r in rng.integers(0, p, size=d)))
        K = int(rng.integers(2, 7))
        a = find_relation(phi, K, method="box")
        b = find_relation(phi, K, method="mitm")
        assert (a is None) == (b is None)
        if b is not None:
            assert b.holds_for(phi)


def test_relation_vector_invariants():
    with pytest.raises(PreconditionError):
        RelationVector((0, 0), 3)
    with pytest.raises(PreconditionError):
        RelationVector((3, 0), 3)
    assert RelationVector((2, -4), 5).normalized().k == (1, -2)


def test_reduce_dimension_small_example():
    phi = TorusHom(7, (1, 3))
    rel = find_relation(phi, 3)
    F = TrigPolynomial(2, [[1, 0], [-1, 0], [0, 2], [0, -2], [1, 1], [-1, -1]],
                       [0.3, 0.3, 0.1j, -0.1j, 0.2, 0.2])
    red = reduce_dimension(phi, F, rel)
    assert red.phi.d == 1
    assert np.allclose(red.F(red.phi()), F(phi()), atol=1e-12)
    assert np.mean(red.F(red.phi())) == pytest.approx(np.mean(F(phi())), abs=1e-12)


def test_reduce_dimension_constant():
    phi = TorusHom(11, (2, 4))
    red = reduce_dimension(phi, TrigPolynomial.constant(2, 0.7), RelationVector((2, -1), 3))
    assert np.allclose(red.F(red.phi()), 0.7)


def test_reduce_dimension_rejects():
    phi = TorusHom(7, (1, 3))
    with pytest.raises(PreconditionError):
        reduce_dimension(phi, TrigPolynomial.constant(2, 1.0), RelationVector((1, 1), 3))
    with pytest.raises(ModulusTooSmall):
        reduce_dimension(phi, TrigPolynomial.constant(2, 1.0), RelationVector((1, 2), 8))
    with pytest.raises(PreconditionError):
        reduce_dimension(TorusHom(7, (0,)), TrigPolynomial.constant(1, 1.0), RelationVector((1,), 2))


def test_reduce_dimension_callable():
    phi = TorusHom(101, (5, 10))
    F = lambda t: np.cos(2 * np.pi * t[:, 0]) + np.sin(2 * np.pi * t[:, 1]) ** 2
    red = reduce_dimension(phi, F, RelationVector((2, -1), 3))
    assert np.allclose(red.F(red.phi()), F(phi()), atol=1e-10)


def test_index_of_row_span_equals_det():
    # the rows of A span a subgroup of Z^d of index |det A|: count cosets inside a fundamental box
    for a in ([2, 3], [1, 2, 2], [3, 0, 4], [2, 4, 6]):
        A = np.array(complete_matrix(a).rows, dtype=np.int64)
        D = abs(complete_matrix(a).det())
        # integer points y with A^T-coordinates; x in Z^d lies in the row span iff adj(A)^T x = 0 mod D
        adj = np.round(np.linalg.inv(A.T.astype(float)) * D).astype(np.int64)
        d = len(a)
        classes = {tuple((adj @ np.array(x)) % D) for x in itertools.product(range(D), repeat=d)}
        assert len(classes) == D


coprime_vectors = st.lists(st.integers(-6, 6), min_size=1, max_size=3).filter(lambda b: gcd_all(b) == 1)


@settings(max_examples=150, deadline=None)
@given(coprime_vectors, st.integers(-6, 6))
def test_bezout_property(b, target):
    c = bounded_bezout(b, target, 6)
    assert sum(x * y for x, y in zip(b, c)) == target
    assert max(abs(x) for x in c) <= 6


@settings(max_examples=150, deadline=None)
@given(st.lists(st.integers(-9, 9), min_size=1, max_size=4).filter(any))
def test_completion_property(a):
    A = complete_matrix(a)
    assert A.rows[0] == tuple(a)
    for row in A.rows[1:]:
        assert sum(x * y for x, y in zip(a, row)) == 0
    assert abs(A.det()) == sum(x * x for x in a) // gcd_all(a)
    if len(a) > 1:
        assert A.det() > 0
    assert A.max_entry() <= max(abs(x) for x in a)


@settings(max_examples=100, deadline=None)
@given(st.sampled_from([7, 31, 101, 211]), st.integers(1, 3), st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_find_relation_agrees_with_reference(p, d, K, seed):
    rng = np.random.default_rng(seed)
    phi = TorusHom(p, tuple(int(r) for r in rng.integers(0, p, size=d)))
    got = find_relation(phi, K)
    ref = reference_relation_scan(phi, K)
    assert (got is None) == (ref is None)
    if got is not None:
        assert got.holds_for(phi) and max(abs(x) for x in got.k) < K
