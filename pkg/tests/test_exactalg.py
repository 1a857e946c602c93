import cmath
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bendkz.exactalg import (LaurentMatrix, LaurentPoly, SingularMatrixError, condition_number,
                             eigenvalues, find_intertwiner, intertwiner_residuals, lp_arith,
                             lp_specialize, mat_ops)
from bendkz.kz import jp_matrix


def t(n, k, p=1):
    return LaurentPoly.var(n, k, p)


def test_additive_inverse():
    assert lp_arith(t(1, 1), -t(1, 1), "add").terms == {}


def test_difference_of_squares():
    one = LaurentPoly.const(1, 1)
    assert lp_arith(one - t(1, 1), one + t(1, 1), "mul") == one - t(1, 1, 2)


def test_exponent_addition():
    assert lp_arith(t(1, 1, -1), t(1, 1, 2), "mul") == t(1, 1)


def test_nvars_mismatch():
    with pytest.raises(ValueError):
        lp_arith(t(1, 1), t(2, 1), "add")


def test_specialize_examples():
    one = LaurentPoly.const(1, 1)
    assert lp_specialize(one - t(1, 1), [1]) == 0
    assert lp_specialize(t(2, 1) * t(2, 2), [2, 3]) == 6
    p = LaurentPoly.const(2, 1) - t(2, 1) + t(2, 1) * t(2, 2)
    a = np.exp(-2 * np.pi)
    assert abs(lp_specialize(p, [a, 1 / a]) - (2 - a)) < 1e-14


def test_specialize_rejects_zero():
    with pytest.raises(ValueError):
        lp_specialize(t(1, 1, -1), [0])


def test_rational_coefficients_stay_exact():
    p = LaurentPoly(1, {(1,): Fraction(1, 3)})
    q = p * LaurentPoly(1, {(0,): 3})
    assert q == t(1, 1)
    assert isinstance(q.terms[(1,)], int)


def test_serialization_round_trip():
    p = LaurentPoly(3, {(1, -2, 0): Fraction(-5, 7), (0, 0, 0): 2})
    assert LaurentPoly.from_dict(p.to_dict()) == p
    m = LaurentMatrix(3, [[p, t(3, 2)], [LaurentPoly.zero(3), p * p]])
    assert LaurentMatrix.from_dict(m.to_dict()) == m


_exp = st.lists(st.integers(-3, 3), min_size=3, max_size=3).map(tuple)
_coef = st.integers(-5, 5) | st.fractions(max_denominator=6)
_poly = st.dictionaries(_exp, _coef, max_size=4).map(lambda d: LaurentPoly(3, d))


@settings(max_examples=400)
@given(_poly, _poly, _poly)
def test_ring_axioms(a, b, c):
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a * b == b * a
    assert a + b == b + a
    assert (a - a).terms == {}


def _size(p):
    # bound on |p(alpha)| used to scale rounding tolerances
    return sum(abs(float(c)) * 2.0 ** sum(abs(e) for e in k) for k, c in p.terms.items())


@settings(max_examples=300)
@given(_poly, _poly)
def test_specialization_is_ring_homomorphism(a, b):
    alpha = [0.7 + 0.2j, -1.3, 0.5j]
    lhs = lp_specialize(a * b, alpha)
    rhs = lp_specialize(a, alpha) * lp_specialize(b, alpha)
    assert abs(lhs - rhs) <= 1e-10 * max(1.0, _size(a) * _size(b))
    total = lp_specialize(a, alpha) + lp_specialize(b, alpha)
    assert abs(lp_specialize(a + b, alpha) - total) <= 1e-12 * max(1.0, _size(a) + _size(b))


def test_mat_ops_examples():
    m = np.array([[1, 2j], [3, 4]])
    assert np.array_equal(mat_ops(np.eye(2), m, "mul"), m)
    assert np.allclose(mat_ops(np.diag([2, 4]), op="inverse"), np.diag([0.5, 0.25]))
    with pytest.raises(SingularMatrixError):
        mat_ops(np.array([[1, 1], [1, 1]]), op="inverse")
    with pytest.raises(ValueError):
        mat_ops(np.eye(2), np.eye(3), "add")


def test_inverse_of_specialized_gassner():
    a = np.exp(-2 * np.pi)
    t1, t2 = a, 1 / a
    g = np.array([[1 - t1 + t1 * t2, t1 - t1 ** 2], [1 - t2, t1]])
    inv = mat_ops(g, op="inverse")
    assert np.abs(g @ inv - np.eye(2)).max() < 1e-10


def test_solve_contract(rng):
    for _ in range(20):
        a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        if condition_number(a) > 1e6:
            continue
        b = rng.normal(size=(3, 4))
        x = mat_ops(a, b, "solve")
        assert np.linalg.norm(x @ a - b) < 1e-9 * np.linalg.norm(b)


def test_eigenvalues_examples():
    assert np.allclose(np.sort(eigenvalues(np.diag([1, 5])).real), [1, 5])
    lam = (0.3 + 0.1j, -1.2, 0.5j)
    ev = np.sort_complex(eigenvalues(jp_matrix(1, 2, lam)))
    want = np.sort_complex(np.array([0, 0, lam[0] + lam[1]]))
    assert np.allclose(ev, want, atol=1e-12)
    assert np.allclose(eigenvalues(np.array([[0, 1], [0, 0]])), 0)
    with pytest.raises(ValueError):
        eigenvalues(np.eye(17))


def test_intertwiner_self():
    m = np.array([[1, 2], [3, 4j]])
    x, res = find_intertwiner([(m, m)])
    assert res < 1e-12
    assert np.allclose(x, np.eye(2) / np.sqrt(2), atol=1e-12)


def test_intertwiner_permutation():
    x, res = find_intertwiner([(np.diag([1, 2]), np.diag([2, 1]))])
    assert res < 1e-10
    assert abs(x[0, 0]) < 1e-12 and abs(x[1, 1]) < 1e-12
    assert abs(abs(x[0, 1]) - abs(x[1, 0])) < 1e-12


def test_intertwiner_absent():
    x, res = find_intertwiner([(np.diag([1, 2]), np.diag([1, 3]))])
    assert res > 1e-3 or condition_number(x) > 1e6


def test_intertwiner_recovers_similarity(rng):
    for _ in range(10):
        p = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        if condition_number(p) > 1e4:
            continue
        bs = [rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)) for _ in range(3)]
        pairs = [(p @ b @ np.linalg.inv(p), b) for b in bs]
        x, res = find_intertwiner(pairs)
        assert res < 1e-8
        assert condition_number(x) < 1e6
        absolute, relative = intertwiner_residuals(pairs, x)
        assert relative <= absolute + 1e-15


def test_intertwiner_empty():
    assert find_intertwiner([]) is None
