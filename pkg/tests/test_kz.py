from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bendkz.kz import (ClearanceError, ConfigPath, LambdaVector, base_configuration,
                       check_infinitesimal_braid, filtration_basis, jp_matrix,
                       local_monodromy_spectrum, minimal_polynomial_defect, monodromy_rep,
                       omega_apply, pure_braid_loop, transport, winding_number)

TOL = 1e-10


def random_lambda(rng, n, imaginary=False):
    lam = rng.normal(size=n) * 0.4 + 1j * rng.normal(size=n) * 0.4
    if imaginary:
        lam = 1j * lam.imag
    return lam - lam.mean()


def test_jp_matrix_examples():
    lam = (0.3 + 0.2j, -0.7, 0.4 - 0.2j)
    want = np.array([[lam[1], -lam[1], 0], [-lam[0], lam[0], 0], [0, 0, 0]])
    assert np.array_equal(jp_matrix(1, 2, lam), want)
    assert np.array_equal(jp_matrix(2, 2, lam), np.zeros((3, 3)))
    assert np.array_equal(jp_matrix(2, 1, lam), jp_matrix(1, 2, lam))
    with pytest.raises(IndexError):
        jp_matrix(1, 4, lam)


def test_infinitesimal_braid_examples(rng):
    assert check_infinitesimal_braid(rng.normal(size=4) + 1j * rng.normal(size=4))["max_abs"] < 1e-12
    assert check_infinitesimal_braid([0, 0, 0])["max_abs"] == 0
    exact = check_infinitesimal_braid([Fraction(1), Fraction(1), Fraction(-2)])
    assert exact["max_abs"] == 0


@settings(max_examples=50)
@given(st.integers(2, 6), st.integers(0, 10 ** 6))
def test_infinitesimal_braid_random(n, seed):
    lam = np.random.default_rng(seed).normal(size=(2, n)) * 3
    assert check_infinitesimal_braid(lam[0] + 1j * lam[1])["max_abs"] < 1e-12


def test_lambda_vector():
    lv = LambdaVector.from_linkage([1, 1, -1], [1, 1, 2])
    assert lv.sum_zero and np.allclose(lv.array(), [1j, 1j, -2j])
    assert not LambdaVector.from_linkage([1, 1, 1], [1, 1, 1]).sum_zero
    with pytest.raises(ValueError):
        LambdaVector((1, 2), sum_zero=True)


def test_omega_apply_examples(rng):
    z = np.array([0, 1, 2.5 + 0.5j])
    lam = random_lambda(rng, 3)
    v = rng.normal(size=3) + 1j * rng.normal(size=3)
    assert np.allclose(omega_apply(z, np.zeros(3), lam, v), 0)
    zdot = rng.normal(size=3) + 1j * rng.normal(size=3)
    assert np.abs(omega_apply(z, zdot, lam, lam)).max() < 1e-13
    assert abs(omega_apply(z, zdot, lam, v).sum()) < 1e-13
    with pytest.raises(ValueError):
        omega_apply(np.array([0, 0, 1]), zdot, lam, v)


def test_transport_constant_and_contractible(rng):
    lam = random_lambda(rng, 3)
    z = base_configuration(3)
    assert np.allclose(transport(ConfigPath.constant(z), lam), np.eye(3))
    # rectangle traced by z_3 that encloses no other puncture
    pts = []
    for w in (2, 2 + 0.4j, 2.6 + 0.4j, 2.6 - 0.4j, 2 - 0.4j, 2):
        p = z.copy()
        p[2] = w
        pts.append(p)
    t = transport(ConfigPath.polyline(pts), lam, TOL)
    assert np.abs(t - np.eye(3)).max() < 10 * TOL * 10


def test_transport_multiplicative_and_reversal(rng):
    lam = random_lambda(rng, 3)
    base = base_configuration(3)
    p1 = pure_braid_loop(1, 2, base)
    p2 = pure_braid_loop(2, 3, base)
    t1, t2 = transport(p1, lam, TOL), transport(p2, lam, TOL)
    t12 = transport(p1 + p2, lam, TOL)
    scale = max(1.0, np.abs(t12).max())
    assert np.abs(t12 - t1 @ t2).max() < 100 * TOL * scale
    back = transport(p1.reversed(), lam, TOL)
    assert np.abs(t1 @ back - np.eye(3)).max() < 100 * TOL * scale


def test_local_monodromy_eigenvalues(rng):
    n = 4
    lam = random_lambda(rng, n)
    mono = monodromy_rep(lam, TOL)
    for (i, j), g in mono.items():
        want = np.sort_complex(local_monodromy_spectrum(i, j, lam))
        got = np.linalg.eigvals(g.full)
        # match each expected eigenvalue greedily
        for w in want:
            k = int(np.argmin(np.abs(got - w)))
            assert abs(got[k] - w) < 1e-6 * max(1, abs(w))
            got = np.delete(got, k)
        assert minimal_polynomial_defect(g.full, i, j, lam) < 1e-8


def test_jordan_pair_uses_minimal_polynomial():
    lam = LambdaVector.from_linkage([1, -1, 1, -1], [1, 1, 1, 1]).array()
    mono = monodromy_rep(lam, TOL)
    assert minimal_polynomial_defect(mono[(1, 2)].full, 1, 2, lam) < 1e-8


def test_loop_geometry():
    base = base_configuration(3)
    loop = pure_braid_loop(1, 2, base)
    assert np.array_equal(loop.start, loop.end)
    assert abs(winding_number(loop, 2, 1) - 1) < 1e-9
    assert abs(winding_number(loop, 2, 3)) < 1e-9
    loop13 = pure_braid_loop(1, 3, base)
    assert abs(winding_number(loop13, 3, 1) - 1) < 1e-9
    assert abs(winding_number(loop13, 3, 2)) < 1e-9
    assert loop13.clearance() > 0.2
    with pytest.raises(ClearanceError):
        pure_braid_loop(1, 2, base, radius=0.6)


def test_monodromy_filtration_and_center(rng):
    lam = random_lambda(rng, 3, imaginary=True)
    mono = monodromy_rep(lam, TOL)
    for g in mono.values():
        s = max(1, np.abs(g.full).max())
        assert np.abs(lam @ g.full - lam).max() < 100 * TOL * s
        # C^n_0 preserved: (T - I) maps into zero-sum rows
        assert np.abs((g.full - np.eye(3)).sum(axis=1)).max() < 100 * TOL * s
        assert g.zero_sum_defect < 100 * TOL * s
    # full twist; the A_13 loop passes below z_2, so in path order it is A12 A23 A13
    z = mono[(1, 2)].full @ mono[(2, 3)].full @ mono[(1, 3)].full
    for g in mono.values():
        s = max(1, np.abs(z).max() * np.abs(g.full).max())
        assert np.abs(z @ g.full - g.full @ z).max() < 1e3 * TOL * s
    # the other order is not central, so the check has teeth
    w = mono[(1, 2)].full @ mono[(1, 3)].full @ mono[(2, 3)].full
    assert max(np.abs(w @ g.full - g.full @ w).max() for g in mono.values()) > 1e-3


def test_filtration_examples(rng):
    lam = random_lambda(rng, 3)
    f = filtration_basis(lam)
    assert f.basis_quotient.shape == (1, 3)
    assert np.abs(f.project_quotient(lam)).max() < 1e-12
    assert np.abs(f.basis_quotient.sum(axis=1)).max() < 1e-12
    assert np.allclose(f.basis_zero_sum @ f.basis_zero_sum.conj().T, np.eye(2))
    with pytest.raises(ValueError):
        filtration_basis([0, 0, 0])
    with pytest.raises(ValueError):
        filtration_basis([1, 1, 1])


def test_transport_is_deterministic(rng):
    lam = random_lambda(rng, 3)
    loop = pure_braid_loop(1, 3, base_configuration(3))
    assert np.array_equal(transport(loop, lam, TOL), transport(loop, lam, TOL))
