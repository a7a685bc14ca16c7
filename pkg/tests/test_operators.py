import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from sympy import S
from sympy.physics.quantum.cg import CG

from memspin import operators as ops
from memspin.errors import (
    DegenerateSpin,
    HermiticityViolation,
    InvalidDimension,
    InvalidQuantumNumbers,
    InvalidRank,
)


def test_basis_order_constant():
    assert ops.BASIS_ORDER == "qubit-major"
    # |e> x |1> with cavity_dim 3 sits at 1*3 + 1
    v = ops.tensor(ops.fock(2, 1), ops.fock(3, 1))
    assert np.argmax(np.abs(v)) == 4


def test_annihilation_examples():
    np.testing.assert_allclose(ops.annihilation(2), [[0, 1], [0, 0]])
    assert ops.annihilation(3)[1, 2] == pytest.approx(np.sqrt(2))
    a = ops.annihilation(4)
    np.testing.assert_allclose(np.diag(a.conj().T @ a).real, [0, 1, 2, 3])
    with pytest.raises(InvalidDimension):
        ops.annihilation(1)


@pytest.mark.parametrize("dim", [3, 5, 9])
def test_canonical_commutator_and_parity(dim):
    a = ops.annihilation(dim)
    c = ops.commutator(a, a.conj().T)
    np.testing.assert_allclose(c[:-1, :-1], np.eye(dim - 1), atol=1e-12)
    P = ops.parity(dim)
    np.testing.assert_allclose((P @ a @ P)[:-1, :-1], -a[:-1, :-1], atol=1e-12)


def test_spin_lowering_examples():
    np.testing.assert_allclose(ops.spin_lowering(0.5), [[0, 1], [0, 0]])
    np.testing.assert_allclose(np.diag(ops.spin_lowering(1.5), 1), [np.sqrt(3), 2, np.sqrt(3)])
    np.testing.assert_allclose(np.linalg.eigvalsh(ops.spin_x(1)), [-1, 0, 1], atol=1e-12)
    with pytest.raises(DegenerateSpin):
        ops.spin_lowering(0)


def test_spin_vacuum_is_south_pole():
    assert ops.spin_z(1.5)[0, 0] == pytest.approx(-1.5)


@pytest.mark.parametrize("two_j", range(1, 11))
def test_spin_algebra(two_j):
    J = ops.SpinQuantum(two_j)
    jx, jy, jz = ops.spin_ops(J)
    np.testing.assert_allclose(ops.commutator(jx, jy), 1j * jz, atol=1e-12)
    j = two_j / 2
    np.testing.assert_allclose(jx @ jx + jy @ jy + jz @ jz, j * (j + 1) * np.eye(two_j + 1), atol=1e-12)


@pytest.mark.parametrize("two_j", range(1, 9))
def test_pi_rotation_about_x(two_j):
    J = ops.SpinQuantum(two_j)
    U = ops.unitary_exp(ops.spin_x(J), np.pi)
    phase = np.exp(3j * np.pi * J.j)  # (-1)^{3J}
    np.testing.assert_allclose(U, phase * np.fliplr(np.eye(two_j + 1)), atol=1e-10)


def test_pi_rotation_half_gives_minus_i_antidiagonal():
    U = ops.unitary_exp(ops.spin_x(0.5), np.pi)
    np.testing.assert_allclose(U, -1j * np.array([[0, 1], [1, 0]]), atol=1e-12)


def test_tensor_examples():
    np.testing.assert_allclose(ops.tensor(np.eye(2), np.eye(3)), np.eye(6))
    np.testing.assert_allclose(np.diag(ops.tensor(ops.SIGMA_Z, np.eye(2))), [1, 1, -1, -1])
    lhs = ops.tensor(ops.SIGMA_MINUS, np.eye(3)) @ ops.tensor(ops.SIGMA_PLUS, np.eye(3))
    g = ops.projector(ops.fock(2, 0))
    np.testing.assert_allclose(lhs, ops.tensor(g, np.eye(3)))


def test_unitary_exp_examples():
    np.testing.assert_allclose(ops.unitary_exp(ops.SIGMA_X, np.pi), -np.eye(2), atol=1e-12)
    np.testing.assert_allclose(ops.unitary_exp(np.zeros((3, 3)), 1.3), np.eye(3))
    np.testing.assert_allclose(ops.unitary_exp(ops.number(3), np.pi), np.diag([1, -1, 1]), atol=1e-12)
    with pytest.raises(HermiticityViolation):
        ops.unitary_exp(ops.annihilation(3), 1.0)


@settings(max_examples=50, deadline=None)
@given(
    theta=st.floats(-10, 10),
    n=st.tuples(st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1)).filter(lambda v: np.linalg.norm(v) > 1e-3),
)
def test_unitary_exp_matches_rodrigues(theta, n):
    n = np.array(n) / np.linalg.norm(n)
    H = n[0] * ops.SIGMA_X + n[1] * ops.SIGMA_Y + n[2] * ops.SIGMA_Z
    closed = np.cos(theta) * np.eye(2) - 1j * np.sin(theta) * H
    np.testing.assert_allclose(ops.unitary_exp(H, theta), closed, atol=1e-12)


def test_displacement_examples():
    np.testing.assert_allclose(ops.displacement(0, 10), np.eye(10), atol=1e-14)
    D = ops.displacement(1.0 * np.exp(0.3j), 20)
    psi = D @ ops.fock(20, 0)
    assert np.vdot(psi, ops.number(20) @ psi).real == pytest.approx(1.0, abs=1e-6)
    np.testing.assert_allclose(D @ ops.displacement(-np.exp(0.3j), 20), np.eye(20), atol=1e-8)


def test_clebsch_gordan_examples():
    assert ops.clebsch_gordan(0.5, 0.5, 0.5, -0.5, 0, 0) == pytest.approx(1 / np.sqrt(2))
    assert ops.clebsch_gordan(1, 1, 1, 0, 1, 0) == 0.0
    with pytest.raises(InvalidQuantumNumbers):
        ops.clebsch_gordan(0.3, 0, 1, 0, 1, 0)


def _half_integers(max_two):
    return st.integers(0, max_two).map(lambda t: t / 2)


@settings(max_examples=200, deadline=None)
@given(data=st.data())
def test_clebsch_gordan_against_sympy(data):
    j1 = data.draw(_half_integers(12))
    j2 = data.draw(_half_integers(12))
    J = data.draw(st.sampled_from([abs(j1 - j2) + k for k in range(int(j1 + j2 - abs(j1 - j2)) + 1)]))
    m1 = data.draw(st.sampled_from([-j1 + k for k in range(int(2 * j1) + 1)]))
    m2 = data.draw(st.sampled_from([-j2 + k for k in range(int(2 * j2) + 1)]))
    expected = float(CG(S(int(2 * j1)) / 2, S(int(2 * m1)) / 2, S(int(2 * j2)) / 2, S(int(2 * m2)) / 2,
                        S(int(2 * J)) / 2, S(int(2 * (m1 + m2))) / 2).doit())
    assert ops.clebsch_gordan(j1, m1, j2, m2, J, m1 + m2) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("two_j1,two_j2", [(1, 1), (2, 3), (4, 4), (6, 3)])
def test_clebsch_gordan_orthonormality(two_j1, two_j2):
    j1, j2 = two_j1 / 2, two_j2 / 2
    for tJ in range(abs(two_j1 - two_j2), two_j1 + two_j2 + 1, 2):
        J = tJ / 2
        for tM in range(-tJ, tJ + 1, 2):
            total = sum(
                ops.clebsch_gordan(j1, m1, j2, tM / 2 - m1, J, tM / 2) ** 2
                for m1 in np.arange(-j1, j1 + 1)
            )
            assert total == pytest.approx(1.0, abs=1e-12)


def test_clebsch_gordan_large_j_stable():
    # j = 20 regime stays normalised
    total = sum(ops.clebsch_gordan(20, m, 20, -m, 0, 0) ** 2 for m in range(-20, 21))
    assert total == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("two_j", [1, 2, 3, 4])
def test_spherical_tensor_orthonormal(two_j):
    J = ops.SpinQuantum(two_j)
    labels = [(k, q) for k in range(two_j + 1) for q in range(-k, k + 1)]
    mats = [ops.spherical_tensor(k, q, J) for k, q in labels]
    gram = np.array([[np.trace(a.conj().T @ b) for b in mats] for a in mats])
    np.testing.assert_allclose(gram, np.eye(len(mats)), atol=1e-12)


def test_spherical_tensor_examples():
    np.testing.assert_allclose(ops.spherical_tensor(0, 0, 1.5), np.eye(4) / 2, atol=1e-14)
    for q in (-1, 1):
        T = ops.spherical_tensor(1, q, 2)
        mask = np.ones_like(T, dtype=bool)
        np.fill_diagonal(mask[:, 1:], False)
        np.fill_diagonal(mask[1:, :], False)
        assert np.all(T[mask] == 0)
    # rank-1 q=0 tensor is proportional to Jz
    T = ops.spherical_tensor(1, 0, 1.5)
    jz = ops.spin_z(1.5)
    np.testing.assert_allclose(T / T[-1, -1], jz / jz[-1, -1], atol=1e-12)
    with pytest.raises(InvalidRank):
        ops.spherical_tensor(4, 0, 1.5)
    with pytest.raises(InvalidRank):
        ops.spherical_tensor(1, 2, 1.5)


def test_as_spin():
    assert ops.as_spin(1.5).two_j == 3
    assert ops.as_spin(ops.SpinQuantum(4)).dim == 5
    with pytest.raises(InvalidQuantumNumbers):
        ops.as_spin(0.3)
