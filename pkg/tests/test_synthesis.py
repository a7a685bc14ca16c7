import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import roots_hermite
from scipy.stats import unitary_group

from memspin import mem, synthesis as syn
from memspin.errors import DegenerateGenerator, InvalidTarget, SynthesisFailure
from memspin.operators import SpinQuantum, parity, position, spin_x, spherical_tensor

PUBLISHED = {
    "i": (0.112, -0.060, 0.097),
    "ii": (0.205, -0.034, 0.064),
    "iii": (0.237, -0.004, 0.053),
}


# -------------------------------------------------------------- spectra

def test_integer_check_examples():
    rep = syn.eigenvalue_integer_check(spin_x(1.5))
    np.testing.assert_allclose(rep.eigenvalues, [-1.5, -0.5, 0.5, 1.5], atol=1e-12)
    np.testing.assert_allclose(rep.ratios, [1, 1, 3, 3], atol=1e-12)
    assert rep.is_integer_ratio
    assert syn.eigenvalue_integer_check(mem.nonlinear_generator(PUBLISHED["ii"], 1.5), tol=1e-2).is_integer_ratio
    rep = syn.eigenvalue_integer_check(position(4))
    assert not rep.is_integer_ratio
    assert rep.ratios[-1] == pytest.approx(np.sqrt((3 + np.sqrt(6)) / (3 - np.sqrt(6))), abs=1e-12)
    with pytest.raises(DegenerateGenerator):
        syn.eigenvalue_integer_check(np.zeros((3, 3)))


def test_integer_check_ignores_zero_eigenvalue():
    rep = syn.eigenvalue_integer_check(spin_x(1))
    np.testing.assert_allclose(rep.ratios, [1, 1])


# -------------------------------------------------------------- Hermite / blockade

def test_hermite_zeros_examples():
    np.testing.assert_allclose(syn.hermite_zeros(1), [0.0], atol=1e-15)
    np.testing.assert_allclose(syn.hermite_zeros(3), [-np.sqrt(1.5), 0, np.sqrt(1.5)], atol=1e-14)
    np.testing.assert_allclose(syn.hermite_zeros(5), np.linalg.eigvalsh(position(5).real), atol=1e-10)


@pytest.mark.parametrize("order", [2, 7, 20, 51])
def test_hermite_zeros_against_scipy(order):
    np.testing.assert_allclose(syn.hermite_zeros(order), roots_hermite(order)[0], atol=1e-9)


@pytest.mark.parametrize("order", range(1, 30))
def test_hermite_zeros_interlace(order):
    a, b = syn.hermite_zeros(order), syn.hermite_zeros(order + 1)
    assert np.all(b[:-1] < a) and np.all(a < b[1:])
    np.testing.assert_allclose(a, -a[::-1], atol=1e-14)


def test_blockade_small_spins_periodic():
    rep = syn.blockade_aperiodicity(1)
    assert rep.is_integer_ratio
    np.testing.assert_allclose(np.sort(np.abs(rep.eigenvalues))[1:], np.sqrt(1.5), atol=1e-12)
    assert syn.blockade_aperiodicity(0.5).is_integer_ratio


@pytest.mark.parametrize("two_j", [3, 4, 5, 10, 27, 50])
def test_blockade_aperiodic(two_j):
    rep = syn.blockade_aperiodicity(SpinQuantum(two_j))
    assert rep.hermite_mismatch < 1e-9
    assert not rep.is_integer_ratio
    assert not rep.rationalized
    assert rep.rationalization_digits >= 18


def test_rationalization_detects_rationals():
    import mpmath

    with mpmath.workdps(60):
        assert syn._digits_to_rationalize(mpmath.mpf(3), 30) == 1
        assert syn._digits_to_rationalize(mpmath.mpf(355) / 113, 30) <= 7
        assert syn._digits_to_rationalize(mpmath.sqrt(2), 30) is None


# -------------------------------------------------------------- universality

def test_universality_examples():
    assert syn.check_universality(spin_x(2), 2) == (False, None)
    comb = mem.PhaseComb((0.0, 0.0, np.pi, 2 * np.pi, 3 * np.pi))
    flag, witness = syn.check_universality(mem.generator_from_phases(comb), 2)
    assert flag and witness[0] == 2
    assert syn.check_universality(mem.nonlinear_generator(PUBLISHED["ii"], 1.5), 1.5)[0]


@settings(max_examples=40, deadline=None)
@given(two_j=st.integers(2, 6), q=st.integers(-2, 2), amp=st.floats(1e-7, 1.0), phase=st.floats(0, 6.3))
def test_universality_flips_with_rank2_perturbation(two_j, q, amp, phase):
    J = SpinQuantum(two_j)
    M = mem.generator_from_phases(mem.su2_phases(J))
    assert not syn.check_universality(M, J)[0]
    T = np.exp(1j * phase) * spherical_tensor(2, q, J)
    pert = amp * (T + T.conj().T) if q else amp * T.real
    assert syn.check_universality(M + pert, J)[0]


# -------------------------------------------------------------- Givens

def test_givens_examples():
    assert len(syn.givens_factorization(np.eye(4))) == 0
    S = np.eye(4, dtype=complex)
    S[[1, 2]] = S[[2, 1]]
    f = syn.givens_factorization(S)
    assert len(f) == 1
    m, theta, _ = f.rotations[0]
    assert m == 2 and theta == pytest.approx(np.pi)
    np.testing.assert_allclose(f.matrix(), S, atol=1e-12)
    with pytest.raises(InvalidTarget):
        syn.givens_factorization(np.ones((3, 3)))


@pytest.mark.parametrize("dim", [3, 4, 5, 6])
def test_givens_reconstruction_random(dim):
    rng = np.random.default_rng(dim)
    for _ in range(25):
        U = unitary_group.rvs(dim, random_state=rng)
        f = syn.givens_factorization(U)
        assert len(f) <= dim * (dim - 1) // 2
        assert all(1 <= m < dim for m, _, _ in f)
        np.testing.assert_allclose(f.matrix(), U, atol=1e-8)


def test_givens_gate_is_comb_rotation():
    # rotation between levels m-1, m equals the comb generator dphi_m = 0, others pi
    dim, m, theta, phase = 5, 3, 0.7, 0.4
    deltas = np.full(dim - 1, np.pi)
    deltas[m - 1] = 0
    comb = mem.PhaseComb(tuple(np.concatenate([[0], np.cumsum(deltas)])))
    M = mem.generator_from_phases(comb, phase)
    U = mem.rotation(M, theta / np.sqrt(m))
    np.testing.assert_allclose(U, syn.givens_gate(dim, m, theta, phase), atol=1e-12)


# -------------------------------------------------------------- parity-preserving search

@pytest.fixture(scope="module")
def hadamard_search():
    return syn.parity_preserving_search(1.5, np.pi / 4, seed=0)


def test_search_hits_target(hadamard_search):
    res = hadamard_search
    c, theta = res
    assert theta == pytest.approx(res.theta)
    U = mem.rotation(mem.nonlinear_generator(c, 1.5), theta)
    target = np.array([1, 0, 1, 0]) / np.sqrt(2)
    assert abs(np.vdot(target, U[:, 0])) ** 2 >= 0.999
    assert syn.parity_commutator_norm(U) < 1e-8
    assert syn.eigenvalue_integer_check(mem.nonlinear_generator(c, 1.5), tol=1e-3).is_integer_ratio
    # 4 pi identity
    np.testing.assert_allclose(mem.rotation(mem.nonlinear_generator(c, 1.5), 2 * theta), np.eye(4), atol=1e-6)
    assert np.all(np.abs(res.elements) <= np.sqrt(np.arange(1, 4)) + 1e-12)


def test_search_equivalent_to_published_triple(hadamard_search):
    # the published triple, read in top-indexed ordering, has the same action on |0>, |2> up to phases
    c_pub = mem.coeffs_from_top_ordered(PUBLISHED["ii"])
    M_pub = mem.nonlinear_generator(c_pub, 1.5)
    lam = syn.eigenvalue_integer_check(M_pub, tol=1e-2).min_magnitude
    U_pub = mem.rotation(M_pub, 2 * np.pi / lam)
    U_syn = hadamard_search.unitary()
    for U in (U_pub, U_syn):
        np.testing.assert_allclose(np.abs(U[[0, 2], 0]), [np.sqrt(0.5)] * 2, atol=5e-3)
    # with generator phase pi/2 the published triple lands on (|0>+|2>)/sqrt(2)
    M_pub90 = mem.nonlinear_generator(c_pub, 1.5, np.pi / 2)
    psi = mem.rotation(M_pub90, 2 * np.pi / lam)[:, 0]
    assert abs(psi[0] + psi[2]) ** 2 / 2 > 0.999


def test_published_triples_trace_evenly_spaced_family():
    gammas = []
    for key in ("i", "ii", "iii"):
        M = mem.nonlinear_generator(mem.coeffs_from_top_ordered(PUBLISHED[key]), 1.5)
        lam = syn.eigenvalue_integer_check(M, tol=2e-2).min_magnitude
        psi = mem.rotation(M, 2 * np.pi / lam)[:, 0].real
        gammas.append(np.degrees(np.arctan2(abs(psi[2]), abs(psi[0]))))
    np.testing.assert_allclose(gammas, [22.5, 45, 67.5], atol=1.0)


@pytest.mark.parametrize("gamma", [0.0, np.pi / 8, 3 * np.pi / 8, np.pi / 2])
def test_search_gamma_family(gamma):
    res = syn.parity_preserving_search(1.5, gamma, seed=1)
    U = res.unitary()
    psi = U[:, 0]
    target = np.array([np.cos(gamma), 0, np.sin(gamma), 0])
    assert abs(np.vdot(target, psi)) ** 2 >= 0.999
    assert syn.parity_commutator_norm(U) < 1e-8


def test_search_deterministic():
    a = syn.parity_preserving_search(1.5, 0.3, seed=7)
    b = syn.parity_preserving_search(1.5, 0.3, seed=7)
    np.testing.assert_array_equal(a.elements, b.elements)


def test_search_rejects_bad_input():
    with pytest.raises(InvalidTarget):
        syn.parity_preserving_search(1, np.pi / 4)
    with pytest.raises(InvalidTarget):
        syn.parity_preserving_search(1.5, 2.0)


def test_search_failure_carries_best():
    with pytest.raises(SynthesisFailure) as info:
        syn.parity_preserving_search(1.5, np.pi / 4, seed=0, restarts=1, fidelity_threshold=1.5)
    assert info.value.best is not None


def test_search_spin_five_halves():
    res = syn.parity_preserving_search(2.5, np.pi / 4, seed=0)
    U = res.unitary()
    assert syn.parity_commutator_norm(U) < 1e-8
    assert res.fidelity >= 0.999
