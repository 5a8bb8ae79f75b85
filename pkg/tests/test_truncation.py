import numpy as np
import pytest
from scipy.special import digamma, polygamma

from zetavac.errors import DimensionMismatch, GridTooSmall, HermiticityViolation, NonHermitianInput
from zetavac.models import hydrogen_element, hydrogen_matrix
from zetavac.truncation import (
    SobolevWeight,
    expectation,
    index_of_mode,
    mode_list,
    mode_of_index,
    project_operator,
    schatten_convergence_probe,
    strong_convergence_probe,
    vacuum_state,
    zero_pad,
)

from conftest import random_hermitian


def test_mode_ordering_first_eight():
    assert [mode_of_index(j) for j in range(8)] == [0, -1, 1, -2, 2, -3, 3, -4]


def test_mode_ordering_roundtrip():
    for j in range(200):
        assert index_of_mode(mode_of_index(j)) == j
    assert list(mode_list(9)) == [mode_of_index(j) for j in range(9)]


def test_mode_image_is_centered_integer_range():
    for n in (5, 8, 13):
        modes = sorted(mode_list(n))
        lo = -(n // 2)
        assert modes == list(range(lo, n - n // 2))


def test_project_operator_nesting_bit_exact():
    big = project_operator(hydrogen_element, 24)
    for m in (1, 2, 7, 16, 24):
        small = project_operator(hydrogen_element, m)
        assert np.array_equal(big[:m, :m], small)


def test_project_operator_output_hermitian_exactly():
    M = project_operator(hydrogen_element, 15)
    assert np.array_equal(M, M.conj().T)


def test_project_operator_rejects_asymmetric_element():
    def bad(l, k):
        return complex(l - k) if l != k else 1.0  # antisymmetric without conjugation

    with pytest.raises(HermiticityViolation):
        project_operator(bad, 6)


def test_vacuum_dense_and_lanczos_agree():
    H = hydrogen_matrix(80)
    dense = vacuum_state(H, solver="dense")
    lanc = vacuum_state(H, solver="lanczos", tol=1e-12)
    assert dense.energy == pytest.approx(lanc.energy, abs=1e-10)
    assert abs(np.vdot(dense.state, lanc.state)) == pytest.approx(1.0, abs=1e-8)


def test_vacuum_energy_monotone_in_dimension():
    # nested variational spaces can only lower the minimum
    energies = [vacuum_state(hydrogen_matrix(n)).energy for n in (2, 4, 8, 16, 32)]
    assert all(b < a for a, b in zip(energies, energies[1:]))


def test_vacuum_state_norm_validated():
    v = vacuum_state(hydrogen_matrix(12))
    assert np.linalg.norm(v.state) == pytest.approx(1.0, abs=1e-12)
    assert v.n == 12


def test_expectation_matches_quadratic_form():
    M = random_hermitian(9, seed=11)
    rng = np.random.default_rng(0)
    x = rng.standard_normal(9) + 1j * rng.standard_normal(9)
    x /= np.linalg.norm(x)
    assert expectation(x, M) == pytest.approx(np.vdot(x, M @ x).real, abs=1e-12)


def test_expectation_input_checks():
    x = np.zeros(4)
    x[0] = 1.0
    with pytest.raises(DimensionMismatch):
        expectation(x, np.eye(3))
    with pytest.raises(ValueError):
        expectation(2.0 * x, np.eye(4))
    with pytest.raises(NonHermitianInput):
        expectation(np.array([1.0, 1.0]) / np.sqrt(2), np.array([[0.0, 1j], [0.0, 0.0]]))


def test_zero_pad():
    x = np.array([1.0, 2.0])
    assert np.array_equal(zero_pad(x, 4), [1.0, 2.0, 0.0, 0.0])
    with pytest.raises(DimensionMismatch):
        zero_pad(x, 1)


def test_sobolev_weight_values():
    w = SobolevWeight(1.0)
    assert np.allclose(w.values([0, 1, -2]), [1.0, 2.0, 5.0])
    assert np.allclose(SobolevWeight(0.0).values([3, -7]), 1.0)


def test_strong_probe_identity_is_tail_norm():
    rng = np.random.default_rng(3)
    x = rng.standard_normal(64) / (1.0 + np.arange(64.0)) ** 2
    x = x.astype(complex)
    r = strong_convergence_probe(np.eye(64), x, [4, 8, 16])
    expected = [np.linalg.norm(x[n:]) for n in (4, 8, 16)]
    assert np.allclose(r, expected, rtol=1e-12)


def test_strong_probe_grid_guard():
    with pytest.raises(GridTooSmall):
        strong_convergence_probe(np.eye(16), np.ones(16, dtype=complex), [4, 9])


def test_strong_probe_accepts_element_function():
    x = np.zeros(32, dtype=complex)
    x[:3] = [1.0, 0.5, 0.5]
    r_elem = strong_convergence_probe(hydrogen_element, x, [4, 8])
    r_mat = strong_convergence_probe(hydrogen_matrix(32), x, [4, 8])
    assert np.allclose(r_elem, r_mat, rtol=1e-12)


def _diag_element_by_index(l, k):
    return 1.0 / (index_of_mode(k) + 1) ** 2 if l == k else 0.0


def test_schatten_probe_inverse_squares_polygamma_oracle():
    # trace-norm tail of diag(1/j^2) equals psi'(n+1) - psi'(N+1)
    n_list = [4, 8, 16, 32]
    n_ref = 64
    got = schatten_convergence_probe(_diag_element_by_index, SobolevWeight(0.0), n_list, n_ref=n_ref)
    oracle = polygamma(1, np.array(n_list) + 1.0) - polygamma(1, n_ref + 1.0)
    assert np.abs(got - oracle).max() < 1e-10


def test_schatten_probe_sobolev_identity_digamma_oracle():
    # s=1 weight turns the identity into diag(1/(1+k^2)); its tail sum
    # follows from sum 1/(1+m^2) = Im[psi(a+i) - psi(b+1+i)] over mode ranges.
    def identity_element(l, k):
        return 1.0 if l == k else 0.0

    n_list = [4, 8, 16]
    n_ref = 48
    got = schatten_convergence_probe(identity_element, SobolevWeight(1.0), n_list, n_ref=n_ref)

    def tail(n):
        total = 0.0
        for a, b in (((n + 1) // 2, (n_ref - 1) // 2), ((n + 2) // 2, n_ref // 2)):
            if b >= a:
                total += float((digamma(a + 1j) - digamma(b + 1 + 1j)).imag)
        return total

    oracle = np.array([tail(n) for n in n_list])
    assert np.abs(got - oracle).max() < 1e-10


def test_schatten_probe_rank_one_closed_form():
    # For A = u u* truncated at rank 1, the nuclear norm of the block
    # difference reduces to sqrt(b^2 + 4ab) with a = |u_head|^2, b = |u_tail|^2.
    n_ref = 40
    u = 1.0 / (1.0 + np.arange(n_ref, dtype=float))
    A = np.outer(u, u).astype(complex)
    n_list = [4, 8, 16]
    got = schatten_convergence_probe(A, SobolevWeight(0.0), n_list, rank_r=1, n_ref=n_ref)
    oracle = []
    for n in n_list:
        a = float(np.sum(u[:n] ** 2))
        b = float(np.sum(u[n:] ** 2))
        oracle.append(np.sqrt(b * b + 4.0 * a * b))
    assert np.allclose(got, oracle, atol=1e-10)


def test_schatten_probe_grid_guard():
    with pytest.raises(GridTooSmall):
        schatten_convergence_probe(np.eye(16), SobolevWeight(0.0), [4, 9], n_ref=16)
