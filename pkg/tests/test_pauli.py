"""Pauli decomposition against an explicit Kronecker-product oracle.

The production transform contracts qubit axes without materializing any
basis word; the tests rebuild every word with plain np.kron from a local
copy of the 2x2 matrices and compare traces.
"""
import csv
import math
from functools import reduce

import numpy as np
import pytest
from numpy.testing import assert_allclose

from zetavac.errors import DimensionMismatch, NonHermitianInput, NotPowerOfTwo
from zetavac.models import hydrogen_matrix
from zetavac.pauli import (
    PauliCoefficients,
    PauliWord,
    coefficients_to_csv,
    decompose,
    pauli_matrix,
    reconstruct,
)

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
LOCAL = [I2, SX, SY, SZ]


def kron_word(qubits, q):
    """Word built by plain Kronecker products, most significant qubit first."""
    digits = [(q >> (2 * n)) & 3 for n in reversed(range(qubits))]
    return reduce(np.kron, (LOCAL[d] for d in digits))


def random_hermitian(n, seed):
    rng = np.random.default_rng(seed)
    B = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (B + B.conj().T) / 2.0


class TestPauliWord:
    def test_index_round_trip(self):
        for q in range(64):
            w = PauliWord.from_index(3, q)
            assert w.index == q

    def test_label(self):
        assert PauliWord.from_index(2, 5).label() == "11"
        assert PauliWord.from_index(3, 6).label() == "012"

    def test_matrix_matches_kron(self):
        for q in (0, 5, 21, 38, 63):
            w = PauliWord.from_index(3, q)
            assert_allclose(pauli_matrix(w), kron_word(3, q), atol=0)

    def test_invalid_inputs(self):
        with pytest.raises(ValueError):
            PauliWord.from_index(2, 16)
        with pytest.raises(ValueError):
            PauliWord(2, (1, 4))
        with pytest.raises(ValueError):
            PauliWord(0, ())


class TestDecompose:
    def test_identity_single_qubit(self):
        c = decompose(np.eye(2))
        assert_allclose(c.coeffs, [1.0, 0.0, 0.0, 0.0], atol=1e-15)

    def test_hydrogen_single_qubit_coefficients(self):
        c = decompose(hydrogen_matrix(2))
        want = [0.25 + math.pi / 4.0, -1.0 / math.pi, 0.5, -0.25]
        assert_allclose(c.coeffs, want, atol=1e-12)

    def test_basis_word_is_one_hot(self):
        c = decompose(np.kron(SX, SX))
        want = np.zeros(16)
        want[5] = 1.0
        assert_allclose(c.coeffs, want, atol=1e-14)

    @pytest.mark.parametrize("Q", [1, 2, 3, 4])
    def test_matches_kron_trace_oracle(self, Q):
        M = random_hermitian(2**Q, seed=Q)
        c = decompose(M)
        for q in range(4**Q):
            want = np.trace(M @ kron_word(Q, q)).real / 2**Q
            assert c.coeffs[q] == pytest.approx(want, abs=1e-12)

    def test_linear(self):
        A = random_hermitian(8, 21)
        B = random_hermitian(8, 22)
        lhs = decompose(2.0 * A - 0.5 * B).coeffs
        rhs = 2.0 * decompose(A).coeffs - 0.5 * decompose(B).coeffs
        assert_allclose(lhs, rhs, atol=1e-12)

    def test_rejects_non_hermitian(self):
        with pytest.raises(NonHermitianInput):
            decompose(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_rejects_non_power_of_two(self):
        with pytest.raises(NotPowerOfTwo):
            decompose(np.eye(3))


class TestReconstruct:
    def test_identity_coeffs(self):
        M = reconstruct(PauliCoefficients(1, np.array([1.0, 0.0, 0.0, 0.0])))
        assert_allclose(M, np.eye(2), atol=0)

    def test_one_hot_gives_basis_word(self):
        for q in (3, 17, 42):
            coeffs = np.zeros(64)
            coeffs[q] = 1.0
            M = reconstruct(PauliCoefficients(3, coeffs))
            assert_allclose(M, kron_word(3, q), atol=0)

    @pytest.mark.parametrize("Q", [1, 2, 3, 4, 5, 6])
    def test_round_trip(self, Q):
        M = random_hermitian(2**Q, seed=100 + Q)
        back = reconstruct(decompose(M))
        assert np.abs(back - M).max() <= 1e-12 * np.abs(M).max()

    def test_round_trip_hydrogen_three_qubits(self):
        M = hydrogen_matrix(8)
        back = reconstruct(decompose(M))
        assert np.abs(back - M).max() <= 1e-12

    def test_coefficients_length_checked(self):
        with pytest.raises(DimensionMismatch):
            PauliCoefficients(2, np.zeros(5))


class TestOrthogonalityAndParseval:
    def test_orthogonality_exhaustive_three_qubits(self):
        words = [kron_word(3, q) for q in range(64)]
        for a in range(64):
            for b in range(a, 64):
                got = np.trace(words[a] @ words[b].conj().T)
                want = 8.0 if a == b else 0.0
                assert abs(got - want) < 1e-12

    def test_orthogonality_sampled_six_qubits(self):
        rng = np.random.default_rng(3)
        pairs = rng.integers(0, 4**6, size=(25, 2))
        for a, b in pairs:
            got = np.trace(kron_word(6, a) @ kron_word(6, b).conj().T)
            want = 64.0 if a == b else 0.0
            assert abs(got - want) < 1e-10

    @pytest.mark.parametrize("Q", [1, 2, 3, 4, 5, 6])
    def test_parseval(self, Q):
        M = random_hermitian(2**Q, seed=200 + Q)
        c = decompose(M)
        lhs = np.sum(c.coeffs**2) * 2**Q
        rhs = np.linalg.norm(M, "fro") ** 2
        assert lhs == pytest.approx(rhs, rel=1e-10)


class TestCsvExport:
    def test_rows_and_exact_values(self, tmp_path):
        c = decompose(hydrogen_matrix(4))
        path = tmp_path / "coeffs.csv"
        coefficients_to_csv(c, path)
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["q_index", "base4_word", "coefficient"]
        assert len(rows) == 1 + 16
        indices = [int(r[0]) for r in rows[1:]]
        assert indices == sorted(indices)
        for r in rows[1:]:
            q = int(r[0])
            assert r[1] == PauliWord.from_index(2, q).label()
            # repr round-trips doubles exactly
            assert float(r[2]) == c.coeffs[q]
