import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from smoothsmc import (
    JacobiConvergenceError,
    SymMatrix,
    eig_sym,
    is_positive_definite,
    jacobi_eigh,
    kron_with_identity,
)


def random_symmetric(seed, order):
    rng = np.random.default_rng(seed)
    a = rng.uniform(-1.0, 1.0, (order, order))
    return SymMatrix((a + a.T) / 2.0)


sym_matrices = st.builds(
    random_symmetric,
    seed=st.integers(0, 2**32 - 1),
    order=st.integers(1, 6),
)


class TestSymMatrix:
    def test_rejects_nonsquare(self):
        with pytest.raises(ValueError):
            SymMatrix(np.zeros((2, 3)))

    def test_rejects_exact_asymmetry(self):
        with pytest.raises(ValueError):
            SymMatrix(np.array([[1.0, 2.0], [2.0 + 1e-14, 1.0]]))

    def test_from_array_symmetrizes_roundoff(self):
        m = SymMatrix.from_array(np.array([[1.0, 2.0], [2.0 + 1e-12, 1.0]]))
        assert np.array_equal(m.entries, m.entries.T)

    def test_from_array_rejects_gross_asymmetry(self):
        with pytest.raises(ValueError):
            SymMatrix.from_array(np.array([[1.0, 2.0], [0.0, 1.0]]))

    def test_entries_frozen(self):
        m = SymMatrix(np.eye(2))
        with pytest.raises(ValueError):
            m.entries[0, 0] = 5.0


class TestKron:
    def test_scalar_times_identity(self):
        out = kron_with_identity(SymMatrix(np.array([[2.0]])), 3)
        assert np.array_equal(out.entries, np.diag([2.0, 2.0, 2.0]))

    def test_identity_times_identity(self):
        out = kron_with_identity(SymMatrix(np.eye(2)), 2)
        assert np.array_equal(out.entries, np.eye(4))

    def test_hand_expanded_block(self):
        base = SymMatrix(np.array([[1.0, 2.0], [2.0, 5.0]]))
        expected = np.array([
            [1.0, 0.0, 2.0, 0.0],
            [0.0, 1.0, 0.0, 2.0],
            [2.0, 0.0, 5.0, 0.0],
            [0.0, 2.0, 0.0, 5.0],
        ])
        assert np.array_equal(kron_with_identity(base, 2).entries, expected)

    def test_rejects_nonpositive_n(self):
        with pytest.raises(ValueError):
            kron_with_identity(SymMatrix(np.eye(2)), 0)


class TestEig:
    def test_diagonal(self):
        summary = eig_sym(SymMatrix(np.diag([1.0, 2.0, 3.0])))
        assert summary.spectrum == (1.0, 2.0, 3.0)
        assert summary.lambda_min == 1.0
        assert summary.lambda_max == 3.0

    def test_offdiagonal_pair(self):
        # characteristic polynomial lambda^2 - 1
        summary = eig_sym(SymMatrix(np.array([[0.0, 1.0], [1.0, 0.0]])))
        assert summary.spectrum == pytest.approx((-1.0, 1.0), rel=1e-10)

    def test_two_by_two(self):
        # characteristic polynomial (2-lambda)^2 - 1
        summary = eig_sym(SymMatrix(np.array([[2.0, 1.0], [1.0, 2.0]])))
        assert summary.spectrum == pytest.approx((1.0, 3.0), rel=1e-10)

    def test_summary_is_sorted_and_consistent(self):
        summary = eig_sym(random_symmetric(7, 5))
        assert summary.lambda_min == summary.spectrum[0]
        assert summary.lambda_max == summary.spectrum[-1]
        assert len(summary.spectrum) == 5
        assert list(summary.spectrum) == sorted(summary.spectrum)

    def test_nonconvergence_is_loud(self):
        with pytest.raises(JacobiConvergenceError):
            jacobi_eigh(np.array([[0.0, 1.0], [1.0, 0.0]]), max_sweeps=0)

    @settings(max_examples=60, deadline=None)
    @given(mat=sym_matrices)
    def test_matches_reference_solver(self, mat):
        vals, _ = jacobi_eigh(mat)
        expected = np.linalg.eigvalsh(mat.entries)
        assert np.allclose(vals, expected, rtol=1e-10, atol=1e-12)

    @settings(max_examples=60, deadline=None)
    @given(mat=sym_matrices)
    def test_reconstruction(self, mat):
        vals, vecs = jacobi_eigh(mat)
        recon = (vecs * vals) @ vecs.T
        assert np.abs(recon - mat.entries).max() < 1e-9

    @settings(max_examples=60, deadline=None)
    @given(mat=sym_matrices)
    def test_trace_and_determinant(self, mat):
        vals, _ = jacobi_eigh(mat)
        assert np.isclose(vals.sum(), np.trace(mat.entries), rtol=1e-9, atol=1e-12)
        assert np.isclose(np.prod(vals), np.linalg.det(mat.entries),
                          rtol=1e-9, atol=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(mat=sym_matrices, n=st.integers(1, 3))
    def test_kron_spectrum_identity(self, mat, n):
        base_vals, _ = jacobi_eigh(mat)
        expanded_vals, _ = jacobi_eigh(kron_with_identity(mat, n))
        assert np.allclose(np.sort(np.repeat(base_vals, n)), expanded_vals,
                           rtol=0, atol=1e-10)


class TestPositiveDefinite:
    def test_identity(self):
        assert is_positive_definite(SymMatrix(np.eye(3)), tol=0.0)

    def test_negative_eigenvalue(self):
        assert not is_positive_definite(SymMatrix(np.diag([1.0, -1e-3])), tol=0.0)

    def test_zero_matrix(self):
        assert not is_positive_definite(SymMatrix(np.zeros((2, 2))))

    def test_rejects_negative_tol(self):
        with pytest.raises(ValueError):
            is_positive_definite(SymMatrix(np.eye(2)), tol=-1.0)

    def test_default_tolerance_absorbs_rounding(self):
        # eigenvalues ~ {0, 2}: exact zero must not count as positive definite
        m = SymMatrix(np.array([[1.0, 1.0], [1.0, 1.0]]))
        assert not is_positive_definite(m)
