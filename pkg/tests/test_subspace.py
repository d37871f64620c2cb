import numpy as np
import pytest

from winpca import (
    RadiusSpec,
    Spectrum,
    Subspace,
    fit_pc_subspace,
    principal_angles,
    sample_covariance,
    sin_theta_operator,
    symmetric_eigh,
    winsorize_dataset,
)


def _rotation(p, seed):
    rng = np.random.default_rng(seed)
    Q, R = np.linalg.qr(rng.standard_normal((p, p)))
    return Q * np.sign(np.diag(R))


def _random_subspace(p, d, rng):
    Q, _ = np.linalg.qr(rng.standard_normal((p, d)))
    return Q


class TestSampleCovariance:
    def test_single_row_outer_product(self):
        S = sample_covariance(np.array([[1.0, 0.0]]))
        assert np.array_equal(S, np.array([[1.0, 0.0], [0.0, 0.0]]))

    def test_two_axis_rows(self):
        S = sample_covariance(np.array([[1.0, 0.0], [0.0, 1.0]]))
        assert np.allclose(S, 0.5 * np.eye(2), rtol=0, atol=1e-16)

    def test_row_permutation_invariance(self):
        rng = np.random.default_rng(3)
        X = rng.standard_normal((40, 5))
        Xp = X[rng.permutation(40)]
        assert np.allclose(sample_covariance(X), sample_covariance(Xp), rtol=1e-12)

    def test_no_mean_subtraction(self):
        # constant rows give a rank-1 second moment, not a zero matrix
        X = np.tile([2.0, 0.0], (10, 1))
        S = sample_covariance(X)
        assert S[0, 0] == pytest.approx(4.0)


class TestSymmetricEigh:
    def test_identity(self):
        spec = symmetric_eigh(np.eye(4))
        assert np.allclose(spec.eigenvalues, 1.0)

    def test_diagonal_sorted_descending_with_axis_vectors(self):
        spec = symmetric_eigh(np.diag([3.0, 1.0, 2.0]))
        assert np.allclose(spec.eigenvalues, [3.0, 2.0, 1.0])
        expected = np.eye(3)[:, [0, 2, 1]]
        # sign convention makes the largest component positive
        assert np.allclose(spec.eigenvectors, expected, rtol=0, atol=1e-15)

    def test_reconstruction(self):
        rng = np.random.default_rng(5)
        A = rng.standard_normal((8, 8))
        S = (A + A.T) / 2
        spec = symmetric_eigh(S)
        R = spec.eigenvectors @ np.diag(spec.eigenvalues) @ spec.eigenvectors.T
        assert np.max(np.abs(R - S)) <= 1e-7 * np.max(np.abs(S))

    def test_rejects_asymmetric(self):
        with pytest.raises(ValueError):
            symmetric_eigh(np.array([[1.0, 2.0], [0.0, 1.0]]))

    def test_rejects_non_square(self):
        with pytest.raises(ValueError):
            symmetric_eigh(np.ones((2, 3)))

    def test_psd_roundoff_clamped_to_zero(self):
        v = np.array([1.0, 2.0, 3.0])
        spec = symmetric_eigh(np.outer(v, v))
        assert spec.eigenvalues[0] == pytest.approx(14.0)
        assert np.all(spec.eigenvalues[1:] >= 0.0)

    def test_genuinely_negative_eigenvalues_survive(self):
        spec = symmetric_eigh(np.diag([2.0, -3.0]))
        assert np.allclose(spec.eigenvalues, [2.0, -3.0])

    def test_spectrum_requires_descending(self):
        with pytest.raises(ValueError):
            Spectrum(np.array([1.0, 2.0]), np.eye(2))


class TestFit:
    def test_none_equals_classical_pca(self):
        rng = np.random.default_rng(9)
        X = rng.standard_normal((50, 4)) * np.array([3.0, 1.0, 0.5, 0.1])
        fit = fit_pc_subspace(X, 2, RadiusSpec.none())
        # brute-force reference straight from numpy
        w, V = np.linalg.eigh(X.T @ X / 50)
        ref = V[:, np.argsort(w)[::-1][:2]]
        assert sin_theta_operator(fit.basis, ref) <= 1e-10
        assert fit.mode == "identity"
        assert fit.effective_radius is None

    def test_large_radius_equals_none(self):
        rng = np.random.default_rng(10)
        X = rng.standard_normal((30, 5))
        r = float(np.linalg.norm(X, axis=1).max())
        fit_r = fit_pc_subspace(X, 2, RadiusSpec.fixed(r))
        fit_none = fit_pc_subspace(X, 2, RadiusSpec.none())
        assert principal_angles(fit_r.basis, fit_none.basis).largest <= 1e-10
        assert fit_r.mode == "winsorize"
        assert fit_r.effective_radius == r

    def test_pca_consistency_single_spike(self):
        rng = np.random.default_rng(12)
        X = rng.standard_normal((1000, 2)) * np.sqrt([25.0, 1.0])
        fit = fit_pc_subspace(X, 1, RadiusSpec.none())
        target = np.array([[1.0], [0.0]])
        assert principal_angles(fit.basis, target).largest < 0.1

    def test_spectrum_travels_in_full(self):
        rng = np.random.default_rng(13)
        X = rng.standard_normal((40, 6))
        fit = fit_pc_subspace(X, 2, RadiusSpec.fixed(2.0))
        assert fit.spectrum.eigenvalues.shape == (6,)
        assert np.all(np.diff(fit.spectrum.eigenvalues) <= 0)

    def test_degenerate_gap_flagged(self):
        X = np.array([[1.0, 0.0], [0.0, 1.0]])
        fit = fit_pc_subspace(X, 1, RadiusSpec.none())
        assert fit.degenerate_gap

    def test_clear_gap_not_flagged(self):
        X = np.array([[2.0, 0.0], [0.0, 1.0]])
        fit = fit_pc_subspace(X, 1, RadiusSpec.none())
        assert not fit.degenerate_gap

    def test_d_validation(self):
        X = np.eye(3)
        with pytest.raises(ValueError):
            fit_pc_subspace(X, 0, RadiusSpec.none())
        with pytest.raises(ValueError):
            fit_pc_subspace(X, 4, RadiusSpec.none())

    def test_thin_svd_path_matches_dense(self):
        # n < p forces the SVD route; compare against the dense eigh route
        rng = np.random.default_rng(14)
        X = rng.standard_normal((6, 15)) * 2.0
        W = winsorize_dataset(X, 2.5)
        fit = fit_pc_subspace(X, 2, RadiusSpec.fixed(2.5))
        dense = symmetric_eigh(W.T @ W / 6)
        assert np.allclose(fit.spectrum.eigenvalues, dense.eigenvalues,
                           rtol=1e-9, atol=1e-12)
        assert fit.spectrum.eigenvalues[6:].max() == 0.0
        assert fit.spectrum.eigenvectors.shape == (15, 6)
        assert sin_theta_operator(fit.basis, dense.eigenvectors[:, :2]) <= 1e-8

    def test_rank_deficient_d_beyond_rank_falls_back(self):
        rng = np.random.default_rng(15)
        X = rng.standard_normal((3, 5))
        fit = fit_pc_subspace(X, 4, RadiusSpec.none())
        B = fit.basis
        assert B.shape == (5, 4)
        assert np.allclose(B.T @ B, np.eye(4), atol=1e-10)


class TestPrincipalAngles:
    def test_same_subspace_exact_zero(self):
        rng = np.random.default_rng(20)
        U = _random_subspace(5, 2, rng)
        rep = principal_angles(U, U)
        assert np.array_equal(rep.angles, np.zeros(2))
        assert rep.sin_largest == 0.0

    def test_forty_five_degrees(self):
        U = np.array([[1.0], [0.0]])
        W = np.array([[1.0], [1.0]]) / np.sqrt(2)
        assert principal_angles(U, W).largest == pytest.approx(np.pi / 4, abs=1e-12)

    def test_shared_plus_orthogonal_direction(self):
        U = np.eye(4)[:, [0, 1]]
        W = np.eye(4)[:, [0, 2]]
        rep = principal_angles(U, W)
        assert rep.angles == pytest.approx([0.0, np.pi / 2], abs=1e-12)
        assert rep.smallest == pytest.approx(0.0, abs=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            principal_angles(np.eye(3)[:, :1], np.eye(3)[:, :2])
        with pytest.raises(ValueError):
            principal_angles(np.eye(3)[:, :1], np.eye(4)[:, :1])

    def test_rejects_non_orthonormal(self):
        with pytest.raises(ValueError):
            principal_angles(np.array([[2.0], [0.0]]), np.eye(2)[:, :1])

    def test_symmetry(self):
        rng = np.random.default_rng(21)
        for _ in range(10):
            U = _random_subspace(6, 2, rng)
            W = _random_subspace(6, 2, rng)
            a = principal_angles(U, W).angles
            b = principal_angles(W, U).angles
            assert np.max(np.abs(a - b)) <= 1e-10

    def test_basis_invariance(self):
        rng = np.random.default_rng(22)
        U = _random_subspace(7, 3, rng)
        W = _random_subspace(7, 3, rng)
        base = principal_angles(U, W).angles
        for _ in range(5):
            Q = _rotation(3, rng.integers(2**32))
            a = principal_angles(U @ Q, W).angles
            assert np.max(np.abs(a - base)) <= 1e-10

    def test_report_is_ascending_in_range(self):
        rng = np.random.default_rng(23)
        U = _random_subspace(8, 3, rng)
        W = _random_subspace(8, 3, rng)
        rep = principal_angles(U, W)
        assert np.all(np.diff(rep.angles) >= 0)
        assert rep.angles[0] >= 0 and rep.angles[-1] <= np.pi / 2 + 1e-15

    def test_accepts_subspace_objects(self):
        U = Subspace(np.eye(3)[:, :1])
        W = Subspace(np.eye(3)[:, 1:2])
        assert principal_angles(U, W).largest == pytest.approx(np.pi / 2)


class TestSinThetaOperator:
    def test_same_subspace_zero(self):
        rng = np.random.default_rng(30)
        U = _random_subspace(5, 2, rng)
        assert sin_theta_operator(U, U) == 0.0

    def test_fully_orthogonal_subspaces(self):
        U = np.eye(6)[:, [0, 1]]
        W = np.eye(6)[:, [2, 3]]
        assert sin_theta_operator(U, W) == pytest.approx(1.0, abs=1e-12)

    def test_whole_space_is_zero(self):
        rng = np.random.default_rng(31)
        U = _rotation(3, 1)
        W = _rotation(3, 2)
        assert sin_theta_operator(U, W) == 0.0

    def test_route_equivalence_random_pairs(self):
        rng = np.random.default_rng(32)
        count = 0
        for p in (3, 5, 10):
            for d in (1, 2, 3):
                for _ in range(12):
                    U = _random_subspace(p, d, rng)
                    W = _random_subspace(p, d, rng)
                    svd_route = np.sin(principal_angles(U, W).largest)
                    op_route = sin_theta_operator(U, W)
                    assert abs(svd_route - op_route) <= 1e-8
                    count += 1
        assert count >= 100


class TestCovariancePerturbation:
    def test_deterministic_covariance_shift_bound(self):
        # replacing m rows moves the winsorized covariance by at most (m/n) r^2
        rng = np.random.default_rng(40)
        for trial in range(25):
            n = int(rng.integers(20, 120))
            p = int(rng.integers(2, 7))
            r = float(rng.uniform(0.5, 5.0))
            m = int(rng.integers(1, n // 2))
            X0 = rng.standard_normal((n, p)) * rng.uniform(0.5, 4.0)
            Xe = X0.copy()
            Xe[:m] = rng.standard_normal((m, p)) * 1e4
            S0 = sample_covariance(winsorize_dataset(X0, r))
            Se = sample_covariance(winsorize_dataset(Xe, r))
            op_norm = np.max(np.abs(np.linalg.eigvalsh(Se - S0)))
            assert op_norm <= (m / n) * r * r + 1e-10

    def test_weyl_eigenvalue_shift_bound(self):
        rng = np.random.default_rng(41)
        for trial in range(25):
            n = int(rng.integers(20, 120))
            p = int(rng.integers(2, 7))
            r = float(rng.uniform(0.5, 5.0))
            m = int(rng.integers(1, n // 2))
            X0 = rng.standard_normal((n, p)) * rng.uniform(0.5, 4.0)
            Xe = X0.copy()
            Xe[:m] = rng.standard_normal((m, p)) * 1e4
            l0 = np.linalg.eigvalsh(sample_covariance(winsorize_dataset(X0, r)))
            le = np.linalg.eigvalsh(sample_covariance(winsorize_dataset(Xe, r)))
            assert np.max(np.abs(le - l0)) <= (m / n) * r * r + 1e-10


class TestFitEquivariance:
    def test_rotation_equivariance(self):
        rng = np.random.default_rng(50)
        X = rng.standard_normal((80, 5)) * np.array([4.0, 2.0, 1.0, 0.5, 0.25])
        spec = RadiusSpec.fixed(3.0)
        for seed in range(3):
            R = _rotation(5, seed)
            fit_rot = fit_pc_subspace(X @ R.T, 2, spec)
            fit_raw = fit_pc_subspace(X, 2, spec)
            rotated, _ = np.linalg.qr(R @ fit_raw.basis)
            assert sin_theta_operator(fit_rot.basis, rotated) <= 1e-7
