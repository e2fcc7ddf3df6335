import numpy as np
import pytest

from cogbench import factors as fa


def block_model(P, I, seed, primary=(0.65, 0.85), cross=0.1):
    """Synthetic orthogonal-factor loadings with balanced primary blocks."""
    g = np.random.default_rng(seed)
    lam = g.uniform(-cross, cross, size=(P, I))
    bounds = np.linspace(0, P, I + 1).astype(int)
    for j in range(I):
        lam[bounds[j]:bounds[j + 1], j] = g.uniform(*primary,
                                                    size=bounds[j + 1] - bounds[j])
    comm = (lam ** 2).sum(axis=1)
    scale = np.sqrt(np.minimum(1.0, 0.9 / comm))
    lam *= scale[:, None]
    uniq = 1.0 - (lam ** 2).sum(axis=1)
    return lam, uniq


def exact_sigma(lam, uniq):
    return lam @ lam.T + np.diag(uniq)


class TestCorrelation:
    def test_identical_columns_correlate_perfectly(self):
        g = np.random.default_rng(1)
        x = g.normal(size=100)
        y = np.column_stack([x, x, g.normal(size=100)])
        corr = fa.correlation(y)
        assert corr.sigma[0, 1] == pytest.approx(1.0, abs=1e-12)

    def test_independent_columns_have_small_correlations(self):
        # sampling-error oracle: |rho| ~ 1/sqrt(N)
        N = 10_000
        y = np.random.default_rng(2).normal(size=(N, 4))
        corr = fa.correlation(y)
        off = corr.sigma[~np.eye(4, dtype=bool)]
        assert np.abs(off).max() < 0.05

    def test_perfect_linear_dependence(self):
        y = np.array([[0.0, 0.0], [1.0, 2.0], [2.0, 4.0]])
        corr = fa.correlation(y)
        assert corr.sigma[0, 1] == pytest.approx(1.0, abs=1e-12)

    def test_single_row_rejected(self):
        with pytest.raises(ValueError, match="at least 2"):
            fa.correlation(np.ones((1, 3)))

    def test_constant_column_dropped_with_warning(self):
        g = np.random.default_rng(3)
        y = np.column_stack([g.normal(size=50), np.full(50, 7.0), g.normal(size=50)])
        with pytest.warns(UserWarning, match="constant"):
            corr = fa.correlation(y, labels=["a", "b", "c"])
        assert corr.dropped == ["b"]
        assert corr.labels == ["a", "c"]
        assert corr.sigma.shape == (2, 2)

    def test_exact_symmetry_and_unit_diagonal(self):
        y = np.random.default_rng(4).normal(size=(60, 6))
        corr = fa.correlation(y)
        assert np.array_equal(corr.sigma, corr.sigma.T)
        assert np.array_equal(np.diag(corr.sigma), np.ones(6))


class TestExtract:
    def test_identity_keeps_no_factors(self):
        m = fa.extract(np.eye(5))
        assert m.retained == 0
        assert m.converged
        assert np.allclose(m.uniquenesses, 1.0)

    def test_known_three_factor_model_recovered(self):
        lam_true, uniq_true = block_model(P=9, I=3, seed=0, cross=0.0)
        m = fa.extract(exact_sigma(lam_true, uniq_true))
        assert m.retained == 3
        rotated, _ = fa.varimax(m.loadings)
        _, cong = fa.align_loadings(rotated, lam_true)
        assert cong.min() >= 0.98

    def test_rank_one_sign_vector_case(self):
        # sigma = 0.64 uu' + 0.36 I with u in {-1, +1}^P has the single
        # factor 0.8 u (eigenvalue 0.64 P on the reduced matrix)
        P = 9
        u = np.array([1, -1, 1, 1, -1, 1, -1, 1, 1.0])
        sigma = 0.64 * np.outer(u, u) + 0.36 * np.eye(P)
        m = fa.extract(sigma)
        assert m.retained == 1
        assert np.allclose(m.loadings[:, 0], 0.8 * u, atol=1e-6)
        assert np.allclose(m.uniquenesses, 0.36, atol=1e-6)

    def test_not_psd_rejected(self):
        bad = np.array([[1.0, 2.0], [2.0, 1.0]])
        with pytest.raises(ValueError, match="positive semidefinite"):
            fa.extract(bad)

    def test_extraction_is_deterministic(self):
        lam_true, uniq_true = block_model(P=12, I=3, seed=5)
        sigma = exact_sigma(lam_true, uniq_true)
        a = fa.extract(sigma)
        b = fa.extract(sigma)
        assert np.array_equal(a.loadings, b.loadings)
        assert np.array_equal(a.uniquenesses, b.uniquenesses)
        assert a.iterations == b.iterations

    def test_retained_count_invariant_under_column_permutation(self):
        lam_true, uniq_true = block_model(P=10, I=3, seed=6)
        sigma = exact_sigma(lam_true, uniq_true)
        perm = np.random.default_rng(7).permutation(10)
        m1 = fa.extract(sigma)
        m2 = fa.extract(sigma[np.ix_(perm, perm)])
        assert m1.retained == m2.retained
        assert np.allclose(np.sort(m1.eigenvalues), np.sort(m2.eigenvalues), atol=1e-8)

    def test_heywood_guard_keeps_uniqueness_positive(self):
        # two near-duplicate variables push communalities above 1
        g = np.random.default_rng(8)
        x = g.normal(size=(200, 1))
        y = np.column_stack([x, x + 1e-6 * g.normal(size=(200, 1)),
                             g.normal(size=(200, 2))])
        corr = fa.correlation(y)
        m = fa.extract(corr)
        assert m.uniquenesses.min() >= fa.UNIQUENESS_FLOOR - 1e-15

    def test_g_loadings_match_rank_one_run(self):
        lam_true, uniq_true = block_model(P=8, I=2, seed=9)
        sigma = exact_sigma(lam_true, uniq_true)
        m = fa.extract(sigma)
        forced = fa.extract(sigma, force_factors=1, with_g=False)
        assert np.allclose(m.g_loadings, forced.loadings[:, 0], atol=1e-10)


class TestEigenContract:
    def test_reconstruction_and_orthonormality(self):
        lam_true, uniq_true = block_model(P=14, I=4, seed=10)
        sigma = exact_sigma(lam_true, uniq_true)
        m = fa.extract(sigma)
        A, D = m.eigenvectors, m.eigenvalues
        assert np.abs(A.T @ A - np.eye(A.shape[1])).max() < 1e-10
        reduced = sigma - np.diag(m.uniquenesses)
        evals_signed = np.linalg.eigvalsh(reduced)[::-1]
        recon = A @ np.diag(evals_signed) @ A.T
        assert np.linalg.norm(recon - reduced) < 1e-8


class TestVarimax:
    def test_identity_on_single_column(self):
        lam = np.arange(5.0)[:, None]
        rotated, rot = fa.varimax(lam)
        assert np.array_equal(rotated, lam)
        assert np.array_equal(rot, np.eye(1))

    def test_fixed_point(self):
        lam, _ = block_model(P=10, I=2, seed=11, cross=0.0)
        first, _ = fa.varimax(lam)
        second, _ = fa.varimax(first)
        assert np.abs(second - first).max() < 1e-8

    def test_criterion_never_decreases(self):
        g = np.random.default_rng(12)
        lam = g.normal(size=(12, 3))
        rotated, _ = fa.varimax(lam)
        assert fa.varimax_criterion(rotated) >= fa.varimax_criterion(lam) - 1e-12

    def test_rotation_preserves_common_variance(self):
        g = np.random.default_rng(13)
        lam = g.normal(size=(6, 2))
        rotated, rot = fa.varimax(lam)
        assert np.abs(rotated @ rotated.T - lam @ lam.T).max() < 1e-10
        assert np.abs(rot.T @ rot - np.eye(2)).max() < 1e-10

    def test_largest_loading_per_column_is_positive(self):
        g = np.random.default_rng(14)
        rotated, _ = fa.varimax(g.normal(size=(9, 3)))
        idx = np.abs(rotated).argmax(axis=0)
        assert all(rotated[idx[j], j] > 0 for j in range(3))


class TestScores:
    def test_zero_row_scores_zero(self):
        lam_true, uniq_true = block_model(P=6, I=2, seed=15)
        sigma = exact_sigma(lam_true, uniq_true)
        scores = fa.factor_scores(np.zeros((1, 6)), sigma, lam_true)
        assert np.array_equal(scores, np.zeros((1, 2)))

    def test_noiseless_single_factor_scores_recover_g(self):
        g = np.random.default_rng(16)
        n = 80
        common = g.normal(size=n)
        a = np.array([0.9, -0.7, 0.5, 0.8])
        y = np.outer(common, a)
        corr = fa.correlation(y)
        m = fa.extract(corr)
        assert m.retained == 1
        y_std = (y - y.mean(axis=0)) / y.std(axis=0, ddof=1)
        scores = fa.factor_scores(y_std, corr.sigma, m.loadings)[:, 0]
        r = np.corrcoef(scores, common)[0, 1]
        assert abs(r) == pytest.approx(1.0, abs=1e-9)

    def test_duplicated_rows_get_identical_scores(self):
        lam_true, uniq_true = block_model(P=5, I=2, seed=17)
        sigma = exact_sigma(lam_true, uniq_true)
        row = np.random.default_rng(18).normal(size=5)
        scores = fa.factor_scores(np.vstack([row, row]), sigma, lam_true)
        assert np.array_equal(scores[0], scores[1])

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ValueError, match="mismatch"):
            fa.factor_scores(np.zeros((3, 4)), np.eye(5), np.zeros((5, 2)))


class TestPca:
    def test_identity_spectrum(self):
        m = fa.pca(np.eye(5))
        assert np.allclose(m.eigenvalues, 1.0)
        assert m.retained == 0  # strict > 1 keeps nothing at exactly 1

    def test_equicorrelation_top_eigenvalue(self):
        # closed form: 1 + (P-1) rho for the common component
        P, rho = 4, 0.5
        sigma = np.full((P, P), rho)
        np.fill_diagonal(sigma, 1.0)
        m = fa.pca(sigma)
        assert m.eigenvalues[0] == pytest.approx(1 + 3 * rho, abs=1e-12)
        assert m.retained == 1

    def test_unit_norm_rank_one_boundary(self):
        u = np.ones(5) / np.sqrt(5)
        sigma = 0.64 * np.outer(u, u) + 0.36 * np.eye(5)
        m = fa.pca(sigma)
        assert m.eigenvalues[0] == pytest.approx(1.0, abs=1e-12)
        assert m.retained == 0


class TestConfirmatory:
    def test_exact_three_factor_fit(self):
        lam_true, uniq_true = block_model(P=12, I=3, seed=19, cross=0.05)
        sigma = exact_sigma(lam_true, uniq_true)
        fit = fa.confirmatory_fit(sigma, 3)
        assert fit.rmsr < 0.01

    def test_underfactoring_fits_worse(self):
        lam_true, uniq_true = block_model(P=12, I=3, seed=19, cross=0.05)
        sigma = exact_sigma(lam_true, uniq_true)
        assert fa.confirmatory_fit(sigma, 1).rmsr > fa.confirmatory_fit(sigma, 3).rmsr

    def test_identity_single_factor_explains_one_over_p(self):
        fit = fa.confirmatory_fit(np.eye(5), 1)
        assert fit.explained_variance == pytest.approx(0.2, abs=1e-12)

    def test_hypothesis_must_leave_room(self):
        with pytest.raises(ValueError):
            fa.confirmatory_fit(np.eye(4), 4)


class TestAlignment:
    def test_congruence_of_identical_columns_is_one(self):
        lam, _ = block_model(P=8, I=2, seed=20)
        assert np.allclose(np.diag(fa.congruence_matrix(lam, lam)), 1.0)

    def test_alignment_undoes_permutation_and_sign(self):
        lam, _ = block_model(P=9, I=3, seed=21)
        shuffled = lam[:, [2, 0, 1]] * np.array([-1, 1, -1])
        aligned, cong = fa.align_loadings(shuffled, lam)
        assert np.allclose(aligned, lam, atol=1e-12)
        assert cong.min() == pytest.approx(1.0, abs=1e-12)


def test_sampled_recovery_short_version():
    # small-scale version of the recovery gate: sampled rows instead of the
    # exact covariance
    g = np.random.default_rng(22)
    lam_true, uniq_true = block_model(P=20, I=3, seed=22, cross=0.05)
    n = 400
    x = g.normal(size=(n, 3))
    y = x @ lam_true.T + g.normal(size=(n, 20)) * np.sqrt(uniq_true)
    corr = fa.correlation(y)
    m = fa.extract(corr)
    assert m.retained == 3
    rotated, _ = fa.varimax(m.loadings)
    _, cong = fa.align_loadings(rotated, lam_true)
    assert cong.min() >= 0.95
