"""Sampler tests: covariance law, determinism, scaling invariances."""

import numpy as np
import pytest

from wzfbm import (
    CholeskyFactorizationError,
    TimeGrid,
    covariance,
    empirical_covariance,
    generate_path,
)
from wzfbm.fbm import path_rng


def paths_matrix(grid, H, n_paths, seed, method, m=1):
    return np.array(
        [generate_path(grid, H, m, seed, rep, method).values for rep in range(n_paths)]
    )


class TestCovariance:
    def test_unit_diagonal(self):
        for H in (0.2, 0.5, 0.8):
            assert covariance(1.0, 1.0, H) == pytest.approx(1.0)

    def test_brownian_reduces_to_min(self):
        assert covariance(1.0, 2.0, 0.5) == pytest.approx(1.0)
        assert covariance(0.3, 0.7, 0.5) == pytest.approx(0.3)

    def test_diagonal_power(self):
        for H in (0.3, 0.6, 0.9):
            for t in (0.25, 1.0, 2.5):
                assert covariance(t, t, H) == pytest.approx(t ** (2 * H))

    def test_negative_time_rejected(self):
        with pytest.raises(ValueError):
            covariance(-0.1, 1.0, 0.5)

    def test_bad_hurst_rejected(self):
        for H in (0.0, 1.0, -0.3, 1.7):
            with pytest.raises(ValueError):
                covariance(1.0, 1.0, H)


class TestTimeGrid:
    def test_basic(self):
        grid = TimeGrid(2.0, 8)
        assert grid.step == pytest.approx(0.25)
        times = grid.times()
        assert times[0] == 0.0 and times[-1] == 2.0
        assert np.allclose(np.diff(times), 0.25)

    def test_extension_preserves_step(self):
        grid = TimeGrid(1.0, 2048)
        ext = grid.extended(256)
        assert ext.n == 2304
        assert ext.step == pytest.approx(grid.step, rel=1e-15)

    def test_invalid(self):
        with pytest.raises(ValueError):
            TimeGrid(0.0, 10)
        with pytest.raises(ValueError):
            TimeGrid(1.0, 1)

    def test_index_of_rejects_off_grid(self):
        grid = TimeGrid(1.0, 10)
        assert grid.index_of(0.3) == 3
        with pytest.raises(ValueError):
            grid.index_of(0.33)


class TestDeterminism:
    def test_pure_function_of_inputs(self):
        grid = TimeGrid(1.0, 128)
        a = generate_path(grid, 0.7, m=2, seed=11, replicate=3, method="circulant")
        b = generate_path(grid, 0.7, m=2, seed=11, replicate=3, method="circulant")
        assert np.array_equal(a.values, b.values)

    def test_replicates_schedule_independent(self):
        # drawing replicate 5 first or last gives the same stream
        grid = TimeGrid(1.0, 64)
        direct = generate_path(grid, 0.6, seed=2, replicate=5)
        for other in (0, 9, 1):
            generate_path(grid, 0.6, seed=2, replicate=other)
        again = generate_path(grid, 0.6, seed=2, replicate=5)
        assert np.array_equal(direct.values, again.values)

    def test_distinct_streams(self):
        grid = TimeGrid(1.0, 64)
        a = generate_path(grid, 0.6, seed=2, replicate=0)
        b = generate_path(grid, 0.6, seed=2, replicate=1)
        c = generate_path(grid, 0.6, seed=3, replicate=0)
        assert not np.array_equal(a.values, b.values)
        assert not np.array_equal(a.values, c.values)

    def test_rng_is_counter_keyed(self):
        x = path_rng(7, 42).standard_normal(4)
        y = path_rng(7, 42).standard_normal(4)
        assert np.array_equal(x, y)


class TestPathLaw:
    def test_paths_start_at_zero_and_shape(self):
        grid = TimeGrid(1.0, 100)
        p = generate_path(grid, 0.4, m=3, seed=0)
        assert p.values.shape == (3, 101)
        assert np.all(p.values[:, 0] == 0.0)
        assert not p.values.flags.writeable

    def test_brownian_increment_variance(self):
        # H = 1/2: Var(w(t_{k+1}) - w(t_k)) = step
        grid = TimeGrid(1.0, 16)
        mat = paths_matrix(grid, 0.5, 4000, seed=21, method="circulant")[:, 0, :]
        incs = np.diff(mat, axis=1)
        var = incs.var(axis=0, ddof=1)
        se = var * np.sqrt(2.0 / (len(mat) - 1))
        assert np.all(np.abs(var - grid.step) <= 3 * se)

    @pytest.mark.parametrize("H", [0.3, 0.7])
    def test_increment_variance_any_h(self, H):
        # Var(w(t) - w(s)) = |t-s|^{2H}, by expanding the covariance
        grid = TimeGrid(1.0, 8)
        mat = paths_matrix(grid, H, 6000, seed=22, method="circulant")[:, 0, :]
        for i, j in [(0, 8), (2, 6), (1, 8)]:
            d = mat[:, j] - mat[:, i]
            var = d.var(ddof=1)
            se = var * np.sqrt(2.0 / (len(d) - 1))
            expected = (abs(j - i) * grid.step) ** (2 * H)
            assert abs(var - expected) <= 3 * se

    @pytest.mark.parametrize("method", ["circulant", "cholesky"])
    def test_empirical_covariance_matches_analytic(self, method):
        # Monte Carlo oracle against the analytic covariance, 3 SE per entry
        grid = TimeGrid(1.0, 8)
        H = 0.7
        paths = [generate_path(grid, H, 1, 31, rep, method) for rep in range(12_000)]
        times = grid.times()
        for i, j in [(4, 4), (2, 7), (8, 8), (1, 5)]:
            est, se = empirical_covariance(paths, i, j)
            assert abs(est - covariance(times[i], times[j], H)) <= 3 * se

    def test_components_independent(self):
        grid = TimeGrid(1.0, 8)
        mat = paths_matrix(grid, 0.7, 6000, seed=5, method="circulant", m=2)
        prod = mat[:, 0, -1] * mat[:, 1, -1]
        se = prod.std(ddof=1) / np.sqrt(len(prod))
        assert abs(prod.mean()) <= 3 * se

    def test_self_similarity_in_law(self):
        # c^{-H} w(ct) has the law of w(t): compare empirical variances
        H, c = 0.7, 4.0
        base = TimeGrid(1.0, 16)
        scaled = TimeGrid(c, 16)
        m1 = paths_matrix(base, H, 5000, seed=8, method="circulant")[:, 0, -1]
        m2 = paths_matrix(scaled, H, 5000, seed=9, method="circulant")[:, 0, -1] * c**-H
        v1, v2 = m1.var(ddof=1), m2.var(ddof=1)
        se = np.sqrt((v1 * np.sqrt(2 / len(m1))) ** 2 + (v2 * np.sqrt(2 / len(m2))) ** 2)
        assert abs(v1 - v2) <= 3 * se

    def test_stationary_increments(self):
        # Var(w(t+h) - w(t)) does not depend on t
        H = 0.3
        grid = TimeGrid(1.0, 32)
        mat = paths_matrix(grid, H, 5000, seed=13, method="circulant")[:, 0, :]
        lag = 8
        variances = [
            (mat[:, t + lag] - mat[:, t]).var(ddof=1) for t in (0, 8, 16, 24)
        ]
        se = max(variances) * np.sqrt(2 / (len(mat) - 1))
        assert max(variances) - min(variances) <= 3 * se * np.sqrt(2)


class TestErrors:
    def test_bad_dimension(self):
        with pytest.raises(ValueError):
            generate_path(TimeGrid(1.0, 8), 0.5, m=0)

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            generate_path(TimeGrid(1.0, 8), 0.5, method="wavelet")

    def test_empty_collection(self):
        with pytest.raises(ValueError):
            empirical_covariance([], 0, 0)

    def test_mixed_collection(self):
        a = generate_path(TimeGrid(1.0, 8), 0.5, seed=1)
        b = generate_path(TimeGrid(1.0, 8), 0.7, seed=1)
        with pytest.raises(ValueError):
            empirical_covariance([a, b], 1, 1)

    def test_cholesky_failure_names_grid_size(self, monkeypatch):
        import wzfbm.fbm as fbm_mod

        def bad_autocov(n, H):
            return -np.ones(n)  # certainly not positive definite

        monkeypatch.setattr(fbm_mod, "_fgn_autocov", bad_autocov)
        fbm_mod._increment_cholesky.cache_clear()
        try:
            with pytest.raises(CholeskyFactorizationError, match="7x7"):
                fbm_mod._increment_cholesky(7, 0.31)
        finally:
            fbm_mod._increment_cholesky.cache_clear()

    def test_circulant_fallback_sets_flag_and_warns(self, monkeypatch):
        import wzfbm.fbm as fbm_mod

        monkeypatch.setattr(
            fbm_mod, "_circulant_coeffs", lambda n, H: (np.empty(0), False)
        )
        with pytest.warns(RuntimeWarning, match="falling back"):
            p = generate_path(TimeGrid(1.0, 8), 0.5, seed=0, method="circulant")
        assert p.fallback
        assert np.all(np.isfinite(p.values))


class TestEmpiricalCovarianceEdge:
    def test_zero_paths(self):
        grid = TimeGrid(1.0, 8)
        zero = [
            generate_path(grid, 0.5, seed=0, replicate=r) for r in range(3)
        ]
        # indices at the origin: w(0) = 0 exactly
        est, se = empirical_covariance(zero, 0, 0)
        assert est == 0.0 and se == 0.0

    def test_terminal_variance_brownian(self):
        grid = TimeGrid(1.0, 16)
        paths = [generate_path(grid, 0.5, 1, 77, rep) for rep in range(8000)]
        est, se = empirical_covariance(paths, 16, 16)
        assert abs(est - 1.0) <= 3 * se
