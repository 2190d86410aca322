"""Two-stage search: subset sampling, trials, ranking, refinement."""

import numpy as np
import pytest

from nowkit.errors import AllTrialsFailed
from nowkit.evaluation import default_splits
from nowkit.lstm import Hyperparams
from nowkit.pipeline import TransformOptions
from nowkit.selection import (
    SearchConfig,
    random_search,
    refine_top_k,
    run_trial,
    sample_subset,
)

OPTIONS = TransformOptions(seasonal_adjust=False)
FAST_HYPER = Hyperparams(n_timesteps=12, hidden_size=3, learning_rate=0.02, epochs=30)
FAST_GRID = (FAST_HYPER,)


def search_config(pool, **overrides):
    candidates = tuple(sorted(v for v in pool if v != "target"))
    base = dict(
        candidate_variable_ids=candidates,
        n_trials=4,
        subset_size_range=(2, 3),
        coarse_grid=FAST_GRID,
        fine_grid=FAST_GRID,
        top_k=2,
        seed=11,
    )
    base.update(overrides)
    return SearchConfig(**base)


class TestSampleSubset:
    def test_forced_full_candidate_set(self):
        config = SearchConfig(
            candidate_variable_ids=("a", "b", "c"),
            subset_size_range=(3, 3),
            coarse_grid=FAST_GRID,
            fine_grid=FAST_GRID,
        )
        subset = sample_subset(np.random.default_rng(0), config)
        assert subset == ("a", "b", "c")

    def test_same_rng_state_same_subset(self):
        config = SearchConfig(
            candidate_variable_ids=tuple(f"v{i}" for i in range(10)),
            subset_size_range=(3, 6),
            coarse_grid=FAST_GRID,
            fine_grid=FAST_GRID,
        )
        assert sample_subset(np.random.default_rng(42), config) == \
            sample_subset(np.random.default_rng(42), config)

    def test_inclusion_frequency_uniform(self):
        # 10k draws of size 3 from 10 candidates: each id appears ~3/10
        candidates = tuple(f"v{i}" for i in range(10))
        config = SearchConfig(
            candidate_variable_ids=candidates,
            subset_size_range=(3, 3),
            coarse_grid=FAST_GRID,
            fine_grid=FAST_GRID,
        )
        rng = np.random.default_rng(123)
        counts = {c: 0 for c in candidates}
        n_draws = 10_000
        for _ in range(n_draws):
            for v in sample_subset(rng, config):
                counts[v] += 1
        for c in candidates:
            assert abs(counts[c] / n_draws - 0.3) < 0.02

    def test_sizes_respect_range(self):
        config = SearchConfig(
            candidate_variable_ids=tuple(f"v{i}" for i in range(10)),
            subset_size_range=(2, 5),
            coarse_grid=FAST_GRID,
            fine_grid=FAST_GRID,
        )
        rng = np.random.default_rng(9)
        for _ in range(200):
            assert 2 <= len(sample_subset(rng, config)) <= 5


class TestRunTrial:
    def test_metrics_match_direct_recomputation(self, small_pool):
        pool, informative = small_pool
        subset = informative
        hyper = Hyperparams(n_timesteps=12, hidden_size=3, learning_rate=0.02,
                            epochs=30, seed=77)
        t1 = run_trial("t0", subset, hyper, default_splits(), pool, "target", OPTIONS)
        t2 = run_trial("t0", subset, hyper, default_splits(), pool, "target", OPTIONS)
        assert t1.ok
        assert t1 == t2  # identical (subset, hyper, seed) reproduce exactly

    def test_failed_trial_contained(self, small_pool):
        pool, _ = small_pool
        t = run_trial("t1", ("no_such_variable",), FAST_HYPER,
                      default_splits(), pool, "target", OPTIONS)
        assert not t.ok
        assert t.status.startswith("failed:")

    def test_empty_subset_rejected(self, small_pool):
        pool, _ = small_pool
        with pytest.raises(ValueError):
            run_trial("t2", (), FAST_HYPER, default_splits(), pool, "target", OPTIONS)


class TestRandomSearch:
    def test_single_trial_single_grid_point(self, small_pool):
        pool, _ = small_pool
        config = search_config(pool, n_trials=1)
        report = random_search(config, default_splits(), pool, "target", OPTIONS)
        assert len(report.ranked) + len(report.failed) == 1

    def test_ranking_is_sorted_permutation_of_successes(self, small_pool):
        pool, _ = small_pool
        config = search_config(pool, n_trials=6)
        report = random_search(config, default_splits(), pool, "target", OPTIONS)
        maes = [t.val_mae for t in report.ranked]
        assert maes == sorted(maes)
        ids = sorted(t.trial_id for t in report.all_trials())
        assert len(set(ids)) == len(ids) == 6

    def test_deterministic_given_seed(self, small_pool):
        pool, _ = small_pool
        config = search_config(pool, n_trials=5)
        r1 = random_search(config, default_splits(), pool, "target", OPTIONS)
        r2 = random_search(config, default_splits(), pool, "target", OPTIONS)
        assert r1 == r2

    def test_all_trials_failed_raises(self, small_pool):
        pool, _ = small_pool
        config = SearchConfig(
            candidate_variable_ids=("ghost_1", "ghost_2"),
            n_trials=2,
            subset_size_range=(1, 2),
            coarse_grid=FAST_GRID,
            fine_grid=FAST_GRID,
            seed=3,
        )
        with pytest.raises(AllTrialsFailed):
            random_search(config, default_splits(), pool, "target", OPTIONS)

    def test_subsets_within_bounds(self, small_pool):
        pool, _ = small_pool
        config = search_config(pool, n_trials=8)
        report = random_search(config, default_splits(), pool, "target", OPTIONS)
        candidates = set(config.candidate_variable_ids)
        for t in report.all_trials():
            assert set(t.variables) <= candidates
            assert 2 <= len(t.variables) <= 3


class TestRefineTopK:
    def test_same_grid_winner_no_worse_than_best_coarse(self, small_pool):
        pool, _ = small_pool
        config = search_config(pool, n_trials=5)
        report = random_search(config, default_splits(), pool, "target", OPTIONS)
        winner, refined = refine_top_k(
            report.ranked, config, default_splits(), pool, "target", OPTIONS)
        assert winner.val_mae <= report.ranked[0].val_mae

    def test_winner_subset_among_top_k_coarse_subsets(self, small_pool):
        pool, _ = small_pool
        config = search_config(pool, n_trials=5, top_k=3)
        report = random_search(config, default_splits(), pool, "target", OPTIONS)
        winner, _ = refine_top_k(
            report.ranked, config, default_splits(), pool, "target", OPTIONS)
        top_subsets = {t.variables for t in report.ranked[:3]}
        assert winner.variables in top_subsets

    def test_top_k_one_refines_only_best(self, small_pool):
        pool, _ = small_pool
        config = search_config(pool, n_trials=4, top_k=1)
        report = random_search(config, default_splits(), pool, "target", OPTIONS)
        winner, refined = refine_top_k(
            report.ranked, config, default_splits(), pool, "target", OPTIONS)
        assert {t.variables for t in refined} == {report.ranked[0].variables}

    def test_end_to_end_determinism(self, small_pool):
        pool, _ = small_pool
        config = search_config(pool, n_trials=4)
        outcomes = []
        for _ in range(2):
            report = random_search(config, default_splits(), pool, "target", OPTIONS)
            winner, refined = refine_top_k(
                report.ranked, config, default_splits(), pool, "target", OPTIONS)
            outcomes.append((report, winner, tuple(refined)))
        assert outcomes[0] == outcomes[1]

    def test_winner_beats_median_of_coarse(self, small_pool):
        pool, _ = small_pool
        config = search_config(pool, n_trials=6)
        report = random_search(config, default_splits(), pool, "target", OPTIONS)
        winner, _ = refine_top_k(
            report.ranked, config, default_splits(), pool, "target", OPTIONS)
        maes = sorted(t.val_mae for t in report.ranked)
        median = maes[len(maes) // 2]
        assert winner.val_mae <= median


class TestThreadedExecution:
    def test_threaded_matches_sequential(self, small_pool, monkeypatch):
        pool, _ = small_pool
        config = search_config(pool, n_trials=4)
        monkeypatch.delenv("NOWKIT_THREADS", raising=False)
        sequential = random_search(config, default_splits(), pool, "target", OPTIONS)
        monkeypatch.setenv("NOWKIT_THREADS", "4")
        threaded = random_search(config, default_splits(), pool, "target", OPTIONS)
        assert sequential == threaded
