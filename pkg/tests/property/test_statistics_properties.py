"""Property-based tests for visit statistics, empirical models and augmentation."""

import numpy as np
import pytest
import yaml
from hypothesis import given, settings
from hypothesis import strategies as st

from scal_plus.errors import RewardOutOfRangeError
from scal_plus.models import DiscreteMdp, RandomizedPolicy
from scal_plus.statistics import VisitStatistics, augment, project_policy
from tests.property.strategies import count_tables

NUM_STATES = 3
NUM_ACTIONS = 2

transitions = st.lists(
    st.tuples(
        st.integers(0, NUM_STATES - 1),
        st.integers(0, NUM_ACTIONS - 1),
        st.floats(min_value=0.0, max_value=1.0),
        st.integers(0, NUM_STATES - 1),
    ),
    max_size=60,
)


def from_counts(n_sas: np.ndarray) -> VisitStatistics:
    stats = VisitStatistics(n_sas.shape[0], n_sas.shape[1])
    stats.n_sas = n_sas.copy()
    stats.n_sa = n_sas.sum(axis=2)
    return stats


class TestRecording:
    def test_single_record(self) -> None:
        stats = VisitStatistics(NUM_STATES, NUM_ACTIONS)
        stats.record(0, 1, 0.3, 2)
        assert stats.nu_sa[0, 1] == 1
        assert stats.nu_sas[0, 1, 2] == 1
        assert stats.reward_sum[0, 1] == pytest.approx(0.3)
        assert stats.t == 2

    def test_reward_moments(self) -> None:
        stats = VisitStatistics(NUM_STATES, NUM_ACTIONS)
        stats.record(1, 0, 0.0, 1)
        stats.record(1, 0, 1.0, 1)
        assert stats.reward_sum[1, 0] == 1.0
        assert stats.reward_sq_sum[1, 0] == 1.0

    def test_end_episode_folds_counts(self) -> None:
        stats = VisitStatistics(NUM_STATES, NUM_ACTIONS)
        stats.record(0, 0, 1.0, 1)
        stats.record(1, 1, 0.0, 0)
        stats.end_episode()
        assert stats.n_sa[0, 0] == 1 and stats.n_sa[1, 1] == 1
        assert stats.n_sas[0, 0, 1] == 1
        assert not stats.nu_sa.any()
        assert not stats.nu_sas.any()
        assert stats.t_k == stats.t == 3

    def test_reward_out_of_range(self) -> None:
        stats = VisitStatistics(NUM_STATES, NUM_ACTIONS, r_max=1.0)
        with pytest.raises(RewardOutOfRangeError):
            stats.record(0, 0, 1.5, 0)

    def test_rejects_empty_spaces(self) -> None:
        with pytest.raises(ValueError):
            VisitStatistics(0, 2)

    @given(transitions)
    @settings(max_examples=100)
    def test_total_counts_are_conserved(self, steps) -> None:
        stats = VisitStatistics(NUM_STATES, NUM_ACTIONS)
        for i, (s, a, r, nxt) in enumerate(steps):
            stats.record(s, a, r, nxt)
            if i % 7 == 6:
                stats.end_episode()
        n_sas, n_sa = stats.total_counts()
        assert n_sa.sum() == len(steps)
        assert np.array_equal(n_sas.sum(axis=2), n_sa)
        assert stats.t == len(steps) + 1


class TestEmpiricalModel:
    def test_unvisited_pair_points_at_reference(self) -> None:
        model = VisitStatistics(NUM_STATES, NUM_ACTIONS).empirical_model(reference_state=2)
        assert model.p_hat[0, 0].tolist() == [0.0, 0.0, 1.0]
        assert model.p_bar[0, 0].tolist() == [0.0, 0.0, 1.0]
        assert model.r_bar[0, 0] == 0.0
        assert model.variance[0, 0] == 0.0

    def test_biased_estimator(self) -> None:
        stats = VisitStatistics(2, 1)
        for nxt in (0, 0, 1):
            stats.record(1, 0, 0.5, nxt)
        model = stats.empirical_model(reference_state=0)
        np.testing.assert_allclose(model.p_bar[1, 0], [2 / 3, 1 / 3])
        np.testing.assert_allclose(model.p_hat[1, 0], [3 / 4, 1 / 4])

    def test_mean_and_variance(self) -> None:
        stats = VisitStatistics(1, 1)
        stats.record(0, 0, 0.0, 0)
        stats.record(0, 0, 1.0, 0)
        model = stats.empirical_model()
        assert model.r_bar[0, 0] == pytest.approx(0.5)
        assert model.variance[0, 0] == pytest.approx(0.25)

    def test_reference_state_out_of_range(self) -> None:
        with pytest.raises(ValueError):
            VisitStatistics(2, 1).empirical_model(reference_state=5)

    @given(count_tables(), st.data())
    @settings(max_examples=100)
    def test_biased_estimator_is_close_to_average(self, n_sas, data) -> None:
        ref = data.draw(st.integers(0, n_sas.shape[0] - 1))
        model = from_counts(n_sas).empirical_model(ref)
        n = n_sas.sum(axis=2)
        np.testing.assert_allclose(model.p_hat.sum(axis=2), 1.0, atol=1e-12)
        distance = np.abs(model.p_hat - model.p_bar).sum(axis=2)
        assert np.all(distance <= 2.0 / (n + 1.0) + 1e-12)
        assert np.all(model.p_hat[:, :, ref] >= 1.0 / (n + 1.0) - 1e-12)

    @given(transitions)
    @settings(max_examples=100)
    def test_variance_within_bounds(self, steps) -> None:
        stats = VisitStatistics(NUM_STATES, NUM_ACTIONS)
        for s, a, r, nxt in steps:
            stats.record(s, a, r, nxt)
        model = stats.empirical_model()
        assert np.all(model.variance >= 0.0)
        # Popoviciu: a variable on [0, r_max] has variance at most r_max^2 / 4
        assert np.all(model.variance <= 0.25 + 1e-12)
        assert np.all((model.r_bar >= 0.0) & (model.r_bar <= 1.0 + 1e-12))


class TestContractionBound:
    def test_no_data(self) -> None:
        assert VisitStatistics(NUM_STATES, NUM_ACTIONS).contraction_bound() == 0.0

    def test_never_reached_reference(self) -> None:
        stats = VisitStatistics(2, 1)
        for _ in range(9):
            stats.record(0, 0, 0.0, 1)
        assert stats.contraction_bound(0) == pytest.approx(0.9)

    @given(count_tables())
    @settings(max_examples=100)
    def test_bound_in_unit_interval(self, n_sas) -> None:
        gamma = from_counts(n_sas).contraction_bound()
        assert 0.0 <= gamma < 1.0


class TestAugment:
    def test_one_state(self) -> None:
        mdp = augment(DiscreteMdp(kernel=[[[1.0]]], mean_reward=[[0.5]], r_max=1.0))
        assert mdp.mean_reward.tolist() == [[0.5, 0.0]]
        assert mdp.kernel.shape == (1, 2, 1)

    def test_duplicates_share_kernel(self, two_state_mdp: DiscreteMdp) -> None:
        mdp = augment(two_state_mdp)
        assert np.array_equal(mdp.kernel[:, :2], mdp.kernel[:, 2:])
        assert not mdp.mean_reward[:, 2:].any()
        assert mdp.r_max == two_state_mdp.r_max


class TestProjectPolicy:
    def test_deterministic_duplicate(self) -> None:
        aug = RandomizedPolicy.deterministic([3], 4)
        assert project_policy(aug).probs.tolist() == [[0.0, 1.0]]

    def test_mixture(self) -> None:
        aug = RandomizedPolicy(probs=[[0.3, 0.5, 0.2, 0.0]])
        np.testing.assert_allclose(project_policy(aug).probs, [[0.5, 0.5]])

    def test_uniform(self) -> None:
        aug = RandomizedPolicy.uniform(2, 6)
        np.testing.assert_allclose(project_policy(aug).probs, np.full((2, 3), 1 / 3))

    def test_odd_action_count(self) -> None:
        with pytest.raises(ValueError):
            project_policy(RandomizedPolicy.uniform(1, 3))


def test_dump_snapshot(tmp_path) -> None:
    stats = VisitStatistics(2, 2)
    stats.record(0, 1, 1.0, 1)
    stats.end_episode()
    path = stats.dump(tmp_path / "stats.yaml")
    data = yaml.safe_load(path.read_text(encoding="utf-8"))
    assert data["n_sa"] == [[0, 1], [0, 0]]
    assert data["t_k"] == 2
    assert data["empirical"]["p_hat"][0][1] == [0.5, 0.5]
