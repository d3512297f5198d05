import numpy as np
import pytest

from railtdl import MarkovChain2, StatePath, estimate_chain, sample_path, stationary


class TestStationary:
    def test_table_tap2(self):
        # closed form 0.0773 / (0.0773 + 0.0515)
        chain = MarkovChain2(0.9227, 0.9485, 0.9209)
        assert stationary(chain) == pytest.approx(0.6002, abs=1e-4)

    def test_always_on(self):
        assert stationary(MarkovChain2(0.0, 1.0, 1.0)) == 1.0

    def test_symmetric(self):
        assert stationary(MarkovChain2(0.5, 0.5, 0.3)) == 0.5

    def test_both_absorbing_returns_start(self):
        assert stationary(MarkovChain2(1.0, 1.0, 0.25)) == 0.25


class TestSamplePath:
    def test_absorbing_alive(self):
        path = sample_path(MarkovChain2(0.0, 1.0, 1.0), 1000, 1)
        assert np.all(path.states == 1)

    def test_absorbing_dead(self):
        path = sample_path(MarkovChain2(1.0, 0.0, 0.0), 1000, 1)
        assert np.all(path.states == 0)

    def test_occupancy_converges(self):
        chain = MarkovChain2(0.9227, 0.9485, 0.9209)
        path = sample_path(chain, 1_000_000, 99)
        assert path.occupancy() == pytest.approx(stationary(chain), abs=0.01)

    def test_deterministic(self):
        chain = MarkovChain2(0.8, 0.7, 0.5)
        a = sample_path(chain, 5000, 123)
        b = sample_path(chain, 5000, 123)
        assert np.array_equal(a.states, b.states)
        c = sample_path(chain, 5000, 124)
        assert not np.array_equal(a.states, c.states)

    def test_single_step(self):
        assert len(sample_path(MarkovChain2(0.5, 0.5, 1.0), 1, 0)) == 1

    def test_zero_steps_rejected(self):
        with pytest.raises(ValueError):
            sample_path(MarkovChain2(0.5, 0.5, 0.5), 0, 0)


class TestStatePath:
    def test_rejects_non_binary(self):
        with pytest.raises(ValueError):
            StatePath(np.array([0, 1, 2]))

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            StatePath(np.array([], dtype=np.uint8))


class TestEstimateChain:
    def test_hand_counted_path(self):
        # pairs: (0,0) (0,0) (0,1) (1,1) (1,1)
        est = estimate_chain(StatePath(np.array([0, 0, 0, 1, 1, 1])))
        assert (est.n00, est.n01, est.n10, est.n11) == (2, 1, 0, 2)
        assert est.chain.p00 == pytest.approx(2 / 3)
        assert est.chain.p11 == 1.0
        assert est.chain.p1_init == 0.5
        assert est.undefined_rows == ()

    def test_all_ones_flags_dead_row(self):
        est = estimate_chain(StatePath(np.ones(100, dtype=np.uint8)))
        assert est.chain.p11 == 1.0
        assert est.chain.p00 == 1.0  # convention for a never-visited source
        assert est.undefined_rows == (0,)
        assert est.chain.p1_init == 1.0

    def test_counts_cover_all_transitions(self):
        path = sample_path(MarkovChain2(0.7, 0.8, 0.5), 10_000, 5)
        est = estimate_chain(path)
        assert est.n_transitions == len(path) - 1

    def test_round_trip_table_chain(self):
        chain = MarkovChain2(0.9227, 0.9485, 0.9209)
        est = estimate_chain(sample_path(chain, 100_000, 17))
        assert est.chain.p00 == pytest.approx(chain.p00, abs=0.02)
        assert est.chain.p11 == pytest.approx(chain.p11, abs=0.02)

    def test_too_short_rejected(self):
        with pytest.raises(ValueError):
            estimate_chain(StatePath(np.array([1])))


def test_round_trip_property_grid():
    # >= 95% of (chain, seed) combinations recover both probabilities
    # within +-0.02 at 1e5 steps
    rng = np.random.default_rng(7)
    hits = trials = 0
    for _ in range(40):
        p00, p11 = rng.uniform(0.05, 0.95, 2)
        chain = MarkovChain2(p00, p11, 0.5)
        est = estimate_chain(sample_path(chain, 100_000, int(rng.integers(1 << 31))))
        trials += 1
        ok = (abs(est.chain.p00 - p00) <= 0.02 and abs(est.chain.p11 - p11) <= 0.02)
        hits += int(ok)
    assert hits / trials >= 0.95
