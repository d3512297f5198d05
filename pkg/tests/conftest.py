import pytest

from railtdl import GenConfig, generate, generate_stationary, preset_5gr, profile_from_params

# Session-scoped traces shared by the statistics/estimator/acceptance tests;
# everything downstream treats them as read-only.

BIG_N = 100_000
BIG_SEED = 20260809


@pytest.fixture(scope="session")
def preset():
    return preset_5gr()


@pytest.fixture(scope="session")
def big_trace(preset):
    """Power-scaled Markov trace, n = 1e5."""
    return generate(preset, GenConfig(n_snapshots=BIG_N, rng_seed=BIG_SEED))


@pytest.fixture(scope="session")
def big_trace_common(preset):
    """Common-lognormal Markov trace, n = 1e5."""
    cfg = GenConfig(n_snapshots=BIG_N, rng_seed=BIG_SEED,
                    amplitude_mode="common-lognormal")
    return generate(preset, cfg)


@pytest.fixture(scope="session")
def baseline_trace(preset):
    """Stationary baseline with the preset's delays/powers, n = 1e5."""
    profile = profile_from_params(preset)
    return generate_stationary(
        profile, preset.max_doppler_hz, BIG_N, BIG_SEED,
        snapshot_interval_s=preset.snapshot_interval_s,
        delay_resolution_s=preset.delay_resolution_s,
    )
