import math
from dataclasses import replace

import numpy as np
import pytest

from densify.errors import InvalidArgumentError
from densify.estimates import CoverageEstimate
from densify.linklevel import (
    Fading,
    SimConfig,
    coverage_probability,
    link_sinr,
    sample_fading,
    single_slope_upm_coverage,
    spatial_throughput,
    throughput_curve,
    truncation_check,
)
from densify.pool import TrialPool
from densify.propagation import make_model

BPM_DUAL = make_model("bpm", [1.0], [2.0, 4.0])
UPM_SINGLE = make_model("upm", [], [4.0])


def small_config(**kw) -> SimConfig:
    base = dict(density_per_km2=1e4, model=BPM_DUAL, trials=400, seed=11)
    base.update(kw)
    return SimConfig(**base)


# --------------------------------------------------------------------------- #
# fading & single-trial SINR                                                  #
# --------------------------------------------------------------------------- #
def test_no_fading_is_unity():
    rng = np.random.default_rng(0)
    assert sample_fading(Fading.NONE, rng) == 1.0
    assert np.all(sample_fading("none", rng, size=5) == 1.0)


def test_rayleigh_fading_moments():
    draws = sample_fading(Fading.RAYLEIGH, np.random.default_rng(1), size=100_000)
    assert abs(draws.mean() - 1.0) <= 0.01
    assert draws.var() == pytest.approx(1.0, abs=0.03)
    assert np.all(draws >= 0)


def test_single_bs_has_infinite_sinr():
    assert link_sinr(BPM_DUAL, np.array([3.0]), np.array([1.0])) == math.inf


def test_single_bs_with_noise_is_finite():
    assert link_sinr(BPM_DUAL, np.array([0.0]), np.array([1.0]), noise_ratio=0.5) == pytest.approx(2.0)


@pytest.mark.parametrize("model", [BPM_DUAL, UPM_SINGLE, make_model("bpm", [5.0], [2.0, 4.0], form="unit_clamp")])
def test_equidistant_pair_gives_unit_sinr(model):
    assert link_sinr(model, np.array([2.0, 2.0]), np.array([1.0, 1.0])) == pytest.approx(1.0)


def test_hand_built_three_points():
    sinr = link_sinr(UPM_SINGLE, np.array([2.0, 1.0, 4.0]), np.array([1.0, 0.5, 2.0]))
    # serving is the 1 m BS: 0.5 / (2^-4 + 2 * 4^-4)
    assert sinr == pytest.approx(0.5 / (1 / 16 + 2 / 256), rel=1e-12)


def test_nearest_serves_even_when_faded_down():
    sinr = link_sinr(UPM_SINGLE, np.array([1.0, 1.1]), np.array([0.01, 5.0]))
    assert sinr < 1.0


# --------------------------------------------------------------------------- #
# coverage                                                                    #
# --------------------------------------------------------------------------- #
def test_config_validation():
    with pytest.raises(InvalidArgumentError):
        small_config(density_per_km2=0.0)
    with pytest.raises(InvalidArgumentError):
        small_config(sinr_threshold_db=math.inf)
    with pytest.raises(InvalidArgumentError):
        coverage_probability(small_config(trials=50))


def test_noise_ratio():
    assert small_config().noise_ratio == 0.0
    cfg = small_config(include_noise=True, noise_dbm=-100.0, tx_power_dbm=0.0)
    assert cfg.noise_ratio == pytest.approx(1e-10)


def test_coverage_limits_in_threshold():
    assert coverage_probability(small_config(sinr_threshold_db=-60.0)).p_hat > 0.99
    assert coverage_probability(small_config(sinr_threshold_db=60.0)).p_hat < 0.01


def test_coverage_nonincreasing_in_threshold():
    values = [coverage_probability(small_config(sinr_threshold_db=t)).p_hat for t in (-5, 0, 5, 10, 20)]
    assert all(b <= a for a, b in zip(values, values[1:]))


def test_coverage_is_deterministic():
    assert coverage_probability(small_config()) == coverage_probability(small_config())


def test_coverage_independent_of_threads():
    cfg = small_config(trials=500)
    serial = coverage_probability(cfg)
    with TrialPool(threads=3, chunk_size=37) as pool:
        assert coverage_probability(cfg, pool) == serial


def test_spatial_throughput_examples():
    point = spatial_throughput(1e2, CoverageEstimate(p_hat=0.5, std_err=0.01, trials=100), 0.0)
    assert point.st == pytest.approx(5e-5)
    assert point.st_std_err == pytest.approx(1e-6)
    zero = spatial_throughput(1e2, CoverageEstimate.from_counts(0, 100), 0.0)
    assert zero.st == 0.0 and zero.st_std_err == 0.0


def test_throughput_curve_shape_and_rejects_empty():
    curve = throughput_curve(small_config(trials=200), [1e3, 1e4])
    assert [p.density_per_km2 for p in curve] == [1e3, 1e4]
    assert all(p.st >= 0 for p in curve)
    with pytest.raises(InvalidArgumentError):
        throughput_curve(small_config(), [])


# --------------------------------------------------------------------------- #
# oracle                                                                      #
# --------------------------------------------------------------------------- #
def test_closed_form_oracle_values():
    assert single_slope_upm_coverage(4.0, 0.0) == pytest.approx(1 / (1 + math.pi / 4), rel=1e-12)
    assert single_slope_upm_coverage(4.0, 0.0) == pytest.approx(0.5602, abs=1e-4)
    # numeric branch agrees with the closed form next to alpha = 4
    assert single_slope_upm_coverage(4.0 + 1e-9, 5.0) == pytest.approx(single_slope_upm_coverage(4.0, 5.0), rel=1e-6)
    taus = [0.0, 5.0, 10.0]
    for alpha in (3.0, 4.0):
        vals = [single_slope_upm_coverage(alpha, t) for t in taus]
        assert vals[0] > vals[1] > vals[2] > 0


def test_oracle_rejects_small_alpha():
    with pytest.raises(InvalidArgumentError):
        single_slope_upm_coverage(2.0, 0.0)


@pytest.mark.slow
def test_monte_carlo_matches_oracle_alpha4():
    cfg = SimConfig(density_per_km2=1e4, model=UPM_SINGLE, trials=20_000, seed=3)
    estimate = coverage_probability(cfg)
    assert abs(estimate.p_hat - 0.5602) <= 0.01


@pytest.mark.slow
@pytest.mark.parametrize("tau_db", [0.0, 5.0, 10.0])
@pytest.mark.parametrize("alpha", [3.0, 4.0])
def test_monte_carlo_matches_oracle_grid(alpha, tau_db):
    cfg = SimConfig(
        density_per_km2=1e4,
        model=make_model("upm", [], [alpha]),
        sinr_threshold_db=tau_db,
        trials=5_000,
        seed=4,
        # alpha = 3 tails need the wider disk to keep the truncation bias under 0.4 sigma
        window_scale=4.0 if alpha < 4 else 1.0,
    )
    estimate = coverage_probability(cfg)
    assert estimate.within(single_slope_upm_coverage(alpha, tau_db), sigmas=3)


def test_truncation_check_shares_draws():
    cfg = small_config(trials=200)
    base, wide, _ = truncation_check(cfg)
    assert wide == coverage_probability(replace(cfg, window_scale=2.0))
    # dropping far interferers never hurts a trial
    assert base.p_hat >= wide.p_hat


@pytest.mark.slow
def test_window_truncation_check_passes():
    base, wide, ok = truncation_check(small_config(trials=2_000))
    assert ok
    assert abs(base.p_hat - wide.p_hat) <= 2 * math.hypot(base.std_err, wide.std_err)


@pytest.mark.slow
def test_bounded_curve_rises_then_falls():
    curve = throughput_curve(small_config(trials=500), [1e3, 1e5, 1e7])
    low, mid, high = (p.st for p in curve)
    assert mid > low
    assert mid > high


@pytest.mark.slow
def test_fifteen_point_curves_bounded_peaks_unbounded_keeps_rising():
    densities = np.logspace(3, math.log10(3e6), 15)
    upm_dual = make_model("upm", [1.0], [2.0, 4.0])
    with TrialPool(threads=4) as pool:
        bpm = throughput_curve(small_config(trials=5_000), densities, pool)
        upm = throughput_curve(small_config(model=upm_dual, trials=5_000), densities, pool)

    peak = int(np.argmax([p.st for p in bpm]))
    assert 0 < peak < len(bpm) - 1
    top, last = bpm[peak], bpm[-1]
    assert top.st - last.st > 5 * math.hypot(top.st_std_err, last.st_std_err)

    for a, b in zip(upm, upm[1:]):
        assert b.st >= a.st - 3 * math.hypot(a.st_std_err, b.st_std_err), b.density_per_km2
