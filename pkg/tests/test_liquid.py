from __future__ import annotations

import math

import numpy as np
import pytest

from bcibot.liquid import (
    CupModel,
    LevelFilter,
    LiquidObservation,
    PerceptionError,
    apparent_depth,
    filter_step,
    pour_session,
    true_depth,
)

from .oracles import virtual_image_depth


def test_n1_is_identity_for_any_angle():
    for angle in (0.0, 0.2, 0.7, 1.2):
        obs = LiquidObservation(apparent_depth=0.05, view_angle=angle, refractive_index=1.0)
        assert true_depth(obs) == pytest.approx(0.05, rel=1e-12)


def test_normal_incidence_water():
    obs = LiquidObservation(apparent_depth=0.030, view_angle=0.0, refractive_index=1.33)
    assert true_depth(obs) == pytest.approx(0.0399, abs=5e-5)


def test_matches_ray_trace_oracle_at_30_degrees():
    n = 1.33
    theta = math.radians(30.0)
    for depth in (0.01, 0.03, 0.08):
        d_apparent = virtual_image_depth(depth, theta, n)
        obs = LiquidObservation(apparent_depth=d_apparent, view_angle=theta, refractive_index=n)
        assert true_depth(obs) == pytest.approx(depth, rel=1e-9)


def test_forward_and_inverse_consistent():
    for angle in (0.0, 0.3, 0.9):
        for n in (1.0, 1.33, 1.5):
            d = 0.042
            obs = LiquidObservation(
                apparent_depth=apparent_depth(d, angle, n), view_angle=angle, refractive_index=n
            )
            assert true_depth(obs) == pytest.approx(d, rel=1e-12)


def test_true_depth_monotone_in_apparent_depth():
    prev = -1.0
    for d_a in np.linspace(0.0, 0.1, 25):
        obs = LiquidObservation(apparent_depth=float(d_a), view_angle=0.4, refractive_index=1.33)
        d = true_depth(obs)
        assert d > prev
        prev = d


def test_grazing_angle_rejected():
    with pytest.raises(PerceptionError):
        LiquidObservation(apparent_depth=0.03, view_angle=math.pi / 2, refractive_index=1.33)


# -- Kalman filter ---------------------------------------------------------------


def test_nonpositive_noise_rejected():
    with pytest.raises(PerceptionError):
        LevelFilter(estimate=0, variance=1e-4, process_noise=0.0, measurement_noise=1e-6)
    with pytest.raises(PerceptionError):
        LevelFilter(estimate=0, variance=1e-4, process_noise=1e-6, measurement_noise=-1.0)


def test_estimate_converges_to_constant_level():
    rng = np.random.default_rng(0)
    truth = 0.05
    sigma = 0.005
    f = LevelFilter(estimate=0.0, variance=1.0, process_noise=1e-10, measurement_noise=sigma**2)
    for _ in range(50):
        f = filter_step(f, truth + rng.normal(0, sigma), inflow=0.0)
    assert abs(f.estimate - truth) < 1e-3


def test_update_shrinks_variance():
    f = LevelFilter(estimate=0.0, variance=1e-2, process_noise=1e-8, measurement_noise=1e-4)
    stepped = filter_step(f, measurement=0.01, inflow=0.0)
    predicted_var = f.variance + f.process_noise
    assert stepped.variance < predicted_var
    assert stepped.variance > 0


def test_infinite_measurement_noise_freezes_estimate():
    f = LevelFilter(estimate=0.02, variance=1e-4, process_noise=1e-10, measurement_noise=1e12)
    stepped = filter_step(f, measurement=0.9, inflow=0.0)
    assert stepped.estimate == pytest.approx(0.02, abs=1e-6)


def test_nonfinite_inputs_rejected():
    f = LevelFilter(estimate=0.0, variance=1e-4, process_noise=1e-8, measurement_noise=1e-6)
    with pytest.raises(PerceptionError):
        filter_step(f, measurement=float("nan"), inflow=0.0)


# -- pour sessions ------------------------------------------------------------------


CUP = CupModel(interior_height=0.10, fill_target=0.06)


def test_zero_noise_stops_within_one_timestep_of_crossing():
    r = pour_session(
        CUP, flow_rate=0.015, sensor_noise=0.0, seed=1, flow_drift_std=0.0, stop_latency=0.0
    )
    per_step = 0.015 * 0.05
    assert 0.0 <= r.error <= per_step + 1e-12


def test_stop_never_fires_before_estimate_reaches_target():
    for seed in range(20):
        r = pour_session(CUP, flow_rate=0.015, sensor_noise=0.004, seed=seed)
        assert r.estimate >= CUP.fill_target


def test_noise_config_single_digit_millimetres():
    errors = [
        abs(pour_session(CUP, 0.015, 0.004, seed=s).error_mm) for s in range(100)
    ]
    assert np.mean(errors) <= 10.0


def test_occlusion_degrades_error():
    crossing = CUP.fill_target / 0.015
    occluded = [
        abs(
            pour_session(
                CUP, 0.015, 0.004, seed=s, occlusion=(0.6 * crossing, 1.5 * crossing)
            ).error_mm
        )
        for s in range(100)
    ]
    clear = [abs(pour_session(CUP, 0.015, 0.004, seed=s).error_mm) for s in range(100)]
    assert np.mean(occluded) > np.mean(clear)


def test_overshoot_bounded_by_latency_plus_timestep():
    for seed in range(10):
        r = pour_session(
            CUP, flow_rate=0.02, sensor_noise=0.0, seed=seed, flow_drift_std=0.0,
            stop_latency=0.2, timestep=0.05,
        )
        bound = 0.02 * (0.2 + 0.05) + 1e-9
        assert r.error <= bound


def test_invalid_cup_and_flow_rejected():
    with pytest.raises(PerceptionError):
        CupModel(interior_height=0.1, fill_target=0.2)
    with pytest.raises(PerceptionError):
        pour_session(CUP, flow_rate=0.0, sensor_noise=0.001)
