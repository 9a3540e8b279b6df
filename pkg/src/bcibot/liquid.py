"""Pouring perception: refraction-corrected level estimation, tracking, stop signal.

A depth sensor looking into the cup sees the bottom lifted by refraction; the
planar model inverts that to the true liquid column height, a 1D Kalman filter
tracks the level against the commanded inflow, and the controller emits a stop
signal once the estimate passes the requested fill level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np


class PerceptionError(ValueError):
    pass


@dataclass(frozen=True)
class LiquidObservation:
    """One depth reading through the liquid surface.

    ``apparent_depth`` is the surface-to-bottom distance the sensor reports;
    ``view_angle`` is measured in air, from the surface normal.
    """

    apparent_depth: float
    view_angle: float = 0.0
    refractive_index: float = 1.33

    def __post_init__(self):
        if self.apparent_depth < 0:
            raise PerceptionError("apparent depth must be non-negative")
        if not 0.0 <= self.view_angle < math.pi / 2:
            raise PerceptionError("view angle must lie in [0, pi/2)")
        if self.refractive_index < 1.0:
            raise PerceptionError("refractive index must be >= 1")


def true_depth(obs: LiquidObservation) -> float:
    """Actual liquid-column depth behind an apparent reading.

    Planar virtual-image model: the refracted ray's backward extension crosses
    the vertical through the true point at depth ``d_a = d tan(t)/tan(i)`` with
    ``sin(i) = n sin(t)``; at normal incidence this collapses to ``d = n d_a``.
    """
    n = obs.refractive_index
    if obs.view_angle < 1e-12:
        return n * obs.apparent_depth
    theta_i = obs.view_angle
    theta_t = math.asin(math.sin(theta_i) / n)
    return obs.apparent_depth * math.tan(theta_i) / math.tan(theta_t)


def apparent_depth(depth: float, view_angle: float, refractive_index: float) -> float:
    """Forward model: what the sensor reports for a true column depth."""
    if view_angle < 1e-12:
        return depth / refractive_index
    theta_t = math.asin(math.sin(view_angle) / refractive_index)
    return depth * math.tan(theta_t) / math.tan(view_angle)


@dataclass(frozen=True)
class CupModel:
    interior_height: float
    fill_target: float

    def __post_init__(self):
        if not 0.0 < self.fill_target <= self.interior_height:
            raise PerceptionError("fill target must be in (0, interior_height]")


@dataclass(frozen=True)
class LevelFilter:
    """1D Kalman filter over the liquid level with inflow as control input."""

    estimate: float
    variance: float
    process_noise: float
    measurement_noise: float

    def __post_init__(self):
        if self.process_noise <= 0 or self.measurement_noise <= 0:
            raise PerceptionError("noise variances must be positive")
        if self.variance <= 0:
            raise PerceptionError("variance must be positive")


def filter_predict(f: LevelFilter, inflow: float) -> LevelFilter:
    return replace(f, estimate=f.estimate + inflow, variance=f.variance + f.process_noise)


def filter_step(f: LevelFilter, measurement: float, inflow: float) -> LevelFilter:
    """Predict with the commanded inflow, then update with the measurement."""
    if not (math.isfinite(measurement) and math.isfinite(inflow)):
        raise PerceptionError("measurement and inflow must be finite")
    predicted = filter_predict(f, inflow)
    gain = predicted.variance / (predicted.variance + f.measurement_noise)
    estimate = predicted.estimate + gain * (measurement - predicted.estimate)
    variance = (1.0 - gain) * predicted.variance
    return replace(predicted, estimate=estimate, variance=variance)


@dataclass(frozen=True)
class PourResult:
    final_level: float       # true level when motion stopped, m
    error: float             # final_level - fill_target, m
    stop_time: float         # when the stop signal fired, s
    steps: int
    estimate: float          # filter estimate at stop signal

    @property
    def error_mm(self) -> float:
        return self.error * 1000.0


def pour_session(
    cup: CupModel,
    flow_rate: float,
    sensor_noise: float,
    seed: int | None = None,
    timestep: float = 0.05,
    view_angle: float = 0.35,
    refractive_index: float = 1.33,
    stop_latency: float = 0.2,
    flow_drift_std: float = 0.02,
    occlusion: tuple[float, float] | None = None,
    max_time: float = 120.0,
) -> PourResult:
    """Fill the cup until the tracked level reaches the target, then stop.

    ``flow_drift_std`` lets the true flow wander from the commanded one (the
    filter predicts with the nominal flow); ``occlusion`` drops measurements in
    the given time window, e.g. when the bottle blocks the camera.
    """
    if flow_rate <= 0:
        raise PerceptionError("flow rate must be positive")
    rng = np.random.default_rng(seed)

    meas_var = max(sensor_noise**2, 1e-12)
    process_var = max((flow_rate * timestep * 0.5) ** 2, 1e-12)
    f = LevelFilter(
        estimate=0.0, variance=1e-6, process_noise=process_var, measurement_noise=meas_var
    )

    level = 0.0
    t = 0.0
    steps = 0
    flow_factor = 1.0
    stop_at: float | None = None
    estimate_at_stop = 0.0

    while t < max_time:
        t += timestep
        steps += 1
        flow_factor += rng.normal(0.0, flow_drift_std)
        flow_factor = min(max(flow_factor, 0.2), 2.0)
        level += flow_rate * timestep * flow_factor
        level = min(level, cup.interior_height)

        occluded = occlusion is not None and occlusion[0] <= t <= occlusion[1]
        if occluded:
            f = filter_predict(f, flow_rate * timestep)
        else:
            reading = apparent_depth(level, view_angle, refractive_index)
            reading += rng.normal(0.0, sensor_noise) if sensor_noise > 0 else 0.0
            measured = true_depth(
                LiquidObservation(
                    apparent_depth=max(reading, 0.0),
                    view_angle=view_angle,
                    refractive_index=refractive_index,
                )
            )
            f = filter_step(f, measured, flow_rate * timestep)

        if stop_at is None and f.estimate >= cup.fill_target:
            stop_at = t + stop_latency
            estimate_at_stop = f.estimate
        if stop_at is not None and t >= stop_at:
            break

    return PourResult(
        final_level=level,
        error=level - cup.fill_target,
        stop_time=stop_at if stop_at is not None else t,
        steps=steps,
        estimate=estimate_at_stop,
    )


def pour_batch(
    cup: CupModel, flow_rate: float, sensor_noise: float, seeds: list[int], **kwargs
) -> list[PourResult]:
    return [pour_session(cup, flow_rate, sensor_noise, seed=s, **kwargs) for s in seeds]
