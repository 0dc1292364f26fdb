"""Shared scenario builders for the test suite."""

from trackfuse.config import SystemConfig
from trackfuse.sim import (
    GaitSignature,
    Scenario,
    SubjectScript,
    ThermalParams,
    default_camera,
    default_camera_transform,
)


def two_subject_scenario(seed=0, duration=8.0):
    subjects = (
        SubjectScript(
            waypoints=((-1.5, 6.0, 0.0), (-0.6, 2.0, duration)),
            temperature=36.6,
            gait=GaitSignature(stride_period=0.9),
        ),
        SubjectScript(
            waypoints=((1.5, 6.5, 0.0), (0.8, 1.8, duration)),
            temperature=36.9,
            gait=GaitSignature(stride_period=1.25, modulation_amp=0.4),
        ),
    )
    return Scenario(
        subjects=subjects,
        duration=duration,
        seed=seed,
        camera=default_camera(),
        transform=default_camera_transform(),
        config=SystemConfig(),
        jitter_accel_std=0.15,
    )


def parallel_walk_scenario(seed, spacing=0.6, duration=13.0):
    """Two subjects entering, converging to parallel lanes, diverging."""
    half = spacing / 2
    subjects = tuple(
        SubjectScript(
            waypoints=(
                (sign * 2.2, 6.8, 0.0),
                (sign * half, 5.8, 2.5),
                (sign * half, 1.8, 10.0),
                (sign * 1.6, 0.9, duration),
            ),
            gait=GaitSignature(stride_period=0.9 + 0.3 * i),
        )
        for i, sign in enumerate((-1.0, 1.0))
    )
    return Scenario(
        subjects=subjects,
        duration=duration,
        seed=seed,
        camera=default_camera(),
        transform=default_camera_transform(),
        config=SystemConfig(),
        jitter_accel_std=0.15,
    )


def three_subject_scenario(seed, duration=16.0):
    """Three subjects entering a room with crossing bearings and distances."""
    subjects = (
        SubjectScript(
            waypoints=((-2.5, 7.0, 0.0), (-0.5, 4.0, 4.5), (-1.3, 1.2, 10.0), (-2.8, 2.5, duration)),
            temperature=36.6,
            gait=GaitSignature(stride_period=0.85),
        ),
        SubjectScript(
            waypoints=((2.5, 7.2, 1.0), (0.6, 4.5, 6.0), (1.1, 1.1, 11.5), (2.6, 2.8, duration)),
            temperature=36.8,
            gait=GaitSignature(stride_period=1.1, modulation_amp=0.3),
        ),
        SubjectScript(
            waypoints=((0.0, 7.4, 2.0), (0.4, 5.0, 6.5), (-0.4, 2.0, 12.0), (0.2, 6.5, duration)),
            temperature=36.5,
            gait=GaitSignature(stride_period=1.3, modulation_amp=0.35),
        ),
    )
    return Scenario(
        subjects=subjects,
        duration=duration,
        seed=seed,
        camera=default_camera(),
        transform=default_camera_transform(),
        config=SystemConfig(),
        thermal=ThermalParams(dropout=0.05),
        jitter_accel_std=0.2,
    )


def wandering_subject_scenario(seed, temperature, duration=30.0):
    """One subject moving within 3.5 m of the sensors (temperature tests)."""
    subject = SubjectScript(
        waypoints=(
            (0.6, 3.4, 0.0),
            (-0.6, 1.0, 6.0),
            (0.5, 2.8, 12.0),
            (-0.5, 1.2, 18.0),
            (0.4, 3.2, 24.0),
            (0.0, 1.5, duration),
        ),
        temperature=temperature,
        gait=GaitSignature(),
    )
    return Scenario(
        subjects=(subject,),
        duration=duration,
        seed=seed,
        camera=default_camera(),
        transform=default_camera_transform(),
        config=SystemConfig(),
        jitter_accel_std=0.15,
    )
