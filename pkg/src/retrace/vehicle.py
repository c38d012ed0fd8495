"""Ground-truth vehicle dynamics.

Kinematic bicycle model (rear-axle reference point, no slip) with the
low-level steering and velocity controllers abstracted as first-order lags
under rate/acceleration limits. Stepped at a fixed interface rate, 200 Hz
by default.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import clamp, wrap_angle


@dataclass(frozen=True)
class VehicleParams:
    """Physical and actuator-tracking parameters.

    ``sensor_offset`` places the velocity sensor frame forward of the rear
    axle; the default puts it at the front axle.
    """

    wheelbase: float = 1.9
    body_width: float = 1.6
    sensor_offset: float = 1.9
    max_steering: float = math.radians(30.0)
    max_steering_rate: float = 0.7
    max_accel: float = 2.5
    max_decel: float = 6.0
    steering_lag_tau: float = 0.15
    velocity_lag_tau: float = 0.4

    def __post_init__(self):
        if self.wheelbase <= 0.0:
            raise ValueError("wheelbase must be > 0")
        if self.body_width <= 0.0:
            raise ValueError("body_width must be > 0")
        if not 0.0 < self.max_steering < math.pi / 2:
            raise ValueError("max_steering must lie in (0, pi/2)")
        for name in ("max_steering_rate", "max_accel", "max_decel",
                     "steering_lag_tau", "velocity_lag_tau"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be > 0")


@dataclass(frozen=True)
class VehicleState:
    """Planar pose plus actuator states; the simulated ground truth."""

    x: float
    y: float
    heading: float
    speed: float
    steering_angle: float
    timestamp: float = 0.0


@dataclass(frozen=True)
class ActuatorCommand:
    steering_ref: float
    velocity_ref: float
    emergency: bool = False


@dataclass(frozen=True)
class OdometryNoise:
    wheel_speed_std: float = 0.0
    steering_std: float = 0.0

    def __post_init__(self):
        if self.wheel_speed_std < 0.0 or self.steering_std < 0.0:
            raise ValueError("noise std-devs must be >= 0")


@dataclass(frozen=True)
class OdometrySample:
    """Synthesized rear-wheel speeds and steering encoder reading."""

    v_left: float
    v_right: float
    steering_angle: float

    def body_twist(self, params: VehicleParams) -> tuple[float, float, float]:
        """Planar body twist (vx, vy, yaw rate) at the rear axle.

        Inverse kinematic model: mean wheel speed gives the longitudinal
        velocity, the steering reading gives the yaw rate through the
        bicycle geometry; vy is zero under the no-slip assumption.
        """
        v = 0.5 * (self.v_left + self.v_right)
        omega = v / params.wheelbase * math.tan(self.steering_angle)
        return v, 0.0, omega


def _require_finite(**values: float) -> None:
    for name, value in values.items():
        if not math.isfinite(value):
            raise ValueError(f"non-finite {name}: {value!r}")


def step_dynamics(state: VehicleState, cmd: ActuatorCommand,
                  params: VehicleParams, dt: float) -> VehicleState:
    """Advance the vehicle by one interface tick.

    Actuator states are updated first (first-order lag toward the command,
    clipped by rate/acceleration limits), then the pose is advanced along
    the constant-twist arc those states define. With ``emergency`` set the
    speed ramps down at ``max_decel`` regardless of ``velocity_ref`` while
    steering keeps tracking ``steering_ref``.
    """
    if dt <= 0.0:
        raise ValueError("dt must be > 0")
    _require_finite(steering_ref=cmd.steering_ref, velocity_ref=cmd.velocity_ref,
                    x=state.x, y=state.y, heading=state.heading,
                    speed=state.speed, steering_angle=state.steering_angle)

    steer_goal = clamp(cmd.steering_ref, -params.max_steering, params.max_steering)
    rate = clamp((steer_goal - state.steering_angle) / params.steering_lag_tau,
                 -params.max_steering_rate, params.max_steering_rate)
    steering = clamp(state.steering_angle + rate * dt,
                     -params.max_steering, params.max_steering)

    if cmd.emergency:
        speed = max(0.0, state.speed - params.max_decel * dt)
    else:
        v_goal = max(0.0, cmd.velocity_ref)
        accel = clamp((v_goal - state.speed) / params.velocity_lag_tau,
                      -params.max_decel, params.max_accel)
        speed = max(0.0, state.speed + accel * dt)

    omega = speed / params.wheelbase * math.tan(steering)
    if abs(omega) < 1e-9:
        x = state.x + speed * math.cos(state.heading) * dt
        y = state.y + speed * math.sin(state.heading) * dt
        heading = wrap_angle(state.heading + omega * dt)
    else:
        # exact arc for the constant twist over this tick
        radius = speed / omega
        h1 = state.heading + omega * dt
        x = state.x + radius * (math.sin(h1) - math.sin(state.heading))
        y = state.y - radius * (math.cos(h1) - math.cos(state.heading))
        heading = wrap_angle(h1)

    return VehicleState(x=x, y=y, heading=heading, speed=speed,
                        steering_angle=steering,
                        timestamp=state.timestamp + dt)


def body_velocity_at_sensor(state: VehicleState,
                            params: VehicleParams) -> tuple[float, float]:
    """Rigid-body velocity at the sensor point, in the sensor frame.

    Under the no-slip bicycle model the rear axle moves purely along the
    body x-axis; a point ``sensor_offset`` ahead picks up a lateral
    component from the yaw rate.
    """
    vx = state.speed
    vy = state.speed * (params.sensor_offset / params.wheelbase) \
        * math.tan(state.steering_angle)
    return vx, vy


def wheel_odometry(state: VehicleState, params: VehicleParams,
                   noise: OdometryNoise,
                   rng: np.random.Generator) -> OdometrySample:
    """Synthesize rear-wheel speeds and a steering encoder reading.

    With zero noise the round trip through :meth:`OdometrySample.body_twist`
    reproduces the true body twist exactly. The rear track width is taken
    as the body width.
    """
    omega = state.speed / params.wheelbase * math.tan(state.steering_angle)
    half_track = 0.5 * params.body_width
    v_left = state.speed - omega * half_track
    v_right = state.speed + omega * half_track
    if noise.wheel_speed_std > 0.0:
        v_left += noise.wheel_speed_std * rng.standard_normal()
        v_right += noise.wheel_speed_std * rng.standard_normal()
    steering = state.steering_angle
    if noise.steering_std > 0.0:
        steering += noise.steering_std * rng.standard_normal()
    return OdometrySample(v_left=v_left, v_right=v_right, steering_angle=steering)
