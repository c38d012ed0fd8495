"""Cascading safety supervisor.

Monitors the obstacle report, tracking and orientation errors, the
localization mode, the producer watchdog, the interface, and the human
steering torque; arbitrates between autonomous driving, emergency
stopping, manual handover, and mission completion. The guard never raises:
anything it cannot classify resolves to an emergency stop. During an
emergency stop the velocity reference is forced to zero while steering
commands keep flowing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .localization import LocMode


class GuardMode(Enum):
    AUTONOMOUS = "AUTONOMOUS"
    EMERGENCY_STOPPING = "EMERGENCY_STOPPING"
    MANUAL = "MANUAL"
    MISSION_COMPLETE = "MISSION_COMPLETE"


class Led(Enum):
    BLUE = "BLUE"
    GREEN = "GREEN"


class GuardReason(Enum):
    NONE = "none"
    CRITICAL_OBSTACLE = "critical_obstacle"
    TORQUE_OVERRIDE = "torque_override"
    INTERFACE_FAILURE = "interface_failure"
    WATCHDOG = "watchdog"
    LOCALIZATION_LOST = "localization_lost"
    TRACKING_LIMIT = "tracking_limit"
    ORIENTATION_LIMIT = "orientation_limit"
    MISSION_DONE = "mission_done"
    INTERNAL = "internal"


@dataclass(frozen=True)
class GuardThresholds:
    torque_limit: float = 7.5  # Nm, strictly greater trips
    tracking_limit: float = 2.0
    orientation_limit: float = math.radians(20.0)
    stop_speed_eps: float = 0.05  # matches the scheduler's at-rest threshold


@dataclass(frozen=True)
class GuardInputs:
    obstacle_critical: bool
    tracking_error: float
    orientation_error: float
    localization_mode: LocMode
    watchdog_ok: bool
    steering_torque: float
    ui_stop_requested: bool
    interface_ok: bool
    speed: float
    mission_done: bool = False


@dataclass(frozen=True)
class GuardDecision:
    mode: GuardMode
    velocity_override: float | None
    led: Led
    reason: GuardReason
    terminal: bool = False


def _emergency_reason(inputs: GuardInputs, thr: GuardThresholds) -> GuardReason:
    """Highest-priority active fault, NONE when all clear."""
    if abs(inputs.steering_torque) > thr.torque_limit:
        return GuardReason.TORQUE_OVERRIDE
    if not inputs.interface_ok:
        return GuardReason.INTERFACE_FAILURE
    if not inputs.watchdog_ok:
        return GuardReason.WATCHDOG
    if inputs.localization_mode == LocMode.LOST:
        return GuardReason.LOCALIZATION_LOST
    if inputs.obstacle_critical:
        return GuardReason.CRITICAL_OBSTACLE
    if abs(inputs.tracking_error) > thr.tracking_limit:
        return GuardReason.TRACKING_LIMIT
    if abs(inputs.orientation_error) > thr.orientation_limit:
        return GuardReason.ORIENTATION_LIMIT
    return GuardReason.NONE


def guard_step(inputs: GuardInputs, prev: GuardDecision | None,
               thr: GuardThresholds) -> GuardDecision:
    """One supervisor decision; pure in (inputs, previous decision).

    An emergency latches until the vehicle is at rest: a fault clearing
    mid-braking does not cancel the stop. At rest the outcome depends on
    the cause: torque hands over to MANUAL (terminal), a lost localization
    terminates the run, anything else resumes autonomous driving once the
    fault is gone.
    """
    try:
        return _guard_step(inputs, prev, thr)
    except Exception:
        return GuardDecision(GuardMode.EMERGENCY_STOPPING, velocity_override=0.0,
                             led=Led.GREEN, reason=GuardReason.INTERNAL)


def _guard_step(inputs: GuardInputs, prev: GuardDecision | None,
                thr: GuardThresholds) -> GuardDecision:
    prev_mode = prev.mode if prev is not None else GuardMode.AUTONOMOUS

    if prev_mode == GuardMode.MANUAL:
        return GuardDecision(GuardMode.MANUAL, None, Led.GREEN,
                             prev.reason, terminal=True)
    if prev_mode == GuardMode.MISSION_COMPLETE:
        return GuardDecision(GuardMode.MISSION_COMPLETE, 0.0, Led.GREEN,
                             prev.reason, terminal=True)

    fault = _emergency_reason(inputs, thr)

    if prev_mode == GuardMode.EMERGENCY_STOPPING:
        latched = prev.reason
        # a torque intervention during any braking escalates to handover
        if fault == GuardReason.TORQUE_OVERRIDE:
            latched = GuardReason.TORQUE_OVERRIDE
        if inputs.speed > thr.stop_speed_eps:
            return GuardDecision(GuardMode.EMERGENCY_STOPPING, 0.0, Led.GREEN,
                                 latched)
        # at rest: resolve by cause
        if latched == GuardReason.TORQUE_OVERRIDE:
            return GuardDecision(GuardMode.MANUAL, None, Led.GREEN,
                                 latched, terminal=True)
        if latched == GuardReason.LOCALIZATION_LOST \
                or inputs.localization_mode == LocMode.LOST:
            return GuardDecision(GuardMode.EMERGENCY_STOPPING, 0.0, Led.GREEN,
                                 GuardReason.LOCALIZATION_LOST, terminal=True)
        if fault != GuardReason.NONE:
            return GuardDecision(GuardMode.EMERGENCY_STOPPING, 0.0, Led.GREEN,
                                 fault)
        if inputs.mission_done:
            return GuardDecision(GuardMode.MISSION_COMPLETE, 0.0, Led.GREEN,
                                 GuardReason.MISSION_DONE, terminal=True)
        return GuardDecision(GuardMode.AUTONOMOUS, None, Led.BLUE,
                             GuardReason.NONE)

    # autonomous
    if fault != GuardReason.NONE:
        return GuardDecision(GuardMode.EMERGENCY_STOPPING, 0.0, Led.GREEN, fault)
    if inputs.mission_done and inputs.speed <= thr.stop_speed_eps:
        return GuardDecision(GuardMode.MISSION_COMPLETE, 0.0, Led.GREEN,
                             GuardReason.MISSION_DONE, terminal=True)
    return GuardDecision(GuardMode.AUTONOMOUS, None, Led.BLUE, GuardReason.NONE)


class SafetyGuard:
    """Stateful wrapper owning the latch across ticks."""

    def __init__(self, thresholds: GuardThresholds | None = None):
        self.thresholds = thresholds or GuardThresholds()
        self.decision: GuardDecision | None = None

    def step(self, inputs: GuardInputs) -> GuardDecision:
        self.decision = guard_step(inputs, self.decision, self.thresholds)
        return self.decision
