"""Trajectory following: Pure Pursuit steering plus a PID speed loop.

The steering law chases a fixed look-ahead point on the trajectory; the
longitudinal loop tracks the trajectory's target speed profile and maps its
output to mutually exclusive throttle and brake. Integration freezes while
the output is saturated in the direction of the error (conditional
integration), so the integrator cannot wind up against the actuator limits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .planner import Trajectory
from .vehicle import VehicleParams
from .world import wrap_angle


@dataclass(frozen=True)
class ControllerConfig:
    look_ahead_gain: float = 0.6      # [s] carrot distance per unit speed
    look_ahead_min: float = 2.0       # [m] keeps slow passes from corner cutting
    look_ahead_max: float = 6.0       # [m] keeps fast tracking from oscillating
    k_p: float = 0.6
    k_i: float = 0.1
    k_d: float = 0.05
    integral_clamp: float = 2.0       # |integral| bound [m/s * s]

    def look_ahead(self, speed: float) -> float:
        return min(self.look_ahead_max,
                   max(self.look_ahead_min, self.look_ahead_gain * speed))


@dataclass(frozen=True)
class ControlCommand:
    steering: float                   # [rad]
    throttle: float                   # [0, 1]
    brake: float                      # [0, 1]


@dataclass(frozen=True)
class PidState:
    integral: float = 0.0
    prev_error: float = 0.0
    initialized: bool = False


def pure_pursuit(pose, traj: Trajectory, look_ahead: float,
                 vparams: VehicleParams, s_ego: float | None = None) -> float:
    """Steering toward the point look_ahead meters down the trajectory.

    Curvature command is 2 sin(alpha) / L_a with alpha the bearing of the
    target in the body frame; past the trajectory end the final pose is
    chased instead.
    """
    x, y, heading = float(pose[0]), float(pose[1]), float(pose[2])
    if s_ego is None:
        s_ego = traj.project((x, y))
    target = traj.point_at(min(s_ego + look_ahead, traj.length))
    alpha = wrap_angle(math.atan2(target[1] - y, target[0] - x) - heading)
    kappa = 2.0 * math.sin(alpha) / look_ahead
    steer = math.atan(kappa * vparams.wheelbase)
    return min(max(steer, -vparams.max_steer), vparams.max_steer)


def pid_longitudinal(error: float, state: PidState, cfg: ControllerConfig,
                     dt: float) -> tuple[float, PidState]:
    """One PID step on speed error; returns (command in [-1, 1], new state).

    Positive commands mean throttle, negative brake. The integral term only
    accumulates when doing so can still move the output, i.e. not while
    saturated in the error's direction.
    """
    derivative = 0.0 if not state.initialized else (error - state.prev_error) / dt
    u_tentative = cfg.k_p * error + cfg.k_i * state.integral + cfg.k_d * derivative

    integral = state.integral
    saturated_up = u_tentative >= 1.0 and error > 0.0
    saturated_down = u_tentative <= -1.0 and error < 0.0
    if not (saturated_up or saturated_down):
        integral = min(max(integral + error * dt, -cfg.integral_clamp),
                       cfg.integral_clamp)

    u = cfg.k_p * error + cfg.k_i * integral + cfg.k_d * derivative
    u = min(max(u, -1.0), 1.0)
    return u, PidState(integral=integral, prev_error=error, initialized=True)


def follow_tick(ego_state, traj: Trajectory, cfg: ControllerConfig,
                pid_state: PidState, vparams: VehicleParams,
                dt: float) -> tuple[ControlCommand, PidState, float]:
    """Compute the tick's command; returns (command, pid_state, target_speed)."""
    s_ego = traj.project((ego_state.x, ego_state.y))
    target_speed = traj.speed_at(s_ego)
    steering = pure_pursuit(ego_state.pose, traj,
                            cfg.look_ahead(ego_state.speed), vparams,
                            s_ego=s_ego)
    u, pid_next = pid_longitudinal(target_speed - ego_state.speed, pid_state,
                                   cfg, dt)
    if u >= 0.0:
        cmd = ControlCommand(steering=steering, throttle=u, brake=0.0)
    else:
        cmd = ControlCommand(steering=steering, throttle=0.0, brake=-u)
    return cmd, pid_next, target_speed


def safety_stop_command(prev_brake: float, dt: float,
                        ramp_time: float = 0.5) -> ControlCommand:
    """Straight-line braking ramp to full brake within ramp_time."""
    brake = min(1.0, prev_brake + dt / max(ramp_time, dt))
    return ControlCommand(steering=0.0, throttle=0.0, brake=brake)
