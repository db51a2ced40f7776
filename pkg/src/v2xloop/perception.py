"""Abstract onboard sensor: range/FOV gated detections with misses and clutter.

There is no ray casting; an object inside the coverage wedge is detected
unless a miss is drawn. Detections carry ego-frame coordinates (what a real
perception stack emits) plus the world-frame equivalents resolved with the
ego pose at sensing time, which is what fusion consumes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .world import wrap_angle


@dataclass(frozen=True)
class SensorModel:
    max_range: float = 25.0           # [m]
    field_of_view: float = 2.0 * math.pi  # [rad], centered on the heading
    pos_noise_sigma: float = 0.5      # [m]
    vel_noise_sigma: float = 0.3      # [m/s]
    p_miss: float = 0.15              # per object per frame
    clutter_rate: float = 0.3         # Poisson mean false detections per frame


@dataclass(frozen=True)
class Detection:
    position: tuple[float, float]     # [m] ego frame, x forward
    velocity: tuple[float, float]     # [m/s] ego frame
    timestamp: float
    source: str                       # "sensor" or "clutter" (truth bookkeeping only)
    confidence: float                 # [0, 1]
    world_position: tuple[float, float]
    world_velocity: tuple[float, float]


@dataclass(frozen=True)
class SenseFrame:
    """One sensing sweep: the detections plus the coverage that produced them."""

    timestamp: float
    ego_pose: tuple[float, float, float]
    detections: tuple[Detection, ...]
    max_range: float
    field_of_view: float

    def covers(self, point) -> bool:
        ex, ey, eh = self.ego_pose
        dx = point[0] - ex
        dy = point[1] - ey
        if math.hypot(dx, dy) > self.max_range:
            return False
        bearing = wrap_angle(math.atan2(dy, dx) - eh)
        return abs(bearing) <= self.field_of_view / 2.0 + 1e-12


def _to_ego(ego_pose, wx: float, wy: float) -> tuple[float, float]:
    ex, ey, eh = ego_pose
    c, s = math.cos(eh), math.sin(eh)
    dx, dy = wx - ex, wy - ey
    return (c * dx + s * dy, -s * dx + c * dy)


def sense(ego_pose, truth_objects, model: SensorModel, rng: np.random.Generator,
          timestamp: float) -> SenseFrame:
    """Produce one frame of detections for the visible subset of `truth_objects`.

    Objects are visited in id order so the draw sequence is reproducible.
    """
    ex, ey, eh = ego_pose
    c, s = math.cos(eh), math.sin(eh)
    detections: list[Detection] = []

    for obj in sorted(truth_objects, key=lambda o: o.object_id):
        dx = obj.position[0] - ex
        dy = obj.position[1] - ey
        dist = math.hypot(dx, dy)
        if dist > model.max_range:
            continue
        bearing = wrap_angle(math.atan2(dy, dx) - eh)
        if abs(bearing) > model.field_of_view / 2.0 + 1e-12:
            continue
        if rng.uniform() < model.p_miss:
            continue
        nx, ny = rng.normal(0.0, model.pos_noise_sigma, size=2)
        nvx, nvy = rng.normal(0.0, model.vel_noise_sigma, size=2)
        wx, wy = obj.position[0] + nx, obj.position[1] + ny
        wvx, wvy = obj.velocity[0] + nvx, obj.velocity[1] + nvy
        conf = rng.uniform(0.6, 1.0)
        detections.append(Detection(
            position=_to_ego(ego_pose, wx, wy),
            velocity=(c * wvx + s * wvy, -s * wvx + c * wvy),
            timestamp=timestamp, source="sensor", confidence=conf,
            world_position=(wx, wy), world_velocity=(wvx, wvy)))

    n_clutter = int(rng.poisson(model.clutter_rate)) if model.clutter_rate > 0 else 0
    for _ in range(n_clutter):
        # uniform over the coverage wedge
        r = model.max_range * math.sqrt(rng.uniform())
        b = rng.uniform(-model.field_of_view / 2.0, model.field_of_view / 2.0)
        wx = ex + r * math.cos(eh + b)
        wy = ey + r * math.sin(eh + b)
        conf = rng.uniform(0.1, 0.6)
        detections.append(Detection(
            position=_to_ego(ego_pose, wx, wy),
            velocity=(0.0, 0.0), timestamp=timestamp, source="clutter",
            confidence=conf, world_position=(wx, wy), world_velocity=(0.0, 0.0)))

    return SenseFrame(timestamp=timestamp, ego_pose=tuple(ego_pose),
                      detections=tuple(detections),
                      max_range=model.max_range, field_of_view=model.field_of_view)


def sensor_likelihood(event_position, frames, support_radius: float,
                      window: float, now: float, neutral: float = 0.5) -> float:
    """Fraction of recent covering frames that corroborate an event location.

    Only frames whose range/FOV wedge actually covered the location count;
    with no covering frame in the window the result is `neutral`, so an
    event outside sensor reach is neither vetoed nor endorsed.
    """
    covering = 0
    supporting = 0
    for frame in frames:
        if frame.timestamp < now - window or frame.timestamp > now:
            continue
        if not frame.covers(event_position):
            continue
        covering += 1
        for det in frame.detections:
            ddx = det.world_position[0] - event_position[0]
            ddy = det.world_position[1] - event_position[1]
            if math.hypot(ddx, ddy) <= support_radius:
                supporting += 1
                break
    if covering == 0:
        return float(neutral)
    return supporting / covering
