"""V2X traffic: CAM/DENM generation, a lossy delayed channel, and attackers.

Stations are either roadside units at fixed positions or transmitters bound
to a scripted vehicle. Byzantine stations hold valid credentials and mount a
content-level attack: authenticated DENMs for hazards that do not exist.
Cryptographic plumbing is out of scope; `authenticated` is a trusted flag.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .world import Route, point_along_polyline

CAM = "CAM"
DENM = "DENM"


@dataclass(frozen=True)
class CamPayload:
    position: tuple[float, float]     # [m] reported station position
    velocity: tuple[float, float]     # [m/s]


@dataclass(frozen=True)
class DenmPayload:
    event_kind: str
    event_position: tuple[float, float]
    event_time: float


@dataclass(frozen=True)
class V2xMessage:
    msg_kind: str                     # CAM or DENM
    station_id: str
    seq_no: int
    gen_time: float
    payload: object
    authenticated: bool = True
    recv_time: float | None = None    # set by transmit()


@dataclass(frozen=True)
class DenmPolicy:
    period: float = 1.0               # [s] repeat interval while the hazard persists
    enabled: bool = True


@dataclass(frozen=True)
class Station:
    station_id: str
    position: tuple[float, float]
    sensing_range: float = 60.0       # [m] hazards inside emit DENMs
    bound_object: str | None = None   # track a scripted vehicle if set


@dataclass(frozen=True)
class StationPopulation:
    stations: tuple[Station, ...]
    byzantine_ids: frozenset[str] = frozenset()
    honest_report_noise_sigma: float = 0.5   # [m]
    cam_period: float = 0.1           # [s]
    denm_policy: DenmPolicy = DenmPolicy()

    def __post_init__(self):
        object.__setattr__(self, "stations", tuple(self.stations))
        object.__setattr__(self, "byzantine_ids", frozenset(self.byzantine_ids))
        ids = [s.station_id for s in self.stations]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate station ids")
        unknown = self.byzantine_ids - set(ids)
        if unknown:
            raise ValueError(f"byzantine ids not in population: {sorted(unknown)}")

    @property
    def n(self) -> int:
        return len(self.stations)

    def honest(self) -> list[Station]:
        return [s for s in self.stations if s.station_id not in self.byzantine_ids]

    def byzantine(self) -> list[Station]:
        return [s for s in self.stations if s.station_id in self.byzantine_ids]


@dataclass(frozen=True)
class ChannelModel:
    drop_prob: float = 0.05
    latency_mean: float = 0.14        # [s]
    latency_jitter: float = 0.025     # [s] Gaussian sigma, clamped at zero latency


@dataclass(frozen=True)
class AttackPolicy:
    p_attack: float = 1.0             # per attacker per emission
    emission_period: float = 1.0      # [s]
    placement: str = "on_route_ahead"  # or "uniform_in_map"
    false_event_kind: str = "road_closure"
    start_time: float = 0.0
    ahead_min: float = 10.0           # [m] placement window along the route
    ahead_max: float = 40.0
    colluding: bool = True            # all attackers corroborate one location


def _emits_this_tick(t: float, dt: float, period: float, offset: float = 0.0) -> bool:
    """Tick-grid schedule: fires on the first tick at or after each period mark."""
    if period <= 0.0:
        return False
    k = int(round((t - offset) / dt))
    period_ticks = max(1, int(round(period / dt)))
    return k >= 0 and k % period_ticks == 0


def _station_state(station: Station, truth_by_id: dict) -> tuple[tuple[float, float], tuple[float, float]]:
    if station.bound_object is not None and station.bound_object in truth_by_id:
        obj = truth_by_id[station.bound_object]
        return tuple(obj.position), tuple(obj.velocity)
    return station.position, (0.0, 0.0)


def generate_honest_traffic(population: StationPopulation, truth_objects,
                            active_hazards, t: float, dt: float,
                            seq_counters: dict[str, int],
                            rng: np.random.Generator,
                            denm_started: set[tuple[str, str]] | None = None) -> list[V2xMessage]:
    """Vehicle CAMs on the beacon schedule plus DENMs for sensed hazards.

    A station emits its first DENM for a hazard on the tick it first sees it
    (event-triggered), then repeats on the DENM period. `denm_started`
    carries that first-seen bookkeeping between ticks.
    """
    sigma = population.honest_report_noise_sigma
    truth_by_id = {o.object_id: o for o in truth_objects}
    msgs: list[V2xMessage] = []
    started = denm_started if denm_started is not None else set()

    for station in sorted(population.honest(), key=lambda s: s.station_id):
        pos, vel = _station_state(station, truth_by_id)
        # CAMs are vehicle presence beacons; fixed roadside units only
        # relay hazard notifications, they are not objects to track
        if station.bound_object is not None \
                and _emits_this_tick(t, dt, population.cam_period):
            noise = rng.normal(0.0, sigma, size=2)
            vnoise = rng.normal(0.0, sigma * 0.2, size=2)
            seq = seq_counters.get(station.station_id, 0)
            seq_counters[station.station_id] = seq + 1
            msgs.append(V2xMessage(
                msg_kind=CAM, station_id=station.station_id, seq_no=seq,
                gen_time=t, payload=CamPayload(
                    position=(pos[0] + noise[0], pos[1] + noise[1]),
                    velocity=(vel[0] + vnoise[0], vel[1] + vnoise[1]))))
        if not population.denm_policy.enabled:
            continue
        for hazard in active_hazards:
            dist = math.hypot(hazard.position[0] - pos[0], hazard.position[1] - pos[1])
            if dist > station.sensing_range:
                continue
            key = (station.station_id, hazard.hazard_id)
            first = key not in started
            if first:
                started.add(key)
            periodic = _emits_this_tick(t, dt, population.denm_policy.period,
                                        offset=hazard.spawn_time)
            if not (first or periodic):
                continue
            noise = rng.normal(0.0, sigma, size=2)
            seq = seq_counters.get(station.station_id, 0)
            seq_counters[station.station_id] = seq + 1
            msgs.append(V2xMessage(
                msg_kind=DENM, station_id=station.station_id, seq_no=seq,
                gen_time=t, payload=DenmPayload(
                    event_kind=hazard.kind,
                    event_position=(hazard.position[0] + noise[0],
                                    hazard.position[1] + noise[1]),
                    event_time=t)))
    return msgs


def generate_attack_traffic(policy: AttackPolicy, population: StationPopulation,
                            route: Route, ego_progress: float, t: float, dt: float,
                            seq_counters: dict[str, int],
                            rng: np.random.Generator,
                            map_bounds: tuple[float, float, float, float] | None = None
                            ) -> list[V2xMessage]:
    """Authenticated false DENMs from the Byzantine subset.

    With `colluding` the attackers agree on one fabricated location per
    emission window, which is the strongest play against a quorum: support
    concentrates on a single hypothesis instead of spreading across several.
    """
    attackers = population.byzantine()
    if not attackers or t < policy.start_time:
        return []
    if not _emits_this_tick(t, dt, policy.emission_period, offset=policy.start_time):
        return []

    def draw_position():
        if policy.placement == "on_route_ahead":
            s = ego_progress + rng.uniform(policy.ahead_min, policy.ahead_max)
            p = point_along_polyline(route.reference_path, s)
            return (float(p[0]), float(p[1]))
        if policy.placement == "uniform_in_map":
            x0, y0, x1, y1 = map_bounds if map_bounds else (0.0, 0.0, 100.0, 100.0)
            return (float(rng.uniform(x0, x1)), float(rng.uniform(y0, y1)))
        raise ValueError(f"unknown placement {policy.placement!r}")

    shared = draw_position() if policy.colluding else None
    msgs: list[V2xMessage] = []
    for station in sorted(attackers, key=lambda s: s.station_id):
        if rng.uniform() >= policy.p_attack:
            continue
        pos = shared if shared is not None else draw_position()
        seq = seq_counters.get(station.station_id, 0)
        seq_counters[station.station_id] = seq + 1
        msgs.append(V2xMessage(
            msg_kind=DENM, station_id=station.station_id, seq_no=seq,
            gen_time=t, payload=DenmPayload(
                event_kind=policy.false_event_kind,
                event_position=pos, event_time=t)))
    return msgs


def transmit(messages, channel: ChannelModel, rng: np.random.Generator) -> list[V2xMessage]:
    """Apply drops and latency; survivors come back sorted by receive time."""
    delivered: list[V2xMessage] = []
    for msg in messages:
        if rng.uniform() < channel.drop_prob:
            continue
        latency = channel.latency_mean
        if channel.latency_jitter > 0.0:
            latency += rng.normal(0.0, channel.latency_jitter)
        latency = max(0.0, latency)
        delivered.append(replace(msg, recv_time=msg.gen_time + latency))
    delivered.sort(key=lambda m: (m.recv_time, m.station_id, m.seq_no))
    return delivered
