"""Scenario suite and strict configuration round-trip.

Four built-in scenarios exercise the stack:

  s1  lane keeping on an open road, no V2X, no updates
  s2  a stationary hazard appears mid-route; honest roadside units report it
  s3  the map server publishes a topology change that closes the route
  s4  s2 plus Byzantine stations flooding fabricated closure reports

A scenario is a value object; everything an episode needs, including every
tunable, serializes to JSON and back. Unknown keys anywhere in the document
are errors, never silently ignored, so a typo in a config cannot run with
defaults behind the experimenter's back.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .control import ControllerConfig
from .gate import GateConfig
from .ldm import LdmParams
from .metrics import MetricParams
from .pareto import Configuration
from .perception import SensorModel
from .planner import PlannerConfig, TriggerConfig
from .v2x import AttackPolicy, ChannelModel, DenmPolicy, Station, StationPopulation
from .vehicle import VehicleParams
from .world import (GroundTruthHazard, LaneSegment, MapVersion, Route,
                    build_corridor_map, point_along_polyline, polyline_cumlength)

SCENARIO_IDS = ("s1", "s2", "s3", "s4")


@dataclass(frozen=True)
class ScriptedVehicle:
    """Constant-speed traffic along a fixed polyline; parks at the end."""

    vehicle_id: str
    path: np.ndarray
    speed: float
    radius: float = 1.0
    start_time: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "path", np.asarray(self.path, dtype=float))

    def state_at(self, t: float):
        total = float(polyline_cumlength(self.path)[-1])
        s = self.speed * max(0.0, t - self.start_time)
        pos = point_along_polyline(self.path, min(s, total))
        if t >= self.start_time and s < total:
            ahead = point_along_polyline(self.path, min(s + 0.5, total))
            d = ahead - pos
            norm = math.hypot(d[0], d[1])
            vel = (self.speed * d[0] / norm, self.speed * d[1] / norm) if norm > 1e-9 \
                else (0.0, 0.0)
        else:
            vel = (0.0, 0.0)
        return (float(pos[0]), float(pos[1])), vel


@dataclass(frozen=True)
class VersionedMap:
    """Initial map plus later publishes with their server-side publish times."""

    size: tuple[float, float]
    cell_size: float
    versions: tuple[MapVersion, ...]
    publish_times: tuple[float | None, ...]   # None for the initial version

    def initial(self) -> MapVersion:
        return self.versions[0]


@dataclass(frozen=True)
class UpdateClientConfig:
    poll_interval: float = 2.0            # [s]
    download_latency_mean: float = 1.1    # [s]
    download_latency_jitter: float = 0.2  # [s] Gaussian sigma, clamped >= 0.05


@dataclass(frozen=True)
class ScenarioSpec:
    scenario_id: str
    vmap: VersionedMap
    route: Route
    ego_start: tuple[float, float, float, float]   # x, y, heading, speed
    dt: float = 0.05
    time_limit: float = 40.0
    goal_tolerance: float = 2.0           # [m]
    v2x_enabled: bool = False
    updates_enabled: bool = False
    attack_enabled: bool = False
    vehicle: VehicleParams = VehicleParams()
    sensor: SensorModel = SensorModel()
    channel: ChannelModel = ChannelModel()
    stations: StationPopulation | None = None
    attack: AttackPolicy | None = None
    ldm: LdmParams = LdmParams()
    gate: GateConfig = GateConfig()
    triggers: TriggerConfig = TriggerConfig()
    planner: PlannerConfig = PlannerConfig()
    controller: ControllerConfig = ControllerConfig()
    metrics: MetricParams = MetricParams()
    update_client: UpdateClientConfig = UpdateClientConfig()
    hazards: tuple[GroundTruthHazard, ...] = ()
    traffic: tuple[ScriptedVehicle, ...] = ()
    sensor_likelihood_window: float = 1.0  # [s] veto evidence horizon
    event_label_radius: float = 16.0       # [m] hypothesis-to-truth labeling

    def __post_init__(self):
        if self.scenario_id not in SCENARIO_IDS:
            raise ValueError(f"scenario_id must be one of {SCENARIO_IDS}")
        object.__setattr__(self, "hazards", tuple(self.hazards))
        object.__setattr__(self, "traffic", tuple(self.traffic))


def apply_configuration(spec: ScenarioSpec, config: Configuration) -> ScenarioSpec:
    """Overlay one swept operating point onto a scenario.

    The swept look_ahead is the carrot distance at cruise speed; the
    speed-scaled bounds stretch around it proportionally.
    """
    controller = replace(spec.controller,
                         look_ahead_gain=config.look_ahead / spec.planner.cruise_speed,
                         look_ahead_min=config.look_ahead / 2.0,
                         look_ahead_max=1.5 * config.look_ahead,
                         k_p=config.k_p, k_i=config.k_i, k_d=config.k_d)
    triggers = replace(spec.triggers, tau_risk=config.tau_risk,
                       hazard_lookahead=config.hazard_lookahead)
    client = replace(spec.update_client,
                     poll_interval=config.update_poll_interval)
    return replace(spec, controller=controller, triggers=triggers,
                   update_client=client)


# ---------------------------------------------------------------------------
# builders


def _straight(a, b, n: int = 2) -> np.ndarray:
    return np.linspace(a, b, max(2, n))


def _s_curve(x0: float, x1: float, y_mid: float, amp: float, n: int = 60) -> np.ndarray:
    xs = np.linspace(x0, x1, n)
    ys = y_mid + amp * np.sin((xs - x0) / (x1 - x0) * 2.0 * math.pi)
    return np.column_stack([xs, ys])


def _rsu_row(count: int, x0: float, dx: float, y: float,
             sensing_range: float = 60.0, prefix: str = "rsu") -> list[Station]:
    return [Station(station_id=f"{prefix}-{i + 1}", position=(x0 + i * dx, y),
                    sensing_range=sensing_range) for i in range(count)]


def build_s1(route_shape: str = "straight") -> ScenarioSpec:
    if route_shape == "straight":
        center = _straight((4.0, 50.0), (96.0, 50.0))
        ref = _straight((8.0, 50.0), (92.0, 50.0), n=24)
        heading = 0.0
    elif route_shape == "curve":
        center = _s_curve(4.0, 96.0, 50.0, 6.0)
        ref = _s_curve(8.0, 92.0, 50.0, 5.85)
        d = ref[1] - ref[0]
        heading = math.atan2(d[1], d[0])
    else:
        raise ValueError("route_shape must be 'straight' or 'curve'")
    seg = LaneSegment("main", center, half_width=4.0)
    vmap = VersionedMap(size=(100.0, 100.0), cell_size=0.5,
                        versions=(build_corridor_map(1, [seg], 100.0, 100.0, 0.5),),
                        publish_times=(None,))
    goal = (float(ref[-1, 0]), float(ref[-1, 1]), 0.0)
    return ScenarioSpec(
        scenario_id="s1", vmap=vmap,
        route=Route(reference_path=ref, goal_pose=goal, segment_ids=("main",)),
        ego_start=(float(ref[0, 0]), float(ref[0, 1]), heading, 0.0),
        sensor=SensorModel(max_range=20.0, p_miss=0.1, clutter_rate=0.0),
        time_limit=40.0)


def _s2_layout():
    seg = LaneSegment("main", _straight((4.0, 50.0), (96.0, 50.0)), half_width=4.0)
    vmap = VersionedMap(size=(100.0, 100.0), cell_size=0.5,
                        versions=(build_corridor_map(1, [seg], 100.0, 100.0, 0.5),),
                        publish_times=(None,))
    ref = _straight((8.0, 50.0), (92.0, 50.0), n=24)
    route = Route(reference_path=ref, goal_pose=(92.0, 50.0, 0.0),
                  segment_ids=("main",))
    # off-center stall: blocks the reference line but leaves a gap below it
    hazard = GroundTruthHazard(hazard_id="hz-0", position=(62.0, 50.4),
                               kind="stationary_vehicle", spawn_time=3.5,
                               observable_by_sensing=True, radius=1.0)
    traffic = (
        ScriptedVehicle("veh-a", _straight((90.0, 58.0), (10.0, 58.0)), speed=6.0),
        ScriptedVehicle("veh-b", _straight((10.0, 42.0), (90.0, 42.0)), speed=5.0),
    )
    return vmap, route, hazard, traffic


def build_s2(v2x_enabled: bool = True) -> ScenarioSpec:
    vmap, route, hazard, traffic = _s2_layout()
    rsus = _rsu_row(7, 25.0, 10.0, 56.0)
    vehicle_stations = [Station("obu-a", (0.0, 0.0), sensing_range=40.0,
                                bound_object="veh-a"),
                        Station("obu-b", (0.0, 0.0), sensing_range=40.0,
                                bound_object="veh-b")]
    population = StationPopulation(stations=tuple(rsus + vehicle_stations),
                                   honest_report_noise_sigma=0.5,
                                   cam_period=0.1, denm_policy=DenmPolicy(period=1.0))
    return ScenarioSpec(
        scenario_id="s2", vmap=vmap, route=route,
        ego_start=(8.0, 50.0, 0.0, 0.0),
        v2x_enabled=v2x_enabled,
        stations=population if v2x_enabled else None,
        sensor=SensorModel(max_range=12.0, p_miss=0.3, pos_noise_sigma=0.6,
                           clutter_rate=0.2),
        gate=GateConfig(n=9, f=1, eta=0.5),
        hazards=(hazard,), traffic=traffic, time_limit=40.0)


def build_s3(updates_enabled: bool = True) -> ScenarioSpec:
    hw = 4.0
    # closed variants are pulled back from the junctions: their wall stamp
    # includes a half-width end cap that would otherwise sever the open road
    segs_v1 = [
        LaneSegment("main_w", _straight((4.0, 30.0), (56.0, 30.0)), hw),
        LaneSegment("main_mid", _straight((56.0, 30.0), (80.0, 30.0)), hw),
        LaneSegment("main_e", _straight((80.0, 30.0), (96.0, 30.0)), hw),
        LaneSegment("det_a", _straight((56.0, 38.5), (56.0, 62.0)), hw, closed=True),
        LaneSegment("det_b", _straight((56.0, 62.0), (80.0, 62.0)), hw, closed=True),
        LaneSegment("det_c", _straight((80.0, 38.5), (80.0, 62.0)), hw, closed=True),
    ]
    segs_v2 = [
        LaneSegment("main_w", _straight((4.0, 30.0), (56.0, 30.0)), hw),
        LaneSegment("main_mid", _straight((64.5, 30.0), (71.5, 30.0)), hw, closed=True),
        LaneSegment("main_e", _straight((80.0, 30.0), (96.0, 30.0)), hw),
        LaneSegment("det_a", _straight((56.0, 30.0), (56.0, 62.0)), hw),
        LaneSegment("det_b", _straight((56.0, 62.0), (80.0, 62.0)), hw),
        LaneSegment("det_c", _straight((80.0, 62.0), (80.0, 30.0)), hw),
    ]
    v1 = build_corridor_map(1, segs_v1, 100.0, 100.0, 0.5, created_at=0.0)
    v2 = build_corridor_map(2, segs_v2, 100.0, 100.0, 0.5, created_at=4.0)
    vmap = VersionedMap(size=(100.0, 100.0), cell_size=0.5,
                        versions=(v1, v2), publish_times=(None, 4.0))
    ref = _straight((8.0, 30.0), (92.0, 30.0), n=24)
    route = Route(reference_path=ref, goal_pose=(92.0, 30.0, 0.0),
                  segment_ids=("main_w", "main_mid", "main_e"))
    posts = tuple(
        GroundTruthHazard(hazard_id=f"bar-{i}", position=(70.0, 26.8 + 1.6 * i),
                          kind="road_closure", spawn_time=4.0,
                          observable_by_sensing=True, radius=1.0)
        for i in range(5))
    return ScenarioSpec(
        scenario_id="s3", vmap=vmap, route=route,
        ego_start=(8.0, 30.0, 0.0, 0.0),
        updates_enabled=updates_enabled,
        sensor=SensorModel(max_range=20.0, p_miss=0.2, pos_noise_sigma=0.6,
                           clutter_rate=0.1),
        hazards=posts, time_limit=60.0)


def build_s4(gate_enabled: bool = True) -> ScenarioSpec:
    vmap, route, hazard, _traffic = _s2_layout()
    rsus = _rsu_row(7, 20.0, 10.0, 56.0)
    byz = _rsu_row(3, 30.0, 15.0, 44.0, prefix="byz")
    population = StationPopulation(stations=tuple(rsus + byz),
                                   byzantine_ids=frozenset(s.station_id for s in byz),
                                   honest_report_noise_sigma=0.5,
                                   cam_period=0.1, denm_policy=DenmPolicy(period=1.0))
    return ScenarioSpec(
        scenario_id="s4", vmap=vmap, route=route,
        ego_start=(8.0, 50.0, 0.0, 0.0),
        v2x_enabled=True, attack_enabled=True,
        stations=population,
        attack=AttackPolicy(p_attack=1.0, emission_period=1.0,
                            placement="on_route_ahead",
                            false_event_kind="road_closure", start_time=1.0),
        sensor=SensorModel(max_range=20.0, p_miss=0.2, pos_noise_sigma=0.6,
                           clutter_rate=0.2),
        channel=ChannelModel(drop_prob=0.02, latency_mean=0.14,
                             latency_jitter=0.025),
        gate=GateConfig(n=10, f=3, eta=0.5, enabled=gate_enabled),
        hazards=(hazard,), time_limit=40.0)


def build_scenario(scenario_id: str, **kwargs) -> ScenarioSpec:
    builders = {"s1": build_s1, "s2": build_s2, "s3": build_s3, "s4": build_s4}
    if scenario_id not in builders:
        raise ValueError(f"unknown scenario {scenario_id!r}; expected one of {SCENARIO_IDS}")
    return builders[scenario_id](**kwargs)


# ---------------------------------------------------------------------------
# strict JSON round-trip


def _check_keys(d: dict, allowed, where: str) -> None:
    unknown = set(d) - set(allowed)
    if unknown:
        raise ValueError(f"unknown keys in {where}: {sorted(unknown)}")


def _dataclass_to_dict(obj) -> dict:
    out = {}
    for f in fields(obj):
        value = getattr(obj, f.name)
        if isinstance(value, frozenset):
            value = sorted(value)
        out[f.name] = value
    return out


def _dataclass_from_dict(cls, d: dict, where: str):
    names = [f.name for f in fields(cls)]
    _check_keys(d, names, where)
    return cls(**d)


def spec_to_dict(spec: ScenarioSpec) -> dict:
    versions = []
    for version, publish_time in zip(spec.vmap.versions, spec.vmap.publish_times):
        versions.append({
            "version_id": version.version_id,
            "created_at": version.created_at,
            "publish_time": publish_time,
            "segments": [{
                "id": seg.segment_id,
                "polyline": np.asarray(seg.polyline).tolist(),
                "half_width": seg.half_width,
                "closed": seg.closed,
            } for seg in version.lane_graph],
        })
    stations = None
    if spec.stations is not None:
        stations = {
            "members": [{
                "id": s.station_id, "position": list(s.position),
                "sensing_range": s.sensing_range, "bound_object": s.bound_object,
            } for s in spec.stations.stations],
            "byzantine_ids": sorted(spec.stations.byzantine_ids),
            "honest_report_noise_sigma": spec.stations.honest_report_noise_sigma,
            "cam_period": spec.stations.cam_period,
            "denm_period": spec.stations.denm_policy.period,
            "denm_enabled": spec.stations.denm_policy.enabled,
        }
    gate_d = _dataclass_to_dict(spec.gate)
    return {
        "scenario_id": spec.scenario_id,
        "dt": spec.dt,
        "time_limit": spec.time_limit,
        "goal_tolerance": spec.goal_tolerance,
        "v2x_enabled": spec.v2x_enabled,
        "updates_enabled": spec.updates_enabled,
        "attack_enabled": spec.attack_enabled,
        "sensor_likelihood_window": spec.sensor_likelihood_window,
        "event_label_radius": spec.event_label_radius,
        "map": {"size": list(spec.vmap.size), "cell_size": spec.vmap.cell_size,
                "versions": versions},
        "route": {"reference": np.asarray(spec.route.reference_path).tolist(),
                  "goal": list(spec.route.goal_pose),
                  "segment_ids": list(spec.route.segment_ids)},
        "ego": {"start": list(spec.ego_start)},
        "vehicle": _dataclass_to_dict(spec.vehicle),
        "sensor": _dataclass_to_dict(spec.sensor),
        "channel": _dataclass_to_dict(spec.channel),
        "stations": stations,
        "attack": _dataclass_to_dict(spec.attack) if spec.attack else None,
        "ldm": _dataclass_to_dict(spec.ldm),
        "gate": gate_d,
        "triggers": _dataclass_to_dict(spec.triggers),
        "planner": _dataclass_to_dict(spec.planner),
        "controller": _dataclass_to_dict(spec.controller),
        "metrics": _dataclass_to_dict(spec.metrics),
        "update_client": _dataclass_to_dict(spec.update_client),
        "hazards": [{
            "id": h.hazard_id, "position": list(h.position), "kind": h.kind,
            "spawn_time": h.spawn_time,
            "observable_by_sensing": h.observable_by_sensing, "radius": h.radius,
        } for h in spec.hazards],
        "traffic": [{
            "id": v.vehicle_id, "path": np.asarray(v.path).tolist(),
            "speed": v.speed, "radius": v.radius, "start_time": v.start_time,
        } for v in spec.traffic],
    }


_TOP_KEYS = ("scenario_id", "dt", "time_limit", "goal_tolerance", "v2x_enabled",
             "updates_enabled", "attack_enabled", "sensor_likelihood_window",
             "event_label_radius", "map", "route", "ego", "vehicle", "sensor",
             "channel", "stations", "attack", "ldm", "gate", "triggers",
             "planner", "controller", "metrics", "update_client", "hazards",
             "traffic")


def spec_from_dict(d: dict) -> ScenarioSpec:
    _check_keys(d, _TOP_KEYS, "scenario")
    md = d["map"]
    _check_keys(md, ("size", "cell_size", "versions"), "map")
    versions = []
    publish_times = []
    for vd in md["versions"]:
        _check_keys(vd, ("version_id", "created_at", "publish_time", "segments"),
                    "map.versions[]")
        segs = []
        for sd in vd["segments"]:
            _check_keys(sd, ("id", "polyline", "half_width", "closed"),
                        "map.versions[].segments[]")
            segs.append(LaneSegment(segment_id=sd["id"],
                                    polyline=np.asarray(sd["polyline"], dtype=float),
                                    half_width=float(sd.get("half_width", 4.0)),
                                    closed=bool(sd.get("closed", False))))
        versions.append(build_corridor_map(
            int(vd["version_id"]), segs, float(md["size"][0]), float(md["size"][1]),
            float(md["cell_size"]), created_at=float(vd.get("created_at", 0.0))))
        publish_times.append(None if vd.get("publish_time") is None
                             else float(vd["publish_time"]))
    vmap = VersionedMap(size=(float(md["size"][0]), float(md["size"][1])),
                        cell_size=float(md["cell_size"]),
                        versions=tuple(versions), publish_times=tuple(publish_times))

    rd = d["route"]
    _check_keys(rd, ("reference", "goal", "segment_ids"), "route")
    route = Route(reference_path=np.asarray(rd["reference"], dtype=float),
                  goal_pose=tuple(float(v) for v in rd["goal"]),
                  segment_ids=tuple(rd.get("segment_ids", [])))
    ed = d["ego"]
    _check_keys(ed, ("start",), "ego")

    stations = None
    if d.get("stations") is not None:
        sd = d["stations"]
        _check_keys(sd, ("members", "byzantine_ids", "honest_report_noise_sigma",
                         "cam_period", "denm_period", "denm_enabled"), "stations")
        members = []
        for m in sd["members"]:
            _check_keys(m, ("id", "position", "sensing_range", "bound_object"),
                        "stations.members[]")
            members.append(Station(station_id=m["id"],
                                   position=tuple(float(v) for v in m["position"]),
                                   sensing_range=float(m.get("sensing_range", 60.0)),
                                   bound_object=m.get("bound_object")))
        stations = StationPopulation(
            stations=tuple(members),
            byzantine_ids=frozenset(sd.get("byzantine_ids", [])),
            honest_report_noise_sigma=float(sd.get("honest_report_noise_sigma", 0.5)),
            cam_period=float(sd.get("cam_period", 0.1)),
            denm_policy=DenmPolicy(period=float(sd.get("denm_period", 1.0)),
                                   enabled=bool(sd.get("denm_enabled", True))))

    attack = None
    if d.get("attack") is not None:
        attack = _dataclass_from_dict(AttackPolicy, d["attack"], "attack")

    gate_d = dict(d["gate"])
    hazards = []
    for hd in d.get("hazards", []):
        _check_keys(hd, ("id", "position", "kind", "spawn_time",
                         "observable_by_sensing", "radius"), "hazards[]")
        hazards.append(GroundTruthHazard(
            hazard_id=hd["id"], position=tuple(float(v) for v in hd["position"]),
            kind=hd["kind"], spawn_time=float(hd.get("spawn_time", 0.0)),
            observable_by_sensing=bool(hd.get("observable_by_sensing", True)),
            radius=float(hd.get("radius", 1.0))))
    traffic = []
    for td in d.get("traffic", []):
        _check_keys(td, ("id", "path", "speed", "radius", "start_time"), "traffic[]")
        traffic.append(ScriptedVehicle(
            vehicle_id=td["id"], path=np.asarray(td["path"], dtype=float),
            speed=float(td["speed"]), radius=float(td.get("radius", 1.0)),
            start_time=float(td.get("start_time", 0.0))))

    return ScenarioSpec(
        scenario_id=d["scenario_id"],
        vmap=vmap, route=route,
        ego_start=tuple(float(v) for v in ed["start"]),
        dt=float(d.get("dt", 0.05)),
        time_limit=float(d.get("time_limit", 40.0)),
        goal_tolerance=float(d.get("goal_tolerance", 2.0)),
        v2x_enabled=bool(d.get("v2x_enabled", False)),
        updates_enabled=bool(d.get("updates_enabled", False)),
        attack_enabled=bool(d.get("attack_enabled", False)),
        sensor_likelihood_window=float(d.get("sensor_likelihood_window", 1.0)),
        event_label_radius=float(d.get("event_label_radius", 16.0)),
        vehicle=_dataclass_from_dict(VehicleParams, d["vehicle"], "vehicle"),
        sensor=_dataclass_from_dict(SensorModel, d["sensor"], "sensor"),
        channel=_dataclass_from_dict(ChannelModel, d["channel"], "channel"),
        stations=stations, attack=attack,
        ldm=_dataclass_from_dict(LdmParams, d["ldm"], "ldm"),
        gate=_dataclass_from_dict(GateConfig, gate_d, "gate"),
        triggers=_dataclass_from_dict(TriggerConfig, d["triggers"], "triggers"),
        planner=_dataclass_from_dict(PlannerConfig, d["planner"], "planner"),
        controller=_dataclass_from_dict(ControllerConfig, d["controller"], "controller"),
        metrics=_dataclass_from_dict(MetricParams, d["metrics"], "metrics"),
        update_client=_dataclass_from_dict(UpdateClientConfig, d["update_client"],
                                           "update_client"),
        hazards=tuple(hazards), traffic=tuple(traffic))
