"""Closed-loop episode execution, logging, and derived metrics.

One episode couples the world, the fused environment model, the acceptance
gate, the replanner, and the tracking controller on a fixed-step clock.
The order inside a tick is always: activate any downloaded map, snapshot
ground truth, check termination, sense, exchange V2X traffic, synchronize
and fuse, poll the map server, gate pending event hypotheses, evaluate
replan triggers, compute the command, log, step the vehicle.

Determinism contract: every stochastic draw goes through a named Philox
stream, all log rows are formatted to nine significant digits in an order
fixed by the loop itself, and episode metrics are computed from the
formatted rows rather than from simulator internals. Rerunning a seed
reproduces the log directory byte for byte, and `replay` recovers the exact
metrics from disk. Wall-clock planner timings are real measurements and go
to a separate timing file outside the log directory.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from pathlib import Path

from .control import ControlCommand, PidState, follow_tick, safety_stop_command
from .gate import apply_decision, evaluate
from .ldm import PENDING, fuse_tick, initial_state, synchronize
from .logio import CsvLog, _round_floats, read_csv, read_json, roundtrip_rows, write_json
from .metrics import (EpisodeMetrics, MetricParams, aggregate, brake_energy,
                      clear_mot, command_variance, gate_rates, heading_stats,
                      lateral_rmse, objective_vector, v2x_reaction_ms)
from .pareto import ParetoResult, config_grid
from .pareto import sweep as pareto_sweep
from .perception import sense, sensor_likelihood
from .planner import (check_triggers, plan, route_deviation_field, ttc_min,
                      unexplained_tracks)
from .rng import StreamSet
from .scenarios import ScenarioSpec, apply_configuration, build_scenario
from .v2x import DENM, generate_attack_traffic, generate_honest_traffic, transmit
from .vehicle import VehicleState, step
from .world import (UpdateServerState, WorldObject, cross_track_error,
                    heading_along_polyline, planning_occupancy, poll_update,
                    publish_version, wrap_angle)

FOLLOW = "follow"
SAFETY_STOP = "safety_stop"
RECOVERY_TICKS = 10               # replan retry cadence during a stop ramp

VEHICLE_COLS = ("tick", "t", "x", "y", "heading", "speed", "steering",
                "throttle", "brake", "s_route", "cross_track", "heading_err",
                "ttc")
CONTROL_COLS = ("tick", "t", "steering", "throttle", "brake", "target_speed",
                "speed")
TRUTH_COLS = ("tick", "t", "object_id", "x", "y", "vx", "vy", "radius", "scored")
LDM_COLS = ("tick", "t", "track_id", "x", "y", "vx", "vy", "belief")
V2X_COLS = ("tick", "t", "station_id", "msg_kind", "seq_no", "gen_time",
            "recv_time", "event_kind", "event_x", "event_y")
GATE_COLS = ("tick", "t", "event_id", "accepted", "support_weight",
             "sensor_likelihood", "reason")
EVENTS_COLS = ("t", "event_id", "kind", "status", "x", "y", "first_seen",
               "accepted_at", "n_support", "is_true", "final")
PLANS_COLS = ("tick", "t", "cause", "success", "expansions", "path_length",
              "n_poses", "planned_on_version")
UPDATES_COLS = ("tick", "t", "action", "version_id", "value")
EPISODE_COLS = ("termination", "sim_time", "ticks", "collision")
TIMING_COLS = ("plan_index", "tick", "cause", "cpu_ms", "expansions")

LOG_NAMES = ("vehicle", "control", "truth", "ldm", "v2x", "gate", "events",
             "plans", "updates", "episode")


@dataclass(frozen=True)
class EpisodeResult:
    scenario_id: str
    seed: int
    metrics: EpisodeMetrics
    summary: dict
    out_dir: Path | None


def _new_logs() -> dict[str, CsvLog]:
    cols = {"vehicle": VEHICLE_COLS, "control": CONTROL_COLS,
            "truth": TRUTH_COLS, "ldm": LDM_COLS, "v2x": V2X_COLS,
            "gate": GATE_COLS, "events": EVENTS_COLS, "plans": PLANS_COLS,
            "updates": UPDATES_COLS, "episode": EPISODE_COLS}
    return {name: CsvLog(cols[name]) for name in LOG_NAMES}


def _truth_at(spec: ScenarioSpec, t: float) -> list[tuple[WorldObject, bool]]:
    """(object, sensable) pairs for everything physically present at t."""
    out: list[tuple[WorldObject, bool]] = []
    for sv in spec.traffic:
        pos, vel = sv.state_at(t)
        out.append((WorldObject(object_id=sv.vehicle_id, position=pos,
                                velocity=vel, radius=sv.radius), True))
    for hz in spec.hazards:
        if hz.spawn_time <= t:
            out.append((WorldObject(object_id=hz.hazard_id, position=hz.position,
                                    velocity=(0.0, 0.0), radius=hz.radius),
                        hz.observable_by_sensing))
    return out


def _event_is_true(kind: str, position, spec: ScenarioSpec) -> bool:
    """A hypothesis is true iff a same-kind hazard exists near its location."""
    for hz in spec.hazards:
        if hz.kind != kind:
            continue
        d = math.hypot(position[0] - hz.position[0], position[1] - hz.position[1])
        if d <= spec.event_label_radius:
            return True
    return False


def _build_meta(spec: ScenarioSpec, seed: int) -> dict:
    meta = {
        "scenario_id": spec.scenario_id,
        "seed": int(seed),
        "dt": spec.dt,
        "time_limit": spec.time_limit,
        "route_length": spec.route.length,
        "goal": list(spec.route.goal_pose),
        "goal_tolerance": spec.goal_tolerance,
        "collision_radius": spec.vehicle.collision_radius,
        "event_label_radius": spec.event_label_radius,
        "mot_belief_min": spec.planner.b_obstacle,
        "metrics": asdict(spec.metrics),
        "hazards": [{"id": h.hazard_id, "x": h.position[0], "y": h.position[1],
                     "kind": h.kind, "spawn_time": h.spawn_time,
                     "radius": h.radius} for h in spec.hazards],
    }
    # round exactly as the JSON writer would, so in-run metrics see the same
    # numbers a replay reads back from meta.json
    return _round_floats(meta)


def run_episode(spec: ScenarioSpec, seed: int,
                out_dir: str | Path | None = None) -> EpisodeResult:
    """Run one seeded episode; optionally persist logs, summary, and timings."""
    seed = int(seed)
    if seed < 0:
        raise ValueError("seed must be non-negative")
    dt = spec.dt
    streams = StreamSet(seed)
    logs = _new_logs()
    timing = CsvLog(TIMING_COLS)
    meta = _build_meta(spec, seed)

    server = UpdateServerState()
    for version, publish_time in zip(spec.vmap.versions, spec.vmap.publish_times):
        if publish_time is not None:
            server = publish_version(server, version, publish_time)
    active = spec.vmap.initial()
    last_seen = active.version_id
    pending_map: tuple | None = None
    poll_ticks = max(1, int(round(spec.update_client.poll_interval / dt)))

    grid_cache: dict[int, object] = {}
    field_cache: dict[int, object] = {}

    def grid_for(version):
        if version.version_id not in grid_cache:
            grid_cache[version.version_id] = planning_occupancy(
                version, spec.vehicle.collision_radius)
        return grid_cache[version.version_id]

    def field_for(version):
        if version.version_id not in field_cache:
            field_cache[version.version_id] = route_deviation_field(
                grid_for(version), spec.route.reference_path)
        return field_cache[version.version_id]

    x0, y0, h0, v0 = spec.ego_start
    ego = VehicleState(x=x0, y=y0, heading=h0, speed=v0)
    pid = PidState()
    mode = FOLLOW
    last_cmd = ControlCommand(steering=0.0, throttle=0.0, brake=0.0)
    goal = spec.route.goal_pose
    ref_path = spec.route.reference_path

    ldm = initial_state(active)
    sense_buffer: list = []
    frames_window: list = []
    window_keep = max(spec.sensor_likelihood_window, spec.ldm.tau_sync) + 0.2
    in_flight: list = []
    seq_counters: dict[str, int] = {}
    denm_started: set = set()
    counters: dict[str, int] = {}
    next_ids = {"track": [1], "event": [1]}
    logged_status: dict[str, str] = {}
    cam_bound = set()
    if spec.v2x_enabled and spec.stations is not None:
        cam_bound = {s.bound_object for s in spec.stations.honest()
                     if s.bound_object is not None}

    plan_count = 0

    def record_plan(attempt, tick: int, t: float) -> None:
        nonlocal plan_count
        n_poses = len(attempt.trajectory.poses) if attempt.succeeded else 0
        logs["plans"].append(tick, t, attempt.cause, attempt.succeeded,
                             attempt.expansions, attempt.path_length, n_poses,
                             active.version_id)
        timing.append(plan_count, tick, attempt.cause, attempt.cpu_ms,
                      attempt.expansions)
        plan_count += 1

    attempt = plan(ego.pose, ego.speed, goal, ldm, spec.planner, spec.vehicle,
                   cause="initial", base_grid=grid_for(active),
                   start_steering=0.0, deviation_field=field_for(active))
    record_plan(attempt, 0, 0.0)
    traj = attempt.trajectory
    stop_tick = -1
    if traj is None:
        mode = SAFETY_STOP
        stop_tick = 0

    n_ticks = int(round(spec.time_limit / dt))
    termination = "timeout"
    sim_time = n_ticks * dt
    ticks_done = 0
    collision_flag = 0

    for k in range(n_ticks):
        t = k * dt

        if pending_map is not None and t >= pending_map[1] - 1e-9:
            active = pending_map[0]
            logs["updates"].append(k, t, "activate", active.version_id, t)
            pending_map = None

        truth = _truth_at(spec, t)
        objs = [o for o, _ in truth]

        hit = False
        for obj in objs:
            d = math.hypot(ego.x - obj.position[0], ego.y - obj.position[1])
            if d < spec.vehicle.collision_radius + obj.radius:
                hit = True
                break
        if hit:
            termination, sim_time, collision_flag = "collision", t, 1
            break
        if math.hypot(ego.x - goal[0], ego.y - goal[1]) <= spec.goal_tolerance:
            termination, sim_time = "goal_reached", t
            break
        if mode == SAFETY_STOP and ego.speed <= 0.02:
            termination, sim_time = "safety_stop", t
            break

        frame = sense(ego.pose, [o for o, sensable in truth if sensable],
                      spec.sensor, streams.get("sense"), t)
        sense_buffer.append((t, frame))
        frames_window.append(frame)
        while frames_window and frames_window[0].timestamp < t - window_keep:
            frames_window.pop(0)

        for obj, sensable in truth:
            in_range = (sensable and
                        math.hypot(ego.x - obj.position[0],
                                   ego.y - obj.position[1]) <= spec.sensor.max_range)
            scored = in_range or obj.object_id in cam_bound
            logs["truth"].append(k, t, obj.object_id, obj.position[0],
                                 obj.position[1], obj.velocity[0],
                                 obj.velocity[1], obj.radius, scored)

        due: list = []
        if spec.v2x_enabled and spec.stations is not None:
            active_hazards = [h for h in spec.hazards if h.spawn_time <= t]
            outgoing = generate_honest_traffic(
                spec.stations, objs, active_hazards, t, dt, seq_counters,
                streams.get("v2x_honest"), denm_started)
            if spec.attack_enabled and spec.attack is not None:
                ego_s = spec.route.progress_of(ego.position)
                outgoing += generate_attack_traffic(
                    spec.attack, spec.stations, spec.route, ego_s, t, dt,
                    seq_counters, streams.get("attack"),
                    map_bounds=(0.0, 0.0, spec.vmap.size[0], spec.vmap.size[1]))
            if outgoing:
                in_flight.extend(transmit(outgoing, spec.channel,
                                          streams.get("channel")))
            due = [m for m in in_flight if m.recv_time <= t + 1e-9]
            if due:
                in_flight = [m for m in in_flight if m.recv_time > t + 1e-9]
                due.sort(key=lambda m: (m.recv_time, m.station_id, m.seq_no))
                for m in due:
                    if m.msg_kind == DENM:
                        ek = m.payload.event_kind
                        ex, ey = m.payload.event_position
                    else:
                        ek, ex, ey = None, None, None
                    logs["v2x"].append(k, t, m.station_id, m.msg_kind, m.seq_no,
                                       m.gen_time, m.recv_time, ek, ex, ey)

        bundle = synchronize(sense_buffer, t, spec.ldm.tau_sync)
        ldm = fuse_tick(ldm, bundle, due, active, [frame], spec.ldm, t,
                        counters, next_ids)

        if spec.updates_enabled and k > 0 and k % poll_ticks == 0:
            jitter = spec.update_client.download_latency_jitter
            latency = spec.update_client.download_latency_mean
            if jitter > 0.0:
                latency += jitter * float(streams.get("updates").normal())
            latency = max(0.05, latency)
            polled = poll_update(t, last_seen, server, latency)
            if polled is not None:
                version, activation_time = polled
                pending_map = (version, activation_time)
                last_seen = version.version_id
                logs["updates"].append(k, t, "poll", version.version_id,
                                       activation_time)

        for ev in sorted((e for e in ldm.events if e.status == PENDING),
                         key=lambda e: e.event_id):
            lhood = sensor_likelihood(ev.position, frames_window,
                                      spec.gate.sensor_support_radius,
                                      spec.sensor_likelihood_window, t)
            decision = evaluate(ev, spec.gate, lhood, t)
            apply_decision(ev, decision)
            logs["gate"].append(k, t, ev.event_id, decision.accepted,
                                decision.support_weight,
                                decision.sensor_likelihood, decision.reason)

        for ev in sorted(ldm.events, key=lambda e: e.event_id):
            if logged_status.get(ev.event_id) != ev.status:
                logged_status[ev.event_id] = ev.status
                logs["events"].append(
                    t, ev.event_id, ev.kind, ev.status, ev.position[0],
                    ev.position[1], ev.first_seen, ev.accepted_at,
                    len(ev.support),
                    _event_is_true(ev.kind, ev.position, spec), 0)

        s_route = spec.route.progress_of(ego.position)
        ttc_now = math.inf
        if mode == FOLLOW and traj is not None:
            ttc_now = ttc_min(ego, traj, unexplained_tracks(ldm, spec.planner),
                              spec.planner.prefix_horizon,
                              spec.vehicle.collision_radius,
                              spec.planner.track_radius, spec.planner.b_obstacle)
            fired = check_triggers(ldm, spec.route, traj, ego, s_route,
                                   spec.triggers, spec.planner, spec.vehicle,
                                   risk_ttc=ttc_now)
            if fired:
                attempt = plan(ego.pose, ego.speed, goal, ldm, spec.planner,
                               spec.vehicle, cause="+".join(fired),
                               base_grid=grid_for(active),
                               start_steering=ego.steering,
                               deviation_field=field_for(active))
                record_plan(attempt, k, t)
                if attempt.succeeded:
                    traj = attempt.trajectory
                else:
                    traj = None
                    mode = SAFETY_STOP
                    stop_tick = k
        elif mode == SAFETY_STOP and k > stop_tick \
                and (k - stop_tick) % RECOVERY_TICKS == 0:
            # retry while the stop ramp still has speed: a stop forced by a
            # transient phantom track should not latch for the whole episode
            attempt = plan(ego.pose, ego.speed, goal, ldm, spec.planner,
                           spec.vehicle, cause="recovery",
                           base_grid=grid_for(active),
                           start_steering=ego.steering,
                           deviation_field=field_for(active))
            record_plan(attempt, k, t)
            if attempt.succeeded:
                traj = attempt.trajectory
                mode = FOLLOW
                pid = PidState()

        if mode == FOLLOW:
            cmd, pid, target_speed = follow_tick(ego, traj, spec.controller,
                                                 pid, spec.vehicle, dt)
        else:
            cmd = safety_stop_command(last_cmd.brake, dt)
            target_speed = 0.0

        heading_ref = heading_along_polyline(ref_path, s_route)
        logs["vehicle"].append(k, t, ego.x, ego.y, ego.heading, ego.speed,
                               ego.steering, ego.throttle, ego.brake, s_route,
                               cross_track_error(ego.pose, ref_path),
                               wrap_angle(ego.heading - heading_ref), ttc_now)
        logs["control"].append(k, t, cmd.steering, cmd.throttle, cmd.brake,
                               target_speed, ego.speed)
        for tr in ldm.objects:
            logs["ldm"].append(k, t, tr.track_id, tr.position[0], tr.position[1],
                               tr.velocity[0], tr.velocity[1], tr.belief)

        ego = step(ego, cmd, spec.vehicle, dt)
        last_cmd = cmd
        ticks_done = k + 1

    for ev in sorted(ldm.events, key=lambda e: e.event_id):
        logs["events"].append(sim_time, ev.event_id, ev.kind, ev.status,
                              ev.position[0], ev.position[1], ev.first_seen,
                              ev.accepted_at, len(ev.support),
                              _event_is_true(ev.kind, ev.position, spec), 1)
    logs["episode"].append(termination, sim_time, ticks_done, collision_flag)

    tables = {name: roundtrip_rows(log) for name, log in logs.items()}
    m = compute_episode_metrics(tables, meta)
    summary = {
        "scenario_id": spec.scenario_id,
        "seed": seed,
        "termination": termination,
        "sim_time": sim_time,
        "metrics": asdict(m),
        "objectives": list(objective_vector(m, spec.metrics)),
        "counters": {"plans": plan_count, "ticks": ticks_done,
                     "events": len(ldm.events), "tracks_born": next_ids["track"][0] - 1,
                     **counters},
    }

    out_path: Path | None = None
    if out_dir is not None:
        out_path = Path(out_dir)
        logs_dir = out_path / "logs"
        for name, log in logs.items():
            log.write(logs_dir / f"{name}.csv")
        write_json(logs_dir / "meta.json", meta)
        write_json(out_path / "summary.json", summary)
        timing.write(out_path / "timing.csv")

    return EpisodeResult(scenario_id=spec.scenario_id, seed=seed, metrics=m,
                         summary=summary, out_dir=out_path)


# ---------------------------------------------------------------------------
# metrics from logs


def compute_episode_metrics(tables: dict[str, list[dict]],
                            meta: dict) -> EpisodeMetrics:
    """Score an episode purely from its (parsed) log tables and meta block."""
    params = MetricParams(**meta["metrics"])
    dt = float(meta["dt"])
    vehicle = tables.get("vehicle", [])
    control = tables.get("control", [])
    episode = tables.get("episode", [])

    ep = episode[0] if episode else {"termination": "timeout", "sim_time": 0.0,
                                     "ticks": 0, "collision": 0}
    termination = str(ep["termination"])
    sim_time = float(ep["sim_time"])
    collisions = int(ep["collision"])

    cross = [row["cross_track"] for row in vehicle]
    head_err = [row["heading_err"] for row in vehicle]
    h_rmse, h_mabs = heading_stats(head_err)

    ttcs = [row["ttc"] for row in vehicle
            if row["ttc"] is not None and math.isfinite(row["ttc"])]
    ttc_min_val = min(ttcs) if ttcs else math.inf

    route_length = float(meta["route_length"])
    progress = 0.0
    if vehicle and route_length > 0.0:
        progress = max(row["s_route"] for row in vehicle) / route_length
        progress = min(max(progress, 0.0), 1.0)

    steer = [row["steering"] for row in control]
    throttle = [row["throttle"] for row in control]
    brakes = [row["brake"] for row in control]
    speeds = [row["speed"] for row in control]

    hazards = meta.get("hazards", [])

    def denm_is_true(row) -> bool:
        if row["event_x"] is None:
            return False
        for hz in hazards:
            if hz["kind"] != row["event_kind"]:
                continue
            d = math.hypot(row["event_x"] - hz["x"], row["event_y"] - hz["y"])
            if d <= float(meta["event_label_radius"]):
                return True
        return False

    reaction = None
    true_denm_times = [row["gen_time"] for row in tables.get("v2x", [])
                       if row["msg_kind"] == "DENM" and denm_is_true(row)]
    if true_denm_times:
        rows = [(row["t"], row["steering"], row["throttle"], row["brake"])
                for row in control]
        reaction = v2x_reaction_ms(min(true_denm_times), rows, params)

    activation = None
    poll_t: dict[int, float] = {}
    for row in tables.get("updates", []):
        if row["action"] == "poll":
            poll_t.setdefault(int(row["version_id"]), float(row["t"]))
        elif row["action"] == "activate" and activation is None:
            vid = int(row["version_id"])
            if vid in poll_t:
                activation = float(row["t"]) - poll_t[vid]

    final_events = {}
    for row in tables.get("events", []):
        final_events[row["event_id"]] = row
    latencies = [(float(row["accepted_at"]) - float(row["first_seen"])) * 1000.0
                 for row in final_events.values()
                 if row["status"] == "accepted" and row["is_true"] == 1
                 and row["accepted_at"] is not None]
    trigger_latency = sum(latencies) / len(latencies) if latencies else None

    fpr, fnr = gate_rates((row["event_id"], bool(row["is_true"]),
                           row["status"] == "accepted")
                          for row in final_events.values())

    gt_by_tick: dict[int, list] = {}
    for row in tables.get("truth", []):
        if row["scored"] == 1:
            gt_by_tick.setdefault(int(row["tick"]), []).append(
                (row["object_id"], row["x"], row["y"]))
    tracks_by_tick: dict[int, list] = {}
    belief_min = float(meta["mot_belief_min"])
    for row in tables.get("ldm", []):
        if row["belief"] >= belief_min:
            tracks_by_tick.setdefault(int(row["tick"]), []).append(
                (row["track_id"], row["x"], row["y"]))
    mota, motp, idsw = clear_mot(gt_by_tick, tracks_by_tick, params.match_radius)

    return EpisodeMetrics(
        lateral_rmse=lateral_rmse(cross),
        heading_rmse_deg=h_rmse,
        heading_mean_abs_deg=h_mabs,
        completion=termination == "goal_reached",
        progress_fraction=progress,
        ttc_min=ttc_min_val,
        collisions=collisions,
        v2x_reaction_ms=reaction,
        update_activation_s=activation,
        trigger_latency_ms=trigger_latency,
        steer_variance=command_variance(steer),
        throttle_variance=command_variance(throttle),
        brake_energy=brake_energy(brakes, speeds, dt),
        mota=mota, motp=motp, id_switches=idsw,
        false_positive_rate=fpr, false_negative_rate=fnr,
        termination=termination, sim_time=sim_time)


def replay(log_dir: str | Path) -> EpisodeMetrics:
    """Recompute metrics from a written log directory."""
    log_dir = Path(log_dir)
    if (log_dir / "logs").is_dir():
        log_dir = log_dir / "logs"
    meta = read_json(log_dir / "meta.json")
    tables = {name: read_csv(log_dir / f"{name}.csv") for name in LOG_NAMES
              if (log_dir / f"{name}.csv").exists()}
    return compute_episode_metrics(tables, meta)


# ---------------------------------------------------------------------------
# batch and sweep fronts


def run_batch(spec: ScenarioSpec, seeds, out_dir: str | Path | None = None
              ) -> tuple[list[EpisodeResult], dict]:
    """Run one scenario over distinct seeds and aggregate the results."""
    seeds = [int(s) for s in seeds]
    if len(set(seeds)) != len(seeds):
        raise ValueError("seeds must be distinct")
    out_path = Path(out_dir) if out_dir is not None else None
    results = []
    for s in seeds:
        sub = out_path / f"seed-{s:04d}" if out_path is not None else None
        results.append(run_episode(spec, s, sub))
    payload = {
        "scenario_id": spec.scenario_id,
        "seeds": seeds,
        "aggregate": aggregate([r.metrics for r in results]),
        "episodes": [{"seed": r.seed,
                      "termination": r.metrics.termination,
                      "metrics": asdict(r.metrics)} for r in results],
    }
    if out_path is not None:
        write_json(out_path / "batch.json", payload)
    return results, payload


def make_episode_runner(base_specs: dict[str, ScenarioSpec]):
    """Adapter giving the sweep protocol its (config, scenario, seed) episode."""
    def runner(config, scenario_id: str, seed: int):
        spec = apply_configuration(base_specs[scenario_id], config)
        result = run_episode(spec, seed)
        vec = objective_vector(result.metrics, spec.metrics)
        return vec, result.metrics.collisions > 0
    return runner


def run_sweep(grid: dict, scenario_ids, seeds,
              out_dir: str | Path | None = None,
              base_specs: dict[str, ScenarioSpec] | None = None,
              hv_reference=(1.1, 1.1, 1.1)) -> ParetoResult:
    """Grid-sweep operating points across scenarios; persist frontier artifacts."""
    scenario_ids = list(scenario_ids)
    seeds = [int(s) for s in seeds]
    if len(set(seeds)) != len(seeds):
        raise ValueError("seeds must be distinct")
    if base_specs is None:
        base_specs = {sid: build_scenario(sid) for sid in scenario_ids}
    configs = config_grid(grid)
    result = pareto_sweep(configs, make_episode_runner(base_specs), seeds,
                          scenario_ids, hv_reference=hv_reference)

    if out_dir is not None:
        out_path = Path(out_dir)
        by_id = {c.config_id: c for c in configs}
        frontier_ids = {p.config_id for p in result.frontier}
        knee_id = result.knee.config_id if result.knee is not None else None
        table = CsvLog(("config_id", "look_ahead", "k_p", "k_i", "k_d",
                        "tau_risk", "hazard_lookahead", "update_poll_interval",
                        "j_trk", "j_sfty", "j_resp", "j_smth", "j_eng",
                        "collided", "on_frontier", "is_knee"))
        for p in result.points:
            c = by_id[p.config_id]
            table.append(c.config_id, c.look_ahead, c.k_p, c.k_i, c.k_d,
                         c.tau_risk, c.hazard_lookahead, c.update_poll_interval,
                         *p.objectives, p.collided, p.config_id in frontier_ids,
                         p.config_id == knee_id)
        table.write(out_path / "sweep.csv")
        write_json(out_path / "pareto.json", {
            "scenario_ids": scenario_ids,
            "seeds": seeds,
            "grid": grid,
            "frontier": sorted(frontier_ids),
            "knee": None if result.knee is None else {
                "config_id": result.knee.config_id,
                "objectives": list(result.knee.objectives),
                "normalized": list(result.knee.normalized)},
            "hypervolume": result.hypervolume,
            "discarded_collided": result.discarded_collided,
        })
    return result
