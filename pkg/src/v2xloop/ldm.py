"""Local dynamic map: sliding-window fusion of detections and V2X messages.

Object tracks carry an existence belief updated in log-odds form; one update
folds in the onboard sensor's likelihood ratio and a weighted likelihood
ratio per corroborating V2X source. A covering sensor frame that sees
nothing at a track is contradiction evidence, which is what lets the ego
veto V2X claims about its own field of view. DENMs accumulate into event
hypotheses that stay pending until the acceptance gate or expiry decides.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .perception import SenseFrame
from .v2x import CAM, DENM, V2xMessage
from .world import MapVersion


@dataclass(frozen=True)
class LdmParams:
    tau_sync: float = 0.1             # [s] synchronization window
    d_gate: float = 2.0               # [m] association gate
    b_prune: float = 0.05             # drop tracks below this belief
    tau_stale: float = 1.0            # [s] drop tracks unsupported this long
    tau_event: float = 5.0            # [s] pending hypotheses expire after this
    b_birth: float = 0.5              # initial belief: below the planner's
                                      # obstacle threshold, so one clutter hit
                                      # never conjures a confident obstacle
    conf_birth: float = 0.5           # min confidence for an item to seed a track
    event_position_alpha: float = 0.25  # post-acceptance claim blending rate
    lr_detect: float = 3.0            # sensor likelihood ratio, supported
    lr_cam: float = 2.0               # per-station V2X likelihood ratio
    lr_absent_cap: float = 0.2        # ceiling on the contradiction ratio
    p_miss_assumed: float = 0.15      # miss rate used to derive the contradiction ratio
    clutter_term: float = 0.3         # false-alarm term in the contradiction ratio
    belief_floor: float = 0.01
    belief_ceiling: float = 0.99
    position_alpha: float = 0.35      # EMA gain for track position updates
    velocity_alpha: float = 0.3
    event_merge_radius: float = 15.0  # [m] DENM-to-hypothesis merge distance
    event_merge_window: float = 3.0   # [s] max report age gap when merging


def contradiction_ratio(params: LdmParams) -> float:
    """Likelihood ratio for a covering frame that reported nothing."""
    denom = max(1e-6, 1.0 - min(params.clutter_term, 0.95))
    return min(params.lr_absent_cap, params.p_miss_assumed / denom)


# ---------------------------------------------------------------------------
# state containers


@dataclass
class Track:
    track_id: str
    position: tuple[float, float]
    velocity: tuple[float, float]
    belief: float
    last_update: float
    born_at: float
    sources: set = field(default_factory=set)

    def predicted(self, t: float) -> tuple[float, float]:
        dt = max(0.0, t - self.last_update)
        return (self.position[0] + self.velocity[0] * dt,
                self.position[1] + self.velocity[1] * dt)


PENDING = "pending"
ACCEPTED = "accepted"
REJECTED = "rejected"
EXPIRED = "expired"


@dataclass
class EventHypothesis:
    event_id: str
    kind: str
    position: tuple[float, float]
    first_seen: float
    # latest authenticated claim per station: id -> (recv_time, claimed position)
    support: dict = field(default_factory=dict)
    status: str = PENDING
    accepted_at: float | None = None

    def support_stations(self) -> list[str]:
        return sorted(self.support)

    def refresh_position(self, alpha: float | None = None) -> None:
        """Blend the mean of the stations' latest claims into the location.

        alpha None replaces the location outright (pending spin-up); a
        fraction eases it in, so repeated report rounds average down the
        per-round noise instead of each round resetting the estimate.
        """
        claims = [pos for _, pos in self.support.values()]
        if not claims:
            return
        mx = sum(c[0] for c in claims) / len(claims)
        my = sum(c[1] for c in claims) / len(claims)
        if alpha is None:
            self.position = (mx, my)
        else:
            self.position = (self.position[0] + alpha * (mx - self.position[0]),
                             self.position[1] + alpha * (my - self.position[1]))


@dataclass
class LdmState:
    stamp: float
    objects: list      # list[Track]
    events: list       # list[EventHypothesis]
    active_map: MapVersion

    def accepted_events(self):
        return [e for e in self.events if e.status == ACCEPTED]

    def obstacles(self, b_obstacle: float):
        return [t for t in self.objects if t.belief >= b_obstacle]


# ---------------------------------------------------------------------------
# operators


@dataclass(frozen=True)
class SyncBundle:
    window_end: float
    window: float
    items: tuple       # (timestamp, payload) pairs, oldest first


def synchronize(buffer: list, t: float, tau_sync: float) -> SyncBundle:
    """Select items with t - tau <= t_k <= t; the buffer drops older ones.

    `buffer` is a list of (timestamp, item) pairs and is pruned in place so
    the caller's retention matches the window.
    """
    kept = [(tk, item) for tk, item in buffer if t - tau_sync <= tk <= t]
    late = [(tk, item) for tk, item in buffer if tk > t]
    buffer[:] = kept + late
    kept.sort(key=lambda pair: pair[0])
    return SyncBundle(window_end=t, window=tau_sync, items=tuple(kept))


@dataclass(frozen=True)
class Measurement:
    """Association input: one detection or one CAM, in world coordinates."""

    position: tuple[float, float]
    velocity: tuple[float, float]
    confidence: float
    source: str                       # "sensor" or "cam:<station_id>"
    timestamp: float


def associate(measurements, tracks, d_gate: float, now: float):
    """Greedy nearest-neighbor assignment inside the gate.

    Each measurement lands on at most one track; a track may collect several
    (a detection and a CAM can both support it in the same tick). Returns
    (assigned: track_id -> [measurement], births: [measurement]).
    """
    predicted = {tr.track_id: tr.predicted(now) for tr in tracks}
    pairs = []
    for mi, m in enumerate(measurements):
        for tr in tracks:
            px, py = predicted[tr.track_id]
            d = math.hypot(m.position[0] - px, m.position[1] - py)
            if d <= d_gate:
                pairs.append((d, mi, tr.track_id))
    pairs.sort(key=lambda p: (p[0], p[1], p[2]))

    assigned: dict[str, list] = {}
    taken: set[int] = set()
    for d, mi, tid in pairs:
        if mi in taken:
            continue
        taken.add(mi)
        assigned.setdefault(tid, []).append(measurements[mi])
    births = [m for i, m in enumerate(measurements) if i not in taken]
    return assigned, births


def update_belief(belief: float, lr_sensor: float, v2x_support,
                  params: LdmParams) -> float:
    """Log-odds fusion: logit(b') = logit(b) + ln LR_sensor + sum w ln LR_i."""
    if not math.isfinite(lr_sensor) or lr_sensor <= 0.0:
        raise ValueError("lr_sensor must be finite and positive")
    b = min(max(belief, params.belief_floor), params.belief_ceiling)
    logit = math.log(b / (1.0 - b)) + math.log(lr_sensor)
    for weight, lr in v2x_support:
        if not math.isfinite(lr) or lr <= 0.0:
            raise ValueError("v2x likelihood ratios must be finite and positive")
        logit += weight * math.log(lr)
    b_new = 1.0 / (1.0 + math.exp(-logit))
    return min(max(b_new, params.belief_floor), params.belief_ceiling)


def ingest_denm(msg: V2xMessage, events: list, params: LdmParams,
                counters: dict, next_event_no: list) -> EventHypothesis | None:
    """Fold one DENM into the hypothesis set.

    Merges into the nearest same-kind hypothesis within the merge radius
    whose latest report is recent enough, otherwise opens a new pending
    hypothesis. Kinds never mix: a closure claim next to a stalled-vehicle
    hypothesis is a different assertion about the world, not a corroboration.
    Unauthenticated messages are dropped and counted. Returns the touched
    hypothesis, or None for a drop.
    """
    if msg.msg_kind != DENM:
        raise ValueError("ingest_denm expects a DENM")
    if not msg.authenticated:
        counters["unauthenticated_denms"] = counters.get("unauthenticated_denms", 0) + 1
        return None
    claim = tuple(msg.payload.event_position)
    recv = msg.recv_time if msg.recv_time is not None else msg.gen_time

    best = None
    best_d = None
    for hyp in events:
        if hyp.status in (EXPIRED, REJECTED):
            continue
        if hyp.kind != msg.payload.event_kind:
            continue
        d = math.hypot(claim[0] - hyp.position[0], claim[1] - hyp.position[1])
        if d > params.event_merge_radius:
            continue
        last_report = max((rt for rt, _ in hyp.support.values()), default=hyp.first_seen)
        if recv - last_report > params.event_merge_window:
            continue
        if best is None or d < best_d:
            best, best_d = hyp, d

    if best is None:
        event_id = f"E{next_event_no[0]}"
        next_event_no[0] += 1
        best = EventHypothesis(event_id=event_id, kind=msg.payload.event_kind,
                               position=claim, first_seen=recv)
        events.append(best)
    best.support[msg.station_id] = (recv, claim)
    if best.status == PENDING:
        best.refresh_position()
    elif best.status == ACCEPTED:
        best.refresh_position(alpha=params.event_position_alpha)
    return best


def fuse_tick(prev: LdmState, bundle: SyncBundle, delivered_v2x,
              active_map: MapVersion, frames_this_tick, params: LdmParams,
              now: float, counters: dict | None = None,
              next_ids: dict | None = None) -> LdmState:
    """One fusion step over the synchronized bundle and fresh V2X deliveries.

    Items older than the previous stamp were already consumed by an earlier
    tick and only ride along in the window for late-arrival tolerance, so
    belief updates count each item exactly once.
    """
    counters = counters if counters is not None else {}
    next_ids = next_ids if next_ids is not None else {"track": [1], "event": [1]}
    tracks: list[Track] = prev.objects

    measurements: list[Measurement] = []
    for tk, item in bundle.items:
        if tk <= prev.stamp and prev.stamp > 0.0:
            continue
        for det in item.detections:
            measurements.append(Measurement(
                position=det.world_position, velocity=det.world_velocity,
                confidence=det.confidence, source="sensor", timestamp=tk))
    denms = []
    for msg in delivered_v2x:
        if msg.msg_kind == CAM:
            measurements.append(Measurement(
                position=tuple(msg.payload.position),
                velocity=tuple(msg.payload.velocity),
                confidence=1.0, source=f"cam:{msg.station_id}",
                timestamp=msg.recv_time if msg.recv_time is not None else msg.gen_time))
        elif msg.msg_kind == DENM:
            denms.append(msg)

    assigned, births = associate(measurements, tracks, params.d_gate, now)

    kept: list[Track] = []
    for tr in tracks:
        ms = assigned.get(tr.track_id, [])
        sensor_hits = [m for m in ms if m.source == "sensor"]
        cam_hits = [m for m in ms if m.source.startswith("cam:")]

        if ms:
            mx = sum(m.position[0] for m in ms) / len(ms)
            my = sum(m.position[1] for m in ms) / len(ms)
            a = params.position_alpha
            px, py = tr.predicted(now)
            tr.position = (px + a * (mx - px), py + a * (my - py))
            vx = sum(m.velocity[0] for m in ms) / len(ms)
            vy = sum(m.velocity[1] for m in ms) / len(ms)
            av = params.velocity_alpha
            tr.velocity = (tr.velocity[0] + av * (vx - tr.velocity[0]),
                           tr.velocity[1] + av * (vy - tr.velocity[1]))
            tr.last_update = now
            tr.sources.update(m.source for m in ms)

        covered = any(f.covers(tr.predicted(now)) for f in frames_this_tick)
        if sensor_hits:
            lr_sensor = params.lr_detect
        elif covered:
            lr_sensor = contradiction_ratio(params)
        else:
            lr_sensor = 1.0
        v2x_support = [(1.0, params.lr_cam) for _ in {m.source for m in cam_hits}]
        tr.belief = update_belief(tr.belief, lr_sensor, v2x_support, params)

        if tr.belief < params.b_prune:
            continue
        if now - tr.last_update > params.tau_stale:
            continue
        kept.append(tr)

    for m in births:
        if m.confidence < params.conf_birth:
            continue
        tid = f"T{next_ids['track'][0]}"
        next_ids["track"][0] += 1
        kept.append(Track(track_id=tid, position=m.position, velocity=m.velocity,
                          belief=params.b_birth, last_update=now, born_at=now,
                          sources={m.source}))

    events = prev.events
    for msg in denms:
        ingest_denm(msg, events, params, counters, next_ids["event"])
    for hyp in events:
        if hyp.status == PENDING and now - hyp.first_seen > params.tau_event:
            hyp.status = EXPIRED

    return LdmState(stamp=now, objects=kept, events=events, active_map=active_map)


def initial_state(active_map: MapVersion) -> LdmState:
    return LdmState(stamp=0.0, objects=[], events=[], active_map=active_map)
