"""Static world model: versioned maps, routes, hazards, and the update server.

Map versions are value snapshots. Publishing a new version never mutates an
old one, so an episode can be replayed against the exact map knowledge the
ego held at every tick. All geometry lives in a single global frame with x
east, y north, headings in radians counterclockwise from +x.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

TWO_PI = 2.0 * math.pi


def wrap_angle(a: float) -> float:
    """Wrap to [-pi, pi)."""
    return (a + math.pi) % TWO_PI - math.pi


# ---------------------------------------------------------------------------
# polyline geometry


def polyline_cumlength(path: np.ndarray) -> np.ndarray:
    d = np.diff(np.asarray(path, dtype=float), axis=0)
    seg = np.hypot(d[:, 0], d[:, 1])
    return np.concatenate([[0.0], np.cumsum(seg)])


def project_to_polyline(point, path: np.ndarray) -> tuple[float, float, int]:
    """Project a point onto a polyline.

    Returns (arc_length, signed_lateral, segment_index). Lateral offset is
    positive on the left of the local path direction.
    """
    p = np.asarray(path, dtype=float)
    if p.ndim != 2 or p.shape[0] < 2 or p.shape[1] != 2:
        raise ValueError("path must be an (N, 2) array with N >= 2")
    q = np.asarray(point, dtype=float)[:2]
    a = p[:-1]
    d = p[1:] - a
    len2 = (d * d).sum(axis=1)
    len2_safe = np.where(len2 < 1e-18, 1.0, len2)
    t = np.clip(((q - a) * d).sum(axis=1) / len2_safe, 0.0, 1.0)
    t = np.where(len2 < 1e-18, 0.0, t)
    closest = a + t[:, None] * d
    diff = q - closest
    dist2 = (diff * diff).sum(axis=1)
    i = int(np.argmin(dist2))
    seg_len = math.sqrt(len2[i]) if len2[i] > 1e-18 else 0.0
    cum = polyline_cumlength(p)
    s = float(cum[i] + t[i] * seg_len)
    cross = d[i, 0] * diff[i, 1] - d[i, 1] * diff[i, 0]
    lateral = math.sqrt(float(dist2[i]))
    if cross < 0.0:
        lateral = -lateral
    return s, lateral, i


def point_along_polyline(path: np.ndarray, s: float) -> np.ndarray:
    """Point at arc length s, clamped to the polyline extent."""
    p = np.asarray(path, dtype=float)
    cum = polyline_cumlength(p)
    s = float(np.clip(s, 0.0, cum[-1]))
    i = int(np.searchsorted(cum, s, side="right")) - 1
    i = min(max(i, 0), len(p) - 2)
    seg = cum[i + 1] - cum[i]
    t = 0.0 if seg < 1e-12 else (s - cum[i]) / seg
    return p[i] + t * (p[i + 1] - p[i])


def heading_along_polyline(path: np.ndarray, s: float) -> float:
    p = np.asarray(path, dtype=float)
    cum = polyline_cumlength(p)
    s = float(np.clip(s, 0.0, cum[-1]))
    i = int(np.searchsorted(cum, s, side="right")) - 1
    i = min(max(i, 0), len(p) - 2)
    d = p[i + 1] - p[i]
    return math.atan2(d[1], d[0])


def cross_track_error(pose, reference_path: np.ndarray) -> float:
    """Signed lateral offset of a pose from a reference path, left positive."""
    _, lateral, _ = project_to_polyline(pose, reference_path)
    return lateral


# ---------------------------------------------------------------------------
# map layers


@dataclass(frozen=True)
class LaneSegment:
    segment_id: str
    polyline: np.ndarray          # (N, 2) [m]
    half_width: float = 4.0       # [m] drivable half width around the centerline
    closed: bool = False

    def __post_init__(self):
        p = np.asarray(self.polyline, dtype=float)
        if p.ndim != 2 or p.shape[0] < 2 or p.shape[1] != 2:
            raise ValueError(f"segment {self.segment_id}: polyline must be (N, 2), N >= 2")
        object.__setattr__(self, "polyline", p)


@dataclass(frozen=True)
class OccupancyGrid:
    """Boolean grid, True = occupied. origin is the world corner of cell (0, 0)."""

    cells: np.ndarray             # (ny, nx) bool
    cell_size: float              # [m]
    origin: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        c = np.asarray(self.cells, dtype=bool)
        object.__setattr__(self, "cells", c)
        if self.cell_size <= 0.0:
            raise ValueError("cell_size must be positive")

    @property
    def shape(self) -> tuple[int, int]:
        return self.cells.shape

    def index_of(self, x: float, y: float) -> tuple[int, int]:
        ix = int(math.floor((x - self.origin[0]) / self.cell_size))
        iy = int(math.floor((y - self.origin[1]) / self.cell_size))
        return ix, iy

    def in_bounds(self, ix: int, iy: int) -> bool:
        ny, nx = self.cells.shape
        return 0 <= ix < nx and 0 <= iy < ny

    def occupied_at(self, x: float, y: float) -> bool:
        """True if the cell under (x, y) is occupied or out of bounds."""
        ix, iy = self.index_of(x, y)
        if not self.in_bounds(ix, iy):
            return True
        return bool(self.cells[iy, ix])


def empty_grid(size_x: float, size_y: float, cell_size: float = 0.5,
               origin: tuple[float, float] = (0.0, 0.0),
               occupied: bool = False) -> OccupancyGrid:
    nx = int(round(size_x / cell_size))
    ny = int(round(size_y / cell_size))
    cells = np.full((ny, nx), occupied, dtype=bool)
    return OccupancyGrid(cells=cells, cell_size=cell_size, origin=origin)


def _disk_cells(grid: OccupancyGrid, center, radius: float):
    """Index arrays (iy, ix) of all cells whose center lies within radius."""
    cs = grid.cell_size
    cx = (center[0] - grid.origin[0]) / cs
    cy = (center[1] - grid.origin[1]) / cs
    r = radius / cs
    ny, nx = grid.cells.shape
    x0 = max(0, int(math.floor(cx - r - 1)))
    x1 = min(nx - 1, int(math.ceil(cx + r + 1)))
    y0 = max(0, int(math.floor(cy - r - 1)))
    y1 = min(ny - 1, int(math.ceil(cy + r + 1)))
    if x1 < x0 or y1 < y0:
        return None
    xs = np.arange(x0, x1 + 1)
    ys = np.arange(y0, y1 + 1)
    xx, yy = np.meshgrid(xs, ys)
    mask = (xx + 0.5 - cx) ** 2 + (yy + 0.5 - cy) ** 2 <= r * r
    return yy[mask], xx[mask]


def mark_disk(cells: np.ndarray, grid: OccupancyGrid, center, radius: float,
              value: bool = True) -> None:
    hit = _disk_cells(grid, center, radius)
    if hit is not None:
        cells[hit] = value


def stamp_polyline(cells: np.ndarray, grid: OccupancyGrid, polyline: np.ndarray,
                   radius: float, value: bool = True) -> None:
    """Mark every cell within `radius` of the polyline."""
    p = np.asarray(polyline, dtype=float)
    step = grid.cell_size * 0.5
    for i in range(len(p) - 1):
        a, b = p[i], p[i + 1]
        seg = math.hypot(b[0] - a[0], b[1] - a[1])
        n = max(2, int(math.ceil(seg / step)) + 1)
        for t in np.linspace(0.0, 1.0, n):
            mark_disk(cells, grid, a + t * (b - a), radius, value)


def inflate(grid: OccupancyGrid, radius: float) -> OccupancyGrid:
    """Dilate occupied cells by a metric radius (for point-robot planning)."""
    if radius <= 0.0:
        return grid
    r_cells = radius / grid.cell_size
    r = int(math.ceil(r_cells))
    src = grid.cells
    out = src.copy()
    ny, nx = src.shape
    for di in range(-r, r + 1):
        for dj in range(-r, r + 1):
            if di == 0 and dj == 0:
                continue
            if di * di + dj * dj > r_cells * r_cells + 1e-9:
                continue
            ys = slice(max(0, di), min(ny, ny + di))
            yd = slice(max(0, -di), min(ny, ny - di))
            xs = slice(max(0, dj), min(nx, nx + dj))
            xd = slice(max(0, -dj), min(nx, nx - dj))
            out[yd, xd] |= src[ys, xs]
    return OccupancyGrid(cells=out, cell_size=grid.cell_size, origin=grid.origin)


@dataclass(frozen=True)
class MapVersion:
    version_id: int
    lane_graph: tuple[LaneSegment, ...]
    occupancy: OccupancyGrid
    created_at: float = 0.0

    def __post_init__(self):
        if self.version_id < 0:
            raise ValueError("version_id must be non-negative")
        object.__setattr__(self, "lane_graph", tuple(self.lane_graph))

    def segment(self, segment_id: str) -> LaneSegment:
        for seg in self.lane_graph:
            if seg.segment_id == segment_id:
                return seg
        raise KeyError(segment_id)


def planning_occupancy(version: MapVersion, vehicle_radius: float) -> OccupancyGrid:
    """Planner-facing view: base grid, closed segments stamped in, inflated."""
    cells = version.occupancy.cells.copy()
    for seg in version.lane_graph:
        if seg.closed:
            stamp_polyline(cells, version.occupancy, seg.polyline, seg.half_width)
    raw = OccupancyGrid(cells=cells, cell_size=version.occupancy.cell_size,
                        origin=version.occupancy.origin)
    return inflate(raw, vehicle_radius)


def build_corridor_map(version_id: int, segments: list[LaneSegment],
                       size_x: float, size_y: float, cell_size: float = 0.5,
                       created_at: float = 0.0) -> MapVersion:
    """Occupancy from a lane graph: everything is wall except open corridors."""
    grid = empty_grid(size_x, size_y, cell_size, occupied=True)
    cells = grid.cells
    for seg in segments:
        if not seg.closed:
            stamp_polyline(cells, grid, seg.polyline, seg.half_width, value=False)
    occ = OccupancyGrid(cells=cells, cell_size=cell_size, origin=grid.origin)
    return MapVersion(version_id=version_id, lane_graph=tuple(segments),
                      occupancy=occ, created_at=created_at)


# ---------------------------------------------------------------------------
# routes, hazards, dynamic truth


@dataclass(frozen=True)
class Route:
    reference_path: np.ndarray    # (N, 2) [m]
    goal_pose: tuple[float, float, float]
    segment_ids: tuple[str, ...] = ()

    def __post_init__(self):
        p = np.asarray(self.reference_path, dtype=float)
        if p.ndim != 2 or p.shape[0] < 2:
            raise ValueError("reference_path must be (N, 2) with N >= 2")
        object.__setattr__(self, "reference_path", p)

    @property
    def length(self) -> float:
        return float(polyline_cumlength(self.reference_path)[-1])

    def progress_of(self, position) -> float:
        s, _, _ = project_to_polyline(position, self.reference_path)
        return s


def is_on_route(position, route: Route, ego_progress: float,
                lateral_corridor: float, lookahead: float) -> bool:
    """True iff the point projects inside the ahead-window corridor.

    The window is [ego_progress, ego_progress + lookahead] in arc length and
    |lateral| <= lateral_corridor. Points behind the ego are never on route.
    """
    s, lateral, _ = project_to_polyline(position, route.reference_path)
    if s < ego_progress or s > ego_progress + lookahead:
        return False
    return abs(lateral) <= lateral_corridor


HAZARD_KINDS = ("stationary_vehicle", "debris", "road_closure")


@dataclass(frozen=True)
class GroundTruthHazard:
    hazard_id: str
    position: tuple[float, float]
    kind: str
    spawn_time: float = 0.0
    observable_by_sensing: bool = True
    radius: float = 1.0           # [m] collision body

    def __post_init__(self):
        if self.kind not in HAZARD_KINDS:
            raise ValueError(f"unknown hazard kind {self.kind!r}")


@dataclass(frozen=True)
class WorldObject:
    """Dynamic truth snapshot used for sensing, collision, and MOT scoring."""

    object_id: str
    position: tuple[float, float]
    velocity: tuple[float, float]
    radius: float = 1.0


# ---------------------------------------------------------------------------
# update server


@dataclass(frozen=True)
class UpdateServerState:
    published: tuple[tuple[float, MapVersion], ...] = ()

    def latest_version_id(self) -> int:
        return self.published[-1][1].version_id if self.published else -1


def publish_version(server: UpdateServerState, version: MapVersion,
                    publish_time: float) -> UpdateServerState:
    """Append a strictly newer version; rejects non-monotonic ids and times."""
    if server.published:
        last_time, last_ver = server.published[-1]
        if version.version_id <= last_ver.version_id:
            raise ValueError("version_id must be strictly increasing")
        if publish_time < last_time:
            raise ValueError("publish_time must be non-decreasing")
    return UpdateServerState(published=server.published + ((publish_time, version),))


def poll_update(client_time: float, last_seen_version: int,
                server: UpdateServerState,
                download_latency: float) -> tuple[MapVersion, float] | None:
    """Return (newest visible version, activation_time) or None if up to date.

    activation_time = client_time + download_latency; the caller defers the
    actual swap to its next tick boundary.
    """
    best = None
    for publish_time, version in server.published:
        if publish_time <= client_time and version.version_id > last_seen_version:
            if best is None or version.version_id > best.version_id:
                best = version
    if best is None:
        return None
    return best, client_time + float(download_latency)
