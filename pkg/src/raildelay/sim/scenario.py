"""Scenario description: track geometry, train run, operators and routing constants."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Tuple

import numpy as np

from ..data import DEFAULT_BOUNDARY_LON, DelayKind
from .network import CellSite, OperatorNetwork
from .radio import EARTH_RADIUS_M, haversine_m


class ScenarioError(ValueError):
    """Inconsistent or invalid scenario parameters."""


@dataclass(frozen=True, eq=False)
class Track:
    """Polyline of (lat, lon) vertices with cumulative chainage in km."""

    vertices: Tuple[Tuple[float, float], ...]

    def __post_init__(self):
        verts = tuple((float(a), float(b)) for a, b in self.vertices)
        if len(verts) < 2:
            raise ScenarioError("a track needs at least 2 vertices")
        object.__setattr__(self, "vertices", verts)
        arr = np.array(verts)
        seg = haversine_m(arr[:-1, 0], arr[:-1, 1], arr[1:, 0], arr[1:, 1]) / 1000.0
        if np.any(seg <= 0):
            raise ScenarioError("track chainage must be strictly increasing")
        object.__setattr__(self, "_lat", arr[:, 0])
        object.__setattr__(self, "_lon", arr[:, 1])
        object.__setattr__(self, "chainage", np.concatenate([[0.0], np.cumsum(seg)]))

    def __eq__(self, other):
        return isinstance(other, Track) and self.vertices == other.vertices

    def __hash__(self):
        return hash(self.vertices)

    @property
    def length_km(self) -> float:
        return float(self.chainage[-1])

    def position(self, chainage_km):
        """(lat, lon) at the given chainage, by linear interpolation along segments."""
        c = np.asarray(chainage_km, dtype=float)
        return (np.interp(c, self.chainage, self._lat),
                np.interp(c, self.chainage, self._lon))

    def heading(self, chainage_km):
        """Unit direction (east, north) of the segment containing each chainage."""
        c = np.asarray(chainage_km, dtype=float)
        i = np.clip(np.searchsorted(self.chainage, c, side="right") - 1,
                    0, len(self.vertices) - 2)
        lat0 = np.radians(self._lat[i])
        dx = np.radians(self._lon[i + 1] - self._lon[i]) * np.cos(lat0)
        dy = np.radians(self._lat[i + 1] - self._lat[i])
        norm = np.hypot(dx, dy)
        return dx / norm, dy / norm


@dataclass(frozen=True)
class TrainRun:
    """Piecewise-constant speed profile of ``(duration_s, speed_kmh)`` segments."""

    segments: Tuple[Tuple[float, float], ...]
    duration: int
    start_km: float = 0.0

    def __post_init__(self):
        segs = tuple((float(d), float(v)) for d, v in self.segments)
        object.__setattr__(self, "segments", segs)
        if not segs:
            raise ScenarioError("speed profile is empty")
        if any(d <= 0 for d, _ in segs):
            raise ScenarioError("speed profile segment durations must be > 0")
        if any(v < 0 for _, v in segs):
            raise ScenarioError("speeds must be >= 0")
        if self.duration < 1:
            raise ScenarioError("run duration must be >= 1 s")
        if sum(d for d, _ in segs) < self.duration:
            raise ScenarioError("speed profile is shorter than the run duration")
        if self.start_km < 0:
            raise ScenarioError("start chainage must be >= 0")

    def speed_at(self, t):
        ends = np.cumsum([d for d, _ in self.segments])
        speeds = np.array([v for _, v in self.segments])
        idx = np.searchsorted(ends, np.asarray(t, dtype=float), side="right")
        return speeds[np.minimum(idx, len(speeds) - 1)]

    def chainage_at(self, t):
        """Chainage (km) at each sample time, integrating the speed profile."""
        t = np.asarray(t, dtype=float)
        bounds = np.concatenate([[0.0], np.cumsum([d for d, _ in self.segments])])
        speeds = np.array([v for _, v in self.segments])
        dist = np.concatenate([[0.0], np.cumsum(speeds * np.diff(bounds) / 3600.0)])
        return self.start_km + np.interp(t, bounds, dist)


DEFAULT_DELAY_OFFSETS = {
    DelayKind.POSITION_REPORT: 30.0,
    DelayKind.MOVEMENT_AUTHORITY: 55.0,
    DelayKind.TCP: 0.0,
    DelayKind.HTTP: 40.0,
    DelayKind.DNS: 8.0,
}


@dataclass(frozen=True)
class ScenarioConfig:
    track: Track
    operators: Tuple[OperatorNetwork, OperatorNetwork, OperatorNetwork]
    run: TrainRun
    assessment_period: int = 5
    assessment_overhead: float = 20.0
    delay_kind_offsets: Dict[DelayKind, float] = field(
        default_factory=lambda: dict(DEFAULT_DELAY_OFFSETS))
    seed: int = 0
    boundary_lon: float = DEFAULT_BOUNDARY_LON

    def __post_init__(self):
        object.__setattr__(self, "operators", tuple(self.operators))
        if len(self.operators) != 3:
            raise ScenarioError(f"exactly 3 operators required, got {len(self.operators)}")
        for i, op in enumerate(self.operators, start=1):
            if op.operator_id != i:
                raise ScenarioError(f"operator {i} has sites tagged {op.operator_id}")
        if self.assessment_period < 1:
            raise ScenarioError("assessment_period must be >= 1 s")
        if self.assessment_overhead < 0:
            raise ScenarioError("assessment_overhead must be >= 0")
        if not 0 <= self.seed < 2**64:
            raise ScenarioError("seed must be a 64-bit unsigned integer")
        if self.run.start_km >= self.track.length_km:
            raise ScenarioError(
                f"run starts at {self.run.start_km} km beyond the "
                f"{self.track.length_km:.1f} km track"
            )
        missing = [k.key for k in DelayKind if k not in self.delay_kind_offsets]
        if missing:
            raise ScenarioError(f"missing delay offsets for {', '.join(missing)}")


@dataclass(frozen=True)
class SiteLayout:
    """Recipe for placing one operator's sites along a track."""

    spacing_km: float = 5.0
    offset_min_m: float = 200.0
    offset_max_m: float = 1500.0
    ref_power: float = -55.0
    ref_power_spread: float = 4.0
    east_ref_power_offset: float = 0.0

    def __post_init__(self):
        if self.spacing_km <= 0:
            raise ScenarioError("site spacing must be > 0")
        if not 0 <= self.offset_min_m <= self.offset_max_m:
            raise ScenarioError("site offsets must satisfy 0 <= min <= max")


def place_sites(track: Track, layout: SiteLayout, operator_id: int, rng,
                boundary_lon: float = DEFAULT_BOUNDARY_LON):
    """Sites every ``spacing_km`` along the track, pushed sideways by a random offset."""
    rng = np.random.default_rng(rng)
    start = rng.uniform(0.0, layout.spacing_km)
    chain = np.arange(start, track.length_km, layout.spacing_km)
    n = chain.size
    if n == 0:
        chain = np.array([track.length_km / 2])
        n = 1
    lat, lon = track.position(chain)
    ex, ny = track.heading(chain)
    side = rng.choice([-1.0, 1.0], size=n)
    offset = rng.uniform(layout.offset_min_m, layout.offset_max_m, size=n) * side
    # left-hand normal of the heading
    dx, dy = -ny * offset, ex * offset
    site_lat = lat + np.degrees(dy / EARTH_RADIUS_M)
    site_lon = lon + np.degrees(dx / (EARTH_RADIUS_M * np.cos(np.radians(lat))))
    ref = layout.ref_power + rng.uniform(-layout.ref_power_spread, layout.ref_power_spread, n)
    ref = ref + np.where(site_lon >= boundary_lon, layout.east_ref_power_offset, 0.0)
    ref = np.clip(ref, -70.0, -40.0)
    return tuple(
        CellSite(operator_id, round(float(a), 6), round(float(b), 6), round(float(r), 2))
        for a, b, r in zip(site_lat, site_lon, ref)
    )
