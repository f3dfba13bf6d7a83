"""AABB collision detection and placement repair.

Detection inflates every box by the buffer on all sides; a collision is a
positive-volume overlap of inflated boxes, so face contact (including contact
at exactly twice the buffer) does not count.

Repair runs per moved object, in the given order, with everything else
(including already-repaired movers) anchored:

1. delta phase - retry the intended pose lifted by k*delta on +z,
   k = 1..max_delta_steps;
2. grid phase - candidate centers on a regular grid anchored at the intended
   center, spanning the union box of the objects involved in this object's
   collisions expanded by twice the mover's largest extent, visited in
   ascending distance from the intended center with the documented
   (+x, -x, +y, -y, +z, -z) tie-break. The first valid cell wins.

A candidate is valid when its buffer-inflated box overlaps no other object's
buffer-inflated box and its raw box lies inside the scene bounds (when bounds
exist) - the buffer spaces objects from each other, not from the walls, so
floor-resting placements stay legal. The whole search observes
cfg.time_budget; expiry or grid exhaustion raises Unresolvable and the caller
rejects the edit, leaving the scene untouched.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace

import numpy as np

from .errors import Unresolvable
from .scene_model import Scene, SceneObject, box_inside_bounds, boxes_overlap


@dataclass(frozen=True)
class ResolverConfig:
    """Unset lengths fall back to scene/object-derived defaults:
    delta = 5% of the mover's height, buffer = 2% of the scene diagonal,
    grid_resolution = half the mover's smallest extent."""
    delta: float | None = None
    buffer: float | None = None
    grid_resolution: float | None = None
    time_budget: float = 0.5
    max_delta_steps: int = 3

    def __post_init__(self):
        for name in ("delta", "buffer", "grid_resolution"):
            v = getattr(self, name)
            if v is not None and not (v > 0 and math.isfinite(v)):
                raise ValueError(f"{name} must be positive")
        if not (self.time_budget > 0 and math.isfinite(self.time_budget)):
            raise ValueError("time_budget must be positive and finite")
        if self.max_delta_steps < 0:
            raise ValueError("max_delta_steps must be nonnegative")

    def buffer_for(self, scene: Scene) -> float:
        return self.buffer if self.buffer is not None else 0.02 * scene.diagonal()

    def delta_for(self, obj: SceneObject) -> float:
        if self.delta is not None:
            return self.delta
        height = float(obj.extents[2])
        return 0.05 * height if height > 0 else 0.05

    def resolution_for(self, obj: SceneObject) -> float:
        if self.grid_resolution is not None:
            return self.grid_resolution
        smallest = float(np.min(obj.extents))
        return smallest / 2.0 if smallest > 0 else 0.1


@dataclass(frozen=True)
class Placement:
    object_name: str
    center: tuple[float, float, float]
    distance_from_intended: float


def _inflated(obj: SceneObject, buffer: float):
    lo = np.asarray(obj.min_corner) - buffer
    hi = np.asarray(obj.max_corner) + buffer
    return lo, hi


def detect_collisions(scene: Scene, moved: set[str] | frozenset[str],
                      buffer: float = 0.0) -> list[tuple[str, str]]:
    """All unordered pairs with at least one moved member whose buffer-inflated
    boxes overlap with positive volume."""
    inflated = {o.name: _inflated(o, buffer) for o in scene.objects}
    pairs: set[tuple[str, str]] = set()
    names = scene.names
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            if a not in moved and b not in moved:
                continue
            lo_a, hi_a = inflated[a]
            lo_b, hi_b = inflated[b]
            if boxes_overlap(lo_a, hi_a, lo_b, hi_b):
                pairs.add((a, b) if a <= b else (b, a))
    return sorted(pairs)


def out_of_bounds(scene: Scene, moved: set[str], bounds=None) -> list[str]:
    bounds = bounds if bounds is not None else scene.bounds
    if bounds is None:
        return []
    bad = []
    for name in moved:
        obj = scene.object(name)
        if not box_inside_bounds(obj.min_corner, obj.max_corner, bounds):
            bad.append(name)
    return sorted(bad)


def _candidate_valid(obj: SceneObject, center, others, buffer: float, bounds) -> bool:
    half = obj.extents / 2.0
    lo = np.asarray(center) - half
    hi = np.asarray(center) + half
    if bounds is not None and not box_inside_bounds(lo, hi, bounds):
        return False
    for lo_b, hi_b in others:
        if boxes_overlap(lo - buffer, hi + buffer, lo_b, hi_b):
            return False
    return True


MAX_GRID_CELLS = 400_000


def _grid_offsets(region_lo, region_hi, center, res: float) -> np.ndarray:
    """Integer grid offsets (cells * res anchored at the intended center)
    ordered by squared distance, then the +x,-x,+y,-y,+z,-z preference, then
    ascending offset components. Grids beyond MAX_GRID_CELLS are rejected
    rather than risking the time budget on the sort alone."""
    lo_steps = np.ceil((region_lo - center) / res).astype(int)
    hi_steps = np.floor((region_hi - center) / res).astype(int)
    axes = [np.arange(lo_steps[k], hi_steps[k] + 1) for k in range(3)]
    if any(a.size == 0 for a in axes):
        return np.empty((0, 3), dtype=int)
    if math.prod(a.size for a in axes) > MAX_GRID_CELLS:
        raise Unresolvable("search grid too fine for the region; raise "
                           "grid_resolution or shrink the scene")
    gi, gj, gk = np.meshgrid(*axes, indexing="ij")
    cells = np.stack([gi.ravel(), gj.ravel(), gk.ravel()], axis=1)
    d2 = (cells.astype(np.int64) ** 2).sum(axis=1)
    ranks = np.where(cells > 0, 0, np.where(cells < 0, 1, 2))
    order = np.lexsort((cells[:, 2], cells[:, 1], cells[:, 0],
                        ranks[:, 2], ranks[:, 1], ranks[:, 0], d2))
    return cells[order]


def resolve(scene: Scene, moved: list[str], intended: dict[str, Placement],
            cfg: ResolverConfig, bounds=None) -> dict[str, Placement]:
    """Repair the moved objects' placements so nothing collides.

    ``intended`` holds each mover's desired center (the pose the edit asked
    for); the scene is expected to already have the movers at those poses.
    ``bounds`` overrides scene.bounds, letting callers pass a working scene
    whose intended poses would not validate against them yet.
    Deterministic given (scene, moved order, cfg) up to the time budget.
    """
    deadline = time.monotonic() + cfg.time_budget
    buffer = cfg.buffer_for(scene)
    bounds = bounds if bounds is not None else scene.bounds
    placements: dict[str, Placement] = {}
    current = scene
    moved_set = set(moved)

    for name in moved:
        obj = current.object(name)
        want = intended[name]
        intended_center = np.asarray(want.center, dtype=float)
        others = [_inflated(o, buffer) for o in current.objects if o.name != name]
        if _candidate_valid(obj, intended_center, others, buffer, bounds):
            placements[name] = Placement(name, tuple(intended_center), 0.0)
            continue

        found = _search_one(obj, intended_center, others, buffer, bounds, cfg,
                            deadline)
        placements[name] = found
        current = current.replace_objects({name: obj.at_center(found.center)})

    # post-condition re-check with the public detector
    if detect_collisions(current, moved_set, buffer):
        raise Unresolvable("placement repair left residual collisions")
    return placements


def _search_one(obj: SceneObject, intended_center: np.ndarray, others,
                buffer: float, bounds, cfg: ResolverConfig,
                deadline: float) -> Placement:
    name = obj.name
    delta = cfg.delta_for(obj)
    for k in range(1, cfg.max_delta_steps + 1):
        if time.monotonic() > deadline:
            raise Unresolvable(f"time budget exhausted while repairing {name!r}")
        candidate = intended_center + np.array([0.0, 0.0, k * delta])
        if _candidate_valid(obj, candidate, others, buffer, bounds):
            return Placement(name, tuple(candidate), float(k * delta))

    # grid region: union box of this object and everything it currently hits,
    # expanded by twice the mover's largest extent
    half = obj.extents / 2.0
    lo = intended_center - half
    hi = intended_center + half
    region_lo = lo.copy()
    region_hi = hi.copy()
    for lo_b, hi_b in others:
        if boxes_overlap(lo - buffer, hi + buffer, lo_b, hi_b):
            region_lo = np.minimum(region_lo, lo_b + buffer)
            region_hi = np.maximum(region_hi, hi_b - buffer)
    margin = 2.0 * float(np.max(obj.extents))
    region_lo -= margin
    region_hi += margin
    if bounds is not None:
        # an out-of-bounds intended pose may hit nothing; pull the region
        # toward the nearest in-bounds placement so the search can get back,
        # then clip it to the feasible center band (candidates outside it
        # can never validate, so enumerating them only burns the budget)
        blo = np.asarray(bounds[0]) + half
        bhi = np.asarray(bounds[1]) - half
        if np.all(blo <= bhi):
            clamped = np.clip(intended_center, blo, bhi)
            region_lo = np.minimum(region_lo, clamped - half)
            region_hi = np.maximum(region_hi, clamped + half)
            region_lo = np.maximum(region_lo, blo)
            region_hi = np.minimum(region_hi, bhi)

    res = cfg.resolution_for(obj)
    for cell in _grid_offsets(region_lo, region_hi, intended_center, res):
        if time.monotonic() > deadline:
            raise Unresolvable(f"time budget exhausted while repairing {name!r}")
        offset = cell * res
        candidate = intended_center + offset
        if not np.any(offset):
            continue  # the intended cell itself is known-colliding
        if _candidate_valid(obj, candidate, others, buffer, bounds):
            return Placement(name, tuple(candidate),
                             float(np.linalg.norm(offset)))
    raise Unresolvable(f"search space exhausted while repairing {name!r}")


def apply_placements(scene: Scene, placements: dict[str, Placement]) -> Scene:
    updates = {
        name: scene.object(name).at_center(p.center)
        for name, p in placements.items()
    }
    return scene.replace_objects(updates)
