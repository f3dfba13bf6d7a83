"""Scene persistence and box geometry.

A scene is an ordered collection of named objects, each carried as an
axis-aligned bounding box (min/max corners) plus orientation/scale metadata.
Transforms act about the world origin; the resulting AABB is re-derived as
the hull of the eight transformed corners, so boxes stay axis-aligned.

Scene file schema (UTF-8 JSON, numbers are IEEE-754 doubles, object order
preserved)::

    {"id": str,
     "bounds": {"min": [x,y,z], "max": [x,y,z]}?,
     "objects": [{"name": str, "min": [x,y,z], "max": [x,y,z],
                  "mesh_uri": str?, "orientation": [w,x,y,z]?, "scale": num?}]}
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import quat
from .cga_core import MotorDecomposition
from .errors import SchemaError

Vec3 = tuple[float, float, float]


def _vec3(v) -> Vec3:
    return (float(v[0]), float(v[1]), float(v[2]))


@dataclass(frozen=True)
class SceneObject:
    name: str
    min_corner: Vec3
    max_corner: Vec3
    mesh_uri: str | None = None
    orientation: tuple[float, float, float, float] = (1.0, 0.0, 0.0, 0.0)
    scale: float = 1.0

    def __post_init__(self):
        if not self.name:
            raise ValueError("object name must be nonempty")
        lo, hi = self.min_corner, self.max_corner
        if not all(math.isfinite(v) for v in (*lo, *hi)):
            raise ValueError(f"{self.name}: corners must be finite")
        if any(a > b for a, b in zip(lo, hi)):
            raise ValueError(f"{self.name}: min_corner exceeds max_corner")
        if not (self.scale > 0 and math.isfinite(self.scale)):
            raise ValueError(f"{self.name}: scale must be positive")
        n = math.sqrt(sum(c * c for c in self.orientation))
        if abs(n - 1.0) > 1e-6:
            raise ValueError(f"{self.name}: orientation must be a unit quaternion")

    @property
    def center(self) -> np.ndarray:
        return (np.asarray(self.min_corner) + np.asarray(self.max_corner)) / 2.0

    @property
    def extents(self) -> np.ndarray:
        """(width, depth, height) along x, y, z."""
        return np.asarray(self.max_corner) - np.asarray(self.min_corner)

    @property
    def volume(self) -> float:
        return float(np.prod(self.extents))

    def corners(self) -> np.ndarray:
        """The 8 box corners, shape (8, 3)."""
        lo = np.asarray(self.min_corner)
        hi = np.asarray(self.max_corner)
        picks = np.array([[i >> a & 1 for a in range(3)] for i in range(8)], dtype=float)
        return lo + picks * (hi - lo)

    def at_center(self, center) -> "SceneObject":
        """Same box translated so its center lands at ``center``."""
        half = self.extents / 2.0
        c = np.asarray(center, dtype=float)
        return replace(self, min_corner=_vec3(c - half), max_corner=_vec3(c + half))


@dataclass(frozen=True)
class Scene:
    id: str
    objects: tuple[SceneObject, ...]
    bounds: tuple[Vec3, Vec3] | None = None
    _index: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if not self.id:
            raise ValueError("scene id must be nonempty")
        index = {}
        for obj in self.objects:
            if obj.name in index:
                raise ValueError(f"duplicate object name {obj.name!r}")
            index[obj.name] = obj
        object.__setattr__(self, "_index", index)
        if self.bounds is not None:
            lo, hi = self.bounds
            if any(a > b for a, b in zip(lo, hi)):
                raise ValueError("scene bounds are inverted")
            for obj in self.objects:
                if not box_inside_bounds(obj.min_corner, obj.max_corner, self.bounds):
                    raise ValueError(f"object {obj.name!r} lies outside scene bounds")

    def object(self, name: str) -> SceneObject:
        try:
            return self._index[name]
        except KeyError:
            from .errors import UnknownObject
            raise UnknownObject(name) from None

    def has_object(self, name: str) -> bool:
        return name in self._index

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(o.name for o in self.objects)

    def replace_objects(self, updates: dict[str, SceneObject]) -> "Scene":
        """New scene with the named objects swapped in; order preserved."""
        objs = tuple(updates.get(o.name, o) for o in self.objects)
        return Scene(self.id, objs, self.bounds)

    def diagonal(self) -> float:
        if self.bounds is not None:
            lo, hi = self.bounds
        elif self.objects:
            mins = np.min([o.min_corner for o in self.objects], axis=0)
            maxs = np.max([o.max_corner for o in self.objects], axis=0)
            lo, hi = tuple(mins), tuple(maxs)
        else:
            return 1.0
        return float(np.linalg.norm(np.asarray(hi) - np.asarray(lo)))


# --- AABB helpers (shared with the collision resolver) -------------------------

def boxes_overlap(lo_a, hi_a, lo_b, hi_b) -> bool:
    """True when the boxes intersect with positive volume (face contact is not
    an overlap)."""
    return all(hi_a[k] > lo_b[k] and hi_b[k] > lo_a[k] for k in range(3))


def box_inside_bounds(lo, hi, bounds) -> bool:
    blo, bhi = bounds
    return all(lo[k] >= blo[k] and hi[k] <= bhi[k] for k in range(3))


# --- persistence ----------------------------------------------------------------

def _need(doc: dict, key: str, pointer: str):
    if not isinstance(doc, dict) or key not in doc:
        raise SchemaError(f"missing field {key!r}", f"{pointer}/{key}")
    return doc[key]


def _as_vec3(value, pointer: str) -> Vec3:
    if (not isinstance(value, (list, tuple)) or len(value) != 3
            or not all(isinstance(v, (int, float)) and math.isfinite(v) for v in value)):
        raise SchemaError("expected a finite [x, y, z] triple", pointer)
    return _vec3(value)


def load_scene(source) -> Scene:
    """Parse a scene from a path, bytes/str JSON, or an already-decoded dict."""
    if isinstance(source, (str, Path)) and "{" not in str(source):
        raw = Path(source).read_bytes()
    elif isinstance(source, (bytes, str)):
        raw = source
    else:
        return _scene_from_dict(source)
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}", "") from exc
    return _scene_from_dict(doc)


def _scene_from_dict(doc) -> Scene:
    if not isinstance(doc, dict):
        raise SchemaError("scene document must be a JSON object", "")
    scene_id = _need(doc, "id", "")
    if not isinstance(scene_id, str) or not scene_id:
        raise SchemaError("id must be a nonempty string", "/id")
    bounds = None
    if doc.get("bounds") is not None:
        b = doc["bounds"]
        bounds = (_as_vec3(_need(b, "min", "/bounds"), "/bounds/min"),
                  _as_vec3(_need(b, "max", "/bounds"), "/bounds/max"))
        if any(a > c for a, c in zip(*bounds)):
            raise SchemaError("bounds are inverted", "/bounds")
    objects_doc = _need(doc, "objects", "")
    if not isinstance(objects_doc, list):
        raise SchemaError("objects must be a list", "/objects")
    seen: set[str] = set()
    objects = []
    for i, od in enumerate(objects_doc):
        ptr = f"/objects/{i}"
        name = _need(od, "name", ptr)
        if not isinstance(name, str) or not name:
            raise SchemaError("name must be a nonempty string", f"{ptr}/name")
        if name in seen:
            raise SchemaError(f"duplicate object name {name!r}", f"{ptr}/name")
        seen.add(name)
        lo = _as_vec3(_need(od, "min", ptr), f"{ptr}/min")
        hi = _as_vec3(_need(od, "max", ptr), f"{ptr}/max")
        if any(a > b for a, b in zip(lo, hi)):
            raise SchemaError("min corner exceeds max corner", f"{ptr}/min")
        orientation = (1.0, 0.0, 0.0, 0.0)
        if od.get("orientation") is not None:
            o = od["orientation"]
            if (not isinstance(o, (list, tuple)) or len(o) != 4
                    or not all(isinstance(v, (int, float)) and math.isfinite(v) for v in o)):
                raise SchemaError("orientation must be a [w, x, y, z] quadruple",
                                  f"{ptr}/orientation")
            orientation = tuple(float(v) for v in o)
            n = math.sqrt(sum(c * c for c in orientation))
            if abs(n - 1.0) > 1e-6:
                raise SchemaError("orientation must be a unit quaternion",
                                  f"{ptr}/orientation")
        scale = od.get("scale", 1.0)
        if not isinstance(scale, (int, float)) or not scale > 0 or not math.isfinite(scale):
            raise SchemaError("scale must be a positive number", f"{ptr}/scale")
        mesh_uri = od.get("mesh_uri")
        if mesh_uri is not None and not isinstance(mesh_uri, str):
            raise SchemaError("mesh_uri must be a string", f"{ptr}/mesh_uri")
        objects.append(SceneObject(name, lo, hi, mesh_uri, orientation, float(scale)))
        if bounds is not None and not box_inside_bounds(lo, hi, bounds):
            raise SchemaError("object lies outside scene bounds", ptr)
    return Scene(scene_id, tuple(objects), bounds)


def scene_to_dict(scene: Scene) -> dict:
    doc: dict = {"id": scene.id}
    if scene.bounds is not None:
        doc["bounds"] = {"min": list(scene.bounds[0]), "max": list(scene.bounds[1])}
    objs = []
    for o in scene.objects:
        od: dict = {"name": o.name, "min": list(o.min_corner), "max": list(o.max_corner)}
        if o.mesh_uri is not None:
            od["mesh_uri"] = o.mesh_uri
        if o.orientation != (1.0, 0.0, 0.0, 0.0):
            od["orientation"] = list(o.orientation)
        if o.scale != 1.0:
            od["scale"] = o.scale
        objs.append(od)
    doc["objects"] = objs
    return doc


def save_scene(scene: Scene) -> bytes:
    """Canonical UTF-8 JSON bytes; save(load(save(s))) == save(s)."""
    return json.dumps(scene_to_dict(scene), sort_keys=True, indent=2).encode("utf-8")


# --- transform application -------------------------------------------------------

def apply_decomposition(obj: SceneObject, d: MotorDecomposition) -> SceneObject:
    """Scale-then-rotate-then-translate the box corners about the world origin
    and hull the result; orientation/scale metadata compose accordingly."""
    rot = quat.to_matrix(d.rotation)
    t = np.asarray(d.translation)
    moved = (rot @ (d.scale * obj.corners().T)).T + t
    new_orientation = quat.multiply(d.rotation, obj.orientation)
    new_orientation = new_orientation / np.linalg.norm(new_orientation)
    return replace(
        obj,
        min_corner=_vec3(moved.min(axis=0)),
        max_corner=_vec3(moved.max(axis=0)),
        orientation=tuple(new_orientation),
        scale=float(d.scale * obj.scale),
    )
