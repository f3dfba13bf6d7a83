"""Edit orchestration: template -> prompt -> LLM -> parse -> decompose ->
apply -> collision repair, with full provenance, plus a versioned scene store
with bounded undo.

execute_edit is pure and atomic: it either returns a fresh scene plus its
EditPlan or raises, leaving the input untouched. Only objects named in the
query are modified. Progress stages (templated, prompted, parsed, resolved,
committed) are reported through an optional callback.
"""
from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field
from typing import Callable

from .cga_core import MotorDecomposition, decompose_motor
from .collision_resolver import (Placement, ResolverConfig, apply_placements,
                                 detect_collisions, out_of_bounds, resolve)
from .errors import CgaSceneError, UnknownVariable
from .llm_gateway import (DEFAULT_ATTEMPTS, LlmTransport, PromptStrategy,
                          build_context, build_prompt, complete, load_strategy)
from .nl_templating import TemplatedQuery, template_query
from .scene_model import Scene, apply_decomposition, save_scene

STAGES = ("templated", "prompted", "parsed", "resolved", "committed")

StageCallback = Callable[[str], None]


@dataclass
class PipelineConfig:
    strategy_default: str = "cga"
    attempts: int = DEFAULT_ATTEMPTS
    resolver: ResolverConfig = field(default_factory=ResolverConfig)
    undo_depth: int = 50


@dataclass
class EditPlanEntry:
    variable: str
    object_name: str
    payload: object
    decomposition: MotorDecomposition
    pre_box: tuple
    post_box: tuple
    cga_expression: str | None = None
    resolver_shift: tuple | None = None

    def to_dict(self) -> dict:
        return {
            "variable": self.variable,
            "object": self.object_name,
            "payload": self.payload,
            "cga_expression": self.cga_expression,
            "decomposition": {
                "translation": list(self.decomposition.translation),
                "rotation": list(self.decomposition.rotation),
                "scale": self.decomposition.scale,
            },
            "pre_box": [list(self.pre_box[0]), list(self.pre_box[1])],
            "post_box": [list(self.post_box[0]), list(self.post_box[1])],
            "resolver_shift": list(self.resolver_shift) if self.resolver_shift else None,
        }


@dataclass
class EditPlan:
    original: str
    template: str
    bindings: dict[str, str]
    strategy: str
    entries: list[EditPlanEntry]
    resolver_engaged: bool
    latency: float
    retries: int

    def to_dict(self) -> dict:
        return {
            "query": {"original": self.original, "template": self.template,
                      "bindings": dict(self.bindings)},
            "strategy": self.strategy,
            "entries": [e.to_dict() for e in self.entries],
            "resolver_engaged": self.resolver_engaged,
            "latency": self.latency,
            "retries": self.retries,
        }


def _stage(cb: StageCallback | None, stage: str):
    if cb is not None:
        cb(stage)


def execute_edit(scene: Scene, raw_query: str, strategy: PromptStrategy | str,
                 transport: LlmTransport, cfg: PipelineConfig | None = None,
                 on_stage: StageCallback | None = None) -> tuple[Scene, EditPlan]:
    cfg = cfg or PipelineConfig()
    if isinstance(strategy, str):
        strategy = load_strategy(strategy)

    query: TemplatedQuery = template_query(raw_query, scene)
    _stage(on_stage, "templated")

    ctx = build_context(query, scene)
    prompt = build_prompt(strategy, query, ctx)
    _stage(on_stage, "prompted")

    poses = None
    if strategy.kind == "omniverse":
        poses = {var: (scene.object(name).center, scene.object(name).orientation)
                 for var, name in query.bindings.items()}
    response = complete(prompt, transport, strategy.kind, query, poses,
                        attempts=cfg.attempts)
    _stage(on_stage, "parsed")

    entries: list[EditPlanEntry] = []
    updates = {}
    for entry in response.entries:
        name = query.bindings.get(entry.variable)
        if name is None:
            raise UnknownVariable(entry.variable)
        obj = scene.object(name)
        if entry.motor is not None:
            decomposition = decompose_motor(entry.motor)
        else:
            decomposition = entry.decomposition
        moved_obj = apply_decomposition(obj, decomposition)
        updates[name] = moved_obj
        entries.append(EditPlanEntry(
            variable=entry.variable,
            object_name=name,
            payload=entry.payload,
            cga_expression=entry.expression,
            decomposition=decomposition,
            pre_box=(obj.min_corner, obj.max_corner),
            post_box=(moved_obj.min_corner, moved_obj.max_corner),
        ))

    # Repair runs on a bounds-free working copy (an intended pose may violate
    # the bounds Scene construction enforces); the real bounds are passed to
    # the resolver's validity check explicitly.
    working = Scene(scene.id, tuple(updates.get(o.name, o) for o in scene.objects))
    moved_names = [e.object_name for e in entries]
    buffer = cfg.resolver.buffer_for(working)
    collisions = detect_collisions(working, set(moved_names), buffer)
    outside = out_of_bounds(working, set(moved_names), bounds=scene.bounds)
    resolver_engaged = bool(collisions or outside)
    if resolver_engaged:
        intended = {
            n: Placement(n, tuple(float(v) for v in working.object(n).center), 0.0)
            for n in moved_names
        }
        placements = resolve(working, moved_names, intended, cfg.resolver,
                             bounds=scene.bounds)
        working = apply_placements(working, placements)
        for e in entries:
            p = placements[e.object_name]
            moved_obj = working.object(e.object_name)
            e.post_box = (moved_obj.min_corner, moved_obj.max_corner)
            if p.distance_from_intended > 0.0:
                before = intended[e.object_name].center
                e.resolver_shift = tuple(c - b for c, b in zip(p.center, before))
    _stage(on_stage, "resolved")

    final = Scene(scene.id, working.objects, scene.bounds)
    plan = EditPlan(
        original=raw_query,
        template=query.template,
        bindings=dict(query.bindings),
        strategy=strategy.kind,
        entries=entries,
        resolver_engaged=resolver_engaged,
        latency=response.latency,
        retries=response.retries_used,
    )
    _stage(on_stage, "committed")
    return final, plan


# --- versioned store ------------------------------------------------------------


@dataclass
class SceneVersion:
    version: int
    scene: Scene
    committed_at: float


@dataclass
class _StoreEntry:
    stack: list[Scene]
    version: int
    plans: list[dict]


class SceneStore:
    """Versioned scenes with bounded undo. Every commit and every undo bumps
    the version counter, so versions increase strictly; undo pops the content
    stack and re-exposes the previous scene under the new version."""

    MAX_PLANS = 500

    def __init__(self, undo_depth: int = 50):
        self.undo_depth = undo_depth
        self._lock = threading.RLock()
        self._scenes: dict[str, _StoreEntry] = {}

    def create(self, scene: Scene) -> int:
        with self._lock:
            if scene.id in self._scenes:
                raise CgaSceneError(f"scene {scene.id!r} already exists")
            self._scenes[scene.id] = _StoreEntry([scene], 1, [])
            return 1

    def ids(self) -> list[str]:
        with self._lock:
            return sorted(self._scenes)

    def _entry(self, scene_id: str) -> _StoreEntry:
        entry = self._scenes.get(scene_id)
        if entry is None:
            raise KeyError(scene_id)
        return entry

    def latest(self, scene_id: str) -> SceneVersion:
        with self._lock:
            entry = self._entry(scene_id)
            return SceneVersion(entry.version, entry.stack[-1], time.time())

    def commit(self, scene_id: str, scene: Scene, plan: EditPlan | None) -> int:
        with self._lock:
            entry = self._entry(scene_id)
            entry.version += 1
            entry.stack.append(scene)
            overflow = len(entry.stack) - (self.undo_depth + 1)
            if overflow > 0:
                del entry.stack[:overflow]
            if plan is not None:
                d = plan.to_dict()
                d["version"] = entry.version
                entry.plans.append(d)
                del entry.plans[:-self.MAX_PLANS]
            return entry.version

    def undo(self, scene_id: str) -> SceneVersion:
        """Restore the previous committed scene under a new (monotone) version."""
        with self._lock:
            entry = self._entry(scene_id)
            if len(entry.stack) < 2:
                raise CgaSceneError(f"nothing to undo for scene {scene_id!r}")
            entry.stack.pop()
            entry.version += 1
            return SceneVersion(entry.version, entry.stack[-1], time.time())

    def history(self, scene_id: str) -> list[dict]:
        with self._lock:
            return list(self._entry(scene_id).plans)

    def scene_bytes(self, scene_id: str) -> bytes:
        return save_scene(self.latest(scene_id).scene)


def run_edit(store: SceneStore, scene_id: str, raw_query: str,
             strategy: PromptStrategy | str, transport: LlmTransport,
             cfg: PipelineConfig | None = None,
             on_stage: StageCallback | None = None) -> tuple[int, Scene, EditPlan]:
    """Execute against the store's latest version and commit atomically."""
    scene = store.latest(scene_id).scene
    new_scene, plan = execute_edit(scene, raw_query, strategy, transport, cfg,
                                   on_stage)
    version = store.commit(scene_id, new_scene, plan)
    return version, new_scene, plan
