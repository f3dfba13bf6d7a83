"""HTTP/WebSocket service: scene CRUD, edit submission, undo, live streams.

Edits to one scene are serialized behind a per-scene async lock; distinct
scenes edit concurrently. Versions increase strictly with every commit and
undo, and a failed edit never bumps the version (atomicity is observable over
the API). Streams push edit_progress stages while an edit runs and a
scene_update after each commit.
"""
from __future__ import annotations

import asyncio
import json
from contextlib import asynccontextmanager
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, HTTPException, Request, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .edit_pipeline import PipelineConfig, SceneStore, run_edit
from .errors import CgaSceneError
from .llm_gateway import STRATEGY_KINDS, LlmTransport, MockTransport
from .scene_model import load_scene, scene_to_dict

_STATUS_BY_CODE = {
    "unknown_object": 404,
    "unknown_scene": 404,
    "schema_error": 422,
    "expr_error": 422,
    "expr_syntax": 422,
    "unknown_symbol": 422,
    "not_a_versor": 422,
    "not_a_motor": 422,
    "non_rigid_matrix": 422,
    "not_unit": 422,
    "not_a_round": 422,
    "zero_weight": 422,
    "unbalanced_quotes": 422,
    "unknown_variable": 422,
    "missing_context": 422,
    "unresolvable": 409,
    "version_conflict": 409,
    "scene_exists": 409,
    "nothing_to_undo": 409,
    "exhausted_retries": 502,
    "transport_error": 502,
}


@dataclass
class ServiceConfig:
    strategy_default: str = "cga"
    pipeline: PipelineConfig = field(default_factory=PipelineConfig)
    data_dir: Path | None = None
    frontend_dir: Path | None = None


class EditRequest(BaseModel):
    query: str
    strategy: str | None = None
    expected_version: int | None = None


class _Streams:
    """Per-scene fanout queues; broadcasts may come from worker threads."""

    def __init__(self):
        self._subs: dict[str, set[tuple[asyncio.Queue, asyncio.AbstractEventLoop]]] = {}

    def register(self, scene_id: str) -> asyncio.Queue:
        q: asyncio.Queue = asyncio.Queue()
        self._subs.setdefault(scene_id, set()).add((q, asyncio.get_running_loop()))
        return q

    def unregister(self, scene_id: str, q: asyncio.Queue):
        subs = self._subs.get(scene_id, set())
        for pair in list(subs):
            if pair[0] is q:
                subs.discard(pair)

    def broadcast(self, scene_id: str, message: dict):
        for q, loop in self._subs.get(scene_id, set()):
            loop.call_soon_threadsafe(q.put_nowait, message)


def _http_error(exc: CgaSceneError) -> HTTPException:
    status = _STATUS_BY_CODE.get(exc.code, 500)
    return HTTPException(status_code=status,
                         detail={"code": exc.code, "message": str(exc)})


def create_app(store: SceneStore | None = None,
               transport: LlmTransport | None = None,
               config: ServiceConfig | None = None) -> FastAPI:
    config = config or ServiceConfig()
    store = store or SceneStore(undo_depth=config.pipeline.undo_depth)
    transport = transport or MockTransport({})
    streams = _Streams()

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        if config.data_dir is not None:
            _load_data_dir(store, config.data_dir)
        yield

    app = FastAPI(title="cgascene", lifespan=lifespan)
    locks: dict[str, asyncio.Lock] = {}

    def lock_for(scene_id: str) -> asyncio.Lock:
        return locks.setdefault(scene_id, asyncio.Lock())

    def persist(scene_id: str, plan_dict: dict | None = None):
        if config.data_dir is None:
            return
        root = Path(config.data_dir)
        root.mkdir(parents=True, exist_ok=True)
        (root / f"{scene_id}.json").write_bytes(store.scene_bytes(scene_id))
        if plan_dict is not None:
            with (root / f"{scene_id}.plans.jsonl").open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(plan_dict, sort_keys=True) + "\n")

    def latest_or_404(scene_id: str):
        try:
            return store.latest(scene_id)
        except KeyError:
            raise HTTPException(
                status_code=404,
                detail={"code": "unknown_scene",
                        "message": f"no scene {scene_id!r}"}) from None

    @app.exception_handler(CgaSceneError)
    async def _on_engine_error(request: Request, exc: CgaSceneError):
        err = _http_error(exc)
        return JSONResponse(status_code=err.status_code, content={"detail": err.detail})

    @app.get("/scenes")
    async def list_scenes():
        out = []
        for scene_id in store.ids():
            latest = store.latest(scene_id)
            out.append({"id": scene_id, "version": latest.version,
                        "objects": len(latest.scene.objects)})
        return {"scenes": out}

    @app.post("/scenes", status_code=201)
    async def create_scene(body: dict):
        scene = load_scene(body)
        try:
            version = store.create(scene)
        except CgaSceneError:
            raise HTTPException(
                status_code=409,
                detail={"code": "scene_exists",
                        "message": f"scene {scene.id!r} already exists"}) from None
        persist(scene.id)
        return {"id": scene.id, "version": version}

    @app.get("/scenes/{scene_id}")
    async def get_scene(scene_id: str):
        latest = latest_or_404(scene_id)
        return JSONResponse(content=scene_to_dict(latest.scene),
                            headers={"X-Scene-Version": str(latest.version)})

    @app.get("/scenes/{scene_id}/history")
    async def get_history(scene_id: str):
        latest_or_404(scene_id)
        return {"plans": store.history(scene_id)}

    @app.post("/scenes/{scene_id}/edits")
    async def submit_edit(scene_id: str, body: EditRequest):
        latest_or_404(scene_id)
        strategy = (body.strategy or config.strategy_default).lower()
        if strategy not in STRATEGY_KINDS:
            raise HTTPException(
                status_code=422,
                detail={"code": "invalid_strategy",
                        "message": f"strategy must be one of {STRATEGY_KINDS}"})

        def on_stage(stage: str):
            streams.broadcast(scene_id, {"type": "edit_progress", "stage": stage})

        async with lock_for(scene_id):
            current = store.latest(scene_id)
            if (body.expected_version is not None
                    and body.expected_version != current.version):
                raise HTTPException(
                    status_code=409,
                    detail={"code": "version_conflict",
                            "message": f"scene is at version {current.version}, "
                                       f"not {body.expected_version}"})
            try:
                version, scene, plan = await asyncio.to_thread(
                    run_edit, store, scene_id, body.query, strategy, transport,
                    config.pipeline, on_stage)
            except CgaSceneError as exc:
                raise _http_error(exc) from exc
            plan_dict = plan.to_dict()
            plan_dict["version"] = version
            persist(scene_id, plan_dict)
            streams.broadcast(scene_id, {
                "type": "scene_update",
                "version": version,
                "changed": [e.object_name for e in plan.entries],
                "scene": scene_to_dict(scene),
            })
            return {"version": version, "plan": plan_dict,
                    "scene": scene_to_dict(scene)}

    @app.post("/scenes/{scene_id}/undo")
    async def undo(scene_id: str):
        latest_or_404(scene_id)
        async with lock_for(scene_id):
            before = store.latest(scene_id).scene
            try:
                restored = store.undo(scene_id)
            except CgaSceneError as exc:
                raise HTTPException(
                    status_code=409,
                    detail={"code": "nothing_to_undo", "message": str(exc)}) from exc
            persist(scene_id)
            before_names = {o.name for o in before.objects}
            after_names = {o.name for o in restored.scene.objects}
            changed = sorted(
                (before_names ^ after_names)
                | {n for n in before_names & after_names
                   if before.object(n) != restored.scene.object(n)}
            )
            streams.broadcast(scene_id, {
                "type": "scene_update",
                "version": restored.version,
                "changed": changed,
                "scene": scene_to_dict(restored.scene),
            })
            return {"version": restored.version, "scene": scene_to_dict(restored.scene)}

    @app.websocket("/scenes/{scene_id}/stream")
    async def stream(ws: WebSocket, scene_id: str):
        try:
            latest = store.latest(scene_id)
        except KeyError:
            await ws.close(code=4404)
            return
        await ws.accept()
        q = streams.register(scene_id)
        try:
            await ws.send_json({
                "type": "scene_update",
                "version": latest.version,
                "changed": [],
                "scene": scene_to_dict(latest.scene),
            })
            while True:
                await ws.send_json(await q.get())
        except WebSocketDisconnect:
            pass
        finally:
            streams.unregister(scene_id, q)

    if config.frontend_dir is not None and Path(config.frontend_dir).is_dir():
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=config.frontend_dir, html=True),
                  name="frontend")

    return app


def _load_data_dir(store: SceneStore, data_dir: Path):
    root = Path(data_dir)
    if not root.is_dir():
        return
    for path in sorted(root.glob("*.json")):
        try:
            scene = load_scene(path)
            if scene.id not in store.ids():
                store.create(scene)
        except CgaSceneError:
            continue
