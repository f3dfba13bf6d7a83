"""Prompt assembly, LLM transports, and strict response parsing.

Three prompting strategies share one response envelope::

    {"objects": [{"name": "X1", "transformation": <payload>}]}

- cga:       payload is an expression string (see cga_expr's grammar); it must
             evaluate to an invertible versor.
- euclidean: payload is a row-major homogeneous 4x4 matrix; it must be rigid
             with a uniform positive scale.
- omniverse: payload is {"position": [x,y,z], "euler_degrees": [ez,ey,ex]},
             an absolute pose converted against the object's current pose.

Prompt texts live in versioned assets under ``cgascene/prompts`` and every
strategy carries exactly five worked examples, so the strategies stay
comparable. Responses naming variables outside the query, or missing some,
are rejected outright.
"""
from __future__ import annotations

import json
import math
import os
import re
import time
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Protocol

import numpy as np

from . import quat
from .cga_core import MotorDecomposition, Multivector, versor_inverse
from .cga_expr import evaluate_text
from .errors import (ExhaustedRetries, ExprError, MissingContext, NonRigidMatrix,
                     NotAVersor, NotUnit, SchemaError, TransportError)
from .nl_templating import TemplatedQuery
from .scene_model import Scene

STRATEGY_KINDS = ("cga", "euclidean", "omniverse")
DEFAULT_ATTEMPTS = 5

_RETRYABLE = (SchemaError, ExprError, NotAVersor, NonRigidMatrix, NotUnit)

_SCHEMA_INSTRUCTIONS = {
    "cga": ('Respond with exactly this JSON shape: {"objects": [{"name": "Xk", '
            '"transformation": "<expression>"}]} - one entry per moved object.'),
    "euclidean": ('Respond with exactly this JSON shape: {"objects": [{"name": "Xk", '
                  '"transformation": [[r, r, r, t], [r, r, r, t], [r, r, r, t], '
                  '[0, 0, 0, 1]]}]} - one row-major 4x4 matrix per moved object.'),
    "omniverse": ('Respond with exactly this JSON shape: {"objects": [{"name": "Xk", '
                  '"transformation": {"position": [x, y, z], "euler_degrees": '
                  '[ez, ey, ex]}}]} - one final placement per moved object.'),
}


# --- strategies -----------------------------------------------------------------

@dataclass(frozen=True)
class PromptStrategy:
    kind: str
    system_prompt: str
    primer: str
    example_block: tuple[str, ...]
    guidance_block: str

    def __post_init__(self):
        if self.kind not in STRATEGY_KINDS:
            raise ValueError(f"unknown strategy kind {self.kind!r}")
        if len(self.example_block) != 5:
            raise ValueError(
                f"{self.kind}: prompt strategies carry exactly five examples, "
                f"got {len(self.example_block)}")


def _asset(name: str) -> str:
    return resources.files("cgascene.prompts").joinpath(name).read_text("utf-8")


def grammar_text() -> str:
    return _asset("grammar.txt")


@lru_cache(maxsize=None)
def load_strategy(kind: str) -> PromptStrategy:
    kind = kind.lower()
    if kind not in STRATEGY_KINDS:
        raise ValueError(f"unknown strategy kind {kind!r}")
    primer = _asset(f"{kind}_primer.txt")
    if "{grammar}" in primer:
        primer = primer.replace("{grammar}", grammar_text().rstrip("\n"))
    examples = tuple(
        part.strip("\n") for part in _asset(f"{kind}_examples.txt").split("\n---\n")
    )
    return PromptStrategy(
        kind=kind,
        system_prompt=_asset(f"{kind}_system.txt").rstrip("\n"),
        primer=primer.rstrip("\n"),
        example_block=examples,
        guidance_block=_asset(f"{kind}_guidance.txt").rstrip("\n"),
    )


# --- object context --------------------------------------------------------------

@dataclass(frozen=True)
class ObjectInfo:
    min_corner: tuple[float, float, float]
    max_corner: tuple[float, float, float]
    center: tuple[float, float, float]
    dimensions: tuple[float, float, float]
    orientation: tuple[float, float, float, float]


@dataclass
class ObjectContext:
    entries: dict[str, ObjectInfo] = field(default_factory=dict)


def build_context(query: TemplatedQuery, scene: Scene) -> ObjectContext:
    """Context covers exactly the query's variables, nothing else."""
    ctx = ObjectContext()
    for var, name in query.bindings.items():
        obj = scene.object(name)
        ctx.entries[var] = ObjectInfo(
            min_corner=obj.min_corner,
            max_corner=obj.max_corner,
            center=tuple(float(v) for v in obj.center),
            dimensions=tuple(float(v) for v in obj.extents),
            orientation=obj.orientation,
        )
    return ctx


def _triple(v) -> str:
    return "(" + ", ".join(f"{x:g}" for x in v) + ")"


def build_prompt(strategy: PromptStrategy, query: TemplatedQuery,
                 ctx: ObjectContext) -> str:
    lines = []
    for var in query.bindings:
        info = ctx.entries.get(var)
        if info is None:
            raise MissingContext(var)
        if strategy.kind == "omniverse":
            lines.append(f"{var}: dimensions {_triple(info.dimensions)}, "
                         f"center {_triple(info.center)}")
        else:
            lines.append(f"{var}: min corner {_triple(info.min_corner)}, "
                         f"max corner {_triple(info.max_corner)}")
    examples = "\n---\n".join(strategy.example_block)
    return (
        f"{strategy.system_prompt}\n\n"
        f"{strategy.primer}\n\n"
        f"Examples:\n\n{examples}\n\n"
        f"Additional guidance:\n{strategy.guidance_block}\n\n"
        f"Objects:\n" + "\n".join(lines) + "\n\n"
        f"{_SCHEMA_INSTRUCTIONS[strategy.kind]}\n\n"
        f"Query: {query.template}\n"
    )


# --- transports -------------------------------------------------------------------

@dataclass(frozen=True)
class RequestMeta:
    """Side-channel for transports; the live transport ignores it, the mock
    keys its script rules on it."""
    strategy: str
    template: str
    original: str


class LlmTransport(Protocol):
    def send(self, prompt: str, meta: RequestMeta) -> str: ...


@dataclass
class LlmConfig:
    base_url: str = "https://api.openai.com/v1"
    model: str = "gpt-4-1106-preview"
    temperature: float = 0.0
    timeout: float = 60.0
    api_key_env: str = "LLM_API_KEY"


class HttpChatTransport:
    """Chat-completion JSON endpoint; deterministic sampling by default."""

    def __init__(self, config: LlmConfig | None = None):
        self.config = config or LlmConfig()
        self._client = None

    def _ensure_client(self):
        if self._client is None:
            import httpx
            self._client = httpx.Client(timeout=self.config.timeout)
        return self._client

    def send(self, prompt: str, meta: RequestMeta) -> str:
        import httpx
        cfg = self.config
        headers = {}
        key = os.environ.get(cfg.api_key_env)
        if key:
            headers["Authorization"] = f"Bearer {key}"
        body = {
            "model": cfg.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": cfg.temperature,
        }
        try:
            resp = self._ensure_client().post(
                f"{cfg.base_url.rstrip('/')}/chat/completions",
                json=body, headers=headers)
            resp.raise_for_status()
            doc = resp.json()
            return doc["choices"][0]["message"]["content"]
        except httpx.HTTPError as exc:
            raise TransportError(f"chat endpoint failure: {exc}") from exc
        except (KeyError, IndexError, TypeError, ValueError) as exc:
            raise TransportError(f"malformed chat completion payload: {exc}") from exc


class MockTransport:
    """Deterministic scripted responder for offline tests and benchmarks.

    Script shape (JSON or YAML)::

        {"default": {...rule...},
         "rules": [{"match": {"original": "..."} | {"template": "..."},
                    "strategy": "cga"?,
                    "response": <string or JSON value>,
                    "delay": seconds | [per-attempt seconds],
                    "fail_first": int?, "fail_always": bool?, "garbage": str?}]}

    ``delay`` sleeps for real, so wall-clock latency accounting is exercised.
    ``fail_first: k`` serves ``garbage`` for the rule's first k calls.
    """

    def __init__(self, script: dict | str | Path):
        if isinstance(script, (str, Path)):
            text = Path(script).read_text("utf-8")
            if str(script).endswith((".yaml", ".yml")):
                import yaml
                script = yaml.safe_load(text)
            else:
                script = json.loads(text)
        if not isinstance(script, dict):
            raise ValueError("mock script must be a mapping")
        self.rules = list(script.get("rules", []))
        self.default = script.get("default")
        self._counts: dict[int, int] = {}
        self.calls: list[RequestMeta] = []

    def _find_rule(self, meta: RequestMeta):
        for idx, rule in enumerate(self.rules):
            if rule.get("strategy") and rule["strategy"].lower() != meta.strategy:
                continue
            match = rule.get("match", {})
            if match.get("original") is not None and match["original"] != meta.original:
                continue
            if match.get("template") is not None and match["template"] != meta.template:
                continue
            return idx, rule
        return -1, self.default

    def send(self, prompt: str, meta: RequestMeta) -> str:
        self.calls.append(meta)
        idx, rule = self._find_rule(meta)
        if rule is None:
            return "no scripted response for this query"
        call_no = self._counts.get(idx, 0)
        self._counts[idx] = call_no + 1
        delay = rule.get("delay", 0)
        if isinstance(delay, (list, tuple)):
            delay = delay[min(call_no, len(delay) - 1)] if delay else 0
        if delay:
            time.sleep(float(delay))
        garbage = rule.get("garbage", "this is not a valid response")
        if rule.get("fail_always"):
            return garbage
        if call_no < int(rule.get("fail_first", 0)):
            return garbage
        response = rule.get("response", garbage)
        return response if isinstance(response, str) else json.dumps(response)


def mock_transport(script: dict | str | Path) -> MockTransport:
    return MockTransport(script)


# --- response parsing ---------------------------------------------------------------

@dataclass
class ResponseEntry:
    variable: str
    payload: object
    motor: Multivector | None = None
    decomposition: MotorDecomposition | None = None

    @property
    def expression(self) -> str | None:
        return self.payload if isinstance(self.payload, str) else None


@dataclass
class LlmResponse:
    entries: list[ResponseEntry]
    raw: str
    latency: float = 0.0
    retries_used: int = 0


_FENCE_RE = re.compile(r"```(?:json)?\s*(.*?)```", re.DOTALL)


def _decode_json(raw: str):
    try:
        return json.loads(raw)
    except (json.JSONDecodeError, TypeError):
        pass
    for block in _FENCE_RE.findall(raw or ""):
        try:
            return json.loads(block)
        except json.JSONDecodeError:
            continue
    start, end = (raw or "").find("{"), (raw or "").rfind("}")
    if 0 <= start < end:
        try:
            return json.loads(raw[start:end + 1])
        except json.JSONDecodeError:
            pass
    raise SchemaError("response is not valid JSON", "")


def _finite_triple(value, pointer: str) -> np.ndarray:
    if (not isinstance(value, (list, tuple)) or len(value) != 3
            or not all(isinstance(v, (int, float)) and math.isfinite(v) for v in value)):
        raise SchemaError("expected a finite [x, y, z] triple", pointer)
    return np.asarray(value, dtype=float)


def _parse_matrix(payload, pointer: str) -> MotorDecomposition:
    if (not isinstance(payload, list) or len(payload) != 4
            or any(not isinstance(row, list) or len(row) != 4 for row in payload)):
        raise SchemaError("expected a 4x4 matrix", pointer)
    try:
        m = np.asarray(payload, dtype=float)
    except (TypeError, ValueError) as exc:
        raise SchemaError("matrix entries must be numbers", pointer) from exc
    if not np.isfinite(m).all():
        raise SchemaError("matrix entries must be finite", pointer)
    if np.max(np.abs(m[3] - np.array([0.0, 0.0, 0.0, 1.0]))) > 1e-9:
        raise NonRigidMatrix("bottom row must be [0, 0, 0, 1]")
    a = m[:3, :3]
    det = float(np.linalg.det(a))
    if det <= 0:
        raise NonRigidMatrix(f"upper 3x3 block has non-positive determinant {det}")
    scale = det ** (1.0 / 3.0)
    r = a / scale
    if float(np.max(np.abs(r.T @ r - np.eye(3)))) > 1e-6:
        raise NonRigidMatrix("upper 3x3 block is not a uniform-scaled rotation")
    q = quat.canonical_sign(quat.from_matrix(r))
    return MotorDecomposition(tuple(m[:3, 3]), tuple(q), scale)


def _parse_pose(payload, pointer: str, pose) -> MotorDecomposition:
    if not isinstance(payload, dict):
        raise SchemaError("expected {position, euler_degrees}", pointer)
    position = _finite_triple(payload.get("position"), f"{pointer}/position")
    euler = _finite_triple(payload.get("euler_degrees"), f"{pointer}/euler_degrees")
    center_old, orientation_old = pose
    q_new = quat.from_euler_zyx_degrees(*euler)
    q_rel = quat.multiply(q_new, quat.conjugate(orientation_old))
    q_rel = quat.canonical_sign(q_rel / np.linalg.norm(q_rel))
    t = position - quat.rotate(q_rel, center_old)
    return MotorDecomposition(tuple(t), tuple(q_rel), 1.0)


def parse_response(strategy_kind: str, raw: str,
                   poses: dict[str, tuple] | None = None) -> LlmResponse:
    """Validate a raw LLM reply against the strategy schema.

    ``poses`` maps variables to (current center, current orientation); it is
    required by the omniverse strategy, whose payloads are absolute placements.
    """
    doc = _decode_json(raw)
    if not isinstance(doc, dict) or not isinstance(doc.get("objects"), list):
        raise SchemaError('expected {"objects": [...]}', "/objects")
    if not doc["objects"]:
        raise SchemaError("objects list is empty", "/objects")
    entries: list[ResponseEntry] = []
    seen: set[str] = set()
    for i, item in enumerate(doc["objects"]):
        ptr = f"/objects/{i}"
        if not isinstance(item, dict):
            raise SchemaError("expected an object entry", ptr)
        name = item.get("name")
        if not isinstance(name, str) or not name:
            raise SchemaError("entry needs a variable name", f"{ptr}/name")
        if name in seen:
            raise SchemaError(f"duplicate entry for {name!r}", f"{ptr}/name")
        seen.add(name)
        if "transformation" not in item:
            raise SchemaError("entry needs a transformation", f"{ptr}/transformation")
        payload = item["transformation"]
        entry = ResponseEntry(variable=name, payload=payload)
        if strategy_kind == "cga":
            if not isinstance(payload, str):
                raise SchemaError("cga transformation must be an expression string",
                                  f"{ptr}/transformation")
            motor = evaluate_text(payload)
            versor_inverse(motor)  # raises NotAVersor when not sandwich-applicable
            entry.motor = motor
        elif strategy_kind == "euclidean":
            entry.decomposition = _parse_matrix(payload, f"{ptr}/transformation")
        elif strategy_kind == "omniverse":
            if poses is None or name not in poses:
                raise MissingContext(name)
            entry.decomposition = _parse_pose(payload, f"{ptr}/transformation",
                                              poses[name])
        else:
            raise ValueError(f"unknown strategy kind {strategy_kind!r}")
        entries.append(entry)
    return LlmResponse(entries=entries, raw=raw)


def complete(prompt: str, transport: LlmTransport, strategy_kind: str,
             query: TemplatedQuery, poses: dict[str, tuple] | None = None,
             attempts: int = DEFAULT_ATTEMPTS) -> LlmResponse:
    """Send the prompt, retrying invalid responses up to ``attempts`` total
    tries. Latency is wall-clock across all attempts, retries included.
    Transport failures are not retried; they are a different failure class.

    A valid response's variables must all come from the query (entries for
    unknown variables are rejected outright); reference objects that the
    instruction mentions but does not move need no entry.
    """
    meta = RequestMeta(strategy=strategy_kind, template=query.template,
                       original=query.original)
    started = time.perf_counter()
    last_error: Exception | None = None
    wanted = set(query.bindings)
    for attempt in range(attempts):
        raw = transport.send(prompt, meta)
        try:
            response = parse_response(strategy_kind, raw, poses)
            got = {e.variable for e in response.entries}
            if got - wanted:
                raise SchemaError(
                    f"response names unknown variables {sorted(got - wanted)}", "/objects")
        except _RETRYABLE as exc:
            last_error = exc
            continue
        response.latency = time.perf_counter() - started
        response.retries_used = attempt
        return response
    raise ExhaustedRetries(attempts, last_error,
                           latency=time.perf_counter() - started)
