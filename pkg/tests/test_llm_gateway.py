from __future__ import annotations

import json
import time
from pathlib import Path

import numpy as np
import pytest

from cgascene import quat
from cgascene.cga_core import compose_motor, decompose_motor, translator
from cgascene.errors import (ExhaustedRetries, MissingContext, NonRigidMatrix,
                             NotAVersor, SchemaError, TransportError,
                             UnknownSymbol)
from cgascene.llm_gateway import (MockTransport, RequestMeta, build_context,
                                  build_prompt, complete, load_strategy,
                                  parse_response)
from cgascene.nl_templating import template_query
from cgascene.scene_model import Scene, SceneObject

GOLDEN = Path(__file__).parent / "golden"

SCENE = Scene("g", (
    SceneObject("sofa", (1.0, 0.5, 0.0), (3.0, 1.5, 0.9)),
    SceneObject("desk", (4.0, 2.0, 0.0), (5.5, 3.0, 0.78)),
))


def _query(raw="move the 'sofa' to the right by 2 units"):
    return template_query(raw, SCENE)


def _scipy_quat_wxyz(rotation):
    x, y, z, w = rotation.as_quat()
    return np.array([w, x, y, z])


# --- strategies and prompts ---------------------------------------------------

def test_every_strategy_carries_five_examples():
    for kind in ("cga", "euclidean", "omniverse"):
        strategy = load_strategy(kind)
        assert len(strategy.example_block) == 5
        assert strategy.system_prompt and strategy.guidance_block


def test_build_prompt_structure():
    q = _query()
    strategy = load_strategy("cga")
    prompt = build_prompt(strategy, q, build_context(q, SCENE))
    assert "X1: min corner (1, 0.5, 0), max corner (3, 1.5, 0.9)" in prompt
    assert prompt.rstrip().endswith("Query: move the X1 to the right by 2 units")
    assert '"objects"' in prompt
    assert "sofa" not in prompt  # information hiding


def test_build_prompt_is_deterministic():
    q = _query()
    strategy = load_strategy("cga")
    ctx = build_context(q, SCENE)
    assert build_prompt(strategy, q, ctx) == build_prompt(strategy, q, ctx)


def test_omniverse_context_uses_dimensions_and_center():
    q = _query()
    prompt = build_prompt(load_strategy("omniverse"), q, build_context(q, SCENE))
    assert "X1: dimensions (2, 1, 0.9), center (2, 1, 0.45)" in prompt
    assert "min corner" not in prompt


def test_missing_context_variable():
    q = _query()
    ctx = build_context(q, SCENE)
    ctx.entries.clear()
    with pytest.raises(MissingContext):
        build_prompt(load_strategy("cga"), q, ctx)


@pytest.mark.parametrize("kind", ["cga", "euclidean", "omniverse"])
def test_prompt_snapshot(kind):
    q = _query()
    prompt = build_prompt(load_strategy(kind), q, build_context(q, SCENE))
    path = GOLDEN / f"prompt_{kind}.txt"
    assert prompt == path.read_text("utf-8"), \
        f"prompt changed; refresh {path} via scripts/update_goldens.py if intended"


def test_cga_example_expressions_are_valid_versors():
    from cgascene.cga_expr import evaluate_text
    from cgascene.cga_core import versor_inverse
    import re
    block = "\n".join(load_strategy("cga").example_block)
    expressions = re.findall(r'"transformation": "([^"]+)"', block)
    assert len(expressions) == 5
    for expr in expressions:
        versor_inverse(evaluate_text(expr))
    first = decompose_motor(evaluate_text(expressions[0]))
    assert np.allclose(first.translation, (2, 0, 0), atol=1e-12)


def test_grammar_asset_matches_docs_file():
    from cgascene.llm_gateway import grammar_text
    docs = (Path(__file__).parents[1] / "docs" / "cga-grammar.md").read_text("utf-8")
    assert grammar_text().strip() in docs
    assert grammar_text().strip() in load_strategy("cga").primer


# --- response parsing ------------------------------------------------------------

def test_parse_cga_response():
    raw = json.dumps({"objects": [
        {"name": "X1", "transformation": "1 - 0.5*(2*e1)*einf"}]})
    resp = parse_response("cga", raw)
    assert (resp.entries[0].motor - translator((2, 0, 0))).norm() == 0.0
    assert resp.entries[0].expression == "1 - 0.5*(2*e1)*einf"


def test_parse_cga_rejects_non_versor_and_bad_symbols():
    with pytest.raises(NotAVersor):
        parse_response("cga", json.dumps(
            {"objects": [{"name": "X1", "transformation": "1 + e1"}]}))
    with pytest.raises(UnknownSymbol):
        parse_response("cga", json.dumps(
            {"objects": [{"name": "X1", "transformation": "1 + e9"}]}))


def test_parse_rejects_schema_violations():
    for raw in ("not json at all",
                json.dumps({"wrong": []}),
                json.dumps({"objects": []}),
                json.dumps({"objects": [{"transformation": "1"}]}),
                json.dumps({"objects": [{"name": "X1"}]}),
                json.dumps({"objects": [
                    {"name": "X1", "transformation": "1"},
                    {"name": "X1", "transformation": "1"}]})):
        with pytest.raises(SchemaError):
            parse_response("cga", raw)


def test_parse_accepts_fenced_json():
    raw = 'sure!\n```json\n{"objects": [{"name": "X1", "transformation": "1 + e1"}]}\n```\nhope that helps'
    with pytest.raises(NotAVersor):
        parse_response("cga", raw)  # fence extracted, content then validated
    raw = 'text\n```json\n{"objects": [{"name": "X1", "transformation": "1 - 0.5*(1*e2)*einf"}]}\n```'
    resp = parse_response("cga", raw)
    assert resp.entries[0].motor is not None


def test_parse_euclidean_identity():
    m = [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]
    resp = parse_response("euclidean", json.dumps(
        {"objects": [{"name": "X1", "transformation": m}]}))
    d = resp.entries[0].decomposition
    assert d.is_identity(tol=1e-12)


def test_parse_euclidean_rigid_with_scale_vs_scipy():
    from scipy.spatial.transform import Rotation
    rot = Rotation.from_euler("ZYX", [37.0, -12.0, 5.0], degrees=True)
    s, t = 1.7, np.array([0.5, -2.0, 1.0])
    m = np.eye(4)
    m[:3, :3] = s * rot.as_matrix()
    m[:3, 3] = t
    resp = parse_response("euclidean", json.dumps(
        {"objects": [{"name": "X1", "transformation": m.tolist()}]}))
    d = resp.entries[0].decomposition
    assert d.scale == pytest.approx(s, abs=1e-9)
    assert np.allclose(d.translation, t, atol=1e-12)
    want = _scipy_quat_wxyz(rot)
    got = np.array(d.rotation)
    assert min(np.max(np.abs(got - want)), np.max(np.abs(got + want))) <= 1e-9


def test_parse_euclidean_rejects_non_rigid():
    shear = [[1, 0.3, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]
    with pytest.raises(NonRigidMatrix):
        parse_response("euclidean", json.dumps(
            {"objects": [{"name": "X1", "transformation": shear}]}))
    mirror = np.diag([-1.0, 1.0, 1.0, 1.0]).tolist()
    with pytest.raises(NonRigidMatrix):
        parse_response("euclidean", json.dumps(
            {"objects": [{"name": "X1", "transformation": mirror}]}))
    bad_row = [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 1, 1]]
    with pytest.raises(NonRigidMatrix):
        parse_response("euclidean", json.dumps(
            {"objects": [{"name": "X1", "transformation": bad_row}]}))


def test_parse_omniverse_absolute_pose_vs_scipy():
    from scipy.spatial.transform import Rotation
    poses = {"X1": (np.array([2.0, 1.0, 0.45]), (1.0, 0.0, 0.0, 0.0))}
    payload = {"position": [2.0, 1.0, 0.45], "euler_degrees": [90.0, 0.0, 0.0]}
    resp = parse_response("omniverse", json.dumps(
        {"objects": [{"name": "X1", "transformation": payload}]}), poses)
    d = resp.entries[0].decomposition
    want = _scipy_quat_wxyz(Rotation.from_euler("ZYX", [90, 0, 0], degrees=True))
    got = np.array(d.rotation)
    assert min(np.max(np.abs(got - want)), np.max(np.abs(got + want))) <= 1e-12
    # in-place rotation about the current center, expressed about the origin
    center = poses["X1"][0]
    assert np.allclose(d.translation, center - quat.rotate(d.rotation, center),
                       atol=1e-12)


def test_parse_omniverse_relative_to_current_orientation():
    q_old = tuple(quat.from_axis_angle([0, 0, 1], np.pi / 2))
    poses = {"X1": (np.zeros(3), q_old)}
    payload = {"position": [0, 0, 0], "euler_degrees": [90.0, 0.0, 0.0]}
    resp = parse_response("omniverse", json.dumps(
        {"objects": [{"name": "X1", "transformation": payload}]}), poses)
    d = resp.entries[0].decomposition
    assert d.is_identity(tol=1e-9)  # already at the requested pose


def test_parse_omniverse_requires_pose_context():
    payload = {"position": [0, 0, 0], "euler_degrees": [0, 0, 0]}
    with pytest.raises(MissingContext):
        parse_response("omniverse", json.dumps(
            {"objects": [{"name": "X1", "transformation": payload}]}))


def test_round_trip_own_serializer():
    from cgascene.cga_expr import canonical_print
    m = compose_motor((0.5, -1.0, 2.0), tuple(quat.from_axis_angle([0, 0, 1], 0.7)), 1.3)
    raw = json.dumps({"objects": [{"name": "X1",
                                   "transformation": canonical_print(m)}]})
    resp = parse_response("cga", raw)
    assert resp.entries[0].motor.approx_eq(m, tol=1e-12)


def test_decompose_recompose_idempotent():
    raw = json.dumps({"objects": [{"name": "X1", "transformation":
        "(1 - 0.5*(1*e1 + 1*e2 + 0.5*e3)*einf) * (0.7071067811865476 - 0.7071067811865476*e12) * (1 + 0.5*(1*e1 + 1*e2 + 0.5*e3)*einf)"}]})
    motor = parse_response("cga", raw).entries[0].motor
    d1 = decompose_motor(motor)
    d2 = decompose_motor(compose_motor(d1.translation, d1.rotation, d1.scale))
    assert np.allclose(d1.translation, d2.translation, atol=1e-9)
    assert np.allclose(d1.rotation, d2.rotation, atol=1e-9)
    assert d1.scale == pytest.approx(d2.scale, abs=1e-9)


# --- transports and retry loop ------------------------------------------------------

def _mock(rules, default=None):
    return MockTransport({"rules": rules, **({"default": default} if default else {})})


VALID = {"objects": [{"name": "X1", "transformation": "1 - 0.5*(1*e1)*einf"}]}


def test_complete_first_attempt():
    q = _query()
    transport = _mock([{"match": {"template": q.template}, "response": VALID}])
    resp = complete("prompt", transport, "cga", q)
    assert resp.retries_used == 0
    assert len(resp.entries) == 1


def test_complete_retries_then_succeeds_with_latency_accounting():
    q = _query()
    delays = [0.02, 0.03, 0.05]
    transport = _mock([{
        "match": {"original": q.original}, "response": VALID,
        "fail_first": 2, "delay": delays,
    }])
    started = time.perf_counter()
    resp = complete("prompt", transport, "cga", q)
    wall = time.perf_counter() - started
    assert resp.retries_used == 2
    assert resp.latency >= sum(delays)
    assert abs(resp.latency - sum(delays)) <= 5e-3
    assert resp.latency <= wall + 1e-9


def test_complete_exhausts_after_five_attempts():
    q = _query()
    transport = _mock([{"match": {"original": q.original}, "fail_always": True,
                        "garbage": "nope"}])
    with pytest.raises(ExhaustedRetries) as err:
        complete("prompt", transport, "cga", q)
    assert err.value.attempts == 5
    assert isinstance(err.value.last_error, SchemaError)
    assert len(transport.calls) == 5


def test_complete_rejects_variables_outside_the_query():
    q = _query()
    extra = {"objects": [
        {"name": "X1", "transformation": "1 - 0.5*(1*e1)*einf"},
        {"name": "X7", "transformation": "1 - 0.5*(1*e1)*einf"},
    ]}
    transport = _mock([{"match": {"original": q.original}, "response": extra}])
    with pytest.raises(ExhaustedRetries):
        complete("prompt", transport, "cga", q)
    renamed = {"objects": [{"name": "X9", "transformation": "1"}]}
    transport = _mock([{"match": {"original": q.original}, "response": renamed}])
    with pytest.raises(ExhaustedRetries):
        complete("prompt", transport, "cga", q)


def test_complete_accepts_reference_objects_without_entries():
    # "place X1 on top of X2" moves only X1; X2 is a reference
    q = template_query("place the 'sofa' on top of the 'desk'", SCENE)
    assert len(q.bindings) == 2
    transport = _mock([{"match": {"original": q.original}, "response": VALID}])
    resp = complete("prompt", transport, "cga", q)
    assert [e.variable for e in resp.entries] == ["X1"]


def test_transport_error_not_retried():
    class Failing:
        calls = 0

        def send(self, prompt, meta):
            type(self).calls += 1
            raise TransportError("connection refused")

    q = _query()
    with pytest.raises(TransportError):
        complete("prompt", Failing(), "cga", q)
    assert Failing.calls == 1


def test_mock_strategy_filter_and_default():
    q = _query()
    transport = _mock(
        [{"match": {"original": q.original}, "strategy": "euclidean",
          "response": {"objects": [{"name": "X1", "transformation":
                                    [[1, 0, 0, 1], [0, 1, 0, 0], [0, 0, 1, 0],
                                     [0, 0, 0, 1]]}]}}],
        default={"response": VALID})
    resp = complete("p", transport, "euclidean", q)
    assert resp.entries[0].decomposition.translation == (1.0, 0.0, 0.0)
    resp = complete("p", transport, "cga", q)  # falls through to default
    assert resp.entries[0].motor is not None


def test_mock_yaml_script(tmp_path):
    path = tmp_path / "script.yaml"
    path.write_text(
        "rules:\n"
        "  - match: {template: 'move the X1 to the right by 2 units'}\n"
        "    response: '"
        + json.dumps(VALID).replace("'", "''") + "'\n",
        encoding="utf-8")
    transport = MockTransport(path)
    raw = transport.send("p", RequestMeta("cga", _query().template, "x"))
    assert json.loads(raw) == VALID
