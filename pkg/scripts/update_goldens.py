#!/usr/bin/env python3
"""Refresh the golden prompt snapshots under tests/golden/.

Run after an intentional change to the prompt assets, then review the diff.
"""
from __future__ import annotations

from pathlib import Path

from cgascene.llm_gateway import build_context, build_prompt, load_strategy
from cgascene.nl_templating import template_query
from cgascene.scene_model import Scene, SceneObject

GOLDEN = Path(__file__).resolve().parents[1] / "tests" / "golden"

SCENE = Scene("g", (
    SceneObject("sofa", (1.0, 0.5, 0.0), (3.0, 1.5, 0.9)),
    SceneObject("desk", (4.0, 2.0, 0.0), (5.5, 3.0, 0.78)),
))


def main():
    GOLDEN.mkdir(parents=True, exist_ok=True)
    query = template_query("move the 'sofa' to the right by 2 units", SCENE)
    ctx = build_context(query, SCENE)
    for kind in ("cga", "euclidean", "omniverse"):
        prompt = build_prompt(load_strategy(kind), query, ctx)
        (GOLDEN / f"prompt_{kind}.txt").write_text(prompt, encoding="utf-8")
        print(f"wrote prompt_{kind}.txt ({len(prompt)} bytes)")


if __name__ == "__main__":
    main()
