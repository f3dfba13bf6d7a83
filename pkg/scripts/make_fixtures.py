#!/usr/bin/env python3
"""Generate the fixture corpus: scene files, benchmark cases, mock scripts.

Everything here is computed with standalone numpy (no package imports), so
the expected boxes frozen into the case oracles stay independent of the
engine they later judge. The script is deterministic; rerunning it must
reproduce byte-identical fixtures.

Layout written under fixtures/:
    scenes/<id>.json + scenes/manifest.json      10 scenes
    cases/acceptance/<case>.json                 2 scenes x 5 categories x 5 variations
    mock/acceptance.json                         scripted responses (cga/euclidean/omniverse)

The acceptance suite runs with buffer = 8e-4: fuzzy placements leave a gap of
2*buffer + 1e-6, which is collision-free under double-buffer inflation yet
inside the on-top/next-to judge tolerances.
"""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parents[1]
FIXTURES = ROOT / "fixtures"

BUFFER = 8e-4
GAP = 2 * BUFFER + 1e-6          # adjacency gap used by scripted placements
ON_TOP_TOL = BUFFER + 1e-3
NEXT_TO_GAP = 0.05

COS45 = 0.7071067811865476
ROT = {
    90: np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]),
    180: np.array([[-1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 1.0]]),
}
HALF_ANGLE = {90: (COS45, COS45), 180: (0.0, 1.0)}

SCENES = {
    "living_room": {
        "bounds": ([0, 0, 0], [8, 6, 3]),
        "objects": [
            ("sofa", [1.0, 0.5, 0.0], [3.0, 1.5, 0.9]),
            ("coffee table", [3.6, 2.6, 0.0], [4.6, 3.4, 0.45]),
            ("tv stand", [0.3, 4.8, 0.0], [2.3, 5.5, 0.5]),
            ("floor lamp", [6.5, 0.5, 0.0], [6.9, 0.9, 1.6]),
            ("armchair", [5.0, 0.6, 0.0], [5.9, 1.5, 0.85]),
            ("bookshelf", [7.2, 3.0, 0.0], [7.8, 5.0, 2.0]),
        ],
    },
    "workshop": {
        "bounds": ([0, 0, 0], [7, 6, 3]),
        "objects": [
            ("tool table", [1.0, 1.0, 0.0], [2.6, 2.0, 0.95]),
            ("orange bottle", [4.0, 4.0, 0.0], [4.25, 4.25, 0.5]),
            ("shelf", [0.2, 4.5, 0.0], [2.2, 5.1, 1.8]),
            ("stool", [3.2, 0.8, 0.0], [3.65, 1.25, 0.6]),
            ("workbench", [4.8, 0.6, 0.0], [6.4, 1.6, 0.9]),
            ("toolbox", [5.2, 4.6, 0.0], [5.8, 5.0, 0.35]),
        ],
    },
    "kitchen": {
        "bounds": ([0, 0, 0], [6, 5, 3]),
        "objects": [
            ("fridge", [0.2, 0.2, 0.0], [1.1, 1.1, 2.0]),
            ("oven", [1.5, 0.2, 0.0], [2.4, 1.0, 0.95]),
            ("kitchen island", [2.5, 2.0, 0.0], [4.0, 3.0, 0.95]),
            ("bar stool", [4.6, 2.2, 0.0], [5.0, 2.6, 0.75]),
            ("trash bin", [5.3, 0.4, 0.0], [5.7, 0.8, 0.6]),
        ],
    },
    "wine_cellar": {
        "bounds": ([0, 0, 0], [6, 5, 2.6]),
        "objects": [
            ("wine rack", [0.2, 0.3, 0.0], [1.0, 2.3, 1.9]),
            ("barrel", [2.0, 0.5, 0.0], [2.8, 1.3, 1.0]),
            ("tasting table", [3.5, 2.0, 0.0], [4.7, 2.9, 0.95]),
            ("crate", [5.0, 0.5, 0.0], [5.6, 1.1, 0.5]),
            ("candle stand", [5.2, 3.8, 0.0], [5.45, 4.05, 1.3]),
        ],
    },
    "operating_room": {
        "bounds": ([0, 0, 0], [7, 6, 3]),
        "objects": [
            ("operating table", [2.5, 2.2, 0.0], [4.5, 3.0, 0.85]),
            ("instrument cart", [5.0, 1.0, 0.0], [5.7, 1.6, 0.9]),
            ("monitor stand", [0.6, 1.0, 0.0], [1.1, 1.5, 1.7]),
            ("supply cabinet", [0.3, 4.3, 0.0], [1.8, 5.0, 2.0]),
            ("stool", [5.4, 4.2, 0.0], [5.8, 4.6, 0.5]),
        ],
    },
    "bedroom": {
        "bounds": ([0, 0, 0], [6, 5, 2.8]),
        "objects": [
            ("bed", [0.3, 0.4, 0.0], [2.3, 2.4, 0.6]),
            ("nightstand", [2.7, 0.4, 0.0], [3.2, 0.95, 0.55]),
            ("wardrobe", [4.4, 0.3, 0.0], [5.7, 0.9, 2.2]),
            ("desk", [4.2, 3.5, 0.0], [5.4, 4.2, 0.78]),
            ("chair", [3.3, 3.6, 0.0], [3.8, 4.1, 0.9]),
        ],
    },
    "office": {
        "bounds": ([0, 0, 0], [6, 5, 3]),
        "objects": [
            ("desk", [1.0, 1.0, 0.0], [2.6, 1.8, 0.78]),
            ("office chair", [1.5, 2.2, 0.0], [2.1, 2.8, 1.0]),
            ("filing cabinet", [0.2, 3.8, 0.0], [0.8, 4.5, 1.4]),
            ("monitor", [4.0, 0.5, 0.0], [4.6, 0.9, 0.5]),
            ("plant", [5.2, 4.0, 0.0], [5.7, 4.5, 1.2]),
        ],
    },
    "library": {
        "bounds": ([0, 0, 0], [7, 5, 3]),
        "objects": [
            ("reading table", [2.5, 1.8, 0.0], [4.0, 2.8, 0.78]),
            ("bookcase", [0.2, 0.3, 0.0], [0.9, 2.8, 2.4]),
            ("lamp", [4.8, 0.8, 0.0], [5.1, 1.1, 1.5]),
            ("armchair", [5.4, 3.2, 0.0], [6.3, 4.1, 0.9]),
        ],
    },
    "gym": {
        "bounds": ([0, 0, 0], [8, 6, 3]),
        "objects": [
            ("treadmill", [0.5, 0.5, 0.0], [2.5, 1.3, 1.4]),
            ("bench press", [3.5, 2.0, 0.0], [5.2, 3.2, 1.2]),
            ("dumbbell rack", [6.5, 0.4, 0.0], [7.6, 1.0, 1.1]),
            ("yoga mat", [5.8, 4.6, 0.0], [7.6, 5.2, 0.05]),
        ],
    },
    "classroom": {
        "bounds": ([0, 0, 0], [8, 6, 3]),
        "objects": [
            ("teacher desk", [0.5, 4.6, 0.0], [2.0, 5.4, 0.78]),
            ("student desk", [2.0, 1.0, 0.0], [2.8, 1.6, 0.75]),
            ("whiteboard", [5.0, 5.75, 0.8], [7.5, 5.9, 2.0]),
            ("chair", [3.4, 1.0, 0.0], [3.9, 1.5, 0.85]),
            ("globe", [6.8, 0.6, 0.0], [7.2, 1.0, 0.5]),
        ],
    },
}

# protagonist roles and per-scene magnitudes for the acceptance suite
ACCEPT = {
    "living_room": {
        "small": "floor lamp", "medium": "coffee table",
        "large": "sofa", "third": "armchair",
        "simple": [1.5, 0.4, None, 0.8, 1.2],
        "comp": [(0.6, 0.5), 1.0, (1.0, 0.5), 0.3, (0.3, 0.3)],
        "cf": [0.5, None, 0.25, None, 0.35],
        "hard_slide": 0.5,
    },
    "workshop": {
        "small": "orange bottle", "medium": "stool",
        "large": "tool table", "third": "toolbox",
        "simple": [0.8, 0.3, None, 0.25, 0.9],
        "comp": [(1.0, 0.4), 0.5, (1.2, 1.5), 0.25, (0.5, 0.7)],
        "cf": [0.4, None, 0.4, None, 0.3],
        "hard_slide": 0.4,
    },
}

ACCEPT_SCENES = ("living_room", "workshop")


# --- small geometry helpers ---------------------------------------------------

class Box:
    def __init__(self, lo, hi):
        self.lo = np.asarray(lo, dtype=float)
        self.hi = np.asarray(hi, dtype=float)

    @property
    def center(self):
        return (self.lo + self.hi) / 2

    @property
    def ext(self):
        return self.hi - self.lo

    def corners(self):
        picks = np.array([[i >> a & 1 for a in range(3)] for i in range(8)], float)
        return self.lo + picks * (self.hi - self.lo)

    def translated(self, t):
        t = np.asarray(t, dtype=float)
        return Box(self.lo + t, self.hi + t)

    def rotated_about(self, deg, center):
        c = np.asarray(center, dtype=float)
        moved = (ROT[deg] @ (self.corners() - c).T).T + c
        return Box(moved.min(axis=0), moved.max(axis=0))

    def overlaps(self, other, pad=0.0):
        return bool(np.all(self.hi + pad > other.lo - pad)
                    and np.all(other.hi + pad > self.lo - pad))


class Layout:
    """Mutable picture of one scene while a case's edit is applied."""

    def __init__(self, scene_id):
        spec = SCENES[scene_id]
        self.bounds = Box(*spec["bounds"])
        self.boxes = {name: Box(lo, hi) for name, lo, hi in spec["objects"]}
        self.euler_z = dict.fromkeys(self.boxes, 0)

    def validate(self, context=""):
        names = list(self.boxes)
        for i, a in enumerate(names):
            for b in names[i + 1:]:
                assert not self.boxes[a].overlaps(self.boxes[b], pad=BUFFER), \
                    f"{context}: {a!r} collides with {b!r}"
        for name, box in self.boxes.items():
            assert np.all(box.lo >= self.bounds.lo - 1e-12) and \
                np.all(box.hi <= self.bounds.hi + 1e-12), \
                f"{context}: {name!r} leaves bounds"


def fmt(v: float) -> str:
    s = repr(float(v) + 0.0)
    assert "e" not in s and "E" not in s, f"needs exponent: {v}"
    return s


def t_expr(t, inverse=False) -> str:
    sign = "+" if inverse else "-"
    return (f"1 {sign} 0.5*({fmt(t[0])}*e1 + {fmt(t[1])}*e2 + "
            f"{fmt(t[2])}*e3)*einf")


def rot_expr(deg: int) -> str:
    c, s = HALF_ANGLE[deg]
    return f"({fmt(c)} - {fmt(s)}*e12)"


def inplace_rot_expr(deg: int, center) -> str:
    return (f"({t_expr(center)}) * {rot_expr(deg)} * "
            f"({t_expr(center, inverse=True)})")


def mat_translation(t) -> np.ndarray:
    m = np.eye(4)
    m[:3, 3] = t
    return m


def mat_rotation_about(deg: int, center) -> np.ndarray:
    c = np.asarray(center, dtype=float)
    m = np.eye(4)
    m[:3, :3] = ROT[deg]
    m[:3, 3] = c - ROT[deg] @ c
    return m


def matrix_payload(m: np.ndarray) -> list:
    return [[float(v) for v in row] for row in m]


# --- case construction ----------------------------------------------------------


class CaseBuilder:
    """Accumulates one case's per-object transforms across the strategies,
    applies them to the layout, and emits oracle checks."""

    def __init__(self, scene_id, category, variation, query):
        self.scene_id = scene_id
        self.category = category
        self.variation = variation
        self.query = query
        self.layout = Layout(scene_id)
        self.cga = {}
        self.matrices = {}
        self.poses = {}
        self.checks = []
        self.exact = []  # object names to freeze as box checks

    def var(self, name):
        names = []
        i = 0
        q = self.query
        while i < len(q):
            if q[i] == "'":
                j = q.index("'", i + 1)
                mention = q[i + 1:j]
                if mention not in names:
                    names.append(mention)
                i = j + 1
            else:
                i += 1
        return f"X{names.index(name) + 1}"

    def translate(self, name, t, exact=True):
        t = np.asarray(t, dtype=float)
        box = self.layout.boxes[name]
        self.layout.boxes[name] = box.translated(t)
        self._compose_cga(name, t_expr(t))
        self._compose_matrix(name, mat_translation(t))
        if exact:
            self.exact.append(name)

    def rotate_in_place(self, name, deg, exact=True):
        box = self.layout.boxes[name]
        center = box.center
        self.layout.boxes[name] = box.rotated_about(deg, center)
        self.layout.euler_z[name] = (self.layout.euler_z[name] + deg) % 360
        self._compose_cga(name, inplace_rot_expr(deg, center))
        self._compose_matrix(name, mat_rotation_about(deg, center))
        if exact:
            self.exact.append(name)

    def place_on_top(self, subject, base):
        sb = self.layout.boxes[subject]
        bb = self.layout.boxes[base]
        t = np.array([
            bb.center[0] - sb.center[0],
            bb.center[1] - sb.center[1],
            (bb.hi[2] + GAP) - sb.lo[2],
        ])
        self.translate(subject, t, exact=False)
        self.checks.append({"kind": "on_top_of", "subject": subject,
                            "base": base, "gap_tol": ON_TOP_TOL})

    def place_next_to(self, mover, target):
        mb = self.layout.boxes[mover]
        tb = self.layout.boxes[target]
        t = np.array([
            (tb.hi[0] + GAP) - mb.lo[0],
            tb.center[1] - mb.center[1],
            0.0,
        ])
        self.translate(mover, t, exact=False)
        self.checks.append({"kind": "next_to", "a": mover, "b": target,
                            "max_gap": NEXT_TO_GAP})

    def _compose_cga(self, name, expr):
        prev = self.cga.get(name)
        self.cga[name] = f"({expr}) * ({prev})" if prev else expr

    def _compose_matrix(self, name, m):
        prev = self.matrices.get(name, np.eye(4))
        self.matrices[name] = m @ prev

    def finish(self):
        self.layout.validate(f"{self.scene_id}/{self.category}/v{self.variation}")
        for name in dict.fromkeys(self.exact):
            box = self.layout.boxes[name]
            self.checks.append({
                "kind": "box", "object": name,
                "min": [float(v) for v in box.lo],
                "max": [float(v) for v in box.hi],
                "tol": [1e-3, 1e-3, 1e-3],
            })
        for name in self.cga:
            box = self.layout.boxes[name]
            self.poses[name] = {
                "position": [float(v) for v in box.center],
                "euler_degrees": [float(self.layout.euler_z[name]), 0.0, 0.0],
            }
        return self

    def case_doc(self):
        return {
            "id": f"{self.scene_id}-{self.category.lower()}-{self.variation}",
            "scene": self.scene_id,
            "category": self.category,
            "variation": self.variation,
            "query": self.query,
            "oracle": {"checks": self.checks},
        }

    def payloads(self):
        def envelope(values):
            return {"objects": [{"name": self.var(n), "transformation": v}
                                for n, v in values.items()]}
        return {
            "cga": envelope(self.cga),
            "euclidean": envelope({n: matrix_payload(m)
                                   for n, m in self.matrices.items()}),
            "omniverse": envelope(self.poses),
        }


def build_cases(scene_id: str) -> list[CaseBuilder]:
    p = ACCEPT[scene_id]
    small, medium, large, third = p["small"], p["medium"], p["large"], p["third"]
    s1, s2, _, s4, s5 = p["simple"]
    cases = []

    def case(category, variation, query):
        c = CaseBuilder(scene_id, category, variation, query)
        cases.append(c)
        return c

    c = case("Simple", 1, f"move the '{medium}' to the right by {s1} units")
    c.translate(medium, (s1, 0, 0))
    c = case("Simple", 2, f"move the '{medium}' up by {s2} units")
    c.translate(medium, (0, 0, s2))
    c = case("Simple", 3, f"rotate the '{medium}' by 90 degrees around the vertical axis")
    c.rotate_in_place(medium, 90)
    c = case("Simple", 4, f"move the '{medium}' back by {s4} units")
    c.translate(medium, (0, -s4, 0))
    c = case("Simple", 5, f"move the '{medium}' forward by {s5} units")
    c.translate(medium, (0, s5, 0))

    (c1a, c1b), c2, (c3a, c3b), c4, (c5a, c5b) = p["comp"]
    c = case("Compositional", 1,
             f"move the '{small}' to the right by {c1a} units and move the "
             f"'{third}' up by {c1b} units")
    c.translate(small, (c1a, 0, 0))
    c.translate(third, (0, 0, c1b))
    c = case("Compositional", 2,
             f"move the '{medium}' to the left by {c2} units and rotate it "
             f"by 90 degrees around the vertical axis")
    c.translate(medium, (-c2, 0, 0))
    c.rotate_in_place(medium, 90)
    c = case("Compositional", 3,
             f"move the '{large}' forward by {c3a} units and move the "
             f"'{small}' to the left by {c3b} units")
    c.translate(large, (0, c3a, 0))
    c.translate(small, (-c3b, 0, 0))
    c = case("Compositional", 4,
             f"rotate the '{third}' by 180 degrees around the vertical axis "
             f"and move it up by {c4} units")
    c.rotate_in_place(third, 180)
    c.translate(third, (0, 0, c4))
    c = case("Compositional", 5,
             f"move the '{small}' to the right by {c5a} units and move the "
             f"'{large}' back by {c5b} units")
    c.translate(small, (c5a, 0, 0))
    c.translate(large, (0, -c5b, 0))

    c = case("Fuzzy", 1, f"place the '{small}' on top of the '{large}'")
    c.place_on_top(small, large)
    c = case("Fuzzy", 2, f"move the '{third}' next to the '{large}'")
    c.place_next_to(third, large)
    c = case("Fuzzy", 3, f"put the '{small}' next to the '{medium}'")
    c.place_next_to(small, medium)
    c = case("Fuzzy", 4, f"set the '{small}' on the '{large}'")
    c.place_on_top(small, large)
    c = case("Fuzzy", 5, f"move the '{third}' close to the '{small}'")
    c.place_next_to(third, small)

    f1, _, f3, _, f5 = p["cf"]
    c = case("CompositionalFuzzy", 1,
             f"move the '{third}' up by {f1} units and place the '{small}' "
             f"on top of the '{large}'")
    c.translate(third, (0, 0, f1))
    c.place_on_top(small, large)
    c = case("CompositionalFuzzy", 2,
             f"rotate the '{small}' by 90 degrees around the vertical axis "
             f"and put it next to the '{large}'")
    c.rotate_in_place(small, 90, exact=False)
    c.place_next_to(small, large)
    c = case("CompositionalFuzzy", 3,
             f"place the '{small}' on top of the '{large}' and move the "
             f"'{third}' back by {f3} units")
    c.place_on_top(small, large)
    c.translate(third, (0, -f3, 0))
    c = case("CompositionalFuzzy", 4,
             f"move the '{small}' next to the '{third}' and rotate the "
             f"'{large}' by 180 degrees around the vertical axis")
    c.place_next_to(small, third)
    c.rotate_in_place(large, 180)
    c = case("CompositionalFuzzy", 5,
             f"raise the '{third}' by {f5} units and set the '{small}' "
             f"next to the '{large}'")
    c.translate(third, (0, 0, f5))
    c.place_next_to(small, large)

    c = case("Hard", 1,
             f"center the '{small}' between the '{large}' and the '{third}' "
             f"keeping its height")
    sb = c.layout.boxes[small]
    mid = (c.layout.boxes[large].center + c.layout.boxes[third].center) / 2
    c.translate(small, (mid[0] - sb.center[0], mid[1] - sb.center[1], 0.0))
    c = case("Hard", 2,
             f"swap the floor positions of the '{small}' and the '{third}'")
    sb, tb = c.layout.boxes[small], c.layout.boxes[third]
    sc, tc = sb.center.copy(), tb.center.copy()
    c.translate(small, (tc[0] - sc[0], tc[1] - sc[1], 0.0))
    c.translate(third, (sc[0] - tc[0], sc[1] - tc[1], 0.0))
    c = case("Hard", 3,
             f"balance the '{small}' upside down on the '{third}'")
    # scripted failure: the mock never answers this one validly
    c.checks.append({"kind": "on_top_of", "subject": small, "base": third,
                     "gap_tol": ON_TOP_TOL})
    c = case("Hard", 4,
             f"stack the '{small}' on the '{third}' and slide the "
             f"'{large}' to the right by {p['hard_slide']} units")
    c.place_on_top(small, third)
    c.translate(large, (p["hard_slide"], 0, 0))
    c = case("Hard", 5, f"move the '{small}' halfway toward the '{large}'")
    sb = c.layout.boxes[small]
    lb = c.layout.boxes[large]
    c.translate(small, (0.5 * (lb.center[0] - sb.center[0]),
                        0.5 * (lb.center[1] - sb.center[1]), 0.0))

    for c in cases:
        if not (c.category == "Hard" and c.variation == 3):
            c.finish()
    return cases


def build_mock_rules(cases: list[CaseBuilder]) -> list[dict]:
    rules = []
    for i, c in enumerate(cases):
        fail_case = c.category == "Hard" and c.variation == 3
        retry_case = (c.scene_id == "workshop" and c.category == "Simple"
                      and c.variation == 5)
        payloads = None if fail_case else c.payloads()
        for strategy in ("cga", "euclidean", "omniverse"):
            rule = {
                "match": {"original": c.query},
                "strategy": strategy,
                "delay": 0.001 + (i % 3) * 0.001,
            }
            if fail_case:
                rule["fail_always"] = True
                rule["garbage"] = "I cannot compute that placement."
                rule["delay"] = 0.002
            else:
                rule["response"] = payloads[strategy]
            if retry_case:
                rule["fail_first"] = 2
                rule["delay"] = [0.02, 0.03, 0.05]
                rule["garbage"] = "hmm, let me think about that some more"
            rules.append(rule)
    return rules


def write_scenes():
    out = FIXTURES / "scenes"
    out.mkdir(parents=True, exist_ok=True)
    manifest = {}
    for scene_id, spec in SCENES.items():
        Layout(scene_id)  # constructor asserts shape
        doc = {
            "id": scene_id,
            "bounds": {"min": spec["bounds"][0], "max": spec["bounds"][1]},
            "objects": [{"name": n, "min": lo, "max": hi}
                        for n, lo, hi in spec["objects"]],
        }
        (out / f"{scene_id}.json").write_text(
            json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        manifest[scene_id] = len(spec["objects"])
        layout = Layout(scene_id)
        layout.validate(scene_id)
        # editing headroom: nothing starts closer than 0.1 to anything else
        names = list(layout.boxes)
        for i, a in enumerate(names):
            for b in names[i + 1:]:
                assert not layout.boxes[a].overlaps(layout.boxes[b], pad=0.05), \
                    f"{scene_id}: {a!r} and {b!r} lack headroom"
    (out / "manifest.json").write_text(
        json.dumps({"scenes": manifest}, indent=2, sort_keys=True) + "\n",
        encoding="utf-8")


def write_cases_and_mock():
    case_dir = FIXTURES / "cases" / "acceptance"
    case_dir.mkdir(parents=True, exist_ok=True)
    mock_dir = FIXTURES / "mock"
    mock_dir.mkdir(parents=True, exist_ok=True)
    all_cases = []
    for scene_id in ACCEPT_SCENES:
        all_cases.extend(build_cases(scene_id))
    assert len(all_cases) == 50
    queries = [c.query for c in all_cases]
    assert len(set(queries)) == 50, "mock rules key on unique query text"
    for c in all_cases:
        doc = c.case_doc()
        (case_dir / f"{doc['id']}.json").write_text(
            json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    script = {"rules": build_mock_rules(all_cases)}
    (mock_dir / "acceptance.json").write_text(
        json.dumps(script, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def main():
    write_scenes()
    write_cases_and_mock()
    print(f"fixtures written under {FIXTURES}")


if __name__ == "__main__":
    main()
