"""Categorized query suites, oracle-based judging, and S/T reporting.

A suite is a complete grid: every category holds one case per (scene,
variation) pair, so each per-category aggregate averages M = N x k cases.
Success rate S is the fraction of judged-correct cases; latency T is the
mean LLM response time in seconds, retries included (a case that exhausts
its retries still contributes the time it burned).

Oracles are either exact post-edit boxes with per-axis tolerances or fuzzy
predicates (on-top-of, next-to), since fuzzy instructions admit many correct
outcomes. A case whose edit raised is judged incorrect.
"""
from __future__ import annotations

import json
import statistics
import time
from dataclasses import dataclass, field
from pathlib import Path

from .edit_pipeline import EditPlan, PipelineConfig, execute_edit
from .errors import CgaSceneError, FixtureError
from .llm_gateway import LlmTransport, load_strategy
from .scene_model import Scene, boxes_overlap, load_scene

CATEGORIES = ("Simple", "Compositional", "Fuzzy", "CompositionalFuzzy", "Hard")

_EPS = 1e-9


# --- oracle checks -----------------------------------------------------------

@dataclass(frozen=True)
class BoxCheck:
    object: str
    min_corner: tuple
    max_corner: tuple
    tol: tuple = (1e-3, 1e-3, 1e-3)

    def passes(self, scene: Scene) -> bool:
        if not scene.has_object(self.object):
            return False
        obj = scene.object(self.object)
        return all(
            abs(obj.min_corner[k] - self.min_corner[k]) <= self.tol[k]
            and abs(obj.max_corner[k] - self.max_corner[k]) <= self.tol[k]
            for k in range(3)
        )


@dataclass(frozen=True)
class OnTopOfCheck:
    subject: str
    base: str
    gap_tol: float = 2e-3

    def passes(self, scene: Scene) -> bool:
        if not (scene.has_object(self.subject) and scene.has_object(self.base)):
            return False
        s = scene.object(self.subject)
        b = scene.object(self.base)
        gap = s.min_corner[2] - b.max_corner[2]
        if not (-_EPS <= gap <= self.gap_tol):
            return False
        return all(
            s.min_corner[k] >= b.min_corner[k] - _EPS
            and s.max_corner[k] <= b.max_corner[k] + _EPS
            for k in (0, 1)
        )


@dataclass(frozen=True)
class NextToCheck:
    a: str
    b: str
    max_gap: float = 0.05

    def passes(self, scene: Scene) -> bool:
        if not (scene.has_object(self.a) and scene.has_object(self.b)):
            return False
        a = scene.object(self.a)
        b = scene.object(self.b)
        if boxes_overlap(a.min_corner, a.max_corner, b.min_corner, b.max_corner):
            return False

        def gap(axis):
            return max(b.min_corner[axis] - a.max_corner[axis],
                       a.min_corner[axis] - b.max_corner[axis])

        def projections_meet(axes):
            return all(gap(axis) < _EPS for axis in axes)

        return ((-_EPS <= gap(0) <= self.max_gap and projections_meet((1, 2)))
                or (-_EPS <= gap(1) <= self.max_gap and projections_meet((0, 2))))


Check = BoxCheck | OnTopOfCheck | NextToCheck


@dataclass(frozen=True)
class QueryCase:
    id: str
    scene: str
    category: str
    variation: int
    query: str
    checks: tuple[Check, ...]

    def __post_init__(self):
        if self.category not in CATEGORIES:
            raise FixtureError(f"{self.id}: unknown category {self.category!r}")
        if not self.checks:
            raise FixtureError(f"{self.id}: oracle has no checks")


def _check_from_dict(doc: dict, case_id: str) -> Check:
    kind = doc.get("kind")
    try:
        if kind == "box":
            tol = doc.get("tol", [1e-3, 1e-3, 1e-3])
            return BoxCheck(doc["object"], tuple(doc["min"]), tuple(doc["max"]),
                            tuple(tol))
        if kind == "on_top_of":
            return OnTopOfCheck(doc["subject"], doc["base"],
                                float(doc.get("gap_tol", 2e-3)))
        if kind == "next_to":
            return NextToCheck(doc["a"], doc["b"], float(doc.get("max_gap", 0.05)))
    except (KeyError, TypeError, ValueError) as exc:
        raise FixtureError(f"{case_id}: malformed {kind} check: {exc}") from exc
    raise FixtureError(f"{case_id}: unknown check kind {kind!r}")


def load_case(path: Path) -> QueryCase:
    try:
        doc = json.loads(Path(path).read_text("utf-8"))
        case_id = doc["id"]
        checks = tuple(_check_from_dict(c, case_id)
                       for c in doc["oracle"]["checks"])
        return QueryCase(case_id, doc["scene"], doc["category"],
                         int(doc["variation"]), doc["query"], checks)
    except FixtureError:
        raise
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise FixtureError(f"{path}: malformed case file: {exc}") from exc


def load_cases(directory: Path) -> list[QueryCase]:
    """Load every *.json case under directory and validate the N x k grid."""
    paths = sorted(Path(directory).glob("*.json"))
    if not paths:
        raise FixtureError(f"no case files under {directory}")
    cases = [load_case(p) for p in paths]
    ids = [c.id for c in cases]
    if len(set(ids)) != len(ids):
        raise FixtureError("duplicate case ids")
    scenes = sorted({c.scene for c in cases})
    variations = sorted({c.variation for c in cases})
    grid = {(s, v) for s in scenes for v in variations}
    for category in sorted({c.category for c in cases}):
        got = {(c.scene, c.variation) for c in cases if c.category == category}
        if got != grid:
            raise FixtureError(
                f"category {category}: cases do not cover the full "
                f"{len(scenes)} x {len(variations)} scene/variation grid")
    return cases


def judge(case: QueryCase, result: EditPlan | None, final: Scene) -> bool:
    """Correct iff the edit executed and every oracle check holds on the
    final scene."""
    if result is None:
        return False
    return all(check.passes(final) for check in case.checks)


# --- suite running -----------------------------------------------------------


@dataclass
class BenchConfig:
    scenes: dict[str, Scene]
    pipeline: PipelineConfig = field(default_factory=PipelineConfig)

    @classmethod
    def from_scene_dir(cls, directory: Path, pipeline: PipelineConfig | None = None):
        scenes = {}
        for path in sorted(Path(directory).glob("*.json")):
            if path.name == "manifest.json":
                continue
            scene = load_scene(path)
            scenes[scene.id] = scene
        if not scenes:
            raise FixtureError(f"no scene files under {directory}")
        return cls(scenes=scenes, pipeline=pipeline or PipelineConfig())


@dataclass
class CaseRecord:
    case_id: str
    scene: str
    category: str
    variation: int
    strategy: str
    passed: bool
    latency: float
    retries: int
    error: str | None = None

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class Stats:
    m: int
    success_rate: float
    mean_latency: float
    success_std: float
    latency_std: float

    @classmethod
    def from_records(cls, records: list[CaseRecord]) -> "Stats":
        s = [1.0 if r.passed else 0.0 for r in records]
        t = [r.latency for r in records]
        return cls(
            m=len(records),
            success_rate=sum(s) / len(s),
            mean_latency=sum(t) / len(t),
            success_std=statistics.pstdev(s) if len(s) > 1 else 0.0,
            latency_std=statistics.pstdev(t) if len(t) > 1 else 0.0,
        )

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class BenchReport:
    strategies: tuple[str, ...]
    n_scenes: int
    k_variations: int
    records: list[CaseRecord]
    started_at: float
    finished_at: float

    def records_for(self, strategy: str, category: str | None = None):
        return [r for r in self.records
                if r.strategy == strategy
                and (category is None or r.category == category)]

    def stats(self, strategy: str, category: str | None = None) -> Stats:
        return Stats.from_records(self.records_for(strategy, category))

    def to_dict(self) -> dict:
        results = {}
        for strategy in self.strategies:
            cats = {c: self.stats(strategy, c).to_dict()
                    for c in CATEGORIES
                    if self.records_for(strategy, c)}
            results[strategy] = {
                "overall": self.stats(strategy).to_dict(),
                "categories": cats,
            }
        return {
            "suite": {
                "n_scenes": self.n_scenes,
                "k_variations": self.k_variations,
                "m_per_category": self.n_scenes * self.k_variations,
                "strategies": list(self.strategies),
            },
            "results": results,
            "records": [r.to_dict() for r in sorted(
                self.records, key=lambda r: (r.strategy, r.case_id))],
            "wall_seconds": self.finished_at - self.started_at,
        }

    def table_text(self) -> str:
        lines = [f"{'strategy':<12} {'category':<20} {'M':>4} {'S':>7} "
                 f"{'T (s)':>9} {'std S':>7} {'std T':>9}"]
        for strategy in self.strategies:
            for category in CATEGORIES:
                records = self.records_for(strategy, category)
                if not records:
                    continue
                st = Stats.from_records(records)
                lines.append(
                    f"{strategy:<12} {category:<20} {st.m:>4} {st.success_rate:>7.3f} "
                    f"{st.mean_latency:>9.4f} {st.success_std:>7.3f} {st.latency_std:>9.4f}")
            st = self.stats(strategy)
            lines.append(
                f"{strategy:<12} {'OVERALL':<20} {st.m:>4} {st.success_rate:>7.3f} "
                f"{st.mean_latency:>9.4f} {st.success_std:>7.3f} {st.latency_std:>9.4f}")
        return "\n".join(lines)

    def save(self, path: Path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True),
                              encoding="utf-8")


def run_suite(strategies, cases: list[QueryCase], transport: LlmTransport,
              cfg: BenchConfig) -> BenchReport:
    started = time.time()
    strategy_objs = {}
    for kind in strategies:
        strategy_objs[kind.lower()] = load_strategy(kind)
    records: list[CaseRecord] = []
    for kind, strategy in strategy_objs.items():
        for case in cases:
            scene = cfg.scenes.get(case.scene)
            if scene is None:
                raise FixtureError(f"{case.id}: unknown scene fixture {case.scene!r}")
            plan = None
            final = scene
            error = None
            latency = 0.0
            retries = 0
            try:
                final, plan = execute_edit(scene, case.query, strategy, transport,
                                           cfg.pipeline)
                latency, retries = plan.latency, plan.retries
            except CgaSceneError as exc:
                error = exc.code
                latency = float(getattr(exc, "latency", 0.0))
                retries = int(getattr(exc, "attempts", 0))
            records.append(CaseRecord(
                case_id=case.id, scene=case.scene, category=case.category,
                variation=case.variation, strategy=kind,
                passed=judge(case, plan, final),
                latency=latency, retries=retries, error=error,
            ))
    return BenchReport(
        strategies=tuple(strategy_objs),
        n_scenes=len({c.scene for c in cases}),
        k_variations=len({c.variation for c in cases}),
        records=records,
        started_at=started,
        finished_at=time.time(),
    )


def write_charts(report: BenchReport, path: Path):
    """Grouped success-rate and latency bars per category with dashed
    overall-mean lines; requires matplotlib."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    import numpy as np

    categories = [c for c in CATEGORIES
                  if any(report.records_for(s, c) for s in report.strategies)]
    fig, (ax_s, ax_t) = plt.subplots(1, 2, figsize=(13, 4.5))
    width = 0.8 / max(len(report.strategies), 1)
    xs = np.arange(len(categories))
    for i, strategy in enumerate(report.strategies):
        s_vals = [report.stats(strategy, c).success_rate for c in categories]
        t_vals = [report.stats(strategy, c).mean_latency for c in categories]
        offset = (i - (len(report.strategies) - 1) / 2) * width
        bars = ax_s.bar(xs + offset, s_vals, width, label=strategy)
        color = bars[0].get_facecolor() if len(bars) else None
        ax_t.bar(xs + offset, t_vals, width, label=strategy)
        overall = report.stats(strategy)
        ax_s.axhline(overall.success_rate, linestyle="--", linewidth=1, color=color)
        ax_t.axhline(overall.mean_latency, linestyle="--", linewidth=1, color=color)
    for ax, title, ylabel in ((ax_s, "success rate", "S"),
                              (ax_t, "mean response time", "T (s)")):
        ax.set_xticks(xs)
        ax.set_xticklabels(categories, rotation=20, ha="right")
        ax.set_title(title)
        ax.set_ylabel(ylabel)
        ax.legend()
    ax_s.set_ylim(0.0, 1.05)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
