"""Replace quoted object names in user queries with variables X1..Xn.

Quoted spans ('single' or "double") are matched case-sensitively against scene
object names. Distinct names get X1, X2, ... in first-occurrence order;
repeated mentions reuse the variable. The template text handed to the LLM
never contains the original names.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .errors import UnbalancedQuotes, UnknownObject, UnknownVariable
from .scene_model import Scene, SceneObject

_QUOTES = ("'", '"')


@dataclass
class TemplatedQuery:
    template: str
    bindings: dict[str, str] = field(default_factory=dict)  # variable -> object name
    original: str = ""

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(self.bindings)


def template_query(raw: str, scene: Scene) -> TemplatedQuery:
    if not raw:
        raise ValueError("query must be nonempty")
    for q in _QUOTES:
        if raw.count(q) % 2:
            raise UnbalancedQuotes(f"odd number of {q} quotes in query")
    out: list[str] = []
    bindings: dict[str, str] = {}
    by_name: dict[str, str] = {}
    i = 0
    n = len(raw)
    while i < n:
        ch = raw[i]
        if ch in _QUOTES:
            j = raw.find(ch, i + 1)
            if j < 0:
                raise UnbalancedQuotes(f"unterminated {ch} quote in query")
            name = raw[i + 1:j]
            if not scene.has_object(name):
                raise UnknownObject(name)
            var = by_name.get(name)
            if var is None:
                var = f"X{len(by_name) + 1}"
                by_name[name] = var
                bindings[var] = name
            out.append(var)
            i = j + 1
        else:
            out.append(ch)
            i += 1
    return TemplatedQuery("".join(out), bindings, raw)


def detemplate(response_bindings: dict[str, str], scene: Scene) -> dict[str, SceneObject]:
    """Resolve variable -> object-name bindings to live scene objects."""
    resolved: dict[str, SceneObject] = {}
    for var, name in response_bindings.items():
        if not isinstance(name, str) or not name:
            raise UnknownVariable(var)
        resolved[var] = scene.object(name)  # raises UnknownObject if it vanished
    return resolved
