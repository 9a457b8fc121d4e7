"""
Element-definition JSON.

    {"kind": "mealy", "alphabet": d, "states": {"a": {"perm": [1, 0], "to": ["id", "a"]}}, "initial": "a"}
    {"kind": "rule", "rule": "thm61_b", "params": {...}, "index": {...}}
    {"kind": "portrait", "depth": L, "index": {...}, "perms": [{"vertex": [...], "perm": [...]}]}

Rule parameters that are themselves elements (products, inverses, sections)
nest element objects. A rule without an ``index`` key takes the index given
by the caller.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

from cantor.core.automorphism import FinitePortrait, MealyRecursion, TreeAutomorphism
from cantor.core.rules import RuleDefined
from cantor.core.tree import SphericalIndex, index_to_dict, parse_index, shortlex_key
from cantor.errors import InvalidElement

_ELEMENT_PARAMS = {"product": ("factors",), "inverse": ("of",), "section": ("of",)}


def element_to_dict(element: TreeAutomorphism) -> Dict[str, Any]:
    if isinstance(element, MealyRecursion):
        return {
            "kind": "mealy",
            "alphabet": element.alphabet,
            "states": {
                state: {"perm": perm, "to": targets}
                for state, (perm, targets) in element.to_table().items()
            },
            "initial": element.names[element.initial],
        }
    if isinstance(element, RuleDefined):
        return {
            "kind": "rule",
            "rule": element.rule,
            "params": element.kernel.describe(),
            "index": index_to_dict(element.index),
        }
    if isinstance(element, FinitePortrait):
        return {
            "kind": "portrait",
            "depth": element.depth,
            "index": index_to_dict(element.index),
            "perms": [
                {"vertex": list(v), "perm": list(element.perms[v])}
                for v in sorted(element.perms, key=shortlex_key)
            ],
        }
    raise InvalidElement(f"cannot serialise {type(element).__name__}")


def element_from_dict(
    data: Mapping[str, Any],
    index: Optional[SphericalIndex] = None,
    name: Optional[str] = None,
) -> TreeAutomorphism:
    kind = data.get("kind")
    try:
        if kind == "mealy":
            table = {
                state: (spec["perm"], spec["to"])
                for state, spec in data["states"].items()
            }
            tree = parse_index(data["index"]) if "index" in data else None
            element = MealyRecursion.from_table(int(data["alphabet"]), table, data["initial"], index=tree)
            if name is not None:
                element.name = name
            return element
        if kind == "rule":
            tree = parse_index(data["index"]) if "index" in data else index
            if tree is None:
                raise InvalidElement("rule element needs an index", rule=data.get("rule"))
            params = dict(data.get("params", {}))
            rule = data["rule"]
            if rule == "product":
                params["factors"] = [element_from_dict(f, tree) for f in params["factors"]]
            elif rule in _ELEMENT_PARAMS:
                params["of"] = element_from_dict(params["of"], tree)
                if rule == "section":
                    params["vertex"] = tuple(params["vertex"])
                    tree = params["of"].index.shifted(len(params["vertex"]))
            return RuleDefined(rule, params, tree, name=name)
        if kind == "portrait":
            tree = parse_index(data["index"]) if "index" in data else index
            if tree is None:
                raise InvalidElement("portrait element needs an index")
            perms = {tuple(p["vertex"]): p["perm"] for p in data.get("perms", [])}
            return FinitePortrait(tree, int(data["depth"]), perms, name=name)
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidElement(f"malformed {kind} element: {exc}") from exc
    raise InvalidElement(f"unknown element kind {kind!r}", kind=kind)


def element_to_json(element: TreeAutomorphism) -> str:
    return json.dumps(element_to_dict(element), indent=2, sort_keys=True)


def load_action_file(path: str) -> Dict[str, Any]:
    """Read ``{"index": ..., "generators": {name: element}}`` from disk."""
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    index = parse_index(raw["index"]) if "index" in raw else None
    generators = {
        gen_name: element_from_dict(spec, index, name=gen_name)
        for gen_name, spec in raw.get("generators", {}).items()
    }
    if not generators:
        raise InvalidElement("action file defines no generators", path=path)
    if index is None:
        index = next(iter(generators.values())).index
    return {"index": index, "generators": generators}
