"""
Worked examples as exact elements, their machine-checkable facts, and the
spherical-index compatibility check.

Degenerate examples fix the distinguished path to all zeros: a branch vertex
w ends in digit 1, and z continues w with zeros. Below z a free adding
machine is grafted, so every path through z moves.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

from sympy import factorint

from cantor.config import Config, get_config
from cantor.core.automorphism import MealyRecursion, TreeAutomorphism, section_closure
from cantor.core.group_action import (
    GeneratedAction,
    level_transitive,
    point_stabilizer_ball,
)
from cantor.core.rules import RuleDefined, odometer, swap_jump
from cantor.core.tree import (
    EventuallyPeriodic,
    Geometric,
    SphericalIndex,
    constant_index,
    index_to_dict,
    parse_index,
    same_tree,
)
from cantor.data.models import CatalogSummary, ChainReport, FactResult, FixedDensityInterval
from cantor.errors import CantorError, InvalidParameters
from cantor.utils.helpers import format_rational, load_yaml

logger = logging.getLogger(__name__)

DEFAULT_PRESETS: Dict[str, Dict[str, Any]] = {
    "odometer": {"description": "free adding machine", "params": {"d": 2}},
    "dihedral": {"description": "adding machine and negation on the d-ary odometer", "params": {"d": 2}},
    "grigorchuk": {"description": "first Grigorchuk group on the binary tree", "params": {}},
    "thm61_b": {
        "description": "odometer and the digit-swap element on a fast-growing geometric tree",
        "params": {"index": {"mode": "geometric", "prefix": [3], "ratio": 3}},
    },
    "ex44_c": {
        "description": "odometer and a degenerate element grafted below children of the branch vertices",
        "params": {"index": {"mode": "geometric", "prefix": [3], "ratio": 3}, "first_level": 2},
    },
    "ex45_c": {
        "description": "adding machine and a degenerate element grafted at power-of-two levels",
        "params": {"d": 2, "first_k": 1},
    },
}


@dataclass
class CatalogEntry:
    name: str
    description: str
    index: SphericalIndex
    generators: Dict[str, TreeAutomorphism]
    params: Dict[str, Any] = field(default_factory=dict)

    def action(self, config: Optional[Config] = None) -> GeneratedAction:
        return GeneratedAction(self.index, self.generators, config=config, name=self.name)

    def summary(self) -> CatalogSummary:
        params = {k: (index_to_dict(v) if k == "index" else v) for k, v in self.params.items()}
        return CatalogSummary(
            name=self.name,
            description=self.description,
            index=index_to_dict(self.index),
            generators=list(self.generators),
            params=params,
        )


def load_presets(config: Optional[Config] = None) -> Dict[str, Dict[str, Any]]:
    """Catalog presets from YAML, falling back to the built-in table."""
    config = config or get_config()
    path = Path(config.PRESETS_PATH)
    if not path.is_absolute() and not path.exists():
        path = Path(__file__).resolve().parents[2] / config.PRESETS_PATH
    loaded = load_yaml(str(path)).get("examples", {})
    presets = {name: dict(spec) for name, spec in DEFAULT_PRESETS.items()}
    for name, spec in loaded.items():
        if name in presets:
            merged = dict(presets[name])
            merged.update({k: v for k, v in spec.items() if k != "params"})
            merged["params"] = {**presets[name]["params"], **(spec.get("params") or {})}
            presets[name] = merged
    return presets


def adding_machine(d: int, name: str = "a", index: Optional[SphericalIndex] = None) -> MealyRecursion:
    """a(k s) = (k+1) s for k < d-1 and a((d-1) s) = 0 a(s)."""
    perm = [(k + 1) % d for k in range(d)]
    targets = ["id"] * (d - 1) + [name]
    return MealyRecursion.from_table(d, {name: (perm, targets)}, name, index=index)


def negation(d: int, name: str = "b") -> MealyRecursion:
    """x -> -x on d-adic integers, least significant digit first."""
    flip = f"{name}_f"
    table = {
        name: ([(-k) % d for k in range(d)], [name] + [flip] * (d - 1)),
        flip: ([d - 1 - k for k in range(d)], [flip] * d),
    }
    return MealyRecursion.from_table(d, table, name)


def grigorchuk_machine() -> MealyRecursion:
    table = {
        "a": ([1, 0], ["id", "id"]),
        "b": ([0, 1], ["a", "c"]),
        "c": ([0, 1], ["a", "d"]),
        "d": ([0, 1], ["id", "b"]),
    }
    return MealyRecursion.from_table(2, table, "a")


def _resolve_index(params: Dict[str, Any], default: Dict[str, Any]) -> SphericalIndex:
    raw = params.get("index", default)
    return parse_index(raw)


def build_example(name: str, config: Optional[Config] = None, **params: Any) -> CatalogEntry:
    """Construct a catalog entry; unspecified parameters come from the presets."""
    presets = load_presets(config)
    if name not in presets:
        raise InvalidParameters(f"unknown example {name!r}", known=sorted(presets))
    preset = presets[name]
    merged = {**preset.get("params", {}), **{k: v for k, v in params.items() if v is not None}}
    description = preset.get("description", name)

    if name == "odometer":
        if "index" in params and params["index"] is not None:
            index = parse_index(params["index"])
            d = index.constant()
            a = adding_machine(d, index=index) if d is not None else odometer(index, name="a")
        else:
            d = _arity(merged)
            index = constant_index(d)
            a = adding_machine(d)
        return CatalogEntry(name, description, index, {"a": a}, {"index": index} if d is None else {"d": d})

    if name == "dihedral":
        d = _arity(merged)
        index = constant_index(d)
        return CatalogEntry(name, description, index, {"a": adding_machine(d), "b": negation(d)}, {"d": d})

    if name == "grigorchuk":
        machine = grigorchuk_machine()
        generators = {s: machine.state_element(s) for s in ("a", "b", "c", "d")}
        return CatalogEntry(name, description, constant_index(2), generators, {})

    if name == "thm61_b":
        index = _resolve_index(merged, DEFAULT_PRESETS[name]["params"]["index"])
        if not isinstance(index, Geometric) or index.ratio < 3:
            raise InvalidParameters("thm61_b needs a geometric index with ratio >= 3", index=index_to_dict(index))
        for level in range(1, len(index.prefix) + 1):
            if index.at(level + 1) <= 2 * index.at(level):
                raise InvalidParameters("thm61_b needs n_{l+1} > 2 n_l at every level", level=level)
        if index.at(1) < 3:
            raise InvalidParameters("thm61_b needs n_1 >= 3", n1=index.at(1))
        generators = {"h": odometer(index, name="h"), "b": swap_jump(index, name="b")}
        return CatalogEntry(name, description, index, generators, {"index": index})

    if name == "ex44_c":
        index = _resolve_index(merged, DEFAULT_PRESETS[name]["params"]["index"])
        first_level = int(merged.get("first_level", 2))
        c = RuleDefined("ex44_c", {"first_level": first_level}, index, name="c")
        generators = {"h": odometer(index, name="h"), "c": c}
        return CatalogEntry(name, description, index, generators, {"index": index, "first_level": first_level})

    if name == "ex45_c":
        d = _arity(merged)
        first_k = int(merged.get("first_k", 1))
        index = constant_index(d)
        c = RuleDefined("ex45_c", {"first_k": first_k}, index, name="c")
        generators = {"a": adding_machine(d), "c": c}
        return CatalogEntry(name, description, index, generators, {"d": d, "first_k": first_k})

    raise InvalidParameters(f"example {name!r} has no construction", name=name)


def _arity(params: Dict[str, Any]) -> int:
    d = int(params.get("d", 2))
    if d < 2:
        raise InvalidParameters("arity must be >= 2", d=d)
    return d


def list_examples(config: Optional[Config] = None) -> List[CatalogSummary]:
    return [build_example(name, config).summary() for name in load_presets(config)]


def ex45_vertex(k: int) -> Tuple[int, ...]:
    """w_{m_k} = 0^{2^k - 1} 1."""
    return (0,) * (2 ** k - 1) + (1,)


def ex45_depth(k: int) -> int:
    """One level below z_{m_{k+1}}."""
    return 2 ** (k + 1) + 1


def ex44_vertex(level: int) -> Tuple[int, ...]:
    """w_{l+1} = 0^l 1."""
    return (0,) * level + (1,)


def ex44_depth(level: int) -> int:
    return level + 3


def fixed_density_interval(
    index: SphericalIndex,
    level: int,
    tolerance: Fraction = Fraction(1, 10 ** 6),
) -> FixedDensityInterval:
    """Certified interval for the fixed-set density of the digit-swap element at 0^level.

    The density is prod_{j > l} (n_j - 2) / n_j. Truncating the product at J
    gives an upper bound P_J, and P_J (1 - sum_{j > J} 2/n_j) a lower bound.
    """
    if not isinstance(index, Geometric):
        raise InvalidParameters("the tail bound needs a geometric index", index=index_to_dict(index))
    product = Fraction(1)
    j = level
    while True:
        j += 1
        product *= Fraction(index.at(j) - 2, index.at(j))
        tail = index.tail_sum(j)
        width = product * tail
        if width < tolerance:
            break
    lower = product * (1 - tail)
    bound = 1 - Fraction(4, index.at(level + 1))
    return FixedDensityInterval(
        level=level, lower=lower, upper=product, width=product - lower, bound=bound, above_bound=lower > bound,
    )


def _prime_profile(index: SphericalIndex) -> Tuple[Dict[int, int], set]:
    """(bounded prime -> total exponent, primes whose exponent grows without bound)."""
    if isinstance(index, EventuallyPeriodic):
        once, recurring = list(index.prefix), list(index.cycle)
    else:
        once, recurring = list(index.prefix[:-1]), [index.prefix[-1], index.ratio]
    unbounded = {p for n in recurring for p in factorint(n)}
    bounded: Dict[int, int] = {}
    for n in once:
        for p, e in factorint(n).items():
            if p not in unbounded:
                bounded[p] = bounded.get(p, 0) + e
    return bounded, unbounded


def _prefix_products(index: SphericalIndex, horizon: int) -> List[int]:
    out, acc = [1], 1
    for level in range(1, horizon + 1):
        acc *= index.at(level)
        out.append(acc)
    return out


def chain_compatibility(left: SphericalIndex, right: SphericalIndex, horizon: int) -> ChainReport:
    """Whether the two trees admit interleaved divisibility of their level sizes."""
    if horizon < 1:
        raise InvalidParameters("horizon must be >= 1", horizon=horizon)
    if same_tree(left, right):
        pairs = [[i, i] for i in range(1, horizon + 1)]
        return ChainReport(verdict="compatible", horizon=horizon, interleaving=pairs, summary="identical indices")

    left_bounded, left_unbounded = _prime_profile(left)
    right_bounded, right_unbounded = _prime_profile(right)
    left_primes = set(left_bounded) | left_unbounded
    right_primes = set(right_bounded) | right_unbounded
    for side, mine, theirs in (("left", left_primes, right_primes), ("right", right_primes, left_primes)):
        missing = sorted(mine - theirs)
        if missing:
            p = missing[0]
            return ChainReport(
                verdict="incompatible",
                horizon=horizon,
                obstruction={"kind": "prime", "prime": p, "side": side},
                summary=f"prime {p} divides a level size on the {side} but none on the other side",
            )
    for p in sorted(left_primes):
        l_grows, r_grows = p in left_unbounded, p in right_unbounded
        if l_grows and r_grows:
            continue
        if l_grows != r_grows:
            side = "left" if l_grows else "right"
        elif left_bounded[p] == right_bounded[p]:
            continue
        else:
            side = "left" if left_bounded[p] > right_bounded[p] else "right"
        return ChainReport(
            verdict="incompatible",
            horizon=horizon,
            obstruction={
                "kind": "exponent",
                "prime": p,
                "side": side,
                "left": "unbounded" if l_grows else left_bounded[p],
                "right": "unbounded" if r_grows else right_bounded[p],
            },
            summary=f"the exponent of {p} in the level sizes cannot be matched on both sides",
        )

    ours, theirs = _prefix_products(left, horizon), _prefix_products(right, horizon)
    pairs: List[List[int]] = []
    i, last = 1, 0
    while i <= horizon:
        j = next((j for j in range(last + 1, horizon + 1) if theirs[j] % ours[i] == 0), None)
        if j is None:
            break
        pairs.append([i, j])
        last = j
        i = next((k for k in range(i + 1, horizon + 1) if ours[k] % theirs[j] == 0), horizon + 1)
    if not pairs:
        return ChainReport(
            verdict="undetermined", horizon=horizon, summary=f"no interleaving step within horizon {horizon}",
        )
    return ChainReport(
        verdict="compatible",
        horizon=horizon,
        interleaving=pairs,
        summary=f"greedy interleaving with {len(pairs)} steps up to horizon {horizon}",
    )


def _fact(name: str, claim: str, check: Callable[[], Tuple[bool, Optional[str]]]) -> FactResult:
    try:
        passed, detail = check()
    except CantorError as exc:
        return FactResult(name=name, claim=claim, passed=False, detail=f"{exc.code}: {exc.message}")
    return FactResult(name=name, claim=claim, passed=passed, detail=detail)


def known_facts(entry: CatalogEntry, config: Optional[Config] = None) -> List[FactResult]:
    """Run the machine-checkable claims attached to a catalog entry."""
    from cantor.core import dynamics

    config = config or get_config()
    action = entry.action(config)
    facts: List[FactResult] = []

    if entry.name == "odometer":
        a = entry.generators["a"]
        facts.append(_fact(
            "free", "a fixes no vertex at levels 1..8",
            lambda: (all(not dynamics.fixed_vertices(a, level, config.LEVEL_CAP) for level in range(1, 9)), None),
        ))
        facts.append(_fact(
            "transitive", "the action is transitive on level 8",
            lambda: (level_transitive(action, 8, config.LEVEL_CAP), None),
        ))

        def certified():
            cert = dynamics.certify_nondegenerate(a, config=config)
            return bool(cert.certified and cert.alpha == 1), getattr(cert, "method", None)

        facts.append(_fact("alpha", "certified non-degenerate with alpha = 1", certified))

    elif entry.name == "dihedral":
        def stabilizer_of_zero():
            words = point_stabilizer_ball(action, 4, (0,) * 10)
            return set(words) == {(), ("b",)}, ", ".join(action.format_word(w) for w in words)

        def stabilizer_of_one():
            x = (1,) + (0,) * 9
            words = point_stabilizer_ball(action, 3, x)
            conjugate = action.element(("a", "b", "A"))
            fixes = conjugate.descend(x)[0] == x
            return fixes and len(words) == 2, ", ".join(action.format_word(w) for w in words)

        facts.append(_fact("stabilizer_zero", "the stabilizer ball at the 0-prefix is {e, b}", stabilizer_of_zero))
        facts.append(_fact("stabilizer_one", "the stabilizer ball at a.0 is {e, aab}, the class of a b a^-1", stabilizer_of_one))
        facts.append(_fact(
            "transitive", "the action is transitive on level 8",
            lambda: (level_transitive(action, 8, config.LEVEL_CAP), None),
        ))
        facts.append(_fact(
            "no_lqa_witness", "no LQA witness at radius 4, depth 10",
            lambda: (not dynamics.lqa_witness_search(action, 4, 10).witnesses, None),
        ))

    elif entry.name == "grigorchuk":
        b = entry.generators["b"]

        def closure():
            result = section_closure(b, config.STATE_BOUND)
            return bool(result.bounded) and len(result) == 5, ", ".join(result.names())

        def certified():
            cert = dynamics.certify_nondegenerate(b, config=config)
            ok = cert.certified and cert.alpha == Fraction(1, 8)
            return bool(ok), format_rational(cert.alpha) if cert.certified else cert.reason

        facts.append(_fact("closure", "the sections of b close up in 5 states", closure))
        facts.append(_fact("alpha_b", "b is certified with alpha = 1/8", certified))
        facts.append(_fact(
            "transitive", "the action is transitive on level 4",
            lambda: (level_transitive(action, 4, config.LEVEL_CAP), None),
        ))

    elif entry.name == "thm61_b":
        b = entry.generators["b"]
        index = entry.index

        def level_two():
            count = len(dynamics.fixed_vertices(b, 2, config.LEVEL_CAP))
            expected = (index.at(1) - 2) * (index.at(2) - 2)
            return count == expected, f"{count} of {index.level_size(2)}"

        def bound():
            intervals = [fixed_density_interval(index, level) for level in range(5)]
            return all(iv.above_bound for iv in intervals), None

        def no_refutation():
            report = dynamics.degeneracy_scan(b, 3, threshold=Fraction(1, 100), config=config)
            return report.verdict == "no_refutation", report.summary

        facts.append(_fact("fix_level_2", "b fixes exactly (n_1-2)(n_2-2) vertices at level 2", level_two))
        facts.append(_fact("density_bound", "the fixed density exceeds 1 - 4/n_{l+1} for l = 0..4", bound))
        facts.append(_fact("no_refutation", "no degeneracy refutation at threshold 1/100", no_refutation))

    elif entry.name == "ex44_c":
        c = entry.generators["c"]
        index = entry.index

        def ratios():
            first = int(entry.params.get("first_level", 2))
            levels = range(max(1, first - 1), max(1, first - 1) + 4)
            seen = []
            for level in levels:
                value = dynamics.nonfixed_ratio(c, ex44_vertex(level), ex44_depth(level), config.LEVEL_CAP)
                seen.append(value == Fraction(1, index.at(level + 2)))
            return all(seen), None

        facts.append(_fact("ratios", "the moved ratio at w_{l+1} is 1/n_{l+2}", ratios))

    elif entry.name == "ex45_c":
        c = entry.generators["c"]
        d = entry.index.constant()
        first_k = int(entry.params.get("first_k", 1))

        def ratios():
            seen = []
            for k in range(first_k, first_k + 3):
                value = dynamics.nonfixed_ratio(c, ex45_vertex(k), ex45_depth(k), config.LEVEL_CAP)
                seen.append(value == Fraction(1, d ** (2 ** k)))
            return all(seen), None

        def refutes():
            report = dynamics.degeneracy_scan(c, 9, threshold=Fraction(1, 8), config=config)
            return report.verdict == "refutes", report.summary

        facts.append(_fact("ratios", "the moved ratio at w_{m_k} is d^(-2^k)", ratios))
        facts.append(_fact("degenerate", "a resolved ratio below 1/8 refutes non-degeneracy", refutes))

    logger.info(f"{entry.name}: {sum(f.passed for f in facts)}/{len(facts)} facts hold")
    return facts
