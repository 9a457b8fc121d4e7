"""
Workbench - orchestrates one cantor operation per call.

Resolves actions and elements from the catalog or from element-definition
files, runs the requested operation with configured defaults, and shapes the
result for JSON, table or DOT output.
"""

import json
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import pandas as pd
from pydantic import BaseModel

from cantor.config import Config, get_config
from cantor.core import catalog, dynamics, group_action, irs
from cantor.core.automorphism import TreeAutomorphism
from cantor.core.group_action import GeneratedAction
from cantor.core.tree import parse_index
from cantor.data.models import RatioReport
from cantor.data.serialization import element_from_dict, element_to_dict, load_action_file
from cantor.errors import InvalidParameters
from cantor.utils.helpers import format_digits, json_dumps_pretty, parse_digits

logger = logging.getLogger(__name__)


@dataclass
class RunResult:
    """Output of one operation: a JSON payload, optional table rows and DOT text."""

    command: str
    payload: Dict[str, Any]
    rows: List[Dict[str, Any]] = field(default_factory=list)
    dot: Optional[str] = None


def _plain(value: Any) -> Any:
    if isinstance(value, BaseModel):
        return value.model_dump(mode="json")
    if isinstance(value, Fraction):
        return {"num": str(value.numerator), "den": str(value.denominator)}
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


def _table_cell(value: Any) -> Any:
    if isinstance(value, dict) and set(value) == {"num", "den"}:
        return value["num"] if value["den"] == "1" else f"{value['num']}/{value['den']}"
    if isinstance(value, (dict, list)):
        return json.dumps(value, sort_keys=True)
    return value


class Workbench:
    """
    Front door for the CLI: one method per operation.
    """

    def __init__(self, config: Optional[Config] = None):
        self.config = config or get_config()
        problems = self.config.validate()
        if problems:
            raise InvalidParameters("invalid configuration", problems=problems)

    # -- resolution -------------------------------------------------------

    def action(
        self,
        example: Optional[str] = None,
        action_file: Optional[str] = None,
        params: Optional[Dict[str, Any]] = None,
    ) -> GeneratedAction:
        if action_file:
            loaded = load_action_file(action_file)
            return GeneratedAction(
                loaded["index"], loaded["generators"], config=self.config, name=Path(action_file).stem,
            )
        if not example:
            raise InvalidParameters("give --example or --action")
        params = dict(params or {})
        if isinstance(params.get("index"), str):
            params["index"] = json.loads(params["index"])
        entry = catalog.build_example(example, self.config, **params)
        return entry.action(self.config)

    def element(self, action: GeneratedAction, spec: Optional[str]) -> TreeAutomorphism:
        """An element given by a word in the action's letters or by a JSON file."""
        if spec is None:
            spec = next(reversed(action.generators))
        path = Path(spec)
        if spec.endswith(".json") and path.exists():
            data = json.loads(path.read_text(encoding="utf-8"))
            return element_from_dict(data, action.index, name=path.stem)
        word = action.parse_word(spec)
        element = action.element(word)
        element.name = action.format_word(word)
        return element

    @staticmethod
    def point(text: str) -> tuple:
        try:
            return parse_digits(text)
        except ValueError as exc:
            raise InvalidParameters(f"cannot read digits from {text!r}") from exc

    def _result(self, command: str, report: Any, rows: Sequence[Any] = (), dot: Optional[str] = None, **extra) -> RunResult:
        payload = _plain(report)
        payload.update({k: _plain(v) for k, v in extra.items()})
        payload["command"] = command
        payload["schema_version"] = self.config.SCHEMA_VERSION
        return RunResult(command, payload, [_plain(r) for r in rows], dot)

    # -- catalog ----------------------------------------------------------

    def catalog_list(self) -> RunResult:
        summaries = catalog.list_examples(self.config)
        return self._result("catalog list", {"examples": summaries}, rows=summaries)

    def catalog_facts(self, name: str, params: Optional[Dict[str, Any]] = None) -> RunResult:
        entry = catalog.build_example(name, self.config, **(params or {}))
        facts = catalog.known_facts(entry, self.config)
        return self._result(
            "catalog facts", {"example": name, "facts": facts, "all_passed": all(f.passed for f in facts)}, rows=facts,
        )

    def catalog_export(self, name: str, params: Optional[Dict[str, Any]] = None) -> RunResult:
        entry = catalog.build_example(name, self.config, **(params or {}))
        summary = entry.summary()
        return self._result(
            "catalog export",
            {
                "index": summary.index,
                "generators": {n: element_to_dict(g) for n, g in entry.generators.items()},
            },
        )

    # -- automorphisms and actions ----------------------------------------

    def apply(self, action: GeneratedAction, element_spec: Optional[str], vertex: str) -> RunResult:
        g = self.element(action, element_spec)
        word = self.point(vertex)
        image = g.apply(word)
        return self._result(
            "apply", {"element": g.label(), "vertex": format_digits(word), "image": format_digits(image)},
        )

    def section(self, action: GeneratedAction, element_spec: Optional[str], vertex: str) -> RunResult:
        g = self.element(action, element_spec)
        word = self.point(vertex)
        s = g.section(word)
        return self._result(
            "section",
            {"element": g.label(), "vertex": format_digits(word), "identity": s.is_identity(), "section": element_to_dict(s)},
        )

    def ball(self, action: GeneratedAction, radius: int, depth: Optional[int] = None) -> RunResult:
        the_ball = group_action.ball(action, radius, depth)
        if not the_ball.exact:
            logger.warning(f"ball classes are only distinct at depth {the_ball.dedup_depth}")
        words = [action.format_word(w) for w in the_ball.words()]
        return self._result(
            "ball",
            {"radius": radius, "exact": the_ball.exact, "dedup_depth": the_ball.dedup_depth, "size": len(words), "words": words},
            rows=[{"word": w, "length": len(e.word)} for w, e in zip(words, the_ball)],
        )

    def orbit(self, action: GeneratedAction, vertex: str) -> RunResult:
        word = self.point(vertex)
        orbit = group_action.level_orbit(action, word, self.config.LEVEL_CAP)
        size = action.index.level_size(len(word))
        return self._result(
            "orbit",
            {
                "vertex": format_digits(word),
                "orbit": [format_digits(v.word) for v in orbit],
                "size": len(orbit),
                "level_size": size,
                "transitive": len(orbit) == size,
            },
            rows=[{"vertex": format_digits(v.word)} for v in orbit],
        )

    def stabilizer(
        self,
        action: GeneratedAction,
        radius: int,
        vertex: str,
        depth: Optional[int] = None,
        point: bool = False,
    ) -> RunResult:
        word = self.point(vertex)
        if point:
            words = group_action.point_stabilizer_ball(action, radius, word, depth)
        else:
            words = group_action.level_stabilizer(action, radius, depth, word)
        formatted = [action.format_word(w) for w in words]
        return self._result(
            "stabilizer",
            {"vertex": format_digits(word), "radius": radius, "point": point, "words": formatted},
            rows=[{"word": w} for w in formatted],
        )

    def schreier(
        self,
        action: GeneratedAction,
        level: Optional[int] = None,
        point: Optional[str] = None,
        radius: Optional[int] = None,
    ) -> RunResult:
        if point is not None:
            radius = radius if radius is not None else self.config.BALL_RADIUS
            graph = group_action.stabilizer_schreier_ball(action, self.point(point), radius)
        elif level is not None:
            graph = group_action.schreier_level_graph(action, level, self.config.LEVEL_CAP)
        else:
            raise InvalidParameters("give --level or --point")
        form = graph.to_json_dict()
        rows = [{"source": u, "label": label, "target": v} for u, label, v in form["edges"]]
        return self._result("schreier", {"graph": form}, rows=rows, dot=graph.to_dot())

    # -- dynamics ---------------------------------------------------------

    def fixratio(
        self,
        action: GeneratedAction,
        element_spec: Optional[str],
        vertex: str,
        depth: int,
    ) -> RunResult:
        g = self.element(action, element_spec)
        word = self.point(vertex)
        ratio, resolved = dynamics.nonfixed_ratio_detail(g, word, depth, self.config.LEVEL_CAP)
        report = RatioReport(element=g.label(), vertex=format_digits(word), depth=depth, ratio=ratio, resolved=resolved)
        return self._result("fixratio", report, rows=[report])

    def fixed(self, action: GeneratedAction, element_spec: Optional[str], level: int) -> RunResult:
        g = self.element(action, element_spec)
        vertices = dynamics.fixed_vertices(g, level, self.config.LEVEL_CAP)
        return self._result(
            "fixed",
            {"element": g.label(), "level": level, "count": len(vertices), "vertices": [format_digits(v.word) for v in vertices]},
            rows=[{"vertex": format_digits(v.word)} for v in vertices],
        )

    def scan(
        self,
        action: GeneratedAction,
        element_spec: Optional[str],
        max_level: int,
        threshold: str,
        margin: Optional[int] = None,
    ) -> RunResult:
        g = self.element(action, element_spec)
        report = dynamics.degeneracy_scan(g, max_level, margin, Fraction(threshold), self.config)
        return self._result("scan", report, rows=report.levels)

    def certify(
        self,
        action: GeneratedAction,
        element_spec: Optional[str],
        state_bound: Optional[int] = None,
        replay: int = 0,
        max_level: int = 8,
        seed: Optional[int] = None,
    ) -> RunResult:
        g = self.element(action, element_spec)
        cert = dynamics.certify_nondegenerate(g, state_bound, self.config)
        extra = {}
        if cert.certified and replay > 0:
            extra["replay"] = dynamics.replay_certificate(
                cert, g, replay, max_level, seed if seed is not None else self.config.SEED, self.config.LEVEL_CAP,
            )
        rows = cert.evidence if cert.certified else []
        return self._result("certify", cert, rows=rows, **extra)

    def holonomy(
        self,
        action: GeneratedAction,
        element_spec: Optional[str],
        point: str,
        depth: Optional[int] = None,
        margin: Optional[int] = None,
    ) -> RunResult:
        g = self.element(action, element_spec)
        report = dynamics.holonomy_witness(g, self.point(point), depth, margin, self.config.LEVEL_CAP)
        return self._result("holonomy", report, rows=report.levels)

    def lqa(self, action: GeneratedAction, radius: int, depth: int, margin: Optional[int] = None) -> RunResult:
        report = dynamics.lqa_witness_search(action, radius, depth, margin)
        return self._result("lqa", report, rows=report.witnesses)

    def distinct(
        self,
        action: GeneratedAction,
        radius: int,
        depth: int,
        n: int,
        margin: Optional[int] = None,
    ) -> RunResult:
        report = dynamics.distinct_stabilizer_tree(action, radius, depth, n, margin)
        return self._result("distinct", report, rows=report.separators)

    def density(
        self,
        action: GeneratedAction,
        element_spec: Optional[str],
        point: str,
        levels: Sequence[int],
        depth: int,
    ) -> RunResult:
        g = self.element(action, element_spec)
        report = dynamics.density_profile(g, self.point(point), levels, depth, self.config.LEVEL_CAP)
        return self._result("density", report, rows=report.values)

    # -- IRS --------------------------------------------------------------

    def irs(
        self,
        action: GeneratedAction,
        samples: int,
        depth: int,
        radius: int,
        seed: Optional[int] = None,
        radii: Sequence[int] = (),
    ) -> RunResult:
        report = irs.irs_empirical(action, samples, depth, radius, seed, self.config)
        extra = {}
        if radii:
            runs = [report] + [
                irs.irs_empirical(action, samples, depth, r, seed, self.config) for r in radii if r != radius
            ]
            extra["atomicity"] = irs.atomicity_report(runs, config=self.config)
        rows = [
            {"hash": c.hash[:12], "vertices": c.vertices, "count": c.count, "frequency": c.frequency}
            for c in report.classes
        ]
        basepoint = parse_digits(report.classes[0].representative["labels"][0])
        dot = group_action.stabilizer_schreier_ball(action, basepoint, radius).to_dot()
        return self._result("irs", report, rows=rows, dot=dot, **extra)

    def chabauty(
        self,
        action: GeneratedAction,
        include: Sequence[str],
        exclude: Sequence[str],
        samples: int,
        depth: int,
        seed: Optional[int] = None,
    ) -> RunResult:
        report = irs.chabauty_mass(
            action,
            [action.parse_word(w) for w in include],
            [action.parse_word(w) for w in exclude],
            samples,
            depth,
            seed,
        )
        return self._result("chabauty", report, rows=[report])

    def metric(
        self,
        action: GeneratedAction,
        x: str,
        y: str,
        r_max: int,
        level: Optional[int] = None,
    ) -> RunResult:
        first_point, second_point = self.point(x), self.point(y)
        if level is not None:
            graph = group_action.schreier_level_graph(action, level, self.config.LEVEL_CAP)
            if first_point not in graph.graph or second_point not in graph.graph:
                raise InvalidParameters("both points must lie in the orbit of the all-zeros vertex", level=level)
            first, second = graph.rebased(first_point), graph.rebased(second_point)
        else:
            first = group_action.stabilizer_schreier_ball(action, first_point, r_max)
            second = group_action.stabilizer_schreier_ball(action, second_point, r_max)
        report = irs.metric_report(first, second, r_max)
        return self._result("metric", report, x=format_digits(first_point), y=format_digits(second_point))

    def chains(self, left: str, right: str, horizon: int) -> RunResult:
        try:
            left_index, right_index = parse_index(json.loads(left)), parse_index(json.loads(right))
        except json.JSONDecodeError as exc:
            raise InvalidParameters(f"index must be a JSON object: {exc}") from exc
        report = catalog.chain_compatibility(left_index, right_index, horizon)
        return self._result("chains", report, rows=[{"i": p[0], "j": p[1]} for p in report.interleaving])

    # -- output -----------------------------------------------------------

    def render(self, result: RunResult, fmt: str = "json") -> str:
        if fmt == "dot":
            if result.dot is None:
                raise InvalidParameters(f"{result.command} has no graph output")
            return result.dot
        if fmt == "table":
            if not result.rows:
                return self._json_dumps_pretty(result.payload) + "\n"
            frame = pd.DataFrame([{k: _table_cell(v) for k, v in row.items()} for row in result.rows])
            return frame.to_string(index=False) + "\n"
        return self._json_dumps_pretty(result.payload) + "\n"

    def write(self, text: str, out: Optional[str]) -> Optional[str]:
        if out is None:
            return None
        path = Path(out)
        path.write_text(text, encoding="utf-8")
        logger.info(f"output written to {path}")
        return str(path)

    def get_configuration_status(self) -> Dict[str, Any]:
        """Effective configuration values and any validation problems."""
        return {
            "level_cap": self.config.LEVEL_CAP,
            "working_depth": self.config.WORKING_DEPTH,
            "ball_radius": self.config.BALL_RADIUS,
            "scan_margin": self.config.SCAN_MARGIN,
            "state_bound": self.config.STATE_BOUND,
            "orbit_limit": self.config.ORBIT_LIMIT,
            "atom_threshold": self.config.ATOM_THRESHOLD,
            "seed": self.config.SEED,
            "max_workers": self.config.MAX_WORKERS,
            "presets": self.config.PRESETS_PATH,
            "schema_version": self.config.SCHEMA_VERSION,
            "problems": self.config.validate(),
        }

    def _json_dumps_pretty(self, obj: Any) -> str:
        return json_dumps_pretty(obj)
