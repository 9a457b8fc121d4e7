"""
Command line interface for cantor.

Each sub-command runs one library operation through the Workbench and prints
JSON (default), a table or DOT text. Exit codes: 0 success, 1 domain error,
2 usage error.
"""

import argparse
import functools
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

# Add project root to path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from cantor import configure_logging
from cantor.config import get_config
from cantor.core.analyzer import RunResult, Workbench
from cantor.core.catalog import ex44_depth, ex44_vertex, ex45_depth, ex45_vertex
from cantor.errors import CantorError
from cantor.utils.helpers import format_digits

logger = logging.getLogger(__name__)

EPILOG = """
Examples:
  # Fixed-point ratio of the degenerate element on the binary odometer
  cantor fixratio --example ex45_c --d 2 --k 2 --json

  # Stabilizer Schreier classes of 100 random points
  cantor irs --example odometer --n 100 --depth 32 --radius 3 --seed 7

  # Orbit graph of level 3 in the Grigorchuk group, as DOT
  cantor --format dot schreier --example grigorchuk --level 3
"""


def _add_global_args(p: argparse.ArgumentParser, suppress: bool = False) -> None:
    """Options accepted before or after the sub-command."""

    def default(value):
        return argparse.SUPPRESS if suppress else value

    p.add_argument("--config-profile", default=default(None), help="Configuration profile (default, testing)")
    p.add_argument("--out", default=default(None), help="Also write the output to this file")
    p.add_argument("--format", choices=["json", "table", "dot"], default=default("json"), help="Output format")
    p.add_argument("--json", action="store_true", default=default(False), help="Force JSON output, errors included")
    p.add_argument("--level-cap", type=int, default=default(None), help="Override LEVEL_CAP")
    p.add_argument("--seed", type=int, default=default(None), help="Override SEED")


def _add_action_args(p: argparse.ArgumentParser) -> None:
    group = p.add_argument_group("action")
    group.add_argument("--example", help="Catalog example name")
    group.add_argument("--action", dest="action_file", help="JSON file with index and generators")
    group.add_argument("--d", type=int, help="Arity of constant-index examples")
    group.add_argument("--index", help="Spherical index as JSON")
    group.add_argument("--first-k", type=int, help="First grafting exponent (ex45_c)")
    group.add_argument("--first-level", type=int, help="First grafting level (ex44_c)")


def _add_element_arg(p: argparse.ArgumentParser) -> None:
    p.add_argument("--element", help="Word in the generators, or an element JSON file (default: last generator)")


def build_parser() -> argparse.ArgumentParser:
    defaults = get_config()
    parser = argparse.ArgumentParser(
        prog="cantor",
        description="Exact finite-depth group actions on spherically homogeneous rooted trees",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=EPILOG,
    )
    _add_global_args(parser)
    shared = argparse.ArgumentParser(add_help=False)
    _add_global_args(shared, suppress=True)

    subparsers = parser.add_subparsers(dest="command", help="Available commands")
    add_parser = functools.partial(subparsers.add_parser, parents=[shared])

    catalog_parser = add_parser("catalog", help="List, check or export catalog examples")
    catalog_parser.add_argument("what", choices=["list", "facts", "export"])
    catalog_parser.add_argument("name", nargs="?", help="Example name (facts, export)")
    catalog_parser.add_argument("--d", type=int)
    catalog_parser.add_argument("--index")
    catalog_parser.add_argument("--first-k", type=int)
    catalog_parser.add_argument("--first-level", type=int)

    for verb, helptext in (("apply", "Image of a vertex"), ("section", "Section at a vertex")):
        p = add_parser(verb, help=helptext)
        _add_action_args(p)
        _add_element_arg(p)
        p.add_argument("--vertex", required=True, help="Vertex digits, e.g. 011 or 0*5,1")

    p = add_parser("ball", help="Word ball up to equality")
    _add_action_args(p)
    p.add_argument("--radius", type=int, default=defaults.BALL_RADIUS)
    p.add_argument("--depth", type=int, help="Deduplication depth for non-exact actions")

    p = add_parser("orbit", help="Orbit of a vertex")
    _add_action_args(p)
    p.add_argument("--vertex", required=True)

    p = add_parser("stabilizer", help="Ball words fixing a vertex or a prefix")
    _add_action_args(p)
    p.add_argument("--vertex", required=True)
    p.add_argument("--radius", type=int, default=defaults.BALL_RADIUS)
    p.add_argument("--depth", type=int)
    p.add_argument("--point", action="store_true", help="Treat the vertex as a boundary prefix")

    p = add_parser("schreier", help="Level orbit graph or stabilizer Schreier ball")
    _add_action_args(p)
    p.add_argument("--level", type=int)
    p.add_argument("--point", help="Prefix to centre a Schreier ball on")
    p.add_argument("--radius", type=int)

    p = add_parser("fixratio", help="Moved-measure ratio under a fixed vertex")
    _add_action_args(p)
    _add_element_arg(p)
    p.add_argument("--vertex")
    p.add_argument("--depth", type=int)
    p.add_argument("--k", type=int, help="ex45_c: use the vertex and depth of exponent k")
    p.add_argument("--level", type=int, help="ex44_c: use the vertex and depth of level l")

    p = add_parser("fixed", help="Fixed vertices at a level")
    _add_action_args(p)
    _add_element_arg(p)
    p.add_argument("--level", type=int, required=True)

    p = add_parser("scan", help="Search for degeneracy witnesses")
    _add_action_args(p)
    _add_element_arg(p)
    p.add_argument("--max-level", type=int, default=6)
    p.add_argument("--margin", type=int)
    p.add_argument("--threshold", default="1/2")

    p = add_parser("certify", help="Certify non-degeneracy from a finite section closure")
    _add_action_args(p)
    _add_element_arg(p)
    p.add_argument("--state-bound", type=int)
    p.add_argument("--replay", type=int, default=0, help="Replay the certificate on this many sampled vertices")
    p.add_argument("--max-level", type=int, default=8)

    p = add_parser("holonomy", help="Moved vertices in the cylinders around a point")
    _add_action_args(p)
    _add_element_arg(p)
    p.add_argument("--point", required=True)
    p.add_argument("--depth", type=int)
    p.add_argument("--margin", type=int)

    p = add_parser("lqa", help="Search for local quasi-analyticity witnesses")
    _add_action_args(p)
    p.add_argument("--radius", type=int, default=defaults.BALL_RADIUS)
    p.add_argument("--depth", type=int, default=defaults.WORKING_DEPTH)
    p.add_argument("--margin", type=int)

    p = add_parser("distinct", help="2^n points with pairwise distinct stabilizer balls")
    _add_action_args(p)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--radius", type=int, default=defaults.BALL_RADIUS)
    p.add_argument("--depth", type=int, default=defaults.WORKING_DEPTH)
    p.add_argument("--margin", type=int)

    p = add_parser("density", help="Fixed-set density around a point")
    _add_action_args(p)
    _add_element_arg(p)
    p.add_argument("--point", required=True)
    p.add_argument("--levels", type=int, nargs="+", required=True)
    p.add_argument("--depth", type=int, default=defaults.WORKING_DEPTH)

    p = add_parser("irs", help="Empirical stabilizer-class frequencies")
    _add_action_args(p)
    p.add_argument("--n", type=int, default=100, help="Number of sampled points")
    p.add_argument("--depth", type=int, default=defaults.WORKING_DEPTH)
    p.add_argument("--radius", type=int, default=defaults.BALL_RADIUS)
    p.add_argument("--radii", type=int, nargs="*", default=[], help="Extra radii for the atomicity table")

    p = add_parser("chabauty", help="Empirical mass of a basic Chabauty set")
    _add_action_args(p)
    p.add_argument("--include", nargs="*", default=[])
    p.add_argument("--exclude", nargs="*", default=[])
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--depth", type=int, default=defaults.WORKING_DEPTH)

    p = add_parser("metric", help="Distance between stabilizer Schreier graphs of two points")
    _add_action_args(p)
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--r-max", type=int, default=defaults.BALL_RADIUS)
    p.add_argument("--level", type=int, help="Compare rebased level orbit graphs instead")

    p = add_parser("chains", help="Isomorphism test for two spherical indices")
    p.add_argument("--left", required=True, help="Index as JSON")
    p.add_argument("--right", required=True, help="Index as JSON")
    p.add_argument("--horizon", type=int, default=64)

    add_parser("status", help="Show effective configuration")
    return parser


def _example_params(args: argparse.Namespace) -> Dict[str, Any]:
    params = {
        "d": getattr(args, "d", None),
        "index": getattr(args, "index", None),
        "first_k": getattr(args, "first_k", None),
        "first_level": getattr(args, "first_level", None),
    }
    if isinstance(params["index"], str):
        params["index"] = json.loads(params["index"])
    return {k: v for k, v in params.items() if v is not None}


def _fixratio_target(args: argparse.Namespace, parser: argparse.ArgumentParser):
    if args.k is not None:
        return format_digits(ex45_vertex(args.k)), args.depth or ex45_depth(args.k)
    if args.level is not None:
        return format_digits(ex44_vertex(args.level)), args.depth or ex44_depth(args.level)
    if args.vertex is None or args.depth is None:
        parser.error("fixratio needs --vertex and --depth, or --k, or --level")
    return args.vertex, args.depth


def run(args: argparse.Namespace, bench: Workbench, parser: argparse.ArgumentParser) -> RunResult:
    command = args.command
    if command == "catalog":
        params = _example_params(args)
        if args.what == "list":
            return bench.catalog_list()
        if not args.name:
            parser.error(f"catalog {args.what} needs an example name")
        if args.what == "facts":
            return bench.catalog_facts(args.name, params)
        return bench.catalog_export(args.name, params)
    if command == "chains":
        return bench.chains(args.left, args.right, args.horizon)
    if command == "status":
        status = bench.get_configuration_status()
        return RunResult("status", status, rows=[{"setting": k, "value": v} for k, v in status.items()])

    action = bench.action(args.example, args.action_file, _example_params(args))
    if command == "apply":
        return bench.apply(action, args.element, args.vertex)
    if command == "section":
        return bench.section(action, args.element, args.vertex)
    if command == "ball":
        return bench.ball(action, args.radius, args.depth)
    if command == "orbit":
        return bench.orbit(action, args.vertex)
    if command == "stabilizer":
        return bench.stabilizer(action, args.radius, args.vertex, args.depth, args.point)
    if command == "schreier":
        return bench.schreier(action, args.level, args.point, args.radius)
    if command == "fixratio":
        vertex, depth = _fixratio_target(args, parser)
        return bench.fixratio(action, args.element, vertex, depth)
    if command == "fixed":
        return bench.fixed(action, args.element, args.level)
    if command == "scan":
        return bench.scan(action, args.element, args.max_level, args.threshold, args.margin)
    if command == "certify":
        return bench.certify(action, args.element, args.state_bound, args.replay, args.max_level, args.seed)
    if command == "holonomy":
        return bench.holonomy(action, args.element, args.point, args.depth, args.margin)
    if command == "lqa":
        return bench.lqa(action, args.radius, args.depth, args.margin)
    if command == "distinct":
        return bench.distinct(action, args.radius, args.depth, args.n, args.margin)
    if command == "density":
        return bench.density(action, args.element, args.point, args.levels, args.depth)
    if command == "irs":
        return bench.irs(action, args.n, args.depth, args.radius, args.seed, args.radii)
    if command == "chabauty":
        return bench.chabauty(action, args.include, args.exclude, args.n, args.depth, args.seed)
    if command == "metric":
        return bench.metric(action, args.x, args.y, args.r_max, args.level)
    parser.error(f"unknown command {command!r}")


def main(argv: Optional[List[str]] = None) -> int:
    """Main CLI entry point."""
    parser = build_parser()
    args = parser.parse_args(argv)

    if not args.command:
        parser.print_help()
        return 2

    config = get_config(args.config_profile)
    if args.level_cap is not None:
        config.LEVEL_CAP = args.level_cap
    if args.seed is not None:
        config.SEED = args.seed
    configure_logging(config)
    fmt = "json" if args.json else args.format

    try:
        bench = Workbench(config)
        result = run(args, bench, parser)
        text = bench.render(result, fmt)
    except CantorError as e:
        logger.error(f"{e.code}: {e.message}")
        if args.json or fmt == "json":
            print(json.dumps(e.to_dict(), indent=2, sort_keys=True))
        else:
            print(f"Error: {e.message}", file=sys.stderr)
        return 1
    except (json.JSONDecodeError, ValueError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return 2

    sys.stdout.write(text)
    bench.write(text, args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
