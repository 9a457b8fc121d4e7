"""
Stabilizer map and empirical invariant random subgroups.

Points are drawn from the counting measure on depth-L cylinders, each with
its own counter-based stream keyed by (seed, sample index), so results do not
depend on how samples are scheduled across workers.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from cantor.config import Config
from cantor.core.group_action import GeneratedAction, stabilizer_schreier_ball
from cantor.core.schreier import SchreierGraph
from cantor.core.tree import BoundaryPrefix, Indistinguishable, SphericalIndex, as_word
from cantor.data.models import (
    AtomicityReport,
    AtomicityRow,
    ChabautyReport,
    ClassFrequency,
    IrsSampleReport,
    MetricReport,
)
from cantor.errors import InvalidParameters

logger = logging.getLogger(__name__)

_INT64_SAFE = 2 ** 62


def schreier_metric(
    first: SchreierGraph,
    second: SchreierGraph,
    r_max: int,
) -> Union[Fraction, Indistinguishable]:
    """1/2^k for the largest k <= r_max with isomorphic pointed balls."""
    if set(first.generators) != set(second.generators):
        raise InvalidParameters(
            "Schreier graphs use different generator labels",
            left=list(first.generators), right=list(second.generators),
        )
    for graph in (first, second):
        if graph.radius is not None and graph.radius < r_max:
            raise InvalidParameters(f"graph only holds a ball of radius {graph.radius}", r_max=r_max)
    aligned = SchreierGraph(second.graph, second.basepoint, first.generators, second.radius, second.depth)
    for r in range(1, r_max + 1):
        if not first.ball(r).is_isomorphic_pointed(aligned.ball(r)):
            return Fraction(1, 2 ** (r - 1))
    return Indistinguishable(depth=r_max, bound=Fraction(1, 2 ** r_max))


def metric_report(first: SchreierGraph, second: SchreierGraph, r_max: int) -> MetricReport:
    value = schreier_metric(first, second, r_max)
    if isinstance(value, Indistinguishable):
        return MetricReport(r_max=r_max, distance=None, indistinguishable=True)
    return MetricReport(r_max=r_max, distance=value, indistinguishable=False)


def point_stream(seed: int, i: int) -> np.random.Generator:
    """Independent Philox stream for sample ``i``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy=seed, spawn_key=(i,))))


def _uniform_below(rng: np.random.Generator, n: int) -> int:
    if n < _INT64_SAFE:
        return int(rng.integers(0, n))
    nbytes = (n.bit_length() + 7) // 8
    mask = (1 << n.bit_length()) - 1
    while True:
        value = int.from_bytes(rng.bytes(nbytes), "little") & mask
        if value < n:
            return value


def sample_point(index: SphericalIndex, depth: int, rng: np.random.Generator) -> BoundaryPrefix:
    """Depth-L prefix with independent uniform digits (the counting measure)."""
    return BoundaryPrefix(tuple(_uniform_below(rng, index.at(level)) for level in range(1, depth + 1)))


def _sample_ball(action: GeneratedAction, depth: int, radius: int, seed: int, i: int) -> SchreierGraph:
    x = sample_point(action.index, depth, point_stream(seed, i))
    return stabilizer_schreier_ball(action, x, radius)


def irs_empirical(
    action: GeneratedAction,
    samples: int,
    depth: int,
    radius: int,
    seed: Optional[int] = None,
    config: Optional[Config] = None,
) -> IrsSampleReport:
    """Classes of sampled stabilizer Schreier balls and their frequencies."""
    config = config or action.config
    seed = seed if seed is not None else config.SEED
    if samples <= 0:
        raise InvalidParameters("sample count must be positive", samples=samples)
    logger.info(f"IRS sampling: N={samples}, depth {depth}, radius {radius}, seed {seed}")

    with ThreadPoolExecutor(max_workers=config.MAX_WORKERS) as pool:
        graphs = list(pool.map(lambda i: _sample_ball(action, depth, radius, seed, i), range(samples)))

    counts: Dict[str, int] = {}
    representatives: Dict[str, SchreierGraph] = {}
    for graph in graphs:
        key = graph.canonical_hash()
        counts[key] = counts.get(key, 0) + 1
        representatives.setdefault(key, graph)
    ordered = sorted(counts, key=lambda k: (-counts[k], k))
    classes = [
        ClassFrequency(
            hash=key,
            vertices=len(representatives[key]),
            count=counts[key],
            frequency=Fraction(counts[key], samples),
            representative=representatives[key].to_json_dict(),
        )
        for key in ordered
    ]
    report = IrsSampleReport(
        action=action.name or "action",
        samples=samples,
        depth=depth,
        radius=radius,
        seed=seed,
        classes=classes,
        max_frequency=classes[0].frequency,
    )
    logger.info(f"IRS sampling found {len(classes)} classes, max frequency {classes[0].count}/{samples}")
    return report


def atomicity_table(reports: Sequence[IrsSampleReport]) -> pd.DataFrame:
    frame = pd.DataFrame(
        [
            {
                "radius": r.radius,
                "classes": len(r.classes),
                "max_frequency": float(r.max_frequency),
                "max_count": r.classes[0].count,
                "samples": r.samples,
            }
            for r in reports
        ]
    )
    return frame.sort_values("radius").reset_index(drop=True)


def atomicity_report(
    reports: Sequence[IrsSampleReport],
    threshold: Optional[Union[Fraction, str]] = None,
    config: Optional[Config] = None,
) -> AtomicityReport:
    """Max class frequency against radius, flagged as an empirical trend."""
    if len(reports) < 2:
        raise InvalidParameters("atomicity needs runs at two or more radii", runs=len(reports))
    if config is None:
        from cantor.config import get_config

        config = get_config()
    threshold = Fraction(threshold) if threshold is not None else config.atom_threshold
    ordered = sorted(reports, key=lambda r: r.radius)
    frame = atomicity_table(ordered)
    exact = [r.max_frequency for r in ordered]
    steps = frame["max_frequency"].diff().dropna()

    if exact[-1] >= threshold and exact[-1] == exact[-2]:
        flag = "atom candidate"
    elif (steps <= 0).all() and exact[-1] < exact[0]:
        flag = "non-atomic trend"
    else:
        flag = "undetermined"
    logger.debug(f"atomicity table:\n{frame.to_string(index=False)}")
    return AtomicityReport(
        action=ordered[0].action,
        threshold=threshold,
        rows=[
            AtomicityRow(radius=r.radius, classes=len(r.classes), max_frequency=r.max_frequency)
            for r in ordered
        ],
        flag=flag,
    )


def chabauty_contains(
    action: GeneratedAction,
    x,
    include: Sequence[Sequence[str]],
    exclude: Sequence[Sequence[str]],
) -> bool:
    """True when the depth-L stabilizer of x contains every ``include`` word and no ``exclude`` word."""
    point = action.index.check_word(as_word(x))

    def fixes(word: Sequence[str]) -> bool:
        return action.apply_word(word, point) == point

    return all(fixes(w) for w in include) and not any(fixes(w) for w in exclude)


def chabauty_mass(
    action: GeneratedAction,
    include: Sequence[Sequence[str]],
    exclude: Sequence[Sequence[str]],
    samples: int,
    depth: int,
    seed: Optional[int] = None,
) -> ChabautyReport:
    """Empirical mass of the basic set {H : include in H, exclude disjoint from H}."""
    seed = seed if seed is not None else action.config.SEED
    if samples <= 0:
        raise InvalidParameters("sample count must be positive", samples=samples)
    hits = 0
    for i in range(samples):
        x = sample_point(action.index, depth, point_stream(seed, i))
        if chabauty_contains(action, x, include, exclude):
            hits += 1
    words: List[Tuple[str, ...]] = [tuple(w) for w in list(include) + list(exclude)]
    return ChabautyReport(
        action=action.name or "action",
        include=[action.format_word(w) for w in include],
        exclude=[action.format_word(w) for w in exclude],
        samples=samples,
        depth=depth,
        radius=max((len(w) for w in words), default=0),
        seed=seed,
        mass=Fraction(hits, samples),
    )
