"""
Fixed-point sets and finite-scale dynamics of single elements and of actions.

Ratios are exact rationals measured on depth-L truncations. A ratio is
"resolved" when every fixed depth-L word below the vertex already sits under
an identity section, so no deeper truncation can change it; only resolved
values ever back a verdict.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from cantor.config import Config, get_config
from cantor.core.automorphism import TreeAutomorphism, section_closure
from cantor.core.group_action import GeneratedAction, ball, orbit_search
from cantor.core.probe import SignatureTable, SubtreeProbe, first_moved_level
from cantor.core.tree import (
    EventuallyPeriodic,
    Vertex,
    Word,
    as_word,
    ensure_level_within_cap,
    level_words,
)
from cantor.data.models import (
    DegeneracyReport,
    DegeneracyWitness,
    DensityReport,
    DensityValue,
    DistinctStabilizerReport,
    HolonomyLevel,
    HolonomyReport,
    LabelledCylinder,
    LevelSummary,
    LqaReport,
    LqaWitness,
    NonDegeneracyCertificate,
    NotCertified,
    ReplayReport,
    SectionEvidence,
    Separator,
    StabilizerPoint,
)
from cantor.errors import InvalidParameters, LevelCapExceeded, NotFixed, SearchExhausted
from cantor.utils.helpers import format_digits, format_rational

logger = logging.getLogger(__name__)


def _walk_fixed(
    g: TreeAutomorphism,
    level: int,
    cap: int,
    expand_identity: bool = True,
) -> Iterator[Tuple[Word, object]]:
    """Fixed level-``level`` words with their cursors, in lexicographic order.

    With ``expand_identity`` False, subtrees under identity sections are
    skipped instead of enumerated.
    """
    visited = 0

    def walk(word: Word, cursor) -> Iterator[Tuple[Word, object]]:
        nonlocal visited
        visited += 1
        if visited > cap:
            raise LevelCapExceeded(f"fixed-set walk visited more than {cap} vertices", level=level, cap=cap)
        if len(word) == level:
            yield word, cursor
            return
        if g.is_identity_cursor(cursor):
            if expand_identity:
                for w in level_words(g.index, level, cap, under=word):
                    yield w, cursor
            return
        child_level = len(word) + 1
        for k in range(g.index.at(child_level)):
            out, nxt = g.step(cursor, k, child_level)
            if out == k:
                yield from walk(word + (k,), nxt)

    yield from walk((), g.start())


def fixed_vertices(g: TreeAutomorphism, level: int, cap: Optional[int] = None) -> List[Vertex]:
    """All level-``level`` vertices fixed by g."""
    cap = cap if cap is not None else get_config().LEVEL_CAP
    ensure_level_within_cap(g.index, level, cap)
    return [Vertex(w) for w, _ in _walk_fixed(g, level, cap)]


def nonfixed_ratio_detail(
    g: TreeAutomorphism,
    v,
    depth: int,
    cap: Optional[int] = None,
    probe: Optional[SubtreeProbe] = None,
) -> Tuple[Fraction, bool]:
    """(moved ratio under v at depth L, resolved flag)."""
    word = g.index.check_word(as_word(v))
    if depth < len(word):
        raise InvalidParameters("truncation depth lies above the vertex", depth=depth, level=len(word))
    probe = probe if probe is not None else SubtreeProbe(g, depth, cap)
    image, cursor = probe.locate(word)
    if image != word:
        raise NotFixed(
            f"{g.label()} does not fix {format_digits(word)}",
            vertex=format_digits(word), image=format_digits(image),
        )
    count, resolved = probe.fixed_count(cursor, len(word))
    total = g.index.relative_size(len(word), depth)
    return 1 - Fraction(count, total), resolved


def nonfixed_ratio(g: TreeAutomorphism, v, depth: int, cap: Optional[int] = None) -> Fraction:
    """Exact measure of the depth-L words under v moved by g, relative to v's cylinder."""
    return nonfixed_ratio_detail(g, v, depth, cap)[0]


def degeneracy_scan(
    g: TreeAutomorphism,
    max_level: int,
    margin: Optional[int] = None,
    threshold: Union[Fraction, str, int] = Fraction(1, 2),
    config: Optional[Config] = None,
) -> DegeneracyReport:
    """Scan fixed vertices with non-identity sections up to ``max_level``.

    Ratios are taken at depth ``max_level + margin``. A vertex refutes
    ``alpha >= threshold`` only when its ratio is resolved and below the
    threshold.
    """
    config = config or get_config()
    margin = margin if margin is not None else config.SCAN_MARGIN
    threshold = Fraction(threshold)
    depth = max_level + margin
    cap = config.LEVEL_CAP
    logger.info(f"degeneracy scan of {g.label()} to level {max_level} at depth {depth}")

    def scan_level(level: int) -> List[Tuple[Word, Fraction, bool]]:
        probe = SubtreeProbe(g, depth, cap)
        found = []
        for word, cursor in _walk_fixed(g, level, cap, expand_identity=False):
            if probe.is_identity_below(cursor, level):
                continue
            count, resolved = probe.fixed_count(cursor, level)
            ratio = 1 - Fraction(count, g.index.relative_size(level, depth))
            found.append((word, ratio, resolved))
        logger.debug(f"level {level}: {len(found)} fixed vertices with non-identity sections")
        return found

    with ThreadPoolExecutor(max_workers=config.MAX_WORKERS) as pool:
        per_level = list(pool.map(scan_level, range(max_level + 1)))

    witnesses: List[DegeneracyWitness] = []
    levels: List[LevelSummary] = []
    best: Optional[Tuple[Fraction, int, Word]] = None
    refuting: Optional[DegeneracyWitness] = None
    for level, found in enumerate(per_level):
        level_best: Optional[Tuple[Fraction, Word]] = None
        for word, ratio, resolved in found:
            if level_best is None or ratio < level_best[0]:
                level_best = (ratio, word)
            if ratio < threshold:
                witness = DegeneracyWitness(vertex=format_digits(word), level=level, ratio=ratio, resolved=resolved)
                witnesses.append(witness)
                if resolved and refuting is None:
                    refuting = witness
        levels.append(LevelSummary(
            level=level,
            fixed_nonidentity=len(found),
            min_ratio=level_best[0] if level_best else None,
            min_vertex=format_digits(level_best[1]) if level_best else None,
        ))
        if level_best is not None and (best is None or level_best[0] < best[0]):
            best = (level_best[0], level, level_best[1])

    if refuting is not None:
        verdict = "refutes"
        summary = (
            f"refutes alpha >= {format_rational(threshold)}: ratio {format_rational(refuting.ratio)} "
            f"at {refuting.vertex} is exact"
        )
    else:
        verdict = "no_refutation"
        summary = f"no refutation up to level {max_level} (depth {depth})"
    logger.info(f"degeneracy scan of {g.label()}: {summary}")
    return DegeneracyReport(
        element=g.label(),
        max_level=max_level,
        truncation_depth=depth,
        threshold=threshold,
        witnesses=witnesses,
        levels=levels,
        min_ratio_seen=best[0] if best else None,
        min_vertex=format_digits(best[2]) if best else None,
        verdict=verdict,
        summary=summary,
    )


def certify_nondegenerate(
    g: TreeAutomorphism,
    state_bound: Optional[int] = None,
    config: Optional[Config] = None,
) -> Union[NonDegeneracyCertificate, NotCertified]:
    """Certificate for a uniform lower bound alpha_g, when a finite closure allows one.

    On constant-arity trees each non-identity section contributes 1 when it
    moves every child of the root and the measure of its first moved vertex
    otherwise; alpha is the minimum. On bounded eventually periodic trees
    alpha = 1 / M^K with K the deepest first-moved level over the closure.
    """
    config = config or get_config()
    state_bound = state_bound if state_bound is not None else config.STATE_BOUND
    closure = section_closure(g, state_bound)
    if closure.bounded is not True:
        reason = (
            f"section closure exceeds {state_bound} states"
            if closure.bounded is False
            else "section closure cannot be decided for this representation"
        )
        return NotCertified(element=g.label(), reason=reason)

    constant = g.index.constant()
    bounded_index = isinstance(g.index, EventuallyPeriodic)
    if constant is None and not bounded_index:
        return NotCertified(element=g.label(), reason="index is not eventually periodic")

    evidence: List[SectionEvidence] = []
    first_levels: List[int] = []
    for i, s in enumerate(closure.sections):
        if s.is_identity():
            continue
        try:
            level = first_moved_level(s, state_bound)
        except SearchExhausted as exc:
            return NotCertified(element=g.label(), reason=exc.message)
        if level is None:
            continue
        label = s.label() if closure.exact else format_digits(closure.words[i])
        if constant is not None:
            if all(p != k for k, p in enumerate(s.root_perm())):
                alpha_i = Fraction(1)
            else:
                alpha_i = Fraction(1, s.index.level_size(level))
        else:
            alpha_i = Fraction(1, g.index.bound() ** level)
        first_levels.append(level)
        evidence.append(SectionEvidence(section=label, first_moved_level=level, alpha=alpha_i))

    if constant is not None:
        alpha = min((e.alpha for e in evidence), default=Fraction(1))
        cert = NonDegeneracyCertificate(
            element=g.label(), alpha=alpha, method="AutomatonClosure",
            evidence=evidence, state_bound=state_bound,
        )
    else:
        k = max(first_levels, default=0)
        bound = g.index.bound()
        cert = NonDegeneracyCertificate(
            element=g.label(), alpha=Fraction(1, bound ** k), method="PropIndexK",
            evidence=evidence, bound=bound, k=k, state_bound=state_bound,
        )
    logger.info(f"{g.label()} certified non-degenerate with alpha = {format_rational(cert.alpha)} ({cert.method})")
    return cert


def replay_certificate(
    cert: NonDegeneracyCertificate,
    g: TreeAutomorphism,
    samples: int = 100,
    max_level: int = 8,
    seed: int = 0,
    cap: Optional[int] = None,
) -> ReplayReport:
    """Check ``cert`` on random fixed vertices of g up to ``max_level``."""
    cap = cap if cap is not None else get_config().LEVEL_CAP
    if cert.method == "PropIndexK":
        reach = cert.k or 0
    else:
        reach = max((e.first_moved_level or 0 for e in cert.evidence), default=0)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    probes: Dict[int, SubtreeProbe] = {}
    checked = 0
    lowest: Optional[Fraction] = None
    failures: List[str] = []
    for _ in range(samples):
        target = int(rng.integers(0, max_level + 1))
        word: Word = ()
        cursor = g.start()
        while len(word) < target:
            level = len(word) + 1
            options = []
            for k in range(g.index.at(level)):
                out, nxt = g.step(cursor, k, level)
                if out == k:
                    options.append((k, nxt))
            if not options:
                break
            k, cursor = options[int(rng.integers(0, len(options)))]
            word = word + (k,)
        if g.is_identity_cursor(cursor):
            continue
        depth = len(word) + max(reach, 1)
        probe = probes.get(depth)
        if probe is None:
            probe = probes[depth] = SubtreeProbe(g, depth, cap)
        if probe.is_identity_below(cursor, len(word)):
            continue
        ratio, _ = nonfixed_ratio_detail(g, word, depth, probe=probe)
        checked += 1
        lowest = ratio if lowest is None else min(lowest, ratio)
        if ratio < cert.alpha:
            failures.append(format_digits(word))
    passed = not failures
    if not passed:
        logger.warning(f"certificate for {g.label()} failed at {len(failures)} sampled vertices")
    return ReplayReport(
        element=g.label(), alpha=cert.alpha, samples=samples, checked=checked,
        min_ratio=lowest, failures=failures, passed=passed,
    )


def holonomy_witness(
    g: TreeAutomorphism,
    x,
    depth: Optional[int] = None,
    margin: Optional[int] = None,
    cap: Optional[int] = None,
) -> HolonomyReport:
    """Moved vertices inside each cylinder around x, up to level ``depth``."""
    config = get_config()
    word = g.index.check_word(as_word(x))
    depth = depth if depth is not None else len(word)
    margin = margin if margin is not None else config.SCAN_MARGIN
    if depth > len(word):
        raise InvalidParameters("prefix is shorter than the requested depth", depth=depth, prefix=len(word))
    head = word[:depth]
    image = g.descend(head)[0]
    if image != head:
        raise NotFixed(f"{g.label()} does not fix {format_digits(head)}", point=format_digits(head))
    probe = SubtreeProbe(g, depth + margin, cap if cap is not None else config.LEVEL_CAP)
    levels = []
    for level in range(depth + 1):
        moved = probe.first_moved_below(head[:level])
        levels.append(HolonomyLevel(
            level=level,
            prefix=format_digits(head[:level]),
            witness=format_digits(moved) if moved is not None else None,
        ))
    if levels[0].witness is None:
        verdict = "none"
    elif all(item.witness is not None for item in levels):
        verdict = "non_trivial"
    else:
        verdict = "trivial_at_scale"
    return HolonomyReport(
        element=g.label(), point=format_digits(word), depth=depth, margin=margin, levels=levels, verdict=verdict,
    )


def lqa_witness_search(
    action: GeneratedAction,
    radius: int,
    depth: int,
    margin: Optional[int] = None,
) -> LqaReport:
    """Triples (g, U, V): g is the identity on the child V of U to depth L but not on U.

    V ranges over cylinders at least ``margin`` levels above L. An empty
    result means no witness at this scale.
    """
    config = action.config
    margin = margin if margin is not None else config.SCAN_MARGIN
    top = depth - margin
    cap = config.LEVEL_CAP
    the_ball = ball(action, radius, depth)
    witnesses: List[LqaWitness] = []
    for entry in the_ball:
        if not entry.word:
            continue
        probe = SubtreeProbe(entry.element, depth, cap)
        g = entry.element
        frontier: List[Tuple[Word, object]] = [((), g.start())]
        visited = 0
        while frontier:
            nxt_frontier: List[Tuple[Word, object]] = []
            for u, cursor in frontier:
                if len(u) >= top or probe.is_identity_below(cursor, len(u)):
                    continue
                child_level = len(u) + 1
                for k in range(g.index.at(child_level)):
                    out, child_cursor = g.step(cursor, k, child_level)
                    if out != k:
                        continue
                    child = u + (k,)
                    if probe.is_identity_below(child_cursor, child_level):
                        witnesses.append(LqaWitness(
                            word=action.format_word(entry.word),
                            u=format_digits(u), v=format_digits(child), depth=depth,
                        ))
                    else:
                        nxt_frontier.append((child, child_cursor))
                visited += 1
            if visited > cap:
                raise LevelCapExceeded(f"witness search visited more than {cap} vertices", cap=cap)
            frontier = nxt_frontier
    logger.info(f"LQA witness search (radius {radius}, depth {depth}): {len(witnesses)} witnesses")
    return LqaReport(
        action=action.name or "action", radius=radius, depth=depth, margin=margin, witnesses=witnesses,
    )


@dataclass
class _Split:
    cylinder: Word
    word: Tuple[str, ...]
    zero: Union["_Split", Word]
    one: Union["_Split", Word]


def distinct_stabilizer_tree(
    action: GeneratedAction,
    radius: int,
    depth: int,
    n: int,
    margin: Optional[int] = None,
) -> DistinctStabilizerReport:
    """2^n depth-L points of one orbit with pairwise distinct stabilizer balls.

    Each split picks a ball element that is the identity on a cylinder around
    the current point (the 0-branch) and moves a whole cylinder (the
    1-branch); an orbit point inside the moved cylinder seeds the 1-branch.
    Candidates are tried in (identity-cylinder level, word, moved-cylinder
    level, vertex) order with backtracking.
    """
    config = action.config
    margin = margin if margin is not None else config.SCAN_MARGIN
    cap = config.LEVEL_CAP
    if n < 0:
        raise InvalidParameters("n must be non-negative", n=n)
    base: Word = (0,) * depth
    the_ball = ball(action, radius, depth)
    table = SignatureTable(depth)
    entries = [e for e in the_ball if e.word]
    probes = {e.word: SubtreeProbe(e.element, depth, cap, table) for e in entries}
    # identity claims must also hold for margin levels below L
    deep_probes = {}
    for e in entries:
        limit = getattr(e.element, "depth", None)
        deep_depth = depth + margin if limit is None else min(depth + margin, limit)
        deep_probes[e.word] = SubtreeProbe(e.element, deep_depth, cap)
    orbit_cache: Dict[Word, Optional[Word]] = {}
    failed = set()

    def orbit_point(cylinder: Word) -> Optional[Word]:
        if cylinder not in orbit_cache:
            orbit_cache[cylinder] = orbit_search(action, base, cylinder, config.ORBIT_LIMIT)
        return orbit_cache[cylinder]

    def candidates(cylinder: Word, point: Word):
        found = []
        for entry in entries:
            probe = probes[entry.word]
            if probe.locate(cylinder)[0] != cylinder or probe.identity_on(cylinder):
                continue
            deep = deep_probes[entry.word]
            level = next(
                (j for j in range(len(cylinder) + 1, depth - margin + 1) if deep.identity_on(point[:j])),
                None,
            )
            if level is None:
                continue
            moved = probe.first_moved_below(cylinder)
            if moved is None:
                continue
            key = (level, action.word_key(entry.word), len(moved), moved)
            found.append((key, entry.word, point[:level], moved))
        found.sort(key=lambda item: item[0])
        return found

    def build(cylinder: Word, point: Word, remaining: int):
        if remaining == 0:
            return point
        state = (cylinder, point, remaining)
        if state in failed:
            return None
        for _, word, zero_cylinder, one_cylinder in candidates(cylinder, point):
            other = orbit_point(one_cylinder)
            if other is None:
                continue
            zero = build(zero_cylinder, point, remaining - 1)
            if zero is None:
                continue
            one = build(one_cylinder, other, remaining - 1)
            if one is None:
                logger.debug(f"backtracking from {action.format_word(word)} at {format_digits(cylinder)}")
                continue
            return _Split(cylinder, word, zero, one)
        failed.add(state)
        return None

    logger.info(f"distinct stabilizer search: n={n}, radius {radius}, depth {depth}")
    tree = build((), base, n)
    if tree is None:
        raise SearchExhausted(
            f"no splitting elements found for n = {n} within radius {radius} at depth {depth}",
            n=n, radius=radius, depth=depth,
        )

    cylinders: List[LabelledCylinder] = []
    leaves: List[Tuple[str, Word]] = []
    chosen: Dict[str, Tuple[str, ...]] = {}

    def collect(node, label: str) -> None:
        if isinstance(node, _Split):
            cylinders.append(LabelledCylinder(
                label=label or "()", cylinder=format_digits(node.cylinder),
                element=action.format_word(node.word),
            ))
            chosen[label] = node.word
            collect(node.zero, label + "0")
            collect(node.one, label + "1")
        else:
            leaves.append((label or "()", node))

    collect(tree, "")

    stabilizers = {
        label: {e.word for e in the_ball if e.element.descend(point)[0] == point}
        for label, point in leaves
    }
    points = [
        StabilizerPoint(label=label, prefix=format_digits(point), stabilizer_size=len(stabilizers[label]))
        for label, point in leaves
    ]
    separators: List[Separator] = []
    for i, (left, _) in enumerate(leaves):
        for right, _ in leaves[i + 1:]:
            common = 0
            while common < min(len(left), len(right)) and left[common] == right[common]:
                common += 1
            preferred = chosen.get(left[:common])
            difference = stabilizers[left] ^ stabilizers[right]
            if preferred is not None and preferred in difference:
                word = preferred
            elif difference:
                word = min(difference, key=action.word_key)
            else:
                raise SearchExhausted(
                    f"points {left} and {right} share their stabilizer ball", left=left, right=right,
                )
            fixes = left if word in stabilizers[left] else right
            separators.append(Separator(left=left, right=right, word=action.format_word(word), fixes=fixes))
    return DistinctStabilizerReport(
        action=action.name or "action", n=n, radius=radius, depth=depth, margin=margin,
        cylinders=cylinders, points=points, separators=separators,
    )


def density_profile(
    g: TreeAutomorphism,
    x,
    levels: Sequence[int],
    depth: int,
    cap: Optional[int] = None,
) -> DensityReport:
    """Fixed-set density of g inside the cylinders around x, at truncation depth L."""
    word = g.index.check_word(as_word(x))
    top = max(levels, default=0)
    if top > len(word) or top > depth:
        raise InvalidParameters("levels must lie within the prefix and the depth", levels=list(levels), depth=depth)
    head = word[:top]
    if g.descend(head)[0] != head:
        raise NotFixed(f"{g.label()} does not fix {format_digits(head)}", point=format_digits(head))
    probe = SubtreeProbe(g, depth, cap if cap is not None else get_config().LEVEL_CAP)
    values = []
    for level in levels:
        _, cursor = probe.locate(word[:level])
        count, resolved = probe.fixed_count(cursor, level)
        values.append(DensityValue(
            level=level,
            ratio=Fraction(count, g.index.relative_size(level, depth)),
            resolved=resolved,
        ))
    return DensityReport(element=g.label(), point=format_digits(word), depth=depth, values=values)
