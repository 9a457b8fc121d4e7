"""End-to-end checks on the catalog examples."""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations

import pytest

from cantor.core.automorphism import (
    compose,
    equal_to_depth,
    exact_equal,
    invert,
    random_portrait,
    section_closure,
)
from cantor.core.catalog import ex45_depth, ex45_vertex
from cantor.core.dynamics import (
    certify_nondegenerate,
    distinct_stabilizer_tree,
    lqa_witness_search,
    nonfixed_ratio,
    replay_certificate,
)
from cantor.core.group_action import point_stabilizer_ball
from cantor.core.irs import irs_empirical
from cantor.core.tree import constant_index, level_words


@pytest.mark.parametrize("n", range(7))
def test_dihedral_point_stabilizers(dihedral, config, n):
    action = dihedral.action(config)
    point = action.element(("a",) * n).apply((0,) * 16)
    words = point_stabilizer_ball(action, 2 * n + 2, point)
    reflection = action.element(("a",) * n + ("b",) + ("A",) * n)
    assert len(words) == 2
    assert () in words
    other = next(w for w in words if w)
    assert exact_equal(action.element(other), reflection)


def test_dihedral_point_stabilizers_are_distinct(dihedral, config):
    action = dihedral.action(config)
    reflections = []
    for n in range(7):
        point = action.element(("a",) * n).apply((0,) * 16)
        word = next(w for w in point_stabilizer_ball(action, 2 * n + 2, point) if w)
        reflections.append(action.element(word))
    assert len(reflections) == 7
    for left, right in combinations(reflections, 2):
        assert exact_equal(left, right) is False


def test_grigorchuk_certificates_replay(grigorchuk, config):
    for name, g in grigorchuk.generators.items():
        closure = section_closure(g, state_bound=config.STATE_BOUND)
        assert closure.bounded is True
        assert len(closure) <= 5
        cert = certify_nondegenerate(g, config=config)
        assert cert.certified, name
        assert cert.alpha > 0
        replay = replay_certificate(cert, g, samples=100, max_level=8, seed=0, cap=config.LEVEL_CAP)
        assert replay.passed, name


def test_lqa_dichotomy(dihedral, ex45, config):
    assert lqa_witness_search(dihedral.action(config), 6, 12).witnesses == []
    action = ex45.action(config)
    assert lqa_witness_search(action, 2, 9).witnesses
    report = distinct_stabilizer_tree(action, 4, 17, 2)
    labels = [p.label for p in report.points]
    assert len(labels) == 4
    assert len(set(labels)) == 4
    pairs = {frozenset((s.left, s.right)) for s in report.separators}
    assert len(pairs) == 6
    assert all(s.fixes in (s.left, s.right) for s in report.separators)


def test_irs_atoms_for_free_actions(odometer, dihedral, config):
    for entry in (odometer, dihedral):
        report = irs_empirical(entry.action(config), 1000, 64, 4, seed=0, config=config)
        assert report.class_count() == 1
        assert report.max_frequency == 1


def test_irs_grigorchuk_is_spread(grigorchuk, config):
    action = grigorchuk.action(config)
    reports = {r: irs_empirical(action, 500, 32, r, seed=0, config=config) for r in (2, 3, 4, 5)}
    counts = [reports[r].class_count() for r in sorted(reports)]
    assert counts == sorted(counts)
    assert reports[4].max_frequency < Fraction(9, 10)


def test_group_laws_on_random_portraits(rng):
    index = constant_index(3)
    for _ in range(200):
        f, g, h = (random_portrait(index, 4, rng) for _ in range(3))
        assert equal_to_depth(compose(f, compose(g, h)), compose(compose(f, g), h), 4)
        assert compose(g, invert(g)).is_identity()


def test_section_reconstruction(rng):
    index = constant_index(3)
    for _ in range(200):
        g = random_portrait(index, 4, rng)
        for word in level_words(index, 3, 1000):
            prefix, last = word[:2], word[2:]
            expected = g.apply(prefix) + g.section(prefix).apply(last)
            assert g.apply(word) == expected


@pytest.mark.parametrize(
    "example, symbol, vertex, depths",
    [
        ("ex45", "c", ex45_vertex(1), range(4, 12)),
        ("grigorchuk", "b", (1, 1, 1), range(3, 11)),
    ],
)
def test_ratio_grows_with_depth(example, symbol, vertex, depths, request, config):
    g = request.getfixturevalue(example).generators[symbol]
    ratios = [nonfixed_ratio(g, vertex, depth, config.LEVEL_CAP) for depth in depths]
    assert ratios == sorted(ratios)
    if example == "ex45":
        assert ratios[ex45_depth(1) - 4] == Fraction(1, 4)
