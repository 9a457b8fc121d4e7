from __future__ import annotations

from fractions import Fraction

import pytest

from cantor.core.catalog import ex44_depth, ex44_vertex, ex45_depth, ex45_vertex
from cantor.core.dynamics import (
    certify_nondegenerate,
    degeneracy_scan,
    density_profile,
    distinct_stabilizer_tree,
    fixed_vertices,
    holonomy_witness,
    lqa_witness_search,
    nonfixed_ratio,
    nonfixed_ratio_detail,
    replay_certificate,
)
from cantor.core.rules import odometer as odometer_rule
from cantor.core.tree import EventuallyPeriodic, level_words
from cantor.errors import InvalidParameters, NotFixed, SearchExhausted


def test_fixed_vertices(odometer, thm61, config):
    assert fixed_vertices(odometer.generators["a"], 3, config.LEVEL_CAP) == []
    assert len(fixed_vertices(thm61.generators["b"], 2, config.LEVEL_CAP)) == 7


@pytest.mark.parametrize("k, expected", [(1, Fraction(1, 4)), (2, Fraction(1, 16)), (3, Fraction(1, 256))])
def test_ex45_ratios(ex45, config, k, expected):
    ratio, resolved = nonfixed_ratio_detail(ex45.generators["c"], ex45_vertex(k), ex45_depth(k), config.LEVEL_CAP)
    assert ratio == expected
    assert resolved


@pytest.mark.parametrize("level", [1, 2, 3, 4])
def test_ex44_ratios(ex44, config, level):
    c = ex44.generators["c"]
    ratio = nonfixed_ratio(c, ex44_vertex(level), ex44_depth(level), config.LEVEL_CAP)
    assert ratio == Fraction(1, ex44.index.at(level + 2))


def test_ratio_needs_a_fixed_vertex(odometer, config):
    a = odometer.generators["a"]
    with pytest.raises(NotFixed) as info:
        nonfixed_ratio(a, (0,), 4, config.LEVEL_CAP)
    assert info.value.code == "not_fixed"
    with pytest.raises(InvalidParameters):
        nonfixed_ratio(a, (), -1, config.LEVEL_CAP)


def test_scan_refutes_the_power_graft(ex45, config):
    report = degeneracy_scan(ex45.generators["c"], 9, threshold=Fraction(1, 8), config=config)
    assert report.verdict == "refutes"
    assert report.truncation_depth == 9 + config.SCAN_MARGIN
    assert any(w.vertex == "0001" and w.resolved for w in report.witnesses)
    assert "0001" in report.summary
    assert [summary.level for summary in report.levels] == list(range(10))


def test_scan_finds_no_refutation_for_the_swap(thm61, config):
    report = degeneracy_scan(thm61.generators["b"], 3, threshold="1/100", config=config)
    assert report.verdict == "no_refutation"
    assert report.threshold == Fraction(1, 100)


def test_certify_grigorchuk_b(grigorchuk, config):
    cert = certify_nondegenerate(grigorchuk.generators["b"], config=config)
    assert cert.certified
    assert cert.method == "AutomatonClosure"
    assert cert.alpha == Fraction(1, 8)
    assert cert.recompute_alpha() == cert.alpha
    levels = {e.section: e.first_moved_level for e in cert.evidence}
    assert levels == {"a": 1, "b": 2, "c": 2, "d": 3}


def test_certify_odometer(odometer, config):
    cert = certify_nondegenerate(odometer.generators["a"], config=config)
    assert cert.alpha == 1


def test_certify_on_eventually_periodic_tree(config):
    index = EventuallyPeriodic(prefix=[2], cycle=[3])
    cert = certify_nondegenerate(odometer_rule(index), config=config)
    assert cert.method == "PropIndexK"
    assert (cert.bound, cert.k) == (3, 1)
    assert cert.alpha == Fraction(1, 3)


@pytest.mark.parametrize("example", ["thm61", "ex45"])
def test_not_certified(example, request, config):
    entry = request.getfixturevalue(example)
    element = entry.generators["b" if example == "thm61" else "c"]
    result = certify_nondegenerate(element, state_bound=16, config=config)
    assert result.certified is False
    assert result.reason


def test_replay_certificate(grigorchuk, config):
    b = grigorchuk.generators["b"]
    cert = certify_nondegenerate(b, config=config)
    replay = replay_certificate(cert, b, samples=50, max_level=6, seed=0, cap=config.LEVEL_CAP)
    assert replay.passed
    assert replay.checked > 0
    assert replay.min_ratio >= cert.alpha
    again = replay_certificate(cert, b, samples=50, max_level=6, seed=0, cap=config.LEVEL_CAP)
    assert again == replay


def test_holonomy(thm61, dihedral):
    report = holonomy_witness(thm61.generators["b"], (0,) * 4)
    assert report.verdict == "non_trivial"
    assert [item.level for item in report.levels] == [0, 1, 2, 3, 4]
    report = holonomy_witness(dihedral.generators["b"], (0,) * 10, margin=2)
    assert report.verdict == "non_trivial"


def test_holonomy_needs_a_fixed_point(odometer):
    with pytest.raises(NotFixed):
        holonomy_witness(odometer.generators["a"], (0, 0, 0))


def test_density_profile_matches_the_product(thm61, config):
    b = thm61.generators["b"]
    index = thm61.index
    report = density_profile(b, (0,) * 6, [0, 1, 2, 3], 6, config.LEVEL_CAP)
    expected = []
    for level in range(4):
        value = Fraction(1)
        for j in range(level + 1, 7):
            value *= Fraction(index.at(j) - 2, index.at(j))
        expected.append(value)
    ratios = [v.ratio for v in report.values]
    assert ratios == expected
    assert ratios == sorted(ratios)


def test_lqa_search(dihedral, ex45, config):
    assert lqa_witness_search(dihedral.action(config), 6, 12).witnesses == []
    found = lqa_witness_search(ex45.action(config), 1, 9).witnesses
    assert found
    assert any(w.word == "c" and w.u == "()" and w.v == "1" for w in found)


def test_distinct_stabilizers(ex45, config):
    action = ex45.action(config)
    single = distinct_stabilizer_tree(action, 2, 9, 0)
    assert len(single.points) == 1
    assert single.separators == []
    report = distinct_stabilizer_tree(action, 2, 9, 1)
    assert [p.label for p in report.points] == ["0", "1"]
    assert len(report.separators) == 1
    separator = report.separators[0]
    assert separator.word == "c"
    assert separator.fixes == "0"


def test_distinct_stabilizers_can_fail(trivial_action):
    with pytest.raises(SearchExhausted):
        distinct_stabilizer_tree(trivial_action, 2, 6, 1)
    with pytest.raises(InvalidParameters):
        distinct_stabilizer_tree(trivial_action, 2, 6, -1)


def test_separating_element_is_the_identity_below_the_margin(ex45, config):
    action = ex45.action(config)
    report = distinct_stabilizer_tree(action, 2, 9, 1)
    root = report.cylinders[0]
    assert root.element == "c"
    g = action.element(action.parse_word(root.element))
    top = report.depth - report.margin
    for word in level_words(action.index, report.depth + report.margin, config.LEVEL_CAP, under=(0,) * top):
        assert g.apply(word) == word


@pytest.mark.parametrize(
    "example, depth",
    [("odometer", 8), ("dihedral", 8), ("grigorchuk", 8), ("ex45", 9), ("thm61", 4), ("ex44", 4)],
)
def test_ratio_is_monotone_in_depth_for_catalog_elements(example, depth, request, config):
    entry = request.getfixturevalue(example)
    for name, g in entry.generators.items():
        for level in (0, 1, 2):
            for v in fixed_vertices(g, level, config.LEVEL_CAP):
                ratios = [nonfixed_ratio(g, v, d, config.LEVEL_CAP) for d in range(max(level, 1), depth + 1)]
                assert ratios == sorted(ratios), (name, v)
                assert all(0 <= r <= 1 for r in ratios)
