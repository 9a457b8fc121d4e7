from __future__ import annotations

import dataclasses
from fractions import Fraction
from itertools import combinations

import pytest

from cantor.core.group_action import schreier_level_graph, stabilizer_schreier_ball
from cantor.core.irs import (
    atomicity_report,
    atomicity_table,
    chabauty_contains,
    chabauty_mass,
    irs_empirical,
    metric_report,
    point_stream,
    sample_point,
    schreier_metric,
)
from cantor.core.schreier import SchreierGraph
from cantor.core.catalog import fixed_density_interval
from cantor.core.dynamics import density_profile
from cantor.core.tree import Indistinguishable
from cantor.errors import InvalidParameters


def _loop(label="a"):
    return SchreierGraph.from_edges([(0,)], [((0,), label, (0,))], (0,), [label])


def test_point_streams_are_reproducible(geometric):
    first = sample_point(geometric, 45, point_stream(7, 3))
    again = sample_point(geometric, 45, point_stream(7, 3))
    other = sample_point(geometric, 45, point_stream(7, 4))
    assert first == again
    assert first != other
    assert all(0 <= d < geometric.at(level) for level, d in enumerate(first.word, start=1))


def test_odometer_has_one_class(odometer, config):
    report = irs_empirical(odometer.action(config), 100, 32, 3, seed=0, config=config)
    assert report.class_count() == 1
    assert report.max_frequency == 1
    assert report.classes[0].vertices == 7


def test_dihedral_generic_points_share_a_class(dihedral, config):
    report = irs_empirical(dihedral.action(config), 40, 64, 3, seed=1, config=config)
    assert report.class_count() == 1


def test_grigorchuk_classes_refine_with_the_radius(grigorchuk, config):
    action = grigorchuk.action(config)
    reports = [irs_empirical(action, 40, 12, r, seed=3, config=config) for r in (1, 2, 3, 4)]
    counts = [r.class_count() for r in reports]
    assert counts == sorted(counts)
    assert counts[-1] >= 2
    frequencies = [r.max_frequency for r in reports]
    assert frequencies == sorted(frequencies, reverse=True)
    assert sum(c.count for c in reports[-1].classes) == 40


def test_sampling_does_not_depend_on_workers(grigorchuk, config):
    serial = dataclasses.replace(config, MAX_WORKERS=1)
    parallel = dataclasses.replace(config, MAX_WORKERS=4)
    action = grigorchuk.action(config)
    first = irs_empirical(action, 30, 10, 2, seed=5, config=serial)
    second = irs_empirical(action, 30, 10, 2, seed=5, config=parallel)
    assert first == second


def test_sample_count_must_be_positive(odometer, config):
    with pytest.raises(InvalidParameters):
        irs_empirical(odometer.action(config), 0, 8, 2, config=config)


def test_atomicity(odometer, config):
    action = odometer.action(config)
    reports = [irs_empirical(action, 20, 16, r, seed=0, config=config) for r in (3, 1, 2)]
    table = atomicity_table(reports)
    assert list(table["radius"]) == [1, 2, 3]
    assert list(table["classes"]) == [1, 1, 1]
    report = atomicity_report(reports, config=config)
    assert report.flag == "atom candidate"
    assert report.threshold == Fraction(1, 2)
    assert report.note == "empirical at finite scale"
    with pytest.raises(InvalidParameters):
        atomicity_report(reports[:1], config=config)


def test_metric_between_loop_and_line(odometer, config):
    line = stabilizer_schreier_ball(odometer.action(config), (0,) * 8, 3)
    assert schreier_metric(_loop(), line, 3) == 1
    report = metric_report(line, _loop(), 3)
    assert report.distance == 1
    assert not report.indistinguishable


def test_metric_on_a_level_cycle(odometer, config):
    graph = schreier_level_graph(odometer.action(config), 8)
    moved = graph.rebased((1,) + (0,) * 7)
    value = schreier_metric(graph, moved, 5)
    assert isinstance(value, Indistinguishable)
    assert value.bound == Fraction(1, 32)
    assert metric_report(graph, moved, 5).indistinguishable


def test_metric_is_symmetric_and_scale_sensitive(grigorchuk, config):
    action = grigorchuk.action(config)
    x = stabilizer_schreier_ball(action, (0,) * 10, 4)
    y = stabilizer_schreier_ball(action, (1,) + (0,) * 9, 4)
    assert schreier_metric(x, y, 4) == schreier_metric(y, x, 4)
    assert schreier_metric(x, y, 4) == Fraction(1)


def test_metric_preconditions(odometer, config):
    line = stabilizer_schreier_ball(odometer.action(config), (0,) * 8, 2)
    with pytest.raises(InvalidParameters):
        schreier_metric(line, _loop("b"), 2)
    with pytest.raises(InvalidParameters):
        schreier_metric(line, line, 3)


def test_chabauty(odometer, dihedral, config):
    action = odometer.action(config)
    assert not chabauty_contains(action, (0,) * 4, [("a",)], [])
    assert chabauty_contains(action, (0,) * 2, [("a",) * 4], [("a",)])
    report = chabauty_mass(action, [], [("a",)], 25, 6, seed=0)
    assert report.mass == 1
    assert report.radius == 1
    assert report.exclude == ["a"]
    assert chabauty_mass(action, [("a",)], [], 25, 6).mass == 0
    assert chabauty_mass(dihedral.action(config), [], [], 10, 6).mass == 1


def test_level_cylinders_are_sampled_uniformly(binary, geometric):
    counts = {}
    for i in range(10000):
        word = sample_point(binary, 3, point_stream(11, i)).word
        counts[word] = counts.get(word, 0) + 1
    assert len(counts) == 8
    assert all(abs(c / 10000 - 1 / 8) <= 0.02 for c in counts.values())

    counts = {}
    for i in range(10000):
        word = sample_point(geometric, 2, point_stream(11, i)).word
        counts[word] = counts.get(word, 0) + 1
    assert len(counts) == 27
    assert all(abs(c / 10000 - 1 / 27) <= 0.01 for c in counts.values())


def test_sampled_fixed_fraction_matches_the_density(thm61, config):
    b = thm61.generators["b"]
    index = thm61.index
    exact = density_profile(b, (0,) * 4, [0], 4, config.LEVEL_CAP).values[0].ratio
    product = Fraction(1)
    for j in range(1, 5):
        product *= Fraction(index.at(j) - 2, index.at(j))
    assert exact == product
    assert exact >= fixed_density_interval(index, 0).lower
    fixed = 0
    for i in range(2000):
        word = sample_point(index, 4, point_stream(3, i)).word
        fixed += b.apply(word) == word
    assert abs(fixed / 2000 - float(exact)) <= 0.04


def test_metric_is_an_ultrametric_on_sampled_balls(grigorchuk, config):
    action = grigorchuk.action(config)
    graphs = [
        stabilizer_schreier_ball(action, sample_point(action.index, 12, point_stream(9, i)), 4)
        for i in range(12)
    ]

    def distance(i, j):
        value = schreier_metric(graphs[i], graphs[j], 4)
        return Fraction(0) if isinstance(value, Indistinguishable) else value

    table = {(i, j): distance(i, j) for i in range(12) for j in range(12) if i != j}
    for i, j in table:
        assert table[i, j] == table[j, i]
    for x, y, z in combinations(range(12), 3):
        assert table[x, z] <= max(table[x, y], table[y, z])
        assert table[x, y] <= max(table[x, z], table[z, y])
        assert table[y, z] <= max(table[y, x], table[x, z])


def test_atomicity_flags_for_dihedral_and_grigorchuk(dihedral, grigorchuk, config):
    action = dihedral.action(config)
    reports = [irs_empirical(action, 100, 64, r, seed=7, config=config) for r in (2, 3, 4, 5)]
    assert [r.class_count() for r in reports] == [1, 1, 1, 1]
    assert all(r.max_frequency == 1 for r in reports)
    assert atomicity_report(reports, config=config).flag == "atom candidate"

    action = grigorchuk.action(config)
    reports = [irs_empirical(action, 200, 16, r, seed=7, config=config) for r in (1, 2, 3, 4)]
    frequencies = [r.max_frequency for r in reports]
    assert frequencies == sorted(frequencies, reverse=True)
    assert frequencies[-1] < frequencies[0]
    assert atomicity_report(reports, config=config).flag == "non-atomic trend"
