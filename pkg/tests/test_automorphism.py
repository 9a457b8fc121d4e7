from __future__ import annotations

import pytest

from cantor.core.automorphism import (
    FinitePortrait,
    MealyRecursion,
    apply,
    compose,
    equal_to_depth,
    exact_equal,
    identity_element,
    invert,
    random_portrait,
    section,
    section_closure,
)
from cantor.core.catalog import adding_machine, grigorchuk_machine
from cantor.core.rules import odometer
from cantor.core.tree import BoundaryPrefix, Geometric, Vertex, constant_index, level_words
from cantor.errors import DepthExceeded, IndexMismatch, InvalidDigit, InvalidElement


@pytest.fixture
def machine():
    return grigorchuk_machine()


def test_adding_machine_carries():
    a = adding_machine(2)
    assert apply(a, (1, 1, 0)) == (0, 0, 1)
    assert apply(invert(a), (0, 0, 0)) == (1, 1, 1)
    assert apply(compose(a, a), (0, 0)) == (0, 1)


def test_apply_keeps_the_input_kind():
    a = adding_machine(2)
    assert a.apply(Vertex((1, 0))) == Vertex((0, 1))
    assert a.apply(BoundaryPrefix((1, 1))) == BoundaryPrefix((0, 0))
    assert a(()) == ()


def test_apply_rejects_digits_out_of_range():
    with pytest.raises(InvalidDigit):
        adding_machine(2).apply((0, 2))


def test_grigorchuk_generators(machine):
    b = machine.state_element("b")
    assert b.apply((0, 1)) == (0, 0)
    assert exact_equal(section(b, (1,)), machine.state_element("c"))
    assert exact_equal(section(b, (0,)), machine.state_element("a"))


def test_grigorchuk_generators_are_involutions(machine):
    for name in "abcd":
        assert machine.state_element(name).is_involution
    assert adding_machine(2).is_involution is False


def test_equality_to_depth_is_scale_dependent(machine):
    d = machine.state_element("d")
    e = identity_element(constant_index(2))
    assert equal_to_depth(d, e, 1)
    assert not equal_to_depth(d, e, 3)
    assert d.apply((1, 0, 0)) == (1, 0, 1)


def test_exact_equal_of_minimal_machines(machine):
    b, c, d = (machine.state_element(s) for s in "bcd")
    assert exact_equal(compose(b, c), d)
    assert exact_equal(compose(b, b), identity_element(constant_index(2))) is None
    assert compose(b, b).is_identity()


def test_mealy_inverse_round_trips():
    a = adding_machine(3)
    for word in level_words(a.index, 3, 100):
        assert a.inverse().apply(a.apply(word)) == word
    assert a.inverse().inverse().name == "a"


def test_from_table_rejects_undefined_targets():
    with pytest.raises(InvalidElement):
        MealyRecursion.from_table(2, {"a": ([1, 0], ["id", "x"])}, "a")
    with pytest.raises(InvalidElement):
        MealyRecursion.from_table(2, {"a": ([1, 1], ["id", "id"])}, "a")


def test_mealy_needs_a_constant_tree():
    with pytest.raises(InvalidElement):
        adding_machine(3, index=Geometric(prefix=[3], ratio=3))


def test_to_table_omits_the_implicit_identity(machine):
    table = machine.to_table()
    assert sorted(table) == ["a", "b", "c", "d"]
    assert table["d"] == ([0, 1], ["id", "b"])


def test_minimized_merges_equivalent_states():
    table = {
        "a": ([1, 0], ["id", "x"]),
        "x": ([1, 0], ["id", "a"]),
    }
    m = MealyRecursion.from_table(2, table, "a")
    assert len(m.minimized().names) == 2
    assert exact_equal(m, adding_machine(2))


def test_section_closure_of_grigorchuk_b(machine):
    closure = section_closure(machine.state_element("b"), state_bound=64)
    assert closure.exact
    assert closure.bounded
    assert len(closure) == 5
    assert set(closure.names()) == {"b", "a", "c", "d", "id"}


def test_section_closure_reports_the_bound(machine):
    closure = section_closure(machine.state_element("b"), state_bound=3)
    assert closure.bounded is False
    assert len(closure) == 3


def test_rule_closure_on_constant_and_growing_trees(binary):
    assert section_closure(odometer(binary), state_bound=8).bounded is True
    grows = section_closure(odometer(Geometric(prefix=[3], ratio=3)), state_bound=8)
    assert grows.bounded is False
    assert len(grows) == 8


def test_portrait_basics(binary):
    g = FinitePortrait(binary, 2, {(): [1, 0], (0,): [1, 0]}, name="g")
    assert g.apply((0, 0)) == (1, 1)
    assert g.apply((1, 0)) == (0, 0)
    assert g.section((0,)).root_perm() == (1, 0)
    assert g.section((1,)).is_identity()
    with pytest.raises(DepthExceeded):
        g.apply((0, 0, 0))


def test_portrait_validates_its_vertices(binary):
    with pytest.raises(InvalidElement):
        FinitePortrait(binary, 1, {(0,): [1, 0]})
    with pytest.raises(InvalidElement):
        FinitePortrait(binary, 2, {(): [0, 0]})


def test_portrait_inverse_and_composition(rng):
    index = constant_index(3)
    g = random_portrait(index, 4, rng, name="g")
    gi = g.inverse()
    assert compose(g, gi).is_identity()
    for word in level_words(index, 4, 1000):
        assert gi.apply(g.apply(word)) == word


def test_truncation_agrees_with_the_recursion():
    a = adding_machine(2)
    portrait = FinitePortrait.truncate(a, 5)
    assert equal_to_depth(portrait, a, 5)
    assert portrait.depth == 5
    with pytest.raises(DepthExceeded):
        FinitePortrait.truncate(portrait, 6)


def test_mixed_composition_is_a_portrait(binary, rng):
    g = random_portrait(binary, 3, rng)
    mixed = compose(adding_machine(2), g)
    assert isinstance(mixed, FinitePortrait)
    assert mixed.depth == 3
    for word in level_words(binary, 3, 100):
        assert mixed.apply(word) == adding_machine(2).apply(g.apply(word))


def test_compose_checks_the_tree():
    with pytest.raises(IndexMismatch):
        compose(adding_machine(2), adding_machine(3))


def test_sections_of_a_product_follow_the_wreath_recursion(rng):
    index = constant_index(3)
    for _ in range(30):
        g = random_portrait(index, 4, rng)
        h = random_portrait(index, 4, rng)
        gh = compose(g, h)
        for v in level_words(index, 2, 100):
            expected = compose(section(g, h.apply(v)), section(h, v))
            assert equal_to_depth(section(gh, v), expected, 2)


def test_machine_sections_follow_the_wreath_recursion(machine):
    elements = [machine.state_element(s) for s in "abcd"] + [adding_machine(2)]
    for g in elements:
        for h in elements:
            gh = compose(g, h)
            for v in level_words(constant_index(2), 3, 100):
                expected = compose(section(g, h.apply(v)), section(h, v))
                assert equal_to_depth(section(gh, v), expected, 5)


@pytest.mark.parametrize("level", range(1, 6))
def test_elements_permute_every_level(machine, rng, level):
    binary = constant_index(2)
    elements = [
        (machine.state_element("b"), level),
        (adding_machine(2), level),
        (odometer(Geometric(prefix=[3], ratio=3), name="h"), min(level, 3)),
        (random_portrait(binary, 5, rng), level),
    ]
    for g, depth in elements:
        words = list(level_words(g.index, depth, 10000))
        images = {g.apply(w) for w in words}
        assert len(images) == len(words)
        assert images == set(words)
