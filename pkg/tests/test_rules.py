from __future__ import annotations

import json

import pytest

from cantor.core.automorphism import equal_to_depth, exact_equal, identity_element
from cantor.core.catalog import adding_machine, grigorchuk_machine
from cantor.core.rules import RuleDefined, odometer, product, swap_jump
from cantor.core.tree import constant_index, index_to_dict, level_words
from cantor.data.serialization import element_from_dict, element_to_dict, element_to_json, load_action_file
from cantor.errors import InvalidElement, InvalidParameters


def test_odometer_on_mixed_radix(geometric):
    h = odometer(geometric, name="h")
    assert h.apply((2, 8, 0)) == (0, 0, 1)
    assert h.inverse().apply((0, 0, 1)) == (2, 8, 0)
    assert h.inverse().name == "h^-1"
    assert h.is_involution is False


def test_odometer_agrees_with_the_adding_machine(binary):
    assert equal_to_depth(odometer(binary), adding_machine(2), 6)


def test_swap_jump(geometric):
    b = swap_jump(geometric)
    assert b.apply((0, 7)) == (0, 8)
    assert b.apply((1, 5)) == (2, 5)
    assert b.apply((0, 0, 25)) == (0, 0, 26)
    assert b.apply((0, 0, 3)) == (0, 0, 3)
    assert b.inverse() is b


def test_power_graft_moves_only_below_z(binary):
    c = RuleDefined("ex45_c", {"first_k": 1}, binary, name="c")
    assert c.apply((0, 1, 0, 0, 0)) == (0, 1, 0, 0, 1)
    assert c.apply((0, 1, 0, 0, 1, 0)) == (0, 1, 0, 0, 0, 1)
    assert c.apply((0, 1, 1, 0, 0)) == (0, 1, 1, 0, 0)
    assert c.apply((1, 0, 0, 0, 0)) == (1, 0, 0, 0, 0)
    assert c.inverse().apply((0, 1, 0, 0, 1)) == (0, 1, 0, 0, 0)


def test_child_graft(geometric):
    c = RuleDefined("ex44_c", {"first_level": 2}, geometric, name="c")
    assert c.apply((0, 1, 0, 0)) == (0, 1, 0, 1)
    assert c.apply((0, 1, 2, 0)) == (0, 1, 2, 0)
    assert c.apply((1, 0, 0, 0)) == (1, 0, 0, 0)


@pytest.mark.parametrize(
    "rule, params, index",
    [
        ("odometer", {"step": 0}, constant_index(2)),
        ("ex45_c", {"first_k": 0}, constant_index(2)),
        ("ex44_c", {"first_level": 1}, constant_index(3)),
    ],
)
def test_rule_parameters_are_checked(rule, params, index):
    with pytest.raises(InvalidParameters):
        RuleDefined(rule, params, index)


def test_power_graft_needs_a_constant_tree(geometric):
    with pytest.raises(InvalidParameters):
        RuleDefined("ex45_c", {}, geometric)


def test_unknown_rule():
    with pytest.raises(InvalidElement):
        RuleDefined("spiral", {}, constant_index(2))


def test_product_flattens_and_drops_identities(geometric):
    h = odometer(geometric, name="h")
    e = identity_element(geometric)
    assert product([h]) is h
    assert product([e, h]) is h
    nested = product([product([h, h]), h])
    assert len(nested.kernel.factors) == 3
    assert nested.name == "h*h*h"


def test_product_with_inverse_acts_trivially(geometric):
    h = odometer(geometric, name="h")
    g = product([h, h.inverse()])
    assert equal_to_depth(g, identity_element(geometric), 3)
    for word in level_words(geometric, 2, 100):
        assert g.apply(word) == word


def test_inverse_rule_searches_digits(geometric):
    h = odometer(geometric, name="h")
    hi = RuleDefined("inverse", {"of": h}, geometric, name="h^-1")
    assert hi.apply((0, 0, 1)) == (2, 8, 0)
    assert hi.inverse() is h


def test_sections_of_rules(binary):
    a = odometer(binary)
    assert a.section((0,)).rule == "identity"
    below = a.section((1,))
    assert below.rule == "section"
    assert below.apply((0, 1)) == (1, 1)
    c = RuleDefined("ex45_c", {"first_k": 1}, binary, name="c")
    deeper = c.section((0,)).section((1,))
    assert deeper.kernel.vertex == (0, 1)
    assert deeper.apply((0, 0, 0)) == (0, 0, 1)


def test_mealy_serialisation_round_trip():
    b = grigorchuk_machine().state_element("b")
    data = element_to_dict(b)
    assert data["kind"] == "mealy"
    assert data["initial"] == "b"
    assert exact_equal(element_from_dict(data), b)


def test_rule_serialisation_round_trip(geometric):
    h = odometer(geometric, name="h")
    g = product([h, swap_jump(geometric)], name="g")
    restored = element_from_dict(json.loads(element_to_json(g)), name="g")
    assert restored.rule == "product"
    for word in level_words(geometric, 2, 100):
        assert restored.apply(word) == g.apply(word)


def test_malformed_elements():
    with pytest.raises(InvalidElement):
        element_from_dict({"kind": "mealy"})
    with pytest.raises(InvalidElement):
        element_from_dict({"kind": "spiral"})
    with pytest.raises(InvalidElement):
        element_from_dict({"kind": "rule", "rule": "odometer", "params": {}})


def test_load_action_file(tmp_path, binary):
    path = tmp_path / "action.json"
    path.write_text(json.dumps({
        "index": index_to_dict(binary),
        "generators": {
            "a": element_to_dict(adding_machine(2)),
            "t": {"kind": "rule", "rule": "odometer", "params": {"step": 1}},
            "p": {"kind": "portrait", "depth": 2, "perms": [{"vertex": [], "perm": [1, 0]}]},
        },
    }))
    loaded = load_action_file(str(path))
    assert loaded["index"] == binary
    generators = loaded["generators"]
    assert sorted(generators) == ["a", "p", "t"]
    assert generators["t"].name == "t"
    assert equal_to_depth(generators["a"], generators["t"], 5)
    assert generators["p"].apply((1, 1)) == (0, 1)


def test_load_action_file_needs_generators(tmp_path, binary):
    path = tmp_path / "empty.json"
    path.write_text(json.dumps({"index": index_to_dict(binary), "generators": {}}))
    with pytest.raises(InvalidElement):
        load_action_file(str(path))
