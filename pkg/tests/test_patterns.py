import json
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings

from conftest import instances
from helpers import random_instance

from homnc.model import Allocation, allocation_value, clear_denominators, parse_instance
from homnc.patterns import induced_patterns, pattern_values, user_masks

E1_TABLE_D128 = {
    # pattern ids: 0 = {}, 1 = {c1}, 2 = {c2}, 3 = {c1, c2}
    "a": (0, 128, 64, 128),
    "b": (0, 256, 192, 256),
}


def test_e1_masks(e1):
    assert user_masks(e1) == {"u1": 0b01, "u2": 0b11}


def test_e1_table_matches_hand_values(e1):
    table = pattern_values(clear_denominators(e1, D=128))
    assert dict(table.values) == E1_TABLE_D128


def test_e1_table_product_D(e1):
    table = pattern_values(clear_denominators(e1))
    assert table.D == 32
    assert {s: tuple(4 * v for v in row) for s, row in table.values.items()} == E1_TABLE_D128


def test_isolated_and_full_masks():
    inst = parse_instance(json.dumps({
        "caches": [{"id": f"c{i}", "capacity": "1"} for i in range(3)],
        "users": [
            {"id": "lonely", "weight": "1", "caches": [], "requests": {"a": "1"}},
            {"id": "hub", "weight": "1", "caches": ["c0", "c1", "c2"], "requests": {"a": "1"}},
        ],
        "contents": ["a", "b"], "target": "0"}))
    assert user_masks(inst) == {"lonely": 0, "hub": 0b111}
    table = pattern_values(clear_denominators(inst))
    assert table.values["b"] == (0,) * 8  # requested by nobody


def test_masks_need_a_cache():
    inst = parse_instance(json.dumps({"caches": [], "users": [], "contents": ["a"], "target": "0"}))
    with pytest.raises(ValueError):
        user_masks(inst)


def test_dump(e1):
    dump = pattern_values(clear_denominators(e1, D=128)).dump()
    assert dump["b"][2] == ("10", "192")


@settings(max_examples=150, deadline=None)
@given(instances(max_caches=4, max_contents=4))
def test_table_laws(inst):
    table = pattern_values(clear_denominators(inst))
    full = 1 << inst.C
    for s, row in table.values.items():
        assert row[0] == 0
        for P in range(full):
            for Q in range(full):
                if P & Q == P:
                    assert row[P] <= row[Q]
                assert row[P | Q] <= row[P] + row[Q]


@settings(max_examples=150, deadline=None)
@given(instances(max_caches=4, max_contents=4))
def test_zeta_equals_direct(inst):
    sc = clear_denominators(inst)
    assert pattern_values(sc, "zeta").values == pattern_values(sc, "direct").values


def test_value_decomposition_random():
    rng = random.Random(11)
    for _ in range(200):
        inst = random_instance(rng)
        sc = clear_denominators(inst)
        table = pattern_values(sc)
        assign = {c.id: frozenset(rng.sample(inst.contents, rng.randint(0, len(inst.contents)))) for c in inst.caches}
        alloc = Allocation(assign)
        pats = induced_patterns(inst, assign)
        scaled_value = sum(table.values[s][pats[s]] for s in inst.contents)
        assert sc.D * allocation_value(inst, alloc) == scaled_value
        assert allocation_value(inst, alloc) == Fraction(scaled_value, sc.D)
