import json
import random
from fractions import Fraction
from itertools import combinations

import pytest

from helpers import random_instance, scaled_and_table

from homnc.errors import EngineLimitError
from homnc.model import Allocation, Cache, allocation_value, check_feasible, clear_denominators, parse_instance
from homnc.oracles import brute_force, dp_solve, dp_state_count


def test_brute_e1(e1):
    sc, table = scaled_and_table(e1)
    alloc, value = brute_force(sc, table)
    assert value == Fraction(5, 2)
    # both optima tie; the smaller assignment (P_a, P_b) = ({c1}, {c2}) wins
    assert alloc == Allocation.of({"c1": ["a"], "c2": ["b"]})


def test_dp_e1(e1):
    sc, table = scaled_and_table(e1)
    alloc, value = dp_solve(sc, table)
    assert value == Fraction(5, 2)
    assert check_feasible(e1, alloc).feasible
    assert allocation_value(e1, alloc) == value


def test_empty_catalog():
    inst = parse_instance(json.dumps({"caches": [{"id": "c", "capacity": "3"}], "users": [
        {"id": "u", "weight": "1", "caches": ["c"], "requests": {}}], "contents": [], "target": "0"}))
    sc = clear_denominators(inst)
    assert brute_force(sc)[1] == 0
    assert dp_solve(sc)[1] == 0


def test_zero_capacity(e1):
    inst = e1.replace(caches=tuple(Cache(c.id, 0) for c in e1.caches))
    sc, table = scaled_and_table(inst)
    assert brute_force(sc, table)[1] == 0
    assert dp_solve(sc, table)[1] == 0


def _single_cache(k, n, rng):
    doc = {
        "caches": [{"id": "c", "capacity": str(k)}],
        "users": [],
        "contents": [f"s{j}" for j in range(n)],
        "target": "0",
    }
    for u in range(3):
        masses = [rng.randint(1, 9) for _ in range(n)]
        doc["users"].append({"id": f"u{u}", "weight": str(rng.randint(1, 4)), "caches": ["c"],
                             "requests": {f"s{j}": f"{m}/{sum(masses)}" for j, m in enumerate(masses)}})
    return parse_instance(json.dumps(doc))


def test_single_cache_takes_top_k():
    rng = random.Random(3)
    for k in range(0, 6):
        inst = _single_cache(k, 5, rng)
        sc, table = scaled_and_table(inst)
        top = sorted((table.values[s][1] for s in inst.contents), reverse=True)[:k]
        alloc, value = dp_solve(sc, table)
        assert value * sc.D == sum(top)
        assert brute_force(sc, table)[1] == value
        if k >= 5:
            assert alloc.get("c") == frozenset(inst.contents)


def test_brute_limit(e1):
    sc, table = scaled_and_table(e1)
    with pytest.raises(EngineLimitError):
        brute_force(sc, table, limit=15)


def test_dp_state_cap(e1):
    sc, table = scaled_and_table(e1)
    assert dp_state_count(sc) == 4
    with pytest.raises(EngineLimitError):
        dp_solve(sc, table, max_states=3)


def test_dp_truncates_capacity(e1):
    inst = e1.replace(caches=tuple(Cache(c.id, 10**12) for c in e1.caches))
    sc, table = scaled_and_table(inst)
    assert dp_state_count(sc) == 9  # (min(k, 2) + 1)**2
    assert dp_solve(sc, table)[1] == 3  # everything visible to everyone


def _exhaustive_optimum(inst):
    # independent of the pattern table: enumerate content subsets per cache
    per = []
    for c in inst.caches:
        per.append([frozenset(s) for k in range(min(c.capacity, len(inst.contents)) + 1)
                    for s in combinations(inst.contents, k)])
    best = Fraction(0)

    def rec(i, chosen):
        nonlocal best
        if i == len(per):
            best = max(best, allocation_value(inst, Allocation(dict(zip(inst.cache_ids, chosen)))))
            return
        for sub in per[i]:
            rec(i + 1, chosen + [sub])

    rec(0, [])
    return best


def test_oracles_agree_with_subset_enumeration():
    rng = random.Random(5)
    for _ in range(60):
        inst = random_instance(rng, max_caches=2, max_contents=4, max_cap=2, max_users=3)
        sc, table = scaled_and_table(inst)
        expected = _exhaustive_optimum(inst)
        assert brute_force(sc, table)[1] == expected
        assert dp_solve(sc, table)[1] == expected


def test_dp_permutation_invariant():
    rng = random.Random(9)
    for _ in range(100):
        inst = random_instance(rng)
        perm = list(inst.contents)
        rng.shuffle(perm)
        a = dp_solve(*scaled_and_table(inst))[1]
        b = dp_solve(*scaled_and_table(inst.replace(contents=tuple(perm))))[1]
        assert a == b


def test_monotone_in_capacity():
    rng = random.Random(13)
    for _ in range(100):
        inst = random_instance(rng)
        base = dp_solve(*scaled_and_table(inst))[1]
        i = rng.randrange(inst.C)
        caches = list(inst.caches)
        caches[i] = Cache(caches[i].id, caches[i].capacity + rng.randint(1, 3))
        assert dp_solve(*scaled_and_table(inst.replace(caches=tuple(caches))))[1] >= base
