"""Independent exact solvers used to check the n-fold engine.

Both read the pattern-value table for speed, then re-evaluate the winning
allocation with :func:`homnc.model.allocation_value` so a table bug cannot
silently agree with itself.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Optional

from homnc.errors import EngineLimitError
from homnc.model import Allocation, ScaledInstance, allocation_value
from homnc.patterns import PatternValueTable, bits, pattern_values


def _degenerate(scaled: ScaledInstance) -> bool:
    inst = scaled.base
    return inst.C == 0 or not inst.contents


def _to_allocation(table: PatternValueTable, assignment) -> Allocation:
    return Allocation(
        {
            cid: frozenset(s for s, P in zip(table.content_ids, assignment) if P >> i & 1)
            for i, cid in enumerate(table.cache_ids)
        }
    )


def _finish(scaled: ScaledInstance, table: PatternValueTable, assignment, scaled_value: int):
    alloc = _to_allocation(table, assignment)
    value = allocation_value(scaled.base, alloc)
    if value * scaled.D != scaled_value:
        raise AssertionError(
            f"pattern table gives {scaled_value}/{scaled.D} but direct evaluation gives {value}"
        )
    return alloc, value


def brute_force(
    scaled: ScaledInstance, table: Optional[PatternValueTable] = None, limit: int = 10**7
) -> tuple[Allocation, Fraction]:
    """Exhaustive search over one pattern per content.

    Returns the lexicographically smallest optimal assignment, comparing
    the tuple of pattern bitmasks in content order.
    """
    if _degenerate(scaled):
        return Allocation({}), Fraction(0)
    inst = scaled.base
    C, n = inst.C, len(inst.contents)
    space = (1 << C) ** n
    if space > limit:
        raise EngineLimitError(f"brute force needs {space} assignments > limit {limit}")
    table = table or pattern_values(scaled)
    rows = [table.values[s] for s in table.content_ids]
    caps = inst.capacities
    pat_bits = [bits(P, C) for P in range(1 << C)]
    best_value = -1
    best: tuple[int, ...] = ()
    chosen = [0] * n
    load = [0] * C

    # depth-first in ascending pattern order; strict improvement keeps the first optimum met
    def visit(j: int, acc: int) -> None:
        nonlocal best_value, best
        if j == n:
            if acc > best_value:
                best_value, best = acc, tuple(chosen)
            return
        row = rows[j]
        for P in range(1 << C):
            b = pat_bits[P]
            if any(load[i] + b[i] > caps[i] for i in range(C)):
                continue
            for i in range(C):
                load[i] += b[i]
            chosen[j] = P
            visit(j + 1, acc + row[P])
            for i in range(C):
                load[i] -= b[i]

    visit(0, 0)
    return _finish(scaled, table, best, best_value)


def dp_state_count(scaled: ScaledInstance) -> int:
    n = len(scaled.base.contents)
    return math.prod(min(k, n) + 1 for k in scaled.base.capacities)


def dp_solve(
    scaled: ScaledInstance, table: Optional[PatternValueTable] = None, max_states: int = 10**7
) -> tuple[Allocation, Fraction]:
    """Capacity-vector dynamic program over contents in catalog order.

    The state is the vector of residual capacities, each truncated at the
    catalog size, so there are at most ``prod(min(k_i, |S|) + 1)`` states.
    """
    if _degenerate(scaled):
        return Allocation({}), Fraction(0)
    inst = scaled.base
    C, n = inst.C, len(inst.contents)
    states = dp_state_count(scaled)
    if states > max_states:
        raise EngineLimitError(f"capacity DP needs {states} states > cap {max_states}")
    table = table or pattern_values(scaled)
    start = tuple(min(k, n) for k in inst.capacities)
    pat_bits = [bits(P, C) for P in range(1 << C)]
    layer: dict[tuple[int, ...], int] = {start: 0}
    back: list[dict[tuple[int, ...], tuple[tuple[int, ...], int]]] = []
    for s in table.content_ids:
        row = table.values[s]
        nxt: dict[tuple[int, ...], int] = {}
        choice: dict[tuple[int, ...], tuple[tuple[int, ...], int]] = {}
        for res, acc in layer.items():
            for P, b in enumerate(pat_bits):
                if any(r < x for r, x in zip(res, b)):
                    continue
                key = tuple(r - x for r, x in zip(res, b))
                v = acc + row[P]
                if key not in nxt or v > nxt[key]:
                    nxt[key] = v
                    choice[key] = (res, P)
        back.append(choice)
        layer = nxt
    state, best_value = max(layer.items(), key=lambda kv: kv[1])
    assignment = [0] * n
    for j in range(n - 1, -1, -1):
        state, assignment[j] = back[j][state]
    assert state == start
    return _finish(scaled, table, assignment, best_value)
