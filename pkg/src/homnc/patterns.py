"""Neighbourhood bitmasks and the per-content pattern-value table.

A placement pattern is an int bitmask over the instance's caches in file
order: bit ``i`` is set when the content is stored in cache ``i``. The
value ``V_s(P)`` is the scaled weight of every user whose neighbourhood
mask intersects ``P``.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Mapping

from homnc.model import Instance, ScaledInstance


def user_masks(inst: Instance) -> dict[str, int]:
    if inst.C == 0:
        raise ValueError("pattern masks need at least one cache; handle C = 0 before this")
    index = {cid: i for i, cid in enumerate(inst.cache_ids)}
    return {u.id: sum(1 << index[c] for c in u.caches) for u in inst.users}


def bits(pattern: int, C: int) -> tuple[int, ...]:
    return tuple((pattern >> i) & 1 for i in range(C))


def pattern_caches(pattern: int, cache_ids: list[str]) -> list[str]:
    return [c for i, c in enumerate(cache_ids) if pattern >> i & 1]


@dataclass(frozen=True)
class PatternValueTable:
    """``values[s][P]`` is the integer value of content ``s`` placed on pattern ``P``."""

    cache_ids: tuple[str, ...]
    content_ids: tuple[str, ...]
    values: Mapping[str, tuple[int, ...]]
    user_masks: Mapping[str, int]
    D: int

    @property
    def C(self) -> int:
        return len(self.cache_ids)

    def value(self, content: str, pattern: int) -> int:
        return self.values[content][pattern]

    def dump(self) -> dict[str, list[tuple[str, str]]]:
        """Debug view: per content, (bitmask as binary string with cache 0 rightmost, value)."""
        width = self.C
        return {
            s: [(format(P, f"0{width}b"), str(v)) for P, v in enumerate(row)]
            for s, row in self.values.items()
        }


def _masses_by_mask(scaled: ScaledInstance, masks: Mapping[str, int]) -> dict[str, dict[int, int]]:
    # content -> neighbourhood mask -> summed scaled alpha; only listed requests are visited
    out: dict[str, dict[int, int]] = defaultdict(lambda: defaultdict(int))
    for (uid, s), a in scaled.alpha_scaled.items():
        if a:
            out[s][masks[uid]] += a
    return out


def pattern_values(scaled: ScaledInstance, method: str = "direct") -> PatternValueTable:
    """Build the pattern-value table.

    ``method="direct"`` sums, for every pattern, the scaled alphas of users
    whose mask meets it. ``method="zeta"`` uses a subset-sum transform over
    the complement masks and yields the same integers.
    """
    inst = scaled.base
    if not inst.contents:
        raise ValueError("pattern table needs a nonempty catalog")
    masks = user_masks(inst)
    C = inst.C
    full = 1 << C
    per_mask = _masses_by_mask(scaled, masks)
    values: dict[str, tuple[int, ...]] = {}
    for s in inst.contents:
        groups = per_mask.get(s, {})
        if method == "direct":
            row = tuple(sum(a for m, a in groups.items() if m & P) for P in range(full))
        elif method == "zeta":
            # miss[Q] = mass of users whose mask lies inside Q; V(P) = total - miss[~P]
            miss = [0] * full
            for m, a in groups.items():
                miss[m] += a
            for i in range(C):
                bit = 1 << i
                for Q in range(full):
                    if Q & bit:
                        miss[Q] += miss[Q ^ bit]
            total = sum(groups.values())
            row = tuple(total - miss[(full - 1) ^ P] for P in range(full))
        else:
            raise ValueError(f"unknown method {method!r}")
        values[s] = row
    return PatternValueTable(tuple(inst.cache_ids), tuple(inst.contents), values, masks, scaled.D)


def induced_patterns(inst: Instance, assignment: Mapping[str, frozenset[str]]) -> dict[str, int]:
    """Pattern of each content under an allocation: the set of caches holding it."""
    pats = {s: 0 for s in inst.contents}
    for i, cid in enumerate(inst.cache_ids):
        for s in assignment.get(cid, ()):
            pats[s] |= 1 << i
    return pats
