"""Optimum-preserving instance reductions and allocation lifting.

The bounded-``U`` cases need nothing extra: after :func:`merge_cache_twins`
at most ``2**U`` caches remain, so ``merge_cache_twins`` followed by the
n-fold solver is the whole algorithm for ``U`` and ``U + K``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from homnc.errors import InstanceError
from homnc.model import Allocation, Cache, Instance, User


@dataclass(frozen=True)
class MergeGroup:
    merged_id: str
    members: tuple[tuple[str, int], ...]  # (original cache-id, original capacity), instance order

    @property
    def capacity(self) -> int:
        return sum(k for _, k in self.members)


@dataclass(frozen=True)
class MergeMap:
    groups: tuple[MergeGroup, ...] = ()

    def __bool__(self) -> bool:
        return bool(self.groups)

    def to_dict(self) -> list[dict]:
        return [
            {"merged": g.merged_id, "members": [{"id": c, "capacity": str(k)} for c, k in g.members]}
            for g in self.groups
        ]


def _merge(inst: Instance, partition: Iterable[Sequence[str]]) -> tuple[Instance, MergeMap]:
    """Replace each listed group (size >= 2) of caches by one cache with the summed capacity."""
    caps = {c.id: c.capacity for c in inst.caches}
    order = {cid: k for k, cid in enumerate(inst.cache_ids)}
    rename: dict[str, str] = {}
    groups = []
    for members in partition:
        members = sorted(members, key=order.__getitem__)
        if len(members) < 2:
            continue
        merged_id = min(members)
        groups.append(MergeGroup(merged_id, tuple((c, caps[c]) for c in members)))
        for c in members:
            rename[c] = merged_id
    if not groups:
        return inst, MergeMap()
    by_id = {g.merged_id: g for g in groups}
    caches = []
    placed = set()
    for c in inst.caches:
        if c.id not in rename:
            caches.append(c)
            continue
        mid = rename[c.id]
        if mid not in placed:
            placed.add(mid)
            caches.append(Cache(mid, by_id[mid].capacity))
    users = tuple(
        User(u.id, u.weight, frozenset(rename.get(c, c) for c in u.caches), u.requests)
        for u in inst.users
    )
    groups.sort(key=lambda g: order[g.members[0][0]])
    return inst.replace(caches=tuple(caches), users=users), MergeMap(tuple(groups))


def _group_by_neighborhood(inst: Instance, cache_ids: Iterable[str]) -> list[list[str]]:
    nbr = inst.cache_neighborhoods()
    buckets: dict[frozenset[str], list[str]] = {}
    for c in cache_ids:
        buckets.setdefault(nbr[c], []).append(c)
    return list(buckets.values())


def merge_cache_twins(inst: Instance) -> tuple[Instance, MergeMap]:
    """Merge caches that serve exactly the same users; the merged cache keeps the smallest member id."""
    return _merge(inst, _group_by_neighborhood(inst, inst.cache_ids))


def truncate_capacities(inst: Instance) -> Instance:
    n = len(inst.contents)
    caches = tuple(Cache(c.id, min(c.capacity, n)) for c in inst.caches)
    if caches == inst.caches:
        return inst
    return inst.replace(caches=caches)


@dataclass
class VertexCoverReport:
    matching: list[tuple[str, str]]
    cover_size: int
    cover_caches: list[str]
    cover_users: list[str]
    caches_before: int
    caches_after: int

    @property
    def p(self) -> int:
        return len(self.matching)

    @property
    def bound(self) -> int:
        """``|X n caches| + 2**|X n users|``, itself at most ``2p + 2**(2p)``."""
        return len(self.cover_caches) + 2 ** len(self.cover_users)

    def to_dict(self) -> dict:
        return {
            "matching": [list(e) for e in self.matching],
            "cover_size": self.cover_size,
            "cover_caches": self.cover_caches,
            "cover_users": self.cover_users,
            "caches_before": self.caches_before,
            "caches_after": self.caches_after,
            "bound": self.bound,
            "p_bound": 2 * self.p + 2 ** (2 * self.p),
        }


def greedy_maximal_matching(edges: Iterable[tuple[str, str]]) -> list[tuple[str, str]]:
    used_c: set[str] = set()
    used_u: set[str] = set()
    matching = []
    for c, u in edges:
        if c not in used_c and u not in used_u:
            matching.append((c, u))
            used_c.add(c)
            used_u.add(u)
    return matching


def vertex_cover_reduce(
    inst: Instance, edge_order: Optional[Sequence[tuple[str, str]]] = None
) -> tuple[Instance, MergeMap, VertexCoverReport]:
    """Merge same-neighbourhood caches outside a 2-approximate vertex cover.

    The cover is every endpoint of a greedy maximal matching, scanning edges
    lexicographically unless ``edge_order`` is given. A cache outside the
    cover only sees users inside it, so at most ``2**|cover users|`` caches
    survive outside the cover.
    """
    edges = list(edge_order) if edge_order is not None else inst.edges()
    matching = greedy_maximal_matching(edges)
    cover_c = {c for c, _ in matching}
    cover_u = {u for _, u in matching}
    outside = [c for c in inst.cache_ids if c not in cover_c]
    nbr = inst.cache_neighborhoods()
    assert all(nbr[c] <= cover_u for c in outside)
    reduced, mm = _merge(inst, _group_by_neighborhood(inst, outside))
    report = VertexCoverReport(
        matching=matching,
        cover_size=len(cover_c) + len(cover_u),
        cover_caches=[c for c in inst.cache_ids if c in cover_c],
        cover_users=[u.id for u in inst.users if u.id in cover_u],
        caches_before=inst.C,
        caches_after=reduced.C,
    )
    return reduced, mm, report


def lift_allocation(mm: MergeMap, inst_original: Instance, alloc_merged: Allocation) -> Allocation:
    """Split each merged cache's contents first-fit, in catalog order, over its original members."""
    order = {s: k for k, s in enumerate(inst_original.contents)}
    groups = {g.merged_id: g for g in mm.groups}
    known = set(inst_original.cache_ids)
    out: dict[str, frozenset[str]] = {}
    for cid, contents in alloc_merged.assignment.items():
        g = groups.get(cid)
        if g is None:
            if cid not in known:
                raise InstanceError(f"merged allocation references unknown cache {cid!r}")
            out[cid] = frozenset(contents)
            continue
        items = sorted(contents, key=order.__getitem__)
        pos = 0
        for member, cap in g.members:
            out[member] = frozenset(items[pos : pos + cap])
            pos += cap
        if pos < len(items):
            raise InstanceError(
                f"merged cache {cid!r} holds {len(items)} contents but its members fit only {g.capacity}"
            )
    return Allocation(out)


@dataclass
class ReductionTrail:
    """Sequence of reductions applied on the way from the original to the working instance."""

    original: Instance
    stages: list[tuple[str, Instance, MergeMap]] = field(default_factory=list)  # (name, instance before, map)
    report: list[dict] = field(default_factory=list)

    @property
    def instance(self) -> Instance:
        return self._current

    def __post_init__(self):
        self._current = self.original

    def apply(self, name: str) -> None:
        before = self._current
        entry: dict = {"stage": name, "caches_before": before.C}
        if name == "twins":
            after, mm = merge_cache_twins(before)
            entry["groups"] = mm.to_dict()
        elif name == "truncate":
            after, mm = truncate_capacities(before), MergeMap()
            entry["truncated"] = [
                c1.id for c1, c2 in zip(before.caches, after.caches) if c1.capacity != c2.capacity
            ]
        elif name == "vc":
            after, mm, vc = vertex_cover_reduce(before)
            entry.update(vc.to_dict())
            entry["groups"] = mm.to_dict()
        else:
            raise ValueError(f"unknown reduction {name!r}")
        entry["caches_after"] = after.C
        self.stages.append((name, before, mm))
        self.report.append(entry)
        self._current = after

    def lift(self, alloc: Allocation) -> Allocation:
        for _, before, mm in reversed(self.stages):
            if mm:
                alloc = lift_allocation(mm, before, alloc)
        return alloc


REDUCTION_PLANS = {
    "none": (),
    "twins": ("twins",),
    "all": ("twins", "truncate"),
    "vc": ("vc", "twins", "truncate"),
}


def reduce_instance(inst: Instance, plan: str = "all") -> ReductionTrail:
    if plan not in REDUCTION_PLANS:
        raise ValueError(f"unknown reduction plan {plan!r}; choose from {sorted(REDUCTION_PLANS)}")
    trail = ReductionTrail(inst)
    for name in REDUCTION_PLANS[plan]:
        trail.apply(name)
    return trail
