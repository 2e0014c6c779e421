"""Instance representation, validation, denominator clearing and allocation evaluation.

All numbers are exact: capacities are Python ints, weights, request
probabilities and targets are :class:`fractions.Fraction`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Mapping

from homnc.errors import InstanceError


@dataclass(frozen=True)
class Cache:
    id: str
    capacity: int


@dataclass(frozen=True)
class User:
    id: str
    weight: Fraction
    caches: frozenset[str]
    requests: Mapping[str, Fraction]


@dataclass(frozen=True)
class Instance:
    caches: tuple[Cache, ...]
    users: tuple[User, ...]
    contents: tuple[str, ...]
    target: Fraction = Fraction(0)

    def __post_init__(self):
        validate(self)

    @property
    def cache_ids(self) -> list[str]:
        return [c.id for c in self.caches]

    @property
    def capacities(self) -> list[int]:
        return [c.capacity for c in self.caches]

    @property
    def C(self) -> int:
        return len(self.caches)

    @property
    def U(self) -> int:
        return len(self.users)

    @property
    def K(self) -> int:
        return max((c.capacity for c in self.caches), default=0)

    @property
    def lam(self) -> int:
        """Largest number of contents any user requests with nonzero probability."""
        return max(
            (sum(1 for p in u.requests.values() if p > 0) for u in self.users),
            default=0,
        )

    def cache_neighborhoods(self) -> dict[str, frozenset[str]]:
        """User-neighborhood N(c) of every cache, in cache order."""
        nbr: dict[str, set[str]] = {c.id: set() for c in self.caches}
        for u in self.users:
            for c in u.caches:
                nbr[c].add(u.id)
        return {cid: frozenset(us) for cid, us in nbr.items()}

    def edges(self) -> list[tuple[str, str]]:
        """Caching-graph edges as (cache-id, user-id), sorted lexicographically."""
        return sorted((c, u.id) for u in self.users for c in u.caches)

    def replace(self, **changes) -> "Instance":
        kw = dict(caches=self.caches, users=self.users, contents=self.contents, target=self.target)
        kw.update(changes)
        return Instance(**kw)


def validate(inst: Instance) -> None:
    _unique((c.id for c in inst.caches), "cache")
    _unique((u.id for u in inst.users), "user")
    _unique(inst.contents, "content")
    cache_set = {c.id for c in inst.caches}
    content_set = set(inst.contents)
    for c in inst.caches:
        if not isinstance(c.capacity, int) or isinstance(c.capacity, bool):
            raise InstanceError(f"cache {c.id!r}: capacity must be an integer")
        if c.capacity < 0:
            raise InstanceError(f"cache {c.id!r}: negative capacity {c.capacity}")
    if inst.target < 0:
        raise InstanceError(f"negative target {inst.target}")
    for u in inst.users:
        if u.weight < 0:
            raise InstanceError(f"user {u.id!r}: negative weight {u.weight}")
        missing = sorted(u.caches - cache_set)
        if missing:
            raise InstanceError(f"user {u.id!r}: unknown cache {missing[0]!r}")
        for s, p in u.requests.items():
            if s not in content_set:
                raise InstanceError(f"user {u.id!r}: request for unknown content {s!r}")
            if p < 0:
                raise InstanceError(f"user {u.id!r}: negative request probability for {s!r}")
        if inst.contents and sum(u.requests.values(), Fraction(0)) != 1:
            total = sum(u.requests.values(), Fraction(0))
            raise InstanceError(f"user {u.id!r}: request probabilities sum to {total}, not 1")


def _unique(ids: Iterable[str], kind: str) -> None:
    seen = set()
    for i in ids:
        if i in seen:
            raise InstanceError(f"duplicate {kind} id {i!r}")
        seen.add(i)


# --- parsing / serialization ---------------------------------------------


def _rational(value: Any, where: str) -> Fraction:
    if isinstance(value, bool) or isinstance(value, float):
        raise InstanceError(f"{where}: expected a string like 'p/q', got {value!r}")
    if isinstance(value, int):
        q = Fraction(value)
    elif isinstance(value, str):
        try:
            q = Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            raise InstanceError(f"{where}: malformed rational {value!r}") from None
    else:
        raise InstanceError(f"{where}: expected a rational, got {value!r}")
    if q < 0:
        raise InstanceError(f"{where}: negative number {value!r}")
    return q


def _integer(value: Any, where: str) -> int:
    if isinstance(value, bool) or isinstance(value, float):
        raise InstanceError(f"{where}: expected a decimal integer string, got {value!r}")
    if isinstance(value, int):
        n = value
    elif isinstance(value, str) and value.strip().lstrip("+-").isdigit():
        n = int(value.strip())
    else:
        raise InstanceError(f"{where}: malformed integer {value!r}")
    if n < 0:
        raise InstanceError(f"{where}: negative number {value!r}")
    return n


def _as_list(obj: Any, where: str) -> list:
    if not isinstance(obj, list):
        raise InstanceError(f"{where}: expected a list")
    return obj


def instance_from_dict(doc: Mapping[str, Any]) -> Instance:
    if not isinstance(doc, Mapping):
        raise InstanceError("instance document must be an object")
    for key in ("caches", "users", "contents"):
        if key not in doc:
            raise InstanceError(f"missing field {key!r}")
    caches = []
    for k, c in enumerate(_as_list(doc["caches"], "caches")):
        if not isinstance(c, Mapping) or "id" not in c or "capacity" not in c:
            raise InstanceError(f"caches[{k}]: needs 'id' and 'capacity'")
        caches.append(Cache(str(c["id"]), _integer(c["capacity"], f"cache {c['id']!r} capacity")))
    users = []
    for k, u in enumerate(_as_list(doc["users"], "users")):
        if not isinstance(u, Mapping) or "id" not in u:
            raise InstanceError(f"users[{k}]: needs 'id'")
        uid = str(u["id"])
        reqs = u.get("requests", {})
        if not isinstance(reqs, Mapping):
            raise InstanceError(f"user {uid!r}: 'requests' must be an object")
        users.append(
            User(
                id=uid,
                weight=_rational(u.get("weight", "1"), f"user {uid!r} weight"),
                caches=frozenset(str(c) for c in _as_list(u.get("caches", []), f"user {uid!r} caches")),
                requests={str(s): _rational(p, f"user {uid!r} request {s!r}") for s, p in reqs.items()},
            )
        )
    contents = tuple(str(s) for s in _as_list(doc["contents"], "contents"))
    target = _rational(doc.get("target", "0"), "target")
    return Instance(tuple(caches), tuple(users), contents, target)


def parse_instance(text: str) -> Instance:
    """Parse and validate the JSON instance format."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"malformed JSON: {exc}") from None
    return instance_from_dict(doc)


def instance_to_dict(inst: Instance) -> dict[str, Any]:
    order = {s: k for k, s in enumerate(inst.contents)}
    return {
        "caches": [{"id": c.id, "capacity": str(c.capacity)} for c in inst.caches],
        "users": [
            {
                "id": u.id,
                "weight": str(u.weight),
                "caches": [c for c in inst.cache_ids if c in u.caches],
                "requests": {s: str(u.requests[s]) for s in sorted(u.requests, key=order.__getitem__)},
            }
            for u in inst.users
        ],
        "contents": list(inst.contents),
        "target": str(inst.target),
    }


def serialize_instance(inst: Instance) -> str:
    return json.dumps(instance_to_dict(inst), indent=2) + "\n"


# --- scaling ----------------------------------------------------------------


@dataclass(frozen=True)
class ScaledInstance:
    """Integer view of an instance: ``alpha_scaled[u, s] = D * w(u) * p(u, s)`` and ``T = D * target``."""

    base: Instance
    D: int
    alpha_scaled: Mapping[tuple[str, str], int]
    T: int
    method: str = "product"

    def scale(self, value: Fraction) -> Fraction:
        return value * self.D


def clear_denominators(inst: Instance, method: str = "product", D: int | None = None) -> ScaledInstance:
    """Multiply every ``alpha = w * p`` and the target by a common integer D.

    ``method="product"`` takes D as the product of the (lowest-terms)
    denominators of all nonzero alphas and of the target. ``method="lcm"``
    takes their least common multiple instead, which keeps numbers small on
    large catalogs. An explicit ``D`` is accepted if every denominator
    divides it. All choices preserve every ``val(A) >= target`` decision.
    """
    alphas = {(u.id, s): u.weight * p for u in inst.users for s, p in u.requests.items()}
    dens = [a.denominator for a in alphas.values() if a != 0]
    if inst.target != 0:
        dens.append(inst.target.denominator)
    if D is not None:
        if D < 1 or any(D % d for d in dens):
            raise ValueError(f"D={D} is not a positive common multiple of the denominators")
        method = "explicit"
    elif method == "product":
        D = math.prod(dens)
    elif method == "lcm":
        D = math.lcm(*dens) if dens else 1
    else:
        raise ValueError(f"unknown scaling method {method!r}")
    scaled = {}
    for key, a in alphas.items():
        num = a * D
        assert num.denominator == 1
        scaled[key] = num.numerator
    T = inst.target * D
    assert T.denominator == 1
    return ScaledInstance(inst, D, scaled, T.numerator, method)


# --- allocations --------------------------------------------------------------


@dataclass(frozen=True)
class Allocation:
    assignment: Mapping[str, frozenset[str]] = field(default_factory=dict)

    @classmethod
    def of(cls, mapping: Mapping[str, Iterable[str]]) -> "Allocation":
        return cls({c: frozenset(ss) for c, ss in mapping.items()})

    def get(self, cache_id: str) -> frozenset[str]:
        return self.assignment.get(cache_id, frozenset())

    def normalized(self) -> dict[str, frozenset[str]]:
        """Assignment with empty sets dropped (for structural comparison)."""
        return {c: ss for c, ss in self.assignment.items() if ss}

    def __eq__(self, other):
        if not isinstance(other, Allocation):
            return NotImplemented
        return self.normalized() == other.normalized()

    def __hash__(self):
        return hash(frozenset(self.normalized().items()))


def _check_ids(inst: Instance, alloc: Allocation) -> None:
    caches = set(inst.cache_ids)
    contents = set(inst.contents)
    for c, ss in alloc.assignment.items():
        if c not in caches:
            raise InstanceError(f"allocation references unknown cache {c!r}")
        for s in ss:
            if s not in contents:
                raise InstanceError(f"allocation references unknown content {s!r} in cache {c!r}")


def visible_contents(inst: Instance, alloc: Allocation, user: User) -> set[str]:
    seen: set[str] = set()
    for c in user.caches:
        seen |= alloc.get(c)
    return seen


def allocation_value(inst: Instance, alloc: Allocation) -> Fraction:
    """Weighted cache-hit value; a content counts once per user however many neighbours store it."""
    _check_ids(inst, alloc)
    total = Fraction(0)
    for u in inst.users:
        seen = visible_contents(inst, alloc, u)
        total += u.weight * sum((u.requests.get(s, Fraction(0)) for s in seen), Fraction(0))
    return total


@dataclass(frozen=True)
class FeasibilityReport:
    feasible: bool
    loads: dict[str, tuple[int, int]]  # cache-id -> (|A(c)|, capacity)

    @property
    def violations(self) -> list[str]:
        return [c for c, (load, cap) in self.loads.items() if load > cap]

    def describe(self) -> str:
        if self.feasible:
            return "feasible"
        return "infeasible: " + ", ".join(
            f"{c} holds {self.loads[c][0]} > {self.loads[c][1]}" for c in self.violations
        )


def check_feasible(inst: Instance, alloc: Allocation) -> FeasibilityReport:
    _check_ids(inst, alloc)
    loads = {c.id: (len(alloc.get(c.id)), c.capacity) for c in inst.caches}
    return FeasibilityReport(all(load <= cap for load, cap in loads.values()), loads)


def allocation_to_dict(alloc: Allocation, inst: Instance | None = None) -> dict[str, list[str]]:
    """Cache-id -> sorted content list; every cache of ``inst`` is listed when given."""
    ids = inst.cache_ids if inst is not None else sorted(alloc.assignment)
    out = {c: sorted(alloc.get(c)) for c in ids}
    for c in alloc.assignment:
        if c not in out:
            out[c] = sorted(alloc.get(c))
    return out


def allocation_from_dict(doc: Mapping[str, Any]) -> Allocation:
    """Accepts either ``{"allocation": {...}}`` or the bare mapping."""
    if isinstance(doc, Mapping) and "allocation" in doc:
        doc = doc["allocation"]
    if not isinstance(doc, Mapping):
        raise InstanceError("allocation must be an object mapping cache ids to content lists")
    out = {}
    for c, ss in doc.items():
        if not isinstance(ss, list):
            raise InstanceError(f"allocation for cache {c!r} must be a list")
        out[str(c)] = frozenset(str(s) for s in ss)
    return Allocation(out)
