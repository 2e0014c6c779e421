import random
from fractions import Fraction
from pathlib import Path

from homnc.model import Cache, Instance, User, clear_denominators, parse_instance
from homnc.patterns import pattern_values

DATA = Path(__file__).parent / "data"


def load_e1() -> Instance:
    return parse_instance((DATA / "e1.json").read_text())


def random_distribution(rng: random.Random, contents, support=None):
    k = support or rng.randint(1, len(contents))
    chosen = rng.sample(list(contents), k)
    masses = [rng.randint(0, 6) for _ in chosen]
    if sum(masses) == 0:
        masses[0] = 1
    total = sum(masses)
    return {s: Fraction(m, total) for s, m in zip(chosen, masses)}


def random_instance(
    rng: random.Random,
    max_caches: int = 3,
    max_users: int = 5,
    max_contents: int = 6,
    max_cap: int = 3,
    min_caches: int = 1,
    min_contents: int = 1,
    edge_p: float = 0.5,
) -> Instance:
    C = rng.randint(min_caches, max_caches)
    n = rng.randint(min_contents, max_contents)
    cache_ids = [f"c{i}" for i in range(C)]
    contents = [f"s{j}" for j in range(n)]
    caches = tuple(Cache(c, rng.randint(0, max_cap)) for c in cache_ids)
    users = []
    for k in range(rng.randint(0, max_users)):
        nbr = frozenset(c for c in cache_ids if rng.random() < edge_p)
        weight = Fraction(rng.randint(0, 7), rng.randint(1, 5))
        reqs = random_distribution(rng, contents) if contents else {}
        users.append(User(f"u{k}", weight, nbr, reqs))
    target = Fraction(rng.randint(0, 12), rng.randint(1, 4))
    return Instance(caches, tuple(users), tuple(contents), target)


def with_twins(rng: random.Random, inst: Instance, max_copies: int = 3) -> Instance:
    """Append copies of existing caches (same users, fresh ids and capacities)."""
    extra = []
    copies: dict[str, list[str]] = {}
    for k in range(rng.randint(1, max_copies)):
        src = rng.choice(inst.caches)
        cid = f"{src.id}t{k}"
        extra.append(Cache(cid, rng.randint(0, 3)))
        copies.setdefault(src.id, []).append(cid)
    users = tuple(
        User(u.id, u.weight, u.caches | {d for c in u.caches for d in copies.get(c, ())}, u.requests)
        for u in inst.users
    )
    return inst.replace(caches=inst.caches + tuple(extra), users=users)


def scaled_and_table(inst: Instance, method: str = "product"):
    scaled = clear_denominators(inst, method)
    return scaled, pattern_values(scaled)
