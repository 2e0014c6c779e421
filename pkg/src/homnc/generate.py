"""Seeded random instance generator.

Request distributions come from integer Zipf-like masses normalised to
exact rationals, so every generated instance validates.
"""

from __future__ import annotations

import random
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Optional

from homnc.model import Cache, Instance, User

MASS_SCALE = 10**6


@dataclass
class GenParams:
    caches: int = 2
    users: int = 3
    contents: int = 4
    max_cap: int = 2
    edge_p: Fraction = Fraction(1, 2)
    zipf: Fraction = Fraction(1)
    weight_min: int = 1
    weight_max: int = 5
    weight_den: int = 1
    support: Optional[int] = None  # contents requested per user; all when None
    target: Fraction = Fraction(0)

    def check(self) -> None:
        for name in ("caches", "users", "contents", "max_cap", "weight_min", "weight_max"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")
        if self.weight_den < 1:
            raise ValueError("weight_den must be positive")
        if self.weight_min > self.weight_max:
            raise ValueError("weight_min exceeds weight_max")
        if not 0 <= self.edge_p <= 1:
            raise ValueError("edge probability must lie in [0, 1]")
        if self.zipf < 0:
            raise ValueError("zipf exponent must be nonnegative")
        if self.support is not None:
            if self.support > self.contents:
                raise ValueError("support exceeds catalog size")
            if self.support < 1 and self.contents > 0:
                raise ValueError("support must be at least 1 when the catalog is nonempty")
        if self.target < 0:
            raise ValueError("target must be nonnegative")

    def echo(self) -> dict:
        return {k: str(v) if isinstance(v, Fraction) else v for k, v in asdict(self).items()}


def zipf_masses(k: int, exponent: Fraction) -> list[int]:
    """Integer masses proportional (up to rounding) to ``rank**-exponent``."""
    if exponent == 0:
        return [1] * k
    e = float(exponent)
    return [max(1, round(MASS_SCALE * (r ** -e))) for r in range(1, k + 1)]


def generate(params: GenParams, seed: int) -> Instance:
    params.check()
    rng = random.Random(seed)
    cache_ids = [f"c{i + 1}" for i in range(params.caches)]
    caches = tuple(Cache(c, rng.randint(0, params.max_cap)) for c in cache_ids)
    contents = tuple(f"s{j + 1}" for j in range(params.contents))
    num, den = params.edge_p.numerator, params.edge_p.denominator
    users = []
    for k in range(params.users):
        nbr = frozenset(c for c in cache_ids if rng.randrange(den) < num)
        weight = Fraction(rng.randint(params.weight_min, params.weight_max), params.weight_den)
        requests: dict[str, Fraction] = {}
        if contents:
            size = params.support if params.support is not None else len(contents)
            ranked = rng.sample(contents, size)
            masses = zipf_masses(size, params.zipf)
            total = sum(masses)
            requests = {s: Fraction(m, total) for s, m in zip(ranked, masses)}
        users.append(User(f"u{k + 1}", weight, nbr, requests))
    return Instance(caches, tuple(users), contents, params.target)
