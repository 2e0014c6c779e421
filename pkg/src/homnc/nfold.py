"""The n-fold integer program for HomNC and an augmentation solver for it.

One brick per content holds ``2**C`` pattern indicators followed by ``C``
slacks. The local row forces exactly one pattern per brick; the ``C``
global rows say that, summed over bricks, pattern loads plus slacks equal
each cache capacity.

The solver is a Graver-style augmentation: starting from the all-empty
point it repeatedly applies the best zero-sum move found by a dynamic
program across bricks, with bounded prefix sums (``delta_state``) and
bounded per-brick slack changes (``delta_slack``). No bound guaranteeing
optimality for every instance is derived here; a final re-check at doubled
radii plus the oracle comparison suite is what backs exactness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Callable, Optional

import numpy as np

from homnc.errors import EngineLimitError
from homnc.model import Allocation, Instance
from homnc.patterns import PatternValueTable, bits, induced_patterns


@lru_cache(maxsize=None)
def blocks(C: int) -> tuple[tuple[tuple[int, ...], ...], tuple[int, ...]]:
    """Global block ``A_C`` (C rows) and local block ``B_C`` (one row) for ``C`` caches."""
    t = (1 << C) + C
    A = tuple(
        tuple((P >> i) & 1 for P in range(1 << C)) + tuple(int(i == j) for j in range(C))
        for i in range(C)
    )
    B = tuple([1] * (1 << C) + [0] * C)
    assert all(len(row) == t for row in A) and len(B) == t
    return A, B


@dataclass(frozen=True)
class NFoldProgram:
    cache_ids: tuple[str, ...]
    content_ids: tuple[str, ...]
    capacities: tuple[int, ...]
    objective: tuple[tuple[int, ...], ...]  # per brick, V on patterns then 0 on slacks
    D: int = 1

    @property
    def n(self) -> int:
        return len(self.content_ids)

    @property
    def r(self) -> int:
        return len(self.cache_ids)

    q = 1

    @property
    def t(self) -> int:
        return (1 << self.r) + self.r

    Gamma = 1

    @property
    def global_block(self):
        return blocks(self.r)[0]

    @property
    def local_block(self):
        return blocks(self.r)[1]

    @property
    def global_rhs(self) -> tuple[int, ...]:
        return self.capacities

    @property
    def local_rhs(self) -> tuple[int, ...]:
        return (1,) * self.n

    def lower_bounds(self, brick: int) -> tuple[int, ...]:
        return (0,) * self.t

    def upper_bounds(self, brick: int) -> tuple[int, ...]:
        return (1,) * (1 << self.r) + self.capacities

    def pattern_values(self, brick: int) -> tuple[int, ...]:
        return self.objective[brick][: 1 << self.r]

    @cached_property
    def _search(self):
        # objective divided by the gcd of all its entries: same maximisers, smaller integers
        rows = [self.pattern_values(j) for j in range(self.n)]
        g = 0
        for row in rows:
            for v in row:
                g = math.gcd(g, v)
        g = g or 1
        reduced = [[v // g for v in row] for row in rows]
        bound = sum(max(row) - min(row) for row in reduced)
        return g, reduced, bound


def build_program(table: PatternValueTable, capacities) -> NFoldProgram:
    C = table.C
    if C < 1 or not table.content_ids:
        raise ValueError("n-fold program needs C >= 1 and a nonempty catalog")
    caps = tuple(int(k) for k in capacities)
    if len(caps) != C:
        raise ValueError(f"expected {C} capacities, got {len(caps)}")
    zeros = (0,) * C
    objective = tuple(tuple(table.values[s]) + zeros for s in table.content_ids)
    return NFoldProgram(table.cache_ids, table.content_ids, caps, objective, table.D)


def program_to_dict(prog: NFoldProgram) -> dict:
    return {
        "n": prog.n,
        "shape": {"r": prog.r, "q": prog.q, "t": prog.t, "Gamma": prog.Gamma},
        "global_block": [list(row) for row in prog.global_block],
        "local_block": list(prog.local_block),
        "global_rhs": [str(k) for k in prog.global_rhs],
        "pattern_bits": list(prog.cache_ids),
    }


@dataclass(frozen=True)
class NFoldSolution:
    """Brick ``j`` picks pattern ``patterns[j]`` and carries slack vector ``slacks[j]``."""

    patterns: tuple[int, ...]
    slacks: tuple[tuple[int, ...], ...]
    objective: int

    def brick_vector(self, prog: NFoldProgram, j: int) -> tuple[int, ...]:
        x = [0] * (1 << prog.r)
        x[self.patterns[j]] = 1
        return tuple(x) + self.slacks[j]

    def loads(self, prog: NFoldProgram) -> list[int]:
        m = [0] * prog.r
        for P in self.patterns:
            for i in range(prog.r):
                m[i] += P >> i & 1
        return m


def check_solution(prog: NFoldProgram, sol: NFoldSolution) -> list[str]:
    """All violated constraints of ``sol`` (empty when feasible and the objective is consistent)."""
    problems = []
    A, B = prog.global_block, prog.local_block
    totals = [0] * prog.r
    objective = 0
    for j in range(prog.n):
        z = sol.brick_vector(prog, j)
        if sum(b * v for b, v in zip(B, z)) != 1:
            problems.append(f"brick {j}: local row != 1")
        for k, (lo, v, hi) in enumerate(zip(prog.lower_bounds(j), z, prog.upper_bounds(j))):
            if not lo <= v <= hi:
                problems.append(f"brick {j}: column {k} = {v} outside [{lo}, {hi}]")
        for i in range(prog.r):
            totals[i] += sum(a * v for a, v in zip(A[i], z))
        objective += sum(w * v for w, v in zip(prog.objective[j], z))
    for i, (tot, cap) in enumerate(zip(totals, prog.global_rhs)):
        if tot != cap:
            problems.append(f"cache {prog.cache_ids[i]}: global row {tot} != {cap}")
    if objective != sol.objective:
        problems.append(f"objective {sol.objective} != recomputed {objective}")
    return problems


def initial_point(prog: NFoldProgram) -> NFoldSolution:
    """Every content unplaced; the first brick holds all residual capacity as slack."""
    zeros = (0,) * prog.r
    slacks = (prog.capacities,) + (zeros,) * (prog.n - 1)
    return NFoldSolution((0,) * prog.n, slacks, 0)


def solution_from_allocation(prog: NFoldProgram, inst: Instance, alloc: Allocation) -> NFoldSolution:
    """Embed a feasible allocation; leftover capacity goes to the first brick's slacks."""
    pats = induced_patterns(inst, alloc.assignment)
    patterns = tuple(pats[s] for s in prog.content_ids)
    load = [0] * prog.r
    for P in patterns:
        for i in range(prog.r):
            load[i] += P >> i & 1
    residual = tuple(k - m for k, m in zip(prog.capacities, load))
    if any(h < 0 for h in residual):
        raise ValueError("allocation exceeds a capacity")
    zeros = (0,) * prog.r
    slacks = (residual,) + (zeros,) * (prog.n - 1)
    objective = sum(prog.objective[j][P] for j, P in enumerate(patterns))
    return NFoldSolution(patterns, slacks, objective)


def extract_allocation(prog: NFoldProgram, sol: NFoldSolution) -> Allocation:
    return Allocation(
        {
            cid: frozenset(s for s, P in zip(prog.content_ids, sol.patterns) if P >> i & 1)
            for i, cid in enumerate(prog.cache_ids)
        }
    )


# --- augmentation -------------------------------------------------------------


@dataclass(frozen=True)
class BrickMove:
    brick: int
    old_pattern: int
    new_pattern: int
    slack_delta: tuple[int, ...]


@dataclass(frozen=True)
class Step:
    gain: int
    moves: tuple[BrickMove, ...]

    def summary(self) -> str:
        swaps = sum(1 for m in self.moves if m.old_pattern != m.new_pattern)
        return f"bricks={len(self.moves)} swaps={swaps} gain={self.gain}"


def _shift(delta, radius: int):
    """Source/destination slices moving a box of side ``2*radius+1`` by ``delta``."""
    w = 2 * radius + 1
    src, dst = [], []
    for d in delta:
        if abs(d) >= w:
            return None
        if d >= 0:
            src.append(slice(0, w - d))
            dst.append(slice(d, w))
        else:
            src.append(slice(-d, w))
            dst.append(slice(0, w + d))
    return tuple(src), tuple(dst)


def _signed_order(limit: int):
    yield 0
    for k in range(1, limit + 1):
        yield -k
        yield k


def find_augmenting_step(
    prog: NFoldProgram,
    z: NFoldSolution,
    delta_state: int,
    delta_slack: int,
    max_states: int = 2 * 10**6,
    stats: Optional[dict] = None,
) -> Optional[Step]:
    """Best positive-gain kernel move reachable by the brick-by-brick DP, or ``None``.

    The DP state is the running per-cache sum of load and slack changes,
    restricted to the box ``[-delta_state, delta_state]**C``; states leaving
    the box are dropped. Each brick first optionally swaps its pattern, then
    adjusts each slack coordinate by at most ``delta_slack`` within its
    bounds. Only moves ending at the zero state are valid. Options are tried
    in a fixed order (keep first, then ascending pattern id / slack delta
    0, -1, +1, ...) and only a strictly better value replaces an earlier one,
    so the result is deterministic.
    """
    C = prog.r
    w = 2 * delta_state + 1
    n_states = w**C
    if n_states > max_states:
        raise EngineLimitError(
            f"augmentation DP needs {n_states} states (C={C}, delta_state={delta_state}) > cap {max_states}"
        )
    g, reduced, bound = prog._search
    dtype = np.int64 if 3 * bound + 2 < 2**62 else object
    unreachable = -(2 * bound + 2)
    shape = (w,) * C
    origin = (delta_state,) * C
    npat = 1 << C
    pat_bits = [bits(P, C) for P in range(npat)]

    gain = np.full(shape, unreachable, dtype=dtype)
    gain[origin] = 0
    history = []
    for j in range(prog.n):
        P = z.patterns[j]
        row = reduced[j]
        new = gain.copy()
        pat_choice = np.full(shape, P, dtype=np.int16)
        for Q in range(npat):
            if Q == P:
                continue
            sl = _shift([bq - bp for bq, bp in zip(pat_bits[Q], pat_bits[P])], delta_state)
            if sl is None:
                continue
            src, dst = sl
            cand = gain[src] + (row[Q] - row[P])
            target = new[dst]
            better = np.asarray(cand > target, dtype=bool)
            np.copyto(target, cand, where=better)
            np.copyto(pat_choice[dst], Q, where=better)
        gain = new
        slack_choice = []
        for i in range(C):
            h, cap = z.slacks[j][i], prog.capacities[i]
            new = gain.copy()
            choice = np.zeros(shape, dtype=np.int16)
            for d in _signed_order(delta_slack):
                if d == 0 or not 0 <= h + d <= cap:
                    continue
                delta = [0] * C
                delta[i] = d
                sl = _shift(delta, delta_state)
                if sl is None:
                    continue
                src, dst = sl
                cand = gain[src]
                target = new[dst]
                better = np.asarray(cand > target, dtype=bool)
                np.copyto(target, cand, where=better)
                np.copyto(choice[dst], d, where=better)
            gain = new
            slack_choice.append(choice)
        history.append((pat_choice, slack_choice))
    if stats is not None:
        stats["states"] = stats.get("states", 0) + n_states * prog.n

    if not gain[origin] > 0:
        return None

    state = list(origin)
    moves = []
    for j in range(prog.n - 1, -1, -1):
        pat_choice, slack_choice = history[j]
        sd = [0] * C
        for i in range(C - 1, -1, -1):
            d = int(slack_choice[i][tuple(state)])
            state[i] -= d
            sd[i] = d
        P = z.patterns[j]
        Q = int(pat_choice[tuple(state)])
        for i in range(C):
            state[i] -= pat_bits[Q][i] - pat_bits[P][i]
        if Q != P or any(sd):
            moves.append(BrickMove(j, P, Q, tuple(sd)))
    assert tuple(state) == origin
    moves.reverse()
    exact_gain = sum(prog.objective[m.brick][m.new_pattern] - prog.objective[m.brick][m.old_pattern] for m in moves)
    assert exact_gain == g * int(gain[origin])
    return Step(exact_gain, tuple(moves))


def apply_step(prog: NFoldProgram, z: NFoldSolution, step: Step) -> NFoldSolution:
    patterns = list(z.patterns)
    slacks = [list(h) for h in z.slacks]
    for m in step.moves:
        assert patterns[m.brick] == m.old_pattern
        patterns[m.brick] = m.new_pattern
        for i, d in enumerate(m.slack_delta):
            slacks[m.brick][i] += d
    return NFoldSolution(tuple(patterns), tuple(tuple(h) for h in slacks), z.objective + step.gain)


@dataclass
class SolverConfig:
    delta_state: Optional[int] = None  # default 2*C
    delta_slack: int = 2
    max_iterations: int = 100_000
    max_states: int = 2 * 10**6
    trace: Optional[Callable[[int, NFoldSolution, Step], None]] = None


@dataclass
class SolveStats:
    iterations: int = 0
    certification_passes: int = 0
    certification_improvements: int = 0
    states: int = 0
    delta_state: int = 0
    delta_slack: int = 0
    extra: dict = field(default_factory=dict)


def solve(prog: NFoldProgram, config: Optional[SolverConfig] = None) -> tuple[NFoldSolution, SolveStats]:
    """Augment from :func:`initial_point` until no improving step exists at doubled radii."""
    config = config or SolverConfig()
    ds = config.delta_state if config.delta_state is not None else 2 * prog.r
    dl = config.delta_slack
    if ds < 1 or dl < 1:
        raise ValueError("delta_state and delta_slack must be positive")
    stats = SolveStats(delta_state=ds, delta_slack=dl)
    counters: dict = {}
    z = initial_point(prog)
    while True:
        step = find_augmenting_step(prog, z, ds, dl, config.max_states, counters)
        if step is None:
            stats.certification_passes += 1
            step = find_augmenting_step(prog, z, 2 * ds, 2 * dl, config.max_states, counters)
            if step is None:
                break
            stats.certification_improvements += 1
        z_next = apply_step(prog, z, step)
        assert z_next.objective > z.objective
        z = z_next
        stats.iterations += 1
        if config.trace is not None:
            config.trace(stats.iterations, z, step)
        if stats.iterations >= config.max_iterations:
            raise EngineLimitError(f"n-fold solver exceeded {config.max_iterations} iterations")
    stats.states = counters.get("states", 0)
    return z, stats
