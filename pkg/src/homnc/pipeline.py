"""End-to-end solve: validate, reduce, scale, tabulate, run an engine, extract, lift."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

from homnc import __version__
from homnc.model import Allocation, Instance, allocation_to_dict, allocation_value, check_feasible, clear_denominators
from homnc.nfold import SolverConfig, build_program, extract_allocation, program_to_dict, solve
from homnc.oracles import brute_force, dp_solve, dp_state_count
from homnc.patterns import pattern_values
from homnc.reductions import reduce_instance

ENGINES = ("nfold", "dp", "brute")


@dataclass
class SolveOptions:
    engine: str = "nfold"
    reduce: str = "all"
    delta_state: Optional[int] = None
    delta_slack: int = 2
    scale: str = "product"
    brute_limit: int = 10**7
    dp_max_states: int = 10**7
    max_iterations: int = 100_000
    trace: Optional[Callable[[str], None]] = None

    def echo(self) -> dict:
        return {
            "engine": self.engine,
            "reduce": self.reduce,
            "delta_state": self.delta_state,
            "delta_slack": self.delta_slack,
            "scale": self.scale,
        }


@dataclass
class SolveReport:
    allocation: Allocation
    value: Fraction
    meets_target: bool
    instance: Instance
    options: SolveOptions
    engine_stats: dict = field(default_factory=dict)
    reductions: list = field(default_factory=list)
    pattern_bits: list = field(default_factory=list)
    seconds: float = 0.0

    def to_dict(self) -> dict:
        return {
            "tool": "homnc",
            "version": __version__,
            "config": self.options.echo(),
            "seed": None,
            "allocation": allocation_to_dict(self.allocation, self.instance),
            "value": str(self.value),
            "meets_target": self.meets_target,
            "target": str(self.instance.target),
            "engine": self.engine_stats,
            "reductions": self.reductions,
            "pattern_bits": self.pattern_bits,
            "seconds": round(self.seconds, 6),
        }


def solve_instance(inst: Instance, options: Optional[SolveOptions] = None) -> SolveReport:
    opts = options or SolveOptions()
    if opts.engine not in ENGINES:
        raise ValueError(f"unknown engine {opts.engine!r}")
    t0 = time.perf_counter()
    if inst.C == 0 or not inst.contents:
        # nothing can be placed: optimum is 0 and no engine runs
        empty = Allocation({c: frozenset() for c in inst.cache_ids})
        return SolveReport(
            empty, Fraction(0), inst.target <= 0, inst, opts,
            engine_stats={"name": "none", "reason": "no caches" if inst.C == 0 else "empty catalog"},
            seconds=time.perf_counter() - t0,
        )

    trail = reduce_instance(inst, opts.reduce)
    work = trail.instance
    scaled = clear_denominators(work, opts.scale)
    table = pattern_values(scaled)
    stats: dict = {"name": opts.engine, "D_bits": scaled.D.bit_length(), "caches": work.C}

    if opts.engine == "nfold":
        prog = build_program(table, work.capacities)

        def on_step(it, z, step):
            if opts.trace is not None:
                opts.trace(f"iter {it} objective {z.objective} {step.summary()}")

        cfg = SolverConfig(opts.delta_state, opts.delta_slack, opts.max_iterations, trace=on_step)
        sol, st = solve(prog, cfg)
        merged = extract_allocation(prog, sol)
        engine_value = Fraction(sol.objective, scaled.D)
        stats.update(
            iterations=st.iterations,
            certification_passes=st.certification_passes,
            certification_improvements=st.certification_improvements,
            states=st.states,
            delta_state=st.delta_state,
            delta_slack=st.delta_slack,
            objective=str(sol.objective),
            shape=program_to_dict(prog)["shape"],
        )
    elif opts.engine == "dp":
        merged, engine_value = dp_solve(scaled, table, opts.dp_max_states)
        stats["states"] = dp_state_count(scaled)
    else:
        merged, engine_value = brute_force(scaled, table, opts.brute_limit)
        stats["assignments"] = (1 << work.C) ** len(work.contents)

    alloc = trail.lift(merged)
    feas = check_feasible(inst, alloc)
    value = allocation_value(inst, alloc)
    if not feas.feasible or value != engine_value:
        raise AssertionError(
            f"lifted allocation inconsistent: {feas.describe()}, value {value} vs engine {engine_value}"
        )
    return SolveReport(
        Allocation({c: alloc.get(c) for c in inst.cache_ids}),
        value,
        value >= inst.target,
        inst,
        opts,
        engine_stats=stats,
        reductions=trail.report,
        pattern_bits=work.cache_ids,
        seconds=time.perf_counter() - t0,
    )
