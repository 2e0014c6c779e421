"""Benchmark harness: generate seeded instances per cell, solve, record timings.

Config (JSON)::

    {"cells": [{"caches": 2, "users": 4, "contents": 100, "max_cap": 5,
                "seeds": [1], "engine": "nfold", "zipf": "0", "edge_p": "1/2",
                "reduce": "all", "scale": "lcm", "timeout": 120}]}

Each (cell, seed) runs in its own process so a timeout can be enforced.
"""

from __future__ import annotations

import json
import multiprocessing as mp
import time
from fractions import Fraction
from typing import Any

from homnc import __version__
from homnc.errors import EngineLimitError
from homnc.generate import GenParams, generate
from homnc.pipeline import SolveOptions, solve_instance

CELL_DEFAULTS: dict[str, Any] = {
    "caches": 2,
    "users": 4,
    "contents": 100,
    "max_cap": 5,
    "seeds": [0],
    "engine": "nfold",
    "zipf": "0",
    "edge_p": "1/2",
    "weight_min": 1,
    "weight_max": 5,
    "reduce": "all",
    "scale": "lcm",
    "delta_state": None,
    "delta_slack": 2,
    "timeout": 120.0,
}


def _cell(raw: dict) -> dict:
    unknown = set(raw) - set(CELL_DEFAULTS)
    if unknown:
        raise ValueError(f"unknown bench cell keys: {sorted(unknown)}")
    return {**CELL_DEFAULTS, **raw}


def run_one(cell: dict, seed: int) -> dict:
    params = GenParams(
        caches=cell["caches"],
        users=cell["users"],
        contents=cell["contents"],
        max_cap=cell["max_cap"],
        edge_p=Fraction(str(cell["edge_p"])),
        zipf=Fraction(str(cell["zipf"])),
        weight_min=cell["weight_min"],
        weight_max=cell["weight_max"],
    )
    inst = generate(params, seed)
    opts = SolveOptions(
        engine=cell["engine"],
        reduce=cell["reduce"],
        scale=cell["scale"],
        delta_state=cell["delta_state"],
        delta_slack=cell["delta_slack"],
    )
    t0 = time.perf_counter()
    try:
        rep = solve_instance(inst, opts)
    except EngineLimitError as exc:
        return {"status": "skipped", "reason": str(exc), "wall_time": time.perf_counter() - t0}
    return {
        "status": "ok",
        "wall_time": time.perf_counter() - t0,
        "value": str(rep.value),
        "iterations": rep.engine_stats.get("iterations"),
        "states": rep.engine_stats.get("states"),
        "solved_caches": rep.engine_stats.get("caches"),
    }


def _child(cell, seed, queue):
    try:
        queue.put(run_one(cell, seed))
    except Exception as exc:  # reported as a row, the run continues
        queue.put({"status": "error", "reason": f"{type(exc).__name__}: {exc}"})


def run_isolated(cell: dict, seed: int) -> dict:
    ctx = mp.get_context("fork") if "fork" in mp.get_all_start_methods() else mp.get_context()
    queue = ctx.Queue()
    proc = ctx.Process(target=_child, args=(cell, seed, queue))
    t0 = time.perf_counter()
    proc.start()
    timeout = cell["timeout"]
    result = None
    try:
        result = queue.get(timeout=timeout)
    except Exception:
        pass
    proc.join(1.0 if result is not None else 0)
    if proc.is_alive():
        proc.terminate()
        proc.join()
    if result is None:
        result = {"status": "timeout", "wall_time": time.perf_counter() - t0}
    return result


def run_bench(config: dict, isolate: bool = True) -> dict:
    cells = [_cell(c) for c in config.get("cells", [])]
    rows = []
    for k, cell in enumerate(cells):
        for seed in cell["seeds"]:
            res = run_isolated(cell, seed) if isolate else run_one(cell, seed)
            row = {
                "cell": k,
                "seed": seed,
                "engine": cell["engine"],
                "caches": cell["caches"],
                "users": cell["users"],
                "contents": cell["contents"],
                "max_cap": cell["max_cap"],
                **res,
            }
            rows.append(row)
    return {"tool": "homnc", "version": __version__, "config": config, "rows": rows}


def summarize(result: dict) -> str:
    lines = [f"{'cell':>4} {'seed':>5} {'engine':>6} {'C':>3} {'U':>3} {'|S|':>7} {'status':>8} {'time[s]':>9} {'iters':>6}  value"]
    for r in result["rows"]:
        t = r.get("wall_time")
        t = "-" if t is None else f"{t:.3f}"
        lines.append(
            f"{r['cell']:>4} {r['seed']:>5} {r['engine']:>6} {r['caches']:>3} {r['users']:>3} "
            f"{r['contents']:>7} {r['status']:>8} {t:>9} "
            f"{str(r.get('iterations', '-')):>6}  {r.get('value', '-')}"
        )
    return "\n".join(lines)


def load_config(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)
