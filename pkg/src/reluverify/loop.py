"""Verification loops: direct solving, abstraction refinement with a fixed
property, and abstraction refinement with property tightening.

All three agree on verdicts; they differ in how much work the backend
solver sees.  The refinement loops saturate-abstract the network first,
check solver counterexamples against the original query, and split merged
neurons guided by spurious ones.  The tightening loop additionally raises
the abstract query's threshold by the certified output gap, recomputed from
scratch after every refinement.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .abstraction import AbstractionState, abstract_to_saturation, refine_split
from .bounds import BoundMethod
from .categorize import preprocess
from .network import OutputProperty, Query, evaluate
from .solver import DEFAULT_EPSILON, Status, Verdict, solve
from .tightening import tighten_property

SPURIOUS_SLACK = 1e-6


@dataclass
class RunStats:
    """Per-run bookkeeping: one entry per loop iteration where applicable."""

    mode: str
    iterations: int = 0
    refinement_steps: int = 0
    abstract_hidden_sizes: list[list[int]] = field(default_factory=list)
    thresholds: list[float] = field(default_factory=list)
    solver_times: list[float] = field(default_factory=list)
    solver_nodes: int = 0
    total_time: float = 0.0
    initial_excess: int | None = None

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "iterations": self.iterations,
            "refinement_steps": self.refinement_steps,
            "abstract_hidden_sizes": self.abstract_hidden_sizes,
            "thresholds": self.thresholds,
            "solver_times": self.solver_times,
            "solver_nodes": self.solver_nodes,
            "total_time": self.total_time,
            "initial_excess": self.initial_excess,
        }


def is_genuine(q: Query, x0) -> bool:
    """Counterexample check against the original query (threshold c)."""
    return bool(evaluate(q.network, x0)[0] > q.output.threshold - SPURIOUS_SLACK)


def verify_direct(
    q: Query, timeout: float | None = None, epsilon: float = DEFAULT_EPSILON
) -> tuple[Verdict, RunStats]:
    """Hand the original query straight to the backend solver."""
    stats = RunStats(mode="direct", initial_excess=0)
    start = time.monotonic()
    v = solve(q, timeout=timeout, epsilon=epsilon)
    stats.iterations = 1
    stats.abstract_hidden_sizes.append(q.network.hidden_sizes)
    stats.thresholds.append(q.output.threshold)
    stats.solver_times.append(v.time)
    stats.solver_nodes = v.nodes
    stats.total_time = time.monotonic() - start
    return v, stats


def _refinement_loop(
    q: Query,
    mode: str,
    tighten: bool,
    method: BoundMethod,
    timeout: float | None,
    epsilon: float,
    refine_batch: int,
    state_trace: list | None,
) -> tuple[Verdict, RunStats]:
    stats = RunStats(mode=mode)
    start = time.monotonic()

    def remaining():
        return None if timeout is None else timeout - (time.monotonic() - start)

    def finish(v: Verdict) -> tuple[Verdict, RunStats]:
        stats.total_time = time.monotonic() - start
        return v, stats

    base = preprocess(q.network)
    nonneg = bool(np.all(q.input.lower >= 0.0))
    state: AbstractionState = abstract_to_saturation(base, nonneg_inputs=nonneg)
    stats.initial_excess = state.excess
    max_iterations = 1 + stats.initial_excess
    if state_trace is not None:
        state_trace.append(state)

    while True:
        threshold = q.output.threshold
        if tighten:
            prop = tighten_property(state.network, q.network, q.input, q.output, method)
            threshold = prop.threshold
        else:
            prop = q.output
        stats.iterations += 1
        stats.abstract_hidden_sizes.append(state.hidden_sizes)
        stats.thresholds.append(threshold)
        if stats.iterations > max_iterations:
            raise RuntimeError(
                f"{mode}: exceeded the convergence bound of {max_iterations} iterations"
            )

        budget = remaining()
        if budget is not None and budget <= 0:
            return finish(Verdict(Status.TIMEOUT, None, stats.solver_nodes, 0.0))
        abstract_query = Query(state.network, q.input, prop)
        v = solve(abstract_query, timeout=budget, epsilon=epsilon)
        stats.solver_times.append(v.time)
        stats.solver_nodes += v.nodes

        if v.status is Status.TIMEOUT:
            return finish(v)
        if v.status is Status.UNSAT:
            return finish(Verdict(Status.UNSAT, None, stats.solver_nodes, v.time))
        x0 = v.witness
        if is_genuine(q, x0):
            return finish(Verdict(Status.SAT, x0, stats.solver_nodes, v.time))
        state = refine_split(state, x0, k=refine_batch)
        stats.refinement_steps += 1
        if state_trace is not None:
            state_trace.append(state)


def verify_cegar(
    q: Query,
    timeout: float | None = None,
    epsilon: float = DEFAULT_EPSILON,
    refine_batch: int = 1,
    state_trace: list | None = None,
) -> tuple[Verdict, RunStats]:
    """Abstraction refinement with the output property left unchanged."""
    return _refinement_loop(
        q, "cegar", False, BoundMethod.SBT, timeout, epsilon, refine_batch, state_trace
    )


def verify_cegarette(
    q: Query,
    timeout: float | None = None,
    epsilon: float = DEFAULT_EPSILON,
    method: BoundMethod = BoundMethod.SBT,
    refine_batch: int = 1,
    state_trace: list | None = None,
) -> tuple[Verdict, RunStats]:
    """Abstraction refinement with bound-derived property tightening."""
    return _refinement_loop(
        q, "cegarette", True, method, timeout, epsilon, refine_batch, state_trace
    )


MODES = {
    "direct": lambda q, **kw: verify_direct(
        q, timeout=kw.get("timeout"), epsilon=kw.get("epsilon", DEFAULT_EPSILON)
    ),
    "cegar": lambda q, **kw: verify_cegar(
        q,
        timeout=kw.get("timeout"),
        epsilon=kw.get("epsilon", DEFAULT_EPSILON),
        refine_batch=kw.get("refine_batch", 1),
    ),
    "cegarette": lambda q, **kw: verify_cegarette(
        q,
        timeout=kw.get("timeout"),
        epsilon=kw.get("epsilon", DEFAULT_EPSILON),
        method=kw.get("method", BoundMethod.SBT),
        refine_batch=kw.get("refine_batch", 1),
    ),
}


def verify(q: Query, mode: str, **kw) -> tuple[Verdict, RunStats]:
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {sorted(MODES)}")
    return MODES[mode](q, **kw)
