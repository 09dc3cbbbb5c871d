"""Sound and complete decision procedure for a single query.

Branch-and-bound over ReLU phases: each node carries a partial phase
assignment (+1 active, -1 inactive, 0 undecided), bounds are recomputed per
node with phase-aware symbolic tightening, branches whose output upper
bound cannot exceed the threshold are pruned, and fully-decided leaves
reduce to a linear feasibility problem solved with a dense simplex.

The strict property ``y > c`` is decided at granularity epsilon: SAT means
some x in the box reaches ``y >= c + epsilon``.  Every SAT witness is
re-checked by concrete forward evaluation before being returned.
"""

from __future__ import annotations

import enum
import itertools
import time
from dataclasses import dataclass

import numpy as np

from .bounds import sbt
from .network import InputBox, Network, Query, evaluate
from .simplex import SimplexError, feasible_point

ACTIVE, INACTIVE, UNKNOWN = 1, -1, 0

DEFAULT_EPSILON = 1e-6
WITNESS_SLACK = 1e-9


class Status(str, enum.Enum):
    SAT = "SAT"
    UNSAT = "UNSAT"
    TIMEOUT = "TIMEOUT"


class SolverError(RuntimeError):
    """Unrecoverable numerical failure while deciding a query."""


@dataclass(frozen=True, eq=False)
class Verdict:
    status: Status
    witness: np.ndarray | None
    nodes: int
    time: float

    def to_dict(self) -> dict:
        return {
            "status": self.status.value,
            "witness": None if self.witness is None else self.witness.tolist(),
            "nodes": self.nodes,
            "time": self.time,
        }


def _leaf_rows(sym, target: float):
    """Linear rows (A x <= b) encoding the fixed-phase region and output >= target."""
    rows, rhs = [], []
    for k, mode in enumerate(sym.relu_modes):
        Lc, Lk = sym.pre_lower[k]
        for i in range(mode.shape[0]):
            if mode[i] == ACTIVE:
                rows.append(-Lc[i])
                rhs.append(Lk[i])
            else:
                rows.append(Lc[i])
                rhs.append(-Lk[i])
    out_c, out_k = sym.pre_lower[-1]
    rows.append(-out_c[0])
    rhs.append(out_k[0] - target)
    return np.array(rows), np.array(rhs)


def _solve_leaf(net: Network, box: InputBox, sym, threshold: float, epsilon: float):
    """Feasibility of a fully-decided branch; returns a verified witness or None."""
    A, b = _leaf_rows(sym, threshold + epsilon)
    try:
        x = feasible_point(A, b, box.lower, box.upper)
    except SimplexError:
        x = feasible_point(A, b, box.lower, box.upper, tol=1e-11, feas_tol=1e-10)
    if x is None:
        return None
    if evaluate(net, x)[0] > threshold - WITNESS_SLACK:
        return x
    # Marginal LP answer; re-solve with tightened pivots before giving up.
    x = feasible_point(A, b, box.lower, box.upper, tol=1e-11, feas_tol=1e-10)
    if x is not None and evaluate(net, x)[0] > threshold - WITNESS_SLACK:
        return x
    raise SolverError("simplex produced a witness that fails concrete re-evaluation")


def _assert_no_sat_leaf(net, box, phases, threshold, epsilon):
    """Debug check for pruned branches: no completion has a feasible leaf."""
    free = [
        (k, i)
        for k, ph in enumerate(phases)
        for i in np.flatnonzero(ph == UNKNOWN)
    ]
    for combo in itertools.product((ACTIVE, INACTIVE), repeat=len(free)):
        full = tuple(ph.copy() for ph in phases)
        for (k, i), val in zip(free, combo):
            full[k][i] = val
        sym, _ = sbt(net, box, full)
        A, b = _leaf_rows(sym, threshold + epsilon)
        assert feasible_point(A, b, box.lower, box.upper) is None, (
            f"pruned branch contains a feasible leaf (phases {combo})"
        )


def solve(
    query: Query,
    timeout: float | None = None,
    epsilon: float = DEFAULT_EPSILON,
    check_prunes: bool = False,
) -> Verdict:
    """Decide a query: UNSAT, SAT with witness, or TIMEOUT.

    UNSAT guarantees no x in the box reaches ``y >= c + epsilon``; SAT
    returns a box point whose concrete output exceeds ``c - 1e-9``.
    """
    net, box, c = query.network, query.input, query.output.threshold
    start = time.monotonic()
    nodes = 0

    def verdict(status: Status, witness=None) -> Verdict:
        return Verdict(status, witness, nodes, time.monotonic() - start)

    def timed_out() -> bool:
        return timeout is not None and time.monotonic() - start >= timeout

    if timeout is not None and timeout <= 0:
        return verdict(Status.TIMEOUT)

    root = tuple(np.zeros(sz, dtype=np.int8) for sz in net.hidden_sizes)
    stack: list[tuple[tuple[np.ndarray, ...], int]] = [(root, 0)]
    while stack:
        if timed_out():
            return verdict(Status.TIMEOUT)
        phases, depth = stack.pop()
        nodes += 1
        sym, bm = sbt(net, box, phases)

        conflict = False
        for k, ph in enumerate(phases):
            plo, phi = bm.pre[k]
            if np.any((ph == ACTIVE) & (phi < 0)) or np.any((ph == INACTIVE) & (plo > 0)):
                conflict = True
                break
        if conflict:
            if check_prunes:
                _assert_no_sat_leaf(net, box, phases, c, epsilon)
            continue

        lo_out, hi_out = bm.output_interval
        if hi_out <= c:
            if check_prunes:
                _assert_no_sat_leaf(net, box, phases, c, epsilon)
            continue
        if depth == 0 and lo_out >= c + epsilon:
            # Every box point is a witness when the sound lower bound clears c.
            mid = box.midpoint()
            if evaluate(net, mid)[0] > c - WITNESS_SLACK:
                return verdict(Status.SAT, mid)

        branch = None
        widest = -np.inf
        for k, mode in enumerate(sym.relu_modes):
            plo, phi = bm.pre[k]
            for i in np.flatnonzero(mode == UNKNOWN):
                width = phi[i] - plo[i]
                if width > widest:
                    widest, branch = width, (k, int(i))
        if branch is None:
            x = _solve_leaf(net, box, sym, c, epsilon)
            if x is not None:
                return verdict(Status.SAT, x)
            continue
        k, i = branch
        for val in (INACTIVE, ACTIVE):  # pushed inactive first; active explored first
            child = tuple(ph.copy() for ph in phases)
            child[k][i] = val
            stack.append((child, depth + 1))

    return verdict(Status.UNSAT)
