"""Benchmark harness: robustness reduction to single-output queries,
seeded suite generation, and batch execution with result aggregation.

A robustness claim (all points within a radius of a center keep the
center's classification) reduces to one query per competing label whose
network computes that label's margin over the true label; the claim holds
iff every reduced query is UNSAT.
"""

from __future__ import annotations

import csv
import itertools
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .bounds import BoundMethod, output_bounds
from .formats import (
    FormatError,
    load_network,
    load_query,
    resolve_relative,
    save_network,
    save_query,
)
from .loop import verify
from .network import (
    InputBox,
    Layer,
    Network,
    OutputProperty,
    Query,
    ValidationError,
    evaluate,
)
from .simplex import feasible_point
from .solver import DEFAULT_EPSILON

CSV_COLUMNS = ["query_id", "mode", "verdict", "refinements", "iterations", "time_ms", "timeout"]


@dataclass(frozen=True, eq=False)
class RobustnessSpec:
    """A classification point, a perturbation radius, and the expected label."""

    network: Network
    center: np.ndarray
    radius: np.ndarray
    label: int

    def __init__(self, network: Network, center, radius, label: int):
        center = np.asarray(center, dtype=np.float64)
        radius = np.broadcast_to(np.asarray(radius, dtype=np.float64), center.shape).copy()
        if center.shape != (network.input_size,):
            raise ValidationError("center does not match the network input size")
        if np.any(radius < 0) or not np.all(np.isfinite(radius)):
            raise ValidationError("radius must be finite and non-negative")
        if not 0 <= int(label) < network.output_size:
            raise ValidationError("label out of range")
        object.__setattr__(self, "network", network)
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "radius", radius)
        object.__setattr__(self, "label", int(label))


def load_robustness_spec(path) -> RobustnessSpec:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as e:
            raise FormatError(f"{path}: invalid JSON at line {e.lineno}: {e.msg}") from e
    for key in ("network", "center", "radius", "label"):
        if key not in doc:
            raise FormatError(f"{path}: missing required field '{key}'")
    net = load_network(resolve_relative(path, doc["network"]))
    return RobustnessSpec(net, doc["center"], doc["radius"], doc["label"])


def difference_network(net: Network, j: int, label: int) -> Network:
    """Single-output network computing output[j] - output[label].

    The +1/-1 selector layer is folded into the final affine layer, so the
    layer structure (ReLU hidden, affine output) is preserved.
    """
    selector = np.zeros(net.output_size)
    selector[j] = 1.0
    selector[label] = -1.0
    last = net.layers[-1]
    out = Layer(
        (selector @ last.weights).reshape(1, -1), [float(selector @ last.biases)], relu=False
    )
    return Network(list(net.layers[:-1]) + [out], net.input_size, domain=net.domain)


def reduce_to_single_output(spec: RobustnessSpec) -> list[Query]:
    """One query per competing label; the spec is robust iff all are UNSAT."""
    net = spec.network
    if net.domain is not None:
        dlo, dhi = net.domain
    else:
        dlo, dhi = np.zeros(net.input_size), np.ones(net.input_size)
    lo = np.clip(spec.center - spec.radius, dlo, dhi)
    hi = np.clip(spec.center + spec.radius, dlo, dhi)
    box = InputBox(lo, hi)
    return [
        Query(difference_network(net, j, spec.label), box, OutputProperty(0.0))
        for j in range(net.output_size)
        if j != spec.label
    ]


def exhaustive_verdict(q: Query, epsilon: float = DEFAULT_EPSILON) -> str:
    """Ground truth by brute force: enumerate every ReLU phase pattern and
    solve the induced linear feasibility problem.  Only for tiny networks."""
    net = q.network
    total_hidden = sum(net.hidden_sizes)
    if total_hidden > 16:
        raise ValueError("exhaustive enumeration limited to 16 hidden neurons")
    c = q.output.threshold
    n = net.input_size
    for bits in itertools.product((1, 0), repeat=total_hidden):
        C, d = np.eye(n), np.zeros(n)
        rows, rhs = [], []
        pos = 0
        for layer in net.layers[:-1]:
            pC = layer.weights @ C
            pd = layer.weights @ d + layer.biases
            act = np.array(bits[pos : pos + layer.size], dtype=np.float64)
            pos += layer.size
            for i in range(layer.size):
                if act[i]:
                    rows.append(-pC[i])
                    rhs.append(pd[i])
                else:
                    rows.append(pC[i])
                    rhs.append(-pd[i])
            C, d = pC * act[:, None], pd * act
        last = net.layers[-1]
        oC = last.weights @ C
        od = last.weights @ d + last.biases
        rows.append(-oC[0])
        rhs.append(od[0] - c - epsilon)
        if feasible_point(np.array(rows), np.array(rhs), q.input.lower, q.input.upper) is not None:
            return "SAT"
    return "UNSAT"


def _random_network(rng, n_inputs, widths, n_outputs, scale="uniform", domain=None) -> Network:
    sizes = [n_inputs] + list(widths) + [n_outputs]
    layers = []
    for k in range(1, len(sizes)):
        if scale == "uniform":
            W = rng.uniform(-1.0, 1.0, size=(sizes[k], sizes[k - 1]))
            b = rng.uniform(-0.5, 0.5, size=sizes[k])
        else:
            W = rng.normal(0.0, 1.0 / np.sqrt(sizes[k - 1]), size=(sizes[k], sizes[k - 1]))
            b = rng.normal(0.0, 0.05, size=sizes[k])
        layers.append(Layer(W, b, relu=k < len(sizes) - 1))
    return Network(layers, n_inputs, domain=domain)


def _gen_oracle_query(rng) -> tuple[Network, Query, str]:
    n_inputs = int(rng.integers(2, 4))
    n_layers = int(rng.integers(1, 4))
    widths = []
    budget = 8
    for _ in range(n_layers):
        w = int(rng.integers(2, 5))
        w = min(w, budget - (n_layers - len(widths) - 1) * 2)
        w = max(w, 1)
        widths.append(w)
        budget -= w
    net = _random_network(rng, n_inputs, widths, 1)
    center = rng.uniform(-1.0, 1.0, size=n_inputs)
    half = rng.uniform(0.1, 0.6, size=n_inputs)
    box = InputBox(center - half, center + half)
    samples = rng.uniform(box.lower, box.upper, size=(512, n_inputs))
    ys = np.array([evaluate(net, x)[0] for x in samples])
    spread = float(ys.max() - ys.min()) + 0.1
    if rng.random() < 0.5:
        c = float(ys.min() + 0.3 * spread)
    else:
        c = float(ys.max() + 0.3 * spread)
    q = Query(net, box, OutputProperty(c))
    return net, q, exhaustive_verdict(q)


def _certified_radius(net: Network, center, label: int, lo_max: float = 1e-4, hi_max: float = 0.5):
    """Largest radius (bisected) at which symbolic bounds certify robustness."""

    def certified(delta: float) -> bool:
        spec = RobustnessSpec(net, center, delta, label)
        return all(
            output_bounds(rq.network, rq.input, BoundMethod.SBT)[1] <= 0.0
            for rq in reduce_to_single_output(spec)
        )

    if not certified(lo_max):
        return None
    if certified(hi_max):
        return hi_max
    lo, hi = lo_max, hi_max
    for _ in range(24):
        mid = 0.5 * (lo + hi)
        if certified(mid):
            lo = mid
        else:
            hi = mid
    return lo


def _gen_robust_queries(rng, min_layers, max_layers, min_width, max_width) -> list[tuple[Network, Query]]:
    """Reduced robustness queries, each provably UNSAT via symbolic bounds."""
    n_inputs = int(rng.integers(4, 7))
    n_outputs = int(rng.integers(2, 4))
    n_layers = int(rng.integers(min_layers, max_layers + 1))
    widths = [int(rng.integers(min_width, max_width + 1)) for _ in range(n_layers)]
    domain = (np.zeros(n_inputs), np.ones(n_inputs))
    net = _random_network(rng, n_inputs, widths, n_outputs, scale="normal", domain=domain)
    center = rng.uniform(0.1, 0.9, size=n_inputs)
    out = evaluate(net, center)
    order = np.argsort(out)
    if out[order[-1]] - out[order[-2]] < 1e-3:
        return []  # ambiguous classification; caller resamples
    label = int(order[-1])
    delta_max = _certified_radius(net, center, label)
    if delta_max is None:
        return []
    delta = float(rng.uniform(0.25, 0.75)) * delta_max
    spec = RobustnessSpec(net, center, delta, label)
    return [(rq.network, rq) for rq in reduce_to_single_output(spec)]


def generate_benchmarks(
    seed: int,
    count: int,
    out_dir,
    kind: str = "oracle",
    min_layers: int = 2,
    max_layers: int = 4,
    min_width: int = 10,
    max_width: int = 30,
) -> dict:
    """Write a deterministic suite of query files plus a manifest.

    ``oracle`` emits small single-output queries labeled by exhaustive
    enumeration (a mix of SAT and UNSAT); ``robust`` emits reduced
    robustness queries whose UNSAT labels are certified by symbolic bounds.
    """
    rng = np.random.default_rng(seed)
    os.makedirs(out_dir, exist_ok=True)
    entries = []
    pending: list[tuple[Network, Query, str | None, str | None]] = []
    guard = 0
    while len(pending) < count:
        guard += 1
        if guard > 100 * count:
            raise RuntimeError("benchmark generation failed to converge")
        if kind == "oracle":
            net, q, label = _gen_oracle_query(rng)
            pending.append((net, q, label, "exhaustive"))
        elif kind == "robust":
            for net, q in _gen_robust_queries(rng, min_layers, max_layers, min_width, max_width):
                pending.append((net, q, "UNSAT", "certified"))
        else:
            raise ValueError(f"unknown benchmark kind {kind!r}")

    for i, (net, q, label, source) in enumerate(pending[:count] if kind == "oracle" else pending):
        qid = f"q{i:04d}"
        qdir = os.path.join(out_dir, qid)
        os.makedirs(qdir, exist_ok=True)
        save_network(net, os.path.join(qdir, "net.json"))
        save_query(q, os.path.join(qdir, "query.json"))
        entries.append(
            {
                "id": qid,
                "net": f"{qid}/net.json",
                "query": f"{qid}/query.json",
                "label": label,
                "label_source": source,
                "hidden_sizes": net.hidden_sizes,
            }
        )
    manifest = {"kind": kind, "seed": seed, "count": len(entries), "queries": entries}
    with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=1)
        fh.write("\n")
    return manifest


def load_manifest(suite_dir) -> dict:
    path = os.path.join(suite_dir, "manifest.json")
    with open(path) as fh:
        return json.load(fh)


@dataclass(frozen=True)
class BenchmarkRecord:
    query_id: str
    mode: str
    verdict: str
    refinements: int
    iterations: int
    time_ms: float
    timeout: bool

    def row(self) -> list:
        return [
            self.query_id,
            self.mode,
            self.verdict,
            self.refinements,
            self.iterations,
            round(self.time_ms, 3),
            int(self.timeout),
        ]


def _bench_task(args) -> BenchmarkRecord:
    qid, net_path, query_path, mode, method, timeout, epsilon, refine_batch = args
    t0 = time.monotonic()
    try:
        q = load_query(query_path, load_network(net_path))
        verdict, stats = verify(
            q,
            mode,
            timeout=timeout,
            epsilon=epsilon,
            method=BoundMethod(method),
            refine_batch=refine_batch,
        )
        return BenchmarkRecord(
            qid,
            mode,
            verdict.status.value,
            stats.refinement_steps,
            stats.iterations,
            1000.0 * stats.total_time,
            verdict.status.value == "TIMEOUT",
        )
    except Exception:
        return BenchmarkRecord(qid, mode, "ERROR", 0, 0, 1000.0 * (time.monotonic() - t0), False)


def run_bench(
    suite_dir,
    modes,
    method: BoundMethod = BoundMethod.SBT,
    timeout: float = 60.0,
    jobs: int = 1,
    epsilon: float = DEFAULT_EPSILON,
    refine_batch: int = 1,
    out_csv=None,
) -> tuple[list[BenchmarkRecord], dict]:
    """Run every (query, mode) pair of a suite; returns records and a summary.

    Records come back sorted by query id then by the given mode order; the
    summary counts finished/timeout per mode and, for every mode pair,
    strict wins on time and on refinement count among commonly finished
    queries.
    """
    manifest = load_manifest(suite_dir)
    modes = list(modes)
    tasks = [
        (
            entry["id"],
            os.path.join(suite_dir, entry["net"]),
            os.path.join(suite_dir, entry["query"]),
            mode,
            method.value,
            timeout,
            epsilon,
            refine_batch,
        )
        for entry in manifest["queries"]
        for mode in modes
    ]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_bench_task, tasks, chunksize=1))
    else:
        records = [_bench_task(t) for t in tasks]
    order = {m: i for i, m in enumerate(modes)}
    records.sort(key=lambda r: (r.query_id, order[r.mode]))

    summary = {"modes": {}, "pairs": {}}
    by_mode = {m: {r.query_id: r for r in records if r.mode == m} for m in modes}
    for m in modes:
        rs = list(by_mode[m].values())
        summary["modes"][m] = {
            "finished": sum(r.verdict in ("SAT", "UNSAT") for r in rs),
            "timeouts": sum(r.timeout for r in rs),
            "errors": sum(r.verdict == "ERROR" for r in rs),
            "total_refinements": sum(r.refinements for r in rs if r.verdict in ("SAT", "UNSAT")),
        }
    for ma, mb in itertools.combinations(modes, 2):
        common = [
            qid
            for qid in by_mode[ma]
            if by_mode[ma][qid].verdict in ("SAT", "UNSAT")
            and by_mode[mb][qid].verdict in ("SAT", "UNSAT")
        ]
        summary["pairs"][f"{ma}_vs_{mb}"] = {
            "both_finished": len(common),
            f"{ma}_faster": sum(by_mode[ma][q].time_ms < by_mode[mb][q].time_ms for q in common),
            f"{mb}_faster": sum(by_mode[mb][q].time_ms < by_mode[ma][q].time_ms for q in common),
            f"{ma}_fewer_refinements": sum(
                by_mode[ma][q].refinements < by_mode[mb][q].refinements for q in common
            ),
            f"{mb}_fewer_refinements": sum(
                by_mode[mb][q].refinements < by_mode[ma][q].refinements for q in common
            ),
        }

    if out_csv is not None:
        write_records_csv(records, out_csv)
        with open(str(out_csv) + ".summary.json", "w") as fh:
            json.dump(summary, fh, indent=1)
            fh.write("\n")
    return records, summary


def write_records_csv(records, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for r in records:
            writer.writerow(r.row())
