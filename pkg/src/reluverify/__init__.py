"""Verification of feed-forward ReLU networks, with joint abstraction of the
network (neuron merging) and of the output property (bound-derived
threshold tightening)."""

from .abstraction import (
    AbstractionState,
    CannotRefineError,
    abstract_to_saturation,
    identity_state,
    merge_pair,
    refine_split,
)
from .bounds import BoundMethod, BoundsMap, SymbolicBoundsMap, ibp, output_gap, sbt
from .categorize import Category, CategorizedNetwork, Direction, Sign, preprocess
from .formats import (
    FormatError,
    load_network,
    load_query,
    save_network,
    save_query,
)
from .harness import (
    BenchmarkRecord,
    RobustnessSpec,
    exhaustive_verdict,
    generate_benchmarks,
    reduce_to_single_output,
    run_bench,
)
from .loop import RunStats, verify, verify_cegar, verify_cegarette, verify_direct
from .network import (
    InputBox,
    Layer,
    Network,
    OutputProperty,
    Query,
    ValidationError,
    evaluate,
)
from .solver import Status, Verdict, solve
from .tightening import tighten_property

__version__ = "0.1.0"

__all__ = [
    "AbstractionState",
    "BenchmarkRecord",
    "BoundMethod",
    "BoundsMap",
    "CannotRefineError",
    "Category",
    "CategorizedNetwork",
    "Direction",
    "FormatError",
    "InputBox",
    "Layer",
    "Network",
    "OutputProperty",
    "Query",
    "RobustnessSpec",
    "RunStats",
    "Sign",
    "Status",
    "SymbolicBoundsMap",
    "ValidationError",
    "Verdict",
    "abstract_to_saturation",
    "evaluate",
    "exhaustive_verdict",
    "generate_benchmarks",
    "ibp",
    "identity_state",
    "load_network",
    "load_query",
    "merge_pair",
    "output_gap",
    "preprocess",
    "reduce_to_single_output",
    "refine_split",
    "run_bench",
    "save_network",
    "save_query",
    "sbt",
    "solve",
    "tighten_property",
    "verify",
    "verify_cegar",
    "verify_cegarette",
    "verify_direct",
]
