"""Command-line interface: verify a single query, generate benchmark
suites, and run batch comparisons.

Exit codes: 0 completed with a verdict, 1 usage or input-file error,
2 internal error, 124 timeout (single-query mode).
"""

from __future__ import annotations

import argparse
import json
import sys
import traceback

from .bounds import BoundMethod
from .formats import FormatError, load_network, load_query
from .harness import generate_benchmarks, run_bench
from .loop import verify
from .network import ValidationError
from .solver import DEFAULT_EPSILON

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INTERNAL = 2
EXIT_TIMEOUT = 124


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _build_parser() -> _Parser:
    parser = _Parser(prog="reluverify", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    pv = sub.add_parser("verify", help="decide one query")
    pv.add_argument("--net", required=True, help="network file (.json or .nnet)")
    pv.add_argument("--prop", required=True, help="query file (JSON box + threshold)")
    pv.add_argument("--mode", default="cegarette", choices=["direct", "cegar", "cegarette"])
    pv.add_argument("--bounds", default="sbt", choices=["ibp", "sbt"])
    pv.add_argument("--timeout", type=float, default=None, help="seconds")
    pv.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    pv.add_argument("--refine-batch", type=int, default=1, help="splits per refinement")
    pv.add_argument("--out", default=None, help="write verdict + stats as JSON")

    pb = sub.add_parser("bench", help="run a suite over several modes")
    pb.add_argument("--suite", required=True, help="directory with manifest.json")
    pb.add_argument("--modes", default="cegar,cegarette", help="comma separated")
    pb.add_argument("--bounds", default="sbt", choices=["ibp", "sbt"])
    pb.add_argument("--timeout", type=float, default=60.0)
    pb.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    pb.add_argument("--refine-batch", type=int, default=1)
    pb.add_argument("--jobs", type=int, default=1)
    pb.add_argument("--out", required=True, help="CSV output path")

    pg = sub.add_parser("gen", help="generate a benchmark suite")
    pg.add_argument("--seed", type=int, required=True)
    pg.add_argument("--count", type=int, required=True)
    pg.add_argument("--out", required=True, help="suite directory")
    pg.add_argument("--kind", default="oracle", choices=["oracle", "robust"])
    pg.add_argument("--min-layers", type=int, default=2)
    pg.add_argument("--max-layers", type=int, default=4)
    pg.add_argument("--min-width", type=int, default=10)
    pg.add_argument("--max-width", type=int, default=30)
    return parser


def _cmd_verify(args) -> int:
    q = load_query(args.prop, load_network(args.net))
    verdict, stats = verify(
        q,
        args.mode,
        timeout=args.timeout,
        epsilon=args.epsilon,
        method=BoundMethod(args.bounds),
        refine_batch=args.refine_batch,
    )
    doc = {"verdict": verdict.to_dict(), "stats": stats.to_dict()}
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(doc, fh, indent=1)
            fh.write("\n")
    print(f"verdict: {verdict.status.value}")
    if verdict.witness is not None:
        print(f"witness: {verdict.witness.tolist()}")
    print(
        f"iterations: {stats.iterations}  refinements: {stats.refinement_steps}  "
        f"time: {stats.total_time:.3f}s  nodes: {stats.solver_nodes}"
    )
    return EXIT_TIMEOUT if verdict.status.value == "TIMEOUT" else EXIT_OK


def _cmd_bench(args) -> int:
    modes = [m.strip() for m in args.modes.split(",") if m.strip()]
    records, summary = run_bench(
        args.suite,
        modes,
        method=BoundMethod(args.bounds),
        timeout=args.timeout,
        jobs=args.jobs,
        epsilon=args.epsilon,
        refine_batch=args.refine_batch,
        out_csv=args.out,
    )
    print(json.dumps(summary, indent=1))
    print(f"wrote {len(records)} records to {args.out}")
    return EXIT_OK


def _cmd_gen(args) -> int:
    manifest = generate_benchmarks(
        args.seed,
        args.count,
        args.out,
        kind=args.kind,
        min_layers=args.min_layers,
        max_layers=args.max_layers,
        min_width=args.min_width,
        max_width=args.max_width,
    )
    print(f"wrote {manifest['count']} queries to {args.out}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "verify":
            code = _cmd_verify(args)
        elif args.command == "bench":
            code = _cmd_bench(args)
        else:
            code = _cmd_gen(args)
    except (FormatError, ValidationError, FileNotFoundError, IsADirectoryError) as e:
        print(f"reluverify: {e}", file=sys.stderr)
        return EXIT_USAGE
    except Exception:
        traceback.print_exc()
        return EXIT_INTERNAL
    return code


if __name__ == "__main__":
    sys.exit(main())
