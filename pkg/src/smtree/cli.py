"""Command-line harness: data generation, tree building, benchmarks, churn.

Exit codes: 0 success, 2 usage error, 3 integrity violation.
"""

from __future__ import annotations

import argparse
import os
import sys

from .bench import churn_build, run_benchmark, write_csv
from .datagen import KINDS, GenSpec, export_csv, generate, load_dataset, save_dataset
from .pagestore import PageConfig
from .tree import Tree
from .verify import structure_stats, verify_tree

USAGE_ERROR = 2
INTEGRITY_ERROR = 3


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {value}")
    return value


def _nonnegative_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be non-negative, got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="smtree",
        description="Build, query, and benchmark paged metric trees.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a synthetic dataset file")
    gen.add_argument("--kind", choices=KINDS, required=True)
    gen.add_argument("--count", type=_positive_int, required=True)
    gen.add_argument("--dims", type=_positive_int, default=20)
    gen.add_argument("--seed", type=_nonnegative_int, default=0, help="RNG seed")
    gen.add_argument("--seed-count", type=_positive_int, default=50,
                     help="cluster seed points (clustered kind)")
    gen.add_argument("--amplitude", type=float, default=0.1,
                     help="cluster spread (clustered kind)")
    gen.add_argument("--exponent", type=_positive_int, default=3,
                     help="component exponent (polynomial kind)")
    gen.add_argument("--out", required=True)
    gen.add_argument("--csv", help="also export the rows as CSV")
    gen.set_defaults(func=cmd_generate)

    build = sub.add_parser("build", help="build a tree from a dataset file")
    build.add_argument("--data", required=True)
    build.add_argument("--variant", choices=("sm", "classic"), default="sm")
    build.add_argument("--dims", type=_positive_int, default=None,
                       help="metric dimensions (default: all stored dimensions)")
    build.add_argument("--page-bytes", type=_positive_int, default=4096)
    build.add_argument("--out", required=True)
    build.set_defaults(func=cmd_build)

    bench = sub.add_parser("bench", help="run the query benchmark suite")
    bench.add_argument("--store", action="append", required=True,
                       help="tree store file (repeatable)")
    bench.add_argument("--data", required=True,
                       help="dataset the tree(s) were built from")
    bench.add_argument("--queries", type=_positive_int, default=100)
    bench.add_argument("--ks", type=_positive_int, nargs="+", default=(1, 10, 50))
    bench.add_argument("--query-seed", type=_nonnegative_int, default=20_040_101)
    bench.add_argument("--out", help="CSV output path (default: stdout)")
    bench.set_defaults(func=cmd_bench)

    churn = sub.add_parser(
        "churn", help="insert a whole dataset, then delete all but the first half"
    )
    churn.add_argument("--data", required=True)
    churn.add_argument("--keep", type=_positive_int, default=None,
                       help="surviving object count (default: half the dataset)")
    churn.add_argument("--dims", type=_positive_int, default=None)
    churn.add_argument("--page-bytes", type=_positive_int, default=4096)
    churn.add_argument("--delete-seed", type=_nonnegative_int, default=0)
    churn.add_argument("--interleave", action="store_true",
                       help="alternate inserts and deletes instead of insert-all-then-delete")
    churn.add_argument("--verify-sample", type=float, default=0.01,
                       help="probability of a full invariant check after each mutation")
    churn.add_argument("--out", required=True)
    churn.set_defaults(func=cmd_churn)

    stats = sub.add_parser("stats", help="print structure statistics for a store")
    stats.add_argument("--store", required=True)
    stats.set_defaults(func=cmd_stats)
    return parser


def cmd_generate(args) -> int:
    spec = GenSpec(
        kind=args.kind,
        count=args.count,
        dims=args.dims,
        seed_count=args.seed_count,
        amplitude=args.amplitude,
        exponent=args.exponent,
        rng_seed=args.seed,
    )
    objects = generate(spec)
    save_dataset(args.out, objects, spec)
    if args.csv:
        export_csv(args.csv, objects)
    print(f"wrote {len(objects)} objects (kind={spec.kind}, dims={spec.dims}, "
          f"seed={spec.rng_seed}) to {args.out}")
    return 0


def cmd_build(args) -> int:
    objects, spec = load_dataset(args.data)
    config = PageConfig(page_bytes=args.page_bytes, dim=spec.dims)
    tree = Tree.from_objects(objects, config, args.variant, args.dims)
    stats = structure_stats(tree)
    print(stats.report())
    print(f"distance evals   {tree.counter.count}")
    report = verify_tree(tree)
    blocking = report.blocking(tree.variant)
    if blocking:
        print(f"INTEGRITY: {len(blocking)} violation(s)", file=sys.stderr)
        for v in blocking[:20]:
            print(f"  {v}", file=sys.stderr)
        return INTEGRITY_ERROR
    tree.save(args.out)
    print(f"saved {args.variant} tree ({tree.metric_config.active_dims} metric dims) "
          f"to {args.out}")
    return 0


def cmd_bench(args) -> int:
    for path in args.store + [args.data]:
        if not os.path.exists(path):
            print(f"error: no such file: {path}", file=sys.stderr)
            return USAGE_ERROR
    objects, spec = load_dataset(args.data)
    rows = []
    for path in args.store:
        tree = Tree.load(path)
        rows.extend(
            run_benchmark(tree, objects, spec, tuple(args.ks), args.queries,
                          args.query_seed)
        )
    if args.out:
        with open(args.out, "w", newline="") as fh:
            write_csv(rows, fh)
    else:
        write_csv(rows, sys.stdout)
    return 0


def cmd_churn(args) -> int:
    objects, spec = load_dataset(args.data)
    config = PageConfig(page_bytes=args.page_bytes, dim=spec.dims)
    tree, report = churn_build(
        objects,
        keep=args.keep,
        config=config,
        active_dims=args.dims,
        delete_seed=args.delete_seed,
        interleave=args.interleave,
        verify_sample=args.verify_sample,
    )
    print(f"inserted {report.inserted}, deleted {report.deleted} "
          f"({report.delete_misses} misses), verified {report.verifications} time(s)")
    print(report.stats.report())
    if report.violations or report.delete_misses:
        print(f"INTEGRITY: {len(report.violations)} violation(s), "
              f"{report.delete_misses} failed delete(s)", file=sys.stderr)
        for v in report.violations[:20]:
            print(f"  {v}", file=sys.stderr)
        return INTEGRITY_ERROR
    tree.save(args.out)
    print(f"saved churned tree to {args.out}")
    return 0


def cmd_stats(args) -> int:
    if not os.path.exists(args.store):
        print(f"error: no such file: {args.store}", file=sys.stderr)
        return USAGE_ERROR
    tree = Tree.load(args.store)
    print(f"variant          {tree.variant}")
    print(f"metric dims      {tree.metric_config.active_dims}")
    print(structure_stats(tree).report())
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


def run() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    run()
