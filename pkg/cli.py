"""
Command-line front end.

Subcommands: solve, member, decompose, trace, sample, info, demo. Reports go
to stdout, diagnostics to stderr. One --seed fixes every random draw.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np

import config
from decompose import (GeneralCoordinate, build_trace_homotopy, decompose, membership_test, sample_points,
                       trace_setup, trace_values, is_affine_linear, second_difference)
from example_systems import DEMOS
from exceptions import MultiregError
from models import RunConfig, SolveOptions, TrackerSettings, Verdict
from poly_core import PolynomialSystem, bezout_number, total_degree
from regeneration import multiregenerate, perturbed_solve
from rng import make_rng
from sysio import (format_point, format_report, parse_point, parse_slice_type, parse_system, read_archive,
                   write_archive, write_trace_csv)
from witness import LinearSlice, WitnessCollection, WitnessSet, format_multidegree, multidegree

logger = logging.getLogger(__name__)


# =============================================================================
# ARGUMENTS
# =============================================================================

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=config.DEFAULT_SEED, help="run seed")
    common.add_argument("--tol-track", type=float, help="corrector tolerance along paths")
    common.add_argument("--tol-final", type=float, help="residual tolerance at t=0")
    common.add_argument("--threads", type=int, help="worker processes for path batches")
    common.add_argument("--progress", action="store_true", help="show progress bars on stderr")
    common.add_argument("-v", "--verbose", action="count", default=0, help="more logging (repeatable)")

    parser = argparse.ArgumentParser(prog="mreg", description="Multiprojective witness sets and decomposition")
    commands = parser.add_subparsers(dest="command", required=True)

    solve = commands.add_parser("solve", parents=[common], help="witness sets of a .msys system")
    solve.add_argument("system", help=".msys input")
    solve.add_argument("--randomize", action="store_true", help="randomize the system first")
    solve.add_argument("--perturb", action="store_true", help="isolated solutions through a perturbation")
    solve.add_argument("--order", choices=("input", "degree"), default="input")
    solve.add_argument("--e", action="append", dest="slice_types", metavar="E",
                       help="final slice type to keep, e.g. 1,0 (repeatable)")
    solve.add_argument("--target-dim", type=int, help="only carry slice types that can reach this dimension")
    solve.add_argument("--report", choices=("table", "json"), default="table")
    solve.add_argument("--out", help="archive path (default: input with .mwit)")

    member = commands.add_parser("member", parents=[common], help="membership test for one point")
    member.add_argument("archive")
    member.add_argument("--point", required=True, help="e.g. '1,0,0;1,0,3'")

    dec = commands.add_parser("decompose", parents=[common], help="irreducible decomposition")
    dec.add_argument("archive")
    dec.add_argument("--loops", type=int, default=config.MONODROMY_LOOPS)
    dec.add_argument("--out", help="prefix for per-component archives")

    trace = commands.add_parser("trace", parents=[common], help="trace test on a subset of points")
    trace.add_argument("archive")
    trace.add_argument("--f", required=True, help="slice type of L^f, one below the dimension")
    trace.add_argument("--subset", help="comma-separated indices into the moved points (default all)")
    trace.add_argument("--csv", help="write t,re,im samples here")

    sample = commands.add_parser("sample", parents=[common], help="new points on a witnessed variety")
    sample.add_argument("archive")
    sample.add_argument("--e", required=True, help="slice type to sample from")
    sample.add_argument("--count", type=int, default=1)

    info = commands.add_parser("info", parents=[common], help="multidegree and provenance of an archive")
    info.add_argument("archive")

    commands.add_parser("demo", parents=[common], help="multidegrees of the built-in examples")
    return parser


def configure_logging(verbose: int) -> None:
    if verbose >= 2:
        level = logging.DEBUG
    elif verbose == 1:
        level = logging.INFO
    else:
        level = getattr(logging, config.LOG_LEVEL, logging.WARNING)
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")


def settings_from(args) -> TrackerSettings:
    return TrackerSettings.from_config(
        tol_track=args.tol_track,
        tol_final=args.tol_final,
        workers=args.threads,
        show_progress=True if args.progress else None,
    )


def _read(path: str) -> WitnessCollection:
    return read_archive(Path(path).read_text(encoding="utf-8"))


def _write(path: Path, collection: WitnessCollection) -> None:
    path.write_text(write_archive(collection), encoding="utf-8")
    logger.info("wrote %s", path)


def _bezout_lines(system: PolynomialSystem) -> dict:
    structure = system.structure
    if len(system) != sum(structure.projective_dims):
        return {}
    degrees = system.multidegrees()
    return {"bezout": bezout_number(degrees, structure), "total degree": total_degree(degrees)}


# =============================================================================
# COMMANDS
# =============================================================================

def cmd_solve(args) -> int:
    path = Path(args.system)
    system = parse_system(path.read_text(encoding="utf-8"))
    run = RunConfig(
        seed=args.seed, settings=settings_from(args), randomize=args.randomize, perturb=args.perturb,
        order=args.order,
        slice_types=[parse_slice_type(e, system.structure) for e in args.slice_types or []] or None,
        target_dimension=args.target_dim, input_path=str(path),
        output_path=args.out or str(path.with_suffix(".mwit")), report=args.report,
    )
    rng = make_rng(run.seed)
    options = SolveOptions(randomize=run.randomize, order=run.order, target_dimension=run.target_dimension,
                           slice_types=run.slice_types)
    extra = _bezout_lines(system)

    if run.perturb:
        result = perturbed_solve(system, options, run.settings, rng)
        empty = LinearSlice(system.structure, [np.zeros((0, size)) for size in system.structure.group_sizes])
        collection = WitnessCollection(result.system, result.chart, run.seed)
        if result.points:
            collection.add(WitnessSet(result.system, empty, result.chart, result.points,
                                      result.multiplicities, run.seed))
        collection.provenance = {"command": "solve --perturb", "paths": str(result.paths),
                                 "failures": str(result.failures)}
        reports = result.reports
        extra["clusters"] = ", ".join(f"{n}x{m}" for m, n in result.cluster_sizes().items()) or "none"
        failures = result.failures + sum(r.failures for r in reports)
    else:
        collection, reports = multiregenerate(system, options, run.settings, rng)
        collection.provenance["command"] = "solve"
        failures = sum(r.failures for r in reports)

    _write(Path(run.output_path), collection)
    sys.stdout.write(format_report(reports, run.report, collection, extra))
    if failures:
        logger.warning("%d path failures; rerun with another --seed or --randomize", failures)
        return config.EXIT_PATH_FAILURES
    return config.EXIT_OK


def cmd_member(args) -> int:
    collection = _read(args.archive)
    point = parse_point(args.point, collection.structure)
    result = membership_test(collection, point, settings_from(args), make_rng(args.seed))
    where = f" (slice type {result.slice_type})" if result.slice_type is not None else ""
    print(f"{result.verdict.value}{where}")
    for line in result.diagnostics:
        logger.info(line)
    if result.verdict is Verdict.MEMBER:
        return config.EXIT_OK
    if result.verdict is Verdict.NOT_MEMBER:
        return config.EXIT_NOT_MEMBER
    return config.EXIT_INCONCLUSIVE


def cmd_decompose(args) -> int:
    collection = _read(args.archive)
    settings = settings_from(args)
    rng = make_rng(args.seed)
    prefix = args.out or str(Path(args.archive).with_suffix(""))
    unresolved = 0
    index = 0
    for dimension, part in collection.by_dimension().items():
        partition = decompose(part, settings, rng, loops=args.loops)
        print("=" * 50)
        print(f"DIMENSION {dimension}: {len(partition.blocks)} components")
        print("=" * 50)
        for component, certified in zip(partition.components(), partition.certified):
            index += 1
            mark = "" if certified else "  (unresolved)"
            print(f"component {index}: {format_multidegree(multidegree(component))}{mark}")
            component.provenance["command"] = "decompose"
            _write(Path(f"{prefix}.component{index}.mwit"), component)
        unresolved += len(partition.unresolved)
    if unresolved:
        logger.warning("%d blocks could not be certified by the trace test", unresolved)
        return config.EXIT_PATH_FAILURES
    return config.EXIT_OK


def cmd_trace(args) -> int:
    collection = _read(args.archive).nonempty()
    structure = collection.structure
    settings = settings_from(args)
    rng = make_rng(args.seed)
    f = parse_slice_type(args.f, structure)
    setup = trace_setup(collection, f, rng, settings)
    indices = [int(v) for v in args.subset.split(",")] if args.subset else list(range(len(setup.points)))
    if any(not 0 <= j < len(setup.points) for j in indices):
        raise MultiregError(f"subset indices must lie in 0..{len(setup.points) - 1}")
    for j in indices:
        print(f"{j}: w^{setup.nodes[j][0]} point {setup.nodes[j][1]}")
    h = build_trace_homotopy(collection.system, setup.linear, [setup.segre], collection.chart, rng)
    rho = GeneralCoordinate.random(structure, rng)
    samples = trace_values([setup.points[j] for j in indices], h, rho, settings)
    linear = is_affine_linear(samples)
    print(f"{'linear' if linear else 'nonlinear'} (second difference {abs(second_difference(samples)):.3e})")
    if args.csv:
        Path(args.csv).write_text(write_trace_csv(samples), encoding="utf-8")
    if any(s.poisoned for s in samples):
        return config.EXIT_PATH_FAILURES
    return config.EXIT_OK


def cmd_sample(args) -> int:
    collection = _read(args.archive)
    e = parse_slice_type(args.e, collection.structure)
    if e not in collection.sets:
        raise MultiregError(f"archive has no witness set of type {e}")
    points = sample_points(collection.sets[e], args.count, make_rng(args.seed), settings_from(args))
    for point in points:
        print(format_point(collection.chart.normalize(point), collection.structure))
    return config.EXIT_OK


def cmd_info(args) -> int:
    collection = _read(args.archive)
    structure = collection.structure
    print("=" * 50)
    print(f"groups: {' x '.join(f'P^{n}' for n in structure.projective_dims)}")
    print(f"equations: {len(collection.system)}")
    print(f"seed: {collection.seed}")
    print(f"multidegree: {format_multidegree(multidegree(collection))}")
    for key, value in sorted(collection.provenance.items()):
        print(f"{key}: {value}")
    print("=" * 50)
    return config.EXIT_OK


def cmd_demo(args) -> int:
    settings = settings_from(args)
    for name, build in DEMOS.items():
        collection, reports = multiregenerate(build(), settings=settings, rng=make_rng(args.seed))
        print(f"{name}: {format_multidegree(multidegree(collection))}")
    return config.EXIT_OK


COMMANDS = {
    "solve": cmd_solve,
    "member": cmd_member,
    "decompose": cmd_decompose,
    "trace": cmd_trace,
    "sample": cmd_sample,
    "info": cmd_info,
    "demo": cmd_demo,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)
    try:
        return COMMANDS[args.command](args)
    except (MultiregError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return config.EXIT_STRUCTURAL
