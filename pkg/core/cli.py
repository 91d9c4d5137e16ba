"""Command-line front end: gen, dim, locdim, measure, ahlfors, oracle and verify."""

import argparse
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
from pydantic import ValidationError

from core.ahlfors import (
    default_test_sets,
    exponent_sandwich_check,
    fit_q_field,
    log_holder_certificate,
    nu_vs_lambda_qc,
    q_amenability_check,
    q_equals_dimloc_check,
    regularity_certificate,
)
from core.config_loader import ConfigLoader
from core.dimension import (
    estimate_dimension,
    global_from_local,
    local_dimension_field,
    semicontinuity_report,
)
from core.errors import LochausError
from core.local_measure import (
    absolute_continuity_probe,
    equivalence_ratio_local,
    local_hausdorff_measure,
    null_set_check,
)
from core.oracle import ORACLE_MAX_POINTS, covering_number, exhaustive_min_cover
from core.premeasure import ALL_SUBSETS_MAX_POINTS, premeasure_at_scale
from core.reports import dumps, format_table, write_csv, write_json
from core.space_io import (
    load_space_file,
    parse_id_list,
    read_field,
    read_weights,
    write_field,
    write_qfield,
    write_space,
    write_weights,
)
from core.spaces import generate
from core.verify import VerificationSuite, summary_rows
from models.config import AnalysisConfig
from models.generator import GeneratorKind, GeneratorSpec
from models.premeasure import CoveringClass, PremeasureSpec, SolveMode
from models.results import EstimateMethod, LocalDimensionField, MeasureEstimate, QField

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1


def _floats(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(',') if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got '{text}'")


def _window(text: str):
    values = _floats(text)
    if len(values) != 2:
        raise argparse.ArgumentTypeError(f"window needs 'lo,hi', got '{text}'")
    return tuple(values)


def _piece(text: str) -> GeneratorSpec:
    """``kind[:param]`` where param is the depth, or the point count for grids."""
    kind, _, param = text.partition(':')
    try:
        kind = GeneratorKind(kind)
    except ValueError:
        raise argparse.ArgumentTypeError(f"unknown piece kind '{kind}'")
    if kind in (GeneratorKind.GLUE, GeneratorKind.PRODUCT):
        raise argparse.ArgumentTypeError("pieces cannot themselves be glue or product")
    if not param:
        return GeneratorSpec(kind=kind)
    key = 'n' if kind == GeneratorKind.GRID else 'depth'
    try:
        return GeneratorSpec(kind=kind, **{key: int(param)})
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e))


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--config', type=Path, help='YAML or JSON file mirroring the flags; flags win')
    parser.add_argument('--threads', type=int, help='Worker threads (output does not depend on it)')
    parser.add_argument('--seed', type=int, help='Seed for randomised test sets')
    parser.add_argument('--out', type=Path, help='Output directory')


def _add_space(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--space', type=Path, required=True, help='Point table or distance matrix (CSV/JSON)')
    parser.add_argument('--metric', choices=['euclidean', 'manhattan', 'precomputed'], help='Metric for point tables')


def _add_solver(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--class', dest='covering_class', choices=[c.value for c in CoveringClass],
                        help='Cover family')
    parser.add_argument('--mode', choices=[m.value for m in SolveMode], help='Cover optimisation mode')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='lochaus',
        description='Hausdorff and local Hausdorff dimension and measure of finite metric samples',
    )
    parser.add_argument('-v', '--verbose', action='store_true', help='Debug logging')
    parser.add_argument('--log-file', type=Path, help='Also write the log to this file')
    sub = parser.add_subparsers(dest='command', required=True)

    gen = sub.add_parser('gen', help='Generate a fixture space, its measure and ground truth')
    gen.add_argument('--kind', choices=[k.value for k in GeneratorKind], required=True)
    gen.add_argument('--depth', type=int, default=6)
    gen.add_argument('--ratios', type=_floats, default=[1 / 3, 1 / 3])
    gen.add_argument('--n', type=int, default=257, help='Grid point count')
    gen.add_argument('--gap', type=float, default=2.0, help='Distance between glued pieces')
    gen.add_argument('--piece', type=_piece, action='append', default=[],
                     help='Piece for glue/product as kind[:depth or n]; repeat')
    gen.add_argument('--jitter', type=float, default=0.0)
    gen.add_argument('--seed', type=int, default=0)
    gen.add_argument('--out', type=Path, required=True)

    dim = sub.add_parser('dim', help='Global dimension estimate with its scaling profile')
    _add_space(dim)
    _add_solver(dim)
    _add_common(dim)
    dim.add_argument('--method', choices=[m.value for m in EstimateMethod], default=EstimateMethod.CRITICAL_EXPONENT.value)
    dim.add_argument('--s-grid', type=_floats)
    dim.add_argument('--deltas', type=_floats)
    dim.add_argument('--set', help='Comma-separated point ids (default: whole space)')

    locdim = sub.add_parser('locdim', help='Per-point local dimension field')
    _add_space(locdim)
    _add_solver(locdim)
    _add_common(locdim)
    locdim.add_argument('--k-min', type=int)
    locdim.add_argument('--n-radii', type=int)
    locdim.add_argument('--tolerance', type=float, help='Semicontinuity tolerance')

    measure = sub.add_parser('measure', help='Premeasure of a set at one scale')
    _add_space(measure)
    _add_solver(measure)
    _add_common(measure)
    measure.add_argument('--delta', type=float, required=True)
    measure.add_argument('--set', help='Comma-separated point ids (default: whole space)')
    gauge = measure.add_mutually_exclusive_group(required=True)
    gauge.add_argument('--s', type=float, help='Constant exponent')
    gauge.add_argument('--field', type=Path, help='Local dimension field CSV from locdim')
    measure.add_argument('--checks', action='store_true',
                         help='Add the local equivalence and absolute continuity probes')

    ahlfors = sub.add_parser('ahlfors', help='Q field, regularity and log-Hoelder certificates')
    _add_space(ahlfors)
    _add_common(ahlfors)
    ahlfors.add_argument('--weights', type=Path, required=True, help='id,weight CSV')
    ahlfors.add_argument('--window', type=_window, help='Radius window lo,hi')
    q = ahlfors.add_mutually_exclusive_group()
    q.add_argument('--q-const', type=float, help='Constant exponent instead of a fit')
    q.add_argument('--q-fit', action='store_true', help='Fit the exponent field (default)')
    ahlfors.add_argument('--field', type=Path, help='Local dimension field CSV; computed when absent')
    ahlfors.add_argument('--c-threshold', type=float)
    ahlfors.add_argument('--lh-threshold', type=float)
    ahlfors.add_argument('--tolerance', type=float)
    ahlfors.add_argument('--k-min', type=int)

    oracle = sub.add_parser('oracle', help='Re-check a cover cost or covering number by brute force')
    _add_space(oracle)
    _add_solver(oracle)
    _add_common(oracle)
    oracle.add_argument('--delta', type=float, required=True)
    oracle.add_argument('--s', type=float, default=1.0)
    oracle.add_argument('--set', help='Comma-separated point ids (default: whole space)')
    oracle.add_argument('--exhaustive', action='store_true', help='Compare against the exhaustive search')
    oracle.add_argument('--count', action='store_true', help='Covering number instead of cover cost')

    verify = sub.add_parser('verify', help='Run the property suite on generated fixtures')
    _add_common(verify)
    verify.add_argument('--quick', action='store_true', default=None)
    verify.add_argument('--tolerance', type=float)
    verify.add_argument('--k-min', type=int)
    return parser


def resolve_config(args: argparse.Namespace) -> AnalysisConfig:
    """Config file values overridden by explicit flags."""
    loader = ConfigLoader()
    if getattr(args, 'config', None):
        if loader.load(args.config) is None:
            raise LochausError("\n".join(loader.get_errors()))
    overrides = {name: getattr(args, name) for name in AnalysisConfig.model_fields if hasattr(args, name)}
    return loader.merge(overrides)


def _emit(data: Any, out: Optional[Path], name: str) -> None:
    print(dumps(data), end='')
    if out is not None:
        write_json(out / name, data)


def _load(args: argparse.Namespace, config: AnalysisConfig):
    return load_space_file(args.space, metric=config.metric.value)


def cmd_gen(args: argparse.Namespace) -> int:
    spec = GeneratorSpec(kind=args.kind, depth=args.depth, ratios=args.ratios, n=args.n, gap=args.gap,
                         pieces=args.piece, seed=args.seed, jitter=args.jitter)
    space, measure, truth = generate(spec)
    write_space(args.out / 'space.csv', space)
    write_weights(args.out / 'weights.csv', space, measure)
    write_json(args.out / 'truth.json', truth)
    print(f"{space.n} points, dimension {truth.dimension:.12g} -> {args.out}")
    return EXIT_OK


def cmd_dim(args: argparse.Namespace, config: AnalysisConfig) -> int:
    space = _load(args, config)
    target = parse_id_list(space, args.set)
    estimate = estimate_dimension(space, target, config.s_grid, config.deltas, config.covering_class,
                                  config.mode, config.threads, EstimateMethod(args.method))
    _emit(estimate, args.out, 'estimate.json')
    if args.out is not None and estimate.profile is not None:
        write_csv(args.out / 'profile.csv', ['s', 'delta', 'cost'], estimate.profile.to_rows())
    return EXIT_OK


def cmd_locdim(args: argparse.Namespace, config: AnalysisConfig) -> int:
    space = _load(args, config)
    field = local_dimension_field(space, config.k_min, config.n_radii, config.covering_class,
                                  config.mode, config.threads)
    rows = semicontinuity_report(field, space, config.tolerance, config.k_min)
    summary = {
        "points": space.n,
        "global_from_local": global_from_local(field),
        "flagged": int(field.flagged.sum()),
        "semicontinuity_violations": [r.index for r in rows if r.violation],
    }
    _emit(summary, args.out, 'locdim.json')
    if args.out is not None:
        write_field(args.out / 'field.csv', space, field)
    return EXIT_OK


def _probe_report(space, target: int, field: LocalDimensionField) -> Dict[str, Any]:
    d0 = global_from_local(field)
    report: Dict[str, Any] = {"d0": d0, "normalized": True}
    if space.n <= ALL_SUBSETS_MAX_POINTS:
        eq = equivalence_ratio_local(space, target, field)
        report["equivalence"] = {
            "bound": eq.bound,
            "pass": eq.passed,
            "rows": [{"delta": r.delta, "H_loc": r.h_loc, "lambda_loc": r.lambda_loc_same,
                      "lambda_loc_4delta": r.lambda_loc_4delta, "ratio": r.ratio, "pass": r.passed}
                     for r in eq.rows],
        }
    probes = absolute_continuity_probe(space, [("set", target)], d0, field)
    probes.append(null_set_check(space, field, d0))
    report["probes"] = probes
    return report


def cmd_measure(args: argparse.Namespace, config: AnalysisConfig) -> int:
    space = _load(args, config)
    target = parse_id_list(space, args.set)
    # exact unless a flag or config file asks otherwise
    mode = config.mode if args.mode is not None or args.config else SolveMode.EXACT
    if args.field is not None:
        field = read_field(args.field, space)
        estimate = local_hausdorff_measure(space, target, field, args.delta, config.covering_class, mode)
        data: Dict[str, Any] = {"estimate": estimate}
        if args.checks:
            data.update(_probe_report(space, target, field))
    else:
        spec = PremeasureSpec.constant(args.s)
        value = premeasure_at_scale(space, target, spec, args.delta, config.covering_class, mode)
        data = {"estimate": MeasureEstimate(set_mask=target, value=value, delta_used=args.delta,
                                            covering_class=config.covering_class, spec=spec, mode=mode)}
    _emit(data, args.out, 'measure.json')
    return EXIT_OK


def cmd_ahlfors(args: argparse.Namespace, config: AnalysisConfig) -> int:
    space = _load(args, config)
    measure = read_weights(args.weights, space)
    fitted = fit_q_field(space, measure, window=config.window, threads=config.threads)
    q = fitted if config.q_const is None else np.full(space.n, config.q_const)
    if args.field is not None:
        field = read_field(args.field, space)
    else:
        field = local_dimension_field(space, config.k_min, config.n_radii, threads=config.threads)
    matched = q
    if args.field is None and config.q_const is None:
        matched = fit_q_field(space, measure, threads=config.threads, schedule=field.radii)
    regularity = regularity_certificate(space, measure, q, window=fitted.window, threshold=config.c_threshold)
    log_holder = log_holder_certificate(space, q, config.lh_threshold, regularity=regularity,
                                        threads=config.threads)
    sets = default_test_sets(space, fitted.radii, seed=config.seed)
    data = {
        "window": fitted.window,
        "q_source": "fit" if config.q_const is None else "constant",
        "regularity": regularity,
        "log_holder": log_holder,
        "q_equals_dimloc": q_equals_dimloc_check(matched, field, config.tolerance),
        "nu_vs_lambda": nu_vs_lambda_qc(space, measure, q, regularity, sets),
        "sandwich": exponent_sandwich_check(space, q, log_holder.C_lh),
        "amenability": q_amenability_check(space, q),
    }
    _emit(data, args.out, 'certificates.json')
    if args.out is not None:
        shown = fitted if config.q_const is None else QField(
            values=q, stderr=np.zeros(space.n), window=fitted.window, radii=fitted.radii,
            flagged=np.zeros(space.n, dtype=bool))
        write_qfield(args.out / 'qfield.csv', space, shown, field.values)
    return EXIT_OK


def cmd_oracle(args: argparse.Namespace, config: AnalysisConfig) -> int:
    space = _load(args, config)
    target = parse_id_list(space, args.set)
    if args.count:
        count, exact = covering_number(space, target, args.delta)
        _emit({"delta": args.delta, "covering_number": count, "exact": exact}, args.out, 'oracle.json')
        return EXIT_OK
    spec = PremeasureSpec.constant(args.s)
    solved = premeasure_at_scale(space, target, spec, args.delta, config.covering_class, SolveMode.EXACT)
    data: Dict[str, Any] = {"delta": args.delta, "s": args.s, "covering_class": config.covering_class,
                            "exact": solved}
    status = EXIT_OK
    if args.exhaustive:
        if target.bit_count() > ORACLE_MAX_POINTS:
            raise LochausError(f"--exhaustive needs at most {ORACLE_MAX_POINTS} target points")
        brute = exhaustive_min_cover(space, target, spec, args.delta, config.covering_class)
        agree = abs(brute - solved) <= 1e-12 * max(1.0, brute)
        data.update({"exhaustive": brute, "agree": agree})
        status = EXIT_OK if agree else EXIT_FAILED
    _emit(data, args.out, 'oracle.json')
    return status


def cmd_verify(args: argparse.Namespace, config: AnalysisConfig) -> int:
    suite = VerificationSuite(quick=config.quick, threads=config.threads, tolerance=config.tolerance,
                              seed=config.seed, k_min=config.k_min)
    report = suite.run()
    print(format_table(['result', 'property', 'fixture', 'value'], summary_rows(report)))
    print(f"\n{sum(r.passed for r in report.rows)}/{len(report.rows)} properties pass")
    if args.out is not None:
        write_json(args.out / 'verify.json', report)
    return EXIT_OK if report.passed else EXIT_FAILED


COMMANDS = {
    'dim': cmd_dim,
    'locdim': cmd_locdim,
    'measure': cmd_measure,
    'ahlfors': cmd_ahlfors,
    'oracle': cmd_oracle,
    'verify': cmd_verify,
}


def run(argv: Optional[List[str]] = None) -> int:
    """
    Parse ``argv`` and run one subcommand.

    Returns:
        0 on success, 1 on validation errors or failed checks, 2 on usage errors
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        if args.command == 'gen':
            return cmd_gen(args)
        config = resolve_config(args)
        return COMMANDS[args.command](args, config)
    except ValidationError as e:
        lines = [f"{' -> '.join(str(loc) for loc in err['loc'])}: {err['msg']}" for err in e.errors()]
        logger.error("invalid input:\n  " + "\n  ".join(lines))
        return EXIT_FAILED
    except (LochausError, ValueError, FileNotFoundError) as e:
        logger.error(f"{args.command}: {e}")
        return EXIT_FAILED
