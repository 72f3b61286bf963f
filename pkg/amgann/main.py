"""
Command line entry point.

Every pipeline stage is a subcommand: corpus generation, splitting, training,
prediction, theta selection, solving, benchmarking and the corpus analysis.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

import pandas as pd
from pydantic import ValidationError

from amgann import __version__
from amgann.constants import (
    DEFAULT_N_MAX, DEFAULT_NORMALIZATION, DEFAULT_NU1, DEFAULT_NU2, DEFAULT_TOL, LOG_DATE_FORMAT,
    LOG_FORMAT, LOG_LEVEL, VIEW_SIZE,
)
from amgann.dataset.analysis import export_figures, least_squares_by_level
from amgann.dataset.corpus import export_csv, read_corpus, write_corpus
from amgann.dataset.generator import generate_dataset1, generate_dataset2, timing_benchmark
from amgann.exceptions import AmgAnnError, ContractViolation
from amgann.fem.assembly import assemble, l2_error
from amgann.fem.problem import PatternKind, ProblemSpec
from amgann.linalg.sparse_core import csr_to_coo
from amgann.ml.config.settings import DEFAULT_ARCHITECTURE, MAX_EPOCHS, PATIENCE, RANDOM_STATE
from amgann.ml.models.network import SurrogateModel
from amgann.ml.train import run_training
from amgann.ml.utils.data_loader import split, split_dataset3
from amgann.ml.utils.pooling import NormalizationMode, view_of
from amgann.pipeline import ann_amg_solve, select_theta
from amgann.utils import cells_from_level, parse_theta_grid, sanitize_json

logger = logging.getLogger("amgann")


def _emit(payload: Dict[str, Any], out: Optional[Path] = None) -> None:
    text = json.dumps(sanitize_json(payload), indent=2, sort_keys=True)
    if out is not None:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text + "\n")
        logger.info(f"Wrote {out}")
    else:
        print(text)


def _problem(args: argparse.Namespace) -> ProblemSpec:
    cells = args.cells if args.cells is not None else cells_from_level(args.level)
    return ProblemSpec.build(args.pattern, cells, epsilon=args.epsilon, epsilons=args.epsilons)


def _load_model(args: argparse.Namespace) -> SurrogateModel:
    model = SurrogateModel.load(args.model)
    if args.m is not None and args.m != model.m:
        raise ContractViolation(f"model was trained on {model.m}x{model.m} views, not m={args.m}")
    if args.mode is not None and NormalizationMode(args.mode).value != model.mode:
        raise ContractViolation(f"model was trained with mode {model.mode}, not {args.mode}")
    return model


def _levels(value: Optional[str]) -> Optional[List[int]]:
    if value is None:
        return None
    return [int(part) for part in value.split(",") if part.strip()]


def cmd_generate(args: argparse.Namespace) -> int:
    thetas = parse_theta_grid(args.theta_grid) if args.theta_grid else None
    generate = generate_dataset1 if args.dataset == "ds1" else generate_dataset2
    generate(args.out, full=args.full, thetas=thetas, levels=_levels(args.levels),
             m=args.m or VIEW_SIZE, timing=not args.no_timing, n_jobs=args.jobs)
    return 0


def cmd_split(args: argparse.Namespace) -> int:
    first = read_corpus(args.corpus)
    if args.corpus2 is not None:
        parts = split_dataset3(first, read_corpus(args.corpus2), seed=args.seed)
    else:
        parts = split(first, seed=args.seed)
    args.out.mkdir(parents=True, exist_ok=True)
    for name, part in zip(("train", "val", "test"), parts):
        written = write_corpus(args.out / f"{name}.amgs", part)
        logger.info(f"{name}: {written} samples")
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    scores = run_training(
        corpus=args.corpus, second=args.corpus2, split_dir=args.split_dir, out=args.out,
        architecture=args.arch, mode=args.mode or DEFAULT_NORMALIZATION, m=args.m or VIEW_SIZE,
        seed=args.seed, max_epochs=args.epochs, patience=args.patience,
    )
    _emit(scores)
    return 0


def cmd_predict(args: argparse.Namespace) -> int:
    model = _load_model(args)
    problem = _problem(args)
    a, _ = assemble(problem)
    view = view_of(csr_to_coo(a), model.m, model.mode)
    rho = model.predict(view.values, problem.mesh.level, args.theta)
    _emit({"problem": problem.to_record(), "theta": args.theta, "rho_predicted": rho}, args.out)
    return 0


def cmd_select_theta(args: argparse.Namespace) -> int:
    model = _load_model(args)
    problem = _problem(args)
    a, _ = assemble(problem)
    view = view_of(csr_to_coo(a), model.m, model.mode)
    selection = select_theta(model, view.values, problem.mesh.level, parse_theta_grid(args.theta_grid))
    _emit({"problem": problem.to_record(), **selection.model_dump()}, args.out)
    return 0


def cmd_solve(args: argparse.Namespace) -> int:
    if args.theta is None and args.model is None:
        raise ContractViolation("solve needs --model or --theta")
    model = _load_model(args) if args.theta is None else None
    problem = _problem(args)
    grid = parse_theta_grid(args.theta_grid) if args.theta_grid else None
    u, report, selection = ann_amg_solve(problem, model, grid, nu1=args.nu1, nu2=args.nu2,
                                         n_max=args.n_max, tol=args.tol, theta=args.theta)
    if not report.converged:
        logger.warning(f"PCG stopped after {report.iterations} iterations without reaching tol={args.tol}")
    _emit({
        "problem": problem.to_record(),
        "selection": selection.model_dump(),
        "report": report.to_record(include_history=args.history),
        "l2_error": l2_error(problem, u),
    }, args.out)
    return 0


def cmd_benchmark(args: argparse.Namespace) -> int:
    problem = _problem(args)
    rows = timing_benchmark(problem, parse_theta_grid(args.theta_grid), repetitions=args.repetitions,
                            nu1=args.nu1, nu2=args.nu2, tol=args.tol, n_max=args.n_max)
    frame = pd.DataFrame(rows)
    if args.out is not None:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(args.out, index=False)
        logger.info(f"Wrote {args.out}")
    else:
        print(frame.to_string(index=False))
    return 0


def cmd_analyze(args: argparse.Namespace) -> int:
    samples = read_corpus(args.corpus)
    reports = least_squares_by_level(samples)
    if args.csv is not None:
        export_csv(samples, args.csv)
    _emit({"samples": len(samples), "levels": {k: r.model_dump() for k, r in reports.items()}}, args.out)
    return 0


def cmd_export_figures(args: argparse.Namespace) -> int:
    samples = read_corpus(args.corpus)
    model = _load_model(args) if args.model is not None else None
    export_figures(samples, args.out, model=model)
    return 0


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    common.add_argument("--seed", type=int, default=RANDOM_STATE, help="Random seed")
    common.add_argument("--m", type=int, default=None, help=f"View size (default {VIEW_SIZE})")
    common.add_argument("--mode", choices=[mode.value for mode in NormalizationMode], default=None,
                        help=f"View normalization (default {DEFAULT_NORMALIZATION})")
    common.add_argument("--theta-grid", default=None, help='Theta grid, "lo:hi:count" or a comma list')
    return common


def _problem_parser() -> argparse.ArgumentParser:
    problem = argparse.ArgumentParser(add_help=False)
    problem.add_argument("--pattern", choices=[kind.value for kind in PatternKind], required=True)
    size = problem.add_mutually_exclusive_group(required=True)
    size.add_argument("--cells", type=int, help="Cells per side N (a power of two)")
    size.add_argument("--level", type=int, help="Mesh level k, N = 2^k")
    exponent = problem.add_mutually_exclusive_group(required=True)
    exponent.add_argument("--epsilon", type=float, help="Single exponent, white tiles get 10^epsilon")
    exponent.add_argument("--epsilons", type=float, nargs=2, metavar=("E1", "E2"),
                          help="Exponent pair, white tiles 10^E1 and gray tiles 10^E2")
    return problem


def _solver_parser() -> argparse.ArgumentParser:
    solver = argparse.ArgumentParser(add_help=False)
    solver.add_argument("--nu1", type=int, default=DEFAULT_NU1, help="Pre-smoothing sweeps")
    solver.add_argument("--nu2", type=int, default=DEFAULT_NU2, help="Post-smoothing sweeps")
    solver.add_argument("--tol", type=float, default=DEFAULT_TOL, help="Relative residual tolerance")
    solver.add_argument("--n-max", type=int, default=DEFAULT_N_MAX, help="Iteration cap")
    return solver


def build_parser() -> argparse.ArgumentParser:
    common, problem, solver = _common_parser(), _problem_parser(), _solver_parser()
    parser = argparse.ArgumentParser(
        prog="amgann", description="Surrogate-tuned two-level AMG for heterogeneous diffusion problems")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("generate", parents=[common], help="Generate a training corpus")
    p.add_argument("dataset", choices=["ds1", "ds2"])
    p.add_argument("--out", type=Path, required=True, help="Corpus file, appended to when it exists")
    p.add_argument("--full", action="store_true", help="Mesh levels up to k = 10 (levels with fewer than m unknowns are skipped)")
    p.add_argument("--levels", default=None, help="Comma list of mesh levels, overrides --full")
    p.add_argument("--no-timing", action="store_true", help="Skip the timed repetitions")
    p.add_argument("--jobs", type=int, default=None, help="Worker processes for untimed runs")
    p.set_defaults(handler=cmd_generate)

    p = sub.add_parser("split", parents=[common], help="Split corpora into train/val/test")
    p.add_argument("--corpus", type=Path, required=True)
    p.add_argument("--corpus2", type=Path, default=None, help="Dataset 2 corpus for the dataset-3 split")
    p.add_argument("--out", type=Path, required=True, help="Output directory")
    p.set_defaults(handler=cmd_split)

    p = sub.add_parser("train", parents=[common], help="Train the surrogate")
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--corpus", type=Path)
    source.add_argument("--split-dir", type=Path)
    p.add_argument("--corpus2", type=Path, default=None)
    p.add_argument("--out", type=Path, required=True, help="Model file")
    p.add_argument("--arch", default=DEFAULT_ARCHITECTURE, help="Architecture row, '-' for unused fields")
    p.add_argument("--epochs", type=int, default=MAX_EPOCHS)
    p.add_argument("--patience", type=int, default=PATIENCE)
    p.set_defaults(handler=cmd_train)

    p = sub.add_parser("predict", parents=[common, problem], help="Predicted rho for one theta")
    p.add_argument("--model", type=Path, required=True)
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--out", type=Path, default=None)
    p.set_defaults(handler=cmd_predict)

    p = sub.add_parser("select-theta", parents=[common, problem], help="Surrogate-optimal theta")
    p.add_argument("--model", type=Path, required=True)
    p.add_argument("--out", type=Path, default=None)
    p.set_defaults(handler=cmd_select_theta)

    p = sub.add_parser("solve", parents=[common, problem, solver], help="Solve one problem")
    p.add_argument("--model", type=Path, default=None, help="Surrogate used to pick theta")
    p.add_argument("--theta", type=float, default=None, help="Fixed theta, bypasses the surrogate")
    p.add_argument("--history", action="store_true", help="Include the residual history")
    p.add_argument("--out", type=Path, default=None)
    p.set_defaults(handler=cmd_solve)

    p = sub.add_parser("benchmark", parents=[common, problem, solver], help="CPU time over a theta grid")
    p.add_argument("--repetitions", type=int, default=None, help="Timed solves per theta")
    p.add_argument("--out", type=Path, default=None, help="CSV file")
    p.set_defaults(handler=cmd_benchmark)

    p = sub.add_parser("analyze", parents=[common], help="rho / CPU-time regression per level")
    p.add_argument("--corpus", type=Path, required=True)
    p.add_argument("--csv", type=Path, default=None, help="Also export the records as CSV")
    p.add_argument("--out", type=Path, default=None)
    p.set_defaults(handler=cmd_analyze)

    p = sub.add_parser("export-figures", parents=[common], help="CSV series of the result plots")
    p.add_argument("--corpus", type=Path, required=True)
    p.add_argument("--model", type=Path, default=None)
    p.add_argument("--out", type=Path, required=True, help="Output directory")
    p.set_defaults(handler=cmd_export_figures)
    return parser


def cli_main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run one subcommand.

    Returns:
        int: 0 on success, 1 on domain errors and missing files, 2 on usage errors
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2

    logging.basicConfig(level=logging.DEBUG if args.verbose else LOG_LEVEL,
                        format=LOG_FORMAT, datefmt=LOG_DATE_FORMAT)
    handler: Callable[[argparse.Namespace], int] = args.handler
    try:
        return handler(args)
    except FileNotFoundError as e:
        logger.error(f"File not found: {e.filename or e}")
        return 1
    except (AmgAnnError, ValidationError, ValueError) as e:
        logger.error(f"{args.command} failed: {type(e).__name__}: {e}")
        return 1


if __name__ == "__main__":
    sys.exit(cli_main())
