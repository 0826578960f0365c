"""Command-line experiment driver.

Subcommands: corrupt, conceal, psnr, sweep, gens-sweep, pareto-demo.
Exit codes: 0 success, 1 runtime or I/O failure, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import harness
from .conceal import EcConfig
from .errors import ConfigError, ParseError
from .imaging import mask_from_text, mask_to_text, psnr, read_pgm, write_pgm
from .moga import MogaConfig
from .problems import PROBLEM_NAMES, get_problem

_EC_FIELDS = (
    "block_size",
    "range_size",
    "search_size",
    "merit_decay",
    "merit_floor",
    "max_iters",
)
_ENGINE_FIELDS = (
    "pop",
    "gens",
    "groups_per_family",
    "mutation_rate",
    "mutation_step",
)


def _add_ec_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--block-size", type=int, default=None, help="lost block size B")
    p.add_argument("--range-size", type=int, default=None, help="matching range R")
    p.add_argument("--search-size", type=int, default=None, help="search window A")
    p.add_argument("--merit-decay", type=float, default=None,
                   help="per-pass merit decay factor")
    p.add_argument("--merit-floor", type=float, default=None,
                   help="lower bound for recovered-pixel merit")
    p.add_argument("--max-iters", type=int, default=None, help="maximum passes")


def _add_engine_flags(p: argparse.ArgumentParser, with_gens: bool = True) -> None:
    p.add_argument("--pop", type=int, default=None, help="engine population size")
    if with_gens:
        p.add_argument("--gens", type=int, default=None, help="engine generations")
    p.add_argument("--groups-per-family", type=int, default=None,
                   help="commitment groups per family")
    p.add_argument("--mutation-rate", type=float, default=None)
    p.add_argument("--mutation-step", type=int, default=None)


def _build_ec(args: argparse.Namespace) -> EcConfig:
    cfg = EcConfig()
    for name in _EC_FIELDS:
        value = getattr(args, name, None)
        if value is not None:
            setattr(cfg, name, value)
    cfg.validate()
    return cfg


def _build_engine(args: argparse.Namespace, base: MogaConfig | None = None) -> MogaConfig:
    cfg = base or MogaConfig()
    mapping = {
        "pop": "population_size",
        "gens": "generations",
        "groups_per_family": "groups_per_family",
        "mutation_rate": "mutation_rate",
        "mutation_step": "mutation_step",
    }
    for flag, field_name in mapping.items():
        value = getattr(args, flag, None)
        if value is not None:
            cfg = replace(cfg, **{field_name: value})
    cfg = replace(cfg, seed=getattr(args, "seed", 0))
    cfg.validate()
    return cfg


def _engine_flags_given(args: argparse.Namespace) -> list[str]:
    return [
        f"--{name.replace('_', '-')}"
        for name in _ENGINE_FIELDS
        if getattr(args, name, None) is not None
    ]


def _read_image(path: str) -> np.ndarray:
    return read_pgm(Path(path).read_bytes())


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_corrupt(args: argparse.Namespace) -> int:
    from .imaging import corrupt

    image = _read_image(args.image)
    cfg = _build_ec(args)
    corrupted, mask = corrupt(image, args.loss_ratio, cfg.block_size, args.seed)
    Path(args.out).write_bytes(write_pgm(corrupted))
    Path(args.mask_out).write_text(mask_to_text(mask))
    print(harness.format_psnr(psnr(image, corrupted)))
    return 0


def cmd_psnr(args: argparse.Namespace) -> int:
    a = _read_image(args.image_a)
    b = _read_image(args.image_b)
    print(harness.format_psnr(psnr(a, b)))
    return 0


def cmd_conceal(args: argparse.Namespace) -> int:
    rejected = _engine_flags_given(args)
    if args.method == "sbrm" and rejected:
        raise ConfigError(
            f"{', '.join(rejected)} only apply to method 'ce'"
        )
    corrupted = _read_image(args.image)
    mask = mask_from_text(Path(args.mask).read_text())
    original = _read_image(args.original)
    if original.shape != corrupted.shape:
        raise ConfigError(
            f"original {original.shape} and corrupted {corrupted.shape} differ"
        )
    cfg = _build_ec(args)
    engine = _build_engine(args)
    start = harness._timer()
    recon, stats = harness.run_conceal(corrupted, mask, args.method, cfg, engine)
    elapsed_ms = int(round((harness._timer() - start) * 1000.0))
    Path(args.out).write_bytes(write_pgm(recon))
    record = harness.ExperimentRecord(
        seed=args.seed,
        loss_ratio=mask.lost_fraction(),
        method=args.method,
        generations=engine.generations if args.method == "ce" else 0,
        psnr_db=psnr(original, recon),
        candidate_evaluations=stats.candidate_evaluations,
        passes=stats.passes,
        wall_time_ms=elapsed_ms,
    )
    print(harness.CSV_HEADER)
    print(record.to_csv_row())
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    original = _read_image(args.image)
    cfg = _build_ec(args)
    engine = _build_engine(args)
    records = harness.run_sweep(
        original, args.ratios, args.seeds, args.methods, cfg, engine
    )
    Path(args.out).write_text(harness.records_to_csv(records))
    if args.plot:
        from . import report

        report.render_loss_sweep(records, args.plot)
    return 0


def cmd_gens_sweep(args: argparse.Namespace) -> int:
    original = _read_image(args.image)
    cfg = _build_ec(args)
    engine = _build_engine(args)
    records = harness.run_gens_sweep(
        original, args.loss_ratio, args.gens_list, args.seeds, cfg, engine
    )
    Path(args.out).write_text(harness.records_to_csv(records))
    if args.plot:
        from . import report

        report.render_gens_sweep(records, args.plot)
    return 0


# Demo defaults favor convergence: the problems are tiny, so high child
# surplus (heavy per-generation culling) and a longer run reliably land on
# the true front.
_DEMO_ENGINE = MogaConfig(
    population_size=16,
    genders=2,
    groups_per_family=6,
    generations=20,
    mutation_rate=0.25,
    mutation_step=2,
)


def cmd_pareto_demo(args: argparse.Namespace) -> int:
    problem = get_problem(args.problem)
    engine = _build_engine(args, base=_DEMO_ENGINE)
    rows, front = harness.run_pareto_demo(problem, engine, args.trials, args.seed)
    Path(args.out).write_text(harness.pareto_rows_to_csv(rows))
    hits = sum(1 for r in rows if r.on_front)
    print(f"on_front={hits}/{len(rows)}")
    if args.plot:
        from . import report

        front_scores = [
            tuple(f(p) for f in problem.objectives) for p in sorted(front)
        ]
        report.render_pareto_demo(rows, front_scores, args.plot)
    return 0


# ---------------------------------------------------------------------------
# Parser wiring
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="compevo",
        description="Block-loss image recovery driven by a compromise-based "
        "multi-objective genetic engine.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("corrupt", help="drop random blocks from a PGM image")
    p.add_argument("image")
    p.add_argument("--loss-ratio", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="corrupted PGM path")
    p.add_argument("--mask-out", required=True, help="loss-mask sidecar path")
    _add_ec_flags(p)
    p.set_defaults(func=cmd_corrupt)

    p = sub.add_parser("psnr", help="PSNR between two PGM images")
    p.add_argument("image_a")
    p.add_argument("image_b")
    p.set_defaults(func=cmd_psnr)

    p = sub.add_parser("conceal", help="recover lost blocks of a corrupted image")
    p.add_argument("image", help="corrupted PGM")
    p.add_argument("--mask", required=True, help="loss-mask sidecar")
    p.add_argument("--original", required=True,
                   help="pristine PGM used for the reported PSNR")
    p.add_argument("--method", choices=harness.METHODS, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="reconstructed PGM path")
    _add_ec_flags(p)
    _add_engine_flags(p)
    p.set_defaults(func=cmd_conceal)

    p = sub.add_parser("sweep", help="loss-ratio sweep to CSV")
    p.add_argument("image")
    p.add_argument("--ratios", type=float, nargs="+", required=True)
    p.add_argument("--seeds", type=int, nargs="+", required=True)
    p.add_argument("--methods", nargs="+", choices=harness.METHODS,
                   default=list(harness.METHODS))
    p.add_argument("--seed", type=int, default=0,
                   help=argparse.SUPPRESS)  # cells reseed per corruption seed
    p.add_argument("--out", required=True, help="CSV path")
    p.add_argument("--plot", default=None, help="optional figure path (PNG)")
    _add_ec_flags(p)
    _add_engine_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("gens-sweep", help="generation-count sweep (method ce)")
    p.add_argument("image")
    p.add_argument("--loss-ratio", type=float, required=True)
    p.add_argument("--gens", dest="gens_list", type=int, nargs="+", required=True,
                   help="generation counts to sweep")
    p.add_argument("--seeds", type=int, nargs="+", required=True)
    p.add_argument("--seed", type=int, default=0, help=argparse.SUPPRESS)
    p.add_argument("--out", required=True, help="CSV path")
    p.add_argument("--plot", default=None, help="optional figure path (PNG)")
    _add_ec_flags(p)
    _add_engine_flags(p, with_gens=False)
    p.set_defaults(func=cmd_gens_sweep)

    p = sub.add_parser("pareto-demo",
                       help="exercise the engine on a built-in toy problem")
    p.add_argument("--problem", choices=PROBLEM_NAMES, default="corner")
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="CSV path")
    p.add_argument("--plot", default=None, help="optional figure path (PNG)")
    _add_engine_flags(p)
    p.set_defaults(func=cmd_pareto_demo)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def run() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    run()
