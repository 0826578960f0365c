"""Experiment execution: corrupt-conceal-measure cells and CSV assembly.

Every run is a pure function of (image, flags, seed); the only
non-deterministic field is the measured wall time, which is routed
through the module-level ``_timer`` hook so tests can pin it.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace

import numpy as np

from .conceal import EcConfig, conceal_ce, conceal_sbrm
from .errors import ConfigError
from .imaging import corrupt, psnr
from .moga import MogaConfig, evolve
from .problems import DemoProblem, pareto_front

_timer = time.perf_counter

CSV_HEADER = (
    "seed,loss_ratio,method,generations,psnr_db,"
    "candidate_evaluations,passes,wall_time_ms"
)

PARETO_CSV_HEADER = "trial,seed,genome,f1,f2,on_front"

METHODS = ("sbrm", "ce")


def format_psnr(value: float) -> str:
    return "inf" if math.isinf(value) else f"{value:.4f}"


@dataclass
class ExperimentRecord:
    """One measured cell of a sweep."""

    seed: int
    loss_ratio: float
    method: str
    generations: int
    psnr_db: float
    candidate_evaluations: int
    passes: int
    wall_time_ms: int

    def to_csv_row(self) -> str:
        return ",".join(
            [
                str(self.seed),
                f"{self.loss_ratio:g}",
                self.method,
                str(self.generations),
                format_psnr(self.psnr_db),
                str(self.candidate_evaluations),
                str(self.passes),
                str(self.wall_time_ms),
            ]
        )


def records_to_csv(records: list[ExperimentRecord]) -> str:
    lines = [CSV_HEADER] + [r.to_csv_row() for r in records]
    return "\n".join(lines) + "\n"


def run_conceal(
    corrupted: np.ndarray,
    mask,
    method: str,
    cfg: EcConfig,
    engine: MogaConfig,
):
    if method == "sbrm":
        return conceal_sbrm(corrupted, mask, cfg)
    if method == "ce":
        return conceal_ce(corrupted, mask, cfg, engine)
    raise ConfigError(f"unknown method {method!r}; expected one of {METHODS}")


def run_cell(
    original: np.ndarray,
    loss_ratio: float,
    seed: int,
    method: str,
    cfg: EcConfig,
    engine: MogaConfig,
) -> tuple[ExperimentRecord, np.ndarray]:
    """Corrupt with ``seed``, conceal, and measure against the original."""
    engine = replace(engine, seed=seed)
    corrupted, mask = corrupt(original, loss_ratio, cfg.block_size, seed)
    start = _timer()
    recon, stats = run_conceal(corrupted, mask, method, cfg, engine)
    elapsed_ms = int(round((_timer() - start) * 1000.0))
    record = ExperimentRecord(
        seed=seed,
        loss_ratio=loss_ratio,
        method=method,
        generations=engine.generations if method == "ce" else 0,
        psnr_db=psnr(original, recon),
        candidate_evaluations=stats.candidate_evaluations,
        passes=stats.passes,
        wall_time_ms=elapsed_ms,
    )
    return record, recon


def run_sweep(
    original: np.ndarray,
    loss_ratios: list[float],
    seeds: list[int],
    methods: list[str],
    cfg: EcConfig,
    engine: MogaConfig,
) -> list[ExperimentRecord]:
    """Full Cartesian product, rows ordered (method, loss ratio, seed)."""
    if not seeds:
        raise ConfigError("at least one seed is required")
    for p in loss_ratios:
        if not 0.0 <= p <= 1.0:
            raise ConfigError(f"loss ratio {p} outside [0, 1]")
    for m in methods:
        if m not in METHODS:
            raise ConfigError(f"unknown method {m!r}")
    records = []
    for method in methods:
        for p in loss_ratios:
            for seed in seeds:
                record, _ = run_cell(original, p, seed, method, cfg, engine)
                records.append(record)
    return records


def run_gens_sweep(
    original: np.ndarray,
    loss_ratio: float,
    generations_list: list[int],
    seeds: list[int],
    cfg: EcConfig,
    engine: MogaConfig,
) -> list[ExperimentRecord]:
    """Evolutionary method only: one row per (generations, seed)."""
    if not generations_list:
        raise ConfigError("at least one generation count is required")
    if not seeds:
        raise ConfigError("at least one seed is required")
    records = []
    for gens in generations_list:
        for seed in seeds:
            cell_engine = replace(engine, generations=gens)
            record, _ = run_cell(original, loss_ratio, seed, "ce", cfg, cell_engine)
            records.append(record)
    return records


@dataclass
class ParetoTrialRow:
    trial: int
    seed: int
    genome: tuple[int, ...]
    scores: tuple[float, ...]
    on_front: bool

    def to_csv_row(self) -> str:
        coords = ";".join(str(c) for c in self.genome)
        f1, f2 = (f"{s:.6g}" for s in self.scores)
        return ",".join(
            [
                str(self.trial),
                str(self.seed),
                coords,
                f1,
                f2,
                "true" if self.on_front else "false",
            ]
        )


def run_pareto_demo(
    problem: DemoProblem, engine: MogaConfig, trials: int, base_seed: int
) -> tuple[list[ParetoTrialRow], set]:
    """Run the engine ``trials`` times and flag results against the true front."""
    if trials < 0:
        raise ConfigError("trials must be >= 0")
    front = pareto_front(problem)
    rows = []
    for trial in range(trials):
        seed = base_seed + trial
        genome, _ = evolve(
            replace(engine, seed=seed), problem.domain, problem.objectives
        )
        rows.append(
            ParetoTrialRow(
                trial=trial,
                seed=seed,
                genome=genome,
                scores=tuple(f(genome) for f in problem.objectives),
                on_front=genome in front,
            )
        )
    return rows, front


def pareto_rows_to_csv(rows: list[ParetoTrialRow]) -> str:
    lines = [PARETO_CSV_HEADER] + [r.to_csv_row() for r in rows]
    return "\n".join(lines) + "\n"
