"""compevo: compromise-driven multi-objective evolution and block-loss image recovery."""

from .conceal import (
    Candidate,
    ConcealStats,
    EcConfig,
    RangeView,
    ReconstructionState,
    appraised_mse,
    apply_match,
    common_mse,
    conceal_ce,
    conceal_sbrm,
    enumerate_candidates,
    mutual_merit,
    range_view,
    select_best_match,
    weighting_factor,
)
from .errors import ConfigError, ParseError
from .imaging import (
    LossMask,
    corrupt,
    mask_from_text,
    mask_to_text,
    mse,
    psnr,
    read_pgm,
    write_pgm,
)
from .moga import (
    CommitmentGroup,
    EvolutionStats,
    Genome,
    GenomeDomain,
    Individual,
    MogaConfig,
    crossover,
    culling_order,
    dominates,
    evolve,
    final_solution,
    form_families,
    init_population,
    mutate,
    procreate,
    select_survivors,
)

__version__ = "0.1.0"

__all__ = [
    "Candidate",
    "CommitmentGroup",
    "ConcealStats",
    "ConfigError",
    "EcConfig",
    "EvolutionStats",
    "Genome",
    "GenomeDomain",
    "Individual",
    "LossMask",
    "MogaConfig",
    "ParseError",
    "RangeView",
    "ReconstructionState",
    "appraised_mse",
    "apply_match",
    "common_mse",
    "conceal_ce",
    "conceal_sbrm",
    "corrupt",
    "crossover",
    "culling_order",
    "dominates",
    "enumerate_candidates",
    "evolve",
    "final_solution",
    "form_families",
    "init_population",
    "mask_from_text",
    "mask_to_text",
    "mse",
    "mutate",
    "mutual_merit",
    "procreate",
    "psnr",
    "range_view",
    "read_pgm",
    "select_best_match",
    "select_survivors",
    "weighting_factor",
    "write_pgm",
]
