"""Iterative recovery of lost image blocks by range matching.

For every corrupted B x B block, the surrounding R x R range is compared
against the ranges of candidate blocks inside an A x A search window. The
exhaustive baseline scores each candidate by a reliability-weighted
("appraised") mean squared error and copies the winner's pixels into the
still-missing positions. The evolutionary variant instead lets the
compromise engine pick the candidate offset, trading raw range error
against mutual merit as two separate objectives.

Reliability lives in a per-pixel merit map: 1 for intact pixels, 0 for
lost ones, and a decayed value for pixels recovered in a later pass. A
pixel counts as available iff its merit is positive, so legitimately black
pixels are never mistaken for losses. Ranges are clipped at image borders
and out-of-image positions never enter any sum.

Passes visit unresolved blocks in raster order; within a single block
trial all candidates are read from the state as it was when the trial
started, and the winning update is applied atomically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import ConfigError
from .imaging import LossMask, _require_image
from .moga import GenomeDomain, MogaConfig, evolve


@dataclass
class EcConfig:
    """Geometry and schedule of the recovery procedure (sizes in pixels)."""

    block_size: int = 8
    range_size: int = 10
    search_size: int = 24
    merit_decay: float = 0.7
    merit_floor: float = 0.05
    max_iters: int = 10

    def validate(self) -> None:
        b, r, a = self.block_size, self.range_size, self.search_size
        if b < 1:
            raise ConfigError("block_size must be >= 1")
        if r <= b:
            raise ConfigError("range_size must exceed block_size")
        if a < r:
            raise ConfigError("search_size must be at least range_size")
        if (r - b) % 2 or (a - b) % 2:
            raise ConfigError(
                "range_size and search_size must differ from block_size "
                "by even amounts (symmetric borders)"
            )
        if not 0.0 < self.merit_decay < 1.0:
            raise ConfigError("merit_decay must lie in (0, 1)")
        if not 0.0 <= self.merit_floor <= 1.0:
            raise ConfigError("merit_floor must lie in [0, 1]")
        if self.max_iters < 1:
            raise ConfigError("max_iters must be >= 1")


@dataclass
class RangeView:
    """R x R window of pixels and merits around one block position.

    ``present`` marks positions that fall inside the image; everything
    else is excluded from all sums.
    """

    pixels: np.ndarray
    merits: np.ndarray
    present: np.ndarray


@dataclass
class Candidate:
    """One search-window candidate: offset plus its scores.

    ``weight`` and ``e_appraised`` are filled by the exhaustive baseline
    only; the offset is never (0, 0).
    """

    offset: tuple[int, int]  # (dx, dy)
    e: float
    mutual_merit: float
    weight: float | None = None
    e_appraised: float | None = None


@dataclass
class ConcealStats:
    candidate_evaluations: int = 0
    passes: int = 0
    blocks_recovered_full: int = 0
    blocks_recovered_partial: int = 0


@dataclass
class ReconstructionState:
    """Working image, merit map, and pass bookkeeping.

    Pixel and merit arrays are zero-padded by ``pad`` on every side so
    that any candidate range slice stays in bounds; padding carries merit
    0 and therefore never contributes to a sum.
    """

    pixels: np.ndarray  # float64, padded
    merits: np.ndarray  # float64, padded
    pad: int
    shape: tuple[int, int]
    iteration: int = 0
    unresolved: list[tuple[int, int]] = field(default_factory=list)

    @classmethod
    def create(
        cls, image: np.ndarray, mask: LossMask, cfg: EcConfig
    ) -> "ReconstructionState":
        h, w = image.shape
        pad = (cfg.search_size - cfg.block_size) // 2 + (
            cfg.range_size - cfg.block_size
        ) // 2
        lost = mask.pixel_mask()
        pixels = np.zeros((h + 2 * pad, w + 2 * pad))
        merits = np.zeros_like(pixels)
        core = image.astype(np.float64)
        core[lost] = 0.0  # lost pixels are zero by convention
        pixels[pad : pad + h, pad : pad + w] = core
        merits[pad : pad + h, pad : pad + w] = np.where(lost, 0.0, 1.0)
        return cls(pixels=pixels, merits=merits, pad=pad, shape=(h, w))

    def image_copy(self) -> np.ndarray:
        h, w = self.shape
        p = self.pad
        return self.pixels[p : p + h, p : p + w].astype(np.uint8)

    def merit_map(self) -> np.ndarray:
        h, w = self.shape
        p = self.pad
        return self.merits[p : p + h, p : p + w].copy()

    def refresh_unresolved(self, block_size: int) -> list[tuple[int, int]]:
        """Raster-ordered top-left positions of blocks with a merit-0 pixel."""
        h, w = self.shape
        p = self.pad
        core = self.merits[p : p + h, p : p + w]
        gh, gw = h // block_size, w // block_size
        grid_min = core.reshape(gh, block_size, gw, block_size).min(axis=(1, 3))
        self.unresolved = [
            (int(gy) * block_size, int(gx) * block_size)
            for gy, gx in np.argwhere(grid_min == 0.0)
        ]
        return self.unresolved


# ---------------------------------------------------------------------------
# Candidate scoring, one view at a time (also the oracle path in the tests)
# ---------------------------------------------------------------------------


def enumerate_candidates(
    shape: tuple[int, int],
    block_pos: tuple[int, int],
    block_size: int,
    search_size: int,
) -> list[tuple[int, int]]:
    """Offsets (dx, dy) whose block stays inside the image, minus (0, 0).

    Ordered by raster scan: dy outer, dx inner.
    """
    height, width = shape
    r, c = block_pos
    h = (search_size - block_size) // 2
    offsets = []
    for dy in range(-h, h + 1):
        if not 0 <= r + dy <= height - block_size:
            continue
        for dx in range(-h, h + 1):
            if (dx, dy) == (0, 0):
                continue
            if 0 <= c + dx <= width - block_size:
                offsets.append((dx, dy))
    return offsets


def range_view(
    state: ReconstructionState,
    block_pos: tuple[int, int],
    cfg: EcConfig,
    offset: tuple[int, int] = (0, 0),
) -> RangeView:
    """Extract the range of ``block_pos`` shifted by ``offset``."""
    r_size = cfg.range_size
    border = (cfg.range_size - cfg.block_size) // 2
    dx, dy = offset
    top = block_pos[0] - border + dy
    left = block_pos[1] - border + dx
    p = state.pad
    pixels = state.pixels[top + p : top + p + r_size, left + p : left + p + r_size]
    merits = state.merits[top + p : top + p + r_size, left + p : left + p + r_size]
    rows = np.arange(top, top + r_size)
    cols = np.arange(left, left + r_size)
    present = ((rows >= 0) & (rows < state.shape[0]))[:, None] & (
        (cols >= 0) & (cols < state.shape[1])
    )[None, :]
    return RangeView(pixels=pixels.copy(), merits=merits.copy(), present=present)


def common_mse(target: RangeView, candidate: RangeView) -> float | None:
    """MSE over positions available in both views, or None when none are."""
    both = (
        target.present
        & candidate.present
        & (target.merits > 0)
        & (candidate.merits > 0)
    )
    n = int(both.sum())
    if n == 0:
        return None
    diff = target.pixels[both] - candidate.pixels[both]
    return float((diff * diff).sum() / n)


def mutual_merit(target: RangeView, candidate: RangeView) -> float:
    """Inner product of the two merit vectors over shared positions."""
    both = target.present & candidate.present
    return float((target.merits[both] * candidate.merits[both]).sum())


def weighting_factor(target: RangeView, candidate: RangeView) -> float | None:
    """Mutual merit normalized by the count of commonly available positions."""
    both = (
        target.present
        & candidate.present
        & (target.merits > 0)
        & (candidate.merits > 0)
    )
    n = int(both.sum())
    if n == 0:
        return None
    return mutual_merit(target, candidate) / n


def appraised_mse(e: float, w: float, e_max: float) -> float:
    """Blend a candidate's own error with the worst error in the window."""
    return w * e + (1.0 - w) * e_max


def select_best_match(candidates: Sequence[Candidate]) -> Candidate | None:
    """Candidate with minimum appraised error; raster-order tie break."""
    pool = [c for c in candidates if c.e_appraised is not None]
    if not pool:
        return None
    return min(pool, key=lambda c: (c.e_appraised, c.offset[1], c.offset[0]))


def apply_match(
    state: ReconstructionState,
    block_pos: tuple[int, int],
    best: Candidate,
    cfg: EcConfig,
) -> int:
    """Copy the winner's available pixels into the block's missing ones.

    Only pixels with merit 0 whose source position has positive merit are
    touched; they receive the source value and a merit of
    ``max(decay^iteration, floor)``. Returns the number of recovered
    pixels. Source values are read before any write, so overlapping
    source and target regions are safe.
    """
    b = cfg.block_size
    dx, dy = best.offset
    r = block_pos[0] + state.pad
    c = block_pos[1] + state.pad
    tgt_merit = state.merits[r : r + b, c : c + b]
    src_merit = state.merits[r + dy : r + dy + b, c + dx : c + dx + b]
    src_pix = state.pixels[r + dy : r + dy + b, c + dx : c + dx + b]
    fill = (tgt_merit == 0) & (src_merit > 0)
    n = int(fill.sum())
    if n == 0:
        return 0
    values = src_pix[fill]  # fancy indexing copies: snapshot before writing
    state.pixels[r : r + b, c : c + b][fill] = values
    tgt_merit[fill] = max(cfg.merit_decay**state.iteration, cfg.merit_floor)
    return n


# ---------------------------------------------------------------------------
# Whole-window scoring (production path; one shot per block trial)
# ---------------------------------------------------------------------------


def _target_range_alive(
    state: ReconstructionState, block_pos: tuple[int, int], cfg: EcConfig
) -> bool:
    # With an all-zero target range, every candidate is infeasible.
    border = (cfg.range_size - cfg.block_size) // 2
    top = block_pos[0] - border + state.pad
    left = block_pos[1] - border + state.pad
    sl = state.merits[top : top + cfg.range_size, left : left + cfg.range_size]
    return bool((sl > 0).any())


def _window_stats(
    state: ReconstructionState, block_pos: tuple[int, int], cfg: EcConfig
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Score every offset of the search window at once.

    Returns (e, mm, nz, cand, feasible), each shaped (K, K) with
    K = search_size - block_size + 1 and index (dy + h, dx + h). ``e`` is
    meaningful only where ``nz > 0``; ``mm`` is forced to 0 outside the
    geometric candidate set.
    """
    b, r_size, a = cfg.block_size, cfg.range_size, cfg.search_size
    h = (a - b) // 2
    border = (r_size - b) // 2
    k = a - b + 1
    height, width = state.shape
    r, c = block_pos
    top = r + state.pad - border - h
    left = c + state.pad - border - h
    side = r_size + a - b
    env_pix = state.pixels[top : top + side, left : left + side]
    env_mer = state.merits[top : top + side, left : left + side]
    # Flatten the K x K windows into rows so every step is one dispatch.
    wp = sliding_window_view(env_pix, (r_size, r_size)).reshape(k * k, -1)
    wm = sliding_window_view(env_mer, (r_size, r_size)).reshape(k * k, -1)
    center = h * k + h
    tgt_pix = wp[center]
    tgt_mer = wm[center]

    common = wm > 0
    common &= tgt_mer > 0
    nz = common.sum(axis=1).reshape(k, k)
    diff = wp - tgt_pix
    diff *= diff
    diff *= common
    err_sum = diff.sum(axis=1).reshape(k, k)
    mm = (wm * tgt_mer).sum(axis=1).reshape(k, k)

    dy = np.arange(k) - h
    dx = np.arange(k) - h
    cand = ((r + dy >= 0) & (r + dy <= height - b))[:, None] & (
        (c + dx >= 0) & (c + dx <= width - b)
    )[None, :]
    cand[h, h] = False

    feasible = cand & (nz > 0)
    e = np.zeros((k, k))
    np.divide(err_sum, nz, out=e, where=nz > 0)
    mm = np.where(cand, mm, 0.0)
    return e, mm, nz, cand, feasible


def _fillable_offsets(
    state: ReconstructionState, block_pos: tuple[int, int], cfg: EcConfig
) -> np.ndarray:
    """(K, K) mask of offsets whose source covers >= 1 missing target pixel."""
    b, a = cfg.block_size, cfg.search_size
    h = (a - b) // 2
    r, c = block_pos
    top = r + state.pad - h
    left = c + state.pad - h
    env = state.merits[top : top + a, left : left + a]
    win = sliding_window_view(env, (b, b))
    holes = state.merits[
        r + state.pad : r + state.pad + b, c + state.pad : c + state.pad + b
    ] == 0
    return ((win > 0) & holes).any(axis=(2, 3))


def _choose_exhaustive(
    state: ReconstructionState,
    block_pos: tuple[int, int],
    block_index: int,
    cfg: EcConfig,
    stats: ConcealStats,
) -> Candidate | None:
    if not _target_range_alive(state, block_pos, cfg):
        return None
    e, mm, nz, cand, feasible = _window_stats(state, block_pos, cfg)
    stats.candidate_evaluations += int(cand.sum())
    if not feasible.any():
        return None
    e_max = float(e[feasible].max())
    w = np.zeros_like(e)
    np.divide(mm, nz, out=w, where=feasible)
    appraised = np.where(feasible, w * e + (1.0 - w) * e_max, np.inf)
    # The block's one attempt this pass must be able to recover something:
    # the best-scoring candidate is taken among those that cover at least
    # one missing pixel, otherwise a repeatedly chosen sterile winner would
    # freeze the block forever. e_max deliberately stays the maximum over
    # the whole feasible set.
    pool = feasible & _fillable_offsets(state, block_pos, cfg)
    if not pool.any():
        return None
    appraised = np.where(pool, appraised, np.inf)
    flat = int(np.argmin(appraised))  # first minimum = raster-order tie break
    iy, ix = divmod(flat, appraised.shape[1])
    h = (cfg.search_size - cfg.block_size) // 2
    return Candidate(
        offset=(ix - h, iy - h),
        e=float(e[iy, ix]),
        mutual_merit=float(mm[iy, ix]),
        weight=float(w[iy, ix]),
        e_appraised=float(appraised[iy, ix]),
    )


_M64 = 0xFFFFFFFFFFFFFFFF


def _block_seed(run_seed: int, pass_no: int, block_index: int) -> int:
    # splitmix64-style mix of (run seed, pass, block index): deterministic,
    # platform independent, and well spread across nearby inputs.
    x = (
        run_seed * 0x9E3779B97F4A7C15
        + pass_no * 0xBF58476D1CE4E5B9
        + block_index * 0x94D049BB133111EB
    ) & _M64
    x ^= x >> 30
    x = (x * 0xBF58476D1CE4E5B9) & _M64
    x ^= x >> 27
    x = (x * 0x94D049BB133111EB) & _M64
    return x ^ (x >> 31)


def _make_chooser_evolved(
    cfg: EcConfig, engine: MogaConfig
) -> Callable[[ReconstructionState, tuple[int, int], int, ConcealStats], Candidate | None]:
    h = (cfg.search_size - cfg.block_size) // 2
    domain = GenomeDomain(
        lower=(-h, -h), upper=(h, h), excluded=frozenset({(0, 0)})
    )

    k = cfg.search_size - cfg.block_size + 1

    def choose(state, block_pos, block_index, stats):
        if not _target_range_alive(state, block_pos, cfg):
            return None
        e, mm, nz, cand, feasible = _window_stats(state, block_pos, cfg)
        if not feasible.any():
            # Nothing to choose from: the evolved winner could only be
            # infeasible, which skips the block, so skip it directly.
            return None
        # Plain lists keep the per-call evaluator cost down.
        feas_flat = feasible.ravel().tolist()
        e_flat = e.ravel().tolist()
        mm_flat = mm.ravel().tolist()

        def fit_error(genome):
            idx = (genome[1] + h) * k + genome[0] + h
            return -e_flat[idx] if feas_flat[idx] else -math.inf

        def fit_merit(genome):
            return mm_flat[(genome[1] + h) * k + genome[0] + h]

        run_cfg = replace(
            engine, seed=_block_seed(engine.seed, state.iteration, block_index)
        )
        genome, estats = evolve(run_cfg, domain, (fit_error, fit_merit))
        # The engine scores each child once; that is exactly the number of
        # candidate evaluations spent on this block.
        stats.candidate_evaluations += estats.fitness_evaluations
        gx, gy = genome
        if not feasible[gy + h, gx + h]:
            return None  # all-infeasible neighborhoods land here
        return Candidate(
            offset=(gx, gy),
            e=float(e[gy + h, gx + h]),
            mutual_merit=float(mm[gy + h, gx + h]),
        )

    return choose


# ---------------------------------------------------------------------------
# Full runs
# ---------------------------------------------------------------------------


def _check_inputs(image: np.ndarray, mask: LossMask, cfg: EcConfig) -> np.ndarray:
    cfg.validate()
    img = _require_image(image)
    h, w = img.shape
    b = cfg.block_size
    if h % b or w % b:
        raise ConfigError(f"image {w}x{h} is not a multiple of block size {b}")
    if mask.block_size != b:
        raise ConfigError(
            f"mask block size {mask.block_size} != configured {b}"
        )
    if mask.grid.shape != (h // b, w // b):
        raise ConfigError(
            f"mask grid {mask.grid.shape} does not match image {w}x{h}"
        )
    return img


def _run(image, mask, cfg, choose) -> tuple[np.ndarray, ConcealStats]:
    img = _check_inputs(image, mask, cfg)
    state = ReconstructionState.create(img, mask, cfg)
    stats = ConcealStats()
    b = cfg.block_size
    grid_w = img.shape[1] // b
    for iteration in range(1, cfg.max_iters + 1):
        if not state.refresh_unresolved(b):
            break
        state.iteration = iteration
        stats.passes += 1
        for r, c in state.unresolved:
            block_index = (r // b) * grid_w + (c // b)
            best = choose(state, (r, c), block_index, stats)
            if best is None:
                continue
            recovered = apply_match(state, (r, c), best, cfg)
            if recovered:
                p = state.pad
                blk = state.merits[p + r : p + r + b, p + c : p + c + b]
                if (blk > 0).all():
                    stats.blocks_recovered_full += 1
                else:
                    stats.blocks_recovered_partial += 1
    return state.image_copy(), stats


def conceal_sbrm(
    image: np.ndarray, mask: LossMask, cfg: EcConfig | None = None
) -> tuple[np.ndarray, ConcealStats]:
    """Exhaustive appraised-MSE recovery of all lost blocks."""
    cfg = cfg or EcConfig()
    return _run(image, mask, cfg, lambda st, bp, bi, stats: _choose_exhaustive(
        st, bp, bi, cfg, stats
    ))


def conceal_ce(
    image: np.ndarray,
    mask: LossMask,
    cfg: EcConfig | None = None,
    engine: MogaConfig | None = None,
) -> tuple[np.ndarray, ConcealStats]:
    """Recovery with the two-gender compromise engine picking each match.

    Gender 0 minimizes the common-range error (infeasible candidates score
    -inf), gender 1 maximizes mutual merit. The per-block engine seed is
    derived from (engine.seed, pass number, block index), so runs are
    bit-reproducible.
    """
    cfg = cfg or EcConfig()
    engine = engine or MogaConfig()
    if engine.genders != 2:
        raise ConfigError("the concealment engine needs exactly 2 genders")
    engine.validate()
    cfg.validate()
    return _run(image, mask, cfg, _make_chooser_evolved(cfg, engine))
