"""Multi-gender genetic engine with compromise-driven survivor selection.

Every individual carries a gender, and each gender is scored by exactly one
objective. Reproduction pairs one parent per gender into families; each
family produces commitment groups of children, one child per gender.
Selection then cycles through the genders, each step deleting the entire
group that contains the currently worst-scoring child of that gender, until
the population is back to its nominal size. A group therefore survives only
if all of its members are acceptable to their respective objectives, which
pushes the population toward solutions that do well on every objective at
once.

Genomes are fixed-length integer tuples drawn from a bounded box with an
optional set of excluded points. All randomness flows through a single
``random.Random`` instance, so runs are reproducible from the seed alone.
"""

from __future__ import annotations

import math
import random
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .errors import ConfigError

Genome = tuple[int, ...]
Objective = Callable[[Genome], float]

# Attempts to re-draw an operator result that landed on an excluded point
# before falling back to a fresh uniform domain sample.
_EXCLUSION_RETRIES = 8


@dataclass(frozen=True)
class GenomeDomain:
    """Bounded integer box, minus a finite set of excluded points.

    Args:
        lower: Per-coordinate inclusive lower bounds.
        upper: Per-coordinate inclusive upper bounds.
        excluded: Points that no genome may take (e.g. a forbidden origin).
    """

    lower: tuple[int, ...]
    upper: tuple[int, ...]
    excluded: frozenset[Genome] = frozenset()

    def __post_init__(self):
        if len(self.lower) != len(self.upper) or not self.lower:
            raise ConfigError("domain bounds must be equal-length, non-empty tuples")
        if any(lo > hi for lo, hi in zip(self.lower, self.upper)):
            raise ConfigError("domain has lower bound above upper bound")
        inside = sum(1 for p in self.excluded if self._in_bounds(p))
        if inside >= self.box_size:
            raise ConfigError("domain minus excluded points is empty")

    @property
    def dimension(self) -> int:
        return len(self.lower)

    @property
    def box_size(self) -> int:
        return math.prod(hi - lo + 1 for lo, hi in zip(self.lower, self.upper))

    def _in_bounds(self, coords: Sequence[int]) -> bool:
        return len(coords) == self.dimension and all(
            lo <= c <= hi for c, lo, hi in zip(coords, self.lower, self.upper)
        )

    def contains(self, coords: Sequence[int]) -> bool:
        return self._in_bounds(coords) and tuple(coords) not in self.excluded

    def clamp(self, coords: Sequence[int]) -> Genome:
        return tuple(
            min(max(c, lo), hi) for c, lo, hi in zip(coords, self.lower, self.upper)
        )

    def sample(self, rng: random.Random) -> Genome:
        """Uniform sample over the box minus the excluded set."""
        while True:
            g = tuple(rng.randint(lo, hi) for lo, hi in zip(self.lower, self.upper))
            if g not in self.excluded:
                return g


@dataclass(slots=True)
class Individual:
    genome: Genome
    gender: int
    fitness: float | None = None


@dataclass(frozen=True)
class CommitmentGroup:
    """Children bound together: the group is culled or kept as a whole.

    ``members[g]`` is the group's child of gender ``g``; every gender is
    represented exactly once.
    """

    members: tuple[Individual, ...]

    def __post_init__(self):
        members = self.members
        if len(members) == 2 and members[0].gender == 0 and members[1].gender == 1:
            return
        if any(m.gender != i for i, m in enumerate(members)):
            genders = sorted(m.gender for m in members)
            if genders != list(range(len(members))):
                raise ValueError(
                    "group members must cover each gender exactly once"
                )


# One parent per gender, indexed by gender.
Family = tuple[Individual, ...]


@dataclass
class MogaConfig:
    """Engine parameters.

    ``population_size`` must be a positive multiple of ``genders`` and at
    least twice it, so that families and balanced survivor counts exist.
    """

    population_size: int = 16
    genders: int = 2
    groups_per_family: int = 2
    generations: int = 4
    mutation_rate: float = 0.3
    mutation_step: int = 2
    seed: int = 0

    def validate(self) -> None:
        if self.genders < 1:
            raise ConfigError("genders must be >= 1")
        if self.population_size % self.genders != 0:
            raise ConfigError(
                f"population_size {self.population_size} is not a multiple of "
                f"genders {self.genders}"
            )
        if self.population_size < 2 * self.genders:
            raise ConfigError("population_size must be at least 2 * genders")
        if self.groups_per_family < 1:
            raise ConfigError("groups_per_family must be >= 1")
        if self.generations < 1:
            raise ConfigError("generations must be >= 1")
        if not 0.0 <= self.mutation_rate <= 1.0:
            raise ConfigError("mutation_rate must lie in [0, 1]")
        if self.mutation_step < 1:
            raise ConfigError("mutation_step must be >= 1")


@dataclass
class EvolutionStats:
    """Bookkeeping for one engine run."""

    fitness_evaluations: int = 0
    # best_per_gender[generation][gender] = best survivor fitness
    best_per_gender: list[list[float]] = field(default_factory=list)


def init_population(
    cfg: MogaConfig, domain: GenomeDomain, rng: random.Random
) -> list[Individual]:
    """Create ``population_size`` individuals, ``P/N`` of each gender.

    Genders are a shuffled balanced assignment; genomes are independent
    uniform samples from the domain.
    """
    cfg.validate()
    per_gender = cfg.population_size // cfg.genders
    genders = [g for g in range(cfg.genders) for _ in range(per_gender)]
    rng.shuffle(genders)
    return [Individual(domain.sample(rng), g) for g in genders]


def form_families(
    population: list[Individual], rng: random.Random
) -> list[Family]:
    """Randomly match individuals across genders, one family per P/N slot."""
    if not population:
        raise ValueError("population is empty")
    n_genders = max(ind.gender for ind in population) + 1
    buckets: list[list[Individual]] = [[] for _ in range(n_genders)]
    for ind in population:
        buckets[ind.gender].append(ind)
    count = len(buckets[0])
    if any(len(b) != count for b in buckets) or count == 0:
        raise ValueError("population genders are not balanced")
    for bucket in buckets:
        rng.shuffle(bucket)
    return [tuple(bucket[i] for bucket in buckets) for i in range(count)]


def crossover(
    parents: Sequence[Genome], domain: GenomeDomain, rng: random.Random
) -> Genome:
    """Uniform discrete recombination: each coordinate from a random parent."""
    n = len(parents)
    dim = len(domain.lower)
    excluded = domain.excluded
    two_dim = n == 2 and dim == 2
    for _ in range(_EXCLUSION_RETRIES + 1):
        if two_dim:
            # One getrandbits call replaces dim randrange calls; each bit is
            # an independent fair parent pick.
            bits = rng.getrandbits(2)
            child = (parents[bits & 1][0], parents[(bits >> 1) & 1][1])
        elif n == 2:
            bits = rng.getrandbits(dim)
            child = tuple(parents[(bits >> d) & 1][d] for d in range(dim))
        else:
            child = tuple(parents[rng.randrange(n)][d] for d in range(dim))
        if child not in excluded:
            return child
    return domain.sample(rng)


def mutate(
    genome: Genome, cfg: MogaConfig, domain: GenomeDomain, rng: random.Random
) -> Genome:
    """Perturb each coordinate with probability ``mutation_rate``.

    A perturbed coordinate moves by a uniform nonzero step in
    ``[-mutation_step, +mutation_step]`` and is clamped to the bounds.
    """
    rate = cfg.mutation_rate
    if rate == 0.0:
        return genome
    max_step = cfg.mutation_step
    lower = domain.lower
    upper = domain.upper
    excluded = domain.excluded
    rnd = rng.random
    for _ in range(_EXCLUSION_RETRIES + 1):
        coords = None
        for d, c in enumerate(genome):
            if rnd() < rate:
                if max_step == 1:
                    step = 1
                elif max_step == 2:
                    step = 1 + rng.getrandbits(1)
                else:
                    step = rng.randint(1, max_step)
                c += -step if rnd() < 0.5 else step
                lo, hi = lower[d], upper[d]
                c = lo if c < lo else (hi if c > hi else c)
                if coords is None:
                    coords = list(genome)
                coords[d] = c
        if coords is None:
            return genome  # nothing perturbed; the input is already feasible
        child = tuple(coords)
        if child not in excluded:
            return child
    return domain.sample(rng)


def procreate(
    family: Family, cfg: MogaConfig, domain: GenomeDomain, rng: random.Random
) -> list[CommitmentGroup]:
    """Produce ``groups_per_family`` commitment groups from one family."""
    parent_genomes = [p.genome for p in family]
    n = len(family)
    groups = []
    for _ in range(cfg.groups_per_family):
        if n == 2:
            children = (
                Individual(
                    mutate(crossover(parent_genomes, domain, rng), cfg, domain, rng), 0
                ),
                Individual(
                    mutate(crossover(parent_genomes, domain, rng), cfg, domain, rng), 1
                ),
            )
        else:
            children = tuple(
                Individual(
                    mutate(crossover(parent_genomes, domain, rng), cfg, domain, rng),
                    gender,
                )
                for gender in range(n)
            )
        groups.append(CommitmentGroup(children))
    return groups


def culling_order(groups: Sequence[CommitmentGroup], target_size: int) -> list[int]:
    """Indices of the groups removed, in removal order.

    Genders are visited cyclically; each step removes the group holding the
    worst still-alive member of the current gender. Ties go to the lowest
    group index.
    """
    if not groups:
        raise ValueError("no groups to select from")
    n_genders = len(groups[0].members)
    total = n_genders * len(groups)
    if total < target_size:
        raise ValueError(f"only {total} children for target size {target_size}")
    if (total - target_size) % n_genders != 0:
        raise ValueError("child surplus is not a whole number of groups")
    fits = []
    for grp in groups:
        row = [m.fitness for m in grp.members]
        if None in row:
            raise ValueError("all group members must be evaluated before selection")
        fits.append(row)
    alive = list(range(len(groups)))
    removed: list[int] = []
    gender = 0
    n_removals = (total - target_size) // n_genders
    for _ in range(n_removals):
        victim = -1
        worst = None
        for k in alive:  # ascending scan: ties stay with the lowest index
            f = fits[k][gender]
            if worst is None or f < worst:
                worst = f
                victim = k
        alive.remove(victim)
        removed.append(victim)
        gender = (gender + 1) % n_genders
    return removed


def select_survivors(
    groups: Sequence[CommitmentGroup], target_size: int
) -> list[Individual]:
    """Cull whole groups, cycling genders, until ``target_size`` remain."""
    removed = set(culling_order(groups, target_size))
    return [
        member
        for k, grp in enumerate(groups)
        if k not in removed
        for member in grp.members
    ]


def dominates(a: Sequence[float], b: Sequence[float]) -> bool:
    """Strict Pareto dominance: a >= b everywhere and > somewhere."""
    if len(a) != len(b):
        raise ValueError(f"score vectors differ in length: {len(a)} vs {len(b)}")
    return all(x >= y for x, y in zip(a, b)) and any(x > y for x, y in zip(a, b))


def final_solution(population: Sequence[Individual]) -> Genome:
    """Pick the output genome from the last generation.

    The most frequent exactly-equal genome wins. Frequency ties are broken
    by the smallest per-gender fitness rank sum (rank 0 per gender goes to
    the best fitness among that gender's individuals; a genome absent from
    a gender takes rank one past the worst), then by lexicographic order.
    """
    if not population:
        raise ValueError("population is empty")
    counts = Counter(ind.genome for ind in population)
    best_count = max(counts.values())
    tied = [g for g, c in counts.items() if c == best_count]
    if len(tied) == 1:
        return tied[0]

    by_gender: dict[int, list[Individual]] = {}
    for ind in population:
        by_gender.setdefault(ind.gender, []).append(ind)

    def rank_sum(genome: Genome) -> int:
        total = 0
        for gender, members in by_gender.items():
            if any(m.fitness is None for m in members):
                raise ValueError("fitness must be evaluated to break ties")
            ranks = [
                sum(1 for o in members if o.fitness > m.fitness)
                for m in members
                if m.genome == genome
            ]
            total += min(ranks) if ranks else len(members)
        return total

    return min(tied, key=lambda g: (rank_sum(g), g))


def evolve(
    cfg: MogaConfig,
    domain: GenomeDomain,
    objectives: Sequence[Objective],
    rng: random.Random | None = None,
) -> tuple[Genome, EvolutionStats]:
    """Run the full engine and return the chosen genome plus statistics.

    Children fully replace their parents each generation: every generation
    forms families from the current population, procreates commitment
    groups, evaluates each child under its own gender's objective, and
    culls groups back to the nominal population size. The run is a pure
    function of the configuration (including its seed), the domain, and
    the objectives.
    """
    cfg.validate()
    if len(objectives) != cfg.genders:
        raise ConfigError(
            f"need {cfg.genders} objectives, got {len(objectives)}"
        )
    if rng is None:
        rng = random.Random(cfg.seed)

    stats = EvolutionStats()
    population = init_population(cfg, domain, rng)
    evaluations = 0
    for _ in range(cfg.generations):
        families = form_families(population, rng)
        groups = [
            grp for fam in families for grp in procreate(fam, cfg, domain, rng)
        ]
        for grp in groups:
            for child in grp.members:
                child.fitness = objectives[child.gender](child.genome)
            evaluations += len(grp.members)
        population = select_survivors(groups, cfg.population_size)
        best = [-math.inf] * cfg.genders
        for ind in population:
            if ind.fitness > best[ind.gender]:
                best[ind.gender] = ind.fitness
        stats.best_per_gender.append(best)
    stats.fitness_evaluations = evaluations
    return final_solution(population), stats
