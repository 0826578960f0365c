"""Small discrete bi-objective problems with brute-force enumerable domains."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator

from .errors import ConfigError
from .moga import Genome, GenomeDomain, Objective, dominates


@dataclass(frozen=True)
class DemoProblem:
    name: str
    domain: GenomeDomain
    objectives: tuple[Objective, ...]


def _corner() -> DemoProblem:
    # Single Pareto point (2, 7): each objective pins one coordinate.
    domain = GenomeDomain(lower=(0, 0), upper=(9, 9))
    return DemoProblem(
        name="corner",
        domain=domain,
        objectives=(
            lambda g: -abs(g[0] - 2),
            lambda g: -abs(g[1] - 7),
        ),
    )


def _diagonal() -> DemoProblem:
    # Genuine trade-off: proximity to (0, 0) versus proximity to (9, 9);
    # the front is the staircase of monotone points between the corners.
    domain = GenomeDomain(lower=(0, 0), upper=(9, 9))
    return DemoProblem(
        name="diagonal",
        domain=domain,
        objectives=(
            lambda g: -(g[0] ** 2 + g[1] ** 2),
            lambda g: -((g[0] - 9) ** 2 + (g[1] - 9) ** 2),
        ),
    )


_BUILTINS = {
    "corner": _corner,
    "diagonal": _diagonal,
}

PROBLEM_NAMES = tuple(sorted(_BUILTINS))


def get_problem(name: str) -> DemoProblem:
    try:
        return _BUILTINS[name]()
    except KeyError:
        raise ConfigError(
            f"unknown problem {name!r}; available: {', '.join(PROBLEM_NAMES)}"
        ) from None


def enumerate_domain(domain: GenomeDomain) -> Iterator[Genome]:
    ranges = [range(lo, hi + 1) for lo, hi in zip(domain.lower, domain.upper)]
    for coords in itertools.product(*ranges):
        if coords not in domain.excluded:
            yield coords


def pareto_front(problem: DemoProblem) -> set[Genome]:
    """Exhaustively enumerate the domain and keep the non-dominated points."""
    points = list(enumerate_domain(problem.domain))
    scores = {p: tuple(f(p) for f in problem.objectives) for p in points}
    return {
        p
        for p in points
        if not any(dominates(scores[q], scores[p]) for q in points if q != p)
    }
