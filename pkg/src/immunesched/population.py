"""Antibody populations: fitness caching and initial sampling from a pool."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING

from .matching import AntigenSample, antibody_fitness
from .scheduling import AntigenUniverse

if TYPE_CHECKING:
    from .gene_library import Antibody, AntibodyPool

POPULATION_SIZE = 100


@dataclass
class Population:
    """A fixed-size collection of antibodies with cached fitness values.

    `fitnesses` and `best_ever` are filled by evaluate(); operations that
    need them raise if the population has not been evaluated against a
    sample yet.
    """

    antibodies: list["Antibody"]
    fitnesses: list[int] | None = field(default=None)
    best_ever: tuple["Antibody", int] | None = field(default=None)

    @property
    def size(self) -> int:
        return len(self.antibodies)

    def evaluate(self, universe: AntigenUniverse, sample: AntigenSample) -> "Population":
        """Cache every antibody's fitness against the sample; returns self."""
        self.fitnesses = [
            antibody_fitness(ab, universe, sample) for ab in self.antibodies
        ]
        best_i = 0
        for i, fit in enumerate(self.fitnesses):
            if fit > self.fitnesses[best_i]:
                best_i = i
        self.best_ever = (self.antibodies[best_i], self.fitnesses[best_i])
        return self

    def require_evaluated(self) -> list[int]:
        if self.fitnesses is None:
            raise ValueError("population has not been evaluated against a sample")
        return self.fitnesses

    @property
    def total_fitness(self) -> int:
        return sum(self.require_evaluated())

    @property
    def best_fitness(self) -> int:
        return max(self.require_evaluated())


def sample_initial(pool: "AntibodyPool", size: int, rng: random.Random) -> Population:
    """Draw `size` distinct pool members in random order as a fresh population."""
    if len(pool) < size:
        raise ValueError(
            f"pool holds {len(pool)} antibodies, cannot sample {size}"
        )
    indices = rng.sample(range(len(pool)), size)
    return Population([pool.antibodies[i] for i in indices])


def save_population(pop: Population, path: str | Path) -> None:
    """Write one antibody per line as five space-separated job ids."""
    lines = [" ".join(str(j) for j in ab.jobs) for ab in pop.antibodies]
    Path(path).write_text("\n".join(lines) + "\n")


def load_population(path: str | Path) -> Population:
    """Read a population file written by save_population."""
    from .gene_library import Antibody

    path = Path(path)
    antibodies = []
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            jobs = tuple(int(t) for t in line.split())
            antibodies.append(Antibody(jobs))
        except ValueError as err:
            raise ValueError(f"{path}: line {lineno}: {err}") from None
    if not antibodies:
        raise ValueError(f"{path}: empty population file")
    return Population(antibodies)
