"""Alignment-based matching between antibodies and antigens.

An antibody slides along an antigen; at each of the 11 possible offsets
every position where the two agree contributes five points. The best
offset's score is the antibody's match against that antigen, and fitness
over a sample of antigens is the sum of best scores.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .gene_library import ANTIBODY_LENGTH, Antibody
from .scheduling import JOB_COUNT, UNIVERSE_SIZE, Antigen, AntigenUniverse

POSITION_SCORE = 5
OFFSET_COUNT = JOB_COUNT - ANTIBODY_LENGTH + 1
MAX_SCORE_PER_ANTIGEN = POSITION_SCORE * ANTIBODY_LENGTH


@dataclass(frozen=True)
class MatchResult:
    """Best alignment of one antibody against one antigen."""

    best_count: int
    best_score: int
    best_offset: int


@dataclass(frozen=True)
class AntigenSample:
    """Indices of the antigens an antibody population is trained against."""

    indices: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.indices:
            raise ValueError("antigen sample must not be empty")
        if len(set(self.indices)) != len(self.indices):
            raise ValueError("antigen sample indices must be distinct")
        if any(not 0 <= i < UNIVERSE_SIZE for i in self.indices):
            raise ValueError(f"antigen sample index out of range 0..{UNIVERSE_SIZE - 1}")

    @property
    def size(self) -> int:
        return len(self.indices)

    @classmethod
    def draw(
        cls, size: int, rng: random.Random, universe_size: int = UNIVERSE_SIZE
    ) -> "AntigenSample":
        """Sample `size` distinct antigen indices uniformly without replacement."""
        if not 1 <= size <= universe_size:
            raise ValueError(f"sample size {size} not in 1..{universe_size}")
        return cls(tuple(rng.sample(range(universe_size), size)))


def alignment_count(antigen: Antigen, antibody: Antibody, offset: int) -> int:
    """Number of positions where the antibody agrees with the antigen at `offset`."""
    if not 0 <= offset < OFFSET_COUNT:
        raise ValueError(f"offset {offset} out of range 0..{OFFSET_COUNT - 1}")
    seq = antigen.sequence
    return sum(1 for j, job in enumerate(antibody.jobs) if job == seq[offset + j])


def _best_count_offset(antigen: Antigen, jobs: tuple[int, ...]) -> tuple[int, int]:
    # Antigens are permutations, so antibody position j matches at offset d
    # exactly when the job sits at antigen position j + d; tallying the
    # position differences gives all 11 offset counts in one pass.
    pos = antigen.positions
    hist = [0] * OFFSET_COUNT
    for j, job in enumerate(jobs):
        d = pos[job] - j
        if 0 <= d < OFFSET_COUNT:
            hist[d] += 1
    best = max(hist)
    return best, hist.index(best)


def best_match(antigen: Antigen, antibody: Antibody) -> MatchResult:
    """Best alignment over all offsets; ties go to the smallest offset."""
    count, offset = _best_count_offset(antigen, antibody.jobs)
    return MatchResult(count, POSITION_SCORE * count, offset)


def antibody_fitness(
    antibody: Antibody, universe: AntigenUniverse, sample: AntigenSample
) -> int:
    """Sum of the antibody's best match scores over the sampled antigens."""
    jobs = antibody.jobs
    antigens = universe.antigens
    total = 0
    for i in sample.indices:
        total += _best_count_offset(antigens[i], jobs)[0]
    return POSITION_SCORE * total


def is_matched(antigen: Antigen, antibody: Antibody, threshold: int) -> bool:
    """True when the best alignment matches at least `threshold` positions."""
    return _best_count_offset(antigen, antibody.jobs)[0] >= threshold


def max_fitness(sample_size: int) -> int:
    """Highest fitness an antibody can reach against `sample_size` antigens."""
    if sample_size < 1:
        raise ValueError("sample size must be at least 1")
    return MAX_SCORE_PER_ANTIGEN * sample_size
