"""Core approval-voting machinery.

Everything here is deterministic and exact: scores are integers, utilities are
integer cents, and winner-inclusion probabilities under uniform random
tie-breaking are `fractions.Fraction` values.  Randomness enters only through
`sample_winning_set`, which takes an explicit seed.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

MAX_CANDIDATES = 16

Ballot = frozenset[str]

EMPTY_BALLOT: Ballot = frozenset()


@dataclass(frozen=True)
class CandidateSet:
    """An ordered set of distinct candidate labels, e.g. ("A", ..., "E")."""

    labels: tuple[str, ...]

    def __post_init__(self) -> None:
        if not 1 <= len(self.labels) <= MAX_CANDIDATES:
            raise ValueError(
                f"need between 1 and {MAX_CANDIDATES} candidates, got {len(self.labels)}"
            )
        if len(set(self.labels)) != len(self.labels):
            raise ValueError(f"candidate labels must be distinct: {self.labels}")

    @property
    def size(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise ValueError(f"unknown candidate {label!r}; have {self.labels}") from None

    def ballot(self, *labels: str) -> Ballot:
        """Build a ballot from labels, validating each one."""
        for lab in labels:
            self.index(lab)
        return frozenset(labels)

    def validate_ballot(self, ballot: Ballot) -> None:
        unknown = set(ballot) - set(self.labels)
        if unknown:
            raise ValueError(f"ballot contains unknown candidates {sorted(unknown)}")

    def ballot_to_mask(self, ballot: Ballot) -> int:
        self.validate_ballot(ballot)
        mask = 0
        for lab in ballot:
            mask |= 1 << self.labels.index(lab)
        return mask

    def mask_to_ballot(self, mask: int) -> Ballot:
        return frozenset(lab for i, lab in enumerate(self.labels) if mask >> i & 1)

    def ballot_to_string(self, ballot: Ballot) -> str:
        """Compact form: approved labels concatenated in candidate order ("" = abstain)."""
        self.validate_ballot(ballot)
        return "".join(lab for lab in self.labels if lab in ballot)

    def ballot_from_string(self, text: str) -> Ballot:
        ballot = frozenset(text)
        if len(ballot) != len(text):
            raise ValueError(f"repeated candidate in ballot string {text!r}")
        self.validate_ballot(ballot)
        return ballot

    def all_ballots(self) -> Iterator[Ballot]:
        """All 2^m ballots, in bit-mask order (empty ballot first)."""
        for mask in range(1 << self.size):
            yield self.mask_to_ballot(mask)


@dataclass(frozen=True)
class WinnerDistribution:
    """Per-candidate probability of ending up in the winning set of size k.

    Probabilities are exact rationals.  Each one is 0, 1, or r/t where r is
    the number of open slots at the cutoff score and t the number of
    candidates tied there, so they always sum to exactly k.
    """

    probabilities: tuple[Fraction, ...]
    k: int

    def check(self) -> None:
        assert sum(self.probabilities) == self.k

    def nonzero(self) -> dict[int, Fraction]:
        return {i: p for i, p in enumerate(self.probabilities) if p > 0}


def tally(base_scores: Sequence[int], ballot: Ballot, candidates: CandidateSet) -> tuple[int, ...]:
    """Add one approval ballot on top of the current per-candidate scores."""
    if len(base_scores) != candidates.size:
        raise ValueError(
            f"score vector has length {len(base_scores)}, expected {candidates.size}"
        )
    candidates.validate_ballot(ballot)
    return tuple(
        s + 1 if lab in ballot else s for s, lab in zip(base_scores, candidates.labels)
    )


def _cutoff(scores: Sequence[int], k: int) -> tuple[int, int, int]:
    """Return (threshold, open_slots, tied_count) for electing k of these scores."""
    m = len(scores)
    if not 1 <= k <= m:
        raise ValueError(f"k must be between 1 and {m}, got {k}")
    threshold = sorted(scores, reverse=True)[k - 1]
    above = sum(1 for s in scores if s > threshold)
    tied = sum(1 for s in scores if s == threshold)
    return threshold, k - above, tied


def winner_distribution(scores: Sequence[int], k: int) -> WinnerDistribution:
    """Inclusion probability of each candidate in the k-winner set.

    Candidates strictly above the cutoff score always win; the remaining
    slots are filled uniformly at random from the candidates tied at the
    cutoff, so each tied candidate wins with probability slots/tied.
    """
    threshold, slots, tied = _cutoff(scores, k)
    tie_p = Fraction(slots, tied)
    probs = tuple(
        Fraction(1) if s > threshold else tie_p if s == threshold else Fraction(0)
        for s in scores
    )
    return WinnerDistribution(probs, k)


def expected_outcome_utility(dist: WinnerDistribution, utilities: Sequence[int]) -> Fraction:
    """Expected utility (cents) of the winning set: sum of p_c * u(c)."""
    if len(utilities) != len(dist.probabilities):
        raise ValueError(
            f"utility vector has length {len(utilities)}, "
            f"expected {len(dist.probabilities)}"
        )
    return sum((p * u for p, u in zip(dist.probabilities, utilities)), Fraction(0))


def outcome_utility(scores: Sequence[int], k: int, utilities: Sequence[int]) -> Fraction:
    """Fused winner_distribution + expected_outcome_utility, one Fraction op total."""
    threshold, slots, tied = _cutoff(scores, k)
    sure = 0
    at_cutoff = 0
    for s, u in zip(scores, utilities):
        if s > threshold:
            sure += u
        elif s == threshold:
            at_cutoff += u
    return sure + Fraction(slots * at_cutoff, tied)


def _sample_winner_indices(scores: Sequence[int], k: int, rng: random.Random) -> frozenset[int]:
    threshold, slots, tied = _cutoff(scores, k)
    winners = [i for i, s in enumerate(scores) if s > threshold]
    tied_indices = [i for i, s in enumerate(scores) if s == threshold]
    winners.extend(rng.sample(tied_indices, slots))
    return frozenset(winners)


def sample_winning_set(
    scores: Sequence[int], k: int, seed: int, candidates: CandidateSet
) -> frozenset[str]:
    """Draw one concrete winning set, breaking cutoff ties with a seeded RNG.

    The same (scores, k, seed) always yields the same set.
    """
    if len(scores) != candidates.size:
        raise ValueError(
            f"score vector has length {len(scores)}, expected {candidates.size}"
        )
    indices = _sample_winner_indices(scores, k, random.Random(seed))
    return frozenset(candidates.labels[i] for i in indices)
