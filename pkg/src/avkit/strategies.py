"""Heuristic ballot generators, ballot classification, and best response.

The three generators use only the voter's own utilities and ignore the
current tallies entirely.  Best response is the opposite extreme: it scores
every one of the 2^m possible ballots by exact expected utility.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .elections import Ballot, CandidateSet, outcome_utility
from .scenarios import Scenario
from .uncertainty import CompletionModel, _increment_distribution_cached


@dataclass(frozen=True)
class HeuristicLabel:
    kind: str  # "truthful" | "take-x" | "regret-min" | "abstain" | "other"
    x: int | None = None

    def __str__(self) -> str:
        if self.kind == "take-x":
            return f"Take-{self.x}"
        return {"truthful": "Truth", "regret-min": "Regret", "abstain": "Abstain", "other": "Other"}[self.kind]


TRUTHFUL = HeuristicLabel("truthful")
REGRET_MIN = HeuristicLabel("regret-min")
ABSTAIN = HeuristicLabel("abstain")
OTHER = HeuristicLabel("other")


def take_label(x: int) -> HeuristicLabel:
    return HeuristicLabel("take-x", x)


@dataclass(frozen=True)
class Classification:
    labels: frozenset[HeuristicLabel]
    sincere: bool


@dataclass(frozen=True)
class BestResponse:
    max_eu: Fraction  # cents
    maximizers: frozenset[Ballot]


def truthful_ballot(utilities: Sequence[int], candidates: CandidateSet) -> Ballot:
    """Approve exactly the candidates with strictly positive utility."""
    return frozenset(lab for lab, u in zip(candidates.labels, utilities) if u > 0)


def positive_utility_count(utilities: Sequence[int]) -> int:
    return sum(1 for u in utilities if u > 0)


def _take_x_indices(utilities: Sequence[int], x: int) -> list[int]:
    positives = positive_utility_count(utilities)
    if not 1 <= x <= positives:
        raise ValueError(
            f"x must be between 1 and the number of liked candidates ({positives}), got {x}"
        )
    ranked = sorted(range(len(utilities)), key=lambda i: (-utilities[i], i))
    if x < len(utilities) and utilities[ranked[x - 1]] == utilities[ranked[x]]:
        raise ValueError(
            f"utility tie across the top-{x} boundary "
            f"(both {utilities[ranked[x]]} cents); take-{x} is undefined"
        )
    return ranked[:x]


def take_x_best(utilities: Sequence[int], x: int, candidates: CandidateSet) -> Ballot:
    """Approve the x highest-utility candidates.

    Defined only for x up to the number of positive-utility candidates (the
    ballot is a prefix of the truthful one) and only when the utilities are
    strictly ordered across the x-boundary; otherwise the top-x set would be
    ambiguous and we refuse rather than break the tie.
    """
    return frozenset(candidates.labels[i] for i in _take_x_indices(utilities, x))


def regret_min_ballot(utilities: Sequence[int], candidates: CandidateSet) -> Ballot:
    """Approve every non-negative-utility candidate, to block the disliked ones."""
    return frozenset(lab for lab, u in zip(candidates.labels, utilities) if u >= 0)


def is_sincere(ballot: Ballot, utilities: Sequence[int], candidates: CandidateSet) -> bool:
    """True iff every approved candidate is worth at least every disapproved one.

    Vacuously true for the empty and the full ballot.
    """
    candidates.validate_ballot(ballot)
    approved = [u for lab, u in zip(candidates.labels, utilities) if lab in ballot]
    disapproved = [u for lab, u in zip(candidates.labels, utilities) if lab not in ballot]
    if not approved or not disapproved:
        return True
    return min(approved) >= max(disapproved)


def valid_take_x_range(utilities: Sequence[int]) -> list[int]:
    """All x for which take_x_best is defined (no boundary tie)."""
    xs = []
    for x in range(1, positive_utility_count(utilities) + 1):
        try:
            _take_x_indices(utilities, x)
        except ValueError:
            continue
        xs.append(x)
    return xs


def classify_ballot(
    ballot: Ballot, utilities: Sequence[int], candidates: CandidateSet
) -> Classification:
    """All heuristic labels this ballot matches, plus its sincerity.

    A ballot can carry several labels at once (e.g. when the truthful set has
    exactly x members, take-x coincides with it); Other applies only when
    nothing else does.
    """
    candidates.validate_ballot(ballot)
    labels: set[HeuristicLabel] = set()
    if ballot == truthful_ballot(utilities, candidates):
        labels.add(TRUTHFUL)
    for x in range(1, positive_utility_count(utilities) + 1):
        try:
            if ballot == take_x_best(utilities, x, candidates):
                labels.add(take_label(x))
        except ValueError:
            continue
    if ballot == regret_min_ballot(utilities, candidates):
        labels.add(REGRET_MIN)
    if not ballot:
        labels.add(ABSTAIN)
    if not labels:
        labels.add(OTHER)
    return Classification(frozenset(labels), is_sincere(ballot, utilities, candidates))


def best_response(scenario: Scenario, k: int, model: CompletionModel) -> BestResponse:
    """Exact maximum expected utility over all 2^m ballots, with every maximizer."""
    candidates = scenario.candidates
    m = candidates.size
    base = scenario.base_scores
    utilities = scenario.utilities
    dist = _increment_distribution_cached(model, candidates, scenario.missing_voters)

    best: Fraction | None = None
    maximizers: list[int] = []
    for mask in range(1 << m):
        tallied = tuple(s + (mask >> i & 1) for i, s in enumerate(base))
        eu = Fraction(0)
        for inc, prob in dist:
            scores = tuple(t + i for t, i in zip(tallied, inc))
            eu += prob * outcome_utility(scores, k, utilities)
        if best is None or eu > best:
            best = eu
            maximizers = [mask]
        elif eu == best:
            maximizers.append(mask)
    assert best is not None
    return BestResponse(best, frozenset(candidates.mask_to_ballot(b) for b in maximizers))
