"""Distributions over missing voters' ballots and expected ballot utility.

Missing voters are independent and identically distributed.  Every
computation below is exact (Fraction) except the Monte Carlo estimator,
which exists to scale past what enumeration can handle.

Two exact paths are provided on purpose: `expected_utility_exact` works on
the joint distribution of score increments (with a product-of-binomials
shortcut for candidate-independent models), while `expected_utility_bruteforce`
enumerates every ordered tuple of missing ballots with no shortcut at all.
The second is slower and exists to pin down the first.
"""

from __future__ import annotations

import itertools
import json
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable

from .elections import (
    Ballot,
    CandidateSet,
    _sample_winner_indices,
    outcome_utility,
    tally,
)
from .scenarios import Scenario

Increment = tuple[int, ...]
IncrementDistribution = dict[Increment, Fraction]


class ResourceLimitError(RuntimeError):
    """Enumeration would exceed the configured size limit."""


# Ordered ballot tuples a brute-force call may enumerate before refusing.
# 32^5 (five missing voters over five candidates) stays just inside.
MAX_BRUTEFORCE_TUPLES = 40_000_000


@dataclass(frozen=True)
class CompletionModel:
    """Distribution of a single missing voter's ballot (voters are i.i.d.)."""

    def single_voter_law(self, candidates: CandidateSet) -> list[tuple[Ballot, Fraction]]:
        raise NotImplementedError

    def _approval_probability(self) -> Fraction | None:
        """Per-candidate approval probability, if approvals are independent across candidates."""
        return None

    def _increment_law(self, candidates: CandidateSet) -> list[tuple[Increment, Fraction]]:
        m = candidates.size
        law = []
        for ballot, prob in self.single_voter_law(candidates):
            vec = tuple(1 if lab in ballot else 0 for lab in candidates.labels)
            law.append((vec, prob))
        assert sum(p for _, p in law) == 1
        return law

    def make_sampler(
        self, candidates: CandidateSet, rng: random.Random
    ) -> Callable[[], Increment]:
        """Fast sampler of one voter's score-increment vector."""
        law = self._increment_law(candidates)
        vectors = [v for v, _ in law]
        weights = [float(p) for _, p in law]
        cum = list(itertools.accumulate(weights))

        def draw() -> Increment:
            return rng.choices(vectors, cum_weights=cum)[0]

        return draw

    def make_ballot_sampler(
        self, candidates: CandidateSet, rng: random.Random
    ) -> Callable[[], Ballot]:
        """Sampler of one voter's actual ballot (needed when ballots get revealed)."""
        law = self.single_voter_law(candidates)
        ballots = [b for b, _ in law]
        cum = list(itertools.accumulate(float(p) for _, p in law))

        def draw() -> Ballot:
            return rng.choices(ballots, cum_weights=cum)[0]

        return draw


@dataclass(frozen=True)
class UniformSubsets(CompletionModel):
    """Each missing voter casts a ballot uniform over all 2^m subsets."""

    def single_voter_law(self, candidates: CandidateSet) -> list[tuple[Ballot, Fraction]]:
        total = 1 << candidates.size
        p = Fraction(1, total)
        return [(ballot, p) for ballot in candidates.all_ballots()]

    def _approval_probability(self) -> Fraction:
        return Fraction(1, 2)

    def make_sampler(self, candidates, rng):
        m = candidates.size

        def draw() -> Increment:
            bits = rng.getrandbits(m)
            return tuple(bits >> i & 1 for i in range(m))

        return draw

    def make_ballot_sampler(self, candidates, rng):
        m = candidates.size

        def draw() -> Ballot:
            return candidates.mask_to_ballot(rng.getrandbits(m))

        return draw


@dataclass(frozen=True)
class IndependentApproval(CompletionModel):
    """Each candidate is approved independently with probability p.

    IndependentApproval(1/2) coincides with UniformSubsets.
    """

    p: Fraction

    def __post_init__(self) -> None:
        if not 0 <= self.p <= 1:
            raise ValueError(f"approval probability must be in [0, 1], got {self.p}")

    def single_voter_law(self, candidates: CandidateSet) -> list[tuple[Ballot, Fraction]]:
        m = candidates.size
        law = []
        for ballot in candidates.all_ballots():
            size = len(ballot)
            law.append((ballot, self.p**size * (1 - self.p) ** (m - size)))
        return law

    def _approval_probability(self) -> Fraction:
        return self.p

    def make_sampler(self, candidates, rng):
        m = candidates.size
        p = float(self.p)

        def draw() -> Increment:
            return tuple(1 if rng.random() < p else 0 for _ in range(m))

        return draw


@dataclass(frozen=True)
class SingleVote(CompletionModel):
    """Each missing voter approves exactly one uniformly chosen candidate.

    With allow_abstain, the empty ballot is one more equally likely option.
    """

    allow_abstain: bool = False

    def single_voter_law(self, candidates: CandidateSet) -> list[tuple[Ballot, Fraction]]:
        options: list[Ballot] = [frozenset({lab}) for lab in candidates.labels]
        if self.allow_abstain:
            options.append(frozenset())
        p = Fraction(1, len(options))
        return [(ballot, p) for ballot in options]


@dataclass(frozen=True)
class WeightedBallots(CompletionModel):
    """Explicit empirical ballot distribution; weights must sum to 1."""

    entries: tuple[tuple[Ballot, Fraction], ...]

    def __post_init__(self) -> None:
        if not self.entries:
            raise ValueError("weighted model needs at least one ballot")
        if any(w < 0 for _, w in self.entries):
            raise ValueError("weights must be nonnegative")
        total = sum(w for _, w in self.entries)
        if total != 1:
            raise ValueError(f"weights must sum to 1, got {total}")

    def single_voter_law(self, candidates: CandidateSet) -> list[tuple[Ballot, Fraction]]:
        law: dict[Ballot, Fraction] = {}
        for ballot, weight in self.entries:
            candidates.validate_ballot(ballot)
            law[ballot] = law.get(ballot, Fraction(0)) + weight
        return list(law.items())


def _binomial_row(n: int, p: Fraction) -> list[Fraction]:
    return [math.comb(n, j) * p**j * (1 - p) ** (n - j) for j in range(n + 1)]


@lru_cache(maxsize=256)
def _increment_distribution_cached(
    model: CompletionModel, candidates: CandidateSet, n: int
) -> tuple[tuple[Increment, Fraction], ...]:
    m = candidates.size
    if n == 0:
        return (((0,) * m, Fraction(1)),)

    p = model._approval_probability()
    if p is not None:
        # Approvals are independent across candidates, so each candidate's
        # total increment is Binomial(n, p) and the joint law is the product.
        row = _binomial_row(n, p)
        dist = []
        for counts in itertools.product(range(n + 1), repeat=m):
            prob = Fraction(1)
            for j in counts:
                prob *= row[j]
            if prob:
                dist.append((counts, prob))
        return tuple(dist)

    # General case: n-fold convolution of the single-voter increment law.
    law = model._increment_law(candidates)
    acc: IncrementDistribution = {(0,) * m: Fraction(1)}
    for _ in range(n):
        nxt: IncrementDistribution = {}
        for vec, q in acc.items():
            for inc, w in law:
                key = tuple(a + b for a, b in zip(vec, inc))
                nxt[key] = nxt.get(key, Fraction(0)) + q * w
        acc = nxt
    return tuple(acc.items())


def increment_distribution(
    model: CompletionModel, candidates: CandidateSet, n: int
) -> IncrementDistribution:
    """Exact joint distribution of the total score increments from n missing voters."""
    if n < 0:
        raise ValueError(f"missing-voter count must be nonnegative, got {n}")
    return dict(_increment_distribution_cached(model, candidates, n))


def expected_utility_exact(
    scenario: Scenario, ballot: Ballot, k: int, model: CompletionModel
) -> Fraction:
    """Exact expected utility (cents) of casting `ballot` in the scenario.

    Sums, over the joint law of missing-voter score increments, the expected
    outcome utility of the completed election under random tie-breaking.
    """
    base = tally(scenario.base_scores, ballot, scenario.candidates)
    utilities = scenario.utilities
    total = Fraction(0)
    dist = _increment_distribution_cached(model, scenario.candidates, scenario.missing_voters)
    for inc, prob in dist:
        scores = tuple(b + i for b, i in zip(base, inc))
        total += prob * outcome_utility(scores, k, utilities)
    return total


def expected_utility_bruteforce(
    scenario: Scenario,
    ballot: Ballot,
    k: int,
    model: CompletionModel,
    max_tuples: int = MAX_BRUTEFORCE_TUPLES,
) -> Fraction:
    """Oracle: enumerate every ordered tuple of missing ballots.

    No sufficient-statistic shortcut: the joint probability of each ordered
    completion is the product of its per-voter ballot probabilities.  Refuses
    (rather than truncating) when the enumeration would exceed max_tuples.
    """
    n = scenario.missing_voters
    law = model._increment_law(scenario.candidates)
    if len(law) ** n > max_tuples:
        raise ResourceLimitError(
            f"{len(law)}^{n} ordered completions exceed the limit of {max_tuples}"
        )
    base = tally(scenario.base_scores, ballot, scenario.candidates)
    utilities = scenario.utilities
    # outcome_utility is a pure function of the final scores; memoizing it
    # keeps the enumeration honest while avoiding redundant tie arithmetic.
    seen: dict[tuple[int, ...], Fraction] = {}
    total = Fraction(0)
    for combo in itertools.product(law, repeat=n):
        scores = list(base)
        prob = Fraction(1)
        for vec, q in combo:
            prob *= q
            for i, x in enumerate(vec):
                if x:
                    scores[i] += x
        key = tuple(scores)
        value = seen.get(key)
        if value is None:
            value = seen[key] = outcome_utility(key, k, utilities)
        total += prob * value
    return total


def expected_utility_mc(
    scenario: Scenario,
    ballot: Ballot,
    k: int,
    model: CompletionModel,
    samples: int,
    seed: int,
) -> tuple[float, float]:
    """Monte Carlo estimate of the expected utility, in cents.

    Samples both the missing ballots and the tie-break, so it is unbiased for
    the exact value.  Returns (mean, standard error of the mean); the result
    is a deterministic function of (seed, samples).
    """
    if samples < 1:
        raise ValueError(f"need at least one sample, got {samples}")
    rng = random.Random(seed)
    base = tally(scenario.base_scores, ballot, scenario.candidates)
    utilities = scenario.utilities
    n = scenario.missing_voters
    draw = model.make_sampler(scenario.candidates, rng)

    total = 0.0
    total_sq = 0.0
    for _ in range(samples):
        scores = list(base)
        for _ in range(n):
            inc = draw()
            for i, x in enumerate(inc):
                if x:
                    scores[i] += x
        winners = _sample_winner_indices(scores, k, rng)
        value = float(sum(utilities[i] for i in winners))
        total += value
        total_sq += value * value

    mean = total / samples
    if samples == 1:
        return mean, 0.0
    variance = max(0.0, (total_sq - samples * mean * mean) / (samples - 1))
    return mean, math.sqrt(variance / samples)


# --- model (de)serialization, shared by the CLI and the experiment service ---


def model_to_json(model: CompletionModel) -> dict:
    if isinstance(model, UniformSubsets):
        return {"kind": "uniform-subsets"}
    if isinstance(model, IndependentApproval):
        return {"kind": "independent-approval", "p": str(model.p)}
    if isinstance(model, SingleVote):
        return {"kind": "single-vote", "allow_abstain": model.allow_abstain}
    if isinstance(model, WeightedBallots):
        return {
            "kind": "weighted",
            "ballots": [
                {"ballot": "".join(sorted(b)), "weight": str(w)} for b, w in model.entries
            ],
        }
    raise TypeError(f"unknown completion model {model!r}")


def model_from_json(doc: dict) -> CompletionModel:
    kind = doc.get("kind")
    if kind == "uniform-subsets":
        return UniformSubsets()
    if kind == "independent-approval":
        return IndependentApproval(Fraction(doc["p"]))
    if kind == "single-vote":
        return SingleVote(bool(doc.get("allow_abstain", False)))
    if kind == "weighted":
        entries = tuple(
            (frozenset(e["ballot"]), Fraction(e["weight"])) for e in doc["ballots"]
        )
        return WeightedBallots(entries)
    raise ValueError(f"unknown completion model kind {kind!r}")


def parse_model_spec(spec: str) -> CompletionModel:
    """Parse a CLI model spec.

    Accepted forms: "uniform-subsets", "independent-approval:P" (P rational,
    e.g. 1/4 or 0.25), "single-vote", "single-vote:abstain",
    "weighted:FILE.json" (file holding the model_to_json "weighted" document).
    """
    name, _, arg = spec.partition(":")
    if name in ("uniform-subsets", "uniform"):
        return UniformSubsets()
    if name in ("independent-approval", "independent"):
        if not arg:
            raise ValueError("independent-approval needs a probability, e.g. independent-approval:1/4")
        return IndependentApproval(Fraction(arg))
    if name == "single-vote":
        if arg not in ("", "abstain"):
            raise ValueError(f"unknown single-vote variant {arg!r}")
        return SingleVote(allow_abstain=arg == "abstain")
    if name == "weighted":
        if not arg:
            raise ValueError("weighted needs a file, e.g. weighted:ballots.json")
        with open(arg, encoding="utf-8") as fh:
            doc = json.load(fh)
        if isinstance(doc, list):
            doc = {"kind": "weighted", "ballots": doc}
        return model_from_json(doc)
    raise ValueError(f"unknown completion model spec {spec!r}")
