"""k-winner approval voting under missing-vote uncertainty.

Exact expected-utility computation with rational arithmetic, heuristic ballot
generation and classification, best-response search, reproduction of the
bundled scenario grids, and an experiment service for running the voting
protocol with human participants.
"""

from .elections import (
    Ballot,
    CandidateSet,
    WinnerDistribution,
    expected_outcome_utility,
    sample_winning_set,
    tally,
    winner_distribution,
)
from .scenarios import (
    Scenario,
    ScenarioFormatError,
    builtin_scenario,
    builtin_scenarios,
    load_scenario_file,
    parse_scenario,
    serialize_scenario,
)
from .strategies import (
    BestResponse,
    Classification,
    HeuristicLabel,
    best_response,
    classify_ballot,
    is_sincere,
    regret_min_ballot,
    take_x_best,
    truthful_ballot,
)
from .uncertainty import (
    CompletionModel,
    IndependentApproval,
    ResourceLimitError,
    SingleVote,
    UniformSubsets,
    WeightedBallots,
    expected_utility_bruteforce,
    expected_utility_exact,
    expected_utility_mc,
    increment_distribution,
    parse_model_spec,
)

__version__ = "0.1.0"

__all__ = [
    "Ballot",
    "BestResponse",
    "CandidateSet",
    "Classification",
    "CompletionModel",
    "HeuristicLabel",
    "IndependentApproval",
    "ResourceLimitError",
    "Scenario",
    "ScenarioFormatError",
    "SingleVote",
    "UniformSubsets",
    "WeightedBallots",
    "WinnerDistribution",
    "best_response",
    "builtin_scenario",
    "builtin_scenarios",
    "classify_ballot",
    "expected_outcome_utility",
    "expected_utility_bruteforce",
    "expected_utility_exact",
    "expected_utility_mc",
    "increment_distribution",
    "is_sincere",
    "load_scenario_file",
    "parse_model_spec",
    "parse_scenario",
    "regret_min_ballot",
    "sample_winning_set",
    "serialize_scenario",
    "take_x_best",
    "tally",
    "truthful_ballot",
    "winner_distribution",
]
