import itertools
from fractions import Fraction

import pytest

from avkit.elections import CandidateSet, tally, outcome_utility
from avkit.scenarios import builtin_scenario
from avkit.uncertainty import (
    IndependentApproval,
    ResourceLimitError,
    SingleVote,
    UniformSubsets,
    WeightedBallots,
    expected_utility_bruteforce,
    expected_utility_exact,
    expected_utility_mc,
    increment_distribution,
    model_from_json,
    model_to_json,
    parse_model_spec,
)

ABCDE = CandidateSet(("A", "B", "C", "D", "E"))
AB = CandidateSet(("A", "B"))

WEIGHTED = WeightedBallots(
    (
        (frozenset({"A", "B"}), Fraction(1, 3)),
        (frozenset({"E"}), Fraction(1, 3)),
        (frozenset(), Fraction(1, 3)),
    )
)


def ballot(text):
    return ABCDE.ballot_from_string(text)


class TestIncrementDistribution:
    def test_no_missing_voters_is_point_mass(self):
        for model in (UniformSubsets(), SingleVote(), WEIGHTED):
            assert increment_distribution(model, ABCDE, 0) == {(0, 0, 0, 0, 0): 1}

    def test_single_candidate_two_voters_is_binomial(self):
        dist = increment_distribution(UniformSubsets(), CandidateSet(("A",)), 2)
        assert dist == {(0,): Fraction(1, 4), (1,): Fraction(1, 2), (2,): Fraction(1, 4)}

    def test_uniform_subsets_matches_ordered_enumeration(self):
        # Independent oracle: enumerate all 32^3 ordered ballot triples.
        n = 3
        expected = {}
        masks = list(range(32))
        p = Fraction(1, 32**n)
        for combo in itertools.product(masks, repeat=n):
            counts = tuple(sum(mask >> i & 1 for mask in combo) for i in range(5))
            expected[counts] = expected.get(counts, Fraction(0)) + p
        assert increment_distribution(UniformSubsets(), ABCDE, n) == expected

    def test_independent_half_equals_uniform(self):
        for n in (0, 1, 2, 3):
            assert increment_distribution(
                IndependentApproval(Fraction(1, 2)), ABCDE, n
            ) == increment_distribution(UniformSubsets(), ABCDE, n)

    def test_single_vote_law(self):
        dist = increment_distribution(SingleVote(), AB, 1)
        assert dist == {(1, 0): Fraction(1, 2), (0, 1): Fraction(1, 2)}
        dist = increment_distribution(SingleVote(allow_abstain=True), AB, 1)
        assert dist == {
            (1, 0): Fraction(1, 3),
            (0, 1): Fraction(1, 3),
            (0, 0): Fraction(1, 3),
        }

    def test_single_vote_convolution(self):
        dist = increment_distribution(SingleVote(), AB, 2)
        assert dist == {
            (2, 0): Fraction(1, 4),
            (1, 1): Fraction(1, 2),
            (0, 2): Fraction(1, 4),
        }

    def test_probabilities_sum_to_one(self):
        for model in (UniformSubsets(), IndependentApproval(Fraction(1, 4)), SingleVote(), WEIGHTED):
            for n in (0, 1, 2, 3):
                assert sum(increment_distribution(model, ABCDE, n).values()) == 1

    def test_negative_n_rejected(self):
        with pytest.raises(ValueError, match="nonnegative"):
            increment_distribution(UniformSubsets(), ABCDE, -1)


class TestModelValidation:
    def test_independent_approval_range(self):
        with pytest.raises(ValueError, match="\\[0, 1\\]"):
            IndependentApproval(Fraction(3, 2))

    def test_weighted_weights_must_sum_to_one(self):
        with pytest.raises(ValueError, match="sum to 1"):
            WeightedBallots(((frozenset({"A"}), Fraction(1, 2)),))

    def test_weighted_rejects_negative_weight(self):
        with pytest.raises(ValueError, match="nonnegative"):
            WeightedBallots(
                ((frozenset({"A"}), Fraction(3, 2)), (frozenset(), Fraction(-1, 2)))
            )

    def test_weighted_unknown_candidate_caught_at_use(self):
        model = WeightedBallots(((frozenset({"Z"}), Fraction(1)),))
        with pytest.raises(ValueError, match="unknown candidates"):
            increment_distribution(model, ABCDE, 1)


class TestExpectedUtilityExact:
    def test_take_one_in_1b(self):
        s = builtin_scenario("1b")
        assert expected_utility_exact(s, ballot("D"), 1, UniformSubsets()) == 13

    def test_regret_in_3_three_winner(self):
        s = builtin_scenario("3")
        assert expected_utility_exact(s, ballot("ABCE"), 3, UniformSubsets()) == Fraction(-10, 3)

    def test_truthful_in_3_one_missing(self):
        s = builtin_scenario("3").with_missing_voters(1)
        value = expected_utility_exact(s, ballot("ABE"), 1, UniformSubsets())
        assert value == Fraction(1387, 128)  # 3.4675/32 dollars
        assert value == Fraction(34675, 10000) / 32 * 100

    def test_take_one_in_3_one_missing(self):
        s = builtin_scenario("3").with_missing_voters(1)
        assert expected_utility_exact(s, ballot("E"), 1, UniformSubsets()) == Fraction(75, 8)

    def test_2a_all_ballots_zero(self):
        s = builtin_scenario("2a")
        for n in (0, 1):
            scn = s.with_missing_voters(n)
            for k in (1, 2):
                for b in ABCDE.all_ballots():
                    assert expected_utility_exact(scn, b, k, UniformSubsets()) == 0

    def test_n_zero_collapses_to_outcome_utility(self):
        for s in (builtin_scenario("1b"), builtin_scenario("3")):
            for model in (UniformSubsets(), SingleVote(), WEIGHTED):
                for k in (1, 2, 3):
                    for b in (ballot("E"), ballot("ABD"), frozenset()):
                        direct = outcome_utility(tally(s.base_scores, b, ABCDE), k, s.utilities)
                        assert expected_utility_exact(s, b, k, model) == direct

    def test_k_out_of_range(self):
        with pytest.raises(ValueError, match="k must be"):
            expected_utility_exact(builtin_scenario("3"), ballot("E"), 6, UniformSubsets())


class TestBruteForceOracle:
    def test_matches_exact_on_small_grid(self):
        # The full grid lives in the acceptance suite; this is a quick sample.
        models = (UniformSubsets(), IndependentApproval(Fraction(1, 4)), SingleVote(True), WEIGHTED)
        for sid in ("1b", "3"):
            base = builtin_scenario(sid)
            truthful = frozenset(
                lab for lab, u in zip(ABCDE.labels, base.utilities) if u > 0
            )
            for n in (0, 1, 2):
                s = base.with_missing_voters(n)
                for k in (1, 3):
                    for model in models:
                        assert expected_utility_bruteforce(
                            s, truthful, k, model
                        ) == expected_utility_exact(s, truthful, k, model)

    def test_hand_reference_take_one(self):
        s = builtin_scenario("3").with_missing_voters(1)
        assert expected_utility_bruteforce(s, ballot("E"), 1, UniformSubsets()) == Fraction(75, 8)

    def test_n_zero_degenerates(self):
        s = builtin_scenario("4")
        b = ballot("CD")
        direct = outcome_utility(tally(s.base_scores, b, ABCDE), 3, s.utilities)
        assert expected_utility_bruteforce(s, b, 3, UniformSubsets()) == direct == 35

    def test_resource_limit(self):
        s = builtin_scenario("3").with_missing_voters(6)
        with pytest.raises(ResourceLimitError, match="exceed"):
            expected_utility_bruteforce(s, ballot("E"), 1, UniformSubsets())
        # explicit low cap: refuses rather than truncating
        with pytest.raises(ResourceLimitError):
            expected_utility_bruteforce(
                s.with_missing_voters(2), ballot("E"), 1, UniformSubsets(), max_tuples=100
            )


class TestMonteCarlo:
    def test_deterministic_for_fixed_seed(self):
        s = builtin_scenario("3").with_missing_voters(1)
        a = expected_utility_mc(s, ballot("ABE"), 1, UniformSubsets(), 5_000, seed=7)
        b = expected_utility_mc(s, ballot("ABE"), 1, UniformSubsets(), 5_000, seed=7)
        assert a == b
        c = expected_utility_mc(s, ballot("ABE"), 1, UniformSubsets(), 5_000, seed=8)
        assert a != c

    def test_tie_break_only_noise(self):
        s = builtin_scenario("1b")
        mean, se = expected_utility_mc(s, ballot("D"), 1, UniformSubsets(), 1_000, seed=3)
        assert se > 0
        assert abs(mean - 13.0) <= 4 * se

    def test_against_exact_value(self):
        s = builtin_scenario("3").with_missing_voters(1)
        exact = float(Fraction(1387, 128))
        mean, se = expected_utility_mc(s, ballot("ABE"), 1, UniformSubsets(), 100_000, seed=11)
        assert abs(mean - exact) <= 4 * se

    def test_zero_utility_scenario_is_exactly_zero(self):
        s = builtin_scenario("2a")
        for seed in (0, 5):
            mean, se = expected_utility_mc(s, ballot("ABE"), 1, UniformSubsets(), 500, seed=seed)
            assert mean == 0.0
            assert se == 0.0

    def test_sampling_all_models(self):
        s = builtin_scenario("3").with_missing_voters(2)
        for model in (UniformSubsets(), IndependentApproval(Fraction(1, 4)), SingleVote(), WEIGHTED):
            mean, se = expected_utility_mc(s, ballot("ABE"), 2, model, 2_000, seed=1)
            exact = float(expected_utility_exact(s, ballot("ABE"), 2, model))
            assert abs(mean - exact) <= 5 * max(se, 1e-9)

    def test_needs_at_least_one_sample(self):
        with pytest.raises(ValueError, match="at least one sample"):
            expected_utility_mc(builtin_scenario("3"), ballot("E"), 1, UniformSubsets(), 0, 0)


class TestModelSerialization:
    def test_round_trip(self):
        for model in (
            UniformSubsets(),
            IndependentApproval(Fraction(1, 4)),
            SingleVote(),
            SingleVote(allow_abstain=True),
            WEIGHTED,
        ):
            assert model_from_json(model_to_json(model)) == model

    def test_parse_model_spec(self):
        assert parse_model_spec("uniform-subsets") == UniformSubsets()
        assert parse_model_spec("independent-approval:1/4") == IndependentApproval(Fraction(1, 4))
        assert parse_model_spec("independent-approval:0.25") == IndependentApproval(Fraction(1, 4))
        assert parse_model_spec("single-vote") == SingleVote(False)
        assert parse_model_spec("single-vote:abstain") == SingleVote(True)
        with pytest.raises(ValueError, match="unknown completion model"):
            parse_model_spec("zipf:2")

    def test_parse_weighted_file(self, tmp_path):
        path = tmp_path / "w.json"
        path.write_text(
            '[{"ballot": "AB", "weight": "1/3"}, {"ballot": "E", "weight": "1/3"},'
            ' {"ballot": "", "weight": "1/3"}]'
        )
        assert parse_model_spec(f"weighted:{path}") == WEIGHTED
