import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from densitygt.core import (
    Answer,
    ElementSet,
    Instance,
    Semantics,
    Transcript,
    certified_defectives,
    consistent_candidates,
    k_subset_masks,
    mask_answer,
    max_useful_query_size,
    parse_alpha,
)
from densitygt.strategies import (
    EXHAUSTIVE,
    STRATEGIES,
    Ask,
    Hidden,
    NotApplicable,
    Output,
    get_strategy,
    halving_state,
    hidden_pool,
    play,
    verify_strategy,
    w_parameters,
    w_small_limit,
)


def inst(n, k, alpha, m=1, semantics=Semantics.EXACTLY_K):
    return Instance(n, k, parse_alpha(alpha), m, semantics)


def hidden_responder(instance, hidden):
    return lambda q: Answer.of(mask_answer(q.mask, hidden, instance.alpha))


def test_names_are_stable():
    assert sorted(STRATEGIES) == sorted(
        ["binary", "binary-multi", "doubling", "m1-partition", "partition-refine", "linear", "set-aside", "algw"]
    )
    assert get_strategy("algw") is STRATEGIES["algw"]
    with pytest.raises(KeyError):
        get_strategy("nope")


@pytest.mark.parametrize(
    "name, args, worst, bound",
    [
        ("binary", (8, 8, "1/2"), 3, 3),
        ("binary", (10, 4, "2/5"), 4, 4),
        ("binary", (2, 1, "1/2"), 1, 1),
        ("algw", (24, 2, "2/11"), 5, 5),
        ("m1-partition", (24, 1, "2/11"), 7, 7),
        ("m1-partition", (24, 2, "1/5"), 6, 6),
        ("partition-refine", (20, 1, "1/4"), 7, 8),
        ("linear", (12, 2, "1/3", 2), 10, 11),
        ("set-aside", (10, 4, "2/7"), 3, 3),
    ],
)
def test_exhaustive_examples(name, args, worst, bound):
    report = verify_strategy(STRATEGIES[name], inst(*args), EXHAUSTIVE)
    assert report.correctness_ok
    assert report.worst_queries == worst
    assert report.claimed_bound == bound
    assert report.simulations == math.comb(args[0], args[1])


def test_linear_formula_small():
    report = verify_strategy(STRATEGIES["linear"], inst(10, 1, "1/2"))
    assert report.claimed_bound == 5 + 2 + 1 and report.ok


def test_binary_multi_two_targets():
    s = STRATEGIES["binary-multi"]
    i = inst(16, 8, "1/2", 2)
    report = verify_strategy(s, i)
    assert report.ok
    assert report.claimed_bound == 4 + s.residual_constant(i)


def test_binary_multi_with_one_target_is_binary():
    i = inst(12, 5, "2/5")
    for d in k_subset_masks(12, 5)[::7]:
        a = play(STRATEGIES["binary"], i, hidden_responder(i, d))
        b = play(STRATEGIES["binary-multi"], i, hidden_responder(i, d))
        assert a == b
    assert STRATEGIES["binary-multi"].claimed_bound(i) == STRATEGIES["binary"].claimed_bound(i)


@pytest.mark.parametrize("n", [6, 7, 9, 10])
def test_doubling_basics(n):
    # n = 2a: plain binary search; n = 3a: offset query of size a
    i = inst(n, n // 3 + 1, "1/3")
    s = STRATEGIES["doubling"]
    if not s.applicability(i)[0]:
        pytest.skip("condition fails")
    report = verify_strategy(s, i)
    assert report.ok


def test_doubling_first_query_sizes():
    s = STRATEGIES["doubling"]
    assert len(s.decide(Transcript(inst(9, 2, "1/3"))).query) == 3
    six = inst(6, 1, "1/3")
    assert verify_strategy(s, six).worst_queries <= 1 + 2


def test_m1_partition_yes_branch_short():
    i = inst(24, 1, "2/11")
    s = STRATEGIES["m1-partition"]
    first = s.decide(Transcript(i)).query
    assert len(first) == 5
    t = Transcript(i).extend(first, Answer.YES)
    count = 1
    while isinstance(d := s.decide(t), Ask):
        t = t.extend(d.query, Answer.YES)
        count += 1
    assert count <= 1 + math.ceil(math.log2(5))


def test_set_aside_trivial_and_sizes():
    s = STRATEGIES["set-aside"]
    i = inst(4, 4, "1/2")
    assert isinstance(s.decide(Transcript(i)), Output)
    i = inst(10, 4, "2/7")
    gen_sizes = []
    for d in k_subset_masks(10, 4):
        t, _ = play(s, i, hidden_responder(i, d))
        gen_sizes += [len(q) for q, _ in t.entries]
    # halving asks floor(7/2); alpha <= 2/7 only gives a >= floor(7/2)
    assert max(gen_sizes) == 7 // 2 <= i.a


def test_algw_parameters():
    assert w_parameters(Fraction(2, 11)) == (5, 1, 8)
    assert w_small_limit(Fraction(2, 11)) == 24
    assert w_parameters(Fraction(1, 3)) == (3, 0, 4)


def test_algw_big_yes_certifies_both():
    i = inst(24, 2, "2/11")
    s = STRATEGIES["algw"]
    first = s.decide(Transcript(i)).query
    assert len(first) == 11
    t = Transcript(i).extend(first, Answer.YES)
    family = consistent_candidates(t)
    assert all((d & first) == d for d in family)


def test_algw_claim_grid_small():
    for alpha in ["1/2", "1/3", "2/5", "2/11"]:
        limit = w_small_limit(parse_alpha(alpha))
        for n in range(3, limit + 1):
            r = verify_strategy(STRATEGIES["algw"], inst(n, 2, alpha))
            assert r.correctness_ok and r.worst_queries == math.ceil(math.log2(n - 1)), (alpha, n)


@pytest.mark.parametrize(
    "name, args",
    [
        ("binary", (10, 3, "1/2")),
        ("binary", (10, 5, "1/2", 2)),
        ("doubling", (24, 1, "1/3")),
        ("m1-partition", (6, 2, "1/3")),
        ("set-aside", (10, 4, "1/2")),
        ("algw", (10, 3, "1/2")),
    ],
)
def test_inapplicable_instances(name, args):
    s = STRATEGIES[name]
    ok, reason = s.applicability(inst(*args))
    assert not ok and reason
    with pytest.raises(NotApplicable):
        verify_strategy(s, inst(*args))


small_instances = st.integers(2, 10).flatmap(
    lambda n: st.tuples(
        st.just(n),
        st.integers(1, n),
        st.sampled_from(["1/2", "1/3", "2/5", "2/7", "1/4", "2/11"]),
    )
).flatmap(lambda t: st.tuples(st.just(t), st.integers(1, t[1])))


@settings(max_examples=80, deadline=None)
@given(small_instances, st.sampled_from(sorted(STRATEGIES)), st.randoms(use_true_random=False))
def test_decide_replay_matches_play(params, name, rnd):
    (n, k, alpha), m = params
    i = inst(n, k, alpha, m)
    s = STRATEGIES[name]
    if not s.applicability(i)[0]:
        return
    hidden = rnd.choice(k_subset_masks(n, k))
    transcript, found = play(s, i, hidden_responder(i, hidden))
    # replay through the transcript-only interface, prefix by prefix
    t = Transcript(i)
    for query, answer in transcript.entries:
        decision = s.decide(t)
        assert decision == Ask(query)
        assert 1 <= len(query) <= max_useful_query_size(i)
        t = t.extend(query, answer)
    assert s.decide(t) == Output(found)
    # the output is certified by the consistent family itself
    assert found.issubset(certified_defectives(consistent_candidates(transcript)))


@settings(max_examples=40, deadline=None)
@given(small_instances, st.sampled_from(sorted(STRATEGIES)))
def test_exhaustive_verify_matches_candidate_oracle(params, name):
    (n, k, alpha), m = params
    i = inst(n, k, alpha, m)
    s = STRATEGIES[name]
    if not s.applicability(i)[0]:
        return
    report = verify_strategy(s, i)
    worst = 0
    ok = True
    for d in k_subset_masks(n, k):
        t, found = play(s, i, hidden_responder(i, d))
        worst = max(worst, len(t))
        ok &= len(found) == m and found.issubset(certified_defectives(consistent_candidates(t)))
    assert report.worst_queries == worst
    assert report.correctness_ok == ok


@given(
    st.integers(2, 200),
    st.sampled_from(["1/2", "1/3", "2/5", "2/11", "3/7"]),
    st.lists(st.booleans(), max_size=12),
    st.data(),
)
def test_halving_keeps_density(n, alpha, answers, data):
    alpha = parse_alpha(alpha)
    k = data.draw(st.integers(max(1, -(-alpha.numerator * n // alpha.denominator)), n))
    i = Instance(n, k, alpha)
    live, known = n, k
    assert alpha * live <= known
    for yes in answers:
        if live < 2:
            break
        live, known = halving_state(i, [(live // 2, yes)], live, known)
        assert alpha * live <= known


def test_hidden_mode_is_seeded():
    s = STRATEGIES["partition-refine"]
    i = inst(12, 3, "1/3")
    assert verify_strategy(s, i, Hidden(5, 50)) == verify_strategy(s, i, Hidden(5, 50))
    report = verify_strategy(s, i, Hidden(5, 50))
    assert report.simulations == 50 and report.ok


def test_at_least_k_pool_and_soundness():
    i = inst(8, 3, "1/2", 1, Semantics.AT_LEAST_K)
    assert len(hidden_pool(i)) == sum(math.comb(8, j) for j in range(3, 9))
    for name in ["partition-refine", "linear", "m1-partition", "doubling"]:
        s = STRATEGIES[name]
        if s.applicability(i)[0]:
            assert verify_strategy(s, i).ok, name


def test_play_respects_query_limit():
    i = inst(24, 2, "2/11")
    d = k_subset_masks(24, 2)[100]
    t, found = play(STRATEGIES["algw"], i, hidden_responder(i, d), max_queries=2)
    assert found is None and len(t) == 2


def test_random_hidden_sets_always_found():
    rng = random.Random(3)
    i = inst(18, 6, "1/3", 2)
    for _ in range(50):
        d = sum(1 << x for x in rng.sample(range(18), 6))
        _, found = play(STRATEGIES["partition-refine"], i, hidden_responder(i, d))
        assert found.issubset(ElementSet(d, 18)) and len(found) == 2
