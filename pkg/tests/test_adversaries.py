import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from densitygt.adversaries import (
    HeapConfig,
    LazyAdversary,
    PhaseEnded,
    PhasedAdversary,
    WeightAdversary,
    check_heaps,
    lazy_adversary_answer,
    observation_checks,
    random_heap_config,
    select_heaps,
    select_heaps_k2_disjoint,
    weight_adversary_answer,
    weight_constant,
)
from densitygt.core import (
    Answer,
    ElementSet,
    InconsistentTranscript,
    Instance,
    consistent_candidates,
    yes_threshold,
)
from densitygt.strategies import STRATEGIES, Strategy, play, verify_strategy


def es(n, members):
    return ElementSet.of(n, members)


# -- lazy adversary -----------------------------------------------------------


def test_lazy_keeps_larger_side():
    inst = Instance(6, 1, Fraction(1, 2))
    adv = LazyAdversary(inst)
    assert adv.answer(es(6, [0, 1])) is Answer.NO  # 4 stay on NO vs 2 on YES
    assert len(adv.family) == 4
    # 2 candidates each way: tie goes to NO
    assert lazy_adversary_answer(adv, es(6, [2, 3])) is Answer.NO
    assert len(adv.family) == 2


def test_lazy_forced_no_on_useless_query():
    inst = Instance(8, 2, Fraction(1, 3))
    adv = LazyAdversary(inst)
    assert adv.answer(ElementSet.full(8)) is Answer.NO
    assert len(adv.family) == math.comb(8, 2)


def test_lazy_forced_yes():
    inst = Instance(4, 3, Fraction(1, 2))
    adv = LazyAdversary(inst)
    assert adv.answer(es(4, [0, 1])) is Answer.YES  # every triple meets {0, 1}
    assert all(d in consistent_candidates(adv.transcript) for d in adv.family)


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 9), st.data())
def test_lazy_never_empties_family(n, data):
    k = data.draw(st.integers(1, n))
    alpha = data.draw(st.sampled_from([Fraction(1, 2), Fraction(1, 3), Fraction(2, 5)]))
    adv = LazyAdversary(Instance(n, k, alpha))
    for _ in range(data.draw(st.integers(1, 8))):
        q = data.draw(st.integers(1, (1 << n) - 1))
        adv.answer(ElementSet(q, n))
        assert len(adv.family) >= 1
        assert {d.mask for d in adv.family} == {d.mask for d in consistent_candidates(adv.transcript)}


def test_lazy_record_rejects_contradiction():
    inst = Instance(4, 1, Fraction(1, 2))
    adv = LazyAdversary(inst)
    adv.record(es(4, [0, 1]), Answer.NO)
    adv.record(es(4, [2]), Answer.NO)
    with pytest.raises(InconsistentTranscript):
        adv.record(es(4, [3]), Answer.NO)


class ThreeQueryScheme(Strategy):
    """n=10, k=4, alpha=2/5: ask 4, then 2, then 1 (binary search on YES sides)."""

    name = "three-query"

    def applicability(self, inst):
        ok = (inst.n, inst.k, inst.alpha, inst.m) == (10, 4, Fraction(2, 5), 1)
        return ok, "only for (10, 4, 2/5, 1)"

    def claimed_bound(self, inst):
        return 3

    def procedure(self, inst):
        n = inst.n

        def search(live, known):
            # binary search keeping at least one certified defective
            while len(live) > 1:
                half = live[: len(live) // 2]
                if (yield ElementSet.of(n, half)):
                    live, known = half, yes_threshold(len(half), inst.alpha)
                else:
                    live, known = live[len(half):], known - yes_threshold(len(half), inst.alpha) + 1
            return live

        a, b, rest = [0, 1, 2, 3], [4, 5], [6, 7, 8, 9]
        if (yield ElementSet.of(n, a)):
            return ElementSet.of(n, (yield from search(a, 2)))
        if (yield ElementSet.of(n, b)):
            return ElementSet.of(n, (yield from search(b, 1)))
        if (yield ElementSet.of(n, rest[:1])):
            return ElementSet.of(n, rest[:1])
        # NO on {6}: at least 3 defectives among the 4 left, so 7 is one of them
        return ElementSet.of(n, rest[1:2])


def test_three_query_scheme_against_lazy():
    inst = Instance(10, 4, Fraction(2, 5))
    scheme = ThreeQueryScheme()
    adv = LazyAdversary(inst)
    transcript, found = play(scheme, inst, adv)
    assert len(transcript) == 3
    assert found.issubset(adv.certified())
    report = verify_strategy(scheme, inst)
    assert report.ok and report.worst_queries == 3


@pytest.mark.parametrize("name, args", [("algw", (24, 2, "2/11")), ("m1-partition", (24, 1, "2/11"))])
def test_lazy_count_is_at_most_worst_case(name, args):
    n, k, alpha = args
    inst = Instance(n, k, alpha)
    transcript, found = play(STRATEGIES[name], inst, LazyAdversary(inst))
    worst = verify_strategy(STRATEGIES[name], inst).worst_queries
    assert len(transcript) <= worst


# -- weight adversary -----------------------------------------------------------


def test_weight_constant():
    assert weight_constant(1) == 6
    assert weight_constant(2) == 8 * 255


def test_weight_default_threshold_and_phase():
    inst = Instance(12, 1, Fraction(1, 2))
    adv = WeightAdversary(inst)
    assert adv.threshold == 6 * 2
    assert not adv.ended
    with pytest.raises(PhaseEnded):
        adv.answer(es(12, [0]))  # would leave 11 < 12 live elements
    assert adv.ended and len(adv.live) == 12


def test_small_query_evicts_its_members():
    inst = Instance(30, 2, Fraction(1, 3))
    adv = WeightAdversary(inst, threshold=0)
    q = es(30, [0, 1, 2])
    assert weight_adversary_answer(adv, q) is Answer.NO
    assert adv.live == set(range(3, 30))
    assert all(adv.weights[x] == 1 for x in q)


def test_big_query_needs_repeats():
    inst = Instance(30, 2, Fraction(2, 7))  # a = 3, floor(k/alpha) = 7
    adv = WeightAdversary(inst, threshold=0)
    span = 7
    q = ElementSet.of(30, range(span))
    repeats = math.ceil(span / inst.a)
    for r in range(1, repeats + 1):
        adv.answer(q)
        evicted = not (set(q) & adv.live)
        assert evicted == (r == repeats)
    assert adv.weights[0] == Fraction(repeats * inst.a, span)


def test_phase_end_leaves_state_untouched():
    inst = Instance(10, 1, Fraction(1, 2))
    adv = WeightAdversary(inst, threshold=8)
    adv.answer(es(10, [0, 1]))
    before = (list(adv.weights), set(adv.live), len(adv.transcript))
    with pytest.raises(PhaseEnded):
        adv.answer(es(10, [2]))
    assert (list(adv.weights), set(adv.live), len(adv.transcript)) == before
    with pytest.raises(PhaseEnded):
        adv.answer(es(10, [5]))


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 3), st.sampled_from([Fraction(1, 2), Fraction(1, 3), Fraction(2, 7), Fraction(2, 11)]),
       st.randoms(use_true_random=False))
def test_weight_bookkeeping(k, alpha, rnd):
    n = 40
    inst = Instance(n, k, alpha)
    adv = WeightAdversary(inst, threshold=0)
    for r in range(1, 30):
        size = rnd.randint(1, inst.max_query_size)
        q = ElementSet.of(n, rnd.sample(range(n), size))
        adv.answer(q)
        assert adv.total_weight() <= r * inst.a
        assert all(w >= 0 for w in adv.weights)
        # an element is live exactly while its weight is below 1
        assert adv.live == {x for x in range(n) if adv.weights[x] < 1}


def _run_until_phase_end(adv, rng, n, limit, max_steps=500):
    for _ in range(max_steps):
        q = ElementSet.of(n, rng.sample(range(n), rng.randint(1, limit)))
        try:
            adv.answer(q)
        except PhaseEnded:
            return True
    return False


def test_observations_on_k1_toy_run():
    inst = Instance(40, 1, Fraction(1, 2))
    for seed in range(20):
        adv = WeightAdversary(inst)
        assert _run_until_phase_end(adv, random.Random(seed), 40, inst.max_query_size)
        report = observation_checks(adv, seed=seed)
        assert report.ok, report.failures()


def test_observations_on_k2_with_threshold_override():
    inst = Instance(60, 2, Fraction(1, 3))
    for seed in range(10):
        adv = WeightAdversary(inst, threshold=20)
        assert _run_until_phase_end(adv, random.Random(seed), 60, inst.max_query_size)
        report = observation_checks(adv, samples=100, seed=seed)
        assert report.ok, report.failures()
        assert set(report.checks) == {"live_size", "big_set_sizes", "multiplicity", "transversal_consistency"}


def test_big_family_keeps_only_big_queries():
    inst = Instance(20, 2, Fraction(1, 3))
    adv = WeightAdversary(inst, threshold=0)
    adv.answer(es(20, [0, 1]))
    adv.answer(es(20, [2, 3, 4, 5]))
    assert adv.big_family() == [frozenset({2, 3, 4, 5})]
    assert 2 * inst.k <= 4  # multiplicity cap for k = 2


def test_phased_adversary_stays_consistent():
    inst = Instance(12, 2, Fraction(1, 3))
    for name in ["partition-refine", "linear", "algw", "m1-partition"]:
        s = STRATEGIES[name]
        if not s.applicability(inst)[0]:
            continue
        adv = PhasedAdversary(inst, threshold=3)
        transcript, found = play(s, inst, adv)
        assert found.issubset(adv.lazy.certified())
        assert len(consistent_candidates(transcript)) >= 1
        # the run may finish inside the weight phase; either way it started with NO answers
        assert transcript.entries[0][1] is Answer.NO


# -- heaps ------------------------------------------------------------------------


def test_heap_config_validation():
    with pytest.raises(ValueError):
        select_heaps(HeapConfig(1, 1, 1, 1, (frozenset({0, 1}),)))  # size 2 > beta*a
    with pytest.raises(ValueError):
        select_heaps(HeapConfig(1, 1, 2, 1, (frozenset({0}), frozenset({0, 1}))))  # multiplicity 2 > l
    assert HeapConfig(2, 2, 2, 1).ground_size == 60


def test_single_heap():
    config = HeapConfig(1, 2, 1, 2, (frozenset({0, 1}), frozenset({3}), frozenset({1, 4})))
    result = select_heaps(config)
    assert len(result.heaps) == 1 and len(result.heaps[0]) >= 2
    assert check_heaps(config, result) == []


@pytest.mark.parametrize("seed", range(25))
def test_heaps_k2_l2_beta2(seed):
    config = random_heap_config(2, 2, 2, 1, seed)
    assert config.ground_size == 60 and config.violations() == []
    result = select_heaps(config)
    assert check_heaps(config, result) == []
    assert result.iterations <= 3
    # intermediate sizes: after s iterations each heap has >= beta*a*(2^(kl-s) - 1)
    for s, sizes in enumerate(result.size_history):
        assert min(sizes) >= config.target * ((1 << (config.k * config.l - s)) - 1)


def test_k2_disjoint_examples():
    h1, h2 = select_heaps_k2_disjoint(2, [{0, 1, 2, 3}])
    assert h1 <= {0, 1, 2, 3} and len(h1) == 2
    assert h2 == {4, 5}
    h1, h2 = select_heaps_k2_disjoint(2, [])
    assert len(h1) == len(h2) == 2 and not h1 & h2
    fam = [{0, 1}, {2, 3}, {4, 5}]
    h1, h2 = select_heaps_k2_disjoint(2, fam)
    assert all(not (s & h1 and s & h2) for s in map(set, fam))


@pytest.mark.parametrize("family", [[{0, 1, 2, 3, 4}], [{0, 1}, {1, 2}], [set()], [{7}]])
def test_k2_disjoint_rejects(family):
    with pytest.raises(ValueError):
        select_heaps_k2_disjoint(2, family)


def set_partitions(items):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]
        yield [[first]] + part


def disjoint_families(a):
    """Every family of disjoint nonempty sets of size <= 2a over range(3a).

    Partitions of range(3a) plus a marker: the marker's block is the uncovered part.
    """
    marker = -1
    for part in set_partitions([marker] + list(range(3 * a))):
        family = [set(b) for b in part if marker not in b]
        if all(len(s) <= 2 * a for s in family):
            yield family


def check_k2(a, family):
    h1, h2 = select_heaps_k2_disjoint(a, family)
    assert len(h1) >= a and len(h2) >= a and not h1 & h2
    assert all(not (s & h1 and s & h2) for s in family)


@pytest.mark.parametrize("a", [1, 2])
def test_k2_disjoint_exhaustive_small(a):
    count = 0
    for family in disjoint_families(a):
        check_k2(a, family)
        count += 1
    assert count > 0
