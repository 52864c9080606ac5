"""Answering-side players and the heap-selection procedure.

* :class:`LazyAdversary` keeps whichever answer leaves more consistent
  hypotheses alive; any questioner it plays against certifies a lower-bound
  witness for that run only.
* :class:`WeightAdversary` answers NO while charging weight to asked elements
  and evicting elements whose weight reaches 1, until the live set would drop
  below its threshold.
* :func:`select_heaps` carves k disjoint heaps out of a ground set so that no
  set of a bounded-degree family touches two heaps.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .core import (
    DEFAULT_ENUMERATION_CAP,
    Answer,
    CandidateFamily,
    ElementSet,
    Instance,
    InconsistentTranscript,
    Semantics,
    Transcript,
    check_enumerable,
    intersect_masks,
    k_subset_masks,
    mask_answer,
    max_useful_query_size,
)


class LazyAdversary:
    """Greedy consistency-keeping answerer (ties answer NO)."""

    def __init__(self, inst: Instance, cap: int = DEFAULT_ENUMERATION_CAP):
        if inst.semantics is not Semantics.EXACTLY_K:
            raise ValueError("the lazy adversary tracks exactly-k hypotheses only")
        check_enumerable(inst.n, inst.k, cap)
        self.instance = inst
        self.transcript = Transcript(inst)
        self._family = k_subset_masks(inst.n, inst.k)

    @property
    def family(self) -> CandidateFamily:
        return CandidateFamily(self.instance, tuple(self._family))

    def answer(self, query: ElementSet) -> Answer:
        if not self._family:
            raise InconsistentTranscript("lazy adversary has no consistent hypothesis left")
        if not len(query):
            raise ValueError("the empty set is not a valid query")
        q, alpha = query.mask, self.instance.alpha
        yes = [d for d in self._family if mask_answer(q, d, alpha)]
        no = [d for d in self._family if not mask_answer(q, d, alpha)]
        if len(yes) > len(no):
            self._family, answer = yes, Answer.YES
        else:
            self._family, answer = no, Answer.NO
        self.transcript = self.transcript.extend(query, answer)
        return answer

    __call__ = answer

    def record(self, query: ElementSet, answer: Answer) -> None:
        """Apply an answer chosen elsewhere (it must stay consistent)."""
        alpha = self.instance.alpha
        kept = [d for d in self._family if mask_answer(query.mask, d, alpha) == bool(answer)]
        if not kept:
            raise InconsistentTranscript(f"answer {answer.value} to {query} contradicts every hypothesis")
        self._family = kept
        self.transcript = self.transcript.extend(query, answer)

    def certified(self) -> ElementSet:
        return ElementSet(intersect_masks(self._family), self.instance.n)


def lazy_adversary_answer(state: LazyAdversary, query: ElementSet) -> Answer:
    return state.answer(query)


class PhaseEnded(Exception):
    """The weight adversary's live set would fall below its threshold."""


def weight_constant(k: int) -> int:
    """c = 2k^2 (2^(2k^2) - 1), the heap-selection constant for l = beta = 2k."""
    return 2 * k * k * ((1 << (2 * k * k)) - 1)


class WeightAdversary:
    """All-NO adversary with per-element weight bookkeeping.

    A query of size at most a charges 1 to each member; a larger query charges
    a / floor(k/alpha).  Members reaching weight 1 leave the live set.  Before
    answering, the adversary checks whether the eviction would push the live
    set below ``threshold`` (default c*a); if so it raises :class:`PhaseEnded`
    and leaves its state untouched.
    """

    def __init__(self, inst: Instance, threshold: Optional[int] = None):
        self.instance = inst
        self.a = inst.a
        self.span = max_useful_query_size(inst)
        self.threshold = weight_constant(inst.k) * self.a if threshold is None else threshold
        self.weights = [Fraction(0)] * inst.n
        self.live = set(range(inst.n))
        self.asked: list[ElementSet] = []
        self.transcript = Transcript(inst)
        self.ended = len(self.live) < self.threshold

    def charge(self, query: ElementSet) -> Fraction:
        return Fraction(1) if len(query) <= self.a else Fraction(self.a, self.span)

    def total_weight(self) -> Fraction:
        return sum(self.weights, Fraction(0))

    def answer(self, query: ElementSet) -> Answer:
        if self.ended:
            raise PhaseEnded(f"phase over with {len(self.live)} live elements")
        if not len(query):
            raise ValueError("the empty set is not a valid query")
        w = self.charge(query)
        evicted = {x for x in query if x in self.live and self.weights[x] + w >= 1}
        if len(self.live) - len(evicted) < self.threshold:
            self.ended = True
            raise PhaseEnded(
                f"answering would leave {len(self.live) - len(evicted)} live elements, "
                f"below threshold {self.threshold}"
            )
        for x in query:
            self.weights[x] += w
        self.live -= evicted
        self.asked.append(query)
        self.transcript = self.transcript.extend(query, Answer.NO)
        return Answer.NO

    __call__ = answer

    def big_family(self) -> list[frozenset]:
        """F' = {F & S' : F asked, |F| > a}, one entry per asked query."""
        return [frozenset(q) & self.live for q in self.asked if len(q) > self.a]


def weight_adversary_answer(state: WeightAdversary, query: ElementSet) -> Answer:
    return state.answer(query)


class PhasedAdversary:
    """Weight adversary while its phase lasts, lazy adversary afterwards.

    The weight phase also stops early if NO would contradict every remaining
    hypothesis, so the combined answers are always realisable.
    """

    def __init__(self, inst: Instance, threshold: Optional[int] = None, cap: int = DEFAULT_ENUMERATION_CAP):
        self.weight = WeightAdversary(inst, threshold)
        self.lazy = LazyAdversary(inst, cap)
        self.phase_length: Optional[int] = None if not self.weight.ended else 0

    def answer(self, query: ElementSet) -> Answer:
        if self.phase_length is None:
            alpha = self.lazy.instance.alpha
            if any(not mask_answer(query.mask, d, alpha) for d in self.lazy._family):
                try:
                    answer = self.weight.answer(query)
                except PhaseEnded:
                    pass
                else:
                    self.lazy.record(query, answer)
                    return answer
            self.phase_length = len(self.weight.asked)
        return self.lazy.answer(query)

    __call__ = answer

    @property
    def transcript(self) -> Transcript:
        return self.lazy.transcript


@dataclass
class ObservationReport:
    checks: dict = field(default_factory=dict)

    def add(self, name: str, ok: bool, witness=None) -> None:
        self.checks[name] = (ok, witness)

    @property
    def ok(self) -> bool:
        return all(ok for ok, _ in self.checks.values())

    def failures(self) -> dict:
        return {name: w for name, (ok, w) in self.checks.items() if not ok}


def observation_checks(state: WeightAdversary, samples: int = 200, seed: int = 0) -> ObservationReport:
    """Check the four end-of-phase facts on a weight adversary's state.

    1. |S'| >= threshold.
    2. Every member of F' has size <= floor(k/alpha) <= k(a+1) <= 2ka.
    3. Every live element lies in <= floor(k/alpha)/a <= 2k members of F'.
    4. k-subsets of S' meeting each member of F' at most once are consistent
       with every recorded answer (exhaustive when few, else sampled).
    """
    inst, a, span, k = state.instance, state.a, state.span, state.instance.k
    report = ObservationReport()
    report.add("live_size", len(state.live) >= state.threshold,
               None if len(state.live) >= state.threshold else len(state.live))

    big = state.big_family()
    chain_ok = span <= k * (a + 1) <= 2 * k * a
    oversized = next((sorted(f) for f in big if len(f) > span), None)
    report.add("big_set_sizes", chain_ok and oversized is None,
               oversized if oversized is not None else (None if chain_ok else (span, k * (a + 1), 2 * k * a)))

    count = {x: 0 for x in state.live}
    for f in big:
        for x in f:
            count[x] += 1
    heavy = next(((x, c) for x, c in sorted(count.items()) if c * a > span or c > 2 * k), None)
    report.add("multiplicity", heavy is None, heavy)

    witness = None
    for cand in _transversals(sorted(state.live), big, k, samples, seed):
        if not state.transcript.consistent_with(cand):
            witness = ElementSet(cand, inst.n)
            break
    report.add("transversal_consistency", witness is None, witness)
    return report


def _transversals(live: list[int], big: list[frozenset], k: int, samples: int, seed: int):
    """k-subsets of ``live`` meeting each set of ``big`` at most once, as masks."""
    def admissible(chosen, x):
        return all(not (x in f and any(y in f for y in chosen)) for f in big)

    if len(live) < k:
        return
    if math.comb(len(live), k) <= 5000:
        for combo in itertools.combinations(live, k):
            if all(sum(1 for y in combo if y in f) <= 1 for f in big):
                yield sum(1 << x for x in combo)
        return
    rng = random.Random(seed)
    for _ in range(samples):
        order = live[:]
        rng.shuffle(order)
        chosen: list[int] = []
        for x in order:
            if admissible(chosen, x):
                chosen.append(x)
                if len(chosen) == k:
                    yield sum(1 << y for y in chosen)
                    break


# -- heap selection -----------------------------------------------------------


@dataclass(frozen=True)
class HeapConfig:
    k: int
    l: int
    beta: int
    a: int
    family: tuple[frozenset, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "family", tuple(frozenset(s) for s in self.family))

    @property
    def ground_size(self) -> int:
        return self.k * self.beta * ((1 << (self.k * self.l)) - 1) * self.a

    @property
    def target(self) -> int:
        return self.beta * self.a

    def violations(self) -> list[str]:
        out = []
        if min(self.k, self.l, self.beta, self.a) < 1:
            out.append("k, l, beta and a must all be positive")
            return out
        size = self.ground_size
        mult = [0] * size
        for i, s in enumerate(self.family):
            if not s:
                out.append(f"family set {i} is empty")
            if len(s) > self.target:
                out.append(f"family set {i} has {len(s)} > beta*a = {self.target} elements")
            for x in s:
                if not 0 <= x < size:
                    out.append(f"family set {i} leaves the ground set: {x}")
                    break
                mult[x] += 1
        over = [x for x, c in enumerate(mult) if c > self.l]
        if over:
            out.append(f"element {over[0]} lies in {mult[over[0]]} > l = {self.l} sets")
        return out

    def validate(self) -> None:
        problems = self.violations()
        if problems:
            raise ValueError("invalid heap config: " + "; ".join(problems))


@dataclass(frozen=True)
class HeapResult:
    heaps: tuple[frozenset, ...]
    iterations: int
    size_history: tuple[tuple[int, ...], ...]
    cleaned: bool


def select_heaps(config: HeapConfig) -> HeapResult:
    """Iteratively select half-covered heaps, then clean up if stopped early.

    Sets are added to the working subfamily in input order; the initial heaps
    are contiguous index blocks.
    """
    config.validate()
    k, l = config.k, config.l
    block = config.target * ((1 << (k * l)) - 1)
    heaps = [set(range(i * block, (i + 1) * block)) for i in range(k)]
    family = list(config.family)
    history = [tuple(len(h) for h in heaps)]
    iterations = 0
    cleaned = False
    while iterations < k * l - 1:
        covered: set = set()
        used = 0
        selected = None
        for s in family:
            covered |= s
            used += 1
            # excess of covered elements over half the heap, doubled to stay integral
            excess = [2 * len(h & covered) - len(h) for h in heaps]
            top = max(excess)
            if top >= 0:
                selected = excess.index(top)
                break
        if selected is None:
            union = set().union(*family) if family else set()
            heaps = [h - union for h in heaps]
            cleaned = True
            break
        heaps = [h & covered if i == selected else h - covered for i, h in enumerate(heaps)]
        family = family[used:]
        iterations += 1
        history.append(tuple(len(h) for h in heaps))
    return HeapResult(tuple(frozenset(h) for h in heaps), iterations, tuple(history), cleaned)


def check_heaps(config: HeapConfig, result: HeapResult, minimum: Optional[int] = None) -> list[str]:
    """Postcondition violations (empty list when the heaps are valid)."""
    need = config.target if minimum is None else minimum
    out = []
    if len(result.heaps) != config.k:
        out.append(f"expected {config.k} heaps, got {len(result.heaps)}")
    for i, h in enumerate(result.heaps):
        if len(h) < need:
            out.append(f"heap {i} has {len(h)} < {need} elements")
    for i, j in itertools.combinations(range(len(result.heaps)), 2):
        if result.heaps[i] & result.heaps[j]:
            out.append(f"heaps {i} and {j} overlap")
    for idx, s in enumerate(config.family):
        touched = [i for i, h in enumerate(result.heaps) if s & h]
        if len(touched) > 1:
            out.append(f"family set {idx} meets heaps {touched}")
    return out


def random_heap_config(k: int, l: int, beta: int, a: int, seed: int, attempts: Optional[int] = None) -> HeapConfig:
    """A random family respecting the size and multiplicity limits."""
    rng = random.Random(seed)
    size = k * beta * ((1 << (k * l)) - 1) * a
    target = beta * a
    if attempts is None:
        attempts = max(4, 2 * l * size // target)
    mult = [0] * size
    family = []
    for _ in range(attempts):
        width = rng.randint(1, target)
        if rng.random() < 0.5:
            # a local set: consecutive-ish window, tends to sit inside one heap
            start = rng.randrange(size)
            pool = [(start + i) % size for i in range(min(size, 3 * target))]
            members = rng.sample(pool, min(width, len(pool)))
        else:
            members = rng.sample(range(size), width)
        if all(mult[x] < l for x in members):
            for x in members:
                mult[x] += 1
            family.append(frozenset(members))
    return HeapConfig(k, l, beta, a, tuple(family))


def select_heaps_k2_disjoint(a: int, family: Sequence[Iterable[int]]) -> tuple[frozenset, frozenset]:
    """Two disjoint heaps of exactly a elements in a ground set of size 3a.

    ``family`` must consist of pairwise disjoint sets of size at most 2a.  Each
    family set and each uncovered element is a block; the heaps take blocks
    whole (largest first) and are trimmed to their a lowest members.
    """
    size = 3 * a
    sets = [frozenset(s) for s in family]
    seen: set = set()
    for i, s in enumerate(sets):
        if not s:
            raise ValueError(f"family set {i} is empty")
        if len(s) > 2 * a:
            raise ValueError(f"family set {i} has {len(s)} > 2a = {2 * a} elements")
        if any(not 0 <= x < size for x in s):
            raise ValueError(f"family set {i} leaves the ground set of size {size}")
        if s & seen:
            raise ValueError(f"family set {i} overlaps an earlier set")
        seen |= s
    blocks = [sorted(s) for s in sets] + [[x] for x in range(size) if x not in seen]
    blocks.sort(key=lambda b: (-len(b), b))
    first: list[int] = []
    rest = iter(blocks)
    for b in rest:
        first.extend(b)
        if len(first) >= a:
            break
    second = [x for b in rest for x in b]
    if len(first) < a or len(second) < a:
        raise AssertionError("block split left a heap short")
    return frozenset(sorted(first)[:a]), frozenset(sorted(second)[:a])
