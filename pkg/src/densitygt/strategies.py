"""Adaptive questioner strategies.

Each strategy is written as a generator procedure that yields queries and is
sent answers; it returns the set of elements it claims are defective.  The
public decision interface, :meth:`Strategy.decide`, replays that procedure
against a transcript, so a strategy carries no hidden state between calls and
any prefix of a transcript can be resumed.

Element choice is deterministic throughout: "a set of size s" is always the s
lowest-indexed live elements and "put an element aside" drops the lowest one.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Callable, Generator, Optional, Sequence, Union

from .core import (
    DEFAULT_ENUMERATION_CAP,
    Answer,
    ElementSet,
    Instance,
    InstanceTooLarge,
    Semantics,
    Transcript,
    ceil_log2,
    check_enumerable,
    floor_log2_ratio,
    intersect_masks,
    k_subset_masks,
    mask_answer,
    max_useful_query_size,
    yes_threshold,
)

Procedure = Generator[ElementSet, Answer, ElementSet]


class NotApplicable(ValueError):
    """The instance falls outside a strategy's hypotheses."""


class StrategyError(RuntimeError):
    """A strategy received answers its own reasoning rules out."""


@dataclass(frozen=True)
class Ask:
    query: ElementSet


@dataclass(frozen=True)
class Output:
    found: ElementSet


StrategyDecision = Union[Ask, Output]


# -- shared building blocks ---------------------------------------------------


def _ask(n: int, members: Sequence[int]) -> Generator[ElementSet, Answer, bool]:
    answer = yield ElementSet.of(n, members)
    return bool(answer)


def _halve(inst: Instance, live: list[int], known: int, stop: int = 1):
    """Binary search on ``live``, known to hold at least ``known`` defectives.

    Ask the lower half; YES keeps it with ceil(alpha*|F|) known defectives,
    NO keeps the upper half with ``known - ceil(alpha*|F|) + 1``.  Runs until
    at most ``stop`` elements are live and returns ``(live, known)``.
    """
    while len(live) > stop:
        half = live[: len(live) // 2]
        need = yes_threshold(len(half), inst.alpha)
        if need > known:
            raise StrategyError(
                f"cannot halve {len(live)} elements holding only {known} known defectives"
            )
        if (yield from _ask(inst.n, half)):
            live, known = half, need
        else:
            live, known = live[len(half):], known - need + 1
    return live, known


def _find_one(inst: Instance, live: list[int], known: int = 1):
    live, known = yield from _halve(inst, live, known)
    if not live or known < 1:
        raise StrategyError("binary search ended without a certified defective")
    return live[0]


def _refine(inst: Instance, live: list[int], need: int):
    """Disjoint size-a rounds, binary search inside each YES block, recurse."""
    a = inst.a
    found: list[int] = []
    while need > 0:
        yes_blocks = []
        i = 0
        while len(yes_blocks) < need and i < len(live):
            block = live[i:i + a]
            i += a
            if (yield from _ask(inst.n, block)):
                yes_blocks.append(block)
        if not yes_blocks:
            raise StrategyError("a refinement round produced no YES answer")
        extracted = []
        for block in yes_blocks:
            extracted.append((yield from _find_one(inst, block)))
        found.extend(extracted)
        need -= len(yes_blocks)
        taken = set(extracted)
        live = [x for block in yes_blocks for x in block if x not in taken]
    return found


def _result(inst: Instance, members: Sequence[int]) -> ElementSet:
    out = ElementSet.of(inst.n, members)
    if len(out) != inst.m:
        raise StrategyError(f"strategy produced {len(out)} elements, expected {inst.m}")
    return out


def halving_state(inst: Instance, answers: Sequence[tuple[int, bool]], n_live: int, known: int):
    """Fold halving answers into the (live size, known defectives) pair.

    ``answers`` holds ``(query_size, yes)`` pairs.  Used by tests to check that
    the density condition survives each halving step.
    """
    for size, yes in answers:
        need = yes_threshold(size, inst.alpha)
        n_live, known = (size, need) if yes else (n_live - size, known - need + 1)
    return n_live, known


# -- strategy interface -------------------------------------------------------


class Strategy:
    name: str = ""
    description: str = ""

    def applicability(self, inst: Instance) -> tuple[bool, str]:
        raise NotImplementedError

    def claimed_bound(self, inst: Instance) -> int:
        raise NotImplementedError

    def procedure(self, inst: Instance) -> Procedure:
        raise NotImplementedError

    def require(self, inst: Instance) -> None:
        ok, reason = self.applicability(inst)
        if not ok:
            raise NotApplicable(f"{self.name} does not apply to {inst.label()}: {reason}")

    def start(self, inst: Instance) -> Procedure:
        self.require(inst)
        return self.procedure(inst)

    def decide(self, transcript: Transcript) -> StrategyDecision:
        """Next move given everything asked so far (deterministic replay)."""
        self.require(transcript.instance)
        return self._replay(transcript)[0]

    def _replay(self, transcript: Transcript) -> tuple[StrategyDecision, Procedure]:
        gen = self.procedure(transcript.instance)
        entries = transcript.entries
        decision = _advance(gen, None)
        for consumed, (asked, answer) in enumerate(entries):
            if isinstance(decision, Output):
                raise ValueError("transcript continues past the strategy's output")
            if asked != decision.query:
                raise ValueError(
                    f"transcript entry {consumed} ({asked}) differs from "
                    f"{self.name}'s move ({decision.query})"
                )
            decision = _advance(gen, answer)
        return decision, gen

    def __repr__(self) -> str:
        return f"<strategy {self.name}>"


def _advance(gen: Procedure, answer: Optional[Answer]) -> StrategyDecision:
    try:
        return Ask(next(gen) if answer is None else gen.send(answer))
    except StopIteration as stop:
        return Output(stop.value)


def _condition(ok: bool, reason: str) -> tuple[bool, str]:
    return ok, ("applicable" if ok else reason)


def _density_ok(inst: Instance) -> bool:
    alpha = inst.alpha
    return alpha.numerator * inst.n <= alpha.denominator * inst.k


class BinaryHalving(Strategy):
    name = "binary"
    description = "plain halving while the defective density stays above alpha (m = 1)"

    def applicability(self, inst):
        if inst.m != 1:
            return False, "needs m = 1"
        return _condition(_density_ok(inst), "needs alpha <= k/n")

    def claimed_bound(self, inst):
        return ceil_log2(inst.n)

    def procedure(self, inst):
        x = yield from _find_one(inst, list(range(inst.n)), inst.k)
        return _result(inst, [x])


class BinaryHalvingMulti(Strategy):
    name = "binary-multi"
    description = "halving down to at most 2m/alpha elements, then partition-refine"

    def applicability(self, inst):
        return _condition(_density_ok(inst), "needs alpha <= k/n")

    def residual_cap(self, inst: Instance) -> int:
        """Largest residual size: floor(2m/alpha)."""
        alpha = inst.alpha
        return 2 * inst.m * alpha.denominator // alpha.numerator

    def residual_constant(self, inst: Instance) -> int:
        if inst.m == 1:
            return 0
        a = inst.a
        return -(-self.residual_cap(inst) // a) + inst.m * ceil_log2(a) + inst.m

    def claimed_bound(self, inst):
        return ceil_log2(inst.n) + self.residual_constant(inst)

    def procedure(self, inst):
        live = list(range(inst.n))
        if inst.m == 1:
            x = yield from _find_one(inst, live, inst.k)
            return _result(inst, [x])
        live, known = yield from _halve(inst, live, inst.k, stop=self.residual_cap(inst))
        if known < inst.m:
            raise StrategyError("residual set holds fewer than m known defectives")
        found = yield from _refine(inst, live, inst.m)
        return _result(inst, found)


class DoublingT(Strategy):
    name = "doubling"
    description = "one offset query of size n - 2^t a, then doubling-down rounds (m = 1)"

    @staticmethod
    def _t(inst: Instance) -> int:
        return floor_log2_ratio(inst.n, inst.a)

    def applicability(self, inst):
        if inst.m != 1:
            return False, "needs m = 1"
        # k >= n/a - floor(log(n/a)) - 1, cross-multiplied by a
        ok = inst.a * (inst.k + self._t(inst) + 1) >= inst.n
        return _condition(ok, "needs k >= n/a - floor(log2(n/a)) - 1")

    def claimed_bound(self, inst):
        return ceil_log2(inst.n) + 1

    def procedure(self, inst):
        a, n = inst.a, inst.n
        live = list(range(n))
        if n <= 2 * a:
            x = yield from _find_one(inst, live, 1)
            return _result(inst, [x])
        t = self._t(inst)
        r = n - (a << t)
        if r == 0:
            x = yield from self._three_then_double(inst, live, t)
        else:
            head = live[:r]
            if (yield from _ask(n, head)):
                x = yield from _find_one(inst, head, yes_threshold(r, inst.alpha))
            else:
                x = yield from self._double_down(inst, live[r:], t)
        return _result(inst, [x])

    @staticmethod
    def _double_down(inst: Instance, live: list[int], t: int):
        # |live| = 2^t a with at least 2^t - t defectives
        while t >= 2:
            head = live[: (inst.a << (t - 1))]
            if (yield from _ask(inst.n, head)):
                return (yield from _find_one(inst, head, yes_threshold(len(head), inst.alpha)))
            live = live[len(head):]
            t -= 1
        return (yield from _find_one(inst, live, 1))

    @classmethod
    def _three_then_double(cls, inst: Instance, live: list[int], t: int):
        # |live| = 2^t a (t >= 2) with at least 2^t - t - 1 defectives
        size = inst.a << (t - 2)
        for i in range(3):
            block = live[i * size:(i + 1) * size]
            if (yield from _ask(inst.n, block)):
                return (yield from _find_one(inst, block, yes_threshold(size, inst.alpha)))
        return (yield from cls._double_down(inst, live[3 * size:], t - 2))


class M1Partition(Strategy):
    name = "m1-partition"
    description = "ask k*a elements, then size-a blocks of the rest (m = 1)"

    def applicability(self, inst):
        if inst.m != 1:
            return False, "needs m = 1"
        span = -(-inst.n // inst.a)
        slack = span - inst.k - 1
        # k + log2(k) + 1 <= ceil(n/a)  <=>  k <= 2^slack
        ok = slack >= 0 and inst.k <= (1 << slack)
        return _condition(ok, "needs k + log2(k) + 1 <= ceil(n/a)")

    def claimed_bound(self, inst):
        return -(-inst.n // inst.a) - inst.k + ceil_log2(inst.a)

    def procedure(self, inst):
        n, a = inst.n, inst.a
        live = list(range(n))
        head = live[: inst.k * a]
        if (yield from _ask(n, head)):
            x = yield from _find_one(inst, head, yes_threshold(len(head), inst.alpha))
            return _result(inst, [x])
        rest = live[len(head):]
        while len(rest) > 2 * a:
            block = rest[:a]
            if (yield from _ask(n, block)):
                x = yield from _find_one(inst, block)
                return _result(inst, [x])
            rest = rest[a:]
        x = yield from _find_one(inst, rest)
        return _result(inst, [x])


class PartitionRefine(Strategy):
    name = "partition-refine"
    description = "disjoint size-a rounds with binary search in YES blocks, recursing on leftovers"

    def applicability(self, inst):
        return True, "applicable"

    def claimed_bound(self, inst):
        a = inst.a
        return -(-inst.n // a) + inst.m * ceil_log2(a) + inst.k

    def procedure(self, inst):
        found = yield from _refine(inst, list(range(inst.n)), inst.m)
        return _result(inst, found)


class LinearPartition(Strategy):
    name = "linear"
    description = "ask every size-a block, then every element of m YES blocks"

    def applicability(self, inst):
        return True, "applicable"

    def claimed_bound(self, inst):
        return inst.n // inst.a + inst.m * inst.a + 1

    def procedure(self, inst):
        n, a = inst.n, inst.a
        live = list(range(n))
        yes_blocks = []
        for i in range(0, n, a):
            block = live[i:i + a]
            if (yield from _ask(n, block)):
                yes_blocks.append(block)
        found = []
        for block in yes_blocks[: inst.m]:
            for x in block:
                if (yield from _ask(n, [x])):
                    found.append(x)
        if len(found) < inst.m:
            raise StrategyError("fewer than m defectives among the chosen blocks")
        return _result(inst, found[: inst.m])


class SetAside(Strategy):
    name = "set-aside"
    description = "put k-1 elements aside and binary search the other n-k+1 (m = 1)"

    def applicability(self, inst):
        if inst.m != 1:
            return False, "needs m = 1"
        alpha = inst.alpha
        ok = alpha.numerator * (inst.n - inst.k + 1) <= 2 * alpha.denominator
        return _condition(ok, "needs alpha <= 2/(n-k+1)")

    def claimed_bound(self, inst):
        return ceil_log2(inst.n - inst.k + 1)

    def procedure(self, inst):
        x = yield from _find_one(inst, list(range(inst.n - inst.k + 1)))
        return _result(inst, [x])


def w_parameters(alpha) -> tuple[int, int, int]:
    """``(a, delta, p)``: a = floor(1/alpha), delta = floor(2 frac(1/alpha)),
    p = smallest power of two >= a."""
    num, den = alpha.numerator, alpha.denominator
    a = den // num
    delta = 2 * (den % num) // num
    return a, delta, 1 << ceil_log2(a)


def w_small_limit(alpha) -> int:
    """Largest n for which algorithm W needs only ceil(log2(n-1)) queries."""
    a, delta, p = w_parameters(alpha)
    return 3 * a + delta + p


class AlgorithmW(Strategy):
    name = "algw"
    description = "size-regime algorithm for two defectives (m = 1)"

    def applicability(self, inst):
        ok = inst.k == 2 and inst.m == 1
        return _condition(ok, "needs k = 2 and m = 1")

    def claimed_bound(self, inst):
        a = inst.a
        limit = w_small_limit(inst.alpha)
        n, rounds = inst.n, 0
        best = 0
        while n > limit:
            # size-a query: YES finishes with ceil(log a) more, NO drops a elements
            rounds += 1
            best = max(best, rounds + ceil_log2(a))
            n -= a
        return max(best, rounds + ceil_log2(max(n - 1, 1)))

    def procedure(self, inst):
        n = inst.n
        a, delta, p = w_parameters(inst.alpha)
        big = 2 * a + delta
        live = list(range(n))
        while True:
            size = len(live)
            if size <= 2:
                # both remaining elements are defective
                return _result(inst, live[:1])
            if size <= p + 1:
                half = live[: size // 2]
                if (yield from _ask(n, half)):
                    x = yield from _find_one(inst, half)
                else:
                    x = yield from _find_one(inst, live[size // 2 + 1:])
                return _result(inst, [x])
            if size <= 2 * p + 1:
                head = live[: p + 1]
                if (yield from _ask(n, head)):
                    x = yield from _find_one(inst, head[1:])
                else:
                    x = yield from _find_one(inst, live[p + 1:])
                return _result(inst, [x])
            if size <= 3 * a + delta + p:
                head = live[:big]
                rest = head[1:] if (yield from _ask(n, head)) else live[big:]
                if len(rest) > p:
                    block = rest[:a]
                    if (yield from _ask(n, block)):
                        x = yield from _find_one(inst, block)
                        return _result(inst, [x])
                    rest = rest[a:]
                x = yield from _find_one(inst, rest)
                return _result(inst, [x])
            block = live[:a]
            if (yield from _ask(n, block)):
                x = yield from _find_one(inst, block)
                return _result(inst, [x])
            live = live[a:]


STRATEGIES: dict[str, Strategy] = {
    s.name: s
    for s in (
        BinaryHalving(),
        BinaryHalvingMulti(),
        DoublingT(),
        M1Partition(),
        PartitionRefine(),
        LinearPartition(),
        SetAside(),
        AlgorithmW(),
    )
}


def get_strategy(name: str) -> Strategy:
    try:
        return STRATEGIES[name]
    except KeyError:
        raise KeyError(f"unknown strategy {name!r}; choose from {', '.join(STRATEGIES)}") from None


# -- simulation ---------------------------------------------------------------


def play(
    strategy: Strategy,
    inst: Instance,
    respond: Callable[[ElementSet], Answer],
    max_queries: Optional[int] = None,
) -> tuple[Transcript, Optional[ElementSet]]:
    """Drive a strategy against an answering function.

    Returns the transcript and the output set (None if ``max_queries`` ran out).
    """
    gen = strategy.start(inst)
    transcript = Transcript(inst)
    try:
        query = next(gen)
        while True:
            if not 1 <= len(query) <= max_useful_query_size(inst):
                raise StrategyError(f"{strategy.name} asked a query of size {len(query)}")
            if max_queries is not None and len(transcript) >= max_queries:
                return transcript, None
            answer = respond(query)
            transcript = transcript.extend(query, answer)
            query = gen.send(answer)
    except StopIteration as stop:
        return transcript, stop.value


@dataclass(frozen=True)
class Hidden:
    """Sampled verification: ``samples`` hidden sets drawn with ``random.Random(seed)``."""

    seed: int
    samples: int = 200


EXHAUSTIVE = "exhaustive"


@dataclass(frozen=True)
class VerifyReport:
    strategy: str
    instance: Instance
    worst_queries: int
    claimed_bound: int
    simulations: int
    correctness_ok: bool
    failing_hidden_set: Optional[ElementSet] = None

    @property
    def bound_ok(self) -> bool:
        return self.worst_queries <= self.claimed_bound

    @property
    def ok(self) -> bool:
        return self.bound_ok and self.correctness_ok


def hidden_pool(inst: Instance, cap: int = DEFAULT_ENUMERATION_CAP) -> list[int]:
    """Every hidden set the semantics allows, as masks."""
    if inst.semantics is Semantics.EXACTLY_K:
        check_enumerable(inst.n, inst.k, cap)
        return k_subset_masks(inst.n, inst.k)
    total = sum(math.comb(inst.n, j) for j in range(inst.k, inst.n + 1))
    if total > cap:
        raise InstanceTooLarge(f"instance too large to enumerate: {total} hidden sets exceed cap {cap}")
    return [mask for j in range(inst.k, inst.n + 1) for mask in k_subset_masks(inst.n, j)]


def sample_hidden(inst: Instance, rng: random.Random) -> int:
    size = inst.k
    if inst.semantics is Semantics.AT_LEAST_K:
        size = rng.randint(inst.k, inst.n)
    mask = 0
    for x in rng.sample(range(inst.n), size):
        mask |= 1 << x
    return mask


def verify_strategy(
    strategy: Strategy,
    inst: Instance,
    mode: Union[str, Hidden] = EXHAUSTIVE,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> VerifyReport:
    """Check soundness and the query budget of ``strategy`` on ``inst``.

    Exhaustive mode walks the strategy's decision tree once, carrying the
    hidden sets that reach each node.  Those are exactly the hypotheses
    consistent with the node's transcript, so an output is certified iff it
    lies in their common intersection.
    """
    strategy.require(inst)
    bound = strategy.claimed_bound(inst)
    if isinstance(mode, Hidden):
        return _verify_sampled(strategy, inst, mode, bound)
    if mode != EXHAUSTIVE:
        raise ValueError(f"unknown verification mode {mode!r}")

    alpha = inst.alpha
    limit = max_useful_query_size(inst)
    worst = 0
    failing = None
    need = [0] + [yes_threshold(size, alpha) for size in range(1, limit + 1)]
    # iterative DFS over (transcript, group of hidden masks); one child inherits
    # the parent's live generator, the other replays its transcript
    stack = [(Transcript(inst), hidden_pool(inst, cap), None, None)]
    while stack:
        transcript, group, gen, answer = stack.pop()
        if gen is None:
            decision, gen = strategy._replay(transcript)
        else:
            decision = _advance(gen, answer)
        if isinstance(decision, Output):
            worst = max(worst, len(transcript))
            found = decision.found.mask
            if failing is None and (
                len(decision.found) != inst.m or found & ~intersect_masks(group)
            ):
                bad = next((d for d in group if found & ~d), group[0])
                failing = ElementSet(bad, inst.n)
            continue
        query = decision.query
        size = len(query)
        if not 1 <= size <= limit:
            raise StrategyError(f"{strategy.name} asked a query of size {size}")
        q, t = query.mask, need[size]
        yes, no = [], []
        for d in group:
            (yes if (q & d).bit_count() >= t else no).append(d)
        if yes and no:
            stack.append((transcript.extend(query, Answer.NO), no, None, None))
            stack.append((transcript.extend(query, Answer.YES), yes, gen, Answer.YES))
        elif yes:
            stack.append((transcript.extend(query, Answer.YES), yes, gen, Answer.YES))
        else:
            stack.append((transcript.extend(query, Answer.NO), no, gen, Answer.NO))
    return VerifyReport(strategy.name, inst, worst, bound, _pool_size(inst), failing is None, failing)


def _pool_size(inst: Instance) -> int:
    if inst.semantics is Semantics.EXACTLY_K:
        return math.comb(inst.n, inst.k)
    return sum(math.comb(inst.n, j) for j in range(inst.k, inst.n + 1))


def _verify_sampled(strategy: Strategy, inst: Instance, mode: Hidden, bound: int) -> VerifyReport:
    rng = random.Random(mode.seed)
    worst = 0
    failing = None
    for _ in range(mode.samples):
        hidden = sample_hidden(inst, rng)
        hidden_set = ElementSet(hidden, inst.n)
        transcript, found = play(
            strategy, inst, lambda q: Answer.of(mask_answer(q.mask, hidden, inst.alpha))
        )
        worst = max(worst, len(transcript))
        if failing is None and (found is None or len(found) != inst.m or not found.issubset(hidden_set)):
            failing = hidden_set
    return VerifyReport(strategy.name, inst, worst, bound, mode.samples, failing is None, failing)
