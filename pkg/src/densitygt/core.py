"""Problem model for threshold group testing.

A query ``Q`` answers YES exactly when ``|Q & D| >= alpha * |Q|`` for the hidden
defective set ``D``.  Everything here works in exact integer arithmetic: alpha
is a :class:`fractions.Fraction` and every threshold test is cross-multiplied.

Element sets are int bitmasks over ``{0, ..., n-1}`` wrapped in
:class:`ElementSet`; hot loops elsewhere use the raw masks directly.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Union

DEFAULT_ENUMERATION_CAP = 2_000_000


class InstanceTooLarge(ValueError):
    """Raised when C(n, k) exceeds the enumeration cap."""


class InconsistentTranscript(ValueError):
    """Raised when no hypothesis is consistent with the recorded answers."""


class Semantics(enum.Enum):
    EXACTLY_K = "exactly-k"
    AT_LEAST_K = "at-least-k"


class Answer(enum.Enum):
    NO = "no"
    YES = "yes"

    def __bool__(self) -> bool:
        return self is Answer.YES

    @classmethod
    def of(cls, flag: bool) -> "Answer":
        return cls.YES if flag else cls.NO


def ceil_log2(x: int) -> int:
    """Smallest q with 2**q >= x, for integer x >= 1."""
    if x < 1:
        raise ValueError(f"ceil_log2 needs x >= 1, got {x}")
    return (x - 1).bit_length()


def floor_log2_ratio(p: int, q: int) -> int:
    """Largest t with 2**t <= p/q, for positive integers (t may be negative)."""
    if p <= 0 or q <= 0:
        raise ValueError("floor_log2_ratio needs positive arguments")
    t = p.bit_length() - q.bit_length()
    # 2**t <= p/q  <=>  q * 2**t <= p, handled for negative t by shifting p
    while _pow2_le(t, p, q):
        t += 1
    while not _pow2_le(t, p, q):
        t -= 1
    return t


def _pow2_le(t: int, p: int, q: int) -> bool:
    return (q << t) <= p if t >= 0 else q <= (p << -t)


def parse_alpha(value: Union[str, Fraction, tuple]) -> Fraction:
    """Accept ``"NUM/DEN"``, a Fraction or a ``(num, den)`` pair.

    Floats and decimal strings are refused: 0.4 must be spelled 2/5.
    """
    if isinstance(value, Fraction):
        alpha = value
    elif isinstance(value, tuple):
        num, den = value
        alpha = Fraction(int(num), int(den))
    elif isinstance(value, str):
        text = value.strip()
        if "/" not in text or "." in text or "e" in text.lower():
            hint = ""
            try:
                hint = f" (did you mean {Fraction(text)}?)"
            except ValueError:
                pass
            raise ValueError(f"alpha must be written NUM/DEN, got {value!r}{hint}")
        num_s, den_s = text.split("/", 1)
        alpha = Fraction(int(num_s), int(den_s))
    else:
        raise TypeError(f"alpha must be exact (NUM/DEN), got {type(value).__name__}")
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie strictly between 0 and 1, got {alpha}")
    return alpha


def floor_inv_alpha(alpha: Fraction) -> int:
    """a = floor(1/alpha): the largest query size on which NO means "no defective"."""
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie strictly between 0 and 1, got {alpha}")
    return alpha.denominator // alpha.numerator


def yes_threshold(size: int, alpha: Fraction) -> int:
    """Minimum number of defectives a size-``size`` query needs for YES."""
    return -((-alpha.numerator * size) // alpha.denominator)


@dataclass(frozen=True)
class ElementSet:
    """An immutable subset of ``{0, ..., n-1}`` stored as a bitmask."""

    mask: int
    n: int

    def __post_init__(self):
        if self.mask < 0 or self.mask >> self.n:
            raise ValueError(f"mask {self.mask:#x} is not a subset of range({self.n})")

    @classmethod
    def of(cls, n: int, members: Iterable[int]) -> "ElementSet":
        mask = 0
        for x in members:
            if not 0 <= x < n:
                raise ValueError(f"element {x} outside ground set of size {n}")
            mask |= 1 << x
        return cls(mask, n)

    @classmethod
    def full(cls, n: int) -> "ElementSet":
        return cls((1 << n) - 1, n)

    @classmethod
    def empty(cls, n: int) -> "ElementSet":
        return cls(0, n)

    def __len__(self) -> int:
        return self.mask.bit_count()

    def __iter__(self) -> Iterator[int]:
        mask = self.mask
        while mask:
            low = mask & -mask
            yield low.bit_length() - 1
            mask ^= low

    def __contains__(self, x: int) -> bool:
        return 0 <= x < self.n and bool(self.mask >> x & 1)

    def _check(self, other: "ElementSet") -> None:
        if other.n != self.n:
            raise ValueError("element sets over different ground sets")

    def __and__(self, other: "ElementSet") -> "ElementSet":
        self._check(other)
        return ElementSet(self.mask & other.mask, self.n)

    def __or__(self, other: "ElementSet") -> "ElementSet":
        self._check(other)
        return ElementSet(self.mask | other.mask, self.n)

    def __sub__(self, other: "ElementSet") -> "ElementSet":
        self._check(other)
        return ElementSet(self.mask & ~other.mask, self.n)

    def issubset(self, other: "ElementSet") -> bool:
        self._check(other)
        return self.mask & ~other.mask == 0

    def complement(self) -> "ElementSet":
        return ElementSet(((1 << self.n) - 1) & ~self.mask, self.n)

    def members(self) -> tuple[int, ...]:
        return tuple(self)

    def lowest(self, count: int) -> "ElementSet":
        """The ``count`` lowest-indexed members."""
        if count > len(self):
            raise ValueError(f"cannot take {count} of {len(self)} members")
        return ElementSet.of(self.n, itertools.islice(self, count))

    def __repr__(self) -> str:
        return "{" + ", ".join(map(str, self)) + "}"


@dataclass(frozen=True)
class Instance:
    n: int
    k: int
    alpha: Fraction
    m: int = 1
    semantics: Semantics = Semantics.EXACTLY_K

    def __post_init__(self):
        object.__setattr__(self, "alpha", parse_alpha(self.alpha))
        if not 1 <= self.m <= self.k <= self.n:
            raise ValueError(f"need 1 <= m <= k <= n, got m={self.m} k={self.k} n={self.n}")

    @property
    def a(self) -> int:
        return floor_inv_alpha(self.alpha)

    @property
    def max_query_size(self) -> int:
        return max_useful_query_size(self)

    def label(self) -> str:
        return f"({self.n}, {self.k}, {self.alpha}, {self.m})"


def max_useful_query_size(inst: Instance) -> int:
    """floor(k/alpha); larger queries are answered NO whatever the hidden set."""
    return inst.k * inst.alpha.denominator // inst.alpha.numerator


def oracle_answer(query: ElementSet, defectives: ElementSet, alpha: Fraction) -> Answer:
    if not len(query):
        raise ValueError("the empty set is not a valid query")
    return Answer.of(mask_answer(query.mask, defectives.mask, alpha))


def mask_answer(query: int, defectives: int, alpha: Fraction) -> bool:
    """Raw-mask form of :func:`oracle_answer` (no validation)."""
    return alpha.denominator * (query & defectives).bit_count() >= alpha.numerator * query.bit_count()


@dataclass(frozen=True)
class Transcript:
    instance: Instance
    entries: tuple[tuple[ElementSet, Answer], ...] = ()

    def __post_init__(self):
        for query, _ in self.entries:
            if query.n != self.instance.n:
                raise ValueError("query over the wrong ground set")

    def extend(self, query: ElementSet, answer: Answer) -> "Transcript":
        if query.n != self.instance.n:
            raise ValueError("query over the wrong ground set")
        return Transcript(self.instance, self.entries + ((query, answer),))

    def __len__(self) -> int:
        return len(self.entries)

    def consistent_with(self, defectives: int) -> bool:
        alpha = self.instance.alpha
        return all(mask_answer(q.mask, defectives, alpha) == bool(ans) for q, ans in self.entries)


@dataclass(frozen=True)
class CandidateFamily:
    """Size-k hypotheses consistent with a transcript (exactly-k semantics)."""

    instance: Instance
    masks: tuple[int, ...] = field(repr=False)

    def __len__(self) -> int:
        return len(self.masks)

    def __iter__(self) -> Iterator[ElementSet]:
        n = self.instance.n
        return (ElementSet(mask, n) for mask in self.masks)


def k_subset_masks(n: int, k: int) -> list[int]:
    """All size-k subsets of range(n) as bitmasks, in lexicographic order."""
    out = []
    for combo in itertools.combinations(range(n), k):
        mask = 0
        for x in combo:
            mask |= 1 << x
        out.append(mask)
    return out


def check_enumerable(n: int, k: int, cap: int = DEFAULT_ENUMERATION_CAP) -> None:
    count = math.comb(n, k)
    if count > cap:
        raise InstanceTooLarge(
            f"instance too large to enumerate: C({n}, {k}) = {count} exceeds cap {cap}"
        )


def consistent_candidates(transcript: Transcript, cap: int = DEFAULT_ENUMERATION_CAP) -> CandidateFamily:
    inst = transcript.instance
    if inst.semantics is not Semantics.EXACTLY_K:
        raise ValueError("candidate families are only maintained under exactly-k semantics")
    check_enumerable(inst.n, inst.k, cap)
    masks = k_subset_masks(inst.n, inst.k)
    alpha = inst.alpha
    for query, answer in transcript.entries:
        q, want = query.mask, bool(answer)
        masks = [d for d in masks if mask_answer(q, d, alpha) == want]
    return CandidateFamily(inst, tuple(masks))


def certified_defectives(family: CandidateFamily) -> ElementSet:
    """Elements that are defective under every consistent hypothesis."""
    if not family.masks:
        raise InconsistentTranscript("no hypothesis is consistent with the transcript")
    return ElementSet(intersect_masks(family.masks), family.instance.n)


def intersect_masks(masks: Iterable[int]) -> int:
    it = iter(masks)
    acc = next(it)
    for mask in it:
        acc &= mask
    return acc
