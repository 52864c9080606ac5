"""Exact minimax values of g(n, k, alpha, m) under exactly-k semantics.

A game state is the family of size-k hypotheses still consistent with the
answers so far; it is terminal once the hypotheses share at least m elements.
The questioner minimises and the answerer maximises the number of questions
left.  :class:`Solver` runs a depth-bounded search with two memo tables (exact
values and proven lower bounds) keyed by a canonical form of the family.

Symmetry reduction rests on twin classes: u and v are twins when swapping them
maps the family onto itself.  Queries are then described by how many members
they take from each class (lowest indices first); any two queries with equal
counts are related by a family automorphism and lead to isomorphic children.
"""

from __future__ import annotations

import enum
import itertools
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Iterator, Optional, Sequence

from .bounds import info_lower
from .core import (
    DEFAULT_ENUMERATION_CAP,
    ElementSet,
    Instance,
    InstanceTooLarge,
    Semantics,
    ceil_log2,
    check_enumerable,
    intersect_masks,
    k_subset_masks,
    max_useful_query_size,
    yes_threshold,
)
from .strategies import STRATEGIES, EXHAUSTIVE, verify_strategy

SOLVER_VERSION = "densitygt-solver/1"
DEFAULT_CANON_BUDGET = 120

Family = tuple[int, ...]


class CacheError(ValueError):
    """A cache line failed to parse or failed the sandwich check."""


@dataclass(frozen=True)
class SolveRecord:
    n: int
    k: int
    alpha_num: int
    alpha_den: int
    m: int
    g: Optional[int]
    semantics: str = Semantics.EXACTLY_K.value
    solver_version: str = SOLVER_VERSION
    status: str = "exact"
    lower: Optional[int] = None
    budget: Optional[int] = None
    elapsed: float = field(default=0.0, compare=False)

    @property
    def instance(self) -> Instance:
        return Instance(self.n, self.k, Fraction(self.alpha_num, self.alpha_den), self.m)

    @property
    def exact(self) -> bool:
        return self.status == "exact"

    def cache_line(self) -> str:
        fields = {f: getattr(self, f) for f in CACHE_FIELDS}
        return json.dumps(fields, sort_keys=False)

    def row(self) -> dict:
        return {
            "n": self.n, "k": self.k, "alpha": f"{self.alpha_num}/{self.alpha_den}",
            "m": self.m, "semantics": self.semantics, "g": self.g, "status": self.status,
            "lower": self.lower, "budget": self.budget, "solver_version": self.solver_version,
        }


CACHE_FIELDS = ("n", "k", "alpha_num", "alpha_den", "m", "semantics", "g", "solver_version")


# -- family utilities ---------------------------------------------------------


def _bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def degrees(family: Sequence[int], n: int) -> list[int]:
    deg = [0] * n
    for d in family:
        for x in _bits(d):
            deg[x] += 1
    return deg


def are_twins(u: int, v: int, family: Sequence[int], members: frozenset) -> bool:
    """Whether swapping u and v fixes the family (u and v of equal degree)."""
    bu, both = 1 << u, (1 << u) | (1 << v)
    for d in family:
        if d & both == bu and d ^ both not in members:
            return False
    return True


def twin_classes(
    family: Sequence[int], n: int, hint: Optional[Sequence[Sequence[int]]] = None,
    deg: Optional[list[int]] = None,
) -> list[list[int]]:
    """Partition range(n) into twin classes.

    ``hint`` is any partition already known to consist of twins (for example
    the atoms cut out by the queries so far); only its class representatives
    are compared, so a good hint makes this cheap.
    """
    if deg is None:
        deg = degrees(family, n)
    blocks = [list(b) for b in hint] if hint is not None else [[x] for x in range(n)]
    members = frozenset(family)
    merged: list[list[int]] = []
    by_degree: dict[int, list[list[int]]] = {}
    for block in blocks:
        rep = block[0]
        bucket = by_degree.setdefault(deg[rep], [])
        for cls in bucket:
            if are_twins(cls[0], rep, family, members):
                cls.extend(block)
                break
        else:
            cls = list(block)
            bucket.append(cls)
            merged.append(cls)
    for cls in merged:
        cls.sort()
    merged.sort()
    return merged


def refine(classes: Sequence[Sequence[int]], query: int) -> list[list[int]]:
    out = []
    for cls in classes:
        inside = [x for x in cls if query >> x & 1]
        outside = [x for x in cls if not query >> x & 1]
        if inside:
            out.append(inside)
        if outside:
            out.append(outside)
    return out


def _relabel(family: Sequence[int], order: Sequence[Sequence[int]], n: int) -> Family:
    label = [0] * n
    nxt = 0
    for cls in order:
        for x in cls:
            label[x] = nxt
            nxt += 1
    out = []
    for d in family:
        mask = 0
        for x in _bits(d):
            mask |= 1 << label[x]
        out.append(mask)
    out.sort()
    return tuple(out)


def class_colors(family: Sequence[int], classes: Sequence[Sequence[int]], deg: list[int], rounds: int = 2) -> list[int]:
    """Isomorphism-invariant colour per class (one step of colour refinement per round)."""
    owner = {}
    for i, cls in enumerate(classes):
        for x in cls:
            owner[x] = i
    sigs = [(len(cls), deg[cls[0]]) for cls in classes]
    colors = _compress(sigs)
    for _ in range(rounds):
        profile: list[list[tuple]] = [[] for _ in classes]
        for d in family:
            present = [owner[x] for x in _bits(d)]
            shape = tuple(sorted(colors[c] for c in present))
            for c in set(present):
                profile[c].append(shape)
        sigs = [(colors[i], tuple(sorted(profile[i]))) for i in range(len(classes))]
        new = _compress(sigs)
        if len(set(new)) == len(set(colors)):
            colors = new
            break
        colors = new
    return colors


def _compress(sigs: list) -> list[int]:
    table = {s: i for i, s in enumerate(sorted(set(sigs)))}
    return [table[s] for s in sigs]


def canonical_key(
    family: Sequence[int], classes: Sequence[Sequence[int]], deg: list[int], n: int,
    budget: int = DEFAULT_CANON_BUDGET,
) -> Family:
    """Lexicographically least relabelled encoding over class orderings.

    Classes are sorted by an invariant colour; only classes sharing a colour
    are permuted.  If that would take more than ``budget`` relabellings the
    exact family (identity labelling) is used instead.  Every key is an
    encoding of a family isomorphic to the input, so equal keys always mean
    equal game values whatever the fallback.
    """
    colors = class_colors(family, classes, deg)
    groups: dict[int, list[Sequence[int]]] = {}
    for color, cls in zip(colors, classes):
        groups.setdefault(color, []).append(cls)
    ordered = [groups[c] for c in sorted(groups)]
    count = 1
    for g in ordered:
        count *= math.factorial(len(g))
        if count > budget:
            return tuple(sorted(family))
    best = None
    for combo in itertools.product(*(itertools.permutations(g) for g in ordered)):
        order = [cls for part in combo for cls in part]
        enc = _relabel(family, order, n)
        if best is None or enc < best:
            best = enc
    return best


def is_terminal(family: Sequence[int], m: int) -> bool:
    return intersect_masks(family).bit_count() >= m


def _count_vectors(sizes: Sequence[int], limit: int) -> Iterator[tuple[int, ...]]:
    """Vectors 0 <= c_i <= sizes[i] with 1 <= sum <= limit."""
    def rec(i, left):
        if i == len(sizes):
            yield ()
            return
        for c in range(min(sizes[i], left) + 1):
            for rest in rec(i + 1, left - c):
                yield (c,) + rest
    for vec in rec(0, limit):
        if any(vec):
            yield vec


# -- solver -------------------------------------------------------------------


class Solver:
    """Depth-bounded minimax search with memoisation.

    ``value(family, bound)`` returns the exact game value when it is at most
    ``bound`` and ``bound + 1`` otherwise.
    """

    def __init__(self, inst: Instance, symmetry: bool = True, canon_budget: int = DEFAULT_CANON_BUDGET):
        if inst.semantics is not Semantics.EXACTLY_K:
            raise ValueError("exact solving is only defined for exactly-k semantics")
        self.inst = inst
        self.n = inst.n
        self.m = inst.m
        self.alpha = inst.alpha
        self.max_query = min(max_useful_query_size(inst), inst.n)
        self.symmetry = symmetry
        self.canon_budget = canon_budget
        self.exact: dict = {}
        self.lower: dict = {}
        self.nodes = 0
        self._thr = [yes_threshold(s, inst.alpha) for s in range(inst.n + 1)]
        if not symmetry:
            self._all_queries = [
                q for q in range(1, 1 << inst.n) if q.bit_count() <= self.max_query
            ]

    def root_family(self) -> Family:
        return tuple(k_subset_masks(self.n, self.inst.k))

    def root_classes(self) -> list[list[int]]:
        return [list(range(self.n))]

    # state analysis
    def _analyse(self, family: Family, hint):
        deg = degrees(family, self.n)
        if not self.symmetry:
            return tuple(sorted(family)), None, deg
        classes = twin_classes(family, self.n, hint, deg)
        key = canonical_key(family, classes, deg, self.n, self.canon_budget)
        return key, classes, deg

    def _cheap_lower(self, family: Family, deg: list[int]) -> int:
        # a leaf certifies some m-set M, so it holds at most (max hypotheses containing M)
        if self.m == 1:
            top = max(deg)
        else:
            counts: dict[int, int] = {}
            for d in family:
                for combo in itertools.combinations(tuple(_bits(d)), self.m):
                    sub = sum(1 << x for x in combo)
                    counts[sub] = counts.get(sub, 0) + 1
            top = max(counts.values())
        return max(1, ceil_log2(-(-len(family) // top)))

    def lower_bound(self, family: Family) -> int:
        if is_terminal(family, self.m):
            return 0
        return self._cheap_lower(family, degrees(family, self.n))

    def split(self, family: Family, query: int) -> tuple[Family, Family]:
        thr = self._thr[query.bit_count()]
        yes, no = [], []
        for d in family:
            (yes if (d & query).bit_count() >= thr else no).append(d)
        return tuple(yes), tuple(no)

    def moves(self, family: Family, classes) -> list[tuple[int, Family, Family]]:
        """Informative queries, deduplicated by the split they induce, most balanced first."""
        if classes is None:
            queries: Iterable[int] = self._all_queries
        else:
            queries = self._class_queries(classes)
        seen = set()
        out = []
        for q in queries:
            yes, no = self.split(family, q)
            if not yes or not no or yes in seen:
                continue
            seen.add(yes)
            out.append((q, yes, no))
        out.sort(key=lambda mv: max(len(mv[1]), len(mv[2])))
        return out

    def _class_queries(self, classes) -> Iterator[int]:
        prefix = []
        for cls in classes:
            masks = [0]
            acc = 0
            for x in cls:
                acc |= 1 << x
                masks.append(acc)
            prefix.append(masks)
        for vec in _count_vectors([len(c) for c in classes], self.max_query):
            q = 0
            for masks, c in zip(prefix, vec):
                q |= masks[c]
            yield q

    def value(self, family: Family, bound: int, hint=None) -> int:
        if is_terminal(family, self.m):
            return 0
        if bound <= 0:
            return 1
        self.nodes += 1
        key, classes, deg = self._analyse(family, hint)
        known = self.exact.get(key)
        if known is not None:
            return min(known, bound + 1)
        lo = max(self.lower.get(key, 1), self._cheap_lower(family, deg))
        if lo > bound:
            return bound + 1
        best = bound + 1
        for q, yes, no in self.moves(family, classes):
            b = best - 2
            if b < 0:
                break
            child_hint = refine(classes, q) if classes is not None else None
            first, second = (yes, no) if len(yes) >= len(no) else (no, yes)
            v1 = self.value(first, b, child_hint)
            if v1 > b:
                continue
            v2 = self.value(second, b, child_hint)
            if v2 > b:
                continue
            best = 1 + max(v1, v2)
            if best <= lo:
                break
        if best <= bound:
            self.exact[key] = best
        else:
            self.lower[key] = max(self.lower.get(key, 0), bound + 1)
        return best

    def move_value(self, family: Family, query: int, bound: int, hint=None) -> int:
        """min(1 + max over answers of the child value, bound + 1)."""
        yes, no = self.split(family, query)
        if not yes or not no:
            return bound + 1
        child_hint = refine(hint, query) if hint is not None else None
        b = bound - 1
        worst = 0
        for child in (yes, no):
            v = self.value(child, b, child_hint)
            if v > b:
                return bound + 1
            worst = max(worst, v)
        return 1 + worst


def _root_hint(solver: Solver):
    return solver.root_classes() if solver.symmetry else None


def strategy_envelope(inst: Instance, cap: int = DEFAULT_ENUMERATION_CAP) -> tuple[Optional[int], Optional[str]]:
    """Smallest exhaustively simulated worst case over applicable strategies."""
    best, who = None, None
    for name, strategy in STRATEGIES.items():
        if not strategy.applicability(inst)[0]:
            continue
        report = verify_strategy(strategy, inst, EXHAUSTIVE, cap)
        if not report.correctness_ok:
            raise AssertionError(f"{name} is unsound on {inst.label()}")
        if best is None or report.worst_queries < best:
            best, who = report.worst_queries, name
    return best, who


def best_claimed_bound(inst: Instance) -> int:
    return min(s.claimed_bound(inst) for s in STRATEGIES.values() if s.applicability(inst)[0])


def _parallel_root(args):
    inst, symmetry, query, bound = args
    solver = Solver(inst, symmetry)
    family = solver.root_family()
    return solver.move_value(family, query, bound, _root_hint(solver))


def solve_exact(
    inst: Instance,
    budget: Optional[int] = None,
    symmetry: bool = True,
    envelope: bool = True,
    cap: int = DEFAULT_ENUMERATION_CAP,
    jobs: int = 1,
    cache: Optional[str] = None,
) -> SolveRecord:
    """Minimax depth of the exactly-k game.

    Iterative deepening starts at the information bound; with ``envelope`` the
    best exhaustively simulated strategy supplies the starting upper bound, so
    the search only has to refute depths below it.  With ``budget`` the search
    stops there and reports ``g > budget`` if no strategy of that depth exists.
    """
    if inst.semantics is not Semantics.EXACTLY_K:
        raise ValueError("exact solving is only defined for exactly-k semantics")
    check_enumerable(inst.n, inst.k, cap)
    if cache is not None and budget is None:
        hit = ResultCache(cache).lookup(inst)
        if hit is not None:
            # an exact cached value is its own lower bound
            return replace(hit, lower=hit.g)
    start = time.perf_counter()
    alpha = inst.alpha
    lb = info_lower(inst.n, inst.k)
    solver = Solver(inst, symmetry)
    root = solver.root_family()
    lb = 0 if is_terminal(root, inst.m) else max(lb, solver.lower_bound(root))
    upper = None
    if envelope:
        upper, _ = strategy_envelope(inst, cap)
    ceiling = upper if budget is None else (budget + 1 if upper is None else min(upper, budget + 1))
    g = None
    depth = lb
    while g is None:
        if ceiling is not None and depth >= ceiling:
            if upper is not None and depth >= upper:
                g = upper
            break
        v = _root_value(solver, root, depth, jobs)
        if v <= depth:
            g = v
        else:
            depth += 1
    if g is not None and budget is not None and g > budget:
        # proven, but beyond what the caller asked for: report it as the lower bound
        g, depth = None, g
    record = SolveRecord(
        inst.n, inst.k, alpha.numerator, alpha.denominator, inst.m, g,
        status="exact" if g is not None else "exceeds-budget",
        lower=g if g is not None else depth,
        budget=budget,
        elapsed=time.perf_counter() - start,
    )
    if g is not None:
        check_sandwich(record, simulated=upper)
        if cache is not None:
            ResultCache(cache).append(record)
    return record


def _root_value(solver: Solver, root: Family, depth: int, jobs: int) -> int:
    if jobs <= 1 or is_terminal(root, solver.m) or depth <= 0:
        return solver.value(root, depth, _root_hint(solver))
    moves = solver.moves(root, solver.root_classes() if solver.symmetry else None)
    args = [(solver.inst, solver.symmetry, q, depth) for q, _, _ in moves]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        values = list(pool.map(_parallel_root, args))
    return min(values + [depth + 1])


def check_sandwich(record: SolveRecord, simulated: Optional[int] = None) -> None:
    inst = record.instance
    lo = info_lower(inst.n, inst.k)
    hi = best_claimed_bound(inst)
    if simulated is not None:
        hi = min(hi, simulated)
    if record.g is None or not lo <= record.g <= hi:
        raise CacheError(f"sandwich violated for {inst.label()}: need {lo} <= g={record.g} <= {hi}")


def optimal_first_moves(inst: Instance, symmetry: bool = True, g: Optional[int] = None) -> list[ElementSet]:
    """Representatives of every opening query that achieves the minimax value."""
    if g is None:
        g = solve_exact(inst, symmetry=symmetry).g
    solver = Solver(inst, symmetry)
    root = solver.root_family()
    if g == 0:
        return []
    hint = _root_hint(solver)
    out = []
    for q, _, _ in solver.moves(root, hint):
        if solver.move_value(root, q, g, hint) == g:
            out.append(ElementSet(q, inst.n))
    out.sort(key=lambda s: (len(s), s.mask))
    return out


# -- persistent cache ---------------------------------------------------------


class ResultCache:
    """Append-only JSON-lines file of solved instances.

    Every line is re-checked on load; a malformed or implausible line raises
    :class:`CacheError` naming the line.
    """

    def __init__(self, path: str):
        self.path = path

    def load(self) -> list[SolveRecord]:
        if not os.path.exists(self.path):
            return []
        records = []
        with open(self.path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                try:
                    raw = json.loads(line)
                    if set(raw) != set(CACHE_FIELDS):
                        raise ValueError(f"fields {sorted(raw)} != {sorted(CACHE_FIELDS)}")
                    record = SolveRecord(**raw)
                    check_sandwich(record)
                except (ValueError, TypeError) as exc:
                    raise CacheError(f"{self.path}:{lineno}: rejected cache line: {exc}") from None
                records.append(record)
        return records

    def lookup(self, inst: Instance) -> Optional[SolveRecord]:
        for record in self.load():
            if (
                (record.n, record.k, record.alpha_num, record.alpha_den, record.m)
                == (inst.n, inst.k, inst.alpha.numerator, inst.alpha.denominator, inst.m)
                and record.semantics == inst.semantics.value
                and record.solver_version == SOLVER_VERSION
            ):
                return record
        return None

    def append(self, record: SolveRecord) -> None:
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(record.cache_line() + "\n")


# -- conjecture scans ---------------------------------------------------------


class Conjecture(enum.Enum):
    SEJ1 = "sej1"
    INTEGER_STEP = "integer-step"
    MONOTONE_N = "monotone-n"
    MONOTONE_K = "monotone-k"
    MONOTONE_ALPHA = "monotone-alpha"
    EXACT_VS_AT_LEAST = "exact-vs-at-least"


HOLDS, VIOLATED, NOT_APPLICABLE, SKIPPED = "holds", "violated", "not-applicable", "skipped"


@dataclass(frozen=True)
class Finding:
    conjecture: str
    n: int
    k: int
    alpha: str
    m: int
    status: str
    lhs: Optional[int]
    rhs: Optional[int]
    note: str = ""

    def row(self) -> dict:
        return {
            "conjecture": self.conjecture, "n": self.n, "k": self.k, "alpha": self.alpha,
            "m": self.m, "status": self.status, "lhs": self.lhs, "rhs": self.rhs, "note": self.note,
        }


@dataclass(frozen=True)
class Grid:
    ns: tuple[int, ...]
    ks: tuple[int, ...] = (1,)
    alphas: tuple[Fraction, ...] = (Fraction(1, 2),)
    ms: tuple[int, ...] = (1,)

    def points(self) -> Iterator[tuple[int, int, Fraction, int]]:
        for alpha in self.alphas:
            for n in self.ns:
                for k in self.ks:
                    for m in self.ms:
                        if 1 <= m <= k <= n:
                            yield n, k, alpha, m


class _Values:
    """Memoised exact values; instances over the cap come back as None."""

    def __init__(self, cap: int, cache: Optional[str], jobs: int):
        self.cap, self.cache, self.jobs = cap, cache, jobs
        self.memo: dict[tuple, Optional[int]] = {}
        self.skipped: dict[tuple, str] = {}

    def __call__(self, n: int, k: int, alpha: Fraction, m: int) -> Optional[int]:
        key = (n, k, alpha, m)
        if key not in self.memo:
            try:
                inst = Instance(n, k, alpha, m)
                self.memo[key] = solve_exact(inst, cap=self.cap, cache=self.cache, jobs=self.jobs).g
            except InstanceTooLarge as exc:
                self.memo[key] = None
                self.skipped[key] = str(exc)
        return self.memo[key]

    def why(self, *keys: tuple) -> str:
        return "; ".join(self.skipped[k] for k in keys if k in self.skipped)


def _finding(name: Conjecture, n, k, alpha, m, lhs, rhs, holds, note="") -> Finding:
    return Finding(name.value, n, k, f"{alpha.numerator}/{alpha.denominator}", m,
                   HOLDS if holds else VIOLATED, lhs, rhs, note)


def _skip(name: Conjecture, n, k, alpha, m, note) -> Finding:
    return Finding(name.value, n, k, f"{alpha.numerator}/{alpha.denominator}", m, SKIPPED, None, None, note)


def _pair(name, values, here, there, relation, note) -> Finding:
    n, k, alpha, m = here
    lhs, rhs = values(*here), values(*there)
    if lhs is None or rhs is None:
        return _skip(name, n, k, alpha, m, values.why(here, there))
    return _finding(name, n, k, alpha, m, lhs, rhs, relation(lhs, rhs), note)


def scan_conjecture(
    name: Conjecture | str,
    grid: Grid,
    cap: int = DEFAULT_ENUMERATION_CAP,
    cache: Optional[str] = None,
    jobs: int = 1,
) -> list[Finding]:
    """One finding per grid point (or consecutive pair of grid points).

    ``lhs``/``rhs`` are the two sides of the tested inequality.  Points whose
    instances exceed the enumeration cap are reported as skipped.
    """
    name = Conjecture(name)
    values = _Values(cap, cache, jobs)
    out: list[Finding] = []

    if name is Conjecture.INTEGER_STEP:
        # g(n, k, alpha, 1) <= g(n, k + 1, alpha, 1) + 1, stated for integer 1/alpha
        for n, k, alpha, m in grid.points():
            if m != 1 or k + 1 > n:
                continue
            note = "1/alpha integer" if alpha.numerator == 1 else "1/alpha not an integer (outside hypothesis)"
            lhs, nxt = values(n, k, alpha, 1), values(n, k + 1, alpha, 1)
            if lhs is None or nxt is None:
                out.append(_skip(name, n, k, alpha, 1, values.why((n, k, alpha, 1), (n, k + 1, alpha, 1))))
                continue
            out.append(_finding(name, n, k, alpha, 1, lhs, nxt + 1, lhs <= nxt + 1,
                                f"g(n,k)={lhs} vs g(n,k+1)+1={nxt + 1}; {note}"))

    elif name is Conjecture.SEJ1:
        # the m1-partition algorithm is optimal when 1/alpha is an integer and it applies
        strategy = STRATEGIES["m1-partition"]
        for n, k, alpha, m in grid.points():
            if m != 1:
                continue
            inst = Instance(n, k, alpha, 1)
            applicable, why = strategy.applicability(inst)
            label = f"{alpha.numerator}/{alpha.denominator}"
            if alpha.numerator != 1 or not applicable:
                reason = "1/alpha not an integer" if alpha.numerator != 1 else why
                out.append(Finding(name.value, n, k, label, 1, NOT_APPLICABLE, None, None, reason))
                continue
            g = values(n, k, alpha, 1)
            if g is None:
                out.append(_skip(name, n, k, alpha, 1, values.why((n, k, alpha, 1))))
                continue
            worst = verify_strategy(strategy, inst, EXHAUSTIVE, cap).worst_queries
            out.append(_finding(name, n, k, alpha, 1, g, worst, g == worst,
                                f"g={g}, m1-partition worst case={worst}"))

    elif name in (Conjecture.MONOTONE_N, Conjecture.MONOTONE_K, Conjecture.MONOTONE_ALPHA):
        axis = {Conjecture.MONOTONE_N: 0, Conjecture.MONOTONE_K: 1, Conjecture.MONOTONE_ALPHA: 2}[name]
        steps = {0: sorted(set(grid.ns)), 1: sorted(set(grid.ks)), 2: sorted(set(grid.alphas))}[axis]
        following = dict(zip(steps, steps[1:]))
        for point in grid.points():
            if point[axis] not in following:
                continue
            there = list(point)
            there[axis] = following[point[axis]]
            there = tuple(there)
            if not 1 <= there[3] <= there[1] <= there[0]:
                continue
            word = ("n", "k", "alpha")[axis]
            note = f"g at {word}={_show(point[axis])} <= g at {word}={_show(there[axis])}"
            out.append(_pair(name, values, point, there, lambda x, y: x <= y, note))

    elif name is Conjecture.EXACT_VS_AT_LEAST:
        for n, k, alpha, m in grid.points():
            g = values(n, k, alpha, m)
            if g is None:
                out.append(_skip(name, n, k, alpha, m, values.why((n, k, alpha, m))))
                continue
            loose = Instance(n, k, alpha, m, Semantics.AT_LEAST_K)
            best, who, unsound = None, None, []
            try:
                for sname, strategy in STRATEGIES.items():
                    if not strategy.applicability(loose)[0]:
                        continue
                    report = verify_strategy(strategy, loose, EXHAUSTIVE, cap)
                    if not report.correctness_ok:
                        unsound.append(sname)
                        continue
                    if best is None or report.worst_queries < best:
                        best, who = report.worst_queries, sname
            except InstanceTooLarge as exc:
                out.append(_skip(name, n, k, alpha, m, str(exc)))
                continue
            note = "one-sided: exactly-k g <= best at-least-k strategy worst case"
            if who:
                note += f" ({who})"
            if unsound:
                note += f"; unsound under at-least-k: {','.join(unsound)}"
            if best is None:
                out.append(Finding(name.value, n, k, f"{alpha.numerator}/{alpha.denominator}", m,
                                   NOT_APPLICABLE, g, None, note))
            else:
                out.append(_finding(name, n, k, alpha, m, g, best, g <= best, note))
    return out


def _show(value) -> str:
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    return str(value)
