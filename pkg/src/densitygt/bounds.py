"""Closed-form lower and upper bounds on g(n, k, alpha, m).

Every bound is evaluated in integer arithmetic; ``ceil(log2 x)`` comes from
``int.bit_length``.  Bounds whose constants are never pinned down in closed
form are reported with ``value=None`` and a symbolic note.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

from .core import Instance, ceil_log2, floor_log2_ratio
from .strategies import STRATEGIES, w_small_limit


class Kind(enum.Enum):
    LOWER = "lower"
    UPPER = "upper"


@dataclass(frozen=True)
class BoundReport:
    name: str
    kind: Kind
    value: Optional[int]
    applicable: bool
    condition: str
    citation: str = ""

    @property
    def numeric(self) -> bool:
        return self.applicable and self.value is not None

    def row(self) -> dict:
        return {
            "bound_name": self.name,
            "kind": self.kind.value,
            "applicable": self.applicable,
            "value": self.value if self.applicable else None,
            "condition": self.condition,
        }


def info_lower(n: int, k: int) -> int:
    """ceil(log2(n - k + 1)): at most 2^q distinct outputs after q questions."""
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k} n={n}")
    return ceil_log2(n - k + 1)


def multi_target_lower(p: int, n: int, m: int) -> int:
    """ceil(m log2 n) questions to find m defectives among p disjoint sets of size >= n,
    each holding a defective."""
    if not 1 <= m <= p or n < 1:
        raise ValueError("need 1 <= m <= p and n >= 1")
    return ceil_log2(n ** m)


def theorem_bounds(inst: Instance) -> list[BoundReport]:
    n, k, m, a = inst.n, inst.k, inst.m, inst.a
    alpha = inst.alpha
    span = -(-n // a)
    log_a = ceil_log2(a)
    reports = [
        BoundReport(
            "info-lower", Kind.LOWER, info_lower(n, k), True,
            "always", "counting outputs of a depth-q yes/no tree",
        )
    ]

    density = alpha.numerator * n <= alpha.denominator * k
    if m == 1:
        halving_value, halving_note = ceil_log2(n), "alpha <= k/n; c = 0 for m = 1"
    else:
        halving_value = None
        halving_note = "alpha <= k/n; ceil(log2 n) + c, c = max over n' <= 2m/alpha of g(n', m, alpha, m) (solver-delegated)"
    reports.append(BoundReport(
        "halving-upper", Kind.UPPER, halving_value, density, halving_note,
        "binary search keeps the defective density at least alpha",
    ))

    t = floor_log2_ratio(n, a)
    doubling = m == 1 and a * (k + t + 1) >= n
    reports.append(BoundReport(
        "doubling-upper", Kind.UPPER, ceil_log2(n) + 1, doubling,
        "m = 1 and k >= n/a - floor(log2(n/a)) - 1",
        "offset query plus doubling-down rounds",
    ))

    aside = m == 1 and alpha.numerator * (n - k + 1) <= 2 * alpha.denominator
    reports.append(BoundReport(
        "set-aside-upper", Kind.UPPER, ceil_log2(n - k + 1), aside,
        "m = 1 and alpha <= 2/(n-k+1)",
        "binary search on n-k+1 elements",
    ))

    reports.append(BoundReport(
        "linear-lower", Kind.LOWER, None, True,
        "n/a + c1 with c1 depending on k, alpha, m (symbolic)",
        "all-NO adversary",
    ))
    reports.append(BoundReport(
        "linear-upper", Kind.UPPER, n // a + m * a + 1, True,
        "always", "ask every size-a block, then every element of m YES blocks",
    ))

    slack = span - k - 1
    m1 = m == 1 and slack >= 0 and k <= (1 << slack)
    reports.append(BoundReport(
        "m1-partition-upper", Kind.UPPER, span - k + log_a, m1,
        "m = 1 and k + log2(k) + 1 <= ceil(n/a)",
        "ask k*a elements, then size-a blocks",
    ))

    reports.append(BoundReport(
        "refine-lower", Kind.LOWER, None, True,
        "n/a + m*log2(a) - c1(k) (symbolic)",
        "weight adversary plus heap selection",
    ))
    reports.append(BoundReport(
        "refine-upper", Kind.UPPER, span + m * log_a + k, True,
        "always", "disjoint size-a rounds with binary search in YES blocks",
    ))

    small_w = k == 2 and m == 1 and n <= w_small_limit(alpha)
    reports.append(BoundReport(
        "algw-small-upper", Kind.UPPER, ceil_log2(max(n - 1, 1)), small_w,
        "k = 2, m = 1 and n <= 3a + delta + 2^ceil(log2 a)",
        "size-regime algorithm for two defectives",
    ))
    if k == 2 and m == 1:
        w_value = STRATEGIES["algw"].claimed_bound(inst)
    else:
        w_value = None
    reports.append(BoundReport(
        "algw-upper", Kind.UPPER, w_value, k == 2 and m == 1,
        "k = 2 and m = 1", "size-regime algorithm for two defectives",
    ))
    return reports


def numeric_envelope(reports: list[BoundReport]) -> tuple[int, Optional[int]]:
    """(best numeric lower, best numeric upper) among applicable reports."""
    lower = max(r.value for r in reports if r.kind is Kind.LOWER and r.numeric)
    uppers = [r.value for r in reports if r.kind is Kind.UPPER and r.numeric]
    return lower, (min(uppers) if uppers else None)


def pinned_value(reports: list[BoundReport]) -> Optional[int]:
    """g when the closed-form bounds meet, else None."""
    lower, upper = numeric_envelope(reports)
    return lower if upper == lower else None
