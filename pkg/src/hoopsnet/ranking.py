"""Quantile comparison of low-key leader strength against season-to-season rank changes.

Sign convention: change = previous rank - current rank, so a positive value is
an improvement (rank 1 is best).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

DIRECTIONS = ("prev_to_current", "current_to_next")
SIGN_CONVENTION = "rank_change = rank_prev - rank_curr (positive = improvement)"


@dataclass
class RankChanges:
    changes: dict[str, float]
    only_prev: list[str] = field(default_factory=list)
    only_curr: list[str] = field(default_factory=list)

    @property
    def excluded(self) -> int:
        return len(self.only_prev) + len(self.only_curr)


def rank_changes(prev: Mapping[str, int], curr: Mapping[str, int]) -> RankChanges:
    if not prev or not curr:
        raise ValueError("both ranking tables must be nonempty")
    common = sorted(set(prev) & set(curr))
    return RankChanges(
        changes={t: float(prev[t] - curr[t]) for t in common},
        only_prev=sorted(set(prev) - set(curr)),
        only_curr=sorted(set(curr) - set(prev)),
    )


@dataclass
class Quantile:
    index: int
    lkl_low: float
    lkl_high: float
    team_count: int
    mean_lkl: float
    mean_rank_change: float
    teams: tuple[str, ...] = ()


@dataclass
class QuantileReport:
    quantiles: list[Quantile]
    direction: str = "prev_to_current"

    @property
    def num_quantiles(self) -> int:
        return len(self.quantiles)


def _split_sizes(n: int, k: int) -> list[int]:
    base, extra = divmod(n, k)
    return [base + 1 if i < extra else base for i in range(k)]


def quantile_report(lkl: Mapping[str, float], changes: Mapping[str, float], k: int = 20,
                    direction: str = "prev_to_current") -> QuantileReport:
    """Sort teams by lkl (ties by label) and split into ``k`` contiguous groups.

    Groups differ in size by at most one; the extra teams go to the
    lowest-lkl groups.
    """
    if k < 2:
        raise ValueError("need at least 2 quantiles")
    if direction not in DIRECTIONS:
        raise ValueError(f"direction must be one of {DIRECTIONS}")
    teams = sorted(set(lkl) & set(changes), key=lambda t: (lkl[t], t))
    if len(teams) < k:
        raise ValueError(f"{len(teams)} scored teams is fewer than {k} quantiles")
    quantiles = []
    start = 0
    for i, size in enumerate(_split_sizes(len(teams), k)):
        group = teams[start:start + size]
        start += size
        vals = np.array([lkl[t] for t in group])
        deltas = np.array([changes[t] for t in group])
        quantiles.append(Quantile(
            index=i + 1,
            lkl_low=float(vals.min()),
            lkl_high=float(vals.max()),
            team_count=len(group),
            mean_lkl=float(vals.mean()),
            mean_rank_change=float(deltas.mean()),
            teams=tuple(group),
        ))
    return QuantileReport(quantiles, direction)


@dataclass
class HypothesisResult:
    passes: list[bool]
    threshold: float
    direction: str

    @property
    def n_pass(self) -> int:
        return sum(self.passes)

    @property
    def n_total(self) -> int:
        return len(self.passes)

    predicate: str = ""


def hypothesis_check(report: QuantileReport, threshold: float = 0.4,
                     direction: str | None = None) -> HypothesisResult:
    """Per-quantile directional test.

    prev_to_current: quantiles with mean lkl >= threshold should have improved
    (mean change > 0), the rest should have declined (< 0). current_to_next
    flips both expected signs. A mean change of exactly zero fails.
    """
    direction = direction or report.direction
    if direction not in DIRECTIONS:
        raise ValueError(f"direction must be one of {DIRECTIONS}")
    sign = 1.0 if direction == "prev_to_current" else -1.0
    passes = []
    for q in report.quantiles:
        expected = sign if q.mean_lkl >= threshold else -sign
        passes.append(bool(q.mean_rank_change * expected > 0))
    predicate = (
        f"leader quantile (mean_lkl >= {threshold}) passes iff mean_rank_change "
        f"{'> 0' if sign > 0 else '< 0'}; other quantiles pass iff mean_rank_change "
        f"{'< 0' if sign > 0 else '> 0'}; zero fails")
    return HypothesisResult(passes, threshold, direction, predicate)
