"""CSV record loading and the game, blocking and passing network builders."""

from __future__ import annotations

import csv
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .graph import WeightedDigraph

NUM_REGIONS = 28

# Kaggle-style day numbering: postseason (national tournament) games start here.
DEFAULT_TOURNEY_START_DAY = 133


class DataValidationError(ValueError):
    """A malformed input record; carries file, row and column for the message."""

    def __init__(self, message: str, path: str | None = None,
                 row: int | None = None, column: str | None = None):
        self.path = path
        self.row = row
        self.column = column
        where = []
        if path is not None:
            where.append(str(path))
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column!r}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)


@dataclass(frozen=True)
class GameRecord:
    season: int
    day: int
    team_a: str
    team_b: str
    score_a: int
    score_b: int
    row: int = 0


@dataclass(frozen=True)
class RankingRecord:
    season: int
    team: str
    rank: int
    row: int = 0


@dataclass(frozen=True)
class BlockRecord:
    season: int
    blocker: str
    blocked: str
    count: int
    row: int = 0


@dataclass(frozen=True)
class PassRecord:
    game: str
    quarter: int
    source_region: int
    target_region: int
    row: int = 0


SCHEMAS = {
    "game": ("season", "day", "team_a", "team_b", "score_a", "score_b"),
    "ranking": ("season", "team", "rank"),
    "block": ("season", "blocker", "blocked", "count"),
    "pass": ("game", "quarter", "source_region", "target_region"),
}


def _int(row: dict, col: str, path, lineno: int, minimum: int | None = None) -> int:
    raw = row[col].strip()
    try:
        value = int(raw)
    except ValueError:
        raise DataValidationError(f"cannot parse integer from {raw!r}", path, lineno, col) from None
    if minimum is not None and value < minimum:
        raise DataValidationError(f"value {value} below minimum {minimum}", path, lineno, col)
    return value


def _label(row: dict, col: str, path, lineno: int) -> str:
    value = row[col].strip()
    if not value:
        raise DataValidationError("empty label", path, lineno, col)
    return value


def _parse_game(row, path, n):
    rec = GameRecord(
        season=_int(row, "season", path, n),
        day=_int(row, "day", path, n),
        team_a=_label(row, "team_a", path, n),
        team_b=_label(row, "team_b", path, n),
        score_a=_int(row, "score_a", path, n, minimum=0),
        score_b=_int(row, "score_b", path, n, minimum=0),
        row=n,
    )
    if rec.team_a == rec.team_b:
        raise DataValidationError("team_a equals team_b", path, n, "team_b")
    return rec


def _parse_ranking(row, path, n):
    return RankingRecord(
        season=_int(row, "season", path, n),
        team=_label(row, "team", path, n),
        rank=_int(row, "rank", path, n, minimum=1),
        row=n,
    )


def _parse_block(row, path, n):
    rec = BlockRecord(
        season=_int(row, "season", path, n),
        blocker=_label(row, "blocker", path, n),
        blocked=_label(row, "blocked", path, n),
        count=_int(row, "count", path, n, minimum=1),
        row=n,
    )
    if rec.blocker == rec.blocked:
        raise DataValidationError("blocker equals blocked", path, n, "blocked")
    return rec


def _parse_pass(row, path, n):
    rec = PassRecord(
        game=_label(row, "game", path, n),
        quarter=_int(row, "quarter", path, n, minimum=1),
        source_region=_int(row, "source_region", path, n),
        target_region=_int(row, "target_region", path, n),
        row=n,
    )
    for col in ("source_region", "target_region"):
        region = getattr(rec, col)
        if not 1 <= region <= NUM_REGIONS:
            raise DataValidationError(f"region {region} outside [1, {NUM_REGIONS}]", path, n, col)
    return rec


_PARSERS = {"game": _parse_game, "ranking": _parse_ranking, "block": _parse_block, "pass": _parse_pass}


def load_records(kind: str, path: str | Path) -> list:
    """Parse and validate every row of a canonical CSV file.

    Row numbers count the header as row 1, so the first record is row 2.
    """
    if kind not in SCHEMAS:
        raise ValueError(f"unknown record kind {kind!r}; expected one of {sorted(SCHEMAS)}")
    path = str(path)
    if not Path(path).is_file():
        raise DataValidationError("file not found", path)
    with open(path, encoding="utf-8-sig", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DataValidationError("empty file, header row missing", path, 1)
        header = [h.strip() for h in header]
        expected = SCHEMAS[kind]
        missing = [c for c in expected if c not in header]
        extra = [c for c in header if c not in expected]
        if missing:
            raise DataValidationError(f"missing columns {missing}", path, 1, missing[0])
        if extra:
            raise DataValidationError(f"unexpected columns {extra}", path, 1, extra[0])
        parse = _PARSERS[kind]
        records = []
        for lineno, values in enumerate(reader, start=2):
            if not values or all(not v.strip() for v in values):
                continue
            if len(values) != len(header):
                raise DataValidationError(
                    f"expected {len(header)} fields, got {len(values)}", path, lineno)
            records.append(parse(dict(zip(header, values)), path, lineno))
    if kind == "ranking":
        _check_unique_rankings(records, path)
    return records


def _check_unique_rankings(records: Sequence[RankingRecord], path) -> None:
    seen: dict[tuple[int, str], int] = {}
    for rec in records:
        key = (rec.season, rec.team)
        if key in seen:
            raise DataValidationError(
                f"duplicate ranking for team {rec.team!r} in season {rec.season} "
                f"(first at row {seen[key]})", path, rec.row, "team")
        seen[key] = rec.row


# -- selection helpers -------------------------------------------------------

def filter_phase(games: Iterable[GameRecord], phase: str,
                 tourney_start_day: int = DEFAULT_TOURNEY_START_DAY) -> list[GameRecord]:
    """``regular`` keeps games before the tournament start day; ``all`` keeps everything;
    ``tournament`` keeps only postseason games."""
    if phase == "all":
        return list(games)
    if phase == "regular":
        return [g for g in games if g.day < tourney_start_day]
    if phase == "tournament":
        return [g for g in games if g.day >= tourney_start_day]
    raise ValueError(f"phase must be 'regular', 'all' or 'tournament', got {phase!r}")


def rankings_for_season(records: Iterable[RankingRecord], season: int) -> dict[str, int]:
    return {r.team: r.rank for r in records if r.season == season}


# -- builders ---------------------------------------------------------------

def _antisymmetric_from_pairs(labels: Iterable[str], totals: dict[tuple[str, str], float],
                              weight_of) -> WeightedDigraph:
    g = WeightedDigraph(sorted(set(labels)))
    pairs = sorted({tuple(sorted(k)) for k in totals})
    for a, b in pairs:
        ab = totals.get((a, b), 0)
        ba = totals.get((b, a), 0)
        if ab == ba:
            continue
        (win, lose, hi, lo) = (a, b, ab, ba) if ab > ba else (b, a, ba, ab)
        g.add_edge(g.node_id(win), g.node_id(lose), weight_of(hi, lo))
    return g.freeze()


def build_adversarial_network(games: Iterable[GameRecord], season: int | None = None) -> WeightedDigraph:
    """Edge ``u -> v`` when u outscored v over all their meetings; weight = total margin.

    Nodes are every team that played a game, ids assigned in sorted label order.
    """
    games = [g for g in games if season is None or g.season == season]
    points: dict[tuple[str, str], float] = defaultdict(float)
    teams = set()
    for game in games:
        teams.update((game.team_a, game.team_b))
        points[(game.team_a, game.team_b)] += game.score_a
        points[(game.team_b, game.team_a)] += game.score_b
    return _antisymmetric_from_pairs(teams, points, lambda hi, lo: hi - lo)


def build_blocking_network(blocks: Iterable[BlockRecord], season: int | None = None,
                           weight: str = "raw") -> WeightedDigraph:
    """Edge ``u -> v`` when u blocked v strictly more often than v blocked u.

    ``weight="raw"`` uses the dominant direction's count, ``"net"`` the difference.
    """
    if weight not in ("raw", "net"):
        raise ValueError(f"weight must be 'raw' or 'net', got {weight!r}")
    counts: dict[tuple[str, str], float] = defaultdict(float)
    players = set()
    for b in blocks:
        if season is not None and b.season != season:
            continue
        players.update((b.blocker, b.blocked))
        counts[(b.blocker, b.blocked)] += b.count
    if weight == "raw":
        return _antisymmetric_from_pairs(players, counts, lambda hi, lo: hi)
    return _antisymmetric_from_pairs(players, counts, lambda hi, lo: hi - lo)


def build_passing_network(passes: Iterable[PassRecord], game: str,
                          quarters: Iterable[int] | None = None) -> WeightedDigraph:
    """Region graph for one game: all 28 regions, edge weight = pass count.

    ``quarters=None`` selects every quarter; an empty selection is an error.
    Self-loops record passes within a region.
    """
    selected = None if quarters is None else set(quarters)
    if selected is not None and not selected:
        raise ValueError("quarter selection is empty")
    passes = [p for p in passes if p.game == game]
    if not passes:
        raise KeyError(f"no passes recorded for game {game!r}")
    g = WeightedDigraph(str(r) for r in range(1, NUM_REGIONS + 1))
    for p in passes:
        if selected is None or p.quarter in selected:
            g.add_edge(p.source_region - 1, p.target_region - 1, 1.0)
    return g.freeze()
