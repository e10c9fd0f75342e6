import csv
from collections import Counter
from itertools import combinations

import numpy as np
import pytest

_outcomes: dict[int, list[bool]] = {}
_skipped: Counter = Counter()


def _write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    return path


@pytest.fixture(scope="session")
def data_dir(tmp_path_factory):
    """Small seeded record files covering every CLI input kind."""
    d = tmp_path_factory.mktemp("data")
    rng = np.random.default_rng(2024)
    teams = [f"T{i:02d}" for i in range(12)]
    games = []
    for season in (2023, 2024):
        for day, (a, b) in enumerate(combinations(teams, 2)):
            sa, sb = rng.integers(50, 90, size=2)
            if sa == sb:
                sb += 1
            games.append((season, 1 + day % 120, a, b, int(sa), int(sb)))
        # tournament: two rounds among the first 8 teams
        for a, b in [(0, 7), (1, 6), (2, 5), (3, 4), (0, 3), (1, 2)]:
            games.append((season, 140, teams[a], teams[b], 70, 60))
    _write_csv(d / "games.csv", ["season", "day", "team_a", "team_b", "score_a", "score_b"], games)

    ranks = []
    for season in (2023, 2024, 2025):
        order = rng.permutation(len(teams))
        ranks += [(season, t, int(order[i]) + 1) for i, t in enumerate(teams)]
    _write_csv(d / "rankings.csv", ["season", "team", "rank"], ranks)
    _write_csv(d / "rankings_dup.csv", ["season", "team", "rank"],
               [(2024, "T00", 1), (2024, "T01", 2), (2024, "T00", 3)])

    players = [f"P{i:02d}" for i in range(10)]
    blocks = []
    for season in (2023, 2024):
        for u in players:
            for v in players:
                if u != v and rng.random() < 0.25:
                    blocks.append((season, u, v, int(rng.integers(1, 4))))
    _write_csv(d / "blocks.csv", ["season", "blocker", "blocked", "count"], blocks)

    passes = []
    for quarter in (1, 2, 3, 4):
        for _ in range(150):
            passes.append(("g1", quarter, int(rng.integers(1, 29)), int(rng.integers(1, 29))))
    _write_csv(d / "passes.csv", ["game", "quarter", "source_region", "target_region"], passes)
    return d


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


def pytest_runtest_logreport(report):
    if report.skipped:
        for mark in getattr(report, "criteria", ()):
            _skipped[mark] += 1
        return
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    for mark in getattr(report, "criteria", ()):
        _outcomes.setdefault(mark, []).append(report.passed)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    report.criteria = [m.args[0] for m in item.iter_markers("criterion")]


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_outcomes):
        results = _outcomes[n]
        status = "PASS" if all(results) else "FAIL"
        note = f", {_skipped[n]} skipped" if _skipped[n] else ""
        terminalreporter.write_line(f"criterion {n}: {status} ({sum(results)}/{len(results)} checks{note})")
