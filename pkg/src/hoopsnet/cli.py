"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data validation error, 3 numerical
failure (non-convergence, separation, failed experiment, unwritable output).

Settings resolve as built-in defaults, then ``--config FILE.json``, then flags.
All randomness derives from ``--seed`` via :func:`hoopsnet.seeding.derive_seed`.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
from pathlib import Path

from . import ingest
from .centrality import ConvergenceError, PageRankParams, low_key_leader_strengths
from .embedding import TrainConfig, WalkConfig, embed_graph
from .glm import FitConvergenceError, SeparationError
from .ingest import DataValidationError
from .linkpred import (ExperimentError, build_blocking_dataset, build_matchup_dataset,
                       build_passing_dataset, node_similarity_report, run_experiment)
from .ranking import hypothesis_check, quantile_report, rank_changes
from .reports import ReportError, write_report
from .seeding import derive_seed
from .synth import PlantedAffinityModel, generate_planted, write_future_pairs

log = logging.getLogger("hoopsnet")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3

DEFAULTS = {
    "games": None, "rankings": None, "blocks": None, "passes": None,
    "season": None, "next_season": None, "game": None, "phase": "all", "quarters": None,
    "tourney_start_day": ingest.DEFAULT_TOURNEY_START_DAY, "block_weight": "raw",
    "include_self": True, "damping": 0.85, "tolerance": 1e-10, "max_iterations": 200,
    "pagerank_weighted": True,
    "quantiles": 20, "threshold": 0.4, "direction": "prev",
    "p": 1.0, "q": 1.0, "dims": None, "walks": 10, "walk_length": 80, "window": 10,
    "negatives": 5, "epochs": 5, "lr_initial": 0.025, "lr_final": 0.0001,
    "iterations": 100, "require_next_season": False, "focus": None,
    "nodes": 60, "communities": 2, "p_in": 0.5, "p_out": 0.05, "bias": 6.0,
    "base_future_prob": 0.1,
    "seed": 0, "threads": None, "out": None, "format": None,
}

# settings that never change results and so stay out of the config hash
NOT_HASHED = {"out", "threads", "config", "format"}

DEFAULT_DIMS = {"game": 128, "block": 10, "pass": 16}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _bool(text: str) -> bool:
    low = str(text).lower()
    if low in ("true", "1", "yes"):
        return True
    if low in ("false", "0", "no"):
        return False
    raise argparse.ArgumentTypeError(f"expected true or false, got {text!r}")


def _quarters(text) -> list[int]:
    if isinstance(text, (list, tuple)):
        return sorted({int(x) for x in text})
    try:
        return sorted({int(x) for x in str(text).split(",") if x.strip()})
    except ValueError:
        raise argparse.ArgumentTypeError(f"quarters must be comma-separated integers, got {text!r}")


def _flag(group, name, **kw):
    group.add_argument(name, default=argparse.SUPPRESS, **kw)


def _common(p):
    g = p.add_argument_group("run")
    _flag(g, "--config", metavar="FILE", help="JSON config file (flags override it)")
    _flag(g, "--seed", type=int, help="base seed for all randomness (default 0)")
    _flag(g, "--out", metavar="DIR", help="output directory (created if missing)")
    _flag(g, "--format", help="comma-separated output formats: csv, json, svg")
    _flag(g, "--threads", type=int, help="worker threads (fallback: HOOPSNET_THREADS, else 1)")


def _network(p):
    g = p.add_argument_group("network source (give one of --games/--blocks/--passes)")
    _flag(g, "--games", metavar="CSV", help="games.csv")
    _flag(g, "--blocks", metavar="CSV", help="blocks.csv")
    _flag(g, "--passes", metavar="CSV", help="passes.csv")
    _flag(g, "--season", type=int, help="season year (games/blocks)")
    _flag(g, "--game", help="game label (passes)")
    _flag(g, "--phase", choices=["regular", "all"], help="game phase filter (default all)")
    _flag(g, "--tourney-start-day", type=int, dest="tourney_start_day",
          help=f"first postseason day (default {ingest.DEFAULT_TOURNEY_START_DAY})")
    _flag(g, "--quarters", type=_quarters, help="quarters to include, e.g. 1 or 2,3,4")
    _flag(g, "--block-weight", dest="block_weight", choices=["raw", "net"],
          help="blocking edge weight (default raw)")


def _centrality(p):
    g = p.add_argument_group("centrality")
    _flag(g, "--include-self", dest="include_self", type=_bool, help="CON sum includes v=u (default true)")
    _flag(g, "--damping", type=float, help="PageRank damping (default 0.85)")
    _flag(g, "--tolerance", type=float, help="PageRank L1 tolerance (default 1e-10)")
    _flag(g, "--max-iterations", dest="max_iterations", type=int, help="PageRank iteration cap (default 200)")
    _flag(g, "--pagerank-weighted", dest="pagerank_weighted", type=_bool,
          help="weight PageRank transitions by edge weight (default true)")


def _embedding(p):
    g = p.add_argument_group("node2vec")
    _flag(g, "--p", type=float, help="return parameter (default 1)")
    _flag(g, "--q", type=float, help="in-out parameter (default 1)")
    _flag(g, "--dims", type=int, help="embedding dimension (default 128 games, 10 blocks, 16 passes)")
    _flag(g, "--walks", type=int, help="walks per node (default 10)")
    _flag(g, "--walk-length", dest="walk_length", type=int, help="walk length (default 80)")
    _flag(g, "--window", type=int, help="context window (default 10)")
    _flag(g, "--negatives", type=int, help="negative samples (default 5)")
    _flag(g, "--epochs", type=int, help="training epochs (default 5)")
    _flag(g, "--lr-initial", dest="lr_initial", type=float, help="initial learning rate (default 0.025)")
    _flag(g, "--lr-final", dest="lr_final", type=float, help="final learning rate (default 0.0001)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hoopsnet", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    net = sub.add_parser("network", help="network construction")
    net_sub = net.add_subparsers(dest="action", metavar="ACTION")
    net_sub.required = True
    p = net_sub.add_parser("build", help="build a network and write its edge list")
    _network(p)
    _common(p)

    for name, text in (("centrality", "CON scores and adversarial PageRank"),
                       ("lkl", "low-key leader strengths")):
        p = sub.add_parser(name, help=text)
        _network(p)
        _centrality(p)
        _common(p)

    p = sub.add_parser("quantiles", help="low-key leader quantiles vs NET rank change")
    _network(p)
    _centrality(p)
    g = p.add_argument_group("quantiles")
    _flag(g, "--rankings", metavar="CSV", help="rankings.csv")
    _flag(g, "--quantiles", type=int, help="number of quantiles (default 20)")
    _flag(g, "--threshold", type=float, help="low-key leader threshold (default 0.4)")
    _flag(g, "--direction", choices=["prev", "next"], help="prev: season-1 -> season; next: season -> season+1")
    _common(p)

    p = sub.add_parser("embed", help="node2vec embeddings")
    _network(p)
    _embedding(p)
    _common(p)

    exp = sub.add_parser("experiment", help="link prediction experiments")
    exp_sub = exp.add_subparsers(dest="action", metavar="EXPERIMENT")
    exp_sub.required = True
    for name, text in (("matchups", "regular-season team similarity vs tournament matchups"),
                       ("blocks", "blocking embeddings vs next-season blocks"),
                       ("passes", "first-quarter region embeddings vs later passes")):
        p = exp_sub.add_parser(name, help=text)
        _network(p)
        _embedding(p)
        g = p.add_argument_group("experiment")
        _flag(g, "--iterations", type=int, help="independent embedding runs (default 100)")
        if name == "blocks":
            _flag(g, "--next-season", dest="next_season", type=int, help="label season (default season+1)")
            _flag(g, "--require-next-season", dest="require_next_season", type=_bool,
                  help="keep only players appearing in the label season (default false)")
        _common(p)

    p = sub.add_parser("similarity-report", help="cosine similarity from one node to all others")
    _network(p)
    _embedding(p)
    _flag(p, "--focus", help="focus node label")
    _common(p)

    p = sub.add_parser("synth", help="planted-affinity synthetic network")
    g = p.add_argument_group("model")
    _flag(g, "--nodes", type=int, help="number of nodes (default 60)")
    _flag(g, "--communities", type=int, help="number of communities (default 2)")
    _flag(g, "--p-in", dest="p_in", type=float, help="intra-community edge probability (default 0.5)")
    _flag(g, "--p-out", dest="p_out", type=float, help="inter-community edge probability (default 0.05)")
    _flag(g, "--bias", type=float, help="future-link odds multiplier inside communities (default 6)")
    _flag(g, "--base-future-prob", dest="base_future_prob", type=float,
          help="future-link probability across communities (default 0.1)")
    _common(p)
    return parser


# -- config ----------------------------------------------------------------------

def resolve_config(ns: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS)
    explicit = {k: v for k, v in vars(ns).items() if k not in ("command", "action")}
    if "config" in explicit:
        path = explicit["config"]
        try:
            loaded = json.loads(Path(path).read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise UsageError(f"config file {path} not found") from None
        except json.JSONDecodeError as exc:
            raise UsageError(f"config file {path} is not valid JSON: {exc}") from None
        for key, value in loaded.items():
            key = key.replace("-", "_")
            if key not in DEFAULTS:
                raise UsageError(f"unknown config key {key!r} in {path}")
            cfg[key] = _quarters(value) if key == "quarters" and value is not None else value
    cfg.update(explicit)
    cfg["command"] = ns.command + (f" {ns.action}" if getattr(ns, "action", None) else "")
    if cfg["threads"] is None:
        cfg["threads"] = int(os.environ.get("HOOPSNET_THREADS", "1") or 1)
    return cfg


def config_hash(cfg: dict) -> str:
    hashed = {k: v for k, v in sorted(cfg.items()) if k not in NOT_HASHED}
    return hashlib.sha256(json.dumps(hashed, sort_keys=True, default=str).encode()).hexdigest()[:16]


def _meta(cfg):
    return {"command": cfg["command"], "config_hash": config_hash(cfg), "seed": cfg["seed"]}


def _require(cfg, *names):
    missing = [n for n in names if cfg.get(n) is None]
    if missing:
        raise UsageError("missing required option(s): " + ", ".join(
            "--" + n.replace("_", "-") for n in missing))


def _out_dir(cfg) -> Path:
    _require(cfg, "out")
    out = Path(cfg["out"])
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ReportError(f"cannot create output directory {out}: {exc}") from exc
    return out


def _formats(cfg, default: str, allowed: set[str]) -> list[str]:
    fmts = [f.strip() for f in (cfg["format"] or default).split(",") if f.strip()]
    bad = [f for f in fmts if f not in allowed]
    if bad:
        raise UsageError(f"unsupported format(s) {bad}; choose from {sorted(allowed)}")
    return fmts


# -- network loading -------------------------------------------------------------

def _source_kind(cfg) -> str:
    given = [k for k in ("games", "blocks", "passes") if cfg.get(k)]
    if len(given) != 1:
        raise UsageError("give exactly one of --games, --blocks, --passes")
    return {"games": "game", "blocks": "block", "passes": "pass"}[given[0]]


def load_network(cfg, kind: str | None = None):
    kind = kind or _source_kind(cfg)
    if kind == "game":
        _require(cfg, "games", "season")
        games = ingest.load_records("game", cfg["games"])
        games = ingest.filter_phase([g for g in games if g.season == cfg["season"]],
                                    cfg["phase"], cfg["tourney_start_day"])
        return ingest.build_adversarial_network(games, cfg["season"])
    if kind == "block":
        _require(cfg, "blocks", "season")
        blocks = ingest.load_records("block", cfg["blocks"])
        return ingest.build_blocking_network(blocks, cfg["season"], cfg["block_weight"])
    _require(cfg, "passes", "game")
    passes = ingest.load_records("pass", cfg["passes"])
    return ingest.build_passing_network(passes, cfg["game"], cfg["quarters"])


def _pagerank_params(cfg) -> PageRankParams:
    return PageRankParams(cfg["damping"], cfg["tolerance"], cfg["max_iterations"],
                          cfg["pagerank_weighted"])


def _configs(cfg, kind: str) -> tuple[WalkConfig, TrainConfig]:
    dims = cfg["dims"] or DEFAULT_DIMS[kind]
    walk = WalkConfig(cfg["p"], cfg["q"], cfg["walk_length"], cfg["walks"],
                      seed=derive_seed(cfg["seed"], "walks"))
    train = TrainConfig(dims, cfg["window"], cfg["negatives"], cfg["epochs"],
                        cfg["lr_initial"], cfg["lr_final"], seed=derive_seed(cfg["seed"], "train"))
    return walk, train


# -- commands --------------------------------------------------------------------

def cmd_network_build(cfg) -> str:
    g = load_network(cfg)
    out = _out_dir(cfg)
    write_report(g, "csv", out / "network.csv", _meta(cfg))
    return f"network: {g.num_nodes} nodes, {g.num_edges} edges, total weight {g.total_weight():g}"


def cmd_centrality(cfg) -> str:
    g = load_network(cfg)
    table = low_key_leader_strengths(g, _pagerank_params(cfg), cfg["include_self"])
    out = _out_dir(cfg)
    write_report(table, "csv", out / "centrality.csv", _meta(cfg))
    if cfg["command"] == "lkl" and len(table.labels):
        top = max(range(len(table.labels)), key=lambda i: (table.lkl[i], table.labels[i]))
        return (f"lkl: {len(table.labels)} nodes, range [{table.lkl.min():.3f}, "
                f"{table.lkl.max():.3f}], top {table.labels[top]}")
    return f"centrality: {len(table.labels)} nodes written"


def cmd_quantiles(cfg) -> str:
    _require(cfg, "games", "rankings", "season")
    g = load_network(cfg, "game")
    table = low_key_leader_strengths(g, _pagerank_params(cfg), cfg["include_self"])
    rankings = ingest.load_records("ranking", cfg["rankings"])
    season = cfg["season"]
    if cfg["direction"] == "prev":
        before, after, direction = season - 1, season, "prev_to_current"
    else:
        before, after, direction = season, season + 1, "current_to_next"
    prev = ingest.rankings_for_season(rankings, before)
    curr = ingest.rankings_for_season(rankings, after)
    if not prev or not curr:
        raise DataValidationError(f"rankings for seasons {before} and {after} are both required",
                                  cfg["rankings"])
    changes = rank_changes(prev, curr)
    lkl = table.as_dict()
    try:
        report = quantile_report(lkl, changes.changes, cfg["quantiles"], direction)
    except ValueError as exc:
        raise DataValidationError(str(exc), cfg["rankings"]) from None
    hyp = hypothesis_check(report, cfg["threshold"])
    out = _out_dir(cfg)
    meta = _meta(cfg)
    extra = {"season": season, "ranking_seasons": [before, after],
             "teams_without_rank_change": sorted(set(lkl) - set(changes.changes)),
             "ranked_only_in_previous": len(changes.only_prev),
             "ranked_only_in_current": len(changes.only_curr)}
    for fmt in _formats(cfg, "csv,json", {"csv", "json", "svg"}):
        write_report(report, fmt, out / f"quantiles.{fmt}", meta, hypothesis=hyp, extra=extra)
    return f"quantiles: {hyp.n_pass} of {hyp.n_total} satisfy the {direction} hypothesis"


def cmd_embed(cfg) -> str:
    kind = _source_kind(cfg)
    g = load_network(cfg, kind)
    walk, train = _configs(cfg, kind)
    emb = embed_graph(g, walk, train)
    out = _out_dir(cfg)
    comments = [f"dimensions={train.dimensions} p={walk.p} q={walk.q} seed={cfg['seed']} "
                f"epochs={train.epochs}"]
    write_report(emb, "csv", out / "embeddings.csv", _meta(cfg), comments=comments)
    return f"embed: {len(emb)} nodes x {emb.dimensions} dimensions"


def _experiment_config(cfg, walk, train):
    return {"p": walk.p, "q": walk.q, "walk_length": walk.walk_length,
            "walks_per_node": walk.walks_per_node, "dimensions": train.dimensions,
            "window": train.window, "negative_samples": train.negative_samples,
            "epochs": train.epochs, "lr_initial": train.lr_initial, "lr_final": train.lr_final,
            "iterations": cfg["iterations"], "base_seed": cfg["seed"]}


def cmd_experiment(cfg) -> str:
    action = cfg["command"].split()[1]
    if action == "matchups":
        _require(cfg, "games", "season")
        games = [g for g in ingest.load_records("game", cfg["games"]) if g.season == cfg["season"]]
        regular = ingest.filter_phase(games, "regular", cfg["tourney_start_day"])
        tourney = ingest.filter_phase(games, "tournament", cfg["tourney_start_day"])
        if not tourney:
            raise DataValidationError(f"no tournament games (day >= {cfg['tourney_start_day']}) "
                                      f"in season {cfg['season']}", cfg["games"])
        graph = ingest.build_adversarial_network(regular, cfg["season"])
        matchups = [(g.team_a, g.team_b) for g in tourney]
        kind, pair_key = "game", "team_pairs"

        def build(emb):
            return build_matchup_dataset(graph, emb, matchups)
    elif action == "blocks":
        _require(cfg, "blocks", "season")
        blocks = ingest.load_records("block", cfg["blocks"])
        graph = ingest.build_blocking_network(blocks, cfg["season"], cfg["block_weight"])
        label_season = cfg["next_season"] or cfg["season"] + 1
        nxt = [b for b in blocks if b.season == label_season]
        if not nxt:
            raise DataValidationError(f"no blocks recorded for season {label_season}", cfg["blocks"])
        kind, pair_key = "block", "player_pairs"

        def build(emb):
            return build_blocking_dataset(emb, nxt, cfg["require_next_season"])
    else:
        _require(cfg, "passes", "game")
        passes = ingest.load_records("pass", cfg["passes"])
        chosen = set(cfg["quarters"] or [1])
        graph = ingest.build_passing_network(passes, cfg["game"], chosen)
        later_q = {p.quarter for p in passes if p.game == cfg["game"]} - chosen
        if not later_q:
            raise DataValidationError(f"game {cfg['game']} has no passes outside quarters "
                                      f"{sorted(chosen)}", cfg["passes"])
        later = ingest.build_passing_network(passes, cfg["game"], later_q)
        kind, pair_key = "pass", "region_pairs"

        def build(emb):
            return build_passing_dataset(graph, emb, later)

    walk, train = _configs(cfg, kind)
    agg = run_experiment(graph, build, walk, train, cfg["iterations"], cfg["seed"], cfg["threads"])
    out = _out_dir(cfg)
    write_report(agg, "json", out / f"experiment_{action}.json", _meta(cfg), name=action,
                 pair_key=pair_key, config=_experiment_config(cfg, walk, train))
    return (f"experiment {action}: {agg.num_pairs} pairs, mean pseudo-R2 {agg.mean_pseudo_r2:.4g}, "
            f"mean LLR p {agg.mean_llr_p:.4g}, significant dimensions "
            f"{agg.significant_dimensions} of {agg.num_features}")


def cmd_similarity(cfg) -> str:
    _require(cfg, "focus")
    kind = _source_kind(cfg)
    g = load_network(cfg, kind)
    walk, train = _configs(cfg, kind)
    emb = embed_graph(g, walk, train)
    focus = str(cfg["focus"])
    if focus not in emb:
        raise DataValidationError(f"focus node {focus!r} is not in the network")
    rows = node_similarity_report(emb, focus)
    out = _out_dir(cfg)
    for fmt in _formats(cfg, "csv", {"csv", "svg"}):
        write_report(rows, fmt, out / f"similarity_{focus}.{fmt}", _meta(cfg), focus=focus)
    return f"similarity-report: {len(rows)} nodes ranked from {focus}"


def cmd_synth(cfg) -> str:
    model = PlantedAffinityModel(cfg["nodes"], cfg["communities"], cfg["p_in"], cfg["p_out"],
                                 cfg["bias"], cfg["base_future_prob"], seed=cfg["seed"])
    g, future = generate_planted(model)
    out = _out_dir(cfg)
    write_report(g, "csv", out / "network.csv", _meta(cfg))
    try:
        write_future_pairs(future, out / "future_pairs.csv", [" ".join(
            f"{k}={v}" for k, v in _meta(cfg).items())])
    except OSError as exc:
        raise ReportError(str(exc)) from exc
    return f"synth: {g.num_nodes} nodes, {g.num_edges} edges, {int(future.labels.sum())} future links"


COMMANDS = {
    "network build": cmd_network_build,
    "centrality": cmd_centrality,
    "lkl": cmd_centrality,
    "quantiles": cmd_quantiles,
    "embed": cmd_embed,
    "experiment matchups": cmd_experiment,
    "experiment blocks": cmd_experiment,
    "experiment passes": cmd_experiment,
    "similarity-report": cmd_similarity,
    "synth": cmd_synth,
}


def dispatch(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = resolve_config(ns)
        message = COMMANDS[cfg["command"]](cfg)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"hoopsnet: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataValidationError, KeyError) as exc:
        print(f"hoopsnet: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ConvergenceError, SeparationError, FitConvergenceError, ExperimentError,
            FloatingPointError, ReportError) as exc:
        print(f"hoopsnet: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"hoopsnet: invalid setting: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(message)
    return EXIT_OK


def main() -> None:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
