"""Byte-deterministic CSV, JSON and SVG writers for analysis results."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Mapping, Sequence
from xml.sax.saxutils import escape

from .centrality import CentralityTable
from .embedding import EmbeddingMatrix, write_embeddings
from .glm import FitResult
from .graph import WeightedDigraph, write_edgelist
from .linkpred import ExperimentAggregate
from .ranking import SIGN_CONVENTION, HypothesisResult, QuantileReport


class ReportError(OSError):
    pass


def g10(x: float) -> str:
    return format(float(x), ".10g")


def meta_comments(meta: Mapping | None) -> list[str]:
    if not meta:
        return []
    return [" ".join(f"{k}={v}" for k, v in meta.items())]


def _write_text(path: str | Path, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise ReportError(f"cannot write {path}: {exc}") from exc


def _csv_text(header: Sequence[str], rows, comments: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    for line in comments:
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def dumps_json(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=True) + "\n"


# -- per-type renderers ----------------------------------------------------------

def centrality_csv(table: CentralityTable, meta: Mapping | None = None) -> str:
    rows = [(label, con, g10(pr), g10(cn), g10(pn), g10(lkl))
            for label, con, pr, cn, pn, lkl in table.rows()]
    return _csv_text(("label", "con", "pagerank", "con_norm", "pr_norm", "lkl"), rows,
                     meta_comments(meta))


def quantile_csv(report: QuantileReport, hyp: HypothesisResult | None = None,
                 meta: Mapping | None = None) -> str:
    comments = meta_comments(meta) + [SIGN_CONVENTION, f"direction={report.direction}"]
    if hyp is not None:
        comments.append(f"predicate: {hyp.predicate}")
    rows = []
    for i, q in enumerate(report.quantiles):
        passed = "" if hyp is None else str(hyp.passes[i]).lower()
        rows.append((q.index, g10(q.lkl_low), g10(q.lkl_high), g10(q.mean_lkl), q.team_count,
                     g10(q.mean_rank_change), passed))
    header = ("quantile", "lkl_low", "lkl_high", "mean_lkl", "team_count", "mean_rank_change",
              "passes_hypothesis")
    return _csv_text(header, rows, comments)


def quantile_json(report: QuantileReport, hyp: HypothesisResult | None = None,
                  meta: Mapping | None = None, extra: Mapping | None = None) -> str:
    doc = {
        "metadata": dict(meta or {}),
        "sign_convention": SIGN_CONVENTION,
        "direction": report.direction,
        "num_quantiles": report.num_quantiles,
        "teams": sum(q.team_count for q in report.quantiles),
    }
    if hyp is not None:
        doc.update({"threshold": hyp.threshold, "predicate": hyp.predicate,
                    "quantiles_passing": hyp.n_pass, "quantiles_total": hyp.n_total})
    doc.update(extra or {})
    doc["quantiles"] = [
        {"quantile": q.index, "lkl_low": q.lkl_low, "lkl_high": q.lkl_high,
         "mean_lkl": q.mean_lkl, "team_count": q.team_count,
         "mean_rank_change": q.mean_rank_change,
         **({} if hyp is None else {"passes_hypothesis": hyp.passes[i]})}
        for i, q in enumerate(report.quantiles)
    ]
    return dumps_json(doc)


def similarity_csv(rows: Sequence[tuple[str, float]], focus: str, meta: Mapping | None = None) -> str:
    return _csv_text(("label", "cosine_similarity"), [(lab, g10(s)) for lab, s in rows],
                     meta_comments(meta) + [f"focus={focus}"])


def fit_json(fit: FitResult, meta: Mapping | None = None) -> str:
    return dumps_json({"metadata": dict(meta or {}), **fit.to_dict()})


def experiment_json(agg: ExperimentAggregate, name: str, pair_key: str, config: Mapping,
                    meta: Mapping | None = None) -> str:
    doc = {
        "metadata": dict(meta or {}),
        "experiment": name,
        "config": dict(config),
        "aggregate": agg.summary(pair_key),
        "iterations": [
            {"index": r.index, "seed": r.seed, "error": r.error,
             "fit": None if r.fit is None else r.fit.to_dict()}
            for r in agg.results
        ],
    }
    return dumps_json(doc)


def bar_chart_svg(labels: Sequence[str], values: Sequence[float], title: str,
                  ylabel: str = "", meta: Mapping | None = None) -> str:
    """Plain SVG bar chart; one bar per value, zero line drawn."""
    width, height, pad = 640, 360, 48
    n = max(len(values), 1)
    vmax = max([0.0, *values])
    vmin = min([0.0, *values])
    span = (vmax - vmin) or 1.0
    plot_h = height - 2 * pad
    bar_w = (width - 2 * pad) / n

    def y(v):
        return pad + (vmax - v) / span * plot_h

    out = ['<?xml version="1.0" encoding="UTF-8"?>']
    for line in meta_comments(meta):
        out.append(f"<!-- {escape(line)} -->")
    out.append(f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
               f'viewBox="0 0 {width} {height}">')
    out.append(f'<text x="{width / 2:.1f}" y="{pad / 2:.1f}" text-anchor="middle" '
               f'font-size="14">{escape(title)}</text>')
    if ylabel:
        out.append(f'<text x="12" y="{height / 2:.1f}" font-size="11" '
                   f'transform="rotate(-90 12 {height / 2:.1f})" text-anchor="middle">'
                   f'{escape(ylabel)}</text>')
    for i, (lab, v) in enumerate(zip(labels, values)):
        x = pad + i * bar_w
        top, bottom = sorted((y(v), y(0.0)))
        fill = "#3b6ea5" if v >= 0 else "#b5473a"
        out.append(f'<rect class="bar" x="{x + 1:.2f}" y="{top:.2f}" width="{max(bar_w - 2, 1):.2f}" '
                   f'height="{bottom - top:.2f}" fill="{fill}"><title>{escape(str(lab))}: '
                   f'{v:.4g}</title></rect>')
        out.append(f'<text x="{x + bar_w / 2:.2f}" y="{height - pad + 14:.2f}" font-size="9" '
                   f'text-anchor="middle">{escape(str(lab))}</text>')
    out.append(f'<line x1="{pad}" x2="{width - pad}" y1="{y(0.0):.2f}" y2="{y(0.0):.2f}" '
               'stroke="black" stroke-width="1"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def quantile_svg(report: QuantileReport, meta: Mapping | None = None) -> str:
    return bar_chart_svg([str(q.index) for q in report.quantiles],
                         [q.mean_rank_change for q in report.quantiles],
                         f"Mean rank change by low-key leader quantile ({report.direction})",
                         "mean rank change (+ = improvement)", meta)


def similarity_svg(rows: Sequence[tuple[str, float]], focus: str, meta: Mapping | None = None) -> str:
    return bar_chart_svg([r[0] for r in rows], [r[1] for r in rows],
                         f"Cosine similarity from node {focus}", "cosine similarity", meta)


# -- dispatcher ------------------------------------------------------------------

def write_report(result, fmt: str, path: str | Path, meta: Mapping | None = None, **kwargs) -> None:
    """Render ``result`` as ``fmt`` (csv, json or svg) to ``path``.

    Output depends only on ``result``, ``meta`` and ``kwargs``: fixed field
    order, fixed float formatting.
    """
    path = Path(path)
    if not path.parent.is_dir():
        raise ReportError(f"output directory {path.parent} does not exist")
    comments = meta_comments(meta)
    if isinstance(result, QuantileReport):
        hyp = kwargs.get("hypothesis")
        text = {"csv": lambda: quantile_csv(result, hyp, meta),
                "json": lambda: quantile_json(result, hyp, meta, kwargs.get("extra")),
                "svg": lambda: quantile_svg(result, meta)}[fmt]()
    elif isinstance(result, CentralityTable) and fmt == "csv":
        text = centrality_csv(result, meta)
    elif isinstance(result, FitResult) and fmt == "json":
        text = fit_json(result, meta)
    elif isinstance(result, ExperimentAggregate) and fmt == "json":
        text = experiment_json(result, kwargs.get("name", "experiment"),
                               kwargs.get("pair_key", "pairs"), kwargs.get("config", {}), meta)
    elif isinstance(result, EmbeddingMatrix) and fmt == "csv":
        try:
            write_embeddings(result, path, comments + list(kwargs.get("comments", ())))
        except OSError as exc:
            raise ReportError(f"cannot write {path}: {exc}") from exc
        return
    elif isinstance(result, WeightedDigraph) and fmt == "csv":
        try:
            write_edgelist(result, path, comments)
        except OSError as exc:
            raise ReportError(f"cannot write {path}: {exc}") from exc
        return
    elif isinstance(result, list) and "focus" in kwargs:
        focus = kwargs["focus"]
        text = {"csv": lambda: similarity_csv(result, focus, meta),
                "svg": lambda: similarity_svg(result, focus, meta)}[fmt]()
    else:
        raise ValueError(f"no {fmt} writer for {type(result).__name__}")
    _write_text(path, text)
