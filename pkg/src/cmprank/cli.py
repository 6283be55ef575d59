"""Command-line pipeline: dispersion summaries, model fits, rankings, grids.

Subcommands
    dispersion  pooled and per-team dispersion indices for a match file
    fit         three-family model comparison plus histogram/pmf overlay data
    rank        cross-competition strength ranking of every eligible team
    simulate    empirical-mean grid over (lambda, nu) cells, for plotting

Input is the canonical match CSV; output goes to stdout as a plain table
(strengths, averages and indices rounded to two decimals), as CSV, or as
JSON with keys in fixed order (full precision, byte-stable across runs).

Exit codes: 0 success, 2 load/usage failure, 3 empty selection after
filtering, 4 unknown team, 5 insufficient matches, 6 nothing rankable.
"""

from __future__ import annotations

import argparse
import csv
import datetime as dt
import io
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .cmpdist import (
    CmpParams,
    InvalidParamsError,
    SeriesControl,
    classify_dispersion,
    dispersion_index,
    log_pmf,
    sample,
)
from .fitting import (
    DegenerateSeriesError,
    Family,
    FitReport,
    GoalSeries,
    SeriesTooShortError,
    compare_models,
    empirical_moments,
    fit_cmp,
)
from .cmpdist import SeriesNotConvergedError
from .matchdata import (
    Dataset,
    EmptySelectionError,
    LoadError,
    MalformedHeaderError,
    MatchFilter,
    UnknownTeamError,
    load_matches,
    team_match_count,
    team_series,
)
from .strength import (
    LambdaAtMostOneError,
    ZeroDispersionError,
    rank_teams,
    team_strength,
)

EXIT_OK = 0
EXIT_LOAD = 2
EXIT_EMPTY = 3
EXIT_UNKNOWN_TEAM = 4
EXIT_TOO_FEW_MATCHES = 5
EXIT_NOTHING_RANKABLE = 6


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


@dataclass(frozen=True)
class RunConfig:
    """Resolved command-line options shared by the subcommands."""

    input_path: Path | None = None
    date_from: dt.date | None = None
    date_to: dt.date | None = None
    competitions: frozenset[str] | None = None
    min_matches: int = 5
    rel_tol: float = 1e-12
    output_format: str = "table"
    seed: int = 0

    def __post_init__(self):
        if self.min_matches < 2:
            raise ValueError(f"min_matches must be >= 2, got {self.min_matches}")
        if self.date_from and self.date_to and self.date_from > self.date_to:
            raise ValueError("season window start is after its end")

    @property
    def series_control(self) -> SeriesControl:
        return SeriesControl(rel_tol=self.rel_tol)

    @property
    def match_filter(self) -> MatchFilter | None:
        if self.date_from or self.date_to or self.competitions is not None:
            return MatchFilter(self.date_from, self.date_to, self.competitions)
        return None


def _load_dataset(config: RunConfig) -> Dataset:
    if config.input_path is None:
        raise CliError(EXIT_LOAD, "no input file given")
    try:
        data = load_matches(config.input_path)
    except (MalformedHeaderError, LoadError, OSError, UnicodeDecodeError) as exc:
        raise CliError(EXIT_LOAD, f"could not load {config.input_path}: {exc}") from exc
    if not data.matches:
        raise CliError(EXIT_LOAD, f"{config.input_path} contains no matches")
    return data


def _filtered_matches(data: Dataset, config: RunConfig):
    match_filter = config.match_filter
    matches = [m for m in data.matches if match_filter is None or match_filter.keep(m)]
    if not matches:
        raise CliError(EXIT_EMPTY, "no matches left after filtering")
    return matches


# --------------------------------------------------------------------------
# subcommand payloads (plain dicts with fixed key order)
# --------------------------------------------------------------------------


def _direction_stats(counts: list[int]) -> dict:
    stats = {"n": len(counts), "mean": None, "variance": None,
             "dispersion_index": None, "classification": None}
    if len(counts) < 2:
        if counts:
            stats["mean"] = float(counts[0])
        stats["classification"] = "too-few-matches"
        return stats
    mean, var = empirical_moments(GoalSeries(tuple(counts)))
    stats["mean"] = mean
    stats["variance"] = var
    if var > 0:
        di = dispersion_index(mean, var)
        stats["dispersion_index"] = di
        stats["classification"] = classify_dispersion(di)
    else:
        stats["classification"] = "degenerate"
    return stats


def cmd_dispersion(config: RunConfig) -> dict:
    data = _load_dataset(config)
    matches = _filtered_matches(data, config)

    pooled_counts = []
    for m in matches:
        pooled_counts.extend((m.home_goals, m.away_goals))
    pooled = _direction_stats(pooled_counts)

    per_team = []
    teams = sorted({name for m in matches for name in (m.home_team, m.away_team)})
    for team in teams:
        scored, conceded = [], []
        for m in matches:
            if m.home_team == team:
                scored.append(m.home_goals)
                conceded.append(m.away_goals)
            elif m.away_team == team:
                scored.append(m.away_goals)
                conceded.append(m.home_goals)
        per_team.append(
            {
                "team": team,
                "matches": len(scored),
                "scored": _direction_stats(scored),
                "conceded": _direction_stats(conceded),
            }
        )
    return {"pooled": pooled, "teams": per_team}


def _params_dict(report: FitReport) -> dict | None:
    p = report.params
    if p is None:
        return None
    if report.family is Family.CMP:
        return {"lambda": p.lam, "nu": p.nu}
    if report.family is Family.GAUSSIAN:
        return {"mean": p.mean, "std": p.std}
    return {"size": p.size, "prob": p.prob}


def _model_dict(report: FitReport) -> dict:
    return {
        "family": report.family.value,
        "params": _params_dict(report),
        "log_likelihood": report.log_likelihood,
        "aic": report.aic,
        "n_params": report.n_params,
        "converged": report.converged,
        "iterations": report.iterations,
        "flags": list(report.flags),
        "error": report.error,
    }


def cmd_fit(config: RunConfig, team: str, direction: str = "scored") -> dict:
    data = _load_dataset(config)
    match_filter = config.match_filter
    try:
        n_matches = team_match_count(data, team, match_filter)
    except UnknownTeamError as exc:
        raise CliError(EXIT_UNKNOWN_TEAM, str(exc)) from exc
    if n_matches < config.min_matches:
        raise CliError(
            EXIT_TOO_FEW_MATCHES,
            f"team {team!r} has {n_matches} matches after filtering "
            f"(minimum {config.min_matches})",
        )
    series = team_series(data, team, direction, match_filter)
    ctrl = config.series_control
    reports = compare_models(series, ctrl)

    overlay = []
    cmp_report = next((r for r in reports if r.family is Family.CMP), None)
    if cmp_report is not None and cmp_report.params is not None:
        counts = np.asarray(series.counts)
        xs = np.arange(counts.min(), counts.max() + 1)
        fitted = np.exp(log_pmf(xs, cmp_report.params, ctrl))
        for x, p in zip(xs, fitted):
            overlay.append(
                {
                    "x": int(x),
                    "empirical": float((counts == x).sum() / len(counts)),
                    "pmf": float(p),
                }
            )
    return {
        "team": team,
        "direction": direction,
        "n_matches": n_matches,
        "models": [_model_dict(r) for r in reports],
        "overlay": overlay,
    }


def cmd_rank(config: RunConfig) -> dict:
    data = _load_dataset(config)
    matches = _filtered_matches(data, config)
    match_filter = config.match_filter
    ctrl = config.series_control

    teams = sorted({name for m in matches for name in (m.home_team, m.away_team)})
    strengths, excluded = [], []
    for team in teams:
        n_matches = team_match_count(data, team, match_filter)
        if n_matches < config.min_matches:
            excluded.append(
                {
                    "team": team,
                    "reason": f"only {n_matches} matches (minimum {config.min_matches})",
                }
            )
            continue
        try:
            attack_fit = fit_cmp(team_series(data, team, "scored", match_filter), ctrl)
            defense_fit = fit_cmp(team_series(data, team, "conceded", match_filter), ctrl)
            strengths.append(team_strength(team, attack_fit, defense_fit))
        except (
            DegenerateSeriesError,
            SeriesNotConvergedError,
            SeriesTooShortError,
            LambdaAtMostOneError,
            ZeroDispersionError,
            InvalidParamsError,
        ) as exc:
            excluded.append({"team": team, "reason": str(exc)})
    if not strengths:
        raise CliError(EXIT_NOTHING_RANKABLE, "no team could be ranked")

    table = rank_teams(strengths)
    rows = []
    for row in table.rows:
        s = row.strength
        rows.append(
            {
                "rank": row.rank,
                "team": s.team,
                "avg_scored": row.avg_scored,
                "avg_conceded": row.avg_conceded,
                "attack_strength": s.attack,
                "defense_strength": s.defense,
                "strength": s.overall,
                "matches_used": s.matches_used,
                "attack_params": {"lambda": s.attack_fit.params.lam, "nu": s.attack_fit.params.nu},
                "defense_params": {"lambda": s.defense_fit.params.lam, "nu": s.defense_fit.params.nu},
            }
        )
    return {"rows": rows, "excluded": excluded}


def cmd_simulate(
    config: RunConfig,
    lambda_grid: list[float],
    nu_grid: list[float],
    n_per_cell: int,
) -> dict:
    if not lambda_grid or not nu_grid:
        raise CliError(EXIT_LOAD, "lambda and nu grids must be non-empty")
    if n_per_cell < 1:
        raise CliError(EXIT_LOAD, "n-per-cell must be >= 1")
    ctrl = config.series_control
    cells = []
    for lam in lambda_grid:
        for nu in nu_grid:
            try:
                params = CmpParams(lam, nu)
            except InvalidParamsError as exc:
                raise CliError(EXIT_LOAD, f"invalid grid cell: {exc}") from exc
            draws = sample(params, n_per_cell, seed=config.seed, ctrl=ctrl)
            cells.append({"lambda": lam, "nu": nu, "emp_mean": float(draws.mean())})
    return {"seed": config.seed, "n_per_cell": n_per_cell, "cells": cells}


# --------------------------------------------------------------------------
# rendering
# --------------------------------------------------------------------------


def _json_text(payload: dict) -> str:
    return json.dumps(payload, indent=2, ensure_ascii=False) + "\n"


def _csv_text(blocks: list[tuple[list[str], list[list]]]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    for i, (header, rows) in enumerate(blocks):
        if i:
            writer.writerow([])
        writer.writerow(header)
        writer.writerows(rows)
    return out.getvalue()


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def _table_text(header: list[str], rows: list[list[str]]) -> str:
    widths = [len(h) for h in header]
    for row in rows:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip()]
    lines.append("  ".join("-" * w for w in widths))
    for row in rows:
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
    return "\n".join(lines) + "\n"


def _f2(value) -> str:
    return "-" if value is None else f"{value:.2f}"


def _render_dispersion(payload: dict, fmt: str) -> str:
    if fmt == "json":
        return _json_text(payload)
    header = ["scope", "team", "direction", "n", "mean", "variance",
              "dispersion_index", "classification"]
    rows = []
    pooled = payload["pooled"]
    rows.append(["pooled", "", "all", pooled["n"], pooled["mean"], pooled["variance"],
                 pooled["dispersion_index"], pooled["classification"]])
    for entry in payload["teams"]:
        for direction in ("scored", "conceded"):
            stats = entry[direction]
            rows.append(["team", entry["team"], direction, stats["n"], stats["mean"],
                         stats["variance"], stats["dispersion_index"], stats["classification"]])
    if fmt == "csv":
        return _csv_text([(header, [[_cell(v) for v in row] for row in rows])])
    display = [
        [row[0], row[1], row[2], str(row[3]), _f2(row[4]), _f2(row[5]), _f2(row[6]),
         row[7] or "-"]
        for row in rows
    ]
    return _table_text(header, display)


_MODEL_CSV_HEADER = [
    "family", "lambda", "nu", "mean", "std", "size", "prob",
    "log_likelihood", "aic", "converged", "iterations", "flags", "error",
]


def _model_csv_row(model: dict) -> list[str]:
    params = model["params"] or {}
    return [
        model["family"],
        _cell(params.get("lambda")),
        _cell(params.get("nu")),
        _cell(params.get("mean")),
        _cell(params.get("std")),
        _cell(params.get("size")),
        _cell(params.get("prob")),
        _cell(model["log_likelihood"]),
        _cell(model["aic"]),
        _cell(model["converged"]),
        _cell(model["iterations"]),
        ";".join(model["flags"]),
        _cell(model["error"]),
    ]


def _render_fit(payload: dict, fmt: str) -> str:
    if fmt == "json":
        return _json_text(payload)
    overlay_header = ["x", "empirical", "pmf"]
    if fmt == "csv":
        blocks = [
            (_MODEL_CSV_HEADER, [_model_csv_row(m) for m in payload["models"]]),
            (overlay_header,
             [[_cell(o["x"]), _cell(o["empirical"]), _cell(o["pmf"])] for o in payload["overlay"]]),
        ]
        return _csv_text(blocks)
    model_rows = []
    for m in payload["models"]:
        params = m["params"]
        if params is None:
            shown = "-"
        else:
            shown = ", ".join(f"{k}={v:.2f}" for k, v in params.items())
        model_rows.append(
            [m["family"], shown, _f2(m["log_likelihood"]), _f2(m["aic"]),
             "yes" if m["converged"] else "no",
             ";".join(m["flags"]) or "-", m["error"] or "-"]
        )
    text = f"team: {payload['team']}  direction: {payload['direction']}  matches: {payload['n_matches']}\n"
    text += _table_text(["family", "params", "log_likelihood", "aic", "converged",
                         "flags", "error"], model_rows)
    if payload["overlay"]:
        overlay_rows = [[str(o["x"]), f"{o['empirical']:.4f}", f"{o['pmf']:.4f}"]
                        for o in payload["overlay"]]
        text += "\n" + _table_text(overlay_header, overlay_rows)
    return text


_RANK_COLUMNS = ["rank", "team", "avg_scored", "avg_conceded",
                 "attack_strength", "defense_strength", "strength", "matches_used"]


def _render_rank(payload: dict, fmt: str) -> str:
    if fmt == "json":
        return _json_text(payload)
    if fmt == "csv":
        rows = [[_cell(row[c]) for c in _RANK_COLUMNS] for row in payload["rows"]]
        blocks = [(_RANK_COLUMNS, rows)]
        if payload["excluded"]:
            blocks.append((["team", "reason"],
                           [[e["team"], e["reason"]] for e in payload["excluded"]]))
        return _csv_text(blocks)
    rows = [
        [str(row["rank"]), row["team"], _f2(row["avg_scored"]), _f2(row["avg_conceded"]),
         _f2(row["attack_strength"]), _f2(row["defense_strength"]), _f2(row["strength"]),
         str(row["matches_used"])]
        for row in payload["rows"]
    ]
    text = _table_text(_RANK_COLUMNS, rows)
    if payload["excluded"]:
        text += "\nexcluded:\n"
        for e in payload["excluded"]:
            text += f"  {e['team']}: {e['reason']}\n"
    return text


def _render_simulate(payload: dict, fmt: str) -> str:
    if fmt == "json":
        return _json_text(payload)
    header = ["lambda", "nu", "emp_mean"]
    if fmt == "csv":
        rows = [[_cell(c["lambda"]), _cell(c["nu"]), _cell(c["emp_mean"])]
                for c in payload["cells"]]
        return _csv_text([(header, rows)])
    rows = [[_f2(c["lambda"]), _f2(c["nu"]), _f2(c["emp_mean"])] for c in payload["cells"]]
    return _table_text(header, rows)


# --------------------------------------------------------------------------
# argument parsing
# --------------------------------------------------------------------------


def _date(text: str) -> dt.date:
    try:
        return dt.date.fromisoformat(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not an ISO date: {text!r}") from exc


def _float_list(text: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a comma-separated float list: {text!r}") from exc


def _min_matches(text: str) -> int:
    value = int(text)
    if value < 2:
        raise argparse.ArgumentTypeError("min-matches must be >= 2")
    return value


def _add_common(parser: argparse.ArgumentParser, needs_input: bool) -> None:
    if needs_input:
        parser.add_argument("--input", type=Path, required=True, help="match CSV file")
        parser.add_argument("--from", dest="date_from", type=_date, default=None,
                            help="season window start (inclusive, ISO date)")
        parser.add_argument("--to", dest="date_to", type=_date, default=None,
                            help="season window end (inclusive, ISO date)")
        parser.add_argument("--competition", action="append", default=None,
                            help="restrict to a competition (repeatable)")
        parser.add_argument("--min-matches", type=_min_matches, default=5,
                            help="minimum matches for a team to be fitted (default 5)")
    parser.add_argument("--format", choices=("table", "csv", "json"), default="table",
                        help="output format (default table)")
    parser.add_argument("--rel-tol", type=float, default=1e-12,
                        help="relative truncation tolerance of the CMP series (default 1e-12)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cmprank",
        description="CMP goal-count modelling and team-strength rankings",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dispersion", help="pooled and per-team dispersion indices")
    _add_common(p, needs_input=True)

    p = sub.add_parser("fit", help="three-family model comparison for one team")
    _add_common(p, needs_input=True)
    p.add_argument("--team", required=True, help="team name (exact match)")
    p.add_argument("--direction", choices=("scored", "conceded"), default="scored")

    p = sub.add_parser("rank", help="strength ranking over all eligible teams")
    _add_common(p, needs_input=True)

    p = sub.add_parser("simulate", help="empirical-mean grid over (lambda, nu) cells")
    _add_common(p, needs_input=False)
    p.add_argument("--lambda-grid", dest="lambda_grid", type=_float_list, required=True,
                   help="comma-separated lambda values")
    p.add_argument("--nu-grid", dest="nu_grid", type=_float_list, required=True,
                   help="comma-separated nu values")
    p.add_argument("--n-per-cell", dest="n_per_cell", type=int, default=10000,
                   help="draws per grid cell (default 10000)")
    p.add_argument("--seed", type=int, default=0, help="sampling seed (default 0)")

    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        input_path=getattr(args, "input", None),
        date_from=getattr(args, "date_from", None),
        date_to=getattr(args, "date_to", None),
        competitions=(frozenset(args.competition)
                      if getattr(args, "competition", None) else None),
        min_matches=getattr(args, "min_matches", 5),
        rel_tol=args.rel_tol,
        output_format=args.format,
        seed=getattr(args, "seed", 0),
    )


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _config_from_args(args)
    except ValueError as exc:
        parser.error(str(exc))
    try:
        if args.command == "dispersion":
            text = _render_dispersion(cmd_dispersion(config), config.output_format)
        elif args.command == "fit":
            text = _render_fit(cmd_fit(config, args.team, args.direction),
                               config.output_format)
        elif args.command == "rank":
            text = _render_rank(cmd_rank(config), config.output_format)
        else:
            text = _render_simulate(
                cmd_simulate(config, args.lambda_grid, args.nu_grid, args.n_per_cell),
                config.output_format,
            )
    except CliError as exc:
        print(f"cmprank: {exc}", file=sys.stderr)
        return exc.code
    except EmptySelectionError as exc:
        print(f"cmprank: {exc}", file=sys.stderr)
        return EXIT_EMPTY
    sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
