"""Match-result ingestion: canonical CSV schema, validation, goal series.

Canonical schema (UTF-8, comma separated, ISO-8601 dates):

    date,competition,home_team,away_team,home_goals,away_goals

Malformed rows are rejected individually (with their file line number) and
loading fails only if no row survives.  Exact duplicates, keyed on
(date, home_team, away_team, home_goals, away_goals), are dropped with a
warning.  Matches are stored sorted by (date, competition, teams, score), a
total order on deduplicated records, so a Dataset, and everything derived
from it, is independent of the row order of the input file.
"""

from __future__ import annotations

import csv
import datetime as dt
import io
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .fitting import GoalSeries

__all__ = [
    "CANONICAL_HEADER",
    "MatchRecord",
    "Dataset",
    "MatchFilter",
    "MalformedHeaderError",
    "LoadError",
    "UnknownTeamError",
    "EmptySelectionError",
    "load_matches",
    "team_series",
    "to_csv",
    "sample_matches_path",
]

CANONICAL_HEADER = ("date", "competition", "home_team", "away_team", "home_goals", "away_goals")

# Goal counts above this are flagged as implausible for handball (warning only).
PLAUSIBLE_MAX_GOALS = 60


class MalformedHeaderError(ValueError):
    """The CSV header does not match the canonical schema."""


class LoadError(ValueError):
    """No valid match rows could be loaded."""


class UnknownTeamError(ValueError):
    """The requested team never appears in the dataset."""


class EmptySelectionError(ValueError):
    """A filter removed every match for the requested selection."""


@dataclass(frozen=True)
class MatchRecord:
    date: dt.date
    competition: str
    home_team: str
    away_team: str
    home_goals: int
    away_goals: int

    def __post_init__(self):
        if self.home_team == self.away_team:
            raise ValueError(f"home and away team are both {self.home_team!r}")
        for side, goals in (("home", self.home_goals), ("away", self.away_goals)):
            if not isinstance(goals, int) or goals < 0:
                raise ValueError(f"{side}_goals must be a non-negative integer, got {goals!r}")

    def sort_key(self):
        return (
            self.date,
            self.competition,
            self.home_team,
            self.away_team,
            self.home_goals,
            self.away_goals,
        )


@dataclass(frozen=True)
class Dataset:
    """Validated, canonically ordered match records plus load diagnostics."""

    matches: tuple[MatchRecord, ...]
    rejected_rows: tuple[tuple[int, str], ...] = field(default=(), compare=False)
    duplicates_dropped: int = field(default=0, compare=False)
    warnings: tuple[str, ...] = field(default=(), compare=False)

    @property
    def teams(self) -> frozenset[str]:
        names = set()
        for m in self.matches:
            names.add(m.home_team)
            names.add(m.away_team)
        return frozenset(names)


@dataclass(frozen=True)
class MatchFilter:
    """Optional season window (inclusive dates) and competition whitelist."""

    date_from: dt.date | None = None
    date_to: dt.date | None = None
    competitions: frozenset[str] | None = None

    def __post_init__(self):
        if self.date_from and self.date_to and self.date_from > self.date_to:
            raise ValueError(f"date_from {self.date_from} is after date_to {self.date_to}")
        if self.competitions is not None:
            object.__setattr__(self, "competitions", frozenset(self.competitions))

    def keep(self, match: MatchRecord) -> bool:
        if self.date_from and match.date < self.date_from:
            return False
        if self.date_to and match.date > self.date_to:
            return False
        if self.competitions is not None and match.competition not in self.competitions:
            return False
        return True


def _parse_row(row: list[str]) -> MatchRecord:
    if len(row) != len(CANONICAL_HEADER):
        raise ValueError(f"expected {len(CANONICAL_HEADER)} fields, got {len(row)}")
    date_s, competition, home, away, hg_s, ag_s = (f.strip() for f in row)
    date = dt.date.fromisoformat(date_s)
    goals = []
    for name, raw in (("home_goals", hg_s), ("away_goals", ag_s)):
        try:
            value = int(raw)
        except ValueError:
            raise ValueError(f"{name} {raw!r} is not an integer") from None
        goals.append(value)
    if not competition or not home or not away:
        raise ValueError("competition and team names must be non-empty")
    return MatchRecord(date, competition, home, away, goals[0], goals[1])


def load_matches(source, format: str = "csv") -> Dataset:
    """Load and validate a match file.

    ``source`` may be a path, a text or binary stream, or a CSV string.
    Returns a Dataset whose diagnostics record rejected rows (with file line
    numbers), dropped duplicates and plausibility warnings.
    """
    if format != "csv":
        raise ValueError(f"unsupported format {format!r}")
    if isinstance(source, (str, Path)) and "\n" not in str(source):
        text = Path(source).read_text(encoding="utf-8")
    elif isinstance(source, str):
        text = source
    elif isinstance(source, bytes):
        text = source.decode("utf-8")
    elif hasattr(source, "read"):
        data = source.read()
        text = data.decode("utf-8") if isinstance(data, bytes) else data
    else:
        raise TypeError(f"cannot load matches from {type(source).__name__}")

    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise MalformedHeaderError("empty input") from None
    if tuple(f.strip() for f in header) != CANONICAL_HEADER:
        raise MalformedHeaderError(
            f"expected header {','.join(CANONICAL_HEADER)!r}, got {','.join(header)!r}"
        )

    matches: list[MatchRecord] = []
    seen: set[tuple] = set()
    rejected: list[tuple[int, str]] = []
    warnings: list[str] = []
    duplicates = 0
    for row in reader:
        line = reader.line_num
        if not row or all(not f.strip() for f in row):
            continue
        try:
            match = _parse_row(row)
        except ValueError as exc:
            rejected.append((line, str(exc)))
            continue
        key = (match.date, match.home_team, match.away_team, match.home_goals, match.away_goals)
        if key in seen:
            duplicates += 1
            warnings.append(f"line {line}: duplicate of an earlier match, dropped")
            continue
        seen.add(key)
        if max(match.home_goals, match.away_goals) > PLAUSIBLE_MAX_GOALS:
            warnings.append(
                f"line {line}: goal count above {PLAUSIBLE_MAX_GOALS} looks implausible"
            )
        matches.append(match)

    if rejected and not matches:
        detail = "; ".join(f"line {n}: {msg}" for n, msg in rejected[:5])
        raise LoadError(f"all {len(rejected)} rows were rejected ({detail})")
    matches.sort(key=MatchRecord.sort_key)
    return Dataset(
        matches=tuple(matches),
        rejected_rows=tuple(rejected),
        duplicates_dropped=duplicates,
        warnings=tuple(warnings),
    )


def _selected_matches(data: Dataset, team: str, match_filter: MatchFilter | None):
    if team not in data.teams:
        raise UnknownTeamError(f"team {team!r} does not appear in the dataset")
    keep = match_filter.keep if match_filter else (lambda m: True)
    return [m for m in data.matches if keep(m) and team in (m.home_team, m.away_team)]


def team_series(
    data: Dataset,
    team: str,
    direction: str = "scored",
    match_filter: MatchFilter | None = None,
) -> GoalSeries:
    """Goals scored (or conceded) by ``team``, in chronological order."""
    if direction not in ("scored", "conceded"):
        raise ValueError(f"direction must be 'scored' or 'conceded', got {direction!r}")
    selected = _selected_matches(data, team, match_filter)
    if not selected:
        raise EmptySelectionError(f"no matches left for {team!r} after filtering")
    own_side = direction == "scored"
    counts = tuple(
        m.home_goals if (m.home_team == team) == own_side else m.away_goals
        for m in selected
    )
    return GoalSeries(counts=counts, label=f"{team} {direction}")


def team_match_count(data: Dataset, team: str, match_filter: MatchFilter | None = None) -> int:
    """Number of matches involving ``team`` after filtering."""
    return len(_selected_matches(data, team, match_filter))


def to_csv(data: Dataset) -> str:
    """Serialize back to the canonical schema (round-trips through load)."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CANONICAL_HEADER)
    for m in data.matches:
        writer.writerow(
            [m.date.isoformat(), m.competition, m.home_team, m.away_team, m.home_goals, m.away_goals]
        )
    return out.getvalue()


def sample_matches_path() -> Path:
    """Path of the bundled synthetic fixture dataset."""
    return Path(resources.files("cmprank") / "fixtures" / "sample_matches.csv")
