"""Regenerate src/cmprank/fixtures/sample_matches.csv.

Six synthetic teams with a deliberate quality gradient play a double round
robin in two competitions plus a handful of friendlies; a seventh team gets
only two matches so the min-matches exclusion path has something to chew on.
Goals are CMP draws whose mean blends the scorer's attack level with the
opponent's concession level, so scored and conceded series stay coupled the
way real fixtures are.

Run from the repository root:  python3 tools/generate_fixture.py
"""

from __future__ import annotations

import datetime as dt
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from cmprank.cmpdist import CmpParams, sample
from cmprank.fitting import _lambda_matching_mean  # noqa: E402
from cmprank.cmpdist import DEFAULT_CONTROL

OUT = Path(__file__).resolve().parent.parent / "src" / "cmprank" / "fixtures" / "sample_matches.csv"

# team -> (attack level, concession level, attack dispersion nu)
TEAMS = {
    "Aurora Vikings": (36.0, 21.0, 1.8),
    "Vestfjord Elite": (33.0, 23.0, 1.5),
    "Granite City HB": (30.0, 25.0, 1.3),
    "Blue Lagoon HK": (28.0, 27.0, 1.1),
    "Steelport Women": (26.0, 30.0, 0.9),
    "HC Nordhavn": (23.0, 33.0, 0.8),
}
TINY_TEAM = "Harbor Mills HC"
TINY_PROFILE = (25.0, 28.0, 1.0)

BASE_SEED = 20220703


def round_robin(names: list[str]) -> list[list[tuple[str, str]]]:
    """Circle-method schedule: one list of (home, away) pairs per round."""
    rotating = list(names)
    rounds = []
    for r in range(len(names) - 1):
        pairs = []
        for i in range(len(names) // 2):
            a, b = rotating[i], rotating[-1 - i]
            pairs.append((a, b) if (r + i) % 2 == 0 else (b, a))
        rounds.append(pairs)
        rotating.insert(1, rotating.pop())
    return rounds


def main() -> None:
    lam_cache: dict[tuple[float, float], float] = {}

    def draw_goals(attacker: str, defender: str, seed: int) -> int:
        atk, _, nu = TEAMS.get(attacker, TINY_PROFILE if attacker == TINY_TEAM else None)
        _, con, _ = TEAMS.get(defender, TINY_PROFILE if defender == TINY_TEAM else None)
        mean = (atk + con) / 2.0
        key = (mean, nu)
        if key not in lam_cache:
            lam_cache[key] = _lambda_matching_mean(mean, nu, DEFAULT_CONTROL)
        params = CmpParams(lam_cache[key], nu)
        return int(sample(params, 1, seed=seed)[0])

    names = list(TEAMS)
    rows = []
    seed = BASE_SEED

    def add_match(date: dt.date, competition: str, home: str, away: str) -> None:
        nonlocal seed
        hg = draw_goals(home, away, seed)
        ag = draw_goals(away, home, seed + 1)
        seed += 2
        rows.append((date, competition, home, away, hg, ag))

    # North League: double round robin, rounds every other Saturday
    league_rounds = round_robin(names)
    league_rounds += [[(a, b) for (b, a) in rnd] for rnd in league_rounds]
    date = dt.date(2022, 9, 3)
    for rnd in league_rounds:
        for home, away in rnd:
            add_match(date, "North League", home, away)
        date += dt.timedelta(days=14)

    # Continental Cup: double round robin, midweek, monthly-ish
    cup_rounds = round_robin(names[::-1])
    cup_rounds += [[(a, b) for (b, a) in rnd] for rnd in cup_rounds]
    date = dt.date(2022, 10, 12)
    for rnd in cup_rounds:
        for home, away in rnd:
            add_match(date, "Continental Cup", home, away)
        date += dt.timedelta(days=21)

    # pre-season friendlies
    friendly_pairs = [
        ("Aurora Vikings", "Granite City HB"),
        ("Vestfjord Elite", "HC Nordhavn"),
        ("Blue Lagoon HK", "Steelport Women"),
        ("Granite City HB", "Vestfjord Elite"),
        ("Steelport Women", "Aurora Vikings"),
        ("HC Nordhavn", "Blue Lagoon HK"),
    ]
    date = dt.date(2022, 8, 6)
    for home, away in friendly_pairs:
        add_match(date, "Friendly", home, away)
        date += dt.timedelta(days=3)

    # the short-history team: two friendlies only
    add_match(dt.date(2022, 8, 20), "Friendly", TINY_TEAM, "Blue Lagoon HK")
    add_match(dt.date(2023, 1, 7), "Friendly", "Aurora Vikings", TINY_TEAM)

    OUT.parent.mkdir(parents=True, exist_ok=True)
    with OUT.open("w", encoding="utf-8", newline="") as fh:
        fh.write("date,competition,home_team,away_team,home_goals,away_goals\n")
        for date, comp, home, away, hg, ag in rows:
            fh.write(f"{date.isoformat()},{comp},{home},{away},{hg},{ag}\n")
    print(f"wrote {len(rows)} matches to {OUT}")


if __name__ == "__main__":
    main()
