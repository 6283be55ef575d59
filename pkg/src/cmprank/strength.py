"""Team strengths derived from fitted CMP parameters, and rankings.

A team's scored goals are fitted as CMP(lambda_a, nu_a) and its conceded
goals as CMP(lambda_d, nu_d).  Strengths are

    attack   s_a = log(lambda_a) / nu_a      (more goals, more regular: higher)
    defense  s_d = nu_d / log(lambda_d)      (fewer goals conceded: higher)
    overall  s   = s_a * s_d

The log transform reflects the roughly logarithmic growth of the CMP mean in
lambda; the dispersion parameters enter as regularity rewards/penalties.
Both formulas need lambda > 1, which every real handball-scale fit satisfies;
teams violating that are rejected with an explicit error rather than given a
sentinel value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .cmpdist import CmpParams
from .fitting import Family, FitReport

__all__ = [
    "TeamStrength",
    "RankingRow",
    "RankingTable",
    "LambdaAtMostOneError",
    "ZeroDispersionError",
    "defense_strength",
    "attack_strength",
    "overall_strength",
    "team_strength",
    "rank_teams",
    "strength_sensitivity",
]


class LambdaAtMostOneError(ValueError):
    """The strength formulas need lambda > 1 (log lambda must be positive)."""


class ZeroDispersionError(ValueError):
    """Attack strength divides by nu, which must be positive."""


@dataclass(frozen=True)
class TeamStrength:
    team: str
    attack: float
    defense: float
    overall: float
    attack_fit: FitReport
    defense_fit: FitReport
    matches_used: int


@dataclass(frozen=True)
class RankingRow:
    rank: int
    strength: TeamStrength
    avg_scored: float
    avg_conceded: float


@dataclass(frozen=True)
class RankingTable:
    rows: tuple[RankingRow, ...]


def _require_lambda_above_one(params: CmpParams, what: str) -> None:
    if params.lam <= 1:
        raise LambdaAtMostOneError(
            f"{what} strength needs lambda > 1, got lambda = {params.lam}"
        )


def defense_strength(params: CmpParams) -> float:
    """nu_d / log(lambda_d): high for teams that concede few goals, steadily."""
    _require_lambda_above_one(params, "defense")
    return params.nu / math.log(params.lam)


def attack_strength(params: CmpParams) -> float:
    """log(lambda_a) / nu_a: high for teams that score many goals; irregular
    attacks (large nu_a) are penalized."""
    _require_lambda_above_one(params, "attack")
    if params.nu == 0:
        raise ZeroDispersionError("attack strength needs nu > 0")
    return math.log(params.lam) / params.nu


def overall_strength(attack: float, defense: float) -> float:
    """Product of attack and defense strengths."""
    for name, value in (("attack", attack), ("defense", defense)):
        if not (math.isfinite(value) and value > 0):
            raise ValueError(f"{name} strength must be finite and > 0, got {value}")
    return attack * defense


def team_strength(team: str, attack_fit: FitReport, defense_fit: FitReport) -> TeamStrength:
    """Assemble a TeamStrength from the two CMP fit reports of one team."""
    for direction, fit in (("attack", attack_fit), ("defense", defense_fit)):
        if fit.family is not Family.CMP or fit.params is None:
            raise ValueError(f"{direction} fit for {team!r} is not a usable CMP fit")
    try:
        attack = attack_strength(attack_fit.params)
        defense = defense_strength(defense_fit.params)
    except LambdaAtMostOneError as exc:
        raise LambdaAtMostOneError(f"team {team!r}: {exc}") from exc
    return TeamStrength(
        team=team,
        attack=attack,
        defense=defense,
        overall=overall_strength(attack, defense),
        attack_fit=attack_fit,
        defense_fit=defense_fit,
        matches_used=attack_fit.n_obs,
    )


def rank_teams(strengths: list[TeamStrength] | tuple[TeamStrength, ...]) -> RankingTable:
    """Sort by overall strength, descending; ranks are 1..n.

    Ties break on higher defense strength, then alphabetically, so the table
    is deterministic.
    """
    if not strengths:
        raise ValueError("cannot rank an empty list of teams")
    for s in strengths:
        if not math.isfinite(s.overall):
            raise ValueError(f"team {s.team!r} has non-finite overall strength")
    ordered = sorted(strengths, key=lambda s: (-s.overall, -s.defense, s.team))
    rows = tuple(
        RankingRow(
            rank=i + 1,
            strength=s,
            avg_scored=s.attack_fit.sample_mean,
            avg_conceded=s.defense_fit.sample_mean,
        )
        for i, s in enumerate(ordered)
    )
    return RankingTable(rows=rows)


def strength_sensitivity(
    params_a: CmpParams, params_d: CmpParams, delta: float
) -> tuple[float, float]:
    """Central finite-difference slopes of the overall strength.

    Returns (ds/dlambda_a, ds/dlambda_d).  The first is proportional to
    1/lambda_a (scoring more buys less and less); the second is negative
    (conceding more always hurts).
    """
    if not (delta > 0):
        raise ValueError(f"delta must be > 0, got {delta}")

    def overall(lam_a: float, lam_d: float) -> float:
        a = attack_strength(CmpParams(lam_a, params_a.nu))
        d = defense_strength(CmpParams(lam_d, params_d.nu))
        return overall_strength(a, d)

    d_lambda_a = (
        overall(params_a.lam + delta, params_d.lam)
        - overall(params_a.lam - delta, params_d.lam)
    ) / (2 * delta)
    d_lambda_d = (
        overall(params_a.lam, params_d.lam + delta)
        - overall(params_a.lam, params_d.lam - delta)
    ) / (2 * delta)
    return d_lambda_a, d_lambda_d
