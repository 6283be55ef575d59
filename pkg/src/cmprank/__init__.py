"""Goal-count modelling with the Conway-Maxwell-Poisson distribution and
cross-competition team-strength rankings derived from its fitted parameters.
"""

from .cmpdist import (
    DEFAULT_CONTROL,
    CmpParams,
    InvalidParamsError,
    NonPositiveVarianceError,
    SeriesControl,
    SeriesNotConvergedError,
    classify_dispersion,
    dispersion_index,
    log_normalizer,
    log_pmf,
    mean_and_variance,
    pmf,
    sample,
)
from .fitting import (
    DegenerateSeriesError,
    Family,
    FitReport,
    GaussianParams,
    GoalSeries,
    NegBinParams,
    SeriesTooShortError,
    compare_models,
    cmp_log_likelihood,
    empirical_moments,
    fit_cmp,
    fit_gaussian,
    fit_negative_binomial,
    gaussian_log_likelihood,
    negbin_log_likelihood,
)
from .matchdata import (
    CANONICAL_HEADER,
    Dataset,
    EmptySelectionError,
    LoadError,
    MalformedHeaderError,
    MatchFilter,
    MatchRecord,
    UnknownTeamError,
    load_matches,
    sample_matches_path,
    team_match_count,
    team_series,
    to_csv,
)
from .strength import (
    LambdaAtMostOneError,
    RankingRow,
    RankingTable,
    TeamStrength,
    ZeroDispersionError,
    attack_strength,
    defense_strength,
    overall_strength,
    rank_teams,
    strength_sensitivity,
    team_strength,
)

__version__ = "0.1.0"
