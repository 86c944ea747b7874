"""Local quadrant-dependence function of bivariate distributions.

The dependence function ``q_C(u, v) = (C(u, v) - uv) / sqrt(uv(1-u)(1-v))``
of a copula, its rank estimators ``Q_n`` and ``L_n = sqrt(n) Q_n``, and
distribution-free Monte Carlo tests built on them.
"""

from .copulas import (
    CopulaModel,
    FrechetLower,
    FrechetMixture,
    FrechetUpper,
    Independence,
    MaiScherer,
    MarshallOlkin,
    QuasiCopulaCc,
    Sample,
    conditional_cdf,
    copula_cdf,
    find_negative_rectangle,
    parse_model,
    rectangle_volume,
    sample,
)
from .dependence import (
    DependenceSurface,
    GeneralBivariateCdf,
    Grid,
    bounds,
    q_copula,
    q_general,
    q_via_correlation,
    score_phi,
    surface,
    weight,
)
from .empirical import (
    PseudoSample,
    SummaryStats,
    chi_values,
    empirical_copula_cn,
    empirical_copula_dn,
    hat_q_general,
    ln,
    qn,
    rank_decomposition,
    rank_transform,
    summary,
    surface_estimate,
    z_process,
)
from .exceptions import DomainError, ParseError, TieError, TieWarning
from .inference import (
    NullTable,
    TestReport,
    classical_stats,
    critical_value,
    quantile_type7,
    run_test,
    signed_quantiles,
    simulate_null,
)

__version__ = "0.1.0"
