"""Large-alphabet quantum key distribution with two-mode coherently correlated beams."""

__version__ = "0.1.0"

from .alphabet import (
    AlphabetSpec,
    EmptyLetterWarning,
    Letter,
    alphabet_entropy,
    alphabet_for_state,
    center_from_mean,
    encode_letter,
    letter_pmf,
)
from .eavesdrop import (
    CloneAttack,
    Estimator,
    QberReport,
    ResendSource,
    analytic_qber,
    lambda_for_mean,
    lambda_for_target,
    mixture_pmf,
    poisson_pmf,
    resend_pmf,
)
from .exceptions import DomainError, SolverError, TmccError, TruncationError, ValidationError
from .photon_stats import (
    PhotonDistribution,
    TmccState,
    bessel_i0,
    build_distribution,
    mandel_q,
    max_info,
    mean_photon_number,
    photon_number_pmf,
    second_moment,
    shannon_entropy,
    variance,
)
from .simulation import (
    SessionConfig,
    SessionResult,
    compare_keys,
    empirical_stats,
    run_session,
    sample_photon_number,
)
