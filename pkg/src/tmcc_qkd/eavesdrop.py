"""Intercept-resend (state cloning) attack on a TMCC channel.

Eve counts ``n`` photons on Bob's mode and re-emits a fresh state aimed at
``n`` photons. A TMCC resend source is tuned to ``lam_n`` with mean exactly
``n``; a laser resend source emits a Poisson state with mean ``n``. Bob's
count then fluctuates around ``n`` and his letter can differ from Alice's.

Two estimators of the resulting error are provided:

``paper_literal``
    Correct-letter mass taken as the letter-0 and last-letter double sums
    plus the bare probability of every interior letter, averaged uniformly
    over the ``m`` letters.
``probability_weighted``
    The exact probability that Bob's letter differs from Alice's. This is
    the quantity the Monte Carlo sessions measure.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import stats
from scipy.special import gammaln

from .alphabet import AlphabetSpec, alphabet_for_state, encode_letters
from .exceptions import DomainError, SolverError, ValidationError
from .photon_stats import (
    N_MAX_FLOOR,
    TAIL_TOLERANCE,
    PhotonDistribution,
    TmccState,
    build_distribution,
    mean_photon_number,
)

__all__ = [
    "ResendSource",
    "Estimator",
    "CloneAttack",
    "QberReport",
    "poisson_pmf",
    "lambda_for_mean",
    "lambda_for_target",
    "resend_pmf",
    "resend_matrix",
    "mixture_pmf",
    "analytic_qber",
]

DEFAULT_SOLVER_TOL = 1e-10
_MAX_BISECTIONS = 500


class ResendSource(str, enum.Enum):
    TMCC = "tmcc"
    POISSON = "poisson"


class Estimator(str, enum.Enum):
    PAPER_LITERAL = "paper_literal"
    PROBABILITY_WEIGHTED = "probability_weighted"


@dataclass(frozen=True)
class CloneAttack:
    source: ResendSource = ResendSource.TMCC
    solver_tolerance: float = DEFAULT_SOLVER_TOL

    def __post_init__(self) -> None:
        object.__setattr__(self, "source", ResendSource(self.source))
        if not (0.0 < self.solver_tolerance <= 1e-3):
            raise ValidationError(
                f"solver_tolerance must lie in (0, 1e-3], got {self.solver_tolerance!r}"
            )


@dataclass(frozen=True)
class QberReport:
    """Error rates a full intercept-resend attack introduces.

    ``per_letter_correct`` holds P_B(x|x) for the weighted estimator. For the
    literal estimator it holds the printed per-letter terms, whose sum is
    the correct-letter mass before the ``1/m`` averaging.
    ``p_err_per_bit`` is ``p_err / log2(m)``; ``p_err_per_bit_hamming`` is
    the expected fraction of differing key bits under natural binary codes
    and exists only for the weighted estimator.
    """

    estimator: Estimator
    alphabet: AlphabetSpec
    per_letter_correct: tuple[float, ...]
    p_err: float
    p_err_per_bit: float
    p_err_per_bit_hamming: float | None = None


def poisson_pmf(mean: float, k: int) -> float:
    """``exp(-mean) mean**k / k!`` evaluated in log space."""
    if not math.isfinite(mean) or mean < 0:
        raise DomainError(f"mean must be a finite nonnegative number, got {mean!r}")
    if k < 0:
        raise DomainError(f"k must be nonnegative, got {k!r}")
    if mean == 0.0:
        return 1.0 if k == 0 else 0.0
    return math.exp(k * math.log(mean) - mean - math.lgamma(k + 1.0))


def lambda_for_mean(target: float, tol: float = DEFAULT_SOLVER_TOL) -> float:
    """TMCC parameter whose mean photon number equals ``target`` within ``tol``.

    Bisection on ``[0, upper]``; ``upper`` doubles until it overshoots.
    """
    if not math.isfinite(target) or target < 0:
        raise DomainError(f"target mean must be a finite nonnegative number, got {target!r}")
    if not tol > 0:
        raise DomainError(f"tol must be positive, got {tol!r}")
    if target == 0:
        return 0.0
    lo, hi = 0.0, max(1.0, target)
    while mean_photon_number(TmccState(hi)) <= target:
        lo, hi = hi, 2.0 * hi
    for _ in range(_MAX_BISECTIONS):
        mid = 0.5 * (lo + hi)
        err = mean_photon_number(TmccState(mid)) - target
        if abs(err) <= tol:
            return mid
        if err < 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 4 * math.ulp(hi):
            break
    raise SolverError(f"no lam with mean {target} within {tol} after bisection")


@lru_cache(maxsize=2048)
def lambda_for_target(n: int, tol: float = DEFAULT_SOLVER_TOL) -> float:
    """Parameter Eve sets her TMCC source to after counting ``n`` photons."""
    if n < 0:
        raise DomainError(f"photon count must be nonnegative, got {n!r}")
    return lambda_for_mean(float(n), tol)


@lru_cache(maxsize=2048)
def _poisson_distribution(mean: float) -> PhotonDistribution:
    if mean == 0.0:
        probs = np.zeros(N_MAX_FLOOR + 1)
        probs[0] = 1.0
        return PhotonDistribution(probs)
    k_max = max(N_MAX_FLOOR, int(stats.poisson.isf(TAIL_TOLERANCE, mean)))
    tail = float(stats.poisson.sf(k_max, mean))
    k = np.arange(k_max + 1, dtype=float)
    probs = np.exp(k * math.log(mean) - mean - gammaln(k + 1.0))
    return PhotonDistribution(probs / probs.sum(), tail)


def resend_pmf(
    n: int,
    source: ResendSource | str,
    tol: float = DEFAULT_SOLVER_TOL,
) -> PhotonDistribution:
    """Distribution of Bob's count once Eve has seen ``n`` photons."""
    source = ResendSource(source)
    if n < 0:
        raise DomainError(f"photon count must be nonnegative, got {n!r}")
    if source is ResendSource.POISSON:
        return _poisson_distribution(float(n))
    return build_distribution(TmccState(lambda_for_target(int(n), tol)))


def resend_matrix(
    n_max: int,
    source: ResendSource | str,
    tol: float = DEFAULT_SOLVER_TOL,
) -> tuple[np.ndarray, np.ndarray]:
    """Stack of resend PMFs for ``n = 0..n_max``, zero-padded to a common width.

    Returns ``(matrix, tails)`` where ``matrix[n, k]`` is the probability of
    Bob counting ``k`` after Eve counted ``n``.
    """
    rows = [resend_pmf(n, source, tol) for n in range(n_max + 1)]
    width = max(r.probs.size for r in rows)
    matrix = np.vstack([r.padded(width) for r in rows])
    tails = np.array([r.tail_mass for r in rows])
    return matrix, tails


def mixture_pmf(
    state: TmccState,
    source: ResendSource | str,
    tol: float = DEFAULT_SOLVER_TOL,
) -> PhotonDistribution:
    """Unconditional distribution of the re-emitted state, sum_n P_n(lam) P_k(lam_n)."""
    dist = build_distribution(state)
    matrix, tails = resend_matrix(dist.n_max, source, tol)
    mix = dist.probs @ matrix
    tail = dist.tail_mass + float(dist.probs @ tails)
    return PhotonDistribution(mix / mix.sum(), tail)


def _popcount(x: np.ndarray) -> np.ndarray:
    x = x.astype(np.int64)
    count = np.zeros_like(x)
    while np.any(x):
        count += x & 1
        x = x >> 1
    return count


def analytic_qber(
    state: TmccState,
    m: int,
    source: ResendSource | str = ResendSource.TMCC,
    estimator: Estimator | str = Estimator.PROBABILITY_WEIGHTED,
    tol: float = DEFAULT_SOLVER_TOL,
) -> QberReport:
    """Letter and per-bit error rates under a full clone attack.

    The alphabet is centered on the rounded mean of ``state``.
    """
    estimator = Estimator(estimator)
    spec = alphabet_for_state(state, m)
    dist = build_distribution(state)
    p = dist.probs
    matrix, _ = resend_matrix(dist.n_max, source, tol)
    width = max(matrix.shape[1], p.size)
    if matrix.shape[1] < width:
        matrix = np.pad(matrix, ((0, 0), (0, width - matrix.shape[1])))
    letters = encode_letters(np.arange(width), spec)
    alice = letters[: p.size]
    same = letters[None, :] == alice[:, None]
    bits = spec.bits_per_letter

    if estimator is Estimator.PROBABILITY_WEIGHTED:
        kept = (matrix * same).sum(axis=1)
        joint = np.bincount(alice, weights=p * kept, minlength=m)
        marginal = np.bincount(alice, weights=p, minlength=m)
        per_letter = np.divide(joint, marginal, out=np.ones(m), where=marginal > 0)
        p_err = float(np.clip(1.0 - joint.sum(), 0.0, 1.0))
        flips = _popcount(letters[None, :] ^ alice[:, None])
        hamming = float(p @ (matrix * flips).sum(axis=1)) / bits
        return QberReport(
            estimator,
            spec,
            tuple(float(v) for v in np.clip(per_letter, 0.0, 1.0)),
            p_err,
            p_err / bits,
            float(np.clip(hamming, 0.0, 1.0)),
        )

    # literal: both k and n inside the first letter, both inside the last,
    # and the bare mass of every interior letter
    first = letters == 0
    last = letters == m - 1
    terms = np.zeros(m)
    terms[0] = float(p[first[: p.size]] @ matrix[np.ix_(first[: p.size], first)].sum(axis=1))
    terms[m - 1] = float(p[last[: p.size]] @ matrix[np.ix_(last[: p.size], last)].sum(axis=1))
    interior = np.bincount(alice, weights=p, minlength=m)
    terms[1 : m - 1] = interior[1 : m - 1]
    p_err = float(np.clip(1.0 - terms.sum() / m, 0.0, 1.0))
    return QberReport(
        estimator,
        spec,
        tuple(float(v) for v in np.clip(terms, 0.0, 1.0)),
        p_err,
        p_err / bits,
        None,
    )
