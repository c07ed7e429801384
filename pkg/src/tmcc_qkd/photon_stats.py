"""Photon-number statistics of a two-mode coherently correlated (TMCC) beam.

The state is parameterized by the modulus ``lam`` of its complex parameter.
Each mode, measured on its own, shows the photon-number distribution

.. math::

    P_n(\\lambda) = \\frac{\\lambda^{2n}}{(n!)^2 \\, I_0(2\\lambda)}

which is all the protocol needs: the two modes always carry the same count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .exceptions import DomainError, TruncationError, ValidationError

__all__ = [
    "BESSEL_X_MAX",
    "TAIL_TOLERANCE",
    "N_MAX_FLOOR",
    "TmccState",
    "PhotonDistribution",
    "bessel_i0",
    "photon_number_pmf",
    "build_distribution",
    "mean_photon_number",
    "second_moment",
    "variance",
    "mandel_q",
    "shannon_entropy",
    "max_info",
]

BESSEL_X_MAX = 200.0
TAIL_TOLERANCE = 1e-12
N_MAX_FLOOR = 25
_NORM_SLACK = 1e-9


def bessel_i0(x: float) -> float:
    """Modified Bessel function of the first kind, order zero.

    Summed from the power series ``sum_k (x/2)**(2k) / (k!)**2``. Every term
    is positive, so plain summation keeps full relative precision.

    Parameters
    ----------
    x : float
        Argument in ``[0, 200]``.

    Raises
    ------
    DomainError
        If ``x`` is negative, not finite, or above 200.
    """
    x = float(x)
    if not (0.0 <= x <= BESSEL_X_MAX):
        raise DomainError(f"bessel_i0 needs 0 <= x <= {BESSEL_X_MAX}, got {x!r}")
    q = 0.25 * x * x
    term = 1.0
    terms = [term]
    partial = term
    k = 0
    while True:
        k += 1
        term *= q / (k * k)
        terms.append(term)
        partial += term
        # past the peak the terms shrink faster than geometrically
        if k * k > q and term <= 1e-18 * partial:
            break
    return math.fsum(terms)


def _log_bessel_i0(x: float) -> float:
    return math.log(bessel_i0(x))


def _log_weights(lam: float, n: np.ndarray) -> np.ndarray:
    # log of lam**(2n) / (n!)**2 / I0(2 lam), factorials through lgamma
    from scipy.special import gammaln

    return 2.0 * n * math.log(lam) - 2.0 * gammaln(n + 1.0) - _log_bessel_i0(2.0 * lam)


def photon_number_pmf(lam: float, n: int) -> float:
    """Probability of counting ``n`` photons in one mode of a TMCC beam."""
    lam = float(lam)
    if lam < 0 or not math.isfinite(lam):
        raise DomainError(f"lam must be a finite nonnegative number, got {lam!r}")
    if n < 0:
        raise DomainError(f"photon number must be nonnegative, got {n!r}")
    if lam == 0.0:
        return 1.0 if n == 0 else 0.0
    log_p = 2.0 * n * math.log(lam) - 2.0 * math.lgamma(n + 1.0) - _log_bessel_i0(2.0 * lam)
    return min(1.0, math.exp(log_p))


def _auto_n_max(lam: float, tol: float) -> int:
    """Smallest cutoff (at least ``N_MAX_FLOOR``) with a certified tail below ``tol``.

    Successive terms shrink by ``lam**2 / (n+1)**2``. Once that ratio is below
    one it keeps decreasing, so the tail after ``n`` is bounded by the
    geometric series ``P[n+1] / (1 - lam**2/(n+2)**2)``.
    """
    if lam == 0.0:
        return N_MAX_FLOOR
    log_i0 = _log_bessel_i0(2.0 * lam)
    two_log_lam = 2.0 * math.log(lam)
    n = 0
    while True:
        log_next = (n + 1) * two_log_lam - 2.0 * math.lgamma(n + 2.0) - log_i0
        ratio = lam * lam / ((n + 2) * (n + 2))
        if n >= N_MAX_FLOOR and ratio < 1.0 and math.exp(log_next) / (1.0 - ratio) < tol:
            return n
        n += 1


@dataclass(frozen=True)
class TmccState:
    """A TMCC source setting.

    ``n_max`` is the Fock-sum cutoff. Leave it as ``None`` to pick the
    smallest cutoff whose tail mass is provably below ``tail_tol``.
    """

    lam: float
    n_max: int | None = None
    tail_tol: float = TAIL_TOLERANCE

    def __post_init__(self) -> None:
        lam = float(self.lam)
        if not math.isfinite(lam) or lam < 0:
            raise DomainError(f"lam must be a finite nonnegative number, got {self.lam!r}")
        if 2.0 * lam > BESSEL_X_MAX:
            raise DomainError(f"lam={lam} exceeds the supported range lam <= {BESSEL_X_MAX / 2}")
        if not (0.0 < self.tail_tol < 1.0):
            raise DomainError(f"tail_tol must lie in (0, 1), got {self.tail_tol!r}")
        object.__setattr__(self, "lam", lam)
        if self.n_max is None:
            object.__setattr__(self, "n_max", _auto_n_max(lam, self.tail_tol))
        elif int(self.n_max) < 1:
            raise DomainError(f"n_max must be >= 1, got {self.n_max!r}")
        else:
            object.__setattr__(self, "n_max", int(self.n_max))


@dataclass(frozen=True, eq=False)
class PhotonDistribution:
    """Truncated, renormalized photon-number PMF over ``n = 0..n_max``.

    ``tail_mass`` is the probability that lived beyond ``n_max`` before the
    entries were rescaled to sum to one.
    """

    probs: np.ndarray
    tail_mass: float = 0.0
    _cdf: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        p = np.array(self.probs, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise ValidationError("probs must be a non-empty 1-D sequence")
        if np.any(p < 0) or not np.all(np.isfinite(p)):
            raise ValidationError("probs must be finite and nonnegative")
        total = p.sum()
        if abs(total - 1.0) > _NORM_SLACK:
            raise ValidationError(f"probs sum to {total!r}, expected 1")
        p.setflags(write=False)
        cdf = np.cumsum(p)
        cdf.setflags(write=False)
        object.__setattr__(self, "probs", p)
        object.__setattr__(self, "_cdf", cdf)

    @property
    def n_max(self) -> int:
        return self.probs.size - 1

    @property
    def support(self) -> np.ndarray:
        return np.arange(self.probs.size)

    @property
    def cdf(self) -> np.ndarray:
        return self._cdf

    def moment(self, order: int) -> float:
        return float(np.dot(self.support.astype(float) ** order, self.probs))

    def mean(self) -> float:
        return self.moment(1)

    def padded(self, length: int) -> np.ndarray:
        """Probabilities zero-padded (never cut) to ``length`` entries."""
        if length < self.probs.size:
            raise ValidationError("cannot pad to a shorter length")
        out = np.zeros(length)
        out[: self.probs.size] = self.probs
        return out


def _tail_beyond(lam: float, n_max: int) -> float:
    log_i0 = _log_bessel_i0(2.0 * lam)
    two_log_lam = 2.0 * math.log(lam)
    terms = []
    n = n_max + 1
    while True:
        t = math.exp(n * two_log_lam - 2.0 * math.lgamma(n + 1.0) - log_i0)
        terms.append(t)
        if lam * lam < (n + 1) * (n + 1) and t < 1e-30:
            break
        n += 1
    return math.fsum(terms)


@lru_cache(maxsize=4096)
def _cached_distribution(lam: float, n_max: int, tail_tol: float) -> PhotonDistribution:
    if lam == 0.0:
        probs = np.zeros(n_max + 1)
        probs[0] = 1.0
        return PhotonDistribution(probs, 0.0)
    tail = _tail_beyond(lam, n_max)
    if tail > tail_tol:
        raise TruncationError(
            f"tail mass {tail:.3e} beyond n_max={n_max} exceeds {tail_tol:.1e} at lam={lam}; "
            "increase n_max or leave it unset for automatic truncation"
        )
    probs = np.exp(_log_weights(lam, np.arange(n_max + 1, dtype=float)))
    return PhotonDistribution(probs / probs.sum(), tail)


def build_distribution(state: TmccState) -> PhotonDistribution:
    """Photon-number PMF of ``state`` over ``0..state.n_max``.

    Raises
    ------
    TruncationError
        If an explicit ``n_max`` leaves more than ``state.tail_tol`` of the
        mass uncounted.
    """
    return _cached_distribution(state.lam, state.n_max, state.tail_tol)


def mean_photon_number(state: TmccState) -> float:
    return build_distribution(state).moment(1)


def second_moment(state: TmccState) -> float:
    return build_distribution(state).moment(2)


def variance(state: TmccState) -> float:
    dist = build_distribution(state)
    mean = dist.moment(1)
    return float(np.dot((dist.support - mean) ** 2, dist.probs))


def mandel_q(state: TmccState) -> float:
    """Mandel parameter ``(Var - mean) / mean``; negative means sub-Poisson.

    Raises
    ------
    DomainError
        For the vacuum (``lam == 0``), where the mean is zero.
    """
    mean = mean_photon_number(state)
    if mean <= 0.0:
        raise DomainError("Mandel Q is undefined at zero mean photon number")
    return (variance(state) - mean) / mean


def shannon_entropy(probs: Sequence[float] | np.ndarray) -> float:
    """Shannon entropy in bits, with ``0 log 0 = 0``."""
    p = np.asarray(probs, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise ValidationError("probabilities must form a non-empty 1-D sequence")
    if np.any(p < 0) or not np.all(np.isfinite(p)):
        raise ValidationError("probabilities must be finite and nonnegative")
    if abs(p.sum() - 1.0) > _NORM_SLACK:
        raise ValidationError(f"probabilities sum to {p.sum()!r}, expected 1")
    nz = p[p > 0]
    return max(0.0, float(-np.dot(nz, np.log2(nz))))


def max_info(state: TmccState) -> float:
    """Entropy of the full photon-number PMF, one letter per photon count."""
    return shannon_entropy(build_distribution(state).probs)
