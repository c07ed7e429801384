"""Seeded Monte Carlo key-distribution sessions.

Each time slot ``i`` draws its uniforms from Philox block ``i`` under key
``seed``, so a slot's outcome depends on ``(seed, i)`` alone. Sessions can be
split into slot ranges, run anywhere, and merged by integer addition with a
bit-identical result.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .alphabet import ALPHABET_SIZES, AlphabetSpec, alphabet_for_state, encode_letters
from .eavesdrop import DEFAULT_SOLVER_TOL, ResendSource, resend_matrix
from .exceptions import DomainError, ValidationError
from .photon_stats import PhotonDistribution, TmccState, build_distribution

__all__ = [
    "SessionConfig",
    "SessionResult",
    "SessionTally",
    "slot_uniforms",
    "sample_photon_number",
    "sample_photon_numbers",
    "compare_keys",
    "empirical_stats",
    "simulate_slots",
    "run_shard",
    "run_session",
]

_SEED_LIMIT = 2**64
_WORDS_PER_SLOT = 4  # one Philox block
_CHUNK = 1 << 18


@dataclass(frozen=True)
class SessionConfig:
    """Everything that determines a session.

    ``attack`` is ``None`` for an untouched channel, otherwise the source Eve
    uses to re-emit every intercepted pulse.
    """

    lam: float
    alphabet_size: int = 2
    slots: int = 1000
    seed: int = 0
    attack: ResendSource | None = None

    def __post_init__(self) -> None:
        if not math.isfinite(self.lam) or self.lam < 0:
            raise ValidationError(f"lam must be a finite nonnegative number, got {self.lam!r}")
        if self.alphabet_size not in ALPHABET_SIZES:
            raise ValidationError(f"alphabet_size must be one of {ALPHABET_SIZES}")
        if int(self.slots) != self.slots or self.slots < 1:
            raise ValidationError(f"slots must be a positive integer, got {self.slots!r}")
        if int(self.seed) != self.seed or not 0 <= self.seed < _SEED_LIMIT:
            raise ValidationError("seed must be an unsigned 64-bit integer")
        if self.attack is not None:
            object.__setattr__(self, "attack", ResendSource(self.attack))


@dataclass
class SessionTally:
    """Integer sufficient statistics of a slot range; adding tallies is exact."""

    slots: int = 0
    letter_errors: int = 0
    bit_errors: int = 0
    sum_n: int = 0
    sum_n2: int = 0
    letter_counts: list[int] = field(default_factory=list)

    def __add__(self, other: "SessionTally") -> "SessionTally":
        if len(self.letter_counts) != len(other.letter_counts):
            raise ValidationError("cannot merge tallies of different alphabets")
        counts = [a + b for a, b in zip(self.letter_counts, other.letter_counts)]
        return SessionTally(
            self.slots + other.slots,
            self.letter_errors + other.letter_errors,
            self.bit_errors + other.bit_errors,
            self.sum_n + other.sum_n,
            self.sum_n2 + other.sum_n2,
            counts,
        )


@dataclass(frozen=True)
class SessionResult:
    letter_error_rate: float
    bit_error_rate_eq14: float
    bit_error_rate_hamming: float
    empirical_letter_freq: tuple[float, ...]
    empirical_mean: float
    empirical_mandel_q: float  # nan when Alice never saw a photon
    slots: int
    letter_errors: int

    @classmethod
    def from_tally(cls, tally: SessionTally, alphabet_size: int) -> "SessionResult":
        n = tally.slots
        bits = int(math.log2(alphabet_size))
        letter_rate = tally.letter_errors / n
        mean = tally.sum_n / n
        if n >= 2 and tally.sum_n > 0:
            # exact integer numerator before the single rounding step
            var = (tally.sum_n2 * n - tally.sum_n**2) / (n * (n - 1))
            q = (var - mean) / mean
        else:
            q = math.nan
        return cls(
            letter_error_rate=letter_rate,
            bit_error_rate_eq14=letter_rate / bits,
            bit_error_rate_hamming=tally.bit_errors / (n * bits),
            empirical_letter_freq=tuple(c / n for c in tally.letter_counts),
            empirical_mean=mean,
            empirical_mandel_q=q,
            slots=n,
            letter_errors=tally.letter_errors,
        )


def slot_uniforms(seed: int, start: int, stop: int) -> np.ndarray:
    """Uniforms in ``[0, 1)`` for slots ``start..stop-1``, shape ``(stop-start, 4)``.

    Column 0 drives Alice's count, column 1 Bob's re-emitted count.
    """
    if not 0 <= start <= stop:
        raise ValidationError(f"bad slot range [{start}, {stop})")
    gen = np.random.Philox(key=int(seed), counter=int(start))
    raw = gen.random_raw((stop - start) * _WORDS_PER_SLOT)
    return ((raw >> np.uint64(11)).astype(np.float64) * 2.0**-53).reshape(-1, _WORDS_PER_SLOT)


def sample_photon_number(dist: PhotonDistribution, draw: float) -> int:
    """Inverse-CDF sample: the smallest ``n`` with ``CDF(n) > draw``."""
    if not 0.0 <= draw < 1.0:
        raise DomainError(f"draw must lie in [0, 1), got {draw!r}")
    return int(sample_photon_numbers(dist.cdf, np.array([draw]))[0])


def sample_photon_numbers(cdf: np.ndarray, draws: np.ndarray) -> np.ndarray:
    idx = np.searchsorted(cdf, draws, side="right")
    # float round-off can leave cdf[-1] a hair below a draw near 1
    return np.minimum(idx, cdf.size - 1)


def compare_keys(
    letters_a: Sequence[int] | np.ndarray,
    letters_b: Sequence[int] | np.ndarray,
    m: int,
) -> tuple[float, float, float]:
    """Letter error rate, letter rate over ``log2 m``, and bitwise Hamming rate."""
    a = np.asarray(letters_a, dtype=np.int64)
    b = np.asarray(letters_b, dtype=np.int64)
    if m not in ALPHABET_SIZES:
        raise ValidationError(f"alphabet size must be one of {ALPHABET_SIZES}")
    if a.shape != b.shape or a.ndim != 1:
        raise ValidationError("letter sequences must be 1-D and of equal length")
    if a.size == 0:
        raise ValidationError("letter sequences must be non-empty")
    if np.any((a < 0) | (a >= m) | (b < 0) | (b >= m)):
        raise ValidationError(f"letters must lie in 0..{m - 1}")
    bits = int(math.log2(m))
    letter_rate = float(np.count_nonzero(a != b)) / a.size
    flips = int(np.unpackbits((a ^ b).astype(np.uint8)[:, None], axis=1).sum())
    return letter_rate, letter_rate / bits, flips / (a.size * bits)


def empirical_stats(counts: Sequence[int] | np.ndarray) -> tuple[float, float]:
    """Sample mean and sample Mandel Q (unbiased variance) of photon counts."""
    x = np.asarray(counts, dtype=np.int64)
    if x.ndim != 1 or x.size < 2:
        raise ValidationError("need at least two counts")
    s1 = int(x.sum())
    s2 = int(np.dot(x, x))
    n = x.size
    if s1 <= 0:
        raise DomainError("Mandel Q is undefined at zero sample mean")
    mean = s1 / n
    var = (s2 * n - s1 * s1) / (n * (n - 1))
    return mean, (var - mean) / mean


class _SessionModel:
    """Per-session tables shared by every shard."""

    def __init__(self, config: SessionConfig) -> None:
        self.config = config
        state = TmccState(config.lam)
        self.alice_cdf = build_distribution(state).cdf
        self.spec: AlphabetSpec = alphabet_for_state(state, config.alphabet_size)
        self.resend_cdfs = None
        if config.attack is not None:
            matrix, _ = resend_matrix(self.alice_cdf.size - 1, config.attack, DEFAULT_SOLVER_TOL)
            self.resend_cdfs = np.cumsum(matrix, axis=1)

    def counts(self, start: int, stop: int) -> tuple[np.ndarray, np.ndarray]:
        u = slot_uniforms(self.config.seed, start, stop)
        n_alice = sample_photon_numbers(self.alice_cdf, u[:, 0])
        if self.resend_cdfs is None:
            return n_alice, n_alice.copy()
        n_bob = np.empty_like(n_alice)
        for n in np.unique(n_alice):
            hit = n_alice == n
            n_bob[hit] = sample_photon_numbers(self.resend_cdfs[n], u[hit, 1])
        return n_alice, n_bob


def simulate_slots(config: SessionConfig, start: int = 0, stop: int | None = None):
    """Per-slot records ``(n_alice, n_bob, letter_alice, letter_bob)`` as arrays."""
    stop = config.slots if stop is None else stop
    model = _SessionModel(config)
    n_a, n_b = model.counts(start, stop)
    return n_a, n_b, encode_letters(n_a, model.spec), encode_letters(n_b, model.spec)


def _tally(model: _SessionModel, start: int, stop: int) -> SessionTally:
    total = SessionTally(letter_counts=[0] * model.spec.size)
    for lo in range(start, stop, _CHUNK):
        hi = min(stop, lo + _CHUNK)
        n_a, n_b = model.counts(lo, hi)
        la = encode_letters(n_a, model.spec)
        lb = encode_letters(n_b, model.spec)
        diff = (la ^ lb).astype(np.uint8)
        total = total + SessionTally(
            slots=hi - lo,
            letter_errors=int(np.count_nonzero(diff)),
            bit_errors=int(np.unpackbits(diff[:, None], axis=1).sum()),
            sum_n=int(n_a.sum()),
            sum_n2=int(np.dot(n_a, n_a)),
            letter_counts=np.bincount(la, minlength=model.spec.size).tolist(),
        )
    return total


def run_shard(config: SessionConfig, start: int, stop: int) -> SessionTally:
    """Tally for slots ``start..stop-1`` of the session."""
    if not 0 <= start <= stop <= config.slots:
        raise ValidationError(f"shard [{start}, {stop}) outside 0..{config.slots}")
    return _tally(_SessionModel(config), start, stop)


def run_session(config: SessionConfig, workers: int = 1) -> SessionResult:
    """Run every slot of ``config``; ``workers > 1`` splits slots across threads.

    The result does not depend on ``workers``.
    """
    if workers < 1:
        raise ValidationError("workers must be >= 1")
    model = _SessionModel(config)
    bounds = np.linspace(0, config.slots, min(workers, config.slots) + 1).astype(int)
    ranges = list(zip(bounds[:-1], bounds[1:]))
    if len(ranges) == 1:
        tallies = [_tally(model, 0, config.slots)]
    else:
        with ThreadPoolExecutor(max_workers=len(ranges)) as pool:
            tallies = list(pool.map(lambda r: _tally(model, int(r[0]), int(r[1])), ranges))
    total = SessionTally(letter_counts=[0] * model.spec.size)
    for t in tallies:
        total = total + t
    return SessionResult.from_tally(total, config.alphabet_size)
