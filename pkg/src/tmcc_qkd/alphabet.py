"""Photon-count alphabets with 2, 4 and 8 letters.

Every alphabet is anchored on ``center``, the rounded mean photon number,
and is built from contiguous count regions::

    m = 2:  n <= c            | n >= c+1
    m = 4:  n <= c-1 | c | c+1 | n >= c+2
    m = 8:  n <= c-3 | c-2 | c-1 | c | c+1 | c+2 | c+3 | n >= c+4

Letter ``x`` carries the natural binary code of ``x``. With a shared center
the 8-letter regions refine the 4-letter ones, which refine the 2-letter ones.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError, ValidationError
from .photon_stats import (
    PhotonDistribution,
    TmccState,
    build_distribution,
    mean_photon_number,
    shannon_entropy,
)

__all__ = [
    "ALPHABET_SIZES",
    "EmptyLetterWarning",
    "AlphabetSpec",
    "Letter",
    "center_from_mean",
    "encode_letter",
    "encode_letters",
    "letter_pmf",
    "alphabet_for_state",
    "alphabet_entropy",
]

ALPHABET_SIZES = (2, 4, 8)


class EmptyLetterWarning(UserWarning):
    """Some letters of an alphabet cover no nonnegative photon count."""


def center_from_mean(mean: float) -> int:
    """Round a mean photon number to the nearest integer, halves going up."""
    if not math.isfinite(mean) or mean < 0:
        raise DomainError(f"mean must be a finite nonnegative number, got {mean!r}")
    return int(math.floor(mean + 0.5))


@dataclass(frozen=True)
class Letter:
    index: int
    bits: str


@dataclass(frozen=True)
class AlphabetSpec:
    size: int
    center: int

    def __post_init__(self) -> None:
        if self.size not in ALPHABET_SIZES:
            raise ValidationError(f"alphabet size must be one of {ALPHABET_SIZES}, got {self.size!r}")
        if self.center < 0:
            raise ValidationError(f"center must be nonnegative, got {self.center!r}")
        empty = self.empty_letters()
        if empty:
            warnings.warn(
                f"{self.size}-letter alphabet centered at {self.center} has empty letters {empty}",
                EmptyLetterWarning,
                stacklevel=3,
            )

    @property
    def bits_per_letter(self) -> int:
        return int(math.log2(self.size))

    @property
    def _offset(self) -> int:
        # photon count that lands on letter 0's upper edge is center - offset
        return self.size // 2 - 1

    def region(self, index: int) -> tuple[int, float]:
        """Inclusive photon-count bounds ``(lo, hi)`` of a letter; ``hi`` may be ``inf``.

        ``lo`` is clipped at zero, so an empty letter has ``hi < lo``.
        """
        if not 0 <= index < self.size:
            raise ValidationError(f"letter index {index} outside 0..{self.size - 1}")
        edge = self.center - self._offset  # first count mapped past letter 0
        lo = 0 if index == 0 else edge + index
        hi = math.inf if index == self.size - 1 else edge + index
        return max(lo, 0), hi

    def empty_letters(self) -> tuple[int, ...]:
        return tuple(x for x in range(self.size) if self.region(x)[1] < 0)

    def letter(self, index: int) -> Letter:
        return Letter(index, format(index, f"0{self.bits_per_letter}b"))


def encode_letters(counts: np.ndarray, spec: AlphabetSpec) -> np.ndarray:
    """Vectorized letter indices for an array of photon counts."""
    counts = np.asarray(counts, dtype=np.int64)
    return np.clip(counts - spec.center + spec._offset, 0, spec.size - 1)


def encode_letter(n: int, spec: AlphabetSpec) -> Letter:
    """Map one photon count to its letter.

    Examples
    --------
    >>> encode_letter(6, AlphabetSpec(4, 4)).bits
    '11'
    >>> encode_letter(5, AlphabetSpec(8, 5)).bits
    '011'
    """
    if n < 0:
        raise DomainError(f"photon count must be nonnegative, got {n!r}")
    return spec.letter(int(encode_letters(np.array([n]), spec)[0]))


def letter_pmf(dist: PhotonDistribution, spec: AlphabetSpec) -> np.ndarray:
    """Probability of each letter: the PMF summed over each letter's region."""
    out = np.zeros(spec.size)
    np.add.at(out, encode_letters(dist.support, spec), dist.probs)
    return out


def alphabet_for_state(state: TmccState, m: int) -> AlphabetSpec:
    return AlphabetSpec(m, center_from_mean(mean_photon_number(state)))


def alphabet_entropy(state: TmccState, m: int) -> float:
    """Information per measurement, in bits, for an ``m``-letter alphabet."""
    spec = alphabet_for_state(state, m)
    return shannon_entropy(letter_pmf(build_distribution(state), spec))
