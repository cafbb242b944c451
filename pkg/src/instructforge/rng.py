"""Deterministic, platform-independent randomness for seeded sampling.

Everything that must replay byte-identically across runs and machines goes
through this 64-bit LCG rather than the stdlib ``random`` module, so outputs
cannot shift with interpreter versions or hidden reseeding.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1
# Knuth's MMIX constants.
_MULTIPLIER = 6364136223846793005
_INCREMENT = 1442695040888963407


class Lcg64:
    """64-bit linear congruential generator."""

    def __init__(self, seed: int) -> None:
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state * _MULTIPLIER + _INCREMENT) & _MASK64
        return self._state

    def below(self, bound: int) -> int:
        """Integer in [0, bound). Modulo bias is negligible at our bounds."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        return self.next_u64() % bound


def shuffle_in_place(items: list, rng: Lcg64) -> None:
    """Fisher-Yates shuffle driven by the supplied generator."""
    for i in range(len(items) - 1, 0, -1):
        j = rng.below(i + 1)
        items[i], items[j] = items[j], items[i]


def shuffled_indices(count: int, seed: int) -> list[int]:
    """Permutation of range(count); a pure function of (count, seed)."""
    indices = list(range(count))
    shuffle_in_place(indices, Lcg64(seed))
    return indices


def sample_indices(count: int, k: int, seed: int) -> list[int]:
    """k distinct indices from range(count), ascending; pure in (count, k, seed)."""
    if not 0 <= k <= count:
        raise ValueError(f"cannot sample {k} of {count}")
    return sorted(shuffled_indices(count, seed)[:k])
