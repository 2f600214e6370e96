"""Multi-index bookkeeping for the twisted-Laplacian eigenbasis.

A basis mode is labelled by a pair of multi-indices (mu, nu); the
eigenvalue of the mode depends only on |nu| and the dimension.
Truncations enumerate all pairs up to a degree cap in a fixed
graded-lexicographic order so that matrix layouts are reproducible.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product


@dataclass(frozen=True)
class MultiIndex:
    """An element of N_0^n."""

    entries: tuple[int, ...]

    def __post_init__(self):
        if len(self.entries) == 0:
            raise ValueError("multi-index must have at least one entry")
        if any((not isinstance(e, int)) or e < 0 for e in self.entries):
            raise ValueError(f"multi-index entries must be non-negative ints, got {self.entries}")

    @property
    def n(self) -> int:
        return len(self.entries)

    @property
    def degree(self) -> int:
        return sum(self.entries)


@dataclass(frozen=True)
class MultiIndexPair:
    """Label (mu, nu) of a twisted-Laplacian eigenmode; eigenvalue 2|nu| + n."""

    mu: MultiIndex
    nu: MultiIndex

    def __post_init__(self):
        if self.mu.n != self.nu.n:
            raise ValueError(f"dimension mismatch: {self.mu.n} vs {self.nu.n}")

    @property
    def n(self) -> int:
        return self.mu.n

    def eigenvalue(self) -> int:
        return 2 * self.nu.degree + self.n


def multi_indices(n: int, k_max: int) -> list[MultiIndex]:
    """All multi-indices of length ``n`` and degree <= ``k_max``, graded-lex ordered."""
    if n < 1 or k_max < 0:
        raise ValueError("need n >= 1 and k_max >= 0")
    out = []
    for deg in range(k_max + 1):
        for combo in product(range(deg + 1), repeat=n):
            if sum(combo) == deg:
                out.append(MultiIndex(combo))
    return out


@dataclass(frozen=True)
class Truncation:
    """Finite index set of modes with |mu|, |nu| <= k_max, in deterministic order."""

    n: int
    k_max: int
    index_set: tuple[MultiIndexPair, ...]

    def __len__(self) -> int:
        return len(self.index_set)

    def position(self, pair: MultiIndexPair) -> int:
        return self.index_set.index(pair)

    def eigenvalues(self) -> list[int]:
        return [p.eigenvalue() for p in self.index_set]


def enumerate_pairs(n: int, k_max: int) -> Truncation:
    """Truncation holding every pair (mu, nu) with |mu|, |nu| <= k_max.

    Ordering is graded-lexicographic in mu, then in nu, so the layout of
    coefficient vectors and Gram matrices is reproducible across runs.
    """
    singles = multi_indices(n, k_max)
    pairs = tuple(MultiIndexPair(mu, nu) for mu in singles for nu in singles)
    return Truncation(n=n, k_max=k_max, index_set=pairs)
