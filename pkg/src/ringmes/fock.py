"""Single-species bosonic Fock bases for N particles on an L-site ring.

States are tuples of occupations ``(n_0, ..., n_{L-1})``. Site indices are
zero-based and taken modulo ``L`` so that site ``L`` is site ``0``.

The basis is ordered strictly lexicographically *descending*, e.g. for
``L=3, N=2``::

    (2,0,0) (1,1,0) (1,0,1) (0,2,0) (0,1,1) (0,0,2)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, Optional

import numpy as np

from .errors import DomainError

FockState = tuple[int, ...]

MIN_SITES = 3
MAX_SITES = 8
MAX_PARTICLES = 12


def _check_domain(L: int, N: int) -> None:
    if int(L) != L or int(N) != N:
        raise DomainError(f"L and N must be integers, got L={L!r}, N={N!r}")
    if L < MIN_SITES:
        raise DomainError(
            f"ring needs L >= {MIN_SITES} sites (got L={L}); for L=2 the wrap bond "
            "coincides with the direct bond and hopping would be double counted"
        )
    if N < 1:
        raise DomainError(f"need at least one particle per species (got N={N})")
    if L > MAX_SITES or N > MAX_PARTICLES:
        raise DomainError(
            f"(L={L}, N={N}) exceeds the supported size L <= {MAX_SITES}, N <= {MAX_PARTICLES}"
        )


def dimension(L: int, N: int) -> int:
    """Number of ways to put ``N`` bosons on ``L`` sites, binom(N+L-1, N)."""
    _check_domain(L, N)
    return math.comb(N + L - 1, N)


def _compositions(L: int, N: int) -> Iterator[FockState]:
    if L == 1:
        yield (N,)
        return
    for first in range(N, -1, -1):
        for rest in _compositions(L - 1, N - first):
            yield (first,) + rest


@dataclass(frozen=True)
class Basis:
    """Ordered enumeration of all Fock states of one species.

    ``states[i]`` is the i-th state; ``index(state)`` inverts it.
    ``occupations`` is the same data as a read-only ``(d, L)`` integer array.
    """

    L: int
    N: int
    states: tuple[FockState, ...]
    index_map: dict[FockState, int] = field(repr=False, compare=False)
    occupations: np.ndarray = field(repr=False, compare=False)

    @property
    def dim(self) -> int:
        return len(self.states)

    def __len__(self) -> int:
        return len(self.states)

    def __iter__(self) -> Iterator[FockState]:
        return iter(self.states)

    def __getitem__(self, i: int) -> FockState:
        return self.states[i]

    def index(self, state) -> int:
        try:
            return self.index_map[tuple(state)]
        except KeyError:
            raise KeyError(f"{tuple(state)} is not in the (L={self.L}, N={self.N}) basis") from None


@lru_cache(maxsize=32)
def enumerate_basis(L: int, N: int) -> Basis:
    """Build (and cache) the lexicographically descending basis for ``(L, N)``."""
    _check_domain(L, N)
    states = tuple(_compositions(int(L), int(N)))
    occ = np.array(states, dtype=np.int64).reshape(len(states), L)
    occ.setflags(write=False)
    return Basis(
        L=int(L),
        N=int(N),
        states=states,
        index_map={s: i for i, s in enumerate(states)},
        occupations=occ,
    )


def hop(state: FockState, src: int, dst: int) -> Optional[tuple[FockState, float]]:
    """Apply ``d_dst^dagger d_src`` to ``state``.

    Returns the new state and the bosonic amplitude
    ``sqrt(n_src) * sqrt(n_dst + 1)``, or ``None`` if site ``src`` is empty.
    """
    L = len(state)
    src %= L
    dst %= L
    if src == dst:
        raise DomainError("hop needs two distinct sites")
    n_src = state[src]
    if n_src == 0:
        return None
    n_dst = state[dst]
    new = list(state)
    new[src] -= 1
    new[dst] += 1
    return tuple(new), math.sqrt(n_src * (n_dst + 1))
