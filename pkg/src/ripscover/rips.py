"""Filtered (relative) Rips complexes and eps-simpliciality checks.

Simplices are enumerated by incremental expansion over the neighbor graph
at the cutoff; the filtration value of a simplex is its diameter (max
pairwise distance), vertices sit at value 0.  Ties are broken by
(dimension, lexicographic vertices) so downstream reductions and barcodes
are reproducible.
"""
from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import CombinatorialBlowup
from .metric import Correspondence, FiniteMetric

DEFAULT_BUDGET = 5_000_000


class FilteredComplex:
    """Rips filtration truncated at a cutoff diameter and a max dimension.

    ``simplices[p]`` lists the p-simplices as sorted vertex tuples, ordered
    by (filtration value, lexicographic vertices); ``values[p]`` and
    ``fence[p]`` are aligned arrays.  A simplex is fence-flagged iff all
    its vertices lie in the designated subset.
    """

    def __init__(self, dist: np.ndarray, fence_vertices, max_dim: int,
                 cutoff: float, budget: int = DEFAULT_BUDGET):
        self.dist = dist
        self.n_vertices = len(dist)
        self.fence_vertices = frozenset(int(v) for v in fence_vertices)
        self.max_dim = max_dim
        self.cutoff = cutoff
        self.simplices: list[list[tuple]] = []
        self.values: list[np.ndarray] = []
        self.fence: list[np.ndarray] = []
        self._enumerate(budget)
        self.index = {}
        for p, simps in enumerate(self.simplices):
            for k, sv in enumerate(simps):
                self.index[sv] = (p, k)

    def _enumerate(self, budget: int):
        n = self.n_vertices
        d = self.dist
        cutoff = self.cutoff
        # Neighbor bitmasks over the cutoff graph.
        nbr = []
        for i in range(n):
            mask = 0
            for j in np.flatnonzero(d[i] <= cutoff):
                if j != i:
                    mask |= 1 << int(j)
            nbr.append(mask)

        total = n
        by_dim = [[((i,), 0.0) for i in range(n)]]
        frontier = by_dim[0]
        for p in range(1, self.max_dim + 1):
            nxt = []
            for verts, diam in frontier:
                last = verts[-1]
                # Candidates adjacent to every current vertex, above `last`.
                cand = nbr[verts[0]]
                for v in verts[1:]:
                    cand &= nbr[v]
                cand >>= last + 1
                base = last + 1
                while cand:
                    low = cand & -cand
                    j = base + low.bit_length() - 1
                    cand ^= low
                    nd = diam
                    for v in verts:
                        dv = d[v, j]
                        if dv > nd:
                            nd = dv
                    nxt.append((verts + (j,), nd))
            total += len(nxt)
            if total > budget:
                raise CombinatorialBlowup(
                    f"simplex budget {budget} exceeded at dimension {p}")
            by_dim.append(nxt)
            frontier = nxt

        fence = self.fence_vertices
        for p, simps in enumerate(by_dim):
            simps.sort(key=lambda sv: (sv[1], sv[0]))
            self.simplices.append([sv[0] for sv in simps])
            self.values.append(np.array([sv[1] for sv in simps]))
            self.fence.append(np.array(
                [all(v in fence for v in sv[0]) for sv in simps], dtype=bool))

    # -- queries ---------------------------------------------------------

    def num_simplices(self) -> int:
        return sum(len(s) for s in self.simplices)

    def value_of(self, verts) -> float:
        p, k = self.index[tuple(verts)]
        return float(self.values[p][k])

    def is_fence(self, verts) -> bool:
        p, k = self.index[tuple(verts)]
        return bool(self.fence[p][k])

    def slice_counts(self, a: float) -> list[int]:
        """Per-dimension simplex counts of the slice at parameter a.

        Negative parameters yield the vertex set only.
        """
        if a < 0:
            return [self.n_vertices] + [0] * self.max_dim
        return [int(bisect_right(vals, a)) for vals in self.values]

    def in_slice(self, verts, a: float) -> bool:
        key = tuple(verts)
        if key not in self.index:
            return False
        p, k = self.index[key]
        if a < 0:
            return p == 0
        return float(self.values[p][k]) <= a

    def slice(self, a: float) -> "SliceView":
        return SliceView(self, a)


@dataclass(frozen=True)
class SliceView:
    """Read-only view of the subcomplex at one filtration parameter."""

    complex: FilteredComplex
    a: float

    @property
    def counts(self) -> list[int]:
        return self.complex.slice_counts(self.a)

    def simplices(self, p: int) -> list[tuple]:
        return self.complex.simplices[p][:self.counts[p]]

    def __contains__(self, verts) -> bool:
        return self.complex.in_slice(verts, self.a)

    def num_simplices(self) -> int:
        return sum(self.counts)


def build_filtered_rips(d: FiniteMetric | np.ndarray, fence_vertices=(),
                        max_dim: int = 3, cutoff: float = np.inf,
                        budget: int = DEFAULT_BUDGET) -> FilteredComplex:
    """Rips filtration of a finite metric, with fence flags from a subset."""
    dist = d.d if isinstance(d, FiniteMetric) else np.asarray(d, dtype=float)
    if max_dim < 1:
        raise ValueError("max_dim must be at least 1")
    if not cutoff > 0:
        raise ValueError("cutoff must be positive")
    if np.isinf(cutoff):
        cutoff = float(dist.max()) + 1.0
    return FilteredComplex(dist, fence_vertices, max_dim, cutoff, budget)


def relative_basis(k: FilteredComplex, p: int) -> tuple[list, list]:
    """Basis of the relative chain group in degree p.

    Returns (non_fence, fence) simplex lists, each in filtration order; the
    non-fence list is the relative basis, the fence list is the complement
    needed for fence-first variable layouts.
    """
    non_fence = [sv for sv, fl in zip(k.simplices[p], k.fence[p]) if not fl]
    in_fence = [sv for sv, fl in zip(k.simplices[p], k.fence[p]) if fl]
    return non_fence, in_fence


@dataclass(frozen=True)
class SimplicialityFailure:
    simplex: tuple       # source simplex
    image_subset: tuple  # subset of C(sigma) that is not a simplex in time
    required_value: float
    relative: bool       # failure of the fence clause


def check_eps_simplicial(c: Correspondence, s: FilteredComplex,
                         t: FilteredComplex, eps: float):
    """Verify the eps-simplicial condition of C from S to T.

    For every simplex sigma of S at value a, every subset of C(sigma) of
    size <= T.max_dim + 1 must be a simplex of T at value <= a + eps; when
    C carries a relative constraint, fence simplices of S must land in
    fence simplices of T.  Returns None on success or the first failure.
    """
    images = {}
    for i, j in c.pairs:
        images.setdefault(i, set()).add(j)
    b_set = c.relative[1] if c.relative is not None else None

    for p in range(s.max_dim + 1):
        for sv, a, fl in zip(s.simplices[p], s.values[p], s.fence[p]):
            img = set()
            for v in sv:
                img |= images[v]
            img = sorted(img)
            limit = a + eps
            for size in range(1, min(len(img), t.max_dim + 1) + 1):
                for sub in combinations(img, size):
                    if not t.in_slice(sub, limit):
                        return SimplicialityFailure(sv, sub, limit, False)
                    if fl and b_set is not None and not t.is_fence(sub):
                        return SimplicialityFailure(sv, sub, limit, True)
    return None
