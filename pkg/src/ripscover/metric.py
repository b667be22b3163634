"""Finite metric spaces, correspondences, distortion and Hausdorff distance.

Correspondences are stored as explicit pair sets; at the instance sizes
this artifact targets, distortion is then an exact max over pair squares.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .errors import CollisionError, EmptySet, PreconditionViolated, ScenarioError


@dataclass(frozen=True)
class FiniteMetric:
    """Symmetric nonnegative distance matrix with zero diagonal."""

    d: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.d, dtype=float)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise ScenarioError("distance matrix must be square")
        if np.any(d < 0) or np.any(np.diag(d) != 0) or not np.allclose(d, d.T):
            raise ScenarioError("not a metric: negativity/diagonal/symmetry")
        object.__setattr__(self, "d", d)
        n = len(d)
        if n <= 64:
            triples = combinations(range(n), 3)
        else:
            rng = np.random.default_rng(0)
            triples = (tuple(rng.choice(n, 3, replace=False)) for _ in range(5000))
        for i, j, k in triples:
            if d[i, j] > d[i, k] + d[k, j] + 1e-9:
                raise ScenarioError(f"triangle inequality fails on {(i, j, k)}")

    @classmethod
    def from_points(cls, points) -> "FiniteMetric":
        pts = np.asarray(points, dtype=float)
        diff = pts[:, None, :] - pts[None, :, :]
        return cls(d=np.linalg.norm(diff, axis=2))

    @property
    def n(self) -> int:
        return len(self.d)


@dataclass(frozen=True)
class Correspondence:
    """Finite relation between index ranges, optionally relative.

    ``pairs`` relates source indices to target indices and must cover both
    sides.  When ``relative`` is present as (A, B), the relation must map
    A into B and, transposed, B into A.
    """

    pairs: frozenset  # of (i, j)
    n_source: int
    n_target: int
    relative: tuple | None = None  # (frozenset A, frozenset B)

    def __post_init__(self):
        pairs = frozenset((int(i), int(j)) for i, j in self.pairs)
        object.__setattr__(self, "pairs", pairs)
        if self.relative is not None:
            a, b = self.relative
            object.__setattr__(self, "relative",
                               (frozenset(int(i) for i in a),
                                frozenset(int(j) for j in b)))
        src = {i for i, _ in pairs}
        tgt = {j for _, j in pairs}
        if src != set(range(self.n_source)) or tgt != set(range(self.n_target)):
            raise PreconditionViolated("pairs do not cover both index ranges")
        if self.relative is not None:
            a, b = self.relative
            if not self.image(a) <= b:
                raise PreconditionViolated("C(A) not contained in B")
            if not {i for i, j in pairs if j in b} <= a:
                raise PreconditionViolated("C^T(B) not contained in A")

    def image(self, subset) -> set:
        subset = set(subset)
        return {j for i, j in self.pairs if i in subset}

    def preimage(self, subset) -> set:
        subset = set(subset)
        return {i for i, j in self.pairs if j in subset}

    def to_dict(self) -> dict:
        rel = None
        if self.relative is not None:
            rel = {"A": sorted(self.relative[0]), "B": sorted(self.relative[1])}
        return {"pairs": sorted(self.pairs), "relative": rel}

    @classmethod
    def from_dict(cls, data: dict, n_source: int, n_target: int) -> "Correspondence":
        rel = data.get("relative")
        relative = (set(rel["A"]), set(rel["B"])) if rel else None
        return cls(pairs=frozenset(map(tuple, data["pairs"])),
                   n_source=n_source, n_target=n_target, relative=relative)

    def dumps(self) -> str:
        return json.dumps(self.to_dict())


def identity_correspondence(n: int, subset=None) -> Correspondence:
    rel = None
    if subset is not None:
        rel = (set(subset), set(subset))
    return Correspondence(pairs=frozenset((i, i) for i in range(n)),
                          n_source=n, n_target=n, relative=rel)


def distortion(c: Correspondence, d_x: FiniteMetric, d_y: FiniteMetric) -> float:
    """Max metric discrepancy over all pairs of related pairs."""
    pairs = np.array(sorted(c.pairs))
    dx = d_x.d[np.ix_(pairs[:, 0], pairs[:, 0])]
    dy = d_y.d[np.ix_(pairs[:, 1], pairs[:, 1])]
    return float(np.abs(dx - dy).max())


def transpose(c: Correspondence) -> Correspondence:
    rel = None
    if c.relative is not None:
        rel = (c.relative[1], c.relative[0])
    return Correspondence(pairs=frozenset((j, i) for i, j in c.pairs),
                          n_source=c.n_target, n_target=c.n_source,
                          relative=rel)


def compose(c: Correspondence, d: Correspondence) -> Correspondence:
    """Composition D o C : X => Z of C : X => Y and D : Y => Z."""
    if c.n_target != d.n_source:
        raise PreconditionViolated("incompatible index ranges for composition")
    by_mid: dict = {}
    for y, z in d.pairs:
        by_mid.setdefault(y, []).append(z)
    pairs = {(x, z) for x, y in c.pairs for z in by_mid.get(y, ())}
    rel = None
    if c.relative is not None and d.relative is not None:
        rel = (c.relative[0], d.relative[1])
    return Correspondence(pairs=frozenset(pairs), n_source=c.n_source,
                          n_target=d.n_target, relative=rel)


def graph_correspondence(f, n_source: int, subset) -> tuple:
    """Graph G(f) with the relative constraint (A, f(A)).

    ``f`` maps source indices to target indices over the image's own index
    range.  Accepts iff f is injective or f(A) and f(X - A) are disjoint;
    otherwise raises CollisionError with the witnessing pair.

    Returns (correspondence, image_index_of), where image_index_of maps the
    original target values to contiguous indices of f(X).
    """
    subset = set(subset)
    values = sorted({f(i) for i in range(n_source)})
    image_index = {v: k for k, v in enumerate(values)}
    fa = {f(i) for i in subset}
    fx_minus_a = {f(i) for i in range(n_source) if i not in subset}
    injective = len(values) == n_source
    if not injective and fa & fx_minus_a:
        v = next(iter(fa & fx_minus_a))
        inside = next(i for i in subset if f(i) == v)
        outside = next(i for i in range(n_source)
                       if i not in subset and f(i) == v)
        raise CollisionError(inside, outside)
    pairs = frozenset((i, image_index[f(i)]) for i in range(n_source))
    rel = (subset, {image_index[v] for v in fa})
    corr = Correspondence(pairs=pairs, n_source=n_source,
                          n_target=len(values), relative=rel)
    return corr, image_index


def hausdorff_distance(d: FiniteMetric, p, q) -> float:
    """Hausdorff distance between two index subsets of one finite metric."""
    p, q = sorted(set(p)), sorted(set(q))
    if not p or not q:
        raise EmptySet("Hausdorff distance needs nonempty sets")
    sub = d.d[np.ix_(p, q)]
    return float(max(sub.min(axis=1).max(), sub.min(axis=0).max()))


def gh_upper_bound(c: Correspondence, d_x: FiniteMetric, d_y: FiniteMetric) -> float:
    """One-sided Gromov-Hausdorff bound dis(C) / 2."""
    return distortion(c, d_x, d_y) / 2.0


def collar_correspondence(d: FiniteMetric, x1, x2, y1, y2, eps: float,
                          relative_block: int = 1) -> Correspondence:
    """Blockwise proximity correspondence between (X1 u X2) and (Y1 u Y2).

    All four sets are index subsets of one common finite metric.  Requires
    d_H(X_i, Y_i) <= eps/2 and disjointness within each side; pairs points
    at distance <= eps/2 inside each block.  The result is indexed over the
    concatenations X1+X2 and Y1+Y2 and carries the relative constraint for
    the requested block (1 or 2).
    """
    x1, x2 = sorted(set(x1)), sorted(set(x2))
    y1, y2 = sorted(set(y1)), sorted(set(y2))
    if set(x1) & set(x2) or set(y1) & set(y2):
        raise PreconditionViolated("X1, X2 (and Y1, Y2) must be disjoint")
    for xi, yi, tag in ((x1, y1, 1), (x2, y2, 2)):
        if hausdorff_distance(d, xi, yi) > eps / 2 + 1e-12:
            raise PreconditionViolated(f"d_H(X{tag}, Y{tag}) exceeds eps/2")
    xs = x1 + x2
    ys = y1 + y2
    x_pos = {v: k for k, v in enumerate(xs)}
    y_pos = {v: k for k, v in enumerate(ys)}
    pairs = set()
    for xi, yi in ((x1, y1), (x2, y2)):
        for u in xi:
            for v in yi:
                if d.d[u, v] <= eps / 2 + 1e-12:
                    pairs.add((x_pos[u], y_pos[v]))
    if relative_block == 1:
        rel = ({x_pos[v] for v in x1}, {y_pos[v] for v in y1})
    else:
        rel = ({x_pos[v] for v in x2}, {y_pos[v] for v in y2})
    return Correspondence(pairs=frozenset(pairs), n_source=len(xs),
                          n_target=len(ys), relative=rel)


def submetric(d: FiniteMetric, indices) -> FiniteMetric:
    idx = list(indices)
    return FiniteMetric(d=d.d[np.ix_(idx, idx)])
