"""Target domain, sensors, radii, perturbations, and assumption checks.

A scenario collects everything the coverage criteria consume: a convex
polygonal domain, sensor positions, the four radii (cover, strong/weak
communication, fence detection) and the perturbation budget epsilon.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import geometry
from .errors import EmptyRestrictedDomain, LengthMismatch, ScenarioError

SQRT2 = math.sqrt(2.0)
SQRT10 = math.sqrt(10.0)


@dataclass(frozen=True)
class Radii:
    r_c: float
    r_s: float
    r_w: float
    r_f: float

    def __post_init__(self):
        for name in ("r_c", "r_s", "r_w", "r_f"):
            if getattr(self, name) <= 0:
                raise ScenarioError(f"radius {name} must be positive")


@dataclass(frozen=True)
class Scenario:
    """Immutable description of one coverage problem instance."""

    domain: np.ndarray          # CCW convex polygon vertices, shape (k, 2)
    sensors: np.ndarray         # sensor positions, shape (n, 2)
    radii: Radii
    epsilon: float = 0.0
    dimension: int = 2

    def __post_init__(self):
        object.__setattr__(self, "domain", geometry.as_polygon(self.domain))
        sensors = np.asarray(self.sensors, dtype=float)
        if sensors.ndim != 2 or sensors.shape[1] != 2 or len(sensors) == 0:
            raise ScenarioError("sensors must be a nonempty (n, 2) array")
        object.__setattr__(self, "sensors", sensors)
        if self.dimension != 2:
            raise ScenarioError("only planar scenarios are supported")
        if self.epsilon < 0:
            raise ScenarioError("epsilon must be nonnegative")
        if not np.all(geometry.contains(self.domain, sensors)):
            bad = np.flatnonzero(~geometry.contains(self.domain, sensors))
            raise ScenarioError(f"sensors outside the domain: {bad.tolist()}")
        # Pairwise distinct positions.
        order = np.lexsort(sensors.T)
        dup = np.all(np.diff(sensors[order], axis=0) == 0, axis=1)
        if np.any(dup):
            raise ScenarioError("sensor positions must be pairwise distinct")

    @property
    def n_sensors(self) -> int:
        return len(self.sensors)

    @property
    def r_hat(self) -> float:
        return self.radii.r_f + self.radii.r_s / SQRT2

    def boundary_distances(self) -> np.ndarray:
        return geometry.boundary_distance(self.domain, self.sensors)

    def distance_matrix(self, positions=None) -> np.ndarray:
        pts = self.sensors if positions is None else np.asarray(positions, float)
        diff = pts[:, None, :] - pts[None, :, :]
        return np.linalg.norm(diff, axis=2)

    def to_dict(self) -> dict:
        return {
            "dimension": self.dimension,
            "domain": {"type": "polygon", "vertices": self.domain.tolist()},
            "radii": {"r_c": self.radii.r_c, "r_s": self.radii.r_s,
                      "r_w": self.radii.r_w, "r_f": self.radii.r_f},
            "epsilon": self.epsilon,
            "sensors": self.sensors.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Scenario":
        dom = data["domain"]
        if dom.get("type") != "polygon":
            raise ScenarioError(f"unsupported domain type {dom.get('type')!r}")
        r = data["radii"]
        return cls(domain=np.asarray(dom["vertices"], float),
                   sensors=np.asarray(data["sensors"], float),
                   radii=Radii(r["r_c"], r["r_s"], r["r_w"], r["r_f"]),
                   epsilon=float(data.get("epsilon", 0.0)),
                   dimension=int(data.get("dimension", 2)))

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1)

    @classmethod
    def load(cls, path) -> "Scenario":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass(frozen=True)
class Perturbation:
    """Perturbed sensor positions, aligned index-by-index with a scenario."""

    targets: np.ndarray

    def __post_init__(self):
        targets = np.asarray(self.targets, dtype=float)
        if targets.ndim != 2 or targets.shape[1] != 2:
            raise ScenarioError("targets must be an (n, 2) array")
        object.__setattr__(self, "targets", targets)

    def to_dict(self) -> dict:
        return {"targets": self.targets.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "Perturbation":
        return cls(targets=np.asarray(data["targets"], float))

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1)

    @classmethod
    def load(cls, path) -> "Perturbation":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass
class AssumptionReport:
    """Per-assumption verdicts with human-readable evidence."""

    entries: dict = field(default_factory=dict)  # name -> (status, evidence)

    def add(self, name: str, status: str, evidence: str):
        self.entries[name] = (status, evidence)

    def passed(self) -> bool:
        return all(status != "fail" for status, _ in self.entries.values())

    def failures(self) -> list:
        return [(name, ev) for name, (st, ev) in self.entries.items() if st == "fail"]

    def __str__(self):
        lines = [f"{name}: {status} ({evidence})"
                 for name, (status, evidence) in sorted(self.entries.items())]
        return "\n".join(lines)


def fence_sensors(s: Scenario) -> np.ndarray:
    """Indices of sensors within r_f of the domain boundary (closed)."""
    return np.flatnonzero(s.boundary_distances() <= s.radii.r_f)


def restricted_domain_mask(s: Scenario, grid_step: float):
    """Rasterize D minus the r-hat collar; returns (mask, xs, ys).

    mask[i, j] is True when the cell center (xs[j], ys[i]) lies strictly
    deeper than r-hat inside the domain.
    """
    lo = s.domain.min(axis=0)
    hi = s.domain.max(axis=0)
    xs = np.arange(lo[0] + grid_step / 2, hi[0], grid_step)
    ys = np.arange(lo[1] + grid_step / 2, hi[1], grid_step)
    if len(xs) == 0 or len(ys) == 0:
        raise EmptyRestrictedDomain("domain smaller than one grid cell")
    gx, gy = np.meshgrid(xs, ys)
    pts = np.column_stack([gx.ravel(), gy.ravel()])
    inside = geometry.contains(s.domain, pts)
    depth = geometry.boundary_distance(s.domain, pts)
    mask = (inside & (depth > s.r_hat)).reshape(len(ys), len(xs))
    return mask, xs, ys


def validate_assumptions(s: Scenario, grid_step: float) -> AssumptionReport:
    """Check assumptions A1-A6; A5 via rasterized 4-connectivity."""
    if grid_step > s.radii.r_s / 10:
        raise ScenarioError("grid_step must be at most r_s / 10")
    # Import here: the oracle module must stay import-free of homology, not
    # the other way around; connectivity lives with the other grid checks.
    from .oracle import connectivity_check

    rep = AssumptionReport()
    rep.add("A1", "by-construction", f"cover radius r_c = {s.radii.r_c}")
    rep.add("A2", "by-construction",
            f"communication radii r_s = {s.radii.r_s}, r_w = {s.radii.r_w}")

    r = s.radii
    lhs1, rhs1 = r.r_c, r.r_s / SQRT2
    lhs2, rhs2 = r.r_w, r.r_s * SQRT10
    if lhs1 >= rhs1 - 1e-12 and lhs2 >= rhs2 - 1e-12:
        rep.add("A3", "pass", f"r_c = {lhs1} >= {rhs1}, r_w = {lhs2} >= {rhs2}")
    else:
        rep.add("A3", "fail",
                f"need r_c >= r_s/sqrt(2) ({lhs1} vs {rhs1}) and "
                f"r_w >= r_s*sqrt(10) ({lhs2} vs {rhs2})")

    fence = fence_sensors(s)
    rep.add("A4", "pass", f"{len(fence)} fence sensors within r_f = {r.r_f}")

    try:
        mask, _, _ = restricted_domain_mask(s, grid_step)
        if not mask.any():
            raise EmptyRestrictedDomain(
                f"no cell deeper than r_hat = {s.r_hat:.6g} at step {grid_step}")
        if connectivity_check(mask):
            rep.add("A5", "pass",
                    f"restricted domain 4-connected on {int(mask.sum())} cells")
        else:
            rep.add("A5", "fail", "restricted domain rasterization disconnected")
    except EmptyRestrictedDomain as exc:
        rep.add("A5", "fail", str(exc))
        raise

    rep.add("A6", "by-construction",
            "convex polygon domain; fence hypersurface injectivity radii hold")
    return rep


def validate_perturbation(s: Scenario, p: Perturbation):
    """Check the three perturbation hypotheses.

    Returns (True, None) or (False, (index, clause)) for the first violation.
    Clauses: 'step' (moved more than eps/2), 'fence' (fence sensor left the
    collar), 'interior' (interior sensor entered the collar or left D).
    """
    if len(p.targets) != s.n_sensors:
        raise LengthMismatch(
            f"{len(p.targets)} targets for {s.n_sensors} sensors")
    steps = np.linalg.norm(p.targets - s.sensors, axis=1)
    fence = set(fence_sensors(s).tolist())
    inside = geometry.contains(s.domain, p.targets)
    depth = geometry.boundary_distance(s.domain, p.targets)
    tol = 1e-9
    for i in range(s.n_sensors):
        if steps[i] > s.epsilon / 2 + tol:
            return False, (i, "step")
        if i in fence:
            if not inside[i] or depth[i] > s.radii.r_f + tol:
                return False, (i, "fence")
        else:
            if not inside[i] or depth[i] <= s.radii.r_f - tol:
                return False, (i, "interior")
    return True, None


def generate_perturbation(s: Scenario, seed: int) -> Perturbation:
    """Random admissible perturbation; deterministic for a fixed seed.

    Sensors within r_f + eps/2 of the boundary stay fixed; every other
    sensor gets a uniform displacement in the closed disk of radius eps/2,
    resampled if it would exit the domain.
    """
    rng = np.random.default_rng(seed)
    targets = s.sensors.copy()
    if s.epsilon == 0:
        return Perturbation(targets=targets)
    depth = s.boundary_distances()
    movable = depth > s.radii.r_f + s.epsilon / 2
    for i in np.flatnonzero(movable):
        while True:
            step = rng.uniform(-s.epsilon / 2, s.epsilon / 2, size=2)
            if np.linalg.norm(step) > s.epsilon / 2:
                continue
            cand = s.sensors[i] + step
            if geometry.contains(s.domain, cand)[0]:
                targets[i] = cand
                break
    return Perturbation(targets=targets)
