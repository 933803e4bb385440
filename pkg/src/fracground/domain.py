"""Symbolic geometry for bounded domains in R^N, N in {1, 2}.

Domains are open sets described by closed-form variants (ball, annulus,
box, set difference).  Everything downstream only needs membership tests,
exact boundary distances, bounding boxes and boundary normals, so those
are the operations each variant implements in closed form.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import NotOnBoundary, UnsupportedBoundary, UnsupportedDomain


def _as_point(x) -> np.ndarray:
    a = np.atleast_1d(np.asarray(x, dtype=float))
    if a.ndim != 1 or a.size not in (1, 2):
        raise ValueError(f"points must be 1D or 2D, got shape {a.shape}")
    return a


@dataclass(frozen=True)
class Ball:
    """Open ball {x : |x - center| < r}."""

    center: tuple
    r: float

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in np.atleast_1d(self.center)))
        if not self.r > 0:
            raise ValueError("ball radius must be positive")

    @property
    def dim(self):
        return len(self.center)

    def contains(self, x) -> bool:
        x = _as_point(x)
        return float(np.linalg.norm(x - self.center)) < self.r

    def bounding_box(self):
        c = np.asarray(self.center)
        return c - self.r, c + self.r

    def boundary_distance(self, x) -> float:
        x = _as_point(x)
        d = self.r - float(np.linalg.norm(x - self.center))
        return max(d, 0.0)

    def exterior_distance(self, x) -> float:
        x = _as_point(x)
        return max(float(np.linalg.norm(x - self.center)) - self.r, 0.0)

    def exterior_normal(self, x0, tol):
        x0 = _as_point(x0)
        rho = float(np.linalg.norm(x0 - self.center))
        if abs(rho - self.r) > tol:
            raise NotOnBoundary(f"|x0 - center| = {rho}, boundary at {self.r}")
        if rho == 0.0:
            raise NotOnBoundary("x0 coincides with the center")
        return (x0 - self.center) / rho

    def translated(self, v):
        v = _as_point(v)
        return Ball(tuple(np.asarray(self.center) + v), self.r)

    def to_json(self):
        return {"type": "ball", "center": list(self.center), "r": self.r}


@dataclass(frozen=True)
class Annulus:
    """Open annulus {x : r1 < |x - center| < r2}."""

    center: tuple
    r1: float
    r2: float

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in np.atleast_1d(self.center)))
        if not (0 < self.r1 < self.r2):
            raise ValueError("annulus requires 0 < r1 < r2")

    @property
    def dim(self):
        return len(self.center)

    def contains(self, x) -> bool:
        x = _as_point(x)
        rho = float(np.linalg.norm(x - self.center))
        return self.r1 < rho < self.r2

    def bounding_box(self):
        c = np.asarray(self.center)
        return c - self.r2, c + self.r2

    def boundary_distance(self, x) -> float:
        x = _as_point(x)
        rho = float(np.linalg.norm(x - self.center))
        if not self.r1 < rho < self.r2:
            return 0.0
        return min(rho - self.r1, self.r2 - rho)

    def exterior_distance(self, x) -> float:
        x = _as_point(x)
        rho = float(np.linalg.norm(x - self.center))
        if rho < self.r1:
            return self.r1 - rho
        if rho > self.r2:
            return rho - self.r2
        return 0.0

    def exterior_normal(self, x0, tol):
        # Inner sphere: the exterior of the domain is the hole, so the
        # normal points toward the center.
        x0 = _as_point(x0)
        rho = float(np.linalg.norm(x0 - self.center))
        if abs(rho - self.r2) <= tol:
            return (x0 - self.center) / rho
        if abs(rho - self.r1) <= tol:
            return -(x0 - self.center) / rho
        raise NotOnBoundary(f"|x0 - center| = {rho}, boundaries at {self.r1}, {self.r2}")

    def translated(self, v):
        v = _as_point(v)
        return Annulus(tuple(np.asarray(self.center) + v), self.r1, self.r2)

    def to_json(self):
        return {"type": "annulus", "center": list(self.center), "r1": self.r1, "r2": self.r2}


@dataclass(frozen=True)
class Box:
    """Open axis-aligned box {x : lo < x < hi componentwise}."""

    lo: tuple
    hi: tuple

    def __post_init__(self):
        lo = tuple(float(c) for c in np.atleast_1d(self.lo))
        hi = tuple(float(c) for c in np.atleast_1d(self.hi))
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        if len(lo) != len(hi):
            raise ValueError("lo/hi dimension mismatch")
        if not all(a < b for a, b in zip(lo, hi)):
            raise ValueError("box requires lo < hi componentwise")

    @property
    def dim(self):
        return len(self.lo)

    def contains(self, x) -> bool:
        x = _as_point(x)
        return bool(np.all(x > self.lo) and np.all(x < self.hi))

    def bounding_box(self):
        return np.asarray(self.lo, dtype=float), np.asarray(self.hi, dtype=float)

    def boundary_distance(self, x) -> float:
        x = _as_point(x)
        if not self.contains(x):
            return 0.0
        return float(min(np.min(x - self.lo), np.min(np.asarray(self.hi) - x)))

    def exterior_distance(self, x) -> float:
        x = _as_point(x)
        gap = np.maximum(np.asarray(self.lo) - x, 0.0) + np.maximum(x - np.asarray(self.hi), 0.0)
        return float(np.linalg.norm(gap))

    def exterior_normal(self, x0, tol):
        x0 = _as_point(x0)
        lo = np.asarray(self.lo)
        hi = np.asarray(self.hi)
        on_lo = np.abs(x0 - lo) <= tol
        on_hi = np.abs(x0 - hi) <= tol
        inside = (x0 > lo - tol) & (x0 < hi + tol)
        if not np.all(inside):
            raise NotOnBoundary("point lies outside the box")
        n_faces = int(on_lo.sum() + on_hi.sum())
        if n_faces == 0:
            raise NotOnBoundary("point lies strictly inside the box")
        if n_faces > 1:
            raise UnsupportedBoundary("normal undefined at a box corner")
        nu = np.zeros_like(x0)
        if on_lo.any():
            nu[int(np.argmax(on_lo))] = -1.0
        else:
            nu[int(np.argmax(on_hi))] = 1.0
        return nu

    def translated(self, v):
        v = _as_point(v)
        return Box(tuple(np.asarray(self.lo) + v), tuple(np.asarray(self.hi) + v))

    def to_json(self):
        return {"type": "box", "lo": list(self.lo), "hi": list(self.hi)}


@dataclass(frozen=True)
class Difference:
    """Set difference outer \\ closure(inner)."""

    outer: "DomainSpec"
    inner: "DomainSpec"

    def __post_init__(self):
        if self.outer.dim != self.inner.dim:
            raise ValueError("outer/inner dimension mismatch")

    @property
    def dim(self):
        return self.outer.dim

    def contains(self, x) -> bool:
        x = _as_point(x)
        # The removed set is taken closed, so membership excludes its boundary.
        return self.outer.contains(x) and self.inner.exterior_distance(x) > 0.0

    def bounding_box(self):
        return self.outer.bounding_box()

    def boundary_distance(self, x) -> float:
        if not self.contains(x):
            return 0.0
        return min(self.outer.boundary_distance(x), self.inner.exterior_distance(x))

    def exterior_distance(self, x) -> float:
        raise UnsupportedDomain(
            "no closed-form exterior distance for a difference region; "
            "nest balls, boxes or annuli instead"
        )

    def exterior_normal(self, x0, tol):
        raise UnsupportedBoundary("normals on difference domains are not supported")

    def translated(self, v):
        return Difference(self.outer.translated(v), self.inner.translated(v))

    def to_json(self):
        return {"type": "difference", "outer": self.outer.to_json(), "inner": self.inner.to_json()}


DomainSpec = Union[Ball, Annulus, Box, Difference]


def domain_from_json(obj: dict) -> DomainSpec:
    """Rebuild a DomainSpec from its JSON dict form."""
    kind = obj.get("type")
    if kind == "ball":
        return Ball(tuple(obj["center"]), float(obj["r"]))
    if kind == "annulus":
        return Annulus(tuple(obj["center"]), float(obj["r1"]), float(obj["r2"]))
    if kind == "box":
        return Box(tuple(obj["lo"]), tuple(obj["hi"]))
    if kind == "difference":
        return Difference(domain_from_json(obj["outer"]), domain_from_json(obj["inner"]))
    raise ValueError(f"unknown domain type {kind!r}")


def distance_to_boundary(spec: DomainSpec, x) -> float:
    """Distance from x to the complement of the domain; 0 outside."""
    return spec.boundary_distance(x)


def diameter(spec: DomainSpec) -> float:
    lo, hi = spec.bounding_box()
    return float(np.linalg.norm(hi - lo))


def normal_probe(spec: DomainSpec, x0, depths, tol=1e-9):
    """Points x0 - xi*nu along the inward ray from a boundary point x0.

    nu is the exterior normal at x0 (closed form; box corners rejected).
    Returns a list of (point, is_interior) pairs, one per depth.
    """
    x0 = _as_point(x0)
    nu = spec.exterior_normal(x0, tol)
    diam = diameter(spec)
    out = []
    for xi in depths:
        xi = float(xi)
        if xi >= diam:
            raise ValueError(f"probe depth {xi} exceeds domain diameter {diam}")
        pt = x0 - xi * nu
        out.append((pt, spec.contains(pt)))
    return out
