"""Shape descriptions for input domains and their polygonal discretizations.

Every shape can be written to and read from a plain JSON object
``{"kind": ..., <parameters>}``; unions nest their members under ``"members"``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import ClassVar, Optional, Union

import numpy as np

from . import geometry as geo
from .errors import DegenerateShapeError, PreconditionError, ShapeFileError

DEFAULT_SEGMENTS = 256


def _positive(name: str, value) -> float:
    try:
        v = float(value)
    except (TypeError, ValueError):
        raise ShapeFileError(f"{name} must be a number, got {value!r}") from None
    if not (v > 0 and math.isfinite(v)):
        raise ShapeFileError(f"{name} must be positive and finite, got {value!r}")
    return v


def _pair(name: str, value) -> tuple:
    try:
        x, y = (float(c) for c in value)
    except (TypeError, ValueError):
        raise ShapeFileError(f"{name} must be a pair of numbers, got {value!r}") from None
    if not (math.isfinite(x) and math.isfinite(y)):
        raise ShapeFileError(f"{name} must be finite")
    return (x, y)


@dataclass(frozen=True)
class Disk:
    R: float
    center: tuple = (0.0, 0.0)
    kind: ClassVar[str] = "disk"
    bounded: ClassVar[bool] = True

    def __post_init__(self):
        object.__setattr__(self, "R", _positive("R", self.R))
        object.__setattr__(self, "center", _pair("center", self.center))

    def area(self) -> float:
        return math.pi * self.R**2

    def perimeter(self) -> float:
        return 2.0 * math.pi * self.R

    def polygon(self, segments: int = DEFAULT_SEGMENTS) -> geo.ConvexPolygon:
        return geo.regular_polygon(segments, self.R, self.center)

    def outer_polygon(self, segments: int = 64) -> geo.ConvexPolygon:
        return geo.regular_polygon(segments, self.R / math.cos(math.pi / segments), self.center)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "R": self.R, "center": list(self.center)}


@dataclass(frozen=True)
class PolygonShape:
    vertices: tuple
    kind: ClassVar[str] = "polygon"
    bounded: ClassVar[bool] = True

    def __post_init__(self):
        try:
            verts = tuple(_pair("vertex", v) for v in self.vertices)
        except TypeError:
            raise ShapeFileError("vertices must be a list of [x, y] pairs") from None
        if len(verts) < 3:
            raise ShapeFileError("a polygon needs at least 3 vertices")
        object.__setattr__(self, "vertices", verts)
        arr = np.array(verts)
        if geo.signed_area_array(arr) < 0:
            arr = arr[::-1]  # accept clockwise input
        try:
            P = geo.ConvexPolygon(arr)
        except DegenerateShapeError as exc:
            raise ShapeFileError(f"degenerate polygon: {exc}") from None
        except PreconditionError:
            raise ShapeFileError("polygon vertices must describe a convex polygon in order") from None
        object.__setattr__(self, "_poly", P)

    def area(self) -> float:
        return geo.area(self._poly)

    def perimeter(self) -> float:
        return geo.perimeter(self._poly)

    def polygon(self, segments: int = DEFAULT_SEGMENTS) -> geo.ConvexPolygon:
        return self._poly

    def outer_polygon(self, segments: int = 64) -> geo.ConvexPolygon:
        return self._poly

    def to_dict(self) -> dict:
        return {"kind": self.kind, "vertices": [list(v) for v in self.vertices]}


@dataclass(frozen=True)
class Rectangle:
    """Axis-parallel rectangle ``[x0, x0 + w] x [y0, y0 + h]``."""

    w: float
    h: float
    origin: tuple = (0.0, 0.0)
    kind: ClassVar[str] = "rectangle"
    bounded: ClassVar[bool] = True

    def __post_init__(self):
        object.__setattr__(self, "w", _positive("w", self.w))
        object.__setattr__(self, "h", _positive("h", self.h))
        object.__setattr__(self, "origin", _pair("origin", self.origin))

    def area(self) -> float:
        return self.w * self.h

    def perimeter(self) -> float:
        return 2.0 * (self.w + self.h)

    def polygon(self, segments: int = DEFAULT_SEGMENTS) -> geo.ConvexPolygon:
        x0, y0 = self.origin
        return geo.rectangle(x0, y0, x0 + self.w, y0 + self.h)

    outer_polygon = polygon

    def to_dict(self) -> dict:
        return {"kind": self.kind, "w": self.w, "h": self.h, "origin": list(self.origin)}


@dataclass(frozen=True)
class Stadium:
    """Convex hull of two radius-``r`` disks whose centers are ``d`` apart (along x)."""

    r: float
    d: float
    center: tuple = (0.0, 0.0)
    kind: ClassVar[str] = "stadium"
    bounded: ClassVar[bool] = True

    def __post_init__(self):
        object.__setattr__(self, "r", _positive("r", self.r))
        d = float(self.d)
        if not (d >= 0 and math.isfinite(d)):
            raise ShapeFileError("d must be nonnegative and finite")
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "center", _pair("center", self.center))

    def area(self) -> float:
        return math.pi * self.r**2 + 2.0 * self.r * self.d

    def perimeter(self) -> float:
        return 2.0 * math.pi * self.r + 2.0 * self.d

    def _hull(self, radius: float, segments: int) -> geo.ConvexPolygon:
        cx, cy = self.center
        ang = 2.0 * math.pi * np.arange(segments) / segments
        circle = radius * np.column_stack([np.cos(ang), np.sin(ang)])
        left = circle + [cx - self.d / 2.0, cy]
        right = circle + [cx + self.d / 2.0, cy]
        return geo.convex_hull(np.vstack([left, right]))

    def polygon(self, segments: int = DEFAULT_SEGMENTS) -> geo.ConvexPolygon:
        return self._hull(self.r, segments)

    def outer_polygon(self, segments: int = 64) -> geo.ConvexPolygon:
        return self._hull(self.r / math.cos(math.pi / segments), segments)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "r": self.r, "d": self.d, "center": list(self.center)}


def agm(a: float, b: float) -> float:
    while abs(a - b) > 1e-15 * max(a, b):
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    return a


def ellipse_perimeter(a: float, b: float) -> float:
    """Perimeter ``4 a E(e)`` of an ellipse, ``E`` evaluated with the AGM and its c_n series."""
    if a < b:
        a, b = b, a
    x, y = a, b
    c2_sum = 0.5 * (a * a - b * b)
    power = 1.0
    while True:
        c = 0.5 * (x - y)
        x, y = 0.5 * (x + y), math.sqrt(x * y)
        power *= 2.0
        c2_sum += 0.5 * power * c * c
        # x and y can settle one ulp apart, so stop at ulp scale rather than a fixed ratio
        if abs(c) <= 2.0 * math.ulp(x):
            break
    # K(e) = pi / (2 a M) ; E = K (1 - sum 2^(n-1) c_n^2 / a^2)
    return 2.0 * math.pi / x * (a * a - c2_sum)


@dataclass(frozen=True)
class Ellipse:
    a: float
    b: float
    center: tuple = (0.0, 0.0)
    kind: ClassVar[str] = "ellipse"
    bounded: ClassVar[bool] = True

    def __post_init__(self):
        object.__setattr__(self, "a", _positive("a", self.a))
        object.__setattr__(self, "b", _positive("b", self.b))
        object.__setattr__(self, "center", _pair("center", self.center))

    def area(self) -> float:
        return math.pi * self.a * self.b

    def perimeter(self) -> float:
        return ellipse_perimeter(self.a, self.b)

    def _poly(self, scale: float, segments: int) -> geo.ConvexPolygon:
        ang = 2.0 * math.pi * np.arange(segments) / segments
        pts = scale * np.column_stack([self.a * np.cos(ang), self.b * np.sin(ang)])
        return geo.ConvexPolygon(pts + np.asarray(self.center))

    def polygon(self, segments: int = DEFAULT_SEGMENTS) -> geo.ConvexPolygon:
        return self._poly(1.0, segments)

    def outer_polygon(self, segments: int = 64) -> geo.ConvexPolygon:
        return self._poly(1.0 / math.cos(math.pi / segments), segments)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "a": self.a, "b": self.b, "center": list(self.center)}


@dataclass(frozen=True)
class HalfStrip:
    """``(0, length) x (-halfwidth, halfwidth)``; ``length`` may be ``inf``."""

    halfwidth: float
    length: float = math.inf
    kind: ClassVar[str] = "halfstrip"

    def __post_init__(self):
        object.__setattr__(self, "halfwidth", _positive("halfwidth", self.halfwidth))
        length = float(self.length)
        if not length > 0:
            raise ShapeFileError("length must be positive (or infinite)")
        object.__setattr__(self, "length", length)

    @property
    def bounded(self) -> bool:
        return math.isfinite(self.length)

    def truncated(self, L: float) -> Rectangle:
        return Rectangle(L, 2.0 * self.halfwidth, (0.0, -self.halfwidth))

    def area(self) -> float:
        return 2.0 * self.halfwidth * self.length

    def polygon(self, segments: int = DEFAULT_SEGMENTS) -> geo.ConvexPolygon:
        if not self.bounded:
            raise PreconditionError("an infinite half-strip has no polygonal discretization; truncate it")
        return self.truncated(self.length).polygon()

    outer_polygon = polygon

    def to_dict(self) -> dict:
        length = self.length if self.bounded else "inf"
        return {"kind": self.kind, "halfwidth": self.halfwidth, "length": length}


PROFILES = ("log",)


@dataclass(frozen=True)
class Epigraph:
    """``{x1 > f(x2), |x2| < halfwidth}`` with ``f(s) = log(1 / (1 - (s/halfwidth)^2))``.

    The profile blows up at both ends, so the set has inradius ``halfwidth``
    but contains no disk of that radius.
    """

    halfwidth: float
    profile: str = "log"
    kind: ClassVar[str] = "epigraph"
    bounded: ClassVar[bool] = False

    def __post_init__(self):
        object.__setattr__(self, "halfwidth", _positive("halfwidth", self.halfwidth))
        if self.profile not in PROFILES:
            raise ShapeFileError(f"unknown epigraph profile {self.profile!r}; known: {PROFILES}")

    def f(self, s):
        s = np.asarray(s, dtype=float) / self.halfwidth
        with np.errstate(divide="ignore"):
            return np.where(np.abs(s) < 1, -np.log1p(-(s**2)), np.inf)

    def contains(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return pts[:, 0] > self.f(pts[:, 1])

    def to_dict(self) -> dict:
        return {"kind": self.kind, "halfwidth": self.halfwidth, "profile": self.profile}


def _separated(P: geo.ConvexPolygon, Q: geo.ConvexPolygon) -> bool:
    """Separating-axis test with a strict gap."""
    for poly in (P, Q):
        A, _ = poly.halfplanes()
        for a in A:
            p = P.vertices @ a
            q = Q.vertices @ a
            if p.max() < q.min() or q.max() < p.min():
                return True
    return False


def members_disjoint(a, b) -> bool:
    if isinstance(a, Disk) and isinstance(b, Disk):
        return math.dist(a.center, b.center) > a.R + b.R
    return _separated(a.outer_polygon(), b.outer_polygon())


@dataclass(frozen=True)
class UnionShape:
    members: tuple
    kind: ClassVar[str] = "union"
    bounded: ClassVar[bool] = True

    def __post_init__(self):
        members = tuple(self.members)
        if len(members) < 1:
            raise ShapeFileError("a union needs at least one member")
        for m in members:
            if isinstance(m, UnionShape) or not m.bounded:
                raise ShapeFileError("union members must be bounded convex shapes")
        for i in range(len(members)):
            for j in range(i + 1, len(members)):
                if not members_disjoint(members[i], members[j]):
                    raise PreconditionError(f"union members {i} and {j} are not certifiably disjoint")
        object.__setattr__(self, "members", members)

    def area(self) -> float:
        return sum(m.area() for m in self.members)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "members": [m.to_dict() for m in self.members]}


ShapeSpec = Union[Disk, PolygonShape, Rectangle, Stadium, Ellipse, HalfStrip, Epigraph, UnionShape]


def parse_shape(obj: dict) -> ShapeSpec:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ShapeFileError("a shape must be a JSON object with a 'kind' field")
    kind = obj["kind"]
    params = {k: v for k, v in obj.items() if k != "kind"}
    try:
        if kind == "disk":
            return Disk(params.pop("R"), tuple(params.pop("center", (0.0, 0.0))), **params)
        if kind == "polygon":
            return PolygonShape(tuple(map(tuple, params.pop("vertices"))), **params)
        if kind == "rectangle":
            return Rectangle(params.pop("w"), params.pop("h"), tuple(params.pop("origin", (0.0, 0.0))), **params)
        if kind == "stadium":
            return Stadium(params.pop("r"), params.pop("d"), tuple(params.pop("center", (0.0, 0.0))), **params)
        if kind == "ellipse":
            return Ellipse(params.pop("a"), params.pop("b"), tuple(params.pop("center", (0.0, 0.0))), **params)
        if kind == "halfstrip":
            length = params.pop("length", math.inf)
            length = math.inf if length in ("inf", "infinite", None) else length
            return HalfStrip(params.pop("halfwidth"), length, **params)
        if kind == "epigraph":
            return Epigraph(params.pop("halfwidth"), params.pop("profile", "log"), **params)
        if kind == "union":
            return UnionShape(tuple(parse_shape(m) for m in params.pop("members")), **params)
    except KeyError as exc:
        raise ShapeFileError(f"shape of kind {kind!r} is missing field {exc.args[0]!r}") from None
    except TypeError as exc:
        raise ShapeFileError(f"bad parameters for shape of kind {kind!r}: {exc}") from None
    raise ShapeFileError(f"unknown shape kind {kind!r}")


def load_shape(path) -> ShapeSpec:
    try:
        with open(Path(path)) as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ShapeFileError(f"{path}: invalid JSON ({exc})") from None
    return parse_shape(obj)


def summary(shape: ShapeSpec) -> str:
    d = shape.to_dict()
    if shape.kind == "union":
        return "union(" + ", ".join(summary(m) for m in shape.members) + ")"
    if shape.kind == "polygon":
        return f"polygon[{len(shape.vertices)}]"
    params = ",".join(f"{k}={v:g}" if isinstance(v, float) else f"{k}={v}" for k, v in d.items() if k not in ("kind", "center", "origin"))
    return f"{shape.kind}({params})"
