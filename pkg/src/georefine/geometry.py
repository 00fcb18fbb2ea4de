"""Geodesic metric spaces with closed-form distances and weighted averages.

Every manifold works on stacked numpy arrays: the trailing axes hold one
point (``point_shape``) and all leading axes are batch axes, so a whole
refinement round is a single call. ``ManifoldPoint`` and ``Polyline`` are thin
immutable wrappers used by the public single-point API.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import ClassVar

import numpy as np

from .errors import GeodesicDomainError, KindMismatchError, NumericError, ValidationError
from .jacobi import eigh_jacobi, sym_function

TAU_UNIT = 1e-12
TAU_SYM = 1e-12
TAU_PD = 1e-12
TAU_ANTI = 1e-6
T_MAX = 1.0
SMALL_ANGLE = 1e-8
# constructor inputs this many tolerances away are repaired instead of rejected
REPAIR_FACTOR = 10.0

OPEN = "open"
PERIODIC = "periodic"
TOPOLOGIES = (OPEN, PERIODIC)


def check_window(t):
    """Raise unless every weight lies in ``[-T_MAX, 1 + T_MAX]``."""
    t = np.asarray(t, dtype=float)
    bad = (t < -T_MAX - 1e-12) | (t > 1.0 + T_MAX + 1e-12) | ~np.isfinite(t)
    if np.any(bad):
        worst = float(t[bad].flat[0]) if t.ndim else float(t)
        raise GeodesicDomainError(
            f"weight outside the extrapolation window [{-T_MAX:g}, {1 + T_MAX:g}]", t=worst
        )


def _first_bad(mask):
    idx = np.argwhere(np.atleast_1d(mask))
    return tuple(int(i) for i in idx[0]) if len(idx) else None


@dataclass(frozen=True)
class Manifold:
    """Base class; subclasses fix the point shape and the closed forms."""

    tag: ClassVar[str] = ""

    @property
    def point_shape(self):
        raise NotImplementedError

    @property
    def point_ndim(self):
        return len(self.point_shape)

    def batch_shape(self, x):
        return np.shape(x)[: np.ndim(x) - self.point_ndim]

    def check(self, x):
        """Validate (and lightly repair) stacked coordinates; returns a copy."""
        x = np.array(x, dtype=float)
        if x.shape[x.ndim - self.point_ndim:] != self.point_shape or x.ndim < self.point_ndim:
            raise ValidationError(
                f"{self.describe()} expects points of shape {self.point_shape}, got {x.shape}"
            )
        if not np.all(np.isfinite(x)):
            raise ValidationError("coordinates must be finite")
        return self._check(x)

    def _check(self, x):
        return x

    def dist(self, a, b):
        """Geodesic distance, batched over leading axes."""
        raise NotImplementedError

    def geodesic(self, a, b, t):
        """Weighted geodesic average ``M_t(a, b)``; ``t`` broadcasts over the batch."""
        check_window(t)
        t = np.broadcast_to(np.asarray(t, dtype=float), self.batch_shape(a))
        return self._geodesic(np.asarray(a, float), np.asarray(b, float), t)

    def admissible(self, a, b):
        """True where a unique geodesic joins ``a`` and ``b``."""
        return np.ones(self.batch_shape(np.asarray(a)), dtype=bool)

    def describe(self):
        return self.tag

    def to_json(self):
        return {"kind": self.tag}


@dataclass(frozen=True)
class Euclidean(Manifold):
    dim: int
    tag: ClassVar[str] = "euclidean"

    def __post_init__(self):
        if int(self.dim) < 1:
            raise ValidationError("Euclidean dimension must be positive")

    @property
    def point_shape(self):
        return (self.dim,)

    def dist(self, a, b):
        return np.linalg.norm(np.asarray(a, float) - np.asarray(b, float), axis=-1)

    def _geodesic(self, a, b, t):
        t = t[..., None]
        return (1.0 - t) * a + t * b

    def describe(self):
        return f"euclidean(dim={self.dim})"

    def to_json(self):
        return {"kind": self.tag, "dim": self.dim}


def _unit_angle(a, b):
    # angle between unit vectors; stable for tiny and near-pi angles
    return 2.0 * np.arctan2(np.linalg.norm(a - b, axis=-1), np.linalg.norm(a + b, axis=-1))


def _slerp(a, b, omega, t):
    # a, b unit vectors at angle omega; points at arc fraction t
    small = omega < SMALL_ANGLE
    safe = np.where(small, 1.0, omega)
    sin_w = np.sin(safe)
    ca = np.where(small, 1.0 - t, np.sin((1.0 - t) * safe) / sin_w)
    cb = np.where(small, t, np.sin(t * safe) / sin_w)
    out = ca[..., None] * a + cb[..., None] * b
    return out / np.linalg.norm(out, axis=-1, keepdims=True)


def _check_arc(theta, t, limit):
    reach = np.maximum(np.abs(t), np.abs(1.0 - t)) * theta
    bad = np.atleast_1d(reach >= limit)
    if np.any(bad):
        where = _first_bad(bad)
        tt = float(np.atleast_1d(np.broadcast_to(t, np.shape(reach)))[where])
        raise GeodesicDomainError(
            "geodesic extended past an antipodal point (or pair not admissible)",
            t=tt,
            index=where[0] if np.ndim(reach) else None,
        )


def _normalize_rows(x, what):
    norms = np.linalg.norm(x, axis=-1, keepdims=True)
    dev = np.abs(norms - 1.0)
    if np.any(dev > REPAIR_FACTOR * TAU_UNIT):
        raise ValidationError(
            f"{what} must have unit norm (deviation {float(np.max(dev)):.3e})"
        )
    return x / norms


@dataclass(frozen=True)
class Sphere(Manifold):
    ambient_dim: int
    tag: ClassVar[str] = "sphere"

    def __post_init__(self):
        if int(self.ambient_dim) < 2:
            raise ValidationError("sphere ambient dimension must be at least 2")

    @property
    def point_shape(self):
        return (self.ambient_dim,)

    @staticmethod
    def project(x):
        """Normalise arbitrary nonzero vectors onto the sphere."""
        x = np.asarray(x, dtype=float)
        return x / np.linalg.norm(x, axis=-1, keepdims=True)

    def _check(self, x):
        return _normalize_rows(x, "sphere points")

    def dist(self, a, b):
        return _unit_angle(np.asarray(a, float), np.asarray(b, float))

    def admissible(self, a, b):
        return self.dist(a, b) < np.pi - TAU_ANTI

    def _geodesic(self, a, b, t):
        theta = self.dist(a, b)
        _check_arc(theta, t, np.pi - TAU_ANTI)
        return _slerp(a, b, theta, t)

    def describe(self):
        return f"sphere(ambient_dim={self.ambient_dim})"

    def to_json(self):
        return {"kind": self.tag, "dim": self.ambient_dim}


def canonical_quaternion(q):
    """Flip signs so the first component with ``|q_i| > 1e-12`` is positive."""
    q = np.asarray(q, dtype=float)
    significant = np.abs(q) > 1e-12
    first = np.argmax(significant, axis=-1)
    lead = np.take_along_axis(q, first[..., None], axis=-1)
    return np.where(lead < 0.0, -q, q)


@dataclass(frozen=True)
class Rotations3D(Manifold):
    """SO(3) with unit quaternions ``[w, x, y, z]``; distance is the rotation angle."""

    tag: ClassVar[str] = "so3"

    @property
    def point_shape(self):
        return (4,)

    def _check(self, x):
        return canonical_quaternion(_normalize_rows(x, "quaternions"))

    @staticmethod
    def _align(a, b):
        sign = np.where(np.sum(a * b, axis=-1) < 0.0, -1.0, 1.0)
        return b * sign[..., None]

    def dist(self, a, b):
        a = np.asarray(a, float)
        b = self._align(a, np.asarray(b, float))
        return 2.0 * _unit_angle(a, b)

    def admissible(self, a, b):
        return self.dist(a, b) < np.pi - TAU_ANTI

    def _geodesic(self, a, b, t):
        b = self._align(a, b)
        half = _unit_angle(a, b)
        _check_arc(2.0 * half, t, np.pi - TAU_ANTI)
        return canonical_quaternion(_slerp(a, b, half, t))

    def describe(self):
        return "so3"


def _symmetrize(x):
    return 0.5 * (x + np.swapaxes(x, -1, -2))


@dataclass(frozen=True)
class SPD(Manifold):
    """Symmetric positive definite matrices with the affine-invariant metric."""

    n: int
    tag: ClassVar[str] = "spd"

    def __post_init__(self):
        if int(self.n) < 1:
            raise ValidationError("SPD matrix side must be at least 1")

    @property
    def point_shape(self):
        return (self.n, self.n)

    def _check(self, x):
        scale = np.maximum(1.0, np.max(np.abs(x), axis=(-1, -2)))
        asym = np.max(np.abs(x - np.swapaxes(x, -1, -2)), axis=(-1, -2)) / scale
        if np.any(asym > REPAIR_FACTOR * TAU_SYM):
            raise ValidationError(f"SPD matrices must be symmetric (asymmetry {float(np.max(asym)):.3e})")
        x = _symmetrize(x)
        w, _ = eigh_jacobi(x)
        if np.any(w[..., 0] <= TAU_PD):
            raise ValidationError(
                f"SPD matrices must have eigenvalues > {TAU_PD:g} (min {float(np.min(w[..., 0])):.3e})"
            )
        return x

    @staticmethod
    def _roots(a):
        w, v = eigh_jacobi(a)
        if np.any(w <= 0.0):
            raise NumericError("matrix lost positive definiteness during a geodesic computation")
        return sym_function(w, v, np.sqrt(w)), sym_function(w, v, 1.0 / np.sqrt(w))

    def _relative(self, a, b):
        sqrt_a, isqrt_a = self._roots(a)
        c = _symmetrize(isqrt_a @ b @ isqrt_a)
        mu, u = eigh_jacobi(c)
        if np.any(mu <= 0.0):
            raise NumericError("relative matrix is not positive definite")
        return sqrt_a, mu, u

    def dist(self, a, b):
        _, mu, _ = self._relative(np.asarray(a, float), np.asarray(b, float))
        return np.sqrt(np.sum(np.log(mu) ** 2, axis=-1))

    def _geodesic(self, a, b, t):
        sqrt_a, mu, u = self._relative(a, b)
        ct = sym_function(mu, u, mu ** t[..., None])
        return _symmetrize(sqrt_a @ ct @ sqrt_a)

    def describe(self):
        return f"spd(n={self.n})"

    def to_json(self):
        return {"kind": self.tag, "n": self.n}


def manifold_from_json(obj):
    """Inverse of ``Manifold.to_json``."""
    kind = obj.get("kind")
    try:
        if kind == Euclidean.tag:
            return Euclidean(int(obj["dim"]))
        if kind == Sphere.tag:
            return Sphere(int(obj["dim"]))
        if kind == Rotations3D.tag:
            return Rotations3D()
        if kind == SPD.tag:
            return SPD(int(obj["n"]))
    except KeyError as exc:
        raise ValidationError(f"manifold description missing field {exc}") from None
    raise ValidationError(f"unknown manifold kind {kind!r}")


def _readonly(x):
    x = np.array(x, dtype=float)
    x.flags.writeable = False
    return x


@dataclass(frozen=True, eq=False)
class ManifoldPoint:
    """A single validated point; coordinates are stored read-only."""

    kind: Manifold
    coords: np.ndarray

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=float)
        if coords.shape != self.kind.point_shape:
            raise ValidationError(
                f"{self.kind.describe()} expects a point of shape {self.kind.point_shape}, got {coords.shape}"
            )
        object.__setattr__(self, "coords", _readonly(self.kind.check(coords)))

    @classmethod
    def _trusted(cls, kind, coords):
        obj = object.__new__(cls)
        object.__setattr__(obj, "kind", kind)
        object.__setattr__(obj, "coords", _readonly(coords))
        return obj

    def __repr__(self):
        return f"ManifoldPoint({self.kind.describe()}, {self.coords.tolist()})"


def _same_kind(a, b):
    if a.kind != b.kind:
        raise KindMismatchError(f"cannot combine {a.kind.describe()} with {b.kind.describe()}")
    return a.kind


def distance(a, b):
    """Geodesic distance between two points of the same manifold."""
    kind = _same_kind(a, b)
    if not bool(kind.admissible(a.coords, b.coords)):
        raise GeodesicDomainError("points are (nearly) antipodal; the geodesic is not unique")
    return float(kind.dist(a.coords, b.coords))


def geodesic_point(a, b, t):
    """The point ``M_t(a, b)``; ``t`` outside [0, 1] extrapolates."""
    kind = _same_kind(a, b)
    if not bool(kind.admissible(a.coords, b.coords)):
        raise GeodesicDomainError("points are (nearly) antipodal; the geodesic is not unique", t=t)
    return ManifoldPoint._trusted(kind, kind.geodesic(a.coords, b.coords, float(t)))


def admissible(a, b):
    """Whether a unique geodesic supporting the extrapolation window joins ``a`` and ``b``."""
    kind = _same_kind(a, b)
    return bool(kind.admissible(a.coords, b.coords))


@dataclass(frozen=True, eq=False)
class Polyline:
    """An ordered sequence of points on one manifold, open or periodic."""

    kind: Manifold
    points: np.ndarray
    topology: str = PERIODIC

    def __post_init__(self):
        if self.topology not in TOPOLOGIES:
            raise ValidationError(f"topology must be one of {TOPOLOGIES}, got {self.topology!r}")
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 1 + self.kind.point_ndim:
            raise ValidationError(
                f"expected an array of {self.kind.describe()} points, got shape {pts.shape}"
            )
        if len(pts) < 2:
            raise ValidationError("a polyline needs at least 2 points")
        pts = self.kind.check(pts)
        a, b = adjacent_pairs(pts, self.topology)
        ok = self.kind.admissible(a, b)
        if not np.all(ok):
            i = int(np.argmin(ok))
            raise ValidationError(f"adjacent points {i} and {(i + 1) % len(pts)} are not admissible")
        object.__setattr__(self, "points", _readonly(pts))

    @classmethod
    def from_points(cls, points, topology=PERIODIC):
        points = list(points)
        if not points:
            raise ValidationError("a polyline needs at least 2 points")
        kind = points[0].kind
        for p in points[1:]:
            if p.kind != kind:
                raise KindMismatchError("all points of a polyline must share one manifold")
        return cls(kind, np.stack([p.coords for p in points]), topology)

    @classmethod
    def _trusted(cls, kind, points, topology):
        obj = object.__new__(cls)
        object.__setattr__(obj, "kind", kind)
        object.__setattr__(obj, "points", _readonly(points))
        object.__setattr__(obj, "topology", topology)
        return obj

    @property
    def periodic(self):
        return self.topology == PERIODIC

    def __len__(self):
        return len(self.points)

    def __getitem__(self, i):
        return ManifoldPoint._trusted(self.kind, self.points[i])

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    def __repr__(self):
        return f"Polyline({self.kind.describe()}, n={len(self)}, {self.topology})"


def adjacent_pairs(points, topology):
    """Arrays ``(a, b)`` of consecutive points, including the wrap pair if periodic."""
    if topology == PERIODIC:
        return points, np.roll(points, -1, axis=0)
    return points[:-1], points[1:]


def mesh_sizes(kind, points, topology):
    """Mesh size of a stacked sequence; extra axes after the first are batch axes."""
    a, b = adjacent_pairs(points, topology)
    return np.max(kind.dist(a, b), axis=0)


def mesh_size(p):
    """Largest distance between adjacent points of ``p``."""
    return float(mesh_sizes(p.kind, p.points, p.topology))


def sample_interpolant(p, samples_per_segment):
    """Insert equally spaced geodesic points inside every segment of ``p``."""
    n = int(samples_per_segment)
    if n < 1:
        raise ValidationError("samples_per_segment must be positive")
    a, b = adjacent_pairs(p.points, p.topology)
    pieces = [a[:, None]]
    for k in range(1, n + 1):
        pieces.append(p.kind.geodesic(a, b, k / (n + 1))[:, None])
    body = np.concatenate(pieces, axis=1).reshape((-1,) + p.kind.point_shape)
    if p.topology == OPEN:
        body = np.concatenate([body, p.points[-1:]], axis=0)
    return Polyline._trusted(p.kind, body, p.topology)
