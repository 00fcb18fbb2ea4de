"""Random and bundled data sets on every supported manifold."""

from __future__ import annotations

import numpy as np

from .errors import ValidationError
from .geometry import SPD, Euclidean, OPEN, PERIODIC, Polyline, Rotations3D, Sphere, canonical_quaternion
from .jacobi import eigh_jacobi, sym_function


def _quat_mul(a, b):
    aw, ax, ay, az = np.moveaxis(a, -1, 0)
    bw, bx, by, bz = np.moveaxis(b, -1, 0)
    return np.stack(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ],
        axis=-1,
    )


def exp_map(kind, base, v):
    """Exponential map at ``base`` applied to tangent vectors ``v`` (batched).

    Tangent vectors are ambient vectors orthogonal to ``base`` on a sphere,
    rotation vectors (axis times angle) on SO(3), and symmetric matrices on
    SPD, where the result is ``A^(1/2) expm(V) A^(1/2)``.
    """
    base = np.asarray(base, dtype=float)
    v = np.asarray(v, dtype=float)
    if isinstance(kind, Euclidean):
        return base + v
    if isinstance(kind, Sphere):
        norm = np.linalg.norm(v, axis=-1, keepdims=True)
        safe = np.where(norm == 0.0, 1.0, norm)
        out = np.cos(norm) * base + np.sin(norm) * v / safe
        return out / np.linalg.norm(out, axis=-1, keepdims=True)
    if isinstance(kind, Rotations3D):
        angle = np.linalg.norm(v, axis=-1, keepdims=True)
        safe = np.where(angle == 0.0, 1.0, angle)
        step = np.concatenate([np.cos(angle / 2.0), np.sin(angle / 2.0) * v / safe], axis=-1)
        out = _quat_mul(np.broadcast_to(base, step.shape), step)
        return canonical_quaternion(out / np.linalg.norm(out, axis=-1, keepdims=True))
    if isinstance(kind, SPD):
        w, u = eigh_jacobi(base)
        root = sym_function(w, u, np.sqrt(w))
        s = 0.5 * (v + np.swapaxes(v, -1, -2))
        ws, us = eigh_jacobi(s)
        out = root @ sym_function(ws, us, np.exp(ws)) @ root
        return 0.5 * (out + np.swapaxes(out, -1, -2))
    raise ValidationError(f"no exponential map for {kind.describe()}")


def random_point(kind, rng, shape=()):
    """Random points (unit vectors, rotations, or SPD matrices near the identity)."""
    shape = tuple(shape)
    if isinstance(kind, Euclidean):
        return rng.normal(size=shape + kind.point_shape)
    if isinstance(kind, (Sphere, Rotations3D)):
        x = rng.normal(size=shape + kind.point_shape)
        x /= np.linalg.norm(x, axis=-1, keepdims=True)
        return canonical_quaternion(x) if isinstance(kind, Rotations3D) else x
    if isinstance(kind, SPD):
        return exp_map(kind, np.broadcast_to(np.eye(kind.n), shape + kind.point_shape), random_tangent(kind, None, rng, shape, 1.0))
    raise ValidationError(f"cannot sample {kind.describe()}")


def random_tangent(kind, base, rng, shape, scale):
    """Random tangent vectors of typical length ``scale`` at ``base``."""
    shape = tuple(shape)
    if isinstance(kind, Euclidean):
        return scale * rng.normal(size=shape + kind.point_shape)
    if isinstance(kind, Sphere):
        v = rng.normal(size=shape + kind.point_shape)
        b = np.broadcast_to(base, v.shape)
        v -= np.sum(v * b, axis=-1, keepdims=True) * b
        return scale * v / np.sqrt(kind.ambient_dim - 1)
    if isinstance(kind, Rotations3D):
        return scale * rng.normal(size=shape + (3,)) / np.sqrt(3.0)
    if isinstance(kind, SPD):
        a = rng.normal(size=shape + kind.point_shape)
        return scale * 0.5 * (a + np.swapaxes(a, -1, -2)) / kind.n
    raise ValidationError(f"cannot sample {kind.describe()}")


def random_loop(kind, n, rng, radius=0.3, batch=()):
    """``n`` points scattered around one random base point, stacked as ``(n, *batch, *point)``.

    Every point lies within about ``radius`` (times a small constant) of the
    base, so adjacent points, including the wrap pair, stay well inside the
    injectivity radius.
    """
    batch = tuple(batch)
    base = random_point(kind, rng, batch)
    base = np.broadcast_to(base, (n,) + batch + kind.point_shape)
    v = random_tangent(kind, base, rng, (n,) + batch, radius)
    return exp_map(kind, base, v)


def random_walk(kind, n, rng, step=0.3, batch=()):
    """Random walk of ``n`` points whose steps have typical length ``step``."""
    batch = tuple(batch)
    pts = [random_point(kind, rng, batch)]
    for _ in range(n - 1):
        pts.append(exp_map(kind, pts[-1], random_tangent(kind, pts[-1], rng, batch, step)))
    return np.stack(pts)


def geodesic_samples(kind, a, b, ts):
    """Points ``M_t(a, b)`` for the parameters ``ts``."""
    ts = np.asarray(ts, dtype=float)
    a = np.broadcast_to(np.asarray(a, dtype=float), ts.shape + kind.point_shape)
    b = np.broadcast_to(np.asarray(b, dtype=float), ts.shape + kind.point_shape)
    return kind.geodesic(a, b, ts)


def _sphere_circle():
    phi = 2.0 * np.pi * np.arange(8) / 8
    pts = np.column_stack([np.cos(phi), np.sin(phi), np.zeros(8)])
    return Polyline(Sphere(3), pts, PERIODIC)


def _so3_path():
    kind = Rotations3D()
    axes = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 1.0, 0.0], [0.0, 1.0, 1.0]])
    axes /= np.linalg.norm(axes, axis=-1, keepdims=True)
    angles = np.array([0.0, 0.4, 0.8, 1.2, 1.6])[:, None]
    pts = np.concatenate([np.cos(angles / 2), np.sin(angles / 2) * axes], axis=-1)
    return Polyline(kind, pts, OPEN)


def _spd_path():
    kind = SPD(3)
    pts = []
    for k in range(5):
        t = k / 4.0
        c, s = np.cos(t), np.sin(t)
        rot = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
        pts.append(rot @ np.diag([1.0 + t, 1.0, 2.0 - t]) @ rot.T)
    return Polyline(kind, np.stack(pts), OPEN)


def _euclidean_square():
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    return Polyline(Euclidean(2), pts, PERIODIC)


DEMOS = {
    "sphere-circle": _sphere_circle,
    "so3-path": _so3_path,
    "spd-path": _spd_path,
    "euclidean-square": _euclidean_square,
}


def demo(name):
    """One of the bundled data sets: ``sphere-circle``, ``so3-path``, ``spd-path``, ``euclidean-square``."""
    try:
        return DEMOS[name]()
    except KeyError:
        raise ValidationError(f"unknown demo {name!r}; choose from {', '.join(sorted(DEMOS))}") from None
