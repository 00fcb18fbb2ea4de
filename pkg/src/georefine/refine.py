"""Refinement of manifold polylines by repeated geodesic averaging.

One step doubles every point and then runs one averaging round per symbol
factor: a two-point round per real ``alpha`` and a three-pyramid round per
complex pair. On Euclidean data the step coincides with the linear scheme
``S(f)_j = sum_i a_{j-2i} f_i``.

Index convention
----------------
Rounds read their windows right to left, ``out_i = M_w(q_{i+1}, q_i)`` with
``w = alpha / (1 + alpha)``, so that each round applies the factor
``(1 + alpha z) / (1 + alpha)`` of the symbol itself. A round moves the
convolution index by one (two for a quadratic round); after ``m`` such shifts
and the symbol shift ``s`` the periodic output is rotated so that index ``j``
holds the linear scheme's value ``S_j``. Open sequences are never rotated:
output ``i`` corresponds to ``S_{i + offset}`` with ``offset = m - s``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GeodesicDomainError, RefinementError, ValidationError
from .geometry import OPEN, PERIODIC, TOPOLOGIES, T_MAX, Polyline, mesh_sizes
from .pyramid import optimal_params, pyramid_arrays
from .symbol import SymbolFactorization, factorize, order_factors

WINDOW_SLACK = 1e-12


def _in_window(t):
    return -T_MAX - WINDOW_SLACK <= t <= 1.0 + T_MAX + WINDOW_SLACK


def linear_weight(alpha):
    """Averaging weight ``alpha / (1 + alpha)`` of a real factor."""
    alpha = float(alpha)
    if alpha == -1.0:
        raise ValidationError("alpha = -1 has no averaging weight")
    return alpha / (1.0 + alpha)


@dataclass(frozen=True)
class RefinementPlan:
    """Ordered factorization, pyramid parameters per complex factor, boundary mode."""

    factorization: SymbolFactorization
    pyramids: tuple = ()
    boundary: str = PERIODIC

    def __post_init__(self):
        if self.boundary not in TOPOLOGIES:
            raise ValidationError(f"boundary must be one of {TOPOLOGIES}, got {self.boundary!r}")
        f = self.factorization
        if len(self.pyramids) != f.m2:
            raise ValidationError("one set of pyramid parameters is needed per quadratic factor")
        for a in f.real_alphas:
            w = linear_weight(a)
            if not _in_window(w):
                raise ValidationError(
                    f"real factor alpha={a:.17g} needs weight {w:.6g} outside the extrapolation window"
                )
        for a, prm in zip(f.quadratic_alphas, self.pyramids):
            if not prm.interpolating:
                raise ValidationError(f"pyramid for alpha={a} must use r in (0, 1), got {prm.r:.6g}")
            for name, t in (("t1", prm.t1), ("t2", prm.t2), ("r", prm.r)):
                if not _in_window(t):
                    raise ValidationError(
                        f"pyramid for alpha={a} needs {name}={t:.6g} outside the extrapolation window"
                    )

    @property
    def shift(self):
        return self.factorization.shift

    @property
    def rounds(self):
        return self.factorization.m1 + self.factorization.m2

    @property
    def offset(self):
        """Index offset ``m - s`` between stored output and linear-scheme index."""
        return self.factorization.m - self.factorization.shift

    def to_json(self):
        return {
            "factorization": self.factorization.to_json(),
            "pyramids": [prm.to_json() for prm in self.pyramids],
            "boundary": self.boundary,
        }


def make_plan(factorization, boundary=PERIODIC):
    """Order the factors and attach optimal pyramid parameters."""
    f = order_factors(factorization)
    return RefinementPlan(f, tuple(optimal_params(a) for a in f.quadratic_alphas), boundary)


def plan_from_mask(mask, boundary=PERIODIC):
    """Factorise ``mask`` and build its plan."""
    return make_plan(factorize(mask), boundary)


@dataclass
class RefinementTrace:
    """Mesh size after every round of one step.

    ``rounds`` holds dicts with ``kind`` (``double``, ``linear`` or
    ``quadratic``), ``alpha`` and ``delta``; ``delta`` is an array when the
    step ran on a batch of sequences. ``snapshots`` is filled only on request.
    """

    shift: int
    offset: int
    rounds: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)

    @property
    def deltas(self):
        return [r["delta"] for r in self.rounds]

    def to_json(self):
        def enc(v):
            if isinstance(v, complex):
                return {"re": v.real, "im": v.imag}
            if isinstance(v, np.ndarray):
                return v.tolist()
            return v

        return {
            "rounds": [{k: enc(v) for k, v in r.items()} for r in self.rounds],
            "shift": self.shift,
            "offset": self.offset,
        }


def _delta(kind, q, topology):
    d = mesh_sizes(kind, q, topology)
    return float(d) if np.ndim(d) == 0 else np.asarray(d)


def _shifted(q, k, topology):
    # q_{i+k}, wrapping in periodic mode, truncating in open mode
    if topology == PERIODIC:
        return np.roll(q, -k, axis=0)
    return q[k:]


def _linear_arrays(kind, q, alpha, topology, reverse):
    w = linear_weight(alpha)
    n = len(q) if topology == PERIODIC else len(q) - 1
    head, nxt = q[:n], _shifted(q, 1, topology)[:n]
    if reverse:
        return kind.geodesic(nxt, head, w)
    return kind.geodesic(head, nxt, w)


def _quadratic_arrays(kind, q, params, topology, reverse):
    n = len(q) if topology == PERIODIC else len(q) - 2
    a, b, c = q[:n], _shifted(q, 1, topology)[:n], _shifted(q, 2, topology)[:n]
    if reverse:
        a, c = c, a
    return pyramid_arrays(kind, a, b, c, params)


def _require_length(n, need, what):
    if n < need:
        raise RefinementError(f"{what} needs at least {need} points, got {n}")


def elementary_double(p):
    """Repeat every point once: ``[a, b] -> [a, a, b, b]``."""
    return Polyline._trusted(p.kind, np.repeat(p.points, 2, axis=0), p.topology)


def linear_round(q, alpha, reverse=False):
    """One two-point averaging round with weight ``alpha / (1 + alpha)``.

    Parameters
    ----------
    q : Polyline
    alpha : float
        Real factor parameter, ``alpha != -1``.
    reverse : bool
        If False, ``out_i = M_w(q_i, q_{i+1})``; if True the arguments are
        swapped, which is the orientation used by :func:`global_refine_step`.

    Returns
    -------
    Polyline
        Open input loses its last point; periodic input keeps its length.
    """
    _require_length(len(q), 2, "a linear round")
    out = _linear_arrays(q.kind, q.points, alpha, q.topology, reverse)
    return Polyline._trusted(q.kind, out, q.topology)


def quadratic_round(q, params, reverse=False):
    """One three-pyramid round, ``out_i = P(q_i, q_{i+1}, q_{i+2})``.

    With ``reverse=True`` the window is read as ``(q_{i+2}, q_{i+1}, q_i)``.
    """
    if not params.interpolating:
        raise ValidationError(f"quadratic rounds need r in (0, 1), got r={params.r:.6g}")
    _require_length(len(q), 3, "a quadratic round")
    out = _quadratic_arrays(q.kind, q.points, params, q.topology, reverse)
    return Polyline._trusted(q.kind, out, q.topology)


def _round_ops(plan):
    f = plan.factorization
    ops = [("linear", a, None) for a in f.real_alphas]
    ops += [("quadratic", a, prm) for a, prm in zip(f.quadratic_alphas, plan.pyramids)]
    return ops


def step_arrays(kind, points, plan, topology=None, keep_snapshots=False, track=True):
    """One global refinement step on stacked coordinates.

    Parameters
    ----------
    kind : Manifold
    points : ndarray, shape (N, ...batch, *point_shape)
        The sequence runs along axis 0; further leading axes refine
        independent sequences in lockstep.
    plan : RefinementPlan
    topology : str, optional
        Defaults to ``plan.boundary``.
    keep_snapshots : bool
        Store a copy of the working sequence after each round.
    track : bool
        Record the mesh size after each round; switching it off saves one
        distance evaluation per round.

    Returns
    -------
    out : ndarray
    trace : RefinementTrace
    """
    topology = plan.boundary if topology is None else topology
    trace = RefinementTrace(plan.shift, plan.offset)
    q = np.repeat(np.asarray(points, dtype=float), 2, axis=0)
    measure = (lambda x: _delta(kind, x, topology)) if track else (lambda x: None)
    trace.rounds.append({"kind": "double", "alpha": None, "delta": measure(q)})
    if keep_snapshots:
        trace.snapshots.append(q.copy())
    for index, (label, alpha, prm) in enumerate(_round_ops(plan), start=1):
        need = 2 if label == "linear" else 3
        if topology == OPEN:
            _require_length(len(q) - need + 1, 2, f"round {index} of an open refinement")
        try:
            if label == "linear":
                q = _linear_arrays(kind, q, alpha, topology, reverse=True)
            else:
                q = _quadratic_arrays(kind, q, prm, topology, reverse=True)
        except GeodesicDomainError as exc:
            raise GeodesicDomainError(exc.args[0], t=exc.t, index=exc.index, round_index=index) from exc
        trace.rounds.append({"kind": label, "alpha": alpha, "delta": measure(q)})
        if keep_snapshots:
            trace.snapshots.append(q.copy())
    if topology == PERIODIC:
        q = np.roll(q, plan.offset, axis=0)
    return q, trace


def _check_plan(p, plan):
    if p.topology != plan.boundary:
        raise ValidationError(f"plan is for {plan.boundary} data but the polyline is {p.topology}")


def global_refine_step(p, plan, keep_snapshots=False):
    """Double the data, run every averaging round, then apply the shift.

    Returns
    -------
    Polyline
    RefinementTrace
    """
    _check_plan(p, plan)
    out, trace = step_arrays(p.kind, p.points, plan, p.topology, keep_snapshots)
    return Polyline._trusted(p.kind, out, p.topology), trace


def subdivide(p, plan, k, keep_snapshots=False):
    """Apply ``k`` refinement steps; returns the result and one trace per step."""
    k = int(k)
    if k < 0:
        raise ValidationError("the number of steps must be nonnegative")
    traces = []
    for _ in range(k):
        p, trace = global_refine_step(p, plan, keep_snapshots)
        traces.append(trace)
    return p, traces


def local_refine_step(p, plan):
    """Periodic refinement step computed point by point.

    Output ``j`` is a pyramid of ``m`` averaging levels over the original
    points ``p_{(j + s - m) // 2}`` up to ``p_{(j + s) // 2}``. The first
    level pairs are either a point with itself (returned exactly) or two
    neighbours averaged with the weight of the first factor.
    """
    _check_plan(p, plan)
    f = plan.factorization
    if f.m2:
        raise ValidationError("the local interpretation covers real factors only")
    if not p.periodic:
        raise ValidationError("the local interpretation is implemented for periodic data")
    kind, pts, n = p.kind, p.points, len(p)
    m = f.m1
    start = np.arange(2 * n) + f.shift - m
    # level 0: doubled-sequence entries q_{start + k}, k = 0..m, as indices into p
    idx = np.floor_divide(start[:, None] + np.arange(m + 1)[None, :], 2) % n
    level = None
    for j, alpha in enumerate(f.real_alphas):
        if level is None:
            lo, hi = idx[:, :-1], idx[:, 1:]
            same = lo == hi
            out = pts[lo].copy()
            if np.any(~same):
                out[~same] = kind.geodesic(pts[hi[~same]], pts[lo[~same]], linear_weight(alpha))
            level = out
        else:
            level = kind.geodesic(level[:, 1:], level[:, :-1], linear_weight(alpha))
    if level is None:
        level = pts[idx]
    return Polyline._trusted(kind, level[:, 0], p.topology)


def linear_refine(f, mask):
    """Periodic linear refinement ``S(f)_j = sum_i a_{j-2i} f_i``.

    Parameters
    ----------
    f : array_like, shape (N, ...)
        Periodic real data; trailing axes are carried along.
    mask : Mask

    Returns
    -------
    ndarray, shape (2N, ...)
    """
    f = np.asarray(f, dtype=float)
    n = len(f)
    out = np.zeros((2 * n,) + f.shape[1:])
    base = 2 * np.arange(n)
    for k, a in zip(mask.indices, mask.coefficients):
        np.add.at(out, (base + k) % (2 * n), a * f)
    return out
