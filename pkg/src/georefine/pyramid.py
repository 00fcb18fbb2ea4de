"""Three-point geodesic averages realizing a quadratic symbol factor.

For a non-real ``alpha`` the factor ``(1 + 2 Re(alpha) z + |alpha|**2 z**2) / D``
with ``D = 1 + 2 Re(alpha) + |alpha|**2`` corresponds to the affine weights
``(w1, w2, w3) = (1, 2 Re(alpha), |alpha|**2) / D``. On a manifold these are
realized by the nested average::

    P(p1, p2, p3) = M_r(M_t2(p3, p2), M_t1(p2, p1))

which reduces to ``w1 p1 + w2 p2 + w3 p3`` on Euclidean data whenever
``t1 r = w1`` and ``(1 - t2)(1 - r) = w3``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GeodesicDomainError, SymbolError, ValidationError
from .geometry import ManifoldPoint, _same_kind

TAU_WEIGHT = 1e-12
TAU_DEN = 1e-10


@dataclass(frozen=True)
class QuadraticWeights:
    """Affine weights of a quadratic factor; they sum to one."""

    w1: float
    w2: float
    w3: float

    def __post_init__(self):
        w = (float(self.w1), float(self.w2), float(self.w3))
        if not all(np.isfinite(w)):
            raise ValidationError("quadratic weights must be finite")
        # relative: weights of nearly degenerate factors reach 1e4 and beyond
        if abs(sum(w) - 1.0) > TAU_WEIGHT * (1.0 + max(map(abs, w))):
            raise ValidationError(f"quadratic weights sum to {sum(w):.17g}, not 1")
        if not (w[0] > 0.0 and w[2] > 0.0):
            raise ValidationError(f"outer weights must be positive, got w1={w[0]:.6g}, w3={w[2]:.6g}")
        object.__setattr__(self, "w1", w[0])
        object.__setattr__(self, "w2", w[1])
        object.__setattr__(self, "w3", w[2])

    def as_tuple(self):
        return (self.w1, self.w2, self.w3)


@dataclass(frozen=True)
class ThreePyramidParams:
    """Weights plus the three averaging parameters ``r, t1, t2``."""

    weights: QuadraticWeights
    r: float
    t1: float
    t2: float

    def __post_init__(self):
        r, t1, t2 = float(self.r), float(self.t1), float(self.t2)
        if not all(np.isfinite((r, t1, t2))):
            raise ValidationError("pyramid parameters must be finite")
        w = self.weights
        if abs(t1 * r - w.w1) > TAU_WEIGHT * (1.0 + abs(w.w1)):
            raise ValidationError(f"t1*r = {t1 * r:.17g} does not match w1 = {w.w1:.17g}")
        if abs((1.0 - t2) * (1.0 - r) - w.w3) > TAU_WEIGHT * (1.0 + abs(w.w3)):
            raise ValidationError(f"(1-t2)(1-r) = {(1 - t2) * (1 - r):.17g} does not match w3 = {w.w3:.17g}")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "t1", t1)
        object.__setattr__(self, "t2", t2)

    @property
    def interpolating(self):
        """True when ``r`` lies strictly inside (0, 1)."""
        return 0.0 < self.r < 1.0

    def to_json(self):
        return {"w": list(self.weights.as_tuple()), "r": self.r, "t1": self.t1, "t2": self.t2}


def _check_alpha(alpha):
    alpha = complex(alpha)
    if not np.isfinite(alpha.real) or not np.isfinite(alpha.imag):
        raise SymbolError(f"alpha={alpha} is not finite")
    if alpha.imag == 0.0:
        raise SymbolError(f"alpha={alpha} is real; quadratic factors need a non-real alpha")
    den = 1.0 + 2.0 * alpha.real + abs(alpha) ** 2
    if den <= TAU_DEN:
        raise SymbolError(f"alpha={alpha} has a vanishing normalisation {den:.3e}")
    return alpha, den


def weights_from_alpha(alpha):
    """Weights ``(1, 2 Re(alpha), |alpha|**2) / (1 + 2 Re(alpha) + |alpha|**2)``.

    Examples
    --------
    >>> [round(w, 12) for w in weights_from_alpha(1 + 1j).as_tuple()]
    [0.2, 0.4, 0.4]
    """
    alpha, den = _check_alpha(alpha)
    w1 = 1.0 / den
    w3 = abs(alpha) ** 2 / den
    # w2 from the normalisation keeps the sum exact
    return QuadraticWeights(w1, 1.0 - w1 - w3, w3)


def optimal_params(alpha):
    """Parameters with ``r = 1 / (1 + |alpha|)``, minimising ``t1 - t2`` over ``r`` in (0, 1).

    Parameters
    ----------
    alpha : complex
        Non-real factor parameter.

    Returns
    -------
    ThreePyramidParams
    """
    alpha, den = _check_alpha(alpha)
    weights = weights_from_alpha(alpha)
    mod = abs(alpha)
    r = 1.0 / (1.0 + mod)
    t1 = (mod + 1.0) / den
    t2 = (1.0 + 2.0 * alpha.real - mod) / den
    return ThreePyramidParams(weights, r, t1, t2)


def params_for_r(alpha, r):
    """Parameters for a prescribed ``r``: ``t1 = w1 / r`` and ``t2 = 1 - w3 / (1 - r)``."""
    r = float(r)
    if r == 0.0 or r == 1.0 or not np.isfinite(r):
        raise ValidationError(f"r must be finite and differ from 0 and 1, got {r!r}")
    weights = weights_from_alpha(alpha)
    return ThreePyramidParams(weights, r, weights.w1 / r, 1.0 - weights.w3 / (1.0 - r))


def expansion_bound(params):
    """Factor ``2 (t1 - t2) + 1`` bounding the distance of neighbouring pyramids by the mesh size."""
    if not params.interpolating:
        raise ValidationError(f"the expansion bound needs r in (0, 1), got r={params.r:.17g}")
    return 2.0 * (params.t1 - params.t2) + 1.0


def pyramid_arrays(kind, p1, p2, p3, params):
    """Batched three pyramid on stacked coordinates.

    Geodesic domain errors are re-raised naming the inner average that failed.
    """
    stages = (
        ("inner average M_t1(p2, p1)", lambda: kind.geodesic(p2, p1, params.t1)),
        ("inner average M_t2(p3, p2)", lambda: kind.geodesic(p3, p2, params.t2)),
    )
    inner = []
    for label, run in stages:
        try:
            inner.append(run())
        except GeodesicDomainError as exc:
            raise GeodesicDomainError(f"{label}: {exc.args[0]}", t=exc.t, index=exc.index) from exc
    lower, upper = inner
    try:
        return kind.geodesic(upper, lower, params.r)
    except GeodesicDomainError as exc:
        raise GeodesicDomainError(f"outer average M_r: {exc.args[0]}", t=exc.t, index=exc.index) from exc


def three_pyramid_average(p1, p2, p3, params):
    """``M_r(M_t2(p3, p2), M_t1(p2, p1))`` for three points of one manifold.

    Examples
    --------
    >>> from georefine.geometry import Euclidean
    >>> E = Euclidean(1)
    >>> pts = [ManifoldPoint(E, [x]) for x in (0.0, 1.0, 2.0)]
    >>> round(float(three_pyramid_average(*pts, optimal_params(1 + 0.5j)).coords[0]), 5)
    1.05882
    """
    kind = _same_kind(p1, p2)
    _same_kind(p2, p3)
    out = pyramid_arrays(kind, p1.coords, p2.coords, p3.coords, params)
    return ManifoldPoint._trusted(kind, out)
