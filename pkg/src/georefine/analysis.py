"""Convergence certificates for adapted refinement schemes.

The first positive real factor makes the averaging contractive with factor
``mu1``; every further factor may expand the mesh size by at most ``xi``.
A scheme is certified convergent from all admissible data when
``mu = mu1 * prod(xi) < 1``. For a single complex factor the certified
region is the complement of a domain ``Omega`` bounded by the curves
``rho = c(phi) -+ sqrt(c(phi)**2 - 1)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .geometry import PERIODIC
from .pyramid import optimal_params
from .refine import step_arrays
from .symbol import contraction_of, quadratic_denominator

BOUNDARY_TOL = 1e-12
INSIDE = "inside"
OUTSIDE = "outside"
BOUNDARY = "boundary"
CERTIFIED = "certified-convergent"
NOT_CERTIFIED = "not-certified"
# smallest per-round displacement increment credited to a quadratic round
QUADRATIC_STEP = 1.5


def mu1_of(factorization):
    """Best initial contraction ``min max(1, alpha) / (1 + alpha)`` over positive ``alpha``.

    Returns None when the factorization has no positive real factor.

    Examples
    --------
    >>> from georefine.symbol import SymbolFactorization
    >>> mu1_of(SymbolFactorization(0, (3.0,)))
    0.75
    """
    positive = [a for a in factorization.real_alphas if a > 0.0]
    if not positive:
        return None
    return min(contraction_of(a) for a in positive)


def xi(alpha):
    """Worst-case growth of the mesh size caused by one averaging round.

    Parameters
    ----------
    alpha : float or complex
        Real factor parameter (``alpha != -1``) or non-real quadratic one.

    Returns
    -------
    float
        1 for positive ``alpha``, ``1 + 2|alpha/(1+alpha)|`` on (-1, 0),
        ``1 + 2|1/(1+alpha)|`` below -1, and
        ``1 + 4(|alpha| - Re alpha) / (1 + 2 Re alpha + |alpha|**2)`` for
        non-real ``alpha``.
    """
    z = complex(alpha)
    if z.imag != 0.0:
        den = quadratic_denominator(z)
        if den <= 0.0:
            raise ValidationError(f"alpha={z} has a nonpositive normalisation")
        return 1.0 + 2.0 * (2.0 * (abs(z) - z.real) / den)
    a = z.real
    if a == -1.0:
        raise ValidationError("xi is undefined at alpha = -1")
    if a > 0.0:
        return 1.0
    if a > -1.0:
        return 1.0 + 2.0 * abs(a / (1.0 + a))
    return 1.0 + 2.0 * abs(1.0 / (1.0 + a))


def _later_factors(factorization):
    # every factor after the leading (contracting) one, in execution order
    return list(factorization.real_alphas[1:]) + list(factorization.quadratic_alphas)


def displacement_constant(factorization):
    """Constant ``K`` with ``d(q_{2i}, p_i) <= K delta(p)`` after one step.

    ``q`` is the working sequence before the final index shift. The leading
    round contributes 1. A later round adds its largest single move times
    the mesh-size bound accumulated so far: ``running`` for positive factors,
    ``max(2, |1/(1 + alpha)|) * running`` for negative ones, and
    ``max(3/2, (|t2| + (1 + |alpha|)/D) * running)`` for complex ones.
    """
    mu1 = mu1_of(factorization)
    if mu1 is None:
        return None
    k = 1.0
    running = mu1
    for a in _later_factors(factorization):
        if isinstance(a, complex):
            prm = optimal_params(a)
            move = (abs(prm.t2) + (1.0 + abs(a)) / quadratic_denominator(a)) * running
            k += max(QUADRATIC_STEP, move)
            running *= xi(a)
        elif a > 0.0:
            k += running
        else:
            k += max(2.0, abs(1.0 / (1.0 + a))) * running
            running *= xi(a)
    return k


@dataclass(frozen=True)
class ConvergenceReport:
    """Outcome of :func:`contractivity`."""

    mu1: float | None
    xi_factors: tuple
    mu: float | None
    displacement_K: float | None
    omega_verdicts: tuple
    verdict: str
    reason: str = ""
    uniform_bound: bool | None = None
    factorization: object = field(default=None, compare=False)

    @property
    def certified(self):
        return self.verdict == CERTIFIED

    def to_json(self):
        def enc(a):
            a = complex(a) if isinstance(a, complex) else a
            return {"re": a.real, "im": a.imag} if isinstance(a, complex) else a

        out = {
            "mu1": self.mu1,
            "xi": [{"alpha": enc(a), "xi": x} for a, x in self.xi_factors],
            "mu": self.mu,
            "displacement_K": self.displacement_K,
            "omega": [{"alpha": enc(a), "membership": v} for a, v in self.omega_verdicts],
            "verdict": self.verdict,
            "reason": self.reason,
            "uniform_bound": self.uniform_bound,
        }
        if self.factorization is not None:
            out["factorization"] = self.factorization.to_json()
            out["pyramids"] = [optimal_params(a).to_json() for a in self.factorization.quadratic_alphas]
        return out


def contractivity(factorization):
    """Certify (or decline to certify) convergence of an ordered factorization.

    Examples
    --------
    >>> from georefine.symbol import SymbolFactorization
    >>> contractivity(SymbolFactorization(0, (1.0, -0.5))).mu
    1.5
    """
    f = factorization
    mu1 = mu1_of(f)
    factors = tuple((a, xi(a)) for a in _later_factors(f))
    if mu1 is None:
        return ConvergenceReport(
            None, factors, None, None, (), NOT_CERTIFIED,
            "no positive real factor supplies an initial contraction", None, f,
        )
    mu = mu1 * float(np.prod([x for _, x in factors])) if factors else mu1
    omega = tuple((a, omega_membership(a, mu1)) for a in f.quadratic_alphas)
    uniform = uniform_complex_bound(f) if f.m2 else None
    if mu < 1.0:
        verdict, reason = CERTIFIED, f"mu = {mu:.6g} < 1"
    else:
        verdict, reason = NOT_CERTIFIED, f"mu = {mu:.6g} >= 1; the expansion factors outweigh the contraction"
    return ConvergenceReport(mu1, factors, mu, displacement_constant(f), omega, verdict, reason, uniform, f)


def _check_mu1(mu1):
    mu1 = float(mu1)
    if not 0.5 <= mu1 < 1.0:
        raise ValidationError(f"mu1 must lie in [1/2, 1), got {mu1!r}")
    return mu1


def omega_angle(mu1):
    """Opening angle ``arccos((3 mu1 - 1) / (1 + mu1))``; no point of Omega has ``|arg| < angle``."""
    mu1 = _check_mu1(mu1)
    return float(np.arccos((3.0 * mu1 - 1.0) / (1.0 + mu1)))


def _centre(phi, mu1):
    gamma = 2.0 * mu1 / (1.0 - mu1)
    cos = np.cos(phi)
    return gamma * (1.0 - cos) - cos


def omega_radii(phi, mu1):
    """Inner and outer boundary radii at angle ``phi``; NaN where the ray misses Omega.

    The radii are the roots of ``rho**2 - 2 c(phi) rho + 1`` and multiply to one.
    """
    mu1 = _check_mu1(mu1)
    c = _centre(np.asarray(phi, dtype=float), mu1)
    with np.errstate(invalid="ignore"):
        root = np.sqrt(c * c - 1.0)
    root = np.where(c >= 1.0, root, np.nan)
    return c - root, c + root


def omega_membership(alpha, mu1):
    """Classify a non-real ``alpha`` against Omega for a given ``mu1``.

    Returns ``"outside"`` exactly when the single-factor scheme is certified,
    i.e. ``xi(alpha) < 1 / mu1``, up to a boundary band of relative width 1e-12.
    """
    mu1 = _check_mu1(mu1)
    z = complex(alpha)
    if z.imag == 0.0:
        raise ValidationError("Omega membership is defined for non-real alpha")
    rho, phi = abs(z), abs(np.angle(z))
    h = rho * rho - 2.0 * _centre(phi, mu1) * rho + 1.0
    if abs(h) <= BOUNDARY_TOL * (1.0 + rho * rho):
        return BOUNDARY
    return INSIDE if h < 0.0 else OUTSIDE


def omega_boundary(mu1, n_samples):
    """Sample the boundary of Omega at ``n_samples`` angles strictly inside ``(v, 2 pi - v)``.

    Returns
    -------
    ndarray, shape (n_samples, 3)
        Columns ``phi, rho1, rho2``.
    """
    n = int(n_samples)
    if n < 1:
        raise ValidationError("the number of samples must be positive")
    v = omega_angle(mu1)
    k = np.arange(1, n + 1)
    phi = v + k * (2.0 * np.pi - 2.0 * v) / (n + 1)
    r1, r2 = omega_radii(phi, mu1)
    return np.column_stack([phi, r1, r2])


def uniform_complex_bound(factorization):
    """Sufficient per-factor test for certification with several complex factors.

    True when every complex factor satisfies
    ``xi(alpha) < (1 / (mu1 * prod_j xi(alpha_j)))**(1/m2)`` with the product
    over the later real factors; this implies ``mu < 1``.
    """
    f = factorization
    mu1 = mu1_of(f)
    if mu1 is None or f.m2 == 0:
        raise ValidationError("the uniform bound needs a positive real factor and a complex factor")
    real_growth = float(np.prod([xi(a) for a in f.real_alphas[1:]])) if f.m1 > 1 else 1.0
    limit = (1.0 / (mu1 * real_growth)) ** (1.0 / f.m2)
    return all(xi(a) < limit for a in f.quadratic_alphas)


@dataclass(frozen=True)
class ContractionMeasurement:
    """Per-step mesh-size ratios; a ratio is 0 and flagged when the previous mesh size was 0."""

    ratios: np.ndarray
    degenerate: np.ndarray
    deltas: np.ndarray

    @property
    def max_ratio(self):
        live = self.ratios[~self.degenerate]
        return float(np.max(live)) if live.size else 0.0


def contraction_arrays(kind, points, plan, k, topology=None):
    """Mesh-size ratios of ``k`` steps on stacked (possibly batched) sequences.

    Returns
    -------
    ContractionMeasurement
        ``ratios`` and ``degenerate`` have shape ``(k, *batch)``; ``deltas``
        has shape ``(k + 1, *batch)``.
    """
    from .geometry import mesh_sizes

    topology = plan.boundary if topology is None else topology
    q = np.asarray(points, dtype=float)
    deltas = [np.asarray(mesh_sizes(kind, q, topology), dtype=float)]
    for _ in range(int(k)):
        q, _ = step_arrays(kind, q, plan, topology, track=False)
        deltas.append(np.asarray(mesh_sizes(kind, q, topology), dtype=float))
    deltas = np.stack(deltas)
    prev, nxt = deltas[:-1], deltas[1:]
    degenerate = prev == 0.0
    ratios = np.where(degenerate, 0.0, nxt / np.where(degenerate, 1.0, prev))
    return ContractionMeasurement(ratios, degenerate, deltas)


def empirical_contraction(p, plan, k):
    """Run ``k`` steps on a polyline and report ``delta(step j+1) / delta(step j)``."""
    return contraction_arrays(p.kind, p.points, plan, k, p.topology)


def displacement_arrays(kind, points, refined, plan, topology=PERIODIC):
    """Distances ``d(q_{2i}, p_i)`` with ``q`` the refined data before the final shift."""
    points = np.asarray(points, dtype=float)
    refined = np.asarray(refined, dtype=float)
    n = len(points)
    if topology == PERIODIC:
        idx = (2 * np.arange(n) + plan.offset) % len(refined)
        return kind.dist(refined[idx], points)
    n = min(n, (len(refined) + 1) // 2)
    return kind.dist(refined[2 * np.arange(n)], points[:n])


def displacement(p, refined, plan):
    """Largest ``d(q_{2i}, p_i)`` over the sequence (see :func:`displacement_arrays`)."""
    d = displacement_arrays(p.kind, p.points, refined.points, plan, p.topology)
    return float(np.max(d))
