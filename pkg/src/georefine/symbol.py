"""Subdivision masks, their symbols and the factorization into averaging rounds.

A mask ``a`` attaches coefficient ``a_i`` to ``z**i`` for ``i = L .. L+len-1``.
Its symbol is factorised as::

    a(z) = z**-s (1+z) prod_k (1 + alpha_k z)/(1 + alpha_k)
                     prod_j (1 + 2 Re(alpha_j) z + |alpha_j|**2 z**2)/(1 + 2 Re(alpha_j) + |alpha_j|**2)

with one real ``alpha`` per real root ``-1/alpha`` and one complex
representative (positive imaginary part) per conjugate pair of roots.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from math import comb

import numpy as np

from .errors import SymbolError, ValidationError
from .roots import aberth, merge_clusters, polish, residuals, synthetic_divide

TAU_SUM = 1e-10
TAU_ROOT = 1e-8
TAU_NEAR = 1e-8
TAU_DEN = 1e-10
# relative residual below which -1 is taken as a further root of the deflated symbol
TAU_MINUS_ONE = 1e-12
MAX_DEGREE = 64


@dataclass(frozen=True)
class Mask:
    """Finitely supported mask; zero coefficients at either end are trimmed."""

    coefficients: tuple
    first_index: int = 0

    def __post_init__(self):
        coeffs = [float(c) for c in self.coefficients]
        if not all(np.isfinite(coeffs)):
            raise ValidationError("mask coefficients must be finite")
        first = int(self.first_index)
        while coeffs and coeffs[0] == 0.0:
            coeffs.pop(0)
            first += 1
        while coeffs and coeffs[-1] == 0.0:
            coeffs.pop()
        if not coeffs:
            raise ValidationError("mask must have a nonzero coefficient")
        object.__setattr__(self, "coefficients", tuple(coeffs))
        object.__setattr__(self, "first_index", first)

    @property
    def last_index(self):
        return self.first_index + len(self.coefficients) - 1

    @property
    def indices(self):
        return range(self.first_index, self.last_index + 1)

    def as_array(self):
        return np.array(self.coefficients)

    def symbol(self, z):
        """Evaluate ``a(z) = sum a_i z**i``."""
        z = np.asarray(z, dtype=complex)
        return sum(c * z**i for i, c in zip(self.indices, self.coefficients))

    def to_json(self):
        return {"coefficients": list(self.coefficients), "first_index": self.first_index}

    @classmethod
    def from_json(cls, obj):
        try:
            return cls(tuple(obj["coefficients"]), int(obj.get("first_index", 0)))
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed mask JSON: {exc}") from None


@dataclass(frozen=True)
class MaskCheck:
    ok: bool
    sum_value: float
    alternating_sum: float
    problems: tuple = ()

    def __bool__(self):
        return self.ok

    @property
    def message(self):
        return "; ".join(self.problems) if self.problems else "ok"


def validate(mask):
    """Check the necessary conditions ``a(1) = 2`` and ``a(-1) = 0``."""
    total = float(sum(mask.coefficients))
    alt = float(sum(c * (-1) ** (i % 2) for i, c in zip(mask.indices, mask.coefficients)))
    problems = []
    if abs(total - 2.0) > TAU_SUM:
        problems.append(f"a(1)={total:.17g} (expected 2, residual {total - 2.0:.3e})")
    if abs(alt) > TAU_SUM:
        problems.append(f"a(-1)={alt:.17g} (expected 0)")
    return MaskCheck(not problems, total, alt, tuple(problems))


def contraction_of(alpha):
    """``max(1/(1+alpha), alpha/(1+alpha))`` for a positive real ``alpha``."""
    return max(1.0, alpha) / (1.0 + alpha)


def quadratic_denominator(alpha):
    return 1.0 + 2.0 * alpha.real + abs(alpha) ** 2


@dataclass(frozen=True)
class SymbolFactorization:
    """Shift, real factors and complex-pair factors of a symbol.

    ``certifiable`` is False when no positive real factor exists, i.e. no
    round can supply the initial contraction.
    """

    shift: int
    real_alphas: tuple = ()
    quadratic_alphas: tuple = ()
    certifiable: bool = field(default=True, compare=False)

    def __post_init__(self):
        reals = tuple(float(a) for a in self.real_alphas)
        quads = tuple(complex(a) for a in self.quadratic_alphas)
        for a in reals:
            if not np.isfinite(a) or a == 0.0:
                raise SymbolError(f"real factor alpha={a!r} must be finite and nonzero")
            if abs(a + 1.0) <= TAU_NEAR:
                raise SymbolError(f"real factor alpha={a:.17g} is too close to -1")
        for a in quads:
            if not a.imag > 0.0:
                raise SymbolError(f"quadratic factor alpha={a} must have positive imaginary part")
            if quadratic_denominator(a) <= TAU_DEN:
                raise SymbolError(f"quadratic factor alpha={a} has a vanishing normalisation")
        object.__setattr__(self, "shift", int(self.shift))
        object.__setattr__(self, "real_alphas", reals)
        object.__setattr__(self, "quadratic_alphas", quads)

    @property
    def m1(self):
        return len(self.real_alphas)

    @property
    def m2(self):
        return len(self.quadratic_alphas)

    @property
    def m(self):
        return self.m1 + 2 * self.m2

    def to_json(self):
        return {
            "shift": self.shift,
            "real_alphas": list(self.real_alphas),
            "quadratic_alphas": [{"re": a.real, "im": a.imag} for a in self.quadratic_alphas],
        }

    @classmethod
    def from_json(cls, obj):
        try:
            quads = [complex(q["re"], q["im"]) for q in obj.get("quadratic_alphas", [])]
            return cls(int(obj["shift"]), tuple(obj.get("real_alphas", [])), tuple(quads))
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed factorization JSON: {exc}") from None


def order_factors(f):
    """Put the best contracting positive factor first.

    Order: the positive ``alpha`` minimising ``contraction_of`` (ties broken by
    the smaller ``|alpha - 1|``), the other positive factors, then the
    negative ones. Quadratic factors keep their order and always run last.
    """
    positive = [a for a in f.real_alphas if a > 0.0]
    negative = [a for a in f.real_alphas if a < 0.0]
    if not positive:
        return replace(f, real_alphas=tuple(negative), certifiable=False)
    lead = min(positive, key=lambda a: (round(contraction_of(a), 10), abs(a - 1.0)))
    rest = list(positive)
    rest.remove(lead)
    return replace(f, real_alphas=(lead, *rest, *negative), certifiable=True)


def _poly_mul(p, q):
    return np.convolve(p, q)


def reconstruct(f):
    """Expand a factorization back into mask coefficients."""
    poly = np.array([1.0, 1.0])
    for a in f.real_alphas:
        poly = _poly_mul(poly, np.array([1.0, a]) / (1.0 + a))
    for a in f.quadratic_alphas:
        den = quadratic_denominator(a)
        poly = _poly_mul(poly, np.array([1.0, 2.0 * a.real, abs(a) ** 2]) / den)
    return Mask(tuple(poly), -f.shift)


def bspline_mask(degree):
    """Mask of the degree-``m`` B-spline scheme, symbol ``(1+z)**(m+1) / 2**m``."""
    m = int(degree)
    if m < 1:
        raise ValidationError("B-spline degree must be at least 1")
    return Mask(tuple(comb(m + 1, k) / 2.0**m for k in range(m + 2)), 0)


def _pair_conjugates(upper, lower):
    lower = list(lower)
    pairs = []
    for u in sorted(upper, key=lambda z: (z.real, z.imag)):
        if not lower:
            raise SymbolError(f"complex root {u} has no conjugate partner")
        j = int(np.argmin([abs(u - np.conj(l)) for l in lower]))
        partner = lower.pop(j)
        if abs(u - np.conj(partner)) > TAU_ROOT * (1.0 + abs(u)):
            raise SymbolError(
                f"complex root {u} is unpaired (nearest conjugate mismatch {abs(u - np.conj(partner)):.3e})"
            )
        pairs.append(0.5 * (u + np.conj(partner)))
    if lower:
        raise SymbolError(f"complex root {lower[0]} has no conjugate partner")
    return pairs


def symbol_roots(mask):
    """Roots of the symbol after removing one ``(1+z)`` factor.

    Returns ``(minus_one_multiplicity, roots)`` where the first entry counts
    further roots at -1 removed by exact deflation.
    """
    c = mask.as_array()
    if len(c) - 1 > MAX_DEGREE:
        raise SymbolError(f"mask degree {len(c) - 1} exceeds {MAX_DEGREE}")
    q, rem = synthetic_divide(c, -1.0)
    if abs(rem) > TAU_ROOT * np.sum(np.abs(c)):
        raise SymbolError(f"-1 is not a root of the symbol (remainder {rem:.3e})")
    extra = 0
    while len(q) > 1:
        q2, rem = synthetic_divide(q, -1.0)
        if abs(rem) > TAU_MINUS_ONE * np.sum(np.abs(q)):
            break
        q = q2
        extra += 1
    z = merge_clusters(q, aberth(q))
    # deflation is unstable when roots outside the unit disc exist; polish on the full symbol
    return extra, q, polish(c, z)


def factorize(mask):
    """Factorise a valid mask; the result is already ordered.

    Raises
    ------
    SymbolError
        If the mask fails validation, -1 is not a root, a factor sits at
        ``alpha = -1``, or complex roots cannot be paired.
    """
    check = validate(mask)
    if not check.ok:
        raise SymbolError(f"invalid mask: {check.message}")
    extra, _, z = symbol_roots(mask)
    reals = [1.0] * extra
    upper, lower = [], []
    for r in z:
        if abs(r.imag) <= TAU_ROOT * (1.0 + abs(r.real)):
            reals.append(-1.0 / r.real)
        elif r.imag > 0:
            upper.append(r)
        else:
            lower.append(r)
    quads = [-1.0 / r for r in _pair_conjugates(upper, lower)]
    for a in reals:
        if abs(a + 1.0) <= TAU_NEAR:
            raise SymbolError(f"factor alpha={a:.17g} is within {TAU_NEAR:g} of -1")
    for a in quads:
        if quadratic_denominator(a) <= TAU_DEN:
            raise SymbolError(f"quadratic factor alpha={a} has a vanishing normalisation")
    f = SymbolFactorization(-mask.first_index, tuple(sorted(reals)), tuple(quads))
    return order_factors(f)


def root_residuals(mask):
    """Backward errors of the reported roots against the full symbol (diagnostic)."""
    _, _, z = symbol_roots(mask)
    return residuals(mask.as_array(), z)
