"""Aberth-Ehrlich simultaneous root iteration for real polynomials."""

from __future__ import annotations

import numpy as np

STOP_TOL = 1e-13
MAX_ITER = 200
# roots closer than this (relative) are candidates for one multiple root
CLUSTER_TOL = 1e-3
# a merge may worsen the rebuilt coefficients by this factor plus a rounding floor
MERGE_SLACK = 4.0
MERGE_FLOOR = 1e-14


def _horner(coeffs_desc, z):
    p = np.zeros_like(z) + coeffs_desc[0]
    dp = np.zeros_like(z)
    for c in coeffs_desc[1:]:
        dp = dp * z + p
        p = p * z + c
    return p, dp


def aberth(coeffs, tol=STOP_TOL, max_iter=MAX_ITER):
    """All complex roots of ``sum(coeffs[k] * z**k)``.

    ``coeffs`` is in ascending order and its last entry must be nonzero.
    Iteration starts on a perturbed circle of radius ``1 + max|c_k / c_n|`` and
    stops once the largest correction falls below ``tol`` (relative to the
    root magnitude) or after ``max_iter`` sweeps. Roots of multiplicity > 1
    come back as small clusters; see :func:`merge_clusters`.
    """
    c = np.asarray(coeffs, dtype=complex)
    if c.ndim != 1 or len(c) == 0 or c[-1] == 0:
        raise ValueError("leading coefficient must be nonzero")
    n = len(c) - 1
    if n == 0:
        return np.zeros(0, dtype=complex)
    monic = c / c[-1]
    desc = monic[::-1]
    if n == 1:
        return np.array([-monic[0]])
    radius = 1.0 + np.max(np.abs(monic[:-1]))
    k = np.arange(n)
    z = radius * (1.0 + 0.1 * np.sin(1.7 * k + 0.3)) / 1.1 * np.exp(1j * (2 * np.pi * k / n + 0.4))

    for _ in range(max_iter):
        p, dp = _horner(desc, z)
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, 1.0)
        inv = 1.0 / diff
        np.fill_diagonal(inv, 0.0)
        repulsion = inv.sum(axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            newton = p / dp
            step = newton / (1.0 - newton * repulsion)
        step = np.where(np.isfinite(step), step, 0.0)
        step = np.where(p == 0, 0.0, step)
        z = z - step
        if np.max(np.abs(step) / np.maximum(1.0, np.abs(z))) < tol:
            break
    return z


def _coefficient_error(lead, desc, z):
    # max-norm mismatch between the polynomial rebuilt from z and the input
    rebuilt = lead * np.poly(z)
    return float(np.max(np.abs(rebuilt - desc)) / np.max(np.abs(desc)))


def merge_clusters(coeffs, z, tol=CLUSTER_TOL):
    """Replace each cluster of nearby roots by one polished multiple root.

    Members of a perturbed k-fold root scatter like eps**(1/k); the root is
    simple for the (k-1)-th derivative, so Newton on that derivative from the
    cluster centroid recovers it to near machine precision. A merge is kept
    only if the rebuilt coefficients stay as accurate as before: collapsing
    two distinct roots a distance ``d`` apart costs about ``d**2``.
    """
    z = np.asarray(z, dtype=complex)
    n = len(z)
    label = list(range(n))

    def find(i):
        while label[i] != i:
            label[i] = label[label[i]]
            i = label[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(z[i] - z[j]) <= tol * (1.0 + max(abs(z[i]), abs(z[j]))):
                label[find(i)] = find(j)
    groups = np.array([find(i) for i in range(n)])
    desc = np.asarray(coeffs, dtype=complex)[::-1]
    lead = desc[0]
    out = z.copy()
    for g in np.unique(groups):
        members = groups == g
        k = int(members.sum())
        if k == 1:
            continue
        deriv = desc
        for _ in range(k - 1):
            deriv = np.polyder(deriv)
        root = z[members].mean()
        for _ in range(50):
            p, dp = _horner(deriv, np.array([root]))
            if dp[0] == 0:
                break
            step = p[0] / dp[0]
            root = root - step
            if abs(step) <= 1e-16 * (1.0 + abs(root)):
                break
        trial = out.copy()
        trial[members] = root
        before = _coefficient_error(lead, desc, out)
        if _coefficient_error(lead, desc, trial) <= MERGE_SLACK * before + MERGE_FLOOR:
            out = trial
    return out


def polish(coeffs, z, max_step=1e-6, iters=4):
    """Newton-refine approximate roots against ``coeffs`` (ascending).

    Meant for roots found on a deflated polynomial, whose coefficients carry
    the deflation error. A step is taken only while it is smaller than
    ``max_step`` (relative) and lowers ``|p|``, so roots never hop to a
    neighbour. Multiple roots barely move, which is harmless.
    """
    desc = np.asarray(coeffs, dtype=complex)[::-1]
    z = np.array(z, dtype=complex)
    for _ in range(iters):
        p, dp = _horner(desc, z)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = p / dp
        step = np.where(np.isfinite(step), step, 0.0)
        new = z - step
        p_new, _ = _horner(desc, new)
        ok = (step != 0) & (np.abs(step) <= max_step * (1.0 + np.abs(z))) & (np.abs(p_new) < np.abs(p))
        if not ok.any():
            break
        z = np.where(ok, new, z)
    return z


def synthetic_divide(coeffs, root):
    """Divide ascending ``coeffs`` by ``(z - root)``; returns (quotient, remainder)."""
    desc = np.asarray(coeffs, dtype=float)[::-1]
    q = np.empty(len(desc) - 1)
    acc = 0.0
    for i, c in enumerate(desc[:-1]):
        acc = c + root * acc
        q[i] = acc
    rem = desc[-1] + root * acc
    return q[::-1], rem


def residuals(coeffs, z):
    """Backward error ``|p(z)| / sum_k |c_k| |z|**k`` of each root candidate."""
    c = np.asarray(coeffs, dtype=float)
    z = np.asarray(z, dtype=complex)
    p, _ = _horner(c[::-1].astype(complex), z)
    scale, _ = _horner(np.abs(c[::-1]).astype(complex), np.abs(z).astype(complex))
    return np.abs(p) / scale.real
