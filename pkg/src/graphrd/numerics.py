"""Entropy primitives and the piecewise-linear water-level solver."""

import math

import numpy as np

# Inputs this far outside a valid probability range are treated as rounding
# noise and clamped; anything farther out is rejected.
PROB_TOL = 1e-12

LN2 = math.log(2.0)


def clamp_unit(t, what="probability"):
    """Clamp t into [0, 1], rejecting values more than PROB_TOL outside."""
    t = float(t)
    if not -PROB_TOL <= t <= 1.0 + PROB_TOL:
        raise ValueError(f"{what} {t!r} outside [0, 1]")
    return min(max(t, 0.0), 1.0)


def binary_entropy(t):
    """Entropy of a Bernoulli(t) variable in bits, with h(0) = h(1) = 0."""
    t = clamp_unit(t)
    if t == 0.0 or t == 1.0:
        return 0.0
    return -t * math.log2(t) - (1.0 - t) * math.log2(1.0 - t)


def binary_entropy_values(values, what="probability"):
    """Elementwise binary entropy of an array of probabilities, in bits."""
    a = np.asarray(values, dtype=float)
    if a.size and (not np.all(np.isfinite(a)) or a.min() < -PROB_TOL or a.max() > 1.0 + PROB_TOL):
        bad = a[~(np.isfinite(a) & (a >= -PROB_TOL) & (a <= 1.0 + PROB_TOL))].flat[0]
        raise ValueError(f"{what} {bad!r} outside [0, 1]")
    a = np.clip(a, 0.0, 1.0)
    out = np.zeros_like(a)
    inner = (a > 0.0) & (a < 1.0)
    t = a[inner]
    out[inner] = -t * np.log2(t) - (1.0 - t) * np.log2(1.0 - t)
    return out


def as_prob_vector(values):
    """Validate a probability vector: entries in [0, 1] and summing to 1.

    Entries within PROB_TOL of the unit interval are clamped; the sum must
    match 1 within PROB_TOL.
    """
    p = np.asarray(values, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise ValueError("probability vector must be a nonempty 1-D sequence")
    if not np.all(np.isfinite(p)):
        raise ValueError("probability vector has a non-finite entry")
    if p.min() < -PROB_TOL or p.max() > 1.0 + PROB_TOL:
        bad = p[(p < -PROB_TOL) | (p > 1.0 + PROB_TOL)][0]
        raise ValueError(f"probability {bad!r} outside [0, 1]")
    p = np.clip(p, 0.0, 1.0)
    total = float(p.sum())
    if abs(total - 1.0) > PROB_TOL:
        raise ValueError(f"probabilities sum to {total:.12g}, expected 1")
    return p


def as_sym_matrix(entries, what="matrix"):
    """Validate a symmetric square matrix of probabilities."""
    M = np.asarray(entries, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] == 0:
        raise ValueError(f"{what} must be square and nonempty, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{what} has a non-finite entry")
    if not np.array_equal(M, M.T):
        l, m = map(int, np.argwhere(M != M.T)[0])
        raise ValueError(
            f"{what} not symmetric at ({l}, {m}): {M[l, m]!r} != {M[m, l]!r}"
        )
    if M.min() < -PROB_TOL or M.max() > 1.0 + PROB_TOL:
        raise ValueError(f"{what} entry outside [0, 1]")
    return np.clip(M, 0.0, 1.0)


def entropy_matrix(W):
    """Elementwise binary entropy of a symmetric probability matrix, in bits."""
    return binary_entropy_values(as_sym_matrix(W))


def quadratic_form(p, M):
    """Evaluate sum_{l,m} p_l p_m M[l, m]."""
    p = np.asarray(p, dtype=float)
    M = np.asarray(M, dtype=float)
    if p.ndim != 1 or M.shape != (p.size, p.size):
        raise ValueError(
            f"dimension mismatch: vector has {p.size} entries, matrix is {M.shape}"
        )
    return float(p @ M @ p)


def _threshold_pairs(thresholds):
    a = np.asarray(thresholds, dtype=float)
    if a.size == 0:
        return np.zeros(0), np.zeros(0)
    if a.ndim != 2 or a.shape[1] != 2:
        raise ValueError("thresholds must be a sequence of (cap, weight) pairs")
    caps, weights = a[:, 0], a[:, 1]
    if not np.all(np.isfinite(a)):
        raise ValueError("thresholds must be finite")
    if caps.min() < -PROB_TOL or weights.min() < -PROB_TOL:
        raise ValueError("caps and weights must be nonnegative")
    return np.maximum(caps, 0.0), np.maximum(weights, 0.0)


def solve_monotone_piecewise(thresholds, target):
    """Smallest mu >= 0 with sum_i weight_i * min(cap_i, mu) == target.

    thresholds is a sequence of (cap, weight) pairs. The clipped sum is
    piecewise linear and nondecreasing in mu, so the equation is solved
    exactly by walking the sorted cap breakpoints; no iteration is involved.
    On a flat segment (several mu values give the target) the smallest one
    is returned. target == sum of weight * cap yields the largest cap that
    carries positive weight.
    """
    caps, weights = _threshold_pairs(thresholds)
    total = float(weights @ caps)
    target = float(target)
    slack = PROB_TOL * max(1.0, total)
    if not -slack <= target <= total + slack:
        raise ValueError(f"target {target!r} outside feasible range [0, {total:.12g}]")
    target = min(max(target, 0.0), total)
    if target == 0.0:
        return 0.0
    keep = weights > 0.0
    caps, weights = caps[keep], weights[keep]
    order = np.argsort(caps, kind="stable")
    caps, weights = caps[order], weights[order]
    # S[j] is the clipped sum evaluated at mu = caps[j]: entries below j are
    # saturated, the rest still grow linearly.
    sat_before = np.concatenate([[0.0], np.cumsum(weights * caps)[:-1]])
    rem = np.cumsum(weights[::-1])[::-1]
    S = sat_before + caps * rem
    j = int(np.searchsorted(S, target, side="left"))
    if j == caps.size:
        return float(caps[-1])
    return float((target - sat_before[j]) / rem[j])


def water_level_bisection(thresholds, target, tol=1e-12):
    """Bisection solver for the water-level equation, to tol absolute in mu.

    Slower than solve_monotone_piecewise and only accurate to tol; kept as an
    independent cross-check and as a fallback should the exact walk ever be
    in doubt.
    """
    caps, weights = _threshold_pairs(thresholds)
    total = float(weights @ caps)
    target = float(target)
    slack = PROB_TOL * max(1.0, total)
    if not -slack <= target <= total + slack:
        raise ValueError(f"target {target!r} outside feasible range [0, {total:.12g}]")
    target = min(max(target, 0.0), total)
    if target == 0.0:
        return 0.0
    lo, hi = 0.0, float(caps.max())
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if float(weights @ np.minimum(caps, mid)) >= target:
            hi = mid
        else:
            lo = mid
    return hi
