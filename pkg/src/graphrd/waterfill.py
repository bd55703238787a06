"""Reverse water-filling of the distortion budget across label pairs or edges.

The optimal per-pair distortion is min(cap, mu) where cap = min(w, 1 - w)
and the common level mu is chosen so the weighted distortions meet the
budget. Both the block-model solver (weights p_l p_m) and the independent
edge solver (unit weights) reduce to the same scalar equation, solved
exactly in numerics.solve_monotone_piecewise.
"""

import math
from dataclasses import dataclass

import numpy as np

from .models import pair_count, validate_inhom_er, validate_sbm
from .numerics import quadratic_form, solve_monotone_piecewise

# Relative slack when testing a distortion budget against its feasible range.
FEAS_TOL = 1e-12


class InfeasibleDistortionError(ValueError):
    """Distortion budget outside [0, boundary] beyond rounding slack."""

    def __init__(self, D, boundary):
        super().__init__(
            f"distortion {D!r} outside the feasible range [0, {boundary:.12g}]"
        )
        self.D = D
        self.boundary = boundary


@dataclass(frozen=True)
class SbmAllocation:
    """Optimal per-label-pair distortions for a block model budget."""

    dstar: np.ndarray
    mu: float
    normalized_distortion: float


@dataclass(frozen=True)
class ErAllocation:
    """Optimal per-edge distortions for an independent-edge budget."""

    d: np.ndarray
    lam: float


def _clip_budget(D, boundary):
    D = float(D)
    slack = FEAS_TOL * max(1.0, boundary)
    if not -slack <= D <= boundary + slack:
        raise InfeasibleDistortionError(D, boundary)
    return min(max(D, 0.0), boundary)


def sbm_distortion_boundary(params):
    """Largest useful budget: C(n,2) sum_{l,m} p_l p_m min(w_lm, 1 - w_lm).

    Beyond this the rate is zero; a reproduction drawn independently of the
    graph already meets the budget.
    """
    params = validate_sbm(params)
    caps = np.minimum(params.W, 1.0 - params.W)
    return pair_count(params.n) * quadratic_form(params.p, caps)


def sbm_independence_boundary(params):
    """Budget at which emitting a fixed all-or-nothing guess is optimal.

    C(n,2) min(sum p_l p_m w_lm, sum p_l p_m (1 - w_lm)): the distortion of
    the better of the empty and complete reproductions, in expectation.
    """
    params = validate_sbm(params)
    mean_w = quadratic_form(params.p, params.W)
    return pair_count(params.n) * min(mean_w, 1.0 - mean_w)


def er_distortion_boundary(params):
    """Largest useful budget sum_{i<j} min(p_ij, 1 - p_ij) for independent edges."""
    params = validate_inhom_er(params)
    return float(np.minimum(params.edge_probs, 1.0 - params.edge_probs).sum())


def solve_sbm_waterfill(params, D):
    """Split a block model budget D over label pairs.

    Returns the k x k matrix d*, the water level mu, and the per-pair budget
    D / C(n,2). Pairs with min(w, 1-w) below mu sit at their cap; the rest
    sit at mu. Pairs with zero prior weight never influence mu and are
    reported at their cap.
    """
    params = validate_sbm(params)
    p, W = params.p, params.W
    caps = np.minimum(W, 1.0 - W)
    weights = np.outer(p, p)
    boundary = pair_count(params.n) * quadratic_form(p, caps)
    D = _clip_budget(D, boundary)
    target = D / pair_count(params.n)
    iu, ju = np.triu_indices(params.k)
    # unordered pairs; off-diagonal weight doubled so the sum matches p^T . p
    pair_weights = np.where(iu == ju, 1.0, 2.0) * weights[iu, ju]
    mu = solve_monotone_piecewise(np.column_stack([caps[iu, ju], pair_weights]), target)
    dstar = np.minimum(caps, mu)
    dstar[weights == 0.0] = caps[weights == 0.0]
    return SbmAllocation(dstar=dstar, mu=mu, normalized_distortion=target)


def solve_er_waterfill(params, D):
    """Split an independent-edge budget D over the pairs, with unit weights."""
    params = validate_inhom_er(params)
    caps = np.minimum(params.edge_probs, 1.0 - params.edge_probs)
    boundary = float(caps.sum())
    D = _clip_budget(D, boundary)
    lam = solve_monotone_piecewise(
        np.column_stack([caps, np.ones_like(caps)]), D
    )
    return ErAllocation(d=np.minimum(caps, lam), lam=lam)


def _certificate(caps, weights, d, mu, atol=1e-12):
    """Stationarity and complementary slackness check for one allocation.

    For each component the cap constraint's multiplier is
    weight * (ln((1 - d)/d) - nu) with nu = ln(1/mu - 1); an interior
    component (d = mu) has multiplier zero by construction. All multipliers
    must be nonnegative and vanish wherever the cap is slack.
    """
    if mu < 0.0 or mu > 0.5 + atol:
        raise ValueError(f"water level {mu!r} outside [0, 1/2]")
    nu = math.inf if mu <= 0.0 else math.log(1.0 / mu - 1.0)
    # components with zero weight are absent from the objective, and interior
    # components (d = mu) are stationary with a zero multiplier by definition
    capped = (weights > 0.0) & (np.abs(d - mu) > atol)
    multipliers = np.zeros_like(d)
    with np.errstate(divide="ignore", invalid="ignore"):
        multipliers[capped] = weights[capped] * (
            np.log((1.0 - d[capped]) / np.maximum(d[capped], 0.0)) - nu
        )
        gap = d - caps
        residuals = np.where(gap == 0.0, 0.0, multipliers * gap)
    finite = multipliers[np.isfinite(multipliers)]
    return {
        "nu": nu,
        "min_multiplier": float(finite.min()) if finite.size else 0.0,
        "max_slackness_residual": float(np.abs(residuals).max()) if residuals.size else 0.0,
    }


def sbm_kkt_certificate(params, alloc, atol=1e-12):
    """KKT certificate for a block model allocation.

    Returns nu (in nats), the smallest cap multiplier, and the largest
    complementary slackness residual. An optimal allocation has every
    multiplier >= 0 and every residual == 0 up to rounding.
    """
    params = validate_sbm(params)
    caps = np.minimum(params.W, 1.0 - params.W)
    if np.any(alloc.dstar > caps + atol) or np.any(alloc.dstar < -atol):
        raise ValueError("allocation exceeds its caps")
    return _certificate(caps, np.outer(params.p, params.p), alloc.dstar, alloc.mu, atol)


def er_kkt_certificate(params, alloc, atol=1e-12):
    """KKT certificate for an independent-edge allocation (unit weights)."""
    params = validate_inhom_er(params)
    caps = np.minimum(params.edge_probs, 1.0 - params.edge_probs)
    if np.any(alloc.d > caps + atol) or np.any(alloc.d < -atol):
        raise ValueError("allocation exceeds its caps")
    return _certificate(caps, np.ones_like(caps), alloc.d, alloc.lam, atol)
