"""Closed-form rate-distortion evaluators and curve generation.

Rates are in bits, distortions in expected edge flips per graph. Each
evaluator pairs an edge entropy with the water-filled allocation: the rate
is the entropy left after spending h(d) bits per pair on the optimal
distortions d.
"""

from dataclasses import dataclass

import numpy as np

from .models import (
    ErParams,
    InhomErParams,
    SbmParams,
    pair_count,
    shannon_entropy,
    validate_er,
    validate_inhom_er,
    validate_sbm,
)
from .numerics import binary_entropy, binary_entropy_values, entropy_matrix, quadratic_form
from .waterfill import (
    InfeasibleDistortionError,
    er_distortion_boundary,
    sbm_distortion_boundary,
    solve_er_waterfill,
    solve_sbm_waterfill,
)


@dataclass(frozen=True)
class RdCurvePoint:
    """One point of a rate-distortion curve.

    distortion_abs counts expected edge flips per graph; distortion_per_edge
    is the same budget divided by C(n,2). water_level is the common level mu
    of the allocation behind the rate (the per-edge distortion itself for the
    homogeneous model).
    """

    distortion_abs: float
    distortion_per_edge: float
    rate_bits: float
    water_level: float


@dataclass(frozen=True)
class RateInterval:
    """Bracket on a rate known only up to the label entropy."""

    lower: float
    upper: float


def distortion_boundary(params):
    """Budget beyond which the rate is zero, for any supported model."""
    if isinstance(params, SbmParams):
        return sbm_distortion_boundary(params)
    if isinstance(params, ErParams):
        params = validate_er(params)
        return pair_count(params.n) * min(params.p, 1.0 - params.p)
    if isinstance(params, InhomErParams):
        return er_distortion_boundary(params)
    raise TypeError(f"unsupported parameter type {type(params).__name__}")


def sbm_conditional_rdf(params, D):
    """Rate-distortion function of the graph given the labels.

    C(n,2) sum_{l,m} p_l p_m (h(w_lm) - h(d*_lm)) with the water-filled
    allocation d*. Budgets at or past the boundary report rate exactly 0.
    """
    params = validate_sbm(params)
    boundary = sbm_distortion_boundary(params)
    D = float(D)
    # min() keeps infeasible negatives for the allocator to reject
    alloc = solve_sbm_waterfill(params, min(D, boundary))
    D = max(D, 0.0)
    if D >= boundary:
        rate = 0.0
    else:
        gap = entropy_matrix(params.W) - binary_entropy_values(alloc.dstar)
        rate = max(pair_count(params.n) * quadratic_form(params.p, gap), 0.0)
    return RdCurvePoint(
        distortion_abs=D,
        distortion_per_edge=D / pair_count(params.n),
        rate_bits=rate,
        water_level=alloc.mu,
    )


def sbm_rdf_interval(params, D):
    """Bracket on the unconditional rate-distortion function.

    The conditional rate is a lower bound; a code that also ships the labels
    spends at most n H(p) bits more.
    """
    params = validate_sbm(params)
    lower = sbm_conditional_rdf(params, D).rate_bits
    return RateInterval(lower=lower, upper=lower + params.n * shannon_entropy(params.p))


def er_rdf(params, D):
    """Rate-distortion function C(n,2) (h(p) - h(D/C(n,2))) of the homogeneous model."""
    params = validate_er(params)
    m = pair_count(params.n)
    cap = min(params.p, 1.0 - params.p)
    boundary = m * cap
    D = float(D)
    if D < -1e-12 * max(1.0, boundary):
        raise InfeasibleDistortionError(D, boundary)
    D = max(D, 0.0)
    per_edge = D / m
    if D >= boundary:
        rate, level = 0.0, cap
    else:
        rate = max(m * (binary_entropy(params.p) - binary_entropy(per_edge)), 0.0)
        level = per_edge
    return RdCurvePoint(
        distortion_abs=D, distortion_per_edge=per_edge, rate_bits=rate, water_level=level
    )


def inhomogeneous_er_rdf(params, D):
    """Rate-distortion function sum_{i<j} (h(p_ij) - h(d_ij)) for independent edges."""
    params = validate_inhom_er(params)
    boundary = er_distortion_boundary(params)
    D = float(D)
    alloc = solve_er_waterfill(params, min(D, boundary))
    D = max(D, 0.0)
    if D >= boundary:
        rate = 0.0
    else:
        gap = binary_entropy_values(params.edge_probs) - binary_entropy_values(alloc.d)
        rate = max(float(gap.sum()), 0.0)
    return RdCurvePoint(
        distortion_abs=D,
        distortion_per_edge=D / pair_count(params.n),
        rate_bits=rate,
        water_level=alloc.lam,
    )


def rd_point(params, D):
    """Evaluate the curve of any supported model at one budget."""
    if isinstance(params, SbmParams):
        return sbm_conditional_rdf(params, D)
    if isinstance(params, ErParams):
        return er_rdf(params, D)
    if isinstance(params, InhomErParams):
        return inhomogeneous_er_rdf(params, D)
    raise TypeError(f"unsupported parameter type {type(params).__name__}")


def rdf_curve(params, grid=None, points=200):
    """Evaluate the curve on a distortion grid.

    Without an explicit grid, points values are spaced evenly from 0 to the
    distortion boundary. An explicit grid must be nonnegative and sorted
    ascending; values past the boundary are allowed and report rate 0.
    """
    if grid is None:
        points = int(points)
        if points < 1:
            raise ValueError(f"need at least one grid point, got {points}")
        grid = np.linspace(0.0, distortion_boundary(params), points)
    else:
        grid = np.asarray(grid, dtype=float)
        if grid.ndim != 1 or grid.size == 0:
            raise ValueError("grid must be a nonempty 1-D sequence")
        if not np.all(np.isfinite(grid)) or grid.min() < 0.0:
            raise ValueError("grid values must be finite and nonnegative")
        if np.any(np.diff(grid) < 0.0):
            raise ValueError("grid must be sorted ascending")
    return [rd_point(params, D) for D in grid]
