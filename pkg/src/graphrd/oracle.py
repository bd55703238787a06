"""Numerical rate-distortion oracle, independent of the closed forms.

A slope-parameterized Blahut-Arimoto inner loop minimizes rate + slope *
distortion over test channels of a finite source; an outer bisection on the
slope hits a requested distortion. The joint oracle treats all edges of a
small graph as one product source; the conditional oracle additionally
averages over every label vector at a common slope, which is what ties the
per-label-pair problems into a single budget. Alphabets grow as 2^edges, so
both oracles refuse instances beyond a few nodes.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .models import pair_arrays, pair_count, validate_sbm
from .numerics import LN2, as_prob_vector
from .waterfill import InfeasibleDistortionError, sbm_distortion_boundary

# The joint alphabet is 2^m; past six edges the certification value of the
# oracle no longer justifies the cost.
MAX_ORACLE_EDGES = 6
MAX_ORACLE_NODES = 4
MAX_ORACLE_COMMUNITIES = 2

# Slopes above this pin the distortion to ~1e-28; ample for any target.
_SLOPE_HI = 64.0
_MAX_BISECT = 200


class InstanceTooLargeError(ValueError):
    """Instance exceeds the oracle's enumeration limits."""


@dataclass(frozen=True)
class DiscreteRdProblem:
    """Finite rate-distortion problem: source law and a distortion matrix.

    distortion[x, y] is the cost of reproducing source letter x as y; the
    reproduction alphabet is the matrix's column index.
    """

    source_probs: np.ndarray
    distortion: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "source_probs", np.asarray(self.source_probs, dtype=float))
        object.__setattr__(self, "distortion", np.asarray(self.distortion, dtype=float))


@dataclass(frozen=True)
class OracleResult:
    """Converged oracle output at one curve point.

    iterations counts inner sweeps for blahut_arimoto and outer slope
    evaluations for the bisecting oracles. crossovers (conditional oracle
    only) holds the per-label-pair flip probabilities recovered from the
    optimizing channels.
    """

    rate_bits: float
    achieved_distortion: float
    iterations: int
    converged: bool
    crossovers: np.ndarray | None = None


def _logsumexp(a, axis):
    m = np.max(a, axis=axis, keepdims=True)
    out = m + np.log(np.sum(np.exp(a - m), axis=axis, keepdims=True))
    return np.squeeze(out, axis=axis)


def _warm_init(log_q):
    """Reusable start point from a converged marginal.

    Floors very dead reproduction letters so they can revive in a few sweeps
    if the new slope wants them back; the lifted mass is ~1e-26 per letter.
    """
    lq = np.maximum(log_q, -60.0)
    return lq - _logsumexp(lq, axis=0)


def _ba_core(p, d, slope, tol, max_iter, on_sweep=None, init_log_q=None):
    """Alternating minimization in the log domain.

    Returns (rate_bits, distortion, sweeps, converged, channel, log_q). The
    reported rate is the mutual information of the final channel, so the
    (rate, distortion) pair is self-consistent whether or not the sweep
    limit hit. Convergence needs the duality certificate, not just a settled
    rate: each sweep multiplies marginal mass y by a factor c_y, and
    max_y log c_y bounds the objective gap, so a reproduction letter still
    growing back from near-zero mass blocks the certificate even while the
    rate looks flat.
    """
    log_p = np.log(p)
    tilt = -slope * d
    mhat = d.shape[1]
    log_q = np.full(mhat, -math.log(mhat)) if init_log_q is None else init_log_q.copy()
    rate_prev = math.inf
    rate_bits = dist = 0.0
    converged = False
    sweeps = 0
    T = np.zeros_like(d)
    for sweeps in range(1, max_iter + 1):
        log_T = tilt + log_q[None, :]
        log_T -= _logsumexp(log_T, axis=1)[:, None]
        T = np.exp(log_T)
        log_q_next = _logsumexp(log_p[:, None] + log_T, axis=0)
        gap_nats = float(np.max(log_q_next - log_q))
        log_q = log_q_next
        dist = float(p @ (T * d).sum(axis=1))
        rate_nats = float(p @ (T * (log_T - log_q[None, :])).sum(axis=1))
        rate_bits = rate_nats / LN2
        if on_sweep is not None:
            on_sweep(rate_bits, dist, rate_bits + slope * dist / LN2)
        if gap_nats < tol * LN2 and abs(rate_bits - rate_prev) < tol:
            converged = True
            break
        rate_prev = rate_bits
    return max(rate_bits, 0.0), dist, sweeps, converged, T, log_q


def blahut_arimoto(problem, slope, tol=1e-10, max_iter=10000, on_sweep=None):
    """Curve point of a finite source at a fixed slope.

    Minimizes rate + slope * distortion (slope in nats per distortion unit,
    nonnegative): slope 0 returns the rate-zero end, large slopes approach
    lossless. Convergence is declared when the duality certificate puts the
    objective within tol bits of optimal and the rate has settled to the same
    tolerance. on_sweep, if given, receives (rate_bits, distortion,
    objective_bits) after every sweep; the objective never increases.
    """
    p = as_prob_vector(problem.source_probs)
    d = problem.distortion
    if d.ndim != 2 or d.shape[0] != p.size or d.shape[1] == 0:
        raise ValueError(f"distortion matrix shape {d.shape} does not fit {p.size} letters")
    if not np.all(np.isfinite(d)) or d.min() < 0.0:
        raise ValueError("distortion matrix must be finite and nonnegative")
    slope = float(slope)
    if not 0.0 <= slope < math.inf:
        raise ValueError(f"slope must be finite and nonnegative, got {slope!r}")
    keep = p > 0.0
    rate_bits, dist, sweeps, converged, _, _ = _ba_core(
        p[keep], d[keep], slope, tol, int(max_iter), on_sweep
    )
    return OracleResult(
        rate_bits=rate_bits,
        achieved_distortion=dist,
        iterations=sweeps,
        converged=converged,
    )


def _bit_table(m):
    states = np.arange(2**m)
    return (states[:, None] >> np.arange(m)) & 1


def product_source_problem(edge_probs):
    """Product Bernoulli source over {0,1}^m with Hamming distortion.

    Letter x has probability prod_e p_e^{x_e} (1-p_e)^{1-x_e}; the distortion
    between two letters counts differing coordinates.
    """
    probs = np.asarray(edge_probs, dtype=float)
    if probs.ndim != 1 or probs.size == 0:
        raise ValueError("edge_probs must be a nonempty 1-D sequence")
    m = probs.size
    if m > MAX_ORACLE_EDGES:
        raise InstanceTooLargeError(
            f"oracle handles at most {MAX_ORACLE_EDGES} edges, got {m}"
        )
    bits = _bit_table(m)
    p = np.prod(np.where(bits == 1, probs, 1.0 - probs), axis=1)
    ham = np.count_nonzero(bits[:, None, :] != bits[None, :, :], axis=2).astype(float)
    return DiscreteRdProblem(source_probs=p, distortion=ham)


def _coordinate_flips(p, T, m):
    """Per-coordinate disagreement probabilities of a channel on {0,1}^m."""
    bits = _bit_table(m)
    flips = np.empty(m)
    for e in range(m):
        diff = bits[:, None, e] != bits[None, :, e]
        flips[e] = float(p @ (T * diff).sum(axis=1))
    return flips


def _bisect_slope(evaluate, target, tol):
    """Find a slope whose distortion matches target; distortion falls in slope.

    evaluate(slope) returns any object with achieved_distortion. Returns the
    matched evaluation and the number of evaluations made.
    """
    lo, hi = 0.0, _SLOPE_HI
    evals = 0
    best = None
    for _ in range(_MAX_BISECT):
        mid = 0.5 * (lo + hi) if evals else 0.0
        res = evaluate(mid)
        evals += 1
        if best is None or abs(res.achieved_distortion - target) < abs(
            best.achieved_distortion - target
        ):
            best = res
        if abs(res.achieved_distortion - target) <= tol:
            return res, evals
        if res.achieved_distortion > target:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-13:
            break
    return best, evals


def joint_graph_rdf_oracle(edge_probs, D, tol=1e-9, ba_tol=1e-11, max_iter=20000):
    """Numerically evaluate R(D) of independent edges as one joint source.

    No product structure is assumed: the oracle works on the full 2^m
    alphabet, so agreement with the per-edge closed form is evidence, not
    construction. Requires every probability strictly inside (0, 1).
    """
    probs = np.asarray(edge_probs, dtype=float)
    if probs.ndim != 1 or probs.size == 0:
        raise ValueError("edge_probs must be a nonempty 1-D sequence")
    if probs.min() <= 0.0 or probs.max() >= 1.0:
        raise ValueError("oracle requires edge probabilities strictly inside (0, 1)")
    problem = product_source_problem(probs)
    caps = np.minimum(probs, 1.0 - probs)
    boundary = float(caps.sum())
    slack = 1e-12 * max(1.0, boundary)
    D = float(D)
    if not -slack <= D <= boundary + slack:
        raise InfeasibleDistortionError(D, boundary)
    D = min(max(D, 0.0), boundary)
    p_letters = as_prob_vector(problem.source_probs)
    state = {"log_q": None}

    def evaluate(slope):
        if slope == 0.0:
            # parametric limit s -> 0+: the reproduction collapses to the
            # modal letter of each coordinate, so the rate is zero and each
            # coordinate flips with probability min(p, 1-p)
            return OracleResult(
                rate_bits=0.0, achieved_distortion=boundary, iterations=0, converged=True
            )
        rate, dist, sweeps, conv, _, log_q = _ba_core(
            p_letters,
            problem.distortion,
            slope,
            ba_tol,
            int(max_iter),
            init_log_q=state["log_q"],
        )
        state["log_q"] = _warm_init(log_q)
        return OracleResult(
            rate_bits=rate, achieved_distortion=dist, iterations=sweeps, converged=conv
        )

    res, evals = _bisect_slope(evaluate, D, tol)
    matched = abs(res.achieved_distortion - D) <= tol
    return OracleResult(
        rate_bits=res.rate_bits,
        achieved_distortion=res.achieved_distortion,
        iterations=evals,
        converged=res.converged and matched,
    )


@dataclass(frozen=True)
class _ConditionalEval:
    rate_bits: float
    achieved_distortion: float
    converged: bool
    flip_num: np.ndarray
    flip_den: np.ndarray


def conditional_sbm_oracle(params, D, tol=1e-9, ba_tol=1e-11, max_iter=20000):
    """Numerically evaluate the conditional R(D) of a tiny block model.

    Enumerates every label vector, solves each induced product source at a
    common slope, and averages rates and distortions under the label law;
    bisection on the slope then meets the budget, mirroring how a single
    water level serves every label pair. Also recovers the per-label-pair
    flip probabilities of the optimizing channels (crossovers, k x k, NaN
    for pairs no label vector realizes).
    """
    params = validate_sbm(params)
    n, k = params.n, params.k
    if n > MAX_ORACLE_NODES or k > MAX_ORACLE_COMMUNITIES:
        raise InstanceTooLargeError(
            f"oracle handles at most n={MAX_ORACLE_NODES} nodes and "
            f"k={MAX_ORACLE_COMMUNITIES} communities, got n={n}, k={k}"
        )
    if params.W.min() <= 0.0 or params.W.max() >= 1.0:
        raise ValueError("oracle requires edge probabilities strictly inside (0, 1)")
    boundary = sbm_distortion_boundary(params)
    slack = 1e-12 * max(1.0, boundary)
    D = float(D)
    if not -slack <= D <= boundary + slack:
        raise InfeasibleDistortionError(D, boundary)
    D = min(max(D, 0.0), boundary)

    iu, ju = pair_arrays(n)
    m = pair_count(n)
    vectors = []
    for x in itertools.product(range(k), repeat=n):
        weight = float(np.prod(params.p[list(x)]))
        if weight == 0.0:
            continue
        x = np.asarray(x)
        vectors.append((weight, x, params.W[x[iu], x[ju]]))

    problems = {}
    for _, _, eprobs in vectors:
        key = tuple(sorted(eprobs.tolist()))
        if key not in problems:
            prob = product_source_problem(np.asarray(key))
            problems[key] = (prob, as_prob_vector(prob.source_probs))
    warm = {}

    def evaluate(slope):
        cache = {}
        rates, dists = [], []
        converged = True
        num = np.zeros((k, k))
        den = np.zeros((k, k))
        for weight, x, eprobs in vectors:
            key = tuple(sorted(eprobs.tolist()))
            if key not in cache:
                if slope == 0.0:
                    # parametric limit: constant modal-letter reproduction
                    caps_x = np.minimum(np.asarray(key), 1.0 - np.asarray(key))
                    cache[key] = (0.0, float(caps_x.sum()), True, dict(zip(key, caps_x)))
                else:
                    problem, p_letters = problems[key]
                    rate, dist, _, conv, T, log_q = _ba_core(
                        p_letters,
                        problem.distortion,
                        slope,
                        ba_tol,
                        int(max_iter),
                        init_log_q=warm.get(key),
                    )
                    warm[key] = _warm_init(log_q)
                    flips = _coordinate_flips(p_letters, T, m)
                    cache[key] = (rate, dist, conv, dict(zip(key, flips)))
            rate, dist, conv, flip_by_prob = cache[key]
            rates.append(weight * rate)
            dists.append(weight * dist)
            converged &= conv
            a = np.minimum(x[iu], x[ju])
            b = np.maximum(x[iu], x[ju])
            for e in range(m):
                num[a[e], b[e]] += weight * flip_by_prob[eprobs[e]]
                den[a[e], b[e]] += weight
        return _ConditionalEval(
            rate_bits=math.fsum(rates),
            achieved_distortion=math.fsum(dists),
            converged=converged,
            flip_num=num,
            flip_den=den,
        )

    res, evals = _bisect_slope(evaluate, D, tol)
    matched = abs(res.achieved_distortion - D) <= tol
    cross = np.full((k, k), math.nan)
    pos = res.flip_den > 0.0
    cross[pos] = res.flip_num[pos] / res.flip_den[pos]
    upper = np.triu_indices(k, k=1)
    cross[upper[1], upper[0]] = cross[upper]
    return OracleResult(
        rate_bits=res.rate_bits,
        achieved_distortion=res.achieved_distortion,
        iterations=evals,
        converged=res.converged and matched,
        crossovers=cross,
    )
