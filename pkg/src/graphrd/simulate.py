"""Sampling, the achievability test channel, and its Monte Carlo check.

All randomness is counter-based: a (seed, trial, stream) triple names a
Philox generator outright, so every trial's draws are fixed by the seed
alone. Worker count and execution order cannot change the result, which is
what makes the parallel path safe to compare byte for byte against the
serial one.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .models import (
    Graph,
    LabelVector,
    pair_arrays,
    pair_count,
    pair_index,
    validate_labels,
    validate_sbm,
)
from .numerics import PROB_TOL, as_sym_matrix
from .rdf import sbm_conditional_rdf
from .waterfill import solve_sbm_waterfill

# Stream ids keep the three draw purposes on disjoint counter prefixes.
STREAM_LABELS = 0
STREAM_EDGES = 1
STREAM_CHANNEL = 2


@dataclass(frozen=True)
class RngSpec:
    """Root of all randomness for one experiment.

    Draw u for edge e of trial t on stream s lives at Philox key
    (seed, s) and counter t * 2^128 + e: a pure function of those four
    numbers. The purpose sits in the key's high word and the trial two
    counter words up, so no stream can run into another.
    """

    seed: int

    def __post_init__(self):
        seed = int(self.seed)
        if not 0 <= seed < 2**64:
            raise ValueError(f"seed must be a 64-bit nonnegative integer, got {seed}")
        object.__setattr__(self, "seed", seed)

    def stream(self, trial, stream_id):
        """Generator for one purpose within one trial."""
        trial = int(trial)
        if trial < 0:
            raise ValueError(f"trial must be nonnegative, got {trial}")
        bg = np.random.Philox(key=self.seed + (int(stream_id) << 64), counter=[0, 0, trial, 0])
        return np.random.Generator(bg)


@dataclass(frozen=True)
class TestChannel:
    """Per-label-pair reproduction channel achieving an allocation d*.

    Backward, the channel flips each reproduced edge with probability d*;
    forward (the direction that can be sampled) the reproduction is present
    with probability prob_one_given_one on an edge and prob_one_given_zero
    on a non-edge. marginal_one is the reproduction's edge probability.
    """

    crossover: np.ndarray
    marginal_one: np.ndarray
    prob_one_given_one: np.ndarray
    prob_one_given_zero: np.ndarray

    @classmethod
    def from_allocation(cls, W, dstar):
        W = as_sym_matrix(W, what="edge probability matrix")
        d = np.asarray(dstar, dtype=float)
        if d.shape != W.shape:
            raise ValueError(f"allocation shape {d.shape} does not match W {W.shape}")
        caps = np.minimum(W, 1.0 - W)
        if np.any(d < -PROB_TOL) or np.any(d > caps + PROB_TOL):
            raise ValueError("allocation exceeds min(w, 1-w) for some pair")
        d = np.clip(d, 0.0, caps)
        # q1 solves w = q1 (1-d) + (1-q1) d; at d = 1/2 the reproduction is
        # independent of the edge and any marginal works, 1/2 by convention
        half = np.isclose(d, 0.5, rtol=0.0, atol=1e-15)
        q1 = np.where(half, 0.5, (W - d) / np.where(half, 1.0, 1.0 - 2.0 * d))
        q1 = _checked_unit(q1, "reproduction marginal")
        # Bayes inversion of the backward flip channel; degenerate w needs no
        # special case: w = 0 gives q1 = 0 and w = 1 gives q1 = 1, so the
        # reproduction copies the edge
        with np.errstate(divide="ignore", invalid="ignore"):
            p11 = np.where(W > 0.0, (1.0 - d) * q1 / W, 0.0)
            p10 = np.where(W < 1.0, d * q1 / (1.0 - W), 1.0)
        return cls(
            crossover=d,
            marginal_one=q1,
            prob_one_given_one=_checked_unit(p11, "channel probability"),
            prob_one_given_zero=_checked_unit(p10, "channel probability"),
        )


def _checked_unit(a, what):
    if np.any(a < -PROB_TOL) or np.any(a > 1.0 + PROB_TOL) or not np.all(np.isfinite(a)):
        raise ValueError(f"{what} outside [0, 1]")
    return np.clip(a, 0.0, 1.0)


def sample_labels(params, rng, trial=0):
    """Draw one label vector from the community prior."""
    params = validate_sbm(params)
    gen = rng.stream(trial, STREAM_LABELS)
    cum = np.cumsum(params.p)
    cum[-1] = 1.0  # guard against rounding at the top end
    labels = np.searchsorted(cum, gen.random(params.n), side="right")
    return LabelVector(np.minimum(labels, params.k - 1))


def sample_graph(labels, W, rng, trial=0):
    """Draw one graph given labels: each pair independently with its w."""
    W = as_sym_matrix(W, what="edge probability matrix")
    lab = labels.labels
    if lab.size and (lab.min() < 0 or lab.max() >= W.shape[0]):
        raise ValueError(f"label outside [0, {W.shape[0] - 1}]")
    iu, ju = pair_arrays(lab.size)
    probs = W[lab[iu], lab[ju]]
    u = rng.stream(trial, STREAM_EDGES).random(probs.size)
    return Graph(n=lab.size, edges=u < probs)


def apply_test_channel(graph, labels, alloc, W, rng, trial=0):
    """Push one graph through the forward test channel of an allocation."""
    channel = TestChannel.from_allocation(W, alloc.dstar)
    lab = labels.labels
    if lab.size != graph.n:
        raise ValueError(f"labels cover {lab.size} nodes but graph has {graph.n}")
    iu, ju = pair_arrays(graph.n)
    p11 = channel.prob_one_given_one[lab[iu], lab[ju]]
    p10 = channel.prob_one_given_zero[lab[iu], lab[ju]]
    u = rng.stream(trial, STREAM_CHANNEL).random(p11.size)
    edges = np.where(graph.edges, u < p11, u < p10)
    return Graph(n=graph.n, edges=edges)


def hamming_distortion(a, b):
    """Number of pair slots on which two graphs disagree."""
    if a.n != b.n:
        raise ValueError(f"graphs on {a.n} and {b.n} nodes are not comparable")
    return int(np.count_nonzero(a.edges != b.edges))


@dataclass(frozen=True)
class SimReport:
    """Monte Carlo summary of the test channel at one budget.

    pair_flip_rate and pair_exposures break the disagreements down by label
    pair (k x k, symmetric; rate is NaN for pairs never observed).
    """

    trials: int
    mean_distortion: float
    stderr: float
    target_distortion: float
    analytic_rate: float
    pair_flip_rate: np.ndarray | None = None
    pair_exposures: np.ndarray | None = None


def monte_carlo_distortion(params, D, trials, rng, workers=1, pair_stats=False):
    """Estimate the achieved distortion of the test channel at budget D.

    Each trial samples labels and a graph, pushes the graph through the
    channel, and records the Hamming distortion. Trials write into
    preallocated slots indexed by trial number, so any worker count yields
    identical output.
    """
    params = validate_sbm(params)
    trials = int(trials)
    if trials < 1:
        raise ValueError(f"need at least one trial, got {trials}")
    workers = int(workers)
    if workers < 1:
        raise ValueError(f"need at least one worker, got {workers}")
    alloc = solve_sbm_waterfill(params, D)
    point = sbm_conditional_rdf(params, D)
    k = params.k
    iu, ju = pair_arrays(params.n)
    dists = np.empty(trials)
    flips = np.zeros((trials, k * k)) if pair_stats else None
    counts = np.zeros((trials, k * k)) if pair_stats else None

    def run(trial):
        labels = sample_labels(params, rng, trial=trial)
        graph = sample_graph(labels, params.W, rng, trial=trial)
        repro = apply_test_channel(graph, labels, alloc, params.W, rng, trial=trial)
        diff = graph.edges != repro.edges
        dists[trial] = np.count_nonzero(diff)
        if pair_stats:
            lab = labels.labels
            a = np.minimum(lab[iu], lab[ju])
            b = np.maximum(lab[iu], lab[ju])
            idx = a * k + b
            flips[trial] = np.bincount(idx, weights=diff.astype(float), minlength=k * k)
            counts[trial] = np.bincount(idx, minlength=k * k)

    if workers == 1:
        for trial in range(trials):
            run(trial)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run, range(trials)))

    mean = float(dists.mean())
    stderr = float(dists.std(ddof=1) / math.sqrt(trials)) if trials > 1 else math.nan
    rate_by_pair = exposures = None
    if pair_stats:
        total_flips = flips.sum(axis=0).reshape(k, k)
        total_counts = counts.sum(axis=0).reshape(k, k)
        upper = np.triu_indices(k)
        total_flips[upper[1], upper[0]] = total_flips[upper]
        total_counts[upper[1], upper[0]] = total_counts[upper]
        rate_by_pair = np.where(
            total_counts > 0, total_flips / np.maximum(total_counts, 1.0), math.nan
        )
        exposures = total_counts.astype(np.int64)
    return SimReport(
        trials=trials,
        mean_distortion=mean,
        stderr=stderr,
        target_distortion=float(point.distortion_abs),
        analytic_rate=point.rate_bits,
        pair_flip_rate=rate_by_pair,
        pair_exposures=exposures,
    )


def write_graph(graph, path):
    """Write a graph as text: first line n, then one "i j" line per edge.

    Node ids are 0-based and each edge has i < j; edges appear in pair_index
    order.
    """
    iu, ju = pair_arrays(graph.n)
    lines = [str(graph.n)]
    lines.extend(f"{iu[e]} {ju[e]}" for e in np.flatnonzero(graph.edges))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_graph(path):
    """Read a graph written by write_graph; malformed input raises."""
    with open(path) as fh:
        raw = [line.strip() for line in fh]
    rows = [line for line in raw if line]
    if not rows:
        raise ValueError("empty graph file")
    try:
        n = int(rows[0])
    except ValueError:
        raise ValueError(f"first line must be the node count, got {rows[0]!r}") from None
    if n < 1:
        raise ValueError(f"node count must be positive, got {n}")
    edges = np.zeros(pair_count(n), dtype=bool)
    last = -1
    for line in rows[1:]:
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"expected 'i j', got {line!r}")
        try:
            i, j = int(parts[0]), int(parts[1])
        except ValueError:
            raise ValueError(f"expected 'i j', got {line!r}") from None
        idx = pair_index(i, j, n)
        if idx <= last:
            raise ValueError(f"edges out of pair_index order at ({i}, {j})")
        last = idx
        edges[idx] = True
    return Graph(n=n, edges=edges)


def write_labels(labels, path):
    """Write a label vector as text, one 1-based community id per line."""
    with open(path, "w") as fh:
        fh.write("\n".join(str(int(v) + 1) for v in labels.labels) + "\n")


def read_labels(path, params=None):
    """Read a label file (1-based ids); validates against params when given."""
    with open(path) as fh:
        rows = [line.strip() for line in fh if line.strip()]
    try:
        values = [int(row) for row in rows]
    except ValueError:
        raise ValueError("label file must hold one integer per line") from None
    if any(v < 1 for v in values):
        raise ValueError("community ids are 1-based")
    labels = LabelVector(np.asarray(values, dtype=np.int64) - 1)
    if params is not None:
        labels = validate_labels(labels, params)
    return labels
