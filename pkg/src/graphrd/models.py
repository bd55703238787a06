"""Graph source parameters, validation, pair indexing, and edge entropies."""

from dataclasses import dataclass

import numpy as np

from .numerics import (
    as_prob_vector,
    as_sym_matrix,
    binary_entropy,
    binary_entropy_values,
    clamp_unit,
    entropy_matrix,
    quadratic_form,
)


def pair_count(n):
    """Number of unordered node pairs."""
    return n * (n - 1) // 2


def pair_index(i, j, n):
    """Flat index of the unordered pair {i, j} with 0 <= i < j < n.

    Pairs are enumerated row-major over the upper triangle, i.e. in the same
    order as np.triu_indices(n, k=1).
    """
    if not (isinstance(i, (int, np.integer)) and isinstance(j, (int, np.integer))):
        raise ValueError(f"pair indices must be integers, got ({i!r}, {j!r})")
    if not 0 <= i < j < n:
        raise ValueError(f"invalid pair ({i}, {j}) for n={n}")
    return i * n - i * (i + 1) // 2 + (j - i - 1)


def pair_arrays(n):
    """Row and column index arrays of all pairs, in pair_index order."""
    return np.triu_indices(n, k=1)


@dataclass(frozen=True)
class SbmParams:
    """Block model on n nodes: community prior p and edge probability matrix W."""

    n: int
    p: np.ndarray
    W: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "p", np.asarray(self.p, dtype=float))
        object.__setattr__(self, "W", np.asarray(self.W, dtype=float))

    @property
    def k(self):
        return self.p.shape[0] if self.p.ndim else 0


@dataclass(frozen=True)
class ErParams:
    """Homogeneous model on n nodes with a common edge probability p."""

    n: int
    p: float


@dataclass(frozen=True)
class InhomErParams:
    """Independent-edge model with one probability per pair.

    edge_probs is a dense length-pair_count(n) array in pair_index order.
    """

    n: int
    edge_probs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "edge_probs", np.asarray(self.edge_probs, dtype=float))

    def edge_prob(self, i, j):
        return float(self.edge_probs[pair_index(i, j, self.n)])


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph as a dense edge indicator in pair_index order."""

    n: int
    edges: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "edges", np.asarray(self.edges, dtype=bool))
        if self.edges.shape != (pair_count(self.n),):
            raise ValueError(
                f"graph on {self.n} nodes needs {pair_count(self.n)} edge slots, "
                f"got {self.edges.shape}"
            )

    def edge_count(self):
        return int(np.count_nonzero(self.edges))


@dataclass(frozen=True)
class LabelVector:
    """Community assignment per node, stored 0-based."""

    labels: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "labels", np.asarray(self.labels, dtype=np.int64))

    @property
    def n(self):
        return self.labels.shape[0]


def validate_sbm(params):
    """Check every SbmParams invariant; returns a canonicalized copy."""
    n = int(params.n)
    if n < 2:
        raise ValueError(f"node count must be at least 2, got {n}")
    p = as_prob_vector(params.p)
    W = as_sym_matrix(params.W, what="edge probability matrix")
    if W.shape[0] != p.size:
        raise ValueError(f"prior has {p.size} communities but W is {W.shape[0]}x{W.shape[1]}")
    return SbmParams(n=n, p=p, W=W)


def validate_er(params):
    n = int(params.n)
    if n < 2:
        raise ValueError(f"node count must be at least 2, got {n}")
    return ErParams(n=n, p=clamp_unit(params.p, what="edge probability"))


def validate_inhom_er(params):
    n = int(params.n)
    if n < 2:
        raise ValueError(f"node count must be at least 2, got {n}")
    probs = np.asarray(params.edge_probs, dtype=float)
    if probs.shape != (pair_count(n),):
        raise ValueError(
            f"need {pair_count(n)} edge probabilities for n={n}, got {probs.shape}"
        )
    if not np.all(np.isfinite(probs)) or probs.min() < -1e-12 or probs.max() > 1.0 + 1e-12:
        raise ValueError("edge probability outside [0, 1]")
    return InhomErParams(n=n, edge_probs=np.clip(probs, 0.0, 1.0))


def validate_labels(labels, params):
    """Check a label vector against block model parameters."""
    params = validate_sbm(params)
    lab = np.asarray(labels.labels if isinstance(labels, LabelVector) else labels)
    if lab.shape != (params.n,):
        raise ValueError(f"expected {params.n} labels, got shape {lab.shape}")
    if lab.size and (lab.min() < 0 or lab.max() >= params.k):
        raise ValueError(f"label outside [0, {params.k - 1}]")
    return LabelVector(lab)


def shannon_entropy(p):
    """Entropy of a finite distribution in bits, with 0 log 0 = 0."""
    p = as_prob_vector(p)
    pos = p[p > 0.0]
    return float(-(pos * np.log2(pos)).sum())


def inhomogeneous_er_entropy(params):
    """Graph entropy sum_{i<j} h(p_ij) in bits for independent edges."""
    params = validate_inhom_er(params)
    return float(binary_entropy_values(params.edge_probs).sum())


def er_entropy(params):
    """Graph entropy C(n,2) h(p) in bits for a common edge probability."""
    params = validate_er(params)
    return pair_count(params.n) * binary_entropy(params.p)


def sbm_conditional_entropy(params):
    """Entropy of the graph given the labels: C(n,2) p^T h(W) p in bits."""
    params = validate_sbm(params)
    return pair_count(params.n) * quadratic_form(params.p, entropy_matrix(params.W))


def sbm_entropy_interval(params):
    """Bracket on the unconditional graph entropy in bits.

    The conditional entropy is a lower bound; revealing the labels costs at
    most n H(p) bits, giving the upper end.
    """
    params = validate_sbm(params)
    lower = sbm_conditional_entropy(params)
    return lower, lower + params.n * shannon_entropy(params.p)


def params_from_json(obj):
    """Build model parameters from a JSON-style mapping.

    The mapping's "model" key selects the family: "sbm" needs n, p, W;
    "er" needs n, p; "inhom_er" needs n and p as a dense length-C(n,2)
    array in pair_index order. Extra keys are left for the caller.
    """
    if not isinstance(obj, dict):
        raise ValueError("config must be a JSON object")
    kind = obj.get("model")
    if kind == "sbm":
        missing = [key for key in ("n", "p", "W") if key not in obj]
        if missing:
            raise ValueError(f"sbm config missing {', '.join(missing)}")
        return validate_sbm(SbmParams(n=obj["n"], p=obj["p"], W=obj["W"]))
    if kind == "er":
        missing = [key for key in ("n", "p") if key not in obj]
        if missing:
            raise ValueError(f"er config missing {', '.join(missing)}")
        if not isinstance(obj["p"], (int, float)):
            raise ValueError("er config needs a scalar p")
        return validate_er(ErParams(n=obj["n"], p=obj["p"]))
    if kind == "inhom_er":
        missing = [key for key in ("n", "p") if key not in obj]
        if missing:
            raise ValueError(f"inhom_er config missing {', '.join(missing)}")
        if not isinstance(obj["p"], (list, tuple)):
            raise ValueError("inhom_er config needs p as an array in pair_index order")
        return validate_inhom_er(InhomErParams(n=obj["n"], edge_probs=obj["p"]))
    raise ValueError(f"unknown model {kind!r}; expected sbm, er, or inhom_er")
