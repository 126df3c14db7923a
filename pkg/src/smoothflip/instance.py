"""Weighted graphs, sign configurations, the cut objective and smoothing distributions."""

from collections.abc import Mapping
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import cached_property
from numbers import Real

import numpy as np

from .errors import DomainError, ValidationError


def _is_number(x):
    return isinstance(x, Real) and not isinstance(x, bool)


@dataclass(frozen=True)
class DistributionSpec:
    """Uniform distribution on [lo, hi] inside [-1, 1]; its density is 1/(hi - lo)."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (_is_number(self.lo) and _is_number(self.hi)):
            raise ValidationError("distribution bounds must be real numbers", field="dists")
        if not -1 <= self.lo < self.hi <= 1:
            raise ValidationError(
                f"need -1 <= lo < hi <= 1, got lo={self.lo}, hi={self.hi}", field="dists"
            )

    @property
    def density(self):
        return 1 / (self.hi - self.lo)

    def within_phi(self, phi):
        return self.hi - self.lo >= 1 / phi

    @classmethod
    def for_phi(cls, phi, center=0.0):
        """Interval of width exactly 1/phi around `center`."""
        if phi < 0.5:
            raise ValidationError(f"phi must be at least 1/2 to fit in [-1,1], got {phi}")
        half = 0.5 / phi
        lo, hi = center - half, center + half
        if lo < -1 - 1e-15 or hi > 1 + 1e-15:
            raise ValidationError(f"interval [{lo}, {hi}] leaves [-1, 1]")
        return cls(max(lo, -1.0), min(hi, 1.0))


class Configuration(Mapping):
    """Immutable map node -> +1/-1 over an explicit domain."""

    __slots__ = ("_signs",)

    def __init__(self, signs):
        signs = dict(signs)
        for v, s in signs.items():
            if s not in (1, -1):
                raise ValidationError(f"sign of node {v} must be +1 or -1, got {s!r}")
        self._signs = {int(v): int(s) for v, s in signs.items()}

    @classmethod
    def uniform(cls, nodes, sign=-1):
        return cls({v: sign for v in nodes})

    @classmethod
    def from_list(cls, signs):
        """Signs for nodes 1..len(signs)."""
        return cls({i + 1: s for i, s in enumerate(signs)})

    def __getitem__(self, v):
        try:
            return self._signs[v]
        except KeyError:
            raise DomainError(f"node {v} is outside the configuration domain") from None

    def __iter__(self):
        return iter(sorted(self._signs))

    def __len__(self):
        return len(self._signs)

    def __hash__(self):
        return hash(frozenset(self._signs.items()))

    def __repr__(self):
        return f"Configuration({dict(sorted(self._signs.items()))})"

    @property
    def domain(self):
        return frozenset(self._signs)

    def is_total(self, n):
        return all(v in self._signs for v in range(1, n + 1))

    def require_total(self, n):
        missing = [v for v in range(1, n + 1) if v not in self._signs]
        if missing:
            raise DomainError(f"configuration is partial; missing nodes {missing[:10]}")

    def as_list(self, n):
        self.require_total(n)
        return [self._signs[v] for v in range(1, n + 1)]

    def flipped(self, *nodes):
        signs = dict(self._signs)
        for v in nodes:
            signs[v] = -self[v]
        return Configuration(signs)

    def restrict(self, nodes):
        return Configuration({v: self[v] for v in nodes})

    def negated(self):
        return Configuration({v: -s for v, s in self._signs.items()})


@dataclass(frozen=True)
class WeightedInstance:
    """Undirected graph on nodes 1..n with edge ids in input order.

    `weights` may be None for a bare graph (enough for the arc calculus).
    Weights given as ints or Fractions put the instance in exact mode.
    """

    n: int
    edges: tuple
    weights: tuple = None
    dists: tuple = None
    _index: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 0:
            raise ValidationError(f"n must be a non-negative integer, got {self.n!r}", field="n")
        edges = []
        index = {}
        for e, pair in enumerate(self.edges):
            try:
                u, v = (int(x) for x in pair)
            except (TypeError, ValueError):
                raise ValidationError(f"edge {e} is not a node pair: {pair!r}", field=f"edges[{e}]")
            if u == v:
                raise ValidationError(f"edge {e} is a self-loop on {u}", field=f"edges[{e}]")
            if not (1 <= u <= self.n and 1 <= v <= self.n):
                raise ValidationError(f"edge {e} = ({u},{v}) has an endpoint outside 1..{self.n}",
                                      field=f"edges[{e}]")
            key = (min(u, v), max(u, v))
            if key in index:
                raise ValidationError(f"edge {e} duplicates edge {index[key]}", field=f"edges[{e}]")
            index[key] = e
            edges.append((u, v))
        object.__setattr__(self, "edges", tuple(edges))
        object.__setattr__(self, "_index", index)

        if self.weights is not None:
            weights = tuple(self.weights)
            if len(weights) != len(edges):
                raise ValidationError(f"{len(weights)} weights for {len(edges)} edges", field="weights")
            for e, w in enumerate(weights):
                if not _is_number(w) or not -1 <= w <= 1:
                    raise ValidationError(f"weight {w!r} of edge {e} outside [-1, 1]",
                                          field=f"weights[{e}]")
            object.__setattr__(self, "weights", weights)
        if self.dists is not None:
            dists = tuple(d if isinstance(d, DistributionSpec) else DistributionSpec(*d)
                          for d in self.dists)
            if len(dists) != len(edges):
                raise ValidationError(f"{len(dists)} distributions for {len(edges)} edges",
                                      field="dists")
            object.__setattr__(self, "dists", dists)

    @property
    def m(self):
        return len(self.edges)

    @property
    def is_exact(self):
        return self.weights is not None and all(isinstance(w, (int, Fraction)) for w in self.weights)

    @cached_property
    def incident(self):
        """incident[v] = list of (neighbor, edge id) in edge order; index 0 unused."""
        inc = [[] for _ in range(self.n + 1)]
        for e, (u, v) in enumerate(self.edges):
            inc[u].append((v, e))
            inc[v].append((u, e))
        return inc

    @cached_property
    def neighbor_sets(self):
        return [frozenset(u for u, _ in row) for row in self.incident]

    def neighbors(self, v):
        return self.neighbor_sets[v]

    def has_edge(self, u, v):
        return (min(u, v), max(u, v)) in self._index

    def edge_id(self, u, v):
        try:
            return self._index[(min(u, v), max(u, v))]
        except KeyError:
            raise ValidationError(f"({u},{v}) is not an edge") from None

    def with_weights(self, weights):
        return replace(self, weights=tuple(weights))

    def require_weights(self):
        if self.weights is None:
            raise ValidationError("instance has no weights", field="weights")


def graph(n, edges):
    """Unweighted instance, used wherever only adjacency matters."""
    return WeightedInstance(n, tuple(edges))


def _check_node(inst, v):
    if not isinstance(v, (int, np.integer)) or not 1 <= v <= inst.n:
        raise ValidationError(f"unknown node id {v!r}")


def cut_weight(inst, cfg):
    inst.require_weights()
    cfg.require_total(inst.n)
    total = 0
    for (u, v), w in zip(inst.edges, inst.weights):
        if cfg[u] != cfg[v]:
            total += w
    return total


def flip_gain(inst, cfg, v):
    inst.require_weights()
    _check_node(inst, v)
    sv = cfg[v]
    gain = 0
    for u, e in inst.incident[v]:
        gain += inst.weights[e] * sv * cfg[u]
    return gain


def sample_weights(inst, seed, exact=False):
    """Independent weights drawn from each edge's spec, as a pure function of seed.

    With exact=True the sampled doubles are converted to Fractions without rounding.
    """
    if inst.dists is None:
        raise ValidationError("every edge needs a distribution spec", field="dists")
    rng = np.random.default_rng(seed)
    lo = np.array([d.lo for d in inst.dists], dtype=float)
    hi = np.array([d.hi for d in inst.dists], dtype=float)
    draws = rng.uniform(lo, hi) if len(lo) else np.zeros(0)
    weights = [float(x) for x in draws]
    if exact:
        weights = [Fraction(x) for x in weights]
    return replace(inst, weights=tuple(weights))


def uniform_dists(count, lo=-1.0, hi=1.0):
    spec = DistributionSpec(lo, hi)
    return tuple(spec for _ in range(count))


def complete_edges(n):
    return [(u, v) for u in range(1, n + 1) for v in range(u + 1, n + 1)]


def erdos_renyi_edges(n, p, rng):
    """G(n, p) edges in lexicographic order; `rng` is a numpy Generator."""
    pairs = complete_edges(n)
    keep = rng.random(len(pairs)) < p
    return [pair for pair, k in zip(pairs, keep) if k]


def bounded_degree_edges(n, degree, rng):
    """Random graph with maximum degree `degree`, built by shuffled greedy insertion."""
    pairs = complete_edges(n)
    order = rng.permutation(len(pairs))
    deg = [0] * (n + 1)
    chosen = []
    for idx in order:
        u, v = pairs[idx]
        if deg[u] < degree and deg[v] < degree:
            deg[u] += 1
            deg[v] += 1
            chosen.append((u, v))
    return sorted(chosen)
