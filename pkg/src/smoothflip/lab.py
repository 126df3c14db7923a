"""Monte Carlo checks of the anti-concentration lemma and smoothed-runtime experiments."""

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import DependentVectorsError, ValidationError
from .flip import PivotRule, is_local_optimum, run_flip
from .instance import (
    Configuration,
    DistributionSpec,
    WeightedInstance,
    bounded_degree_edges,
    complete_edges,
    erdos_renyi_edges,
)
from .linalg import dependency

Z99 = 2.5758293035489
CHUNK = 1 << 18


@dataclass(frozen=True)
class MCReport:
    probability: float
    hits: int
    samples: int
    k: int
    phi: float
    eps: float
    bound: float
    half_width: float


def mc_lemma_probability(vectors, dists, eps, samples, seed=0):
    """Empirical Pr[<r_i, X> in [0, eps] for all i] with X_j ~ dists[j] independent."""
    if not eps > 0:
        raise ValidationError("eps must be positive", field="eps")
    if samples < 1:
        raise ValidationError("need at least one sample", field="samples")
    dists = [d if isinstance(d, DistributionSpec) else DistributionSpec(*d) for d in dists]
    rows = [list(v) for v in vectors]
    if not rows or any(len(r) != len(dists) for r in rows):
        raise ValidationError("every vector needs one entry per distribution", field="vectors")
    combo = dependency([{j: x for j, x in enumerate(r) if x} for r in rows])
    if combo is not None:
        raise DependentVectorsError("vectors are linearly dependent", combo)
    R = np.array(rows, dtype=float)
    lo = np.array([d.lo for d in dists])
    hi = np.array([d.hi for d in dists])
    rng = np.random.default_rng(seed)
    hits = 0
    left = samples
    while left:
        size = min(left, CHUNK)
        X = rng.uniform(lo, hi, size=(size, len(dists)))
        Y = X @ R.T
        hits += int(np.count_nonzero(np.all((Y >= 0) & (Y <= eps), axis=1)))
        left -= size
    p = hits / samples
    phi = max(d.density for d in dists)
    k = len(rows)
    return MCReport(p, hits, samples, k, phi, eps, (phi * eps) ** k,
                    Z99 * math.sqrt(p * (1 - p) / samples))


# ---- experiments -------------------------------------------------------------

FAMILIES = ("complete", "erdos-renyi", "bounded-degree")
CSV_COLUMNS = ("family", "n", "phi", "rule", "trials", "max_steps", "mean_steps",
               "q50", "q90", "q99", "timeouts")


@dataclass(frozen=True)
class ExperimentPlan:
    family: str
    sizes: tuple
    phis: tuple
    rule: str = "best"
    trials: int = 10
    base_seed: int = 0
    p: float = 0.5
    degree: int = 3
    step_cap: int = None
    options: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValidationError(f"unknown family {self.family!r}", field="family")
        if not isinstance(self.trials, int) or self.trials < 1:
            raise ValidationError("trials must be at least 1", field="trials")
        if any(not isinstance(n, int) or n < 2 for n in self.sizes):
            raise ValidationError("sizes must be integers >= 2", field="sizes")
        for phi in self.phis:
            DistributionSpec.for_phi(phi)
        PivotRule.parse(self.rule)

    @property
    def cells(self):
        return [(n, phi) for n in self.sizes for phi in self.phis]


def trial_rng(base_seed, cell, trial):
    """Counter-based stream: depends only on (base seed, cell index, trial index)."""
    return np.random.default_rng(np.random.SeedSequence(entropy=base_seed, spawn_key=(cell, trial)))


def smoothed_instance(family, n, phi, rng, p=0.5, degree=3):
    """Random graph of the family; each weight uniform on a width-1/phi interval at a random centre."""
    if family == "complete":
        edges = complete_edges(n)
    elif family == "erdos-renyi":
        edges = erdos_renyi_edges(n, p, rng)
    else:
        edges = bounded_degree_edges(n, degree, rng)
    half = 0.5 / phi
    centres = rng.uniform(-1 + half, 1 - half, size=len(edges)) if half < 1 else np.zeros(len(edges))
    dists = tuple(DistributionSpec.for_phi(phi, float(c)) for c in centres)
    lo = np.array([d.lo for d in dists])
    hi = np.array([d.hi for d in dists])
    weights = rng.uniform(lo, hi) if len(edges) else np.zeros(0)
    return WeightedInstance(n, tuple(edges), tuple(float(w) for w in weights), dists)


def _run_trial(plan, cell, n, phi, trial):
    rng = trial_rng(plan.base_seed, cell, trial)
    inst = smoothed_instance(plan.family, n, phi, rng, plan.p, plan.degree)
    init = Configuration.from_list([1 if b else -1 for b in rng.integers(0, 2, size=n)])
    seed = int(rng.integers(2 ** 63))
    trace = run_flip(inst, init, plan.rule, plan.step_cap, seed)
    if any(not g > 0 for g in trace.gains):
        raise AssertionError("FLIP made a non-improving move")
    if trace.terminated and not is_local_optimum(inst, trace.final):
        raise AssertionError("FLIP stopped away from a local optimum")
    return trace.steps, trace.terminated


def run_experiment(plan, workers=1):
    """One row per (n, phi) cell; identical output for any worker count."""
    jobs = [(ci, n, phi, t) for ci, (n, phi) in enumerate(plan.cells) for t in range(plan.trials)]
    job = lambda j: _run_trial(plan, *j)
    if workers <= 1:
        results = [job(j) for j in jobs]
    else:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(job, jobs))
    rows = []
    for ci, (n, phi) in enumerate(plan.cells):
        cell = results[ci * plan.trials:(ci + 1) * plan.trials]
        steps = np.array([s for s, _ in cell], dtype=float)
        q50, q90, q99 = np.quantile(steps, [0.5, 0.9, 0.99])
        rows.append({
            "family": plan.family, "n": n, "phi": phi, "rule": PivotRule.parse(plan.rule).value,
            "trials": plan.trials, "max_steps": int(steps.max()), "mean_steps": float(steps.mean()),
            "q50": float(q50), "q90": float(q90), "q99": float(q99),
            "timeouts": sum(1 for _, ok in cell if not ok),
        })
    return rows


def rows_to_csv(rows, columns=CSV_COLUMNS):
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({c: repr(row[c]) if isinstance(row[c], float) else row[c] for c in columns})
    return buf.getvalue()


# ---- census ------------------------------------------------------------------

def eps_improving_census(trace, eps, window):
    """Windows of `window` consecutive moves holding >= 1 arc, all with summed gain in (0, eps]."""
    if not isinstance(window, int) or window < 1:
        raise ValidationError("window must be a positive integer", field="window")
    moves, gains = trace.moves, trace.gains
    m = len(moves)
    starts = m - window + 1
    if starts < 1:
        return 0
    arcs = np.zeros(starts + 1, dtype=np.int64)
    bad = np.zeros(starts + 1, dtype=np.int64)
    last = {}
    for j, v in enumerate(moves):
        i = last.get(v)
        last[v] = j
        if i is None:
            continue
        lo, hi = max(j - window + 1, 0), min(i, starts - 1)
        if lo > hi:
            continue
        arcs[lo] += 1
        arcs[hi + 1] -= 1
        total = gains[i] + gains[j]
        if not 0 < total <= eps:
            bad[lo] += 1
            bad[hi + 1] -= 1
    has_arc = np.cumsum(arcs)[:starts] > 0
    clean = np.cumsum(bad)[:starts] == 0
    return int(np.count_nonzero(has_arc & clean))
