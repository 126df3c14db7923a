"""Layered block sequence whose substrings all have low arc rank, with exact scans."""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

from .arcs import MoveSequence, _vector, default_configuration, find_arcs
from .errors import InvariantViolation, ScanBudgetExceeded, ValidationError
from .instance import graph as make_graph
from .linalg import EchelonBasis

FULL_SCAN_LIMIT = 2000


@dataclass(frozen=True)
class HardInstance:
    d: int
    N1: int
    L: int

    @property
    def sizes(self):
        """Layer sizes N_k = N1 * 3^(k-1), k = 1..d."""
        return tuple(self.N1 * 3 ** (k - 1) for k in range(1, self.d + 1))

    @property
    def offsets(self):
        out, acc = [], 0
        for size in self.sizes:
            out.append(acc)
            acc += size
        return tuple(out)

    def node(self, k, j):
        """Node id of the j-th member (0-based) of layer k (1-based)."""
        return self.offsets[k - 1] + j + 1

    def layer_of(self, v):
        for k in range(self.d, 0, -1):
            if v > self.offsets[k - 1]:
                return k
        raise ValidationError(f"node {v} is not in any layer")

    @property
    def n(self):
        return sum(self.sizes)

    @cached_property
    def graph(self):
        first = [self.node(1, j) for j in range(self.N1)]
        rest = range(self.N1 + 1, self.n + 1)
        return make_graph(self.n, [(u, v) for u in first for v in rest])

    def block(self, i):
        return tuple(self.node(k, i % size) for k, size in enumerate(self.sizes, 1))

    @cached_property
    def sequence(self):
        moves = []
        for i in range(self.L):
            moves.extend(self.block(i))
        return MoveSequence(tuple(moves))


def build_hard(d, N1, L):
    for name, val in (("d", d), ("N1", N1), ("L", L)):
        if not isinstance(val, int) or val < 1:
            raise ValidationError(f"{name} must be a positive integer, got {val!r}", field=name)
    return HardInstance(d, N1, L)


def preset(n):
    """Default scaling: d = floor(0.1 log3 n), N1 = ceil(n^0.1), L = ceil(5n/d)."""
    d = math.floor(0.1 * math.log(n, 3) + 1e-12)
    if d < 1:
        raise ValidationError(f"n={n} is too small for at least one layer (needs n >= 3^10)")
    return build_hard(d, math.ceil(n ** 0.1 - 1e-12), math.ceil(5 * n / d))


def counting_bound(inst, t):
    """Upper bound on the rank of any t consecutive blocks."""
    total = 0
    for k in range(2, inst.d + 1):
        if inst.sizes[k - 1] + 1 <= t:
            total += inst.sizes[k - 1]
    return total + inst.N1 * -(-t // inst.N1)


def _arc_table(inst):
    """Arcs of the full sequence grouped by right endpoint, with their vectors."""
    seq = inst.sequence
    init = default_configuration(seq)
    by_right = {}
    for arc in find_arcs(seq):
        by_right.setdefault(arc.right, []).append((arc, _vector(seq, arc, init, inst.graph, scale=1)))
    return by_right


def check_layer_structure(inst):
    """Arcs of layers k >= 2 hold 3^(k-1) copies of each first-layer node; same-node vectors agree."""
    seq = inst.sequence
    init = default_configuration(seq)
    first = [inst.node(1, j) for j in range(inst.N1)]
    shared = {}
    for arc in find_arcs(seq):
        k = inst.layer_of(arc.node)
        if k < 2:
            continue
        for u in first:
            c = seq.count_between(u, arc.left, arc.right)
            if c != 3 ** (k - 1):
                raise InvariantViolation("layer arc with wrong first-layer count",
                                         {"arc": arc, "node": u, "count": c})
        vec = _vector(seq, arc, init, inst.graph, scale=1)
        if len(vec) != inst.N1:
            raise InvariantViolation("layer arc without full first-layer support", {"arc": arc})
        prev = shared.setdefault(arc.node, vec)
        if prev != vec:
            raise InvariantViolation("arcs of one layer node have different vectors", {"arc": arc})
    return True


def _scan_from(inst, table, start, ends, check_bound):
    basis = EchelonBasis()
    rows = []
    d = inst.d
    prev = start - 1
    for end in ends:
        for r in range(prev + 1, end + 1):
            for arc, vec in table.get(r, ()):
                if arc.left >= start:
                    basis.add(vec)
        prev = end
        length = end - start + 1
        rank = len(basis)
        row = {"start": start, "length": length, "rank": rank, "ratio": Fraction(rank, length)}
        if check_bound:
            t = length // d
            bound = counting_bound(inst, t)
            row["bound"] = bound
            if rank > bound:
                raise InvariantViolation("rank exceeds the counting bound",
                                         {"start": start, "blocks": t, "rank": rank, "bound": bound})
        rows.append(row)
    return rows


def scan(inst, mode="block-aligned", workers=1):
    """Rows (start, length, rank, ratio[, bound]) for every scanned substring."""
    seq = inst.sequence
    m = seq.m
    if mode == "full-scan":
        if m > FULL_SCAN_LIMIT:
            raise ScanBudgetExceeded(f"full scan of length {m} exceeds the limit {FULL_SCAN_LIMIT}")
        starts = range(1, m + 1)
        ends_of = lambda a: range(a, m + 1)
        check = False
    elif mode == "block-aligned":
        d = inst.d
        starts = range(1, m + 1, d)
        ends_of = lambda a: range(a + d - 1, m + 1, d)
        check = True
    else:
        raise ValidationError(f"unknown scan mode {mode!r}", field="mode")
    table = _arc_table(inst)
    job = lambda a: _scan_from(inst, table, a, ends_of(a), check)
    if workers <= 1:
        parts = [job(a) for a in starts]
    else:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(job, starts))
    return [row for part in parts for row in part]


def max_rank_ratio(inst, mode="block-aligned", workers=1):
    """Largest rank/len over scanned substrings, as an exact Fraction."""
    return max((row["ratio"] for row in scan(inst, mode, workers)), default=Fraction(0))
