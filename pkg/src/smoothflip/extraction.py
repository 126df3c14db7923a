"""Constructive subsequence extraction with checkable certificates.

Given a nontrivial move sequence H and a configuration γ, `extract` runs the case
analysis (dual-bad arcs, long-radius arcs, last chunks, overlap-heavy and
overlap-light intervals) and returns a subsequence B, a configuration τ of the
nodes in B, and arcs Q of B whose improvement vectors coincide with those of
source arcs of H. Every existential step is an argmax search followed by an
assertion of the inequality that justifies it.
"""

import math
from bisect import bisect_left
from collections import Counter
from dataclasses import dataclass, field

from .arcs import (
    Arc,
    POS_INF,
    MoveSequence,
    _vector,
    classify,
    configuration_at,
    find_dense_interval,
    is_arc,
    left_radius,
    radius,
    rank_of_arcs,
    right_radius,
)
from .errors import InvariantViolation, ValidationError

CASES = ("1", "2", "3.0", "3.1", "3.2", "degenerate-short-interval")
CONTIGUOUS_CASES = ("1", "2", "3.0", "3.1", "degenerate-short-interval")


@dataclass(frozen=True)
class ExtractionCertificate:
    case: str
    B: tuple
    tau: object
    Q: tuple
    mapping: tuple
    rank: int
    ratio: float
    diagnostics: dict = field(default_factory=dict, compare=False, repr=False)


@dataclass(frozen=True)
class OverlapReport:
    overlap: tuple
    non_overlap: tuple
    witness: dict


def _require(cond, message, **context):
    if not cond:
        raise InvariantViolation(message, context)


def _refuse(message):
    raise ValidationError(f"case trigger does not hold: {message}")


def overlaps(a, b, graph):
    """Distinct adjacent nodes with interleaving endpoints."""
    if a.node == b.node or not graph.has_edge(a.node, b.node):
        return False
    return a.left < b.left < a.right < b.right or b.left < a.left < b.right < a.right


def _endpoints(arcs):
    pts = set()
    for a in arcs:
        pts.add(a.left)
        pts.add(a.right)
    return pts


def _distinct_nodes(arcs):
    return len({a.node for a in arcs})


def _pivot_rows(seq, arcs, graph):
    init = {v: -1 for v in seq.active}
    return [_vector(seq, a, init, graph, scale=1) for a in arcs]


def _check_triangular(seq, graph, ordered, pivots, case):
    """Column i is nonzero at its pivot edge; all earlier columns are zero there."""
    vecs = _pivot_rows(seq, ordered, graph)
    for i, (arc, edge) in enumerate(zip(ordered, pivots)):
        _require(vecs[i].get(edge, 0) != 0, f"case {case}: zero diagonal entry", arc=arc, edge=edge)
        for j in range(i):
            _require(vecs[j].get(edge, 0) == 0,
                     f"case {case}: nonzero entry above the diagonal",
                     arc=arc, earlier=ordered[j], edge=edge)


def _contiguous(seq, gamma, graph, case, a, b, arcs, diagnostics):
    B = tuple(range(a, b + 1))
    sub = seq.window(a, b)
    start = configuration_at(seq, gamma, a - 1)
    tau = start.restrict(sub.active)
    shift = a - 1
    Q = tuple(Arc(x.left - shift, x.right - shift, x.node) for x in arcs)
    rank = rank_of_arcs(sub, Q, graph)
    diagnostics = dict(diagnostics, interval=(a, b))
    return ExtractionCertificate(case, B, tau, Q, tuple(arcs), rank, rank / len(B), diagnostics)


# ---- case 1 -------------------------------------------------------------------

def case1_dual_bad(seq, gamma, graph, cls):
    arcs = cls.arcs
    bad = cls.bad
    if 100 * len(bad) < len(arcs):
        _refuse("fewer than 1% of arcs are bad")
    m = seq.m
    scale = 1 << cls.w
    for a in bad:
        lr, rr = left_radius(seq, a.left), right_radius(seq, a.right)
        if lr is not POS_INF and lr * scale < a.length:
            prev = Arc(seq.pred[a.left], a.left, a.node)
            _require(prev in cls.dual_bad, "bad arc without dual-bad predecessor", arc=a)
        else:
            _require(rr is not POS_INF and rr * scale < a.length, "bad arc with both radii large", arc=a)
            nxt = Arc(a.right, seq.succ[a.right], a.node)
            _require(nxt in cls.dual_bad, "bad arc without dual-bad successor", arc=a)

    counts = Counter(cls.group[a] for a in cls.dual_bad)
    k = min(counts, key=lambda g: (-counts[g], g))
    dual = sorted(a for a in cls.dual_bad if cls.group[a] == k)
    ell = max(a.length for a in dual)
    _require(2 * ell <= m, "dual-bad arcs longer than half the sequence", ell=ell, m=m)
    a, b = find_dense_interval(m, dual, range(1, m + 1), ell)
    C = [x for x in dual if x.inside(a, b)]
    per_node = Counter(x.node for x in C)
    # one arc per node; the distinct-node rank bound needs nothing more
    Q, seen = [], set()
    for x in C:
        if x.node not in seen:
            seen.add(x.node)
            Q.append(x)

    diag = {"group": k, "ell": ell, "dual_bad": len(dual), "C": len(C), "Q": len(Q),
            "max_arcs_per_node": max(per_node.values()),
            "long_neighbours_per_node": _long_neighbours(seq, C, ell, a, b)}
    cert = _contiguous(seq, gamma, graph, "1", a, b, Q, diag)
    bound = -(-len(Q) // 2)
    _require(cert.rank >= bound, "case 1 rank below the distinct-node bound",
             rank=cert.rank, bound=bound)
    return cert


def _long_neighbours(seq, C, ell, a, b):
    """Largest count, over nodes, of adjacent arcs of length >= ell with an endpoint in [a,b]."""
    per_node = {}
    for x in C:
        for lo, hi in ((seq.pred[x.left], x.left), (x.right, seq.succ[x.right])):
            if isinstance(lo, int) and isinstance(hi, int) and hi - lo + 1 >= ell:
                if a <= lo <= b or a <= hi <= b:
                    per_node.setdefault(x.node, set()).add((lo, hi))
    return max((len(s) for s in per_node.values()), default=0)


# ---- group selection ------------------------------------------------------------

def select_group(cls):
    """Group with many good arcs, both globally and relative to its neighbouring groups."""
    total = len(cls.arcs)
    sizes = Counter(cls.group[a] for a in cls.arcs)
    good = Counter(cls.group[a] for a in cls.good)
    best = None
    for i in range(1, cls.t + 1):
        g = good[i]
        near = sizes[i - 1] + sizes[i] + sizes[i + 1]
        if g * 2 * cls.t >= total and 7 * g >= near and g > 0:
            if best is None or g > good[best]:
                best = i
    _require(best is not None, "no group satisfies the group-selection inequalities",
             good=dict(good), sizes=dict(sizes), t=cls.t)
    return best


# ---- case 2 -------------------------------------------------------------------

def case2_long_radius(seq, gamma, graph, cls, istar):
    D = cls.group_arcs(istar)
    L = [a for a in D if a in cls.long]
    good_L = sum(1 for a in L if a in cls.good)
    good_D = sum(1 for a in D if a in cls.good)
    if not L or 2 * good_L < good_D:
        _refuse("long-radius arcs are not the majority of good arcs")
    m = seq.m
    maxlen = cls.group_maxlen[istar]
    ell = max(a.length for a in L)
    note = None
    if 2 * ell <= m:
        a, b = find_dense_interval(m, L, range(1, m + 1), ell)
    else:
        # whole sequence; 2*maxlen >= m still holds, whichever group this is
        a, b = 1, m
        if istar != cls.t:
            note = "arc longer than m/2 outside the last group"
    C = [x for x in L if x.inside(a, b)]
    span = b - a + 1
    _require(2 * maxlen >= span, "interval longer than twice the group maximum")

    left_side, right_side = [], []
    for x in C:
        k = next(k for k in cls.interior[x] if radius(seq, k) > 2 * maxlen)
        if left_radius(seq, k) > span:
            left_side.append((x, k))
        else:
            _require(right_radius(seq, k) > span, "long-radius index with both sides short", arc=x)
            right_side.append((x, k))
    if 2 * len(left_side) >= len(C):
        chosen, side = sorted(left_side, key=lambda p: p[0].right), "left"
    else:
        chosen, side = sorted(right_side, key=lambda p: -p[0].left), "right"
    ordered = [x for x, _ in chosen]
    pivots = [graph.edge_id(x.node, seq.at(k)) for x, k in chosen]
    _check_triangular(seq, graph, ordered, pivots, "2")

    diag = {"group": istar, "ell": ell, "L": len(L), "C": len(C), "side": side,
            "triangular_checked": len(ordered)}
    if note:
        diag["note"] = note
    cert = _contiguous(seq, gamma, graph, "2", a, b, ordered, diag)
    _require(cert.rank == len(ordered), "case 2 rank is not full", rank=cert.rank, size=len(ordered))
    return cert


# ---- case 3 -------------------------------------------------------------------

def case30_last_chunks(seq, gamma, graph, cls, note=None):
    s = cls.s
    Q = [a for a in cls.arcs if cls.chunk[a] >= s - 1]
    if not Q:
        _refuse("last two chunks are empty")
    diag = {"Q": len(Q)}
    if note:
        diag["note"] = note
    cert = _contiguous(seq, gamma, graph, "3.0", 1, seq.m, Q, diag)
    bound = -(-_distinct_nodes(Q) // 2)
    _require(cert.rank >= bound, "case 3.0 rank below the distinct-node bound",
             rank=cert.rank, bound=bound)
    return cert


def compute_overlap(seq, interval, C, graph, arcs=None):
    a, b = interval
    _require(all(x.inside(a, b) for x in C), "core arcs must lie in the interval")
    if arcs is None:
        from .arcs import find_arcs
        arcs = find_arcs(seq)
    ends = _endpoints(C)
    core = sorted(C)
    overlap, non_overlap, witness = [], [], {}
    for x in arcs:
        if not x.inside(a, b) or x.left in ends or x.right in ends:
            continue
        w = next((y for y in core if overlaps(x, y, graph)), None)
        if w is None:
            non_overlap.append(x)
        else:
            overlap.append(x)
            witness[x] = w
    return OverlapReport(tuple(overlap), tuple(non_overlap), witness)


def _quantile_starts(a, span):
    return [a + (q * span) // 5 for q in range(6)]


def _quantile(x, starts):
    for q in range(1, 6):
        if starts[q - 1] <= x < starts[q]:
            return q
    raise InvariantViolation("index outside the interval", {"x": x})


def case31_quantiles(seq, gamma, graph, cls, istar, interval, C, report):
    a, b = interval
    span = b - a + 1
    near = set(cls.groups_arcs((istar - 1, istar, istar + 1)))
    near_in = sum(1 for x in near if x.inside(a, b))
    log_n = math.log2(graph.n)
    if not (len(report.overlap) - near_in >= span / math.sqrt(log_n)):
        _refuse("overlap set is small")
    F = [x for x in report.overlap if x not in near]
    _require(F, "overlap-heavy case with empty F")

    if 4 * -(-span // 5) >= span:
        only = sorted(C)[0]
        diag = {"group": istar, "F": len(F), "reason": "interval too short for quantiles"}
        return _contiguous(seq, gamma, graph, "degenerate-short-interval", a, b, [only], diag)

    quarter_floor = -(-span // 5)
    for x in F:
        _require(report.witness[x].length > quarter_floor, "witness shorter than a quantile",
                 witness=report.witness[x])
    left = [x for x in F if report.witness[x].left < x.left]
    right = [x for x in F if report.witness[x].left > x.left]
    starts = _quantile_starts(a, span)
    if 2 * len(left) >= len(F):
        side, Fp = "left", left
        key = lambda x: _quantile(report.witness[x].right, starts)
        _require(all(key(x) != 1 for x in Fp), "witness ends in the first quantile")
    else:
        side, Fp = "right", right
        key = lambda x: _quantile(report.witness[x].left, starts)
        _require(all(key(x) != 5 for x in Fp), "witness starts in the last quantile")
    buckets = {}
    for x in Fp:
        buckets.setdefault(key(x), []).append(x)
    q = min(buckets, key=lambda k: (-len(buckets[k]), k))
    Fq = buckets[q]
    _require(8 * len(Fq) >= len(F), "largest quantile class below |F|/8", size=len(Fq), F=len(F))

    if side == "left":
        ordered = sorted(Fq, key=lambda x: (report.witness[x].right, x.left))
    else:
        ordered = sorted(Fq, key=lambda x: (-report.witness[x].left, -x.right))
    pivots = [graph.edge_id(x.node, report.witness[x].node) for x in ordered]
    _check_triangular(seq, graph, ordered, pivots, "3.1")

    diag = {"group": istar, "F": len(F), "side": side, "quantile": q,
            "triangular_checked": len(ordered)}
    cert = _contiguous(seq, gamma, graph, "3.1", a, b, ordered, diag)
    _require(cert.rank == len(ordered), "case 3.1 rank is not full", rank=cert.rank)
    return cert


def _occurrences_in(seq, u, a, b):
    pos = seq.positions[u]
    return pos[bisect_left(pos, a):bisect_left(pos, b + 1)]


def _check_preserved(seq, gamma_start, graph, C, interval, removed, label):
    """Vectors and the parities behind them survive deleting `removed` from the interval."""
    a, b = interval
    keep = [k for k in range(a, b + 1) if k not in removed]
    rho = {k: i for i, k in enumerate(keep, 1)}
    sub = seq.subsequence(keep)
    tau = gamma_start.restrict(sub.active)
    window = seq.window(a, b)
    start_full = gamma_start.restrict(window.active)
    for x in C:
        y = Arc(rho[x.left], rho[x.right], x.node)
        _require(is_arc(sub, y), f"{label}: core arc broken by deletion", arc=x)
        shifted = Arc(x.left - a + 1, x.right - a + 1, x.node)
        for u in graph.neighbors(x.node):
            before = window.count_between(u, shifted.left, shifted.right) % 2
            after = sub.count_between(u, y.left, y.right) % 2
            _require(before == after, f"{label}: parity of a neighbour inside an arc changed",
                     arc=x, node=u)
            if before:
                for z in (u, x.node):
                    p0 = window.count_before(z, shifted.left) % 2
                    p1 = sub.count_before(z, y.left) % 2
                    _require(p0 == p1, f"{label}: prefix parity changed", arc=x, node=z)
        v0 = _vector(window, shifted, start_full, graph)
        v1 = _vector(sub, y, tau, graph)
        _require(v0 == v1, f"{label}: improvement vector changed", arc=x)
    return keep, sub, tau


def case32_delete(seq, gamma, graph, cls, istar, interval, C, report, points, ell):
    a, b = interval
    span = b - a + 1
    near = set(cls.groups_arcs((istar - 1, istar, istar + 1)))
    near_in = sum(1 for x in near if x.inside(a, b))
    if len(report.overlap) - near_in >= span / math.sqrt(math.log2(graph.n)):
        _refuse("overlap set is large")
    maxlen = cls.group_maxlen[istar]
    ends = _endpoints(C)
    non_overlap = {(x.left, x.right) for x in report.non_overlap}
    oc_nodes = {x.node for x in report.overlap} | {x.node for x in C}
    c_interior = {}
    for x in C:
        for k in cls.interior[x]:
            c_interior.setdefault(k, []).append(x)

    R1, R2, R3 = set(), set(), set()
    kept_singletons, c1_tails, c3_kept = [], [], []
    nodes = sorted({seq.at(k) for k in range(a, b + 1)})
    for u in nodes:
        occ = _occurrences_in(seq, u, a, b)
        if len(occ) == 1:
            k = occ[0]
            if radius(seq, k) > 2 * maxlen:
                R1.add(k)
            else:
                kept_singletons.append(k)
            continue
        pairs = [(occ[i], occ[i + 1]) for i in range(0, len(occ) - 1, 2)]
        if len(occ) % 2 == 0 or u in oc_nodes:
            for p in pairs:
                if p in non_overlap:
                    R2.update(p)
            if len(occ) % 2 == 1:
                c1_tails.append(occ[-1])
        elif not any(k in c_interior for k in occ):
            R3.update(occ)
        else:
            hosts = set.intersection(*(set(c_interior.get(k, ())) for k in occ))
            _require(hosts, "odd node not inside a single core arc", node=u)
            first, last = occ[0], occ[-1]
            if 2 * radius(seq, first) >= ell:
                kept, dropped = first, occ[1:]
            else:
                _require(2 * radius(seq, last) >= ell, "neither boundary occurrence has large radius",
                         node=u)
                kept, dropped = last, occ[:-1]
            _require(radius(seq, kept) <= 2 * maxlen, "kept occurrence has long radius", node=u)
            for i in range(0, len(dropped), 2):
                _require((dropped[i], dropped[i + 1]) in non_overlap,
                         "deleted pair is not a NonOverlap arc", node=u)
            R2.update(dropped)
            c3_kept.append(kept)

    point_set = set(points)
    _require(all(k in point_set for k in kept_singletons), "kept singleton outside P")
    _require(all(k in point_set for k in c3_kept), "kept boundary occurrence outside P")
    R = R1 | R2 | R3
    _require(not (R & ends), "deletion set meets core endpoints", hit=sorted(R & ends))

    gamma_start = configuration_at(seq, gamma, a - 1)
    batches = 0
    removed = set()
    for label, part in (("R1", R1), ("R2", R2), ("R3", R3)):
        removed |= part
        keep, sub, tau = _check_preserved(seq, gamma_start, graph, C, interval, removed, label)
        batches += 1

    rho = {k: i for i, k in enumerate(keep, 1)}
    Q = tuple(Arc(rho[x.left], rho[x.right], x.node) for x in C)
    p_in = sum(1 for k in point_set if a <= k <= b)
    bound = p_in + 2 * len(report.overlap) + 2 * len(C) + len(kept_singletons) + len(c1_tails)
    _require(len(keep) <= bound, "subsequence longer than the size accounting allows",
             length=len(keep), bound=bound)
    rank = rank_of_arcs(sub, Q, graph)
    floor = -(-_distinct_nodes(C) // 2)
    _require(rank >= floor, "case 3.2 rank below the distinct-node bound", rank=rank, bound=floor)
    diag = {"group": istar, "ell": ell, "interval": interval, "C": len(C),
            "overlap": len(report.overlap), "removed": {"R1": len(R1), "R2": len(R2), "R3": len(R3)},
            "parity_batches": batches, "size_bound": bound, "P_in_I": p_in,
            "kept_singletons": len(kept_singletons), "c1_tails": len(c1_tails)}
    return ExtractionCertificate("3.2", tuple(keep), tau, Q, tuple(C),
                                 rank, rank / len(keep), diag)


def _case3(seq, gamma, graph, cls, istar):
    s = cls.s
    S = cls.short_arcs(istar)
    good_S = [x for x in S if x in cls.good]
    if istar == cls.t:
        tail = sum(1 for x in good_S if cls.chunk[x] >= s - 1)
        if 2 * tail >= len(good_S):
            return case30_last_chunks(seq, gamma, graph, cls)
    counts = Counter(cls.chunk[x] for x in good_S if cls.chunk[x] <= s - 2)
    if not counts:
        return case30_last_chunks(seq, gamma, graph, cls,
                                  note="all good short-radius arcs lie in the last two chunks")
    jstar = min(counts, key=lambda j: (-counts[j], j))
    Cstar = sorted(x for x in good_S if cls.chunk[x] == jstar)
    ell = max(x.length for x in Cstar)
    near = cls.groups_arcs((istar - 1, istar, istar + 1))
    points = sorted(_endpoints(near))
    interval = find_dense_interval(seq.m, Cstar, points, ell)
    a, b = interval
    C = [x for x in Cstar if x.inside(a, b)]
    report = compute_overlap(seq, interval, C, graph, cls.arcs)
    near_in = sum(1 for x in near if x.inside(a, b))
    span = b - a + 1
    if len(report.overlap) - near_in >= span / math.sqrt(math.log2(graph.n)):
        cert = case31_quantiles(seq, gamma, graph, cls, istar, interval, C, report)
    else:
        cert = case32_delete(seq, gamma, graph, cls, istar, interval, C, report, points, ell)
    cert.diagnostics.update(j_star=jstar, near_in_I=near_in)
    return cert


# ---- driver -------------------------------------------------------------------

def extract(seq, gamma, graph, allow_any_length=False):
    if not isinstance(seq, MoveSequence):
        seq = MoveSequence(tuple(seq))
    seq.check_nodes(graph)
    n = graph.n
    if not allow_any_length and seq.m != 5 * n:
        raise ValidationError(f"sequence length {seq.m} differs from 5n = {5 * n}", field="moves")
    if n < 2:
        raise ValidationError("extraction needs at least two nodes")
    for v in seq.active:
        gamma[v]
    cls = classify(seq, graph)
    if not cls.arcs:
        raise ValidationError("sequence has no arcs", field="moves")
    trivial = [a for a in cls.arcs if not cls.interior[a]]
    if trivial:
        raise ValidationError(f"sequence is trivial: arc {trivial[0]} has an empty interior",
                              field="moves")

    if 100 * len(cls.bad) >= len(cls.arcs):
        cert = case1_dual_bad(seq, gamma, graph, cls)
    else:
        istar = select_group(cls)
        D = cls.group_arcs(istar)
        good_D = sum(1 for x in D if x in cls.good)
        good_L = sum(1 for x in D if x in cls.good and x in cls.long)
        if 2 * good_L >= good_D:
            cert = case2_long_radius(seq, gamma, graph, cls, istar)
        else:
            cert = _case3(seq, gamma, graph, cls, istar)
        cert.diagnostics.setdefault("i_star", istar)

    cert.diagnostics.update(s=cls.s, w=cls.w, t=cls.t, arcs=len(cls.arcs),
                            monitor=cert.ratio * math.sqrt(math.log2(n)))
    _require(check_certificate(seq, gamma, cert, graph), "certificate failed its own check",
             case=cert.case)
    return cert


def check_certificate(seq, gamma, cert, graph):
    """Independent verification: vectors entrywise, arcs well formed, rank and ratio."""
    try:
        m = seq.m
        B = list(cert.B)
        if not B or any(not 1 <= k <= m for k in B) or any(x >= y for x, y in zip(B, B[1:])):
            return False
        if cert.case not in CASES or len(cert.Q) != len(cert.mapping):
            return False
        sub = seq.subsequence(B)
        if set(cert.tau.domain) != set(sub.active):
            return False
        if cert.case in CONTIGUOUS_CASES:
            if B != list(range(B[0], B[-1] + 1)):
                return False
            start = configuration_at(seq, gamma, B[0] - 1)
            if any(cert.tau[v] != start[v] for v in sub.active):
                return False
        for q, src in zip(cert.Q, cert.mapping):
            if not (is_arc(sub, q) and is_arc(seq, src) and q.node == src.node):
                return False
            if _vector(sub, q, cert.tau, graph) != _vector(seq, src, gamma, graph):
                return False
        rank = rank_of_arcs(sub, cert.Q, graph)
        if rank != cert.rank:
            return False
        return abs(cert.ratio - rank / len(B)) <= 1e-12
    except (KeyError, ValueError, IndexError, TypeError):
        return False
