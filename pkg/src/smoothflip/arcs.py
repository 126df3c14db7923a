"""Arc calculus on move sequences: arcs, radii, interiors, improvement vectors, rank,
length classes and the interval cover used to localise dense arc sets."""

from bisect import bisect_left
from collections import Counter
from dataclasses import dataclass
from functools import cached_property

from .errors import InvariantViolation, TrivialArcError, ValidationError
from .instance import Configuration
from .linalg import sparse_rank


class _Infinity:
    """Signed infinity that compares beyond every finite value and refuses arithmetic."""

    __slots__ = ("sign",)

    def __init__(self, sign):
        self.sign = sign

    def __repr__(self):
        return "+inf" if self.sign > 0 else "-inf"

    def _cmp(self, other):
        if isinstance(other, _Infinity):
            return (self.sign > other.sign) - (self.sign < other.sign)
        return self.sign

    def __eq__(self, other):
        return isinstance(other, _Infinity) and other.sign == self.sign

    def __hash__(self):
        return hash(("inf", self.sign))

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def _refuse(self, *args):
        raise TypeError("arithmetic with an infinity sentinel")

    __add__ = __radd__ = __sub__ = __rsub__ = __mul__ = __rmul__ = _refuse
    __truediv__ = __rtruediv__ = __neg__ = _refuse


POS_INF = _Infinity(1)
NEG_INF = _Infinity(-1)


@dataclass(frozen=True)
class MoveSequence:
    """Ordered node ids; positions are 1-based as in σ_1 … σ_m."""

    moves: tuple

    def __post_init__(self):
        moves = tuple(int(v) for v in self.moves)
        if any(v < 1 for v in moves):
            raise ValidationError("move sequence contains a non-positive node id", field="moves")
        object.__setattr__(self, "moves", moves)

    def __len__(self):
        return len(self.moves)

    @property
    def m(self):
        return len(self.moves)

    def at(self, k):
        return self.moves[k - 1]

    @cached_property
    def positions(self):
        pos = {}
        for k, v in enumerate(self.moves, 1):
            pos.setdefault(v, []).append(k)
        return pos

    @cached_property
    def _links(self):
        m = len(self.moves)
        pred = [NEG_INF] * (m + 2)
        succ = [POS_INF] * (m + 2)
        last = {}
        for k, v in enumerate(self.moves, 1):
            if v in last:
                pred[k] = last[v]
                succ[last[v]] = k
            last[v] = k
        return pred, succ

    @property
    def pred(self):
        return self._links[0]

    @property
    def succ(self):
        return self._links[1]

    @property
    def active(self):
        """S(H): nodes that move at least once."""
        return frozenset(self.positions)

    @property
    def once(self):
        return frozenset(v for v, p in self.positions.items() if len(p) == 1)

    @property
    def repeated(self):
        return frozenset(v for v, p in self.positions.items() if len(p) >= 2)

    def count_before(self, v, k):
        """Occurrences of v at positions < k."""
        return bisect_left(self.positions.get(v, ()), k)

    def count_between(self, v, i, j):
        """Occurrences of v strictly inside (i, j)."""
        pos = self.positions.get(v, ())
        return bisect_left(pos, j) - bisect_left(pos, i + 1)

    def check_nodes(self, graph):
        bad = [v for v in self.moves if v > graph.n]
        if bad:
            raise ValidationError(f"move {bad[0]} is not a node of the graph (n={graph.n})",
                                  field="moves")

    def window(self, a, b):
        return MoveSequence(self.moves[a - 1:b])

    def subsequence(self, indices):
        return MoveSequence(tuple(self.moves[k - 1] for k in indices))


@dataclass(frozen=True, order=True)
class Arc:
    left: int
    right: int
    node: int

    @property
    def length(self):
        return self.right - self.left + 1

    def inside(self, a, b):
        return a <= self.left and self.right <= b

    def as_dict(self):
        return {"left": self.left, "right": self.right, "node": self.node}


def find_arcs(seq):
    succ = seq.succ
    return [Arc(k, succ[k], v) for k, v in enumerate(seq.moves, 1) if succ[k] is not POS_INF]


def is_arc(seq, arc):
    m = seq.m
    return (1 <= arc.left < arc.right <= m and seq.at(arc.left) == arc.node
            and seq.succ[arc.left] == arc.right)


def pred_succ(seq, k):
    if not 1 <= k <= seq.m:
        raise ValidationError(f"index {k} outside 1..{seq.m}")
    return seq.pred[k], seq.succ[k]


def left_radius(seq, k):
    p = seq.pred[k]
    return POS_INF if p is NEG_INF else k - p + 1


def right_radius(seq, k):
    s = seq.succ[k]
    return POS_INF if s is POS_INF else s - k + 1


def radius(seq, k):
    pred_succ(seq, k)
    return max(left_radius(seq, k), right_radius(seq, k))


def odd_neighbors(seq, arc, graph):
    """Neighbours of node(arc) occurring an odd number of times strictly inside it."""
    nbrs = graph.neighbors(arc.node)
    counts = Counter(seq.moves[arc.left:arc.right - 1])
    return {u for u, c in counts.items() if c % 2 == 1 and u in nbrs}


def interior(seq, arc, graph):
    odd = odd_neighbors(seq, arc, graph)
    return tuple(k for k in range(arc.left + 1, arc.right) if seq.at(k) in odd)


def arc_radius(seq, arc, graph):
    inner = interior(seq, arc, graph)
    if not inner:
        raise TrivialArcError(f"arc {arc} has an empty interior")
    return max(radius(seq, k) for k in inner)


def default_configuration(seq):
    return Configuration.uniform(seq.active, -1)


def configuration_at(seq, init, i):
    """γ_i: the configuration after replaying the first i moves from `init`."""
    signs = dict(init)
    for v in seq.moves[:i]:
        signs[v] = -signs[v]
    return Configuration(signs)


def _require_active(seq, init):
    for v in seq.active:
        init[v]


def _vector(seq, arc, init, graph, scale=2):
    v = arc.node
    i = arc.left
    sv = init[v] * (-1 if seq.count_before(v, i) % 2 else 1)
    out = {}
    for u in odd_neighbors(seq, arc, graph):
        su = init[u] * (-1 if seq.count_before(u, i) % 2 else 1)
        out[graph.edge_id(v, u)] = scale * sv * su
    return out


def improvement_vector(seq, arc, init, graph):
    """Sparse {edge id: ±2} vector; absent ids are zero entries."""
    _require_active(seq, init)
    return _vector(seq, arc, init, graph)


def arc_vectors(seq, arcs, init, graph, scale=2):
    return [_vector(seq, a, init, graph, scale) for a in arcs]


def rank_of_arcs(seq, arcs, graph):
    arcs = list(arcs)
    if not arcs:
        return 0
    init = default_configuration(seq)
    return sparse_rank(arc_vectors(seq, arcs, init, graph, scale=1))


def inner_product(vector, weights):
    total = 0
    for e, x in vector.items():
        total += x * weights[e]
    return total


def is_eps_improving(seq, arcs, init, inst, eps):
    """Every arc's summed gain <vector, weights> lies in (0, eps]; `inst` carries graph and weights."""
    if not eps > 0:
        raise ValidationError("eps must be positive", field="eps")
    inst.require_weights()
    _require_active(seq, init)
    return all(0 < inner_product(vec, inst.weights) <= eps
               for vec in arc_vectors(seq, list(arcs), init, inst))


def is_nontrivial(seq, graph):
    return all(odd_neighbors(seq, a, graph) for a in find_arcs(seq))


@dataclass(frozen=True)
class ArcMatrix:
    """Column-stacked sparse matrix: one column per arc, rows indexed by `row_labels`."""

    row_labels: tuple
    arcs: tuple
    columns: tuple

    def dense(self):
        pos = {r: i for i, r in enumerate(self.row_labels)}
        mat = [[0] * len(self.columns) for _ in self.row_labels]
        for j, col in enumerate(self.columns):
            for r, x in col.items():
                mat[pos[r]][j] = x
        return mat

    def pattern(self):
        return tuple(frozenset(r for r, x in col.items() if x != 0) for col in self.columns)

    def rank(self):
        return sparse_rank(self.columns)

    def to_csv(self):
        header = "row," + ",".join(f"{a.node}:{a.left}-{a.right}" for a in self.arcs)
        lines = [header]
        for label, row in zip(self.row_labels, self.dense()):
            lines.append(f"{label}," + ",".join(str(x) for x in row))
        return "\n".join(lines) + "\n"


def arc_matrix(seq, arcs, init, graph):
    arcs = tuple(arcs)
    cols = tuple(arc_vectors(seq, arcs, init, graph))
    return ArcMatrix(tuple(range(graph.m)), arcs, cols)


# ---- length classes ---------------------------------------------------------

def ceil_log2(x):
    return (x - 1).bit_length() if x >= 1 else 0


def group_width(n):
    """w = max(1, ceil(sqrt(log2 n))), computed exactly as the least w with 2^(w^2) >= n."""
    w = 1
    while (1 << (w * w)) < n:
        w += 1
    return w


def chunk_of_length(length):
    return ceil_log2(length)


@dataclass(frozen=True)
class ArcClassification:
    arcs: tuple
    s: int
    w: int
    t: int
    chunk: dict
    group: dict
    radius: dict
    interior: dict
    good: frozenset
    dual_bad: frozenset
    long: frozenset
    group_maxlen: dict

    @property
    def bad(self):
        return frozenset(a for a in self.arcs if a not in self.good)

    def chunk_arcs(self, j):
        return [a for a in self.arcs if self.chunk[a] == j]

    def group_arcs(self, i):
        return [a for a in self.arcs if self.group[a] == i]

    def groups_arcs(self, indices):
        keep = set(indices)
        return [a for a in self.arcs if self.group[a] in keep]

    def long_arcs(self, i):
        return [a for a in self.group_arcs(i) if a in self.long]

    def short_arcs(self, i):
        return [a for a in self.group_arcs(i) if a not in self.long]

    def chunk_short(self, j):
        return [a for a in self.chunk_arcs(j) if a not in self.long]

    def chunks_of_group(self, i):
        return list(range((i - 1) * self.w + 1, min(i * self.w, self.s) + 1))


def classify(seq, graph):
    arcs = tuple(find_arcs(seq))
    m = seq.m
    s = ceil_log2(m)
    w = group_width(graph.n)
    t = -(-s // w)
    scale = 1 << w
    chunk, group, rad, inner = {}, {}, {}, {}
    good, dual_bad = set(), set()
    group_maxlen = {}
    for a in arcs:
        j = chunk_of_length(a.length)
        chunk[a] = j
        group[a] = -(-j // w)
        group_maxlen[group[a]] = max(group_maxlen.get(group[a], 0), a.length)
        inner[a] = interior(seq, a, graph)
        rad[a] = max((radius(seq, k) for k in inner[a]), default=NEG_INF)
        lr, rr = left_radius(seq, a.left), right_radius(seq, a.right)
        low = min(lr, rr)
        if low is POS_INF or low * scale >= a.length:
            good.add(a)
        if ((lr is not POS_INF and lr > a.length * scale)
                or (rr is not POS_INF and rr > a.length * scale)):
            dual_bad.add(a)
    long = frozenset(a for a in arcs if rad[a] > 2 * group_maxlen[group[a]])
    return ArcClassification(arcs, s, w, t, chunk, group, rad, inner, frozenset(good),
                             frozenset(dual_bad), long, group_maxlen)


# ---- interval cover ---------------------------------------------------------

@dataclass(frozen=True)
class IntervalCover:
    m: int
    ell: int
    even: tuple
    odd: tuple
    boundary: tuple

    @property
    def intervals(self):
        return self.even + self.odd + (self.boundary,)

    @property
    def distinct(self):
        seen, out = set(), []
        for iv in self.intervals:
            if iv not in seen:
                seen.add(iv)
                out.append(iv)
        return out


def build_cover(m, ell):
    if not (1 <= ell and 2 * ell <= m):
        raise ValidationError(f"cover needs 1 <= ell <= m/2, got m={m}, ell={ell}")
    even = tuple(((2 * i - 2) * ell + 1, 2 * i * ell) for i in range(1, m // (2 * ell) + 1))
    odd = tuple(((2 * i - 1) * ell + 1, (2 * i + 1) * ell)
                for i in range(1, (m - ell) // (2 * ell) + 1))
    return IntervalCover(m, ell, even, odd, (m - 2 * ell + 1, m))


def dense_interval_ok(count_c, total_c, count_p, total_p, m, ell):
    """Both halves of the density inequality, cross-multiplied to stay in integers."""
    return 16 * m * count_c >= 2 * ell * total_c and 4 * total_p * count_c >= count_p * total_c


def find_dense_interval(m, arcs, points, ell):
    """Cover interval of length 2*ell holding a large share of `arcs` relative to `points`.

    `m` may be a MoveSequence or its length. Among qualifying intervals the one with the
    most contained arcs wins, ties to the first in cover order.
    """
    if isinstance(m, MoveSequence):
        m = m.m
    arcs = list(arcs)
    points = sorted(set(points))
    if not arcs or not points:
        raise ValidationError("dense interval search needs nonempty arcs and points")
    if max(a.length for a in arcs) > ell:
        raise ValidationError("every arc must have length at most ell")
    cover = build_cover(m, ell)
    best, best_count = None, -1
    for a, b in cover.distinct:
        count_c = sum(1 for arc in arcs if arc.inside(a, b))
        count_p = bisect_left(points, b + 1) - bisect_left(points, a)
        if dense_interval_ok(count_c, len(arcs), count_p, len(points), m, ell) and count_c > best_count:
            best, best_count = (a, b), count_c
    if best is None:
        raise InvariantViolation("no cover interval satisfies the density inequality",
                                 {"m": m, "ell": ell, "arcs": len(arcs), "points": len(points)})
    return best


# ---- random nontrivial sequences -------------------------------------------

def random_nontrivial_sequence(graph, m, rng, attempts=100):
    """Random sequence of length m in which every arc has a nonempty interior.

    Each step draws uniformly among nodes that have not moved yet or whose arc closing
    now would contain an odd number of some neighbour. `rng` is a numpy Generator.
    """
    n = graph.n
    nbrs = graph.neighbor_sets
    for _ in range(attempts):
        seen = [False] * (n + 1)
        odd = [0] * (n + 1)
        parity = [dict() for _ in range(n + 1)]
        moves = []
        for _ in range(m):
            cand = [v for v in range(1, n + 1) if not seen[v] or odd[v] > 0]
            if not cand:
                break
            x = cand[int(rng.integers(len(cand)))]
            moves.append(x)
            seen[x] = True
            parity[x] = {}
            odd[x] = 0
            for v in nbrs[x]:
                if seen[v]:
                    p = parity[v].get(x, 0) ^ 1
                    parity[v][x] = p
                    odd[v] += 1 if p else -1
        if len(moves) == m:
            return MoveSequence(tuple(moves))
    raise RuntimeError("could not build a nontrivial sequence; graph too sparse")
