"""Binary function optimization over {0,1} variables, its arc matrix, and reductions."""

from dataclasses import dataclass
from fractions import Fraction
from numbers import Real

from .arcs import POS_INF, ArcMatrix, MoveSequence, find_arcs
from .errors import ValidationError
from .flip import FlipTrace, PivotRule, local_search

XOR = ((0, 1), (1, 0))
EQUAL = ((1, -1), (-1, 1))
FORWARD = ((0, 1), (0, 0))


def _table2(table):
    try:
        (a, b), (c, d) = table
    except (TypeError, ValueError):
        raise ValidationError(f"binary table must be 2x2, got {table!r}", field="table") from None
    vals = (a, b, c, d)
    if not all(isinstance(x, Real) and not isinstance(x, bool) for x in vals):
        raise ValidationError(f"table entries must be numbers, got {table!r}", field="table")
    return ((a, b), (c, d))


def _table1(table):
    try:
        a, b = table
    except (TypeError, ValueError):
        raise ValidationError(f"unary table must have two values, got {table!r}", field="table") from None
    return (a, b)


def is_separable(table):
    (f00, f01), (f10, f11) = _table2(table)
    return f00 + f11 == f01 + f10


def separate(table):
    """Unary parts (f1, f2) with table[x][y] = f1[x] + f2[y]."""
    (f00, f01), (f10, f11) = _table2(table)
    if f00 + f11 != f01 + f10:
        raise ValidationError("table is nonseparable", field="table")
    c = f10 - f00
    d = f01 - f00
    return (f00, f00 + c), (0, d)


def nonseparability(table):
    """f(0,0)+f(1,1)-f(0,1)-f(1,0); zero exactly for separable tables."""
    (f00, f01), (f10, f11) = _table2(table)
    return f00 + f11 - f01 - f10


@dataclass(frozen=True)
class Binary:
    vars: tuple
    table: tuple
    weight: object = 1


@dataclass(frozen=True)
class Unary:
    var: int
    table: tuple
    weight: object = 1


@dataclass(frozen=True)
class BFOPInstance:
    n: int
    binary: tuple = ()
    unary: tuple = ()

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 0:
            raise ValidationError(f"n must be a non-negative integer, got {self.n!r}", field="n")
        binary = []
        for i, f in enumerate(self.binary):
            if not isinstance(f, Binary):
                f = Binary(*f)
            x, y = f.vars
            if x == y:
                raise ValidationError(f"binary function {i} uses variable {x} twice",
                                      field=f"binary[{i}]")
            for v in (x, y):
                self._check_var(v, f"binary[{i}]")
            binary.append(Binary((x, y), _table2(f.table), f.weight))
        unary = []
        for i, f in enumerate(self.unary):
            if not isinstance(f, Unary):
                f = Unary(*f)
            self._check_var(f.var, f"unary[{i}]")
            unary.append(Unary(f.var, _table1(f.table), f.weight))
        object.__setattr__(self, "binary", tuple(binary))
        object.__setattr__(self, "unary", tuple(unary))

    def _check_var(self, v, where):
        if not isinstance(v, int) or not 1 <= v <= self.n:
            raise ValidationError(f"variable {v!r} outside 1..{self.n}", field=where)

    @property
    def is_normalized(self):
        return all(not is_separable(f.table) for f in self.binary)

    @property
    def touching(self):
        """touching[v] = (binary indices, unary indices) involving v."""
        out = [([], []) for _ in range(self.n + 1)]
        for i, f in enumerate(self.binary):
            for v in f.vars:
                out[v][0].append(i)
        for i, f in enumerate(self.unary):
            out[f.var][1].append(i)
        return out

    def with_binary_weights(self, weights):
        weights = tuple(weights)
        if len(weights) != len(self.binary):
            raise ValidationError("one weight per binary function required", field="weights")
        return BFOPInstance(self.n, tuple(Binary(f.vars, f.table, w) for f, w in zip(self.binary, weights)),
                            self.unary)


def normalize(inst):
    """Replace separable binary tables by their two unary parts (same weight)."""
    binary, unary = [], list(inst.unary)
    for f in inst.binary:
        if is_separable(f.table):
            first, second = separate(f.table)
            unary.append(Unary(f.vars[0], first, f.weight))
            unary.append(Unary(f.vars[1], second, f.weight))
        else:
            binary.append(f)
    return BFOPInstance(inst.n, tuple(binary), tuple(unary))


def bfop(n, binary=(), unary=()):
    return normalize(BFOPInstance(n, tuple(binary), tuple(unary)))


def _check_assignment(inst, a):
    a = tuple(a)
    if len(a) != inst.n or any(x not in (0, 1) for x in a):
        raise ValidationError(f"assignment must be {inst.n} values in {{0,1}}", field="assignment")
    return a


def bfop_objective(inst, a):
    a = _check_assignment(inst, a)
    total = 0
    for f in inst.binary:
        x, y = f.vars
        total += f.weight * f.table[a[x - 1]][a[y - 1]]
    for f in inst.unary:
        total += f.weight * f.table[a[f.var - 1]]
    return total


def _local_gain(inst, touching, a, v):
    """Objective change from flipping v, from the functions that touch v; `a` is 0-based indexed."""
    old = a[v - 1]
    new = 1 - old
    gain = 0
    bins, uns = touching[v]
    for i in bins:
        f = inst.binary[i]
        x, y = f.vars
        if x == v:
            other = a[y - 1]
            gain += f.weight * (f.table[new][other] - f.table[old][other])
        else:
            other = a[x - 1]
            gain += f.weight * (f.table[other][new] - f.table[other][old])
    for i in uns:
        f = inst.unary[i]
        gain += f.weight * (f.table[new] - f.table[old])
    return gain


def bfop_flip_gain(inst, a, x):
    a = _check_assignment(inst, a)
    inst._check_var(x, "variable")
    return _local_gain(inst, inst.touching, a, x)


class BFOPState:
    """Local-search state for BFOP; gains of a flipped variable's neighbours are recomputed."""

    def __init__(self, inst, assignment):
        self.inst = inst
        self.n = inst.n
        self.a = list(_check_assignment(inst, assignment))
        self.touching = inst.touching
        weights = [f.weight for f in inst.binary] + [f.weight for f in inst.unary]
        self.exact = all(isinstance(w, (int, Fraction)) for w in weights)
        nbrs = [set() for _ in range(self.n + 1)]
        for f in inst.binary:
            x, y = f.vars
            nbrs[x].add(y)
            nbrs[y].add(x)
        self.nbrs = [sorted(s) for s in nbrs]
        self.gains = [0] * (self.n + 1)
        self.refresh()

    def fresh_gain(self, v):
        return _local_gain(self.inst, self.touching, self.a, v)

    def refresh(self):
        for v in range(1, self.n + 1):
            self.gains[v] = self.fresh_gain(v)

    def flip(self, v):
        self.a[v - 1] ^= 1
        self.gains[v] = self.fresh_gain(v)
        for u in self.nbrs[v]:
            self.gains[u] = self.fresh_gain(u)


def run_bfop_flip(inst, assignment, rule="best", step_cap=None, seed=0):
    """FLIP on a BFOP objective; the trace's configurations are 0/1 tuples."""
    rule = PivotRule.parse(rule)
    state = BFOPState(inst, assignment)
    if step_cap is None:
        step_cap = 10 * max(inst.n, 1) ** 3
    moves, gains, terminated = local_search(state, rule, step_cap, seed)
    return FlipTrace(tuple(assignment), tuple(moves), tuple(gains), tuple(state.a), terminated)


def is_bfop_local_optimum(inst, a, tol=0):
    a = _check_assignment(inst, a)
    touching = inst.touching
    return all(_local_gain(inst, touching, a, v) <= tol for v in range(1, inst.n + 1))


# ---- arc matrix -------------------------------------------------------------

def _deltas(inst, touching, a, v):
    """Unweighted change of each binary function touching v when v flips."""
    old = a[v - 1]
    new = 1 - old
    out = {}
    for i in touching[v][0]:
        f = inst.binary[i]
        x, y = f.vars
        if x == v:
            d = f.table[new][a[y - 1]] - f.table[old][a[y - 1]]
        else:
            d = f.table[a[x - 1]][new] - f.table[a[x - 1]][old]
        out[i] = d
    return out


def bfop_arc_matrix(inst, seq, init):
    """Rows are binary functions, columns are arcs; column = sum of the two endpoint deltas."""
    if not inst.is_normalized:
        raise ValidationError("arc matrix needs a normalized instance (no separable tables)")
    if not isinstance(seq, MoveSequence):
        seq = MoveSequence(tuple(seq))
    a = list(_check_assignment(inst, init))
    if any(v > inst.n for v in seq.moves):
        raise ValidationError("sequence flips a variable outside the instance", field="moves")
    touching = inst.touching
    arcs = find_arcs(seq)
    open_at = {}
    cols = {}
    for k, v in enumerate(seq.moves, 1):
        delta = _deltas(inst, touching, a, v)
        if k in open_at:
            first = open_at.pop(k)
            col = dict(first)
            for i, x in delta.items():
                col[i] = col.get(i, 0) + x
            cols[k] = {i: x for i, x in col.items() if x != 0}
        if seq.succ[k] is not POS_INF:
            open_at[seq.succ[k]] = delta
        a[v - 1] ^= 1
    columns = tuple(cols[arc.right] for arc in arcs)
    return ArcMatrix(tuple(range(len(inst.binary))), tuple(arcs), columns)


def xor_instance(graph_inst):
    """One XOR function per edge, in edge order, with the graph's weights (1 if absent)."""
    weights = graph_inst.weights or (1,) * graph_inst.m
    return bfop(graph_inst.n, [Binary((u, v), XOR, w) for (u, v), w in zip(graph_inst.edges, weights)])


# ---- reductions -------------------------------------------------------------

def clause_table(lit1, lit2):
    """Truth table of (lit1 or lit2) over (var(lit1), var(lit2)); literals are signed ints."""
    return tuple(tuple(int((x == (lit1 > 0)) or (y == (lit2 > 0))) for y in (0, 1)) for x in (0, 1))


def reduce_max2sat(n, clauses):
    """Clauses are (weight, literals) with one or two DIMACS literals each."""
    binary, unary = [], []
    for i, (w, lits) in enumerate(clauses):
        lits = tuple(lits)
        if not 1 <= len(lits) <= 2 or any(l == 0 or abs(l) > n for l in lits):
            raise ValidationError(f"clause {i} is malformed: {lits!r}", field=f"clauses[{i}]")
        if len(lits) == 1 or lits[0] == lits[1]:
            l = lits[0]
            unary.append(Unary(abs(l), (0, 1) if l > 0 else (1, 0), w))
        elif lits[0] == -lits[1]:
            unary.append(Unary(abs(lits[0]), (1, 1), w))
        else:
            binary.append(Binary((abs(lits[0]), abs(lits[1])), clause_table(*lits), w))
    return bfop(n, binary, unary)


def max2sat_value(clauses, a):
    total = 0
    for w, lits in clauses:
        if any((a[abs(l) - 1] == 1) == (l > 0) for l in lits):
            total += w
    return total


def read_wcnf(text):
    """Weighted 2-CNF in a DIMACS-like format: 'p wcnf n m' then 'w l1 [l2] 0' lines."""
    n = None
    clauses = []
    for lineno, line in enumerate(text.splitlines(), 1):
        parts = line.split()
        if not parts or parts[0] == "c":
            continue
        if parts[0] == "p":
            if len(parts) < 3 or parts[1] not in ("wcnf", "cnf"):
                raise ValidationError(f"line {lineno}: bad problem line", field="header")
            n = int(parts[2])
            continue
        try:
            nums = [int(x) for x in parts]
        except ValueError:
            raise ValidationError(f"line {lineno}: non-integer token", field=f"line {lineno}") from None
        if nums[-1] != 0 or len(nums) < 3:
            raise ValidationError(f"line {lineno}: clause must be 'w l1 [l2] 0'", field=f"line {lineno}")
        clauses.append((nums[0], tuple(nums[1:-1])))
    if n is None:
        raise ValidationError("missing 'p wcnf' header", field="header")
    return n, clauses


def reduce_directed_cut(n, arcs):
    """`arcs` are (tail, head, weight); value 1 when tail is on side 0 and head on side 1."""
    return bfop(n, [Binary((u, v), FORWARD, w) for u, v, w in arcs])


def directed_cut_value(arcs, a):
    return sum(w for u, v, w in arcs if a[u - 1] == 0 and a[v - 1] == 1)


def to_spin(bit):
    return 2 * bit - 1


def to_bit(spin):
    return (spin + 1) // 2


def reduce_hopfield(graph_inst, thresholds):
    """Potential sum t_u s_u + sum w_uv s_u s_v with state -1 encoded as 0."""
    graph_inst.require_weights()
    thresholds = tuple(thresholds)
    if len(thresholds) != graph_inst.n:
        raise ValidationError("one threshold per node required", field="thresholds")
    binary = [Binary((u, v), EQUAL, w) for (u, v), w in zip(graph_inst.edges, graph_inst.weights)]
    unary = [Unary(u, (-1, 1), t) for u, t in enumerate(thresholds, 1)]
    return bfop(graph_inst.n, binary, unary)


def hopfield_potential(graph_inst, thresholds, spins):
    total = sum(t * s for t, s in zip(thresholds, spins))
    for (u, v), w in zip(graph_inst.edges, graph_inst.weights):
        total += w * spins[u - 1] * spins[v - 1]
    return total


def hopfield_stable(graph_inst, thresholds, spins, u):
    field = thresholds[u - 1]
    for v, e in graph_inst.incident[u]:
        field += graph_inst.weights[e] * spins[v - 1]
    return field <= 0 if spins[u - 1] == -1 else field >= 0


def reduce_coordination(n, games):
    """`games` are (u, v, payoff) with payoff[x][y] shared by both players."""
    binary = []
    for u, v, payoff in games:
        payoff = _table2(payoff)
        for x in (0, 1):
            for y in (0, 1):
                table = tuple(tuple(int((i, j) == (x, y)) for j in (0, 1)) for i in (0, 1))
                binary.append(Binary((u, v), table, payoff[x][y]))
    return bfop(n, binary)


def coordination_payoff(games, a):
    return sum(payoff[a[u - 1]][a[v - 1]] for u, v, payoff in games)


# ---- JSON shape -------------------------------------------------------------

def bfop_to_dict(inst):
    return {
        "n": inst.n,
        "binary": [{"vars": list(f.vars), "table": [list(r) for r in f.table], "weight": f.weight}
                   for f in inst.binary],
        "unary": [{"var": f.var, "table": list(f.table), "weight": f.weight} for f in inst.unary],
    }


def bfop_from_dict(data, normalized=True):
    try:
        binary = [Binary(tuple(f["vars"]), f["table"], f.get("weight", 1)) for f in data.get("binary", [])]
        unary = [Unary(f["var"], f["table"], f.get("weight", 1)) for f in data.get("unary", [])]
        inst = BFOPInstance(data["n"], tuple(binary), tuple(unary))
    except (KeyError, TypeError, AttributeError) as exc:
        raise ValidationError(f"malformed BFOP document: {exc}") from None
    return normalize(inst) if normalized else inst
