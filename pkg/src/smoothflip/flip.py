"""FLIP local search with pluggable pivot rules, plus the generic descent loop."""

import random
from dataclasses import dataclass
from enum import Enum

from .errors import ValidationError
from .instance import Configuration, flip_gain

FLOAT_THRESHOLD = 1e-12


class PivotRule(Enum):
    FIRST = "first"
    BEST = "best"
    RANDOM = "random"

    @classmethod
    def parse(cls, rule):
        if isinstance(rule, cls):
            return rule
        try:
            return cls(str(rule).lower().replace("-improvement", ""))
        except ValueError:
            raise ValidationError(f"unknown pivot rule {rule!r}", field="pivot") from None


@dataclass(frozen=True)
class FlipTrace:
    initial: Configuration
    moves: tuple
    gains: tuple
    final: Configuration
    terminated: bool

    @property
    def steps(self):
        return len(self.moves)


def threshold_for(exact):
    return 0 if exact else FLOAT_THRESHOLD


def _select(gains, n, rule, rng, threshold):
    if rule is PivotRule.FIRST:
        for v in range(1, n + 1):
            if gains[v] > threshold:
                return v
        return None
    if rule is PivotRule.BEST:
        best, best_gain = None, threshold
        for v in range(1, n + 1):
            if gains[v] > best_gain:
                best, best_gain = v, gains[v]
        return best
    improving = [v for v in range(1, n + 1) if gains[v] > threshold]
    return rng.choice(improving) if improving else None


def local_search(state, rule, step_cap, seed=0):
    """Run improving single-variable flips on `state` until none is left or the cap is hit.

    `state` exposes n, exact, gains (list indexed 1..n, maintained incrementally),
    fresh_gain(v), flip(v) and refresh(). The chosen move's gain is always the fresh
    local value, so replays reproduce recorded gains bit for bit.
    Returns (moves, gains, terminated).
    """
    rule = PivotRule.parse(rule)
    if step_cap < 0:
        raise ValidationError("step_cap must be non-negative", field="step_cap")
    rng = random.Random(seed)
    threshold = threshold_for(state.exact)
    moves, gains = [], []
    while True:
        v = _select(state.gains, state.n, rule, rng, threshold)
        if v is None and not state.exact:
            state.refresh()
            v = _select(state.gains, state.n, rule, rng, threshold)
        if v is None:
            return moves, gains, True
        if len(moves) >= step_cap:
            return moves, gains, False
        g = state.fresh_gain(v)
        if not g > threshold:
            state.gains[v] = g
            continue
        state.flip(v)
        moves.append(v)
        gains.append(g)


class CutState:
    """Signs and incrementally maintained flip gains for a weighted graph."""

    def __init__(self, inst, signs):
        inst.require_weights()
        self.n = inst.n
        self.exact = inst.is_exact
        self.incident = inst.incident
        self.w = inst.weights
        self.signs = [0] + list(signs)
        self.gains = [0] * (self.n + 1)
        self.refresh()

    def fresh_gain(self, v):
        s, w = self.signs, self.w
        sv = s[v]
        g = 0
        for u, e in self.incident[v]:
            g += w[e] * sv * s[u]
        return g

    def refresh(self):
        for v in range(1, self.n + 1):
            self.gains[v] = self.fresh_gain(v)

    def flip(self, v):
        s, w, gains = self.signs, self.w, self.gains
        sv = s[v]
        for u, e in self.incident[v]:
            gains[u] -= 2 * w[e] * s[u] * sv
        s[v] = -sv
        gains[v] = -gains[v]


def run_flip(inst, init, rule="best", step_cap=None, seed=0):
    signs = init.as_list(inst.n)
    if step_cap is None:
        step_cap = 10 * inst.n ** 3
    state = CutState(inst, signs)
    moves, gains, terminated = local_search(state, rule, step_cap, seed)
    final = Configuration.from_list(state.signs[1:])
    return FlipTrace(init, tuple(moves), tuple(gains), final, terminated)


def is_local_optimum(inst, cfg, tol=None):
    """No single flip gains more than `tol` (0 in exact mode, 1e-12 for floats by default)."""
    if tol is None:
        tol = threshold_for(inst.is_exact)
    cfg.require_total(inst.n)
    return all(flip_gain(inst, cfg, v) <= tol for v in range(1, inst.n + 1))


def replay(inst, initial, moves):
    """Recompute per-step gains and the final configuration from scratch."""
    cfg = initial
    gains = []
    for v in moves:
        gains.append(flip_gain(inst, cfg, v))
        cfg = cfg.flipped(v)
    return gains, cfg


def final_of(initial, moves):
    signs = dict(initial)
    for v in moves:
        signs[v] = -signs[v]
    return Configuration(signs)


def min_arc_gain(trace):
    """Smallest summed gain over consecutive same-node move pairs, or None without arcs."""
    last = {}
    best = None
    for k, v in enumerate(trace.moves):
        if v in last:
            total = trace.gains[last[v]] + trace.gains[k]
            if best is None or total < best:
                best = total
        last[v] = k
    return best
