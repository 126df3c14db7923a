"""Exact rank over the rationals by fraction-free integer elimination."""

from fractions import Fraction
from math import gcd, lcm


def _integral(vec):
    """Scale a sparse rational vector to a primitive integer vector (drops zeros)."""
    items = [(k, Fraction(x)) for k, x in vec.items() if x != 0]
    if not items:
        return {}
    den = 1
    for _, x in items:
        den = lcm(den, x.denominator)
    out = {k: int(x * den) for k, x in items}
    return _primitive(out)


def _primitive(vec):
    g = 0
    for x in vec.values():
        g = gcd(g, x)
        if g == 1:
            return vec
    return {k: x // g for k, x in vec.items()} if g > 1 else vec


class EchelonBasis:
    """Incremental row-echelon basis of sparse integer vectors.

    Each stored vector is keyed by its smallest coordinate (its pivot); every other
    stored vector has no smaller coordinate than its own pivot. A new vector is
    reduced by cross-multiplication, so all arithmetic stays in the integers.
    """

    def __init__(self):
        self.rows = {}

    def __len__(self):
        return len(self.rows)

    def reduce(self, vec):
        v = _integral(vec)
        rows = self.rows
        while v:
            p = min(v)
            b = rows.get(p)
            if b is None:
                return v
            a, c = b[p], v[p]
            out = {}
            for k, x in v.items():
                out[k] = x * a
            for k, y in b.items():
                val = out.get(k, 0) - c * y
                if val:
                    out[k] = val
                else:
                    out.pop(k, None)
            v = _primitive(out) if out else out
        return v

    def add(self, vec):
        """Insert `vec`; return True iff it was independent of the basis."""
        v = self.reduce(vec)
        if not v:
            return False
        self.rows[min(v)] = v
        return True


def sparse_rank(vectors):
    basis = EchelonBasis()
    for vec in vectors:
        basis.add(vec)
    return len(basis)


def bareiss_rank(matrix):
    """Rank of a dense rational matrix via Bareiss fraction-free elimination."""
    rows = []
    for row in matrix:
        den = 1
        for x in row:
            den = lcm(den, Fraction(x).denominator)
        rows.append([int(Fraction(x) * den) for x in row])
    if not rows:
        return 0
    n_rows, n_cols = len(rows), len(rows[0])
    rank = 0
    prev = 1
    for col in range(n_cols):
        if rank == n_rows:
            break
        pivot = next((r for r in range(rank, n_rows) if rows[r][col] != 0), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        p = rows[rank][col]
        for r in range(rank + 1, n_rows):
            f = rows[r][col]
            row_r, row_p = rows[r], rows[rank]
            for c in range(col, n_cols):
                row_r[c] = (p * row_r[c] - f * row_p[c]) // prev
        prev = p
        rank += 1
    return rank


def dependency(vectors):
    """A nonzero rational combination of `vectors` summing to zero, or None.

    Vectors are sparse dicts; the answer is a list of Fractions, one per vector.
    """
    reduced = []  # (pivot, vector, combination)
    for i, vec in enumerate(vectors):
        v = {k: Fraction(x) for k, x in vec.items() if x != 0}
        combo = {i: Fraction(1)}
        for pivot, row, row_combo in reduced:
            c = v.get(pivot)
            if not c:
                continue
            factor = c / row[pivot]
            for k, y in row.items():
                val = v.get(k, 0) - factor * y
                if val:
                    v[k] = val
                else:
                    v.pop(k, None)
            for j, y in row_combo.items():
                val = combo.get(j, 0) - factor * y
                if val:
                    combo[j] = val
                else:
                    combo.pop(j, None)
        if not v:
            return [combo.get(j, Fraction(0)) for j in range(len(vectors))]
        reduced.append((min(v), v, combo))
    return None
