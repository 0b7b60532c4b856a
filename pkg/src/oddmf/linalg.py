"""Exact linear algebra over Q with fraction-free row reduction.

Vectors are sparse ``{column: value}`` dicts.  Rows are cleared of
denominators and reduced with integer arithmetic; fractions only appear
during back substitution.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Dict, Iterable, List, Mapping, Optional, Sequence

Vec = Dict[int, Fraction]


def _to_int_row(row: Mapping[int, Fraction]) -> Dict[int, int]:
    vals = [Fraction(v) for v in row.values() if v]
    if not vals:
        return {}
    den = 1
    for v in vals:
        den = den * v.denominator // gcd(den, v.denominator)
    return {k: int(Fraction(v) * den) for k, v in row.items() if v}


def _primitive(row: Dict[int, int]) -> Dict[int, int]:
    g = 0
    for v in row.values():
        g = gcd(g, v)
        if g == 1:
            break
    lead = row[min(row)]
    if lead < 0:
        g = -g
    return {k: v // g for k, v in row.items()} if g not in (0, 1) else row


class Echelon:
    """An incrementally built row echelon form (pivot column -> primitive int row)."""

    def __init__(self):
        self.rows: Dict[int, Dict[int, int]] = {}

    def __len__(self):
        return len(self.rows)

    def reduce(self, row: Mapping[int, Fraction]) -> Dict[int, int]:
        r = _to_int_row(row)
        while r:
            hits = [c for c in r if c in self.rows]
            if not hits:
                break
            c = min(hits)
            p = self.rows[c]
            a, b = p[c], r[c]
            g = gcd(a, b)
            a, b = a // g, b // g
            out = {k: a * v for k, v in r.items()}
            for k, v in p.items():
                nv = out.get(k, 0) - b * v
                if nv:
                    out[k] = nv
                else:
                    out.pop(k, None)
            r = _primitive(out) if out else out
        return r

    def add(self, row: Mapping[int, Fraction]) -> bool:
        """Insert ``row``; return True when it was independent of the rows so far."""
        r = self.reduce(row)
        if not r:
            return False
        self.rows[min(r)] = _primitive(r)
        return True

    def contains(self, row: Mapping[int, Fraction]) -> bool:
        return not self.reduce(row)

    def back_substitute(self, fixed: Mapping[int, Fraction], rhs_col: Optional[int] = None) -> Vec:
        """Solve for pivot variables given values of the free ones.

        With ``rhs_col`` set, that column is treated as the right-hand side.
        """
        x: Vec = {k: Fraction(v) for k, v in fixed.items() if v}
        for c in sorted(self.rows, reverse=True):
            row = self.rows[c]
            acc = Fraction(row.get(rhs_col, 0)) if rhs_col is not None else Fraction(0)
            for k, v in row.items():
                if k == c or k == rhs_col:
                    continue
                xv = x.get(k)
                if xv:
                    acc -= v * xv
            val = acc / row[c]
            if val:
                x[c] = val
            else:
                x.pop(c, None)
        return x


def rank(rows: Iterable[Mapping[int, Fraction]]) -> int:
    e = Echelon()
    for r in rows:
        e.add(r)
    return len(e)


def nullspace(rows: Iterable[Mapping[int, Fraction]], ncols: int) -> List[Vec]:
    """Basis of ``{x : row . x = 0 for every row}`` in ``Q^ncols``."""
    e = Echelon()
    for r in rows:
        e.add(r)
    free = [c for c in range(ncols) if c not in e.rows]
    return [e.back_substitute({f: Fraction(1)}) for f in free]


def solve(rows: Sequence[Mapping[int, Fraction]], rhs: Sequence[Fraction], ncols: int) -> Optional[Vec]:
    """One solution of ``rows . x = rhs`` (free variables set to zero), or None."""
    e = Echelon()
    for r, b in zip(rows, rhs):
        aug = dict(r)
        if b:
            aug[ncols] = Fraction(b)
        red = e.reduce(aug)
        if not red:
            continue
        if min(red) == ncols:
            return None
        e.rows[min(red)] = _primitive(red)
    return e.back_substitute({}, rhs_col=ncols)


def transpose(cols: Sequence[Mapping[int, Fraction]]) -> Dict[int, Vec]:
    rows: Dict[int, Vec] = {}
    for j, col in enumerate(cols):
        for i, v in col.items():
            if v:
                rows.setdefault(i, {})[j] = Fraction(v)
    return rows


def solve_columns(cols: Sequence[Mapping[int, Fraction]], target: Mapping[int, Fraction]) -> Optional[Vec]:
    """Coefficients ``a`` with ``sum_j a_j cols[j] = target``, or None."""
    rows = transpose(cols)
    keys = set(rows) | {k for k, v in target.items() if v}
    return solve([rows.get(k, {}) for k in keys], [Fraction(target.get(k, 0)) for k in keys], len(cols))


def column_rank(cols: Sequence[Mapping[int, Fraction]]) -> int:
    return rank(cols)


def kernel_of_columns(cols: Sequence[Mapping[int, Fraction]]) -> List[Vec]:
    """Basis of relations ``a`` with ``sum_j a_j cols[j] = 0``."""
    rows = transpose(cols)
    return nullspace(rows.values(), len(cols))


def combine(cols: Sequence[Mapping[int, Fraction]], coeffs: Mapping[int, Fraction]) -> Vec:
    out: Vec = {}
    for j, a in coeffs.items():
        if not a:
            continue
        for i, v in cols[j].items():
            nv = out.get(i, 0) + a * v
            if nv:
                out[i] = nv
            else:
                out.pop(i, None)
    return out
