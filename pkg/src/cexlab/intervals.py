"""Finite unions of intervals with exact rational endpoints where possible.

The dyadic families built here are the geometric backbone of the bump
constructions: around every dyadic point j/2^n sits an interval of radius
2^(-beta*n), their union U_n is an open cover of the dyadic rationals of
level n, and the sets K_n are the complements of the tails of that cover
inside a fixed window.  Everything downstream (support checks, restricted
Lipschitz estimates, the measure bookkeeping of the candidate selection)
consumes these sets, so the arithmetic is kept exact whenever the radius
2^(-beta*n) is itself a dyadic rational.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

# Endpoints closer than this are merged when we fall back to floats.
FLOAT_MERGE_TOL = 1e-12


def _is_exact(x):
    return isinstance(x, (int, Fraction))


@dataclass(frozen=True)
class Interval:
    """Closed interval [lo, hi]; endpoints int, Fraction or float."""

    lo: object
    hi: object

    def __post_init__(self):
        if self.hi < self.lo:
            raise ValueError(f"interval endpoints out of order: {self.lo} > {self.hi}")

    @property
    def length(self):
        return self.hi - self.lo

    def contains(self, x):
        return self.lo <= x <= self.hi

    def intersect(self, other):
        """Intersection with another interval, or None if disjoint."""
        lo = max(self.lo, other.lo)
        hi = min(self.hi, other.hi)
        if hi < lo:
            return None
        return Interval(lo, hi)


class IntervalSet:
    """Finite union of disjoint closed intervals, sorted, non-touching.

    Construction normalizes: parts are sorted by left endpoint and
    overlapping or touching parts are merged, so `parts[i].hi <
    parts[i+1].lo` always holds afterwards.  With float endpoints, parts
    closer than `FLOAT_MERGE_TOL` are considered touching.
    """

    __slots__ = ("parts",)

    def __init__(self, parts=()):
        items = sorted((p if isinstance(p, Interval) else Interval(*p) for p in parts),
                       key=lambda p: (p.lo, p.hi))
        merged = []
        for p in items:
            if merged:
                last = merged[-1]
                gap = p.lo - last.hi
                tol = 0 if (_is_exact(p.lo) and _is_exact(last.hi)) else FLOAT_MERGE_TOL
                if gap <= tol:
                    if p.hi > last.hi:
                        merged[-1] = Interval(last.lo, p.hi)
                    continue
            merged.append(p)
        self.parts = tuple(merged)

    @classmethod
    def from_pairs(cls, pairs):
        return cls(Interval(a, b) for a, b in pairs)

    def __len__(self):
        return len(self.parts)

    def __iter__(self):
        return iter(self.parts)

    def __eq__(self, other):
        return isinstance(other, IntervalSet) and self.parts == other.parts

    def __repr__(self):
        inner = ", ".join(f"[{p.lo}, {p.hi}]" for p in self.parts)
        return f"IntervalSet({inner})"

    @property
    def measure(self):
        """Total length; exact (Fraction) when all endpoints are exact."""
        if not self.parts:
            return 0
        return sum((p.length for p in self.parts), start=0)

    def contains(self, x):
        # Parts are sorted, but linear scan is fine at the sizes we build.
        return any(p.contains(x) for p in self.parts)

    def distance(self, x):
        """Distance from the point x to the set (0 if inside)."""
        if not self.parts:
            return math.inf
        best = None
        for p in self.parts:
            if p.contains(x):
                return 0
            d = p.lo - x if x < p.lo else x - p.hi
            if best is None or d < best:
                best = d
        return best

    def union(self, other):
        return IntervalSet(self.parts + other.parts)

    def intersect(self, window):
        """Intersection with a single Interval."""
        out = []
        for p in self.parts:
            q = p.intersect(window)
            if q is not None:
                out.append(q)
        return IntervalSet(out)

    def complement(self, lo, hi):
        """Closure of [lo, hi] minus this set, as an IntervalSet."""
        if hi < lo:
            raise ValueError("empty window")
        out = []
        cur = lo
        for p in self.parts:
            if p.hi < lo:
                continue
            if p.lo > hi:
                break
            if p.lo > cur:
                out.append(Interval(cur, min(p.lo, hi)))
            cur = max(cur, p.hi)
            if cur >= hi:
                break
        if cur < hi:
            out.append(Interval(cur, hi))
        return IntervalSet(out)

    def sample_grid(self, step):
        """Float grid covering every part with spacing <= step.

        Part endpoints are always included, so no component is missed even
        when it is shorter than `step`.
        """
        if step <= 0:
            raise ValueError("step must be positive")
        chunks = []
        for p in self.parts:
            lo, hi = float(p.lo), float(p.hi)
            npts = max(2, int(math.ceil((hi - lo) / step)) + 1)
            chunks.append(np.linspace(lo, hi, npts))
        if not chunks:
            return np.empty(0)
        grid = np.concatenate(chunks)
        return np.unique(grid)


@dataclass(frozen=True)
class DyadicFamily:
    """Parameters of the dyadic interval family: radius 2^(-beta*n) around
    the points j/2^n, restricted to [-window, window]."""

    alpha: float
    beta: float
    window: object = 1

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")
        if not self.beta > 1:
            raise ValueError(f"beta must be > 1, got {self.beta}")
        if self.window < 0:
            raise ValueError(f"window must be >= 0, got {self.window}")

    def radius(self, n):
        """2^(-beta*n), exact when beta*n is an integer."""
        bn = Fraction(self.beta) * n
        if bn.denominator == 1:
            return Fraction(1, 2 ** bn.numerator)
        return 2.0 ** float(-bn)


def build_un(family, n):
    """The union U_n of intervals of radius 2^(-beta*n) around j/2^n,
    clipped to [-window, window].  Overlapping neighbours are merged."""
    if n < 1:
        raise ValueError(f"level n must be >= 1, got {n}")
    w = Fraction(family.window)
    r = family.radius(n)
    jmax = math.floor(w * 2 ** n)
    window = Interval(-w, w)
    parts = []
    for j in range(-jmax, jmax + 1):
        c = Fraction(j, 2 ** n)
        p = Interval(c - r, c + r).intersect(window)
        if p is not None:
            parts.append(p)
    return IntervalSet(parts)


def kn_tail_bound(family, nmax):
    """Upper bound on the measure missed by truncating the union of the
    U_i at i = nmax: sum over i > nmax of (2*window*2^i + 3) * 2 * 2^(-beta*i).

    Closed form of the two geometric series; always a float.
    """
    w = float(family.window)
    beta = float(family.beta)
    m = nmax + 1
    ra = 2.0 ** (1.0 - beta)     # ratio of the 2*window*2^i term
    rb = 2.0 ** (-beta)
    return 4.0 * w * ra ** m / (1.0 - ra) + 6.0 * rb ** m / (1.0 - rb)


def build_kn(family, n, nmax):
    """K_n truncated at level nmax: the window minus U_n, ..., U_nmax.

    The truncation error in measure is bounded by `kn_tail_bound(family,
    nmax)`; callers who need the genuine K_n pick nmax large enough for
    that bound to be negligible.
    """
    if nmax < n:
        raise ValueError(f"nmax must be >= n, got n={n}, nmax={nmax}")
    w = Fraction(family.window)
    acc = IntervalSet()
    for i in range(n, nmax + 1):
        acc = acc.union(build_un(family, i))
    return acc.complement(-w, w)


def omega_limit(sets, period):
    """Omega-limit of an eventually periodic sequence of IntervalSets.

    The sequence is understood as `sets[:-period]` followed by
    `sets[-period:]` repeating forever.  Every set in the periodic part
    occurs infinitely often and nothing else does, so the omega-limit (the
    set of accumulation points of tails) is the closure of the union of
    one period.  Closure is realised by the merge of touching parts.
    """
    if not sets:
        raise ValueError("need at least one set")
    if not 1 <= period <= len(sets):
        raise ValueError(f"period must be in 1..{len(sets)}, got {period}")
    acc = IntervalSet()
    for s in sets[-period:]:
        acc = acc.union(s)
    return acc
