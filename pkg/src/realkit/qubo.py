"""Exact minimisation of c + sum_{i<=j} a_ij 1{i,j in F} over subsets F.

This is the workhorse that prices columns for the set-realisation LP and
re-verifies infeasibility certificates: the global minimum over all 2^n
subsets is computed exactly (integer arithmetic after clearing
denominators) up to n = 20, and by branch and bound with interval bounds
up to n = 30.
"""

from __future__ import annotations

from fractions import Fraction
from math import lcm
from typing import Sequence

import numpy as np

from .errors import CapExceeded, InvalidInstance

ENUM_LIMIT = 20
BB_LIMIT = 30


def check_symmetric(a: Sequence[Sequence], n: int) -> None:
    if len(a) != n or any(len(row) != n for row in a):
        raise InvalidInstance("coefficient matrix must be n x n")
    for i in range(n):
        for j in range(i + 1, n):
            if a[i][j] != a[j][i]:
                raise InvalidInstance(f"coefficient matrix not symmetric at ({i},{j})")


def evaluate_g(c, a: Sequence[Sequence], subset) -> Fraction:
    """Value of the induced set functional at one subset (upper-triangle sum)."""
    members = sorted(subset)
    n = len(a)
    check_symmetric(a, n)
    total = c
    for pos, i in enumerate(members):
        if i < 0 or i >= n:
            raise InvalidInstance(f"subset index {i} out of range")
        total = total + a[i][i]
        for j in members[pos + 1 :]:
            total = total + a[i][j]
    return total


def lex_min_mask(masks) -> int:
    """Among bitmask-coded subsets, the one whose sorted index tuple is
    lexicographically smallest (the empty set first)."""
    masks = list(masks)
    if not masks:
        raise ValueError("no masks given")
    prefix = 0
    while True:
        if any(m == 0 for m in masks):
            return prefix
        lows = [m & (-m) for m in masks]
        low = min(lows)
        prefix |= low
        masks = [m ^ low for m, lo in zip(masks, lows) if lo == low]


def _mask_to_subset(mask: int) -> frozenset[int]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return frozenset(out)


def _enumerate_exact(c: Fraction, a, n: int) -> tuple[frozenset[int], Fraction]:
    """Doubling enumeration over all subsets with cleared denominators."""
    denoms = [c.denominator] + [a[i][j].denominator for i in range(n) for j in range(i, n)]
    scale = lcm(*denoms)
    ai = [[int(a[i][j] * scale) for j in range(n)] for i in range(n)]
    vals = [int(c * scale)]
    for k in range(n):
        # value of S + {k} = value of S + a_kk + sum_{j in S} a_jk
        deltas = [0]
        for j in range(k):
            w = ai[j][k]
            deltas += [d + w for d in deltas]
        diag = ai[k][k]
        vals += [v + diag + d for v, d in zip(vals, deltas)]
    best = min(vals)
    ties = [m for m, v in enumerate(vals) if v == best]
    mask = lex_min_mask(ties)
    return _mask_to_subset(mask), Fraction(best, scale)


def _enumerate_float(c: float, a, n: int) -> tuple[frozenset[int], float]:
    af = np.asarray(a, dtype=float)
    vals = np.array([c])
    for k in range(n):
        deltas = np.zeros(1)
        for j in range(k):
            deltas = np.concatenate([deltas, deltas + af[j, k]])
        vals = np.concatenate([vals, vals + af[k, k] + deltas])
    best = vals.min()
    ties = np.flatnonzero(vals == best)
    mask = lex_min_mask(int(m) for m in ties)
    return _mask_to_subset(mask), float(best)


def _branch_and_bound(c, a, n: int) -> tuple[frozenset[int], object]:
    """Exact search over the subset tree in lexicographic emission order.

    A node is a sorted prefix P; children extend it by a larger index. The
    bound adds every negative contribution still available, so pruning at
    bound >= incumbent is safe, and because leaves are emitted in
    lexicographic order the first incumbent with the final value is the
    lex-smallest minimiser.
    """
    zero = c - c  # additive zero of whatever number type is in use

    def neg_tail(prefix: list[int], start: int) -> object:
        s = zero
        for e in range(start, n):
            w = a[e][e]
            for j in prefix:
                w = w + a[j][e]
            if w < 0:
                s = s + w
            for f in range(e + 1, n):
                if a[e][f] < 0:
                    s = s + a[e][f]
        return s

    best_val = c
    best_set: tuple[int, ...] = ()

    def visit(prefix: list[int], value, start: int) -> None:
        nonlocal best_val, best_set
        for e in range(start, n):
            delta = a[e][e]
            for j in prefix:
                delta = delta + a[j][e]
            child_val = value + delta
            prefix.append(e)
            if child_val < best_val:
                best_val = child_val
                best_set = tuple(prefix)
            if child_val + neg_tail(prefix, e + 1) < best_val:
                visit(prefix, child_val, e + 1)
            prefix.pop()

    visit([], c, 0)
    return frozenset(best_set), best_val


def qubo_topk_float(c: float, a, n: int, k: int) -> list[tuple[int, float]]:
    """Masks of the k smallest functional values (float enumeration, n <= 20).

    Used by column generation to add several priced columns per round.
    """
    if n > ENUM_LIMIT:
        raise CapExceeded(f"top-k enumeration is capped at n = {ENUM_LIMIT}")
    af = np.asarray(a, dtype=float)
    vals = np.array([c])
    for kk in range(n):
        deltas = np.zeros(1)
        for j in range(kk):
            deltas = np.concatenate([deltas, deltas + af[j, kk]])
        vals = np.concatenate([vals, vals + af[kk, kk] + deltas])
    k = min(k, len(vals))
    idx = np.argpartition(vals, k - 1)[:k]
    idx = idx[np.argsort(vals[idx], kind="stable")]
    return [(int(m), float(vals[m])) for m in idx]


def qubo_min(c, a: Sequence[Sequence], n: int, exact: bool = True) -> tuple[frozenset[int], object]:
    """Global minimum of the subset functional; ties go to the subset whose
    sorted index tuple is lexicographically smallest.

    exact=True expects rational coefficients and returns a Fraction value;
    exact=False runs in floats (used for pricing, where the verdict is
    re-verified exactly afterwards).
    """
    check_symmetric(a, n)
    if n < 0:
        raise InvalidInstance("n must be non-negative")
    if n == 0:
        return frozenset(), c
    if n > BB_LIMIT:
        raise CapExceeded(f"n={n} above the exact cap {BB_LIMIT}")
    if exact:
        cf = c if isinstance(c, Fraction) else Fraction(c)
        af = [[Fraction(a[i][j]) for j in range(n)] for i in range(n)]
        if n <= ENUM_LIMIT:
            return _enumerate_exact(cf, af, n)
        return _branch_and_bound(cf, af, n)
    if n <= ENUM_LIMIT:
        return _enumerate_float(float(c), a, n)
    af = [[float(a[i][j]) for j in range(n)] for i in range(n)]
    return _branch_and_bound(float(c), af, n)
