"""Shared generators and independent brute-force oracles for the tests.

The oracles deliberately avoid the production code paths: packing numbers
by raw subset enumeration, close-pair counts straight from the definition,
and feasible targets built by pushing a random mixture through the forward
moment map by hand.
"""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

from realkit.metric import Configuration, FiniteMetricSpace, make_space
from realkit.setrealize import TwoPointTarget


def brute_force_packing(space: FiniteMetricSpace, t: Fraction) -> int:
    """Maximum subset with pairwise distances > t, by full enumeration."""
    n = space.n
    best = 0
    for mask in range(1 << n):
        members = [i for i in range(n) if (mask >> i) & 1]
        if all(
            space.dist[i][j] > t
            for i, j in itertools.combinations(members, 2)
        ):
            best = max(best, len(members))
    return best


def brute_force_close_pairs(space: FiniteMetricSpace, config: Configuration, t) -> int:
    """Ordered close-pair count straight from the particle-list definition."""
    particles = []
    for i, m in enumerate(config.multiplicity):
        particles.extend([i] * m)
    count = 0
    for a in range(len(particles)):
        for b in range(len(particles)):
            if a != b and space.dist[particles[a]][particles[b]] <= t:
                count += 1
    return count


def random_metric_space(rng: random.Random, n: int, denominator: int = 4) -> FiniteMetricSpace:
    """Random rational metric via shortest-path closure of a positive matrix."""
    d = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            d[i][j] = d[j][i] = Fraction(rng.randint(1, 4 * denominator), denominator)
    for k in range(n):
        for i in range(n):
            for j in range(n):
                if d[i][k] + d[k][j] < d[i][j]:
                    d[i][j] = d[i][k] + d[k][j]
    return make_space(d)


def random_two_point_target(rng: random.Random, n: int) -> TwoPointTarget:
    """Either the exact moments of a random mixture (feasible) or a random
    symmetric matrix from a coarse grid (frequently infeasible)."""
    if rng.random() < 0.5:
        return mixture_moments_target(rng, n)
    denom = rng.choice([4, 8])
    p = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        p[i][i] = Fraction(rng.randint(0, denom), denom)
        for j in range(i + 1, n):
            p[i][j] = p[j][i] = Fraction(rng.randint(0, denom), denom)
    return TwoPointTarget.from_matrix(p)


def mixture_moments_target(rng: random.Random, n: int) -> TwoPointTarget:
    """Moments of a random subset mixture, computed here by hand."""
    k = rng.randint(1, 8)
    masks = [rng.randrange(1 << n) for _ in range(k)]
    weights = [Fraction(rng.randint(1, 9)) for _ in range(k)]
    total = sum(weights)
    weights = [w / total for w in weights]
    p = [[Fraction(0)] * n for _ in range(n)]
    for mask, w in zip(masks, weights):
        members = [i for i in range(n) if (mask >> i) & 1]
        for i in members:
            for j in members:
                if i <= j:
                    p[i][j] += w
    for i in range(n):
        for j in range(i + 1, n):
            p[j][i] = p[i][j]
    return TwoPointTarget.from_matrix(p, validate_range=False)


def random_simple_config_mixture(rng: random.Random, n: int, cap: int):
    """A random law on simple configurations: (atoms, weights)."""
    k = rng.randint(1, 6)
    atoms = []
    for _ in range(k):
        size = rng.randint(0, min(cap, n))
        support = rng.sample(range(n), size)
        m = [0] * n
        for i in support:
            m[i] = 1
        atoms.append(Configuration(tuple(m)))
    weights = [Fraction(rng.randint(1, 9)) for _ in atoms]
    total = sum(weights)
    weights = [w / total for w in weights]
    merged: dict[tuple, Fraction] = {}
    for cfg, w in zip(atoms, weights):
        merged[cfg.multiplicity] = merged.get(cfg.multiplicity, Fraction(0)) + w
    return [(Configuration(m), w) for m, w in sorted(merged.items())]
