"""Finite metric spaces, packing numbers and close-pair combinatorics.

Distances are exact rationals so that the strict comparison in "pairwise
distances exceeding t" (packing) and the closed one in "distance at most t"
(close pairs) are decided without rounding.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import CapExceeded, InvalidInstance
from .numbers import parse_rational

GAMMA_MASS_CAP = 8


@dataclass(frozen=True)
class FiniteMetricSpace:
    """Labeled points with a validated rational distance matrix."""

    labels: tuple[str, ...]
    dist: tuple[tuple[Fraction, ...], ...]

    @property
    def n(self) -> int:
        return len(self.labels)

    @staticmethod
    def from_json(obj: dict) -> "FiniteMetricSpace":
        if not isinstance(obj, dict) or "labels" not in obj or "dist" not in obj:
            raise InvalidInstance("space: expected keys 'labels' and 'dist'")
        labels = tuple(str(x) for x in obj["labels"])
        rows = obj["dist"]
        if not isinstance(rows, list) or len(rows) != len(labels):
            raise InvalidInstance("space: 'dist' must be a square matrix matching 'labels'")
        dist = []
        for i, row in enumerate(rows):
            if not isinstance(row, list) or len(row) != len(labels):
                raise InvalidInstance(f"space: row {i} of 'dist' has wrong length")
            dist.append(tuple(parse_rational(v, f"/dist/{i}/{j}") for j, v in enumerate(row)))
        space = FiniteMetricSpace(labels, tuple(dist))
        report = validate_metric(space)
        if not report.ok:
            raise InvalidInstance("space: " + "; ".join(report.messages()))
        return space

    def distance_values(self) -> list[Fraction]:
        """Sorted distinct positive pairwise distances."""
        vals = {self.dist[i][j] for i in range(self.n) for j in range(i + 1, self.n)}
        return sorted(vals)


def make_space(dist_rows: Sequence[Sequence], labels: Sequence[str] | None = None) -> FiniteMetricSpace:
    """Build and validate a space from rational-like entries."""
    n = len(dist_rows)
    if labels is None:
        labels = tuple(f"x{i}" for i in range(n))
    dist = tuple(
        tuple(v if isinstance(v, Fraction) else parse_rational(v) for v in row)
        for row in dist_rows
    )
    space = FiniteMetricSpace(tuple(labels), dist)
    report = validate_metric(space)
    if not report.ok:
        raise InvalidInstance("; ".join(report.messages()))
    return space


@dataclass(frozen=True)
class Configuration:
    """Counting measure on the space as a vector of multiplicities."""

    multiplicity: tuple[int, ...]

    @property
    def total_mass(self) -> int:
        return sum(self.multiplicity)

    @property
    def simple(self) -> bool:
        return all(m <= 1 for m in self.multiplicity)

    def support(self) -> tuple[int, ...]:
        return tuple(i for i, m in enumerate(self.multiplicity) if m > 0)


@dataclass(frozen=True)
class MetricReport:
    ok: bool
    violations: tuple[tuple[str, tuple[int, ...]], ...]

    def messages(self) -> list[str]:
        return [f"{kind} violated at {idx}" for kind, idx in self.violations]


def validate_metric(space: FiniteMetricSpace, tol: Fraction = Fraction(1, 10**12)) -> MetricReport:
    """Check the metric axioms, reporting every offending index tuple.

    The triangle inequality is tested with slack `tol` so that spaces keyed
    in with rounded decimals are not rejected for dust.
    """
    n = len(space.labels)
    if len(space.dist) != n or any(len(row) != n for row in space.dist):
        raise InvalidInstance("distance matrix dimensions do not match label count")
    if n < 1:
        raise InvalidInstance("a space needs at least one point")
    bad: list[tuple[str, tuple[int, ...]]] = []
    d = space.dist
    for i in range(n):
        if d[i][i] != 0:
            bad.append(("zero-diagonal", (i,)))
    for i in range(n):
        for j in range(i + 1, n):
            if d[i][j] != d[j][i]:
                bad.append(("symmetry", (i, j)))
            if d[i][j] <= 0:
                bad.append(("positivity", (i, j)))
    for i, j, k in itertools.permutations(range(n), 3):
        if i < j and d[i][j] > d[i][k] + d[k][j] + tol:
            bad.append(("triangle", (i, j, k)))
    return MetricReport(ok=not bad, violations=tuple(bad))


def _close_masks(space: FiniteMetricSpace, t: Fraction) -> list[int]:
    """Adjacency bitmasks of the graph with edges {d(i,j) <= t}, i != j."""
    n = space.n
    masks = [0] * n
    for i in range(n):
        for j in range(n):
            if i != j and space.dist[i][j] <= t:
                masks[i] |= 1 << j
    return masks


def packing_set(space: FiniteMetricSpace, t) -> frozenset[int]:
    """A maximum set of points with pairwise distances strictly exceeding t.

    Exact branch and bound on the conflict graph (edges at distance <= t):
    greedy gives the initial incumbent, branching follows descending conflict
    degree with index tie-breaks, so the result is deterministic.
    """
    t = t if isinstance(t, Fraction) else parse_rational(t, "t")
    if t < 0:
        raise InvalidInstance("t must be non-negative")
    n = space.n
    adj = _close_masks(space, t)
    order = sorted(range(n), key=lambda v: (-bin(adj[v]).count("1"), v))
    pos = {v: k for k, v in enumerate(order)}

    # greedy incumbent: take vertices in ascending degree when compatible
    best = 0
    best_set = 0
    taken = 0
    blocked = 0
    for v in sorted(range(n), key=lambda v: (bin(adj[v]).count("1"), v)):
        if not blocked & (1 << v):
            taken |= 1 << v
            blocked |= adj[v] | (1 << v)
    best = bin(taken).count("1")
    best_set = taken

    def grow(chosen: int, size: int, candidates: int) -> None:
        nonlocal best, best_set
        if size + bin(candidates).count("1") <= best:
            return
        if not candidates:
            if size > best:
                best, best_set = size, chosen
            return
        # branch on the candidate earliest in the static order
        v = min((w for w in range(n) if candidates & (1 << w)), key=lambda w: pos[w])
        grow(chosen | (1 << v), size + 1, candidates & ~(adj[v] | (1 << v)))
        grow(chosen, size, candidates & ~(1 << v))

    grow(0, 0, (1 << n) - 1)
    return frozenset(i for i in range(n) if best_set & (1 << i))


def packing_number(space: FiniteMetricSpace, t) -> int:
    """Maximum number of points with pairwise distances exceeding t.

    At t = 0 this is the cardinality of the space (all off-diagonal
    distances are positive); the infinite-space convention has no finite
    analogue here.
    """
    return len(packing_set(space, t))


def close_pair_count(space: FiniteMetricSpace, config: Configuration, t) -> int:
    """Ordered pairs of distinct particles at distance at most t.

    Particles sharing a point are at distance 0 and always count.
    """
    t = t if isinstance(t, Fraction) else parse_rational(t, "t")
    m = config.multiplicity
    n = space.n
    if len(m) != n:
        raise InvalidInstance("configuration length does not match the space")
    total = 0
    for i in range(n):
        if m[i] == 0:
            continue
        total += m[i] * (m[i] - 1)
        for j in range(n):
            if j != i and m[j] and space.dist[i][j] <= t:
                total += m[i] * m[j]
    return total


def _compositions(total: int, parts: int) -> Iterable[tuple[int, ...]]:
    """All multiplicity vectors of given total mass, lexicographic order."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def gamma_min_pairs(space: FiniteMetricSpace, n: int, t, cap: int = GAMMA_MASS_CAP) -> int:
    """Minimum ordered close-pair count over configurations of total mass n.

    Exhaustive over all multiplicity vectors, which grows as compositions of
    n; above the mass cap only the closed-form bounds are offered.
    """
    if n < 0:
        raise InvalidInstance("total mass must be non-negative")
    if n > cap:
        raise CapExceeded(
            f"total mass {n} above the enumeration cap {cap}; use close_pair_envelope instead"
        )
    t = t if isinstance(t, Fraction) else parse_rational(t, "t")
    best = None
    for m in _compositions(n, space.n):
        g = close_pair_count(space, Configuration(m), t)
        if best is None or g < best:
            best = g
    return best if best is not None else 0


def close_pair_envelope(space: FiniteMetricSpace, n: int, t) -> tuple[Fraction, Fraction]:
    """Closed-form envelope (n(n/q - 1), n(n/q + 1)) with q the packing number.

    The minimum close-pair count always lies in [max(0, lower), upper].
    """
    if n < 0:
        raise InvalidInstance("total mass must be non-negative")
    if n == 0:
        return Fraction(0), Fraction(0)
    q = packing_number(space, t)
    return Fraction(n) * (Fraction(n, q) - 1), Fraction(n) * (Fraction(n, q) + 1)


def spread_configuration(space: FiniteMetricSpace, n: int, t) -> Configuration:
    """Mass n spread over a maximum packing, masses within floor/ceil of n/q.

    Witness for the upper envelope of `close_pair_envelope`: its close-pair count
    is at most n(n/q + 1).
    """
    pack = sorted(packing_set(space, t))
    q = len(pack)
    base, extra = divmod(n, q)
    m = [0] * space.n
    for rank, point in enumerate(pack):
        m[point] = base + (1 if rank < extra else 0)
    return Configuration(tuple(m))


@dataclass(frozen=True)
class TransferStep:
    donor: int
    recipient: int
    masses: tuple[int, ...]
    close_pairs: int


def mass_transfer_reduce(
    space: FiniteMetricSpace, config: Configuration, t
) -> tuple[Configuration, list[TransferStep]]:
    """Merge close support points by unit mass transfers until t-separated.

    At each stage the recipient among a close pair is the point with the
    smaller neighbourhood count Y(B_t(x)) - 1, ties to the smaller index;
    among candidate pairs the lexicographically first (recipient, donor)
    pair is processed. One unit moves per step and the ordered close-pair
    count never increases along the recorded trace.
    """
    t = t if isinstance(t, Fraction) else parse_rational(t, "t")
    masses = list(config.multiplicity)
    n = space.n
    trace: list[TransferStep] = []

    def neighbourhood(i: int) -> int:
        return sum(masses[j] for j in range(n) if space.dist[i][j] <= t) - 1

    while True:
        pairs = []
        for u in range(n):
            if masses[u] == 0:
                continue
            for v in range(u + 1, n):
                if masses[v] and space.dist[u][v] <= t:
                    nu, nv = neighbourhood(u), neighbourhood(v)
                    rec, don = (u, v) if (nu, u) <= (nv, v) else (v, u)
                    pairs.append((rec, don))
        if not pairs:
            break
        rec, don = min(pairs)
        while masses[don] > 0:
            masses[don] -= 1
            masses[rec] += 1
            trace.append(
                TransferStep(
                    donor=don,
                    recipient=rec,
                    masses=tuple(masses),
                    close_pairs=close_pair_count(space, Configuration(tuple(masses)), t),
                )
            )
    return Configuration(tuple(masses)), trace
