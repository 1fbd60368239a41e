"""Contact distribution functions: the two-point sandwich test, the explicit
two-point construction, a ball-system positivity screen and Monte Carlo
verification of the construction.

Distance cdfs are right-continuous non-decreasing step functions of a
sub-probability (the random set may miss every ball). For step functions
the sandwich inequalities can only change state at a jump abscissa shifted
by 0 or +-l, so checking that finite grid decides them everywhere.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import Infeasible, InvalidInstance
from .numbers import compare_rational_to_sqrt, norm_sq, parse_rational, sqrt_interval, to_float


@dataclass(frozen=True)
class StepCdf:
    """Right-continuous step cdf: value v_k on [R_k, R_{k+1}), 0 before R_0."""

    jumps: tuple[tuple[Fraction, Fraction], ...]

    def __post_init__(self):
        prev_r = None
        prev_v = Fraction(0)
        kept = []
        for r, v in self.jumps:
            if r < 0:
                raise InvalidInstance("jump abscissae must be non-negative")
            if prev_r is not None and r <= prev_r:
                raise InvalidInstance("jump abscissae must increase strictly")
            if v < prev_v:
                raise InvalidInstance("cdf values must be non-decreasing")
            if v > 1:
                raise InvalidInstance("cdf values must stay within [0, 1]")
            if v != prev_v:  # drop redundant flat jumps for a canonical form
                kept.append((r, v))
            prev_r, prev_v = r, v
        if len(kept) != len(self.jumps):
            object.__setattr__(self, "jumps", tuple(kept))

    @staticmethod
    def from_json(obj: dict) -> "StepCdf":
        if not isinstance(obj, dict) or "jumps" not in obj:
            raise InvalidInstance("cdf: expected key 'jumps'")
        jumps = []
        for k, pair in enumerate(obj["jumps"]):
            if not isinstance(pair, list) or len(pair) != 2:
                raise InvalidInstance(f"/jumps/{k}: expected [R, value]")
            jumps.append(
                (parse_rational(pair[0], f"/jumps/{k}/0"), parse_rational(pair[1], f"/jumps/{k}/1"))
            )
        return StepCdf(tuple(jumps))

    def total_mass(self) -> Fraction:
        return self.jumps[-1][1] if self.jumps else Fraction(0)

    def value(self, t) -> Fraction:
        if t < 0:
            return Fraction(0)
        rs = [r for r, _ in self.jumps]
        idx = bisect.bisect_right(rs, t) - 1
        return self.jumps[idx][1] if idx >= 0 else Fraction(0)

    def abscissae(self) -> list[Fraction]:
        return [r for r, _ in self.jumps]


@dataclass
class TwoPointCheck:
    feasible: bool
    violation_at: Fraction | None = None
    side: str | None = None  # "lower": tau1(R-l) > tau2(R); "upper": tau2(R) > tau1(R+l)


def check_two_point(tau1: StepCdf, tau2: StepCdf, l) -> TwoPointCheck:
    """Decide tau1(max(R-l,0)) <= tau2(R) <= tau1(R+l) for every R >= 0.

    Both sides are step functions of R whose jumps lie on the abscissae of
    tau1 and tau2 shifted by 0 or +-l, so the grid of those points (clipped
    at 0) is decisive; the first violating grid point is reported.
    """
    l = l if isinstance(l, Fraction) else parse_rational(l, "l")
    if l < 0:
        raise InvalidInstance("separation l must be non-negative")
    grid = {Fraction(0)}
    for r in tau1.abscissae() + tau2.abscissae():
        for shifted in (r - l, r, r + l):
            if shifted >= 0:
                grid.add(shifted)
    for R in sorted(grid):
        low = tau1.value(max(R - l, Fraction(0)))
        mid = tau2.value(R)
        if low > mid:
            return TwoPointCheck(feasible=False, violation_at=R, side="lower")
        if mid > tau1.value(R + l):
            return TwoPointCheck(feasible=False, violation_at=R, side="upper")
    return TwoPointCheck(feasible=True)


def invert_cdf(tau: StepCdf, u) -> Fraction | None:
    """Generalised inverse inf{R : tau(R) >= u}; None when u exceeds the
    total mass (the set misses every ball). u = 0 maps to 0."""
    uf = u if isinstance(u, Fraction) else Fraction(float(u))
    if uf < 0 or uf > 1:
        raise InvalidInstance("u must lie in [0, 1]")
    if uf == 0:
        return Fraction(0)
    if uf > tau.total_mass():
        return None
    values = [v for _, v in tau.jumps]
    idx = bisect.bisect_left(values, uf)
    return tau.jumps[idx][0]


@dataclass
class TwoPointSet:
    """Realisation for one uniform draw: collinear antipodal points (or a
    single point when the reference points coincide), with exact distances."""

    no_point: bool
    r1: Fraction | None = None
    r2: Fraction | None = None
    points: tuple[tuple[float, ...], ...] = ()


def construct_two_point_set(
    tau1: StepCdf, tau2: StepCdf, x1: Sequence, x2: Sequence, u
) -> TwoPointSet:
    """Place a1 behind x1 (away from x2) at distance R1 and a2 behind x2 at
    distance R2, the unique collinear choice.

    d(x1, {a1,a2}) = min(R1, l + R2) = R1 and symmetrically for x2, because
    the sandwich condition forces |R1 - R2| <= l; this is verified exactly
    before returning.
    """
    p1 = tuple(v if isinstance(v, Fraction) else parse_rational(v) for v in x1)
    p2 = tuple(v if isinstance(v, Fraction) else parse_rational(v) for v in x2)
    if len(p1) != len(p2):
        raise InvalidInstance("reference points must share a dimension")
    l_sq = norm_sq(p1, p2)
    r1 = invert_cdf(tau1, u)
    r2 = invert_cdf(tau2, u)
    if r1 is None and r2 is None:
        return TwoPointSet(no_point=True)
    if (r1 is None) != (r2 is None):
        raise Infeasible(
            "cdfs have different total mass; the sandwich test cannot have passed"
        )
    if l_sq == 0:
        if tau1.jumps != tau2.jumps:
            raise Infeasible("coinciding reference points require identical cdfs")
        a = (to_float(p1[0] + r1),) + tuple(to_float(c) for c in p1[1:])
        return TwoPointSet(no_point=False, r1=r1, r2=r2, points=(a,))
    # |R1 - R2| <= l, exactly
    if compare_rational_to_sqrt(abs(r1 - r2), l_sq) > 0:
        raise Infeasible(
            f"|R1 - R2| = {abs(r1 - r2)} exceeds the separation; "
            f"the sandwich test cannot have passed at this u"
        )
    l_lo, l_hi = sqrt_interval(l_sq)
    l_float = to_float((l_lo + l_hi) / 2)
    f1 = [to_float(v) for v in p1]
    f2 = [to_float(v) for v in p2]
    direction = [(a - b) / l_float for a, b in zip(f1, f2)]
    a1 = tuple(a + to_float(r1) * d for a, d in zip(f1, direction))
    a2 = tuple(b - to_float(r2) * d for b, d in zip(f2, direction))
    return TwoPointSet(no_point=False, r1=r1, r2=r2, points=(a1, a2))


@dataclass(frozen=True)
class BallSystem:
    """Finite family of closed balls with signed coefficients."""

    centers: tuple[tuple[Fraction, ...], ...]
    radii: tuple[Fraction, ...]
    coefficients: tuple[Fraction, ...]

    def __post_init__(self):
        if not (len(self.centers) == len(self.radii) == len(self.coefficients)):
            raise InvalidInstance("centers, radii and coefficients must align")
        if any(r <= 0 for r in self.radii):
            raise InvalidInstance("ball radii must be positive")

    @staticmethod
    def from_json(obj: dict) -> "BallSystem":
        try:
            centers = tuple(
                tuple(parse_rational(c) for c in center) for center in obj["centers"]
            )
            radii = tuple(parse_rational(r) for r in obj["radii"])
            coeffs = tuple(parse_rational(a) for a in obj["coefficients"])
        except KeyError as exc:
            raise InvalidInstance(f"ball system: missing key {exc}") from exc
        return BallSystem(centers, radii, coeffs)


@dataclass
class BallScreenReport:
    label: str  # always "screen": a probe set cannot certify all closed sets
    system_nonnegative: bool
    negative_mask: list[int] | None
    tau_sum: Fraction | None
    passes: bool | None
    method: str


def ball_positivity_screen(
    taus: dict,
    system: BallSystem,
    probe_points: Sequence,
    trials: int = 0,
    seed: int | None = None,
) -> BallScreenReport:
    """Screen one ball system against the necessary positivity inequality.

    First check g(F) = sum a_i 1{F hits ball i} >= 0 over all subsets of the
    probe set: only which balls a subset hits matters, so the OR-closure of
    the probe-point signatures is enumerated, which is exhaustive-equivalent.
    If that closure would be too large, `trials` random probe subsets are
    sampled instead (seed required). Systems passing the proxy get the
    tau-sum inequality evaluated; the verdict is labelled a screen because
    non-negativity over all closed sets is not certified by a probe set.
    """
    m = len(system.coefficients)
    probes = [
        tuple(v if isinstance(v, Fraction) else parse_rational(v) for v in p)
        for p in probe_points
    ]
    if not probes:
        raise InvalidInstance("probe set must be non-empty")
    signatures = set()
    for p in probes:
        sig = 0
        for k in range(m):
            if norm_sq(p, system.centers[k]) <= system.radii[k] ** 2:
                sig |= 1 << k
        signatures.add(sig)

    method = "exhaustive"
    closure = {0}
    overflow = False
    frontier = [0]
    limit = 1 << 20
    while frontier:
        nxt = []
        for mask in frontier:
            for sig in signatures:
                new = mask | sig
                if new not in closure:
                    closure.add(new)
                    nxt.append(new)
                    if len(closure) > limit:
                        overflow = True
                        break
            if overflow:
                break
        if overflow:
            break
        frontier = nxt
    if overflow:
        if seed is None or trials <= 0:
            raise InvalidInstance(
                "too many ball-hit patterns for exhaustive screening; "
                "supply trials and a seed for sampling"
            )
        method = "sampled"
        rng = np.random.default_rng(seed)
        closure = {0}
        sigs = sorted(signatures)
        for _ in range(trials):
            pick = rng.integers(0, 2, size=len(sigs))
            mask = 0
            for take, sig in zip(pick, sigs):
                if take:
                    mask |= sig
            closure.add(mask)

    worst_mask = None
    worst_val = Fraction(0)
    for mask in closure:
        val = sum(
            (system.coefficients[k] for k in range(m) if mask & (1 << k)),
            Fraction(0),
        )
        if val < worst_val:
            worst_val = val
            worst_mask = mask
    if worst_mask is not None:
        return BallScreenReport(
            label="screen",
            system_nonnegative=False,
            negative_mask=[k for k in range(m) if worst_mask & (1 << k)],
            tau_sum=None,
            passes=None,
            method=method,
        )

    total = Fraction(0)
    for k in range(m):
        center = system.centers[k]
        if center not in taus:
            raise InvalidInstance(f"no cdf supplied for ball center {center}")
        total += system.coefficients[k] * taus[center].value(system.radii[k])
    return BallScreenReport(
        label="screen",
        system_nonnegative=True,
        negative_mask=None,
        tau_sum=total,
        passes=total >= 0,
        method=method,
    )


@dataclass
class MonteCarloReport:
    abscissae: list[float]
    target1: list[float]
    target2: list[float]
    empirical1: list[float]
    empirical2: list[float]
    max_deviation1: float
    max_deviation2: float
    no_point_fraction: float
    samples: int
    seed: int


def monte_carlo_contact(
    tau1: StepCdf, tau2: StepCdf, x1: Sequence, x2: Sequence, samples: int, seed: int
) -> MonteCarloReport:
    """Simulate the two-point construction and compare empirical distance
    cdfs with the targets at every jump abscissa.

    One uniform draw drives both inversions (that coupling is what makes
    the construction work), so the recorded distances are exactly the
    generalised inverses; a draw beyond a total mass records +inf.
    """
    p1 = tuple(v if isinstance(v, Fraction) else parse_rational(v) for v in x1)
    p2 = tuple(v if isinstance(v, Fraction) else parse_rational(v) for v in x2)
    l_sq = norm_sq(p1, p2)
    l_lo, l_hi = sqrt_interval(l_sq)
    # the test weakens as l grows, so passing at the lower bound is sound
    if not check_two_point(tau1, tau2, l_lo).feasible:
        check_hi = check_two_point(tau1, tau2, l_hi)
        if not check_hi.feasible:
            failed = check_two_point(tau1, tau2, l_lo)
            raise Infeasible(
                f"sandwich test fails at R = {failed.violation_at} ({failed.side} side)"
            )
        raise InvalidInstance(
            "the separation is irrational and the sandwich verdict flips "
            "inside its enclosure; perturb the reference points"
        )
    rng = np.random.default_rng(seed)
    u = rng.random(samples)

    def sample_jump_indices(tau: StepCdf) -> np.ndarray:
        """-1 codes distance 0 (u = 0), len(jumps) codes a miss (+inf)."""
        values = np.array([to_float(v) for _, v in tau.jumps])
        idx = np.searchsorted(values, u, side="left").astype(np.int64)
        idx[u == 0.0] = -1
        return idx

    idx1 = sample_jump_indices(tau1)
    idx2 = sample_jump_indices(tau2)
    grid_exact = sorted(set(tau1.abscissae() + tau2.abscissae()))

    def empirical(tau: StepCdf, idx: np.ndarray) -> list[float]:
        rs = tau.abscissae()
        out = []
        for A in grid_exact:
            last = bisect.bisect_right(rs, A) - 1
            out.append(float(np.mean(idx <= last)))
        return out

    emp1 = empirical(tau1, idx1)
    emp2 = empirical(tau2, idx2)
    t1 = [to_float(tau1.value(A)) for A in grid_exact]
    t2 = [to_float(tau2.value(A)) for A in grid_exact]
    dev1 = max((abs(e - t) for e, t in zip(emp1, t1)), default=0.0)
    dev2 = max((abs(e - t) for e, t in zip(emp2, t2)), default=0.0)
    no_point = float(np.mean((idx1 == len(tau1.jumps)) & (idx2 == len(tau2.jumps))))
    grid = [to_float(A) for A in grid_exact]
    return MonteCarloReport(
        abscissae=grid,
        target1=t1,
        target2=t2,
        empirical1=emp1,
        empirical2=emp2,
        max_deviation1=dev1,
        max_deviation2=dev2,
        no_point_fraction=no_point,
        samples=samples,
        seed=seed,
    )
