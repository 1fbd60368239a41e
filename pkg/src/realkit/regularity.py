"""Numeric checkers for the integrability side of realisability.

Everything here is a weighted sum over the atoms of a measure: distance
weights psi(d), packing numbers, inverse-power norms over growing balls, and
the split verdict that pairs an integral bound with the positivity LP.
+inf is a first-class value (psi may be infinite near zero); atoms of zero
weight are dropped at ingestion so 0 * inf never arises. Odd-dimensional
norms are irrational, so those sums come back as enclosures [lo, hi] and a
verdict is only drawn when the whole enclosure sits on one side of the
bound.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import InvalidBeta, InvalidInstance, InvalidPsi
from .metric import FiniteMetricSpace, packing_number
from .numbers import INF, compare_rational_to_sqrt, norm_sq, parse_rational, pow_neg_half_d
from .pp import CorrelationTarget, RealizePPResult, objective_chi_hc, realize_pp


@dataclass(frozen=True)
class PsiFunction:
    """Non-increasing right-continuous step weight on [0, inf).

    steps[k] = (t_k, v_k) means the function equals v_k on [t_k, t_{k+1});
    the first threshold must be 0 and values may be +inf on an initial
    stretch (the hard-core encoding).
    """

    steps: tuple[tuple[Fraction, object], ...]

    def __post_init__(self):
        if not self.steps:
            raise InvalidPsi("psi needs at least one step")
        if self.steps[0][0] != 0:
            raise InvalidPsi("the first psi threshold must be 0")
        prev_t = None
        prev_v = None
        for t, v in self.steps:
            if t < 0:
                raise InvalidPsi("psi thresholds must be non-negative")
            if v != INF and v < 0:
                raise InvalidPsi("psi values must be non-negative")
            if prev_t is not None and t <= prev_t:
                raise InvalidPsi("psi thresholds must increase strictly")
            if prev_v is not None and _gt(v, prev_v):
                raise InvalidPsi("psi must be non-increasing")
            prev_t, prev_v = t, v

    @staticmethod
    def from_json(obj: dict) -> "PsiFunction":
        if not isinstance(obj, dict) or "steps" not in obj:
            raise InvalidInstance("psi: expected key 'steps'")
        steps = []
        for k, pair in enumerate(obj["steps"]):
            if not isinstance(pair, list) or len(pair) != 2:
                raise InvalidInstance(f"/steps/{k}: expected [threshold, value]")
            t = parse_rational(pair[0], f"/steps/{k}/0")
            v = INF if pair[1] == "inf" else parse_rational(pair[1], f"/steps/{k}/1")
            steps.append((t, v))
        return PsiFunction(tuple(steps))

    def thresholds(self) -> list[Fraction]:
        return [t for t, _ in self.steps]

    def value(self, t) -> object:
        """psi(t) for a rational argument."""
        if t < 0:
            raise InvalidInstance("psi evaluated at a negative distance")
        ts = self.thresholds()
        idx = bisect.bisect_right(ts, t) - 1
        return self.steps[idx][1]

    def value_at_sqrt(self, sq: Fraction) -> object:
        """psi(sqrt(sq)) decided exactly by comparing thresholds with sqrt(sq)."""
        idx = 0
        for k, (t, _) in enumerate(self.steps):
            # t <= sqrt(sq) iff t - sqrt(sq) <= 0
            if compare_rational_to_sqrt(t, sq) <= 0:
                idx = k
            else:
                break
        return self.steps[idx][1]


def _gt(a, b) -> bool:
    if a == INF:
        return b != INF
    if b == INF:
        return False
    return a > b


@dataclass(frozen=True)
class AtomicMeasure2D:
    """Atomic measure on pairs: either index pairs of a finite space or
    pairs of rational points in R^d. Atoms are taken literally (an ordered
    list); builders that start from symmetric data emit both orders."""

    ambient: str  # "finite" | "euclidean"
    atoms: tuple  # (a, b, weight) with indices or coordinate tuples
    space: FiniteMetricSpace | None = None
    dim: int | None = None

    @staticmethod
    def on_space(space: FiniteMetricSpace, atoms) -> "AtomicMeasure2D":
        clean = []
        for a, b, w in atoms:
            wf = w if isinstance(w, Fraction) else parse_rational(w, "weight")
            if wf < 0:
                raise InvalidInstance("atom weights must be non-negative")
            if not (0 <= a < space.n and 0 <= b < space.n):
                raise InvalidInstance(f"atom ({a},{b}) out of range")
            if wf > 0:
                clean.append((a, b, wf))
        return AtomicMeasure2D(ambient="finite", atoms=tuple(clean), space=space)

    @staticmethod
    def euclidean(dim: int, atoms) -> "AtomicMeasure2D":
        if dim < 1:
            raise InvalidInstance("dimension must be at least 1")
        clean = []
        for a, b, w in atoms:
            wf = w if isinstance(w, Fraction) else parse_rational(w, "weight")
            if wf < 0:
                raise InvalidInstance("atom weights must be non-negative")
            pa = tuple(x if isinstance(x, Fraction) else parse_rational(x) for x in a)
            pb = tuple(x if isinstance(x, Fraction) else parse_rational(x) for x in b)
            if len(pa) != dim or len(pb) != dim:
                raise InvalidInstance("atom coordinates do not match the dimension")
            if wf > 0:
                clean.append((pa, pb, wf))
        return AtomicMeasure2D(ambient="euclidean", atoms=tuple(clean), dim=dim)

    @staticmethod
    def from_target(target: CorrelationTarget) -> "AtomicMeasure2D":
        """All ordered atoms of a correlation target (off-diagonal twice)."""
        if target.space is None:
            raise InvalidInstance("target has no metric space attached")
        atoms = []
        for i, j, w in target.atoms():
            atoms.append((i, j, w))
            if i != j:
                atoms.append((j, i, w))
        return AtomicMeasure2D.on_space(target.space, atoms)


def chi_hc_integral(rho: AtomicMeasure2D, psi: PsiFunction):
    """Sum of w * psi(distance) over the atoms; +inf propagates."""
    total: object = Fraction(0)
    for a, b, w in rho.atoms:
        if rho.ambient == "finite":
            v = psi.value(rho.space.dist[a][b])
        else:
            v = psi.value_at_sqrt(norm_sq(a, b))
        if v == INF:
            return INF
        total = total + w * v
    return total


def packing_integral(rho: AtomicMeasure2D, space: FiniteMetricSpace) -> Fraction:
    """Sum of w * packing_number(d(a,b)) over the atoms."""
    if rho.ambient != "finite":
        raise InvalidInstance("packing integrals need a finite-space measure")
    total = Fraction(0)
    cache: dict[Fraction, int] = {}
    for a, b, w in rho.atoms:
        d = space.dist[a][b]
        if d not in cache:
            cache[d] = packing_number(space, d)
        total += w * cache[d]
    return total


@dataclass
class PsiAdmissibilityReport:
    profile: list  # (t, psi(t), packing(t), ratio)
    smallest_distance: Fraction | None
    ratio_at_smallest: object | None
    passes: bool


def psi_admissibility(
    psi: PsiFunction, space: FiniteMetricSpace, threshold
) -> PsiAdmissibilityReport:
    """Profile psi(t) / packing(t) over the distances that exist in the
    space and the psi breakpoints.

    The growth condition is a limit statement as t drops to 0 and cannot be
    decided from finite data; the verdict is the stated proxy: the ratio at
    the smallest positive pairwise distance must exceed the threshold.
    """
    threshold = threshold if isinstance(threshold, Fraction) else parse_rational(threshold)
    dists = space.distance_values()
    abscissae = sorted(set(dists) | {t for t in psi.thresholds() if t > 0})
    profile = []
    for t in abscissae:
        pv = psi.value(t)
        pk = packing_number(space, t)
        ratio = INF if pv == INF else Fraction(pv, pk)
        profile.append((t, pv, pk, ratio))
    smallest = dists[0] if dists else None
    ratio_small = None
    passes = False
    if smallest is not None:
        pv = psi.value(smallest)
        pk = packing_number(space, smallest)
        ratio_small = INF if pv == INF else Fraction(pv, pk)
        passes = ratio_small == INF or ratio_small > threshold
    return PsiAdmissibilityReport(
        profile=profile,
        smallest_distance=smallest,
        ratio_at_smallest=ratio_small,
        passes=passes,
    )


Enclosure = tuple  # (lo, hi) with Fractions or INF


def _enc_add(x: Enclosure, y: Enclosure) -> Enclosure:
    lo = INF if (x[0] == INF or y[0] == INF) else x[0] + y[0]
    hi = INF if (x[1] == INF or y[1] == INF) else x[1] + y[1]
    return (lo, hi)


def _enc_scale(x: Enclosure, s: Fraction) -> Enclosure:
    if s == 0:
        return (Fraction(0), Fraction(0))
    if s > 0:
        lo = INF if x[0] == INF else s * x[0]
        hi = INF if x[1] == INF else s * x[1]
        return (lo, hi)
    hi = -INF if x[0] == INF else s * x[0]
    lo = -INF if x[1] == INF else s * x[1]
    return (lo, hi)


@dataclass
class ShellSeriesResult:
    r_values: list  # enclosures per radius
    series: Enclosure
    infinite: bool


def shell_series(
    rho: AtomicMeasure2D, radii: Sequence, beta: Sequence
) -> ShellSeriesResult:
    """Inverse-power mass over growing balls and its weighted difference series.

    r_k sums w * |x-y|^(-d) over atoms with both endpoints in the open ball
    of radius radii[k]; the series is sum_k beta[k] * (r_{k+1} - r_k). A
    diagonal atom inside some ball makes everything +inf.
    """
    if rho.ambient != "euclidean":
        raise InvalidInstance("shell series need a euclidean measure")
    radii_f = [r if isinstance(r, Fraction) else parse_rational(r, "radius") for r in radii]
    if any(r <= 0 for r in radii_f) or any(
        radii_f[k] >= radii_f[k + 1] for k in range(len(radii_f) - 1)
    ):
        raise InvalidInstance("radii must be positive and strictly increasing")
    beta_f = [v if isinstance(v, Fraction) else parse_rational(v, "beta") for v in beta]
    if any(v <= 0 for v in beta_f):
        raise InvalidBeta("beta must be positive")
    if any(beta_f[k] < beta_f[k + 1] for k in range(len(beta_f) - 1)):
        raise InvalidBeta("beta must be non-increasing")
    if len(beta_f) < len(radii_f) - 1:
        raise InvalidInstance("need a beta value per consecutive radius pair")

    d = rho.dim
    prepared = []
    for a, b, w in rho.atoms:
        sq_a = norm_sq(a)
        sq_b = norm_sq(b)
        val = pow_neg_half_d(norm_sq(a, b), d)
        prepared.append((sq_a, sq_b, w, val))
    r_values: list[Enclosure] = []
    for R in radii_f:
        acc: Enclosure = (Fraction(0), Fraction(0))
        R2 = R * R
        for sq_a, sq_b, w, val in prepared:
            if sq_a < R2 and sq_b < R2:
                acc = _enc_add(acc, _enc_scale(val, w))
        r_values.append(acc)
    if any(v[0] == INF for v in r_values):
        return ShellSeriesResult(r_values=r_values, series=(INF, INF), infinite=True)
    series: Enclosure = (Fraction(0), Fraction(0))
    for k in range(len(radii_f) - 1):
        diff = (r_values[k + 1][0] - r_values[k][1], r_values[k + 1][1] - r_values[k][0])
        series = _enc_add(series, _enc_scale(diff, beta_f[k]))
    return ShellSeriesResult(r_values=r_values, series=series, infinite=False)


@dataclass
class ReducedCheckResult:
    value: Enclosure
    origin_atom: bool


def reduced_measure_check(
    atoms, ball_radius, d: int
) -> ReducedCheckResult:
    """Sum of w * |y|^(-d) over atoms with |y| < ball_radius.

    An origin atom with positive weight is flagged and gives +inf: a
    translation-averaged pair measure puts mass at the origin only through
    multiplicities.
    """
    R = ball_radius if isinstance(ball_radius, Fraction) else parse_rational(ball_radius)
    if R <= 0:
        raise InvalidInstance("ball radius must be positive")
    total: Enclosure = (Fraction(0), Fraction(0))
    origin = False
    R2 = R * R
    for y, w in atoms:
        wf = w if isinstance(w, Fraction) else parse_rational(w, "weight")
        if wf < 0:
            raise InvalidInstance("weights must be non-negative")
        if wf == 0:
            continue
        py = tuple(x if isinstance(x, Fraction) else parse_rational(x) for x in y)
        sq = norm_sq(py)
        if sq >= R2:
            continue
        if sq == 0:
            origin = True
            total = (INF, INF)
            continue
        total = _enc_add(total, _enc_scale(pow_neg_half_d(sq, d), wf))
    return ReducedCheckResult(value=total, origin_atom=origin)


@dataclass
class SplitVerdict:
    integral: object
    integral_ok: bool
    positivity: RealizePPResult | None
    optimum: object | None

    @property
    def realizable(self) -> bool:
        return bool(
            self.integral_ok
            and self.positivity is not None
            and self.positivity.status == "feasible"
        )


def hardcore_split_check(target: CorrelationTarget, psi: PsiFunction, r) -> SplitVerdict:
    """The headline decomposition: an integral bound plus LP positivity.

    Early exit when the integral exceeds r; otherwise the positivity LP
    runs with the close-pair objective, whose optimum equals the integral
    whenever the moment rows pin it (a strong-duality identity the tests
    assert).
    """
    r = r if isinstance(r, Fraction) else parse_rational(r, "r")
    measure = AtomicMeasure2D.from_target(target)
    integral = chi_hc_integral(measure, psi)
    if integral == INF or integral > r:
        return SplitVerdict(integral=integral, integral_ok=False, positivity=None, optimum=None)
    result = realize_pp(target, objective=objective_chi_hc(psi, target.space))
    return SplitVerdict(
        integral=integral,
        integral_ok=True,
        positivity=result,
        optimum=result.objective_value,
    )
