"""Realisability of correlation measures by point processes on a finite carrier.

Configurations are multiplicity vectors with total mass at most a cap,
optionally simple (no multiplicities) and optionally hard-core (support
pairwise at least eps apart). The decision problem is LP feasibility over
the enumerated configurations:

    sum_Y q_Y * pair_count_Y(i,j) = rho_ij   for every index pair (i <= j),
    sum_Y q_Y * m_i               = rho1_i   when an intensity is prescribed,
    sum_Y q_Y = 1,  q >= 0,

where pair_count_Y(i,j) is m_i m_j for i != j and m_i (m_i - 1) on the
diagonal. Moment constraints are imposed on ALL pairs, zero right-hand
side where the measure has no atom: omitting them would realise a
different measure. An optional objective minimises the expectation of a
cardinality power or of a distance-weighted close-pair sum.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import CapExceeded, InvalidInstance
from .lp import exact_simplex, float_phase1, solve_nonneg_exact
from .metric import Configuration, FiniteMetricSpace
from .numbers import INF, parse_rational

ENUM_LIMIT = 2_000_000


@dataclass(frozen=True)
class CorrelationTarget:
    """Atomic symmetric measure on pairs plus optional intensity and flags."""

    n: int
    rho: dict  # (i, j) with i <= j -> Fraction, the ordered-atom value
    rho1: tuple[Fraction, ...] | None
    cap: int
    simple: bool
    hardcore_eps: Fraction | None
    space: FiniteMetricSpace | None = None
    # admissible supports keep distances >= eps; the strict variant demands > eps
    hardcore_strict: bool = False

    def rho_value(self, i: int, j: int) -> Fraction:
        key = (i, j) if i <= j else (j, i)
        return self.rho.get(key, Fraction(0))

    def atoms(self) -> list[tuple[int, int, Fraction]]:
        return [(i, j, w) for (i, j), w in sorted(self.rho.items()) if w != 0]

    @staticmethod
    def build(
        n: int | None = None,
        rho_entries: Iterable[tuple[int, int, object]] = (),
        rho1: Sequence | None = None,
        cap: int = 0,
        simple: bool = False,
        hardcore_eps=None,
        space: FiniteMetricSpace | None = None,
        hardcore_strict: bool = False,
    ) -> "CorrelationTarget":
        if space is not None:
            n = space.n
        if n is None or n < 1:
            raise InvalidInstance("target needs a point count or a space")
        if cap < 0:
            raise InvalidInstance("cardinality cap must be non-negative")
        ordered: dict[tuple[int, int], Fraction] = {}
        for i, j, w in rho_entries:
            if not (0 <= i < n and 0 <= j < n):
                raise InvalidInstance(f"rho atom ({i},{j}) out of range")
            wf = w if isinstance(w, Fraction) else parse_rational(w, f"rho[{i},{j}]")
            if wf < 0:
                raise InvalidInstance(f"rho atom ({i},{j}) has negative weight")
            ordered[(i, j)] = ordered.get((i, j), Fraction(0)) + wf
        rho: dict[tuple[int, int], Fraction] = {}
        for (i, j), w in ordered.items():
            if i == j:
                rho[(i, j)] = rho.get((i, j), Fraction(0)) + w
                continue
            key = (min(i, j), max(i, j))
            mirror = ordered.get((j, i))
            if mirror is not None and mirror != w:
                raise InvalidInstance(
                    f"rho atoms at ({i},{j}) and ({j},{i}) disagree; "
                    f"the measure must be symmetric"
                )
            rho[key] = w
        rho = {k: v for k, v in rho.items() if v != 0}
        r1 = None
        if rho1 is not None:
            vals = [v if isinstance(v, Fraction) else parse_rational(v, "rho1") for v in rho1]
            if len(vals) != n:
                raise InvalidInstance("rho1 length does not match the point count")
            if any(v < 0 for v in vals):
                raise InvalidInstance("rho1 must be non-negative")
            r1 = tuple(vals)
        eps = None
        if hardcore_eps is not None:
            eps = hardcore_eps if isinstance(hardcore_eps, Fraction) else parse_rational(
                hardcore_eps, "hardcore_eps"
            )
            if eps <= 0:
                raise InvalidInstance("hardcore_eps must be positive")
            if space is None:
                raise InvalidInstance("hard-core targets need the metric space")
        return CorrelationTarget(
            n=n, rho=rho, rho1=r1, cap=cap, simple=simple, hardcore_eps=eps,
            space=space, hardcore_strict=hardcore_strict,
        )

    @staticmethod
    def from_json(obj: dict) -> "CorrelationTarget":
        if not isinstance(obj, dict) or "rho" not in obj or "cap" not in obj:
            raise InvalidInstance("target: expected keys 'rho' and 'cap'")
        space = FiniteMetricSpace.from_json(obj["space"]) if obj.get("space") else None
        n = obj.get("n")
        entries = []
        for k, atom in enumerate(obj["rho"]):
            if not isinstance(atom, list) or len(atom) != 3:
                raise InvalidInstance(f"/rho/{k}: expected [i, j, weight-string]")
            entries.append((atom[0], atom[1], atom[2]))
        return CorrelationTarget.build(
            n=n,
            rho_entries=entries,
            rho1=obj.get("rho1"),
            cap=int(obj["cap"]),
            simple=bool(obj.get("simple", False)),
            hardcore_eps=obj.get("hardcore_eps"),
            space=space,
            hardcore_strict=bool(obj.get("hardcore_strict", False)),
        )


@dataclass(frozen=True)
class ConfigMixture:
    """Finitely supported law on configurations."""

    n: int
    atoms: tuple[tuple[Configuration, object], ...]

    def validate(self, tol: float = 1e-12) -> None:
        total = 0
        seen = set()
        for config, w in self.atoms:
            if config.multiplicity in seen:
                raise InvalidInstance("mixture has duplicate configurations")
            seen.add(config.multiplicity)
            if w <= 0:
                raise InvalidInstance("mixture weights must be positive")
            total = total + w
        if abs(total - 1) > tol:
            raise InvalidInstance(f"mixture weights sum to {total}, not 1")


@dataclass(frozen=True)
class PPCertificate:
    """Witness: G(Y) = c + sum_i blin_i m_i + sum_{i<j} a_ij m_i m_j
    + sum_i a_ii m_i (m_i - 1) is non-negative on every admissible
    configuration while pairing with (rho1, rho) gives -gap < 0."""

    n: int
    c: Fraction
    a: tuple[tuple[Fraction, ...], ...]
    blin: tuple[Fraction, ...] | None
    gap: Fraction
    minimizer: Configuration

    def pairing(self, target: CorrelationTarget) -> Fraction:
        total = self.c
        if self.blin is not None:
            if target.rho1 is None:
                raise InvalidInstance("certificate has a linear part but the target no intensity")
            total += sum(
                (b * r for b, r in zip(self.blin, target.rho1)), Fraction(0)
            )
        for i in range(self.n):
            for j in range(i, self.n):
                total += self.a[i][j] * target.rho_value(i, j)
        return total


@dataclass
class RealizePPResult:
    status: str  # "feasible" | "infeasible" | "indeterminate"
    mixture: ConfigMixture | None = None
    objective_value: object | None = None
    dual_value: object | None = None
    certificate: PPCertificate | None = None
    residual: object | None = None
    gap: object | None = None
    note: str | None = None
    method: str = ""


def g_h_eval(config: Configuration, h: Sequence[Sequence]) -> object:
    """Sum of h over ordered pairs of distinct particles (the empty sum is 0)."""
    m = config.multiplicity
    n = len(m)
    if len(h) != n or any(len(row) != n for row in h):
        raise InvalidInstance("h must be n x n")
    for i in range(n):
        for j in range(i + 1, n):
            if h[i][j] != h[j][i]:
                raise InvalidInstance("h must be symmetric")
    total = 0
    for i in range(n):
        if m[i] == 0:
            continue
        total = total + m[i] * (m[i] - 1) * h[i][i]
        for j in range(n):
            if j != i and m[j]:
                total = total + m[i] * m[j] * h[i][j]
    return total


def check_hardcore_support(
    target: CorrelationTarget, eps
) -> tuple[bool, list[tuple[int, int, Fraction]]]:
    """True iff every positive-weight atom sits at distance >= eps
    (> eps when the target uses the strict variant)."""
    eps = eps if isinstance(eps, Fraction) else parse_rational(eps, "eps")
    if target.space is None:
        raise InvalidInstance("hard-core support check needs the metric space")
    offenders = []
    for i, j, w in target.atoms():
        d = target.space.dist[i][j]
        if w > 0 and (d <= eps if target.hardcore_strict else d < eps):
            offenders.append((i, j, w))
    return (not offenders), offenders


def _forbidden_pairs(target: CorrelationTarget) -> set[tuple[int, int]]:
    """Unordered point pairs that an admissible support may not contain."""
    if target.hardcore_eps is None:
        return set()
    space = target.space
    eps = target.hardcore_eps
    return {
        (i, j)
        for i in range(target.n)
        for j in range(i + 1, target.n)
        if (space.dist[i][j] <= eps if target.hardcore_strict else space.dist[i][j] < eps)
    }


def enumerate_configs(
    n: int,
    cap: int,
    simple: bool = False,
    hardcore_eps=None,
    space: FiniteMetricSpace | None = None,
    limit: int = ENUM_LIMIT,
    hardcore_strict: bool = False,
) -> list[Configuration]:
    """All multiplicity vectors of total mass <= cap passing the flags,
    in lexicographic order. Raises CapExceeded past `limit` columns."""
    if hardcore_eps is not None and space is None:
        raise InvalidInstance("hard-core enumeration needs the metric space")
    per_point = 1 if (simple or hardcore_eps is not None) else cap
    forbidden = set()
    if hardcore_eps is not None:
        eps = hardcore_eps if isinstance(hardcore_eps, Fraction) else parse_rational(hardcore_eps)
        forbidden = {
            (i, j)
            for i in range(n)
            for j in range(i + 1, n)
            if (space.dist[i][j] <= eps if hardcore_strict else space.dist[i][j] < eps)
        }
    out: list[Configuration] = []

    def extend(prefix: list[int], mass_left: int) -> None:
        k = len(prefix)
        if k == n:
            out.append(Configuration(tuple(prefix)))
            if len(out) > limit:
                raise CapExceeded(f"configuration count exceeds {limit}")
            return
        for m in range(min(per_point, mass_left) + 1):
            if m > 0 and any(
                (min(i, k), max(i, k)) in forbidden for i in range(k) if prefix[i] > 0
            ):
                break
            prefix.append(m)
            extend(prefix, mass_left - m)
            prefix.pop()

    extend([], cap)
    return out


def _pairs(n: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(n) for j in range(i, n)]


def _config_column(config: Configuration, n: int, with_intensity: bool) -> list[Fraction]:
    m = config.multiplicity
    col = []
    for i, j in _pairs(n):
        col.append(Fraction(m[i] * (m[i] - 1)) if i == j else Fraction(m[i] * m[j]))
    if with_intensity:
        col.extend(Fraction(v) for v in m)
    col.append(Fraction(1))
    return col


def _target_rhs(target: CorrelationTarget) -> list[Fraction]:
    b = [target.rho_value(i, j) for i, j in _pairs(target.n)]
    if target.rho1 is not None:
        b.extend(target.rho1)
    b.append(Fraction(1))
    return b


def pp_moments(mix: ConfigMixture) -> tuple[dict, tuple[Fraction, ...]]:
    """Forward map: ordered pair counts and intensities under the mixture."""
    n = mix.n
    rho_hat: dict[tuple[int, int], Fraction] = {}
    rho1_hat = [Fraction(0)] * n
    for config, w in mix.atoms:
        wf = w if isinstance(w, Fraction) else Fraction(w)
        m = config.multiplicity
        for i in range(n):
            rho1_hat[i] += wf * m[i]
            for j in range(i, n):
                count = m[i] * (m[i] - 1) if i == j else m[i] * m[j]
                if count:
                    key = (i, j)
                    rho_hat[key] = rho_hat.get(key, Fraction(0)) + wf * count
    return rho_hat, tuple(rho1_hat)


def _admissible_min_exact(
    target: CorrelationTarget,
    c: Fraction,
    a: Sequence[Sequence[Fraction]],
    blin: Sequence[Fraction] | None,
) -> tuple[Configuration, Fraction]:
    """Exact minimum of the certificate functional over admissible configs."""
    best = None
    best_cfg = None
    for config in enumerate_configs(
        target.n, target.cap, target.simple, target.hardcore_eps, target.space,
        hardcore_strict=target.hardcore_strict,
    ):
        m = config.multiplicity
        val = c
        if blin is not None:
            val += sum((Fraction(mi) * bi for mi, bi in zip(m, blin)), Fraction(0))
        for i in range(target.n):
            if m[i] == 0:
                continue
            val += a[i][i] * (m[i] * (m[i] - 1))
            for j in range(i + 1, target.n):
                if m[j]:
                    val += a[i][j] * (m[i] * m[j])
        if best is None or val < best:
            best, best_cfg = val, config
    return best_cfg, best


def _certificate_from_dual(
    y: Sequence, target: CorrelationTarget
) -> PPCertificate | None:
    """Exact certificate from a (possibly float) Farkas vector for the
    moment rows (+ intensity rows when present)."""
    n = target.n
    pairs = _pairs(n)
    np_pairs = len(pairs)
    a = [[Fraction(0)] * n for _ in range(n)]
    for (i, j), yv in zip(pairs, y[:np_pairs]):
        v = yv if isinstance(yv, Fraction) else Fraction(float(yv))
        a[i][j] = -v
        a[j][i] = -v
    blin = None
    if target.rho1 is not None:
        blin = [
            -(yv if isinstance(yv, Fraction) else Fraction(float(yv)))
            for yv in y[np_pairs : np_pairs + n]
        ]
    entries = [abs(a[i][j]) for i, j in pairs] + ([abs(v) for v in blin] if blin else [])
    scale = max(entries)
    if scale == 0:
        return None
    for i, j in pairs:
        a[i][j] /= scale
        a[j][i] = a[i][j]
    if blin is not None:
        blin = [v / scale for v in blin]
    min_cfg, mval = _admissible_min_exact(target, Fraction(0), a, blin)
    c = -mval
    cert = PPCertificate(
        n=n,
        c=c,
        a=tuple(tuple(row) for row in a),
        blin=tuple(blin) if blin is not None else None,
        gap=Fraction(0),
        minimizer=min_cfg,
    )
    pairing = cert.pairing(target)
    if pairing >= 0:
        return None
    return PPCertificate(
        n=n, c=cert.c, a=cert.a, blin=cert.blin, gap=-pairing, minimizer=min_cfg
    )


def verify_pp_certificate(
    cert: PPCertificate, target: CorrelationTarget
) -> tuple[bool, str]:
    """Exact re-verification over every admissible configuration."""
    if cert.n != target.n:
        return False, "certificate size does not match target"
    min_cfg, mval = _admissible_min_exact(target, cert.c, cert.a, cert.blin)
    if mval < 0:
        return False, f"functional attains {mval} < 0 at {min_cfg.multiplicity}"
    pairing = cert.pairing(target)
    if pairing >= 0:
        return False, f"pairing with the target is {pairing} >= 0"
    if -pairing != cert.gap:
        return False, "stored gap does not match the recomputed pairing"
    return True, "certificate valid"


def _trivial_certificate(
    target: CorrelationTarget, i: int, j: int
) -> PPCertificate:
    """Certificate for an atom whose pair count vanishes on every admissible
    configuration (diagonal atom under simplicity, or a pair inside the
    hard-core distance)."""
    n = target.n
    a = [[Fraction(0)] * n for _ in range(n)]
    lo, hi = min(i, j), max(i, j)
    a[lo][hi] = Fraction(-1)
    a[hi][lo] = Fraction(-1)
    cert = PPCertificate(
        n=n,
        c=Fraction(0),
        a=tuple(tuple(row) for row in a),
        blin=None,
        gap=Fraction(0),
        minimizer=Configuration((0,) * n),
    )
    pairing = cert.pairing(target)
    return PPCertificate(
        n=n, c=cert.c, a=cert.a, blin=None, gap=-pairing, minimizer=cert.minimizer
    )


CARDINALITY_POWERS = (2, 3, 4)


def objective_cardinality(alpha: int) -> Callable[[Configuration], Fraction]:
    if alpha not in CARDINALITY_POWERS:
        raise InvalidInstance(f"cardinality power must be one of {CARDINALITY_POWERS}")

    def chi(config: Configuration) -> Fraction:
        return Fraction(config.total_mass**alpha)

    return chi


def objective_chi_hc(psi, space: FiniteMetricSpace) -> Callable[[Configuration], object]:
    """Expected close-pair weight sum_{i != j} psi(d) over ordered pairs."""

    def chi(config: Configuration):
        m = config.multiplicity
        total: object = Fraction(0)
        for i in range(space.n):
            if m[i] == 0:
                continue
            if m[i] > 1:
                total = total + m[i] * (m[i] - 1) * psi.value(Fraction(0))
            for j in range(space.n):
                if j != i and m[j]:
                    total = total + m[i] * m[j] * psi.value(space.dist[i][j])
        return total

    return chi


def realize_pp(
    target: CorrelationTarget,
    objective: Callable[[Configuration], object] | None = None,
    enum_limit: int = ENUM_LIMIT,
) -> RealizePPResult:
    """Decide realisability of a correlation target; optionally minimise an
    expectation over the realising mixtures and report the optimum.

    The optimum of a close-pair objective is pinned by the moment rows, so
    the primal value doubles as a consistency check on the data.
    """
    for i, j, w in target.atoms():
        if target.simple and i == j and w > 0:
            return RealizePPResult(
                status="infeasible",
                certificate=_trivial_certificate(target, i, j),
                gap=w,
                note="simple processes carry no diagonal correlation mass",
                method="validation",
            )
    if target.hardcore_eps is not None:
        ok, offenders = check_hardcore_support(target, target.hardcore_eps)
        if not ok:
            i, j, w = offenders[0]
            cert = _trivial_certificate(target, i, j)
            return RealizePPResult(
                status="infeasible",
                certificate=cert,
                gap=cert.gap,
                note="correlation mass inside the hard-core distance",
                method="validation",
            )
    try:
        configs = enumerate_configs(
            target.n, target.cap, target.simple, target.hardcore_eps, target.space,
            limit=enum_limit, hardcore_strict=target.hardcore_strict,
        )
    except CapExceeded:
        return _realize_pp_cg(target, objective)

    with_intensity = target.rho1 is not None
    cols = [_config_column(cfg, target.n, with_intensity) for cfg in configs]
    b = _target_rhs(target)
    res = exact_simplex(cols, b)
    if res.status == "infeasible":
        cert = _certificate_from_dual(res.farkas, target)
        if cert is None:
            raise RuntimeError("exact Farkas vector failed certification")
        return RealizePPResult(
            status="infeasible", certificate=cert, gap=cert.gap, method="enumeration"
        )
    if objective is None:
        mix = _mixture_from(configs, res.x)
        return RealizePPResult(
            status="feasible", mixture=mix, residual=Fraction(0), method="enumeration"
        )

    chi_vals = [objective(cfg) for cfg in configs]
    finite = [k for k, v in enumerate(chi_vals) if v != INF]
    if len(finite) < len(configs):
        sub_cols = [cols[k] for k in finite]
        sub = exact_simplex(sub_cols, b, obj=[chi_vals[k] for k in finite])
        if sub.status == "optimal":
            mix = _mixture_from([configs[k] for k in finite], sub.x)
            return RealizePPResult(
                status="feasible",
                mixture=mix,
                objective_value=sub.objective,
                dual_value=_dual_objective(sub.duals, b),
                residual=Fraction(0),
                method="enumeration",
            )
        mix = _mixture_from(configs, res.x)
        return RealizePPResult(
            status="feasible",
            mixture=mix,
            objective_value=INF,
            residual=Fraction(0),
            note="every realising mixture has infinite objective",
            method="enumeration",
        )
    opt = exact_simplex(cols, b, obj=chi_vals)
    if opt.status != "optimal":
        raise RuntimeError(f"optimising solve reported {opt.status}")
    mix = _mixture_from(configs, opt.x)
    return RealizePPResult(
        status="feasible",
        mixture=mix,
        objective_value=opt.objective,
        dual_value=_dual_objective(opt.duals, b),
        residual=Fraction(0),
        method="enumeration",
    )


def _dual_objective(duals: list[Fraction] | None, b: list[Fraction]) -> Fraction | None:
    if duals is None:
        return None
    return sum((y * v for y, v in zip(duals, b)), Fraction(0))


def _mixture_from(configs: Sequence[Configuration], weights) -> ConfigMixture:
    atoms = [
        (cfg, w) for cfg, w in zip(configs, weights) if w > 0
    ]
    atoms.sort(key=lambda kv: kv[0].multiplicity)
    n = len(configs[0].multiplicity) if configs else 0
    return ConfigMixture(n=n, atoms=tuple(atoms))


def _realize_pp_cg(target, objective) -> RealizePPResult:
    """Column generation over configurations for carriers too large to
    enumerate: float master, branch-and-bound pricing, exact verification
    of whichever verdict appears."""
    n = target.n
    with_intensity = target.rho1 is not None
    b_exact = _target_rhs(target)
    b = np.array([float(v) for v in b_exact])
    seeds = [Configuration((0,) * n)]
    for i in range(n):
        m = [0] * n
        m[i] = 1
        seeds.append(Configuration(tuple(m)))
    configs = list(seeds)
    known = {cfg.multiplicity for cfg in configs}
    for _ in range(500):
        A = np.array(
            [[float(v) for v in _config_column(cfg, n, with_intensity)] for cfg in configs]
        ).T
        obj1, q, y = float_phase1(A, b)
        if obj1 < 1e-9:
            cols = [_config_column(cfg, n, with_intensity) for cfg in configs]
            exact_q = solve_nonneg_exact(
                cols, b_exact, prefer=list(np.argsort(-q, kind="stable"))
            )
            if exact_q is not None:
                mix = _mixture_from(configs, exact_q)
                value = None
                if objective is not None:
                    value = sum(
                        (w * objective(cfg) for (cfg, w) in mix.atoms), Fraction(0)
                    )
                return RealizePPResult(
                    status="feasible",
                    mixture=mix,
                    objective_value=value,
                    residual=Fraction(0),
                    note="column generation stops at the first exact realisation; "
                    "the objective value is not certified minimal",
                    method="column-generation",
                )
            return RealizePPResult(status="indeterminate", method="column-generation")
        cfg, price = _price_config(y, target)
        if price <= 1e-9:
            cert = _certificate_from_dual(y, target)
            if cert is not None:
                return RealizePPResult(
                    status="infeasible", certificate=cert, gap=cert.gap,
                    method="column-generation",
                )
            return RealizePPResult(status="indeterminate", method="column-generation")
        if cfg.multiplicity in known:
            return RealizePPResult(status="indeterminate", method="column-generation")
        known.add(cfg.multiplicity)
        configs.append(cfg)
    return RealizePPResult(status="indeterminate", method="column-generation")


def _price_config(y: np.ndarray, target: CorrelationTarget) -> tuple[Configuration, float]:
    """maximise y.A_Y over admissible configurations by prefix search with
    an interval bound; ties resolve to the lexicographically smallest
    multiplicity vector."""
    n = target.n
    pairs = _pairs(n)
    y_pair = {pair: float(v) for pair, v in zip(pairs, y)}
    y_int = None
    if target.rho1 is not None:
        y_int = [float(v) for v in y[len(pairs) : len(pairs) + n]]
    y_norm = float(y[-1])
    per_point = 1 if (target.simple or target.hardcore_eps is not None) else target.cap
    forbidden = _forbidden_pairs(target)

    def value(m: list[int]) -> float:
        total = y_norm
        for i in range(len(m)):
            if m[i] == 0:
                continue
            if y_int is not None:
                total += y_int[i] * m[i]
            total += y_pair[(i, i)] * m[i] * (m[i] - 1)
            for j in range(i + 1, len(m)):
                if j < len(m) and m[j]:
                    total += y_pair[(i, j)] * m[i] * m[j]
        return total

    best_cfg = [0] * n
    best_val = value(best_cfg)

    def upper_tail(prefix: list[int], mass_left: int) -> float:
        # optimistic gain from the remaining coordinates
        k = len(prefix)
        gain = 0.0
        for i in range(k, n):
            hi = min(per_point, mass_left)
            if y_int is not None and y_int[i] > 0:
                gain += y_int[i] * hi
            if y_pair[(i, i)] > 0:
                gain += y_pair[(i, i)] * hi * max(hi - 1, 0)
            for j in range(k):
                if prefix[j] and y_pair[(j, i)] > 0:
                    gain += y_pair[(j, i)] * prefix[j] * hi
            for j in range(i + 1, n):
                if y_pair[(i, j)] > 0:
                    gain += y_pair[(i, j)] * hi * hi
        return gain

    def visit(prefix: list[int], mass_left: int) -> None:
        nonlocal best_cfg, best_val
        k = len(prefix)
        if k == n:
            v = value(prefix)
            if v > best_val:
                best_val = v
                best_cfg = list(prefix)
            return
        base = value(prefix + [0] * (n - k))
        if base + upper_tail(prefix, mass_left) <= best_val:
            return
        for m in range(min(per_point, mass_left) + 1):
            if m > 0 and any(
                (min(i, k), max(i, k)) in forbidden for i in range(k) if prefix[i] > 0
            ):
                break
            prefix.append(m)
            visit(prefix, mass_left - m)
            prefix.pop()

    visit([], target.cap)
    return Configuration(tuple(best_cfg)), best_val


@dataclass
class ScreenReport:
    trials: int
    violations: list  # (trial index, h as floats, pairing, infimum)


def positivity_screen(target: CorrelationTarget, trials: int, seed: int) -> ScreenReport:
    """Sample random symmetric test matrices and compare the measure pairing
    against the exact infimum over admissible configurations.

    Entries are uniform in [-1, 1]; both sides are evaluated in exact
    arithmetic (binary floats are rationals), so any reported violation is
    a sound witness of infeasibility.
    """
    rng = random.Random(seed)
    configs = enumerate_configs(
        target.n, target.cap, target.simple, target.hardcore_eps, target.space,
        hardcore_strict=target.hardcore_strict,
    )
    violations = []
    n = target.n
    for trial in range(trials):
        h = [[Fraction(0)] * n for _ in range(n)]
        for i in range(n):
            for j in range(i, n):
                v = Fraction(rng.uniform(-1.0, 1.0))
                h[i][j] = v
                h[j][i] = v
        # pairing over ordered pairs; the screen tests the pair functional only
        pairing = Fraction(0)
        for i in range(n):
            for j in range(n):
                pairing += h[i][j] * target.rho_value(i, j)
        inf_val = min(g_h_eval(cfg, h) for cfg in configs)
        if pairing < inf_val:
            h_float = [[float(v) for v in row] for row in h]
            violations.append((trial, h_float, pairing, inf_val))
    return ScreenReport(trials=trials, violations=violations)
