"""Command-line front end: JSON instances in, deterministic JSON reports out.

Exit codes: 0 feasible/pass, 1 infeasible/fail, 2 invalid input,
3 indeterminate. Reports are byte-identical across reruns with identical
inputs, seeds and flags: numbers are serialised as exact decimal or
fraction strings, keys are sorted, and no timestamps are embedded.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from fractions import Fraction

import numpy as np

from . import __version__
from .contact import (
    BallSystem,
    StepCdf,
    check_two_point,
    monte_carlo_contact,
)
from .errors import InvalidInstance, RealkitError
from .metric import FiniteMetricSpace, gamma_min_pairs, packing_number
from .numbers import INF, format_rational, parse_rational
from .pp import (
    CorrelationTarget,
    PPCertificate,
    objective_cardinality,
    objective_chi_hc,
    positivity_screen,
    realize_pp,
    verify_pp_certificate,
)
from .regularity import (
    AtomicMeasure2D,
    PsiFunction,
    chi_hc_integral,
    packing_integral,
    psi_admissibility,
    reduced_measure_check,
    shell_series,
)
from .setrealize import (
    InfeasibilityCertificate,
    RealizeOptions,
    SubsetMixture,
    TwoPointTarget,
    moments_of_mixture,
    realize_subsets,
    symmetrize,
    validate_group,
    verify_certificate,
)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_INVALID = 2
EXIT_INDETERMINATE = 3

_STATUS_EXIT = {
    "feasible": EXIT_OK,
    "pass": EXIT_OK,
    "infeasible": EXIT_FAIL,
    "fail": EXIT_FAIL,
    "invalid": EXIT_INVALID,
    "indeterminate": EXIT_INDETERMINATE,
}


def _threads_cap() -> int | None:
    """REALKIT_THREADS caps internal parallelism; this build runs every
    operation sequentially, so the cap is honoured trivially and results
    never depend on it."""
    raw = os.environ.get("REALKIT_THREADS")
    if raw is None:
        return None
    try:
        return max(1, int(raw))
    except ValueError:
        return None


def _digest(path: str) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def _load_json(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise InvalidInstance(f"file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise InvalidInstance(f"{path}: malformed JSON ({exc})") from exc


def _fmt(value):
    if value is None:
        return None
    if value == INF:
        return "inf"
    if isinstance(value, float):
        return format_rational(Fraction(value))
    return format_rational(value)


def _mixture_payload(mix: SubsetMixture) -> list[dict]:
    return [
        {"subset": sorted(subset), "weight": _fmt(Fraction(w) if not isinstance(w, Fraction) else w)}
        for subset, w in mix.atoms
    ]


def _certificate_payload(cert: InfeasibilityCertificate) -> dict:
    return {
        "kind": "set",
        "n": cert.n,
        "c": _fmt(cert.c),
        "a": [[_fmt(v) for v in row] for row in cert.a],
        "gap": _fmt(cert.gap),
        "minimizer": sorted(cert.minimizer),
    }


def _pp_mixture_payload(mix) -> list[dict]:
    return [
        {
            "multiplicity": list(cfg.multiplicity),
            "weight": _fmt(Fraction(w) if not isinstance(w, Fraction) else w),
        }
        for cfg, w in mix.atoms
    ]


def _pp_certificate_payload(cert: PPCertificate) -> dict:
    return {
        "kind": "pp",
        "n": cert.n,
        "c": _fmt(cert.c),
        "a": [[_fmt(v) for v in row] for row in cert.a],
        "blin": [_fmt(v) for v in cert.blin] if cert.blin is not None else None,
        "gap": _fmt(cert.gap),
        "minimizer": list(cert.minimizer.multiplicity),
    }


def _certificate_from_payload(obj: dict) -> tuple[str, object]:
    kind = obj.get("kind")
    if kind == "set":
        n = int(obj["n"])
        a = tuple(
            tuple(parse_rational(v, f"/a/{i}/{j}") for j, v in enumerate(row))
            for i, row in enumerate(obj["a"])
        )
        return kind, InfeasibilityCertificate(
            n=n,
            c=parse_rational(obj["c"], "/c"),
            a=a,
            gap=parse_rational(obj["gap"], "/gap"),
            minimizer=frozenset(int(i) for i in obj["minimizer"]),
        )
    if kind == "pp":
        from .metric import Configuration

        n = int(obj["n"])
        a = tuple(
            tuple(parse_rational(v, f"/a/{i}/{j}") for j, v in enumerate(row))
            for i, row in enumerate(obj["a"])
        )
        blin = obj.get("blin")
        return kind, PPCertificate(
            n=n,
            c=parse_rational(obj["c"], "/c"),
            a=a,
            blin=tuple(parse_rational(v, "/blin") for v in blin) if blin else None,
            gap=parse_rational(obj["gap"], "/gap"),
            minimizer=Configuration(tuple(int(m) for m in obj["minimizer"])),
        )
    raise InvalidInstance("certificate: 'kind' must be 'set' or 'pp'")


def _emit(report: dict, out_path: str | None) -> None:
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _report(command: str, status: str, payload: dict, digests: dict, **extra) -> dict:
    report = {
        "command": command,
        "status": status,
        "payload": payload,
        "version": __version__,
        "input_digest": digests,
    }
    for key, value in extra.items():
        if value is not None:
            report[key] = value
    return report


# ---------------------------------------------------------------- commands


def _cmd_packing(args) -> tuple[dict, int]:
    space = FiniteMetricSpace.from_json(_load_json(args.instance))
    t = parse_rational(args.t, "--t")
    value = packing_number(space, t)
    payload = {"packing_number": value, "t": _fmt(t), "points": space.n}
    report = _report("packing", "pass", payload, {"instance": _digest(args.instance)})
    return report, EXIT_OK


def _cmd_gamma(args) -> tuple[dict, int]:
    space = FiniteMetricSpace.from_json(_load_json(args.instance))
    t = parse_rational(args.t, "--t")
    value = gamma_min_pairs(space, args.n, t)
    payload = {"gamma": value, "n": args.n, "t": _fmt(t)}
    report = _report("gamma", "pass", payload, {"instance": _digest(args.instance)})
    return report, EXIT_OK


def _cmd_realize_set(args) -> tuple[dict, int]:
    target = TwoPointTarget.from_json(_load_json(args.instance))
    opts = RealizeOptions(max_exact=args.max_exact, tol=args.tol)
    result = realize_subsets(target, opts)
    digests = {"instance": _digest(args.instance)}
    payload: dict = {"method": result.method}
    note = result.note
    if result.status == "feasible" and args.group:
        perms = _load_json(args.group)
        digests["group"] = _digest(args.group)
        if not isinstance(perms, list):
            raise InvalidInstance("group file must hold a list of permutations")
        validate_group(perms, target.n)
        for g in perms:
            for i in range(target.n):
                for j in range(target.n):
                    if target.p[g[i]][g[j]] != target.p[i][j]:
                        raise InvalidInstance(
                            "target moments are not invariant under the supplied group"
                        )
        mix = symmetrize(result.mixture, perms)
        hat = moments_of_mixture(mix)
        if hat.p != target.p:
            raise RuntimeError("symmetrised mixture lost the target moments")
        result.mixture = mix
    if result.mixture is not None:
        payload["mixture"] = _mixture_payload(result.mixture)
    if result.certificate is not None:
        payload["certificate"] = _certificate_payload(result.certificate)
    report = _report(
        "realize-set",
        result.status,
        payload,
        digests,
        residual=_fmt(result.residual),
        gap=_fmt(result.gap),
        note=note,
    )
    return report, _STATUS_EXIT[result.status]


def _cmd_verify_cert(args) -> tuple[dict, int]:
    instance = _load_json(args.instance)
    kind, cert = _certificate_from_payload(_load_json(args.certificate))
    if kind == "set":
        target = TwoPointTarget.from_json(instance)
        ok, reason = verify_certificate(cert, target)
    else:
        target = CorrelationTarget.from_json(instance)
        ok, reason = verify_pp_certificate(cert, target)
    payload = {"kind": kind, "valid": ok, "reason": reason}
    status = "pass" if ok else "fail"
    report = _report(
        "verify-cert",
        status,
        payload,
        {"instance": _digest(args.instance), "certificate": _digest(args.certificate)},
        note=None if ok else "certificate invalid",
    )
    return report, _STATUS_EXIT[status]


def _cmd_realize_pp(args) -> tuple[dict, int]:
    target = CorrelationTarget.from_json(_load_json(args.instance))
    digests = {"instance": _digest(args.instance)}
    objective = None
    if args.objective:
        if args.objective.startswith("card"):
            objective = objective_cardinality(int(args.objective[4:]))
        elif args.objective == "chi-hc":
            if not args.psi:
                raise InvalidInstance("--objective chi-hc needs --psi")
            if target.space is None:
                raise InvalidInstance("a chi-hc objective needs the target's space")
            psi = PsiFunction.from_json(_load_json(args.psi))
            digests["psi"] = _digest(args.psi)
            objective = objective_chi_hc(psi, target.space)
        else:
            raise InvalidInstance(f"unknown objective {args.objective!r}")
    result = realize_pp(target, objective=objective)
    payload: dict = {"method": result.method}
    if result.mixture is not None:
        payload["mixture"] = _pp_mixture_payload(result.mixture)
    if result.certificate is not None:
        payload["certificate"] = _pp_certificate_payload(result.certificate)
    if result.objective_value is not None:
        payload["objective_value"] = _fmt(result.objective_value)
    if result.dual_value is not None:
        payload["dual_value"] = _fmt(result.dual_value)
    report = _report(
        "realize-pp",
        result.status,
        payload,
        digests,
        residual=_fmt(result.residual),
        gap=_fmt(result.gap),
        note=result.note,
    )
    return report, _STATUS_EXIT[result.status]


def _cmd_screen_pp(args) -> tuple[dict, int]:
    target = CorrelationTarget.from_json(_load_json(args.instance))
    screen = positivity_screen(target, trials=args.trials, seed=args.seed)
    violations = [
        {
            "trial": t,
            "h": [[format_rational(Fraction(v)) for v in row] for row in h],
            "pairing": _fmt(phi),
            "infimum": _fmt(inf_val),
        }
        for t, h, phi, inf_val in screen.violations
    ]
    payload = {"trials": screen.trials, "violations": violations, "seed": args.seed}
    status = "pass" if not violations else "fail"
    note = None if not violations else "a sampled test functional violates positivity"
    report = _report(
        "screen-pp", status, payload, {"instance": _digest(args.instance)}, note=note
    )
    return report, _STATUS_EXIT[status]


def _parse_finite_measure(obj: dict) -> tuple[FiniteMetricSpace, AtomicMeasure2D]:
    if "space" not in obj:
        raise InvalidInstance("instance: expected key 'space'")
    space = FiniteMetricSpace.from_json(obj["space"])
    atoms = []
    for k, atom in enumerate(obj.get("rho", [])):
        if not isinstance(atom, list) or len(atom) != 3:
            raise InvalidInstance(f"/rho/{k}: expected [i, j, weight-string]")
        atoms.append((int(atom[0]), int(atom[1]), atom[2]))
    return space, AtomicMeasure2D.on_space(space, atoms)


def _verdict_from_enclosure(value, bound) -> str:
    lo, hi = value
    if bound is None:
        return "pass" if hi != INF else "fail"
    if hi != INF and hi <= bound:
        return "pass"
    if lo == INF or lo > bound:
        return "fail"
    return "indeterminate"


def _cmd_regularity(args) -> tuple[dict, int]:
    obj = _load_json(args.instance)
    digests = {"instance": _digest(args.instance)}
    bound = parse_rational(args.r, "--r") if args.r is not None else None
    payload: dict = {"check": args.check}
    if args.check == "chi":
        space, measure = _parse_finite_measure(obj)
        if not args.psi:
            raise InvalidInstance("--check chi needs --psi")
        psi = PsiFunction.from_json(_load_json(args.psi))
        digests["psi"] = _digest(args.psi)
        value = chi_hc_integral(measure, psi)
        payload["value"] = _fmt(value)
        payload["bound"] = _fmt(bound)
        status = _verdict_from_enclosure((value, value), bound)
    elif args.check == "packing":
        space, measure = _parse_finite_measure(obj)
        value = packing_integral(measure, space)
        payload["value"] = _fmt(value)
        payload["bound"] = _fmt(bound)
        status = _verdict_from_enclosure((value, value), bound)
    elif args.check == "psi":
        space, _ = _parse_finite_measure({**obj, "rho": []})
        if not args.psi:
            raise InvalidInstance("--check psi needs --psi")
        psi = PsiFunction.from_json(_load_json(args.psi))
        digests["psi"] = _digest(args.psi)
        threshold = bound if bound is not None else Fraction(1)
        rep = psi_admissibility(psi, space, threshold)
        payload["profile"] = [
            {
                "t": _fmt(t),
                "psi": _fmt(pv),
                "packing": pk,
                "ratio": _fmt(ratio),
            }
            for t, pv, pk, ratio in rep.profile
        ]
        payload["threshold"] = _fmt(threshold)
        payload["ratio_at_smallest_distance"] = _fmt(rep.ratio_at_smallest)
        payload["note"] = (
            "finite-data proxy: the growth condition is a limit statement "
            "and is judged at the smallest positive distance"
        )
        status = "pass" if rep.passes else "fail"
    elif args.check == "shells":
        if "d" not in obj or "atoms" not in obj or "radii" not in obj:
            raise InvalidInstance("instance: shells need keys 'd', 'atoms', 'radii'")
        measure = AtomicMeasure2D.euclidean(
            int(obj["d"]), [(a, b, w) for a, b, w in obj["atoms"]]
        )
        if not args.beta:
            raise InvalidInstance("--check shells needs --beta")
        beta_obj = _load_json(args.beta)
        digests["beta"] = _digest(args.beta)
        if "beta" not in beta_obj:
            raise InvalidInstance("beta file: expected key 'beta'")
        result = shell_series(measure, obj["radii"], beta_obj["beta"])
        payload["r_values"] = [[_fmt(lo), _fmt(hi)] for lo, hi in result.r_values]
        payload["series"] = [_fmt(result.series[0]), _fmt(result.series[1])]
        payload["bound"] = _fmt(bound)
        status = _verdict_from_enclosure(result.series, bound)
    elif args.check == "reduced":
        if "d" not in obj or "atoms" not in obj or "ball_radius" not in obj:
            raise InvalidInstance("instance: reduced needs keys 'd', 'atoms', 'ball_radius'")
        atoms = [(a, w) for a, w in obj["atoms"]]
        result = reduced_measure_check(atoms, obj["ball_radius"], int(obj["d"]))
        payload["value"] = [_fmt(result.value[0]), _fmt(result.value[1])]
        payload["origin_atom"] = result.origin_atom
        payload["bound"] = _fmt(bound)
        status = _verdict_from_enclosure(result.value, bound)
    else:
        raise InvalidInstance(f"unknown regularity check {args.check!r}")
    report = _report("regularity", status, payload, digests)
    return report, _STATUS_EXIT[status]


def _parse_point(text: str) -> list[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


def _cmd_contact_check(args) -> tuple[dict, int]:
    tau1 = StepCdf.from_json(_load_json(args.tau1))
    digests = {"tau1": _digest(args.tau1)}
    if args.tau2 is None:
        payload = {
            "feasible": True,
            "note": "a single valid step cdf is always realisable",
        }
        report = _report("contact-check", "pass", payload, digests)
        return report, EXIT_OK
    tau2 = StepCdf.from_json(_load_json(args.tau2))
    digests["tau2"] = _digest(args.tau2)
    if args.l is None:
        raise InvalidInstance("checking two cdfs needs --l")
    result = check_two_point(tau1, tau2, parse_rational(args.l, "--l"))
    payload = {
        "feasible": result.feasible,
        "violation_at": _fmt(result.violation_at),
        "side": result.side,
    }
    status = "pass" if result.feasible else "fail"
    report = _report("contact-check", status, payload, digests)
    return report, _STATUS_EXIT[status]


def _cmd_contact_simulate(args) -> tuple[dict, int]:
    tau1 = StepCdf.from_json(_load_json(args.tau1))
    tau2 = StepCdf.from_json(_load_json(args.tau2))
    x1 = _parse_point(args.x1)
    x2 = _parse_point(args.x2)
    report_mc = monte_carlo_contact(tau1, tau2, x1, x2, samples=args.samples, seed=args.seed)
    payload = {
        "abscissae": report_mc.abscissae,
        "empirical1": report_mc.empirical1,
        "empirical2": report_mc.empirical2,
        "target1": report_mc.target1,
        "target2": report_mc.target2,
        "max_deviation1": report_mc.max_deviation1,
        "max_deviation2": report_mc.max_deviation2,
        "no_point_fraction": report_mc.no_point_fraction,
        "samples": report_mc.samples,
        "seed": report_mc.seed,
    }
    digests = {"tau1": _digest(args.tau1), "tau2": _digest(args.tau2)}
    report = _report("contact-simulate", "pass", payload, digests)
    return report, EXIT_OK


def _cmd_contact_screen(args) -> tuple[dict, int]:
    obj = _load_json(args.instance)
    digests = {"instance": _digest(args.instance)}
    if "system" not in obj or "taus" not in obj or "probe_points" not in obj:
        raise InvalidInstance("instance: expected keys 'system', 'taus', 'probe_points'")
    system = BallSystem.from_json(obj["system"])
    taus = {}
    for entry in obj["taus"]:
        point = tuple(parse_rational(c) for c in entry["point"])
        taus[point] = StepCdf.from_json(entry["cdf"])
    from .contact import ball_positivity_screen

    rep = ball_positivity_screen(
        taus, system, obj["probe_points"], trials=args.trials or 0, seed=args.seed
    )
    payload = {
        "label": rep.label,
        "system_nonnegative": rep.system_nonnegative,
        "negative_mask": rep.negative_mask,
        "tau_sum": _fmt(rep.tau_sum),
        "method": rep.method,
    }
    if not rep.system_nonnegative:
        status = "pass"  # system rejected, nothing to test against the cdfs
        payload["note"] = "system is not non-negative on the probe subsets; no cdf test"
    else:
        status = "pass" if rep.passes else "fail"
    report = _report("contact-screen", status, payload, digests)
    return report, _STATUS_EXIT[status]


def _cmd_sample(args) -> tuple[dict, int]:
    obj = _load_json(args.source)
    digests = {"source": _digest(args.source)}
    payload_mix = obj.get("payload", {}).get("mixture") if "payload" in obj else obj.get("mixture")
    if payload_mix is None:
        raise InvalidInstance("source: no mixture found (expected 'mixture' or payload.mixture)")
    weights = np.array([float(Fraction(atom["weight"])) for atom in payload_mix])
    if weights.sum() <= 0:
        raise InvalidInstance("mixture weights must be positive")
    weights = weights / weights.sum()
    rng = np.random.default_rng(args.seed)
    picks = rng.choice(len(payload_mix), size=args.n, p=weights)
    draws = []
    for k in picks:
        atom = payload_mix[int(k)]
        draws.append(atom.get("subset", atom.get("multiplicity")))
    payload = {"draws": draws, "n": args.n, "seed": args.seed}
    report = _report("sample", "pass", payload, digests)
    return report, EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="realkit",
        description="Realisability checks for second-order data of random sets "
        "and point processes on finite carriers",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write the JSON report here instead of stdout")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("packing", parents=[common], help="packing number of a finite metric space")
    p.add_argument("instance")
    p.add_argument("--t", required=True)
    p.set_defaults(func=_cmd_packing)

    p = sub.add_parser("gamma", parents=[common], help="minimal ordered close-pair count at mass n")
    p.add_argument("instance")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--t", required=True)
    p.set_defaults(func=_cmd_gamma)

    p = sub.add_parser("realize-set", parents=[common], help="realise a two-point covering target")
    p.add_argument("instance")
    p.add_argument("--max-exact", type=int, default=15, dest="max_exact")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--group", help="JSON list of permutations to symmetrise with")
    p.set_defaults(func=_cmd_realize_set)

    p = sub.add_parser("verify-cert", parents=[common], help="re-verify an infeasibility certificate")
    p.add_argument("instance")
    p.add_argument("certificate")
    p.set_defaults(func=_cmd_verify_cert)

    p = sub.add_parser("realize-pp", parents=[common], help="realise a correlation target")
    p.add_argument("instance")
    p.add_argument("--objective", choices=["card2", "card3", "card4", "chi-hc"])
    p.add_argument("--psi", help="step-function weight for the chi-hc objective")
    p.set_defaults(func=_cmd_realize_pp)

    p = sub.add_parser("screen-pp", parents=[common], help="sampled positivity screen for a correlation target")
    p.add_argument("instance")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, required=True)
    p.set_defaults(func=_cmd_screen_pp)

    p = sub.add_parser("regularity", parents=[common], help="integrability-side checkers")
    p.add_argument("instance")
    p.add_argument("--check", required=True, choices=["chi", "packing", "psi", "shells", "reduced"])
    p.add_argument("--psi")
    p.add_argument("--r", help="bound for pass/fail (threshold for --check psi)")
    p.add_argument("--beta", help="JSON file with the shell weight sequence")
    p.set_defaults(func=_cmd_regularity)

    p = sub.add_parser("contact", help="contact distribution tools")
    contact_sub = p.add_subparsers(dest="contact_command", required=True)

    pc = contact_sub.add_parser("check", parents=[common], help="two-point sandwich test")
    pc.add_argument("--tau1", required=True)
    pc.add_argument("--tau2")
    pc.add_argument("--l")
    pc.set_defaults(func=_cmd_contact_check)

    pc = contact_sub.add_parser("simulate", parents=[common], help="Monte Carlo check of the construction")
    pc.add_argument("--tau1", required=True)
    pc.add_argument("--tau2", required=True)
    pc.add_argument("--x1", required=True, help="comma-separated rational coordinates")
    pc.add_argument("--x2", required=True)
    pc.add_argument("--samples", type=int, default=100000)
    pc.add_argument("--seed", type=int, required=True)
    pc.set_defaults(func=_cmd_contact_simulate)

    pc = contact_sub.add_parser("screen", parents=[common], help="ball-system positivity screen")
    pc.add_argument("instance")
    pc.add_argument("--trials", type=int, default=0)
    pc.add_argument("--seed", type=int)
    pc.set_defaults(func=_cmd_contact_screen)

    p = sub.add_parser("sample", parents=[common], help="draw realisations from a reported mixture")
    p.add_argument("source", help="report or mixture JSON")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.set_defaults(func=_cmd_sample)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _threads_cap()
    try:
        report, code = args.func(args)
    except RealkitError as exc:
        report = {
            "command": args.command,
            "status": "invalid",
            "payload": {"error": str(exc)},
            "version": __version__,
            "input_digest": {},
        }
        _emit(report, args.out)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    _emit(report, args.out)
    return code


if __name__ == "__main__":
    sys.exit(main())
