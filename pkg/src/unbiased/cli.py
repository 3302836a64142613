"""Command-line front end: solve / verify / polytope / symplectic / family.

Exit codes are a stable contract: 0 success, 1 usage or config error, 2 no
convergence, 3 verification failure. JSON is the canonical machine output
(--json to stdout, --out to a file); human-readable tables go to stdout.
All commands are deterministic for a fixed --seed up to the timestamp field
embedded in JSON payloads.
"""

from __future__ import annotations

import argparse
import json
import sys
from datetime import datetime, timezone

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import birkhoff, serialize, symplectic
from .errors import SizeGuard, UnbiasedError
from .potential import validate_weights
from .solver import SolveConfig, family_probe, multistart
from .verify import check_mub, check_unbiased_pair

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NO_CONVERGENCE = 2
EXIT_CHECK_FAILED = 3

_DEFAULTS = {
    "solve": {
        "weights": None, "starts": 100, "seed": 0, "max_iterations": 100,
        "residual_tolerance": 1e-11, "step_damping": 0.5, "nullity_tolerance": 1e-6,
        "cluster_tolerance": 1e-6, "modulus_low": 0.5, "modulus_high": 2.0,
        "fourier": False, "fourier_starts": 0, "fourier_scale": 0.1,
        "workers": 1, "out": None, "csv": None,
    },
    "verify": {"weights": None, "tol": 1e-10, "mub": False, "out": None},
    "polytope": {"out": None, "csv": None},
    "symplectic": {"trials": 100, "points": 5, "seed": 0, "tol": 1e-8, "out": None},
    "family": {"weights": None, "seed": 0, "tol": 1e-11, "out": None},
}


def _timestamp() -> str:
    return datetime.now(timezone.utc).isoformat()


def _emit(payload: dict, args) -> None:
    if getattr(args, "out", None):
        serialize.dump_json(payload, args.out)
    if getattr(args, "json", False):
        print(json.dumps(payload, sort_keys=True, indent=2))


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    with open(path, "rb") as fh:
        return tomllib.load(fh)


def _fill_defaults(args, command: str, config: dict):
    """Resolution order: explicit flag > config file > builtin default."""
    section = dict(config)
    section.update(config.get(command, {}) if isinstance(config.get(command), dict) else {})
    for name, default in _DEFAULTS[command].items():
        if getattr(args, name, None) is None:
            value = section.get(name, default)
            setattr(args, name, value)
    return args


def _weights_for(args, n: int):
    spec = args.weights if args.weights else f"uniform:{n}"
    return serialize.parse_weights_spec(spec, default_n=n)


def cmd_solve(args) -> int:
    if args.n < 2:
        print("error: --n must be at least 2", file=sys.stderr)
        return EXIT_USAGE
    if args.starts < 1 and args.fourier_starts < 1 and not args.fourier:
        print("error: need at least one start", file=sys.stderr)
        return EXIT_USAGE
    try:
        cfg = SolveConfig(
            starts=args.starts, seed=args.seed, max_iterations=args.max_iterations,
            residual_tolerance=args.residual_tolerance, step_damping=args.step_damping,
            nullity_tolerance=args.nullity_tolerance, cluster_tolerance=args.cluster_tolerance,
            modulus_range=(args.modulus_low, args.modulus_high),
            fourier_starts=args.fourier_starts, fourier_scale=args.fourier_scale,
            include_fourier=args.fourier, workers=args.workers,
        )
        w = _weights_for(args, args.n)
        weight_report = validate_weights(w)
        if not weight_report.passed:
            print("error: invalid weight matrix:", file=sys.stderr)
            for v in weight_report.violations:
                print(f"  {v.relation} at {v.indices}: {v.deviation:.3e}", file=sys.stderr)
            return EXIT_USAGE
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    records = multistart(args.n, w, cfg)
    converged = sum(r.basin_count for r in records)
    total = cfg.starts + cfg.fourier_starts + (1 if cfg.include_fourier else 0)
    print(f"n={args.n}  starts={total}  converged={converged}  clusters={len(records)}")
    print(f"{'cluster':>7}  {'nullity':>7}  {'basin':>5}  {'|E^n|':>12}  {'residual':>9}")
    verify_tol = 100.0 * cfg.residual_tolerance
    footer = []
    for idx, r in enumerate(records):
        print(f"{idx:>7}  {r.nullity:>7}  {r.basin_count:>5}  "
              f"{abs(r.potential_power):>12.6g}  {r.residual_norm:>9.2e}")
        footer.append(check_unbiased_pair(r.slice_point.embed(), w, tol=verify_tol).passed)
    for idx, ok in enumerate(footer):
        print(f"verification cluster {idx}: {'pass' if ok else 'FAIL'} (tol {verify_tol:.1e})")
    payload = {
        "command": "solve",
        "timestamp": _timestamp(),
        "n": args.n,
        "seed": cfg.seed,
        "starts": total,
        "converged": converged,
        "weights": serialize.weights_to_json(w),
        "records": serialize.records_to_json(records),
        "verification_passed": footer,
    }
    _emit(payload, args)
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write(serialize.clusters_to_csv(records))
    return EXIT_OK if records else EXIT_NO_CONVERGENCE


def cmd_verify(args) -> int:
    try:
        with open(args.matrix, "r", encoding="utf-8") as fh:
            g = serialize.matrix_from_json(json.load(fh))
        w = _weights_for(args, g.shape[0])
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        report = check_unbiased_pair(g, w, tol=args.tol)
    except UnbiasedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    reports = {"unbiased_pair": report}
    if args.mub:
        reports["mub"] = check_mub(g, tol=args.tol)
    all_passed = all(r.passed for r in reports.values())
    for name, rep in reports.items():
        print(f"{name}: {'pass' if rep.passed else 'FAIL'} ({len(rep.violations)} violations)")
        for v in rep.violations[:20]:
            print(f"  {v.relation} at {v.indices}: deviation {v.deviation:.3e}")
        if len(rep.violations) > 20:
            print(f"  ... {len(rep.violations) - 20} more")
    payload = {
        "command": "verify",
        "timestamp": _timestamp(),
        "tolerance": args.tol,
        "reports": {name: rep.to_json() for name, rep in reports.items()},
    }
    _emit(payload, args)
    return EXIT_OK if all_passed else EXIT_CHECK_FAILED


def cmd_polytope(args) -> int:
    try:
        report = birkhoff.full_report(args.n)
    except (SizeGuard, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.csv:
        _, cert = birkhoff.reflexive_check(args.n)
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write(serialize.reflexivity_table_csv(cert))
    toric = birkhoff.toric_identification(args.n)
    print(f"n={report.n}  vertices={report.vertex_count}  facets={report.facet_count}  "
          f"dimension={report.dimension}")
    print(f"reflexive={report.reflexive}  lattice_points={report.lattice_point_count}  "
          f"terminal={report.terminal}")
    if toric.model:
        verdict = "certified" if toric.certified else "not certified"
        print(f"toric model ({toric.model}): {verdict} -- {toric.reason}")
    payload = {
        "command": "polytope",
        "timestamp": _timestamp(),
        "report": report.to_json(),
        "toric_identification": {
            "model": toric.model,
            "certified": toric.certified,
            "reason": toric.reason,
        },
    }
    _emit(payload, args)
    return EXIT_OK if report.reflexive and report.terminal else EXIT_CHECK_FAILED


def cmd_symplectic(args) -> int:
    if args.trials < 1 or args.points < 1:
        print("error: --trials and --points must be positive", file=sys.stderr)
        return EXIT_USAGE
    if args.n < 2:
        print("error: --n must be at least 2", file=sys.stderr)
        return EXIT_USAGE
    worst = 0.0
    for p_idx in range(args.points):
        pt = symplectic.random_cotangent_point(args.n, args.seed + 977 * p_idx)
        rep = symplectic.pullback_symplectic_check(pt, trials=args.trials,
                                                   seed=args.seed + p_idx, tol=args.tol)
        worst = max(worst, rep.max_deviation)
    pullback_ok = worst < args.tol
    rng = np.random.Generator(np.random.PCG64(args.seed))
    lemma_ok = True
    for k in range(1, args.n + 1):
        for trial in range(50):
            ps = symplectic.random_orthogonal_tuple(args.n, k, args.seed + 131 * k + trial)
            s_proj, orth = symplectic.rank_k_lemma_check(ps)
            bad = [symplectic.random_rank1_idempotent(args.n, rng) for _ in range(k)]
            s_proj_b, orth_b = symplectic.rank_k_lemma_check(bad)
            if s_proj != orth or s_proj_b != orth_b:
                lemma_ok = False
    commute = symplectic.integrable_commute_check(
        [symplectic.random_rank1_idempotent(args.n, rng) for _ in range(10)])
    print(f"pullback max deviation: {worst:.3e} (tol {args.tol:.1e}) -> "
          f"{'pass' if pullback_ok else 'FAIL'}")
    print(f"rank-k lemma biconditional: {'pass' if lemma_ok else 'FAIL'}")
    print(f"integrable commutation: {'pass' if commute.passed else 'FAIL'}")
    payload = {
        "command": "symplectic",
        "timestamp": _timestamp(),
        "n": args.n,
        "trials": args.trials,
        "points": args.points,
        "seed": args.seed,
        "max_deviation": worst,
        "tolerance": args.tol,
        "lemma_passed": lemma_ok,
        "commutation_passed": commute.passed,
    }
    _emit(payload, args)
    return EXIT_OK if (pullback_ok and lemma_ok and commute.passed) else EXIT_CHECK_FAILED


def cmd_family(args) -> int:
    try:
        with open(args.records, "r", encoding="utf-8") as fh:
            records = serialize.records_from_json(json.load(fh))
    except (OSError, ValueError, json.JSONDecodeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(f"{'cluster':>7}  {'nullity':>7}  {'traceable':>9}  flag")
    results = []
    for idx, record in enumerate(records):
        n = record.slice_point.n
        w = _weights_for(args, n)
        cfg = SolveConfig(seed=args.seed, residual_tolerance=args.tol)
        probe = family_probe(record, w, cfg)
        results.append(probe)
        print(f"{idx:>7}  {probe.nullity:>7}  {probe.traceable_directions:>9}  "
              f"{probe.flag or '-'}")
    payload = {
        "command": "family",
        "timestamp": _timestamp(),
        "probes": [
            {
                "nullity": p.nullity,
                "traceable_directions": p.traceable_directions,
                "trace_distances": list(p.trace_distances),
                "flag": p.flag,
                "confirmed": p.confirmed,
            }
            for p in results
        ],
    }
    _emit(payload, args)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="unbiased",
        description="Critical points of the unbiasedness potential: solve, certify, probe.",
    )
    parser.add_argument("--config", help="TOML config file mirroring the flags (flags override)")
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="multi-start Newton search for critical points")
    p_solve.add_argument("--n", type=int, required=True)
    p_solve.add_argument("--weights", help="'uniform:n', JSON file path")
    p_solve.add_argument("--starts", type=int)
    p_solve.add_argument("--seed", type=int)
    p_solve.add_argument("--max-iterations", dest="max_iterations", type=int)
    p_solve.add_argument("--residual-tolerance", "--tol", dest="residual_tolerance", type=float)
    p_solve.add_argument("--step-damping", dest="step_damping", type=float)
    p_solve.add_argument("--nullity-tolerance", dest="nullity_tolerance", type=float)
    p_solve.add_argument("--cluster-tolerance", dest="cluster_tolerance", type=float)
    p_solve.add_argument("--modulus-low", dest="modulus_low", type=float)
    p_solve.add_argument("--modulus-high", dest="modulus_high", type=float)
    p_solve.add_argument("--fourier", action="store_const", const=True,
                         help="seed one start from the Fourier matrix")
    p_solve.add_argument("--fourier-starts", dest="fourier_starts", type=int,
                         help="number of perturbed Fourier starts")
    p_solve.add_argument("--fourier-scale", dest="fourier_scale", type=float)
    p_solve.add_argument("--workers", type=int)
    p_solve.add_argument("--out", help="write the records payload as JSON")
    p_solve.add_argument("--csv", help="write the cluster summary as CSV")
    p_solve.add_argument("--json", action="store_true", help="print the JSON payload")
    p_solve.set_defaults(func=cmd_solve)

    p_verify = sub.add_parser("verify", help="certify a transition matrix file")
    p_verify.add_argument("matrix", help="matrix JSON file")
    p_verify.add_argument("--weights", help="'uniform:n', JSON file path")
    p_verify.add_argument("--tol", type=float)
    p_verify.add_argument("--mub", action="store_const", const=True,
                          help="also run the mutually-unbiased-bases check")
    p_verify.add_argument("--out")
    p_verify.add_argument("--json", action="store_true")
    p_verify.set_defaults(func=cmd_verify)

    p_poly = sub.add_parser("polytope", help="exact Birkhoff polytope certificates")
    p_poly.add_argument("--n", type=int, required=True)
    p_poly.add_argument("--out")
    p_poly.add_argument("--csv", help="write the reflexivity certificate table as CSV")
    p_poly.add_argument("--json", action="store_true")
    p_poly.set_defaults(func=cmd_polytope)

    p_sym = sub.add_parser("symplectic", help="numeric validation of the symplectic claims")
    p_sym.add_argument("--n", type=int, required=True)
    p_sym.add_argument("--trials", type=int, help="tangent pairs per base point")
    p_sym.add_argument("--points", type=int, help="number of random base points")
    p_sym.add_argument("--seed", type=int)
    p_sym.add_argument("--tol", type=float)
    p_sym.add_argument("--out")
    p_sym.add_argument("--json", action="store_true")
    p_sym.set_defaults(func=cmd_symplectic)

    p_fam = sub.add_parser("family", help="probe solve records for solution families")
    p_fam.add_argument("records", help="records JSON file produced by solve")
    p_fam.add_argument("--weights", help="'uniform:n', JSON file path")
    p_fam.add_argument("--seed", type=int)
    p_fam.add_argument("--tol", dest="tol", type=float)
    p_fam.add_argument("--out")
    p_fam.add_argument("--json", action="store_true")
    p_fam.set_defaults(func=cmd_family)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _load_config(args.config)
    except (OSError, tomllib.TOMLDecodeError) as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_USAGE
    _fill_defaults(args, args.command, config)
    try:
        return args.func(args)
    except UnbiasedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
