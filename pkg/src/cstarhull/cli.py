"""Command-line interface: JSON in, JSON out, stable exit codes.

Exit codes: 0 success, 2 usage or parse error, 3 validation or dimension
error, 4 undecided verdict.  Every verdict is always printed as JSON; exit
codes only mirror the payload.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import jsonio
from .commutative_oracle import DiagonalFamily, pointwise_hull_membership, lambda_sequence, scalar_hull_membership
from .corpus import run_corpus
from .hull_solver import (
    Member,
    NotMember,
    SolverConfig,
    Undecided,
    decide_membership,
    hull_distance,
    verify_certificate,
)
from .kraus import CombinationError, Mode, apply_combination, validate_combination
from .matrix_core import CMatrix
from .verifier import FamilyMode, verify_polyhedron

USAGE_ERROR, VALIDATION_ERROR, UNDECIDED = 2, 3, 4


def _emit(payload) -> None:
    print(jsonio.canonical_dumps(payload))


def _read_json(path: str):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise jsonio.ParseError(f"cannot read {path}: {exc}") from exc
    return jsonio.load_json(text)


@dataclass
class Workspace:
    """Parsed inputs for one command, loaded and validated before any solve.

    Records are keyed by their file path, so names are unique by
    construction; a parse or validation failure surfaces before any solver
    work starts.
    """

    config: SolverConfig
    families: dict = field(default_factory=dict)
    matrices: dict = field(default_factory=dict)
    combinations: dict = field(default_factory=dict)
    certificates: dict = field(default_factory=dict)

    def family(self, path: str):
        if path not in self.families:
            self.families[path] = jsonio.parse_family(_read_json(path))
        return self.families[path]

    def matrix(self, path: str):
        if path not in self.matrices:
            self.matrices[path] = jsonio.parse_matrix(_read_json(path))
        return self.matrices[path]

    def combination(self, path: str):
        if path not in self.combinations:
            self.combinations[path] = jsonio.parse_combination(_read_json(path))
        return self.combinations[path]

    def certificate(self, path: str):
        if path not in self.certificates:
            self.certificates[path] = jsonio.parse_certificate(_read_json(path))
        return self.certificates[path]


def _solver_config(args) -> SolverConfig:
    seed = args.seed
    if seed is None:
        env = os.environ.get("CSTAR_HULL_SEED")
        seed = int(env) if env else 0
    return SolverConfig(
        feas_tol=args.tol,
        cert_tol=args.cert_tol,
        max_iter=args.max_iter,
        over_relaxation=args.over_relax,
        seed=seed,
    )


def _add_solver_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--tol", type=float, default=1e-7, help="feasibility tolerance")
    parser.add_argument("--cert-tol", type=float, default=1e-8, help="certificate tolerance")
    parser.add_argument("--max-iter", type=int, default=50_000, help="iteration budget")
    parser.add_argument("--over-relax", type=float, default=1.6, help="relaxation in (0,2)")
    parser.add_argument("--seed", type=int, default=None, help="deterministic seed")


def cmd_eval(args) -> int:
    ws = Workspace(config=SolverConfig())
    family = ws.family(args.family)
    comb = ws.combination(args.combination)
    report = validate_combination(family, comb)
    if not report.valid:
        _emit(
            {
                "error": "combination failed validation",
                "mode": comb.mode.value,
                "unitality_residual": report.unitality_residual,
                "min_slack_eig": report.min_slack_eig,
            }
        )
        return VALIDATION_ERROR
    _emit(jsonio.matrix_to_json(apply_combination(family, comb)))
    return 0


def cmd_member(args) -> int:
    ws = Workspace(config=_solver_config(args))
    family = ws.family(args.family)
    target = ws.matrix(args.target)
    verdict = decide_membership(family, target, Mode(args.mode), ws.config)
    _emit(jsonio.verdict_to_json(verdict))
    return UNDECIDED if isinstance(verdict, Undecided) else 0


def cmd_dist(args) -> int:
    ws = Workspace(config=_solver_config(args))
    family = ws.family(args.family)
    target = ws.matrix(args.target)
    bounds = hull_distance(family, target, Mode(args.mode), ws.config)
    _emit(jsonio.bounds_to_json(bounds))
    return 0


def cmd_verify(args) -> int:
    ws = Workspace(config=_solver_config(args))
    family = ws.family(args.family)
    report = verify_polyhedron(family, FamilyMode(args.mode), ws.config, jobs=args.jobs)
    _emit(jsonio.report_to_json(report))
    return 0


def cmd_certify(args) -> int:
    ws = Workspace(config=SolverConfig())
    family = ws.family(args.family)
    target = ws.matrix(args.target)
    cert = ws.certificate(args.certificate)
    check = verify_certificate(cert, family, target, args.tol)
    _emit(
        {
            "valid": check.valid,
            "margin": check.margin,
            "lmi_max_eigs": list(check.lmi_max_eigs),
            "gamma_max_eig": check.gamma_max_eig,
        }
    )
    return 0


def cmd_lambda(args) -> int:
    values = lambda_sequence(args.n)
    _emit({"values": [jsonio.complex_to_json(z) for z in values]})
    return 0


def cmd_examples(args) -> int:
    results = run_corpus()
    failed = 0
    for case, ok, detail in results:
        status = "PASS" if ok else "FAIL"
        if not ok:
            failed += 1
        print(f"{status}  {case.id}  [{case.origin}]  {case.source}")
        if args.verbose or not ok:
            print(f"      {detail}")
    _emit({"total": len(results), "passed": len(results) - failed, "failed": failed})
    return 0 if failed == 0 else 1


def _scalar_agreement(seed: int, instances: int, config: SolverConfig):
    rng = np.random.default_rng(seed)
    contradictions = 0
    undecided = 0
    for n in range(instances):
        k = int(rng.integers(1, 7))
        values = rng.normal(size=k) + 1j * rng.normal(size=k)
        mode = Mode.EXACT_UNITAL if n % 2 == 0 else Mode.SUB_UNITAL
        if rng.random() < 0.5:
            w = rng.random(k)
            w /= w.sum()
            if mode is Mode.SUB_UNITAL:
                w *= rng.random()
            target = complex(np.dot(w, values))
        else:
            target = complex(rng.normal(), rng.normal())
        family_json = {
            "dim": 1,
            "generators": [jsonio.matrix_to_json(CMatrix([[z]])) for z in values],
        }
        family = jsonio.parse_family(family_json)
        verdict = decide_membership(family, CMatrix([[target]]), mode, config)
        oracle = scalar_hull_membership(values, target, mode)
        if isinstance(verdict, Undecided):
            undecided += 1
        elif isinstance(verdict, Member) != oracle:
            contradictions += 1
    return contradictions, undecided


def _diagonal_agreement(seed: int, instances: int, config: SolverConfig):
    rng = np.random.default_rng(seed)
    mismatches = 0
    for _ in range(instances):
        m = int(rng.integers(2, 4))
        k = int(rng.integers(1, 4))
        funcs = tuple(rng.normal(size=m) + 1j * rng.normal(size=m) for _ in range(k))
        family = DiagonalFamily(m, funcs)
        weights = rng.random((m, k))
        weights /= weights.sum(axis=1, keepdims=True)
        target = np.array(
            [np.dot(weights[x], [f[x] for f in funcs]) for x in range(m)],
            dtype=complex,
        )
        pointwise = pointwise_hull_membership(family, target, Mode.EXACT_UNITAL)
        verdict = decide_membership(
            family.as_matrix_family(), CMatrix(np.diag(target)), Mode.EXACT_UNITAL, config
        )
        if pointwise.member and not isinstance(verdict, Member):
            mismatches += 1
    return mismatches


def cmd_oracle_compare(args) -> int:
    config = _solver_config(args)
    contradictions, undecided = _scalar_agreement(
        config.seed, args.instances, config
    )
    diag_mismatches = _diagonal_agreement(config.seed + 1, max(args.instances // 10, 5), config)
    _emit(
        {
            "scalar_instances": args.instances,
            "contradictions": contradictions,
            "undecided": undecided,
            "diagonal_instances": max(args.instances // 10, 5),
            "diagonal_mismatches": diag_mismatches,
        }
    )
    return 0 if contradictions == 0 and diag_mismatches == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cstar-hull",
        description="membership, distances and separation certificates for "
        "coefficient-combination hulls of matrix families",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="evaluate a combination against a family")
    p.add_argument("family")
    p.add_argument("combination")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("member", help="decide hull membership of a target")
    p.add_argument("family")
    p.add_argument("target")
    p.add_argument("--mode", choices=[m.value for m in Mode], default="exact")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_member)

    p = sub.add_parser("dist", help="certified bounds on the hull distance")
    p.add_argument("family")
    p.add_argument("target")
    p.add_argument("--mode", choices=[m.value for m in Mode], default="exact")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_dist)

    p = sub.add_parser("verify", help="leave-one-out separation report for a family")
    p.add_argument("family")
    p.add_argument("--mode", choices=[m.value for m in FamilyMode], default="cstar")
    p.add_argument("--jobs", type=int, default=1, help="parallel element queries")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("certify", help="check a separation certificate file")
    p.add_argument("family")
    p.add_argument("target")
    p.add_argument("certificate")
    p.add_argument("--tol", type=float, default=1e-8)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("lambda", help="the unit-circle scalar sequence")
    p.add_argument("n", type=int)
    p.set_defaults(func=cmd_lambda)

    p = sub.add_parser("examples", help="replay the embedded example corpus")
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(func=cmd_examples)

    p = sub.add_parser("oracle-compare", help="cross-check solver against plane oracles")
    p.add_argument("--instances", type=int, default=50)
    _add_solver_flags(p)
    p.set_defaults(func=cmd_oracle_compare)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except jsonio.ParseError as exc:
        _emit({"error": str(exc)})
        return USAGE_ERROR
    except CombinationError as exc:
        _emit({"error": str(exc)})
        return VALIDATION_ERROR
    except ValueError as exc:
        _emit({"error": str(exc)})
        return VALIDATION_ERROR


if __name__ == "__main__":
    sys.exit(main())
