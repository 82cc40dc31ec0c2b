"""Canonical JSON for every value the command line reads or writes.

Complex scalars are two-element arrays [re, im]; matrices are
``{"rows": n, "cols": m, "data": [[re, im], ...]}`` in row-major order.
The canonical writer sorts keys and prints floats with 17 significant
digits, so serializing a parsed canonical file is byte-identical.
"""

from __future__ import annotations

import json
import math

import numpy as np

from .commutative_oracle import DiagonalFamily
from .hull_solver import (
    DistanceBounds,
    Member,
    NotMember,
    SeparationCertificate,
    Undecided,
)
from .kraus import KrausCombination, MatrixFamily, Mode
from .matrix_core import CMatrix, HermMatrix
from .verifier import ElementReport, FamilyReport, SpectralElement, SpectralFamily

__all__ = [
    "ParseError",
    "canonical_dumps",
    "complex_to_json",
    "parse_complex",
    "matrix_to_json",
    "parse_matrix",
    "family_to_json",
    "parse_family",
    "combination_to_json",
    "parse_combination",
    "certificate_to_json",
    "parse_certificate",
    "verdict_to_json",
    "bounds_to_json",
    "report_to_json",
    "diagonal_family_to_json",
    "parse_diagonal_family",
    "spectral_family_to_json",
    "parse_spectral_family",
    "load_json",
]


class ParseError(ValueError):
    """Input JSON is malformed or does not match the documented schema."""


def _fmt_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        raise ValueError("non-finite floats are not serializable; use null")
    return f"{x:.17g}"


def canonical_dumps(obj) -> str:
    """Deterministic JSON: sorted keys, compact separators, %.17g floats."""
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, (int, np.integer)) and not isinstance(obj, bool):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(canonical_dumps(v) for v in obj) + "]"
    if isinstance(obj, dict):
        for key in obj:
            if not isinstance(key, str):
                raise TypeError("object keys must be strings")
        parts = (
            json.dumps(k) + ":" + canonical_dumps(obj[k]) for k in sorted(obj)
        )
        return "{" + ",".join(parts) + "}"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def load_json(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc


# -------------------------------------------------------------- scalars


def complex_to_json(z: complex) -> list:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def parse_complex(obj) -> complex:
    if (
        not isinstance(obj, (list, tuple))
        or len(obj) != 2
        or not all(isinstance(v, (int, float)) for v in obj)
    ):
        raise ParseError(f"expected [re, im], got {obj!r}")
    return complex(float(obj[0]), float(obj[1]))


# -------------------------------------------------------------- matrices


def matrix_to_json(mat) -> dict:
    if isinstance(mat, HermMatrix):
        mat = mat.matrix
    if not isinstance(mat, CMatrix):
        mat = CMatrix(np.asarray(mat, dtype=np.complex128))
    return {
        "rows": mat.rows,
        "cols": mat.cols,
        "data": [complex_to_json(z) for z in mat.data.ravel()],
    }


def parse_matrix(obj) -> CMatrix:
    if not isinstance(obj, dict):
        raise ParseError(f"expected a matrix object, got {type(obj).__name__}")
    try:
        rows, cols = int(obj["rows"]), int(obj["cols"])
        data = obj["data"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed matrix object: {exc}") from exc
    if not isinstance(data, list) or len(data) != rows * cols:
        raise ParseError(
            f"matrix data carries {len(data) if isinstance(data, list) else '?'} "
            f"entries, expected {rows * cols}"
        )
    entries = [parse_complex(v) for v in data]
    try:
        return CMatrix(np.array(entries, dtype=np.complex128).reshape(rows, cols))
    except ValueError as exc:
        raise ParseError(str(exc)) from exc


# -------------------------------------------------------------- families


def family_to_json(family: MatrixFamily) -> dict:
    out = {
        "dim": family.dim,
        "generators": [matrix_to_json(g) for g in family.generators],
    }
    if family.labels is not None:
        out["labels"] = list(family.labels)
    return out


def parse_family(obj) -> MatrixFamily:
    if not isinstance(obj, dict) or "generators" not in obj:
        raise ParseError("expected a family object with a 'generators' list")
    gens = [parse_matrix(g) for g in obj["generators"]]
    dim = int(obj.get("dim", gens[0].rows if gens else 0))
    labels = obj.get("labels")
    try:
        return MatrixFamily(
            dim,
            tuple(gens),
            tuple(labels) if labels is not None else None,
            allow_empty=not gens,
        )
    except ValueError as exc:
        raise ParseError(str(exc)) from exc


# ---------------------------------------------------------- combinations


def combination_to_json(comb: KrausCombination) -> dict:
    return {
        "mode": comb.mode.value,
        "terms": [
            {"gen": idx, "coeff": matrix_to_json(coeff)} for idx, coeff in comb.terms
        ],
    }


def parse_combination(obj) -> KrausCombination:
    if not isinstance(obj, dict) or "mode" not in obj or "terms" not in obj:
        raise ParseError("expected a combination object with 'mode' and 'terms'")
    try:
        mode = Mode(obj["mode"])
    except ValueError as exc:
        raise ParseError(f"unknown mode {obj['mode']!r}") from exc
    terms = []
    for term in obj["terms"]:
        if not isinstance(term, dict) or "gen" not in term or "coeff" not in term:
            raise ParseError("each term needs 'gen' and 'coeff'")
        terms.append((int(term["gen"]), parse_matrix(term["coeff"])))
    return KrausCombination(mode=mode, terms=tuple(terms))


# ---------------------------------------------------------- certificates


def certificate_to_json(cert: SeparationCertificate) -> dict:
    return {
        "mode": cert.mode.value,
        "lambda": matrix_to_json(cert.lam),
        "gamma": matrix_to_json(cert.gamma),
    }


def parse_certificate(obj) -> SeparationCertificate:
    if not isinstance(obj, dict) or not {"mode", "lambda", "gamma"} <= set(obj):
        raise ParseError("expected a certificate object with mode/lambda/gamma")
    try:
        mode = Mode(obj["mode"])
    except ValueError as exc:
        raise ParseError(f"unknown mode {obj['mode']!r}") from exc
    lam = parse_matrix(obj["lambda"])
    gamma = parse_matrix(obj["gamma"])
    try:
        return SeparationCertificate(
            lam=lam, gamma=HermMatrix.from_matrix(gamma), mode=mode
        )
    except ValueError as exc:
        raise ParseError(str(exc)) from exc


# -------------------------------------------------------------- verdicts


def verdict_to_json(verdict) -> dict:
    if isinstance(verdict, Member):
        return {
            "verdict": "member",
            "witness": combination_to_json(verdict.witness),
            "residual": float(verdict.residual),
        }
    if isinstance(verdict, NotMember):
        return {
            "verdict": "not_member",
            "certificate": certificate_to_json(verdict.certificate),
            "distance_lower_bound": (
                None
                if verdict.distance_lower_bound is None
                else float(verdict.distance_lower_bound)
            ),
        }
    if isinstance(verdict, Undecided):
        return {
            "verdict": "undecided",
            "best_residual": float(verdict.best_residual),
            "iterations": int(verdict.iterations),
        }
    raise TypeError(f"not a membership verdict: {type(verdict).__name__}")


def bounds_to_json(bounds: DistanceBounds) -> dict:
    return {
        "upper": None if math.isinf(bounds.upper) else float(bounds.upper),
        "lower": float(bounds.lower),
        "primal_witness": (
            None
            if bounds.primal_witness is None
            else combination_to_json(bounds.primal_witness)
        ),
        "dual_witness": (
            None
            if bounds.dual_witness is None
            else certificate_to_json(bounds.dual_witness)
        ),
    }


def report_to_json(report: FamilyReport) -> dict:
    def element(e: ElementReport) -> dict:
        lower, upper = e.distance_bounds
        return {
            "index": e.index,
            "verdict": verdict_to_json(e.verdict),
            "distance": {
                "lower": None if lower is None else float(lower),
                "upper": None if upper is None or math.isinf(upper) else float(upper),
            },
        }

    return {
        "mode": report.mode.value,
        "overall": report.overall.value,
        "elements": [element(e) for e in report.elements],
    }


# -------------------------------------------------------- diagonal data


def diagonal_family_to_json(family: DiagonalFamily) -> dict:
    out = {
        "points": family.points,
        "functions": [[complex_to_json(z) for z in f] for f in family.functions],
    }
    if family.labels is not None:
        out["labels"] = list(family.labels)
    return out


def parse_diagonal_family(obj) -> DiagonalFamily:
    if not isinstance(obj, dict) or not {"points", "functions"} <= set(obj):
        raise ParseError("expected an object with 'points' and 'functions'")
    funcs = [
        np.array([parse_complex(z) for z in f], dtype=np.complex128)
        for f in obj["functions"]
    ]
    labels = obj.get("labels")
    try:
        return DiagonalFamily(
            int(obj["points"]),
            tuple(funcs),
            tuple(labels) if labels is not None else None,
        )
    except ValueError as exc:
        raise ParseError(str(exc)) from exc


# -------------------------------------------------------- spectral data


def spectral_family_to_json(family: SpectralFamily) -> dict:
    return {
        "eigs": [
            [complex_to_json(z) for z in e.eigenvalues] for e in family.elements
        ],
        "frames": [matrix_to_json(CMatrix(e.frame)) for e in family.elements],
    }


def parse_spectral_family(obj) -> SpectralFamily:
    if not isinstance(obj, dict) or not {"eigs", "frames"} <= set(obj):
        raise ParseError("expected an object with 'eigs' and 'frames'")
    eigs = obj["eigs"]
    frames = obj["frames"]
    if not isinstance(eigs, list) or not isinstance(frames, list) or len(eigs) != len(frames):
        raise ParseError("'eigs' and 'frames' must be lists of equal length")
    elements = []
    for tup, fr in zip(eigs, frames):
        values = np.array([parse_complex(z) for z in tup], dtype=np.complex128)
        frame = parse_matrix(fr)
        try:
            elements.append(SpectralElement(eigenvalues=values, frame=frame.data))
        except ValueError as exc:
            raise ParseError(str(exc)) from exc
    try:
        return SpectralFamily(elements=tuple(elements))
    except ValueError as exc:
        raise ParseError(str(exc)) from exc
