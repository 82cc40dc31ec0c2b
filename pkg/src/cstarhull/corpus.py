"""The embedded worked-example corpus replayed by ``cstar-hull examples``.

Every case carries an origin class and a one-line source note naming the
identity it reproduces:

* ``worked-example``: a value reproduced from a known worked computation,
* ``derived``: a value computed up front by an independent method
  (characteristic polynomials, direct multiplication, plane geometry),
* ``elementary``: forced directly by a definition.

Cases are hermetic: all inputs are inlined below.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .commutative_oracle import (
    DiagonalFamily,
    UbabsSystem,
    lambda_sequence,
    pointwise_hull_membership,
    scalar_hull_membership,
    ubabs_gap,
)
from .hull_solver import (
    Member,
    NotMember,
    SeparationCertificate,
    SolverConfig,
    decide_membership,
    verify_certificate,
)
from .kraus import (
    KrausCombination,
    MatrixFamily,
    Mode,
    apply_combination,
    augment_to_exact,
    validate_combination,
)
from .matrix_core import CMatrix, HermMatrix, adjoint, eig_herm, psd_check
from .verifier import FamilyMode, OverallVerdict, verify_polyhedron

__all__ = ["CorpusCase", "CORPUS", "run_corpus"]

P1 = CMatrix(np.diag([1.0, 0.0]).astype(complex))
P2 = CMatrix(np.diag([0.0, 1.0]).astype(complex))
QUARTER_TURN = CMatrix(np.array([[0.0, 1.0], [-1.0, 0.0]], dtype=complex))


@dataclass(frozen=True)
class CorpusCase:
    id: str
    origin: str  # worked-example | derived | elementary
    source: str
    run: callable


def _close(actual, expected, tol: float) -> tuple[bool, str]:
    a = np.asarray(actual, dtype=complex)
    e = np.asarray(expected, dtype=complex)
    err = float(np.max(np.abs(a - e))) if a.shape == e.shape else math.inf
    return err <= tol, f"max entry error {err:.3e} (tol {tol:.1e})"


def _case_adjoint():
    got = adjoint(QUARTER_TURN).data
    return _close(got, np.array([[0.0, -1.0], [1.0, 0.0]]), 0.0)


def _case_projection_swap():
    family = MatrixFamily(2, (P1,))
    comb = KrausCombination(mode=Mode.EXACT_UNITAL, terms=((0, QUARTER_TURN),))
    got = apply_combination(family, comb).data
    return _close(got, P2.data, 1e-12)


def _case_recomputed_conjugation():
    a = CMatrix(np.array([[2.0, 1.0], [1.0, 1.0]], dtype=complex))
    u = CMatrix(np.array([[1.0, -1.0], [1.0, 1.0]], dtype=complex) / math.sqrt(2.0))
    family = MatrixFamily(2, (a,))
    comb = KrausCombination(mode=Mode.EXACT_UNITAL, terms=((0, u),))
    got = apply_combination(family, comb).data
    expected = 0.5 * np.array([[5.0, -1.0], [-1.0, 1.0]])
    ok, detail = _close(got, expected, 1e-12)
    note = (
        "unitary conjugation preserves Hermitianity and trace, pinning the "
        "product at (1/2)[[5,-1],[-1,1]]; a circulating hand-transcribed "
        "variant (1/sqrt(2))[[5,-1],[1,-1]] fails both checks and is not "
        "asserted"
    )
    return ok, f"{detail}; {note}"


def _case_scalar_exact_outside():
    family = MatrixFamily(1, (CMatrix([[1.0]]), CMatrix([[1j]])))
    target = CMatrix([[(1.0 + 1.0j) / 3.0]])
    verdict = decide_membership(family, target, Mode.EXACT_UNITAL)
    oracle = scalar_hull_membership([1.0, 1j], (1 + 1j) / 3, Mode.EXACT_UNITAL)
    ok = isinstance(verdict, NotMember) and oracle is False
    return ok, f"solver={type(verdict).__name__}, plane oracle member={oracle}"


def _case_scalar_sub_inside():
    family = MatrixFamily(1, (CMatrix([[1.0]]), CMatrix([[1j]])))
    target = CMatrix([[(1.0 + 1.0j) / 3.0]])
    verdict = decide_membership(family, target, Mode.SUB_UNITAL)
    oracle = scalar_hull_membership([1.0, 1j], (1 + 1j) / 3, Mode.SUB_UNITAL)
    ok = isinstance(verdict, Member) and oracle is True
    detail = f"solver={type(verdict).__name__}, plane oracle member={oracle}"
    if isinstance(verdict, Member):
        detail += f", residual={verdict.residual:.2e}"
    return ok, detail


def _case_completion_weight():
    family = MatrixFamily(1, (CMatrix([[1.0]]),))
    comb = KrausCombination(
        mode=Mode.SUB_UNITAL, terms=((0, CMatrix([[1.0 / math.sqrt(3.0)]])),)
    )
    bigger, completed = augment_to_exact(family, comb)
    appended = completed.terms[-1][1].data[0, 0]
    report = validate_combination(bigger, completed, 1e-7)
    ok = abs(appended - math.sqrt(2.0 / 3.0)) <= 1e-12 and report.valid
    return ok, (
        f"appended coefficient {appended.real:.12f}, expected sqrt(2/3)="
        f"{math.sqrt(2/3):.12f}; exact-unital residual {report.unitality_residual:.2e}"
    )


def _case_pointwise_rejects():
    family = DiagonalFamily(2, (np.array([1.0, 0.0], dtype=complex),))
    result = pointwise_hull_membership(
        family, np.array([0.0, 1.0], dtype=complex), Mode.SUB_UNITAL
    )
    ok = result.member is False and result.failing_point == 1
    return ok, f"member={result.member}, failing point={result.failing_point}"


def _case_matrix_hull_accepts():
    family = MatrixFamily(2, (P1,))
    verdict = decide_membership(family, P2, Mode.EXACT_UNITAL)
    ok = isinstance(verdict, Member)
    detail = f"solver={type(verdict).__name__}"
    if ok:
        detail += f", residual={verdict.residual:.2e}"
    return ok, detail


def _case_lambda_start():
    seq = lambda_sequence(4)
    expected = [
        1.0,
        np.exp(1j * math.pi / 4.0),
        np.exp(1j * 3.0 * math.pi / 8.0),
        np.exp(1j * 7.0 * math.pi / 16.0),
    ]
    ok, detail = _close(seq, expected, 1e-15)
    mods_ok = bool(np.allclose(np.abs(seq), 1.0, atol=1e-15))
    return ok and mods_ok, f"{detail}; all unit modulus: {mods_ok}"


def _case_lambda_family_separated():
    seq = lambda_sequence(6)
    eye = np.eye(2, dtype=complex)
    family = MatrixFamily(2, tuple(CMatrix(z * eye) for z in seq))
    report = verify_polyhedron(family, FamilyMode.CSTAR_ZERO, SolverConfig())
    ok = report.overall is OverallVerdict.IS_POLYHEDRON
    return ok, f"overall={report.overall.value}"


def _case_projection_pair_collapses():
    family = MatrixFamily(2, (P1, P2))
    report = verify_polyhedron(family, FamilyMode.CSTAR, SolverConfig())
    ok = report.overall is OverallVerdict.IS_NOT
    residuals = [
        e.verdict.residual for e in report.elements if isinstance(e.verdict, Member)
    ]
    return ok, f"overall={report.overall.value}, member residuals={residuals}"


def _case_identity_doubling():
    eye = CMatrix.identity(2)
    family = MatrixFamily(2, (eye,))
    target = CMatrix(2.0 * np.eye(2))
    verdict = decide_membership(family, target, Mode.EXACT_UNITAL)
    hand = SeparationCertificate(
        lam=eye,
        gamma=HermMatrix.from_matrix(-np.eye(2)),
        mode=Mode.EXACT_UNITAL,
    )
    check = verify_certificate(hand, family, target, 1e-10)
    ok = (
        isinstance(verdict, NotMember)
        and check.valid
        and abs(check.margin - 2.0) <= 1e-12
    )
    return ok, (
        f"solver={type(verdict).__name__}; hand certificate valid={check.valid}, "
        f"margin={check.margin:.6f} (expected 2)"
    )


def _case_indicator_gap():
    m = 5
    funcs = tuple(np.eye(m, dtype=complex)[i] for i in range(m))
    family = DiagonalFamily(m, funcs)
    system = UbabsSystem(family=family, anchor_points=tuple(range(m)), eta=0.0)
    gap = ubabs_gap(system)
    separated = all(
        not pointwise_hull_membership(
            family.without(i), family.functions[i], Mode.SUB_UNITAL
        ).member
        for i in range(m)
    )
    ok = gap == 1.0 and separated
    return ok, f"gap={gap}, every element outside the sub hull of the rest: {separated}"


def _case_eigenvalue_pair():
    h = HermMatrix.from_matrix(np.array([[2.0, 1.0], [1.0, 1.0]], dtype=complex))
    dec = eig_herm(h)
    expected = [(3.0 + math.sqrt(5.0)) / 2.0, (3.0 - math.sqrt(5.0)) / 2.0]
    ok, detail = _close(dec.values, expected, 1e-12)
    return ok, detail


def _case_projection_psd():
    check = psd_check(HermMatrix.from_matrix(P1.data), 0.0)
    ok = check.is_psd and abs(check.min_eigenvalue) <= 1e-15
    return ok, f"is_psd={check.is_psd}, min eigenvalue={check.min_eigenvalue:.2e}"


CORPUS: tuple[CorpusCase, ...] = (
    CorpusCase(
        id="adjoint-quarter-turn",
        origin="worked-example",
        source="adjoint of [[0,1],[-1,0]] is [[0,-1],[1,0]]",
        run=_case_adjoint,
    ),
    CorpusCase(
        id="projection-swap-conjugation",
        origin="worked-example",
        source="U^dag diag(1,0) U = diag(0,1) for the quarter turn U = [[0,1],[-1,0]]",
        run=_case_projection_swap,
    ),
    CorpusCase(
        id="hermitian-conjugation-recomputed",
        origin="derived",
        source="U^dag [[2,1],[1,1]] U = (1/2)[[5,-1],[-1,1]] for U = (1/sqrt 2)[[1,-1],[1,1]]",
        run=_case_recomputed_conjugation,
    ),
    CorpusCase(
        id="scalar-pair-exact-outside",
        origin="worked-example",
        source="(1+i)/3 lies outside conv{1, i}: a 1 a + b i b misses it when |a|^2+|b|^2 = 1",
        run=_case_scalar_exact_outside,
    ),
    CorpusCase(
        id="scalar-pair-sub-inside",
        origin="worked-example",
        source="(1+i)/3 = (1/sqrt 3) 1 (1/sqrt 3) + (1/sqrt 3) i (1/sqrt 3), weights sum 2/3 < 1",
        run=_case_scalar_sub_inside,
    ),
    CorpusCase(
        id="subunital-completion-weight",
        origin="worked-example",
        source="completing the weight 1/sqrt(3) appends sqrt(1 - 1/3) = sqrt(2/3)",
        run=_case_completion_weight,
    ),
    CorpusCase(
        id="projection-outside-diagonal-hull",
        origin="worked-example",
        source="diagonal coefficients keep diag(1,0) supported on the first point, so diag(0,1) stays out",
        run=_case_pointwise_rejects,
    ),
    CorpusCase(
        id="projection-inside-matrix-hull",
        origin="worked-example",
        source="diag(0,1) is a unitary conjugate of diag(1,0), hence inside the full matrix hull",
        run=_case_matrix_hull_accepts,
    ),
    CorpusCase(
        id="unit-circle-sequence-start",
        origin="derived",
        source="sequence starts 1, e^{i pi/4}, e^{i 3pi/8}, e^{i 7pi/16}; argument (1 - 2^-k) pi/2",
        run=_case_lambda_start,
    ),
    CorpusCase(
        id="unit-circle-family-separated",
        origin="worked-example",
        source="each of the six unit-circle scalars times I_2 stays outside the sub hull of the rest",
        run=_case_lambda_family_separated,
    ),
    CorpusCase(
        id="projection-pair-not-separated",
        origin="worked-example",
        source="diag(1,0) and diag(0,1) are unitary conjugates, so the pair cannot be separated",
        run=_case_projection_pair_collapses,
    ),
    CorpusCase(
        id="identity-doubling-outside",
        origin="elementary",
        source="the exact hull of {I} is {I}; the pair (Lambda=I, Gamma=-I) separates 2I with margin 2",
        run=_case_identity_doubling,
    ),
    CorpusCase(
        id="indicator-system-gap",
        origin="worked-example",
        source="indicator functions of five distinct points form an eta = 0 system with gap 1",
        run=_case_indicator_gap,
    ),
    CorpusCase(
        id="eigenvalue-golden-pair",
        origin="derived",
        source="char. polynomial of [[2,1],[1,1]] is t^2 - 3t + 1, roots (3 +/- sqrt 5)/2",
        run=_case_eigenvalue_pair,
    ),
    CorpusCase(
        id="projection-psd-floor",
        origin="worked-example",
        source="diag(1,0) is PSD with bottom eigenvalue exactly 0",
        run=_case_projection_psd,
    ),
)


def run_corpus():
    """Run every case; returns a list of (case, ok, detail)."""
    results = []
    for case in CORPUS:
        try:
            ok, detail = case.run()
        except Exception as exc:  # a crashing case is a failing case
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        results.append((case, bool(ok), detail))
    return results
