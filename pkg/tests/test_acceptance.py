"""Acceptance criteria, one test per criterion, run in file order.

Each test prints a single PASS/FAIL line (visible with ``pytest -s`` or on
failure).  Certificates produced by the earlier criteria feed the soundness
fuzz of criterion 7 through a module-level pool.
"""

import math
import subprocess
import sys
import time
from contextlib import contextmanager

import numpy as np
import pytest

from cstarhull import (
    CMatrix,
    DiagonalFamily,
    FamilyMode,
    KrausCombination,
    MatrixFamily,
    Member,
    Mode,
    NotMember,
    OverallVerdict,
    SolverConfig,
    SpectralElement,
    Undecided,
    apply_combination,
    collapse_bound,
    decide_membership,
    hull_distance,
    lambda_sequence,
    op_norm,
    perturbation_margin,
    plane_hull_distance,
    pointwise_hull_membership,
    projection_cover_decompose,
    scalar_hull_membership,
    ubabs_gap,
    verify_certificate,
    verify_polyhedron,
    UbabsSystem,
)
from helpers import (
    direct_apply,
    random_combination,
    random_complex,
    random_hermitian,
    scalar_instance,
    spectral_excess,
)

P1 = CMatrix(np.diag([1.0, 0.0]).astype(complex))
P2 = CMatrix(np.diag([0.0, 1.0]).astype(complex))
U_TURN = CMatrix(np.array([[0.0, 1.0], [-1.0, 0.0]], dtype=complex))

# NotMember certificates produced across the suites, consumed by criterion 7
CERT_POOL: list = []

_SUITE_T0 = time.time()


@contextmanager
def criterion(number: int, label: str):
    try:
        yield
    except BaseException:
        print(f"[acceptance] criterion {number:2d}: FAIL - {label}")
        raise
    print(f"[acceptance] criterion {number:2d}: PASS - {label}")


def lambda_matrix_family(n=6):
    return MatrixFamily(2, tuple(CMatrix(z * np.eye(2)) for z in lambda_sequence(n)))


def test_criterion_01_golden_conjugations():
    with criterion(1, "golden conjugation values reproduced to 1e-12"):
        family = MatrixFamily(2, (P1,))
        comb = KrausCombination(mode=Mode.EXACT_UNITAL, terms=((0, U_TURN),))
        swap = apply_combination(family, comb).data
        assert np.max(np.abs(swap - P2.data)) <= 1e-12

        a = np.array([[2.0, 1.0], [1.0, 1.0]], dtype=complex)
        u = np.array([[1.0, -1.0], [1.0, 1.0]], dtype=complex) / math.sqrt(2.0)
        comb2 = KrausCombination(mode=Mode.EXACT_UNITAL, terms=((0, CMatrix(u)),))
        got = apply_combination(MatrixFamily(2, (CMatrix(a),)), comb2).data
        recomputed = 0.5 * np.array([[5.0, -1.0], [-1.0, 1.0]])
        assert np.max(np.abs(got - recomputed)) <= 1e-12
        # documented discrepancy: the circulating hand-transcribed variant is
        # not the product; it is non-Hermitian and does not preserve the trace
        variant = np.array([[5.0, -1.0], [1.0, -1.0]]) / math.sqrt(2.0)
        assert np.max(np.abs(got - variant)) > 0.5
        assert np.max(np.abs(variant - variant.conj().T)) > 0.5
        assert abs(np.trace(variant) - np.trace(a)) > 0.1


def test_criterion_02_projection_pair_collapses():
    with criterion(2, "projection pair verifies IsNot within five seconds"):
        t0 = time.time()
        report = verify_polyhedron(MatrixFamily(2, (P1, P2)), FamilyMode.CSTAR)
        elapsed = time.time() - t0
        assert report.overall is OverallVerdict.IS_NOT
        for element in report.elements:
            assert isinstance(element.verdict, Member)
            assert element.verdict.residual <= 1e-6
        assert elapsed <= 5.0


def test_criterion_03_superalgebra_non_preservation():
    with criterion(3, "diagonal oracle rejects what the matrix solver accepts"):
        diag = DiagonalFamily(2, (np.array([1.0, 0.0], dtype=complex),))
        pointwise = pointwise_hull_membership(
            diag, np.array([0.0, 1.0], dtype=complex), Mode.SUB_UNITAL
        )
        assert pointwise.member is False
        verdict = decide_membership(MatrixFamily(2, (P1,)), P2, Mode.EXACT_UNITAL)
        assert isinstance(verdict, Member)


def test_criterion_04_lambda_family_distances():
    with criterion(4, "unit-circle family separated with oracle-tight distances"):
        family = lambda_matrix_family(6)
        report = verify_polyhedron(family, FamilyMode.CSTAR_ZERO)
        assert report.overall is OverallVerdict.IS_POLYHEDRON
        seq = lambda_sequence(6)
        for m in range(6):
            others = [seq[i] for i in range(6) if i != m]
            oracle = plane_hull_distance(seq[m], others, include_zero=True)
            bounds = hull_distance(
                family.without(m), family.generators[m], Mode.SUB_UNITAL
            )
            # the certified interval brackets the plane-geometry value
            assert bounds.lower - 1e-5 <= oracle <= bounds.upper + 1e-5
            # and is tight: achieved distance within 1e-5, dual within 1e-3
            assert abs(bounds.upper - oracle) <= 1e-5
            assert bounds.lower >= oracle - 1e-3
            if bounds.dual_witness is not None:
                CERT_POOL.append(
                    (bounds.dual_witness, family.without(m), family.generators[m])
                )


def test_criterion_05_scalar_oracle_equivalence():
    with criterion(5, "200 scalar instances agree with the plane oracle"):
        rng = np.random.default_rng(2025)
        undecided = 0
        for n in range(200):
            values, target, mode = scalar_instance(rng, n)
            family = MatrixFamily(1, tuple(CMatrix([[z]]) for z in values))
            verdict = decide_membership(family, CMatrix([[target]]), mode)
            member = scalar_hull_membership(values, target, mode)
            if isinstance(verdict, Undecided):
                undecided += 1
            elif isinstance(verdict, Member):
                assert member, f"instance {n}: solver Member, oracle outside"
            else:
                assert not member, f"instance {n}: solver NotMember, oracle inside"
                CERT_POOL.append((verdict.certificate, family, CMatrix([[target]])))
        assert undecided <= 10, f"undecided rate {undecided}/200 exceeds 5 percent"


def test_criterion_06_single_hermitian_generator_oracle():
    with criterion(6, "100 spectral-interval instances match the solver"):
        rng = np.random.default_rng(4096)
        for n in range(100):
            d = int(rng.integers(2, 5))
            x = random_hermitian(rng, d)
            scale = 0.5 if n % 2 == 0 else 1.4
            y = scale * random_hermitian(rng, d)
            excess = spectral_excess(x, y)
            wx = np.linalg.eigvalsh(x)
            wy = np.linalg.eigvalsh(y)
            inside_margin = min(wy[0] - wx[0], wx[-1] - wy[-1])
            family = MatrixFamily(d, (CMatrix(x),))
            verdict = decide_membership(family, CMatrix(y), Mode.EXACT_UNITAL)
            if excess > 1e-6:
                assert isinstance(
                    verdict, NotMember
                ), f"instance {n}: spectrum escapes by {excess:.2e}, got {type(verdict).__name__}"
                CERT_POOL.append((verdict.certificate, family, CMatrix(y)))
            elif excess == 0.0 and inside_margin > 1e-6:
                assert isinstance(
                    verdict, Member
                ), f"instance {n}: spectrum inside by {inside_margin:.2e}, got {type(verdict).__name__}"
            # within the 1e-6 band either verdict is acceptable


def test_criterion_07_certificate_soundness_fuzz():
    with criterion(7, "all produced certificates sound against 1000 combinations"):
        assert len(CERT_POOL) >= 50, "earlier criteria should have filled the pool"
        rng = np.random.default_rng(77)
        for cert, family, target in CERT_POOL:
            check = verify_certificate(cert, family, target, 1e-8)
            assert check.valid
            lam, gamma = cert.lam.data, cert.gamma.data
            k = len(family.generators)
            if k == 0:
                continue
            for _ in range(1000):
                comb = random_combination(rng, family, cert.mode)
                value = direct_apply(family, comb)
                pairing = float(np.real(np.vdot(lam, value)) + np.trace(gamma).real)
                assert pairing <= 1e-8


def test_criterion_08_collapse_inequality():
    with criterion(8, "compression error bounded by rank times spectral gap"):
        rng = np.random.default_rng(606)
        for _ in range(100):
            d = int(rng.integers(1, 6))
            big_d = d + int(rng.integers(0, 4))
            fa, _ = np.linalg.qr(random_complex(rng, big_d, d))
            fb, _ = np.linalg.qr(random_complex(rng, big_d, d))
            a = SpectralElement(eigenvalues=random_complex(rng, d), frame=fa[:, :d])
            b = SpectralElement(eigenvalues=random_complex(rng, d), frame=fb[:, :d])
            pack = collapse_bound(a, b)
            assert pack.actual <= pack.bound + 1e-9
            gram = pack.T.data.conj().T @ pack.T.data
            assert float(np.linalg.eigvalsh(gram)[-1]) <= 1.0 + 1e-9


def test_criterion_09_perturbation_stability():
    with criterion(9, "perturbations inside the margin keep the family separated"):
        family = lambda_matrix_family(6)
        eps = perturbation_margin(family, FamilyMode.CSTAR_ZERO)
        assert eps > 0
        rng = np.random.default_rng(909)
        for trial in range(20):
            index = int(rng.integers(0, 6))
            direction = random_complex(rng, 2, 2)
            direction /= op_norm(direction)
            bump = direction * (eps * rng.random())
            gens = list(family.generators)
            gens[index] = CMatrix(gens[index].data + bump)
            report = verify_polyhedron(
                MatrixFamily(2, tuple(gens)), FamilyMode.CSTAR_ZERO
            )
            assert report.overall is OverallVerdict.IS_POLYHEDRON, f"trial {trial}"


def test_criterion_10_ubabs_and_cover_decomposition():
    with criterion(10, "indicator system gap and exact cover decompositions"):
        m = 5
        funcs = tuple(np.eye(m, dtype=complex)[i] for i in range(m))
        diag = DiagonalFamily(m, funcs)
        system = UbabsSystem(family=diag, anchor_points=tuple(range(m)), eta=0.0)
        assert ubabs_gap(system) == 1.0
        for alpha in range(m):
            res = pointwise_hull_membership(
                diag.without(alpha), diag.functions[alpha], Mode.SUB_UNITAL
            )
            assert not res.member

        rng = np.random.default_rng(1010)
        done = 0
        while done < 50:
            points = int(rng.integers(2, 8))
            covers = [
                {int(p) for p in np.flatnonzero(rng.random(points) < 0.6)}
                for _ in range(int(rng.integers(1, 5)))
            ]
            union = set().union(*covers)
            if not union:
                continue
            target = {p for p in union if rng.random() < 0.7} or {min(union)}
            dec = projection_cover_decompose(target, covers, points=points)
            value = apply_combination(dec.family, dec.combination).data
            expected = np.diag(
                [1.0 if p in target else 0.0 for p in range(points)]
            ).astype(complex)
            assert np.array_equal(value, expected)
            done += 1


def test_criterion_11_example_corpus_via_cli():
    with criterion(11, "embedded corpus replays cleanly through the CLI"):
        proc = subprocess.run(
            [sys.executable, "-m", "cstarhull.cli", "examples"],
            capture_output=True,
            text=True,
            timeout=300,
        )
        assert proc.returncode == 0, proc.stdout + proc.stderr
        lines = [l for l in proc.stdout.splitlines() if l.startswith(("PASS", "FAIL"))]
        assert len(lines) >= 15
        assert all(l.startswith("PASS") for l in lines)
        # every case line carries its origin class and source note
        for line in lines:
            assert "[" in line and "]" in line and len(line.split("  ", 2)) == 3
    print(f"[acceptance] total elapsed: {time.time() - _SUITE_T0:.1f}s")
