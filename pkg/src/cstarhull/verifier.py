"""Family-level separation verdicts, perturbation margins, and the
frame-compression constructions for finite-rank spectral data.

A family is "separated" (a polyhedron in the hull sense) when every member
stays outside the closed hull of the remaining members -- the plain hull
for CStar mode, the hull with zero adjoined for CStarZero mode.  Reports
keep the three-valued verdicts of the solver: inconclusive elements are
reported, never guessed.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .hull_solver import (
    DistanceBounds,
    Member,
    MembershipVerdict,
    NotMember,
    SeparationCertificate,
    SolverConfig,
    Undecided,
    analyze_membership,
)
from .kraus import KrausCombination, MatrixFamily, Mode
from .matrix_core import CMatrix, HermMatrix, as_array, op_norm

__all__ = [
    "FamilyMode",
    "OverallVerdict",
    "ElementReport",
    "FamilyReport",
    "SpectralElement",
    "SpectralFamily",
    "CollapseBound",
    "CollapseWitness",
    "verify_polyhedron",
    "normalize_family",
    "perturbation_margin",
    "frame_intertwiner",
    "collapse_bound",
    "collapse_witness",
]

FRAME_TOL = 1e-10


class FamilyMode(str, Enum):
    CSTAR = "cstar"
    CSTAR_ZERO = "cstar0"

    @property
    def combination_mode(self) -> Mode:
        return Mode.EXACT_UNITAL if self is FamilyMode.CSTAR else Mode.SUB_UNITAL


class OverallVerdict(str, Enum):
    IS_POLYHEDRON = "is_polyhedron"
    IS_NOT = "is_not"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True, eq=False)
class ElementReport:
    index: int
    verdict: MembershipVerdict
    distance_bounds: tuple
    certificate: SeparationCertificate | None


@dataclass(frozen=True, eq=False)
class FamilyReport:
    mode: FamilyMode
    elements: tuple
    overall: OverallVerdict


def _overall(elements) -> OverallVerdict:
    if any(isinstance(e.verdict, Member) for e in elements):
        return OverallVerdict.IS_NOT
    if all(isinstance(e.verdict, NotMember) for e in elements):
        return OverallVerdict.IS_POLYHEDRON
    return OverallVerdict.INCONCLUSIVE


def _empty_cstar_report(index: int, target: CMatrix) -> ElementReport:
    # The hull of the empty set is empty, so the element is outside it by
    # convention; the vacuous pair (0, I) has positive margin and no LMIs to
    # satisfy, and no finite distance bound makes sense.
    d = target.rows
    cert = SeparationCertificate(
        lam=CMatrix.zeros(d),
        gamma=HermMatrix.from_matrix(np.eye(d)),
        mode=Mode.EXACT_UNITAL,
    )
    verdict = NotMember(certificate=cert, distance_lower_bound=None)
    return ElementReport(
        index=index,
        verdict=verdict,
        distance_bounds=(None, None),
        certificate=cert,
    )


def verify_polyhedron(
    family: MatrixFamily,
    mode: FamilyMode,
    config: SolverConfig | None = None,
    jobs: int = 1,
) -> FamilyReport:
    """Run one leave-one-out membership query per element and merge verdicts.

    Queries are independent, so they may fan out to a small thread pool;
    results are merged by index, keeping output deterministic.
    """
    mode = FamilyMode(mode)
    if len(family.generators) < 1:
        raise ValueError("family must have at least one element")
    cfg = config if config is not None else SolverConfig()
    comb_mode = mode.combination_mode

    def solve_one(index: int) -> ElementReport:
        target = family.generators[index]
        rest = family.without(index)
        if len(rest.generators) == 0 and mode is FamilyMode.CSTAR:
            return _empty_cstar_report(index, target)
        verdict, bounds = analyze_membership(rest, target, comb_mode, cfg)
        cert = verdict.certificate if isinstance(verdict, NotMember) else None
        return ElementReport(
            index=index,
            verdict=verdict,
            distance_bounds=(bounds.lower, bounds.upper),
            certificate=cert,
        )

    indices = range(len(family.generators))
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            elements = tuple(pool.map(solve_one, indices))
    else:
        elements = tuple(solve_one(i) for i in indices)
    return FamilyReport(mode=mode, elements=elements, overall=_overall(elements))


def normalize_family(family: MatrixFamily) -> MatrixFamily:
    """Scale uniformly by 1/(max operator norm + 1), landing inside the unit ball.

    Combinations are scale-equivariant, so leave-one-out verdicts are
    unchanged by this normalization.
    """
    norms = [op_norm(g) for g in family.generators]
    factor = 1.0 / (max(norms) + 1.0) if norms else 1.0
    gens = tuple(CMatrix(g.data * factor) for g in family.generators)
    return MatrixFamily(family.dim, gens, family.labels, allow_empty=family.allow_empty)


def perturbation_margin(
    family: MatrixFamily, mode: FamilyMode, config: SolverConfig | None = None
) -> float:
    """Half the smallest certified leave-one-out distance lower bound.

    Replacing any single element by one within this margin (operator norm)
    keeps the family separated: the replaced element stays at distance at
    least epsilon from the others' hull, and every other element keeps
    distance at least epsilon from hulls in which the replacement
    participates, since coefficients never amplify an operator-norm error.
    """
    report = verify_polyhedron(family, mode, config)
    if report.overall is not OverallVerdict.IS_POLYHEDRON:
        raise ValueError("perturbation margin requires a verified polyhedron family")
    finite = [
        e.verdict.distance_lower_bound
        for e in report.elements
        if isinstance(e.verdict, NotMember) and e.verdict.distance_lower_bound is not None
    ]
    if not finite:
        return math.inf
    return min(finite) / 2.0


# --------------------------------------------------------------------------
# Finite-rank spectral data


@dataclass(frozen=True, eq=False)
class SpectralElement:
    """Eigenvalue tuple plus an orthonormal frame spanning the range.

    Reconstructs to ``sum_j eigenvalues[j] * f_j f_j^dagger`` where ``f_j``
    are the frame columns.
    """

    eigenvalues: np.ndarray
    frame: np.ndarray

    def __post_init__(self):
        eigs = np.asarray(self.eigenvalues, dtype=np.complex128).ravel().copy()
        frame = np.asarray(self.frame, dtype=np.complex128).copy()
        if frame.ndim != 2:
            raise ValueError("frame must be a 2-D array of column vectors")
        big_d, small_d = frame.shape
        if small_d != eigs.size:
            raise ValueError("one frame column per eigenvalue required")
        if small_d > big_d:
            raise ValueError("rank cannot exceed the ambient dimension")
        gram = frame.conj().T @ frame
        if float(np.linalg.norm(gram - np.eye(small_d))) > FRAME_TOL:
            raise ValueError(f"frame is not orthonormal within {FRAME_TOL:.1e}")
        eigs.setflags(write=False)
        frame.setflags(write=False)
        object.__setattr__(self, "eigenvalues", eigs)
        object.__setattr__(self, "frame", frame)

    @property
    def rank(self) -> int:
        return self.frame.shape[1]

    @property
    def ambient_dim(self) -> int:
        return self.frame.shape[0]

    def matrix(self) -> CMatrix:
        return CMatrix((self.frame * self.eigenvalues) @ self.frame.conj().T)


@dataclass(frozen=True, eq=False)
class SpectralFamily:
    elements: tuple

    def __post_init__(self):
        elems = tuple(self.elements)
        if not elems:
            raise ValueError("spectral family must be nonempty")
        ambient = {e.ambient_dim for e in elems}
        if len(ambient) != 1:
            raise ValueError("all elements must share one ambient dimension")
        object.__setattr__(self, "elements", elems)

    def __len__(self):
        return len(self.elements)

    def as_matrix_family(self) -> MatrixFamily:
        dim = self.elements[0].ambient_dim
        return MatrixFamily(dim, tuple(e.matrix() for e in self.elements))


def frame_intertwiner(source_frame, dest_frame) -> CMatrix:
    """The map carrying the source frame onto the destination frame.

    ``T = sum_j f_dest_j f_src_j^dagger`` sends ``f_src_j`` to ``f_dest_j``;
    ``T^dagger T`` is the projection onto the source span, hence ``<= I``,
    and conjugation ``T^dagger a T`` transports an operator diagonal in the
    destination frame onto the same eigenvalues over the source frame.
    """
    src = np.asarray(source_frame, dtype=np.complex128)
    dst = np.asarray(dest_frame, dtype=np.complex128)
    if src.shape != dst.shape:
        raise ValueError("frames must have equal shape (ambient x rank)")
    for name, f in (("source", src), ("dest", dst)):
        gram = f.conj().T @ f
        if float(np.linalg.norm(gram - np.eye(f.shape[1]))) > FRAME_TOL:
            raise ValueError(f"{name} frame is not orthonormal within {FRAME_TOL:.1e}")
    return CMatrix(dst @ src.conj().T)


@dataclass(frozen=True, eq=False)
class CollapseBound:
    T: CMatrix
    bound: float
    actual: float


def collapse_bound(a_alpha: SpectralElement, a_beta: SpectralElement) -> CollapseBound:
    """Compress a_beta toward a_alpha and bound the error by the spectra.

    With T the frame intertwiner, ``T^dagger a_beta T`` matches a_alpha's
    frame with a_beta's eigenvalues, so the error is controlled by
    ``d * max_j |lambda_alpha_j - lambda_beta_j|``.
    """
    if a_alpha.rank != a_beta.rank:
        raise ValueError("elements must have equal rank")
    t = frame_intertwiner(a_alpha.frame, a_beta.frame)
    compressed = t.data.conj().T @ a_beta.matrix().data @ t.data
    actual = op_norm(a_alpha.matrix().data - compressed)
    gap = float(np.max(np.abs(a_alpha.eigenvalues - a_beta.eigenvalues)))
    return CollapseBound(T=t, bound=a_alpha.rank * gap, actual=actual)


@dataclass(frozen=True, eq=False)
class CollapseWitness:
    alpha: int
    beta: int
    combination: KrausCombination
    residual: float


def collapse_witness(
    family: SpectralFamily, threshold: float = 0.5
) -> CollapseWitness | None:
    """Search for a near-membership witness among clustered eigenvalue tuples.

    Scans all ordered pairs for the smallest sup-distance between eigenvalue
    tuples; when ``rank * min`` beats the threshold, the single sub-unital
    term with the intertwiner coefficient already reproduces the alpha
    element up to that bound, showing the family cannot be separated at this
    scale.  Returns None when every pair is far apart.
    """
    elems = family.elements
    ranks = {e.rank for e in elems}
    if len(ranks) != 1:
        raise ValueError("collapse scan requires equal-rank elements")
    d = ranks.pop()
    best = None
    for a in range(len(elems)):
        for b in range(len(elems)):
            if a == b:
                continue
            gap = float(np.max(np.abs(elems[a].eigenvalues - elems[b].eigenvalues)))
            if best is None or gap < best[0]:
                best = (gap, a, b)
    if best is None or d * best[0] >= threshold:
        return None
    _, alpha, beta = best
    pack = collapse_bound(elems[alpha], elems[beta])
    comb = KrausCombination(mode=Mode.SUB_UNITAL, terms=((beta, pack.T),))
    return CollapseWitness(
        alpha=alpha, beta=beta, combination=comb, residual=pack.actual
    )
