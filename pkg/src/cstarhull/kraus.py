"""Matrix families and coefficient combinations.

A combination pairs generator indices with coefficient matrices ``A_i`` and
evaluates to ``sum_i A_i^dagger x_i A_i``.  Two validity modes exist:

* exact-unital: ``sum_i A_i^dagger A_i = I`` (within tolerance),
* sub-unital:   ``sum_i A_i^dagger A_i <= I`` (PSD slack within tolerance).

Sub-unital combinations can always be completed to exact-unital ones over
the family extended by the zero matrix, by appending the coefficient
``sqrt(I - sum_i A_i^dagger A_i)`` paired with the zero generator; this is
how the "hull with zero adjoined" is reduced to a single solver code path.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .matrix_core import CMatrix, as_array, sqrt_psd

__all__ = [
    "Mode",
    "MatrixFamily",
    "KrausCombination",
    "CombinationReport",
    "CombinationError",
    "COMB_TOL",
    "coefficient_gram",
    "validate_combination",
    "apply_combination",
    "augment_to_exact",
    "compose_combinations",
]

COMB_TOL = 1e-8


class CombinationError(ValueError):
    """A combination failed validation against its family."""


class Mode(str, Enum):
    EXACT_UNITAL = "exact"
    SUB_UNITAL = "sub"


@dataclass(frozen=True, eq=False)
class MatrixFamily:
    """A finite indexed family of square matrices in one ambient dimension.

    Empty families are rejected unless explicitly flagged, since most hull
    questions over the empty index set are degenerate.
    """

    dim: int
    generators: tuple
    labels: tuple | None = None
    allow_empty: bool = False

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("family dimension must be positive")
        gens = tuple(
            g if isinstance(g, CMatrix) else CMatrix(as_array(g)) for g in self.generators
        )
        if not gens and not self.allow_empty:
            raise ValueError("family must be nonempty unless explicitly flagged empty")
        for idx, g in enumerate(gens):
            if g.rows != self.dim or g.cols != self.dim:
                raise ValueError(
                    f"generator {idx} has shape {(g.rows, g.cols)}, expected "
                    f"({self.dim}, {self.dim})"
                )
        object.__setattr__(self, "generators", gens)
        if self.labels is not None:
            labels = tuple(str(s) for s in self.labels)
            if len(labels) != len(gens):
                raise ValueError("labels must match generators one-to-one")
            object.__setattr__(self, "labels", labels)

    def __len__(self):
        return len(self.generators)

    def arrays(self) -> list[np.ndarray]:
        return [g.data for g in self.generators]

    def without(self, index: int) -> "MatrixFamily":
        """Subfamily with one element removed (possibly empty)."""
        if not 0 <= index < len(self.generators):
            raise IndexError(f"no generator {index}")
        gens = tuple(g for i, g in enumerate(self.generators) if i != index)
        labels = None
        if self.labels is not None:
            labels = tuple(s for i, s in enumerate(self.labels) if i != index)
        return MatrixFamily(self.dim, gens, labels, allow_empty=True)


@dataclass(frozen=True, eq=False)
class KrausCombination:
    """Generator indices paired with coefficient matrices, plus a mode."""

    mode: Mode
    terms: tuple

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        fixed = []
        for term in self.terms:
            idx, coeff = term
            if not isinstance(coeff, CMatrix):
                coeff = CMatrix(as_array(coeff))
            fixed.append((int(idx), coeff))
        object.__setattr__(self, "terms", tuple(fixed))

    def __len__(self):
        return len(self.terms)

    @classmethod
    def identity(cls, dim: int, index: int = 0, mode: Mode = Mode.EXACT_UNITAL):
        return cls(mode=mode, terms=((index, CMatrix.identity(dim)),))


@dataclass(frozen=True)
class CombinationReport:
    valid: bool
    unitality_residual: float
    min_slack_eig: float


def coefficient_gram(comb: KrausCombination, dim: int) -> np.ndarray:
    """S = sum_i A_i^dagger A_i, accumulated in term order."""
    s = np.zeros((dim, dim), dtype=np.complex128)
    for _, coeff in comb.terms:
        a = coeff.data
        if a.shape != (dim, dim):
            raise ValueError(f"coefficient shape {a.shape} does not match dimension {dim}")
        s += a.conj().T @ a
    return s


def validate_combination(
    family: MatrixFamily, comb: KrausCombination, tol: float = COMB_TOL
) -> CombinationReport:
    """Report-style validity check; never raises on numerically invalid input.

    The unitality residual ``||S - I||_F`` and the slack eigenvalue
    ``lambda_min(I - S)`` are always populated so callers can report both.
    """
    d = family.dim
    s = coefficient_gram(comb, d)
    eye = np.eye(d)
    residual = float(np.linalg.norm(s - eye))
    min_slack = float(np.linalg.eigvalsh(0.5 * ((eye - s) + (eye - s).conj().T))[0])
    indices_ok = all(0 <= idx < len(family.generators) for idx, _ in comb.terms)
    if comb.mode is Mode.EXACT_UNITAL:
        numeric_ok = residual <= tol
    else:
        numeric_ok = min_slack >= -tol
    return CombinationReport(
        valid=bool(indices_ok and numeric_ok),
        unitality_residual=residual,
        min_slack_eig=min_slack,
    )


def apply_combination(
    family: MatrixFamily, comb: KrausCombination, tol: float = COMB_TOL
) -> CMatrix:
    """Evaluate sum_i A_i^dagger x_{sigma(i)} A_i, summed in term order."""
    for idx, _ in comb.terms:
        if not 0 <= idx < len(family.generators):
            raise CombinationError(f"term references generator {idx} of {len(family)}")
    report = validate_combination(family, comb, tol)
    if not report.valid:
        raise CombinationError(
            f"combination invalid in mode {comb.mode.value}: unitality residual "
            f"{report.unitality_residual:.3e}, min slack eig {report.min_slack_eig:.3e}"
        )
    out = np.zeros((family.dim, family.dim), dtype=np.complex128)
    gens = family.arrays()
    for idx, coeff in comb.terms:
        a = coeff.data
        out += a.conj().T @ gens[idx] @ a
    return CMatrix(out)


def augment_to_exact(
    family: MatrixFamily, comb: KrausCombination, tol: float = COMB_TOL
) -> tuple[MatrixFamily, KrausCombination]:
    """Complete a sub-unital combination to an exact-unital one.

    Appends (reusing if present) the zero generator and a final term whose
    coefficient is the PSD square root of the slack ``I - sum A_i^dagger A_i``.
    The evaluated sum is unchanged because the new generator is zero.
    """
    if comb.mode is not Mode.SUB_UNITAL:
        raise CombinationError("augment_to_exact expects a sub-unital combination")
    report = validate_combination(family, comb, tol)
    if not report.valid:
        raise CombinationError(
            f"sub-unital validation failed: min slack eig {report.min_slack_eig:.3e}"
        )
    d = family.dim
    slack = np.eye(d) - coefficient_gram(comb, d)
    root = sqrt_psd(0.5 * (slack + slack.conj().T))

    zero_index = None
    for i, g in enumerate(family.generators):
        if not g.data.any():
            zero_index = i
            break
    if zero_index is None:
        gens = family.generators + (CMatrix.zeros(d),)
        labels = None
        if family.labels is not None:
            labels = family.labels + ("zero",)
        family = MatrixFamily(d, gens, labels, allow_empty=family.allow_empty)
        zero_index = len(gens) - 1

    terms = comb.terms + ((zero_index, root.matrix),)
    return family, KrausCombination(mode=Mode.EXACT_UNITAL, terms=terms)


def compose_combinations(
    outer: KrausCombination, inners: list[KrausCombination], tol: float = COMB_TOL
) -> KrausCombination:
    """Flatten a combination of combination results into one combination.

    ``outer`` indexes intermediate values, the i-th of which is produced by
    ``inners[i]`` over the base family.  Nesting the evaluations multiplies
    coefficients, so the flattened terms carry ``B_j A_i`` and remain
    exact-unital whenever all inputs are.
    """
    if outer.mode is not Mode.EXACT_UNITAL or any(
        inner.mode is not Mode.EXACT_UNITAL for inner in inners
    ):
        raise CombinationError("compose_combinations expects exact-unital combinations")
    if not outer.terms:
        raise CombinationError("outer combination has no terms")
    dim = outer.terms[0][1].rows

    def check_gram(comb: KrausCombination, what: str):
        s = coefficient_gram(comb, dim)
        if float(np.linalg.norm(s - np.eye(dim))) > tol:
            raise CombinationError(f"{what} combination is not exact-unital at tol {tol:.1e}")

    check_gram(outer, "outer")
    for j, inner in enumerate(inners):
        check_gram(inner, f"inner {j}")

    flattened = []
    for idx, a in outer.terms:
        if not 0 <= idx < len(inners):
            raise CombinationError(f"outer term references intermediate {idx} of {len(inners)}")
        for base_idx, b in inners[idx].terms:
            flattened.append((base_idx, CMatrix(b.data @ a.data)))
    return KrausCombination(mode=Mode.EXACT_UNITAL, terms=tuple(flattened))
