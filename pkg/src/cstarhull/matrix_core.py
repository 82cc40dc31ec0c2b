"""Dense complex linear algebra primitives shared by every other module.

Values are immutable: ``CMatrix`` owns a read-only complex128 array and
``HermMatrix`` wraps the symmetrized part of a square matrix together with
the symmetrization defect of its input.  All operations are pure, so the
types are safe to share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "CMatrix",
    "HermMatrix",
    "EigDecomposition",
    "PsdCheck",
    "NumericalError",
    "NotPsdError",
    "adjoint",
    "real_part",
    "eig_herm",
    "op_norm",
    "psd_check",
    "sqrt_psd",
    "frob_inner",
    "as_array",
    "HERM_ACCEPT_TOL",
    "HERM_REJECT_TOL",
]

# Symmetrization defects up to HERM_REJECT_TOL are silently repaired (and
# recorded); anything worse is rejected as not Hermitian.
HERM_ACCEPT_TOL = 1e-10
HERM_REJECT_TOL = 1e-6

# Most negative eigenvalue tolerated by sqrt_psd before raising.
SQRT_PSD_TOL = 1e-9

_PHASE_TOL = 1e-12


class NumericalError(RuntimeError):
    """An eigenvalue or singular value iteration failed to converge."""


class NotPsdError(ValueError):
    """A matrix required to be PSD has an eigenvalue below tolerance."""


def as_array(value) -> np.ndarray:
    """Coerce a CMatrix, HermMatrix or array-like to a complex128 array."""
    if isinstance(value, HermMatrix):
        return value.matrix.data
    if isinstance(value, CMatrix):
        return value.data
    return np.asarray(value, dtype=np.complex128)


@dataclass(frozen=True, eq=False)
class CMatrix:
    """Immutable dense complex matrix (row-major complex128 entries)."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.array(self.data, dtype=np.complex128, copy=True, order="C")
        if arr.ndim != 2 or min(arr.shape) < 1:
            raise ValueError(f"expected a nonempty 2-D matrix, got shape {arr.shape}")
        if not np.isfinite(arr.view(np.float64)).all():
            raise ValueError("matrix entries must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    @classmethod
    def identity(cls, d: int) -> "CMatrix":
        return cls(np.eye(d, dtype=np.complex128))

    @classmethod
    def zeros(cls, rows: int, cols: int | None = None) -> "CMatrix":
        return cls(np.zeros((rows, cols if cols is not None else rows), dtype=np.complex128))

    @classmethod
    def diag(cls, entries) -> "CMatrix":
        return cls(np.diag(np.asarray(entries, dtype=np.complex128)))

    def __repr__(self):
        return f"CMatrix({self.data.tolist()!r})"


@dataclass(frozen=True, eq=False)
class HermMatrix:
    """A Hermitian matrix, stored symmetrized, remembering the input defect."""

    matrix: CMatrix
    defect: float

    @classmethod
    def from_matrix(cls, value, *, reject_tol: float = HERM_REJECT_TOL) -> "HermMatrix":
        arr = as_array(value)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError("Hermitian matrices must be square")
        defect = float(np.linalg.norm(arr - arr.conj().T))
        if defect > reject_tol:
            raise ValueError(
                f"matrix is not Hermitian: symmetrization defect {defect:.3e} "
                f"exceeds {reject_tol:.1e}"
            )
        sym = 0.5 * (arr + arr.conj().T)
        return cls(matrix=CMatrix(sym), defect=defect)

    @property
    def data(self) -> np.ndarray:
        return self.matrix.data

    @property
    def dim(self) -> int:
        return self.matrix.rows

    def __repr__(self):
        return f"HermMatrix({self.data.tolist()!r}, defect={self.defect:.2e})"


@dataclass(frozen=True)
class EigDecomposition:
    """Eigenvalues in descending order with matching orthonormal columns."""

    values: np.ndarray
    vectors: np.ndarray


@dataclass(frozen=True)
class PsdCheck:
    is_psd: bool
    min_eigenvalue: float


def adjoint(a) -> CMatrix:
    """Conjugate transpose."""
    return CMatrix(as_array(a).conj().T)


def real_part(a) -> HermMatrix:
    """Hermitian part (A + A^dagger) / 2 of a square matrix."""
    arr = as_array(a)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError("real_part requires a square matrix")
    return HermMatrix.from_matrix(0.5 * (arr + arr.conj().T))


def _fix_phases(vectors: np.ndarray) -> np.ndarray:
    """Rotate each column so its first significant entry is positive real."""
    out = np.array(vectors, copy=True)
    for j in range(out.shape[1]):
        col = out[:, j]
        nz = np.flatnonzero(np.abs(col) > _PHASE_TOL)
        if nz.size:
            pivot = col[nz[0]]
            out[:, j] = col * (pivot.conjugate() / abs(pivot))
    return out


def eig_herm(h) -> EigDecomposition:
    """Spectral decomposition of a Hermitian matrix.

    Eigenvalues are returned in descending order; each eigenvector is
    normalized so its first nonzero component is positive real, which makes
    repeated runs reproducible on one platform.
    """
    if not isinstance(h, HermMatrix):
        h = HermMatrix.from_matrix(h)
    try:
        values, vectors = np.linalg.eigh(h.data)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise NumericalError(f"Hermitian eigensolver failed: {exc}") from exc
    order = slice(None, None, -1)
    return EigDecomposition(
        values=np.ascontiguousarray(values[order].real),
        vectors=_fix_phases(vectors[:, order]),
    )


def op_norm(a) -> float:
    """Operator (spectral) norm: the largest singular value."""
    arr = as_array(a)
    try:
        return float(np.linalg.svd(arr, compute_uv=False)[0])
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise NumericalError(f"SVD failed: {exc}") from exc


def psd_check(h, tol: float) -> PsdCheck:
    """Check positive semidefiniteness down to -tol; reports the bottom eigenvalue."""
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    if not isinstance(h, HermMatrix):
        h = HermMatrix.from_matrix(h)
    values = np.linalg.eigvalsh(h.data)
    lo = float(values[0])
    return PsdCheck(is_psd=lo >= -tol, min_eigenvalue=lo)


def sqrt_psd(h) -> HermMatrix:
    """PSD square root; eigenvalues in [-1e-9, 0) are clamped to zero."""
    if not isinstance(h, HermMatrix):
        h = HermMatrix.from_matrix(h)
    dec = eig_herm(h)
    lo = float(dec.values.min())
    if lo < -SQRT_PSD_TOL:
        raise NotPsdError(f"matrix is not PSD: min eigenvalue {lo:.3e}")
    roots = np.sqrt(np.clip(dec.values, 0.0, None))
    mat = (dec.vectors * roots) @ dec.vectors.conj().T
    return HermMatrix.from_matrix(0.5 * (mat + mat.conj().T))


def frob_inner(a, b) -> complex:
    """Frobenius pairing Tr(A^dagger B); conjugate-linear in the first slot."""
    aa, bb = as_array(a), as_array(b)
    if aa.shape != bb.shape:
        raise ValueError(f"shape mismatch: {aa.shape} vs {bb.shape}")
    return complex(np.vdot(aa, bb))


def frob_norm(a) -> float:
    """Frobenius norm."""
    return float(np.linalg.norm(as_array(a)))


def unit_scale(*mats) -> float:
    """max(1, largest Frobenius norm) - a common normalization denominator."""
    best = 1.0
    for m in mats:
        best = max(best, float(np.linalg.norm(as_array(m))))
    return best
