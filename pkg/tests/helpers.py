"""Shared generators and independent oracles used across the test suite."""

from __future__ import annotations

import numpy as np

from cstarhull import CMatrix, KrausCombination, MatrixFamily, Mode


def random_complex(rng, *shape) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_hermitian(rng, d: int) -> np.ndarray:
    g = random_complex(rng, d, d)
    return 0.5 * (g + g.conj().T)


def random_unitary(rng, d: int) -> np.ndarray:
    q, r = np.linalg.qr(random_complex(rng, d, d))
    # fix the phase ambiguity of QR so draws are well spread
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


def random_psd(rng, d: int) -> np.ndarray:
    g = random_complex(rng, d, d)
    return g @ g.conj().T


def inv_sqrt_psd(s: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(0.5 * (s + s.conj().T))
    w = np.clip(w, 1e-14, None)
    return (v * (1.0 / np.sqrt(w))) @ v.conj().T


def random_combination(
    rng, family: MatrixFamily, mode: Mode, n_terms: int | None = None
) -> KrausCombination:
    """A valid combination with random coefficients over random indices."""
    d = family.dim
    k = len(family.generators)
    n = int(n_terms or rng.integers(1, 4))
    raw = [random_complex(rng, d, d) for _ in range(n)]
    gram = sum(g.conj().T @ g for g in raw)
    if mode is Mode.EXACT_UNITAL:
        fix = inv_sqrt_psd(gram)
        coeffs = [g @ fix for g in raw]
    else:
        top = float(np.linalg.eigvalsh(0.5 * (gram + gram.conj().T))[-1])
        shrink = np.sqrt(rng.random() / max(top, 1e-14))
        coeffs = [g * shrink for g in raw]
    indices = rng.integers(0, k, size=n)
    return KrausCombination(
        mode=mode, terms=tuple((int(i), CMatrix(c)) for i, c in zip(indices, coeffs))
    )


def direct_apply(family: MatrixFamily, comb: KrausCombination) -> np.ndarray:
    """Independent evaluation of a combination by plain matrix products."""
    out = np.zeros((family.dim, family.dim), dtype=complex)
    gens = family.arrays()
    for idx, coeff in comb.terms:
        a = coeff.data
        out += a.conj().T @ gens[idx] @ a
    return out


def spectral_interval_witness(x: np.ndarray, y: np.ndarray) -> KrausCombination:
    """Unital witness mapping X onto Y when spec(Y) sits in [min, max] of spec(X).

    For each eigenpair (mu_j, e_j) of Y pick a unit vector phi_j mixing the
    extreme eigenvectors of X so that <phi_j, X phi_j> = mu_j; the
    coefficients A_j = phi_j e_j^dagger then resolve the identity and
    sum_j A_j^dagger X A_j = Y.
    """
    wx, vx = np.linalg.eigh(x)
    wy, vy = np.linalg.eigh(y)
    a, b = float(wx[0]), float(wx[-1])
    vmin, vmax = vx[:, 0], vx[:, -1]
    terms = []
    for mu, e in zip(wy, vy.T):
        t = 0.0 if b == a else float(np.clip((float(mu) - a) / (b - a), 0.0, 1.0))
        phi = np.sqrt(1.0 - t) * vmin + np.sqrt(t) * vmax
        terms.append((0, CMatrix(np.outer(phi, e.conj()))))
    return KrausCombination(mode=Mode.EXACT_UNITAL, terms=tuple(terms))


def spectral_excess(x: np.ndarray, y: np.ndarray) -> float:
    """How far spec(Y) escapes [min spec(X), max spec(X)]; 0 when contained."""
    wx = np.linalg.eigvalsh(x)
    wy = np.linalg.eigvalsh(y)
    return max(0.0, float(wy[-1] - wx[-1]), float(wx[0] - wy[0]))


def scalar_instance(rng, n: int):
    """One seeded random scalar membership instance (values, target, mode)."""
    k = int(rng.integers(1, 7))
    values = rng.standard_normal(k) + 1j * rng.standard_normal(k)
    mode = Mode.EXACT_UNITAL if n % 2 == 0 else Mode.SUB_UNITAL
    if rng.random() < 0.5:
        w = rng.random(k)
        w /= w.sum()
        if mode is Mode.SUB_UNITAL:
            w *= rng.random()
        target = complex(np.dot(w, values))
    else:
        target = complex(rng.standard_normal(), rng.standard_normal())
    return values, target, mode
