"""Small shared helpers for complex Hermitian linear algebra."""

from __future__ import annotations

import numpy as np


class ConsistencyError(RuntimeError):
    """An internal numerical self-check failed (not a user input error)."""


def herm(a: np.ndarray) -> np.ndarray:
    """Hermitian part (A + A^H)/2, used to suppress roundoff asymmetry."""
    return 0.5 * (a + a.conj().T)


def logdet_pd(a: np.ndarray) -> float:
    """log|A| for Hermitian positive definite A, via Cholesky."""
    if a.shape[0] == 0:
        return 0.0
    chol = np.linalg.cholesky(herm(a))
    return 2.0 * float(np.sum(np.log(np.real(np.diag(chol)))))


def logdet_i_plus(x: np.ndarray) -> float:
    """log|I + X| for Hermitian PSD X."""
    return logdet_pd(np.eye(x.shape[0]) + x)


def gram(a: np.ndarray) -> np.ndarray:
    """A A^H, symmetrized."""
    return herm(a @ a.conj().T)


def solve_hermitian(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.linalg.solve(herm(a), b)


def min_eig(a: np.ndarray) -> float:
    if a.shape[0] == 0:
        return 0.0
    return float(np.linalg.eigvalsh(herm(a))[0])


def require_pd(a: np.ndarray, name: str) -> None:
    if min_eig(a) <= 0.0:
        raise ValueError(f"{name} must be Hermitian positive definite")


def require_hermitian(a: np.ndarray, name: str, tol: float = 1e-9) -> None:
    asym = np.linalg.norm(a - a.conj().T)
    if asym > tol * max(1.0, np.linalg.norm(a)):
        raise ValueError(f"{name} is not Hermitian (asymmetry {asym:.2e})")


def eig_max_hermitian(a: np.ndarray, dense_limit: int = 512,
                      tol: float = 1e-8, max_iter: int = 1000) -> float:
    """Largest eigenvalue of a Hermitian matrix.

    Dense eigendecomposition up to `dense_limit`; power iteration above
    (the shift `trace/n` keeps it valid for indefinite input).
    """
    n = a.shape[0]
    if n == 0:
        return 0.0
    a = herm(a)
    if n <= dense_limit:
        return float(np.linalg.eigvalsh(a)[-1])
    shift = float(np.real(np.trace(a))) / n + np.linalg.norm(a, ord="fro")
    b = a + shift * np.eye(n)
    rng = np.random.default_rng(0)
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(max_iter):
        w = b @ v
        lam_new = float(np.real(np.vdot(v, w)))
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return -shift
        v = w / nw
        if abs(lam_new - lam) <= tol * max(1.0, abs(lam_new)):
            lam = lam_new
            break
        lam = lam_new
    return lam - shift
