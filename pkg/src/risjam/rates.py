"""Secrecy-rate and sensing-MI evaluation, plus the rate/MSE identity toolkit.

All rates use the natural logarithm (nats per channel use) and are clamped
at zero. Log-determinants are evaluated on symmetrized Hermitian arguments;
the double-form evaluations (whitened vs. expanded determinants) act as a
built-in consistency check of the |I+AB| = |I+BA| rearrangements.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelSet
from .linalg import (ConsistencyError, gram, herm, logdet_i_plus, logdet_pd,
                     require_hermitian, require_pd)

CLAMP_TIE_TOL = 1e-9
_FORM_TOL = 1e-9


@dataclass
class PrecoderPair:
    """BS precoder f1 (n_b x d1) and jammer precoder f2 (n_c x d2) with budgets.

    Square precoders are the general case; column vectors cover the
    single-stream (MISO) setting. Budgets are in the same normalized units
    as the channels.
    """

    f1: np.ndarray
    f2: np.ndarray
    p1: float
    p2: float

    def __post_init__(self):
        self.f1 = np.atleast_2d(np.asarray(self.f1, dtype=complex))
        self.f2 = np.atleast_2d(np.asarray(self.f2, dtype=complex))

    def validate(self, tol: float = 1e-9) -> None:
        for f, p, name in ((self.f1, self.p1, "f1"), (self.f2, self.p2, "f2")):
            used = float(np.real(np.trace(f @ f.conj().T)))
            if used > p * (1.0 + tol) + 1e-15:
                raise ValueError(f"{name} exceeds its power budget: {used} > {p}")


@dataclass
class RateBundle:
    """All rate expressions of one operating point (nats, clamped at zero)."""

    r_hat: float
    r_tilde: float
    r_bar: float
    r_ej: float
    r_gn: float

    @property
    def branch(self) -> str:
        """Which candidate realizes r_ej; ties prefer the jammer-free branch."""
        if self.r_bar >= min(self.r_hat, self.r_tilde) - CLAMP_TIE_TOL:
            return "bar"
        return "hat" if self.r_hat <= self.r_tilde else "tilde"


def _check_finite(ch: ChannelSet, p: PrecoderPair) -> None:
    for arr in (ch.h1, ch.h2, ch.g1, ch.g2, p.f1, p.f2):
        if not np.all(np.isfinite(arr)):
            raise ValueError("non-finite entries in channels or precoders")


def _whitened_logdet(signal: np.ndarray, noise_gram: np.ndarray) -> float:
    """log|I + S (N + I)^-1| for Hermitian PSD S, N via Cholesky whitening."""
    n = signal.shape[0]
    chol = np.linalg.cholesky(np.eye(n) + noise_gram)
    white = np.linalg.solve(chol, np.linalg.solve(chol, signal).conj().T).conj().T
    return logdet_i_plus(herm(white))


def _agree(a: float, b: float, what: str) -> float:
    if abs(a - b) > _FORM_TOL * max(1.0, abs(a), abs(b)):
        raise ConsistencyError(f"{what} forms disagree: {a} vs {b}")
    return b


def gn_rate_forms(ch: ChannelSet, p: PrecoderPair):
    """Unclamped GN secrecy rate by the expanded and whitened forms."""
    _check_finite(ch, p)
    a1, a2 = gram(ch.h1 @ p.f1), gram(ch.h2 @ p.f2)
    b1, b2 = gram(ch.g1 @ p.f1), gram(ch.g2 @ p.f2)
    expanded = (logdet_i_plus(a1 + a2) - logdet_i_plus(a2)
                + logdet_i_plus(b2) - logdet_i_plus(b1 + b2))
    whitened = _whitened_logdet(a1, a2) - _whitened_logdet(b1, b2)
    return expanded, whitened


def ej_rate_terms(ch: ChannelSet, p: PrecoderPair):
    """Unclamped (r_hat, r_tilde, r_bar); r_tilde checked through both forms."""
    _check_finite(ch, p)
    a1, a2 = gram(ch.h1 @ p.f1), gram(ch.h2 @ p.f2)
    b1, b2 = gram(ch.g1 @ p.f1), gram(ch.g2 @ p.f2)
    eve_full = logdet_i_plus(b1 + b2)
    r_hat = logdet_i_plus(a1) + logdet_i_plus(b2) - eve_full
    tilde_joint = logdet_i_plus(a1 + a2) - eve_full
    tilde_split = _whitened_logdet(a1, a2) + logdet_i_plus(a2) - eve_full
    r_tilde = _agree(tilde_joint, tilde_split, "r_tilde")
    r_bar = logdet_i_plus(a1) - logdet_i_plus(b1)
    return r_hat, r_tilde, r_bar


def rate_gn(ch: ChannelSet, p: PrecoderPair) -> float:
    """Clamped GN secrecy rate; the two evaluation forms must agree."""
    expanded, whitened = gn_rate_forms(ch, p)
    return max(0.0, _agree(expanded, whitened, "r_gn"))


def rate_ej(ch: ChannelSet, p: PrecoderPair) -> RateBundle:
    """All encoded-jamming rates at one operating point."""
    r_hat_u, r_tilde_u, r_bar_u = ej_rate_terms(ch, p)
    r_hat = max(0.0, r_hat_u)
    r_tilde = max(0.0, r_tilde_u)
    r_bar = max(0.0, r_bar_u)
    return RateBundle(
        r_hat=r_hat,
        r_tilde=r_tilde,
        r_bar=r_bar,
        r_ej=max(min(r_hat, r_tilde), r_bar),
        r_gn=rate_gn(ch, p),
    )


def sensing_mi(f1: np.ndarray, s1: np.ndarray, r_hs: np.ndarray) -> float:
    """log|I + F1 S1 S1^H F1^H R| for Hermitian PSD target covariance R."""
    f1 = np.atleast_2d(np.asarray(f1, dtype=complex))
    s1 = np.atleast_2d(np.asarray(s1, dtype=complex))
    r_hs = np.asarray(r_hs, dtype=complex)
    require_hermitian(r_hs, "target response covariance")
    probe = gram(f1 @ s1)
    evals, vecs = np.linalg.eigh(herm(r_hs))
    sqrt_r = (vecs * np.sqrt(np.clip(evals, 0.0, None))) @ vecs.conj().T
    return logdet_i_plus(herm(sqrt_r @ probe @ sqrt_r))


# --- rate/MSE identity utilities -------------------------------------------
#
# E(U, F) = (I - U^H H F) R (I - U^H H F)^H + U^H N U with R, N Hermitian PD.
# The three facts used everywhere: W* = E^-1 maximizes log|WR| - tr(WE);
# U* below minimizes tr(W E(U,F)); and at (U*, W*) the maximum equals
# log|I + H F R F^H H^H N^-1|.

def mse_matrix(h, f, r, n, u) -> np.ndarray:
    q = f.shape[0]
    d = np.eye(q) - u.conj().T @ h @ f
    return herm(d @ r @ d.conj().T + u.conj().T @ n @ u)


def optimal_receiver(h, f, r, n) -> np.ndarray:
    hfr = h @ f @ r
    return np.linalg.solve(herm(n + hfr @ f.conj().T @ h.conj().T), hfr)


def optimal_weight(h, f, r, n) -> np.ndarray:
    u_star = optimal_receiver(h, f, r, n)
    return herm(np.linalg.inv(mse_matrix(h, f, r, n, u_star)))


def lemma1_gap(h, f, r, n, w, u) -> float:
    """[log|WR| - tr(W E(U,F)) + q] minus the rate term it lower-bounds.

    Zero (to roundoff) at the optimal (U*, W*), strictly negative elsewhere.
    """
    h, f, r, n, w, u = (np.asarray(x, dtype=complex) for x in (h, f, r, n, w, u))
    require_pd(r, "R")
    require_pd(n, "N")
    require_pd(w, "W")
    q = f.shape[0]
    bound = logdet_pd(w) + logdet_pd(r) - float(np.real(np.trace(w @ mse_matrix(h, f, r, n, u)))) + q
    chol = np.linalg.cholesky(herm(n))
    hfr = h @ f @ r @ f.conj().T @ h.conj().T
    white = np.linalg.solve(chol, np.linalg.solve(chol, hfr).conj().T).conj().T
    return bound - logdet_i_plus(herm(white))
