"""Large-surface behavior of the reflected jammer channels.

With phases aligned to one receive output of the legitimate link, the
coherent sum grows linearly in the number of elements while the
eavesdropper-side sum only grows like its square root, so the probability
that the legitimate reflected link dominates tends to one. This module
estimates that probability by Monte Carlo.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class AsymptoticScenario:
    m: int
    n_u: int = 1
    trials: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.m < 1 or self.trials < 1 or self.n_u < 1:
            raise ValueError("m, n_u and trials must be >= 1")


@dataclass
class DominanceEstimate:
    m: int
    n_u: int
    trials: int
    p_hat: float                # fraction of trials with |g2|^2 <= |h2|^2
    stderr: float               # binomial standard error of p_hat
    aligned_first_mean: float   # mean of the coherently combined first output
    aligned_first_stderr: float
    g2_sq_mean: float           # mean squared norm of the eavesdropper sum


def align_phases(h_row: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Unit-modulus phases making every product h_row[i] g[i] e^{j theta_i}
    real nonnegative; vanishing products get zero phase."""
    h_row = np.asarray(h_row).reshape(-1)
    g = np.asarray(g).reshape(-1)
    if h_row.shape != g.shape:
        raise ValueError("phase alignment needs vectors of equal length")
    prod = h_row * g
    mag = np.abs(prod)
    return np.where(mag > 0, np.conj(prod) / np.where(mag > 0, mag, 1.0), 1.0 + 0j)


def estimate_dominance(sc: AsymptoticScenario, block: int = 256) -> DominanceEstimate:
    """Monte Carlo estimate of P[|g2|^2 <= |h2|^2] under first-output
    phase alignment, with common draws per trial index for a fixed seed."""
    rng = np.random.default_rng(sc.seed)
    wins = 0
    first_outputs = []
    g2_sq_sum = 0.0
    done = 0
    while done < sc.trials:
        n = min(block, sc.trials - done)

        def cplx(*shape):
            return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)

        h = cplx(n, sc.n_u, sc.m)
        g_mat = cplx(n, sc.n_u, sc.m)
        g = cplx(n, sc.m)
        prod = h[:, 0, :] * g
        mag = np.abs(prod)
        w = np.where(mag > 0, np.conj(prod) / np.where(mag > 0, mag, 1.0), 1.0 + 0j)
        h2 = np.einsum("tum,tm->tu", h, w * g)
        g2 = np.einsum("tum,tm->tu", g_mat, w * g)
        h2_sq = np.sum(np.abs(h2) ** 2, axis=1)
        g2_sq = np.sum(np.abs(g2) ** 2, axis=1)
        wins += int(np.sum(g2_sq <= h2_sq))
        first_outputs.append(np.real(h2[:, 0]))
        g2_sq_sum += float(np.sum(g2_sq))
        done += n

    first = np.concatenate(first_outputs)
    p_hat = wins / sc.trials
    stderr = float(np.sqrt(max(p_hat * (1.0 - p_hat), 1e-12) / sc.trials))
    return DominanceEstimate(
        m=sc.m, n_u=sc.n_u, trials=sc.trials, p_hat=p_hat, stderr=stderr,
        aligned_first_mean=float(np.mean(first)),
        aligned_first_stderr=float(np.std(first, ddof=1) / np.sqrt(sc.trials)) if sc.trials > 1 else 0.0,
        g2_sq_mean=g2_sq_sum / sc.trials,
    )


def dominance_sweep(m_list, n_u: int = 1, trials: int = 1000, seed: int = 0):
    """One estimate per surface size, matched seeds across sizes."""
    return [estimate_dominance(AsymptoticScenario(m=int(m), n_u=n_u, trials=trials, seed=seed))
            for m in m_list]
