"""Joint secrecy/sensing optimization for a dual-functional transmitter.

The communication side reuses the alternating machinery of `wmmse` (no RIS
here); the sensing side adds a receive filter and weight for the target
response, which couples the transmit precoder through a Sylvester-type
stationarity equation solved by Kronecker vectorization. Sweeping the
weight between the two objectives traces the secrecy/sensing trade-off.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .channel import ChannelSet
from .linalg import ConsistencyError, gram, herm, require_hermitian
from .rates import PrecoderPair, RateBundle, rate_ej, sensing_mi
from .wmmse import (AuxState, GuardedRelaxer, StopRule, _f2_quadratic,
                    _feasible_point, power_bisect, subproblem_rate, update_aux)

R_HS_EPS = 1e-10  # ridge applied to a singular target covariance


@dataclass
class IsacProblem:
    """One secrecy/sensing instance: channels (no RIS), pilots, target
    covariance, budgets, and the trade-off weights (alpha1 + alpha2 = 1)."""

    ch: ChannelSet
    s1: np.ndarray       # (n_b, T) probing/pilot block
    r_hs: np.ndarray     # (n_b, n_b) Hermitian PSD target response covariance
    p1: float
    p2: float
    alpha1: float
    alpha2: float

    def __post_init__(self):
        if self.ch.raw.dims.m != 0:
            raise ValueError("sensing extension assumes no reflecting surface (m=0)")
        if abs(self.alpha1 + self.alpha2 - 1.0) > 1e-12:
            raise ValueError("weights must satisfy alpha1 + alpha2 = 1")
        if min(self.alpha1, self.alpha2) < 0:
            raise ValueError("weights must be nonnegative")
        self.s1 = np.asarray(self.s1, dtype=complex)
        self.r_hs = np.asarray(self.r_hs, dtype=complex)
        require_hermitian(self.r_hs, "target response covariance")


@dataclass
class IsacSolution:
    f1: np.ndarray
    f2: np.ndarray
    rates: RateBundle
    r_comm: float        # scheme rate at the solution (clamped)
    r_sens: float
    label: str
    trace: list          # weighted objective per outer iteration (unclamped comm part)
    iterations: int
    converged: bool


def sample_target_covariance(n_b: int, seed) -> np.ndarray:
    """Wishart(I, n_b) draw normalized by n_b, so the trace scales with n_b."""
    rng = np.random.default_rng(seed)
    x = (rng.standard_normal((n_b, n_b)) + 1j * rng.standard_normal((n_b, n_b))) / np.sqrt(2.0)
    return herm(x @ x.conj().T / n_b)


def sample_pilots(n_b: int, t: int, seed) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return (rng.standard_normal((n_b, t)) + 1j * rng.standard_normal((n_b, t))) / np.sqrt(2.0)


def regularized_covariance(r_hs: np.ndarray) -> np.ndarray:
    """The target covariance as used by the weight updates: exact when it is
    safely positive definite, ridged by R_HS_EPS when numerically singular."""
    r = herm(r_hs)
    evals = np.linalg.eigvalsh(r)
    if evals[0] <= R_HS_EPS * max(1.0, evals[-1]):
        return r + R_HS_EPS * max(1.0, evals[-1]) * np.eye(r.shape[0])
    return r


def update_sensing_aux(f1: np.ndarray, s1: np.ndarray, r_hs: np.ndarray):
    """Closed-form sensing receive filter and weight.

    U_s = (S^H F^H R F S + I)^-1 S^H F^H R, and the weight is the inverse
    of the resulting MSE matrix, W_s = R^-1 + F S S^H F^H; a singular
    covariance gets a small ridge so the inverse exists.
    """
    t = s1.shape[1]
    fs = f1 @ s1
    r_reg = regularized_covariance(r_hs)
    u_s = np.linalg.solve(herm(fs.conj().T @ r_reg @ fs + np.eye(t)),
                          fs.conj().T @ r_reg)
    w_s = herm(np.linalg.inv(r_reg) + fs @ fs.conj().T)
    return u_s, w_s


def sensing_mse_matrix(f1, s1, r_hs, u_s) -> np.ndarray:
    n_b = r_hs.shape[0]
    d = np.eye(n_b) - u_s.conj().T @ s1.conj().T @ f1.conj().T
    return herm(d @ herm(r_hs) @ d.conj().T + u_s.conj().T @ u_s)


def _f1_system(prob: IsacProblem, aux: AuxState, u_s, w_s):
    """Matrices of the stationarity equation A1 F1 + A2 F1 B2 = C (before
    the power multiplier enters A1)."""
    ch = prob.ch
    a1 = prob.alpha1 * herm(ch.h1.conj().T @ aux.u1 @ aux.w1 @ aux.u1.conj().T @ ch.h1
                            + ch.g1.conj().T @ aux.w3 @ ch.g1)
    a2 = prob.alpha2 * herm(prob.r_hs)
    su = prob.s1 @ u_s
    b2 = herm(su @ w_s @ su.conj().T)
    c = (prob.alpha1 * ch.h1.conj().T @ aux.u1 @ aux.w1
         + prob.alpha2 * herm(prob.r_hs) @ w_s @ u_s.conj().T @ prob.s1.conj().T)
    return a1, a2, b2, c


def solve_f1_isac(prob: IsacProblem, aux: AuxState, u_s, w_s, lam1: float) -> np.ndarray:
    """Solve (A1 + lam1 I) F1 + A2 F1 B2 = C by Kronecker vectorization and
    verify the residual against the right-hand side."""
    if lam1 < 0:
        raise ValueError("multiplier must be >= 0")
    a1, a2, b2, c = _f1_system(prob, aux, u_s, w_s)
    n = a1.shape[0]
    kron = np.kron(np.eye(n), a1 + lam1 * np.eye(n)) + np.kron(b2.T, a2)
    f1 = np.linalg.solve(kron, c.reshape(-1, order="F")).reshape((n, n), order="F")
    lhs = (a1 + lam1 * np.eye(n)) @ f1 + a2 @ f1 @ b2
    res = np.linalg.norm(lhs - c)
    if res > 1e-8 * max(np.linalg.norm(c), 1e-300):
        raise ConsistencyError(f"stationarity residual too large: {res:.2e}")
    return f1


def _solve_f1_budget(prob: IsacProblem, aux: AuxState, u_s, w_s,
                     stop: StopRule) -> np.ndarray:
    """Power-constrained F1 update: the Kronecker system is Hermitian PSD,
    so the bisection policy of the communication precoder solve applies to
    the vectorized problem unchanged."""
    a1, a2, b2, c = _f1_system(prob, aux, u_s, w_s)
    n = a1.shape[0]
    kron = herm(np.kron(np.eye(n), a1) + np.kron(b2.T, a2))
    vec_f, _ = power_bisect(kron, c.reshape(-1, 1, order="F"), prob.p1, stop)
    return vec_f.reshape((n, n), order="F")


def weighted_objective(prob: IsacProblem, p: PrecoderPair, mode: str) -> float:
    return (prob.alpha1 * subproblem_rate(prob.ch, p, mode)
            + prob.alpha2 * sensing_mi(p.f1, prob.s1, prob.r_hs))


def optimize_isac(prob: IsacProblem, mode: str, init=0,
                  stop: StopRule = StopRule(), restarts: int = 1) -> IsacSolution:
    """Alternate communication/sensing auxiliaries and precoders for one
    subproblem objective weighted against the sensing mutual information."""
    if restarts > 1:
        seed = init if isinstance(init, np.random.SeedSequence) else np.random.SeedSequence(init)
        runs = [optimize_isac(prob, mode, init=(s, r), stop=stop, restarts=1)
                for r, s in enumerate(seed.spawn(restarts))]
        return max(runs, key=lambda rec: rec.trace[-1])

    from .wmmse import _initial_point
    d = prob.ch.raw.dims
    if isinstance(init, tuple) and len(init) == 2 and isinstance(init[0], np.random.SeedSequence):
        f1, f2, _ = _initial_point(prob.ch.raw, prob.p1, prob.p2, mode, init[0], restart=init[1])
    else:
        f1, f2, _ = _initial_point(prob.ch.raw, prob.p1, prob.p2, mode, init)
    p = PrecoderPair(f1, f2, prob.p1, prob.p2)
    empty_phi = np.zeros(0, dtype=complex)

    def objective(point):
        return weighted_objective(prob, PrecoderPair(point[0], point[1], prob.p1, prob.p2), mode)

    relaxer = GuardedRelaxer(lambda pt: _feasible_point(pt, prob.p1, prob.p2), objective)
    trace = []
    converged = False
    prev = None
    for _ in range(stop.max_outer):
        aux = update_aux(prob.ch, p, mode)
        u_s, w_s = update_sensing_aux(p.f1, prob.s1, prob.r_hs)
        f1 = _solve_f1_budget(prob, aux, u_s, w_s, stop)
        if mode == "bar":
            f2 = np.zeros((d.n_c, d.n_c), dtype=complex)
        else:
            # alpha1 scales the jammer objective uniformly, so the plain
            # communication update applies whenever alpha1 > 0; at
            # alpha1 = 0 any feasible jammer is optimal and we keep it.
            a2m, rhs2 = _f2_quadratic(prob.ch, aux)
            f2, _ = power_bisect(a2m, rhs2, prob.p2, stop)
        (f1, f2, _), value = relaxer.advance((f1, f2, empty_phi))
        p = PrecoderPair(f1, f2, prob.p1, prob.p2)
        trace.append(value)
        if prev is not None and abs(value - prev) <= stop.delta:
            converged = True
            break
        prev = value

    bundle = rate_ej(prob.ch, p)
    r_sens = sensing_mi(p.f1, prob.s1, prob.r_hs)
    r_comm = {"hat": bundle.r_hat, "tilde": bundle.r_tilde,
              "bar": bundle.r_bar, "gn": bundle.r_gn}[mode]
    return IsacSolution(f1=p.f1, f2=p.f2, rates=bundle, r_comm=r_comm,
                        r_sens=r_sens, label=mode, trace=trace,
                        iterations=len(trace), converged=converged)


def optimize_isac_ej(prob: IsacProblem, init=0, stop: StopRule = StopRule(),
                     restarts: int = 1) -> IsacSolution:
    """Best of the three encoded-jamming candidates under the weighted
    objective, reporting the achievable EJ rate of the winner."""
    candidates = {m: optimize_isac(prob, m, init=init, stop=stop, restarts=restarts)
                  for m in ("tilde", "hat", "bar")}

    def score(sol: IsacSolution) -> float:
        return prob.alpha1 * sol.rates.r_ej + prob.alpha2 * sol.r_sens

    best = max(candidates, key=lambda m: score(candidates[m]))
    if score(candidates["bar"]) >= score(candidates[best]) - 1e-9:
        best = "bar"
    sol = candidates[best]
    return IsacSolution(f1=sol.f1, f2=sol.f2, rates=sol.rates,
                        r_comm=sol.rates.r_ej, r_sens=sol.r_sens, label=best,
                        trace=sol.trace, iterations=sol.iterations,
                        converged=sol.converged)


def pareto_sweep(prob_template: IsacProblem, alpha1_grid, scheme: str = "ej",
                 init=0, stop: StopRule = StopRule(), restarts: int = 1):
    """One optimization per grid weight; rows sorted by alpha1."""
    rows = []
    for alpha1 in sorted(float(a) for a in alpha1_grid):
        if not 0.0 <= alpha1 <= 1.0:
            raise ValueError("alpha grid must lie in [0, 1]")
        prob = replace(prob_template, alpha1=alpha1, alpha2=1.0 - alpha1)
        if scheme == "ej":
            sol = optimize_isac_ej(prob, init=init, stop=stop, restarts=restarts)
        elif scheme == "gn":
            sol = optimize_isac(prob, "gn", init=init, stop=stop, restarts=restarts)
        else:
            raise ValueError("scheme must be 'ej' or 'gn'")
        rows.append((alpha1, sol.r_comm, sol.r_sens))
    return rows


def pareto_filter(points):
    """Upper-right staircase of a (R_c, R_s) cloud: the retained points,
    sorted by rising R_c, have strictly falling R_s."""
    ordered = sorted(points, key=lambda p: (-p[0], -p[1]))
    frontier = []
    best_rs = -np.inf
    for p in ordered:
        if p[1] > best_rs:
            frontier.append(p)
            best_rs = p[1]
    return frontier[::-1]


def waterfilling_sensing_value(s1: np.ndarray, r_hs: np.ndarray, p1: float) -> float:
    """Independent optimum of the sensing MI alone under the power cap.

    Aligning the precoder's singular bases with the eigenbases of the pilot
    Gram and the target covariance reduces the problem to water-filling
    over the products of their (descending) eigenvalues.
    """
    a_eig = np.linalg.eigvalsh(herm(s1 @ s1.conj().T))[::-1]
    r_eig = np.linalg.eigvalsh(herm(r_hs))[::-1]
    gains = np.clip(a_eig, 0, None) * np.clip(r_eig, 0, None)
    gains = gains[gains > 1e-300]
    if gains.size == 0 or p1 <= 0:
        return 0.0
    # water level by bisection on the usual (mu - 1/g)^+ allocation
    lo, hi = 0.0, p1 + float(np.max(1.0 / gains))
    for _ in range(200):
        mu = 0.5 * (lo + hi)
        used = np.sum(np.clip(mu - 1.0 / gains, 0.0, None))
        if used > p1:
            hi = mu
        else:
            lo = mu
    alloc = np.clip(0.5 * (lo + hi) - 1.0 / gains, 0.0, None)
    return float(np.sum(np.log1p(alloc * gains)))
