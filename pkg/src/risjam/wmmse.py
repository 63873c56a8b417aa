"""Alternating secrecy-rate optimizer for the MIMO case.

Block coordinate descent over three blocks: closed-form auxiliary
receiver/weight updates, Lagrangian precoder solves with bisected power
multipliers, and majorized unit-modulus phase updates. Four objectives are
supported: the two encoded-jamming subproblems ("hat" decodes the jammer at
the UE without interference, "tilde" decodes it jointly), the jammer-free
bound ("bar", jammer precoder pinned to zero), and the Gaussian-noise
jamming rate ("gn").
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelSet, RawChannels, check_unit_modulus, compose_effective, random_phases
from .linalg import ConsistencyError, eig_max_hermitian, gram, herm, logdet_i_plus, min_eig
from .rates import PrecoderPair, RateBundle, ej_rate_terms, gn_rate_forms, rate_ej

MODES = ("tilde", "hat", "gn", "bar")


@dataclass
class StopRule:
    """Convergence policy shared by all alternating optimizers."""

    delta: float = 1e-4        # outer stop on the subproblem rate, nats
    max_outer: int = 200
    max_inner_mm: int = 50     # phase-majorization steps per outer iteration
    inner_tol: float = 1e-8    # stop the phase loop on surrogate improvement
    bisect_rel_tol: float = 1e-8
    slack_tol: float = 1e-6    # complementary slackness |lam (tr - P)| <= slack_tol * P


@dataclass
class AuxState:
    """Receive filters and MSE weights for one subproblem.

    The slots are mode-dependent: for "tilde" they are (U1, W1) at the UE
    with jamming treated as noise, and (U2, W2) for the UE decoding the
    jammer; for "hat"/"bar" the first pair decodes the BS without jamming
    interference and the second is the eavesdropper-side jammer pair
    (U_G2, W_G2); "gn" mixes the tilde first pair with the hat second pair.
    w3 is the eavesdropper weight shared by every mode.
    """

    mode: str
    u1: np.ndarray
    w1: np.ndarray
    u2: np.ndarray
    w2: np.ndarray
    w3: np.ndarray


@dataclass
class MmProblem:
    """Quadratic surface phi^H Xi phi + 2 Re{phi^H conj(d)} + c_t on the torus."""

    xi: np.ndarray
    d: np.ndarray
    c_t: float
    lam_max: float = field(default=None)

    def __post_init__(self):
        if self.lam_max is None:
            self.lam_max = eig_max_hermitian(self.xi)

    def value(self, phi: np.ndarray) -> float:
        quad = float(np.real(phi.conj() @ self.xi @ phi))
        return quad + 2.0 * float(np.real(phi.conj() @ np.conj(self.d)))


@dataclass
class SolutionRecord:
    f1: np.ndarray
    f2: np.ndarray
    phi: np.ndarray
    rates: RateBundle
    label: str                 # subproblem that produced (f1, f2, phi)
    trace: list                # unclamped subproblem objective per outer iteration
    iterations: int
    converged: bool


def _identity_precoder(n: int, p: float) -> np.ndarray:
    return np.sqrt(p / n) * np.eye(n, dtype=complex)


def _w3(ch: ChannelSet, p: PrecoderPair) -> np.ndarray:
    e3 = np.eye(ch.g1.shape[0]) + gram(ch.g1 @ p.f1) + gram(ch.g2 @ p.f2)
    return herm(np.linalg.inv(herm(e3)))


def _signal_pair(h: np.ndarray, f: np.ndarray, noise: np.ndarray):
    """(U*, W*) for log|I + HFF^H H^H Noise^-1|; W* built in its explicitly
    Hermitian form I + F^H H^H Noise^-1 H F."""
    hf = h @ f
    u = np.linalg.solve(herm(noise + hf @ hf.conj().T), hf)
    w = herm(np.eye(f.shape[1]) + hf.conj().T @ np.linalg.solve(herm(noise), hf))
    return u, w


def update_aux_tilde(ch: ChannelSet, p: PrecoderPair) -> AuxState:
    """Joint-decoding auxiliaries: BS stream with jamming-plus-noise at the UE,
    jammer stream at the UE, eavesdropper weight."""
    n_u = ch.h1.shape[0]
    jam_noise = np.eye(n_u) + gram(ch.h2 @ p.f2)
    u1, w1 = _signal_pair(ch.h1, p.f1, jam_noise)
    u2, w2 = _signal_pair(ch.h2, p.f2, np.eye(n_u))
    return AuxState("tilde", u1, w1, u2, w2, _w3(ch, p))


def update_aux_hat(ch: ChannelSet, p: PrecoderPair) -> AuxState:
    """Interference-free auxiliaries: BS stream at the UE with unit noise and
    the jammer stream as decoded by the eavesdropper."""
    u1, w1 = _signal_pair(ch.h1, p.f1, np.eye(ch.h1.shape[0]))
    u2, w2 = _signal_pair(ch.g2, p.f2, np.eye(ch.g2.shape[0]))
    return AuxState("hat", u1, w1, u2, w2, _w3(ch, p))


def update_aux_gn(ch: ChannelSet, p: PrecoderPair) -> AuxState:
    n_u = ch.h1.shape[0]
    jam_noise = np.eye(n_u) + gram(ch.h2 @ p.f2)
    u1, w1 = _signal_pair(ch.h1, p.f1, jam_noise)
    u2, w2 = _signal_pair(ch.g2, p.f2, np.eye(ch.g2.shape[0]))
    return AuxState("gn", u1, w1, u2, w2, _w3(ch, p))


def update_aux(ch: ChannelSet, p: PrecoderPair, mode: str) -> AuxState:
    if mode == "tilde":
        return update_aux_tilde(ch, p)
    if mode in ("hat", "bar"):
        aux = update_aux_hat(ch, p)
        return AuxState(mode, aux.u1, aux.w1, aux.u2, aux.w2, aux.w3)
    if mode == "gn":
        return update_aux_gn(ch, p)
    raise ValueError(f"unknown mode {mode!r}")


def _mse_terms(ch: ChannelSet, p: PrecoderPair, aux: AuxState):
    """The three weighted-MSE matrices (E1, E2, E3) matching aux.mode."""
    n_u, n_e = ch.h1.shape[0], ch.g1.shape[0]
    if aux.mode in ("tilde", "gn"):
        noise1 = np.eye(n_u) + gram(ch.h2 @ p.f2)
    else:
        noise1 = np.eye(n_u)
    d1 = np.eye(p.f1.shape[1]) - aux.u1.conj().T @ ch.h1 @ p.f1
    e1 = herm(d1 @ d1.conj().T + aux.u1.conj().T @ noise1 @ aux.u1)
    ch2 = ch.h2 if aux.mode == "tilde" else ch.g2
    d2 = np.eye(p.f2.shape[1]) - aux.u2.conj().T @ ch2 @ p.f2
    e2 = herm(d2 @ d2.conj().T + aux.u2.conj().T @ aux.u2)
    e3 = herm(np.eye(n_e) + gram(ch.g1 @ p.f1) + gram(ch.g2 @ p.f2))
    return e1, e2, e3


def trace_objective(ch: ChannelSet, p: PrecoderPair, aux: AuxState) -> float:
    """tr(W1 E1) + tr(W2 E2) + tr(W3 E3), the quantity the precoder and
    phase blocks minimize at fixed auxiliaries."""
    e1, e2, e3 = _mse_terms(ch, p, aux)
    return float(sum(np.real(np.trace(w @ e))
                     for w, e in ((aux.w1, e1), (aux.w2, e2), (aux.w3, e3))))


def lemma1_bound(ch: ChannelSet, p: PrecoderPair, aux: AuxState) -> float:
    """Identity-based lower bound on the subproblem rate; tight right after
    an auxiliary update."""
    e1, e2, e3 = _mse_terms(ch, p, aux)
    total = 0.0
    for w, e in ((aux.w1, e1), (aux.w2, e2), (aux.w3, e3)):
        sign, logdet = np.linalg.slogdet(w)
        total += float(logdet) - float(np.real(np.trace(w @ e))) + w.shape[0]
    return total


def subproblem_rate(ch: ChannelSet, p: PrecoderPair, mode: str) -> float:
    """Unclamped objective of one subproblem (the quantity BCD ascends)."""
    if mode == "gn":
        return gn_rate_forms(ch, p)[0]
    r_hat, r_tilde, r_bar = ej_rate_terms(ch, p)
    return {"hat": r_hat, "tilde": r_tilde, "bar": r_bar}[mode]


# --- precoder block ----------------------------------------------------------

def power_bisect(a: np.ndarray, rhs: np.ndarray, budget: float, stop: StopRule = StopRule()):
    """Solve (A + lam I)^-1 RHS with the smallest lam >= 0 meeting the power cap.

    A is Hermitian PSD. An eigendecomposition makes the traced power a
    closed monotone function of lam, so the bracket [0, 1] is doubled until
    feasible and then bisected until both the relative lam interval and the
    complementary-slackness defect are inside tolerance. A zero right-hand
    side returns the zero matrix with lam = 0.
    """
    n = a.shape[0]
    if budget < 0:
        raise ValueError("power budget must be >= 0")
    if not np.any(np.abs(rhs) > 0) or budget == 0.0:
        return np.zeros_like(rhs), 0.0
    evals, vecs = np.linalg.eigh(herm(a))
    evals = np.clip(evals, 0.0, None)
    g = vecs.conj().T @ rhs
    weights = np.sum(np.abs(g) ** 2, axis=1)
    tiny = 1e-14 * max(1.0, float(evals[-1]))

    def tr_power(lam: float) -> float:
        denom = evals + lam
        active = weights > 1e-30
        if np.any(active & (denom <= tiny)):
            return np.inf
        denom = np.where(denom <= tiny, 1.0, denom)
        return float(np.sum(np.where(active, weights / denom ** 2, 0.0)))

    def precoder(lam: float) -> np.ndarray:
        denom = evals + lam
        scale = np.where((weights > 1e-30) & (denom > tiny), 1.0 / np.where(denom > tiny, denom, 1.0), 0.0)
        return vecs @ (g * scale[:, None])

    if tr_power(0.0) <= budget:
        return precoder(0.0), 0.0

    lo, hi = 0.0, 1.0
    while tr_power(hi) > budget:
        hi *= 2.0
        if hi > 1e30:
            raise ConsistencyError("power bisection failed to bracket the multiplier")
    for _ in range(200):
        lam = 0.5 * (lo + hi)
        tr = tr_power(lam)
        if tr > budget:
            lo = lam
        else:
            hi = lam
        tight = (hi - lo) <= stop.bisect_rel_tol * max(hi, 1.0)
        slack_ok = abs(hi * (tr_power(hi) - budget)) <= 0.5 * stop.slack_tol * budget
        if tight and slack_ok:
            break
    return precoder(hi), hi


def _f1_quadratic(ch: ChannelSet, aux: AuxState):
    a = herm(ch.h1.conj().T @ aux.u1 @ aux.w1 @ aux.u1.conj().T @ ch.h1
             + ch.g1.conj().T @ aux.w3 @ ch.g1)
    rhs = ch.h1.conj().T @ aux.u1 @ aux.w1
    return a, rhs


def _f2_quadratic(ch: ChannelSet, aux: AuxState):
    uwu1 = aux.u1 @ aux.w1 @ aux.u1.conj().T
    uwu2 = aux.u2 @ aux.w2 @ aux.u2.conj().T
    g2w3g2 = ch.g2.conj().T @ aux.w3 @ ch.g2
    if aux.mode == "tilde":
        a = ch.h2.conj().T @ (uwu1 + uwu2) @ ch.h2 + g2w3g2
        rhs = ch.h2.conj().T @ aux.u2 @ aux.w2
    elif aux.mode == "gn":
        a = ch.h2.conj().T @ uwu1 @ ch.h2 + ch.g2.conj().T @ uwu2 @ ch.g2 + g2w3g2
        rhs = ch.g2.conj().T @ aux.u2 @ aux.w2
    else:  # hat
        a = ch.g2.conj().T @ uwu2 @ ch.g2 + g2w3g2
        rhs = ch.g2.conj().T @ aux.u2 @ aux.w2
    return herm(a), rhs


def solve_precoders(ch: ChannelSet, aux: AuxState, p1: float, p2: float,
                    mode: str, stop: StopRule = StopRule()) -> PrecoderPair:
    """Exact minimizer of the weighted-MSE objective over (F1, F2) at fixed
    auxiliaries; "bar" keeps the jammer silent."""
    f1, _ = power_bisect(*_f1_quadratic(ch, aux), p1, stop)
    if mode == "bar":
        n_c = ch.h2.shape[1]
        f2 = np.zeros((n_c, n_c), dtype=complex)
    else:
        f2, _ = power_bisect(*_f2_quadratic(ch, aux), p2, stop)
    return PrecoderPair(f1, f2, p1, p2)


# --- phase block -------------------------------------------------------------

def _accumulate_phase_terms(raw: RawChannels, p: PrecoderPair, aux: AuxState):
    """Collect the quadratic/linear coefficients of the reflection vector.

    Every trace term expands over the effective channels A + R diag(phi) T;
    BS-side terms share the quadratic factor (H_br F1)(H_br F1)^H and
    jammer-side terms share (G_cr F2)(G_cr F2)^H, so two accumulators
    suffice. "signal" terms come from (I - U^H ch F)(.)^H, "quad" terms
    from plain (ch F)(ch F)^H products (optionally sandwiched by U).
    """
    m = raw.dims.m
    b1 = np.zeros((m, m), dtype=complex)
    b2 = np.zeros((m, m), dtype=complex)
    dmat = np.zeros((m, m), dtype=complex)
    j1 = raw.h_br @ p.f1
    j2 = raw.g_cr @ p.f2

    def add(kind, side, w, u, a_direct, r_refl, f):
        nonlocal b1, b2, dmat
        j = j1 if side == "bs" else j2
        if u is None:
            m_mat, n_mat = a_direct @ f, r_refl
        else:
            m_mat, n_mat = u.conj().T @ a_direct @ f, u.conj().T @ r_refl
        quad = n_mat.conj().T @ w @ n_mat
        if side == "bs":
            b1 += quad
        else:
            b2 += quad
        dmat += j @ m_mat.conj().T @ w @ n_mat
        if kind == "signal":
            dmat -= j @ w @ n_mat

    # (E1) BS stream at the UE
    add("signal", "bs", aux.w1, aux.u1, raw.h_bu, raw.h_ru, p.f1)
    if aux.mode in ("tilde", "gn"):
        # jamming-plus-noise inside E1
        add("quad", "jam", aux.w1, aux.u1, raw.g_cu, raw.g_ru, p.f2)
    # (E2) decoded jammer stream
    if aux.mode == "tilde":
        add("signal", "jam", aux.w2, aux.u2, raw.g_cu, raw.g_ru, p.f2)
    else:
        add("signal", "jam", aux.w2, aux.u2, raw.g_ce, raw.g_re, p.f2)
    # (E3) eavesdropper covariance
    add("quad", "bs", aux.w3, None, raw.h_be, raw.h_re, p.f1)
    add("quad", "jam", aux.w3, None, raw.g_ce, raw.g_re, p.f2)

    c1 = j1 @ j1.conj().T
    c2 = j2 @ j2.conj().T
    return herm(b1), herm(b2), c1, c2, dmat


def build_mm_problem(raw: RawChannels, p: PrecoderPair, aux: AuxState,
                     mode: str | None = None) -> MmProblem:
    """Reduce the weighted-MSE objective to its quadratic form in phi.

    The quadratic matrix is a sum of Hadamard products of PSD factors and
    is verified PSD; the constant is fixed by evaluating the full trace
    objective with the reflection switched off.
    """
    if mode is not None and mode != aux.mode:
        raise ValueError("aux state was built for a different mode")
    b1, b2, c1, c2, dmat = _accumulate_phase_terms(raw, p, aux)
    xi = herm(b1 * c1.T + b2 * c2.T)
    if raw.dims.m and min_eig(xi) < -1e-6 * max(1.0, float(np.linalg.norm(xi))):
        raise ConsistencyError("phase quadratic lost positive semidefiniteness")
    d = np.diag(dmat).copy()
    ch_off = compose_effective(raw, np.zeros(raw.dims.m, dtype=complex))
    c_t = trace_objective(ch_off, p, aux)
    return MmProblem(xi=xi, d=d, c_t=c_t)


def mm_phase_step(prob: MmProblem, phi: np.ndarray) -> np.ndarray:
    """One majorize-minimize step; never increases the quadratic objective
    and keeps every entry on the unit circle. Coordinates with a vanishing
    update direction keep their previous phase."""
    check_unit_modulus(phi)
    q = (prob.lam_max * np.eye(phi.shape[0]) - prob.xi) @ phi - np.conj(prob.d)
    mag = np.abs(q)
    return np.where(mag > 1e-14, q / np.where(mag > 1e-14, mag, 1.0), phi)


def _mm_loop(prob: MmProblem, phi: np.ndarray, stop: StopRule) -> np.ndarray:
    value = prob.value(phi)
    for _ in range(stop.max_inner_mm):
        phi_new = mm_phase_step(prob, phi)
        value_new = prob.value(phi_new)
        if value_new > value + 1e-9 * max(1.0, abs(value)):
            raise ConsistencyError("majorized phase step increased the objective")
        phi = phi_new
        if value - value_new < stop.inner_tol * max(1.0, abs(value)):
            value = value_new
            break
        value = value_new
    return phi


# --- outer loop --------------------------------------------------------------

class GuardedRelaxer:
    """Over-relaxation of the outer BCD iterate with a monotone guard.

    After each BCD sweep, secant candidates new + g (new - base) are
    projected back to the feasible set and accepted only if they improve
    the true objective, so the ascent property of plain BCD is never lost.
    The base point is the accepted iterate from two sweeps back: this
    momentum-style direction breaks the tiny cyclic steps plain
    over-relaxation stalls on, and removes the slow 1/k tail BCD exhibits
    near flat optima. The step factor grows on success, shrinks on failure.
    """

    def __init__(self, project, objective):
        self.project = project
        self.objective = objective
        self.last = None
        self.older = None
        self.gamma = 1.0

    def advance(self, point):
        point = tuple(point)
        value = self.objective(point)
        if self.older is not None:
            delta = [n - p for n, p in zip(point, self.older)]
            for g in (2.0 * self.gamma, self.gamma, 1.0):
                cand = self.project(tuple(n + g * d for n, d in zip(point, delta)))
                cand_value = self.objective(cand)
                if cand_value > value:
                    point, value = cand, cand_value
                    self.gamma = max(1.0, g)
                    break
            else:
                self.gamma = max(1.0, 0.5 * self.gamma)
        self.older = self.last
        self.last = point
        return point, value


def _feasible_point(point, p1: float, p2: float):
    """Rescale precoders into their power balls and phases onto the torus."""
    f1, f2, phi = point
    out = []
    for f, p in ((f1, p1), (f2, p2)):
        used = float(np.real(np.trace(f @ f.conj().T)))
        out.append(f * np.sqrt(p / used) if used > p else f)
    mag = np.abs(phi)
    out.append(np.where(mag > 1e-14, phi / np.where(mag > 1e-14, mag, 1.0), 1.0))
    return tuple(out)


def _random_precoder(n: int, p: float, rng) -> np.ndarray:
    f = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)
    used = float(np.real(np.trace(f @ f.conj().T)))
    return f * np.sqrt(rng.uniform(0.0, 1.0) * p / used) if used > 0 else f


def _initial_point(raw: RawChannels, p1: float, p2: float, mode: str, seed,
                   restart: int = 0):
    """Starting point for one BCD run.

    The first start uses scaled-identity precoders with uniform phases. A
    zero precoder block is an absorbing stationary point, so restarts probe
    the basins the identity start cannot leave: restart 1 silences the
    jammer, later restarts draw random directions at random power levels.
    """
    d = raw.dims
    rng = np.random.default_rng(seed)
    phi = random_phases(d.m, rng)
    f1 = _identity_precoder(d.n_b, p1)
    f2 = _identity_precoder(d.n_c, p2)
    if restart == 1:
        f2 = np.zeros((d.n_c, d.n_c), dtype=complex)
    elif restart >= 2:
        f1 = _random_precoder(d.n_b, p1, rng)
        f2 = _random_precoder(d.n_c, p2, rng)
    if mode == "bar":
        f2 = np.zeros((d.n_c, d.n_c), dtype=complex)
    return f1, f2, phi


def optimize_subproblem(raw: RawChannels, p1: float, p2: float, mode: str,
                        init=0, stop: StopRule = StopRule(), restarts: int = 1,
                        optimize_phases: bool = True) -> SolutionRecord:
    """Run the full BCD loop for one subproblem objective.

    `init` is either a seed (phases drawn uniformly, precoders start as
    scaled identities) or an explicit (f1, f2, phi) triple. With
    `optimize_phases=False` the reflection stays at its initial value
    (random-phase baseline). `restarts` reruns from spawned seeds and keeps
    the best final objective.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if restarts > 1:
        if isinstance(init, tuple):
            raise ValueError("restarts require a seed init, not an explicit point")
        seed = init if isinstance(init, np.random.SeedSequence) else np.random.SeedSequence(init)
        runs = [optimize_subproblem(raw, p1, p2, mode, init=(s, r), stop=stop,
                                    restarts=1, optimize_phases=optimize_phases)
                for r, s in enumerate(seed.spawn(restarts))]
        return max(runs, key=lambda rec: rec.trace[-1])

    if isinstance(init, tuple) and len(init) == 2 and isinstance(init[0], np.random.SeedSequence):
        f1, f2, phi = _initial_point(raw, p1, p2, mode, init[0], restart=init[1])
    elif isinstance(init, tuple):
        f1, f2, phi = (np.asarray(x, dtype=complex) for x in init)
    else:
        f1, f2, phi = _initial_point(raw, p1, p2, mode, init)
    p = PrecoderPair(f1, f2, p1, p2)
    ch = compose_effective(raw, phi)
    use_phases = optimize_phases and raw.dims.m > 0

    def objective(point):
        pt = PrecoderPair(point[0], point[1], p1, p2)
        return subproblem_rate(compose_effective(raw, point[2]), pt, mode)

    relaxer = GuardedRelaxer(lambda pt: _feasible_point(pt, p1, p2), objective)
    trace = []
    converged = False
    prev = None
    for _ in range(stop.max_outer):
        aux = update_aux(ch, p, mode)
        p = solve_precoders(ch, aux, p1, p2, mode, stop)
        if use_phases:
            prob = build_mm_problem(raw, p, aux)
            phi = _mm_loop(prob, phi, stop)
        (f1, f2, phi), rate = relaxer.advance((p.f1, p.f2, phi))
        p = PrecoderPair(f1, f2, p1, p2)
        ch = compose_effective(raw, phi)
        trace.append(rate)
        if prev is not None and abs(rate - prev) <= stop.delta:
            converged = True
            break
        prev = rate
    return SolutionRecord(f1=p.f1, f2=p.f2, phi=phi, rates=rate_ej(ch, p),
                          label=mode, trace=trace, iterations=len(trace),
                          converged=converged)


def optimize_ej(raw: RawChannels, p1: float, p2: float, init=0,
                stop: StopRule = StopRule(), restarts: int = 1,
                optimize_phases: bool = True) -> SolutionRecord:
    """Solve the three encoded-jamming subproblems and keep the triple with
    the best achievable EJ rate; ties go to the jammer-free candidate."""
    candidates = {
        m: optimize_subproblem(raw, p1, p2, m, init=init, stop=stop,
                               restarts=restarts, optimize_phases=optimize_phases)
        for m in ("tilde", "hat", "bar")
    }
    best = max(candidates, key=lambda m: candidates[m].rates.r_ej)
    if candidates["bar"].rates.r_ej >= candidates[best].rates.r_ej - 1e-9:
        best = "bar"
    rec = candidates[best]
    return SolutionRecord(f1=rec.f1, f2=rec.f2, phi=rec.phi, rates=rec.rates,
                          label=best, trace=rec.trace, iterations=rec.iterations,
                          converged=rec.converged)
