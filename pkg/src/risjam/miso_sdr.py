"""Single-antenna-receiver optimizer built on semidefinite relaxation.

Rank-one beamformer and reflection designs are lifted to PSD matrix
variables; the concave-over-affine parts are handled by alternating a
scalar reciprocal update against a conic program in the lifted variables.
The conic step is an injected dependency behind a small problem
description (`SdpProblem`): a bundled projected-gradient solver covers
desk scale with no external installations, and a cvxpy-backed adapter can
be swapped in when available.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelSet, RawChannels, compose_effective, random_phases
from .linalg import herm
from .rates import PrecoderPair, rate_ej
from .wmmse import SolutionRecord, StopRule, subproblem_rate

MISO_MODES = ("hat", "tilde", "gn", "bar")


# --- problem description ------------------------------------------------------

@dataclass
class VariableSpec:
    """One PSD matrix variable: either trace-capped or unit-diagonal."""

    n: int
    constraint: str          # "trace_cap" or "unit_diag"
    budget: float = 0.0      # trace cap, when applicable


@dataclass
class LogTerm:
    """weight * log(offset + sum_v tr(coeff[v] X_v)); coefficients PSD."""

    weight: float
    offset: float
    coeff: tuple


@dataclass
class SdpProblem:
    """Concave maximization over PSD variables:

        sum_i w_i log(off_i + sum_v tr(A_iv X_v)) + sum_v tr(L_v X_v) + const

    with per-variable trace caps or unit diagonals. All coefficient
    matrices are Hermitian (log coefficients PSD), making the objective
    concave on the feasible set.
    """

    variables: list
    log_terms: list
    linear: tuple
    constant: float = 0.0

    def value(self, xs) -> float:
        total = self.constant
        for term in self.log_terms:
            total += term.weight * np.log(self._affine(term, xs))
        for lin, x in zip(self.linear, xs):
            total += float(np.real(np.trace(lin @ x)))
        return total

    def _affine(self, term, xs) -> float:
        val = term.offset
        for a, x in zip(term.coeff, xs):
            if a is not None:
                val += float(np.real(np.trace(a @ x)))
        return val

    def gradient(self, xs):
        grads = [lin.copy() for lin in self.linear]
        for term in self.log_terms:
            den = self._affine(term, xs)
            for v, a in enumerate(term.coeff):
                if a is not None:
                    grads[v] += (term.weight / den) * a
        return grads


# --- solvers -------------------------------------------------------------------

def _project_trace_cap(x: np.ndarray, budget: float) -> np.ndarray:
    """Euclidean projection onto {X PSD, tr X <= budget} (eigenvalue clip
    plus a simplex-style shift when the cap binds)."""
    evals, vecs = np.linalg.eigh(herm(x))
    clipped = np.clip(evals, 0.0, None)
    total = clipped.sum()
    if total > budget:
        lo, hi = 0.0, float(np.max(evals))
        for _ in range(100):
            tau = 0.5 * (lo + hi)
            if np.clip(evals - tau, 0.0, None).sum() > budget:
                lo = tau
            else:
                hi = tau
        clipped = np.clip(evals - hi, 0.0, None)
    return (vecs * clipped) @ vecs.conj().T


def _project_unit_diag(x: np.ndarray, iters: int = 6) -> np.ndarray:
    """Feasible retraction onto {PSD, unit diagonal}.

    A few Dykstra sweeps between the cone and the affine set get close to
    the Euclidean projection; the cone-side iterate is then made exactly
    unit-diagonal by a congruence rescaling, which cannot leave the cone.
    (An exact projection is unnecessary: the solver's line search accepts
    candidates by their true objective value, so any feasible map works.)
    """
    n = x.shape[0]
    if n == 1:
        return np.ones((1, 1), dtype=complex)
    if n == 2:
        # exact: the set is {[[1, z], [conj(z), 1]] : |z| <= 1}
        z = 0.5 * (x[0, 1] + np.conj(x[1, 0]))
        if abs(z) > 1.0:
            z = z / abs(z)
        return np.array([[1.0, z], [np.conj(z), 1.0]], dtype=complex)
    p = np.zeros_like(x)
    q = np.zeros_like(x)
    y = herm(x)
    z = y
    for _ in range(iters):
        evals, vecs = np.linalg.eigh(herm(y + p))
        z = (vecs * np.clip(evals, 0.0, None)) @ vecs.conj().T
        p = y + p - z
        y = z + q
        np.fill_diagonal(y, 1.0)
        q = z + q - y
        if np.max(np.abs(np.real(np.diag(z)) - 1.0)) < 1e-9:
            break
    d = np.sqrt(np.clip(np.real(np.diag(z)), 1e-12, None))
    out = herm(z / np.outer(d, d))
    np.fill_diagonal(out, 1.0)
    return out


def _project(prob: SdpProblem, xs):
    out = []
    for spec, x in zip(prob.variables, xs):
        if spec.constraint == "trace_cap":
            out.append(_project_trace_cap(x, spec.budget))
        elif spec.constraint == "unit_diag":
            out.append(_project_unit_diag(x))
        else:
            raise ValueError(f"unknown constraint {spec.constraint!r}")
    return out


class ProjectedGradientSolver:
    """Bundled fallback: spectral projected gradient on the PSD feasible set.

    Barzilai-Borwein steps with a monotone backtracking guard; adequate for
    the desk-scale problems this package targets (variables up to a few
    dozen rows). Accepts an optional warm start and returns
    (variables, objective value).
    """

    name = "projected-gradient"

    def __init__(self, max_iter: int = 400, tol: float = 1e-9):
        self.max_iter = max_iter
        self.tol = tol

    def __call__(self, prob: SdpProblem, warm=None):
        if warm is not None:
            xs = [np.asarray(w, dtype=complex).copy() for w in warm]
        else:
            xs = []
            for spec in prob.variables:
                if spec.constraint == "trace_cap":
                    xs.append((spec.budget / (2.0 * spec.n)) * np.eye(spec.n, dtype=complex))
                else:
                    xs.append(np.eye(spec.n, dtype=complex))
        xs = _project(prob, xs)
        val = prob.value(xs)
        grads = prob.gradient(xs)
        step = 1.0 / max(1.0, max(np.linalg.norm(g) for g in grads))
        stalled = 0
        for _ in range(self.max_iter):
            s = step
            trial = None
            for _ in range(30):
                cand = _project(prob, [x + s * g for x, g in zip(xs, grads)])
                cval = prob.value(cand)
                if cval >= val - 1e-14:
                    trial, tval = cand, cval
                    break
                s *= 0.25
            if trial is None:
                break  # no ascent direction left at this scale
            new_grads = prob.gradient(trial)
            # safeguarded Barzilai-Borwein step from the accepted move
            num = sum(float(np.real(np.vdot(t - x, t - x))) for t, x in zip(trial, xs))
            den = -sum(float(np.real(np.vdot(t - x, ng - g)))
                       for t, x, ng, g in zip(trial, xs, new_grads, grads))
            improvement = tval - val
            xs, val, grads = trial, tval, new_grads
            step = min(max(num / den, 1e-12), 1e6) if den > 1e-30 else min(s * 2.0, 1e6)
            stalled = stalled + 1 if improvement <= self.tol * max(1.0, abs(val)) else 0
            if stalled >= 3:
                break
        return xs, val


class CvxpySolver:
    """Optional adapter delegating the conic step to cvxpy (imported lazily);
    warm starts are accepted for interface compatibility and ignored."""

    name = "cvxpy"

    def __init__(self, solver: str | None = None):
        self.solver = solver

    def __call__(self, prob: SdpProblem, warm=None):
        import cvxpy as cp

        xs = [cp.Variable((spec.n, spec.n), hermitian=True) for spec in prob.variables]
        constraints = []
        for spec, x in zip(prob.variables, xs):
            constraints.append(x >> 0)
            if spec.constraint == "trace_cap":
                constraints.append(cp.real(cp.trace(x)) <= spec.budget)
            else:
                constraints.append(cp.diag(x) == 1)
        objective = prob.constant
        for term in prob.log_terms:
            aff = term.offset
            for a, x in zip(term.coeff, xs):
                if a is not None:
                    aff = aff + cp.real(cp.trace(a @ x))
            objective = objective + term.weight * cp.log(aff)
        for lin, x in zip(prob.linear, xs):
            objective = objective + cp.real(cp.trace(lin @ x))
        cp.Problem(cp.Maximize(objective), constraints).solve(solver=self.solver)
        vals = [herm(np.asarray(x.value, dtype=complex)) for x in xs]
        return vals, prob.value(vals)


# --- lifted channel geometry ---------------------------------------------------

@dataclass
class MisoChannels:
    """Stacked (M+1) x N transmit channels seen through [reflection; direct]."""

    h_u: np.ndarray
    h_e: np.ndarray
    g_u: np.ndarray
    g_e: np.ndarray
    m: int


def stack_miso(raw: RawChannels) -> MisoChannels:
    d = raw.dims
    if d.n_u != 1 or d.n_e != 1:
        raise ValueError("single-antenna optimizer needs n_u = n_e = 1")

    def stacked(direct, refl, through):
        # reflection rows then the direct row, so the lifted vector is [w; 1]
        return np.vstack([np.diag(refl[0]) @ through, direct])

    return MisoChannels(
        h_u=stacked(raw.h_bu, raw.h_ru, raw.h_br),
        h_e=stacked(raw.h_be, raw.h_re, raw.h_br),
        g_u=stacked(raw.g_cu, raw.g_ru, raw.g_cr),
        g_e=stacked(raw.g_ce, raw.g_re, raw.g_cr),
        m=d.m,
    )


def _outer(v: np.ndarray) -> np.ndarray:
    v = v.reshape(-1, 1)
    return v @ v.conj().T


def effective_rows(mc: MisoChannels, w_bar: np.ndarray):
    """Row channels h_k^H = w_bar^H H_k for each of the four links."""
    wc = w_bar.conj()
    return {name: (wc @ getattr(mc, name)).reshape(1, -1)
            for name in ("h_u", "h_e", "g_u", "g_e")}


def beamforming_gram(mc: MisoChannels, w_bar: np.ndarray):
    rows = effective_rows(mc, w_bar)
    return {k: _outer(rows[k].conj().T) for k in rows}


def phase_gram(mc: MisoChannels, f1: np.ndarray, f2: np.ndarray):
    return {
        "h_u": _outer(mc.h_u @ f1), "h_e": _outer(mc.h_e @ f1),
        "g_u": _outer(mc.g_u @ f2), "g_e": _outer(mc.g_e @ f2),
    }


# --- problem builders ----------------------------------------------------------

def build_beamforming_sdp(mc: MisoChannels, w_bar: np.ndarray, mode: str,
                          t_values: dict, p1: float, p2: float) -> SdpProblem:
    """Lifted beamformer problem at fixed reflection and fixed reciprocal
    auxiliaries; jointly concave in the two covariance variables."""
    g = beamforming_gram(mc, w_bar)
    n_b, n_c = mc.h_u.shape[1], mc.g_u.shape[1]
    variables = [VariableSpec(n_b, "trace_cap", p1), VariableSpec(n_c, "trace_cap", p2)]
    t_e = t_values["e"]
    lin1 = -t_e * g["h_e"]
    lin2 = -t_e * g["g_e"]
    const = np.log(t_e) - t_e + 1.0
    if mode == "hat":
        log_terms = [LogTerm(1.0, 1.0, (g["h_u"], None)),
                     LogTerm(1.0, 1.0, (None, g["g_e"]))]
    elif mode == "tilde":
        log_terms = [LogTerm(1.0, 1.0, (g["h_u"], g["g_u"]))]
    elif mode == "gn":
        t_u = t_values["u"]
        log_terms = [LogTerm(1.0, 1.0, (g["h_u"], g["g_u"])),
                     LogTerm(1.0, 1.0, (None, g["g_e"]))]
        lin2 = lin2 - t_u * g["g_u"]
        const += np.log(t_u) - t_u + 1.0
    elif mode == "bar":
        log_terms = [LogTerm(1.0, 1.0, (g["h_u"], None))]
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return SdpProblem(variables, log_terms, (lin1, lin2), const)


def build_phase_sdp(mc: MisoChannels, f1: np.ndarray, f2: np.ndarray, mode: str,
                    t_values: dict) -> SdpProblem:
    """Lifted reflection problem at fixed beamformers: one unit-diagonal PSD
    variable of size M+1."""
    g = phase_gram(mc, f1, f2)
    n = mc.m + 1
    variables = [VariableSpec(n, "unit_diag")]
    t_e = t_values["e"]
    lin = -t_e * (g["h_e"] + g["g_e"])
    const = np.log(t_e) - t_e * 1.0 + 1.0
    if mode == "hat":
        log_terms = [LogTerm(1.0, 1.0, (g["h_u"],)), LogTerm(1.0, 1.0, (g["g_e"],))]
    elif mode == "tilde":
        log_terms = [LogTerm(1.0, 1.0, (g["h_u"] + g["g_u"],))]
    elif mode == "gn":
        t_u = t_values["u"]
        log_terms = [LogTerm(1.0, 1.0, (g["h_u"] + g["g_u"],)),
                     LogTerm(1.0, 1.0, (g["g_e"],))]
        lin = lin - t_u * g["g_u"]
        const += np.log(t_u) - t_u + 1.0
    elif mode == "bar":
        log_terms = [LogTerm(1.0, 1.0, (g["h_u"],))]
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return SdpProblem(variables, log_terms, (lin,), const)


def update_t(mc: MisoChannels, w_bar: np.ndarray, r1: np.ndarray, r2: np.ndarray,
             which: str, f1: np.ndarray | None = None, f2: np.ndarray | None = None,
             w_mat: np.ndarray | None = None) -> float:
    """Reciprocal of the relevant interference-plus-noise affine term.

    which = "e"/"u" use the lifted beamformer grams at (r1, r2); "We"/"Wu"
    use the lifted reflection grams at (f1, f2) evaluated on w_mat.
    """
    if which in ("e", "u"):
        g = beamforming_gram(mc, w_bar)
        if which == "e":
            aff = 1.0 + np.real(np.trace(g["h_e"] @ r1)) + np.real(np.trace(g["g_e"] @ r2))
        else:
            aff = 1.0 + np.real(np.trace(g["g_u"] @ r2))
    elif which in ("We", "Wu"):
        g = phase_gram(mc, f1, f2)
        if which == "We":
            aff = 1.0 + np.real(np.trace((g["h_e"] + g["g_e"]) @ w_mat))
        else:
            aff = 1.0 + np.real(np.trace(g["g_u"] @ w_mat))
    else:
        raise ValueError(f"unknown t selector {which!r}")
    return 1.0 / float(aff)


# --- rank-one recovery ----------------------------------------------------------

def gaussian_randomization(mat: np.ndarray, count: int, constraint: str, seed,
                           objective, budget: float | None = None) -> np.ndarray:
    """Recover a feasible vector from a lifted PSD solution.

    Rank-one inputs short-circuit to the scaled top eigenvector. Otherwise
    samples from CN(0, mat) are mapped to the feasible set (unit-modulus
    phases with the last entry normalized out, or trace-matched/full-budget
    power rescalings) and the sample with the best true objective wins.
    """
    if count < 1:
        raise ValueError("sample count must be >= 1")
    mat = herm(np.asarray(mat, dtype=complex))
    n = mat.shape[0]
    evals, vecs = np.linalg.eigh(mat)
    evals = np.clip(evals, 0.0, None)
    top = evals[-1]

    def phase_vec(x):
        x = x * np.conj(x[-1] / abs(x[-1])) if abs(x[-1]) > 0 else x
        mag = np.abs(x)
        return np.where(mag > 0, x / np.where(mag > 0, mag, 1.0), 1.0)[:-1]

    if top <= 0.0:
        if constraint == "power":
            return np.zeros(n, dtype=complex)
        return np.ones(n - 1, dtype=complex)

    second = evals[-2] if n > 1 else 0.0
    if second <= 1e-6 * top:
        lead = vecs[:, -1]
        if constraint == "phase":
            return phase_vec(lead)
        power = min(float(np.sum(evals)), budget)
        return np.sqrt(power) * lead

    rng = np.random.default_rng(seed)
    root = vecs * np.sqrt(evals)
    draws = root @ ((rng.standard_normal((n, count)) + 1j * rng.standard_normal((n, count))) / np.sqrt(2.0))
    candidates = []
    if constraint == "phase":
        for k in range(count):
            candidates.append(phase_vec(draws[:, k]))
        candidates.append(phase_vec(vecs[:, -1]))
    elif constraint == "power":
        trace_power = min(float(np.sum(evals)), budget)
        for k in range(count):
            x = draws[:, k]
            norm_sq = float(np.real(np.vdot(x, x)))
            if norm_sq <= 0:
                continue
            candidates.append(np.sqrt(trace_power / norm_sq) * x)
            candidates.append(np.sqrt(budget / norm_sq) * x)
        candidates.append(np.sqrt(trace_power) * vecs[:, -1])
    else:
        raise ValueError(f"unknown constraint {constraint!r}")
    scores = [objective(c) for c in candidates]
    return candidates[int(np.argmax(scores))]


# --- alternating loop -----------------------------------------------------------

DEFAULT_SOLVER = ProjectedGradientSolver()


def _alternate_t(build, solve, warm_xs, updates, max_rounds: int = 20,
                 tol: float = 1e-6):
    """Alternate the conic solve against the reciprocal updates, seeding the
    reciprocals from a warm iterate (starting them at fixed constants can
    create a spurious all-zero fixed point)."""
    xs = warm_xs
    t_vals = updates(xs)
    val = None
    for _ in range(max_rounds):
        xs, new_val = solve(build(t_vals), warm=xs)
        t_vals = updates(xs)
        if val is not None and abs(new_val - val) <= tol * max(1.0, abs(val)):
            val = new_val
            break
        val = new_val
    return xs, t_vals, val


def miso_subproblem(raw: RawChannels, p1: float, p2: float, mode: str,
                    solver=DEFAULT_SOLVER, init=0, stop: StopRule | None = None,
                    randomization_count: int = 1000, optimize_phases: bool = True,
                    restarts: int = 1):
    """Alternate lifted beamformer and reflection solves for one objective.

    Returns the best iterate seen (the rank-one recovery step is a
    heuristic, so the running best rather than the last iterate is kept).
    Restarts mirror the MIMO optimizer: the second start silences the
    jammer initially, later ones draw random starting powers.
    """
    if mode not in MISO_MODES:
        raise ValueError(f"mode must be one of {MISO_MODES}")
    stop = stop or StopRule(delta=1e-4, max_outer=15)
    if restarts > 1:
        seed = init if isinstance(init, np.random.SeedSequence) else np.random.SeedSequence(init)
        runs = [miso_subproblem(raw, p1, p2, mode, solver, init=(s, r), stop=stop,
                                randomization_count=randomization_count,
                                optimize_phases=optimize_phases, restarts=1)
                for r, s in enumerate(seed.spawn(restarts))]
        return max(runs, key=lambda rec: rec.trace[-1])

    restart = 0
    if isinstance(init, tuple):
        init, restart = init
    mc = stack_miso(raw)
    d = raw.dims
    rng_seed = np.random.SeedSequence(init) if isinstance(init, (int, np.integer)) else init
    phase_seed, sample_seed = rng_seed.spawn(2)
    start_rng = np.random.default_rng(phase_seed)
    w = random_phases(d.m, start_rng)
    w_bar = np.concatenate([w, [1.0 + 0j]])
    f1 = np.sqrt(p1 / d.n_b) * np.ones(d.n_b, dtype=complex)
    f2 = np.sqrt(p2 / d.n_c) * np.ones(d.n_c, dtype=complex)
    if restart == 1:
        f2 = np.zeros(d.n_c, dtype=complex)
    elif restart >= 2:
        for vec, budget in ((f1, p1), (f2, p2)):
            noise = start_rng.standard_normal(vec.shape[0]) + 1j * start_rng.standard_normal(vec.shape[0])
            vec[:] = noise * np.sqrt(start_rng.uniform(0.0, 1.0) * budget) / np.linalg.norm(noise)
    if mode == "bar":
        f2 = np.zeros(d.n_c, dtype=complex)
    sample_rng = np.random.default_rng(sample_seed)

    def true_rate(f1v, f2v, w_bar_v):
        phi = np.conj(w_bar_v[:-1])
        ch = compose_effective(raw, phi)
        p = PrecoderPair(f1v.reshape(-1, 1), f2v.reshape(-1, 1), p1, p2)
        return subproblem_rate(ch, p, mode)

    best = (f1, f2, w_bar)
    best_rate = true_rate(*best)
    trace = [best_rate]
    converged = False
    prev = best_rate
    for _ in range(stop.max_outer):
        # beamformer step at fixed reflection
        g = beamforming_gram(mc, w_bar)

        def t_updates(xs):
            t = {"e": update_t(mc, w_bar, xs[0], xs[1], "e")}
            if mode == "gn":
                t["u"] = update_t(mc, w_bar, xs[0], xs[1], "u")
            return t

        (r1, r2), _, _ = _alternate_t(
            lambda t: build_beamforming_sdp(mc, w_bar, mode, t, p1, p2),
            solver, [_outer(f1), _outer(f2)], t_updates)

        def f1_obj(v):
            return true_rate(v, f2, w_bar)

        f1 = gaussian_randomization(r1, randomization_count, "power",
                                    sample_rng.integers(2 ** 63), f1_obj, budget=p1)
        if mode != "bar":
            def f2_obj(v):
                return true_rate(f1, v, w_bar)

            f2 = gaussian_randomization(r2, randomization_count, "power",
                                        sample_rng.integers(2 ** 63), f2_obj, budget=p2)

        # reflection step at fixed beamformers
        if optimize_phases and d.m > 0:
            def tw_updates(xs):
                t = {"e": update_t(mc, w_bar, None, None, "We", f1=f1.reshape(-1, 1),
                                   f2=f2.reshape(-1, 1), w_mat=xs[0])}
                if mode == "gn":
                    t["u"] = update_t(mc, w_bar, None, None, "Wu", f1=f1.reshape(-1, 1),
                                      f2=f2.reshape(-1, 1), w_mat=xs[0])
                return t

            (w_mat,), _, _ = _alternate_t(
                lambda t: build_phase_sdp(mc, f1.reshape(-1, 1), f2.reshape(-1, 1), mode, t),
                solver, [_outer(w_bar)], tw_updates)

            def w_obj(wv):
                return true_rate(f1, f2, np.concatenate([wv, [1.0 + 0j]]))

            w = gaussian_randomization(w_mat, randomization_count, "phase",
                                       sample_rng.integers(2 ** 63), w_obj)
            w_bar = np.concatenate([w, [1.0 + 0j]])

        rate = true_rate(f1, f2, w_bar)
        if rate > best_rate:
            best, best_rate = (f1, f2, w_bar), rate
        trace.append(best_rate)
        if abs(rate - prev) <= stop.delta:
            converged = True
            break
        prev = rate

    f1, f2, w_bar = best
    phi = np.conj(w_bar[:-1])
    ch = compose_effective(raw, phi)
    pair = PrecoderPair(f1.reshape(-1, 1), f2.reshape(-1, 1), p1, p2)
    return SolutionRecord(f1=pair.f1, f2=pair.f2, phi=phi, rates=rate_ej(ch, pair),
                          label=mode, trace=trace, iterations=len(trace) - 1,
                          converged=converged)


def alternating_miso(raw: RawChannels, p1: float, p2: float, scheme: str = "ej",
                     solver=DEFAULT_SOLVER, init=0, stop: StopRule | None = None,
                     randomization_count: int = 1000, optimize_phases: bool = True,
                     restarts: int = 1) -> SolutionRecord:
    """Full single-antenna-receiver design.

    scheme "ej" runs the two encoded-jamming subproblems plus the silent
    jammer bound and keeps the best achievable EJ rate; "gn" and "bar" run
    their single subproblem.
    """
    if scheme == "gn":
        return miso_subproblem(raw, p1, p2, "gn", solver, init, stop,
                               randomization_count, optimize_phases, restarts)
    if scheme == "bar":
        return miso_subproblem(raw, p1, p2, "bar", solver, init, stop,
                               randomization_count, optimize_phases, restarts)
    if scheme != "ej":
        raise ValueError("scheme must be 'ej', 'gn' or 'bar'")
    candidates = {m: miso_subproblem(raw, p1, p2, m, solver, init, stop,
                                     randomization_count, optimize_phases, restarts)
                  for m in ("hat", "tilde", "bar")}
    best = max(candidates, key=lambda m: candidates[m].rates.r_ej)
    if candidates["bar"].rates.r_ej >= candidates[best].rates.r_ej - 1e-9:
        best = "bar"
    rec = candidates[best]
    return SolutionRecord(f1=rec.f1, f2=rec.f2, phi=rec.phi, rates=rec.rates,
                          label=best, trace=rec.trace, iterations=rec.iterations,
                          converged=rec.converged)
