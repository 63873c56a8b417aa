"""Command-line entry points: simulate, pareto, asymptotic, verify, oracle."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import harness
from .asymptotics import dominance_sweep
from .channel import Dims, compose_effective, iid_channels
from .harness import ScenarioConfig, apply_overrides, load_config
from .isac import (IsacProblem, pareto_sweep, sample_pilots, sample_target_covariance,
                   waterfilling_sensing_value)
from .wmmse import StopRule


def _out_dir(path_str: str | None) -> Path:
    out = Path(path_str or "results")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write(out: Path, name: str, text: str) -> None:
    (out / name).write_text(text)
    print(f"wrote {out / name}")


def cmd_simulate(args) -> int:
    cfg = load_config(args.config) if args.config else ScenarioConfig()
    cfg = apply_overrides(cfg, seed=args.seed, trials=args.trials)
    rows, solutions = harness.run_scenario(cfg, persist_solutions=args.persist_solutions)
    out = _out_dir(args.out)
    _write(out, "results.csv", harness.rows_to_csv(rows))
    _write(out, "metadata.txt", harness.metadata_text(cfg))
    if args.persist_solutions:
        arrays = {}
        for idx, (f1, f2, phi) in solutions.items():
            arrays[f"row{idx}_f1"] = f1
            arrays[f"row{idx}_f2"] = f2
            arrays[f"row{idx}_phi"] = phi
        np.savez(out / "solutions.npz", **arrays)
        print(f"wrote {out / 'solutions.npz'}")
    for entry in harness.summarize(rows):
        extra = f" sensing {entry['mean_sensing']:.4f}" if "mean_sensing" in entry else ""
        print(f"{entry['scheme']:<10} sweep={entry['sweep_value']:<8g} "
              f"mean {entry['mean_nats']:.4f} ± {entry['stderr_nats']:.4f} nats"
              f" (n={entry['n']}){extra}")
    return 0


def cmd_pareto(args) -> int:
    cfg = load_config(args.config) if args.config else ScenarioConfig(experiment="isac")
    cfg = apply_overrides(cfg, seed=args.seed, trials=args.trials)
    alphas = np.round(np.arange(0.0, 1.0 + 1e-9, args.alpha_step), 10)
    stop = cfg.stop_rule()
    lines = ["scheme,alpha1,trial,rate_nats,sensing_mi_nats"]
    for trial in range(cfg.trials):
        ts = np.random.SeedSequence(entropy=cfg.seed, spawn_key=(0, trial))
        seeds = ts.spawn(3)
        dims = Dims(cfg.n_b, cfg.n_c, cfg.n_u, cfg.n_e, 0)
        raw = iid_channels(dims, seeds[0])
        ch = compose_effective(raw, np.zeros(0))
        s1 = sample_pilots(dims.n_b, cfg.pilot_len, seeds[1])
        r_hs = sample_target_covariance(dims.n_b, seeds[1].spawn(1)[0])
        p = 10.0 ** (cfg.p_db / 10.0)
        template = IsacProblem(ch, s1, r_hs, p, p, 1.0, 0.0)
        for scheme in ("ej", "gn"):
            points = pareto_sweep(template, alphas, scheme=scheme, init=seeds[2],
                                  stop=stop, restarts=cfg.restarts)
            for alpha1, r_c, r_s in points:
                lines.append(f"{scheme},{alpha1!r},{trial},{r_c!r},{r_s!r}")
    out = _out_dir(args.out)
    _write(out, "pareto.csv", "\n".join(lines) + "\n")
    _write(out, "metadata.txt", harness.metadata_text(cfg, {"alpha_step": args.alpha_step}))
    return 0


def cmd_asymptotic(args) -> int:
    m_list = [int(tok) for tok in args.m_list.split(",")]
    lines = ["m,n_u,trials,p_hat,stderr,aligned_first_mean,g2_sq_mean"]
    for est in dominance_sweep(m_list, n_u=args.n_u, trials=args.trials, seed=args.seed):
        lines.append(f"{est.m},{est.n_u},{est.trials},{est.p_hat!r},{est.stderr!r},"
                     f"{est.aligned_first_mean!r},{est.g2_sq_mean!r}")
        print(f"M={est.m:5d}  p_hat={est.p_hat:.4f} ± {est.stderr:.4f}  "
              f"aligned mean {est.aligned_first_mean:.2f}")
    out = _out_dir(args.out)
    _write(out, "asymptotic.csv", "\n".join(lines) + "\n")
    return 0


def _verify_checks():
    """Fast invariant suite; yields (name, passed) pairs."""
    from .channel import Topology, path_loss, random_phases
    from .rates import PrecoderPair, gn_rate_forms, lemma1_gap, optimal_receiver, optimal_weight
    from .wmmse import (MmProblem, build_mm_problem, mm_phase_step, optimize_subproblem,
                        power_bisect, update_aux)

    rng = np.random.default_rng(0)
    topo = Topology()

    yield "path-loss monotone", all(
        path_loss(d1, 2.2, topo) > path_loss(d1 + 1.0, 2.2, topo)
        for d1 in rng.uniform(1.0, 100.0, 50)
    )

    ok = True
    for k in range(100):
        raw = iid_channels(Dims(2, 3, 2, 2, 0), 1000 + k)
        ch = compose_effective(raw, np.zeros(0))
        f1 = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        f2 = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        p = PrecoderPair(f1, f2, 100.0, 100.0)
        a, b = gn_rate_forms(ch, p)
        ok &= abs(a - b) <= 1e-9 * max(1.0, abs(a))
    yield "rate form equivalence (100 draws)", ok

    ok = True
    for k in range(100):
        pdim, qdim = int(rng.integers(1, 5)), int(rng.integers(1, 5))
        h = rng.standard_normal((pdim, qdim)) + 1j * rng.standard_normal((pdim, qdim))
        f = rng.standard_normal((qdim, qdim)) + 1j * rng.standard_normal((qdim, qdim))
        a = rng.standard_normal((qdim, qdim)) + 1j * rng.standard_normal((qdim, qdim))
        r = a @ a.conj().T + 0.3 * np.eye(qdim)
        b = rng.standard_normal((pdim, pdim)) + 1j * rng.standard_normal((pdim, pdim))
        n = b @ b.conj().T + 0.3 * np.eye(pdim)
        u = optimal_receiver(h, f, r, n)
        w = optimal_weight(h, f, r, n)
        ok &= abs(lemma1_gap(h, f, r, n, w, u)) <= 1e-8
    yield "identity stationarity (100 draws)", ok

    ok = True
    raw = iid_channels(Dims(2, 2, 2, 2, 6), 5)
    phi = random_phases(6, 3)
    ch = compose_effective(raw, phi)
    p = PrecoderPair(np.eye(2, dtype=complex), np.eye(2, dtype=complex), 4.0, 4.0)
    for mode in ("tilde", "hat", "gn"):
        aux = update_aux(ch, p, mode)
        prob = build_mm_problem(raw, p, aux)
        cur = phi
        val = prob.value(cur)
        for _ in range(200):
            cur = mm_phase_step(prob, cur)
            new = prob.value(cur)
            ok &= new <= val + 1e-9 * max(1.0, abs(val))
            ok &= np.max(np.abs(np.abs(cur) - 1.0)) <= 1e-12
            val = new
    yield "majorized phase descent + unit modulus", ok

    ok = True
    for k in range(100):
        n = int(rng.integers(1, 5))
        a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        a = a @ a.conj().T
        rhs = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        budget = float(rng.uniform(0.1, 5.0))
        f, lam = power_bisect(a, rhs, budget)
        used = float(np.real(np.trace(f @ f.conj().T)))
        ok &= used <= budget * (1 + 1e-9)
        ok &= abs(lam * (used - budget)) <= 1e-6 * budget
    yield "multiplier bisection slackness (100 draws)", ok

    ok = True
    for k in range(5):
        raw = iid_channels(Dims(2, 2, 2, 2, 4), 40 + k)
        rec = optimize_subproblem(raw, 4.0, 4.0, "tilde", init=k,
                                  stop=StopRule(max_outer=60))
        trace = np.array(rec.trace)
        ok &= bool(np.all(np.diff(trace) >= -1e-7))
    yield "monotone ascent (5 runs)", ok


def cmd_verify(_args) -> int:
    failures = 0
    for name, passed in _verify_checks():
        print(f"{'PASS' if passed else 'FAIL'}  {name}")
        failures += 0 if passed else 1
    return 1 if failures else 0


def cmd_oracle(args) -> int:
    """Recompute the brute-force reference values the test suite relies on."""
    from .wmmse import optimize_subproblem

    out = {}
    # scalar grid search for the no-surface Gaussian-noise problem
    grid = {}
    for seed in range(5):
        raw = iid_channels(Dims(1, 1, 1, 1, 0), seed)
        h1 = abs(raw.h_bu[0, 0]) ** 2
        h2 = abs(raw.g_cu[0, 0]) ** 2
        g1 = abs(raw.h_be[0, 0]) ** 2
        g2 = abs(raw.g_ce[0, 0]) ** 2
        q = np.linspace(0.0, 10.0, 200)
        q1, q2 = np.meshgrid(q, q, indexing="ij")
        rate = np.log(1 + q1 * h1 / (1 + q2 * h2)) - np.log(1 + q1 * g1 / (1 + q2 * g2))
        grid[str(seed)] = float(np.maximum(rate, 0.0).max())
    out["scalar_gn_grid_max_p10"] = grid

    # torus random search for a small phase problem
    from .rates import PrecoderPair
    from .wmmse import build_mm_problem, update_aux

    raw = iid_channels(Dims(2, 2, 2, 2, 2), 123)
    p = PrecoderPair(np.eye(2, dtype=complex), np.eye(2, dtype=complex), 4.0, 4.0)
    ch = compose_effective(raw, np.ones(2, dtype=complex))
    prob = build_mm_problem(raw, p, update_aux(ch, p, "tilde"))
    rng = np.random.default_rng(0)
    thetas = rng.uniform(0, 2 * np.pi, size=(10 ** 6, 2))
    phis = np.exp(1j * thetas)
    vals = (np.einsum("km,mn,kn->k", phis.conj(), prob.xi, phis).real
            + 2 * np.real(phis.conj() @ np.conj(prob.d)))
    out["phase_random_search_min_m2_seed123"] = float(vals.min())

    # sensing water-filling optimum for one instance
    s1 = sample_pilots(4, 16, 50)
    r_hs = sample_target_covariance(4, 90)
    out["sensing_waterfill_nb4_t16_p10"] = waterfilling_sensing_value(s1, r_hs, 10.0)

    path = _out_dir(args.out) / "oracles.json"
    path.write_text(json.dumps(out, indent=2, sort_keys=True) + "\n")
    print(f"wrote {path}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="risjam",
                                     description="secrecy-rate optimization experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a Monte Carlo scenario")
    sim.add_argument("--config", help="key=value config file")
    sim.add_argument("--seed", type=int)
    sim.add_argument("--trials", type=int)
    sim.add_argument("--out", help="output directory (default ./results)")
    sim.add_argument("--persist-solutions", action="store_true")
    sim.set_defaults(func=cmd_simulate)

    par = sub.add_parser("pareto", help="trace the secrecy/sensing trade-off")
    par.add_argument("--config", help="key=value config file")
    par.add_argument("--alpha-step", type=float, default=0.01)
    par.add_argument("--seed", type=int)
    par.add_argument("--trials", type=int)
    par.add_argument("--out")
    par.set_defaults(func=cmd_pareto)

    asym = sub.add_parser("asymptotic", help="reflected-link dominance versus surface size")
    asym.add_argument("--m-list", default="4,16,64,256,1024")
    asym.add_argument("--trials", type=int, default=1000)
    asym.add_argument("--n-u", type=int, default=1)
    asym.add_argument("--seed", type=int, default=0)
    asym.add_argument("--out")
    asym.set_defaults(func=cmd_asymptotic)

    ver = sub.add_parser("verify", help="run the fast invariant suite")
    ver.set_defaults(func=cmd_verify)

    orc = sub.add_parser("oracle", help="recompute brute-force reference values")
    orc.add_argument("--out")
    orc.set_defaults(func=cmd_oracle)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
