"""Monte Carlo experiment runner with common-random-number scheme comparison.

Every trial draws one channel realization and runs all requested schemes on
it, so scheme differences are paired. Results go to a comma-separated table
with a fixed column order plus a key=value metadata sidecar; reruns with
the same config and seed are byte-identical apart from the wall-time
column.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, fields, replace

import numpy as np

from . import isac as isac_mod
from .channel import (PRNG_NAME, Dims, Topology, build_scenario, compose_effective,
                      dbm_to_watts, iid_channels, normalized_budget, random_phases)
from .miso_sdr import alternating_miso
from .rates import PrecoderPair, rate_ej, sensing_mi
from .wmmse import StopRule, optimize_ej, optimize_subproblem

SCHEMA_VERSION = 1
SCHEMES = ("EJ", "GN", "GN-Ran", "No-jammer")
EXPERIMENTS = ("miso", "mimo", "mimo-no-ris", "isac", "asymptotic")

COLUMNS = (
    "schema_version", "experiment", "scheme", "sweep_param", "sweep_value",
    "trial", "trial_seed", "channel_hash", "rate_nats", "rate_bits",
    "sensing_mi_nats", "branch", "iterations", "converged", "wall_time_s",
    "error",
)
TIMING_COLUMNS = ("wall_time_s",)
LN2 = float(np.log(2.0))


@dataclass
class ScenarioConfig:
    """Flat description of one experiment; every field can come from a
    key=value config file or a CLI override."""

    experiment: str = "mimo"
    n_b: int = 2
    n_c: int = 4
    n_u: int = 2
    n_e: int = 2
    m: int = 16
    trials: int = 50
    seed: int = 0
    schemes: tuple = ("EJ", "GN")
    sweep_param: str = "none"     # none | p_dbm | p_db | n_u | n_e | m
    sweep_values: tuple = ()
    p_dbm: float = 20.0           # geometry experiments (per transmitter)
    noise_dbm: float = -100.0
    p_db: float = 10.0            # iid-channel experiments, normalized noise
    channel_model: str = "geometry"   # geometry | iid
    rician_beta: float = 3.0
    alpha1: float = 0.5           # fixed-weight isac runs
    pilot_len: int = 16
    delta: float = 1e-4
    max_outer: int = 200
    restarts: int = 1
    m_list: tuple = (4, 16, 64, 256, 1024)

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"experiment must be one of {EXPERIMENTS}")
        for s in self.schemes:
            if s not in SCHEMES:
                raise ValueError(f"unknown scheme {s!r}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")

    def stop_rule(self) -> StopRule:
        return StopRule(delta=self.delta, max_outer=self.max_outer)


def _parse_value(text: str):
    text = text.strip()
    if "," in text:
        return tuple(_parse_value(tok) for tok in text.split(",") if tok.strip())
    for caster in (int, float):
        try:
            return caster(text)
        except ValueError:
            pass
    if text.lower() in ("true", "false"):
        return text.lower() == "true"
    return text


def load_config(path) -> ScenarioConfig:
    """Parse a flat key=value config file ('#' starts a comment)."""
    values = {}
    known = {f.name for f in fields(ScenarioConfig)}
    with open(path) as fh:
        for line_no, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{line_no}: expected key = value")
            key, text = (part.strip() for part in line.split("=", 1))
            if key not in known:
                raise ValueError(f"{path}:{line_no}: unknown key {key!r}")
            parsed = _parse_value(text)
            if key in ("schemes", "sweep_values", "m_list") and not isinstance(parsed, tuple):
                parsed = (parsed,)
            values[key] = parsed
    return ScenarioConfig(**values)


def apply_overrides(cfg: ScenarioConfig, **overrides) -> ScenarioConfig:
    overrides = {k: v for k, v in overrides.items() if v is not None}
    return replace(cfg, **overrides) if overrides else cfg


@dataclass
class ResultRow:
    experiment: str
    scheme: str
    sweep_param: str
    sweep_value: float
    trial: int
    trial_seed: int
    channel_hash: str
    rate_nats: float
    sensing_mi_nats: float | None
    branch: str
    iterations: int
    converged: bool
    wall_time_s: float
    error: str = ""

    def as_record(self) -> dict:
        rate_bits = self.rate_nats / LN2 if np.isfinite(self.rate_nats) else float("nan")
        return {
            "schema_version": SCHEMA_VERSION,
            "experiment": self.experiment,
            "scheme": self.scheme,
            "sweep_param": self.sweep_param,
            "sweep_value": _fmt(self.sweep_value),
            "trial": self.trial,
            "trial_seed": self.trial_seed,
            "channel_hash": self.channel_hash,
            "rate_nats": _fmt(self.rate_nats),
            "rate_bits": _fmt(rate_bits),
            "sensing_mi_nats": "" if self.sensing_mi_nats is None else _fmt(self.sensing_mi_nats),
            "branch": self.branch,
            "iterations": self.iterations,
            "converged": int(self.converged),
            "wall_time_s": f"{self.wall_time_s:.3f}",
            "error": self.error,
        }


def _fmt(x) -> str:
    return repr(float(x))


def _trial_seed_sequence(cfg: ScenarioConfig, sweep_idx: int, trial: int):
    return np.random.SeedSequence(entropy=cfg.seed, spawn_key=(sweep_idx, trial))


def _dims_for(cfg: ScenarioConfig, sweep_value) -> Dims:
    kw = dict(n_b=cfg.n_b, n_c=cfg.n_c, n_u=cfg.n_u, n_e=cfg.n_e, m=cfg.m)
    if cfg.sweep_param in ("n_u", "n_e", "m"):
        kw[cfg.sweep_param] = int(sweep_value)
    if cfg.experiment in ("mimo-no-ris", "isac"):
        kw["m"] = 0
    if cfg.experiment == "miso":
        kw["n_u"] = kw["n_e"] = 1
    return Dims(**kw)


def _budgets_for(cfg: ScenarioConfig, sweep_value) -> float:
    if cfg.channel_model == "geometry":
        p_dbm = float(sweep_value) if cfg.sweep_param == "p_dbm" else cfg.p_dbm
        return dbm_to_watts(p_dbm)
    p_db = float(sweep_value) if cfg.sweep_param == "p_db" else cfg.p_db
    return 10.0 ** (p_db / 10.0)


def _build_channels(cfg: ScenarioConfig, dims: Dims, seed_seq):
    if cfg.channel_model == "geometry":
        topo = Topology(rician_beta=cfg.rician_beta)
        return build_scenario(topo, dims, cfg.noise_dbm, seed_seq)
    return iid_channels(dims, seed_seq)


def _run_scheme_mimo(scheme, raw, p, cfg, init_seq):
    stop = cfg.stop_rule()
    if scheme == "EJ":
        return optimize_ej(raw, p, p, init=init_seq, stop=stop, restarts=cfg.restarts)
    if scheme == "GN":
        return optimize_subproblem(raw, p, p, "gn", init=init_seq, stop=stop,
                                   restarts=cfg.restarts)
    if scheme == "GN-Ran":
        return optimize_subproblem(raw, p, p, "gn", init=init_seq, stop=stop,
                                   restarts=cfg.restarts, optimize_phases=False)
    if scheme == "No-jammer":
        return optimize_subproblem(raw, p, p, "bar", init=init_seq, stop=stop,
                                   restarts=cfg.restarts)
    raise ValueError(scheme)


def _run_scheme_miso(scheme, raw, p, cfg, init_seq):
    stop = StopRule(delta=cfg.delta, max_outer=min(cfg.max_outer, 15))
    kw = dict(init=init_seq, stop=stop, restarts=cfg.restarts, randomization_count=200)
    if scheme == "EJ":
        return alternating_miso(raw, p, p, "ej", **kw)
    if scheme == "GN":
        return alternating_miso(raw, p, p, "gn", **kw)
    if scheme == "GN-Ran":
        return alternating_miso(raw, p, p, "gn", optimize_phases=False, **kw)
    if scheme == "No-jammer":
        return alternating_miso(raw, p, p, "bar", **kw)
    raise ValueError(scheme)


def _scheme_rate(scheme, record) -> float:
    if scheme in ("EJ",):
        return record.rates.r_ej
    if scheme in ("GN", "GN-Ran"):
        return record.rates.r_gn
    return record.rates.r_bar


def run_scenario(cfg: ScenarioConfig, persist_solutions: bool = False):
    """Run the full sweep x trial x scheme grid.

    Returns (rows, solutions): solutions maps a row index to the
    (f1, f2, phi) triple when persistence is requested. Optimizer failures
    are recorded as flagged rows and do not stop the run.
    """
    if cfg.experiment == "asymptotic":
        raise ValueError("asymptotic experiments have their own runner; see cli")
    sweep_values = cfg.sweep_values or (0.0,)
    rows = []
    solutions = {}
    for sweep_idx, sweep_value in enumerate(sweep_values):
        dims = _dims_for(cfg, sweep_value)
        p = _budgets_for(cfg, sweep_value)
        for trial in range(cfg.trials):
            ts = _trial_seed_sequence(cfg, sweep_idx, trial)
            seeds = ts.spawn(2 + len(cfg.schemes))
            raw = _build_channels(cfg, dims, seeds[0])
            chash = raw.content_hash()
            extra = {}
            if cfg.experiment == "isac":
                extra["s1"] = isac_mod.sample_pilots(dims.n_b, cfg.pilot_len, seeds[1])
                extra["r_hs"] = isac_mod.sample_target_covariance(dims.n_b, seeds[1].spawn(1)[0])
            for scheme_idx, scheme in enumerate(cfg.schemes):
                row, sol = _run_one(cfg, scheme, raw, p, dims, seeds[2 + scheme_idx],
                                    sweep_value, trial, ts, chash, extra)
                rows.append(row)
                if persist_solutions and sol is not None:
                    solutions[len(rows) - 1] = sol
    return rows, solutions


def _run_one(cfg, scheme, raw, p, dims, init_seq, sweep_value, trial, ts, chash, extra):
    seed_id = int(ts.generate_state(1, np.uint64)[0])
    t0 = time.perf_counter()
    try:
        if cfg.experiment == "isac":
            prob = isac_mod.IsacProblem(compose_effective(raw, np.zeros(0)),
                                        extra["s1"], extra["r_hs"], p, p,
                                        cfg.alpha1, 1.0 - cfg.alpha1)
            if scheme == "EJ":
                sol = isac_mod.optimize_isac_ej(prob, init=init_seq, stop=cfg.stop_rule(),
                                                restarts=cfg.restarts)
            elif scheme == "GN":
                sol = isac_mod.optimize_isac(prob, "gn", init=init_seq, stop=cfg.stop_rule(),
                                             restarts=cfg.restarts)
            else:
                raise ValueError(f"scheme {scheme!r} not defined for isac runs")
            row = ResultRow(cfg.experiment, scheme, cfg.sweep_param, float(sweep_value),
                            trial, seed_id, chash, sol.r_comm, sol.r_sens, sol.label,
                            sol.iterations, sol.converged, time.perf_counter() - t0)
            return row, (sol.f1, sol.f2, np.zeros(0))
        if cfg.experiment == "miso":
            rec = _run_scheme_miso(scheme, raw, p, cfg, init_seq)
        else:
            rec = _run_scheme_mimo(scheme, raw, p, cfg, init_seq)
        row = ResultRow(cfg.experiment, scheme, cfg.sweep_param, float(sweep_value),
                        trial, seed_id, chash, _scheme_rate(scheme, rec), None,
                        rec.rates.branch if scheme == "EJ" else rec.label,
                        rec.iterations, rec.converged, time.perf_counter() - t0)
        return row, (rec.f1, rec.f2, rec.phi)
    except Exception as exc:  # noqa: BLE001 - row-level fault isolation
        row = ResultRow(cfg.experiment, scheme, cfg.sweep_param, float(sweep_value),
                        trial, seed_id, chash, float("nan"), None, "", 0, False,
                        time.perf_counter() - t0, error=type(exc).__name__)
        return row, None


def rows_to_csv(rows) -> str:
    lines = [",".join(COLUMNS)]
    for row in rows:
        rec = row.as_record()
        lines.append(",".join(str(rec[c]) for c in COLUMNS))
    return "\n".join(lines) + "\n"


def strip_timing(csv_text: str) -> str:
    """Drop the timing columns, for byte-level reproducibility checks."""
    lines = csv_text.strip("\n").split("\n")
    header = lines[0].split(",")
    keep = [i for i, c in enumerate(header) if c not in TIMING_COLUMNS]
    out = [",".join(line.split(",")[i] for i in keep) for line in lines]
    return "\n".join(out) + "\n"


def metadata_text(cfg: ScenarioConfig, extra: dict | None = None) -> str:
    from importlib.metadata import PackageNotFoundError, version
    try:
        pkg_version = version("risjam")
    except PackageNotFoundError:
        pkg_version = "unknown"
    items = {
        "schema_version": SCHEMA_VERSION,
        "prng": PRNG_NAME,
        "package_version": pkg_version,
    }
    for f in fields(cfg):
        value = getattr(cfg, f.name)
        if isinstance(value, tuple):
            value = ",".join(str(v) for v in value)
        items[f.name] = value
    if cfg.channel_model == "geometry":
        items["normalized_budget_p_over_sigma2"] = normalized_budget(cfg.p_dbm, cfg.noise_dbm)
    if extra:
        items.update(extra)
    return "".join(f"{k} = {items[k]}\n" for k in items)


def summarize(rows):
    """Mean and standard error per (scheme, sweep value); flagged rows are
    excluded. Deterministic ordering."""
    groups = {}
    for row in rows:
        if row.error:
            continue
        groups.setdefault((row.scheme, row.sweep_value), []).append(row)
    out = []
    for (scheme, sweep_value) in sorted(groups):
        rate = np.array([r.rate_nats for r in groups[(scheme, sweep_value)]])
        entry = {
            "scheme": scheme,
            "sweep_value": sweep_value,
            "n": int(rate.size),
            "mean_nats": float(rate.mean()),
            "stderr_nats": float(rate.std(ddof=1) / np.sqrt(rate.size)) if rate.size > 1 else 0.0,
        }
        sens = [r.sensing_mi_nats for r in groups[(scheme, sweep_value)]
                if r.sensing_mi_nats is not None]
        if sens:
            s = np.array(sens)
            entry["mean_sensing"] = float(s.mean())
            entry["stderr_sensing"] = float(s.std(ddof=1) / np.sqrt(s.size)) if s.size > 1 else 0.0
        out.append(entry)
    return out


def reevaluate_row(cfg: ScenarioConfig, row: ResultRow, solution) -> float:
    """Recompute the stored rate from a persisted solution triple."""
    sweep_values = cfg.sweep_values or (0.0,)
    sweep_idx = [abs(float(v) - row.sweep_value) < 1e-12 for v in sweep_values].index(True)
    dims = _dims_for(cfg, row.sweep_value)
    ts = _trial_seed_sequence(cfg, sweep_idx, row.trial)
    seeds = ts.spawn(2 + len(cfg.schemes))
    raw = _build_channels(cfg, dims, seeds[0])
    f1, f2, phi = solution
    p = _budgets_for(cfg, row.sweep_value)
    ch = compose_effective(raw, phi)
    bundle = rate_ej(ch, PrecoderPair(f1, f2, p, p))
    return {"EJ": bundle.r_ej, "GN": bundle.r_gn, "GN-Ran": bundle.r_gn,
            "No-jammer": bundle.r_bar}[row.scheme]


def reevaluate_sensing(cfg: ScenarioConfig, row: ResultRow, solution) -> float:
    """Recompute the stored sensing MI from a persisted solution triple."""
    sweep_values = cfg.sweep_values or (0.0,)
    sweep_idx = [abs(float(v) - row.sweep_value) < 1e-12 for v in sweep_values].index(True)
    ts = _trial_seed_sequence(cfg, sweep_idx, row.trial)
    seeds = ts.spawn(2 + len(cfg.schemes))
    dims = _dims_for(cfg, row.sweep_value)
    s1 = isac_mod.sample_pilots(dims.n_b, cfg.pilot_len, seeds[1])
    r_hs = isac_mod.sample_target_covariance(dims.n_b, seeds[1].spawn(1)[0])
    return sensing_mi(solution[0], s1, r_hs)
