"""Scenario geometry, fading realizations, and RIS channel composition.

Channels are noise-normalized at build time: every block that terminates at
a receiver (the four direct links and the four RIS->receiver links) is
divided by the noise standard deviation sigma, while the transmitter->RIS
blocks are left unscaled. The cascaded reflected channel therefore carries
the 1/sigma factor exactly once, and every downstream rate formula can
assume identity noise covariance. Power budgets stay in watts; the
equivalent normalized budget is P/sigma^2 (see `normalized_budget`).
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

PRNG_NAME = "numpy-PCG64"


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def normalized_budget(p_dbm: float, noise_dbm: float) -> float:
    """Transmit budget over noise power, P/sigma^2, in linear units."""
    return 10.0 ** ((p_dbm - noise_dbm) / 10.0)


@dataclass(frozen=True)
class Topology:
    """Node positions (meters) and large-scale fading parameters.

    Exponent classes follow the usual urban setup: one exponent for the
    transmitter->RIS links, one for the RIS->receiver links, and one for
    the direct links. The direct-link exponent is applied to all four
    direct links (BS->UE, BS->Eve, jammer->UE, jammer->Eve). The Rician
    factor is a config knob recorded in every output file; 3.0 (linear)
    by default.
    """

    bs: tuple = (0.0, 10.0)
    jammer: tuple = (0.0, 5.0)
    ris: tuple = (50.0, 5.0)
    ue: tuple = (49.0, 0.0)
    eve: tuple = (60.0, 0.0)
    exp_to_ris: float = 2.2
    exp_from_ris: float = 2.5
    exp_direct: float = 3.5
    c0: float = 1e-3
    d0: float = 1.0
    rician_beta: float = 3.0

    def __post_init__(self):
        for name in ("exp_to_ris", "exp_from_ris", "exp_direct", "rician_beta"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.c0 <= 0 or self.d0 <= 0:
            raise ValueError("c0 and d0 must be > 0")


@dataclass(frozen=True)
class Dims:
    n_b: int
    n_c: int
    n_u: int
    n_e: int
    m: int

    def __post_init__(self):
        for name in ("n_b", "n_c", "n_u", "n_e"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.m < 0:
            raise ValueError("m must be >= 0")


@dataclass
class RawChannels:
    """The ten channel blocks of the RIS-assisted jamming scenario.

    h_* blocks carry the BS signal, g_* blocks the jammer signal;
    suffixes: b=BS, c=jammer, r=RIS, u=UE, e=Eve. With m == 0 the RIS
    blocks are empty and only the direct links remain.
    """

    dims: Dims
    h_br: np.ndarray  # (m, n_b)   BS -> RIS
    h_bu: np.ndarray  # (n_u, n_b) BS -> UE
    h_be: np.ndarray  # (n_e, n_b) BS -> Eve
    g_cr: np.ndarray  # (m, n_c)   jammer -> RIS
    g_cu: np.ndarray  # (n_u, n_c) jammer -> UE
    g_ce: np.ndarray  # (n_e, n_c) jammer -> Eve
    h_ru: np.ndarray  # (n_u, m)   RIS -> UE, BS path
    h_re: np.ndarray  # (n_e, m)   RIS -> Eve, BS path
    g_ru: np.ndarray  # (n_u, m)   RIS -> UE, jammer path
    g_re: np.ndarray  # (n_e, m)   RIS -> Eve, jammer path

    def __post_init__(self):
        d = self.dims
        expected = {
            "h_br": (d.m, d.n_b), "h_bu": (d.n_u, d.n_b), "h_be": (d.n_e, d.n_b),
            "g_cr": (d.m, d.n_c), "g_cu": (d.n_u, d.n_c), "g_ce": (d.n_e, d.n_c),
            "h_ru": (d.n_u, d.m), "h_re": (d.n_e, d.m),
            "g_ru": (d.n_u, d.m), "g_re": (d.n_e, d.m),
        }
        for name, shape in expected.items():
            arr = np.asarray(getattr(self, name), dtype=complex)
            if arr.shape != shape:
                raise ValueError(f"{name} has shape {arr.shape}, expected {shape}")
            setattr(self, name, arr)

    _BLOCK_ORDER = ("h_br", "h_bu", "h_be", "g_cr", "g_cu", "g_ce",
                    "h_ru", "h_re", "g_ru", "g_re")

    def content_hash(self) -> str:
        """Stable short hash of the realization, for common-random-number audits."""
        h = hashlib.sha256()
        h.update(repr(self.dims).encode())
        for name in self._BLOCK_ORDER:
            h.update(np.ascontiguousarray(getattr(self, name)).tobytes())
        return h.hexdigest()[:16]


@dataclass
class ChannelSet:
    """Raw blocks plus the four effective channels at a given phase vector."""

    raw: RawChannels
    phi: np.ndarray
    h1: np.ndarray  # (n_u, n_b)
    h2: np.ndarray  # (n_u, n_c)
    g1: np.ndarray  # (n_e, n_b)
    g2: np.ndarray  # (n_e, n_c)


def check_unit_modulus(phi: np.ndarray, tol: float = 1e-12) -> None:
    if phi.size and np.max(np.abs(np.abs(phi) - 1.0)) > tol:
        raise ValueError("phase vector entries must have unit modulus")


def random_phases(m: int, seed) -> np.ndarray:
    """Uniform draw on the M-torus."""
    rng = _as_rng(seed)
    return np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, size=m))


def path_loss(d: float, exponent: float, topo: Topology) -> float:
    """C0 (d/d0)^-alpha, strictly decreasing in d for alpha > 0."""
    if d <= 0:
        raise ValueError("distance must be > 0")
    return topo.c0 * (d / topo.d0) ** (-exponent)


def steering_vector(n: int, angle: float) -> np.ndarray:
    """ULA steering vector, half-wavelength spacing: k-th entry e^{j pi k sin(angle)}."""
    if n < 1:
        raise ValueError("antenna count must be >= 1")
    return np.exp(1j * np.pi * np.arange(n) * np.sin(angle))


def sample_rician(rows: int, cols: int, beta: float, los: np.ndarray, seed) -> np.ndarray:
    """Rician mixture sqrt(b/(1+b)) LoS + sqrt(1/(1+b)) NLoS with CN(0,1) NLoS entries."""
    los = np.asarray(los, dtype=complex)
    if los.shape != (rows, cols):
        raise ValueError(f"LoS shape {los.shape} does not match ({rows}, {cols})")
    if beta < 0:
        raise ValueError("rician factor must be >= 0")
    rng = _as_rng(seed)
    nlos = (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2.0)
    return np.sqrt(beta / (1.0 + beta)) * los + np.sqrt(1.0 / (1.0 + beta)) * nlos


def _rayleigh(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2.0)


def _link_angles(p_tx, p_rx):
    dx = p_rx[0] - p_tx[0]
    dy = p_rx[1] - p_tx[1]
    if dx == 0.0 and dy == 0.0:
        raise ValueError("coincident nodes have no departure/arrival angles")
    phi_t = np.arctan2(dy, dx)
    return phi_t, np.pi - phi_t


def _distance(p_a, p_b) -> float:
    return float(np.hypot(p_b[0] - p_a[0], p_b[1] - p_a[1]))


def _los(n_rx: int, n_tx: int, p_tx, p_rx) -> np.ndarray:
    phi_t, phi_r = _link_angles(p_tx, p_rx)
    return np.outer(steering_vector(n_rx, phi_r), steering_vector(n_tx, phi_t).conj())


def build_scenario(topo: Topology, dims: Dims, noise_dbm: float, seed) -> RawChannels:
    """Sample all ten blocks for one scenario realization.

    RIS-involving links are Rician with geometry-derived ULA LoS; direct
    links are Rayleigh. Each block is scaled by sqrt(PL) of its own hop,
    and receiver-terminating blocks are divided by the noise standard
    deviation (see module docstring). Deterministic for a fixed seed.
    """
    rng = _as_rng(seed)
    sigma = np.sqrt(dbm_to_watts(noise_dbm))
    beta = topo.rician_beta
    m = dims.m

    def ris_block(n_rx, n_tx, p_tx, p_rx, exponent, rx_side):
        if m == 0 or n_rx == 0:
            return np.zeros((n_rx, n_tx), dtype=complex)
        amp = np.sqrt(path_loss(_distance(p_tx, p_rx), exponent, topo))
        block = amp * sample_rician(n_rx, n_tx, beta, _los(n_rx, n_tx, p_tx, p_rx), rng)
        return block / sigma if rx_side else block

    def direct_block(n_rx, n_tx, p_tx, p_rx):
        amp = np.sqrt(path_loss(_distance(p_tx, p_rx), topo.exp_direct, topo))
        return amp * _rayleigh(n_rx, n_tx, rng) / sigma

    # Fixed sampling order keeps realizations reproducible across runs.
    h_br = ris_block(m, dims.n_b, topo.bs, topo.ris, topo.exp_to_ris, rx_side=False)
    g_cr = ris_block(m, dims.n_c, topo.jammer, topo.ris, topo.exp_to_ris, rx_side=False)
    h_ru = ris_block(dims.n_u, m, topo.ris, topo.ue, topo.exp_from_ris, rx_side=True)
    h_re = ris_block(dims.n_e, m, topo.ris, topo.eve, topo.exp_from_ris, rx_side=True)
    g_ru = ris_block(dims.n_u, m, topo.ris, topo.ue, topo.exp_from_ris, rx_side=True)
    g_re = ris_block(dims.n_e, m, topo.ris, topo.eve, topo.exp_from_ris, rx_side=True)
    h_bu = direct_block(dims.n_u, dims.n_b, topo.bs, topo.ue)
    h_be = direct_block(dims.n_e, dims.n_b, topo.bs, topo.eve)
    g_cu = direct_block(dims.n_u, dims.n_c, topo.jammer, topo.ue)
    g_ce = direct_block(dims.n_e, dims.n_c, topo.jammer, topo.eve)

    return RawChannels(dims, h_br, h_bu, h_be, g_cr, g_cu, g_ce,
                       h_ru, h_re, g_ru, g_re)


def iid_channels(dims: Dims, seed) -> RawChannels:
    """CN(0,1) direct links with no geometry, unit noise. RIS blocks are
    CN(0,1) as well when m > 0 (used by no-RIS and ISAC experiments with m=0)."""
    rng = _as_rng(seed)
    m = dims.m

    def blk(r, c):
        return _rayleigh(r, c, rng) if r and c else np.zeros((r, c), dtype=complex)

    return RawChannels(
        dims,
        h_br=blk(m, dims.n_b), h_bu=blk(dims.n_u, dims.n_b), h_be=blk(dims.n_e, dims.n_b),
        g_cr=blk(m, dims.n_c), g_cu=blk(dims.n_u, dims.n_c), g_ce=blk(dims.n_e, dims.n_c),
        h_ru=blk(dims.n_u, m), h_re=blk(dims.n_e, m),
        g_ru=blk(dims.n_u, m), g_re=blk(dims.n_e, m),
    )


def compose_effective(raw: RawChannels, phi: np.ndarray) -> ChannelSet:
    """Form the four end-to-end channels for a reflection vector phi.

    phi is the diagonal of the reflection matrix; any complex vector of
    length m is accepted (optimizers enforce unit modulus themselves).
    """
    phi = np.asarray(phi, dtype=complex).reshape(-1)
    if phi.shape[0] != raw.dims.m:
        raise ValueError(f"phase vector length {phi.shape[0]} != m={raw.dims.m}")
    if raw.dims.m == 0:
        return ChannelSet(raw, phi, raw.h_bu.copy(), raw.g_cu.copy(),
                          raw.h_be.copy(), raw.g_ce.copy())
    h1 = raw.h_bu + (raw.h_ru * phi) @ raw.h_br
    h2 = raw.g_cu + (raw.g_ru * phi) @ raw.g_cr
    g1 = raw.h_be + (raw.h_re * phi) @ raw.h_br
    g2 = raw.g_ce + (raw.g_re * phi) @ raw.g_cr
    return ChannelSet(raw, phi, h1, h2, g1, g2)
