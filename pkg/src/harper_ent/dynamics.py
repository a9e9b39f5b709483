"""Wave-packet evolution on the Harper chain.

Solves  i dpsi_n/dt = 1/2 (psi_{n+1} + psi_{n-1}) + V_n psi_n  either exactly in
the eigenbasis ("spectral") or with fixed-step RK4 as an independent check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import state_core as sc
from .harper import HarperParams, SpectrumResult, full_spectrum, hamiltonian_matrix

RK4_NORM_DRIFT = 1e-6


@dataclass(frozen=True)
class EvolutionConfig:
    t_max: float = 60.0
    dt: float = 0.1
    propagator: str = "spectral"
    rk4_substep: float = 1e-3
    initial_site: Optional[int] = None
    boundary_hit_threshold: float = 1e-6
    block_size: int = 1

    def __post_init__(self):
        if self.t_max <= 0 or self.dt <= 0:
            raise ValueError("t_max and dt must be positive")
        if self.dt > self.t_max:
            raise ValueError(f"dt={self.dt} exceeds t_max={self.t_max}")
        if self.propagator not in ("spectral", "rk4"):
            raise ValueError(f"propagator must be 'spectral' or 'rk4', got {self.propagator!r}")
        if self.propagator == "rk4" and not 0 < self.rk4_substep <= self.dt:
            raise ValueError(f"rk4_substep must be in (0, dt], got {self.rk4_substep}")
        if self.boundary_hit_threshold <= 0:
            raise ValueError("boundary_hit_threshold must be positive")

    def start_site(self, n_sites: int) -> int:
        return self.initial_site if self.initial_site is not None else n_sites // 2

    def times(self) -> np.ndarray:
        count = int(math.floor(self.t_max / self.dt + 1e-9)) + 1
        return np.round(self.dt * np.arange(count), 12)

    def describe(self) -> str:
        return (
            f"t_max={self.t_max!r} dt={self.dt!r} propagator={self.propagator} "
            f"rk4_substep={self.rk4_substep!r} initial_site={self.initial_site} "
            f"boundary_hit_threshold={self.boundary_hit_threshold!r} block_size={self.block_size}"
        )


@dataclass(frozen=True)
class TimeSeries:
    times: np.ndarray
    amplitudes: np.ndarray  # (n_times, n_sites), raw propagated vectors
    norms: np.ndarray
    variances: np.ndarray
    entanglements: np.ndarray
    e_s: np.ndarray
    participation: np.ndarray
    energies: np.ndarray
    block_size: int
    initial_site: int
    boundary_hit_time: Optional[float] = None
    params: Optional[HarperParams] = field(default=None, compare=False)

    @property
    def states(self) -> list:
        return [sc.make_state(a) for a in self.amplitudes]

    def state(self, index: int) -> sc.OneParticleState:
        return sc.make_state(self.amplitudes[index])

    def boundary_flags(self) -> np.ndarray:
        if self.boundary_hit_time is None:
            return np.zeros(self.times.size, dtype=bool)
        return self.times >= self.boundary_hit_time

    CSV_HEADER = ("t", "norm", "variance", "e_avg", "e_s", "participation", "boundary_hit")

    def csv_rows(self):
        hit = self.boundary_flags()
        for k, t in enumerate(self.times):
            yield (
                repr(float(t)), repr(float(self.norms[k])), repr(float(self.variances[k])),
                repr(float(self.entanglements[k])), repr(float(self.e_s[k])),
                repr(float(self.participation[k])), int(hit[k]),
            )


def initial_packet(n_sites: int, site: int) -> sc.OneParticleState:
    """Particle localized on `site`."""
    return sc.delta_state(n_sites, site)


def variance(state) -> float:
    """Spread sum (n - nbar)^2 |psi_n|^2 in plain site coordinates.

    Accepts a state or a probability vector. Only meaningful while the packet
    has not reached the chain ends.
    """
    probs = state.probabilities if isinstance(state, sc.OneParticleState) else np.asarray(state)
    n = np.arange(1, probs.size + 1)
    nbar = np.dot(n, probs)
    return float(np.dot((n - nbar) ** 2, probs))


def propagate(spectrum: SpectrumResult, psi0: np.ndarray, times) -> np.ndarray:
    """psi(t) = sum_k exp(-i E_k t) <v_k|psi0> v_k for each t; rows are times."""
    v, e = spectrum.eigenvectors, spectrum.eigenvalues
    coeffs = v.T @ np.asarray(psi0, dtype=complex)
    times = np.atleast_1d(np.asarray(times, dtype=float))
    phases = np.exp(-1j * np.outer(times, e))
    return (phases * coeffs) @ v.T


def _rk4_run(h: np.ndarray, psi0: np.ndarray, times: np.ndarray, substep: float) -> np.ndarray:
    def rhs(psi):
        return -1j * (h @ psi)

    out = np.empty((times.size, psi0.size), dtype=complex)
    psi = psi0.astype(complex)
    out[0] = psi
    for k in range(1, times.size):
        span = times[k] - times[k - 1]
        steps = max(1, int(math.ceil(span / substep - 1e-9)))
        step = span / steps
        for _ in range(steps):
            k1 = rhs(psi)
            k2 = rhs(psi + 0.5 * step * k1)
            k3 = rhs(psi + 0.5 * step * k2)
            k4 = rhs(psi + step * k3)
            psi = psi + step / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        drift = abs(np.linalg.norm(psi) - 1.0)
        if drift > RK4_NORM_DRIFT:
            raise RuntimeError(
                f"rk4 unstable: norm drift {drift:.3e} at t={times[k]}; use a smaller rk4_substep"
            )
        out[k] = psi
    return out


def evolve(params: HarperParams, config: EvolutionConfig = EvolutionConfig()) -> TimeSeries:
    n = params.n_sites
    site = config.start_site(n)
    sc._check_block_size(config.block_size, n)
    psi0 = initial_packet(n, site).amplitudes
    times = config.times()
    h = hamiltonian_matrix(params)
    if config.propagator == "spectral":
        amps = propagate(full_spectrum(params), psi0, times)
    else:
        amps = _rk4_run(h, psi0, times, config.rk4_substep)
    amps[0] = psi0

    probs = np.abs(amps) ** 2
    norms = np.sqrt(probs.sum(axis=1))
    probs = probs / (norms**2)[:, None]
    ipr = np.sum(probs**2, axis=1)
    e_s = 1.0 - ipr
    part = 1.0 / (n * ipr)
    ent = sc.block_prefactor(n, config.block_size) * e_s
    variances = np.array([variance(p) for p in probs])
    energies = np.einsum("ti,ij,tj->t", amps.conj(), h, amps).real

    edge = probs[:, 0] + probs[:, -1]
    over = np.nonzero(edge > config.boundary_hit_threshold)[0]
    hit = float(times[over[0]]) if over.size else None
    return TimeSeries(
        times=times,
        amplitudes=amps,
        norms=norms,
        variances=variances,
        entanglements=ent,
        e_s=e_s,
        participation=part,
        energies=energies,
        block_size=config.block_size,
        initial_site=site,
        boundary_hit_time=hit,
        params=params,
    )


def entanglement_trace(series: TimeSeries, block_size: int) -> np.ndarray:
    """Average block entropy at every recorded time."""
    return np.array([sc.average_block_entropy(s, block_size) for s in series.states])


@dataclass(frozen=True)
class ExponentFit:
    alpha: float
    r_squared: float
    t_lo: float
    t_hi: float
    n_samples: int
    confident: bool

    CSV_HEADER = ("lambda", "t_lo", "t_hi", "alpha", "r_squared", "confident_flag")


MIN_FIT_SAMPLES = 10
CONFIDENT_R2 = 0.95


def diffusion_exponent(series: TimeSeries, t_lo: float, t_hi: Optional[float] = None) -> ExponentFit:
    """Slope of log variance against log t on [t_lo, t_hi].

    `t_hi=None` extends the window to the last sample before the packet reaches
    the chain ends (or the end of the run). A fit with r^2 below 0.95, as for
    a bounded, oscillating variance, is flagged not confident.
    """
    times = series.times
    hit = series.boundary_hit_time
    if t_lo <= 0:
        raise ValueError(f"fit window must start at t > 0, got t_lo={t_lo}")
    if t_lo < times[0] or t_lo > times[-1]:
        raise ValueError(f"t_lo={t_lo} outside recorded range [{times[0]}, {times[-1]}]")
    if t_hi is None:
        t_hi = float(times[-1]) if hit is None else float(times[times < hit][-1])
    if t_hi > times[-1] + 1e-12:
        raise ValueError(f"t_hi={t_hi} beyond recorded range (t_max={times[-1]})")
    if hit is not None and t_hi >= hit:
        raise ValueError(f"fit window [{t_lo}, {t_hi}] reaches boundary hit at t={hit}")
    if t_hi <= t_lo:
        raise ValueError(f"empty fit window [{t_lo}, {t_hi}]")
    mask = (times >= t_lo - 1e-12) & (times <= t_hi + 1e-12)
    count = int(mask.sum())
    if count < MIN_FIT_SAMPLES:
        raise ValueError(f"fit window holds {count} samples, need >= {MIN_FIT_SAMPLES}")
    var = series.variances[mask]
    if np.any(var <= 0):
        raise ValueError("variance must be positive throughout the fit window")
    x, y = np.log(times[mask]), np.log(var)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - np.sum(resid**2) / ss_tot if ss_tot > 0 else 1.0
    return ExponentFit(float(slope), float(r2), float(t_lo), float(t_hi), count, bool(r2 >= CONFIDENT_R2))
