"""Harper (Aubry-Andre) chain: Hamiltonian, spectra, ground-state sweeps.

    H = sum_n 1/2 (c_n^+ c_{n+1} + h.c.) + V_n c_n^+ c_n,   V_n = lambda cos(2 pi n sigma)

In the one-particle sector H is the N x N matrix with V_n on the diagonal and
1/2 on the nearest-neighbour off-diagonals (plus the corners when periodic).
"""

from __future__ import annotations

import bisect
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np

from . import state_core as sc
from ._workers import worker_count

HOPPING = 0.5
MAX_DENSE_SITES = 4096
RESIDUAL_TOL = 1e-9
ORTHO_TOL = 1e-10
DEGENERACY_TOL = 1e-10

Sigma = Union[Fraction, float]


class SolverError(RuntimeError):
    pass


def sigma_parts(sigma) -> tuple:
    """(numerator, denominator) for rational sigma, (repr(float), '') otherwise."""
    if isinstance(sigma, Fraction):
        return sigma.numerator, sigma.denominator
    return repr(float(sigma)), ""


def parse_sigma(text: Union[str, float, Fraction]) -> Sigma:
    """``"89/144"`` -> Fraction(89, 144); plain decimals stay floats."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, (int, float)) and not isinstance(text, bool):
        return float(text)
    text = str(text).strip()
    if "/" in text:
        num, den = text.split("/")
        frac = Fraction(int(num), int(den))
        return frac
    return float(text)


@dataclass(frozen=True)
class HarperParams:
    n_sites: int
    lam: float
    sigma: Sigma
    boundary: str = "periodic"
    phase: float = 0.0

    def __post_init__(self):
        if self.n_sites < 3:
            raise ValueError(f"n_sites must be >= 3, got {self.n_sites}")
        if self.lam < 0:
            raise ValueError(f"lambda must be >= 0, got {self.lam}")
        if self.boundary not in ("periodic", "open"):
            raise ValueError(f"boundary must be 'periodic' or 'open', got {self.boundary!r}")
        if isinstance(self.sigma, str):
            object.__setattr__(self, "sigma", parse_sigma(self.sigma))

    @property
    def hopping(self) -> float:
        return HOPPING

    def describe(self) -> str:
        return (
            f"n_sites={self.n_sites} lambda={self.lam!r} sigma={self.sigma} "
            f"boundary={self.boundary} phase={self.phase!r} hopping={HOPPING}"
        )


def _phases(params: HarperParams, sites: np.ndarray) -> np.ndarray:
    """Fractional part of n*sigma, exact for rational sigma."""
    if isinstance(params.sigma, Fraction):
        p, q = params.sigma.numerator, params.sigma.denominator
        return (sites.astype(np.int64) * p % q) / q
    return np.mod(sites * float(params.sigma), 1.0)


def potentials(params: HarperParams) -> np.ndarray:
    """V_n for n = 1..N."""
    sites = np.arange(1, params.n_sites + 1)
    return params.lam * np.cos(2.0 * np.pi * _phases(params, sites) + params.phase)


def potential(params: HarperParams, site: int) -> float:
    if not 1 <= site <= params.n_sites:
        raise ValueError(f"site {site} out of range 1..{params.n_sites}")
    frac = _phases(params, np.array([site]))[0]
    return float(params.lam * math.cos(2.0 * math.pi * frac + params.phase))


def hamiltonian_matrix(params: HarperParams) -> np.ndarray:
    n = params.n_sites
    h = np.diag(potentials(params))
    i = np.arange(n - 1)
    h[i, i + 1] = HOPPING
    h[i + 1, i] = HOPPING
    if params.boundary == "periodic":
        h[0, n - 1] = HOPPING
        h[n - 1, 0] = HOPPING
    return h


@dataclass(frozen=True)
class SpectrumResult:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    ground_index: int = 0
    max_residual: float = 0.0
    max_ortho_error: float = 0.0


def _fix_signs(vecs: np.ndarray) -> np.ndarray:
    # largest-magnitude component positive; argmax picks the lowest index on ties
    lead = np.argmax(np.abs(vecs), axis=0)
    signs = np.sign(vecs[lead, np.arange(vecs.shape[1])])
    signs[signs == 0] = 1.0
    return vecs * signs


def full_spectrum(params: HarperParams) -> SpectrumResult:
    """All eigenpairs, ascending, with a fixed eigenvector sign convention."""
    if params.n_sites > MAX_DENSE_SITES:
        raise ValueError(f"dense solver guard: n_sites={params.n_sites} > {MAX_DENSE_SITES}")
    h = hamiltonian_matrix(params)
    try:
        vals, vecs = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise SolverError(f"eigensolver failed for {params.describe()}: {exc}") from exc
    vecs = _fix_signs(vecs)
    residual = float(np.max(np.linalg.norm(h @ vecs - vecs * vals, axis=0)))
    ortho = float(np.max(np.abs(vecs.T @ vecs - np.eye(params.n_sites))))
    if residual > RESIDUAL_TOL or ortho > ORTHO_TOL:
        raise SolverError(
            f"eigensolver inaccurate for {params.describe()}: "
            f"max residual {residual:.3e}, orthonormality error {ortho:.3e}"
        )
    return SpectrumResult(vals, vecs, 0, residual, ortho)


@dataclass(frozen=True)
class GroundState:
    energy: float
    state: sc.OneParticleState
    degenerate: bool


def ground_state(params: HarperParams, spectrum: Optional[SpectrumResult] = None) -> GroundState:
    spec = spectrum if spectrum is not None else full_spectrum(params)
    vals = spec.eigenvalues
    degenerate = bool(vals[1] - vals[0] < DEGENERACY_TOL)
    return GroundState(float(vals[0]), sc.make_state(spec.eigenvectors[:, 0]), degenerate)


def _fibonacci_upto(limit: int) -> list:
    fib = [1, 2]
    while fib[-1] <= limit:
        fib.append(fib[-1] + fib[-2])
    return fib


def fibonacci_sigma(n_sites: int) -> Fraction:
    """F(n-1)/F(n) for N = F(n)."""
    fib = _fibonacci_upto(n_sites)
    if n_sites < 3 or n_sites not in fib:
        k = bisect.bisect_left(fib, n_sites)
        near = sorted({fib[max(k - 1, 0)], fib[min(k, len(fib) - 1)]})
        raise ValueError(
            f"n_sites={n_sites} is not a Fibonacci number >= 3; nearest: "
            + ", ".join(str(f) for f in near)
        )
    k = fib.index(n_sites)
    return Fraction(fib[k - 1], n_sites)


@dataclass(frozen=True)
class SweepRow:
    lam: float
    n_sites: int
    sigma: Sigma
    block_size: int
    e_avg: float
    e_s: float
    participation: float
    ground_energy: float
    degenerate: bool

    CSV_HEADER = (
        "lambda", "n_sites", "sigma_num", "sigma_den", "block_size",
        "e_avg", "e_s", "participation", "ground_energy", "degenerate_flag",
    )

    def csv_row(self) -> tuple:
        num, den = sigma_parts(self.sigma)
        return (
            repr(self.lam), self.n_sites, num, den, self.block_size,
            repr(self.e_avg), repr(self.e_s), repr(self.participation),
            repr(self.ground_energy), int(self.degenerate),
        )


def sweep_point(params: HarperParams, block_size: int = 1) -> SweepRow:
    gs = ground_state(params)
    return SweepRow(
        lam=params.lam,
        n_sites=params.n_sites,
        sigma=params.sigma,
        block_size=block_size,
        e_avg=sc.average_block_entropy(gs.state, block_size),
        e_s=sc.state_linear_entropy(gs.state),
        participation=sc.participation_ratio(gs.state),
        ground_energy=gs.energy,
        degenerate=gs.degenerate,
    )


def lambda_sweep(
    n_sites: int,
    lambdas: Sequence[float],
    block_size: int = 1,
    sigma: Optional[Sigma] = None,
    boundary: str = "periodic",
    workers: Optional[int] = None,
    phase: float = 0.0,
) -> list:
    """Ground-state entanglement for each lambda, rows sorted by lambda."""
    lambdas = sorted(float(x) for x in lambdas)
    if not lambdas:
        raise ValueError("lambda grid is empty")
    if sigma is None:
        sigma = fibonacci_sigma(n_sites)
    sc._check_block_size(block_size, n_sites)
    base = HarperParams(n_sites, lambdas[0], parse_sigma(sigma), boundary, phase)
    points = [replace(base, lam=lam) for lam in lambdas]
    with ThreadPoolExecutor(max_workers=worker_count(workers)) as pool:
        # map preserves input order regardless of completion order
        return list(pool.map(lambda p: sweep_point(p, block_size), points))


def lambda_grid(start: float, stop: float, step: float) -> np.ndarray:
    """Inclusive grid start, start+step, ..., stop, rounded to kill float drift."""
    if step <= 0:
        raise ValueError(f"lambda step must be positive, got {step}")
    if stop < start:
        raise ValueError(f"lambda max {stop} below lambda min {start}")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return np.round(start + step * np.arange(count), 12)
