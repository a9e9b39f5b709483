"""One-particle states and closed-form entanglement / localization measures.

A one-particle state on N sites is the qubit superposition

    |Psi> = sum_n psi_n |0..1_n..0>,

so every quantity here depends on the occupation probabilities |psi_n|^2 only.
Site indices are 1-based throughout the public interface.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np

NORM_TOL = 1e-10
ZERO_NORM = 1e-12
ENUMERATION_CAP = 10**6


@dataclass(frozen=True)
class OneParticleState:
    """Normalized amplitude vector psi_1..psi_N.

    Build through :func:`make_state`, which rescales the input. The direct
    constructor only validates.
    """

    amplitudes: np.ndarray
    probabilities: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).ravel()
        if amps.size < 2:
            raise ValueError("too few sites: a one-particle state needs n_sites >= 2")
        probs = np.abs(amps) ** 2
        total = probs.sum()
        if abs(total - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized (sum |psi|^2 = {total!r})")
        amps.setflags(write=False)
        probs.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "probabilities", probs)

    @property
    def n_sites(self) -> int:
        return self.amplitudes.size

    def __len__(self):
        return self.n_sites


@dataclass(frozen=True)
class BlockSelection:
    """Subset of sites (1-based, strictly increasing) defining an L | N-L cut."""

    sites: tuple
    n_sites: int

    def __post_init__(self):
        sites = tuple(int(s) for s in self.sites)
        if any(b <= a for a, b in zip(sites, sites[1:])):
            raise ValueError(f"block sites must be strictly increasing, got {sites}")
        if sites and (sites[0] < 1 or sites[-1] > self.n_sites):
            raise ValueError(f"block sites {sites} outside 1..{self.n_sites}")
        object.__setattr__(self, "sites", sites)

    @classmethod
    def of(cls, sites: Iterable[int], n_sites: int) -> "BlockSelection":
        """Build from any iterable of site labels; duplicates are an error."""
        sites = list(sites)
        if len(set(sites)) != len(sites):
            raise ValueError(f"duplicate sites in block {sites}")
        return cls(tuple(sorted(sites)), n_sites)

    @property
    def block_size(self) -> int:
        return len(self.sites)

    def complement(self) -> "BlockSelection":
        inside = set(self.sites)
        return BlockSelection(
            tuple(n for n in range(1, self.n_sites + 1) if n not in inside), self.n_sites
        )

    def index_array(self) -> np.ndarray:
        """Zero-based storage indices."""
        return np.asarray(self.sites, dtype=int) - 1

    def spec(self) -> str:
        """Hyphen-joined site list, e.g. ``1-2-5``."""
        return "-".join(str(s) for s in self.sites)


BlockLike = Union[BlockSelection, Sequence[int]]


def _as_block(block: BlockLike, n_sites: int) -> BlockSelection:
    if isinstance(block, BlockSelection):
        if block.n_sites != n_sites:
            raise ValueError(
                f"block defined for {block.n_sites} sites, state has {n_sites}"
            )
        return block
    return BlockSelection.of(block, n_sites)


@dataclass(frozen=True)
class EntanglementSummary:
    e_s: float
    p: float
    mean_c2: float
    site_entropies: np.ndarray


def make_state(amplitudes) -> OneParticleState:
    """Rescale `amplitudes` to unit norm by a real positive factor."""
    amps = np.asarray(amplitudes, dtype=complex).ravel()
    if amps.size < 2:
        raise ValueError("too few sites: a one-particle state needs n_sites >= 2")
    norm = np.linalg.norm(amps)
    if not np.isfinite(norm) or norm < ZERO_NORM:
        raise ValueError(f"unnormalizable amplitude vector (norm = {norm!r})")
    return OneParticleState(amps / norm)


def w_state(n_sites: int) -> OneParticleState:
    """Uniform superposition, all amplitudes 1/sqrt(N)."""
    if n_sites < 2:
        raise ValueError(f"too few sites: W state needs n_sites >= 2, got {n_sites}")
    return OneParticleState(np.full(n_sites, 1.0 / math.sqrt(n_sites), dtype=complex))


def delta_state(n_sites: int, site: int) -> OneParticleState:
    """Particle sitting on `site` with certainty."""
    _check_site(site, n_sites)
    amps = np.zeros(n_sites, dtype=complex)
    amps[site - 1] = 1.0
    return OneParticleState(amps)


def random_state(n_sites: int, rng: np.random.Generator) -> OneParticleState:
    """Haar-random one-particle state (complex Gaussian amplitudes, normalized)."""
    z = rng.standard_normal(n_sites) + 1j * rng.standard_normal(n_sites)
    return make_state(z)


def _check_site(site: int, n_sites: int) -> None:
    if not 1 <= site <= n_sites:
        raise ValueError(f"site {site} out of range 1..{n_sites}")


def _ipr(state: OneParticleState) -> float:
    # sum |psi|^4 lies in [1/N, 1]; clip rounding so p and E_s stay in range
    n = state.n_sites
    return float(min(max(np.sum(state.probabilities**2), 1.0 / n), 1.0))


def participation_ratio(state: OneParticleState) -> float:
    """p = 1 / (N sum |psi_n|^4), between 1/N (one site) and 1 (uniform)."""
    return 1.0 / (state.n_sites * _ipr(state))


def state_linear_entropy(state: OneParticleState) -> float:
    """E_s = 1 - sum |psi_n|^4."""
    return 1.0 - _ipr(state)


def site_entropy(state: OneParticleState, site: int) -> float:
    """Linear entropy of one site against the rest, 2(|psi_n|^2 - |psi_n|^4)."""
    _check_site(site, state.n_sites)
    return float(_pair_entropy(state.probabilities[site - 1]))


def entropy_distribution(state: OneParticleState) -> np.ndarray:
    """Site entropies for n = 1..N."""
    return _pair_entropy(state.probabilities)


def _pair_entropy(s):
    """2(s - s^2) for occupation s, clipped to [0, 1] first."""
    s = np.clip(s, 0.0, 1.0)
    return 2.0 * (s - s * s)


def block_entropy(state: OneParticleState, block: BlockLike) -> float:
    """Linear entropy of the sites in `block` against the complement.

    With s the block's total occupation probability this is 2(s - s^2), which
    is symmetric under s -> 1 - s. The smaller of the two sums is used so that
    a block and its complement give bit-identical results.
    """
    block = _as_block(block, state.n_sites)
    if block.block_size in (0, state.n_sites):
        return 0.0
    idx = block.index_array()
    inside = float(np.sum(state.probabilities[idx]))
    mask = np.ones(state.n_sites, dtype=bool)
    mask[idx] = False
    outside = float(np.sum(state.probabilities[mask]))
    # renormalize away rounding in sum |psi|^2
    s = min(inside, outside) / (inside + outside)
    return float(_pair_entropy(s))


def _check_block_size(block_size: int, n_sites: int) -> None:
    if not 0 <= block_size <= n_sites:
        raise ValueError(f"block_size {block_size} out of range 0..{n_sites}")


def block_prefactor(n_sites: int, block_size: int) -> float:
    """2L(N-L) / (N(N-1))."""
    return 2.0 * block_size * (n_sites - block_size) / (n_sites * (n_sites - 1))


def average_block_entropy(state: OneParticleState, block_size: int) -> float:
    """Block entropy averaged over all C(N, L) blocks, in closed form."""
    _check_block_size(block_size, state.n_sites)
    return block_prefactor(state.n_sites, block_size) * state_linear_entropy(state)


@functools.lru_cache(maxsize=64)
def _subsets(n: int, k: int) -> np.ndarray:
    """All k-subsets of range(n), one per row, lexicographic."""
    count = math.comb(n, k)
    out = np.fromiter(
        itertools.chain.from_iterable(itertools.combinations(range(n), k)),
        dtype=int,
        count=count * k,
    ).reshape(count, k)
    out.setflags(write=False)
    return out


def average_block_entropy_enumerated(
    state: OneParticleState, block_size: int, cap: int = ENUMERATION_CAP
) -> float:
    """Same average as :func:`average_block_entropy`, by visiting every subset.

    Verification path only; refuses when C(N, L) exceeds `cap`.
    """
    n = state.n_sites
    _check_block_size(block_size, n)
    count = math.comb(n, block_size)
    if count > cap:
        raise ValueError(
            f"enumeration too large: C({n}, {block_size}) = {count} exceeds cap {cap}"
        )
    if block_size in (0, n):
        return 0.0
    s = state.probabilities[_subsets(n, block_size)].sum(axis=1)
    return float(np.mean(_pair_entropy(s)))


def _check_participation(n_sites: int, p: float) -> None:
    lo = 1.0 / n_sites
    if not (lo * (1 - 1e-12) <= p <= 1.0 + 1e-12):
        raise ValueError(f"participation ratio {p} outside [1/N, 1] = [{lo}, 1]")


def entropy_from_participation(n_sites: int, block_size: int, p: float) -> float:
    """Average block entropy expressed through the participation ratio."""
    _check_block_size(block_size, n_sites)
    _check_participation(n_sites, p)
    return block_prefactor(n_sites, block_size) * (1.0 - 1.0 / (n_sites * p))


def mean_square_concurrence(state: OneParticleState) -> float:
    """Average squared pairwise concurrence, 4/(N(N-1)) (1 - 1/(Np))."""
    n = state.n_sites
    p = participation_ratio(state)
    return 4.0 / (n * (n - 1)) * (1.0 - 1.0 / (n * p))


def bipartite_from_pairwise(n_sites: int, block_size: int, mean_c2: float) -> float:
    """Average block entropy from the mean squared concurrence: L(N-L)/2 <C^2>."""
    _check_block_size(block_size, n_sites)
    if mean_c2 < 0:
        raise ValueError(f"mean_c2 must be non-negative, got {mean_c2}")
    return block_size * (n_sites - block_size) / 2.0 * mean_c2


def summarize(state: OneParticleState) -> EntanglementSummary:
    return EntanglementSummary(
        e_s=state_linear_entropy(state),
        p=participation_ratio(state),
        mean_c2=mean_square_concurrence(state),
        site_entropies=entropy_distribution(state),
    )
