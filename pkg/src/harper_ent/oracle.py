"""Brute-force check of the closed forms in the full 2^N qubit space.

The one-particle state is embedded as a dense state vector (qubit 1 is the most
significant bit, |1> marks the occupied site), reduced density matrices are
formed by an explicit partial trace, and the linear entropy 1 - Tr(rho^2) is
read off them. Deliberately naive; sizes are capped.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .state_core import BlockLike, OneParticleState, _as_block, block_entropy

MAX_EMBED_QUBITS = 14
MAX_KEEP_QUBITS = 12
MATRIX_TOL = 1e-12
AGREEMENT_TOL = 1e-10


@dataclass(frozen=True)
class FullStateVector:
    n_qubits: int
    amplitudes: np.ndarray

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def as_tensor(self) -> np.ndarray:
        """View with one axis of length 2 per qubit, qubit 1 first."""
        return self.amplitudes.reshape((2,) * self.n_qubits)


@dataclass(frozen=True)
class DensityMatrix:
    entries: np.ndarray
    kept: tuple = ()

    @property
    def dimension(self) -> int:
        return self.entries.shape[0]

    def validate(self, tol: float = MATRIX_TOL) -> None:
        rho = self.entries
        herm = np.max(np.abs(rho - rho.conj().T))
        if herm > tol:
            raise ValueError(f"density matrix not Hermitian (max deviation {herm:.3e})")
        tr = np.trace(rho).real
        if abs(tr - 1.0) > tol:
            raise ValueError(f"density matrix trace {tr!r} != 1")
        lo = np.linalg.eigvalsh(rho).min()
        if lo < -tol:
            raise ValueError(f"density matrix not PSD (min eigenvalue {lo:.3e})")


def embed_one_particle(state: OneParticleState) -> FullStateVector:
    """Place psi_n on the basis state with only qubit n set."""
    n = state.n_sites
    if n > MAX_EMBED_QUBITS:
        raise ValueError(f"oracle size limit: n_sites={n} exceeds {MAX_EMBED_QUBITS}")
    full = np.zeros(2**n, dtype=complex)
    full[1 << (n - np.arange(1, n + 1))] = state.amplitudes
    return FullStateVector(n, full)


def partial_trace(full: FullStateVector, keep: BlockLike, validate: bool = True) -> DensityMatrix:
    """Reduced density matrix of the qubits in `keep` (1-based labels).

    The kept axes are moved to the front, the vector is reshaped to a
    (2^L, 2^(N-L)) matrix M and rho = M M^dagger: each entry is a sum over
    complement bitstrings, and the 2^N x 2^N projector is never formed.
    Row/column order of rho follows the kept qubits in increasing label order,
    most significant first.
    """
    block = _as_block(keep, full.n_qubits)
    L = block.block_size
    if L == 0:
        raise ValueError("partial trace needs a nonempty set of kept qubits")
    if L > MAX_KEEP_QUBITS:
        raise ValueError(f"oracle size limit: keeping {L} qubits exceeds {MAX_KEEP_QUBITS}")
    kept_axes = list(block.index_array())
    traced_axes = [a for a in range(full.n_qubits) if a not in set(kept_axes)]
    m = np.transpose(full.as_tensor(), kept_axes + traced_axes).reshape(2**L, -1)
    rho = DensityMatrix(m @ m.conj().T, block.sites)
    if validate:
        rho.validate()
    return rho


def linear_entropy(rho: DensityMatrix) -> float:
    """1 - Tr(rho^2)."""
    r = rho.entries
    # Tr(rho^2) = sum |rho_ij|^2 for Hermitian rho
    return float(1.0 - np.sum(np.abs(r) ** 2))


def oracle_block_entropy(state: OneParticleState, block: BlockLike) -> float:
    """Linear entropy of `block` via embed -> partial trace -> 1 - Tr(rho^2).

    Traces down to whichever of the block and its complement is smaller;
    a pure state gives both sides the same purity. Empty or full blocks are
    unentangled by definition.
    """
    block = _as_block(block, state.n_sites)
    if block.block_size in (0, state.n_sites):
        return 0.0
    full = embed_one_particle(state)
    comp = block.complement()
    keep = block if block.block_size <= comp.block_size else comp
    return linear_entropy(partial_trace(full, keep))


@dataclass(frozen=True)
class VerificationReport:
    n_sites: int
    block_spec: str
    oracle_value: float
    closed_form_value: float
    abs_diff: float
    passed: bool

    CSV_HEADER = ("n_sites", "block_spec", "oracle_value", "closed_form_value", "abs_diff", "pass")

    def csv_row(self) -> tuple:
        return (
            self.n_sites,
            self.block_spec,
            repr(self.oracle_value),
            repr(self.closed_form_value),
            repr(self.abs_diff),
            int(self.passed),
        )


def verify_block_formula(
    state: OneParticleState, block: BlockLike, tol: float = AGREEMENT_TOL
) -> VerificationReport:
    """Compare the oracle and the closed-form block entropy for one block."""
    block = _as_block(block, state.n_sites)
    oracle = oracle_block_entropy(state, block)
    closed = block_entropy(state, block)
    diff = abs(oracle - closed)
    return VerificationReport(state.n_sites, block.spec(), oracle, closed, diff, diff < tol)
