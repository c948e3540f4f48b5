"""Diagonalization and time evolution of quadratic chain Hamiltonians.

Covers the number-conserving (XX / bosonic) propagator M = exp(-iKt),
resonant-mode selection with matched register couplings, the pairing
(TFIM) sector with its orthogonal diagonalization and effective
register-swap check, bosonic thermal-error bookkeeping, and the
participation ratio localization diagnostic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .chains import ChainSpec, ModelKind, build_bdg_matrix

__all__ = [
    "EigenmodeSet",
    "Propagator",
    "ResonantModeChoice",
    "BdGDiagonalization",
    "DegenerateModeError",
    "NoTransferModeError",
    "eigenmodes",
    "propagator",
    "select_resonant_mode",
    "bdg_diagonalize",
    "bdg_effective_swap_check",
    "bosonic_swap_and_thermal_error",
    "participation_ratio",
]

_END_AMPLITUDE_FLOOR = 1e-12
_DEGENERACY_GAP = 1e-10


class DegenerateModeError(ValueError):
    """The requested transfer mode is not spectrally isolated."""


class NoTransferModeError(ValueError):
    """No eigenmode has usable amplitude on both chain ends."""


@dataclass(frozen=True)
class EigenmodeSet:
    """Orthonormal eigenmodes of a chain-only Hermitian matrix.

    ``energies`` ascend; ``vectors[:, k]`` is mode k.  The left/right end
    amplitudes psi_{k,L} and psi_{k,R} drive the matched-coupling and
    error-budget formulas.
    """

    energies: np.ndarray
    vectors: np.ndarray

    @property
    def n_sites(self) -> int:
        return self.vectors.shape[0]

    @property
    def psi_left(self) -> np.ndarray:
        return self.vectors[0, :]

    @property
    def psi_right(self) -> np.ndarray:
        return self.vectors[-1, :]


@dataclass(frozen=True)
class Propagator:
    """M = exp(-iKt) with its evolution time."""

    matrix: np.ndarray
    time: float

    @property
    def m00(self) -> complex:
        return complex(self.matrix[0, 0])

    @property
    def m0R(self) -> complex:
        return complex(self.matrix[0, -1])

    @property
    def mRR(self) -> complex:
        return complex(self.matrix[-1, -1])


@dataclass(frozen=True)
class ResonantModeChoice:
    """Selected transfer mode with matched couplings and swap time."""

    mode_index: int
    energy: float
    g_left: float
    g_right: float
    tunneling_rate: float
    transfer_time: float


@dataclass(frozen=True)
class BdGDiagonalization:
    """Orthogonal diagonalization O A O^T = Lambda of a pairing matrix.

    Rows are interleaved: row 2k holds the +eps_k quasiparticle, row
    2k+1 its -eps_k partner (0-based; energies ascend over k).
    """

    O: np.ndarray
    energies: np.ndarray  # interleaved (+eps_1, -eps_1, +eps_2, ...)

    @property
    def positive_energies(self) -> np.ndarray:
        return self.energies[::2]


def eigenmodes(chain_matrix: np.ndarray) -> EigenmodeSet:
    """Hermitian eigensolve with a deterministic sign convention.

    Each mode's largest-magnitude component is made positive so matched
    couplings and transfer times are platform-independent.
    """
    H = np.asarray(chain_matrix)
    if not np.allclose(H, H.conj().T, atol=1e-12):
        raise ValueError("chain matrix must be Hermitian")
    w, v = np.linalg.eigh(H)
    for k in range(v.shape[1]):
        j = int(np.argmax(np.abs(v[:, k])))
        if v[j, k].real < 0:
            v[:, k] = -v[:, k]
    return EigenmodeSet(w, v)


def propagator(K: np.ndarray, t: float) -> Propagator:
    """exp(-iKt) through a full Hermitian eigendecomposition."""
    if t < 0:
        raise ValueError("time must be non-negative")
    K = np.asarray(K)
    w, v = np.linalg.eigh(K)
    M = (v * np.exp(-1j * w * t)) @ v.conj().T
    return Propagator(M, t)


def propagator_elements(K: np.ndarray, times: np.ndarray):
    """Vectorized transfer elements of exp(-iKt) over many times.

    Returns (m00, m0R, mRR, leak) where leak is the register-excluded
    chain sum  sum_{i=1..N} M_{N+1,i} M_{i,0}  entering the encoded
    fidelity.  Used by the strong-coupling optimizer where thousands of
    times share one eigendecomposition.
    """
    K = np.asarray(K)
    times = np.atleast_1d(np.asarray(times, float))
    w, v = np.linalg.eigh(K)
    phases = np.exp(-1j * np.outer(times, w))  # (nt, n)
    vL = v[0, :]
    vR = v[-1, :]
    m00 = phases @ (vL * vL.conj())
    m0R = phases @ (vL * vR.conj())
    mRR = phases @ (vR * vR.conj())
    # (M^2)_{R,0} needs phases squared; subtract the register terms.
    sq = (phases * phases) @ (vR * vL.conj())
    mR0 = phases @ (vR * vL.conj())
    leak = sq - mR0 * m00 - mRR * mR0
    return m00, m0R, mRR, leak


def select_resonant_mode(
    modes: EigenmodeSet,
    g_max: float,
    strategy: int | str = "min_error",
    chain_sites: int | None = None,
    T1: float = math.inf,
) -> ResonantModeChoice:
    """Pick the transfer mode z and match the register couplings to it.

    ``strategy`` is either a fixed mode index or ``"min_error"``, which
    minimizes the off-resonant-plus-decoherence error budget over all
    candidate modes (with the per-mode optimal coupling when T1 is
    finite, capped at ``g_max``).

    Matching sets t_z = gL |psi_{z,L}| = gR |psi_{z,R}| with gL = g_max
    and tau = pi / (sqrt(2) t_z).
    """
    if g_max <= 0:
        raise ValueError("g_max must be positive")
    n = modes.n_sites
    aL = np.abs(modes.psi_left)
    aR = np.abs(modes.psi_right)
    usable = (aL > _END_AMPLITUDE_FLOOR) & (aR > _END_AMPLITUDE_FLOOR)

    def choice_for(z: int, gL: float) -> ResonantModeChoice:
        if not usable[z]:
            raise NoTransferModeError(f"mode {z} has vanishing end amplitude")
        gaps = np.abs(np.delete(modes.energies, z) - modes.energies[z])
        if gaps.size and gaps.min() < _DEGENERACY_GAP:
            raise DegenerateModeError(
                f"mode {z} is degenerate (gap {gaps.min():.2e}); "
                "the isolated-mode picture does not apply"
            )
        t_z = gL * aL[z]
        gR = t_z / aR[z]
        tau = math.pi / (math.sqrt(2.0) * t_z)
        return ResonantModeChoice(z, float(modes.energies[z]), gL, float(gR), float(t_z), tau)

    if isinstance(strategy, (int, np.integer)):
        return choice_for(int(strategy), g_max)
    if strategy != "min_error":
        raise ValueError(f"unknown strategy {strategy!r}")
    if not usable.any():
        raise NoTransferModeError("no eigenmode has amplitude on both chain ends")

    from .fidelity import error_budget, optimal_coupling  # local to avoid a cycle

    n_chain = chain_sites if chain_sites is not None else n
    best = None
    best_eps = math.inf
    for z in range(n):
        if not usable[z]:
            continue
        try:
            if math.isfinite(T1):
                gL = min(optimal_coupling(modes, z, n_chain, T1)[0], g_max)
            else:
                gL = g_max
            cand = choice_for(z, gL)
            eps = error_budget(modes, cand, n_chain, T1).total
        except DegenerateModeError:
            continue
        if eps < best_eps or (
            eps == best_eps and best is not None and abs(cand.energy) < abs(best.energy)
        ):
            best, best_eps = cand, eps
    if best is None:
        raise NoTransferModeError("all candidate modes rejected")
    return best


def bdg_diagonalize(A: np.ndarray) -> BdGDiagonalization:
    """Orthogonal diagonalization of a real symmetric pairing matrix.

    Validates the particle-hole symmetry of the spectrum (pairs +-eps to
    1e-8) and orders rows in the interleaved (+eps_k, -eps_k) layout.
    """
    A = np.asarray(A, float)
    if A.shape[0] % 2:
        raise ValueError("pairing matrix must have even dimension")
    if not np.allclose(A, A.T, atol=1e-12):
        raise ValueError("pairing matrix must be symmetric")
    n = A.shape[0] // 2
    w, v = np.linalg.eigh(A)
    if np.max(np.abs(w[:n][::-1] + w[n:])) > 1e-8:
        raise ValueError("spectrum is not symmetric about zero")
    O = np.empty_like(A)
    energies = np.empty(2 * n)
    for k in range(n):
        O[2 * k, :] = v[:, n + k]
        O[2 * k + 1, :] = v[:, n - 1 - k]
        energies[2 * k] = w[n + k]
        energies[2 * k + 1] = w[n - 1 - k]
    return BdGDiagonalization(O, energies)


@dataclass(frozen=True)
class EffectiveSwapResult:
    """Register-subspace map extracted from the full pairing dynamics."""

    register_block: np.ndarray  # 2x2, particle-sector amplitudes
    exchange_amplitude: float
    leakage: float
    transfer_time: float
    mode_energy: float


def bdg_effective_swap_check(spec: ChainSpec, mode_index: int | None = None) -> EffectiveSwapResult:
    """Evolve the full pairing dynamics and report the register exchange.

    The chain-only matrix is diagonalized first; the registers are tuned
    to the selected quasiparticle energy and the full system evolved for
    tau = pi / (sqrt(2) g u_1) with u_1 the mode's particle amplitude on
    the first chain site.  In the weak-coupling paramagnetic regime the
    returned exchange amplitude approaches 1; in the Majorana regime the
    hopping and pairing contributions cancel and it collapses.
    """
    if ModelKind(spec.model_kind) is not ModelKind.TFIM:
        raise ValueError("effective swap check expects a TFIM spec")
    n = spec.chain_length
    diag = bdg_diagonalize(build_bdg_matrix(spec, include_registers=False))
    if mode_index is None:
        mode_index = int(np.argmin(diag.positive_energies))
    eps_z = float(diag.positive_energies[mode_index])
    u = diag.O[2 * mode_index, :n]  # particle components of mode z
    u1 = abs(u[0])
    if u1 < _END_AMPLITUDE_FLOOR:
        raise NoTransferModeError("selected mode has no amplitude on the chain end")
    g = spec.g_left if spec.g_left > 0 else spec.g_right
    if g <= 0:
        raise ValueError("register coupling must be positive")
    tau = math.pi / (math.sqrt(2.0) * g * u1)

    full_spec = ChainSpec(
        model_kind=ModelKind.TFIM,
        chain_length=n,
        pattern=spec.pattern,
        g_left=g,
        g_right=g,
        register_field=eps_z,
        uniform_field=spec.uniform_field,
        kappa_ref=spec.kappa_ref,
        d_ref=spec.d_ref,
    )
    A = build_bdg_matrix(full_spec, include_registers=True)
    w, v = np.linalg.eigh(A)
    U = (v * np.exp(-2j * w * tau)) @ v.T  # phi(t) = exp(-2iAt) phi
    m = n + 2
    iL, iR = 0, n + 1  # particle rows of the registers
    block = np.array([[U[iL, iL], U[iL, iR]], [U[iR, iL], U[iR, iR]]])

    # Leakage: weight of the evolved left-register mode outside the span
    # of {register particle/hole modes, +-z chain quasiparticles}.
    col = U[:, iL]
    basis = []
    for idx in (iL, iR, iL + m, iR + m):
        e = np.zeros(2 * m)
        e[idx] = 1.0
        basis.append(e)
    for row in (2 * mode_index, 2 * mode_index + 1):
        vec = np.zeros(2 * m)
        vec[1 : n + 1] = diag.O[row, :n]
        vec[m + 1 : m + n + 1] = diag.O[row, n:]
        basis.append(vec)
    Q = np.linalg.qr(np.array(basis).T)[0]
    leak = 1.0 - float(np.linalg.norm(Q.conj().T @ col) ** 2)
    return EffectiveSwapResult(block, float(abs(U[iR, iL])), leak, tau, eps_z)


@dataclass(frozen=True)
class BosonicTransferResult:
    epsilon: float
    n_out: float
    leaked_occupation: float


def bosonic_swap_and_thermal_error(
    M: Propagator,
    n_bar_register: float,
    n_bar_chain: np.ndarray | float,
    n_bar_target: float = 0.0,
) -> BosonicTransferResult:
    """Excess-noise bookkeeping for the oscillator-chain swap.

    epsilon = 1 - |M_{N+1,0}|^2 is the leaked weight; the output
    occupation mixes the input with the M-weighted average occupation of
    the leaked modes: n_out = (1-eps) n_in + eps <n_eps>.
    """
    Mm = M.matrix
    n = Mm.shape[0] - 2
    eps = 1.0 - abs(Mm[-1, 0]) ** 2
    occ = np.empty(n + 2)
    occ[0] = n_bar_register
    occ[1:-1] = np.asarray(n_bar_chain) * np.ones(n)
    occ[-1] = n_bar_target
    n_out = float(np.sum(np.abs(Mm[-1, :]) ** 2 * occ))
    leaked = (n_out - (1.0 - eps) * n_bar_register) / eps if eps > 0 else 0.0
    return BosonicTransferResult(float(eps), n_out, float(leaked))


def participation_ratio(psi: np.ndarray) -> float:
    """N_PR = 1 / sum_i |psi_i|^4 for a normalized mode vector."""
    psi = np.asarray(psi)
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > 1e-8:
        raise ValueError("mode vector must be normalized")
    return float(1.0 / np.sum(np.abs(psi) ** 4))
