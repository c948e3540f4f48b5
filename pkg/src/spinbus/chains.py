"""Hamiltonian construction for spin-chain buses.

Everything downstream (propagators, fidelities, exact diagonalization)
consumes the matrices built here: nearest-neighbor or long-range coupling
maps, single-particle hopping matrices for number-conserving models, and
the real symmetric pairing (Bogoliubov-de-Gennes style) matrix for the
transverse-field Ising chain.

Internal units: the reference coupling strength is 1 and time is measured
in its inverse.  Conversion to physical units (kHz, nm, ms) happens only
at the command-line boundary.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Union

import numpy as np

__all__ = [
    "ModelKind",
    "RangeRule",
    "Uniform",
    "Engineered",
    "Explicit",
    "FromPositions",
    "CouplingPattern",
    "DisorderSpec",
    "PositionsRealization",
    "ChainSpec",
    "sample_positions",
    "couplings_from_positions",
    "engineered_couplings",
    "build_single_particle_matrix",
    "build_bdg_matrix",
]


class ModelKind(str, Enum):
    XX = "XX"
    TFIM = "TFIM"
    BOSONIC = "Bosonic"


class RangeRule(str, Enum):
    """Which pairs of a positioned chain interact."""

    NEAREST_NEIGHBOR = "nearest_neighbor"
    FULL_DIPOLAR = "full_dipolar"
    NNN_CANCELLED = "nnn_cancelled"


@dataclass(frozen=True)
class Uniform:
    """All nearest-neighbor bonds equal to ``kappa``."""

    kappa: float = 1.0


@dataclass(frozen=True)
class Engineered:
    """Perfect-transfer bond profile J_i = (1/2) sqrt((i+1)(N+1-i)).

    Covers every bond of the (N+2)-site chain including the two register
    bonds, so the register couplings of the owning :class:`ChainSpec` are
    ignored.
    """


@dataclass(frozen=True)
class Explicit:
    """Explicit list of the N-1 internal nearest-neighbor bonds."""

    values: tuple[float, ...]

    def __init__(self, values):
        object.__setattr__(self, "values", tuple(float(v) for v in values))


@dataclass(frozen=True)
class FromPositions:
    """Couplings derived from site coordinates by the cube law.

    ``positions`` may cover either the N chain sites only (register bonds
    then come from the spec's g_left/g_right) or all N+2 sites including
    the registers (register bonds follow the cube law as well).
    """

    positions: tuple[float, ...]
    rule: RangeRule = RangeRule.NEAREST_NEIGHBOR

    def __init__(self, positions, rule=RangeRule.NEAREST_NEIGHBOR):
        pos = tuple(float(x) for x in positions)
        if any(b <= a for a, b in zip(pos, pos[1:])):
            raise ValueError("positions must be strictly increasing")
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "rule", RangeRule(rule))


CouplingPattern = Union[Uniform, Engineered, Explicit, FromPositions]


@dataclass(frozen=True)
class DisorderSpec:
    """Gaussian positioning disorder along a 1D implantation axis."""

    mean_spacing: float
    sigma: float
    min_spacing_fraction: float = 0.2
    master_seed: int = 0

    def __post_init__(self):
        if self.mean_spacing <= 0:
            raise ValueError("mean_spacing must be positive")
        if self.sigma < 0:
            raise ValueError("sigma must be non-negative")
        if not 0.0 < self.min_spacing_fraction < 1.0:
            raise ValueError("min_spacing_fraction must lie in (0, 1)")


@dataclass(frozen=True)
class PositionsRealization:
    """One sampled set of site coordinates, with its RNG provenance."""

    positions: tuple[float, ...]
    master_seed: int
    stream: int


@dataclass(frozen=True)
class ChainSpec:
    """Declarative description of a bus chain plus its two registers.

    ``chain_length`` counts bus sites only; the registers occupy matrix
    rows/columns 0 and N+1.  ``uniform_field`` is the diagonal field on
    every site (the transverse field for the TFIM); ``register_field``
    overrides it on the two registers (detuning for even-N transfer, or
    the register frequency for the bosonic model).
    """

    model_kind: ModelKind
    chain_length: int
    pattern: CouplingPattern
    g_left: float = 0.0
    g_right: float = 0.0
    register_field: float | None = None
    uniform_field: float = 0.0
    kappa_ref: float = 1.0
    d_ref: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "model_kind", ModelKind(self.model_kind))
        n = self.chain_length
        if n < 1:
            raise ValueError("chain_length must be at least 1")
        if self.g_left < 0 or self.g_right < 0:
            raise ValueError("register couplings must be non-negative")
        if self.kappa_ref <= 0:
            raise ValueError("kappa_ref must be positive")
        pat = self.pattern
        if isinstance(pat, Explicit) and len(pat.values) != n - 1:
            raise ValueError(
                f"Explicit pattern needs {n - 1} internal bonds, got {len(pat.values)}"
            )
        if isinstance(pat, FromPositions) and len(pat.positions) not in (n, n + 2):
            raise ValueError(
                "FromPositions needs N or N+2 coordinates "
                f"(N={n}, got {len(pat.positions)})"
            )


def sample_positions(spec: DisorderSpec, n_sites: int, stream: int = 0) -> PositionsRealization:
    """Draw one positions realization with independent Gaussian gaps.

    Gaps below ``min_spacing_fraction * mean_spacing`` are rejected and
    redrawn, which keeps the cube-law couplings finite.  The generator is
    counter-based (Philox keyed by ``(master_seed, stream)``) so every
    realization is reproducible independently of evaluation order.
    """
    if n_sites < 2:
        raise ValueError("need at least two sites")
    rng = np.random.Generator(np.random.Philox(key=[spec.master_seed, stream]))
    clamp = spec.min_spacing_fraction * spec.mean_spacing
    gaps = rng.normal(spec.mean_spacing, spec.sigma, size=n_sites - 1)
    while True:
        bad = gaps < clamp
        if not bad.any():
            break
        gaps[bad] = rng.normal(spec.mean_spacing, spec.sigma, size=int(bad.sum()))
    positions = np.concatenate([[0.0], np.cumsum(gaps)])
    return PositionsRealization(tuple(positions), spec.master_seed, stream)


def couplings_from_positions(
    pos: PositionsRealization | tuple[float, ...],
    rule: RangeRule = RangeRule.NEAREST_NEIGHBOR,
    kappa_ref: float = 1.0,
    d_ref: float = 1.0,
) -> np.ndarray:
    """Full symmetric coupling matrix J_ij = kappa_ref (d_ref/|x_i-x_j|)^3.

    The range rule masks pairs: nearest-neighbor keeps |i-j| = 1 only,
    the NNN-cancelled rule zeroes |i-j| = 2 and keeps everything else.
    """
    x = np.asarray(pos.positions if isinstance(pos, PositionsRealization) else pos, float)
    n = len(x)
    rule = RangeRule(rule)
    dist = np.abs(x[:, None] - x[None, :])
    np.fill_diagonal(dist, np.inf)
    J = kappa_ref * (d_ref / dist) ** 3
    sep = np.abs(np.arange(n)[:, None] - np.arange(n)[None, :])
    if rule is RangeRule.NEAREST_NEIGHBOR:
        J[sep != 1] = 0.0
    elif rule is RangeRule.NNN_CANCELLED:
        J[sep == 2] = 0.0
    np.fill_diagonal(J, 0.0)
    return J


def engineered_couplings(n_chain: int) -> np.ndarray:
    """The N+1 bonds J_i = (1/2) sqrt((i+1)(N+1-i)), i = 0..N.

    This profile makes the (N+2)-site single-particle spectrum exactly
    linear, so the chain acts as a perfect mirror at t = pi.
    """
    if n_chain < 0:
        raise ValueError("chain length must be non-negative")
    i = np.arange(n_chain + 1, dtype=float)
    return 0.5 * np.sqrt((i + 1.0) * (n_chain + 1.0 - i))


def _nn_bonds(spec: ChainSpec) -> np.ndarray:
    """All N+1 nearest-neighbor bonds of the (N+2)-site system."""
    n = spec.chain_length
    pat = spec.pattern
    if isinstance(pat, Uniform):
        bonds = np.full(n + 1, pat.kappa)
        bonds[0] = spec.g_left
        bonds[-1] = spec.g_right
    elif isinstance(pat, Engineered):
        bonds = engineered_couplings(n)
    elif isinstance(pat, Explicit):
        bonds = np.concatenate([[spec.g_left], pat.values, [spec.g_right]])
    elif isinstance(pat, FromPositions):
        x = np.asarray(pat.positions)
        gaps = np.diff(x)
        inner = spec.kappa_ref * (spec.d_ref / gaps) ** 3
        if len(x) == n + 2:
            bonds = inner
        else:
            bonds = np.concatenate([[spec.g_left], inner, [spec.g_right]])
    else:
        raise TypeError(f"unknown coupling pattern {pat!r}")
    return bonds


def build_single_particle_matrix(spec: ChainSpec) -> np.ndarray:
    """Hermitian (N+2)x(N+2) hopping matrix K for XX/bosonic chains.

    Rows/columns 0 and N+1 are the registers.  The diagonal carries the
    uniform field everywhere and the register field (detuning) on the two
    register entries.  The propagator of every analytic fidelity formula
    is exp(-i K t).
    """
    if spec.model_kind is ModelKind.TFIM:
        raise ValueError("TFIM chains have pairing terms; use build_bdg_matrix")
    n = spec.chain_length
    K = np.zeros((n + 2, n + 2))
    bonds = _nn_bonds(spec)
    idx = np.arange(n + 1)
    K[idx, idx + 1] = bonds
    K[idx + 1, idx] = bonds
    if isinstance(spec.pattern, FromPositions) and spec.pattern.rule is not RangeRule.NEAREST_NEIGHBOR:
        # Long-range part among the positioned sites.
        x = spec.pattern.positions
        J = couplings_from_positions(x, spec.pattern.rule, spec.kappa_ref, spec.d_ref)
        if len(x) == n + 2:
            K[:, :] = 0.0
            K += J
        else:
            K[1 : n + 1, 1 : n + 1] = J
            K[0, 1] = K[1, 0] = spec.g_left
            K[n, n + 1] = K[n + 1, n] = spec.g_right
    np.fill_diagonal(K, spec.uniform_field)
    if spec.register_field is not None:
        K[0, 0] = K[n + 1, n + 1] = spec.register_field
    return K


def build_bdg_matrix(spec: ChainSpec, include_registers: bool = False) -> np.ndarray:
    """Real symmetric pairing matrix A for the transverse-field Ising chain.

    Conventions (chain Hamiltonian -kappa sum sx sx + B sum sz, checked
    against dense diagonalization: minus the summed positive eigenvalues
    of A is the exact many-body ground state energy):

        alpha = B on the diagonal, -kappa/2 on chain bonds
        beta_{i,i+1} = -kappa/2,  beta_{i+1,i} = +kappa/2
        A = [[alpha, beta], [beta^T, -alpha]]

    Physical mode evolution carries a factor two: phi(t) = exp(-2iAt) phi.
    With ``include_registers`` the two exchange-coupled registers are
    appended (hopping only, alpha entries g/2, diagonal B').
    """
    if ModelKind(spec.model_kind) is not ModelKind.TFIM:
        raise ValueError("build_bdg_matrix expects a TFIM spec")
    n = spec.chain_length
    bonds = _nn_bonds(spec)[1:-1]  # internal chain bonds only
    B = spec.uniform_field
    if include_registers:
        m = n + 2
        alpha = np.zeros((m, m))
        beta = np.zeros((m, m))
        for i, J in enumerate(bonds, start=1):
            alpha[i, i + 1] = alpha[i + 1, i] = -J / 2.0
            beta[i, i + 1] = -J / 2.0
            beta[i + 1, i] = +J / 2.0
        alpha[np.arange(1, n + 1), np.arange(1, n + 1)] = B
        Bp = spec.register_field if spec.register_field is not None else B
        alpha[0, 0] = alpha[m - 1, m - 1] = Bp
        alpha[0, 1] = alpha[1, 0] = spec.g_left / 2.0
        alpha[n, n + 1] = alpha[n + 1, n] = spec.g_right / 2.0
    else:
        alpha = np.zeros((n, n))
        beta = np.zeros((n, n))
        for i, J in enumerate(bonds):
            alpha[i, i + 1] = alpha[i + 1, i] = -J / 2.0
            beta[i, i + 1] = -J / 2.0
            beta[i + 1, i] = +J / 2.0
        alpha += B * np.eye(n)
    return np.block([[alpha, beta], [beta.T, -alpha]])
