"""Ensembles of pure states inside one sector of a generalized bipartition.

Provides Haar ensembles on a sector, narrow-energy-window ensembles whose
IR reduced states acquire a controlled first-moment trend, synthetic random
observables with banded-random-matrix statistics, and the measurement helpers
(reduced states, pairwise trace distances, matrix-element statistics) used by
the scaling experiments.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .algebra import GeneralizedBipartition
from .qcore import Operator, DensityMatrix, PureState, RngStream, _generator, haar_unitary

ORTHO_TOL = 1e-9
SUPPORT_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class EthEnsemble:
    """Orthonormal pure states supported on a single sector.

    ``entropy_S`` is the log sector dimension log(d1*d2); energies are sorted
    ascending and all zero for ensembles with no energy structure.
    """

    bp: GeneralizedBipartition
    sector: int
    states: tuple
    energies: np.ndarray
    entropy_S: float

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        en = np.asarray(self.energies, dtype=float)
        en.setflags(write=False)
        object.__setattr__(self, "energies", en)
        if not 0 <= self.sector < len(self.bp.sectors):
            raise ValueError(f"sector index {self.sector} out of range")
        if len(self.states) == 0:
            raise ValueError("ensemble needs at least one state")
        if en.shape != (len(self.states),):
            raise ValueError("one energy per state required")
        if np.any(np.diff(en) < 0):
            raise ValueError("energies must be sorted ascending")
        s = self.bp.sectors[self.sector]
        if abs(self.entropy_S - np.log(s.d1 * s.d2)) > 1e-9:
            raise ValueError("entropy_S inconsistent with sector dimension")
        v = self.state_matrix
        gram = v.conj().T @ v
        if np.max(np.abs(gram - np.eye(len(self.states)))) > ORTHO_TOL:
            raise ValueError("ensemble states are not orthonormal")
        outside = v - s.projector.entries @ v
        if np.max(np.abs(outside)) > SUPPORT_TOL:
            raise ValueError("ensemble states leak outside the sector")

    @cached_property
    def state_matrix(self) -> np.ndarray:
        """States as columns, shape (ambient_dim, n)."""
        return np.column_stack([st.amplitudes for st in self.states])

    @property
    def n_states(self) -> int:
        return len(self.states)


@dataclass(frozen=True)
class EthAnsatzParams:
    """Parameters of the matrix-element ansatz for one observable.

    The smooth diagonal profile is ``mean_diag + diag_slope * E`` (constant
    when ``flat``); ``envelope`` multiplies the e^{-S/2}-suppressed
    fluctuation part and must be nonnegative.
    """

    mean_diag: float
    envelope: float
    entropy_S: float
    flat: bool = True
    diag_slope: float = 0.0

    def __post_init__(self):
        if self.envelope < 0:
            raise ValueError(f"envelope must be nonnegative, got {self.envelope}")
        if self.entropy_S <= 0:
            raise ValueError("entropy_S must be positive")
        if self.flat and self.diag_slope != 0.0:
            raise ValueError("flat ansatz cannot carry a diagonal slope")

    def smooth_diag(self, energy):
        """The slowly-varying diagonal profile evaluated at the given energies."""
        return self.mean_diag + self.diag_slope * np.asarray(energy, dtype=float)


@dataclass(frozen=True, eq=False)
class EthStats:
    """Measured matrix-element statistics of one observable on one ensemble."""

    diag_mean: float
    diag_spread: float
    offdiag_rms: float
    fitted_envelope: float
    raw_A: np.ndarray


def haar_sector_ensemble(bp: GeneralizedBipartition, sector: int, n_states: int,
                         rng) -> EthEnsemble:
    """The first n_states columns of a Haar unitary on the sector, embedded."""
    if not 0 <= sector < len(bp.sectors):
        raise ValueError(f"sector index {sector} out of range")
    s = bp.sectors[sector]
    dim = s.d1 * s.d2
    if not 1 <= n_states <= dim:
        raise ValueError(f"n_states must be in [1, {dim}], got {n_states}")
    u = haar_unitary(dim, rng)
    cols = s.iso @ u.entries[:, :n_states]
    states = tuple(PureState(cols[:, i]) for i in range(n_states))
    return EthEnsemble(bp=bp, sector=sector, states=states,
                       energies=np.zeros(n_states), entropy_S=float(np.log(dim)))


def energy_window_ensemble(bp: GeneralizedBipartition, sector: int, n_states: int,
                           width: float, slope: float, rng):
    """Ensemble in a narrow energy window, with an IR trend of known size.

    States are built as sqrt(p_i)|0>|a_i> + sqrt(1-p_i)|1>|b_i> on the sector
    factors, with p_i = (1 + slope*E_i)/2 and the a/b families each drawn from
    one Haar unitary; orthonormality is then exact and the IR expectation of
    sigma_z along the first factor is slope*E_i exactly, so any two reduced
    states differ in trace distance by at least slope*|E_i - E_j|/2.

    Returns ``(ensemble, params)``; zero width falls back to a Haar sector
    ensemble with flat parameters.
    """
    if width < 0:
        raise ValueError("window width must be nonnegative")
    if not 0 <= sector < len(bp.sectors):
        raise ValueError(f"sector index {sector} out of range")
    s = bp.sectors[sector]
    entropy = float(np.log(s.d1 * s.d2))
    if width == 0.0:
        ens = haar_sector_ensemble(bp, sector, n_states, rng)
        return ens, EthAnsatzParams(mean_diag=0.0, envelope=1.0,
                                    entropy_S=entropy, flat=True)
    if s.d1 < 2:
        raise ValueError("energy window construction needs d1 >= 2")
    if not 1 <= n_states <= s.d2:
        raise ValueError(f"n_states must be in [1, d2={s.d2}] for a window ensemble")
    if abs(slope) * width / 2.0 > 1.0:
        raise ValueError("slope * width/2 exceeds 1; occupations would leave [0, 1]")
    g = _generator(rng)
    energies = np.sort(g.uniform(-width / 2.0, width / 2.0, size=n_states))
    p = (1.0 + slope * energies) / 2.0
    a = haar_unitary(s.d2, g).entries[:, :n_states]
    b = haar_unitary(s.d2, g).entries[:, :n_states]
    states = []
    for i in range(n_states):
        block = np.zeros((s.d1, s.d2), dtype=complex)
        block[0] = np.sqrt(p[i]) * a[:, i]
        block[1] = np.sqrt(1.0 - p[i]) * b[:, i]
        states.append(PureState(s.iso @ block.ravel()))
    ens = EthEnsemble(bp=bp, sector=sector, states=tuple(states),
                      energies=energies, entropy_S=entropy)
    params = EthAnsatzParams(mean_diag=0.0, envelope=1.0, entropy_S=entropy,
                             flat=False, diag_slope=slope)
    return ens, params


def reduced_states(ens: EthEnsemble) -> np.ndarray:
    """IR reduced density matrices of every ensemble state, shape (n, d1, d1)."""
    s = ens.bp.sectors[ens.sector]
    coords = (s.iso.conj().T @ ens.state_matrix).T.reshape(ens.n_states, s.d1, s.d2)
    return np.einsum("nab,ncb->nac", coords, coords.conj())


def pairwise_reduced_distances(ens: EthEnsemble) -> np.ndarray:
    """Condensed vector of trace distances between all IR reduced-state pairs.

    Entry order matches scipy's pdist convention: (0,1), (0,2), ..., (n-2,n-1).
    """
    red = reduced_states(ens)
    n = red.shape[0]
    if n < 2:
        raise ValueError("need at least two states for pairwise distances")
    iu, ju = np.triu_indices(n, k=1)
    diffs = red[iu] - red[ju]
    eigs = np.linalg.eigvalsh(diffs)
    return 0.5 * np.sum(np.abs(eigs), axis=1)


def microcanonical_density(ens: EthEnsemble) -> DensityMatrix:
    """Equal-weight mixture of the ensemble states."""
    v = ens.state_matrix
    m = (v @ v.conj().T) / ens.n_states
    return DensityMatrix.from_matrix(0.5 * (m + m.conj().T))


def rotated_pair(ens: EthEnsemble, i: int, j: int, sign=1) -> PureState:
    """The superposition (|E_i> + sign |E_j>)/sqrt(2) for sign in {1,-1,1j,-1j}."""
    n = ens.n_states
    if not (0 <= i < n and 0 <= j < n) or i == j:
        raise ValueError(f"need two distinct state indices in [0, {n})")
    sign = complex(sign)
    if abs(abs(sign) - 1.0) > 1e-12:
        raise ValueError("sign must be a unit-modulus phase")
    amp = (ens.states[i].amplitudes + sign * ens.states[j].amplitudes) / np.sqrt(2.0)
    return PureState(amp)


def synthetic_eth_observable(n: int, params: EthAnsatzParams, energies,
                             rng) -> Operator:
    """Random Hermitian matrix drawn from the matrix-element ansatz.

    Diagonal: smooth profile at the given energies plus e^{-S/2}-suppressed
    real Gaussian noise.  Off-diagonal: envelope * e^{-S/2} * (x+iy)/sqrt(2)
    with unit-variance x, y, so |R_ij|^2 averages to one.
    """
    energies = np.asarray(energies, dtype=float)
    if energies.shape != (n,):
        raise ValueError(f"expected {n} energies, got shape {energies.shape}")
    g = _generator(rng)
    scale = params.envelope * np.exp(-params.entropy_S / 2.0)
    x = g.standard_normal((n, n))
    y = g.standard_normal((n, n))
    r_diag = g.standard_normal(n)
    iu = np.triu_indices(n, k=1)
    obs = np.zeros((n, n), dtype=complex)
    obs[iu] = scale * (x[iu] + 1j * y[iu]) / np.sqrt(2.0)
    obs = obs + obs.conj().T
    obs[np.diag_indices(n)] = params.smooth_diag(energies) + scale * r_diag
    return Operator(obs, hermitian=True)


def measure_eth_stats(obs, ens: EthEnsemble) -> EthStats:
    """Matrix-element statistics of an ambient observable in the energy basis.

    ``raw_A`` is the fluctuation matrix (E - diag profile) rescaled by
    e^{S/2}; under the ansatz its entries are O(1).
    """
    o = obs.entries if isinstance(obs, Operator) else np.asarray(obs, dtype=complex)
    v = ens.state_matrix
    if o.shape != (v.shape[0], v.shape[0]):
        raise ValueError(f"observable dim {o.shape} != ambient dim {v.shape[0]}")
    emat = v.conj().T @ o @ v
    n = emat.shape[0]
    diag = np.real(np.diag(emat))
    diag_mean = float(np.mean(diag))
    diag_spread = float(np.max(diag) - np.min(diag))
    iu = np.triu_indices(n, k=1)
    off = emat[iu]
    offdiag_rms = float(np.sqrt(np.mean(np.abs(off) ** 2))) if off.size else 0.0
    boost = np.exp(ens.entropy_S / 2.0)
    raw = (emat - diag_mean * np.eye(n)) * boost
    return EthStats(diag_mean=diag_mean, diag_spread=diag_spread,
                    offdiag_rms=offdiag_rms, fitted_envelope=offdiag_rms * boost,
                    raw_A=raw)
