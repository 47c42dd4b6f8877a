"""Grover search, state discrimination by amplitude rotation, and the BBBV
progress bound.

The two-dimensional rotation picture drives everything: a full statevector
simulation is kept alongside as an independent check, and the same rotation
angle reappears when amplifying the trace-distance between two nearly
identical pure states, which is what prices the quadratic query cost of
telling a microstate from a macrostate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .qcore import PureState, _generator, haar_unitary

MAX_SEARCH_QUBITS = 12
MAX_BBBV_QUBITS = 8


@dataclass(frozen=True)
class GroverPlan:
    """Rotation-angle bookkeeping for searching M marked items out of N."""

    N: int
    M: int
    theta: float
    predicted_R: int

    def __post_init__(self):
        if not 1 <= self.M <= self.N:
            raise ValueError(f"need 1 <= M <= N, got M={self.M}, N={self.N}")
        if not 0.0 < self.theta <= math.pi + 1e-12:
            raise ValueError(f"rotation angle {self.theta} out of range")
        cap = math.ceil(math.pi / 4.0 * math.sqrt(self.N / self.M))
        if not 0 <= self.predicted_R <= cap:
            raise ValueError(f"predicted_R={self.predicted_R} exceeds the "
                             f"ceil(pi/4 sqrt(N/M)) = {cap} query cap")

    @classmethod
    def for_search(cls, N: int, M: int) -> "GroverPlan":
        if not (isinstance(N, (int, np.integer)) and isinstance(M, (int, np.integer))):
            raise ValueError("N and M must be integers")
        if not 1 <= M <= N:
            raise ValueError(f"need 1 <= M <= N, got M={M}, N={N}")
        ratio = math.sqrt(M / N)
        theta = 2.0 * math.asin(ratio)
        r = int(round(math.acos(ratio) / theta)) if M < N else 0
        return cls(N=int(N), M=int(M), theta=theta, predicted_R=r)

    def success_probability(self, k: int) -> float:
        return grover_search_2d(self, k)


def grover_search_2d(plan: GroverPlan, k: int) -> float:
    """Success probability after k iterations in the two-dimensional picture."""
    if k < 0:
        raise ValueError("iteration count must be nonnegative")
    return math.sin((2 * k + 1) * plan.theta / 2.0) ** 2


def grover_search_full(n_qubits: int, marked, k: int, rng=None) -> float:
    """Statevector Grover simulation; returns total probability on marked items.

    ``marked`` is either an iterable of computational-basis indices or an
    integer count (then that many distinct indices are drawn with ``rng``).
    """
    if not 1 <= n_qubits <= MAX_SEARCH_QUBITS:
        raise ValueError(f"n_qubits must be in [1, {MAX_SEARCH_QUBITS}]")
    if k < 0:
        raise ValueError("iteration count must be nonnegative")
    n = 2 ** n_qubits
    if isinstance(marked, (int, np.integer)):
        if not 1 <= marked <= n:
            raise ValueError(f"marked count must be in [1, {n}]")
        if rng is None:
            raise ValueError("drawing marked items needs an rng")
        idx = _generator(rng).choice(n, size=int(marked), replace=False)
    else:
        idx = np.asarray(sorted(set(int(x) for x in marked)), dtype=int)
        if idx.size == 0:
            raise ValueError("marked set must be nonempty")
        if idx.min() < 0 or idx.max() >= n:
            raise ValueError(f"marked indices must lie in [0, {n})")
    psi = np.full(n, 1.0 / math.sqrt(n), dtype=complex)
    for _ in range(k):
        psi[idx] = -psi[idx]
        psi = 2.0 * psi.mean() - psi
    return float(np.sum(np.abs(psi[idx]) ** 2))


@dataclass(frozen=True)
class DistinguishPlan:
    """Iteration budget for amplifying a small trace distance D0 to O(1)."""

    D0: float
    theta_rs: float
    theta_rs_smallangle: float
    predicted_iters: float

    def __post_init__(self):
        if not 0.0 < self.D0 < 1.0:
            raise ValueError(f"initial distance must be in (0, 1), got {self.D0}")


def plan_distinguish(D0: float) -> DistinguishPlan:
    """Rotation angle 2*arcsin(D0) and the ~pi/(16 D0) iteration estimate."""
    if not 0.0 < D0 < 1.0:
        raise ValueError(f"initial distance must be in (0, 1), got {D0}")
    return DistinguishPlan(D0=D0, theta_rs=2.0 * math.asin(D0),
                           theta_rs_smallangle=2.0 * D0,
                           predicted_iters=math.pi / (16.0 * D0))


def pure_pair_at_distance(D0: float, dim: int = 2):
    """Two unit vectors with trace distance exactly D0 (overlap sqrt(1-D0^2))."""
    if not 0.0 < D0 < 1.0:
        raise ValueError(f"initial distance must be in (0, 1), got {D0}")
    if dim < 2:
        raise ValueError("need dimension at least 2")
    r = np.zeros(dim, dtype=complex)
    r[0] = 1.0
    s = np.zeros(dim, dtype=complex)
    s[0] = math.sqrt(1.0 - D0 ** 2)
    s[1] = D0
    return PureState(r), PureState(s)


def distinguish_sim(r: PureState, s: PureState) -> dict:
    """Rotate |r> against |s| until their distance resolves; count iterations.

    Each reflection pair advances the angle between the states by
    theta_rs = 2*arcsin(D0); success is declared once the accumulated angle
    (2k+1)*theta_rs reaches pi/4, i.e. once the pair is O(1) distinguishable.
    """
    c = abs(r.overlap(s))
    if c >= 1.0 - 1e-12:
        raise ValueError("states are identical; nothing to distinguish")
    d0 = math.sqrt(max(1.0 - c * c, 0.0))
    if d0 >= 1.0 - 1e-12:
        raise ValueError("states are already orthogonal; zero queries suffice")
    plan = plan_distinguish(d0)
    angles = []
    k = 0
    cap = int(math.pi / (4.0 * plan.theta_rs)) + 2
    while True:
        angle = (2 * k + 1) * plan.theta_rs
        angles.append(angle)
        if angle >= math.pi / 4.0 or k > cap:
            break
        k += 1
    return {
        "iters_to_success": k,
        "angle_trace": angles,
        "initial_distance": d0,
        "plan": plan,
    }


@dataclass(frozen=True, eq=False)
class DeviationTrace:
    """Cumulative query deviation D_k of an oracle-perturbed evolution."""

    k_values: np.ndarray
    D_k: np.ndarray

    def __post_init__(self):
        kv = np.asarray(self.k_values, dtype=int)
        dk = np.asarray(self.D_k, dtype=float)
        kv.setflags(write=False)
        dk.setflags(write=False)
        object.__setattr__(self, "k_values", kv)
        object.__setattr__(self, "D_k", dk)
        if kv.shape != dk.shape:
            raise ValueError("k_values and D_k must have matching shapes")
        bound = 4.0 * kv.astype(float) ** 2
        if np.any(dk > bound + 1e-9):
            worst = int(np.argmax(dk - bound))
            raise ValueError(f"progress bound violated at k={kv[worst]}: "
                             f"D_k={dk[worst]:.6g} > 4k^2={bound[worst]:.6g}")


def bbbv_deviation(n_qubits: int, marked_range=None, driver: str = "grover",
                   k_max: int = 20, rng=None) -> DeviationTrace:
    """Track sum_x ||psi_k^x - psi_k||^2 for all oracle placements x.

    The unperturbed run applies the driver alone; the perturbed run for item x
    flips the sign of amplitude x before each driver step.  Drivers: "grover"
    (the diffusion operator), "random" (a fresh Haar unitary per step, shared
    across placements), "identity" (no driver, so a single query gives
    deviation exactly 4).
    """
    if not 1 <= n_qubits <= MAX_BBBV_QUBITS:
        raise ValueError(f"n_qubits must be in [1, {MAX_BBBV_QUBITS}]")
    if k_max < 1:
        raise ValueError("k_max must be at least 1")
    if driver not in ("grover", "random", "identity"):
        raise ValueError(f"unknown driver {driver!r}")
    n = 2 ** n_qubits
    if marked_range is None:
        marked_range = range(n)
    marked = np.asarray(sorted(set(int(x) for x in marked_range)), dtype=int)
    if marked.size == 0 or marked.min() < 0 or marked.max() >= n:
        raise ValueError(f"oracle placements must be a nonempty subset of [0, {n})")
    g = _generator(rng) if driver == "random" else None

    psi = np.full(n, 1.0 / math.sqrt(n), dtype=complex)
    big = np.tile(psi, (marked.size, 1))
    rows = np.arange(marked.size)
    dev = [0.0]
    for _ in range(k_max):
        big[rows, marked] = -big[rows, marked]
        if driver == "grover":
            big = 2.0 * big.mean(axis=1, keepdims=True) - big
            psi = 2.0 * psi.mean() - psi
        elif driver == "random":
            u = haar_unitary(n, g).entries
            big = big @ u.T
            psi = u @ psi
        dev.append(float(np.sum(np.abs(big - psi) ** 2)))
    return DeviationTrace(k_values=np.arange(k_max + 1), D_k=np.array(dev))
