"""The coarse-graining channel over a generalized bipartition.

``apply_cir`` projects a state onto each sector, traces out the second tensor
factor, and carries the null block through untouched; ``lift`` embeds the
result back into the ambient space with each discarded factor replaced by the
maximally mixed state.  The composition ``lift . apply_cir`` is exactly the
maximum-entropy state consistent with the expectations of the sector algebra,
which :func:`max_entropy_state` computes independently by convex (damped
Newton) optimization of the dual log-partition function — ``verify_jaynes``
cross-checks the two code paths.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import GeneralizedBipartition, OperatorAlgebra, bipartition_algebra
from .qcore import DensityMatrix, _mat, partial_trace, trace_distance

EMPTY_WEIGHT = 1e-14
WEIGHT_TOL = 1e-10


class ConvergenceError(RuntimeError):
    """Dual optimization failed to reach the requested residual."""

    def __init__(self, message: str, iterations: int, residual: float):
        super().__init__(f"{message} (iterations={iterations}, residual={residual:.3e})")
        self.iterations = iterations
        self.residual = residual


@dataclass(frozen=True, eq=False)
class CoarseState:
    """Block form of a coarse-grained state: weights plus per-sector states.

    Sectors with weight below 1e-14 carry ``None`` instead of a garbage
    normalized block.  Blocks are kept separate rather than assembled into one
    big block-diagonal matrix.
    """

    sector_weights: np.ndarray
    null_weight: float
    sector_states: tuple  # DensityMatrix | None per sector
    null_state: object    # DensityMatrix | None

    def __post_init__(self):
        w = np.asarray(self.sector_weights, dtype=float)
        w.setflags(write=False)
        object.__setattr__(self, "sector_weights", w)
        object.__setattr__(self, "sector_states", tuple(self.sector_states))
        if w.size != len(self.sector_states):
            raise ValueError("one weight per sector state required")
        if np.any(w < -WEIGHT_TOL) or self.null_weight < -WEIGHT_TOL:
            raise ValueError("negative sector weight")
        total = float(np.sum(w)) + self.null_weight
        if abs(total - 1.0) > WEIGHT_TOL:
            raise ValueError(f"weights sum to {total:.12g} != 1")
        for i, (wi, st) in enumerate(zip(w, self.sector_states)):
            if wi >= EMPTY_WEIGHT and st is None:
                raise ValueError(f"sector {i} has weight {wi:.3e} but no state")


def apply_cir(rho, bp: GeneralizedBipartition) -> CoarseState:
    """Coarse-grain: per-sector weight and reduced state, null block untouched."""
    m = _mat(rho)
    if m.shape[0] != bp.ambient_dim:
        raise ValueError(f"state dim {m.shape[0]} != ambient dim {bp.ambient_dim}")
    weights, states = [], []
    for s in bp.sectors:
        blk = s.iso.conj().T @ m @ s.iso
        p = float(np.real(np.trace(blk)))
        if p < EMPTY_WEIGHT:
            weights.append(max(p, 0.0))
            states.append(None)
            continue
        red = partial_trace(blk, s.d1, s.d2, keep="first") / p
        states.append(DensityMatrix.from_matrix(0.5 * (red + red.conj().T)))
        weights.append(p)
    if bp.null_dim:
        blk0 = bp.null_iso.conj().T @ m @ bp.null_iso
        p0 = float(np.real(np.trace(blk0)))
        null_state = None
        if p0 >= EMPTY_WEIGHT:
            blk0 = blk0 / p0
            null_state = DensityMatrix.from_matrix(0.5 * (blk0 + blk0.conj().T))
        p0 = max(p0, 0.0)
    else:
        p0, null_state = 0.0, None
    return CoarseState(np.array(weights), p0, tuple(states), null_state)


def lift(cs: CoarseState, bp: GeneralizedBipartition) -> DensityMatrix:
    """Embed a CoarseState back on the full space, UV factors maximally mixed."""
    if len(cs.sector_states) != len(bp.sectors):
        raise ValueError(f"{len(cs.sector_states)} sector states for "
                         f"{len(bp.sectors)} sectors")
    out = np.zeros((bp.ambient_dim, bp.ambient_dim), dtype=complex)
    for s, w, st in zip(bp.sectors, cs.sector_weights, cs.sector_states):
        if st is None or w <= 0.0:
            continue
        if st.dim != s.d1:
            raise ValueError(f"sector state dim {st.dim} != d1 {s.d1}")
        blk = np.kron(st.mat, np.eye(s.d2) / s.d2)
        out += w * (s.iso @ blk @ s.iso.conj().T)
    if cs.null_state is not None and cs.null_weight > 0.0:
        if cs.null_state.dim != bp.null_dim:
            raise ValueError("null state dim does not match the null block")
        out += cs.null_weight * (bp.null_iso @ cs.null_state.mat @ bp.null_iso.conj().T)
    return DensityMatrix.from_matrix(0.5 * (out + out.conj().T))


def algebra_expectations(rho, algebra: OperatorAlgebra) -> np.ndarray:
    """tr[H rho] for every element of the algebra's Hermitian basis."""
    m = _mat(rho)
    return np.real(np.einsum("kij,ji->k", algebra.hermitian_basis, m))


@dataclass(frozen=True, eq=False)
class MaxEntropyResult:
    """Solution of the maximum-entropy problem on an algebra.

    ``mes = exp(log_partition - sum_k lagrange_multipliers[k] * H_k)`` over the
    algebra's Hermitian basis, with ``log_partition`` fixing unit trace.
    """

    lagrange_multipliers: np.ndarray
    log_partition: float
    mes: DensityMatrix
    max_residual: float


def _gibbs(lam: np.ndarray, hbasis: np.ndarray):
    """Eigendata of exp(-sum lam H)/Z: density, expectations, logZ, eigenpack."""
    x = -np.einsum("k,kij->ij", lam, hbasis)
    x = 0.5 * (x + x.conj().T)
    w, u = np.linalg.eigh(x)
    xm = w - w[-1]
    e = np.exp(xm)
    z = float(np.sum(e))
    rho = (u * (e / z)) @ u.conj().T
    ht = np.einsum("ba,kbc,cd->kad", u.conj(), hbasis, u)
    expv = np.real(np.einsum("kii,i->k", ht, e)) / z
    logz = float(w[-1] + np.log(z))
    return rho, expv, logz, (xm, e, z, ht)


def max_entropy_state(expectations, algebra: OperatorAlgebra,
                      tol: float = 1e-10, max_iter: int = 500) -> MaxEntropyResult:
    """State of maximal von Neumann entropy matching the given expectations.

    ``expectations[k]`` is the target of ``tr[H_k rho]`` for the k-th element
    of ``algebra.hermitian_basis``.  The dual problem minimizes the smooth
    strictly convex log-partition function; damped Newton steps with the exact
    Jacobian (a Kubo-Mori covariance matrix, assembled from the Frechet
    derivative of the matrix exponential) converge quadratically on interior
    targets.  The identity direction is pure gauge — the least-squares solve
    simply never moves along it.

    Raises :class:`ConvergenceError` for unachievable or boundary targets.
    """
    targets = np.asarray(expectations, dtype=float)
    if targets.shape != (algebra.size,):
        raise ValueError(f"expected {algebra.size} expectations, got {targets.shape}")
    hbasis = algebra.hermitian_basis
    lam = np.zeros(algebra.size)
    rho, expv, logz, pack = _gibbs(lam, hbasis)
    resid = expv - targets
    rnorm = float(np.max(np.abs(resid)))

    for it in range(max_iter):
        if rnorm <= tol:
            break
        xm, e, z, ht = pack
        # Divided differences of exp on the (shifted) spectrum.
        diff = np.subtract.outer(xm, xm)
        num = np.subtract.outer(e, e)
        small = np.abs(diff) < 1e-12
        phi = np.where(small, 0.5 * np.add.outer(e, e), num / np.where(small, 1.0, diff))
        t = np.einsum("mij,ij,nji->mn", ht, phi, ht)
        jac = np.real(-t / z + np.outer(expv, expv))
        jac = 0.5 * (jac + jac.T)
        step = np.linalg.lstsq(jac, -resid, rcond=None)[0]

        alpha, accepted = 1.0, False
        while alpha >= 1.0 / 1024.0:
            trial = lam + alpha * step
            rho_t, expv_t, logz_t, pack_t = _gibbs(trial, hbasis)
            rnorm_t = float(np.max(np.abs(expv_t - targets)))
            if rnorm_t < rnorm:
                lam, rho, expv, logz, pack = trial, rho_t, expv_t, logz_t, pack_t
                resid = expv - targets
                rnorm = rnorm_t
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            raise ConvergenceError("maximum-entropy dual stalled "
                                   "(target may be unachievable or on the boundary)",
                                   it + 1, rnorm)
    if rnorm > max(tol, 1e-8):
        raise ConvergenceError("maximum-entropy dual did not converge",
                               max_iter, rnorm)
    return MaxEntropyResult(lagrange_multipliers=lam, log_partition=-logz,
                            mes=DensityMatrix.from_matrix(rho), max_residual=rnorm)


def verify_jaynes(rho, bp: GeneralizedBipartition, algebra: OperatorAlgebra | None = None,
                  tol: float = 1e-7) -> dict:
    """Check lift(apply_cir(rho)) against the independent max-entropy solve.

    The default algebra is the bipartition's sector algebra (plus the full
    null-block algebra when a null block exists, so the observable set is
    unital and the coarse data determines the null component too).
    """
    if algebra is None:
        algebra = bipartition_algebra(bp, include_null=bp.null_dim > 0)
    lifted = lift(apply_cir(rho, bp), bp)
    result = max_entropy_state(algebra_expectations(rho, algebra), algebra)
    dev = float(np.max(np.abs(lifted.mat - result.mes.mat)))
    return {
        "max_abs_deviation": dev,
        "trace_distance": trace_distance(lifted, result.mes),
        "mes_residual": result.max_residual,
        "ok": bool(dev <= tol),
    }
