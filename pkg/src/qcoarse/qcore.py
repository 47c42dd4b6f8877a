"""Dense complex linear algebra and quantum-state primitives.

Everything here works on plain square complex matrices at double precision.
The domain types (:class:`Operator`, :class:`DensityMatrix`, :class:`PureState`)
are thin immutable wrappers that validate their defining invariants on
construction; the numerical routines accept either the wrappers or raw
``numpy`` arrays so hot loops can stay allocation-light.

Target dimensions are a few thousand at most, so dense eigendecompositions
are used throughout (a Hermitian difference is cheaper and stabler through
``eigvalsh`` than through an SVD).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
UNITARY_TOL = 1e-10
STATE_NORM_TOL = 1e-12
DEFAULT_EIG_FLOOR = 1e-10


def _mat(x) -> np.ndarray:
    """Coerce an Operator / DensityMatrix / array-like to a complex ndarray."""
    if isinstance(x, DensityMatrix):
        return x.mat
    if isinstance(x, Operator):
        return x.entries
    return np.asarray(x, dtype=complex)


def _square(m: np.ndarray, what: str = "matrix") -> np.ndarray:
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{what} must be square, got shape {m.shape}")
    return m


def _generator(rng) -> np.random.Generator:
    """Accept an RngStream (fresh generator) or a Generator (used as-is)."""
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"expected RngStream or numpy Generator, got {type(rng).__name__}")


@dataclass(frozen=True)
class RngStream:
    """Reproducible randomness handle: (seed, stream_index) pins every draw.

    ``generator()`` always returns a fresh ``numpy.random.Generator`` seeded
    from ``SeedSequence(seed, spawn_key=(stream_index,))``, so two streams with
    the same pair produce bit-identical draws, and distinct stream indices are
    statistically independent.  Monte Carlo loops should derive one stream per
    sample index so results are order-independent.
    """

    seed: int
    stream_index: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_index,))
        return np.random.default_rng(ss)


@dataclass(frozen=True, eq=False)
class Operator:
    """A dense complex square matrix with validated Hermiticity/unitarity flags."""

    entries: np.ndarray
    hermitian: bool = False
    unitary: bool = False

    def __post_init__(self):
        m = _square(np.array(self.entries, dtype=complex), "Operator")
        if self.hermitian:
            dev = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
            if dev > HERMITIAN_TOL:
                raise ValueError(f"hermitian flag set but max|M - M^dag| = {dev:.3e}")
        if self.unitary:
            dev = np.max(np.abs(m @ m.conj().T - np.eye(m.shape[0])))
            if dev > UNITARY_TOL:
                raise ValueError(f"unitary flag set but max|MM^dag - I| = {dev:.3e}")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def adjoint(self) -> "Operator":
        return Operator(self.entries.conj().T, hermitian=self.hermitian,
                        unitary=self.unitary)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Positive semidefinite unit-trace operator.

    Validates Hermiticity (1e-10), unit trace (1e-10), and that the smallest
    eigenvalue is at least ``-eigenvalue_floor``.
    """

    op: Operator
    eigenvalue_floor: float = DEFAULT_EIG_FLOOR

    def __post_init__(self):
        op = self.op
        if not isinstance(op, Operator):
            op = Operator(np.asarray(op, dtype=complex), hermitian=True)
            object.__setattr__(self, "op", op)
        m = op.entries
        dev = np.max(np.abs(m - m.conj().T))
        if dev > HERMITIAN_TOL:
            raise ValueError(f"density matrix not Hermitian: max dev {dev:.3e}")
        tr = np.trace(m)
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValueError(f"density matrix trace {tr:.12g} != 1")
        lo = float(np.linalg.eigvalsh(m)[0])
        if lo < -self.eigenvalue_floor:
            raise ValueError(f"density matrix has eigenvalue {lo:.3e} below floor")

    @classmethod
    def from_matrix(cls, m, eigenvalue_floor: float = DEFAULT_EIG_FLOOR) -> "DensityMatrix":
        return cls(Operator(np.asarray(m, dtype=complex), hermitian=True),
                   eigenvalue_floor)

    @property
    def mat(self) -> np.ndarray:
        return self.op.entries

    @property
    def dim(self) -> int:
        return self.op.dim


@dataclass(frozen=True, eq=False)
class PureState:
    """Unit-norm complex state vector (norm validated to 1e-12)."""

    amplitudes: np.ndarray

    def __post_init__(self):
        v = np.array(self.amplitudes, dtype=complex).reshape(-1)
        nrm = np.linalg.norm(v)
        if abs(nrm - 1.0) > STATE_NORM_TOL:
            raise ValueError(f"state norm {nrm:.15g} != 1")
        v.setflags(write=False)
        object.__setattr__(self, "amplitudes", v)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def overlap(self, other: "PureState") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def density(self) -> DensityMatrix:
        v = self.amplitudes
        return DensityMatrix.from_matrix(np.outer(v, v.conj()))


def hs_inner(a, b) -> complex:
    """Hilbert-Schmidt inner product tr[a b^dagger]."""
    am, bm = _mat(a), _mat(b)
    return complex(np.vdot(bm.ravel(), am.ravel()))


def trace_norm(m) -> float:
    """Sum of singular values; uses eigvalsh when the input is Hermitian."""
    a = _square(_mat(m))
    if a.size == 0:
        return 0.0
    if np.max(np.abs(a - a.conj().T)) <= 1e-12 * max(1.0, np.max(np.abs(a))):
        return float(np.sum(np.abs(np.linalg.eigvalsh(a))))
    return float(np.sum(np.linalg.svd(a, compute_uv=False)))


def trace_distance(rho, sigma) -> float:
    """Half the trace norm of rho - sigma.

    Symmetric, in [0, 1] for density matrices, and satisfies the triangle
    inequality.  The difference of two Hermitian matrices is Hermitian, so the
    singular values are the absolute eigenvalues.
    """
    r, s = _mat(rho), _mat(sigma)
    if r.shape != s.shape:
        raise ValueError(f"dimension mismatch: {r.shape} vs {s.shape}")
    vals = np.linalg.eigvalsh(r - s)
    return float(np.clip(0.5 * np.sum(np.abs(vals)), 0.0, 1.0))


def trace_distance_variational(rho, sigma, algebra) -> float:
    """Trace distance as seen through a unital *-closed operator algebra.

    Returns ``(1/2) * max tr[(rho - sigma) O]`` over Hermitian ``O`` in the
    algebra with spectrum in [-1, 1].  The maximizer is the sign function of
    the algebra-projected difference (the sign of an algebra element stays in
    the algebra), so the maximum is computed exactly as half the trace norm of
    the Hilbert-Schmidt projection of ``rho - sigma`` onto the algebra —
    no iterative optimization.

    For the full matrix algebra this equals :func:`trace_distance`; for
    ``span{I}`` it is 0.
    """
    if not getattr(algebra, "contains_identity", False):
        raise ValueError("variational trace distance needs a unital algebra "
                         "(identity not in the span)")
    r, s = _mat(rho), _mat(sigma)
    if r.shape != s.shape:
        raise ValueError(f"dimension mismatch: {r.shape} vs {s.shape}")
    basis = np.asarray(algebra.basis)
    if basis.shape[1:] != r.shape:
        raise ValueError(f"algebra dimension {basis.shape[1:]} does not match "
                         f"states {r.shape}")
    delta = r - s
    coeff = np.einsum("kij,ij->k", basis.conj(), delta)
    proj = np.einsum("k,kij->ij", coeff, basis)
    proj = 0.5 * (proj + proj.conj().T)  # projection of Hermitian stays Hermitian
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(proj))))


def partial_trace(rho, d1: int, d2: int, keep: str = "first"):
    """Trace out one tensor factor of a (d1*d2)-dimensional operator.

    ``keep="first"`` returns a d1-dimensional operator, ``keep="second"`` a
    d2-dimensional one.  Linear and trace-preserving.  A DensityMatrix input
    yields a DensityMatrix; a raw array passes through unvalidated (useful for
    unnormalized blocks).
    """
    m = _mat(rho)
    d = m.shape[0]
    if d1 * d2 != d:
        raise ValueError(f"dimension {d} does not factor as {d1}x{d2}")
    if keep not in ("first", "second"):
        raise ValueError(f"keep must be 'first' or 'second', got {keep!r}")
    t = m.reshape(d1, d2, d1, d2)
    out = np.einsum("ajbj->ab", t) if keep == "first" else np.einsum("jajb->ab", t)
    if isinstance(rho, DensityMatrix):
        return DensityMatrix.from_matrix(out, rho.eigenvalue_floor)
    return out


def von_neumann_entropy(rho) -> float:
    """-sum(lam log lam) over eigenvalues above the floor, in natural log units."""
    floor = rho.eigenvalue_floor if isinstance(rho, DensityMatrix) else DEFAULT_EIG_FLOOR
    vals = np.linalg.eigvalsh(_mat(rho))
    vals = vals[vals > floor]
    if vals.size == 0:
        return 0.0
    return float(-np.sum(vals * np.log(vals)))


def haar_unitary(d: int, rng) -> Operator:
    """Haar-distributed unitary via QR of a complex Ginibre matrix.

    The R diagonal is phase-corrected so the distribution is exactly Haar
    (plain QR is biased).  Deterministic given the stream.
    """
    if d < 1:
        raise ValueError("dimension must be >= 1")
    g = _generator(rng)
    z = (g.standard_normal((d, d)) + 1j * g.standard_normal((d, d))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    phases = np.diag(r).copy()
    phases /= np.abs(phases)
    return Operator(q * phases, unitary=True)


def random_pure_state(d: int, rng) -> PureState:
    """Uniform (Haar) random pure state on C^d."""
    if d < 1:
        raise ValueError("dimension must be >= 1")
    g = _generator(rng)
    v = g.standard_normal(d) + 1j * g.standard_normal(d)
    return PureState(v / np.linalg.norm(v))


def fidelity(rho, sigma) -> float:
    """Uhlmann fidelity (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2. Diagnostic use."""
    r, s = _mat(rho), _mat(sigma)
    if r.shape != s.shape:
        raise ValueError(f"dimension mismatch: {r.shape} vs {s.shape}")
    w, v = np.linalg.eigh(r)
    w = np.clip(w, 0.0, None)
    sq = (v * np.sqrt(w)) @ v.conj().T
    inner = sq @ s @ sq
    vals = np.clip(np.linalg.eigvalsh(0.5 * (inner + inner.conj().T)), 0.0, None)
    return float(np.sum(np.sqrt(vals)) ** 2)
