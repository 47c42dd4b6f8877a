"""Matrix *-algebras: closure from generators, block decomposition, commutants.

A finite-dimensional *-closed matrix algebra acts on the ambient Hilbert space
in block form: the space splits into sectors, each a tensor product
``C^{d1} (x) C^{d2}``, plus a null block on which the algebra acts as zero.
On a sector every algebra element looks like ``M1 (x) I``; the commutant is
``I (x) M2`` sector by sector plus everything on the null block.

:func:`wedderburn_decompose` recovers this structure numerically.  Rather than
solving a d^2 x d^2 null-space problem for the center, it clusters the
eigenvalues of a generic Hermitian algebra element (whose eigenspaces each
span one ``C^{d2}`` copy), groups clusters into sectors by testing whether a
second generic element connects them, and aligns the per-cluster frames with
polar decompositions so each sector's product basis assembles into an
isometry.  Generic draws separate sectors with probability one; near
degeneracies trigger a redraw.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .qcore import Operator, RngStream, _generator, _mat

ORTHO_TOL = 1e-9
SPAN_TOL = 1e-8
BLOCK_TOL = 1e-8
_GAP_FACTOR = 1e-6
_GAP_FLOOR = 1e-12  # probes are Frobenius-normalized, so this is pure eigh noise
_MAX_REDRAWS = 5


class DecompositionError(RuntimeError):
    """The input failed to decompose within tolerance (likely not an algebra)."""


def _stack(mats) -> np.ndarray:
    out = np.stack([_mat(m) for m in mats]).astype(complex)
    if out.ndim != 3 or out.shape[1] != out.shape[2]:
        raise ValueError(f"expected a stack of square matrices, got {out.shape}")
    return out


def _extend_orthonormal(rows: list[np.ndarray], candidates, tol: float) -> None:
    """Append (in order) every candidate with an independent component.

    Rows are flattened matrices, orthonormal under the Hilbert-Schmidt inner
    product.  Two projection passes keep orthogonality near machine precision.
    """
    for cand in candidates:
        v = np.asarray(cand, dtype=complex).ravel()
        nrm = np.linalg.norm(v)
        if nrm <= 1e-14:
            continue
        v = v / nrm
        for _ in range(2):
            for q in rows:
                v = v - np.vdot(q, v) * q
        res = np.linalg.norm(v)
        if res > tol:
            rows.append(v / res)


@dataclass(frozen=True, eq=False)
class OperatorAlgebra:
    """HS-orthonormal basis of a *-closed matrix algebra.

    The constructor checks orthonormality and that the ``contains_identity``
    flag matches the actual span; closure under products/adjoints is the
    caller's responsibility (build through :func:`close_algebra` or check with
    :func:`verify_algebra`, so raw generator sets can be inspected first).
    """

    dim: int
    basis: np.ndarray  # (K, dim, dim)
    contains_identity: bool

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=complex)
        if b.ndim != 3 or b.shape[1:] != (self.dim, self.dim) or b.shape[0] < 1:
            raise ValueError(f"basis must be (K, {self.dim}, {self.dim}) with K >= 1, "
                             f"got {b.shape}")
        flat = b.reshape(b.shape[0], -1)
        gram = flat @ flat.conj().T
        dev = np.max(np.abs(gram - np.eye(b.shape[0])))
        if dev > ORTHO_TOL:
            raise ValueError(f"basis not HS-orthonormal: max Gram deviation {dev:.3e}")
        b.setflags(write=False)
        object.__setattr__(self, "basis", b)
        id_res = self._identity_residual()
        if self.contains_identity and id_res > SPAN_TOL * np.sqrt(self.dim):
            raise ValueError(f"contains_identity set but residual {id_res:.3e}")
        if not self.contains_identity and id_res <= SPAN_TOL * np.sqrt(self.dim):
            raise ValueError("identity lies in the span but contains_identity is False")

    @property
    def size(self) -> int:
        """Number of basis elements (the algebra's linear dimension)."""
        return self.basis.shape[0]

    def project(self, m) -> np.ndarray:
        """Hilbert-Schmidt orthogonal projection onto the span."""
        v = _mat(m)
        coeff = np.einsum("kij,ij->k", self.basis.conj(), v)
        return np.einsum("k,kij->ij", coeff, self.basis)

    def _identity_residual(self) -> float:
        eye = np.eye(self.dim, dtype=complex)
        return float(np.linalg.norm(eye - self.project(eye)))

    @cached_property
    def hermitian_basis(self) -> np.ndarray:
        """HS-orthonormal Hermitian basis spanning the same algebra.

        A *-closed complex span of dimension K has a real-dimension-K Hermitian
        part, so this always has exactly ``size`` elements.
        """
        cands = []
        for b in self.basis:
            cands.append(0.5 * (b + b.conj().T))
            cands.append((b - b.conj().T) / 2j)
        rows: list[np.ndarray] = []
        _extend_orthonormal(rows, cands, ORTHO_TOL)
        if len(rows) != self.size:
            raise RuntimeError(f"Hermitian basis has {len(rows)} elements, "
                               f"expected {self.size}; input span not *-closed?")
        out = np.stack([r.reshape(self.dim, self.dim) for r in rows])
        out = 0.5 * (out + out.conj().transpose(0, 2, 1))
        out.setflags(write=False)
        return out


def close_algebra(generators, tol: float = 1e-9, dim: int | None = None) -> OperatorAlgebra:
    """Smallest unital *-algebra containing the generators.

    Alternates product augmentation with Hilbert-Schmidt Gram-Schmidt until the
    span is stable across a full pass; deterministic given input order.  With
    no generators the result is ``span{I}`` on the given ``dim``.  Nonempty
    generator sets close onto their own support unit (a projector), so the
    ambient identity joins the span only when the generators act on all of it —
    ``contains_identity`` records which case occurred.
    """
    mats = [_mat(g) for g in generators]
    if not mats:
        if dim is None:
            raise ValueError("dim is required when the generator list is empty")
        eye = np.eye(dim, dtype=complex) / np.sqrt(dim)
        return OperatorAlgebra(dim, eye[None, :, :], contains_identity=True)
    d = mats[0].shape[0]
    for m in mats:
        if m.shape != (d, d):
            raise ValueError(f"generator dimension mismatch: {m.shape} vs ({d}, {d})")

    rows: list[np.ndarray] = []
    seeds: list[np.ndarray] = []
    for m in mats:
        seeds.append(m)
        seeds.append(m.conj().T)
    _extend_orthonormal(rows, seeds, tol)
    if not rows:  # all generators were zero
        eye = np.eye(d, dtype=complex) / np.sqrt(d)
        return OperatorAlgebra(d, eye[None, :, :], contains_identity=True)

    while True:
        k0 = len(rows)
        current = [r.reshape(d, d) for r in rows]
        prods = [a @ b for a in current for b in current]
        _extend_orthonormal(rows, prods, tol)
        if len(rows) == k0:
            break
        if len(rows) > d * d:
            raise RuntimeError("internal error: closure exceeded d^2 elements")

    basis = np.stack([r.reshape(d, d) for r in rows])
    eye = np.eye(d, dtype=complex)
    coeff = np.einsum("kij,ij->k", basis.conj(), eye)
    residual = np.linalg.norm(eye - np.einsum("k,kij->ij", coeff, basis))
    return OperatorAlgebra(d, basis, contains_identity=bool(residual <= SPAN_TOL * np.sqrt(d)))


def verify_algebra(algebra: OperatorAlgebra, tol: float = SPAN_TOL) -> dict:
    """Report how well the basis satisfies the algebra axioms.

    Returns residuals for orthonormality, adjoint closure, product closure and
    the identity, plus an overall ``ok``.  Cost is O(K^2) matrix products, so
    intended for test/diagnostic use rather than hot loops.
    """
    b = algebra.basis
    k, d = b.shape[0], algebra.dim
    flat = b.reshape(k, -1)
    gram_dev = float(np.max(np.abs(flat @ flat.conj().T - np.eye(k))))

    def span_residual(m: np.ndarray) -> float:
        v = m.ravel()
        return float(np.linalg.norm(v - flat.T @ (flat.conj() @ v)))

    adj_res = max(span_residual(b[i].conj().T) for i in range(k))
    prod_res = 0.0
    for i in range(k):
        for j in range(k):
            prod_res = max(prod_res, span_residual(b[i] @ b[j]))
    id_res = span_residual(np.eye(d, dtype=complex))
    id_ok = (id_res <= tol * np.sqrt(d)) == algebra.contains_identity
    ok = (gram_dev <= ORTHO_TOL and adj_res <= tol and prod_res <= tol and id_ok
          and (id_res <= tol * np.sqrt(d) or not algebra.contains_identity))
    return {
        "orthonormality": gram_dev,
        "adjoint_closure": adj_res,
        "product_closure": prod_res,
        "identity_residual": id_res,
        "identity_flag_consistent": id_ok,
        "ok": bool(ok),
    }


@dataclass(frozen=True, eq=False)
class Sector:
    """One block of a decomposition: isometry from C^{d1} (x) C^{d2}."""

    iso: np.ndarray  # (ambient_dim, d1*d2), columns ordered (p, m) -> p*d2 + m
    d1: int
    d2: int
    projector: Operator

    def __post_init__(self):
        iso = np.asarray(self.iso, dtype=complex)
        if iso.shape[1] != self.d1 * self.d2:
            raise ValueError(f"isometry has {iso.shape[1]} columns, "
                             f"expected d1*d2 = {self.d1 * self.d2}")
        dev = np.max(np.abs(iso.conj().T @ iso - np.eye(iso.shape[1])))
        if dev > ORTHO_TOL:
            raise ValueError(f"sector columns not isometric: deviation {dev:.3e}")
        iso.setflags(write=False)
        object.__setattr__(self, "iso", iso)


@dataclass(frozen=True, eq=False)
class GeneralizedBipartition:
    """Sector list plus null block describing an algebra's block structure."""

    ambient_dim: int
    sectors: tuple[Sector, ...]
    null_iso: np.ndarray  # (ambient_dim, null_dim); null_dim may be 0

    def __post_init__(self):
        object.__setattr__(self, "sectors", tuple(self.sectors))
        n0 = np.asarray(self.null_iso, dtype=complex).reshape(self.ambient_dim, -1)
        n0.setflags(write=False)
        object.__setattr__(self, "null_iso", n0)
        total = sum(s.d1 * s.d2 for s in self.sectors) + n0.shape[1]
        if total != self.ambient_dim:
            raise ValueError(f"sector dims sum to {total}, ambient is {self.ambient_dim}")
        if n0.shape[1]:
            dev = np.max(np.abs(n0.conj().T @ n0 - np.eye(n0.shape[1])))
            if dev > ORTHO_TOL:
                raise ValueError(f"null block not isometric: deviation {dev:.3e}")
        resolution = n0 @ n0.conj().T
        for s in self.sectors:
            p = s.projector.entries
            dev = np.max(np.abs(p - s.iso @ s.iso.conj().T))
            if dev > ORTHO_TOL:
                raise ValueError(f"projector disagrees with isometry: {dev:.3e}")
            resolution = resolution + p
        dev = np.max(np.abs(resolution - np.eye(self.ambient_dim)))
        if dev > ORTHO_TOL:
            raise ValueError(f"projectors do not resolve the identity: {dev:.3e}")

    @property
    def null_dim(self) -> int:
        return self.null_iso.shape[1]

    @property
    def sector_dims(self) -> tuple[tuple[int, int], ...]:
        return tuple((s.d1, s.d2) for s in self.sectors)

    @property
    def algebra_dim(self) -> int:
        """Linear dimension of the algebra this bipartition represents."""
        return sum(s.d1 ** 2 for s in self.sectors)

    @property
    def commutant_dim(self) -> int:
        return sum(s.d2 ** 2 for s in self.sectors) + self.null_dim ** 2


def bipartition_from_shapes(shapes, null_dim: int = 0, unitary=None) -> GeneralizedBipartition:
    """Canonical bipartition with the given (d1, d2) sector shapes.

    Sectors occupy consecutive index ranges; an optional unitary rotates the
    whole frame (handy for generating nontrivially embedded test algebras).
    """
    shapes = [(int(a), int(b)) for a, b in shapes]
    if any(a < 1 or b < 1 for a, b in shapes):
        raise ValueError("sector dimensions must be positive")
    d = sum(a * b for a, b in shapes) + null_dim
    u = None if unitary is None else _mat(unitary)
    if u is not None and u.shape != (d, d):
        raise ValueError(f"unitary shape {u.shape} does not match ambient dim {d}")
    sectors = []
    offset = 0
    for d1, d2 in shapes:
        span = d1 * d2
        iso = np.zeros((d, span), dtype=complex)
        iso[offset:offset + span] = np.eye(span)
        if u is not None:
            iso = u @ iso
        proj = iso @ iso.conj().T
        sectors.append(Sector(iso, d1, d2, Operator(0.5 * (proj + proj.conj().T),
                                                    hermitian=True)))
        offset += span
    null_iso = np.zeros((d, null_dim), dtype=complex)
    if null_dim:
        null_iso[offset:offset + null_dim] = np.eye(null_dim)
        if u is not None:
            null_iso = u @ null_iso
    return GeneralizedBipartition(d, tuple(sectors), null_iso)


def bipartition_algebra(bp: GeneralizedBipartition, include_null: bool = False) -> OperatorAlgebra:
    """The algebra acting as ``M1 (x) I`` on each sector (and 0 on the null block).

    With ``include_null=True`` the full matrix algebra on the null block is
    appended, which makes the result unital even when a null block is present
    (that variant is the observable algebra a coarse observer actually has).
    """
    d = bp.ambient_dim
    mats = []
    for s in bp.sectors:
        cols = s.iso.reshape(d, s.d1, s.d2)
        scale = 1.0 / np.sqrt(s.d2)
        for a in range(s.d1):
            for b in range(s.d1):
                mats.append(scale * np.einsum("im,jm->ij", cols[:, a, :],
                                              cols[:, b, :].conj()))
    if include_null and bp.null_dim:
        v0 = bp.null_iso
        for a in range(bp.null_dim):
            for b in range(bp.null_dim):
                mats.append(np.outer(v0[:, a], v0[:, b].conj()))
    unital = bp.null_dim == 0 or include_null
    return OperatorAlgebra(d, np.stack(mats), contains_identity=unital)


def _cluster(eigvals: np.ndarray, threshold: float) -> list[slice]:
    cuts = np.nonzero(np.diff(eigvals) > threshold)[0]
    bounds = [0, *(c + 1 for c in cuts), len(eigvals)]
    return [slice(bounds[i], bounds[i + 1]) for i in range(len(bounds) - 1)]


def wedderburn_decompose(algebra: OperatorAlgebra, tol: float = BLOCK_TOL,
                         rng=None) -> GeneralizedBipartition:
    """Decompose the ambient space into sectors on which the algebra is M1 (x) I.

    See the module docstring for the algorithm.  Deterministic for a fixed
    stream (default stream included so bare calls reproduce).  Raises
    :class:`DecompositionError` with the worst residual when the input is not
    numerically an algebra, or when five redraws cannot separate the sectors.
    """
    g = _generator(rng if rng is not None else RngStream(112358))
    basis = algebra.basis
    d, k = algebra.dim, algebra.size

    # Null block: common kernel of all basis elements and their adjoints.
    support = np.einsum("kji,kjl->il", basis.conj(), basis)
    support = support + np.einsum("kij,klj->il", basis, basis.conj())
    support = 0.5 * (support + support.conj().T)
    w, v = np.linalg.eigh(support)
    null_mask = w <= max(w[-1], 1e-30) * 1e-10
    v0 = v[:, null_mask]
    vs = v[:, ~null_mask]
    ds = vs.shape[1]
    bs = np.einsum("ai,kab,bj->kij", vs.conj(), basis, vs)

    def random_hermitian() -> np.ndarray:
        c = g.standard_normal(k) + 1j * g.standard_normal(k)
        x = np.einsum("k,kij->ij", c, bs)
        x = x + x.conj().T
        return x / np.linalg.norm(x)

    last_residual = np.inf
    for _ in range(_MAX_REDRAWS):
        x = random_hermitian()
        w, u = np.linalg.eigh(x)
        spread = max(w[-1] - w[0], 1e-15)
        # The floor matters when the algebra is scalar on its support: the
        # spread is then pure rounding noise and a relative threshold would
        # shatter the single degenerate cluster.
        threshold = max(_GAP_FACTOR * spread, _GAP_FLOOR)
        slices = _cluster(w, threshold)
        boundary_gaps = [w[s.start] - w[s.start - 1] for s in slices[1:]]
        if boundary_gaps and min(boundary_gaps) < 10 * threshold:
            continue  # two clusters too close to call: redraw
        frames = [u[:, s] for s in slices]
        n = len(frames)

        # Group clusters into sectors: a generic algebra element has exactly
        # zero matrix elements between different sectors, and generically
        # nonzero ones inside a sector.
        parent = list(range(n))

        def find(i: int) -> int:
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        probes = (random_hermitian(), random_hermitian())
        for y in probes:
            for i in range(n):
                for j in range(i + 1, n):
                    blk = frames[i].conj().T @ y @ frames[j]
                    if np.linalg.norm(blk) > 1e-8:
                        parent[find(i)] = find(j)
        groups: dict[int, list[int]] = {}
        for i in range(n):
            groups.setdefault(find(i), []).append(i)
        comps = [sorted(members, key=lambda i: w[slices[i].start])
                 for members in groups.values()]
        if any(len({frames[i].shape[1] for i in comp}) != 1 for comp in comps):
            continue  # unequal copy dimensions: an eigenvalue collision slipped in

        sectors_raw = []
        aligned_ok = True
        for comp in comps:
            d2 = frames[comp[0]].shape[1]
            d1 = len(comp)
            ref = frames[comp[0]]
            cols = [ref]
            for idx in comp[1:]:
                wp = None
                for y in probes:
                    t = frames[idx].conj().T @ y @ ref
                    uu, sv, vh = np.linalg.svd(t)
                    if sv[-1] > 1e-8:
                        wp = uu @ vh
                        break
                if wp is None:
                    aligned_ok = False
                    break
                cols.append(frames[idx] @ wp)
            if not aligned_ok:
                break
            iso = vs @ np.concatenate(cols, axis=1)
            uu, _, vh = np.linalg.svd(iso, full_matrices=False)
            iso = uu @ vh  # snap to the nearest exact isometry
            sectors_raw.append((d1, d2, float(w[slices[comp[0]].start]), iso))
        if not aligned_ok:
            continue

        sectors_raw.sort(key=lambda s: (s[0], s[1], s[2]))
        worst = _block_form_residual(basis, sectors_raw, v0)
        if worst <= tol:
            sectors = tuple(
                Sector(iso, d1, d2,
                       Operator(_hermitized(iso @ iso.conj().T), hermitian=True))
                for d1, d2, _, iso in sectors_raw)
            return GeneralizedBipartition(d, sectors, v0)
        last_residual = min(last_residual, worst)

    raise DecompositionError(
        f"failed to decompose within tolerance after {_MAX_REDRAWS} attempts; "
        f"worst block-form residual {last_residual:.3e} (tol {tol:.1e}) — "
        "input is probably not numerically a *-closed algebra")


def _hermitized(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.conj().T)


def _block_form_residual(basis: np.ndarray, sectors_raw, v0: np.ndarray) -> float:
    """Max deviation of every basis element from the M1 (x) I (+) 0 form."""
    worst = 0.0
    isos = [iso for *_, iso in sectors_raw]
    dims = [(d1, d2) for d1, d2, _, _ in sectors_raw]
    for b in basis:
        for (d1, d2), iso in zip(dims, isos):
            blk = iso.conj().T @ b @ iso
            m1 = np.einsum("aqbq->ab", blk.reshape(d1, d2, d1, d2)) / d2
            worst = max(worst, float(np.max(np.abs(blk - np.kron(m1, np.eye(d2))))))
        for i in range(len(isos)):
            for j in range(len(isos)):
                if i != j:
                    cross = isos[i].conj().T @ b @ isos[j]
                    if cross.size:
                        worst = max(worst, float(np.max(np.abs(cross))))
        if v0.shape[1]:
            worst = max(worst, float(np.max(np.abs(b @ v0))))
            worst = max(worst, float(np.max(np.abs(v0.conj().T @ b))))
    return worst


def commutant(algebra: OperatorAlgebra, tol: float = BLOCK_TOL) -> OperatorAlgebra:
    """Everything commuting with the algebra: I (x) M2 per sector plus L(H0).

    Built from the block decomposition (a fixed internal stream keeps the
    output deterministic), so its dimension is sum(d2^2) + null_dim^2 by
    construction.  Always unital.
    """
    bp = wedderburn_decompose(algebra, tol=tol, rng=RngStream(271828))
    d = bp.ambient_dim
    mats = []
    for s in bp.sectors:
        cols = s.iso.reshape(d, s.d1, s.d2)
        scale = 1.0 / np.sqrt(s.d1)
        for a in range(s.d2):
            for b in range(s.d2):
                mats.append(scale * (cols[:, :, a] @ cols[:, :, b].conj().T))
    if bp.null_dim:
        v0 = bp.null_iso
        for a in range(bp.null_dim):
            for b in range(bp.null_dim):
                mats.append(np.outer(v0[:, a], v0[:, b].conj()))
    return OperatorAlgebra(d, np.stack(mats), contains_identity=True)
