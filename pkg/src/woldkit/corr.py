"""Finite-dimensional C*-correspondences and internal tensor products.

A correspondence E over A is a complex vector space C^d with

* ``right[c]``: matrix of ξ ↦ ξ·e_c on coordinates,
* ``left[c]``: matrix of ξ ↦ φ(e_c)ξ,
* ``inner[p, q]``: coefficient vector of ⟨ε_p, ε_q⟩ ∈ A,

where e_c runs over the matrix units of A.  Null vectors of the A-valued
inner product are allowed in the input; they are quotiented out whenever a
Hilbert space or a new correspondence is built.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .cstar import AlgebraRep, FinCStarAlgebra, ValidationReport
from .numlin import (DEFAULT_POLICY, NumericalError, TolerancePolicy, check_finite, opnorm,
                     orthonormal_eigh)


class CorrespondenceError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Correspondence:
    algebra: FinCStarAlgebra
    dim: int
    right: np.ndarray  # (dim A, d, d)
    left: np.ndarray   # (dim A, d, d)
    inner: np.ndarray  # (d, d, dim A)

    def __post_init__(self):
        a, d = self.algebra.dim, self.dim
        for name, shape in (("right", (a, d, d)), ("left", (a, d, d)), ("inner", (d, d, a))):
            arr = check_finite(getattr(self, name), name)
            if arr.shape != shape:
                raise CorrespondenceError(f"{name} has shape {arr.shape}, expected {shape}")
            object.__setattr__(self, name, arr)

    def phi(self, x: np.ndarray) -> np.ndarray:
        return np.tensordot(np.asarray(x, dtype=complex), self.left, axes=(0, 0))

    def ract(self, x: np.ndarray) -> np.ndarray:
        return np.tensordot(np.asarray(x, dtype=complex), self.right, axes=(0, 0))

    def inner_product(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return np.einsum("p,q,pqc->c", np.conj(x), y, self.inner)

    @cached_property
    def scalar_gram(self) -> np.ndarray:
        """G_pq = τ(⟨ε_p, ε_q⟩)."""
        alg = self.algebra
        tau = np.array([1.0 / alg.block_dims[b] if p == q else 0.0 for (b, p, q) in alg.units])
        return self.inner @ tau

    def block_gram(self, b: int) -> np.ndarray:
        """The block-b component of the A-valued Gram, as a (d n_b)x(d n_b) matrix."""
        alg = self.algebra
        n = alg.block_dims[b]
        d = self.dim
        g = np.zeros((d, n, d, n), dtype=complex)
        for r in range(n):
            for s in range(n):
                g[:, r, :, s] = self.inner[:, :, alg.unit_index[(b, r, s)]]
        return g.reshape(d * n, d * n)

    def quotient_basis(self, pol: TolerancePolicy = DEFAULT_POLICY) -> np.ndarray:
        """Orthonormal basis (columns) of the complement of the null space."""
        return _nonnull_basis(self.scalar_gram, pol)

    def to_json(self) -> dict:
        from .io import algebra_element_to_json, matrix_to_json, units_to_json

        inner = {}
        for p in range(self.dim):
            for q in range(self.dim):
                inner[f"{p + 1},{q + 1}"] = algebra_element_to_json(self.algebra, self.inner[p, q])
        return {
            "dim": self.dim,
            "right": units_to_json(self.algebra, self.right),
            "left": units_to_json(self.algebra, self.left),
            "inner": inner,
        }


def _nonnull_basis(gram: np.ndarray, pol: TolerancePolicy) -> np.ndarray:
    d = gram.shape[0]
    if d == 0:
        return np.zeros((0, 0), dtype=complex)
    w, v = orthonormal_eigh(gram)
    if w.size and w[-1] < -pol.threshold(max(1.0, float(w[0]))) * 10:
        raise NumericalError(f"Gram matrix is not positive semidefinite (eigenvalue {w[-1]:.3e})")
    thr = pol.threshold(float(w[0])) if w.size and w[0] > 0 else np.inf
    return v[:, w > thr]


def identity_correspondence(algebra: FinCStarAlgebra) -> Correspondence:
    """A as a correspondence over itself: ⟨a, b⟩ = a*b, both actions by multiplication."""
    n = algebra.dim
    left = np.stack([algebra.regular_matrix(algebra.unit(*u)) for u in algebra.units])
    right = np.stack([algebra.right_regular_matrix(algebra.unit(*u)) for u in algebra.units])
    inner = np.zeros((n, n, n), dtype=complex)
    basis = np.eye(n, dtype=complex)
    for p in range(n):
        adj = algebra.adjoint(basis[p])
        for q in range(n):
            inner[p, q] = algebra.multiply(adj, basis[q])
    return Correspondence(algebra, n, right, left, inner)


def zero_correspondence(algebra: FinCStarAlgebra) -> Correspondence:
    a = algebra.dim
    return Correspondence(algebra, 0, np.zeros((a, 0, 0)), np.zeros((a, 0, 0)), np.zeros((0, 0, a)))


def validate_correspondence(E: Correspondence, pol: TolerancePolicy = DEFAULT_POLICY) -> ValidationReport:
    alg = E.algebra
    d = E.dim
    tol = pol.abs_tol * 10
    res = {}
    eye = np.eye(d)
    idx = alg.unit_index
    right_rel = left_rel = adj_left = inner_lin = herm = commute = 0.0
    for (b, p, q), i in idx.items():
        n = alg.block_dims[b]
        for r in range(n):
            for s in range(n):
                j = idx[(b, r, s)]
                ps = E.right[idx[(b, p, s)]] if q == r else 0
                right_rel = max(right_rel, opnorm(E.right[j] @ E.right[i] - ps))
                lps = E.left[idx[(b, p, s)]] if q == r else 0
                left_rel = max(left_rel, opnorm(E.left[i] @ E.left[j] - lps))
        for c, u in enumerate(alg.units):
            commute = max(commute, opnorm(E.left[i] @ E.right[c] - E.right[c] @ E.left[i]))
    for c, (b, p, q) in enumerate(alg.units):
        ec = alg.unit(b, p, q)
        ec_adj_idx = idx[(b, q, p)]
        for x in range(d):
            for y in range(d):
                lhs = E.inner_product(eye[x], E.right[c] @ eye[y])
                rhs = alg.multiply(E.inner[x, y], ec)
                inner_lin = max(inner_lin, float(np.max(np.abs(lhs - rhs), initial=0)))
                lhs = E.inner_product(E.left[c] @ eye[x], eye[y])
                rhs = E.inner_product(eye[x], E.left[ec_adj_idx] @ eye[y])
                adj_left = max(adj_left, float(np.max(np.abs(lhs - rhs), initial=0)))
    for x in range(d):
        for y in range(d):
            herm = max(herm, float(np.max(np.abs(E.inner[y, x] - alg.adjoint(E.inner[x, y])), initial=0)))
    res["right action antirepresentation"] = right_rel
    res["right action unital"] = opnorm(E.ract(alg.one()) - eye)
    res["left action multiplicative"] = left_rel
    res["left action adjointable"] = adj_left
    res["left/right actions commute"] = commute
    res["inner product right linear"] = inner_lin
    res["inner product hermitian"] = herm
    neg = 0.0
    for b in range(alg.num_blocks):
        g = E.block_gram(b)
        if g.size:
            w = np.linalg.eigvalsh(0.5 * (g + g.conj().T))
            neg = max(neg, float(-w[0]))
    res["inner product positive"] = max(neg, 0.0)
    if d and neg <= tol:
        v = E.quotient_basis(pol)
        res["essential left action"] = opnorm(v.conj().T @ (E.phi(alg.one()) - eye) @ v)
    else:
        # the quotient is undefined for an indefinite inner product
        res["essential left action"] = 0.0 if not d else float("inf")
    return ValidationReport(res, tol)


@dataclass(frozen=True, eq=False)
class TensorSpace:
    """Hilbert space E ⊗_ψ K for a correspondence E and a representation ψ on K.

    Algebraic coordinates are C^d ⊗ C^{dim K} (E-index major).  ``embed``
    (r x N) maps them to orthonormal coordinates of the quotient Hilbert space
    and ``lift`` (N x r) is its right inverse, so ``embed @ lift = I_r`` and
    ``lift @ embed`` is the orthogonal projection onto the complement of the
    Gram null space.  ``rep`` is the left action φ(·) ⊗ I in Hilbert
    coordinates.
    """

    factor_dim: int
    inner_dim: int
    gram: np.ndarray
    embed: np.ndarray
    lift: np.ndarray
    rep: AlgebraRep

    @property
    def ambient_dim(self) -> int:
        return self.factor_dim * self.inner_dim

    @property
    def hilbert_dim(self) -> int:
        return self.embed.shape[0]

    def hilbert_map(self, alg_map: np.ndarray) -> np.ndarray:
        """Express an operator X on algebraic coordinates (X preserving nulls) in Hilbert coordinates."""
        return self.embed @ alg_map @ self.lift

    def vector(self, x: np.ndarray, k: np.ndarray) -> np.ndarray:
        """Hilbert coordinates of x ⊗ k."""
        return self.embed @ np.kron(x, k)


def hilbert_coordinates(gram: np.ndarray, pol: TolerancePolicy = DEFAULT_POLICY):
    """(embed, lift) for a PSD Gram matrix on algebraic coordinates."""
    n = gram.shape[0]
    if n == 0:
        return np.zeros((0, 0), dtype=complex), np.zeros((0, 0), dtype=complex)
    w, v = orthonormal_eigh(gram)
    scale = max(float(w[0]), 0.0)
    if w[-1] < -pol.threshold(max(scale, 1.0)) * 10:
        raise NumericalError(f"Gram matrix is not positive semidefinite (eigenvalue {w[-1]:.3e})")
    keep = w > pol.threshold(scale) if scale > 0 else np.zeros(n, dtype=bool)
    lam = w[keep]
    vk = v[:, keep]
    sq = np.sqrt(lam)
    return (sq[:, None] * vk.conj().T), (vk / sq[None, :])


def tensor_space(E: Correspondence, psi: AlgebraRep, pol: TolerancePolicy = DEFAULT_POLICY) -> TensorSpace:
    """Internal tensor product E ⊗_ψ K with ⟨ξ⊗h, η⊗h'⟩ = ⟨h, ψ(⟨ξ,η⟩)h'⟩."""
    if E.algebra != psi.algebra:
        raise CorrespondenceError("correspondence and representation live over different algebras")
    d, n = E.dim, psi.space_dim
    gram = np.einsum("pqc,cij->piqj", E.inner, psi.images).reshape(d * n, d * n)
    embed, lift = hilbert_coordinates(gram, pol)
    r = embed.shape[0]
    imgs = np.empty((E.algebra.dim, r, r), dtype=complex)
    for c in range(E.algebra.dim):
        # kron(φ(e_c), I_n) @ lift without forming the Kronecker product
        moved = np.einsum("pq,qic->pic", E.left[c], lift.reshape(d, n, r)).reshape(d * n, r)
        imgs[c] = embed @ moved
    return TensorSpace(d, n, gram, embed, lift, AlgebraRep(E.algebra, r, imgs))


def internal_tensor(E: Correspondence, sigma: AlgebraRep, pol: TolerancePolicy = DEFAULT_POLICY) -> TensorSpace:
    return tensor_space(E, sigma, pol)


def compute_induced_rep(E: Correspondence, pi: AlgebraRep, pol: TolerancePolicy = DEFAULT_POLICY) -> AlgebraRep:
    """a ↦ φ(a) ⊗ I on E ⊗_π K."""
    return tensor_space(E, pi, pol).rep


def algebraic_tensor(E: Correspondence, F: Correspondence) -> Correspondence:
    """E ⊗ F on the algebraic coordinates C^{d_E} ⊗ C^{d_F}, nulls not removed."""
    if E.algebra != F.algebra:
        raise CorrespondenceError("correspondences live over different algebras")
    alg = E.algebra
    dE, dF = E.dim, F.dim
    # X[c, s, t, :] = ⟨f_s, φ_F(e_c) f_t⟩
    X = np.einsum("cut,suk->cstk", F.left, F.inner)
    inner = np.einsum("pqc,cstk->psqtk", E.inner, X).reshape(dE * dF, dE * dF, alg.dim)
    eyeE, eyeF = np.eye(dE), np.eye(dF)
    left = np.stack([np.kron(E.left[c], eyeF) for c in range(alg.dim)]) if alg.dim else None
    right = np.stack([np.kron(eyeE, F.right[c]) for c in range(alg.dim)])
    return Correspondence(alg, dE * dF, right, left, inner)


def reduce(E: Correspondence, pol: TolerancePolicy = DEFAULT_POLICY):
    """Quotient of E by its null space: (E', V) with E' on coordinates V* x."""
    v = E.quotient_basis(pol)
    return compress(E, v), v


def compress(E: Correspondence, v: np.ndarray) -> Correspondence:
    vh = v.conj().T
    right = np.einsum("ij,cjk,kl->cil", vh, E.right, v)
    left = np.einsum("ij,cjk,kl->cil", vh, E.left, v)
    inner = np.einsum("ia,jb,ijc->abc", v.conj(), v, E.inner)
    return Correspondence(E.algebra, v.shape[1], right, left, inner)


def corr_tensor_with_lift(E: Correspondence, F: Correspondence, pol: TolerancePolicy = DEFAULT_POLICY):
    """E ⊗ F modulo its null space, together with the (d_E d_F) x dim lift matrix."""
    return reduce(algebraic_tensor(E, F), pol)


def corr_tensor(E: Correspondence, F: Correspondence, pol: TolerancePolicy = DEFAULT_POLICY) -> Correspondence:
    return corr_tensor_with_lift(E, F, pol)[0]


def direct_sum(E: Correspondence, F: Correspondence) -> Correspondence:
    alg = E.algebra
    d = E.dim + F.dim

    def bd(x, y):
        out = np.zeros((alg.dim, d, d), dtype=complex)
        out[:, :E.dim, :E.dim] = x
        out[:, E.dim:, E.dim:] = y
        return out

    inner = np.zeros((d, d, alg.dim), dtype=complex)
    inner[:E.dim, :E.dim] = E.inner
    inner[E.dim:, E.dim:] = F.inner
    return Correspondence(alg, d, bd(E.right, F.right), bd(E.left, F.left), inner)


def change_basis(E: Correspondence, s: np.ndarray) -> Correspondence:
    """Same module with new basis ε'_p = Σ_q s_{qp} ε_q (s invertible)."""
    si = np.linalg.inv(s)
    right = np.einsum("ij,cjk,kl->cil", si, E.right, s)
    left = np.einsum("ij,cjk,kl->cil", si, E.left, s)
    inner = np.einsum("ia,jb,ijc->abc", s.conj(), s, E.inner)
    return Correspondence(E.algebra, E.dim, right, left, inner)


def standard_correspondence(algebra: FinCStarAlgebra, mult: np.ndarray) -> Correspondence:
    """⊕_{b,c} M_{n_b x n_c} ⊗ C^{mult[b, c]}: left action by block b, right by block c."""
    mult = np.asarray(mult, dtype=int)
    dims = algebra.block_dims
    pieces = []
    for b, nb in enumerate(dims):
        for c, nc in enumerate(dims):
            for _ in range(int(mult[b, c])):
                pieces.append((b, c))
    d = sum(dims[b] * dims[c] for b, c in pieces)
    A = algebra.dim
    right = np.zeros((A, d, d), dtype=complex)
    left = np.zeros((A, d, d), dtype=complex)
    inner = np.zeros((d, d, A), dtype=complex)
    off = 0
    idx = algebra.unit_index
    for b, c in pieces:
        nb, nc = dims[b], dims[c]

        def coord(r, s):
            return off + r * nc + s

        for r in range(nb):
            for s in range(nc):
                # left: e^{(b)}_{pq} * E_{rs} = δ_{qr} E_{ps}
                for p in range(nb):
                    left[idx[(b, p, r)], coord(p, s), coord(r, s)] = 1.0
                # right: E_{rs} * e^{(c)}_{pq} = δ_{sp} E_{rq}
                for q in range(nc):
                    right[idx[(c, s, q)], coord(r, q), coord(r, s)] = 1.0
                # ⟨E_{rs}, E_{r's'}⟩ = E_{sr} E_{r's'} = δ_{rr'} E_{ss'}
                for s2 in range(nc):
                    inner[coord(r, s), coord(r, s2), idx[(c, s, s2)]] = 1.0
        off += nb * nc
    return Correspondence(algebra, d, right, left, inner)
