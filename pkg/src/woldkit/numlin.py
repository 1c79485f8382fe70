"""Dense complex linear algebra used throughout the package.

Everything here is a pure function of its inputs.  Projections are carried
around as :class:`SubspaceProjection` objects which remember the tolerance
they were built with and an orthonormal basis of their range.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.linalg


class NumericalError(ValueError):
    """Raised on non-finite input or a violated numerical precondition."""


class ConvergenceError(RuntimeError):
    """Raised when an iteration does not stabilise within the allowed steps."""


def _default_abs_tol() -> float:
    env = os.environ.get("WOLDKIT_TOL")
    if env:
        try:
            return float(env)
        except ValueError:
            pass
    return 1e-9


@dataclass(frozen=True)
class TolerancePolicy:
    """Tolerances shared by all numerical predicates.

    ``rank_rtol`` is relative to the largest singular value; singular values
    below ``max(rank_rtol * s_max, abs_tol)`` are treated as zero.
    """

    abs_tol: float = field(default_factory=_default_abs_tol)
    rank_rtol: float = 1e-7
    max_iterations: int = 10000

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rank_rtol > 0 and self.max_iterations > 0):
            raise ValueError("tolerance policy entries must be positive")

    def threshold(self, scale: float) -> float:
        return max(self.rank_rtol * scale, self.abs_tol)

    def as_dict(self) -> dict:
        return {
            "abs_tol": self.abs_tol,
            "rank_rtol": self.rank_rtol,
            "max_iterations": self.max_iterations,
        }


DEFAULT_POLICY = TolerancePolicy()


def opnorm(x: np.ndarray) -> float:
    """Spectral norm; 0 for empty matrices."""
    x = np.asarray(x)
    if x.size == 0:
        return 0.0
    if x.ndim == 1:
        return float(np.linalg.norm(x))
    return float(np.linalg.norm(x, 2))


def check_finite(m: np.ndarray, what: str = "matrix") -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if not np.all(np.isfinite(m)):
        raise NumericalError(f"{what} has non-finite entries")
    return m


def hermitian_part(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.conj().T)


def _canonical_cluster_basis(vecs: np.ndarray) -> np.ndarray:
    """Deterministic orthonormal basis of span(vecs).

    Eigen-solvers return an arbitrary basis inside a degenerate eigenspace;
    we replace it by Gram-Schmidt of the projector's columns taken in index
    order (pivot columns selected by pivoted QR), so e.g. the identity Gram
    yields the standard basis.
    """
    n, r = vecs.shape
    if r == 0:
        return vecs
    proj = vecs @ vecs.conj().T
    _, _, piv = scipy.linalg.qr(proj, pivoting=True, mode="economic")
    cols = np.sort(piv[:r])
    q, rr = np.linalg.qr(proj[:, cols])
    phases = np.diag(rr).copy()
    phases[np.abs(phases) == 0] = 1.0
    q = q * (np.abs(phases) / phases)[None, :].conj()
    return q


def orthonormal_eigh(h: np.ndarray, cluster_rtol: float = 1e-9):
    """Eigen-decomposition of a Hermitian matrix, eigenvalues descending.

    Eigenvectors of (numerically) repeated eigenvalues are canonicalised with
    :func:`_canonical_cluster_basis` so results are reproducible.
    """
    h = hermitian_part(np.asarray(h, dtype=complex))
    n = h.shape[0]
    if n == 0:
        return np.zeros(0), np.zeros((0, 0), dtype=complex)
    w, v = np.linalg.eigh(h)
    order = np.argsort(-w, kind="stable")
    w, v = w[order], v[:, order]
    scale = max(1.0, float(np.max(np.abs(w))))
    out = v.copy()
    start = 0
    while start < n:
        stop = start + 1
        while stop < n and abs(w[stop] - w[start]) <= cluster_rtol * scale:
            stop += 1
        if stop - start > 1:
            out[:, start:stop] = _canonical_cluster_basis(v[:, start:stop])
        start = stop
    return w, out


@dataclass(frozen=True, eq=False)
class SubspaceProjection:
    """Orthogonal projection together with an orthonormal basis of its range."""

    matrix: np.ndarray
    basis: np.ndarray
    tol: float = 1e-9

    @property
    def rank(self) -> int:
        return self.basis.shape[1]

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def from_basis(cls, basis: np.ndarray, tol: float = 1e-9) -> "SubspaceProjection":
        basis = np.asarray(basis, dtype=complex)
        return cls(basis @ basis.conj().T, basis, tol)

    @classmethod
    def zero(cls, n: int, tol: float = 1e-9) -> "SubspaceProjection":
        return cls(np.zeros((n, n), dtype=complex), np.zeros((n, 0), dtype=complex), tol)

    @classmethod
    def identity(cls, n: int, tol: float = 1e-9) -> "SubspaceProjection":
        eye = np.eye(n, dtype=complex)
        return cls(eye, eye.copy(), tol)

    def complement(self) -> "SubspaceProjection":
        return as_projection(np.eye(self.dim) - self.matrix, TolerancePolicy(abs_tol=self.tol))

    def residuals(self) -> dict:
        p = self.matrix
        return {
            "hermitian": opnorm(p - p.conj().T),
            "idempotent": opnorm(p @ p - p),
        }

    def is_valid(self) -> bool:
        return all(v <= self.tol for v in self.residuals().values())

    def __repr__(self):
        return f"SubspaceProjection(dim={self.dim}, rank={self.rank})"


def as_projection(m: np.ndarray, pol: TolerancePolicy = DEFAULT_POLICY,
                  check_tol: Optional[float] = None) -> SubspaceProjection:
    """Turn a numerically idempotent Hermitian matrix into a clean projection.

    Raises :class:`NumericalError` when ``m`` is not a projection within
    ``check_tol`` (defaults to ``1e3 * abs_tol``, allowing for roundoff
    accumulated over long operator products).
    """
    m = check_finite(m)
    tol = pol.abs_tol * 1e3 if check_tol is None else check_tol
    if m.shape[0] == 0:
        return SubspaceProjection.zero(0, pol.abs_tol)
    herm = opnorm(m - m.conj().T)
    idem = opnorm(m @ m - m)
    if herm > tol or idem > tol:
        raise NumericalError(
            f"not a projection: hermitian residual {herm:.3e}, idempotent residual {idem:.3e}")
    w, v = orthonormal_eigh(m)
    basis = v[:, w > 0.5]
    return SubspaceProjection.from_basis(basis, pol.abs_tol)


def numerical_rank(m: np.ndarray, pol: TolerancePolicy = DEFAULT_POLICY) -> int:
    m = np.asarray(m)
    if m.size == 0:
        return 0
    s = np.linalg.svd(m, compute_uv=False)
    return int(np.sum(s > pol.threshold(float(s[0]))))


def range_basis(m: np.ndarray, pol: TolerancePolicy = DEFAULT_POLICY) -> np.ndarray:
    """Orthonormal basis of the numerical column space of ``m``."""
    m = check_finite(m)
    rows = m.shape[0]
    if m.size == 0:
        return np.zeros((rows, 0), dtype=complex)
    u, s, _ = np.linalg.svd(m, full_matrices=False)
    r = int(np.sum(s > pol.threshold(float(s[0]))))
    if r == 0:
        return np.zeros((rows, 0), dtype=complex)
    # canonicalise the basis of the range so equal ranges give equal bases
    return _canonical_cluster_basis(u[:, :r])


def range_projection(m: np.ndarray, pol: TolerancePolicy = DEFAULT_POLICY) -> SubspaceProjection:
    """Projection onto the numerical column space of ``m``."""
    return SubspaceProjection.from_basis(range_basis(m, pol), pol.abs_tol)


def null_basis(m: np.ndarray, pol: TolerancePolicy = DEFAULT_POLICY) -> np.ndarray:
    """Orthonormal basis of the numerical kernel of ``m``."""
    m = check_finite(m)
    cols = m.shape[1]
    if m.shape[0] == 0:
        return np.eye(cols, dtype=complex)
    if cols == 0:
        return np.zeros((0, 0), dtype=complex)
    _, s, vh = np.linalg.svd(m, full_matrices=True)
    smax = float(s[0]) if s.size else 0.0
    r = int(np.sum(s > pol.threshold(smax))) if smax > 0 else 0
    return _canonical_cluster_basis(vh[r:].conj().T)


def meet(p: SubspaceProjection, q: SubspaceProjection,
         pol: TolerancePolicy = DEFAULT_POLICY) -> SubspaceProjection:
    """Projection onto ran(p) ∩ ran(q), via the kernel of (I-p)+(I-q)."""
    if p.dim != q.dim:
        raise NumericalError(f"dimension mismatch: {p.dim} vs {q.dim}")
    n = p.dim
    if n == 0:
        return SubspaceProjection.zero(0, pol.abs_tol)
    eye = np.eye(n)
    s = (eye - p.matrix) + (eye - q.matrix)
    w, v = orthonormal_eigh(s)
    # eigenvalue of s on a unit vector at angle θ from both ranges is O(sin²θ)
    basis = v[:, w <= pol.rank_rtol * 2.0]
    return SubspaceProjection.from_basis(basis, pol.abs_tol)


def join(projs, n: int, pol: TolerancePolicy = DEFAULT_POLICY) -> SubspaceProjection:
    """Projection onto the closed span of the ranges of ``projs``."""
    bases = [p.basis for p in projs if p.rank]
    if not bases:
        return SubspaceProjection.zero(n, pol.abs_tol)
    return range_projection(np.hstack(bases), pol)


def leq(p: SubspaceProjection, q: SubspaceProjection) -> float:
    """Residual of p ≤ q, i.e. ‖p - q p‖."""
    return opnorm(p.matrix - q.matrix @ p.matrix)


def stabilized_limit(step: Callable[[SubspaceProjection], np.ndarray | SubspaceProjection],
                     start: SubspaceProjection,
                     pol: TolerancePolicy = DEFAULT_POLICY,
                     return_trace: bool = False):
    """Limit of a decreasing sequence of projections start, step(start), ...

    In finite dimension a decreasing sequence with two consecutive equal ranks
    has reached its limit, so we stop at the first iterate whose successor has
    the same rank.  Monotonicity is checked at every step.
    """
    current = start
    ranks = [current.rank]
    for it in range(pol.max_iterations):
        out = step(current)
        nxt = out if isinstance(out, SubspaceProjection) else as_projection(out, pol)
        viol = leq(nxt, current)
        if viol > pol.abs_tol * 1e3:
            raise NumericalError(
                f"sequence is not decreasing at iteration {it + 1} (residual {viol:.3e})")
        ranks.append(nxt.rank)
        if nxt.rank == current.rank:
            return (current, ranks) if return_trace else current
        current = nxt
    raise ConvergenceError(f"no stabilisation within {pol.max_iterations} iterations")


def gram_schmidt(m: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Modified Gram-Schmidt on the columns of ``m``, dropping dependent ones."""
    m = np.asarray(m, dtype=complex)
    out = []
    for j in range(m.shape[1]):
        v = m[:, j].copy()
        for _ in range(2):
            for q in out:
                v = v - q * np.vdot(q, v)
        nv = np.linalg.norm(v)
        if nv > tol:
            out.append(v / nv)
    if not out:
        return np.zeros((m.shape[0], 0), dtype=complex)
    return np.stack(out, axis=1)


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))[None, :]


# --- kron helpers: apply kron(I_d, Y) or kron(Y, I_n) without forming it ----

def kron_eye_left(d: int, y: np.ndarray, x: np.ndarray) -> np.ndarray:
    """kron(I_d, y) @ x."""
    a, b = y.shape
    c = x.shape[1]
    xr = x.reshape(d, b, c)
    return np.einsum("ij,pjc->pic", y, xr).reshape(d * a, c)


def kron_eye_right(y: np.ndarray, n: int, x: np.ndarray) -> np.ndarray:
    """kron(y, I_n) @ x."""
    a, b = y.shape
    c = x.shape[1]
    xr = x.reshape(b, n, c)
    return np.einsum("ij,jnc->inc", y, xr).reshape(a * n, c)


def left_kron_eye(x: np.ndarray, d: int, y: np.ndarray) -> np.ndarray:
    """x @ kron(I_d, y)."""
    a, b = y.shape
    r = x.shape[0]
    xr = x.reshape(r, d, a)
    return np.einsum("rpa,ab->rpb", xr, y).reshape(r, d * b)
