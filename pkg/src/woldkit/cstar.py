"""Finite-dimensional C*-algebras ⊕_b M_{n_b} and their representations.

Algebra elements are stored as coefficient vectors in the matrix-unit basis
``e^{(b)}_{pq}`` (block-major, then row, then column).  A representation is
given by the images of the matrix units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .numlin import DEFAULT_POLICY, NumericalError, TolerancePolicy, check_finite, opnorm

INF = math.inf


class RepresentationError(ValueError):
    """Invalid representation data."""


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of a relation check: one residual per named relation."""

    residuals: dict
    tol: float
    notes: tuple = ()

    @property
    def violations(self) -> list:
        return [name for name, r in self.residuals.items() if not r <= self.tol]

    @property
    def passed(self) -> bool:
        return not self.violations

    def merged(self, other: "ValidationReport", prefix: str = "") -> "ValidationReport":
        res = dict(self.residuals)
        res.update({prefix + k: v for k, v in other.residuals.items()})
        return ValidationReport(res, self.tol, self.notes + other.notes)

    def as_dict(self) -> dict:
        return {
            "passed": self.passed,
            "tol": self.tol,
            "violations": self.violations,
            "residuals": {k: float(v) for k, v in self.residuals.items()},
        }


@dataclass(frozen=True)
class FinCStarAlgebra:
    """A = M_{n_1} ⊕ ... ⊕ M_{n_s}."""

    block_dims: tuple

    def __post_init__(self):
        dims = tuple(int(n) for n in self.block_dims)
        if not dims or any(n <= 0 for n in dims):
            raise ValueError("block dimensions must be a nonempty list of positive integers")
        object.__setattr__(self, "block_dims", dims)

    @property
    def num_blocks(self) -> int:
        return len(self.block_dims)

    @cached_property
    def units(self) -> tuple:
        """Matrix units as (block, row, col), in coefficient order."""
        return tuple((b, p, q) for b, n in enumerate(self.block_dims)
                     for p in range(n) for q in range(n))

    @cached_property
    def unit_index(self) -> dict:
        return {u: i for i, u in enumerate(self.units)}

    @property
    def dim(self) -> int:
        return sum(n * n for n in self.block_dims)

    @cached_property
    def _mult_table(self) -> np.ndarray:
        # mult[i, j] = index of e_i e_j, or -1 when the product vanishes
        idx = self.unit_index
        table = -np.ones((self.dim, self.dim), dtype=int)
        for i, (b, p, q) in enumerate(self.units):
            n = self.block_dims[b]
            for s in range(n):
                table[i, idx[(b, q, s)]] = idx[(b, p, s)]
        return table

    def unit(self, b: int, p: int, q: int) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[self.unit_index[(b, p, q)]] = 1.0
        return v

    def one(self) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        for b, n in enumerate(self.block_dims):
            for p in range(n):
                v[self.unit_index[(b, p, p)]] = 1.0
        return v

    def central(self, b: int) -> np.ndarray:
        """Central projection z_b."""
        v = np.zeros(self.dim, dtype=complex)
        for p in range(self.block_dims[b]):
            v[self.unit_index[(b, p, p)]] = 1.0
        return v

    def multiply(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        out = np.zeros(self.dim, dtype=complex)
        table = self._mult_table
        nz_x = np.nonzero(x)[0]
        nz_y = np.nonzero(y)[0]
        for i in nz_x:
            for j in nz_y:
                k = table[i, j]
                if k >= 0:
                    out[k] += x[i] * y[j]
        return out

    def adjoint(self, x: np.ndarray) -> np.ndarray:
        out = np.zeros(self.dim, dtype=complex)
        idx = self.unit_index
        for i, (b, p, q) in enumerate(self.units):
            out[idx[(b, q, p)]] = np.conj(x[i])
        return out

    def trace(self, x: np.ndarray) -> complex:
        """Faithful trace τ = Σ_b Tr_b / n_b."""
        total = 0.0j
        for i, (b, p, q) in enumerate(self.units):
            if p == q:
                total += x[i] / self.block_dims[b]
        return total

    def to_blocks(self, x: np.ndarray) -> list:
        blocks = []
        k = 0
        for n in self.block_dims:
            blocks.append(np.asarray(x[k:k + n * n]).reshape(n, n))
            k += n * n
        return blocks

    def from_blocks(self, blocks: Sequence[np.ndarray]) -> np.ndarray:
        if len(blocks) != self.num_blocks:
            raise ValueError("wrong number of blocks")
        parts = []
        for blk, n in zip(blocks, self.block_dims):
            blk = np.asarray(blk, dtype=complex)
            if blk.shape != (n, n):
                raise ValueError(f"block of shape {blk.shape}, expected {(n, n)}")
            parts.append(blk.reshape(-1))
        return np.concatenate(parts)

    def regular_matrix(self, x: np.ndarray) -> np.ndarray:
        """Matrix of left multiplication by x on the coefficient space."""
        m = np.zeros((self.dim, self.dim), dtype=complex)
        for j in range(self.dim):
            e = np.zeros(self.dim, dtype=complex)
            e[j] = 1
            m[:, j] = self.multiply(x, e)
        return m

    def right_regular_matrix(self, x: np.ndarray) -> np.ndarray:
        m = np.zeros((self.dim, self.dim), dtype=complex)
        for j in range(self.dim):
            e = np.zeros(self.dim, dtype=complex)
            e[j] = 1
            m[:, j] = self.multiply(e, x)
        return m

    def to_json(self) -> dict:
        return {"blocks": list(self.block_dims)}


@dataclass(frozen=True, eq=False)
class AlgebraElement:
    algebra: FinCStarAlgebra
    blocks: tuple

    @classmethod
    def from_coeffs(cls, algebra: FinCStarAlgebra, coeffs: np.ndarray) -> "AlgebraElement":
        return cls(algebra, tuple(algebra.to_blocks(np.asarray(coeffs, dtype=complex))))

    @property
    def coeffs(self) -> np.ndarray:
        return self.algebra.from_blocks(self.blocks)


@dataclass(frozen=True, eq=False)
class AlgebraRep:
    """Representation of A on C^space_dim, given on matrix units."""

    algebra: FinCStarAlgebra
    space_dim: int
    images: np.ndarray  # (dim A, space_dim, space_dim)

    def __post_init__(self):
        imgs = check_finite(self.images, "representation images")
        if imgs.shape != (self.algebra.dim, self.space_dim, self.space_dim):
            raise RepresentationError(
                f"images of shape {imgs.shape}, expected "
                f"{(self.algebra.dim, self.space_dim, self.space_dim)}")
        object.__setattr__(self, "images", imgs)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return np.tensordot(np.asarray(x, dtype=complex), self.images, axes=(0, 0))

    def unit_image(self, b: int, p: int, q: int) -> np.ndarray:
        return self.images[self.algebra.unit_index[(b, p, q)]]

    def conjugate(self, u: np.ndarray) -> "AlgebraRep":
        """The representation a ↦ u σ(a) u*, u a unitary (or isometry) onto the new space."""
        imgs = np.einsum("ij,ajk,lk->ail", u, self.images, u.conj())
        return AlgebraRep(self.algebra, u.shape[0], imgs)

    def compress(self, w: np.ndarray) -> "AlgebraRep":
        """Restriction to ran(w) for w with orthonormal columns spanning a reducing subspace."""
        imgs = np.einsum("ji,ajk,kl->ail", w.conj(), self.images, w)
        return AlgebraRep(self.algebra, w.shape[1], imgs)

    def direct_sum(self, other: "AlgebraRep") -> "AlgebraRep":
        n, m = self.space_dim, other.space_dim
        imgs = np.zeros((self.algebra.dim, n + m, n + m), dtype=complex)
        imgs[:, :n, :n] = self.images
        imgs[:, n:, n:] = other.images
        return AlgebraRep(self.algebra, n + m, imgs)

    def commutes_with(self, x: np.ndarray) -> float:
        if self.space_dim == 0:
            return 0.0
        return max(opnorm(img @ x - x @ img) for img in self.images)


def validate_rep(sigma: AlgebraRep, pol: TolerancePolicy = DEFAULT_POLICY) -> ValidationReport:
    """Check the matrix-unit relations, adjoints and unitality."""
    alg = sigma.algebra
    res = {}
    mult = 0.0
    for b, n in enumerate(alg.block_dims):
        for p in range(n):
            for q in range(n):
                epq = sigma.unit_image(b, p, q)
                adj = opnorm(epq.conj().T - sigma.unit_image(b, q, p))
                res[f"adjoint e^({b + 1})_({p + 1}{q + 1})"] = adj
                for r in range(n):
                    for s in range(n):
                        expect = sigma.unit_image(b, p, s) if q == r else 0
                        mult = max(mult, opnorm(epq @ sigma.unit_image(b, r, s) - expect))
        # products across distinct blocks vanish
        for c in range(b + 1, alg.num_blocks):
            cross = sigma(alg.central(b)) @ sigma(alg.central(c))
            mult = max(mult, opnorm(cross))
    res["matrix unit products"] = mult
    res["unital"] = opnorm(sigma(alg.one()) - np.eye(sigma.space_dim))
    return ValidationReport(res, pol.abs_tol * 10)


@dataclass(frozen=True)
class MultiplicityVector:
    """Block multiplicities; entries are ints or ``INF``."""

    entries: tuple

    def __post_init__(self):
        ents = []
        for e in self.entries:
            if isinstance(e, str) and e.lower() in ("inf", "∞"):
                e = INF
            if e == INF:
                ents.append(INF)
            else:
                if int(e) != e or e < 0:
                    raise ValueError(f"multiplicity {e!r} is not an extended natural")
                ents.append(int(e))
        object.__setattr__(self, "entries", tuple(ents))

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    @property
    def is_finite(self) -> bool:
        return all(e != INF for e in self.entries)

    def to_json(self) -> list:
        return ["inf" if e == INF else int(e) for e in self.entries]

    def __repr__(self):
        return "MultiplicityVector(" + ", ".join("∞" if e == INF else str(e) for e in self.entries) + ")"


def multiplicity_vector(sigma: AlgebraRep, pol: TolerancePolicy = DEFAULT_POLICY) -> MultiplicityVector:
    """m_b = rank σ(e^{(b)}_{11}); every diagonal unit of a block must agree."""
    alg = sigma.algebra
    mults = []
    total = 0
    for b, n in enumerate(alg.block_dims):
        ranks = set()
        for p in range(n):
            tr = np.trace(sigma.unit_image(b, p, p)).real
            r = int(round(tr))
            if abs(tr - r) > 1e-6:
                raise RepresentationError(f"σ(e^({b + 1})_({p + 1}{p + 1})) has non-integral trace {tr}")
            ranks.add(r)
        if len(ranks) != 1:
            raise RepresentationError(f"inconsistent ranks {sorted(ranks)} in block {b + 1}")
        m = ranks.pop()
        mults.append(m)
        total += m * n
    if total != sigma.space_dim:
        raise RepresentationError(
            f"multiplicities account for dimension {total}, space has {sigma.space_dim}")
    return MultiplicityVector(tuple(mults))


def irreducible(algebra: FinCStarAlgebra, b: int) -> AlgebraRep:
    """π_b: A → M_{n_b}, projection onto block b."""
    n = algebra.block_dims[b]
    imgs = np.zeros((algebra.dim, n, n), dtype=complex)
    for p in range(n):
        for q in range(n):
            imgs[algebra.unit_index[(b, p, q)], p, q] = 1.0
    return AlgebraRep(algebra, n, imgs)


def identity_rep(algebra: FinCStarAlgebra) -> AlgebraRep:
    return rep_from_multiplicities(algebra, [1] * algebra.num_blocks)


def rep_from_multiplicities(algebra: FinCStarAlgebra, m: Iterable) -> AlgebraRep:
    """Canonical model ⊕_b π_b ⊗ I_{m_b}; basis ordered block-major, copy-minor."""
    m = MultiplicityVector(tuple(m))
    if len(m) != algebra.num_blocks:
        raise ValueError("multiplicity vector has the wrong length")
    if not m.is_finite:
        raise ValueError("cannot realise an infinite multiplicity")
    dim = sum(mb * n for mb, n in zip(m, algebra.block_dims))
    imgs = np.zeros((algebra.dim, dim, dim), dtype=complex)
    off = 0
    for b, (mb, n) in enumerate(zip(m, algebra.block_dims)):
        for c in range(mb):
            for p in range(n):
                for q in range(n):
                    imgs[algebra.unit_index[(b, p, q)], off + p, off + q] = 1.0
            off += n
    return AlgebraRep(algebra, dim, imgs)


def canonical_basis(sigma: AlgebraRep, pol: TolerancePolicy = DEFAULT_POLICY) -> np.ndarray:
    """Unitary W with W* σ(a) W = rep_from_multiplicities(m)(a).

    Built by choosing an orthonormal basis v_1..v_m of ran σ(e^{(b)}_{11}) and
    spreading it with σ(e^{(b)}_{p1}).
    """
    from .numlin import range_basis

    alg = sigma.algebra
    cols = []
    for b, n in enumerate(alg.block_dims):
        vs = range_basis(sigma.unit_image(b, 0, 0), pol)
        for c in range(vs.shape[1]):
            for p in range(n):
                cols.append(sigma.unit_image(b, p, 0) @ vs[:, c])
    if not cols:
        return np.zeros((sigma.space_dim, 0), dtype=complex)
    w = np.stack(cols, axis=1)
    if w.shape[1] != sigma.space_dim:
        raise RepresentationError("representation is degenerate or not unital")
    return w


def intertwiner(sigma: AlgebraRep, rho: AlgebraRep, pol: TolerancePolicy = DEFAULT_POLICY) -> np.ndarray:
    """Unitary U with U σ(a) U* = ρ(a); raises if the multiplicities differ."""
    ms, mr = multiplicity_vector(sigma, pol), multiplicity_vector(rho, pol)
    if ms != mr:
        raise RepresentationError(f"inequivalent representations: {ms} vs {mr}")
    return canonical_basis(rho, pol) @ canonical_basis(sigma, pol).conj().T


def random_rep(algebra: FinCStarAlgebra, m: Sequence[int], rng: np.random.Generator) -> AlgebraRep:
    from .numlin import random_unitary

    base = rep_from_multiplicities(algebra, m)
    if base.space_dim == 0:
        return base
    return base.conjugate(random_unitary(base.space_dim, rng))
