"""Fock modules and induced (Fock shift) representations.

The induced representation of π on K lives on ⊕_n 𝔼(n) ⊗_π K, realised
here as ⊕_n W(canonical word of n, π).  Creation by ξ ∈ E_i maps the n-th
summand to the (n+e_i)-th one through E_i ⊗ 𝔼(n) ≅ 𝔼(n+e_i), i.e. a
reordering of the word (i) + canon(n).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .cstar import AlgebraRep
from .prodsys import ProductSystem, canonical_word
from .reps import CovariantRep, WordSpaces


def simplex(k: int, N: int) -> list:
    """Multi-indices with |n| ≤ N, ordered by total degree then lexicographically."""
    out = []
    for total in range(N + 1):
        level = [n for n in itertools.product(range(total + 1), repeat=k) if sum(n) == total]
        out.extend(sorted(level))
    return out


@dataclass(frozen=True)
class Frontier:
    """Minimal n with 𝔼(n) = 0; ``finite`` tells whether F(𝔼) is finite dimensional."""

    minimal: tuple
    finite: bool
    probe_bound: int

    def as_json(self):
        if not self.minimal and not self.finite:
            return "infinite"
        return {"minimal": [list(n) for n in self.minimal], "finite": self.finite,
                "probe_bound": self.probe_bound}


def induction_matrices(ps: ProductSystem) -> list:
    from .extend import multiplicity_matrix

    return [multiplicity_matrix(E, ps.pol).matrix for E in ps.correspondences]


def piece_vanishes(mats, n) -> bool:
    """𝔼(n) = 0 iff inducing the faithful multiplicity vector (1,…,1) along n gives 0."""
    v = np.ones(mats[0].shape[0], dtype=object)
    for i in reversed(canonical_word(n)):
        v = mats[i].dot(v)
    return not any(v)


def frontier(ps: ProductSystem) -> Frontier:
    """Minimal elements of {n : 𝔼(n) = 0}.

    For a nonnegative integer matrix M on s blocks, M^l v = 0 for some l
    already forces M^s v = 0, so minimal elements have coordinates ≤ s.
    """
    mats = [np.asarray(m, dtype=object) for m in induction_matrices(ps)]
    s = mats[0].shape[0]
    zeros = [n for n in itertools.product(range(s + 1), repeat=ps.k) if piece_vanishes(mats, n)]
    minimal = []
    for n in sorted(zeros, key=lambda x: (sum(x), x)):
        if not any(all(a <= b for a, b in zip(m, n)) for m in minimal):
            minimal.append(n)
    finite = all(any(sum(m) == m[i] and m[i] > 0 for m in minimal) for i in range(ps.k))
    return Frontier(tuple(minimal), finite, s)


@dataclass(eq=False)
class FockWindow:
    system: ProductSystem
    pi: AlgebraRep
    indices: tuple
    offsets: dict
    dims: dict
    levels: Optional[int]
    spaces: WordSpaces

    @property
    def total_dim(self) -> int:
        return sum(self.dims.values())

    def block(self, n) -> slice:
        o = self.offsets[tuple(n)]
        return slice(o, o + self.dims[tuple(n)])


def fock_window(ps: ProductSystem, pi: AlgebraRep, N: Optional[int] = None) -> FockWindow:
    spaces = WordSpaces(ps, pi, ps.pol)
    if N is None:
        fr = frontier(ps)
        if not fr.finite:
            raise ValueError("the Fock module is infinite dimensional; a level bound is required")
        bound = max((sum(m) for m in fr.minimal), default=0)
        candidates = [n for n in simplex(ps.k, bound * ps.k)
                      if not any(all(a <= b for a, b in zip(m, n)) for m in fr.minimal)]
    else:
        candidates = simplex(ps.k, int(N))
    indices, offsets, dims = [], {}, {}
    off = 0
    for n in candidates:
        d = spaces.dim(canonical_word(n))
        if d == 0:
            continue
        indices.append(n)
        offsets[n] = off
        dims[n] = d
        off += d
    return FockWindow(ps, pi, tuple(indices), offsets, dims, None if N is None else int(N), spaces)


def induce(ps: ProductSystem, pi: AlgebraRep, N: Optional[int] = None) -> CovariantRep:
    """Induced representation σ = φ_∞ ⊗ I, T^{(i)}(ξ) = T_ξ ⊗ I on ⊕ 𝔼(n) ⊗_π K.

    With ``N`` the representation lives on the window |n| ≤ N and creation
    out of level N is truncated; without ``N`` the Fock module must be
    finite dimensional and the result is exact.
    """
    fw = fock_window(ps, pi, N)
    dim = fw.total_dim
    alg = ps.algebra
    sp = fw.spaces
    imgs = np.zeros((alg.dim, dim, dim), dtype=complex)
    for n in fw.indices:
        b = fw.block(n)
        imgs[:, b, b] = sp.space(canonical_word(n)).rep.images
    sigma = AlgebraRep(alg, dim, imgs)
    tmaps = []
    for i, E in enumerate(ps.correspondences):
        d = E.dim
        t = np.zeros((dim, d * dim), dtype=complex)
        for n in fw.indices:
            m = tuple(x + (1 if j == i else 0) for j, x in enumerate(n))
            if m not in fw.offsets:
                continue
            w = canonical_word(n)
            src = sp.space((i,) + w)
            piece = sp.reorder((i,) + w, canonical_word(m)) @ src.embed
            dn = fw.dims[n]
            rows = fw.block(m)
            for p in range(d):
                cols = slice(p * dim + fw.offsets[n], p * dim + fw.offsets[n] + dn)
                t[rows, cols] = piece[:, p * dn:(p + 1) * dn]
        tmaps.append(t)
    grading = np.zeros(dim, dtype=int)
    for n in fw.indices:
        grading[fw.block(n)] = sum(n)
    interior = None
    window = {"exact": True, "pieces": len(fw.indices)}
    if N is not None:
        interior = np.diag((grading < N).astype(float)).astype(complex)
        window = {"levels": int(N), "grading": grading.tolist()}
    rep = CovariantRep(ps, sigma, tuple(tmaps), interior, window, ps.pol)
    rep.fock = fw
    return rep
