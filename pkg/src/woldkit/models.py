"""Generators for the standard example families and test fixtures.

* twisted shifts over A = ℂ with scalar flips t_{i,j},
* systems E_i = _{α_i}A built from commuting automorphisms,
* graph and k-graph correspondences over the vertex algebra C^V,
* the two single-correspondence examples over C² used for unitary extensions.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .corr import Correspondence, identity_correspondence
from .cstar import AlgebraRep, FinCStarAlgebra, identity_rep
from .fock import induce, simplex
from .numlin import DEFAULT_POLICY, TolerancePolicy, opnorm
from .prodsys import ProductSystem, canonical_word, scalar_system
from .reps import CovariantRep


class ModelError(ValueError):
    pass


# --- twisted shifts ------------------------------------------------------------

@dataclass(frozen=True)
class TwistedShiftSpec:
    """Scalar phases t[(i, j)] for i > j (0-based), multiplicity d, level bound N."""

    k: int
    phases: dict = field(default_factory=dict)
    d: int = 1
    N: int = 4

    def __post_init__(self):
        for (i, j), t in self.phases.items():
            if not 0 <= j < i < self.k:
                raise ModelError(f"phase key {(i, j)} must satisfy 0 ≤ j < i < k")
            if abs(abs(t) - 1) > 1e-9:
                raise ModelError(f"phase t({i + 1},{j + 1}) = {t} is not unimodular")

    def phase(self, i: int, j: int) -> complex:
        return complex(self.phases.get((i, j), 1.0))

    def system(self, pol: TolerancePolicy = DEFAULT_POLICY) -> ProductSystem:
        return scalar_system(self.k, [1] * self.k, self.phases, pol=pol)


def twisted_shift(spec: TwistedShiftSpec, pol: TolerancePolicy = DEFAULT_POLICY) -> CovariantRep:
    """S_i δ_m = Π_{j<i} t_{i,j}^{m_j} δ_{m+e_i} on the window |m| ≤ N, ampliated by I_d."""
    ps = spec.system(pol)
    idx = simplex(spec.k, spec.N)
    pos = {m: a for a, m in enumerate(idx)}
    n = len(idx)
    eye_d = np.eye(spec.d)
    maps = []
    for i in range(spec.k):
        s = np.zeros((n, n), dtype=complex)
        for m in idx:
            tgt = tuple(x + (1 if j == i else 0) for j, x in enumerate(m))
            if tgt in pos:
                c = np.prod([spec.phase(i, j) ** m[j] for j in range(i)]) if i else 1.0
                s[pos[tgt], pos[m]] = c
        maps.append(np.kron(s, eye_d))
    dim = n * spec.d
    sigma = AlgebraRep(ps.algebra, dim, np.eye(dim, dtype=complex)[None])
    grading = np.repeat([sum(m) for m in idx], spec.d)
    interior = np.diag((grading < spec.N).astype(float)).astype(complex)
    window = {"levels": spec.N, "grading": grading.tolist()}
    return CovariantRep(ps, sigma, tuple(maps), interior, window, pol)


def twisted_relations(rep: CovariantRep, spec: TwistedShiftSpec) -> dict:
    """Residuals of S_i S_j = t S_j S_i (everywhere) and S_j* S_i = t S_i S_j* (interior)."""
    s = rep.tmaps
    p = rep.interior_matrix()
    out = {}
    for i in range(spec.k):
        for j in range(i):
            t = spec.phase(i, j)
            out[f"S_{i + 1}S_{j + 1} = t S_{j + 1}S_{i + 1}"] = opnorm(s[i] @ s[j] - t * s[j] @ s[i])
            out[f"S_{j + 1}*S_{i + 1} = t S_{i + 1}S_{j + 1}*"] = opnorm(
                (s[j].conj().T @ s[i] - t * s[i] @ s[j].conj().T) @ p)
    return out


# --- A = ℂ systems as row contractions -------------------------------------------

@dataclass(eq=False)
class RowFamily:
    """S^i_α = T̃^{(i)}(e^{(i)}_α ⊗ ·) for orthonormal bases e^{(i)} of E_i."""

    operators: tuple
    bases: tuple
    residuals: dict


def _flip_coefficients(ps: ProductSystem, i: int, j: int, bases) -> np.ndarray:
    """c[β', α', α, β] = ⟨e_β' ⊗ e_α', t_{i,j}(e_α ⊗ e_β)⟩ (t_{i,j} = t_{j,i}^{-1} for i < j)."""
    di, dj = ps.correspondences[i].dim, ps.correspondences[j].dim
    if i > j:
        t = ps.flips[(i, j)]
    else:
        t = ps.flips[(j, i)].conj().T
    bi, bj = bases[i], bases[j]
    c = np.kron(bj, bi).conj().T @ t @ np.kron(bi, bj)
    return c.reshape(dj, di, di, dj)


def scalar_row_convert(rep: CovariantRep, bases=None) -> RowFamily:
    """Turn a representation over A = ℂ into the operator families {S^i_α}.

    Reports the row-contraction residual, the commutation relations, the
    double-commutation relations and the round trip back to T̃.
    """
    ps = rep.system
    if ps.algebra.block_dims != (1,):
        raise ModelError("row families are defined for systems over A = ℂ")
    n = rep.dim
    dims = ps.dims()
    if bases is None:
        bases = tuple(np.eye(d, dtype=complex) for d in dims)
    bases = tuple(np.asarray(b, dtype=complex) for b in bases)
    for i, (b, d) in enumerate(zip(bases, dims)):
        if b.shape != (d, d):
            raise ModelError(f"basis of E_{i + 1} has shape {b.shape}, expected {(d, d)}")
        if opnorm(b.conj().T @ b - np.eye(d)) > 1e-9:
            raise ModelError(f"basis of E_{i + 1} is not orthonormal")
    ops = []
    for i, t in enumerate(rep.tmaps):
        blocks = [t[:, p * n:(p + 1) * n] for p in range(dims[i])]
        ops.append(tuple(sum(bases[i][p, a] * blocks[p] for p in range(dims[i]))
                         for a in range(dims[i])))
    res = {}
    for i in range(ps.k):
        rowsum = sum((s @ s.conj().T for s in ops[i]), np.zeros((n, n), dtype=complex))
        res[f"row contraction {i + 1}"] = max(0.0, opnorm(rowsum) - 1.0) if n else 0.0
        back = np.hstack([sum(np.conj(bases[i][p, a]) * ops[i][a] for a in range(dims[i]))
                          for p in range(dims[i])]) if dims[i] else np.zeros((n, 0))
        res[f"round trip {i + 1}"] = opnorm(back - rep.tmaps[i])
    for i in range(ps.k):
        for j in range(ps.k):
            if i == j:
                continue
            c = _flip_coefficients(ps, i, j, bases)
            comm = dc = 0.0
            for a in range(dims[i]):
                for b in range(dims[j]):
                    rhs = sum(c[b2, a2, a, b] * ops[j][b2] @ ops[i][a2]
                              for b2 in range(dims[j]) for a2 in range(dims[i]))
                    comm = max(comm, opnorm(ops[i][a] @ ops[j][b] - rhs))
                    rhs = sum(c[b, a2, a, b2] * ops[i][a2] @ ops[j][b2].conj().T
                              for b2 in range(dims[j]) for a2 in range(dims[i]))
                    dc = max(dc, opnorm((ops[j][b].conj().T @ ops[i][a] - rhs) @ rep.interior_matrix()))
            res[f"commutation ({i + 1},{j + 1})"] = comm
            res[f"double commutation ({i + 1},{j + 1})"] = dc
    return RowFamily(tuple(ops), bases, res)


def row_family_to_rep(ps: ProductSystem, operators, bases=None) -> CovariantRep:
    """T̃^{(i)}(ξ ⊗ h) = Σ_α ⟨e_α, ξ⟩ S^i_α h."""
    dims = ps.dims()
    if bases is None:
        bases = tuple(np.eye(d, dtype=complex) for d in dims)
    n = operators[0][0].shape[0]
    maps = []
    for i in range(ps.k):
        maps.append(np.hstack([sum(np.conj(bases[i][p, a]) * operators[i][a] for a in range(dims[i]))
                               for p in range(dims[i])]))
    sigma = AlgebraRep(ps.algebra, n, np.eye(n, dtype=complex)[None])
    return CovariantRep(ps, sigma, tuple(maps), pol=ps.pol)


def scalar_unitary_rep(ps: ProductSystem, unitaries, pol: TolerancePolicy = DEFAULT_POLICY) -> CovariantRep:
    """Representation of a system with E_i = ℂ by given unitaries (or isometries) S_i."""
    if ps.algebra.block_dims != (1,) or any(d != 1 for d in ps.dims()):
        raise ModelError("expected a scalar system with one-dimensional fibres")
    u = [np.asarray(x, dtype=complex) for x in unitaries]
    n = u[0].shape[0]
    sigma = AlgebraRep(ps.algebra, n, np.eye(n, dtype=complex)[None])
    return CovariantRep(ps, sigma, tuple(u), pol=pol)


def weyl_pair(n: int, power: int = 1) -> tuple:
    """Clock and shift unitaries with U_2 U_1 = ω U_1 U_2, ω = exp(2πi·power/n)."""
    w = np.exp(2j * np.pi * power / n)
    clock = np.diag(w ** np.arange(n))
    shift = np.roll(np.eye(n), 1, axis=0).astype(complex)
    return clock, shift, w


# --- automorphism systems -------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Automorphism:
    """α(x)_{perm[b]} = u[perm[b]] x_b u[perm[b]]* on A = ⊕_b M_{n_b}."""

    algebra: FinCStarAlgebra
    perm: tuple
    unitaries: tuple = ()

    def __post_init__(self):
        alg = self.algebra
        perm = tuple(int(p) for p in self.perm)
        if sorted(perm) != list(range(alg.num_blocks)):
            raise ModelError(f"{perm} is not a permutation of the blocks")
        if any(alg.block_dims[perm[b]] != alg.block_dims[b] for b in range(alg.num_blocks)):
            raise ModelError("the block permutation does not preserve block sizes")
        us = self.unitaries or tuple(np.eye(n, dtype=complex) for n in alg.block_dims)
        us = tuple(np.asarray(u, dtype=complex) for u in us)
        for b, (u, n) in enumerate(zip(us, alg.block_dims)):
            if u.shape != (n, n) or opnorm(u.conj().T @ u - np.eye(n)) > 1e-9:
                raise ModelError(f"unitary for block {b + 1} is invalid")
        object.__setattr__(self, "perm", perm)
        object.__setattr__(self, "unitaries", us)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        alg = self.algebra
        blocks = alg.to_blocks(np.asarray(x, dtype=complex))
        out = [None] * alg.num_blocks
        for b, xb in enumerate(blocks):
            c = self.perm[b]
            u = self.unitaries[c]
            out[c] = u @ xb @ u.conj().T
        return alg.from_blocks(out)

    def matrix(self) -> np.ndarray:
        """Matrix of α on coefficient vectors."""
        n = self.algebra.dim
        return np.stack([self(e) for e in np.eye(n, dtype=complex)], axis=1)


@dataclass(frozen=True, eq=False)
class AutomorphismSystemSpec:
    algebra: FinCStarAlgebra
    automorphisms: tuple

    @property
    def k(self) -> int:
        return len(self.automorphisms)

    def power(self, m) -> np.ndarray:
        """Matrix of α(m) = α_1^{m_1} ∘ ⋯ ∘ α_k^{m_k}."""
        out = np.eye(self.algebra.dim, dtype=complex)
        for a, mi in zip(self.automorphisms, m):
            out = out @ np.linalg.matrix_power(a.matrix(), int(mi))
        return out

    def validate(self) -> dict:
        mats = [a.matrix() for a in self.automorphisms]
        alg = self.algebra
        res = {}
        for i, m in enumerate(mats):
            mult = 0.0
            for x in np.eye(alg.dim):
                for y in np.eye(alg.dim):
                    mult = max(mult, float(np.max(np.abs(
                        m @ alg.multiply(x, y) - alg.multiply(m @ x, m @ y)))))
            res[f"α_{i + 1} multiplicative"] = mult
        for i, j in itertools.combinations(range(len(mats)), 2):
            res[f"α_{i + 1}, α_{j + 1} commute"] = opnorm(mats[i] @ mats[j] - mats[j] @ mats[i])
        return res


def twisted_module(alpha: Automorphism) -> Correspondence:
    """_αA: A with ⟨a, b⟩ = a*b, right multiplication and φ(a)b = α(a)b."""
    alg = alpha.algebra
    base = identity_correspondence(alg)
    left = np.stack([alg.regular_matrix(alpha(alg.unit(*u))) for u in alg.units])
    return Correspondence(alg, base.dim, base.right, left, base.inner)


def automorphism_system(spec: AutomorphismSystemSpec, pol: TolerancePolicy = DEFAULT_POLICY) -> ProductSystem:
    """E_i = _{α_i}A with t_{i,j}(a ⊗ b) = 1 ⊗ α_j(a) b."""
    bad = {k: v for k, v in spec.validate().items() if v > 1e-9}
    if bad:
        raise ModelError(f"automorphism data invalid: {bad}")
    alg = spec.algebra
    n = alg.dim
    one = alg.one()
    corrs = [twisted_module(a) for a in spec.automorphisms]
    flips = {}
    for i in range(spec.k):
        for j in range(i):
            aj = spec.automorphisms[j]
            t = np.zeros((n * n, n * n), dtype=complex)
            for p in range(n):
                ap = aj(np.eye(n)[p])
                for q in range(n):
                    y = alg.multiply(ap, np.eye(n)[q])
                    t[:, p * n + q] = np.kron(one, y)
            flips[(i, j)] = t
    return ProductSystem(corrs, flips, pol)


@dataclass(eq=False)
class AutomorphismModel:
    """The explicit shift model on ℓ²(window) ⊗ K and its identification with the Fock model."""

    rep: CovariantRep
    shifts: tuple
    sigma: AlgebraRep
    fock: CovariantRep
    identification: np.ndarray
    residuals: dict


def automorphism_induced(spec: AutomorphismSystemSpec, pi: AlgebraRep, N: int,
                         pol: TolerancePolicy = DEFAULT_POLICY) -> AutomorphismModel:
    """σ_π(a)(ξ δ_m) = π(α(m)(a)) ξ δ_m, S_i(ξ δ_m) = ξ δ_{m+e_i}, T_i(a) = S_i σ_π(a)."""
    ps = automorphism_system(spec, pol)
    alg = spec.algebra
    idx = simplex(spec.k, N)
    pos = {m: a for a, m in enumerate(idx)}
    dk = pi.space_dim
    dim = len(idx) * dk
    imgs = np.zeros((alg.dim, dim, dim), dtype=complex)
    for m in idx:
        am = spec.power(m)
        sl = slice(pos[m] * dk, (pos[m] + 1) * dk)
        for c in range(alg.dim):
            imgs[c, sl, sl] = pi(am[:, c])
    sigma = AlgebraRep(alg, dim, imgs)
    shifts = []
    for i in range(spec.k):
        s = np.zeros((len(idx), len(idx)))
        for m in idx:
            tgt = tuple(x + (1 if j == i else 0) for j, x in enumerate(m))
            if tgt in pos:
                s[pos[tgt], pos[m]] = 1.0
        shifts.append(np.kron(s, np.eye(dk)).astype(complex))
    maps = [np.hstack([s @ sigma.images[c] for c in range(alg.dim)]) for s in shifts]
    grading = np.repeat([sum(m) for m in idx], dk)
    interior = np.diag((grading < N).astype(float)).astype(complex)
    window = {"levels": int(N), "grading": grading.tolist()}
    rep = CovariantRep(ps, sigma, tuple(maps), interior, window, pol)
    fock = induce(ps, pi, N)
    fw = fock.fock
    sp = fw.spaces
    one = alg.one()
    # v_{(a)+w}(ξ) = J(1 ⊗ v_w(ξ))
    vmaps = {(): np.eye(dk, dtype=complex)}

    def v(word):
        if word not in vmaps:
            vmaps[word] = sp.space(word).embed @ np.kron(one[:, None], v(word[1:]))
        return vmaps[word]

    u = np.zeros((fock.dim, dim), dtype=complex)
    for m in idx:
        if m in fw.offsets:
            u[fw.block(m), pos[m] * dk:(pos[m] + 1) * dk] = v(canonical_word(m))
    res = {"identification unitary": opnorm(u.conj().T @ u - np.eye(dim)) if dim else 0.0}
    conj = rep.conjugate(u)
    res["σ matches"] = max((opnorm(conj.sigma.images[c] - fock.sigma.images[c]) for c in range(alg.dim)),
                           default=0.0)
    res["T matches"] = max((opnorm(a - b) for a, b in zip(conj.tmaps, fock.tmaps)), default=0.0)
    comm = 0.0
    for i, a in enumerate(spec.automorphisms):
        am = a.matrix()
        for c in range(alg.dim):
            comm = max(comm, opnorm(sigma.images[c] @ shifts[i] - shifts[i] @ sigma(am[:, c])))
    res["σ(a) S_i = S_i σ(α_i(a))"] = comm
    return AutomorphismModel(rep, tuple(shifts), sigma, fock, u, res)


# --- graphs and k-graphs -------------------------------------------------------

@dataclass(frozen=True)
class GraphSpec:
    """k coloured edge lists of (source, range) pairs on vertices 0..V-1.

    ``squares[(i, j)]`` (i > j) optionally fixes the bijection between
    composable pairs (e, f) ∈ E_i × E_j with s(e) = r(f) and pairs
    (f', e') ∈ E_j × E_i with s(f') = r(e'), as a dict of edge-index pairs.
    Otherwise pairs with equal (start, end) are matched in lexicographic order.
    """

    num_vertices: int
    edges: tuple
    squares: Optional[dict] = None

    def __post_init__(self):
        edges = tuple(tuple((int(s), int(r)) for s, r in color) for color in self.edges)
        for color in edges:
            for s, r in color:
                if not (0 <= s < self.num_vertices and 0 <= r < self.num_vertices):
                    raise ModelError(f"edge {(s, r)} has an endpoint outside 0..{self.num_vertices - 1}")
        object.__setattr__(self, "edges", edges)

    @property
    def k(self) -> int:
        return len(self.edges)

    def to_json(self) -> dict:
        return {"vertices": self.num_vertices, "edges": [[list(e) for e in c] for c in self.edges]}


def vertex_algebra(n: int) -> FinCStarAlgebra:
    return FinCStarAlgebra((1,) * n)


def edge_correspondence(spec: GraphSpec, color: int) -> Correspondence:
    """⟨e, f⟩ = δ_ef δ_{s(e)}, φ(δ_v)e = [r(e) = v] e, e·δ_v = [s(e) = v] e."""
    V = spec.num_vertices
    alg = vertex_algebra(V)
    es = spec.edges[color]
    d = len(es)
    right = np.zeros((V, d, d), dtype=complex)
    left = np.zeros((V, d, d), dtype=complex)
    inner = np.zeros((d, d, V), dtype=complex)
    for p, (s, r) in enumerate(es):
        right[s, p, p] = 1
        left[r, p, p] = 1
        inner[p, p, s] = 1
    return Correspondence(alg, d, right, left, inner)


def _square_bijection(spec: GraphSpec, i: int, j: int) -> dict:
    ei, ej = spec.edges[i], spec.edges[j]
    if spec.squares and (i, j) in spec.squares:
        return dict(spec.squares[(i, j)])
    src = {}
    for a, (s, r) in enumerate(ei):
        for b, (s2, r2) in enumerate(ej):
            if s == r2:
                src.setdefault((s2, r), []).append((a, b))
    dst = {}
    for b, (s2, r2) in enumerate(ej):
        for a, (s, r) in enumerate(ei):
            if s2 == r:
                dst.setdefault((s, r2), []).append((b, a))
    if set(src) != set(dst) or any(len(src[key]) != len(dst[key]) for key in src):
        raise ModelError(f"colours {i + 1} and {j + 1} do not admit commuting squares")
    out = {}
    for key in sorted(src):
        for x, y in zip(sorted(src[key]), sorted(dst[key])):
            out[x] = y
    return out


def graph_system(spec: GraphSpec, pol: TolerancePolicy = DEFAULT_POLICY) -> ProductSystem:
    corrs = [edge_correspondence(spec, c) for c in range(spec.k)]
    flips = {}
    for i in range(spec.k):
        for j in range(i):
            di, dj = corrs[i].dim, corrs[j].dim
            t = np.zeros((dj * di, di * dj), dtype=complex)
            for (a, b), (b2, a2) in _square_bijection(spec, i, j).items():
                ea, eb = spec.edges[i][a], spec.edges[j][b]
                fb, fa = spec.edges[j][b2], spec.edges[i][a2]
                if ea[0] != eb[1] or fb[0] != fa[1] or (eb[0], ea[1]) != (fa[0], fb[1]):
                    raise ModelError(f"square {(a, b)} → {(b2, a2)} does not preserve endpoints")
                t[b2 * di + a2, a * dj + b] = 1.0
            flips[(i, j)] = t
    return ProductSystem(corrs, flips, pol)


def graph_rep(spec: GraphSpec, weights=None, pol: TolerancePolicy = DEFAULT_POLICY,
              system: Optional[ProductSystem] = None) -> CovariantRep:
    """T̃^{(i)}(e ⊗ δ_{s(e)}) = w_e δ_{r(e)} on C^V."""
    ps = system or graph_system(spec, pol)
    V = spec.num_vertices
    maps = []
    for c, es in enumerate(spec.edges):
        t = np.zeros((V, len(es) * V), dtype=complex)
        for p, (s, r) in enumerate(es):
            w = 1.0 if weights is None else weights[c][p]
            t[r, p * V + s] = w
        maps.append(t)
    sigma = identity_rep(ps.algebra)
    return CovariantRep(ps, sigma, tuple(maps), pol=pol)


def graph_flags(spec: GraphSpec) -> dict:
    """Direct combinatorial flags: isometric iff r is injective per colour, coisometric iff onto."""
    out = {}
    for c, es in enumerate(spec.edges):
        ranges = [r for _, r in es]
        out[f"isometric {c + 1}"] = len(set(ranges)) == len(ranges)
        out[f"fully coisometric {c + 1}"] = set(ranges) == set(range(spec.num_vertices))
    return out


def chain_graph(length: int, k: int = 1) -> GraphSpec:
    """Path 0 → 1 → ⋯ → length-1 in colour 1; further colours carry loops."""
    edges = [tuple((v, v + 1) for v in range(length - 1))]
    for _ in range(k - 1):
        edges.append(tuple((v, v) for v in range(length)))
    return GraphSpec(length, tuple(edges))


def two_vertex_graph() -> GraphSpec:
    return chain_graph(2)


def loop_graph(k: int = 1) -> GraphSpec:
    return GraphSpec(1, tuple(((0, 0),) for _ in range(k)))


def grid_graph(k: int, N: int) -> GraphSpec:
    """The k-graph on {n ∈ ℕ₀^k : |n| ≤ N} with colour-i edges n → n + e_i."""
    verts = simplex(k, N)
    pos = {n: a for a, n in enumerate(verts)}
    edges = []
    for i in range(k):
        es = []
        for n in verts:
            m = tuple(x + (1 if j == i else 0) for j, x in enumerate(n))
            if m in pos:
                es.append((pos[n], pos[m]))
        edges.append(tuple(es))
    return GraphSpec(len(verts), tuple(edges))


def disjoint_union(*graphs: GraphSpec) -> GraphSpec:
    k = graphs[0].k
    if any(g.k != k for g in graphs):
        raise ModelError("graphs have different numbers of colours")
    edges = [[] for _ in range(k)]
    off = 0
    for g in graphs:
        for c in range(k):
            edges[c].extend((s + off, r + off) for s, r in g.edges[c])
        off += g.num_vertices
    return GraphSpec(off, tuple(tuple(e) for e in edges))


def product_graph(g: GraphSpec, h: GraphSpec) -> GraphSpec:
    """Vertices V_g × V_h; colours of g act on the first factor, colours of h on the second."""
    nh = h.num_vertices

    def v(a, b):
        return a * nh + b

    edges = []
    for c in g.edges:
        edges.append(tuple((v(s, b), v(r, b)) for s, r in c for b in range(nh)))
    for c in h.edges:
        edges.append(tuple((v(a, s), v(a, r)) for a in range(g.num_vertices) for s, r in c))
    return GraphSpec(g.num_vertices * nh, tuple(edges))


def nondc_graph() -> GraphSpec:
    """A commuting, non-doubly-commuting 2-coloured graph on six vertices.

    Vertices 0, 1, 2 carry a pair of shifts (blue and red edges v → v+1),
    vertex 3 carries a blue and a red loop, and 4, 5 carry a blue edge 4 → 5
    with red loops at 4 and 5.
    """
    blue = ((0, 1), (1, 2), (3, 3), (4, 5))
    red = ((0, 1), (1, 2), (3, 3), (4, 4), (5, 5))
    return GraphSpec(6, (blue, red))


# --- single-correspondence examples over C² ------------------------------------------

def nonfaithful_correspondence() -> Correspondence:
    """E = A = C² with φ(λ e_1 + μ e_2) a = λ a."""
    alg = vertex_algebra(2)
    base = identity_correspondence(alg)
    left = np.zeros_like(base.left)
    left[0] = np.eye(2)
    return Correspondence(alg, 2, base.right, left, base.inner)


def swap_correspondence() -> Correspondence:
    """E = C² with φ(λ e_1 + μ e_2)(λ', μ') = (μ λ', λ μ')."""
    alg = vertex_algebra(2)
    return twisted_module(Automorphism(alg, (1, 0)))


@dataclass(frozen=True, eq=False)
class Section5Fixture:
    name: str
    correspondence: Correspondence
    matrix: tuple
    m: tuple
    expected_status: str
    expected_m_prime: Optional[tuple]
    expected_obstruction: Optional[str]
    unit1: bool
    unit2: bool

    def system(self, pol: TolerancePolicy = DEFAULT_POLICY) -> ProductSystem:
        return ProductSystem([self.correspondence], {}, pol)

    def check(self) -> dict:
        """Run the solver and compare with the recorded expectations."""
        from .extend import eqrep_solve, multiplicity_matrix, unit1_applies, unit2_check

        M = multiplicity_matrix(self.correspondence).matrix
        cert = eqrep_solve(M, self.m)
        return {
            "matrix": [list(map(int, r)) for r in M] == [list(r) for r in self.matrix],
            "status": cert.status == self.expected_status,
            "m_prime": (cert.m_prime.to_json() if cert.m_prime is not None else None)
            == (list(self.expected_m_prime) if self.expected_m_prime is not None else None),
            "obstruction": cert.obstruction == self.expected_obstruction,
            "unit1": unit1_applies(M) == self.unit1,
            "unit2": unit2_check(M, self.m)[0] == self.unit2,
        }


class Section5Bundle:
    """The non-faithful and swap examples; a third slot is reserved and raises on access."""

    names = ("nonfaithful", "swap")

    def __init__(self):
        self._items = (
            Section5Fixture("nonfaithful", nonfaithful_correspondence(), ((1, 1), (0, 0)), (0, 1),
                            "infeasible", None, "zero induction row 2 with m_2=1", False, False),
            Section5Fixture("swap", swap_correspondence(), ((0, 1), (1, 0)), (1, 0),
                            "feasible", ("inf", "inf"), None, True, False),
        )

    def __getitem__(self, key):
        if isinstance(key, str):
            for f in self._items:
                if f.name == key:
                    return f
            raise KeyError(key)
        if key == 2:
            raise IndexError("the third fixture slot is reserved and empty")
        return self._items[key]

    def __iter__(self):
        return iter(self._items)

    def __len__(self):
        return len(self._items)

    def check(self) -> dict:
        return {f.name: f.check() for f in self._items}


def section5_fixtures() -> Section5Bundle:
    return Section5Bundle()


# --- random instances ----------------------------------------------------------------

def random_scalar_phases(k: int, rng: np.random.Generator) -> dict:
    return {(i, j): complex(np.exp(1j * rng.uniform(0, 2 * np.pi))) for i in range(k) for j in range(i)}


def random_correspondence(algebra: FinCStarAlgebra, rng: np.random.Generator, max_mult: int = 2,
                          scramble: bool = True) -> Correspondence:
    """A standard correspondence with random multiplicities, in a random (non-orthonormal) basis."""
    from .corr import change_basis, standard_correspondence

    s = algebra.num_blocks
    mult = rng.integers(0, max_mult + 1, size=(s, s))
    E = standard_correspondence(algebra, mult)
    if scramble and E.dim:
        g = rng.normal(size=(E.dim, E.dim)) + 1j * rng.normal(size=(E.dim, E.dim))
        E = change_basis(E, g + E.dim * np.eye(E.dim))
    return E
