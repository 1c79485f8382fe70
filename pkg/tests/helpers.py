"""Shared fixture builders for the test suite."""

from __future__ import annotations

import numpy as np
from scipy.linalg import block_diag

from woldkit import models
from woldkit.cstar import AlgebraRep, FinCStarAlgebra, rep_from_multiplicities
from woldkit.fock import induce
from woldkit.numlin import random_unitary
from woldkit.prodsys import scalar_system
from woldkit.reps import CovariantRep


def unitary_k1(n: int = 3, seed: int = 0) -> CovariantRep:
    """k = 1, A = E = ℂ, T̃ a random unitary."""
    ps = scalar_system(1, [1])
    return models.scalar_unitary_rep(ps, [random_unitary(n, np.random.default_rng(seed))])


def contraction_k1(c: float = 0.5, n: int = 3, seed: int = 0) -> CovariantRep:
    ps = scalar_system(1, [1])
    return models.scalar_unitary_rep(ps, [c * random_unitary(n, np.random.default_rng(seed))])


def weyl_rep(n: int, power: int = 1) -> CovariantRep:
    """k = 2 unitary pair satisfying the twisted commutation with phase exp(2πi·power/n)."""
    clock, shift, w = models.weyl_pair(n, power)
    ps = scalar_system(2, [1, 1], phases={(1, 0): w})
    return models.scalar_unitary_rep(ps, [shift, clock])


def twisted(k: int, thetas=(), d: int = 1, N: int = 3) -> CovariantRep:
    pairs = [(i, j) for i in range(k) for j in range(i)]
    phases = {pr: complex(np.exp(1j * th)) for pr, th in zip(pairs, thetas)}
    return models.twisted_shift(models.TwistedShiftSpec(k, phases, d, N))


def scalar_sum(a: CovariantRep, b: CovariantRep) -> CovariantRep:
    """Direct sum of two representations of the same scalar system."""
    ps = a.system
    n = a.dim + b.dim
    sigma = AlgebraRep(ps.algebra, n, np.eye(n, dtype=complex)[None])
    maps = tuple(block_diag(x, y) for x, y in zip(a.tmaps, b.tmaps))
    if a.interior is None and b.interior is None:
        interior = None
    else:
        interior = block_diag(a.interior_matrix(), b.interior_matrix())
    return CovariantRep(ps, sigma, maps, interior, a.window or b.window, ps.pol)


def twisted_plus_weyl(n: int = 3, N: int = 3) -> CovariantRep:
    """Twisted shift window ⊕ a Weyl unitary pair with the same phase."""
    shift = twisted(2, [2 * np.pi / n], 1, N)
    uni = weyl_rep(n)
    uni = CovariantRep(shift.system, uni.sigma, uni.tmaps, None, None, shift.pol)
    return scalar_sum(shift, uni)


def automorphism_rep(blocks=(1, 1), perms=((1, 0),), m=None, N: int = 3) -> CovariantRep:
    alg = FinCStarAlgebra(tuple(blocks))
    autos = tuple(models.Automorphism(alg, tuple(p)) for p in perms)
    spec = models.AutomorphismSystemSpec(alg, autos)
    pi = rep_from_multiplicities(alg, m or [1] * alg.num_blocks)
    return models.automorphism_induced(spec, pi, N).rep


def graph(spec, weights=None) -> CovariantRep:
    return models.graph_rep(spec, weights)


def dc_fixtures() -> dict:
    """Doubly commuting isometric fixtures (dim H ≤ 200)."""
    fx = {
        "two-vertex": graph(models.two_vertex_graph()),
        "chain-3": graph(models.chain_graph(3)),
        "chain-4-k2": graph(models.chain_graph(4, 2)),
        "loop": graph(models.loop_graph(1)),
        "loop-k2": graph(models.loop_graph(2)),
        "loop+sink": graph(models.disjoint_union(models.loop_graph(1), models.two_vertex_graph())),
        "grid-2-2": graph(models.grid_graph(2, 2)),
        "grid-2-3": graph(models.grid_graph(2, 3)),
        "grid-3-2": graph(models.grid_graph(3, 2)),
        "grid+loop": graph(models.disjoint_union(models.grid_graph(2, 2), models.loop_graph(2))),
        "shift-k1": twisted(1, (), 1, 5),
        "shift-k1-d2": twisted(1, (), 2, 4),
        "twisted-0": twisted(2, [0.0], 1, 3),
        "twisted-1": twisted(2, [1.0], 1, 3),
        "twisted-2.5": twisted(2, [2.5], 1, 4),
        "twisted-d2": twisted(2, [0.7], 2, 3),
        "twisted-k3": twisted(3, [0.3, 1.1, 2.0], 1, 2),
        "twisted+weyl": twisted_plus_weyl(3, 3),
        "twisted+weyl-4": twisted_plus_weyl(4, 2),
        "weyl": weyl_rep(3),
        "unitary-k1": unitary_k1(4, 1),
        "auto-swap": automorphism_rep((1, 1), ((1, 0),), None, 4),
        "auto-M2+C": automorphism_rep((2, 1), ((0, 1),), [1, 2], 3),
    }
    return fx


def random_pi(algebra: FinCStarAlgebra, rng: np.random.Generator, max_mult: int = 2) -> AlgebraRep:
    m = rng.integers(0, max_mult + 1, size=algebra.num_blocks)
    if m.sum() == 0:
        m[0] = 1
    return rep_from_multiplicities(algebra, m)


def induced_fixtures() -> dict:
    """Induced representations built by the Fock construction."""
    out = {}
    ps = models.graph_system(models.two_vertex_graph())
    out["graph-exact"] = induce(ps, rep_from_multiplicities(ps.algebra, [1, 1]))
    ps = scalar_system(1, [2])
    out["cuntz-window"] = induce(ps, rep_from_multiplicities(ps.algebra, [1]), 3)
    ps = scalar_system(2, [1, 1], phases={(1, 0): complex(np.exp(0.4j))})
    out["twisted-window"] = induce(ps, rep_from_multiplicities(ps.algebra, [2]), 3)
    ps = models.graph_system(models.grid_graph(2, 2))
    out["grid-exact"] = induce(ps, rep_from_multiplicities(ps.algebra, [1] * ps.algebra.num_blocks))
    return out


# --- dense Gram-nullspace oracles -------------------------------------------------

def oracle_internal_gram(E, sigma) -> np.ndarray:
    """G[(p,i),(q,j)] = ⟨e_i, σ(⟨ε_p, ε_q⟩) e_j⟩ by explicit loops."""
    d, n = E.dim, sigma.space_dim
    g = np.zeros((d * n, d * n), dtype=complex)
    for p in range(d):
        for q in range(d):
            a = sum(E.inner[p, q, c] * sigma.images[c] for c in range(E.algebra.dim))
            g[p * n:(p + 1) * n, q * n:(q + 1) * n] = a
    return g


def oracle_corr_gram(E, F) -> np.ndarray:
    """Trace-scalarized Gram of the algebraic E ⊗ F: τ(⟨f_s, φ_F(⟨ε_p, ε_q⟩) f_t⟩)."""
    alg = E.algebra
    tau = np.array([1.0 / alg.block_dims[b] if p == q else 0.0 for (b, p, q) in alg.units])
    dE, dF = E.dim, F.dim
    g = np.zeros((dE * dF, dE * dF), dtype=complex)
    for p in range(dE):
        for q in range(dE):
            act = sum(E.inner[p, q, c] * F.left[c] for c in range(alg.dim))
            for s in range(dF):
                for t in range(dF):
                    val = sum(act[u, t] * F.inner[s, u] for u in range(dF))
                    g[p * dF + s, q * dF + t] = val @ tau
    return g


def oracle_rank(g: np.ndarray) -> int:
    """d - nullity, with the nullspace from scipy's SVD-based routine."""
    from scipy.linalg import null_space

    if g.size == 0:
        return 0
    return g.shape[0] - null_space(g, rcond=1e-9).shape[1]


def nonzero_eigs(g: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    w = np.linalg.eigvalsh((g + g.conj().T) / 2) if g.size else np.zeros(0)
    return np.sort(w[w > tol * max(1.0, np.abs(w).max(initial=0.0))])


# --- brute-force reducing-subspace oracle -----------------------------------------

def commutant_basis(rep: CovariantRep, tol: float = 1e-9) -> list:
    """Basis of {X : X reduces σ and every T̃^{(i)}}, by solving the linear conditions."""
    from scipy.linalg import null_space

    n = rep.dim
    units = [np.zeros((n, n), dtype=complex) for _ in range(n * n)]
    for a in range(n * n):
        units[a].flat[a] = 1.0
    # σ(A)' first, so that I ⊗ X is defined
    rows = [np.stack([(img @ u - u @ img).ravel() for u in units], axis=1) for img in rep.sigma.images]
    comm = null_space(np.vstack(rows), rcond=tol)
    basis = [comm[:, c].reshape(n, n) for c in range(comm.shape[1])]
    conds = []
    for i in range(rep.k):
        th = rep.tilde(i)
        cols = []
        for x in basis:
            ix = rep.eye_tensor(i, x)
            ixs = rep.eye_tensor(i, x.conj().T)
            cols.append(np.concatenate([(th @ ix - x @ th).ravel(), (th @ ixs - x.conj().T @ th).ravel()]))
        conds.append(np.stack(cols, axis=1))
    coeff = null_space(np.vstack(conds), rcond=tol) if conds else np.eye(len(basis))
    return [sum(c * b for c, b in zip(coeff[:, j], basis)) for j in range(coeff.shape[1])]


def minimal_projections(rep: CovariantRep, seed: int = 0) -> list:
    """Minimal projections of an abelian commutant (raises if it is not abelian)."""
    cb = commutant_basis(rep)
    for x in cb:
        for y in cb:
            if np.abs(x @ y - y @ x).max() > 1e-8:
                raise ValueError("commutant is not abelian; reducing subspaces are not finitely many")
    rng = np.random.default_rng(seed)
    h = sum(rng.normal() * (x + x.conj().T) for x in cb)
    w, v = np.linalg.eigh(h)
    groups = []
    start = 0
    for a in range(1, len(w) + 1):
        if a == len(w) or w[a] - w[a - 1] > 1e-6:
            groups.append(v[:, start:a] @ v[:, start:a].conj().T)
            start = a
    return groups


def reducing_subspaces(rep: CovariantRep):
    """Every reducing subspace, as projection matrices (finite when the commutant is abelian)."""
    import itertools

    mins = minimal_projections(rep)
    for r in range(len(mins) + 1):
        for combo in itertools.combinations(mins, r):
            yield sum(combo, np.zeros((rep.dim, rep.dim), dtype=complex))


def _has_type(rep: CovariantRep, p: np.ndarray, alpha, tol: float = 1e-8) -> bool:
    """Restriction to ran p: isometric, unitary off α, pure on α."""
    from woldkit.numlin import SubspaceProjection, as_projection
    from woldkit.reps import coisometry_residual, isometry_residual, purity_predicate, restrict

    proj = as_projection(p)
    if proj.rank == 0:
        return True
    sub = restrict(rep, proj)
    for i in range(rep.k):
        if isometry_residual(sub, i) > tol:
            return False
        if i in alpha:
            if not purity_predicate(sub, i)[0]:
                return False
        elif coisometry_residual(sub, i) > tol:
            return False
    return True


def weak_oracle(rep: CovariantRep) -> dict:
    """Brute-force k = 2 weak decomposition: maximal reducing subspace of each type, H_wi the rest."""
    subs = list(reducing_subspaces(rep))
    out = {}
    for alpha in [(), (0,), (1,)]:
        good = [p for p in subs if _has_type(rep, p, alpha)]
        best = max(good, key=lambda p: np.trace(p).real)
        # the maximal one contains every other subspace of the same type
        assert all(np.abs(best @ p - p).max() < 1e-8 for p in good)
        out[alpha] = best
    out["wi"] = np.eye(rep.dim) - sum(out.values())
    return out
