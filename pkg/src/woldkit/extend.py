"""Unitary extensions of isometric representations of a single correspondence.

Finite-dimensional representations of A are classified by multiplicity
vectors, so the condition φ ⊗_{π'} id ≈ π ⊕ π' becomes M m' = m + m' over
the extended naturals ℕ ∪ {∞}, where M is the induction matrix of E.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.optimize
import sympy

from .corr import Correspondence, tensor_space
from .cstar import (INF, AlgebraRep, MultiplicityVector, canonical_basis, multiplicity_vector,
                    rep_from_multiplicities)
from .numlin import (DEFAULT_POLICY, TolerancePolicy, numerical_rank, opnorm, range_basis,
                     SubspaceProjection)
from .prodsys import ProductSystem
from .reps import CovariantRep

DEFAULT_BOUND = 10 ** 4


class ExtensionError(ValueError):
    pass


@dataclass(frozen=True)
class InductionMatrix:
    """M[i, j] = multiplicity of π_i in φ ⊗_{π_j} id."""

    matrix: np.ndarray
    correspondence: Optional[Correspondence] = None

    def apply(self, m) -> MultiplicityVector:
        return MultiplicityVector(tuple(ext_dot(row, m) for row in self.matrix))

    def to_json(self) -> list:
        return [[int(x) for x in row] for row in self.matrix]


def ext_mul(a: int, x) -> float | int:
    """Extended-natural product with 0·∞ = 0."""
    if a == 0 or x == 0:
        return 0
    return INF if x == INF else a * x


def ext_dot(row, m):
    total = 0
    for a, x in zip(row, m):
        p = ext_mul(int(a), x)
        total = INF if (total == INF or p == INF) else total + p
    return total


def ext_add(a, b):
    return INF if (a == INF or b == INF) else a + b


def multiplicity_matrix(E: Correspondence, pol: TolerancePolicy = DEFAULT_POLICY) -> InductionMatrix:
    """Read M off the dimensions of φ(z_i) E z_j on the quotient of E."""
    alg = E.algebra
    s = alg.num_blocks
    v = E.quotient_basis(pol)
    M = np.zeros((s, s), dtype=int)
    for i in range(s):
        for j in range(s):
            x = E.phi(alg.central(i)) @ E.ract(alg.central(j))
            r = numerical_rank(v.conj().T @ x @ v, pol) if v.shape[1] else 0
            q, rem = divmod(r, alg.block_dims[i] * alg.block_dims[j])
            if rem:
                raise ExtensionError(
                    f"dim φ(z_{i + 1}) E z_{j + 1} = {r} is not divisible by "
                    f"{alg.block_dims[i] * alg.block_dims[j]}; invalid correspondence data")
            M[i, j] = q
    return InductionMatrix(M, E)


def _as_matrix(M) -> np.ndarray:
    if isinstance(M, InductionMatrix):
        return np.asarray(M.matrix, dtype=int)
    return np.asarray(M, dtype=int)


def unit2_check(M, m):
    """(m ≤ M m entrywise, violating coordinates)."""
    M = _as_matrix(M)
    m = [int(x) for x in m]
    mm = M.dot(np.array(m, dtype=int))
    bad = [i for i in range(len(m)) if m[i] > mm[i]]
    return not bad, bad


def unit1_applies(M) -> bool:
    """φ is injective iff no row of M vanishes."""
    M = _as_matrix(M)
    return bool(np.all(M.sum(axis=1) > 0))


@dataclass(frozen=True)
class ExtensionCertificate:
    status: str  # "feasible" | "infeasible" | "unknown"
    m: MultiplicityVector
    m_prime: Optional[MultiplicityVector]
    bound: int
    obstruction: Optional[str] = None
    notes: tuple = ()
    witness: Optional[np.ndarray] = field(default=None, compare=False)

    @property
    def feasible(self) -> bool:
        return self.status == "feasible"

    def as_dict(self) -> dict:
        return {
            "status": self.status,
            "feasible": self.feasible,
            "m": self.m.to_json(),
            "m_prime": None if self.m_prime is None else self.m_prime.to_json(),
            "bound": self.bound,
            "obstruction": self.obstruction,
            "notes": list(self.notes),
        }


def _admissible(M: np.ndarray, S: tuple) -> bool:
    s = M.shape[0]
    Sset = set(S)
    for i in S:
        if not any(M[i, j] > 0 for j in S):
            return False
    for i in range(s):
        if i in Sset:
            continue
        if any(M[i, j] > 0 for j in S):
            return False
    return True


def _solve_finite(A: np.ndarray, b: np.ndarray, bound: int):
    """Nonnegative integer x with A x = b: ("feasible", x) | ("infeasible", why) | ("unknown", why)."""
    n = A.shape[1]
    if n == 0:
        return ("feasible", []) if not np.any(b) else ("infeasible", "inconsistent equations")
    As = sympy.Matrix(A.tolist())
    bs = sympy.Matrix(b.tolist())
    if As.shape[0] == As.shape[1] and As.det() != 0:
        x = As.LUsolve(bs)
        if all(v.is_integer and v >= 0 for v in x):
            return "feasible", [int(v) for v in x]
        return "infeasible", f"unique rational solution {list(x)} is not a nonnegative integer vector"
    res = scipy.optimize.milp(
        c=np.ones(n),
        constraints=scipy.optimize.LinearConstraint(A.astype(float), b.astype(float), b.astype(float)),
        integrality=np.ones(n),
        bounds=scipy.optimize.Bounds(np.zeros(n), np.full(n, float(bound))),
    )
    if res.status == 0 and res.x is not None:
        x = [int(round(v)) for v in res.x]
        if np.array_equal(A.dot(np.array(x)), b):
            return "feasible", x
    relax = scipy.optimize.linprog(np.zeros(n), A_eq=A.astype(float), b_eq=b.astype(float),
                                   bounds=[(0, None)] * n, method="highs")
    if relax.status == 2:
        return "infeasible", "no nonnegative real solution"
    return "unknown", f"no integer solution with entries ≤ {bound}"


def eqrep_solve(M, m, bound: int = DEFAULT_BOUND) -> ExtensionCertificate:
    """Search m' ∈ (ℕ ∪ {∞})^s with M m' = m + m'.

    Infinite supports S are enumerated by size, then lexicographically, so
    finite solutions are preferred.  On the complement F the equation reads
    (M_FF − I) x = m_F.
    """
    M = _as_matrix(M)
    mv = MultiplicityVector(tuple(m))
    if not mv.is_finite:
        raise ExtensionError("m must be finite")
    m = np.array([int(x) for x in mv], dtype=int)
    s = M.shape[0]
    unknown_notes = []
    for size in range(s + 1):
        for S in itertools.combinations(range(s), size):
            if not _admissible(M, S):
                continue
            F = [i for i in range(s) if i not in S]
            A = M[np.ix_(F, F)] - np.eye(len(F), dtype=int)
            status, x = _solve_finite(A, m[F], bound)
            if status == "feasible":
                mp = [INF] * s
                for i, v in zip(F, x):
                    mp[i] = v
                mp = MultiplicityVector(tuple(mp))
                lhs = [ext_dot(row, mp) for row in M]
                rhs = [ext_add(a, b) for a, b in zip(m, mp)]
                assert lhs == rhs, (lhs, rhs)
                return ExtensionCertificate("feasible", mv, mp, bound)
            if status == "unknown":
                unknown_notes.append(f"support {[i + 1 for i in S]}: {x}")
    if unit1_applies(M):
        raise AssertionError("faithful left action but no solution found")
    if unknown_notes:
        return ExtensionCertificate("unknown", mv, None, bound, None, tuple(unknown_notes))
    zero_rows = [i for i in range(s) if not M[i].any() and m[i] > 0]
    if zero_rows:
        i = zero_rows[0]
        why = f"zero induction row {i + 1} with m_{i + 1}={m[i]}"
    else:
        why = "no admissible infinite support admits a nonnegative integer solution"
    return ExtensionCertificate("infeasible", mv, None, bound, why)


def morita_hat(M, rho) -> MultiplicityVector:
    """Minimal-support m̂ with ρ ≤ M m̂ entrywise."""
    M = _as_matrix(M)
    rho = [int(x) for x in rho]
    s = M.shape[0]
    need = [i for i in range(s) if rho[i] > 0]
    bad = [i + 1 for i in need if not M[i].any()]
    if bad:
        raise ExtensionError(f"rows {bad} of the induction matrix vanish; ρ cannot be covered")
    if not need:
        return MultiplicityVector((0,) * s)
    support = None
    for size in range(1, s + 1):
        for J in itertools.combinations(range(s), size):
            if all(any(M[i, j] > 0 for j in J) for i in need):
                support = J
                break
        if support is not None:
            break
    hat = np.zeros(s, dtype=int)
    hat[list(support)] = max(rho)
    for j in support:
        while hat[j] > 1:
            trial = hat.copy()
            trial[j] -= 1
            if np.all(M.dot(trial) >= rho):
                hat = trial
            else:
                break
    return MultiplicityVector(tuple(int(x) for x in hat))


# --- concrete extensions ------------------------------------------------------

@dataclass(eq=False)
class Extension:
    rep: CovariantRep
    embedding: np.ndarray  # isometry H → H ⊕ K'
    m_prime: MultiplicityVector
    intertwiners: list
    residuals: dict
    notes: tuple = ()


def _intertwiner_into(E: Correspondence, src_rep: AlgebraRep, target: AlgebraRep, pol) -> tuple:
    """(embed of E ⊗ K_src, unitary U: E ⊗ K_src → target space intertwining φ⊗id and target)."""
    ts = tensor_space(E, src_rep, pol)
    ms = multiplicity_vector(ts.rep, pol)
    mt = multiplicity_vector(target, pol)
    if ms != mt:
        raise ExtensionError(f"multiplicities differ: {ms} vs {mt}")
    u = canonical_basis(target, pol) @ canonical_basis(ts.rep, pol).conj().T
    return ts, u


def _backward_chain(M: np.ndarray, m: np.ndarray, depth: int, bound: int):
    chain = []
    prev = m
    for _ in range(depth):
        status, x = _solve_finite(M, prev, bound)
        if status != "feasible":
            return None
        x = np.array(x, dtype=int)
        chain.append(x)
        prev = x
    return chain


def build_extension(ps: ProductSystem, pi: AlgebraRep, N: int,
                    m_prime: MultiplicityVector | None = None,
                    bound: int = DEFAULT_BOUND) -> Extension:
    """Unitary extension of the induced representation of π on the level-N window.

    Finite m' gives K' = rep_from_multiplicities(m') and a unitary
    Ṽ': E ⊗ K' → K ⊕ K'.  An infinite m' is realised on a window by a
    backward chain K'_1, …, K'_N with E ⊗ K'_l ≅ K'_{l-1} (K'_0 = K), when
    such a chain of finite multiplicities exists.
    """
    from .fock import induce

    if ps.k != 1:
        raise ExtensionError("unitary extensions are only constructed for a single correspondence")
    pol = ps.pol
    E = ps.correspondences[0]
    Mobj = multiplicity_matrix(E, pol)
    M = Mobj.matrix
    m = np.array(list(multiplicity_vector(pi, pol)), dtype=int)
    if m_prime is None:
        cert = eqrep_solve(M, m, bound)
        if not cert.feasible:
            raise ExtensionError(f"no unitary extension: {cert.status} ({cert.obstruction})")
        m_prime = cert.m_prime
    m_prime = MultiplicityVector(tuple(m_prime))
    base = induce(ps, pi, N)
    dH = base.dim
    d = E.dim
    alg = ps.algebra
    notes = []
    if m_prime.is_finite:
        mp = np.array(list(m_prime), dtype=int)
        if not np.array_equal(M.dot(mp), m + mp):
            raise ExtensionError(f"m' = {m_prime} does not solve M m' = m + m'")
        levels = [mp]
    else:
        chain = _backward_chain(M, m, N, bound)
        if chain is None:
            raise ExtensionError(
                f"m' = {m_prime} is infinite and no finite backward chain exists; "
                "only the symbolic certificate is available")
        levels = chain
        notes.append(f"infinite m' realised by a backward chain of depth {N}")
    reps = [rep_from_multiplicities(alg, x) for x in levels]
    dims = [r.space_dim for r in reps]
    total = dH + sum(dims)
    offs = np.cumsum([dH] + dims)[:-1].tolist()
    imgs = np.zeros((alg.dim, total, total), dtype=complex)
    imgs[:, :dH, :dH] = base.sigma.images
    for r, o in zip(reps, offs):
        imgs[:, o:o + r.space_dim, o:o + r.space_dim] = r.images
    sigma = AlgebraRep(alg, total, imgs)
    t = np.zeros((total, d * total), dtype=complex)
    for p in range(d):
        t[:dH, p * total:p * total + dH] = base.tmaps[0][:, p * dH:(p + 1) * dH]
    dK = pi.space_dim
    level0 = base.fock.block(tuple([0]))
    if level0.stop - level0.start != dK:
        raise ExtensionError("level 0 of the window does not match K")
    intertwiners = []
    grading_ext = list(base.window["grading"])
    interior = list(np.diag(base.interior).real > 0.5)
    if m_prime.is_finite:
        # Ṽ': E ⊗ K' → K ⊕ K'
        tgt = rep_from_multiplicities(alg, m).direct_sum(reps[0])
        tgt = AlgebraRep(alg, dK + dims[0],
                         np.concatenate([np.concatenate([pi.images, np.zeros((alg.dim, dK, dims[0]))], 2),
                                         np.concatenate([np.zeros((alg.dim, dims[0], dK)), reps[0].images], 2)],
                                        1))
        ts, u = _intertwiner_into(E, reps[0], tgt, pol)
        intertwiners.append(u)
        piece = u @ ts.embed
        rows = list(range(level0.start, level0.stop)) + list(range(offs[0], offs[0] + dims[0]))
        for p in range(d):
            t[np.ix_(rows, range(p * total + offs[0], p * total + offs[0] + dims[0]))] = \
                piece[:, p * dims[0]:(p + 1) * dims[0]]
        grading_ext += [0] * dims[0]
        interior += [True] * dims[0]
    else:
        prev_rows = list(range(level0.start, level0.stop))
        prev_rep = pi
        for l, (r, o) in enumerate(zip(reps, offs)):
            ts, u = _intertwiner_into(E, r, prev_rep, pol)
            intertwiners.append(u)
            piece = u @ ts.embed
            for p in range(d):
                t[np.ix_(prev_rows, range(p * total + o, p * total + o + r.space_dim))] = \
                    piece[:, p * r.space_dim:(p + 1) * r.space_dim]
            prev_rows = list(range(o, o + r.space_dim))
            prev_rep = r
            grading_ext += [-(l + 1)] * r.space_dim
            interior += [l + 1 < N] * r.space_dim
    interior_m = np.diag(np.array(interior, dtype=float)).astype(complex)
    window = {"levels": int(N), "grading": grading_ext, "extension": True}
    rep = CovariantRep(ps, sigma, (t,), interior_m, window, pol)
    emb = np.zeros((total, dH), dtype=complex)
    emb[:dH, :dH] = np.eye(dH)
    from .reps import coisometry_residual, isometry_residual

    res = {
        "isometry": isometry_residual(rep, 0),
        "coisometry": coisometry_residual(rep, 0),
        "restriction T": opnorm(t[:dH, :][:, [p * total + h for p in range(d) for h in range(dH)]]
                                - base.tmaps[0]),
        "restriction σ": max((opnorm(sigma.images[c][:dH, :dH] - base.sigma.images[c])
                              for c in range(alg.dim)), default=0.0),
        "H invariant": opnorm(t[dH:, :][:, [p * total + h for p in range(d) for h in range(dH)]]),
    }
    return Extension(rep, emb, m_prime, intertwiners, res, tuple(notes))


def minimal_extension(rep: CovariantRep, embed: np.ndarray) -> SubspaceProjection:
    """Smallest subspace containing ran(embed) invariant under σ, all V(ξ) and V(ξ)*."""
    pol = rep.pol
    n = rep.dim
    ops = list(rep.sigma.images)
    for i, t in enumerate(rep.tmaps):
        d = rep.system.correspondences[i].dim
        for p in range(d):
            v = t[:, p * n:(p + 1) * n]
            ops.append(v)
            ops.append(v.conj().T)
    basis = range_basis(embed, pol) if embed.size else np.zeros((n, 0), dtype=complex)
    while True:
        if basis.shape[1] == 0:
            return SubspaceProjection.zero(n, pol.abs_tol)
        new = range_basis(np.hstack([basis] + [op @ basis for op in ops]), pol)
        if new.shape[1] == basis.shape[1]:
            return SubspaceProjection.from_basis(basis, pol.abs_tol)
        basis = new
