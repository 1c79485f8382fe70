"""Wold-type decompositions of isometric representations of product systems.

Notation: P_l^i = L_i^l(I) is the projection onto the range of T̃^{(i)}_l,
P_∞^i its limit, P(n) = L(n)(I) and Q(n) = Π_i (P_{n_i}^i − P_{n_i+1}^i).
Subsets α ⊆ {0..k-1} are tuples of 0-based directions; in reports they are
printed 1-based as "{1,3}".
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .cstar import AlgebraRep
from .numlin import (NumericalError, SubspaceProjection, TolerancePolicy, as_projection, join, meet,
                     opnorm, range_basis, stabilized_limit)
from .prodsys import ProductSystem, canonical_word
from .reps import (CovariantRep, CovariantRepError, L_endo, L_n, WordSpaces, classify,
                   coisometry_residual, is_reducing, isometry_residual, restrict)


class WoldError(ValueError):
    pass


def alpha_label(alpha) -> str:
    return "{" + ",".join(str(a + 1) for a in sorted(alpha)) + "}"


def subsets(k: int) -> list:
    """All α ⊆ {0..k-1}, by size then lexicographically."""
    return [a for r in range(k + 1) for a in itertools.combinations(range(k), r)]


def _tol(rep: CovariantRep) -> float:
    return rep.pol.abs_tol * 10


def _proj(rep: CovariantRep, m: np.ndarray) -> SubspaceProjection:
    return as_projection(m, rep.pol)


def _identity(rep: CovariantRep) -> SubspaceProjection:
    return SubspaceProjection.identity(rep.dim, rep.pol.abs_tol)


def _require_isometric(rep: CovariantRep) -> None:
    for i in range(rep.k):
        r = isometry_residual(rep, i)
        if r > _tol(rep):
            raise WoldError(f"T({i + 1}) is not isometric (residual {r:.3e})")


def _require_dc(rep: CovariantRep) -> None:
    c = classify(rep)
    bad = [f"({i + 1},{j + 1})" for (i, j), ok in sorted(c.doubly_commuting_pairs.items()) if not ok]
    if bad:
        raise WoldError(f"representation is not doubly commuting for pairs {', '.join(bad)}")


def subsystem(ps: ProductSystem, dirs) -> ProductSystem:
    """The product system over ℕ₀^r given by E_{dirs[0]}, …, E_{dirs[r-1]}."""
    dirs = tuple(sorted(dirs))
    flips = {(a, b): ps.flips[(dirs[a], dirs[b])] for a in range(len(dirs)) for b in range(a)}
    return ProductSystem([ps.correspondences[d] for d in dirs], flips, ps.pol)


def subrep(rep: CovariantRep, dirs) -> CovariantRep:
    dirs = tuple(sorted(dirs))
    return CovariantRep(subsystem(rep.system, dirs), rep.sigma, tuple(rep.tmaps[d] for d in dirs),
                        rep.interior, rep.window, rep.pol)


# --- the P lattice --------------------------------------------------------------

def p_l(rep: CovariantRep, i: int, l: int) -> SubspaceProjection:
    x = np.eye(rep.dim, dtype=complex)
    for _ in range(l):
        x = L_endo(rep, i, x, check=False)
    return _proj(rep, x)


def p_infty_i(rep: CovariantRep, i: int) -> SubspaceProjection:
    """P_∞^i, the limit of the decreasing sequence P_l^i."""
    _require_isometric(rep)
    return stabilized_limit(lambda p: L_endo(rep, i, p.matrix, check=False), _identity(rep), rep.pol)


def _composite(rep: CovariantRep, dirs):
    n = tuple(1 if i in dirs else 0 for i in range(rep.k))
    return lambda p: L_n(rep, n, p.matrix, check=False)


def p_infty(rep: CovariantRep) -> SubspaceProjection:
    """P_∞ = lim (L_1 ∘ ⋯ ∘ L_k)^l (I)."""
    _require_isometric(rep)
    return stabilized_limit(_composite(rep, range(rep.k)), _identity(rep), rep.pol)


@dataclass(frozen=True, eq=False)
class PInfty:
    projection: SubspaceProjection
    per_direction: tuple
    meet: SubspaceProjection
    gap: float

    def as_dict(self) -> dict:
        return {"rank": self.projection.rank, "meet_rank": self.meet.rank,
                "per_direction_ranks": [p.rank for p in self.per_direction], "gap": self.gap}


def p_infty_report(rep: CovariantRep) -> PInfty:
    """P_∞ together with ⋀_i P_∞^i and the gap ‖⋀_i P_∞^i − P_∞‖."""
    p = p_infty(rep)
    per = tuple(p_infty_i(rep, i) for i in range(rep.k))
    m = per[0] if per else _identity(rep)
    for q in per[1:]:
        m = meet(m, q, rep.pol)
    return PInfty(p, per, m, opnorm(m.matrix - p.matrix))


def max_fully_coisometric(rep: CovariantRep) -> SubspaceProjection:
    """Projection onto the maximal fully coisometric summand, P_∞."""
    return p_infty(rep)


def lattice_P(rep: CovariantRep, n, check: bool = True) -> SubspaceProjection:
    """P(n) = L(n)(I) for a doubly commuting isometric representation."""
    if check:
        _require_isometric(rep)
        _require_dc(rep)
    return _proj(rep, L_n(rep, n, np.eye(rep.dim, dtype=complex), check=False))


def lattice_residual(rep: CovariantRep, m, n) -> float:
    """‖P(m) P(n) − P(m ∨ n)‖."""
    j = tuple(max(a, b) for a, b in zip(m, n))
    pm, pn, pj = (lattice_P(rep, x, check=False).matrix for x in (m, n, j))
    return opnorm(pm @ pn - pj)


# --- induced representations -----------------------------------------------------

@dataclass(eq=False)
class InducedCertificate:
    """Evidence that a representation is (or is not) an induced one.

    ``unitary`` maps ⊕_n W(canon n, σ_0) onto H, with blocks ordered as in
    ``support``; on failure ``failure`` names the offending direction.
    """

    success: bool
    failure: Optional[str] = None
    q0: Optional[SubspaceProjection] = None
    sigma0: Optional[AlgebraRep] = None
    unitary: Optional[np.ndarray] = None
    support: tuple = ()
    block_dims: tuple = ()
    residuals: dict = field(default_factory=dict)
    tol: float = 0.0
    p_infty_ranks: tuple = ()
    window: Optional[dict] = None

    @property
    def passed(self) -> bool:
        return self.success and all(v <= self.tol for v in self.residuals.values())

    def as_dict(self) -> dict:
        return {
            "success": self.success,
            "passed": self.passed,
            "failure": self.failure,
            "wandering_dim": None if self.q0 is None else self.q0.rank,
            "support": [list(n) for n in self.support],
            "block_dims": list(self.block_dims),
            "residuals": {k: float(v) for k, v in self.residuals.items()},
            "tol": self.tol,
            "p_infty_ranks": list(self.p_infty_ranks),
        }


def _level_bound(rep: CovariantRep) -> Optional[int]:
    if rep.window and "levels" in rep.window and not rep.window.get("extension"):
        return int(rep.window["levels"])
    return None


def induced_certificate(rep: CovariantRep) -> InducedCertificate:
    """Decide whether a doubly commuting isometric representation is induced.

    It is iff every P_∞^i vanishes.  The wandering space is ran Q(0) with
    Q(0) = Π_i (I − P_1^i), and U(⊕ h_n) = Σ_n T̃(n) h_n on
    ⊕_n 𝔼(n) ⊗_{σ_0} ran Q(0).
    """
    _require_isometric(rep)
    _require_dc(rep)
    tol = _tol(rep)
    n_dim = rep.dim
    pinf = [p_infty_i(rep, i) for i in range(rep.k)]
    ranks = tuple(p.rank for p in pinf)
    for i, p in enumerate(pinf):
        if p.rank:
            return InducedCertificate(False, f"P_∞^{i + 1} ≠ 0 (rank {p.rank})", tol=tol,
                                      p_infty_ranks=ranks, window=rep.window)
    eye = np.eye(n_dim, dtype=complex)
    p1 = [L_endo(rep, i, eye, check=False) for i in range(rep.k)]
    q = eye
    for p in p1:
        q = q @ (eye - p)
    q0 = _proj(rep, q)
    w0 = q0.basis
    sigma0 = rep.sigma.compress(w0)
    sp = WordSpaces(rep.system, sigma0, rep.pol)
    N = _level_bound(rep)
    # support of the Fock module over σ_0
    support = [tuple([0] * rep.k)] if sp.dim(()) else []
    seen = set(support)
    queue = list(support)
    total = sp.dim(()) if support else 0
    while queue:
        n = queue.pop(0)
        for i in range(rep.k):
            m = tuple(x + (1 if j == i else 0) for j, x in enumerate(n))
            if m in seen or (N is not None and sum(m) > N):
                continue
            seen.add(m)
            d = sp.dim(canonical_word(m))
            if d:
                support.append(m)
                queue.append(m)
                total += d
                if total > n_dim:
                    return InducedCertificate(
                        False, f"Fock module over the wandering space exceeds dim H = {n_dim}",
                        q0, sigma0, tol=tol, p_infty_ranks=ranks, window=rep.window)
    support.sort(key=lambda x: (sum(x), x))
    blocks = [sp.chain(rep.tmaps, canonical_word(n), w0) for n in support]
    dims = tuple(b.shape[1] for b in blocks)
    u = np.hstack(blocks) if blocks else np.zeros((n_dim, 0), dtype=complex)
    res = {
        "U*U − I": opnorm(u.conj().T @ u - np.eye(u.shape[1])),
        "UU* − I": opnorm(u @ u.conj().T - eye),
    }
    # σ intertwining
    alg = rep.system.algebra
    sig = 0.0
    for n, b in zip(support, blocks):
        rho = sp.space(canonical_word(n)).rep
        for c in range(alg.dim):
            sig = max(sig, opnorm(b @ rho.images[c] - rep.sigma.images[c] @ b))
    res["σ intertwining"] = sig
    # creation operators: T̃_i (I ⊗ U_n) = U_{n+e_i} ∘ (reordering)
    index = {n: b for n, b in zip(support, blocks)}
    cre = 0.0
    for n in support:
        for i in range(rep.k):
            m = tuple(x + (1 if j == i else 0) for j, x in enumerate(n))
            if N is not None and sum(m) > N:
                continue
            word = (i,) + canonical_word(n)
            lhs = sp.chain(rep.tmaps, word, w0)
            if m in index:
                rhs = index[m] @ sp.reorder(word, canonical_word(m))
                cre = max(cre, opnorm(lhs - rhs))
            else:
                cre = max(cre, opnorm(lhs))
    res["creation intertwining"] = cre
    # U_n U_n* = Q(n)
    qn = 0.0
    cache = {}

    def pl(i, l):
        if (i, l) not in cache:
            x = eye if l == 0 else L_endo(rep, i, pl(i, l - 1), check=False)
            cache[(i, l)] = x
        return cache[(i, l)]

    for n, b in zip(support, blocks):
        qm = eye
        for i, l in enumerate(n):
            qm = qm @ (pl(i, l) - pl(i, l + 1))
        qn = max(qn, opnorm(b @ b.conj().T - qm))
    res["U_n U_n* − Q(n)"] = qn
    return InducedCertificate(True, None, q0, sigma0, u, tuple(support), dims, res, tol, ranks,
                              rep.window)


# --- decomposition reports ---------------------------------------------------------

@dataclass(eq=False)
class DecompositionReport:
    mode: str
    summands: dict
    certificates: dict
    coisometry: dict
    residual_sum: float
    orthogonality: float
    p_infty_gap: float
    tol: float
    checks: dict = field(default_factory=dict)
    window: Optional[dict] = None
    notes: tuple = ()

    @property
    def passed(self) -> bool:
        ok = self.orthogonality <= self.tol
        if self.mode in ("dc", "weak"):
            ok = ok and self.residual_sum <= self.tol
        ok = ok and all(c is None or c.passed for c in self.certificates.values())
        ok = ok and all(v <= self.tol for d in self.coisometry.values() for v in d.values())
        ok = ok and all(v <= self.tol for v in self.checks.values() if isinstance(v, float))
        ok = ok and all(v for v in self.checks.values() if isinstance(v, bool))
        return ok

    def dims(self) -> dict:
        return {alpha_label(a) if isinstance(a, tuple) else a: p.rank
                for a, p in self.summands.items()}

    def as_dict(self, emit_projections: bool = False) -> dict:
        from .io import matrix_to_json

        out = {}
        for a, p in self.summands.items():
            label = alpha_label(a) if isinstance(a, tuple) else a
            cert = self.certificates.get(a)
            entry = {
                "dim": p.rank,
                "residuals": {f"coisometry T({i + 1})": float(v)
                              for i, v in sorted(self.coisometry.get(a, {}).items())},
                "certificate": None if cert is None else cert.as_dict(),
            }
            if emit_projections:
                entry["projection"] = matrix_to_json(p.matrix)
            out[label] = entry
        return {
            "mode": self.mode,
            "passed": self.passed,
            "summands": out,
            "residual_sum": float(self.residual_sum),
            "orthogonality": float(self.orthogonality),
            "p_infty_gap": float(self.p_infty_gap),
            "checks": {k: (float(v) if isinstance(v, float) else v) for k, v in self.checks.items()},
            "tol": self.tol,
            "window": self.window,
            "notes": list(self.notes),
        }


def _pairwise(projs) -> float:
    worst = 0.0
    for a, b in itertools.combinations(projs, 2):
        worst = max(worst, opnorm(a.matrix @ b.matrix))
    return worst


def _sum_residual(rep: CovariantRep, projs) -> float:
    s = sum((p.matrix for p in projs), np.zeros((rep.dim, rep.dim), dtype=complex))
    return opnorm(s - np.eye(rep.dim))


def _summand_checks(rep: CovariantRep, alpha, P: SubspaceProjection):
    """(certificate for the α-subsystem, coisometry residuals for i ∉ α, reducing residual)."""
    ok, res = is_reducing(rep, P)
    red = max(res.values(), default=0.0)
    if P.rank == 0:
        return None, {}, red
    sub = restrict(rep, P, check=False)
    beta = [i for i in range(rep.k) if i not in alpha]
    co = {i: coisometry_residual(sub, i) for i in beta}
    cert = induced_certificate(subrep(sub, alpha)) if alpha else None
    return cert, co, red


def wold_dc(rep: CovariantRep) -> DecompositionReport:
    """The decomposition H = ⊕_α H_α of a doubly commuting isometric representation.

    P_α = Π_{a∈α} (I − P_∞^a) Π_{b∉α} P_∞^b; on H_α the directions in α form
    an induced representation and the others are fully coisometric.
    """
    _require_isometric(rep)
    _require_dc(rep)
    pinf = p_infty_report(rep)
    eye = np.eye(rep.dim, dtype=complex)
    summands, certs, co, red = {}, {}, {}, 0.0
    for alpha in subsets(rep.k):
        x = eye
        for i in range(rep.k):
            pi = pinf.per_direction[i].matrix
            x = x @ ((eye - pi) if i in alpha else pi)
        P = _proj(rep, x)
        summands[alpha] = P
        certs[alpha], co[alpha], r = _summand_checks(rep, alpha, P)
        red = max(red, r)
    projs = list(summands.values())
    return DecompositionReport("dc", summands, certs, co, _sum_residual(rep, projs), _pairwise(projs),
                               pinf.gap, _tol(rep), {"reducing": red}, rep.window)


# --- general isometric representations ---------------------------------------------

def _creation_adjoints(rep: CovariantRep, dirs) -> list:
    n = rep.dim
    out = []
    for i in dirs:
        d = rep.system.correspondences[i].dim
        t = rep.tmaps[i]
        out.extend(t[:, p * n:(p + 1) * n].conj().T for p in range(d))
    return out


def k_projection(rep: CovariantRep, j: int) -> SubspaceProjection:
    """R^{(j)}, the projection onto K^{(j)} = {h : P_1^j T̃(m)(ξ ⊗ h) = 0 for all m with m_j = 0}.

    The orthogonal complement is the smallest subspace containing ran P_1^j
    and invariant under T^{(i)}(ξ)* for i ≠ j.
    """
    p1 = _proj(rep, L_endo(rep, j, np.eye(rep.dim, dtype=complex), check=False))
    ops = _creation_adjoints(rep, [i for i in range(rep.k) if i != j])
    basis = p1.basis
    while basis.shape[1]:
        new = range_basis(np.hstack([basis] + [op @ basis for op in ops]), rep.pol)
        if new.shape[1] == basis.shape[1]:
            break
        basis = new
    perp = SubspaceProjection.from_basis(basis, rep.pol.abs_tol)
    return _proj(rep, np.eye(rep.dim) - perp.matrix)


@dataclass(eq=False)
class SummandResult:
    alpha: tuple
    projection: SubspaceProjection
    pieces: dict
    r_infty: SubspaceProjection
    certificate: Optional[InducedCertificate]
    coisometry: dict
    residuals: dict
    tol: float

    @property
    def passed(self) -> bool:
        return ((self.certificate is None or self.certificate.passed)
                and all(v <= self.tol for v in self.coisometry.values())
                and all(v <= self.tol for v in self.residuals.values()))


def _offsets(k: int, skip, depth: int) -> list:
    dirs = [i for i in range(k) if i not in skip]
    out = []
    for total in range(depth + 1):
        for combo in itertools.combinations_with_replacement(dirs, total):
            m = [0] * k
            for c in combo:
                m[c] += 1
            out.append(tuple(m))
    return out


def general_summand(rep: CovariantRep, alpha, orthog_depth: int = 2) -> SummandResult:
    """H_α for an arbitrary isometric representation.

    R = ⋀_{j∈α} R^{(j)}, R_∞ = lim_{n ∈ ℕ₀^{k,β}} L(n)(R), D(m) = L(m)(R_∞)
    for m ∈ ℕ₀^{k,α}, and H_α = ⊕_m ran D(m).
    """
    _require_isometric(rep)
    alpha = tuple(sorted(alpha))
    beta = tuple(i for i in range(rep.k) if i not in alpha)
    tol = _tol(rep)
    n_dim = rep.dim
    rj = {j: k_projection(rep, j) for j in alpha}
    R = _identity(rep)
    for j in alpha:
        R = meet(R, rj[j], rep.pol)
    r_inf = stabilized_limit(_composite(rep, beta), R, rep.pol) if beta else R
    pieces = {}
    if r_inf.rank:
        queue = [tuple([0] * rep.k)]
        pieces[queue[0]] = r_inf
        total = r_inf.rank
        while queue:
            m = queue.pop(0)
            for a in alpha:
                nm = tuple(x + (1 if i == a else 0) for i, x in enumerate(m))
                if nm in pieces:
                    continue
                P = _proj(rep, L_endo(rep, a, pieces[m].matrix, check=False))
                if P.rank == 0:
                    continue
                pieces[nm] = P
                queue.append(nm)
                total += P.rank
                if total > n_dim:
                    raise NumericalError("the projections D(m) are not mutually orthogonal")
    plist = list(pieces.values())
    res = {"D(m) orthogonality": _pairwise(plist)}
    if plist:
        D = _proj(rep, sum(p.matrix for p in plist))
    else:
        D = SubspaceProjection.zero(n_dim, rep.pol.abs_tol)
    # L(m)(R^{(j)}) ≤ (P_1^j)^⊥ for small m with m_j = 0
    eye = np.eye(n_dim, dtype=complex)
    orth = 0.0
    for j in alpha:
        p1 = L_endo(rep, j, eye, check=False)
        for m in _offsets(rep.k, (j,), orthog_depth):
            orth = max(orth, opnorm(p1 @ L_n(rep, m, rj[j].matrix, check=False)))
    res["L(m)(R^(j)) ≤ (P_1^j)^⊥"] = orth
    cert, co, red = _summand_checks(rep, alpha, D)
    res["reducing"] = red
    return SummandResult(alpha, D, pieces, r_inf, cert, co, res, tol)


def general_decompose(rep: CovariantRep, alphas=None) -> DecompositionReport:
    alphas = subsets(rep.k) if alphas is None else [tuple(sorted(a)) for a in alphas]
    results = {a: general_summand(rep, a) for a in alphas}
    projs = [r.projection for r in results.values()]
    checks = {f"{alpha_label(a)} {k}": v for a, r in results.items() for k, v in r.residuals.items()}
    pinf = p_infty_report(rep)
    return DecompositionReport(
        "general", {a: r.projection for a, r in results.items()},
        {a: r.certificate for a, r in results.items()},
        {a: r.coisometry for a, r in results.items()},
        _sum_residual(rep, projs), _pairwise(projs), pinf.gap, _tol(rep), checks, rep.window)


def max_doubly_commuting(rep: CovariantRep) -> SubspaceProjection:
    """H_dc = ⊕_α H_α, the maximal reducing subspace with a doubly commuting summand."""
    _require_isometric(rep)
    projs = [general_summand(rep, a).projection for a in subsets(rep.k)]
    if _pairwise(projs) > _tol(rep):
        raise NumericalError("the summands H_α are not mutually orthogonal")
    return join(projs, rep.dim, rep.pol)


def weak_predicate(rep: CovariantRep) -> dict:
    """For each nonempty γ: whether (σ, ⊗_{c∈γ} T^{(c)}) restricted to ⋀_{c∉γ} K^{(c)} is induced.

    A single isometric representation is induced iff its P_∞ vanishes; on
    the restriction to the T^{(γ)}-invariant space K this is the limit of
    L(e_γ)^l(P_K).
    """
    out = {}
    if rep.dim == 0:
        return {alpha_label(g): True for g in subsets(rep.k) if g}
    kp = {c: k_projection(rep, c) for c in range(rep.k)}
    for gamma in subsets(rep.k):
        if not gamma:
            continue
        K = _identity(rep)
        for c in range(rep.k):
            if c not in gamma:
                K = meet(K, kp[c], rep.pol)
        lim = stabilized_limit(_composite(rep, gamma), K, rep.pol)
        out[alpha_label(gamma)] = lim.rank == 0
    return out


def weakly_induced_decompose(rep: CovariantRep) -> DecompositionReport:
    """H = ⊕_{α ≠ full} H_α ⊕ H_wi with H_wi weakly induced (k = 2 or 3)."""
    if rep.k not in (2, 3):
        raise WoldError("the weakly induced decomposition is implemented for k = 2 and k = 3")
    _require_isometric(rep)
    full = tuple(range(rep.k))
    results = {a: general_summand(rep, a) for a in subsets(rep.k) if a != full}
    projs = [r.projection for r in results.values()]
    rest = join(projs, rep.dim, rep.pol)
    wi = rest.complement()
    summands = {a: r.projection for a, r in results.items()}
    summands["wi"] = wi
    checks = {f"{alpha_label(a)} {k}": v for a, r in results.items() for k, v in r.residuals.items()}
    ok, red = is_reducing(rep, wi)
    checks["wi reducing"] = max(red.values(), default=0.0)
    if wi.rank:
        sub = restrict(rep, wi, check=False)
        for g, flag in weak_predicate(sub).items():
            checks[f"wi induced {g}"] = bool(flag)
    certs = {a: r.certificate for a, r in results.items()}
    certs["wi"] = None
    co = {a: r.coisometry for a, r in results.items()}
    pinf = p_infty_report(rep)
    allp = list(summands.values())
    return DecompositionReport("weak", summands, certs, co, _sum_residual(rep, allp), _pairwise(allp),
                               pinf.gap, _tol(rep), checks, rep.window)
