"""Covariant representations of product systems and their basic predicates.

A representation is given by σ on H = C^{dim H} and, for every direction i,
the matrix ``T_alg[i]`` of T̃^{(i)} on the algebraic coordinates
C^{d_i} ⊗ C^{dim H} of E_i ⊗ H.  Everything downstream works on Hilbert
coordinates of the word spaces

    W((), σ) = H,    W((a,) + w, σ) = E_a ⊗ W(w, σ),

built by :class:`WordSpaces`, so a word space W(w) is the Hilbert space
E_{w_1} ⊗ ⋯ ⊗ E_{w_l} ⊗_σ H.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .corr import TensorSpace, tensor_space
from .cstar import AlgebraRep, ValidationReport, validate_rep
from .numlin import (DEFAULT_POLICY, NumericalError, SubspaceProjection, TolerancePolicy,
                     as_projection, check_finite, kron_eye_left, left_kron_eye, opnorm,
                     orthonormal_eigh)
from .prodsys import ProductSystem, ProductSystemError, canonical_word


class CovariantRepError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class WordSpace:
    """Hilbert coordinates of W(w); ``embed``/``lift`` relate them to C^{d_{w_1}} ⊗ W(w[1:])."""

    word: tuple
    dim: int
    embed: np.ndarray
    lift: np.ndarray
    rep: AlgebraRep


class WordSpaces:
    """Memoised word spaces over a fixed base representation σ on H."""

    def __init__(self, system: ProductSystem, sigma: AlgebraRep, pol: TolerancePolicy = DEFAULT_POLICY):
        if sigma.algebra != system.algebra:
            raise CovariantRepError("representation and product system live over different algebras")
        self.system = system
        self.sigma = sigma
        self.pol = pol
        self._spaces = {}
        self._ops = {}
        self._lock = threading.Lock()

    def _memo(self, store, key, make):
        with self._lock:
            if key in store:
                return store[key]
        value = make()
        with self._lock:
            return store.setdefault(key, value)

    def space(self, word) -> WordSpace:
        word = tuple(int(a) for a in word)

        def make():
            if not word:
                n = self.sigma.space_dim
                eye = np.eye(n, dtype=complex)
                return WordSpace((), n, eye, eye, self.sigma)
            tail = self.space(word[1:])
            ts: TensorSpace = tensor_space(self.system.correspondences[word[0]], tail.rep, self.pol)
            return WordSpace(word, ts.hilbert_dim, ts.embed, ts.lift, ts.rep)

        return self._memo(self._spaces, word, make)

    def dim(self, word) -> int:
        return self.space(word).dim

    def tail_op(self, head: int, src_tail, dst_tail, x: np.ndarray) -> np.ndarray:
        """I_{E_head} ⊗ x as a map W((head,)+src_tail) → W((head,)+dst_tail)."""
        src = self.space((head,) + tuple(src_tail))
        dst = self.space((head,) + tuple(dst_tail))
        d = self.system.correspondences[head].dim
        return dst.embed @ kron_eye_left(d, x, src.lift)

    def flip(self, word, pos: int) -> np.ndarray:
        """Unitary W(word) → W(word with letters pos, pos+1 swapped) induced by t."""
        word = tuple(word)

        def make():
            a, b = word[pos], word[pos + 1]
            if a == b:
                raise ProductSystemError("adjacent letters are equal; no flip applies")
            swapped = word[:pos] + (b, a) + word[pos + 2:]
            if pos > 0:
                return self.tail_op(word[0], word[1:], swapped[1:], self.flip(word[1:], pos - 1))
            if a < b:
                return self.flip(swapped, 0).conj().T
            tail = word[2:]
            da = self.system.correspondences[a].dim
            db = self.system.correspondences[b].dim
            src = self.space(word)
            dst = self.space(swapped)
            inner_src = self.space((b,) + tail)
            inner_dst = self.space((a,) + tail)
            nt = self.dim(tail)
            # lift to C^{d_a} ⊗ C^{d_b} ⊗ W(tail), apply t ⊗ I, embed back
            x = kron_eye_left(da, inner_src.lift, src.lift)
            t = self.system.flips[(a, b)]
            y = np.einsum("ij,jnc->inc", t, x.reshape(da * db, nt, -1)).reshape(db * da * nt, -1)
            z = kron_eye_left(db, inner_dst.embed, y)
            return dst.embed @ z

        return self._memo(self._ops, ("flip", word, pos), make)

    def reorder(self, source, target, schedule: str = "bubble") -> np.ndarray:
        """Unitary W(source) → W(target) built from adjacent flips."""
        source, target = tuple(source), tuple(target)
        if sorted(source) != sorted(target):
            raise ProductSystemError(f"{target} is not a permutation of {source}")

        def make():
            slots = {}
            for pos, letter in enumerate(target):
                slots.setdefault(letter, []).append(pos)
            seen = {}
            perm = []
            for letter in source:
                c = seen.get(letter, 0)
                perm.append(slots[letter][c])
                seen[letter] = c + 1
            word = list(source)
            out = np.eye(self.dim(source), dtype=complex)
            n = len(word)
            changed = True
            while changed:
                changed = False
                rng = range(n - 1) if schedule == "bubble" else range(n - 2, -1, -1)
                for pos in rng:
                    if perm[pos] > perm[pos + 1]:
                        out = self.flip(tuple(word), pos) @ out
                        word[pos], word[pos + 1] = word[pos + 1], word[pos]
                        perm[pos], perm[pos + 1] = perm[pos + 1], perm[pos]
                        changed = True
            return out

        return self._memo(self._ops, ("reorder", source, target, schedule), make)

    def chain(self, tmaps, word, base: np.ndarray) -> np.ndarray:
        """T̃(word)(I ⊗ base): W(word) → H for base: H_0 → H, word spaces over σ_0.

        ``tmaps`` are the algebraic T̃^{(i)} on H.  ``base`` is the identity
        when the word spaces are built over σ itself.
        """
        word = tuple(word)

        def make():
            if not word:
                return np.asarray(base, dtype=complex)
            inner = self.chain(tmaps, word[1:], base)
            d = self.system.correspondences[word[0]].dim
            return left_kron_eye(tmaps[word[0]], d, inner) @ self.space(word).lift

        key = ("chain", word, id(tmaps), id(base))
        with self._lock:
            # keep the keyed objects alive so their ids stay unique
            self._ops.setdefault(("alive", id(tmaps), id(base)), (tmaps, base))
        return self._memo(self._ops, key, make)


@dataclass(eq=False)
class CovariantRep:
    """(σ, T^{(1)}, …, T^{(k)}) on H, with T̃^{(i)} given on algebraic coordinates.

    ``interior`` optionally holds the projection onto the part of a level
    window whose images stay inside the window; isometry and double
    commutation are then checked only on E ⊗ interior.  ``window`` carries
    the window metadata for reports.
    """

    system: ProductSystem
    sigma: AlgebraRep
    tmaps: tuple
    interior: Optional[np.ndarray] = None
    window: Optional[dict] = None
    pol: TolerancePolicy = DEFAULT_POLICY
    _spaces: Optional[WordSpaces] = field(default=None, init=False, repr=False)
    _eye: Optional[np.ndarray] = field(default=None, init=False, repr=False)

    def __post_init__(self):
        ps = self.system
        if self.sigma.algebra != ps.algebra:
            raise CovariantRepError("σ and the product system live over different algebras")
        if len(self.tmaps) != ps.k:
            raise CovariantRepError(f"expected {ps.k} maps T̃, got {len(self.tmaps)}")
        n = self.sigma.space_dim
        maps = []
        for i, t in enumerate(self.tmaps):
            t = check_finite(t, f"T({i + 1})")
            shape = (n, ps.correspondences[i].dim * n)
            if t.shape != shape:
                raise CovariantRepError(f"T({i + 1}) has shape {t.shape}, expected {shape}")
            maps.append(t)
        self.tmaps = tuple(maps)
        if self.interior is not None:
            self.interior = check_finite(self.interior, "interior projection")

    @property
    def dim(self) -> int:
        return self.sigma.space_dim

    @property
    def k(self) -> int:
        return self.system.k

    @property
    def spaces(self) -> WordSpaces:
        if self._spaces is None:
            self._spaces = WordSpaces(self.system, self.sigma, self.pol)
        return self._spaces

    def tilde(self, i: int) -> np.ndarray:
        """T̃^{(i)} on Hilbert coordinates of W((i,))."""
        return self.tilde_word((i,))

    def tilde_word(self, word) -> np.ndarray:
        if self._eye is None:
            self._eye = np.eye(self.dim, dtype=complex)
        return self.spaces.chain(self.tmaps, tuple(word), self._eye)

    def eye_tensor(self, i: int, x: np.ndarray) -> np.ndarray:
        """I_{E_i} ⊗ x on W((i,)), x in σ(A)'."""
        return self.spaces.tail_op(i, (), (), x)

    def interior_matrix(self) -> np.ndarray:
        return np.eye(self.dim) if self.interior is None else self.interior

    def conjugate(self, u: np.ndarray) -> "CovariantRep":
        """The representation transported by a unitary u: H → H'."""
        maps = []
        for i, t in enumerate(self.tmaps):
            d = self.system.correspondences[i].dim
            maps.append(left_kron_eye(u @ t, d, u.conj().T))
        interior = None if self.interior is None else u @ self.interior @ u.conj().T
        return CovariantRep(self.system, self.sigma.conjugate(u), tuple(maps), interior,
                            self.window, self.pol)


def tildeT_n(rep: CovariantRep, n) -> np.ndarray:
    """T̃(n): 𝔼(n) ⊗ H → H along the canonical word of n."""
    n = tuple(int(x) for x in n)
    if len(n) != rep.k or any(x < 0 for x in n):
        raise CovariantRepError(f"multi-index {n} is not in ℕ₀^{rep.k}")
    return rep.tilde_word(canonical_word(n))


def _check_commutant(rep: CovariantRep, x: np.ndarray, tol: float) -> None:
    r = rep.sigma.commutes_with(x)
    if r > tol:
        raise CovariantRepError(f"operator is not in σ(A)' (commutator residual {r:.3e})")


def L_endo(rep: CovariantRep, i: int, x: np.ndarray, check: bool = True) -> np.ndarray:
    """L_i(x) = T̃^{(i)} (I ⊗ x) T̃^{(i)*} for x in σ(A)'."""
    x = np.asarray(x, dtype=complex)
    if check:
        _check_commutant(rep, x, rep.pol.abs_tol * 1e3)
    th = rep.tilde(i)
    return th @ rep.eye_tensor(i, x) @ th.conj().T


def L_n(rep: CovariantRep, n, x: np.ndarray, check: bool = True) -> np.ndarray:
    """L(n) = L_1^{n_1} ∘ ⋯ ∘ L_k^{n_k}."""
    n = tuple(int(v) for v in n)
    if check:
        _check_commutant(rep, np.asarray(x, dtype=complex), rep.pol.abs_tol * 1e3)
    out = np.asarray(x, dtype=complex)
    for i in range(rep.k - 1, -1, -1):
        for _ in range(n[i]):
            out = L_endo(rep, i, out, check=False)
    return out


@dataclass(frozen=True)
class RepClass:
    isometric: tuple
    fully_coisometric: tuple
    doubly_commuting_pairs: dict
    residuals: dict
    tol: float
    window: Optional[dict] = None

    @property
    def is_isometric(self) -> bool:
        return all(self.isometric)

    @property
    def is_fully_coisometric(self) -> bool:
        return all(self.fully_coisometric)

    @property
    def is_doubly_commuting(self) -> bool:
        return all(self.doubly_commuting_pairs.values())

    def as_dict(self) -> dict:
        return {
            "isometric": self.is_isometric,
            "fully_coisometric": self.is_fully_coisometric,
            "doubly_commuting": self.is_doubly_commuting,
            "isometric_per_direction": list(self.isometric),
            "fully_coisometric_per_direction": list(self.fully_coisometric),
            "doubly_commuting_pairs": {f"{i + 1},{j + 1}": v
                                       for (i, j), v in sorted(self.doubly_commuting_pairs.items())},
            "residuals": {k: float(v) for k, v in self.residuals.items()},
            "tol": self.tol,
            "window": self.window,
        }


def isometry_residual(rep: CovariantRep, i: int) -> float:
    th = rep.tilde(i)
    m = rep.eye_tensor(i, rep.interior_matrix())
    return opnorm(m @ (th.conj().T @ th - np.eye(th.shape[1])) @ m)


def coisometry_residual(rep: CovariantRep, i: int) -> float:
    th = rep.tilde(i)
    p = rep.interior_matrix()
    return opnorm(p @ (th @ th.conj().T - np.eye(rep.dim)) @ p)


def doubly_commuting_residual(rep: CovariantRep, i: int, j: int) -> float:
    """‖T̃_j* T̃_i − (I ⊗ T̃_i)(t_{i,j} ⊗ I)(I ⊗ T̃_j*)‖ on E_i ⊗ interior."""
    sp = rep.spaces
    ti, tj = rep.tilde(i), rep.tilde(j)
    lhs = tj.conj().T @ ti
    step1 = sp.tail_op(i, (), (j,), tj.conj().T)          # W(i) → W(i,j)
    step2 = sp.flip((i, j), 0)                             # W(i,j) → W(j,i)
    step3 = sp.tail_op(j, (i,), (), ti)                    # W(j,i) → W(j)
    rhs = step3 @ step2 @ step1
    m = rep.eye_tensor(i, rep.interior_matrix())
    return opnorm((lhs - rhs) @ m)


def classify(rep: CovariantRep) -> RepClass:
    tol = rep.pol.abs_tol * 10
    res = {}
    iso, coiso = [], []
    for i in range(rep.k):
        r = isometry_residual(rep, i)
        c = coisometry_residual(rep, i)
        res[f"isometry T({i + 1})"] = r
        res[f"coisometry T({i + 1})"] = c
        iso.append(r <= tol)
        coiso.append(c <= tol)
    pairs = {}
    for i in range(rep.k):
        for j in range(rep.k):
            if i != j:
                r = doubly_commuting_residual(rep, i, j)
                res[f"double commutation ({i + 1},{j + 1})"] = r
                pairs[(i, j)] = r <= tol
    return RepClass(tuple(iso), tuple(coiso), pairs, res, tol, rep.window)


def validate_covariant_rep(rep: CovariantRep) -> ValidationReport:
    """σ relations, covariance, null-space annihilation, contractivity and the commutation relation."""
    pol = rep.pol
    tol = pol.abs_tol * 10
    report = ValidationReport({}, tol).merged(validate_rep(rep.sigma, pol), prefix="σ: ")
    res = {}
    sp = rep.spaces
    for i in range(rep.k):
        w = sp.space((i,))
        th = rep.tilde(i)
        cov = 0.0
        for c in range(rep.system.algebra.dim):
            cov = max(cov, opnorm(th @ w.rep.images[c] - rep.sigma.images[c] @ th))
        res[f"covariance T({i + 1})"] = cov
        proj = w.lift @ w.embed
        res[f"null-space annihilation T({i + 1})"] = opnorm(
            rep.tmaps[i] @ (np.eye(proj.shape[0]) - proj))
        res[f"contractivity T({i + 1})"] = max(0.0, opnorm(th) - 1.0)
    for i in range(rep.k):
        for j in range(i):
            lhs = rep.tilde_word((i, j))
            rhs = rep.tilde_word((j, i)) @ sp.flip((i, j), 0)
            res[f"commutation relation ({i + 1},{j + 1})"] = opnorm(lhs - rhs)
    if rep.interior is not None:
        p = rep.interior
        res["interior projection"] = max(opnorm(p - p.conj().T), opnorm(p @ p - p),
                                         rep.sigma.commutes_with(p))
    return report.merged(ValidationReport(res, tol))


def is_reducing(rep: CovariantRep, P: SubspaceProjection | np.ndarray):
    """(decision, residuals) for P reducing the representation.

    Checks commutation with σ(A), the identities L_i(P) = P P_1^i = P_1^i P,
    and the invariance T̃^{(i)}(I ⊗ P) = P T̃^{(i)}.
    """
    p = P.matrix if isinstance(P, SubspaceProjection) else np.asarray(P, dtype=complex)
    tol = rep.pol.abs_tol * 1e2
    res = {"σ commutation": rep.sigma.commutes_with(p)}
    for i in range(rep.k):
        th = rep.tilde(i)
        ip = rep.eye_tensor(i, p)
        lp = th @ ip @ th.conj().T
        p1 = th @ th.conj().T
        res[f"L_{i + 1}(P) = P P_1"] = opnorm(lp - p @ p1)
        res[f"L_{i + 1}(P) = P_1 P"] = opnorm(lp - p1 @ p)
        res[f"invariance T({i + 1})"] = opnorm(th @ ip - p @ th)
    return all(v <= tol for v in res.values()), res


def restrict(rep: CovariantRep, P: SubspaceProjection, check: bool = True) -> CovariantRep:
    """The summand on ran(P), in the coordinates of P.basis."""
    if check:
        ok, res = is_reducing(rep, P)
        if not ok:
            bad = {k: v for k, v in res.items() if v > rep.pol.abs_tol * 1e2}
            raise CovariantRepError(f"projection is not reducing: {bad}")
    b = P.basis
    sigma = rep.sigma.compress(b)
    maps = []
    for i, t in enumerate(rep.tmaps):
        d = rep.system.correspondences[i].dim
        maps.append(left_kron_eye(b.conj().T @ t, d, b))
    interior = None
    if rep.interior is not None:
        c = b.conj().T @ rep.interior @ b
        if b.shape[1]:
            w, v = orthonormal_eigh(c)
            keep = v[:, w > 1 - 1e-6]
            interior = keep @ keep.conj().T
        else:
            interior = c
    return CovariantRep(rep.system, sigma, tuple(maps), interior, rep.window, rep.pol)


def _arnoldi_spectral_radius(apply, start: np.ndarray, tol: float, max_dim: int) -> float:
    """Spectral radius of a linear map on the cyclic subspace generated by ``start``."""
    shape = start.shape
    v = start.reshape(-1)
    nv = np.linalg.norm(v)
    if nv == 0:
        return 0.0
    q = [v / nv]
    h = np.zeros((max_dim + 1, max_dim), dtype=complex)
    m = 0
    for j in range(max_dim):
        w = apply(q[j].reshape(shape)).reshape(-1)
        for _ in range(2):
            for l, ql in enumerate(q):
                c = np.vdot(ql, w)
                h[l, j] += c
                w = w - c * ql
        m = j + 1
        nw = np.linalg.norm(w)
        h[j + 1, j] = nw
        if nw <= tol:
            break
        q.append(w / nw)
    if m == 0:
        return 0.0
    ev = np.linalg.eigvals(h[:m, :m])
    return float(np.max(np.abs(ev)))


def purity_predicate(rep: CovariantRep, j: int):
    """(decision, spectral radius): whether T̃(l e_j) T̃(l e_j)* → 0.

    The sequence is L_j^l(I); it tends to 0 exactly when the spectral radius
    of L_j on the cyclic subspace generated by I is below 1.
    """
    excess = max(0.0, opnorm(rep.tilde(j)) - 1.0)
    if excess > rep.pol.abs_tol * 10:
        raise CovariantRepError(f"T({j + 1}) is not contractive (excess {excess:.3e})")
    n = rep.dim
    if n == 0:
        return True, 0.0
    max_dim = min(n * n, rep.pol.max_iterations)
    rho = _arnoldi_spectral_radius(lambda x: L_endo(rep, j, x, check=False),
                                   np.eye(n, dtype=complex), rep.pol.abs_tol, max_dim)
    return bool(rho < 1 - rep.pol.rank_rtol), rho


def projection_from_matrix(m: np.ndarray, pol: TolerancePolicy) -> SubspaceProjection:
    try:
        return as_projection(m, pol)
    except NumericalError as exc:
        raise CovariantRepError(f"expected a projection: {exc}") from None
