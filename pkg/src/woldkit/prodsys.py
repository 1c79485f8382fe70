"""Product systems over ℕ₀ᵏ given by correspondences E_1..E_k and flips.

Direction indices are 0-based in the Python API.  A flip ``t[(i, j)]`` for
i > j is a matrix on the algebraic coordinates of E_i ⊗ E_j (E_i index
major) with values in the algebraic coordinates of E_j ⊗ E_i.  Flips with
i < j are the inverses on the quotient correspondences.

Words are tuples of direction indices; the tensor product of a word is built
left to right and reduced modulo its null space, with ``lift`` taking quotient
coordinates back to the full algebraic coordinates C^{d_{w_1}} ⊗ ⋯.
"""

from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass, field

import numpy as np

from .corr import (Correspondence, algebraic_tensor, identity_correspondence, reduce,
                   validate_correspondence)
from .cstar import FinCStarAlgebra, ValidationReport
from .numlin import DEFAULT_POLICY, TolerancePolicy, check_finite, numerical_rank, opnorm


class ProductSystemError(ValueError):
    pass


@dataclass(frozen=True)
class GradedPiece:
    """𝔼(n) = E_1^{⊗n_1} ⊗ ⋯ ⊗ E_k^{⊗n_k}, reduced."""

    multi_index: tuple
    correspondence: Correspondence
    lift: np.ndarray

    @property
    def dim(self) -> int:
        return self.correspondence.dim


def canonical_word(n) -> tuple:
    """The word 1^{n_1} 2^{n_2} ⋯ (0-based letters)."""
    return tuple(i for i, ni in enumerate(n) for _ in range(int(ni)))


def word_degree(word, k: int) -> tuple:
    deg = [0] * k
    for i in word:
        deg[i] += 1
    return tuple(deg)


@dataclass(eq=False)
class ProductSystem:
    correspondences: tuple
    flips: dict
    pol: TolerancePolicy = DEFAULT_POLICY
    _cache: dict = field(default_factory=dict, init=False, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, init=False, repr=False)

    def __post_init__(self):
        self.correspondences = tuple(self.correspondences)
        if not self.correspondences:
            raise ProductSystemError("a product system needs at least one correspondence")
        alg = self.correspondences[0].algebra
        if any(E.algebra != alg for E in self.correspondences):
            raise ProductSystemError("correspondences live over different algebras")
        flips = {}
        for i in range(self.k):
            for j in range(i):
                if (i, j) not in self.flips:
                    raise ProductSystemError(f"missing flip t({i + 1},{j + 1})")
                t = check_finite(self.flips[(i, j)], f"flip t({i + 1},{j + 1})")
                n = self.correspondences[i].dim * self.correspondences[j].dim
                if t.shape != (n, n):
                    raise ProductSystemError(
                        f"flip t({i + 1},{j + 1}) has shape {t.shape}, expected {(n, n)}")
                flips[(i, j)] = t
        extra = set(self.flips) - set(flips)
        if extra:
            raise ProductSystemError(f"unexpected flip keys {sorted(extra)}; only i > j is stored")
        self.flips = flips

    @property
    def k(self) -> int:
        return len(self.correspondences)

    @property
    def algebra(self) -> FinCStarAlgebra:
        return self.correspondences[0].algebra

    def dims(self) -> tuple:
        return tuple(E.dim for E in self.correspondences)

    def _cached(self, key, make):
        with self._lock:
            if key in self._cache:
                return self._cache[key]
        value = make()
        with self._lock:
            return self._cache.setdefault(key, value)

    def word_correspondence(self, word) -> tuple:
        """(reduced correspondence of the word, lift to full algebraic coordinates)."""
        word = tuple(int(i) for i in word)

        def make():
            if not word:
                E = identity_correspondence(self.algebra)
                return E, np.eye(E.dim, dtype=complex)
            if len(word) == 1:
                return reduce(self.correspondences[word[0]], self.pol)
            prev, prev_lift = self.word_correspondence(word[:-1])
            last = self.correspondences[word[-1]]
            red, v = reduce(algebraic_tensor(prev, last), self.pol)
            return red, np.kron(prev_lift, np.eye(last.dim)) @ v

        return self._cached(("word", word), make)

    def build_piece(self, n) -> GradedPiece:
        n = tuple(int(x) for x in n)
        if len(n) != self.k or any(x < 0 for x in n):
            raise ProductSystemError(f"multi-index {n} is not in ℕ₀^{self.k}")
        C, lift = self.word_correspondence(canonical_word(n))
        return GradedPiece(n, C, lift)

    def word_full_dim(self, word) -> int:
        if not word:
            return self.algebra.dim
        return int(np.prod([self.correspondences[i].dim for i in word]))

    # --- flips on quotient coordinates ---------------------------------------

    def adjacent_swap(self, word, pos: int) -> np.ndarray:
        """Quotient-coordinate matrix of the flip at positions (pos, pos+1) of ``word``."""
        word = tuple(word)
        a, b = word[pos], word[pos + 1]
        if a == b:
            raise ProductSystemError("adjacent letters are equal; no flip applies")
        target = word[:pos] + (b, a) + word[pos + 2:]
        if a > b:
            return self._forward_swap(word, pos, target)
        return np.linalg.inv(self._forward_swap(target, pos, word))

    def _forward_swap(self, word, pos, target) -> np.ndarray:
        def make():
            a, b = word[pos], word[pos + 1]
            pre = self.word_full_dim(word[:pos]) if pos else 1
            post = self.word_full_dim(word[pos + 2:]) if pos + 2 < len(word) else 1
            _, vs = self.word_correspondence(word)
            _, vt = self.word_correspondence(target)
            t = self.flips[(a, b)]
            if vs.shape[1] == 0 or vt.shape[1] == 0:
                return np.zeros((vt.shape[1], vs.shape[1]), dtype=complex)
            x = vs.reshape(pre, t.shape[1], post, vs.shape[1])
            y = np.einsum("ij,ajbc->aibc", t, x).reshape(-1, vs.shape[1])
            return vt.conj().T @ y

        return self._cached(("swap", tuple(word), pos), make)

    def reorder_iso(self, source, target, schedule: str = "bubble") -> np.ndarray:
        """Unitary from the word correspondence of ``source`` to that of ``target``.

        Built from adjacent flips along a bubble-sort schedule.  ``schedule``
        selects left-to-right passes ("bubble") or right-to-left passes
        ("reverse"); both give the same matrix on coherent systems.
        """
        if schedule not in ("bubble", "reverse"):
            raise ProductSystemError(f"unknown schedule {schedule!r}")
        source, target = tuple(source), tuple(target)
        if sorted(source) != sorted(target):
            raise ProductSystemError(f"{target} is not a permutation of {source}")
        # stable matching of repeated letters
        seen = {}
        slots = {}
        for pos, letter in enumerate(target):
            slots.setdefault(letter, []).append(pos)
        perm = []
        for letter in source:
            c = seen.get(letter, 0)
            perm.append(slots[letter][c])
            seen[letter] = c + 1
        word = list(source)
        C, _ = self.word_correspondence(source)
        out = np.eye(C.dim, dtype=complex)
        n = len(word)
        changed = True
        while changed:
            changed = False
            rng = range(n - 1) if schedule == "bubble" else range(n - 2, -1, -1)
            for pos in rng:
                if perm[pos] > perm[pos + 1]:
                    out = self.adjacent_swap(tuple(word), pos) @ out
                    word[pos], word[pos + 1] = word[pos + 1], word[pos]
                    perm[pos], perm[pos + 1] = perm[pos + 1], perm[pos]
                    changed = True
        return out


def gram_weighted_norm(d: np.ndarray, g_target: np.ndarray, g_source: np.ndarray) -> float:
    """Operator norm of d between quotient coordinates with τ-Grams g_target, g_source."""
    if d.size == 0:
        return 0.0
    return opnorm(_sqrtm_psd(g_target) @ d @ _sqrtm_psd(g_source, inverse=True))


def _sqrtm_psd(g: np.ndarray, inverse: bool = False) -> np.ndarray:
    w, v = np.linalg.eigh(0.5 * (g + g.conj().T))
    w = np.clip(w, 0, None)
    s = np.where(w > 0, 1 / np.sqrt(np.where(w > 0, w, 1)), 0) if inverse else np.sqrt(w)
    return (v * s[None, :]) @ v.conj().T


def validate_product_system(ps: ProductSystem, pol: TolerancePolicy | None = None) -> ValidationReport:
    """Per-correspondence checks plus unitarity, bimodule property and coherence of the flips."""
    pol = pol or ps.pol
    tol = pol.abs_tol * 10
    report = ValidationReport({}, tol)
    for i, E in enumerate(ps.correspondences):
        report = report.merged(validate_correspondence(E, pol), prefix=f"E_{i + 1}: ")
    alg = ps.algebra
    for (i, j), t in ps.flips.items():
        label = f"t({i + 1},{j + 1})"
        src = algebraic_tensor(ps.correspondences[i], ps.correspondences[j])
        dst = algebraic_tensor(ps.correspondences[j], ps.correspondences[i])
        # A-valued inner products preserved: ⟨t x, t y⟩ = ⟨x, y⟩
        pulled = np.einsum("ap,bq,abc->pqc", t.conj(), t, dst.inner)
        unit = float(np.max(np.abs(pulled - src.inner), initial=0.0))
        # onto: the image spans the quotient of E_j ⊗ E_i
        _, vs = reduce(src, pol)
        _, vt = reduce(dst, pol)
        tq = vt.conj().T @ t @ vs
        if vt.shape[1] != vs.shape[1] or (tq.size and numerical_rank(tq, pol) != vt.shape[1]):
            unit = max(unit, 1.0)
        left = right = 0.0
        for c in range(alg.dim):
            left = max(left, opnorm(vt.conj().T @ (t @ src.left[c] - dst.left[c] @ t) @ vs))
            right = max(right, opnorm(vt.conj().T @ (t @ src.right[c] - dst.right[c] @ t) @ vs))
        report = report.merged(ValidationReport({
            f"flip unitarity {label}": unit,
            f"flip left bimodule {label}": left,
            f"flip right bimodule {label}": right,
        }, tol))
    coherence = {}
    for i, j, l in itertools.combinations(range(ps.k - 1, -1, -1), 3):
        word = (i, j, l)
        p1 = ps.reorder_iso(word, (l, j, i), schedule="bubble")
        p2 = ps.reorder_iso(word, (l, j, i), schedule="reverse")
        gs = ps.word_correspondence(word)[0].scalar_gram
        gt = ps.word_correspondence((l, j, i))[0].scalar_gram
        coherence[f"flip coherence ({i + 1},{j + 1},{l + 1})"] = gram_weighted_norm(p1 - p2, gt, gs)
    report = report.merged(ValidationReport(coherence, tol))
    return report


def scalar_system(k: int, dims, phases: dict | None = None, flips: dict | None = None,
                  pol: TolerancePolicy = DEFAULT_POLICY) -> ProductSystem:
    """Product system over A = ℂ with E_i = ℂ^{d_i} (standard inner product).

    Flips default to the tensor swap multiplied by ``phases[(i, j)]``.
    """
    from .corr import standard_correspondence

    alg = FinCStarAlgebra((1,))
    dims = [int(d) for d in dims]
    corrs = [standard_correspondence(alg, np.array([[d]])) for d in dims]
    phases = phases or {}
    out = {}
    for i in range(k):
        for j in range(i):
            if flips and (i, j) in flips:
                out[(i, j)] = np.asarray(flips[(i, j)], dtype=complex)
            else:
                out[(i, j)] = phases.get((i, j), 1.0) * swap_matrix(dims[i], dims[j])
    return ProductSystem(corrs, out, pol)


def swap_matrix(di: int, dj: int) -> np.ndarray:
    """x ⊗ y ↦ y ⊗ x from C^{di} ⊗ C^{dj} to C^{dj} ⊗ C^{di}."""
    s = np.zeros((dj * di, di * dj), dtype=complex)
    for p in range(di):
        for q in range(dj):
            s[q * di + p, p * dj + q] = 1.0
    return s
