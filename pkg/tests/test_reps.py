import numpy as np
import pytest

from woldkit import models, wold
from woldkit.fock import simplex
from woldkit.numlin import SubspaceProjection
from woldkit.reps import (CovariantRep, CovariantRepError, L_endo, L_n, classify, is_reducing,
                          purity_predicate, restrict, tildeT_n, validate_covariant_rep)

from helpers import contraction_k1, dc_fixtures, graph, twisted, unitary_k1


def test_classify_unitary():
    c = classify(unitary_k1())
    assert c.is_isometric and c.is_fully_coisometric


def test_classify_twisted_window():
    c = classify(twisted(2, [1.0], 1, 3))
    assert c.is_isometric
    assert c.is_doubly_commuting
    assert not c.is_fully_coisometric


def test_classify_graph():
    c = classify(graph(models.two_vertex_graph()))
    assert c.is_isometric and c.is_doubly_commuting
    assert not c.is_fully_coisometric


def test_L_endo_examples():
    rep = twisted(2, [0.5], 1, 3)
    for i in range(2):
        th = rep.tilde(i)
        assert np.allclose(L_endo(rep, i, np.eye(rep.dim)), th @ th.conj().T)
        assert np.allclose(L_endo(rep, i, np.zeros((rep.dim, rep.dim))), 0)


def test_L_endo_rejects_non_commutant():
    rep = graph(models.two_vertex_graph())
    x = np.array([[0, 1], [0, 0]], dtype=complex)
    with pytest.raises(CovariantRepError):
        L_endo(rep, 0, x)


def test_L_n_composition():
    rep = twisted(2, [1.3], 1, 4)
    eye = np.eye(rep.dim)
    assert np.allclose(L_n(rep, (0, 0), eye), eye)
    assert np.allclose(L_n(rep, (1, 0), eye), L_endo(rep, 0, eye))
    for m, n in [((1, 0), (0, 1)), ((1, 1), (1, 0)), ((0, 2), (1, 1))]:
        mn = tuple(a + b for a, b in zip(m, n))
        assert np.abs(L_n(rep, mn, eye) - L_n(rep, m, L_n(rep, n, eye))).max() <= 1e-9


def test_tildeT_n_examples():
    theta = 0.9
    rep = twisted(2, [theta], 1, 3)
    assert np.allclose(tildeT_n(rep, (0, 0)), np.eye(rep.dim))
    assert np.allclose(tildeT_n(rep, (1, 0)), rep.tmaps[0])
    pos = {m: a for a, m in enumerate(simplex(2, 3))}
    delta0 = np.zeros(rep.dim)
    delta0[pos[(0, 0)]] = 1
    # canonical word S_1 S_2: no phase; the other order carries t_{2,1}
    v = tildeT_n(rep, (1, 1)) @ delta0
    assert np.isclose(v[pos[(1, 1)]], 1.0)
    w = rep.tilde_word((1, 0)) @ delta0
    assert np.isclose(w[pos[(1, 1)]], np.exp(1j * theta))


def test_is_reducing_examples():
    for rep in dc_fixtures().values():
        n = rep.dim
        assert is_reducing(rep, np.eye(n))[0]
        assert is_reducing(rep, np.zeros((n, n)))[0]
        assert is_reducing(rep, wold.p_infty(rep))[0]


def test_restrict_examples():
    rep = twisted(2, [0.4], 1, 3)
    same = restrict(rep, SubspaceProjection.identity(rep.dim))
    assert np.allclose(same.tmaps[0], rep.tmaps[0])
    zero = restrict(rep, SubspaceProjection.zero(rep.dim))
    assert zero.dim == 0
    mix = dc_fixtures()["twisted+weyl"]
    p = wold.max_fully_coisometric(mix)
    sub = restrict(mix, p)
    assert sub.dim == 3
    assert classify(sub).is_doubly_commuting
    with pytest.raises(CovariantRepError):
        restrict(rep, SubspaceProjection.from_basis(np.eye(rep.dim, dtype=complex)[:, :1]))


def test_purity_predicate_examples():
    assert purity_predicate(contraction_k1(0.5), 0)[0]
    assert not purity_predicate(unitary_k1(), 0)[0]
    rep = twisted(2, [0.2], 1, 3)
    assert all(purity_predicate(rep, j)[0] for j in range(2))


def test_purity_rejects_non_contraction():
    with pytest.raises(CovariantRepError):
        purity_predicate(contraction_k1(1.5), 0)


def test_validate_covariant_rep_detects_broken_commutation():
    rep = twisted(2, [0.4], 1, 3)
    bad = CovariantRep(rep.system, rep.sigma, (rep.tmaps[0], rep.tmaps[1] * np.exp(0.1j) + 0.01),
                       rep.interior, rep.window, rep.pol)
    assert validate_covariant_rep(rep).passed
    assert not validate_covariant_rep(bad).passed


def test_wrong_shape_rejected():
    rep = twisted(1, (), 1, 2)
    with pytest.raises(CovariantRepError):
        CovariantRep(rep.system, rep.sigma, (np.eye(2),))


def test_conjugate_preserves_class():
    rng = np.random.default_rng(0)
    for name, rep in dc_fixtures().items():
        u = np.linalg.qr(rng.normal(size=(rep.dim, rep.dim)) + 1j * rng.normal(size=(rep.dim, rep.dim)))[0]
        c = classify(rep.conjugate(u))
        assert c.is_isometric and c.is_doubly_commuting, name
