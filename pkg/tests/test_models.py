import numpy as np
import pytest

from woldkit import models, wold
from woldkit.cstar import FinCStarAlgebra, rep_from_multiplicities
from woldkit.fock import induce
from woldkit.numlin import random_unitary
from woldkit.prodsys import scalar_system, validate_product_system
from woldkit.reps import classify, purity_predicate, validate_covariant_rep

from helpers import twisted


def test_twisted_shift_k1_is_truncated_shift():
    rep = twisted(1, (), 1, 4)
    assert np.allclose(rep.tmaps[0], np.diag(np.ones(4), -1))


def test_twisted_shift_untwisted_pair():
    rep = twisted(2, [0.0], 1, 3)
    s1, s2 = rep.tmaps
    assert np.allclose(s1 @ s2, s2 @ s1)
    assert classify(rep).is_doubly_commuting


def test_twisted_relations_machine_precision():
    spec = models.TwistedShiftSpec(2, {(1, 0): complex(np.exp(1j))}, 1, 5)
    rep = models.twisted_shift(spec)
    res = models.twisted_relations(rep, spec)
    assert max(res.values()) <= 1e-15


@pytest.mark.parametrize("k,thetas,d", [(1, (), 2), (2, [0.3], 1), (2, [2.0], 2), (3, [0.1, 0.2, 0.3], 1)])
def test_twisted_shift_invariants(k, thetas, d):
    rep = twisted(k, thetas, d, 3)
    c = classify(rep)
    assert c.is_isometric and c.is_doubly_commuting
    assert validate_covariant_rep(rep).passed
    assert all(purity_predicate(rep, j)[0] for j in range(k))


def test_row_convert_one_dimensional_fibres():
    rep = twisted(2, [0.6], 1, 3)
    fam = models.scalar_row_convert(rep)
    for i in range(2):
        assert np.allclose(fam.operators[i][0], rep.tmaps[i])
    assert max(fam.residuals.values()) <= 1e-9


def test_row_convert_two_dimensional_fibres():
    ps = scalar_system(2, [2, 2])
    rep = induce(ps, rep_from_multiplicities(ps.algebra, [1]), 3)
    fam = models.scalar_row_convert(rep)
    p = rep.interior_matrix()
    for ops in fam.operators:
        assert len(ops) == 2
        for a, sa in enumerate(ops):
            for b, sb in enumerate(ops):
                expect = np.eye(rep.dim) if a == b else 0
                assert np.abs((sa.conj().T @ sb - expect) @ p).max() <= 1e-9


def test_row_convert_round_trip_random_bases():
    rng = np.random.default_rng(3)
    ps = scalar_system(2, [2, 1])
    rep = induce(ps, rep_from_multiplicities(ps.algebra, [1]), 2)
    bases = (random_unitary(2, rng), np.eye(1, dtype=complex))
    fam = models.scalar_row_convert(rep, bases)
    back = models.row_family_to_rep(ps, fam.operators, bases)
    for a, b in zip(back.tmaps, rep.tmaps):
        assert np.abs(a - b).max() <= 1e-12


def test_row_convert_rejects_bad_basis():
    rep = twisted(1, (), 1, 2)
    with pytest.raises(models.ModelError):
        models.scalar_row_convert(rep, (np.eye(2),))


def test_automorphism_identity_is_standard_shift():
    alg = FinCStarAlgebra((1, 2))
    spec = models.AutomorphismSystemSpec(alg, (models.Automorphism(alg, (0, 1)),))
    pi = rep_from_multiplicities(alg, [1, 1])
    mod = models.automorphism_induced(spec, pi, 3)
    for c in range(alg.dim):
        assert np.allclose(mod.sigma.images[c], np.kron(np.eye(4), pi.images[c]))
    assert max(mod.residuals.values()) <= 1e-9


def test_automorphism_swap_alternates_by_parity():
    alg = FinCStarAlgebra((1, 1))
    spec = models.AutomorphismSystemSpec(alg, (models.Automorphism(alg, (1, 0)),))
    mod = models.automorphism_induced(spec, rep_from_multiplicities(alg, [1, 0]), 3)
    assert np.allclose(np.diag(mod.sigma(alg.central(0))), [1, 0, 1, 0])
    assert np.allclose(np.diag(mod.sigma(alg.central(1))), [0, 1, 0, 1])
    assert max(mod.residuals.values()) <= 1e-9


def test_automorphism_commuting_pair():
    alg = FinCStarAlgebra((1, 1, 1))
    autos = (models.Automorphism(alg, (1, 2, 0)), models.Automorphism(alg, (2, 0, 1)))
    spec = models.AutomorphismSystemSpec(alg, autos)
    assert max(spec.validate().values()) <= 1e-12
    mod = models.automorphism_induced(spec, rep_from_multiplicities(alg, [1, 0, 1]), 2)
    assert validate_product_system(mod.rep.system).passed
    c = classify(mod.rep)
    assert c.is_isometric and c.is_doubly_commuting
    assert max(mod.residuals.values()) <= 1e-9


def test_graph_examples():
    rep = models.graph_rep(models.two_vertex_graph())
    assert rep.dim == 2
    assert wold.wold_dc(rep).dims() == {"{}": 0, "{1}": 2}
    loop = models.graph_rep(models.loop_graph(1))
    assert loop.dim == 1 and abs(abs(loop.tmaps[0][0, 0]) - 1) < 1e-12
    assert wold.p_infty(loop).rank == 1
    mix = models.graph_rep(models.disjoint_union(models.loop_graph(1), models.two_vertex_graph()))
    dims = wold.wold_dc(mix).dims()
    assert dims["{}"] > 0 and dims["{1}"] > 0


def test_graph_flags_agree_with_classify():
    for spec in [models.two_vertex_graph(), models.loop_graph(2), models.grid_graph(2, 2), models.nondc_graph()]:
        flags = models.graph_flags(spec)
        c = classify(models.graph_rep(spec))
        for i in range(spec.k):
            assert flags[f"isometric {i + 1}"] == c.isometric[i]
            assert flags[f"fully coisometric {i + 1}"] == c.fully_coisometric[i]


def test_graph_invalid_squares():
    # colour-1 and colour-2 paths of length two disagree in number
    spec = models.GraphSpec(3, (((0, 1),), ((1, 2), (0, 2))))
    with pytest.raises(models.ModelError):
        models.graph_system(spec)


def test_section5_bundle():
    b = models.section5_fixtures()
    for fx in b:
        assert all(fx.check().values()), fx.name
    with pytest.raises(IndexError):
        b[2]
    assert b["swap"].matrix == ((0, 1), (1, 0))


def test_random_correspondence_valid():
    from woldkit.corr import validate_correspondence

    rng = np.random.default_rng(0)
    for _ in range(5):
        E = models.random_correspondence(FinCStarAlgebra((1, 2)), rng)
        assert validate_correspondence(E).passed
