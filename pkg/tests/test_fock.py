import numpy as np
import pytest

from woldkit import models, wold
from woldkit.corr import zero_correspondence
from woldkit.cstar import FinCStarAlgebra, identity_rep, rep_from_multiplicities
from woldkit.fock import fock_window, frontier, induce, simplex
from woldkit.prodsys import ProductSystem, scalar_system
from woldkit.reps import classify


def test_simplex():
    # ordered by total degree, then lexicographically
    assert simplex(2, 2) == [(0, 0), (0, 1), (1, 0), (0, 2), (1, 1), (2, 0)]
    assert len(simplex(3, 2)) == 10


def test_frontier_examples():
    g = models.graph_system(models.two_vertex_graph())
    f = frontier(g)
    assert f.finite and f.minimal == ((2,),)
    assert not frontier(scalar_system(1, [1])).finite
    alg = FinCStarAlgebra((1,))
    z = ProductSystem([zero_correspondence(alg)], {})
    assert frontier(z).minimal == ((1,),)


def test_graph_exact_fock():
    ps = models.graph_system(models.two_vertex_graph())
    pi = identity_rep(ps.algebra)
    assert fock_window(ps, pi).total_dim == 3
    rep = induce(ps, pi)
    assert rep.dim == 3
    cert = wold.induced_certificate(rep)
    assert cert.success and cert.passed


def test_classical_truncated_shift():
    ps = scalar_system(1, [1])
    rep = induce(ps, rep_from_multiplicities(ps.algebra, [1]), 5)
    assert rep.dim == 6
    assert np.allclose(rep.tmaps[0], np.diag(np.ones(5), -1))
    assert classify(rep).is_isometric


def test_infinite_frontier_needs_window():
    ps = scalar_system(1, [1])
    with pytest.raises(ValueError):
        induce(ps, rep_from_multiplicities(ps.algebra, [1]))


def test_scalar_phases_match_twisted_shift():
    theta = 1.1
    spec = models.TwistedShiftSpec(2, {(1, 0): complex(np.exp(1j * theta))}, 1, 3)
    ps = spec.system()
    ind = induce(ps, rep_from_multiplicities(ps.algebra, [1]), 3)
    ts = models.twisted_shift(spec)
    assert ind.dim == ts.dim
    for a, b in zip(ind.tmaps, ts.tmaps):
        assert np.abs(a - b).max() == 0.0


@pytest.mark.parametrize("seed", range(3))
def test_induced_from_random_pi_certifies(seed):
    rng = np.random.default_rng(seed)
    spec = models.grid_graph(2, 2)
    ps = models.graph_system(spec)
    m = rng.integers(0, 3, size=ps.algebra.num_blocks)
    m[0] = max(m[0], 1)
    rep = induce(ps, rep_from_multiplicities(ps.algebra, m))
    cert = wold.induced_certificate(rep)
    assert cert.success
    assert max(cert.residuals.values()) <= 1e-9
