import numpy as np
import pytest

from woldkit import extend, models
from woldkit.corr import identity_correspondence
from woldkit.cstar import INF, FinCStarAlgebra, MultiplicityVector, rep_from_multiplicities
from woldkit.prodsys import ProductSystem, scalar_system
from woldkit.reps import classify

from helpers import unitary_k1

TOL = 1e-8


def swap_M():
    return extend.multiplicity_matrix(models.swap_correspondence())


def nonfaithful_M():
    return extend.multiplicity_matrix(models.nonfaithful_correspondence())


def test_extended_arithmetic():
    assert extend.ext_mul(0, INF) == 0
    assert extend.ext_mul(2, INF) == INF
    assert extend.ext_mul(3, 2) == 6
    assert extend.ext_add(1, INF) == INF
    assert extend.ext_dot([1, 0], [2, INF]) == 2


def test_multiplicity_matrix_examples():
    M = extend.multiplicity_matrix(scalar_system(1, [2]).correspondences[0])
    assert M.to_json() == [[2]]
    assert swap_M().to_json() == [[0, 1], [1, 0]]
    # the second row vanishes: φ kills the second summand
    assert nonfaithful_M().to_json() == [[1, 1], [0, 0]]


def test_unit2_examples():
    assert extend.unit2_check([[2]], [1])[0]
    ok, bad = extend.unit2_check(swap_M(), [1, 0])
    assert not ok and bad == [0]
    assert extend.unit2_check(swap_M(), [0, 0])[0]


def test_unit1_examples():
    assert extend.unit1_applies(swap_M())
    assert not extend.unit1_applies(nonfaithful_M())
    assert extend.unit1_applies([[2]])


def test_eqrep_nonfaithful_infeasible():
    cert = extend.eqrep_solve(nonfaithful_M(), [0, 1])
    assert cert.status == "infeasible"
    assert cert.obstruction == "zero induction row 2 with m_2=1"


def test_eqrep_swap_infinite():
    cert = extend.eqrep_solve(swap_M(), [1, 0])
    assert cert.feasible
    assert cert.m_prime == MultiplicityVector((INF, INF))


def test_eqrep_cuntz_finite():
    cert = extend.eqrep_solve([[2]], [1])
    assert cert.feasible
    assert cert.m_prime == MultiplicityVector((1,))
    # brute force m′ ≤ 10 of 2m′ = 1 + m′
    assert [mp for mp in range(11) if 2 * mp == 1 + mp] == [1]


@pytest.mark.parametrize("seed", range(8))
def test_eqrep_brute_force(seed):
    rng = np.random.default_rng(seed)
    M = rng.integers(0, 3, size=(2, 2))
    m = rng.integers(0, 3, size=2)
    cert = extend.eqrep_solve(M, m)
    finite = [(a, b) for a in range(8) for b in range(8)
              if np.array_equal(M @ np.array([a, b]), m + np.array([a, b]))]
    if finite and cert.feasible and cert.m_prime.is_finite:
        assert np.array_equal(M @ np.array(cert.m_prime.entries), m + np.array(cert.m_prime.entries))
        # minimal support size among finite solutions
        assert sum(x > 0 for x in cert.m_prime.entries) <= min(sum(x > 0 for x in s) for s in finite)
    if cert.status == "infeasible":
        assert not finite


def test_morita_hat_examples():
    assert extend.morita_hat(swap_M(), [1, 0]) == MultiplicityVector((0, 1))
    assert extend.morita_hat([[2]], [3]) == MultiplicityVector((2,))
    assert extend.morita_hat([[2]], [0]) == MultiplicityVector((0,))
    with pytest.raises(extend.ExtensionError):
        extend.morita_hat(nonfaithful_M(), [0, 1])


def test_build_extension_cuntz():
    ps = scalar_system(1, [2])
    ext = extend.build_extension(ps, rep_from_multiplicities(ps.algebra, [1]), 5)
    assert ext.m_prime == MultiplicityVector((1,))
    assert max(ext.residuals.values()) <= 1e-9


def test_build_extension_bilateral_shift():
    ps = scalar_system(1, [1])
    ext = extend.build_extension(ps, rep_from_multiplicities(ps.algebra, [1]), 4)
    assert not ext.m_prime.is_finite
    assert max(ext.residuals.values()) <= 1e-9
    p = extend.minimal_extension(ext.rep, ext.embedding)
    assert p.rank == ext.rep.dim


def test_build_extension_swap():
    fx = models.section5_fixtures()["swap"]
    ps = fx.system()
    ext = extend.build_extension(ps, rep_from_multiplicities(ps.algebra, [1, 0]), 3)
    assert max(ext.residuals.values()) <= 1e-9


def test_build_extension_nonfaithful_raises():
    fx = models.section5_fixtures()["nonfaithful"]
    ps = fx.system()
    with pytest.raises(extend.ExtensionError):
        extend.build_extension(ps, rep_from_multiplicities(ps.algebra, [0, 1]), 3)


def test_minimal_extension_examples():
    rep = unitary_k1(3)
    assert classify(rep).is_fully_coisometric
    assert extend.minimal_extension(rep, np.eye(3)).rank == 3
    assert extend.minimal_extension(rep, np.zeros((3, 0))).rank == 0


def test_identity_correspondence_unitary_type_rep_is_its_own_extension():
    alg = FinCStarAlgebra((1, 2))
    ps = ProductSystem([identity_correspondence(alg)], {})
    pi = rep_from_multiplicities(alg, [1, 1])
    M = extend.multiplicity_matrix(ps.correspondences[0])
    assert M.to_json() == [[1, 0], [0, 1]]
    # A ⊗_π K ≅ K: the rep (π, a ⊗ h ↦ π(a) h) is already unitary
    t = np.hstack([pi.images[c] for c in range(alg.dim)])
    from woldkit.reps import CovariantRep

    rep = CovariantRep(ps, pi, (t,))
    c = classify(rep)
    assert c.is_isometric and c.is_fully_coisometric
    assert extend.minimal_extension(rep, np.eye(rep.dim)).rank == rep.dim
