import numpy as np
import pytest

from woldkit import models
from woldkit.numlin import random_unitary
from woldkit.prodsys import ProductSystemError, scalar_system, swap_matrix, validate_product_system

from helpers import automorphism_rep


def phased_swap(di, dj, rng):
    """Swap followed by a diagonal phase: coherent for any choice of phases."""
    ph = np.exp(1j * rng.uniform(0, 2 * np.pi, size=di * dj))
    return np.diag(ph) @ swap_matrix(di, dj)


def test_build_piece_examples():
    ps = scalar_system(2, [1, 1], phases={(1, 0): 1j})
    assert ps.build_piece((0, 0)).dim == ps.algebra.dim
    for n in [(1, 0), (2, 3), (4, 1)]:
        assert ps.build_piece(n).dim == 1
    g = models.graph_system(models.chain_graph(2, 2))
    # the chain 2 → 1 has no 2-paths in either colour
    assert g.build_piece((2, 0)).dim == 0
    assert g.build_piece((1, 0)).dim == 1
    with pytest.raises(ProductSystemError):
        ps.build_piece((1, -1))


def test_reorder_iso_examples():
    lam = np.exp(0.7j)
    ps = scalar_system(2, [1, 1], phases={(1, 0): lam})
    assert np.allclose(ps.reorder_iso((0, 1), (0, 1)), np.eye(1))
    assert np.allclose(ps.reorder_iso((1, 0), (0, 1)), [[lam]])


@pytest.mark.parametrize("seed", range(4))
def test_reorder_iso_schedule_independent(seed):
    rng = np.random.default_rng(seed)
    dims = [int(x) for x in rng.integers(1, 3, size=3)]
    flips = {(i, j): phased_swap(dims[i], dims[j], rng) for i in range(3) for j in range(i)}
    ps = scalar_system(3, dims, flips=flips)
    assert validate_product_system(ps).passed
    for word in [(2, 1, 0), (2, 0, 1, 2), (1, 2, 0, 1)]:
        target = tuple(sorted(word))
        a = ps.reorder_iso(word, target, "bubble")
        b = ps.reorder_iso(word, target, "reverse")
        assert np.abs(a - b).max() <= 1e-9
        assert np.allclose(a.conj().T @ a, np.eye(a.shape[1]), atol=1e-9)


def test_validate_scalar_unimodular():
    ps = scalar_system(3, [1, 2, 1], phases={(1, 0): np.exp(0.3j), (2, 0): -1, (2, 1): 1j})
    assert validate_product_system(ps).passed


def test_validate_non_unimodular_phase_fails():
    ps = scalar_system(2, [1, 1], phases={(1, 0): 1.1})
    report = validate_product_system(ps)
    assert not report.passed
    assert any(v.startswith("flip unitarity") for v in report.violations)


def test_validate_incoherent_flips_fail():
    rng = np.random.default_rng(7)
    flips = {(i, j): random_unitary(4, rng) for i in range(3) for j in range(i)}
    report = validate_product_system(scalar_system(3, [2, 2, 2], flips=flips))
    assert any("coherence" in v for v in report.violations)


def test_validate_automorphism_system():
    rep = automorphism_rep((1, 1), ((1, 0), (1, 0)), None, 2)
    assert validate_product_system(rep.system).passed


def test_validate_graph_systems():
    for spec in [models.grid_graph(2, 3), models.grid_graph(3, 2), models.nondc_graph()]:
        assert validate_product_system(models.graph_system(spec)).passed
