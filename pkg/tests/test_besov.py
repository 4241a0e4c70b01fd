"""Tests de la fenêtre de Littlewood–Paley et de la norme de Besov"""
import numpy as np
import pytest

from dissipa import besov
from dissipa.bandfun import ExpSum1D, ExpSum2D, random_expsum_2d


@pytest.fixture
def w():
    return besov.build_w()


def test_profil_lisse():
    assert besov.smooth_step(0.0) == 0.0
    assert besov.smooth_step(1.0) == 1.0
    assert besov.smooth_step(0.5) == pytest.approx(0.5)
    assert besov.smooth_step(0.3) + besov.smooth_step(0.7) == pytest.approx(1.0)


def test_valeurs_de_la_fenetre(w):
    assert w(1.0) == pytest.approx(1.0)
    assert w(0.5) == 0.0
    assert w(2.0) == 0.0
    assert w(3.0) == 0.0
    assert w(0.8) + w(1.6) == pytest.approx(1.0)


def test_partition_de_l_unite():
    report = besov.check_window()
    assert report["ok"]
    assert report["support_leak"] == 0.0
    assert report["partition_error"] <= 1e-12


def test_deux_bandes():
    f = ExpSum2D(np.sqrt(2), [[1.0, 1.0]], [1.0])
    decomposition = besov.decompose(f)
    assert [n for n, _ in decomposition.bands] == [0, 1]
    assert [band.sigma for _, band in decomposition.bands] == [2.0, 4.0]
    total = sum(band.coeffs[0] for _, band in decomposition.bands)
    assert total == pytest.approx(1.0)


def test_une_seule_bande():
    f = ExpSum1D(8.0, [8.0], [1.0])
    decomposition = besov.decompose(f)
    assert [n for n, _ in decomposition.bands] == [3]
    assert decomposition.bands[0][1].sigma == 16.0
    norm = besov.besov_norm(f)
    assert norm["upper"] == pytest.approx(8.0)


def test_constante():
    f = ExpSum1D.constant(2.5)
    decomposition = besov.decompose(f)
    assert decomposition.bands == []
    assert decomposition.constant == 2.5
    assert besov.besov_norm(f)["upper"] == 0.0


def test_norme_bornee():
    f = ExpSum2D(np.sqrt(2), [[1.0, 1.0]], [1.0])
    norm = besov.besov_norm(f)
    assert 1.0 <= norm["upper"] <= 2.0
    assert norm["grid"] <= norm["upper"] + 1e-12


def test_dilatation_double_la_norme():
    f = ExpSum1D(3.0, [1.0, 3.0], [0.5, -0.5j])
    assert besov.besov_norm(f.dilate(2.0))["upper"] == pytest.approx(2 * besov.besov_norm(f)["upper"], rel=1e-12)


def test_reconstruction(rng):
    f = random_expsum_2d(rng, 16.0, 6) + ExpSum2D(16.0, [[0.0, 0.0]], [0.25])
    decomposition = besov.decompose(f)
    assert decomposition.constant == pytest.approx(0.25)
    assert besov.reconstruction_error(f, decomposition) <= 1e-14
