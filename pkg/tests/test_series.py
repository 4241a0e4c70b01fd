"""Tests de la sommation symétrique et de la règle du plateau"""
import numpy as np
import pytest

from dissipa.utils.series import checkpoints, richardson, sum_symmetric, window_tail


def lorentz(indices):
    return 1.0 / (1.0 + indices.astype(float) ** 2)


def test_points_de_controle():
    assert checkpoints(4000) == [125, 250, 500, 1000, 2000, 4000]
    assert checkpoints(300) == [125, 250, 300]
    assert checkpoints(100) == [100]
    with pytest.raises(ValueError):
        checkpoints(-1)


def test_queue_de_fenetre():
    """Moyenne de ψ'(k + 1) ≈ 1/k pour une fenêtre étroite"""
    assert window_tail(1000, 1000) == pytest.approx(1 / 1000.5, rel=1e-6)


def test_somme_lorentzienne():
    """Σ_n 1/(1 + n²) = π coth π"""
    exact = np.pi / np.tanh(np.pi)
    result = sum_symmetric(lorentz, 4000, stop_early=False)
    raw = sum_symmetric(lorentz, 4000, stop_early=False, extrapolate=False)
    assert abs(result.value - exact) <= 1e-8
    assert abs(raw.value - exact) == pytest.approx(2 / 4000, rel=1e-2)
    assert result.raw_value == pytest.approx(raw.value)


def test_somme_oscillante():
    """Σ_n e^{in}/(1 + n²) = π cosh(π − 1)/sinh π"""
    exact = np.pi * np.cosh(np.pi - 1) / np.sinh(np.pi)
    result = sum_symmetric(lambda n: np.exp(1j * n) * lorentz(n), 4000, stop_early=False)
    assert abs(result.value - exact) <= 1e-7


def test_plateau_atteint_avant_n_max():
    result = sum_symmetric(lorentz, 4000)
    assert result.converged
    assert result.n_used < 4000
    assert result.history[-1]["extrapolated_change"] <= 1e-7 * (1 + abs(result.value))
    assert result.value_at(result.n_used) == result.value


def test_n_min_respecte():
    result = sum_symmetric(lorentz, 4000, n_min=2000)
    assert result.n_used >= 2000


def test_plateau_non_atteint():
    """Série harmonique : les écarts restent en 1/N"""
    result = sum_symmetric(lambda n: 1.0 / (1.0 + np.abs(n)), 1000, extrapolate=False)
    assert not result.converged
    assert result.n_used == 1000
    with pytest.raises(KeyError):
        result.value_at(333)


def test_matrices():
    Q = np.array([[1.0, 2.0], [0.0, -1.0]])
    result = sum_symmetric(lambda n: lorentz(n)[:, None, None] * Q, 1000, stop_early=False)
    assert np.allclose(result.value, np.pi / np.tanh(np.pi) * Q, atol=1e-7)


def test_richardson_lineaire():
    """v(h) = 2 + 3h : exact dès deux points"""
    steps = [0.1, 0.01]
    value, spread = richardson([2 + 3 * h for h in steps], steps)
    assert value == pytest.approx(2.0)
    assert spread == pytest.approx(0.03)


def test_richardson_quadratique():
    steps = [0.1, 0.01, 0.001]
    value, _ = richardson([np.full((2, 2), 1 - h + 5 * h ** 2) for h in steps], steps)
    assert np.allclose(value, 1.0)


def test_richardson_tailles_incompatibles():
    with pytest.raises(ValueError):
        richardson([1.0, 2.0], [0.1])
    assert richardson([4.0], [0.5]) == (4.0, 0.0)
