"""Tests des fonctions à bande limitée et des identités d'échantillonnage"""
import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st

from dissipa import bandfun
from dissipa.bandfun import ExpSum1D, ExpSum2D, Modulus
from dissipa.exceptions import DivergentModulus, InvalidFunction, LowerHalfPlane, QuadratureNotConverged
from dissipa.verification import basis_closed_form


def test_frequence_hors_bande():
    with pytest.raises(InvalidFunction):
        ExpSum1D(1.0, [1.5], [1.0])
    with pytest.raises(InvalidFunction):
        ExpSum2D(1.0, [[0.8, 0.8]], [1.0])
    with pytest.raises(InvalidFunction):
        ExpSum1D(1.0, [0.5], [np.nan])


def test_evaluation_demi_plan_inferieur():
    f = ExpSum1D.exponential(1.0)
    assert f(1j) == pytest.approx(np.exp(-1))
    with pytest.raises(LowerHalfPlane):
        f(-1j)


def test_fusion_et_produit():
    f = ExpSum1D(2.0, [0.5, 0.5, 1.0], [1.0, 2.0, 0.0]).merged()
    assert f.freqs.tolist() == [0.5]
    assert f.coeffs.tolist() == [3.0]
    g = ExpSum1D.exponential(1.0) * ExpSum1D.exponential(0.5, sigma=1.0)
    assert g.sigma == 2.0
    assert g.coefficient_at(1.5) == pytest.approx(1.0)


def test_fonction_de_la_seconde_variable():
    f = ExpSum2D(1.0, [[0.5, 0.0]], [1.0])
    g = ExpSum1D.exponential(1.0)
    product = f.times_second_variable(g)
    z1, z2 = 0.3 + 0.1j, -1.2 + 0.4j
    assert product(z1, z2) == pytest.approx(g(z2) * f(z1, z2))


def test_sup_norm():
    f = ExpSum1D(1.0, [0.0, 1.0], [1.0, 1.0])
    norm = bandfun.sup_norm(f)
    assert norm.upper == pytest.approx(2.0)
    assert norm.grid_estimate <= norm.upper
    assert norm.grid_estimate == pytest.approx(2.0, abs=1e-3)


def test_difference_divisee_diagonale():
    f = ExpSum1D.exponential(1.0)
    x = 0.4 + 0.2j
    assert bandfun.divided_difference(f, x, x) == pytest.approx(1j * np.exp(1j * x))
    near = bandfun.divided_difference(f, x, x + 1e-9)
    assert near == pytest.approx(1j * np.exp(1j * x), abs=1e-8)


def test_difference_divisee_loin():
    f = ExpSum1D(2.0, [0.0, 1.0, 2.0], [0.5, -1.0, 2j])
    x, y = 1.0 + 0.5j, -2.0 + 0.1j
    assert bandfun.divided_difference(f, x, y) == pytest.approx((f(x) - f(y)) / (x - y))


def test_differences_partielles():
    f = ExpSum2D(2.0, [[1.0, 1.0], [0.0, 1.5]], [1.0, -0.5j])
    x1, x2, y1, y2 = 0.3 + 0.2j, -0.7 + 0.1j, 1.1 + 0.3j, 0.2j
    assert bandfun.partial_dd(f, "x", x1, x2, y2) == pytest.approx((f(x1, y2) - f(x2, y2)) / (x1 - x2))
    assert bandfun.partial_dd(f, "y", x1, y1, y2) == pytest.approx((f(x1, y1) - f(x1, y2)) / (y1 - y2))


@pytest.mark.parametrize("N", [10, 1000])
def test_normalisation_forme_close(N):
    total = bandfun.basis_normalization(1.0, np.pi, N)[0]
    assert total == pytest.approx(basis_closed_form(N), abs=1e-12)


def test_normalisation_limite(rng):
    y = rng.uniform(-20, 20, 5)
    total = bandfun.basis_normalization(2.0, y, 100_000)
    assert np.all(np.abs(total - 1) <= 1e-4)


def test_developpement_echantillonnage_1d():
    f = ExpSum1D(1.0, [0.2, 0.9], [0.6, -0.4j])
    expansion = bandfun.sampling_expansion_1d(f, 4000)
    x = np.array([0.3 + 0.5j, -1.0 + 0.1j])
    y = np.array([2.0 + 1.0j, 0.5 + 0.2j])
    assert np.allclose(expansion.evaluate((x,), (y,)), bandfun.divided_difference(f, x, y), atol=1e-6)
    assert expansion.certificate == pytest.approx(bandfun.TWO_OVER_SQRT_PI * 1.0)


def test_forme_ancree():
    f = ExpSum2D(np.sqrt(2), [[1.0, 1.0], [0.3, 0.0]], [0.5, 0.5])
    anchored = bandfun.anchor_expansion(f, 4000)
    s, t = np.array([0.2 + 0.3j]), np.array([0.5 + 0.4j])
    assert anchored.evaluate(s, t) == pytest.approx(f(s, t), abs=1e-6)
    assert anchored.base(s) == pytest.approx(f(s, np.zeros(1)))


def test_identite_de_ligne(rng):
    f = bandfun.random_expsum_1d(rng, 2.0, 3)
    x = 0.7
    summed = bandfun.row_energy(f, x)
    integral = bandfun.row_energy_integral(f, x)
    assert abs(summed - integral) <= 1e-4 * (1 + integral)
    assert summed <= 4 / np.pi * f.sigma ** 2 * bandfun.sup_norm(f).upper ** 2


def test_produit_scalaire_polarise(rng):
    f = bandfun.random_expsum_1d(rng, 1.0, 2)
    result = bandfun.inner_product_check(f, -0.5, 1.3)
    assert result["residual"] <= 1e-4 * (1 + abs(result["rhs"]))


def test_noyau_difference_divisee():
    f = ExpSum1D(1.0, [0.25, 1.0], [1.0, -0.5])
    x, y = 0.3, 1.7
    assert bandfun.kernel_dd_check(f, x, y) == pytest.approx(complex(bandfun.divided_difference(f, x, y)),
                                                              abs=1e-5)


def test_noyau_exponentielle_a_l_origine():
    # Δf(0, 0) = f'(0) = i pour f = e^{ix}
    f = ExpSum1D.exponential(1.0)
    assert bandfun.kernel_dd_check(f, 0.0, 0.0) == pytest.approx(1j, abs=1e-4)


def test_noyau_frequences_proches_de_zero():
    # ξ ≈ 0 et ξ ≈ σ : la queue en (x + y)/t³ domine
    f = ExpSum1D(2.0, [0.0158, 0.7229, 0.9202, 1.9941], [0.4, -0.3j, 0.2 + 0.1j, -0.25])
    x, y = -8.733, 0.5837
    expected = complex(bandfun.divided_difference(f, x, y))
    assert abs(bandfun.kernel_dd_check(f, x, y) - expected) <= 1e-4


@seed(11)
@settings(max_examples=5, deadline=None)
@given(st.integers(0, 2 ** 31 - 1), st.sampled_from([1.0, 2.0, 4.0]))
def test_noyau_points_aleatoires(draw_seed, sigma):
    rng = np.random.default_rng(draw_seed)
    f = bandfun.random_expsum_1d(rng, sigma, int(rng.integers(1, 5)))
    x, y = rng.uniform(-10.0, 10.0), rng.uniform(-5.0, 5.0)
    expected = complex(bandfun.divided_difference(f, x, y))
    assert abs(bandfun.kernel_dd_check(f, x, y) - expected) <= 1e-4


def test_queue_rationnelle_points_confondus():
    # les deux branches se raccordent quand y → x
    omegas = np.array([-1.0, 0.0, 0.3])
    weights = np.array([1.0, -2.0, 0.5j])
    merged = bandfun.rational_tail(omegas, weights, 0.7, 0.7, 200.0)
    split = bandfun.rational_tail(omegas, weights, 0.7 - 5e-4, 0.7 + 5e-4, 200.0)
    assert merged == pytest.approx(split, abs=1e-9)


def test_quadrature_instable_rapporte_l_ecart(monkeypatch):
    monkeypatch.setattr(bandfun.config, "QUAD_DOUBLINGS", 1)
    with pytest.raises(QuadratureNotConverged) as excinfo:
        bandfun.integrate_real_line(lambda t: np.zeros_like(t, dtype=complex), 1.0, lambda T: T, half_width=10.0)
    assert excinfo.value.details["difference"] == pytest.approx(10.0)


def test_reconstruction_echantillonnage():
    f = ExpSum1D(1.0, [0.5, 1.0], [1.0, 1j])
    lam = np.array([0.3 + 0.2j, -2.0 + 1.0j])
    assert bandfun.reconstruction_check(f, 0.1 + 0.1j, lam) <= 1e-5


@seed(3)
@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 31 - 1), st.sampled_from([1.0, 2.0, 4.0]), st.integers(1, 5))
def test_bernstein(draw_seed, sigma, n_terms):
    f = bandfun.random_expsum_1d(np.random.default_rng(draw_seed), sigma, n_terms)
    assert bandfun.bernstein_check(f)["ok"]


def test_regularisation():
    f = ExpSum1D(1.0, [0.0, 0.5, 1.0], [0.2, -0.3, 0.5j])
    regularization = bandfun.regularize_eps(f, 0.3, samples=2000)
    assert regularization.residual <= 1e-8
    z = 0.4 + 0.6j
    assert regularization.function(z) == pytest.approx(f(z) / (1 - 0.3j * z))
    with pytest.raises(ValueError):
        bandfun.regularize_eps(f, 0.0)


@pytest.mark.parametrize("alpha", [0.1, 0.5, 0.75])
def test_omega_star_puissance(alpha):
    omega = Modulus.power(alpha)
    closed = bandfun.omega_star(omega, 2.0)
    assert closed == pytest.approx(2.0 ** alpha / (1 - alpha))
    assert bandfun.omega_star(omega, 2.0, method="quadrature") == pytest.approx(closed, rel=1e-7)


def test_omega_star_divergent():
    with pytest.raises(DivergentModulus):
        bandfun.omega_star(Modulus.power(1.0), 1.0)
    with pytest.raises(DivergentModulus):
        bandfun.omega_star(Modulus.tabulated([0, 1], [0, 1], tail_exponent=1.0), 0.5)


def test_omega_star_table():
    omega = Modulus.tabulated([0.0, 1.0], [0.0, 1.0], tail_exponent=0.5)
    assert bandfun.omega_star(omega, 4.0) == pytest.approx(4.0)
    assert omega.check()["ok"]


def test_module_non_sous_additif():
    values = np.linspace(0, 1, 11) ** 2
    result = bandfun.check_modulus_values(np.linspace(0, 1, 11), values, lambda t: np.asarray(t) ** 2)
    assert not result["subadditive"]
    assert not result["ok"]
