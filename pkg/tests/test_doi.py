"""Tests des intégrales doubles d'opérateurs et des formules de perturbation"""
import numpy as np
import pytest

from dissipa import doi
from dissipa.bandfun import ExpSum1D, ExpSum2D, sampling_expansion_1d
from dissipa.dissipative import gen_pair
from dissipa.exceptions import InvalidExponent, SeriesNotConverged
from dissipa.haagerup import HaagerupExpansion
from dissipa.linalg import identity, operator_norm
from dissipa.verification import multiband_expsum_2d, random_dissipative


def one(z):
    return np.ones_like(z)


@pytest.fixture
def perturbed(rng):
    L = random_dissipative(rng, 3, margin=0.75)
    E = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    return L, L + 0.2 * E / operator_norm(E)


@pytest.fixture
def instance():
    return gen_pair(17, 2, "normal", 0.1)


def test_developpement_fini_identite():
    """φ = ψ = 1 : la DOI vaut Q"""
    X = HaagerupExpansion.from_pairs([(one, one)], label="unite")
    Q = np.array([[1.0, 2.0], [3.0, 4.0]])
    result = doi.doi_apply(X, np.diag([1j, 2j]), Q, np.diag([1j, 1j]))
    assert np.allclose(result.value, Q)
    assert result.converged and result.n_used == 1


def test_developpement_fini_multiplication(rng):
    """φ(x) = x, ψ = 1 : la DOI vaut L·Q"""
    L = random_dissipative(rng, 3)
    Q = rng.standard_normal((3, 3))
    X = HaagerupExpansion.from_pairs([(lambda x: x, one)])
    assert np.allclose(doi.doi_apply(X, L, Q, L).value, L @ Q, atol=1e-10)


def test_dimensions_incompatibles():
    X = HaagerupExpansion.from_pairs([(one, one)])
    with pytest.raises(ValueError):
        doi.doi_apply(X, [[1j]], np.eye(2), [[1j]])


def test_perturbation_scalaire():
    """f(z) = e^{iz} : f(i) − f(2i) = e^{-1} − e^{-2}"""
    f = ExpSum1D.exponential(1.0)
    report = doi.perturb_single(f, [[1j]], [[2j]])
    assert report["doi_value"][0, 0] == pytest.approx(np.exp(-1) - np.exp(-2), abs=1e-6)
    assert report["residual"] <= 1e-6
    assert report["ok"]
    assert report["anchor"] == "(BSd9)"


def test_perturbation_nulle(rng):
    L = random_dissipative(rng, 3)
    report = doi.perturb_single(ExpSum1D.exponential(1.0), L, L)
    assert operator_norm(report["doi_value"]) == 0.0
    assert report["residual"] <= 1e-12
    assert report["ok"]


def test_perturbation_matrices(perturbed):
    L, M = perturbed
    f = ExpSum1D(2.0, [0.3, 1.1, 2.0], [0.5, -0.25j, 0.25])
    report = doi.perturb_single(f, L, M)
    assert report["residual"] <= 1e-6
    assert report["certificate_ok"]
    assert report["s2_ok"]
    assert report["lhs"] <= report["rhs"] + 1e-6
    assert report["partial_sum_history"][0]["N"] == 125


def test_serie_sans_plateau():
    f = ExpSum1D(1.0, [0.3, 1.0], [0.5, 0.5j])
    expansion = sampling_expansion_1d(f, 4)
    result = doi.doi_apply(expansion, [[1j]], [[1.0]], [[2j]], N=4)
    assert not result.converged
    assert result.n_used == 4
    with pytest.raises(SeriesNotConverged) as excinfo:
        doi.doi_apply(expansion, [[1j]], [[1.0]], [[2j]], N=4, strict=True)
    assert excinfo.value.result.n_used == 4


def test_plateau_rapporte(instance):
    report = doi.perturb_pair(ExpSum2D(1.0, [[0.5, 0.5]], [1.0]), *instance, "31")
    assert isinstance(report["plateau"], bool)


def test_certificat_du_developpement():
    f = ExpSum1D(4.0, [1.0, 4.0], [0.5, 0.5])
    assert sampling_expansion_1d(f, 100).certificate == pytest.approx(2 / np.sqrt(np.pi) * 4.0)


@pytest.mark.parametrize("formula", doi.FORMULAS)
def test_perturbation_paires(instance, formula):
    P1, P2 = instance
    f = ExpSum2D(1.0, [[0.6, 0.3], [0.2, 0.9]], [0.5, -0.5j])
    report = doi.perturb_pair(f, P1, P2, formula)
    assert report["formula"] == formula
    assert report["residual"] <= 1e-5
    assert report["certificate_ok"]
    assert report["ok"]


def test_perturbation_totale_telescopique(instance):
    P1, P2 = instance
    f = ExpSum2D(1.0, [[0.5, 0.5]], [1.0])
    report = doi.perturb_pair(f, P1, P2, "glafor")
    parts = report["parts"]
    assert np.allclose(parts["31"] + parts["32"], report["doi_value"])
    first = report["partial_sum_history"][0]
    assert set(first) == {"N", "31", "32"}


@pytest.mark.parametrize("style", ["polynomial", "nilpotent-shift"])
@pytest.mark.parametrize("formula", doi.FORMULAS)
def test_perturbation_paires_dimension_4(style, formula):
    P1, P2 = gen_pair(3, 4, style)
    f = ExpSum2D(1.0, [[0.6, 0.3], [0.2, 0.9], [-0.4, 0.7]], [0.5, -0.5j, 0.25])
    report = doi.perturb_pair(f, P1, P2, formula, N=4000)
    assert report["residual"] <= 1e-5
    assert report["anchor"] == f"({formula})"


@pytest.mark.parametrize("alias, formula", sorted(doi.FORMULA_ALIASES.items()))
def test_alias_de_formule(instance, alias, formula):
    f = ExpSum2D(1.0, [[0.5, 0.5]], [1.0])
    by_alias = doi.perturb_pair(f, *instance, alias)
    assert by_alias["formula"] == formula
    assert np.allclose(by_alias["doi_value"], doi.perturb_pair(f, *instance, formula)["doi_value"])


def test_formule_inconnue(instance):
    with pytest.raises(ValueError):
        doi.perturb_pair(ExpSum2D(1.0, [[0.5, 0.5]], [1.0]), *instance, formula="vary-both")


def test_lipschitz_paires_egales(instance):
    P1, _ = instance
    report = doi.lipschitz_certificate(ExpSum2D(1.0, [[0.5, 0.5]], [1.0]), P1, P1)
    assert report["lhs"] == pytest.approx(0.0, abs=1e-12)
    assert report["ok"]


def test_lipschitz(instance):
    f = ExpSum2D(2.0, [[1.0, 1.0], [0.0, 2.0]], [0.5, 0.5])
    report = doi.lipschitz_certificate(f, *instance)
    assert report["lhs"] > 0
    assert report["ok"]


def test_besov_par_bandes(rng, instance):
    f = multiband_expsum_2d(rng)
    report = doi.besov_lipschitz(f, *instance)
    assert report["ok"]
    assert [b["n"] for b in report["bands"]] == sorted(b["n"] for b in report["bands"])
    assert report["rhs"] == pytest.approx(sum(b["contribution"] for b in report["bands"]))


@pytest.mark.parametrize("alpha, p", [(1.5, 2.0), (0.0, 2.0), (0.5, 1.0)])
def test_holder_exposants_invalides(instance, alpha, p):
    with pytest.raises(InvalidExponent):
        doi.holder_schatten_report(ExpSum2D(1.0, [[0.5, 0.5]], [1.0]), *instance, alpha, p)


def test_holder_schatten(instance):
    f = ExpSum2D(1.0, [[0.6, 0.3]], [1.0])
    report = doi.holder_schatten_report(f, *instance, alpha=0.5, p=2.0)
    assert report["finite"] and report["ok"]
    assert report["schatten_exponent"] == pytest.approx(4.0)
    assert report["quantities"]["omega_star"] == pytest.approx(2 * report["quantities"]["holder"])


def test_holder_trajectoire_commutative(instance):
    f = ExpSum2D(1.0, [[0.6, 0.3]], [1.0])
    report = doi.holder_schatten_report(f, *instance, alpha=0.5, p=2.0)
    assert report["scaling"] is not None
    assert len(report["scaling"]) == 3
    assert all(s["ratio"] is not None for s in report["scaling"])
    assert report["scaling_ok"]


def test_holder_trajectoire_lineaire():
    P1, _ = gen_pair(5, 3, "polynomial")
    I = identity(3)
    P2 = doi.check_commuting(P1.L.A + 0.05 * I, P1.M.A - 0.02 * I)
    report = doi.holder_schatten_report(ExpSum2D(1.0, [[0.6, 0.3]], [1.0]), P1, P2, alpha=0.5, p=2.0)
    assert [s["path"] for s in report["scaling"]] == ["linear"] * 3
    assert len(report["scaling_factors"]) == 3


def test_transport(perturbed):
    L, M = perturbed
    report = doi.transport_check(ExpSum1D(1.0, [0.5, 1.0], [0.5, 0.5]), L, M)
    assert report["ok"]


def test_sandwich_resolvantes(perturbed):
    L, M = perturbed
    report = doi.resolvent_sandwich_check(ExpSum1D(1.0, [0.5, 1.0], [0.5, 0.5j]), L, M)
    assert report["residual"] <= 1e-6


def test_perturbation_regularisee():
    report = doi.regularized_perturbation(ExpSum1D(1.0, [0.0, 1.0], [0.5, 0.5]), [[1j]], [[0.3 + 1.5j]], 0.5)
    assert report["residual"] <= 1e-6
    with pytest.raises(ValueError):
        doi.regularized_perturbation(ExpSum1D.exponential(1.0), [[1j]], [[2j]], 0.0)
