"""Tests des matrices dissipatives, de la transformée de Cayley et du générateur d'instances"""
import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st

from dissipa.dissipative import (
    STYLES,
    cayley,
    certify,
    check_commuting,
    gen_pair,
    inverse_cayley,
    iota,
    is_dissipative,
    resolvent,
    resolvent_identity_check,
)
from dissipa.exceptions import NotCommuting, NotContraction, NotDissipative, UnitEigenvalueAtOne
from dissipa.linalg import operator_norm
from dissipa.verification import random_dissipative


def test_certify_scalaire():
    L = certify(1j)
    assert L.dim == 1
    assert L.certified_margin == pytest.approx(1.0)


def test_certify_refuse_demi_plan_inferieur():
    with pytest.raises(NotDissipative) as excinfo:
        certify(-1j)
    assert excinfo.value.margin == pytest.approx(-1.0)


def test_jordan_dissipatif(jordan):
    check = is_dissipative(jordan)
    assert check.dissipative
    assert check.certified_margin == pytest.approx(0.5)


def test_cayley_scalaires():
    assert cayley(1j)[0, 0] == pytest.approx(0.0)
    assert cayley(0.0)[0, 0] == pytest.approx(-1.0)
    assert inverse_cayley([[-1.0]]).A[0, 0] == pytest.approx(0.0)


def test_cayley_jordan(jordan):
    """(L − iI)(L + iI)^{-1} = N/(2i) pour L = iI + N"""
    T = cayley(jordan)
    assert np.allclose(T, np.array([[0, 1], [0, 0]]) / 2j)


def test_inverse_cayley_valeur_propre_un():
    with pytest.raises(UnitEigenvalueAtOne):
        inverse_cayley([[1.0]])


def test_cayley_valeur_propre_proche_de_un():
    # ‖L‖ grand : 1 − T ≈ 2i/λ, en dessous de la tolérance absolue
    with pytest.raises(UnitEigenvalueAtOne) as excinfo:
        cayley([[1e12 + 1j]])
    assert excinfo.value.details["gap"] <= 1e-10


def test_inverse_cayley_non_contractante():
    with pytest.raises(NotContraction):
        inverse_cayley([[2.0]])


def test_aller_retour_cayley(rng):
    for dim in (1, 3, 8):
        L = certify(random_dissipative(rng, dim))
        back = inverse_cayley(cayley(L))
        assert operator_norm(back.A - L.A) <= 1e-9 * (1 + L.norm)


@seed(7)
@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 31 - 1), st.integers(1, 6))
def test_cayley_contractante(draw_seed, dim):
    L = random_dissipative(np.random.default_rng(draw_seed), dim)
    assert operator_norm(cayley(L)) <= 1 + 1e-10


def test_resolvent_et_iota(rng):
    L = certify(random_dissipative(rng, 4))
    M = certify(random_dissipative(rng, 4))
    assert np.allclose(resolvent(L) @ (L.A + 1j * np.eye(4)), np.eye(4))
    assert np.allclose(iota(L), L.A @ np.linalg.inv(np.eye(4) - 1j * L.A))
    assert resolvent_identity_check(L, M) <= 1e-9 * (1 + L.norm + M.norm)


def test_paire_non_commutative():
    L = 1j * np.eye(2) + 0.5 * np.array([[0, 1], [0, 0]])
    M = 1j * np.eye(2) + 0.5 * np.array([[0, 0], [1, 0]])
    with pytest.raises(NotCommuting) as excinfo:
        check_commuting(L, M)
    assert excinfo.value.commutator_residual > 0.1


@pytest.mark.parametrize("style", STYLES)
def test_gen_pair_commutative(style):
    P1, P2 = gen_pair(11, 5, style)
    for P in (P1, P2):
        assert P.dim == 5
        assert operator_norm(P.L.A @ P.M.A - P.M.A @ P.L.A) <= 1e-9 * (1 + P.L.norm * P.M.norm)
        assert P.L.certified_margin >= 0
        assert P.M.certified_margin >= 0


def test_gen_pair_deterministe():
    first = gen_pair(3, 4, "polynomial", 0.2)
    second = gen_pair(3, 4, "polynomial", 0.2)
    other = gen_pair(4, 4, "polynomial", 0.2)
    for a, b in zip(first, second):
        assert np.array_equal(a.L.A, b.L.A) and np.array_equal(a.M.A, b.M.A)
    assert not np.allclose(first[0].L.A, other[0].L.A)


def test_gen_pair_ecart_controle():
    P1, P2 = gen_pair(5, 3, "polynomial", 0.0)
    assert np.allclose(P1.L.A, P2.L.A)
    assert np.allclose(P1.M.A, P2.M.A)


@pytest.mark.parametrize("kwargs", [{"style": "random"}, {"dim": 0}, {"dim": 65}])
def test_gen_pair_parametres_invalides(kwargs):
    params = {"seed": 0, "dim": 3, **kwargs}
    with pytest.raises(ValueError):
        gen_pair(**params)
