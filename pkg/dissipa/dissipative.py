"""
Matrices dissipatives : certification, transformée de Cayley, commutation
et génération reproductible d'instances de test
"""
import logging
from dataclasses import dataclass
from typing import NamedTuple, Optional, Tuple, Union

import numpy as np
import scipy.linalg
from scipy.stats import unitary_group

from .config import config
from .exceptions import (
    NearSingularShift,
    NotCommuting,
    NotContraction,
    NotDissipative,
    SingularMatrix,
    UnitEigenvalueAtOne,
)
from .linalg import ComplexMatrix, MatrixLike, as_matrix, commutator, identity, operator_norm, solve

logger = logging.getLogger(__name__)

STYLES = ("normal", "polynomial", "nilpotent-shift")


class DissipativityCheck(NamedTuple):
    certified_margin: float
    dissipative: bool


@dataclass(frozen=True)
class DissipativeMatrix:
    """Matrice dont la partie imaginaire (A − A*)/2i est positive (à la tolérance près)"""

    A: ComplexMatrix
    certified_margin: float

    @property
    def dim(self) -> int:
        return self.A.shape[0]

    @property
    def norm(self) -> float:
        return operator_norm(self.A)


@dataclass(frozen=True)
class CommutingDissipativePair:
    """Paire (L, M) de matrices dissipatives qui commutent"""

    L: DissipativeMatrix
    M: DissipativeMatrix
    commutator_residual: float
    resolvent_residual: float = 0.0
    cayley_residual: float = 0.0

    @property
    def dim(self) -> int:
        return self.L.dim


ArgLike = Union[DissipativeMatrix, MatrixLike]


def hermitian_imaginary_part(A: ComplexMatrix) -> ComplexMatrix:
    """(A − A*)/(2i)"""
    return (A - A.conj().T) / 2j


def is_dissipative(A: MatrixLike, tol: Optional[float] = None) -> DissipativityCheck:
    """
    Certifie Im <Ax, x> >= 0 via la plus petite valeur propre de (A − A*)/(2i)

    Returns:
        (certified_margin, booléen)
    """
    A = as_matrix(A)
    tol = config.tolerance(operator_norm(A)) if tol is None else tol
    H = hermitian_imaginary_part(A)
    margin = float(scipy.linalg.eigvalsh((H + H.conj().T) / 2)[0])
    return DissipativityCheck(certified_margin=margin, dissipative=margin >= -tol)


def certify(A: ArgLike, tol: Optional[float] = None) -> DissipativeMatrix:
    """
    Construit une DissipativeMatrix (les scalaires deviennent des matrices 1×1)

    Raises:
        NotDissipative: si la marge certifiée est < −tol
    """
    if isinstance(A, DissipativeMatrix):
        return A
    A = as_matrix(A)
    check = is_dissipative(A, tol)
    if not check.dissipative:
        raise NotDissipative(
            f"Matrice non dissipative: marge {check.certified_margin:.3e}",
            margin=check.certified_margin,
        )

    # Conséquence : spectre dans le demi-plan supérieur fermé
    eigenvalues = scipy.linalg.eigvals(A)
    slack = max(config.tolerance(operator_norm(A)), 1e-6 * max(operator_norm(A), 1.0))
    if eigenvalues.size and eigenvalues.imag.min() < -slack:
        logger.warning(f"⚠️ Valeur propre sous l'axe réel: Im = {eigenvalues.imag.min():.3e}")
    return DissipativeMatrix(A=A, certified_margin=check.certified_margin)


def resolvent(L: ArgLike) -> ComplexMatrix:
    """(L + iI)^{-1}"""
    L = certify(L)
    try:
        return solve(L.A + 1j * identity(L.dim), identity(L.dim))
    except SingularMatrix as e:
        raise NearSingularShift(f"L + iI presque singulière: {e}") from e


def cayley(L: ArgLike) -> ComplexMatrix:
    """
    Transformée de Cayley T = (L − iI)(L + iI)^{-1}, avec 1 ∉ σ(T)

    Raises:
        NearSingularShift: si L + iI est presque singulière
        UnitEigenvalueAtOne: si la plus petite valeur singulière de I − T est nulle à la tolérance près
    """
    L = certify(L)
    I = identity(L.dim)
    try:
        # (L − iI) et (L + iI)^{-1} commutent
        T = solve(L.A + 1j * I, L.A - 1j * I)
    except SingularMatrix as e:
        raise NearSingularShift(f"L + iI presque singulière: {e}") from e

    gap = float(scipy.linalg.svdvals(I - T).min())
    if gap <= config.tolerance(1.0):
        raise UnitEigenvalueAtOne(f"1 est (presque) valeur propre de T: σ_min(I − T) = {gap:.3e}", gap=gap)
    norm_T = operator_norm(T)
    if norm_T > 1 + 1e-10 * (1 + L.norm):
        logger.warning(f"⚠️ Transformée de Cayley non contractante: ‖T‖ = {norm_T:.12f}")
    return T


def inverse_cayley(T: MatrixLike, tol: Optional[float] = None) -> DissipativeMatrix:
    """
    Transformée de Cayley inverse L = i(I + T)(I − T)^{-1}

    Raises:
        NotContraction: si ‖T‖ > 1 + tol
        UnitEigenvalueAtOne: si I − T est numériquement singulière
    """
    T = as_matrix(T)
    tol = config.tolerance(1.0) if tol is None else tol
    norm_T = operator_norm(T)
    if norm_T > 1 + tol:
        raise NotContraction(f"‖T‖ = {norm_T:.12f} > 1", norm=norm_T)

    I = identity(T.shape[0])
    try:
        L = 1j * solve(I - T, I + T)
    except SingularMatrix as e:
        raise UnitEigenvalueAtOne(f"1 est (presque) valeur propre de T: {e}") from e
    norm_L = operator_norm(L)
    return certify(L, tol=config.tolerance(norm_L) * (1 + norm_L))


def check_commuting(L: ArgLike, M: ArgLike, tol: Optional[float] = None) -> CommutingDissipativePair:
    """
    Vérifie la commutation de L et M, de leurs résolvantes et de leurs transformées de Cayley

    Raises:
        NotCommuting: avec les trois résidus
    """
    L, M = certify(L), certify(M)
    if L.dim != M.dim:
        raise NotCommuting(f"Dimensions différentes: {L.dim} et {M.dim}")
    tol = config.COMMUTE_TOL if tol is None else tol

    def relative(A: ComplexMatrix, B: ComplexMatrix) -> float:
        scale = operator_norm(A) * operator_norm(B)
        return operator_norm(commutator(A, B)) / max(scale, config.TOL_ABS)

    commutator_residual = operator_norm(commutator(L.A, M.A))
    commutator_relative = commutator_residual / max(L.norm * M.norm, config.TOL_ABS)
    resolvent_residual = relative(resolvent(L), resolvent(M))
    cayley_residual = relative(cayley(L), cayley(M))

    logger.debug(
        f"Commutation: LM−ML={commutator_relative:.2e}, "
        f"résolvantes={resolvent_residual:.2e}, Cayley={cayley_residual:.2e}"
    )
    if max(commutator_relative, resolvent_residual, cayley_residual) > tol:
        raise NotCommuting(
            "La paire ne commute pas",
            commutator_residual=commutator_residual,
            resolvent_residual=resolvent_residual,
            cayley_residual=cayley_residual,
        )
    return CommutingDissipativePair(
        L=L,
        M=M,
        commutator_residual=commutator_residual,
        resolvent_residual=resolvent_residual,
        cayley_residual=cayley_residual,
    )


def iota(X: ArgLike) -> ComplexMatrix:
    """ι(X) = X(I − iX)^{-1}"""
    X = certify(X)
    return solve(identity(X.dim) - 1j * X.A, X.A)


def resolvent_identity_check(L: ArgLike, M: ArgLike) -> float:
    """
    ‖ι(L) − ι(M) − (I − iL)^{-1}(L − M)(I − iM)^{-1}‖
    """
    L, M = certify(L), certify(M)
    I = identity(L.dim)
    left = solve(I - 1j * L.A, L.A - M.A)
    rhs = solve((I - 1j * M.A).T, left.T).T
    return operator_norm(iota(L) - iota(M) - rhs)


# ---------------------------------------------------------------------------
# Génération d'instances
# ---------------------------------------------------------------------------

def _complex_normal(rng: np.random.Generator, size) -> np.ndarray:
    return (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / np.sqrt(2)


def _unit_norm(X: np.ndarray) -> np.ndarray:
    norm = operator_norm(X)
    return X / norm if norm > 0 else X


def _polynomial(coeffs: np.ndarray, G: np.ndarray) -> np.ndarray:
    """Σ coeffs[k] G^k (schéma de Horner)"""
    result = coeffs[-1] * identity(G.shape[0])
    for c in coeffs[-2::-1]:
        result = result @ G + c * identity(G.shape[0])
    return result


def _draw_normal(rng, dim, spread):
    U = unitary_group.rvs(dim, random_state=rng) if dim > 1 else np.ones((1, 1), dtype=complex)
    a, b = _complex_normal(rng, dim), _complex_normal(rng, dim)
    H = _complex_normal(rng, (dim, dim))
    H = _unit_norm((H + H.conj().T) / 2)
    U2 = U @ scipy.linalg.expm(1j * spread * H)
    a2 = a + spread * _complex_normal(rng, dim)
    b2 = b + spread * _complex_normal(rng, dim)
    A1, B1 = (U * a) @ U.conj().T, (U * b) @ U.conj().T
    A2, B2 = (U2 * a2) @ U2.conj().T, (U2 * b2) @ U2.conj().T
    return A1, B1, A2, B2


def _draw_polynomial(rng, dim, spread):
    G = _complex_normal(rng, (dim, dim)) / np.sqrt(dim)
    E = _unit_norm(_complex_normal(rng, (dim, dim)))
    p, q = _complex_normal(rng, 3), _complex_normal(rng, 3)
    G2 = G + spread * E
    return _polynomial(p, G), _polynomial(q, G), _polynomial(p, G2), _polynomial(q, G2)


def _draw_nilpotent_shift(rng, dim, spread):
    N = _unit_norm(np.triu(_complex_normal(rng, (dim, dim)), k=1))
    E = _unit_norm(np.triu(_complex_normal(rng, (dim, dim)), k=1))
    p, q = _complex_normal(rng, 3), _complex_normal(rng, 3)
    N2 = N + spread * E
    p2, q2 = p.copy(), q.copy()
    p2[0] += spread * rng.standard_normal()
    q2[0] += spread * rng.standard_normal()
    return _polynomial(p, N), _polynomial(q, N), _polynomial(p2, N2), _polynomial(q2, N2)


def gen_pair(seed: int, dim: int, style: str = "polynomial", spread: float = 0.1,
             shift: Optional[float] = None) -> Tuple[CommutingDissipativePair, CommutingDissipativePair]:
    """
    Génère deux paires commutatives dissipatives, déterministes en (seed, dim, style)

    Args:
        seed: Graine du générateur
        dim: Dimension (<= 64)
        style: "normal", "polynomial" ou "nilpotent-shift"
        spread: Taille de la perturbation entre les deux paires
        shift: Marge imaginaire ajoutée (config.GEN_SHIFT par défaut)

    Returns:
        (P1, P2)
    """
    if style not in STYLES:
        raise ValueError(f"Style inconnu: {style} (attendu: {', '.join(STYLES)})")
    if not 1 <= dim <= config.GEN_MAX_DIM:
        raise ValueError(f"Dimension hors limites: {dim} (1..{config.GEN_MAX_DIM})")
    shift = config.GEN_SHIFT if shift is None else shift

    rng = np.random.default_rng(seed)
    draw = {"normal": _draw_normal, "polynomial": _draw_polynomial,
            "nilpotent-shift": _draw_nilpotent_shift}[style]
    A1, B1, A2, B2 = draw(rng, dim, spread)

    # Décalage commun ic·I avec c >= ‖A‖ : la partie imaginaire devient positive
    I = identity(dim)
    c_L = max(operator_norm(A1), operator_norm(A2)) + shift
    c_M = max(operator_norm(B1), operator_norm(B2)) + shift
    P1 = check_commuting(A1 + 1j * c_L * I, B1 + 1j * c_M * I)
    P2 = check_commuting(A2 + 1j * c_L * I, B2 + 1j * c_M * I)
    logger.debug(f"Instance générée: style={style}, dim={dim}, seed={seed}")
    return P1, P2
