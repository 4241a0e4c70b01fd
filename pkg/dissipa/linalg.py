"""
Algèbre linéaire complexe dense : décompositions et normes utilisées partout
"""
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Union

import numpy as np
import numpy.typing as npt
import scipy.linalg

from .config import config
from .exceptions import DefectiveMatrix, InvalidExponent, InvalidMatrix, SingularMatrix

logger = logging.getLogger(__name__)

ComplexMatrix = npt.NDArray[np.complex128]
MatrixLike = Union[ComplexMatrix, List[List[complex]], complex, float]


def as_matrix(A: MatrixLike, max_dim: Optional[int] = None) -> ComplexMatrix:
    """
    Convertit l'entrée en matrice carrée complexe finie

    Les scalaires deviennent des matrices 1×1.
    """
    max_dim = config.MAX_DIM if max_dim is None else max_dim
    arr = np.array(A, dtype=np.complex128)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise InvalidMatrix(f"Matrice non carrée: forme {arr.shape}")
    if arr.shape[0] > max_dim:
        raise InvalidMatrix(f"Dimension {arr.shape[0]} > {max_dim}")
    if not np.all(np.isfinite(arr)):
        raise InvalidMatrix("Entrées non finies (NaN/Inf)")
    return arr


def identity(dim: int) -> ComplexMatrix:
    return np.eye(dim, dtype=np.complex128)


@dataclass(frozen=True)
class SpectralData:
    """Valeurs propres, base de vecteurs propres à droite et son conditionnement"""

    eigenvalues: np.ndarray
    right_basis: ComplexMatrix
    basis_condition: float
    inverse_basis: ComplexMatrix

    def reconstruct(self, values: Optional[np.ndarray] = None) -> ComplexMatrix:
        """V·diag(values)·V^{-1} (values = valeurs propres par défaut)"""
        values = self.eigenvalues if values is None else values
        return (self.right_basis * values) @ self.inverse_basis


def operator_norm(A: MatrixLike) -> float:
    """Plus grande valeur singulière"""
    A = np.atleast_2d(np.asarray(A, dtype=np.complex128))
    if A.size == 0:
        return 0.0
    return float(scipy.linalg.svdvals(A)[0])


def schatten_norm(A: MatrixLike, p: float) -> float:
    """
    Norme de Schatten-von Neumann

    Args:
        A: Matrice
        p: Exposant, p >= 1 ou np.inf

    Returns:
        (Σ σ_i^p)^{1/p}, norme d'opérateur pour p = ∞
    """
    if p is None or np.isnan(p) or p < 1:
        raise InvalidExponent(f"Exposant de Schatten invalide: p={p}")
    A = np.atleast_2d(np.asarray(A, dtype=np.complex128))
    s = scipy.linalg.svdvals(A)
    if s.size == 0 or s[0] == 0.0:
        return 0.0
    if np.isinf(p):
        return float(s[0])
    # Mise à l'échelle par σ_max pour éviter les débordements en p grand
    return float(s[0] * np.sum((s / s[0]) ** p) ** (1.0 / p))


def eig(A: MatrixLike, cond_cap: Optional[float] = None) -> SpectralData:
    """
    Décomposition spectrale d'une matrice générale (non normale)

    Args:
        A: Matrice carrée
        cond_cap: Plafond du conditionnement de la base (config.COND_CAP par défaut)

    Returns:
        SpectralData

    Raises:
        DefectiveMatrix: base propre inexistante ou trop mal conditionnée
    """
    A = as_matrix(A)
    cond_cap = config.COND_CAP if cond_cap is None else cond_cap

    eigenvalues, V = scipy.linalg.eig(A)
    V = V / np.linalg.norm(V, axis=0, keepdims=True)
    condition = float(np.linalg.cond(V))
    if not np.isfinite(condition) or condition > cond_cap:
        logger.debug(f"Base propre refusée: cond={condition:.3e} > {cond_cap:.1e}")
        raise DefectiveMatrix(
            f"Matrice (presque) défective: conditionnement de la base {condition:.3e}",
            condition=condition,
        )

    V_inv = np.linalg.inv(V)
    residual = operator_norm(A @ V - V * eigenvalues)
    if residual > 1e-9 * max(operator_norm(A), 1.0):
        raise DefectiveMatrix(
            f"Reconstruction spectrale imprécise: résidu {residual:.3e}",
            condition=condition,
        )
    return SpectralData(
        eigenvalues=eigenvalues.astype(np.complex128),
        right_basis=V.astype(np.complex128),
        basis_condition=max(condition, 1.0),
        inverse_basis=V_inv.astype(np.complex128),
    )


def solve(A: MatrixLike, B: MatrixLike, cond_cap: Optional[float] = None) -> ComplexMatrix:
    """
    Résout AX = B

    Raises:
        SingularMatrix: si cond(A) dépasse le plafond ou si le résidu est trop grand
    """
    A = as_matrix(A)
    B = np.asarray(B, dtype=np.complex128)
    cond_cap = config.COND_CAP if cond_cap is None else cond_cap

    condition = float(np.linalg.cond(A))
    if not np.isfinite(condition) or condition > cond_cap:
        raise SingularMatrix(f"Système singulier: conditionnement {condition:.3e}", condition=condition)
    try:
        X = scipy.linalg.solve(A, B)
    except (scipy.linalg.LinAlgError, ValueError) as e:
        raise SingularMatrix(f"Échec de la résolution: {e}", condition=condition) from e

    residual = operator_norm(np.atleast_2d(A @ X - B))
    scale = max(operator_norm(A) * operator_norm(np.atleast_2d(X)), operator_norm(np.atleast_2d(B)))
    if residual > 1e-10 * scale + config.TOL_ABS:
        raise SingularMatrix(f"Résidu de résolution trop grand: {residual:.3e}", residual=residual)
    return X


def inverse(A: MatrixLike, cond_cap: Optional[float] = None) -> ComplexMatrix:
    A = as_matrix(A)
    return solve(A, identity(A.shape[0]), cond_cap=cond_cap)


def commutator(A: ComplexMatrix, B: ComplexMatrix) -> ComplexMatrix:
    return A @ B - B @ A


def matrix_to_record(A: MatrixLike) -> Dict:
    """Enregistrement JSON {"dim", "entries": [[[re, im], ...], ...]} (ligne par ligne)"""
    A = as_matrix(A)
    return {
        "dim": int(A.shape[0]),
        "entries": [[[float(z.real), float(z.imag)] for z in row] for row in A],
    }


def matrix_from_record(record: Dict) -> ComplexMatrix:
    """Inverse de matrix_to_record"""
    try:
        dim = int(record["dim"])
        entries = np.array(record["entries"], dtype=float)
    except (KeyError, TypeError, ValueError) as e:
        raise InvalidMatrix(f"Enregistrement de matrice invalide: {e}") from e
    if entries.shape != (dim, dim, 2):
        raise InvalidMatrix(f"Forme des entrées {entries.shape} incompatible avec dim={dim}")
    return as_matrix(entries[..., 0] + 1j * entries[..., 1])
