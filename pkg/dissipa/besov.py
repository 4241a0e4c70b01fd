"""
Décomposition de Littlewood–Paley et norme de Besov des sommes d'exponentielles

La convolution par W_n multiplie chaque coefficient c_j par w(‖ξ_j‖/2^n) :
aucune quadrature n'est nécessaire.
"""
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple, Union

import numpy as np
from scipy.special import expit

from .anchors import anchor
from .bandfun import ExpSum1D, ExpSum2D, sup_norm

logger = logging.getLogger(__name__)

ExpSum = Union[ExpSum1D, ExpSum2D]


def smooth_step(u) -> np.ndarray:
    """s(u) = B(u)/(B(u) + B(1 − u)), B(u) = exp(−1/u) pour u > 0"""
    u = np.asarray(u, dtype=float)
    inside = (u > 0) & (u < 1)
    safe = np.where(inside, u, 0.5)
    with np.errstate(over="ignore"):
        value = expit(1.0 / (1.0 - safe) - 1.0 / safe)
    return np.where(inside, value, np.where(u >= 1, 1.0, 0.0))


@dataclass(frozen=True)
class WindowW:
    """w(t) = s(2t − 1) sur [1/2, 1], 1 − s(t − 1) sur [1, 2], 0 ailleurs"""

    profile: Callable[[np.ndarray], np.ndarray] = smooth_step

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        rising = self.profile(2 * t - 1)
        falling = 1.0 - self.profile(t - 1)
        value = np.where(t <= 1, rising, falling)
        return np.where((t <= 0.5) | (t >= 2), 0.0, value)


def build_w() -> WindowW:
    return WindowW()


def check_window(window: Optional[WindowW] = None, points: int = 10_000) -> Dict:
    """
    Support, réflexion w(t) = 1 − w(t/2) sur [1, 2] et partition de l'unité
    sur des t log-répartis dans [1e−3, 1e3]
    """
    window = build_w() if window is None else window
    dense = np.linspace(0.0, 4.0, 40_001)
    values = window(dense)
    outside = (dense <= 0.5) | (dense >= 2)
    support = float(np.max(np.abs(values[outside])))
    positive = bool(np.all(values >= 0))

    t = np.linspace(1.0, 2.0, 10_001)
    reflection = float(np.max(np.abs(window(t) - (1 - window(t / 2)))))

    t = np.logspace(-3, 3, points)
    partition = np.zeros_like(t)
    n_max = int(np.ceil(np.log2(t.max()))) + 2
    for n in range(-n_max, n_max + 1):
        partition += window(t / 2.0 ** n)
    partition_error = float(np.max(np.abs(partition - 1)))

    ok = positive and support == 0.0 and reflection <= 1e-12 and partition_error <= 1e-12
    return {
        "anchor": anchor("window-partition"),
        "positive": positive,
        "support_leak": support,
        "reflection_error": reflection,
        "partition_error": partition_error,
        "ok": bool(ok),
    }


@dataclass(frozen=True, eq=False)
class BandDecomposition:
    """f = constante + Σ_n f_n, chaque f_n de largeur de bande 2^{n+1}"""

    bands: List[Tuple[int, ExpSum]]
    constant: complex = 0.0
    dims: int = 1
    weights: Dict[int, np.ndarray] = field(default_factory=dict)

    def reconstruct(self, sigma: float) -> ExpSum:
        """Somme des bandes et de la constante, en largeur de bande sigma"""
        cls = ExpSum1D if self.dims == 1 else ExpSum2D
        zero = np.zeros((1,) if self.dims == 1 else (1, 2))
        total = cls(sigma, zero, [self.constant])
        for _, f_n in self.bands:
            total = total + (f_n.with_sigma(sigma) if self.dims == 1 else ExpSum2D(sigma, f_n.freqs, f_n.coeffs))
        return total.merged()


def _radii(f: ExpSum) -> np.ndarray:
    if f.dims == 1:
        return np.abs(f.freqs)
    return np.linalg.norm(f.freqs, axis=1)


def decompose(f: ExpSum, window: Optional[WindowW] = None) -> BandDecomposition:
    """
    Bandes f_n = f ∗ W_n : coefficient c_j pondéré par w(‖ξ_j‖/2^n)

    Le terme de fréquence nulle est mis à part comme constante.
    """
    window = build_w() if window is None else window
    f = f.merged()
    radii = _radii(f)
    zero = radii == 0
    constant = complex(np.sum(f.coeffs[zero]))
    if not np.any(~zero):
        return BandDecomposition(bands=[], constant=constant, dims=f.dims)

    logs = np.floor(np.log2(radii[~zero])).astype(int)
    candidates = range(int(logs.min()) - 1, int(logs.max()) + 2)

    bands, weights = [], {}
    for n in candidates:
        w = window(radii / 2.0 ** n)
        w[zero] = 0.0
        keep = w > 0
        if not np.any(keep):
            continue
        sigma = 2.0 ** (n + 1)
        coeffs = f.coeffs[keep] * w[keep]
        if f.dims == 1:
            band = ExpSum1D(sigma, f.freqs[keep], coeffs)
        else:
            band = ExpSum2D(sigma, f.freqs[keep], coeffs)
        bands.append((n, band))
        weights[n] = w
    logger.debug(f"Décomposition: {len(bands)} bande(s), n ∈ {[n for n, _ in bands]}")
    return BandDecomposition(bands=bands, constant=constant, dims=f.dims, weights=weights)


def reconstruction_error(f: ExpSum, decomposition: Optional[BandDecomposition] = None) -> float:
    """max_j |Σ_n coefficients de f_n − c_j| à fréquence égale"""
    merged = f.merged()
    decomposition = decompose(merged) if decomposition is None else decomposition
    rebuilt = decomposition.reconstruct(merged.sigma)
    error = 0.0
    for j in range(merged.coeffs.size):
        key = (merged.freqs[j],) if merged.dims == 1 else tuple(merged.freqs[j])
        error = max(error, abs(rebuilt.coefficient_at(*key) - merged.coeffs[j]))
    return float(error)


def besov_norm(f: ExpSum, window: Optional[WindowW] = None) -> Dict:
    """
    Σ_n 2^n‖f_n‖ : majorant par coefficients (upper) et estimation sur grille (grid)
    """
    decomposition = decompose(f, window)
    upper, grid = 0.0, 0.0
    bands = []
    for n, f_n in decomposition.bands:
        norm = sup_norm(f_n)
        upper += 2.0 ** n * norm.upper
        grid += 2.0 ** n * norm.grid_estimate
        bands.append({"n": n, "upper": norm.upper, "grid": norm.grid_estimate})
    return {
        "upper": float(upper),
        "grid": float(grid),
        "constant": decomposition.constant,
        "bands": bands,
    }
