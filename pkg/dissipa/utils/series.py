"""
Sommes partielles symétriques des séries d'échantillonnage

Les termes appariés t_n + t_{−n} des séries utilisées ici valent a/n² + O(1/n⁴)
plus des parties oscillantes e^{iθn}/n². Chaque point de contrôle N porte :
- la somme partielle brute S_N ;
- la moyenne A_N des S_k sur la fenêtre (N_prec, N] (la première fenêtre est
  (N/2, N]), ce qui amortit les oscillations ;
- la valeur extrapolée : A_N = S − c·h_N avec h_N = moyenne de ψ'(k + 1)
  sur la fenêtre (queue exacte de Σ 1/k²), c éliminé entre deux points.
La règle du plateau porte sur les valeurs extrapolées.
"""
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import polygamma

from ..config import config

logger = logging.getLogger(__name__)


def norm(value: np.ndarray) -> float:
    """Norme d'opérateur pour une matrice, max des modules sinon"""
    value = np.asarray(value)
    if value.size == 0:
        return 0.0
    if value.ndim == 2 and value.shape[0] == value.shape[1]:
        return float(np.linalg.norm(value, 2))
    return float(np.max(np.abs(value)))


def checkpoints(n_max: int, n_start: Optional[int] = None) -> List[int]:
    """N0, 2·N0, 4·N0, ... puis n_max"""
    if n_max < 0:
        raise ValueError(f"Troncature négative: {n_max}")
    n_start = config.SERIES_START if n_start is None else n_start
    points = []
    n = max(1, min(n_start, n_max))
    while n < n_max:
        points.append(n)
        n *= 2
    points.append(n_max)
    return points


def window_tail(first: int, last: int) -> float:
    """Moyenne de Σ_{j>k} 1/j² = ψ'(k + 1) pour k dans [first, last]"""
    ks = np.arange(first, last + 1, dtype=float)
    return float(np.mean(polygamma(1, ks + 1)))


def richardson(values: Sequence[np.ndarray], steps: Sequence[float]) -> Tuple[np.ndarray, float]:
    """
    Extrapolation polynomiale en h → 0 (tableau de Neville)

    Returns:
        (valeur extrapolée, écart avec l'extrapolation d'ordre inférieur)
    """
    table = [np.asarray(v) for v in values]
    h = [float(s) for s in steps]
    if len(table) != len(h) or not table:
        raise ValueError(f"{len(table)} valeurs pour {len(h)} pas")
    if len(table) == 1:
        return table[0], 0.0
    for level in range(1, len(table)):
        for i in range(len(table) - level):
            table[i] = (h[i] * table[i + 1] - h[i + level] * table[i]) / (h[i] - h[i + level])
    return table[0], norm(table[0] - table[1])


@dataclass
class SeriesResult:
    """Résultat d'une sommation symétrique avec son historique"""

    value: np.ndarray
    n_used: int
    converged: bool
    checkpoints: List[int] = field(default_factory=list)
    partial_sums: List[np.ndarray] = field(default_factory=list)
    extrapolated: List[np.ndarray] = field(default_factory=list)
    history: List[Dict] = field(default_factory=list)

    @property
    def raw_value(self) -> np.ndarray:
        return self.partial_sums[-1]

    def value_at(self, n: int) -> np.ndarray:
        """Valeur (extrapolée) au point de contrôle n"""
        try:
            return self.extrapolated[self.checkpoints.index(n)]
        except ValueError:
            raise KeyError(f"N={n} n'est pas un point de contrôle calculé") from None


def sum_symmetric(terms: Callable[[np.ndarray], np.ndarray],
                  n_max: int,
                  n_start: Optional[int] = None,
                  tol: Optional[Callable[[float], float]] = None,
                  plateau_steps: Optional[int] = None,
                  stop_early: bool = True,
                  n_min: int = 0,
                  extrapolate: bool = True) -> SeriesResult:
    """
    Somme Σ_{|n|<=N} terms(n) par blocs entre points de contrôle

    Args:
        terms: Fonction vectorisée, indices (m,) -> tableau (m, ...)
        n_max: Troncature maximale
        n_start: Premier point de contrôle
        tol: Tolérance du plateau en fonction de l'échelle de la valeur
        plateau_steps: Nombre d'écarts consécutifs sous la tolérance
        stop_early: Arrêt dès que le plateau est atteint (et N >= n_min)
        n_min: Troncature minimale avant arrêt
        extrapolate: Moyenne de fenêtre et élimination de la queue en 1/N

    Returns:
        SeriesResult (converged indique si le plateau a été atteint)
    """
    tol = config.series_tolerance if tol is None else tol
    plateau_steps = config.PLATEAU_STEPS if plateau_steps is None else plateau_steps

    total = np.sum(terms(np.array([0])), axis=0)
    result = SeriesResult(value=total, n_used=0, converged=False)
    previous_n = 0
    streak = 0
    previous_mean, previous_h = None, None

    for n in checkpoints(n_max, n_start):
        block = np.arange(previous_n + 1, n + 1)
        window_mean = total
        h = None
        if block.size:
            values = terms(np.concatenate([block, -block]))
            paired = values[:block.size] + values[block.size:]
            running = total + np.cumsum(paired, axis=0)
            first = max(previous_n + 1, n // 2 + 1) if previous_n == 0 else previous_n + 1
            window = running[first - previous_n - 1:]
            window_mean = np.mean(window, axis=0)
            h = window_tail(first, n)
            total = running[-1]

        entry = {"N": int(n), "raw_norm": norm(total)}
        if result.checkpoints:
            entry["raw_change"] = norm(total - result.partial_sums[-1])

        if not extrapolate:
            current = total
        elif previous_mean is not None and h is not None and previous_h != h:
            current = (previous_h * window_mean - h * previous_mean) / (previous_h - h)
        else:
            current = window_mean

        if result.extrapolated and (not extrapolate or len(result.extrapolated) > 1):
            change = norm(current - result.extrapolated[-1])
            entry["extrapolated_change"] = change
            streak = streak + 1 if change <= tol(norm(current)) else 0

        if h is not None:
            previous_mean, previous_h = window_mean, h
        result.checkpoints.append(int(n))
        result.partial_sums.append(total)
        result.extrapolated.append(current)
        result.history.append(entry)
        previous_n = n

        if stop_early and streak >= plateau_steps and n >= n_min:
            result.converged = True
            break

    if not result.converged and streak >= plateau_steps:
        result.converged = True
    result.value = result.extrapolated[-1]
    result.n_used = result.checkpoints[-1]
    logger.debug(f"Série: N={result.n_used}, plateau={'✅' if result.converged else '❌'}")
    return result
