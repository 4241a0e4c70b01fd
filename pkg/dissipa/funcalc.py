"""
Calcul fonctionnel f(L) et f(L, M) pour matrices dissipatives

Routes :
- spectral : V·diag(f(λ))·V^{-1} (une matrice), Schur–Parlett commun (paire commutative)
- taylor-cayley : coefficients de g = f∘ω par FFT sur un cercle de rayon ρ < 1,
  puis Σ ĝ(k) T^k avec T la transformée de Cayley (ou Σ ĝ(j,k) T^j R^k)
- anchor-series : paires non commutatives via la forme ancrée
"""
import logging
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Tuple, Union

import numpy as np
import scipy.linalg

from .bandfun import ExpSum1D, ExpSum2D, anchor_expansion
from .config import config
from .dissipative import ArgLike, CommutingDissipativePair, DissipativeMatrix, cayley, certify, check_commuting
from .exceptions import DefectiveMatrix, NotCommuting, RouteUnavailable, SeriesNotConverged
from .haagerup import FactorFamily, HaagerupExpansion
from .linalg import ComplexMatrix, eig, identity, operator_norm, solve
from .utils.series import SeriesResult, richardson, sum_symmetric

logger = logging.getLogger(__name__)

ROUTES = ("auto", "spectral", "taylor-cayley")

# Combinaison générique L + cM pour la triangularisation simultanée
_PAIR_MIX = 0.6180339887498949 + 0.3141592653589793j

Evaluable1D = Union[ExpSum1D, Callable]
Evaluable2D = Union[ExpSum2D, Callable]


@dataclass(frozen=True, eq=False)
class CalculusResult:
    """Valeur f(L) ou f(L, M) avec la route utilisée et une estimation du résidu"""

    value: ComplexMatrix
    route: str
    residual_estimate: float
    cross_check: Optional[float] = None
    details: Dict = field(default_factory=dict)


def as_family(f, arity: int) -> FactorFamily:
    if isinstance(f, (ExpSum1D, ExpSum2D)):
        if f.dims != arity:
            raise TypeError(f"Fonction de {f.dims} variable(s) appliquée à un argument d'arité {arity}")
        return f.as_family()
    if isinstance(f, FactorFamily):
        return f
    if callable(f):
        return FactorFamily.from_callables([f], arity=arity, label=getattr(f, "__name__", "callable"))
    raise TypeError(f"Fonction non évaluable: {type(f).__name__}")


def _chunks(indices: np.ndarray, points_per_function: int):
    size = max(1, config.TAYLOR_CHUNK_POINTS // max(points_per_function, 1))
    for start in range(0, indices.size, size):
        yield indices[start:start + size]


def _next_pow2(x: float) -> int:
    return 1 << max(int(np.ceil(np.log2(max(x, 1.0)))), 0)


# ---------------------------------------------------------------------------
# Plans d'évaluation
# ---------------------------------------------------------------------------

class SpectralPlan:
    """V·diag(h(λ))·V^{-1} pour toute une famille h_n"""

    route = "spectral"
    arity = 1

    def __init__(self, L: DissipativeMatrix, cond_cap: Optional[float] = None):
        self.L = L
        self.spectral = eig(L.A, cond_cap=cond_cap)
        self.residual_estimate = 0.0

    def apply(self, family: FactorFamily, indices) -> np.ndarray:
        indices = np.atleast_1d(indices)
        values = family(indices, self.spectral.eigenvalues)
        V, V_inv = self.spectral.right_basis, self.spectral.inverse_basis
        scale = float(np.max(np.abs(values))) if values.size else 0.0
        self.residual_estimate = (np.finfo(float).eps * self.spectral.basis_condition
                                  * self.L.dim * max(scale, 1.0))
        return np.einsum("ik,mk,kj->mij", V, values, V_inv)


def _check_cayley_spectrum(rho_T: float):
    if rho_T >= 1 - config.TAYLOR_SPECTRAL_MARGIN:
        raise RouteUnavailable(f"Spectre de Cayley trop proche du cercle unité: ρ_T = {rho_T:.6f}")


def _fixed_parameters(max_nodes: int):
    """
    Cercle fixe ρ = TAYLOR_RADIUS, P = max_nodes nœuds

    K est limité par l'amplification ρ^{-k} des erreurs d'arrondi de la FFT.
    """
    rho, P = config.TAYLOR_RADIUS, int(max_nodes)
    rounding = np.log(config.TAYLOR_TAIL_TOL / np.finfo(float).eps) / -np.log(rho)
    K = int(max(8, min(P // 2, np.floor(rounding))))
    return rho, K, P


def _taylor_parameters(rho_T: float, dim: int, max_nodes: int):
    """Rayon ρ adapté, nombre de coefficients K et de nœuds P pour un rayon spectral ρ_T de T"""
    _check_cayley_spectrum(rho_T)
    rho = max(np.sqrt(rho_T), config.TAYLOR_RADIUS_MIN)
    decay = np.log(max(rho_T, 1e-3))
    K = int(np.ceil(np.log(1e-17) / decay)) + 2 * dim
    K = max(K, 8)
    aliasing = (37.0 + np.log(1.0 / (1.0 - rho_T))) / -np.log(rho)
    P = _next_pow2(max(2 * K, aliasing, 64))
    if P > max_nodes:
        raise RouteUnavailable(f"Route Taylor–Cayley: {P} nœuds requis > {max_nodes}")
    return rho, K, P


def _powers(T: ComplexMatrix, K: int) -> np.ndarray:
    powers = np.empty((K,) + T.shape, dtype=np.complex128)
    powers[0] = identity(T.shape[0])
    for k in range(1, K):
        powers[k] = powers[k - 1] @ T
    return powers


def _circle_nodes(rho: float, P: int) -> np.ndarray:
    """ω(ζ) = i(1 + ζ)/(1 − ζ) aux nœuds ζ_j = ρ e^{2πij/P}"""
    zeta = rho * np.exp(2j * np.pi * np.arange(P) / P)
    return 1j * (1 + zeta) / (1 - zeta)


def _spectral_radius(T: ComplexMatrix) -> float:
    return float(np.max(np.abs(scipy.linalg.eigvals(T))))


class TaylorPlan:
    """
    g_r(T) = Σ_k r^k ĝ_n(k) T^k, coefficients par FFT de g_n = h_n∘ω sur |ζ| = ρ

    Par défaut ρ = 0.95 et 4096 nœuds : série directe (r = 1) si elle se referme,
    sinon g_r(T) pour r ∈ {0.9, 0.99, 0.999} puis extrapolation de Richardson
    en r → 1. Rayon adapté au spectre de T si TAYLOR_ADAPTIVE, ou quand ces
    paramètres ne suffisent pas.
    """

    route = "taylor-cayley"
    arity = 1

    def __init__(self, L: DissipativeMatrix, max_nodes: Optional[int] = None, adaptive: Optional[bool] = None):
        self.max_nodes = config.TAYLOR_NODES if max_nodes is None else max_nodes
        self.L = L
        self.T = cayley(L)
        self.rho_T = _spectral_radius(self.T)
        _check_cayley_spectrum(self.rho_T)
        self.adaptive = config.TAYLOR_ADAPTIVE if adaptive is None else adaptive
        if self.adaptive or not self._use_fixed():
            self._use_adaptive()
        self.residual_estimate = 0.0

    def _setup(self, rho: float, K: int, P: int, r_sequence=(1.0,)):
        self.rho, self.K, self.P = rho, K, P
        self.r_sequence = tuple(r_sequence)
        self.nodes = _circle_nodes(rho, P)
        self.powers = _powers(self.T, K)
        self.power_norms = np.array([operator_norm(X) for X in self.powers])
        self.scaling = rho ** -np.arange(K)
        logger.debug(f"Plan Taylor–Cayley: ρ_T={self.rho_T:.4f}, ρ={rho:.4f}, K={K}, P={P}, "
                     f"r={self.r_sequence}")

    def _use_fixed(self) -> bool:
        self._setup(*_fixed_parameters(self.max_nodes))
        closing = self.power_norms[-1]
        if closing <= config.TAYLOR_TAIL_TOL:
            return True
        usable = [r for r in config.TAYLOR_R_SEQUENCE if r ** (self.K - 1) * closing <= config.TAYLOR_TAIL_TOL]
        if len(usable) < 2:
            return False
        self.r_sequence = tuple(usable)
        return True

    def _use_adaptive(self):
        self._setup(*_taylor_parameters(self.rho_T, self.L.dim, self.max_nodes))
        self.adaptive = True

    def _evaluate(self, family: FactorFamily, indices: np.ndarray):
        out = np.empty((indices.size,) + self.T.shape, dtype=np.complex128)
        k = np.arange(self.K)
        steps = [1.0 - r for r in self.r_sequence]
        residual = 0.0
        position = 0
        for chunk in _chunks(indices, self.P):
            values = family(chunk, self.nodes)
            coeffs = np.fft.fft(values, axis=1)[:, :self.K] / self.P * self.scaling
            estimates = [np.tensordot(coeffs * r ** k, self.powers, axes=([1], [0])) for r in self.r_sequence]
            value, spread = richardson(estimates, steps)
            out[position:position + chunk.size] = value
            weight = max(self.r_sequence) ** k[-self.L.dim:]
            last = np.abs(coeffs[:, -self.L.dim:]) * self.power_norms[-self.L.dim:] * weight
            residual = max(residual, spread, float(np.max(last)) if last.size else 0.0)
            position += chunk.size
        return out, residual

    def apply(self, family: FactorFamily, indices) -> np.ndarray:
        indices = np.atleast_1d(indices)
        out, residual = self._evaluate(family, indices)
        if len(self.r_sequence) > 1:
            scale = float(np.max(np.abs(out))) if out.size else 0.0
            if residual > config.TAYLOR_TAIL_TOL * (1 + scale):
                logger.debug(f"⚠️ Extrapolation en r → 1 imprécise ({residual:.2e}), rayon adapté")
                self._use_adaptive()
                out, residual = self._evaluate(family, indices)
        self.residual_estimate = residual
        return out


class SchurParlettPlan:
    """
    Triangularisation simultanée U*LU = S, U*MU = R puis récurrence de Parlett
    F_ij = [X_ij(F_jj − F_ii) + Σ_{i<k<j}(X_ik F_kj − F_ik X_kj)] / (X_jj − X_ii), X ∈ {S, R}
    """

    route = "spectral"
    arity = 2

    def __init__(self, P: CommutingDissipativePair):
        self.P = P
        L, M = P.L.A, P.M.A
        _, U = scipy.linalg.schur(L + _PAIR_MIX * M, output="complex")
        S, R = U.conj().T @ L @ U, U.conj().T @ M @ U
        scale = 1.0 + operator_norm(L) + operator_norm(M)
        lower = max(operator_norm(np.tril(S, -1)), operator_norm(np.tril(R, -1)))
        if lower > 1e-9 * scale:
            raise RouteUnavailable(f"Triangularisation simultanée imprécise: {lower:.2e}")
        self.U, self.S, self.R = U, np.triu(S), np.triu(R)

        d = L.shape[0]
        self.pivots = {}
        separation = config.PARLETT_SEPARATION * scale
        for i in range(d):
            for j in range(i + 1, d):
                ds = abs(self.S[j, j] - self.S[i, i])
                dr = abs(self.R[j, j] - self.R[i, i])
                if max(ds, dr) < separation:
                    if max(abs(self.S[i, j]), abs(self.R[i, j])) > 1e-12 * scale or j > i + 1:
                        raise RouteUnavailable("Valeurs propres jointes confondues (bloc non diagonal)")
                    self.pivots[(i, j)] = None
                else:
                    self.pivots[(i, j)] = self.S if ds >= dr else self.R
        self.residual_estimate = 0.0

    def apply(self, family: FactorFamily, indices) -> np.ndarray:
        indices = np.atleast_1d(indices)
        d = self.S.shape[0]
        diag = family(indices, np.diag(self.S), np.diag(self.R))
        F = np.zeros((indices.size, d, d), dtype=np.complex128)
        F[:, np.arange(d), np.arange(d)] = diag
        for offset in range(1, d):
            for i in range(d - offset):
                j = i + offset
                X = self.pivots[(i, j)]
                if X is None:
                    continue
                k = np.arange(i + 1, j)
                numerator = X[i, j] * (F[:, j, j] - F[:, i, i])
                if k.size:
                    numerator = numerator + F[:, k, j] @ X[i, k] - F[:, i, k] @ X[k, j]
                F[:, i, j] = numerator / (X[j, j] - X[i, i])
        scale = float(np.max(np.abs(diag))) if diag.size else 0.0
        self.residual_estimate = np.finfo(float).eps * d * max(scale, 1.0) * 1e3
        return self.U @ F @ self.U.conj().T


class TaylorPlan2D:
    """Σ_{j,k} ĝ(j, k) T^j R^k, coefficients par FFT 2-D"""

    route = "taylor-cayley"
    arity = 2

    def __init__(self, P: CommutingDissipativePair, max_nodes: Optional[int] = None):
        max_nodes = config.TAYLOR_NODES_2D if max_nodes is None else max_nodes
        self.P = P
        self.T, self.R = cayley(P.L), cayley(P.M)
        self.rho_T = max(_spectral_radius(self.T), _spectral_radius(self.R))
        _check_cayley_spectrum(self.rho_T)
        if config.TAYLOR_ADAPTIVE:
            self.rho, self.K, self.nodes_count = _taylor_parameters(self.rho_T, P.dim, max_nodes)
        else:
            self.rho, self.K, self.nodes_count = _fixed_parameters(max_nodes)
        self.T_powers, self.R_powers = _powers(self.T, self.K), _powers(self.R, self.K)
        norms_T = np.array([operator_norm(X) for X in self.T_powers])
        norms_R = np.array([operator_norm(X) for X in self.R_powers])
        if not config.TAYLOR_ADAPTIVE and max(norms_T[-1], norms_R[-1]) > config.TAYLOR_TAIL_TOL:
            logger.debug("⚠️ Cercle fixe insuffisant pour la paire, rayon adapté")
            self.rho, self.K, self.nodes_count = _taylor_parameters(self.rho_T, P.dim, max_nodes)
            self.T_powers, self.R_powers = _powers(self.T, self.K), _powers(self.R, self.K)
            norms_T = np.array([operator_norm(X) for X in self.T_powers])
            norms_R = np.array([operator_norm(X) for X in self.R_powers])
        nodes = _circle_nodes(self.rho, self.nodes_count)
        self.z1, self.z2 = nodes[:, None], nodes[None, :]
        self.power_norms = norms_T[:, None] * norms_R[None, :]
        scaling = self.rho ** -np.arange(self.K)
        self.scaling = scaling[:, None] * scaling[None, :]
        self.residual_estimate = 0.0

    def apply(self, family: FactorFamily, indices) -> np.ndarray:
        indices = np.atleast_1d(indices)
        grid = self.nodes_count ** 2
        if indices.size * grid > config.TAYLOR_EVAL_BUDGET:
            raise RouteUnavailable(f"Budget d'évaluation dépassé: {indices.size} × {grid} nœuds")
        d = self.P.dim
        out = np.empty((indices.size, d, d), dtype=np.complex128)
        tail = 0.0
        position = 0
        for chunk in _chunks(indices, grid):
            values = family(chunk, self.z1, self.z2)
            coeffs = np.fft.fft2(values, axes=(1, 2))[:, :self.K, :self.K] / grid * self.scaling
            partial = np.tensordot(coeffs, self.R_powers, axes=([2], [0]))      # (m, K, d, d)
            out[position:position + chunk.size] = np.einsum("jab,mjbc->mac", self.T_powers, partial,
                                                            optimize=True)
            edge = np.abs(coeffs) * self.power_norms
            tail = max(tail, float(np.max(edge[:, -d:, :])), float(np.max(edge[:, :, -d:])))
            position += chunk.size
        self.residual_estimate = tail
        return out


class SeparablePlan:
    """
    Paire commutative hors Schur–Parlett

    Familles séparées : h_n(L, M) = Σ_j u_{n,j}(L)·v_{n,j}(M) par deux plans d'une
    variable (L et M commutent). Autres familles : Taylor–Cayley 2-D, construit à la demande.
    """

    arity = 2

    def __init__(self, P: CommutingDissipativePair):
        self.P = P
        self.left, self.right = plan_one(P.L), plan_one(P.M)
        self._bivariate: Optional[TaylorPlan2D] = None
        self.residual_estimate = 0.0
        self.route = self._separable_route()

    def _separable_route(self) -> str:
        taylor = "taylor-cayley" in (self.left.route, self.right.route)
        return "taylor-cayley" if taylor else "spectral"

    def apply(self, family: FactorFamily, indices) -> np.ndarray:
        indices = np.atleast_1d(indices)
        form = family.separable
        if form is None:
            if self._bivariate is None:
                self._bivariate = TaylorPlan2D(self.P)
            out = self._bivariate.apply(family, indices)
            self.route, self.residual_estimate = self._bivariate.route, self._bivariate.residual_estimate
            return out

        d = self.P.dim
        self.route = self._separable_route()
        if form.terms == 0:
            self.residual_estimate = 0.0
            return np.zeros((indices.size, d, d), dtype=np.complex128)
        compound = form.compound(indices)
        shape = (indices.size, form.terms, d, d)
        U = self.left.apply(form.family("left"), compound).reshape(shape)
        V = self.right.apply(form.family("right"), compound).reshape(shape)
        self.residual_estimate = max(float(self.left.residual_estimate), float(self.right.residual_estimate))
        return np.einsum("mkab,mkbc->mac", U, V, optimize=True)


def plan_one(L: ArgLike, route: str = "auto"):
    """Plan d'évaluation pour une matrice (spectral si possible, sinon Taylor–Cayley)"""
    if route not in ROUTES:
        raise ValueError(f"Route inconnue: {route}")
    L = certify(L)
    if route in ("auto", "spectral"):
        try:
            return SpectralPlan(L)
        except DefectiveMatrix as e:
            if route == "spectral":
                raise RouteUnavailable(f"Route spectrale indisponible: {e}") from e
            logger.debug(f"⚠️ Base propre refusée (cond={e.condition}), bascule Taylor–Cayley")
    return TaylorPlan(L)


def plan_pair(P: CommutingDissipativePair, route: str = "auto"):
    """Plan d'évaluation pour une paire commutative"""
    if route not in ROUTES:
        raise ValueError(f"Route inconnue: {route}")
    if route == "taylor-cayley":
        return TaylorPlan2D(P)
    try:
        return SchurParlettPlan(P)
    except RouteUnavailable as e:
        if route == "spectral":
            raise
        logger.debug(f"⚠️ Schur–Parlett indisponible ({e}), bascule sur la forme séparée")
    return SeparablePlan(P)


# Plans récents par argument (identité de l'objet) : une paire sert à plusieurs séries
_PLANS: "OrderedDict[int, Tuple[object, object]]" = OrderedDict()


def cached_plan(args, build: Callable):
    key = id(args)
    entry = _PLANS.get(key)
    if entry is not None and entry[0] is args:
        _PLANS.move_to_end(key)
        return entry[1]
    plan = build(args)
    _PLANS[key] = (args, plan)
    while len(_PLANS) > config.PLAN_CACHE_SIZE:
        _PLANS.popitem(last=False)
    return plan


def clear_plan_cache():
    _PLANS.clear()


def plan_for(arity: int, args):
    if arity == 1:
        if isinstance(args, CommutingDissipativePair):
            raise TypeError("Facteur d'une variable appliqué à une paire")
        return cached_plan(certify(args), plan_one)
    if not isinstance(args, CommutingDissipativePair):
        raise TypeError("Facteur de deux variables appliqué à une seule matrice")
    return cached_plan(args, plan_pair)


def _check_tail(plan, scale: float):
    if plan.route == "taylor-cayley" and plan.residual_estimate > config.TAYLOR_TAIL_TOL * (1 + scale):
        raise RouteUnavailable(f"Queue Taylor–Cayley non négligeable: {plan.residual_estimate:.2e}")


# ---------------------------------------------------------------------------
# Une matrice
# ---------------------------------------------------------------------------

def apply_one(f: Evaluable1D, L: ArgLike, route: str = "auto", cross_check: bool = False) -> CalculusResult:
    """
    Calcule f(L) pour L dissipative

    Args:
        f: ExpSum1D ou fonction vectorisée holomorphe sur ℂ₊
        L: Matrice dissipative
        route: "auto", "spectral" ou "taylor-cayley"
        cross_check: Calcule aussi l'autre route et rapporte l'écart

    Returns:
        CalculusResult
    """
    L = certify(L)
    family = as_family(f, 1)
    plan = plan_one(L, route)
    value = plan.apply(family, [0])[0]
    _check_tail(plan, operator_norm(value))

    difference = None
    if cross_check:
        other_route = "taylor-cayley" if plan.route == "spectral" else "spectral"
        try:
            other = plan_one(L, other_route)
            difference = operator_norm(other.apply(family, [0])[0] - value)
        except RouteUnavailable as e:
            logger.debug(f"Contre-vérification impossible: {e}")
    return CalculusResult(value=value, route=plan.route, residual_estimate=float(plan.residual_estimate),
                          cross_check=difference)


def apply_one_extended(f_i: Evaluable1D, L: ArgLike) -> ComplexMatrix:
    """f(L) = (L + iI) f_i(L)"""
    L = certify(L)
    shift = L.A + 1j * identity(L.dim)
    inner = apply_one(f_i, L).value
    left, right = shift @ inner, inner @ shift
    mismatch = operator_norm(left - right)
    if mismatch > config.tolerance(operator_norm(left)) * 1e3:
        logger.warning(f"⚠️ (L+iI)f_i(L) et f_i(L)(L+iI) diffèrent: {mismatch:.2e}")
    return left


# ---------------------------------------------------------------------------
# Paires
# ---------------------------------------------------------------------------

def _require_commuting(P) -> CommutingDissipativePair:
    if not isinstance(P, CommutingDissipativePair):
        L, M = P
        return check_commuting(L, M)
    relative = P.commutator_residual / max(P.L.norm * P.M.norm, config.TOL_ABS)
    if relative > config.COMMUTE_TOL:
        raise NotCommuting("La paire ne commute pas", commutator_residual=P.commutator_residual)
    return P


def apply_pair_commuting(f: Evaluable2D, P, route: str = "auto", cross_check: bool = False) -> CalculusResult:
    """
    Calcule f(L, M) pour une paire commutative (Schur–Parlett commun, repli Taylor–Cayley 2-D)
    """
    P = _require_commuting(P)
    family = as_family(f, 2)
    plan = plan_pair(P, route)
    value = plan.apply(family, [0])[0]
    _check_tail(plan, operator_norm(value))

    difference = None
    if cross_check:
        other_route = "taylor-cayley" if plan.route == "spectral" else "spectral"
        try:
            other = plan_pair(P, other_route)
            difference = operator_norm(other.apply(family, [0])[0] - value)
        except RouteUnavailable as e:
            logger.debug(f"Contre-vérification impossible: {e}")
    return CalculusResult(value=value, route=plan.route, residual_estimate=float(plan.residual_estimate),
                          cross_check=difference)


def apply_pair_extended(f_i: Evaluable2D, P) -> ComplexMatrix:
    """f(L, M) = (L + iI)(M + iI) f_i(L, M)"""
    P = _require_commuting(P)
    I = identity(P.dim)
    return (P.L.A + 1j * I) @ (P.M.A + 1j * I) @ apply_pair_commuting(f_i, P).value


def series_apply(expansion: HaagerupExpansion, left_args, Q: ComplexMatrix, right_args,
                 N: Optional[int] = None, n_min: int = 0, stop_early: bool = True,
                 strict: bool = False) -> SeriesResult:
    """
    Σ_n φ_n(left)·Q·ψ_n(right), chaque facteur appliqué par le calcul fonctionnel

    Sans plateau, la meilleure valeur extrapolée est rendue avec converged=False :
    le seuil d'acceptation de l'appelant tranche sur le résidu.

    Raises:
        SeriesNotConverged: seulement si strict et que la règle du plateau échoue
    """
    Q = np.asarray(Q, dtype=np.complex128)
    if Q.ndim < 2:
        Q = Q.reshape(1, 1)
    left_plan = plan_for(expansion.left.arity, left_args)
    right_plan = plan_for(expansion.right.arity, right_args)

    def terms(indices):
        A = left_plan.apply(expansion.left, indices)
        B = right_plan.apply(expansion.right, indices)
        return (A @ Q) @ B

    if not expansion.symmetric:
        total = np.sum(terms(expansion.indices()), axis=0)
        return SeriesResult(value=total, n_used=expansion.truncation, converged=True,
                            checkpoints=[expansion.truncation], partial_sums=[total],
                            extrapolated=[total], history=[{"N": expansion.truncation}])

    N = expansion.truncation if N is None else N
    result = sum_symmetric(terms, N, stop_early=stop_early, n_min=n_min)
    for plan in (left_plan, right_plan):
        _check_tail(plan, operator_norm(result.value))
    if not result.converged:
        message = f"Plateau non atteint pour {expansion.label} jusqu'à N={result.n_used}"
        if strict:
            raise SeriesNotConverged(message, result=result, n_used=result.n_used)
        logger.debug(f"⚠️ {message}, valeur extrapolée conservée")
    return result


def apply_pair_noncommuting(f: ExpSum2D, L: ArgLike, M: ArgLike, N: Optional[int] = None) -> CalculusResult:
    """
    f(L, M) = f(L, 0) + Σ_{|n|<=N} q_n(L) r_n(M), sans hypothèse de commutation

    details["bounded_product"] contient f(L, M)(I − iM)^{-1} ; details["converged"] indique
    si la règle du plateau a été atteinte.
    """
    L, M = certify(L), certify(M)
    if L.dim != M.dim:
        raise ValueError(f"Dimensions différentes: {L.dim} et {M.dim}")
    N = config.DEFAULT_N if N is None else N
    anchored = anchor_expansion(f, N)
    base = apply_one(anchored.base, L).value
    series = series_apply(anchored.expansion, L, identity(L.dim), M, N=N)
    value = base + series.value

    I = identity(L.dim)
    bounded = solve((I - 1j * M.A).T, value.T).T
    change = series.history[-1].get("extrapolated_change", 0.0)
    return CalculusResult(
        value=value,
        route="anchor-series",
        residual_estimate=float(change),
        details={"N_used": series.n_used, "converged": series.converged,
                 "bounded_product": bounded, "series": series},
    )
