"""
Service de vérification : suites de contrôles derrière chaque commande du CLI

Les essais aléatoires sont indépendants (graine [seed, indice]) et passent par
joblib ; les résultats sont triés par indice avant l'assemblage du rapport.
"""
import logging
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed
from scipy.special import polygamma

from . import bandfun, besov, doi
from .anchors import anchor
from .config import config
from .dissipative import (
    CommutingDissipativePair,
    cayley,
    certify,
    check_commuting,
    gen_pair,
    inverse_cayley,
    resolvent_identity_check,
)
from .exceptions import DissipaError, DivergentModulus
from .funcalc import apply_one, apply_pair_commuting, apply_pair_noncommuting
from .linalg import identity, operator_norm

logger = logging.getLogger(__name__)

SIGMAS = (1.0, 2.0, 4.0)


def make_check(name: str, ok: bool, lhs=None, rhs=None, residual=None, **details) -> Dict:
    """Entrée de rapport : chaque contrôle porte l'identité qu'il vérifie"""
    return {
        "name": name,
        "anchor": anchor(name),
        "lhs": lhs,
        "rhs": rhs,
        "residual": residual,
        "ok": bool(ok),
        **details,
    }


def _failed(name: str, error: DissipaError) -> Dict:
    return make_check(name, False, error=error.to_dict())


def random_dissipative(rng: np.random.Generator, dim: int, margin: float = 0.25) -> np.ndarray:
    """G + i(‖G‖ + margin)I, G gaussienne complexe normalisée"""
    G = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2 * dim)
    return G + 1j * (operator_norm(G) + margin) * identity(dim)


def multiband_expsum_2d(rng: np.random.Generator, bands: Sequence[int] = (0, 2, 4)) -> bandfun.ExpSum2D:
    """Une fréquence par échelle 2^k, coefficients normalisés"""
    radii = np.array([2.0 ** k * rng.uniform(0.8, 1.6) for k in bands])
    angle = rng.uniform(0.0, np.pi / 2, radii.size)
    freqs = np.clip(np.column_stack([radii * np.cos(angle), radii * np.sin(angle)]), 0.0, None)
    coeffs = rng.standard_normal(radii.size) + 1j * rng.standard_normal(radii.size)
    return bandfun.ExpSum2D(float(np.linalg.norm(freqs, axis=1).max()), freqs, coeffs / np.sum(np.abs(coeffs)))


# ---------------------------------------------------------------------------
# Essais (fonctions de module : sérialisables pour les workers joblib)
# ---------------------------------------------------------------------------

def basis_closed_form(N: int) -> float:
    """Σ_{|n|<=N} |ψ_n(π/σ)|² = 1 − (ψ'(N + 1/2) + ψ'(N + 3/2))/π²"""
    return float(1.0 - (polygamma(1, N + 0.5) + polygamma(1, N + 1.5)) / np.pi ** 2)


def identity_trial(seed: int, index: int) -> List[Dict]:
    rng = np.random.default_rng([seed, index])
    checks = []
    sigma = float(rng.choice(SIGMAS))

    # Aller-retour de Cayley
    dim = int(rng.integers(2, 17))
    L = certify(random_dissipative(rng, dim))
    back = inverse_cayley(cayley(L))
    residual = operator_norm(back.A - L.A)
    rhs = 1e-9 * (1 + L.norm)
    checks.append(make_check("cayley-round-trip", residual <= rhs,
                             residual=residual, rhs=rhs, dim=dim))

    # Identité de résolvante et commutation d'une paire générée
    M = certify(random_dissipative(rng, dim))
    residual = resolvent_identity_check(L, M)
    checks.append(make_check("resolvent-identity",
                             residual <= 1e-9 * (1 + L.norm + M.norm), residual=residual))
    P1, _ = gen_pair(int(rng.integers(0, 2 ** 31)), int(rng.integers(2, 7)))
    worst = max(P1.resolvent_residual, P1.cayley_residual)
    checks.append(make_check("resolvent-commutation",
                             worst <= config.COMMUTE_TOL, residual=worst))

    # Normalisation de la base d'échantillonnage
    y = rng.uniform(-20.0, 20.0)
    total = float(bandfun.basis_normalization(sigma, y, 100_000)[0])
    checks.append(make_check("basis-normalization",
                             abs(total - 1) <= 1e-4, lhs=total, rhs=1.0, residual=abs(total - 1)))

    # Identité de ligne et borne (4/π)σ²‖f‖²
    f = bandfun.random_expsum_1d(rng, sigma, int(rng.integers(1, 5)))
    x = rng.uniform(-10.0, 10.0)
    try:
        summed = bandfun.row_energy(f, x)
        integral = bandfun.row_energy_integral(f, x)
        bound = 4 / np.pi * sigma ** 2 * bandfun.sup_norm(f).upper ** 2
        residual = abs(summed - integral)
        checks.append(make_check("row-energy",
                                 residual <= 1e-4 * (1 + integral) and summed <= bound + 1e-4,
                                 lhs=summed, rhs=bound, residual=residual, integral=integral))
    except DissipaError as e:
        checks.append(_failed("row-energy", e))

    # Produit scalaire polarisé (deux points distincts)
    x2 = x + rng.uniform(0.5, 3.0)
    try:
        inner = bandfun.inner_product_check(f, x, x2)
        checks.append(make_check("inner-product",
                                 inner["residual"] <= 1e-4 * (1 + abs(inner["rhs"])), residual=inner["residual"]))
    except DissipaError as e:
        checks.append(_failed("inner-product", e))

    # Noyau reproduisant de Δf
    y_k = rng.uniform(-5.0, 5.0)
    try:
        reproduced = bandfun.kernel_dd_check(f, x, y_k)
        expected = complex(bandfun.divided_difference(f, x, y_k))
        residual = abs(reproduced - expected)
        checks.append(make_check("kernel-divided-difference",
                                 residual <= 1e-4, residual=residual))
    except DissipaError as e:
        checks.append(_failed("kernel-divided-difference", e))

    # Reconstruction d'échantillonnage en des points du demi-plan supérieur
    lam = bandfun.random_upper_points(rng, 4)
    residual = bandfun.reconstruction_check(f, x, lam)
    checks.append(make_check("sampling-reconstruction",
                             residual <= 1e-5, residual=residual))

    # Bernstein : cinq sommes par essai
    for _ in range(5):
        result = bandfun.bernstein_check(bandfun.random_expsum_1d(rng, sigma, int(rng.integers(1, 6))))
        checks.append(make_check("bernstein", result["ok"],
                                 lhs=result["lhs"], rhs=result["rhs"]))

    # Régularisation f_ε
    eps = float(rng.uniform(0.05, 1.0))
    regularization = bandfun.regularize_eps(f, eps, samples=2000, seed=int(rng.integers(0, 2 ** 31)))
    checks.append(make_check("regularized-divided-difference",
                             regularization.residual <= 1e-8, residual=regularization.residual, eps=eps))

    # ω_* : forme close contre quadrature
    alpha = float(rng.uniform(0.05, 0.95))
    s = float(rng.uniform(0.01, 10.0))
    omega = bandfun.Modulus.power(alpha)
    closed = bandfun.omega_star(omega, s)
    quad = bandfun.omega_star(omega, s, method="quadrature")
    residual = abs(closed - quad)
    checks.append(make_check("omega-star", residual <= 1e-8 * (1 + closed),
                             lhs=closed, rhs=quad, residual=residual, alpha=alpha))
    modulus = omega.check()
    checks.append(make_check("modulus", modulus["ok"], **{k: v for k, v in modulus.items() if k != "ok"}))

    # Découpage de Littlewood–Paley : reconstruction exacte des coefficients
    g = bandfun.random_expsum_2d(rng, float(rng.choice(SIGMAS)) * 4, 4)
    error = besov.reconstruction_error(g)
    checks.append(make_check("band-reconstruction",
                             error <= 1e-14, residual=error))
    return checks


def global_identity_checks() -> List[Dict]:
    checks = []
    for N in (10, 1000, 100_000):
        total = float(bandfun.basis_normalization(1.0, np.pi, N)[0])
        closed = basis_closed_form(N)
        checks.append(make_check("basis-closed-form",
                                 abs(total - closed) <= 1e-6, lhs=total, rhs=closed,
                                 residual=abs(total - closed), N=N))
    window = besov.check_window()
    checks.append(make_check("window-partition", window["ok"],
                             residual=window["partition_error"],
                             reflection_error=window["reflection_error"]))
    try:
        bandfun.omega_star(bandfun.Modulus.power(1.0), 1.0)
        checks.append(make_check("omega-star-divergent", False))
    except DivergentModulus:
        checks.append(make_check("omega-star-divergent", True))
    return checks


def perturb_single_trial(seed: int, index: int, sigma: float, N: int, dim: Optional[int] = None) -> List[Dict]:
    rng = np.random.default_rng([seed, index])
    dim = int(rng.integers(1, 9)) if dim is None else dim
    L = random_dissipative(rng, dim, margin=0.75)
    E = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    M = L + rng.uniform(0.05, 0.5) * E / operator_norm(E)
    f = bandfun.random_expsum_1d(rng, sigma, int(rng.integers(1, 5)))
    return [single_check(f, L, M, N, dim=dim)]


def single_check(f, L, M, N: int, **details) -> Dict:
    try:
        report = doi.perturb_single(f, L, M, N)
    except DissipaError as e:
        return _failed("perturb-single", e)
    return make_check(
        "perturb-single", report["ok"],
        lhs=report["lhs"], rhs=report["rhs"], residual=report["residual"],
        N_used=report["N_used"], certificate=report["certificate"],
        s2_lhs=report["s2_lhs"], s2_rhs=report["s2_rhs"],
        partial_sum_history=report["partial_sum_history"], **details,
    )


def pair_check(f, P1, P2, formula: str, N: int, **details) -> Dict:
    formula = doi.canonical_formula(formula)
    try:
        report = doi.perturb_pair(f, P1, P2, formula, N)
    except DissipaError as e:
        return _failed(f"perturb-pair-{formula}", e)
    extra = {}
    if formula == "glafor":
        parts = report["parts"]
        extra["telescoping_residual"] = operator_norm(parts["31"] + parts["32"] - report["doi_value"])
    return make_check(
        f"perturb-pair-{formula}", report["ok"],
        lhs=report["lhs"], rhs=report["rhs"], residual=report["residual"],
        N_used=report["N_used"], certificate=report["certificate"], plateau=report["plateau"],
        partial_sum_history=report["partial_sum_history"], **extra, **details,
    )


def perturb_pair_trial(seed: int, index: int, sigma: float, N: int, formula: str,
                       dim: Optional[int] = None, style: str = "polynomial", spread: float = 0.1) -> List[Dict]:
    rng = np.random.default_rng([seed, index])
    dim = int(rng.integers(1, 7)) if dim is None else dim
    P1, P2 = gen_pair(int(rng.integers(0, 2 ** 31)), dim, style, spread)
    f = bandfun.random_expsum_2d(rng, sigma, int(rng.integers(1, 4)))
    formulas = doi.FORMULAS if formula == "all" else (formula,)
    return [pair_check(f, P1, P2, name, N, dim=dim) for name in formulas]


def bound_trial(seed: int, index: int, kind: str, sigma: Optional[float], dim: Optional[int],
                alpha: float, p: float, style: str, spread: float) -> List[Dict]:
    rng = np.random.default_rng([seed, index])
    dim = 2 + index % 7 if dim is None else dim
    sigma = SIGMAS[index % len(SIGMAS)] if sigma is None else sigma
    P1, P2 = gen_pair(int(rng.integers(0, 2 ** 31)), dim, style, spread)
    if kind == "besov":
        f = multiband_expsum_2d(rng)
    else:
        f = bandfun.random_expsum_2d(rng, sigma, int(rng.integers(1, 4)))
    return [bound_check(kind, f, P1, P2, alpha, p, dim=dim, sigma=f.sigma)]


def bound_check(kind: str, f, P1, P2, alpha: float = 0.5, p: float = 2.0, **details) -> Dict:
    try:
        if kind == "lipschitz":
            report = doi.lipschitz_certificate(f, P1, P2)
        elif kind == "besov":
            report = doi.besov_lipschitz(f, P1, P2)
            total = float(np.sum([b["contribution"] for b in report["bands"]])) if report["bands"] else 0.0
            details["aggregation_residual"] = abs(total - report["rhs"])
            details["bands"] = report["bands"]
        else:
            report = doi.holder_schatten_report(f, P1, P2, alpha, p)
            details.update({k: report[k] for k in ("lhs_sp", "quantities", "ratios", "scaling")})
            return make_check("bound-holder-schatten", report["ok"],
                              lhs=report["lhs_op"], **details)
    except DissipaError as e:
        return _failed(f"bound-{kind}", e)
    return make_check(f"bound-{kind}", report["ok"],
                      lhs=report["lhs"], rhs=report["rhs"], **details)


def calculus_trial(seed: int, index: int) -> List[Dict]:
    """Accord des routes spectrale et Taylor–Cayley, série ancrée contre calcul commutatif"""
    rng = np.random.default_rng([seed, index])
    dim = int(rng.integers(2, 7))
    L = random_dissipative(rng, dim, margin=0.1)
    f = bandfun.random_expsum_1d(rng, float(rng.choice(SIGMAS)), 3)
    checks = []
    try:
        result = apply_one(f, L, cross_check=True)
        checks.append(make_check("route-agreement",
                                 result.cross_check is not None and result.cross_check <= 1e-7,
                                 residual=result.cross_check))
    except DissipaError as e:
        checks.append(_failed("route-agreement", e))

    P1, _ = gen_pair(int(rng.integers(0, 2 ** 31)), int(rng.integers(1, 5)))
    g = bandfun.random_expsum_2d(rng, 1.0, 2)
    try:
        commuting = apply_pair_commuting(g, P1).value
        anchored = apply_pair_noncommuting(g, P1.L, P1.M, 2000)
        residual = operator_norm(commuting - anchored.value)
        checks.append(make_check("anchor-series-agreement",
                                 residual <= 1e-6, residual=residual,
                                 plateau=anchored.details["converged"]))
    except DissipaError as e:
        checks.append(_failed("anchor-series-agreement", e))
    return checks


# ---------------------------------------------------------------------------
# Service
# ---------------------------------------------------------------------------

class VerificationService:
    """Exécute les suites et assemble les rapports"""

    def __init__(self, workers: Optional[int] = None):
        self.workers = config.WORKERS if workers is None else workers

    def _run_trials(self, trial: Callable[..., List[Dict]], seed: int, trials: int, **kwargs) -> List[Dict]:
        logger.info(f"Lancement de {trials} essai(s) sur {self.workers} worker(s)")
        results = Parallel(n_jobs=self.workers)(
            delayed(_indexed)(trial, seed, index, kwargs) for index in range(trials)
        )
        checks = []
        for index, trial_checks in sorted(results, key=lambda item: item[0]):
            for check in trial_checks:
                checks.append({"trial": index, **check})
        return checks

    @staticmethod
    def summarize(command: str, checks: List[Dict], **settings) -> Dict:
        failed = [c["name"] for c in checks if not c["ok"]]
        report = {
            "command": command,
            "settings": settings,
            "checks": checks,
            "passed": len(checks) - len(failed),
            "failed": len(failed),
            "failed_checks": sorted(set(failed)),
            "ok": not failed,
        }
        if failed:
            logger.warning(f"❌ {len(failed)} contrôle(s) en échec: {', '.join(report['failed_checks'])}")
        else:
            logger.info(f"✅ {len(checks)} contrôle(s) réussis")
        return report

    def generate(self, seed: int, dim: int, style: str = "polynomial",
                 spread: float = 0.1) -> Tuple[CommutingDissipativePair, CommutingDissipativePair]:
        return gen_pair(seed, dim, style, spread)

    def identities(self, seed: int = 0, trials: int = 100) -> Dict:
        checks = global_identity_checks()
        checks += self._run_trials(identity_trial, seed, trials)
        checks += self._run_trials(calculus_trial, seed + 1, trials)
        return self.summarize("identities", checks, seed=seed, trials=trials)

    def perturb_single(self, seed: int = 0, trials: int = 50, sigma: float = 1.0, N: Optional[int] = None,
                       dim: Optional[int] = None, instance=None, function=None) -> Dict:
        N = config.DEFAULT_N if N is None else N
        if instance is not None:
            P1, P2 = instance
            f = function if function is not None else bandfun.random_expsum_1d(np.random.default_rng(seed), sigma)
            checks = [single_check(f, P1.L, P2.L, N, matrices="L"), single_check(f, P1.M, P2.M, N, matrices="M")]
        else:
            checks = self._run_trials(perturb_single_trial, seed, trials, sigma=sigma, N=N, dim=dim)
        return self.summarize("perturb-single", checks, seed=seed, trials=trials, sigma=sigma, N=N)

    def perturb_pair(self, formula: str = "glafor", seed: int = 0, trials: int = 1, sigma: float = 1.0,
                     N: Optional[int] = None, dim: Optional[int] = None, style: str = "polynomial",
                     spread: float = 0.1, instance=None, function=None) -> Dict:
        N = config.DEFAULT_N if N is None else N
        if instance is not None:
            P1, P2 = instance
            f = function if function is not None else bandfun.random_expsum_2d(np.random.default_rng(seed), sigma)
            formulas = doi.FORMULAS if formula == "all" else (formula,)
            checks = [pair_check(f, P1, P2, name, N) for name in formulas]
        else:
            checks = self._run_trials(perturb_pair_trial, seed, trials, sigma=sigma, N=N, formula=formula,
                                      dim=dim, style=style, spread=spread)
        return self.summarize("perturb-pair", checks, formula=formula, seed=seed, trials=trials, N=N)

    def bound(self, kind: str, seed: int = 0, trials: int = 100, sigma: Optional[float] = None,
              dim: Optional[int] = None, alpha: float = 0.5, p: float = 2.0, style: str = "polynomial",
              spread: float = 0.1, instance=None, function=None) -> Dict:
        if kind not in doi.REPORT_BUILDERS:
            raise ValueError(f"Type de borne inconnu: {kind}")
        if instance is not None:
            P1, P2 = instance
            rng = np.random.default_rng(seed)
            f = function if function is not None else bandfun.random_expsum_2d(rng, sigma or 1.0)
            checks = [bound_check(kind, f, P1, P2, alpha, p)]
        else:
            checks = self._run_trials(bound_trial, seed, trials, kind=kind, sigma=sigma, dim=dim,
                                      alpha=alpha, p=p, style=style, spread=spread)
        return self.summarize("bound", checks, kind=kind, seed=seed, trials=trials, alpha=alpha, p=p)

    def besov_norm(self, f) -> Dict:
        norm = besov.besov_norm(f)
        error = besov.reconstruction_error(f)
        checks = [
            make_check("besov-norm-order", norm["upper"] >= norm["grid"] - 1e-12,
                       lhs=norm["grid"], rhs=norm["upper"]),
            make_check("band-reconstruction", error <= 1e-14,
                       residual=error),
        ]
        report = self.summarize("besov-norm", checks)
        report["besov_norm"] = norm
        return report


def _indexed(trial: Callable[..., List[Dict]], seed: int, index: int, kwargs: Dict):
    return index, trial(seed, index, **kwargs)


def collect_histories(report: Dict) -> Dict[str, List[Dict]]:
    """Historiques de sommes partielles du rapport, par contrôle"""
    histories = {}
    for check in report.get("checks", []):
        history = check.get("partial_sum_history")
        if history:
            histories[f"{check['name']}#{check.get('trial', 0)}"] = history
    return histories
