"""
Intégrales doubles d'opérateurs (DOI) par développements de Haagerup

Σ_n φ_n(A)·Q·ψ_n(B) où chaque facteur passe par le calcul fonctionnel,
puis vérification des formules de perturbation et des bornes associées.
"""
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np

from . import besov
from .bandfun import (
    TWO_OVER_SQRT_PI,
    ExpSum1D,
    ExpSum2D,
    Modulus,
    RegularizedFunction,
    anchor_certificate,
    omega_star,
    sampling_expansion_1d,
    sampling_expansion_2d,
    sup_norm,
)
from .anchors import anchor
from .config import config
from .dissipative import CommutingDissipativePair, certify, check_commuting, iota
from .exceptions import DivergentModulus, InvalidExponent, NotCommuting
from .funcalc import apply_one, apply_pair_commuting, apply_pair_noncommuting, series_apply
from .haagerup import HaagerupExpansion
from .linalg import ComplexMatrix, as_matrix, identity, operator_norm, schatten_norm, solve
from .utils.series import SeriesResult

logger = logging.getLogger(__name__)

FORMULAS = ("31", "32", "glafor")
FORMULA_ALIASES = {"vary-m": "31", "vary-l": "32", "total": "glafor"}


def canonical_formula(formula: str) -> str:
    """Nom canonique (31, 32, glafor) d'une formule ou de son alias descriptif"""
    name = FORMULA_ALIASES.get(str(formula), str(formula))
    if name not in FORMULAS:
        expected = ", ".join(FORMULAS + tuple(FORMULA_ALIASES))
        raise ValueError(f"Formule inconnue: {formula} (attendu: {expected})")
    return name


@dataclass(frozen=True, eq=False)
class DoiResult:
    """Valeur de la DOI et historique des sommes partielles"""

    value: ComplexMatrix
    n_used: int
    converged: bool
    certificate: float
    history: List[Dict] = field(default_factory=list)
    series: Optional[SeriesResult] = None


def _as_args(arity: int, args):
    if arity == 1:
        return certify(args)
    if isinstance(args, CommutingDissipativePair):
        return args
    L, M = args
    return check_commuting(L, M)


def doi_apply(X: HaagerupExpansion, left_args, Q, right_args, N: Optional[int] = None,
              n_min: int = 0, stop_early: bool = True, strict: bool = False) -> DoiResult:
    """
    Σ_n φ_n(left)·Q·ψ_n(right)

    Args:
        X: Développement de Haagerup (facteurs d'une ou deux variables)
        left_args: DissipativeMatrix (facteur d'une variable) ou paire commutative
        Q: Matrice intercalée
        right_args: Idem pour le facteur de droite
        N: Troncature maximale (X.truncation par défaut)
        n_min: Troncature minimale avant arrêt sur plateau
        stop_early: Arrêt dès le plateau
        strict: Lève SeriesNotConverged sans plateau (sinon converged=False)

    Raises:
        SeriesNotConverged: si strict, avec le résultat partiel attaché
    """
    left = _as_args(X.left.arity, left_args)
    right = _as_args(X.right.arity, right_args)
    Q = as_matrix(Q)
    if Q.shape[0] != left.dim or Q.shape[0] != right.dim:
        raise ValueError(f"Dimensions incompatibles: Q {Q.shape[0]}, gauche {left.dim}, droite {right.dim}")

    series = series_apply(X, left, Q, right, N=N, n_min=n_min, stop_early=stop_early, strict=strict)
    logger.debug(f"DOI {X.label}: N={series.n_used}, plateau={'✅' if series.converged else '❌'}")
    return DoiResult(
        value=series.value,
        n_used=series.n_used,
        converged=series.converged,
        certificate=float(X.certificate),
        history=series.history,
        series=series,
    )


def _diff_norms(P1: CommutingDissipativePair, P2: CommutingDissipativePair):
    return operator_norm(P1.L.A - P2.L.A), operator_norm(P1.M.A - P2.M.A)


def _certificate_check(value: ComplexMatrix, certificate: float, Q: ComplexMatrix) -> Dict:
    lhs = operator_norm(value)
    rhs = certificate * operator_norm(Q)
    slack = config.series_tolerance(lhs)
    return {"lhs": lhs, "rhs": rhs, "ok": bool(lhs <= rhs + slack)}


# ---------------------------------------------------------------------------
# Perturbation d'une matrice
# ---------------------------------------------------------------------------

def perturb_single(f: ExpSum1D, L, M, N: Optional[int] = None, tol: Optional[float] = None) -> Dict:
    """
    f(L) − f(M) = DOI(Δf ; L − M)

    Returns:
        Rapport : doi_value, direct_value, residual, borne de certificat et contraction S₂
    """
    L, M = certify(L), certify(M)
    if L.dim != M.dim:
        raise ValueError(f"Dimensions différentes: {L.dim} et {M.dim}")
    N = config.DEFAULT_N if N is None else N
    tol = config.PERTURB_TOL if tol is None else tol

    expansion = sampling_expansion_1d(f, N)
    Q = L.A - M.A
    doi = doi_apply(expansion, L, Q, M)
    direct = apply_one(f, L).value - apply_one(f, M).value
    residual = operator_norm(doi.value - direct)

    certificate = _certificate_check(doi.value, expansion.certificate, Q)
    s2_lhs = schatten_norm(doi.value, 2)
    s2_rhs = f.sigma * sup_norm(f).upper * schatten_norm(Q, 2)
    s2_ok = s2_lhs <= s2_rhs + config.S2_TOL
    ok = residual <= tol and certificate["ok"] and s2_ok

    logger.debug(f"{'✅' if ok else '❌'} perturb_single: N={doi.n_used}, résidu={residual:.2e}")
    return {
        "formula": "single",
        "anchor": anchor("perturb-single"),
        "N_used": doi.n_used,
        "plateau": bool(doi.converged),
        "doi_value": doi.value,
        "direct_value": direct,
        "residual": residual,
        "tol": tol,
        "lhs": operator_norm(direct),
        "rhs": certificate["rhs"],
        "certificate": expansion.certificate,
        "certificate_ok": certificate["ok"],
        "s2_lhs": s2_lhs,
        "s2_rhs": s2_rhs,
        "s2_ok": bool(s2_ok),
        "ok": bool(ok),
        "partial_sum_history": doi.history,
    }


# ---------------------------------------------------------------------------
# Perturbation de paires commutatives
# ---------------------------------------------------------------------------

def _vary_m(f: ExpSum2D, P1, P2, N: int, n_min: int, stop_early: bool):
    """f(L₁, M₁) − f(L₁, M₂) : b_n sur (L₁, M₁), ψ_n sur M₂, Q = M₁ − M₂"""
    expansion = sampling_expansion_2d(f, "y", N)
    Q = P1.M.A - P2.M.A
    return expansion, Q, doi_apply(expansion, P1, Q, P2.M, N=N, n_min=n_min, stop_early=stop_early)


def _vary_l(f: ExpSum2D, P1, P2, N: int, n_min: int, stop_early: bool):
    """f(L₁, M₂) − f(L₂, M₂) : ψ_n sur L₁, a_n sur (L₂, M₂), Q = L₁ − L₂"""
    expansion = sampling_expansion_2d(f, "x", N)
    Q = P1.L.A - P2.L.A
    return expansion, Q, doi_apply(expansion, P1.L, Q, P2, N=N, n_min=n_min, stop_early=stop_early)


def perturb_pair(f: ExpSum2D, P1, P2, formula: str = "glafor", N: Optional[int] = None,
                 stop_early: bool = True, tol: Optional[float] = None) -> Dict:
    """
    Formules de perturbation pour deux paires commutatives

    31 (alias vary-m) : f(L₁,M₁) − f(L₁,M₂) ; 32 (alias vary-l) : f(L₁,M₂) − f(L₂,M₂) ;
    glafor (alias total) : somme des deux,
    le terme mixte f(L₁,M₂) étant calculé par la série ancrée.

    Raises:
        NotCommuting
    """
    formula = canonical_formula(formula)
    P1, P2 = _as_args(2, P1), _as_args(2, P2)
    if P1.dim != P2.dim:
        raise NotCommuting(f"Dimensions différentes: {P1.dim} et {P2.dim}")
    N = config.DEFAULT_N if N is None else N
    tol = config.PAIR_TOL if tol is None else tol

    report: Dict = {"formula": formula, "anchor": anchor(f"perturb-pair-{formula}")}
    if formula == "31":
        expansion, Q, doi = _vary_m(f, P1, P2, N, 0, stop_early)
        mixed = apply_pair_noncommuting(f, P1.L, P2.M, N)
        direct = apply_pair_commuting(f, P1).value - mixed.value
        plateau = doi.converged and mixed.details["converged"]
        value, n_used, history, certificate = doi.value, doi.n_used, doi.history, expansion.certificate
        report["anchor_certificate"] = anchor_certificate(f)["bound"]
        report["certificate_ok"] = _certificate_check(value, certificate, Q)["ok"]
    elif formula == "32":
        expansion, Q, doi = _vary_l(f, P1, P2, N, 0, stop_early)
        mixed = apply_pair_noncommuting(f, P1.L, P2.M, N)
        direct = mixed.value - apply_pair_commuting(f, P2).value
        plateau = doi.converged and mixed.details["converged"]
        value, n_used, history, certificate = doi.value, doi.n_used, doi.history, expansion.certificate
        report["certificate_ok"] = _certificate_check(value, certificate, Q)["ok"]
    else:
        exp_m, Q_m, doi_m = _vary_m(f, P1, P2, N, 0, stop_early)
        exp_l, Q_l, doi_l = _vary_l(f, P1, P2, N, 0, stop_early)
        # Somme des deux séries au même N
        n_used = max(doi_m.n_used, doi_l.n_used)
        if doi_m.n_used < n_used:
            exp_m, Q_m, doi_m = _vary_m(f, P1, P2, n_used, 0, False)
        if doi_l.n_used < n_used:
            exp_l, Q_l, doi_l = _vary_l(f, P1, P2, n_used, 0, False)
        value = doi_m.value + doi_l.value
        plateau = doi_m.converged and doi_l.converged
        direct = apply_pair_commuting(f, P1).value - apply_pair_commuting(f, P2).value
        history = [{"N": h["N"], "31": h, "32": g} for h, g in zip(doi_m.history, doi_l.history)]
        certificate = exp_m.certificate + exp_l.certificate
        report["parts"] = {"31": doi_m.value, "32": doi_l.value}
        report["certificate_ok"] = (_certificate_check(doi_m.value, exp_m.certificate, Q_m)["ok"]
                                    and _certificate_check(doi_l.value, exp_l.certificate, Q_l)["ok"])

    residual = operator_norm(value - direct)
    d_L, d_M = _diff_norms(P1, P2)
    ok = residual <= tol and report["certificate_ok"]
    logger.debug(f"{'✅' if ok else '❌'} perturb_pair[{formula}]: N={n_used}, résidu={residual:.2e}")
    report.update({
        "N_used": int(n_used),
        "plateau": bool(plateau),
        "doi_value": value,
        "direct_value": direct,
        "residual": residual,
        "tol": tol,
        "lhs": operator_norm(direct),
        "rhs": certificate * max(d_L, d_M),
        "certificate": certificate,
        "ok": bool(ok),
        "partial_sum_history": history,
    })
    return report


def lipschitz_certificate(f: ExpSum2D, P1, P2) -> Dict:
    """‖f(L₁,M₁) − f(L₂,M₂)‖ <= (2/√π)σ‖f‖(‖ΔL‖ + ‖ΔM‖)"""
    P1, P2 = _as_args(2, P1), _as_args(2, P2)
    lhs = operator_norm(apply_pair_commuting(f, P1).value - apply_pair_commuting(f, P2).value)
    d_L, d_M = _diff_norms(P1, P2)
    rhs = TWO_OVER_SQRT_PI * f.sigma * sup_norm(f).upper * (d_L + d_M)
    return {
        "kind": "lipschitz",
        "anchor": anchor("bound-lipschitz"),
        "lhs": lhs,
        "rhs": rhs,
        "ok": bool(lhs <= rhs + config.tolerance(rhs)),
    }


def besov_lipschitz(f: ExpSum2D, P1, P2, window: Optional[besov.WindowW] = None) -> Dict:
    """
    Borne agrégée par bandes : Σ_n 2^{n+1}(2/√π)‖f_n‖(‖ΔL‖ + ‖ΔM‖)
    """
    P1, P2 = _as_args(2, P1), _as_args(2, P2)
    decomposition = besov.decompose(f, window)
    lhs = operator_norm(apply_pair_commuting(f, P1).value - apply_pair_commuting(f, P2).value)
    d_L, d_M = _diff_norms(P1, P2)

    bands = []
    for n, f_n in decomposition.bands:
        bound = sup_norm(f_n).upper
        bands.append({
            "n": int(n),
            "sigma": float(2.0 ** (n + 1)),
            "sup_norm_upper": bound,
            "contribution": float(2.0 ** (n + 1) * TWO_OVER_SQRT_PI * bound * (d_L + d_M)),
        })
    rhs = float(np.sum([b["contribution"] for b in bands])) if bands else 0.0
    return {
        "kind": "besov",
        "anchor": anchor("bound-besov"),
        "lhs": lhs,
        "rhs": rhs,
        "constant": complex(decomposition.constant),
        "bands": bands,
        "ok": bool(lhs <= rhs + config.tolerance(rhs)),
    }


def _interpolated(P1: CommutingDissipativePair, P2: CommutingDissipativePair, t: float):
    """
    Paire commutative à distance ~t de P1

    L'interpolation linéaire P1 + t(P2 − P1) n'est commutative que si les deux
    paires partagent un générateur ; sinon on translate P1 par des multiples
    réels de l'identité de mêmes normes (la paire reste polynomiale en le
    générateur de P1 et dissipative).

    Returns:
        (paire, "linear" ou "shift")
    """
    L = P1.L.A + t * (P2.L.A - P1.L.A)
    M = P1.M.A + t * (P2.M.A - P1.M.A)
    try:
        return check_commuting(L, M), "linear"
    except NotCommuting:
        d_L, d_M = _diff_norms(P1, P2)
        I = identity(P1.dim)
        return check_commuting(P1.L.A + t * d_L * I, P1.M.A + t * d_M * I), "shift"


def holder_schatten_report(f: ExpSum2D, P1, P2, alpha: float, p: float,
                           modulus: Optional[Modulus] = None, halvings: int = 3) -> Dict:
    """
    Quantités de type Hölder et Schatten–von Neumann ; rapports empiriques, aucune constante affirmée

    Raises:
        InvalidExponent: si α ∉ ]0, 1[ ou p <= 1
    """
    if not 0 < alpha < 1:
        raise InvalidExponent(f"α doit être dans ]0, 1[: {alpha}", alpha=alpha)
    if not p > 1:
        raise InvalidExponent(f"p doit être > 1: {p}", p=p)
    P1, P2 = _as_args(2, P1), _as_args(2, P2)
    modulus = Modulus.power(alpha) if modulus is None else modulus
    f_P1 = apply_pair_commuting(f, P1).value

    def measure(P):
        diff = f_P1 - apply_pair_commuting(f, P).value
        d_L, d_M = _diff_norms(P1, P)
        dL_sp = schatten_norm(P1.L.A - P.L.A, p)
        dM_sp = schatten_norm(P1.M.A - P.M.A, p)
        quantities = {
            "holder": max(d_L, d_M) ** alpha,
            "schatten": max(dL_sp, dM_sp) ** alpha,
        }
        try:
            quantities["omega_star"] = omega_star(modulus, max(d_L, d_M)) if max(d_L, d_M) > 0 else 0.0
        except DivergentModulus:
            quantities["omega_star"] = np.inf
        lhs_op = operator_norm(diff)
        lhs_sp = schatten_norm(diff, p / alpha)
        ratios = {
            "holder": lhs_op / quantities["holder"] if quantities["holder"] > 0 else None,
            "omega_star": (lhs_op / quantities["omega_star"]
                           if 0 < quantities["omega_star"] < np.inf else None),
            "schatten": lhs_sp / quantities["schatten"] if quantities["schatten"] > 0 else None,
        }
        return {"lhs_op": lhs_op, "lhs_sp": lhs_sp, "quantities": quantities, "ratios": ratios}

    report = {
        "kind": "holder-schatten",
        "anchor": anchor("bound-holder-schatten"),
        "alpha": alpha,
        "p": p,
        "schatten_exponent": p / alpha,
        **measure(P2),
    }

    # Trajectoire de perturbations divisées par deux, dans une famille commutative
    scaling: List[Dict] = []
    for k in range(1, halvings + 1):
        P, path = _interpolated(P1, P2, 2.0 ** -k)
        entry = measure(P)
        scaling.append({"halving": k, "path": path, "ratio": entry["ratios"]["holder"],
                        "lhs_op": entry["lhs_op"]})
    if any(s["path"] == "shift" for s in scaling):
        logger.debug("⚠️ Interpolation linéaire non commutative, trajectoire par translations réelles")
    report["scaling"] = scaling

    if scaling:
        ratios = [s["ratio"] for s in scaling]
        if all(s["path"] == "linear" for s in scaling):
            ratios.insert(0, report["ratios"]["holder"])
        factors = [b / a for a, b in zip(ratios, ratios[1:]) if a and b]
        report["scaling_factors"] = factors
        report["scaling_ok"] = bool(all(q <= 2 ** (1 - alpha) + 1e-9 for q in factors))
    report["finite"] = bool(np.isfinite(report["lhs_op"]) and np.isfinite(report["lhs_sp"]))
    report["ok"] = report["finite"]
    return report


# ---------------------------------------------------------------------------
# Identités de transport et de régularisation
# ---------------------------------------------------------------------------

def _bounded_sides(L, M, X: ComplexMatrix) -> ComplexMatrix:
    """(I − iL)^{-1}·X·(I − iM)^{-1}"""
    I = identity(L.dim)
    left = solve(I - 1j * L.A, X)
    return solve((I - 1j * M.A).T, left.T).T


def transport_check(f: ExpSum1D, L, M, N: int = 1000) -> Dict:
    """DOI(Δf ; ι(L) − ι(M)) = (I − iL)^{-1}·DOI(Δf ; L − M)·(I − iM)^{-1}"""
    L, M = certify(L), certify(M)
    expansion = sampling_expansion_1d(f, N)
    via_iota = doi_apply(expansion, L, iota(L) - iota(M), M, stop_early=False)
    plain = doi_apply(expansion, L, L.A - M.A, M, stop_early=False)
    rhs = _bounded_sides(L, M, plain.value)
    residual = operator_norm(via_iota.value - rhs)
    return {
        "anchor": anchor("resolvent-transport"),
        "N_used": via_iota.n_used,
        "residual": residual,
        "ok": bool(residual <= config.tolerance(operator_norm(rhs)) * 1e3),
    }


def resolvent_sandwich_check(f: ExpSum1D, L, M, N: Optional[int] = None) -> Dict:
    """DOI(Δf ; ι(L) − ι(M)) = (I − iL)^{-1}(f(L) − f(M))(I − iM)^{-1}"""
    L, M = certify(L), certify(M)
    N = config.DEFAULT_N if N is None else N
    expansion = sampling_expansion_1d(f, N)
    doi = doi_apply(expansion, L, iota(L) - iota(M), M)
    rhs = _bounded_sides(L, M, apply_one(f, L).value - apply_one(f, M).value)
    residual = operator_norm(doi.value - rhs)
    return {
        "anchor": anchor("resolvent-sandwich"),
        "N_used": doi.n_used,
        "residual": residual,
        "ok": bool(residual <= config.PERTURB_TOL),
        "partial_sum_history": doi.history,
    }


def regularized_perturbation(f: ExpSum1D, L, M, eps: float, N: Optional[int] = None) -> Dict:
    """
    f_ε(L) − f_ε(M) = (DOI(Δf ; L − M) + iε f_ε(L)(L − M))(I − iεM)^{-1}
    """
    if eps <= 0:
        raise ValueError(f"ε doit être > 0: {eps}")
    L, M = certify(L), certify(M)
    N = config.DEFAULT_N if N is None else N
    f_eps = RegularizedFunction(f, float(eps))
    f_eps_L = apply_one(f_eps, L).value
    lhs = f_eps_L - apply_one(f_eps, M).value

    Q = L.A - M.A
    doi = doi_apply(sampling_expansion_1d(f, N), L, Q, M)
    inner = doi.value + 1j * eps * f_eps_L @ Q
    I = identity(L.dim)
    rhs = solve((I - 1j * eps * M.A).T, inner.T).T
    residual = operator_norm(lhs - rhs)
    return {
        "anchor": anchor("regularized-difference"),
        "eps": eps,
        "N_used": doi.n_used,
        "residual": residual,
        "ok": bool(residual <= config.PERTURB_TOL),
    }


REPORT_BUILDERS: Dict[str, Callable[..., Dict]] = {
    "lipschitz": lipschitz_certificate,
    "besov": besov_lipschitz,
    "holder-schatten": holder_schatten_report,
}
