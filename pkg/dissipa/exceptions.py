"""
Exceptions de la bibliothèque Dissipa

Chaque exception transporte les grandeurs mesurées (résidus, conditionnements,
résultats partiels) pour que les rapports puissent les afficher.
"""
from typing import Any, Optional


class DissipaError(Exception):
    """Erreur de base"""

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.details = details

    def to_dict(self) -> dict:
        return {"error": type(self).__name__, "message": str(self), **_jsonable(self.details)}


def _jsonable(details: dict) -> dict:
    out = {}
    for key, value in details.items():
        if isinstance(value, complex):
            out[key] = [value.real, value.imag]
        elif isinstance(value, (int, float, str, bool)) or value is None:
            out[key] = value
        else:
            out[key] = repr(value)
    return out


class InvalidMatrix(DissipaError):
    """Matrice non carrée, non finie ou trop grande"""


class DefectiveMatrix(DissipaError):
    """Base de vecteurs propres trop mal conditionnée"""

    def __init__(self, message: str, condition: Optional[float] = None):
        super().__init__(message, condition=condition)
        self.condition = condition


class SingularMatrix(DissipaError):
    """Système linéaire singulier ou presque"""


class InvalidExponent(DissipaError):
    """Exposant de Schatten p < 1"""


class NotDissipative(DissipaError):
    """Im <Ax, x> < 0 pour un vecteur x"""

    def __init__(self, message: str, margin: Optional[float] = None):
        super().__init__(message, margin=margin)
        self.margin = margin


class NearSingularShift(DissipaError):
    """L + iI presque singulière"""


class UnitEigenvalueAtOne(DissipaError):
    """1 est (presque) valeur propre de la contraction"""


class NotContraction(DissipaError):
    """‖T‖ > 1 au-delà de la tolérance"""


class NotCommuting(DissipaError):
    """Paire non commutative (commutateur, résolvantes ou transformées de Cayley)"""

    def __init__(self, message: str, commutator_residual: float = 0.0,
                 resolvent_residual: float = 0.0, cayley_residual: float = 0.0):
        super().__init__(
            message,
            commutator_residual=commutator_residual,
            resolvent_residual=resolvent_residual,
            cayley_residual=cayley_residual,
        )
        self.commutator_residual = commutator_residual
        self.resolvent_residual = resolvent_residual
        self.cayley_residual = cayley_residual


class LowerHalfPlane(DissipaError):
    """Point d'évaluation dans le demi-plan inférieur"""


class InvalidFunction(DissipaError):
    """Somme d'exponentielles mal formée (fréquence hors bande, coefficient non fini)"""


class QuadratureNotConverged(DissipaError):
    """La quadrature sur la droite réelle ne se stabilise pas"""


class DivergentModulus(DissipaError):
    """ω_* diverge (intégrale de ω(t)/t² non convergente)"""


class RouteUnavailable(DissipaError):
    """Aucune route du calcul fonctionnel n'est applicable"""


class SeriesNotConverged(DissipaError):
    """La règle du plateau n'est pas satisfaite avant N maximal"""

    def __init__(self, message: str, result: Any = None, **details: Any):
        super().__init__(message, **details)
        self.result = result
