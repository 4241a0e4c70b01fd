"""
Fonctions à bande limitée analytiques dans le demi-plan supérieur

Modèle calculable : sommes finies d'exponentielles Σ c_j e^{iξ_j z} avec
0 <= ξ_j <= σ (et ‖(ξ_j, η_j)‖ <= σ en deux variables). On y trouve les
différences divisées, les développements d'échantillonnage, la forme
ancrée utilisée pour les paires non commutatives, la régularisation f_ε
et les modules de continuité.
"""
import logging
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import integrate, special

from .config import config
from .exceptions import DivergentModulus, InvalidFunction, LowerHalfPlane, QuadratureNotConverged
from .haagerup import FactorFamily, HaagerupExpansion, SeparableForm, index_axis
from .utils.series import sum_symmetric

logger = logging.getLogger(__name__)

TWO_OVER_SQRT_PI = 2.0 / np.sqrt(np.pi)


def expm1_ratio(z) -> np.ndarray:
    """E(z) = (e^z − 1)/z, prolongée par E(0) = 1"""
    z = np.asarray(z, dtype=np.complex128)
    small = np.abs(z) < 1e-8
    safe = np.where(small, 1.0, z)
    return np.where(small, 1.0 + z / 2, np.expm1(safe) / safe)


def _check_upper(*points, tol: Optional[float] = None):
    for z in points:
        z = np.asarray(z, dtype=np.complex128)
        if z.size == 0:
            continue
        bound = config.tolerance(float(np.max(np.abs(z)))) if tol is None else tol
        if np.min(z.imag) < -bound:
            raise LowerHalfPlane(f"Point sous l'axe réel: Im = {np.min(z.imag):.3e}")


# ---------------------------------------------------------------------------
# Sommes d'exponentielles
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ExpSum1D:
    """f(z) = Σ c_j e^{iξ_j z}, 0 <= ξ_j <= σ"""

    sigma: float
    freqs: np.ndarray
    coeffs: np.ndarray

    dims = 1

    def __post_init__(self):
        freqs = np.asarray(self.freqs, dtype=float).reshape(-1)
        coeffs = np.asarray(self.coeffs, dtype=np.complex128).reshape(-1)
        if freqs.shape != coeffs.shape:
            raise InvalidFunction(f"{freqs.size} fréquences pour {coeffs.size} coefficients")
        if not (np.isfinite(self.sigma) and self.sigma > 0):
            raise InvalidFunction(f"Largeur de bande invalide: σ={self.sigma}")
        if not (np.all(np.isfinite(freqs)) and np.all(np.isfinite(coeffs))):
            raise InvalidFunction("Fréquences ou coefficients non finis")
        if freqs.size and (freqs.min() < 0 or freqs.max() > self.sigma * (1 + 1e-12)):
            raise InvalidFunction(f"Fréquence hors de [0, σ={self.sigma}]")
        object.__setattr__(self, "freqs", freqs)
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "sigma", float(self.sigma))

    @classmethod
    def from_terms(cls, sigma: float, terms: Iterable[Tuple[float, complex]]) -> "ExpSum1D":
        terms = list(terms)
        return cls(sigma, [t[0] for t in terms], [t[1] for t in terms])

    @classmethod
    def constant(cls, c: complex = 1.0, sigma: float = 1.0) -> "ExpSum1D":
        return cls(sigma, [0.0], [c])

    @classmethod
    def exponential(cls, xi: float, c: complex = 1.0, sigma: Optional[float] = None) -> "ExpSum1D":
        return cls(sigma if sigma is not None else max(xi, 1.0), [xi], [c])

    def __call__(self, z) -> np.ndarray:
        return evaluate(self, z)

    def merged(self) -> "ExpSum1D":
        """Fusionne les fréquences égales et supprime les coefficients nuls"""
        keys, inverse = np.unique(self.freqs, return_inverse=True)
        coeffs = np.zeros(keys.size, dtype=np.complex128)
        np.add.at(coeffs, inverse, self.coeffs)
        keep = coeffs != 0
        return ExpSum1D(self.sigma, keys[keep], coeffs[keep])

    def coefficient_at(self, xi: float) -> complex:
        return complex(np.sum(self.coeffs[np.isclose(self.freqs, xi, rtol=0, atol=1e-12)]))

    def derivative(self) -> "ExpSum1D":
        return ExpSum1D(self.sigma, self.freqs, 1j * self.freqs * self.coeffs)

    def dilate(self, factor: float) -> "ExpSum1D":
        """z -> f(factor·z)"""
        return ExpSum1D(self.sigma * factor, self.freqs * factor, self.coeffs)

    def with_sigma(self, sigma: float) -> "ExpSum1D":
        return ExpSum1D(sigma, self.freqs, self.coeffs)

    def __add__(self, other: "ExpSum1D") -> "ExpSum1D":
        return ExpSum1D(max(self.sigma, other.sigma),
                        np.concatenate([self.freqs, other.freqs]),
                        np.concatenate([self.coeffs, other.coeffs])).merged()

    def __neg__(self) -> "ExpSum1D":
        return ExpSum1D(self.sigma, self.freqs, -self.coeffs)

    def __sub__(self, other: "ExpSum1D") -> "ExpSum1D":
        return self + (-other)

    def __mul__(self, other: Union["ExpSum1D", complex, float]) -> "ExpSum1D":
        if isinstance(other, ExpSum1D):
            freqs = (self.freqs[:, None] + other.freqs[None, :]).ravel()
            coeffs = (self.coeffs[:, None] * other.coeffs[None, :]).ravel()
            return ExpSum1D(self.sigma + other.sigma, freqs, coeffs).merged()
        return ExpSum1D(self.sigma, self.freqs, self.coeffs * complex(other))

    __rmul__ = __mul__

    def as_family(self) -> FactorFamily:
        def evaluate_family(indices, z):
            return np.broadcast_to(evaluate(self, z, tol=np.inf), (indices.size,) + z.shape)
        return FactorFamily(arity=1, evaluate=evaluate_family, label="expsum1d")


@dataclass(frozen=True, eq=False)
class ExpSum2D:
    """f(z1, z2) = Σ c_j e^{i(ξ_j z1 + η_j z2)}, ξ_j, η_j >= 0, ‖(ξ_j, η_j)‖ <= σ"""

    sigma: float
    freqs: np.ndarray
    coeffs: np.ndarray

    dims = 2

    def __post_init__(self):
        freqs = np.asarray(self.freqs, dtype=float).reshape(-1, 2)
        coeffs = np.asarray(self.coeffs, dtype=np.complex128).reshape(-1)
        if freqs.shape[0] != coeffs.shape[0]:
            raise InvalidFunction(f"{freqs.shape[0]} fréquences pour {coeffs.size} coefficients")
        if not (np.isfinite(self.sigma) and self.sigma > 0):
            raise InvalidFunction(f"Largeur de bande invalide: σ={self.sigma}")
        if not (np.all(np.isfinite(freqs)) and np.all(np.isfinite(coeffs))):
            raise InvalidFunction("Fréquences ou coefficients non finis")
        if freqs.size:
            if freqs.min() < 0:
                raise InvalidFunction("Fréquence négative")
            if np.linalg.norm(freqs, axis=1).max() > self.sigma * (1 + 1e-12):
                raise InvalidFunction(f"Fréquence hors de la boule de rayon σ={self.sigma}")
        object.__setattr__(self, "freqs", freqs)
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "sigma", float(self.sigma))

    @property
    def xi(self) -> np.ndarray:
        return self.freqs[:, 0]

    @property
    def eta(self) -> np.ndarray:
        return self.freqs[:, 1]

    @classmethod
    def from_terms(cls, sigma: float, terms: Iterable[Tuple[Sequence[float], complex]]) -> "ExpSum2D":
        terms = list(terms)
        return cls(sigma, [list(t[0]) for t in terms] or np.zeros((0, 2)), [t[1] for t in terms])

    @classmethod
    def of_first(cls, g: ExpSum1D, sigma: Optional[float] = None) -> "ExpSum2D":
        """(x, y) -> g(x)"""
        return cls(sigma or g.sigma, np.column_stack([g.freqs, np.zeros_like(g.freqs)]), g.coeffs)

    @classmethod
    def of_second(cls, g: ExpSum1D, sigma: Optional[float] = None) -> "ExpSum2D":
        """(x, y) -> g(y)"""
        return cls(sigma or g.sigma, np.column_stack([np.zeros_like(g.freqs), g.freqs]), g.coeffs)

    def __call__(self, z1, z2) -> np.ndarray:
        return evaluate(self, z1, z2)

    def merged(self) -> "ExpSum2D":
        keys, inverse = np.unique(self.freqs, axis=0, return_inverse=True)
        coeffs = np.zeros(keys.shape[0], dtype=np.complex128)
        np.add.at(coeffs, np.asarray(inverse).reshape(-1), self.coeffs)
        keep = coeffs != 0
        return ExpSum2D(self.sigma, keys[keep], coeffs[keep])

    def coefficient_at(self, xi: float, eta: float) -> complex:
        mask = np.isclose(self.xi, xi, rtol=0, atol=1e-12) & np.isclose(self.eta, eta, rtol=0, atol=1e-12)
        return complex(np.sum(self.coeffs[mask]))

    def partial_derivative(self, axis: str) -> "ExpSum2D":
        factor = self.xi if axis == "x" else self.eta
        return ExpSum2D(self.sigma, self.freqs, 1j * factor * self.coeffs)

    def restrict_second(self, t: float = 0.0) -> ExpSum1D:
        """s -> f(s, t) pour t réel"""
        return ExpSum1D(self.sigma, self.xi, self.coeffs * np.exp(1j * self.eta * t)).merged()

    def dilate(self, factor: float) -> "ExpSum2D":
        return ExpSum2D(self.sigma * factor, self.freqs * factor, self.coeffs)

    def times_second_variable(self, g: ExpSum1D) -> "ExpSum2D":
        """(s, t) -> g(t)·f(s, t)"""
        xi = np.repeat(self.xi, g.freqs.size)
        eta = (self.eta[:, None] + g.freqs[None, :]).ravel()
        coeffs = (self.coeffs[:, None] * g.coeffs[None, :]).ravel()
        return ExpSum2D(self.sigma + g.sigma, np.column_stack([xi, eta]), coeffs).merged()

    def __add__(self, other: "ExpSum2D") -> "ExpSum2D":
        return ExpSum2D(max(self.sigma, other.sigma),
                        np.vstack([self.freqs, other.freqs]),
                        np.concatenate([self.coeffs, other.coeffs])).merged()

    def __neg__(self) -> "ExpSum2D":
        return ExpSum2D(self.sigma, self.freqs, -self.coeffs)

    def __sub__(self, other: "ExpSum2D") -> "ExpSum2D":
        return self + (-other)

    def __mul__(self, c: complex) -> "ExpSum2D":
        return ExpSum2D(self.sigma, self.freqs, self.coeffs * complex(c))

    __rmul__ = __mul__

    def as_family(self) -> FactorFamily:
        def evaluate_family(indices, z1, z2):
            shape = np.broadcast_shapes(np.shape(z1), np.shape(z2))
            return np.broadcast_to(evaluate(self, z1, z2, tol=np.inf), (indices.size,) + shape)
        return FactorFamily(arity=2, evaluate=evaluate_family, label="expsum2d",
                            separable=separable_form(self))


ExpSum = Union[ExpSum1D, ExpSum2D]


def evaluate(f: ExpSum, *z, tol: Optional[float] = None) -> np.ndarray:
    """
    Évalue Σ c_j e^{iξ_j z} (resp. Σ c_j e^{i(ξ_j z1 + η_j z2)}) en des points de clos ℂ₊

    Raises:
        LowerHalfPlane: si Im z < −tol
    """
    if len(z) != f.dims:
        raise ValueError(f"{len(z)} coordonnées pour une fonction de {f.dims} variable(s)")
    if tol is None or np.isfinite(tol):
        _check_upper(*z, tol=tol)
    if f.dims == 1:
        z1 = np.asarray(z[0], dtype=np.complex128)
        return np.exp(1j * z1[..., None] * f.freqs) @ f.coeffs
    z1, z2 = np.broadcast_arrays(np.asarray(z[0], dtype=np.complex128), np.asarray(z[1], dtype=np.complex128))
    return np.exp(1j * (z1[..., None] * f.xi + z2[..., None] * f.eta)) @ f.coeffs


class SupNorm(NamedTuple):
    upper: float
    grid_estimate: float


def real_grid(points: Optional[int] = None, half_width: Optional[float] = None) -> np.ndarray:
    points = config.GRID_POINTS if points is None else points
    half_width = config.GRID_HALF_WIDTH if half_width is None else half_width
    return np.linspace(-half_width, half_width, points)


def sup_norm(f: ExpSum, grid: Optional[np.ndarray] = None) -> SupNorm:
    """
    Borne rigoureuse Σ|c_j| (après fusion) et estimation sur une grille réelle
    """
    merged = f.merged()
    upper = float(np.sum(np.abs(merged.coeffs)))
    if f.dims == 1:
        grid = real_grid() if grid is None else np.asarray(grid)
        values = evaluate(merged, grid)
    else:
        grid = real_grid(config.GRID_POINTS_2D, config.GRID_HALF_WIDTH / 2) if grid is None else np.asarray(grid)
        values = evaluate(merged, grid[:, None], grid[None, :])
    estimate = float(np.max(np.abs(values))) if values.size else 0.0
    return SupNorm(upper=upper, grid_estimate=min(estimate, upper))


# ---------------------------------------------------------------------------
# Différences divisées
# ---------------------------------------------------------------------------

def _dd_exponentials(freqs: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Δ(e^{iξ·})(x, y) = e^{iξy}·iξ·E(iξ(x − y)), forme sans annulation"""
    d = (x - y)[..., None]
    return np.exp(1j * freqs * y[..., None]) * (1j * freqs) * expm1_ratio(1j * freqs * d)


def divided_difference(f: ExpSum1D, x, y, switch: Optional[float] = None) -> np.ndarray:
    """
    Δf(x, y) = (f(x) − f(y))/(x − y), f'(x) sur la diagonale

    Pour |x − y| <= switch la forme terme à terme Σ c_j e^{iξ_j y}(e^{iξ_j(x−y)} − 1)/(x − y)
    évite l'annulation catastrophique.
    """
    switch = config.SWITCH_DELTA if switch is None else switch
    x, y = np.broadcast_arrays(np.asarray(x, dtype=np.complex128), np.asarray(y, dtype=np.complex128))
    _check_upper(x, y)
    d = x - y
    far = np.abs(d) > switch
    stable = _dd_exponentials(f.freqs, x, y) @ f.coeffs
    if not np.any(far):
        return stable
    safe = np.where(far, d, 1.0)
    direct = (evaluate(f, x, tol=np.inf) - evaluate(f, y, tol=np.inf)) / safe
    return np.where(far, direct, stable)


def partial_dd(f: ExpSum2D, axis: str, a, b, c, switch: Optional[float] = None) -> np.ndarray:
    """
    Différences divisées partielles

    axis="x": Δ_x f(x1; x2, y2) = (f(x1, y2) − f(x2, y2))/(x1 − x2), points (x1, x2, y2)
    axis="y": Δ_y f(x1; y1, y2) = (f(x1, y1) − f(x1, y2))/(y1 − y2), points (x1, y1, y2)
    """
    if axis not in ("x", "y"):
        raise ValueError(f"Axe inconnu: {axis}")
    switch = config.SWITCH_DELTA if switch is None else switch
    a, b, c = np.broadcast_arrays(*[np.asarray(p, dtype=np.complex128) for p in (a, b, c)])
    _check_upper(a, b, c)

    if axis == "x":
        x1, x2, y2 = a, b, c
        d = x1 - x2
        stable = (_dd_exponentials(f.xi, x1, x2) * np.exp(1j * f.eta * y2[..., None])) @ f.coeffs
        direct_num = lambda: evaluate(f, x1, y2, tol=np.inf) - evaluate(f, x2, y2, tol=np.inf)
    else:
        x1, y1, y2 = a, b, c
        d = y1 - y2
        stable = (_dd_exponentials(f.eta, y1, y2) * np.exp(1j * f.xi * x1[..., None])) @ f.coeffs
        direct_num = lambda: evaluate(f, x1, y1, tol=np.inf) - evaluate(f, x1, y2, tol=np.inf)

    far = np.abs(d) > switch
    if not np.any(far):
        return stable
    return np.where(far, direct_num() / np.where(far, d, 1.0), stable)


# ---------------------------------------------------------------------------
# Développements d'échantillonnage
# ---------------------------------------------------------------------------

def sampling_nodes(sigma: float, indices: np.ndarray) -> np.ndarray:
    """y_n = 2πn/σ"""
    return 2 * np.pi * np.asarray(indices, dtype=float) / sigma


def basis_family(sigma: float) -> FactorFamily:
    """ψ_n(y) = (e^{iσy} − 1)/(i(σy − 2πn)) = E(iσ(y − y_n))"""
    def evaluate_family(indices, y):
        nodes = index_axis(sampling_nodes(sigma, indices), y.ndim)
        return expm1_ratio(1j * sigma * (y[None, ...] - nodes))
    return FactorFamily(arity=1, evaluate=evaluate_family, label=f"psi[sigma={sigma:g}]")


def _dd_family(f: ExpSum1D) -> FactorFamily:
    """φ_n(x) = σ(f(x) − f(2πn/σ))/(σx − 2πn) = Δf(x, y_n)"""
    def evaluate_family(indices, x):
        nodes = index_axis(sampling_nodes(f.sigma, indices), x.ndim)
        return divided_difference(f, x[None, ...], nodes + 0j)
    return FactorFamily(arity=1, evaluate=evaluate_family, label="phi")


def sampling_expansion_1d(f: ExpSum1D, N: int) -> HaagerupExpansion:
    """
    Δf(x, y) = Σ_{|n|<=N} φ_n(x) ψ_n(y)

    Certificat : (2/√π)σ‖f‖ (borne ℓ² des lignes) × 1 (ℓ² des colonnes)
    """
    if N < 1:
        raise ValueError(f"Troncature invalide: N={N}")
    row = TWO_OVER_SQRT_PI * f.sigma * sup_norm(f).upper
    return HaagerupExpansion(
        left=_dd_family(f),
        right=basis_family(f.sigma),
        truncation=int(N),
        certificate=row * 1.0,
        row_bound=row,
        column_bound=1.0,
        label="sampling-1d",
    )


def separable_form(f: ExpSum2D, axis: Optional[str] = None) -> SeparableForm:
    """
    Termes produits de f (axis=None), de b_n (axis="y") ou de a_n (axis="x")

    f = Σ_j c_j e^{iξ_j x}·e^{iη_j y} ; b_n = Σ_j c_j e^{iξ_j x}·Δ(e^{iη_j ·})(y, y_n) ;
    a_n = Σ_j c_j Δ(e^{iξ_j ·})(x, x_n)·e^{iη_j y}.
    """
    sigma, coeffs = f.sigma, f.coeffs

    def exponential(freqs, weights=None):
        def part(n, j, z):
            values = np.exp(1j * index_axis(freqs[j], z.ndim) * z[None, ...])
            return values if weights is None else index_axis(weights[j], z.ndim) * values
        return part

    def divided(freqs, weights=None):
        def part(n, j, z):
            nodes = index_axis(sampling_nodes(sigma, n), z.ndim)
            k = index_axis(freqs[j], z.ndim)
            values = np.exp(1j * k * nodes) * 1j * k * expm1_ratio(1j * k * (z[None, ...] - nodes))
            return values if weights is None else index_axis(weights[j], z.ndim) * values
        return part

    if axis is None:
        left, right = exponential(f.xi, coeffs), exponential(f.eta)
    elif axis == "y":
        left, right = exponential(f.xi, coeffs), divided(f.eta)
    elif axis == "x":
        left, right = divided(f.xi, coeffs), exponential(f.eta)
    else:
        raise ValueError(f"Axe inconnu: {axis}")
    return SeparableForm(left=left, right=right, terms=int(coeffs.size))


def sampling_expansion_2d(f: ExpSum2D, axis: str, N: int) -> HaagerupExpansion:
    """
    axis="y": Δ_y f(x1; y1, y2) = Σ b_n(x1, y1) ψ_n(y2), b_n(x1, y1) = Δ_y f(x1; y1, y_n)
    axis="x": Δ_x f(x1; x2, y2) = Σ ψ_n(x1) a_n(x2, y2), a_n(x2, y2) = Δ_x f(x2; x_n, y2)
    """
    if N < 1:
        raise ValueError(f"Troncature invalide: N={N}")
    sigma = f.sigma
    bound = TWO_OVER_SQRT_PI * sigma * sup_norm(f).upper
    basis = basis_family(sigma)

    if axis == "y":
        def evaluate_b(indices, x1, y1):
            nodes = index_axis(sampling_nodes(sigma, indices), x1.ndim) + 0j
            return partial_dd(f, "y", x1[None, ...], y1[None, ...], nodes)
        left = FactorFamily(arity=2, evaluate=evaluate_b, label="b", separable=separable_form(f, "y"))
        right = basis
        row, column = bound, 1.0
    elif axis == "x":
        def evaluate_a(indices, x2, y2):
            nodes = index_axis(sampling_nodes(sigma, indices), x2.ndim) + 0j
            return partial_dd(f, "x", x2[None, ...], nodes, y2[None, ...])
        left = basis
        right = FactorFamily(arity=2, evaluate=evaluate_a, label="a", separable=separable_form(f, "x"))
        row, column = 1.0, bound
    else:
        raise ValueError(f"Axe inconnu: {axis}")

    return HaagerupExpansion(
        left=left, right=right, truncation=int(N),
        certificate=row * column, row_bound=row, column_bound=column,
        label=f"sampling-2d-{axis}",
    )


def _q_coefficients(f: ExpSum2D, indices: np.ndarray) -> np.ndarray:
    """Coefficients de q_n en s : c_j·iη_j·E(iη_j y_n), forme (len(indices), k)"""
    nodes = sampling_nodes(f.sigma, indices)[:, None]
    return f.coeffs * 1j * f.eta * expm1_ratio(1j * f.eta * nodes)


@dataclass(frozen=True, eq=False)
class AnchorExpansion:
    """
    f(s, t) = f(s, 0) + Σ_{|n|<=N} q_n(s) r_n(t)

    q_n(s) = (f(s, y_n) − f(s, 0))/y_n (q_0 = ∂f/∂t(s, 0)), r_n(t) = t·ψ_n(t)
    """

    f: ExpSum2D
    base: ExpSum1D
    expansion: HaagerupExpansion

    @property
    def truncation(self) -> int:
        return self.expansion.truncation

    def q_coefficients(self, indices: np.ndarray) -> np.ndarray:
        return _q_coefficients(self.f, indices)

    def q(self, n: int) -> ExpSum1D:
        """q_n comme somme d'exponentielles en s"""
        return ExpSum1D(self.f.sigma, self.f.xi, self.q_coefficients(np.array([n]))[0]).merged()

    def r(self, n: int) -> Callable:
        return self.expansion.right.member(n)

    def evaluate(self, s, t, N: Optional[int] = None, extrapolate: bool = True) -> np.ndarray:
        return evaluate(self.base, s) + self.expansion.evaluate((s,), (t,), N=N, extrapolate=extrapolate)


def anchor_expansion(f: ExpSum2D, N: int) -> AnchorExpansion:
    """Représentation séparée ancrée en t = 0"""
    if N < 1:
        raise ValueError(f"Troncature invalide: N={N}")
    basis = basis_family(f.sigma)

    def evaluate_q(indices, s):
        coeffs = _q_coefficients(f, indices)
        waves = np.exp(1j * s[..., None] * f.xi)
        return np.moveaxis(waves @ coeffs.T, -1, 0)

    def evaluate_r(indices, t):
        return t[None, ...] * basis(indices, t)

    expansion = HaagerupExpansion(
        left=FactorFamily(arity=1, evaluate=evaluate_q, label="q"),
        right=FactorFamily(arity=1, evaluate=evaluate_r, label="r"),
        truncation=int(N),
        certificate=np.inf,
        label="anchor",
    )
    return AnchorExpansion(f=f, base=f.restrict_second(0.0), expansion=expansion)


def anchor_certificate(f: ExpSum2D) -> Dict:
    """
    Borne de Haagerup de (1 − ix)^{-1}f(x, y) via la forme ancrée en x :
    (2/√π)σ‖f‖ + ‖f‖
    """
    upper = sup_norm(f).upper
    return {
        "sup_norm_upper": upper,
        "bound": TWO_OVER_SQRT_PI * f.sigma * upper + upper,
    }


# ---------------------------------------------------------------------------
# Régularisation f_ε
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class RegularizedFunction:
    """f_ε(z) = (1 − iεz)^{-1} f(z)"""

    f: ExpSum1D
    eps: float

    def __call__(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=np.complex128)
        return evaluate(self.f, z) / (1 - 1j * self.eps * z)

    def divided_difference(self, x, y) -> np.ndarray:
        """Δf_ε : rapport direct loin de la diagonale, forme développée sinon"""
        x, y = np.broadcast_arrays(np.asarray(x, dtype=np.complex128), np.asarray(y, dtype=np.complex128))
        d = x - y
        far = np.abs(d) > config.SWITCH_DELTA
        ex, ey = 1 - 1j * self.eps * x, 1 - 1j * self.eps * y
        expanded = divided_difference(self.f, x, y) / ex + 1j * self.eps * evaluate(self.f, y) / (ex * ey)
        direct = (self(x) - self(y)) / np.where(far, d, 1.0)
        return np.where(far, direct, expanded)

    def identity_rhs(self, x, y) -> np.ndarray:
        """Δf(x, y)(1 − iεy)^{-1} + iε f_ε(x)(1 − iεy)^{-1}"""
        x, y = np.broadcast_arrays(np.asarray(x, dtype=np.complex128), np.asarray(y, dtype=np.complex128))
        ey = 1 - 1j * self.eps * y
        return divided_difference(self.f, x, y) / ey + 1j * self.eps * self(x) / ey


class Regularization(NamedTuple):
    function: RegularizedFunction
    residual: float


def random_upper_points(rng: np.random.Generator, size: int, scale: float = 5.0) -> np.ndarray:
    return scale * rng.standard_normal(size) + 1j * np.abs(rng.standard_normal(size))


def regularize_eps(f: ExpSum1D, eps: float, points: Optional[Tuple[np.ndarray, np.ndarray]] = None,
                   samples: int = 10_000, seed: int = 0) -> Regularization:
    """
    f_ε et le résidu max de Δf_ε(x, y) = Δf(x, y)(1 − iεy)^{-1} + iε f_ε(x)(1 − iεy)^{-1}
    """
    if eps <= 0:
        raise ValueError(f"ε doit être > 0: {eps}")
    f_eps = RegularizedFunction(f, float(eps))
    if points is None:
        rng = np.random.default_rng(seed)
        points = (random_upper_points(rng, samples), random_upper_points(rng, samples))
    x, y = points
    residual = float(np.max(np.abs(f_eps.divided_difference(x, y) - f_eps.identity_rhs(x, y))))
    return Regularization(function=f_eps, residual=residual)


# ---------------------------------------------------------------------------
# Identités scalaires d'échantillonnage
# ---------------------------------------------------------------------------

def basis_normalization(sigma: float, y, N: int) -> np.ndarray:
    """Σ_{|n|<=N} |ψ_n(y)|² (vaut 1 à la limite)"""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    basis = basis_family(sigma)
    total = np.zeros(y.shape)
    for start in range(-N, N + 1, 8192):
        indices = np.arange(start, min(start + 8192, N + 1))
        total += np.sum(np.abs(basis(indices, y)) ** 2, axis=0)
    return total


def sampling_inner_product(f: ExpSum1D, x1: float, x2: float, N: int) -> complex:
    """Σ_n Δf(x1, y_n)·conj Δf(x2, y_n), queue extrapolée"""
    phi = _dd_family(f)
    point1, point2 = np.array([x1], dtype=complex), np.array([x2], dtype=complex)

    def terms(indices):
        return phi(indices, point1) * np.conj(phi(indices, point2))

    return complex(sum_symmetric(terms, N, stop_early=False).value[0])


def row_energy(f: ExpSum1D, x: float, N: int = 20_000) -> float:
    """Σ_n |φ_n(x)|²"""
    return float(sampling_inner_product(f, x, x, N).real)


def integrate_real_line(integrand: Callable[[np.ndarray], np.ndarray], sigma: float,
                        tail: Callable[[float], complex], half_width: Optional[float] = None,
                        nodes: Optional[int] = None, tol: float = 1e-6) -> complex:
    """
    ∫_ℝ h(t) dt par Gauss–Legendre composite sur [−T, T] plus une correction de queue analytique

    La fenêtre T est doublée jusqu'à stabilisation.

    Raises:
        QuadratureNotConverged
    """
    order = config.QUAD_ORDER
    x_ref, w_ref = leggauss(order)
    panel = np.pi / (2 * max(sigma, 1.0))
    if nodes is not None:
        T = max(nodes // order, 2) * panel / 2
    else:
        T = config.QUAD_HALF_WIDTH if half_width is None else half_width

    def window(T):
        panels = max(int(np.ceil(2 * T / panel)), 2)
        edges = np.linspace(-T, T, panels + 1)
        mid = (edges[1:] + edges[:-1]) / 2
        half = (edges[1:] - edges[:-1]) / 2
        t = (mid[:, None] + half[:, None] * x_ref[None, :]).ravel()
        w = (half[:, None] * w_ref[None, :]).ravel()
        return complex(np.sum(w * integrand(t))) + tail(T)

    previous = window(T)
    difference = np.inf
    for _ in range(config.QUAD_DOUBLINGS):
        T *= 2
        current = window(T)
        difference = abs(current - previous)
        if difference <= tol * max(1.0, abs(current)):
            return current
        previous = current
    raise QuadratureNotConverged(f"Quadrature instable jusqu'à T={T:g}", difference=float(difference))


def _right_tail(omegas: np.ndarray, a: complex, T: float) -> np.ndarray:
    """∫_T^∞ e^{iωt}/(t − a) dt = e^{iωa}·E1(−iω(T − a)), ω ≠ 0"""
    return np.exp(1j * omegas * a) * special.exp1(-1j * omegas * (T - a))


def rational_tail(omegas: np.ndarray, weights: np.ndarray, x: complex, y: complex, T: float) -> complex:
    """
    ∫_{|t|>T} Σ_k w_k e^{iω_k t}/((t − x)(t − y)) dt, sans troncature asymptotique

    Décomposition 1/((t−x)(t−y)) = [1/(t−x) − 1/(t−y)]/(x − y) et intégrales
    exponentielles décalées ; pour x ≈ y, forme 1/(t − a)² au point milieu.
    """
    omegas = np.asarray(omegas, dtype=float)
    weights = np.asarray(weights, dtype=np.complex128)
    x, y = complex(x), complex(y)
    flat = np.abs(omegas) * T < 1e-12
    w = np.where(flat, 1.0, omegas)

    def two_sided(a):
        return _right_tail(w, a, T) - _right_tail(-w, -a, T)

    if abs(x - y) > 1e-4:
        per_term = (two_sided(x) - two_sided(y)) / (x - y)
        flat_term = (np.log((T - y) / (T - x)) - np.log((T + y) / (T + x))) / (x - y)
    else:
        a = (x + y) / 2
        per_term = (np.exp(1j * w * T) / (T - a) + 1j * w * _right_tail(w, a, T)
                    + np.exp(-1j * w * T) / (T + a) - 1j * w * _right_tail(-w, -a, T))
        flat_term = 1 / (T - a) + 1 / (T + a)
    per_term = np.where(flat, flat_term, per_term)
    return complex(np.sum(weights * per_term))


def sampling_inner_product_integral(f: ExpSum1D, x1: float, x2: float) -> complex:
    """(σ/2π)∫ Δf(x1, t)·conj Δf(x2, t) dt"""
    merged = f.merged()
    xi, c = merged.freqs, merged.coeffs
    f1, f2 = complex(evaluate(merged, x1)), complex(evaluate(merged, x2))
    # (f(x1) − f(t))·conj(f(x2) − f(t)) = Σ w_k e^{iω_k t} pour t réel
    omegas = np.concatenate([[0.0], -xi, xi, (xi[:, None] - xi[None, :]).ravel()])
    weights = np.concatenate([[f1 * np.conj(f2)], -f1 * np.conj(c), -c * np.conj(f2),
                              (c[:, None] * np.conj(c)[None, :]).ravel()])

    def integrand(t):
        t = t + 0j
        return divided_difference(merged, x1, t) * np.conj(divided_difference(merged, x2, t))

    # conj(x2 − t) = x2 − t sur la droite réelle
    value = integrate_real_line(integrand, f.sigma, lambda T: rational_tail(omegas, weights, x1, x2, T))
    return f.sigma / (2 * np.pi) * value


def row_energy_integral(f: ExpSum1D, x: float) -> float:
    return float(sampling_inner_product_integral(f, x, x).real)


def inner_product_check(f: ExpSum1D, x1: float, x2: float, N: int = 20_000) -> Dict:
    """Identité d'échantillonnage polarisée pour g = Δf(x1, ·) et h = Δf(x2, ·)"""
    summed = sampling_inner_product(f, x1, x2, N)
    integral = sampling_inner_product_integral(f, x1, x2)
    return {"lhs": summed, "rhs": integral, "residual": float(abs(summed - integral))}


def kernel_dd_check(f: ExpSum1D, x, y, quad_points: int = 4096) -> complex:
    """
    (1/2πi)∫ Δf(x, t)·(e^{iσ(y−t)} − 1)/(y − t) dt, qui doit reproduire Δf(x, y)

    Raises:
        QuadratureNotConverged
    """
    if quad_points < 1000:
        raise ValueError(f"quad_points doit être >= 1000: {quad_points}")
    merged = f.merged()
    sigma = f.sigma
    x, y = complex(x), complex(y)
    xi, c = merged.freqs, merged.coeffs
    fx, phase = complex(evaluate(merged, x)), np.exp(1j * sigma * y)
    # (f(x) − f(t))·(e^{iσy}e^{−iσt} − 1) = Σ w_k e^{iω_k t} pour t réel
    omegas = np.concatenate([[-sigma, 0.0], xi - sigma, xi])
    weights = np.concatenate([[fx * phase, -fx], -c * phase, c])

    def integrand(t):
        t = t + 0j
        kernel = 1j * sigma * expm1_ratio(1j * sigma * (y - t))
        return divided_difference(merged, x, t) * kernel

    value = integrate_real_line(integrand, sigma, lambda T: rational_tail(omegas, weights, x, y, T),
                                nodes=quad_points, tol=config.QUAD_TOL)
    return value / (2j * np.pi)


def reconstruction_check(f: ExpSum1D, x0: complex, lam, N: int = 10_000) -> float:
    """|Σ g(y_n) ψ_n(λ) − g(λ)| pour g = Δf(x0, ·)"""
    lam = np.atleast_1d(np.asarray(lam, dtype=np.complex128))
    basis = basis_family(f.sigma)
    x0 = complex(x0)

    def terms(indices):
        samples = divided_difference(f, x0, sampling_nodes(f.sigma, indices) + 0j)
        return samples[:, None] * basis(indices, lam)

    series = sum_symmetric(terms, N, stop_early=False).value
    return float(np.max(np.abs(series - divided_difference(f, x0, lam))))


def bernstein_check(f: ExpSum1D, grid: Optional[np.ndarray] = None) -> Dict:
    """sup_grille |f'| <= σ·Σ|c_j|"""
    derivative_sup = sup_norm(f.derivative(), grid).grid_estimate
    bound = f.sigma * sup_norm(f).upper
    return {"lhs": derivative_sup, "rhs": bound, "ok": derivative_sup <= bound + config.tolerance(bound)}


def random_expsum_1d(rng: np.random.Generator, sigma: float = 1.0, n_terms: int = 3) -> ExpSum1D:
    """Somme aléatoire normalisée : Σ|c_j| = 1"""
    freqs = rng.uniform(0.0, sigma, n_terms)
    coeffs = rng.standard_normal(n_terms) + 1j * rng.standard_normal(n_terms)
    return ExpSum1D(sigma, freqs, coeffs / np.sum(np.abs(coeffs)))


def random_expsum_2d(rng: np.random.Generator, sigma: float = 1.0, n_terms: int = 3) -> ExpSum2D:
    radius = sigma * np.sqrt(rng.uniform(0.0, 1.0, n_terms))
    angle = rng.uniform(0.0, np.pi / 2, n_terms)
    freqs = np.column_stack([radius * np.cos(angle), radius * np.sin(angle)])
    freqs = np.clip(freqs, 0.0, None)
    coeffs = rng.standard_normal(n_terms) + 1j * rng.standard_normal(n_terms)
    return ExpSum2D(sigma, freqs, coeffs / np.sum(np.abs(coeffs)))


# ---------------------------------------------------------------------------
# Modules de continuité
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Modulus:
    """
    Module de continuité ω : puissance t^α ou table linéaire par morceaux
    prolongée au-delà de la table par ω(t_max)(t/t_max)^γ
    """

    kind: str
    alpha: float = 0.5
    ts: Optional[np.ndarray] = None
    values: Optional[np.ndarray] = None
    tail_exponent: float = 0.0

    @classmethod
    def power(cls, alpha: float) -> "Modulus":
        if alpha <= 0:
            raise ValueError(f"α doit être > 0: {alpha}")
        return cls(kind="power", alpha=float(alpha))

    @classmethod
    def tabulated(cls, ts: Sequence[float], values: Sequence[float], tail_exponent: float = 0.0) -> "Modulus":
        ts, values = np.asarray(ts, dtype=float), np.asarray(values, dtype=float)
        if ts.ndim != 1 or ts.shape != values.shape or ts.size < 2:
            raise ValueError("Table de module invalide")
        if ts[0] != 0 or values[0] != 0 or np.any(np.diff(ts) <= 0):
            raise ValueError("La table doit commencer en (0, 0) avec des abscisses croissantes")
        return cls(kind="tabulated", ts=ts, values=values, tail_exponent=float(tail_exponent))

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.kind == "power":
            return np.power(np.maximum(t, 0.0), self.alpha)
        t_max, w_max = self.ts[-1], self.values[-1]
        inside = np.interp(t, self.ts, self.values)
        beyond = w_max * np.power(np.maximum(t, t_max) / t_max, self.tail_exponent)
        return np.where(t <= t_max, inside, beyond)

    def check(self, grid: Optional[np.ndarray] = None) -> Dict:
        """ω(0) = 0, croissance et sous-additivité sur une grille"""
        grid = np.linspace(0.0, 10.0, 201) if grid is None else np.asarray(grid, dtype=float)
        return check_modulus_values(grid, self(grid), lambda t: self(t))


def check_modulus_values(grid: np.ndarray, values: np.ndarray, omega: Callable) -> Dict:
    tol = 1e-12
    zero = float(abs(omega(np.array([0.0]))[0]))
    nondecreasing = bool(np.all(np.diff(values) >= -tol))
    sums = omega(grid[:, None] + grid[None, :])
    subadditive = bool(np.all(sums <= values[:, None] + values[None, :] + tol * (1 + sums)))
    return {"zero_at_zero": zero <= tol, "nondecreasing": nondecreasing, "subadditive": subadditive,
            "ok": zero <= tol and nondecreasing and subadditive}


def omega_star(omega: Modulus, s: float, method: str = "auto") -> float:
    """
    ω_*(s) = s ∫_s^∞ ω(t)/t² dt

    Args:
        omega: Module de continuité
        s: Point > 0
        method: "auto" (forme close quand elle existe) ou "quadrature"

    Raises:
        DivergentModulus: si ω(t)/t² n'est pas intégrable à l'infini
    """
    if s <= 0:
        raise ValueError(f"s doit être > 0: {s}")
    if omega.kind == "power":
        if omega.alpha >= 1:
            raise DivergentModulus(f"ω(t) = t^{omega.alpha:g}: l'intégrale diverge", alpha=omega.alpha)
        if method == "auto":
            return float(s ** omega.alpha / (1 - omega.alpha))
        # t = s·u : ∫_1^∞ ω(su)/u² du
        value, _ = integrate.quad(lambda u: float(omega(s * u)) / u ** 2, 1.0, np.inf,
                                  epsabs=1e-13, epsrel=1e-12, limit=500)
        return float(value)

    gamma = omega.tail_exponent
    if gamma >= 1:
        raise DivergentModulus(f"Queue en t^{gamma:g}: l'intégrale diverge", tail_exponent=gamma)
    t_max, w_max = omega.ts[-1], omega.values[-1]
    if s >= t_max:
        return float(omega(s) / (1 - gamma))
    breakpoints = omega.ts[(omega.ts > s) & (omega.ts < t_max)]
    inside, _ = integrate.quad(lambda t: float(omega(t)) / t ** 2, s, t_max,
                               points=breakpoints if breakpoints.size else None,
                               epsabs=1e-13, epsrel=1e-12, limit=500)
    tail = w_max / ((1 - gamma) * t_max)
    return float(s * (inside + tail))
