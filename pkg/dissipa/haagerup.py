"""
Développements de Haagerup : familles de facteurs (φ_n, ψ_n) d'un symbole Φ(x, y)

Une famille est évaluée d'un seul coup pour un bloc d'indices n et un
tableau de points, ce qui permet au calcul fonctionnel de traiter des
milliers de facteurs en une passe.
"""
from dataclasses import dataclass
from typing import Callable, Iterator, Optional, Sequence, Tuple

import numpy as np

from .utils.series import sum_symmetric


@dataclass(frozen=True, eq=False)
class SeparableForm:
    """
    h_n(x, y) = Σ_{j<terms} u(n, j, x)·v(n, j, y)

    u et v reçoivent des tableaux n, j de même longueur et renvoient (len(n),) + forme des points.
    Pour une paire commutative, h_n(L, M) = Σ_j u(n, j, L)·v(n, j, M).
    """

    left: Callable[..., np.ndarray]
    right: Callable[..., np.ndarray]
    terms: int

    def compound(self, indices) -> np.ndarray:
        """Indices composés n·terms + j"""
        indices = np.atleast_1d(np.asarray(indices, dtype=np.int64))
        return (indices[:, None] * self.terms + np.arange(self.terms)[None, :]).ravel()

    def family(self, side: str) -> "FactorFamily":
        """Famille d'une variable indexée par les indices composés"""
        part = self.left if side == "left" else self.right

        def evaluate(compound, z):
            n, j = np.divmod(compound, self.terms)
            return part(n, j, z)

        return FactorFamily(arity=1, evaluate=evaluate, label=f"separable-{side}")


@dataclass(frozen=True, eq=False)
class FactorFamily:
    """
    Famille (h_n) de fonctions d'une variable (arity=1) ou d'une paire (arity=2)

    evaluate(indices, *points) renvoie un tableau de forme (len(indices),) + forme des points.
    separable : décomposition en produits, utilisée pour les paires commutatives.
    """

    arity: int
    evaluate: Callable[..., np.ndarray]
    label: str = ""
    separable: Optional[SeparableForm] = None

    def __call__(self, indices, *points) -> np.ndarray:
        if len(points) != self.arity:
            raise ValueError(f"{self.label or 'famille'}: {len(points)} points pour une arité {self.arity}")
        indices = np.atleast_1d(np.asarray(indices, dtype=np.int64))
        points = np.broadcast_arrays(*[np.asarray(p, dtype=np.complex128) for p in points])
        return self.evaluate(indices, *points)

    def member(self, n: int) -> Callable[..., np.ndarray]:
        """Le facteur d'indice n comme fonction évaluable"""
        return lambda *points: self(np.array([n]), *points)[0]

    @classmethod
    def from_callables(cls, functions: Sequence[Callable], arity: int = 1, label: str = "") -> "FactorFamily":
        """Famille finie h_0, ..., h_{k-1} à partir de fonctions scalaires vectorisées"""
        functions = list(functions)

        def evaluate(indices, *points):
            shape = np.broadcast_shapes(*(np.shape(p) for p in points))
            return np.stack([
                np.broadcast_to(np.asarray(functions[n](*points), dtype=np.complex128), shape)
                for n in indices
            ])

        return cls(arity=arity, evaluate=evaluate, label=label)


def index_axis(values: np.ndarray, ndim: int) -> np.ndarray:
    """Place l'axe des indices devant ndim axes de points"""
    return np.asarray(values).reshape((-1,) + (1,) * ndim)


@dataclass(frozen=True, eq=False)
class HaagerupExpansion:
    """
    Φ(x, y) = Σ_n φ_n(x) ψ_n(y)

    symmetric=True : indices n ∈ [−N, N] (séries d'échantillonnage, troncature N)
    symmetric=False : somme finie sur n = 0, ..., truncation − 1
    """

    left: FactorFamily
    right: FactorFamily
    truncation: int
    certificate: float
    row_bound: float = np.inf
    column_bound: float = np.inf
    symmetric: bool = True
    label: str = ""

    def indices(self, N: Optional[int] = None) -> np.ndarray:
        if not self.symmetric:
            return np.arange(self.truncation)
        N = self.truncation if N is None else N
        return np.arange(-N, N + 1)

    def pair(self, n: int) -> Tuple[Callable, Callable]:
        return self.left.member(n), self.right.member(n)

    def pairs(self, N: Optional[int] = None) -> Iterator[Tuple[Callable, Callable]]:
        for n in self.indices(N):
            yield self.pair(int(n))

    def evaluate(self, left_points: Tuple, right_points: Tuple, N: Optional[int] = None,
                 extrapolate: bool = True) -> np.ndarray:
        """Sommes partielles de Σ φ_n(left_points) ψ_n(right_points) (extrapolées par défaut)"""
        def terms(indices):
            return self.left(indices, *left_points) * self.right(indices, *right_points)

        if not self.symmetric:
            return np.sum(terms(self.indices()), axis=0)
        N = self.truncation if N is None else N
        return sum_symmetric(terms, N, stop_early=False, extrapolate=extrapolate).value

    @classmethod
    def from_pairs(cls, pairs: Sequence[Tuple[Callable, Callable]], arities: Tuple[int, int] = (1, 1),
                   certificate: float = np.inf, label: str = "") -> "HaagerupExpansion":
        """Développement fini à partir d'une liste explicite de couples (φ, ψ)"""
        pairs = list(pairs)
        return cls(
            left=FactorFamily.from_callables([p[0] for p in pairs], arities[0], label=f"{label}:gauche"),
            right=FactorFamily.from_callables([p[1] for p in pairs], arities[1], label=f"{label}:droite"),
            truncation=len(pairs),
            certificate=certificate,
            symmetric=False,
            label=label,
        )
