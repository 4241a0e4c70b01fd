"""
Configuration de la bibliothèque Dissipa
"""
import os
from pathlib import Path
from dotenv import load_dotenv

load_dotenv()


def _env_bool(name: str, default: str = "false") -> bool:
    return os.getenv(name, default).lower() == "true"


class Config:
    """Configuration numérique et applicative"""

    # Tolérances (absolue + relative)
    TOL_ABS = float(os.getenv("DISSIPA_TOL_ABS", 1e-10))
    TOL_REL = float(os.getenv("DISSIPA_TOL_REL", 1e-10))

    # Algèbre linéaire
    COND_CAP = float(os.getenv("DISSIPA_COND_CAP", 1e8))
    MAX_DIM = int(os.getenv("DISSIPA_MAX_DIM", 256))
    COMMUTE_TOL = float(os.getenv("DISSIPA_COMMUTE_TOL", 1e-9))

    # Différences divisées : seuil de bascule vers la forme stable
    SWITCH_DELTA = float(os.getenv("DISSIPA_SWITCH_DELTA", 1e-6))

    # Route Taylor–Cayley : paramètres fixes (cercle ρ, suite de r) sauf si TAYLOR_ADAPTIVE
    TAYLOR_ADAPTIVE = _env_bool("DISSIPA_TAYLOR_ADAPTIVE")
    TAYLOR_RADIUS = float(os.getenv("DISSIPA_TAYLOR_RADIUS", 0.95))
    TAYLOR_R_SEQUENCE = (0.9, 0.99, 0.999)
    TAYLOR_RADIUS_MIN = float(os.getenv("DISSIPA_TAYLOR_RADIUS_MIN", 0.5))
    TAYLOR_NODES = int(os.getenv("DISSIPA_TAYLOR_NODES", 4096))
    TAYLOR_NODES_2D = int(os.getenv("DISSIPA_TAYLOR_NODES_2D", 1024))
    TAYLOR_SPECTRAL_MARGIN = 1e-3  # |σ(T)| <= 1 - marge
    TAYLOR_EVAL_BUDGET = int(os.getenv("DISSIPA_TAYLOR_EVAL_BUDGET", 200_000_000))
    TAYLOR_CHUNK_POINTS = 1 << 20  # fonctions × nœuds par bloc d'évaluation
    TAYLOR_TAIL_TOL = float(os.getenv("DISSIPA_TAYLOR_TAIL_TOL", 1e-9))

    # Récurrence de Parlett (paires) : séparation minimale des pivots
    PARLETT_SEPARATION = float(os.getenv("DISSIPA_PARLETT_SEPARATION", 1e-4))
    PLAN_CACHE_SIZE = int(os.getenv("DISSIPA_PLAN_CACHE_SIZE", 16))

    # Séries de Haagerup (règle du plateau)
    SERIES_START = int(os.getenv("DISSIPA_SERIES_START", 125))
    SERIES_TOL = float(os.getenv("DISSIPA_SERIES_TOL", 1e-7))
    PLATEAU_STEPS = 2  # deux écarts consécutifs = trois doublements de N
    DEFAULT_N = int(os.getenv("DISSIPA_DEFAULT_N", 4000))

    # Seuils d'acceptation des formules de perturbation
    PERTURB_TOL = float(os.getenv("DISSIPA_PERTURB_TOL", 1e-6))
    PAIR_TOL = float(os.getenv("DISSIPA_PAIR_TOL", 1e-5))
    S2_TOL = 1e-6

    # Estimation de normes sup sur la droite réelle
    GRID_POINTS = int(os.getenv("DISSIPA_GRID_POINTS", 4001))
    GRID_HALF_WIDTH = float(os.getenv("DISSIPA_GRID_HALF_WIDTH", 50.0))
    GRID_POINTS_2D = int(os.getenv("DISSIPA_GRID_POINTS_2D", 201))

    # Quadrature sur la droite réelle
    QUAD_HALF_WIDTH = float(os.getenv("DISSIPA_QUAD_HALF_WIDTH", 400.0))
    QUAD_DOUBLINGS = 4
    QUAD_ORDER = 16
    QUAD_TOL = float(os.getenv("DISSIPA_QUAD_TOL", 1e-4))

    # Générateur d'instances
    GEN_MAX_DIM = 64
    GEN_SHIFT = float(os.getenv("DISSIPA_GEN_SHIFT", 0.25))

    # Logging / exécution
    BASE_DIR = Path(__file__).parent.parent
    LOG_DIR = Path(os.getenv("DISSIPA_LOG_DIR", BASE_DIR / "logs"))
    LOG_LEVEL = os.getenv("DISSIPA_LOG_LEVEL", "INFO").upper()
    LOG_JSON = _env_bool("DISSIPA_LOG_JSON")
    LOG_TO_FILE = _env_bool("DISSIPA_LOG_TO_FILE", "true")
    WORKERS = int(os.getenv("DISSIPA_WORKERS", 1))

    @classmethod
    def tolerance(cls, scale: float = 0.0) -> float:
        """Tolérance absolue + relative à l'échelle donnée"""
        return cls.TOL_ABS + cls.TOL_REL * float(scale)

    @classmethod
    def series_tolerance(cls, scale: float = 0.0) -> float:
        return cls.SERIES_TOL * (1.0 + float(scale))

    @classmethod
    def create_directories(cls):
        """Crée les dossiers nécessaires"""
        cls.LOG_DIR.mkdir(parents=True, exist_ok=True)

    @classmethod
    def validate_config(cls):
        """Valide la configuration"""
        errors = []

        if cls.TOL_ABS <= 0 or cls.TOL_REL < 0:
            errors.append(f"Tolérances invalides: abs={cls.TOL_ABS}, rel={cls.TOL_REL}")
        if cls.COND_CAP <= 1:
            errors.append(f"Plafond de conditionnement invalide: {cls.COND_CAP}")
        if cls.TAYLOR_NODES & (cls.TAYLOR_NODES - 1):
            errors.append(f"TAYLOR_NODES doit être une puissance de 2: {cls.TAYLOR_NODES}")
        if cls.TAYLOR_NODES_2D & (cls.TAYLOR_NODES_2D - 1):
            errors.append(f"TAYLOR_NODES_2D doit être une puissance de 2: {cls.TAYLOR_NODES_2D}")
        if not 0 < cls.TAYLOR_RADIUS < 1:
            errors.append(f"Rayon fixe hors de ]0,1[: {cls.TAYLOR_RADIUS}")
        if not 0 < cls.TAYLOR_RADIUS_MIN < 1:
            errors.append(f"Rayon minimal hors de ]0,1[: {cls.TAYLOR_RADIUS_MIN}")
        if cls.QUAD_TOL <= 0:
            errors.append(f"QUAD_TOL doit être > 0: {cls.QUAD_TOL}")
        if cls.SERIES_START < 1:
            errors.append(f"SERIES_START doit être >= 1: {cls.SERIES_START}")
        if cls.PLAN_CACHE_SIZE < 1:
            errors.append(f"PLAN_CACHE_SIZE doit être >= 1: {cls.PLAN_CACHE_SIZE}")
        if cls.WORKERS < 1:
            errors.append(f"Nombre de workers invalide: {cls.WORKERS}")
        if cls.LOG_LEVEL not in {"DEBUG", "INFO", "WARNING", "ERROR"}:
            errors.append(f"Niveau de log inconnu: {cls.LOG_LEVEL}")

        return errors


# Instance globale
config = Config()
