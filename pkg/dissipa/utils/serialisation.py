"""
Enregistrements JSON (matrices, instances, fonctions, rapports) et export CSV
"""
import json
import logging
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Mapping, Tuple, Union

import numpy as np
import pandas as pd

from ..bandfun import ExpSum1D, ExpSum2D
from ..dissipative import CommutingDissipativePair, check_commuting
from ..exceptions import InvalidFunction, InvalidMatrix
from ..linalg import matrix_from_record, matrix_to_record

logger = logging.getLogger(__name__)

TIMESTAMP_FIELD = "generated_at"


def _complex_pair(z: complex) -> List[float]:
    return [float(np.real(z)), float(np.imag(z))]


def _finite_or_label(x: float):
    if np.isnan(x):
        return "nan"
    if np.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def to_jsonable(obj: Any) -> Any:
    """Convertit récursivement tableaux numpy, complexes et scalaires numpy"""
    if isinstance(obj, Mapping):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if obj.ndim == 2 and obj.shape[0] == obj.shape[1]:
            return matrix_to_record(obj)
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return _complex_pair(obj)
    if isinstance(obj, (float, np.floating)):
        return _finite_or_label(float(obj))
    if isinstance(obj, Path):
        return str(obj)
    if isinstance(obj, (ExpSum1D, ExpSum2D)):
        return function_to_record(obj)
    return obj


def dumps(data: Any) -> str:
    """JSON à clés triées : même contenu, mêmes octets"""
    return json.dumps(to_jsonable(data), indent=2, ensure_ascii=False, sort_keys=True)


def write_json(path: Union[str, Path], data: Any) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        f.write(dumps(data))
        f.write("\n")
    logger.info(f"✅ Fichier écrit: {path}")
    return path


def read_json(path: Union[str, Path]) -> Any:
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


# ---------------------------------------------------------------------------
# Instances
# ---------------------------------------------------------------------------

INSTANCE_KEYS = ("L1", "M1", "L2", "M2")


def instance_to_record(P1: CommutingDissipativePair, P2: CommutingDissipativePair, **metadata) -> Dict:
    """{"L1", "M1", "L2", "M2", "meta": {"seed", "style", ...}}"""
    matrices = (P1.L.A, P1.M.A, P2.L.A, P2.M.A)
    record = {key: matrix_to_record(A) for key, A in zip(INSTANCE_KEYS, matrices)}
    record["meta"] = dict(metadata)
    return record


def instance_from_record(record: Dict) -> Tuple[CommutingDissipativePair, CommutingDissipativePair]:
    """
    Raises:
        InvalidMatrix: si l'enregistrement est mal formé
        NotCommuting, NotDissipative: si une paire est invalide
    """
    if not isinstance(record, Mapping):
        raise InvalidMatrix("Une instance est un objet JSON")
    missing = [key for key in INSTANCE_KEYS if key not in record]
    if missing:
        raise InvalidMatrix(f"Matrices manquantes dans l'instance: {', '.join(missing)}")
    L1, M1, L2, M2 = (matrix_from_record(record[key]) for key in INSTANCE_KEYS)
    if not L1.shape == M1.shape == L2.shape == M2.shape:
        raise InvalidMatrix(f"Dimensions différentes: {L1.shape[0]}, {M1.shape[0]}, {L2.shape[0]}, {M2.shape[0]}")
    return check_commuting(L1, M1), check_commuting(L2, M2)


def write_instance(path: Union[str, Path], P1, P2, **metadata) -> Path:
    return write_json(path, instance_to_record(P1, P2, **metadata))


def read_instance(path: Union[str, Path]):
    return instance_from_record(read_json(path))


# ---------------------------------------------------------------------------
# Fonctions
# ---------------------------------------------------------------------------

def function_to_record(f: Union[ExpSum1D, ExpSum2D]) -> Dict:
    """{"sigma", "dims", "terms": [{"freq": [ξ] ou [ξ, η], "coeff": [re, im]}]}"""
    freqs = np.asarray(f.freqs, dtype=float).reshape(len(f.coeffs), f.dims)
    return {
        "sigma": f.sigma,
        "dims": f.dims,
        "terms": [{"freq": freq.tolist(), "coeff": _complex_pair(c)} for freq, c in zip(freqs, f.coeffs)],
    }


def function_from_record(record: Dict) -> Union[ExpSum1D, ExpSum2D]:
    """
    Raises:
        InvalidFunction
    """
    try:
        sigma = float(record["sigma"])
        dims = int(record["dims"])
        terms = record["terms"]
        freqs = [[float(v) for v in term["freq"]] for term in terms]
        coeffs = [complex(*term["coeff"]) for term in terms]
    except (KeyError, TypeError, ValueError) as e:
        raise InvalidFunction(f"Enregistrement de fonction invalide: {e}") from e
    if dims not in (1, 2):
        raise InvalidFunction(f"dims doit valoir 1 ou 2: {dims}")
    if any(len(freq) != dims for freq in freqs):
        raise InvalidFunction(f"Chaque fréquence doit avoir {dims} composante(s)")
    if dims == 1:
        return ExpSum1D(sigma, [freq[0] for freq in freqs], coeffs)
    return ExpSum2D(sigma, np.asarray(freqs, dtype=float).reshape(-1, 2), coeffs)


def write_function(path: Union[str, Path], f) -> Path:
    return write_json(path, function_to_record(f))


def read_function(path: Union[str, Path]):
    return function_from_record(read_json(path))


# ---------------------------------------------------------------------------
# Rapports
# ---------------------------------------------------------------------------

def stamp(report: Dict) -> Dict:
    return {**report, TIMESTAMP_FIELD: datetime.now().isoformat()}


def comparable(report: Dict) -> Dict:
    """Rapport sans l'horodatage"""
    return {k: v for k, v in report.items() if k != TIMESTAMP_FIELD}


def histories_to_frame(histories: Mapping[str, List[Dict]]) -> pd.DataFrame:
    """Une ligne par point de contrôle : check, N, normes et écarts"""
    rows = []
    for name, history in histories.items():
        for entry in history:
            flat = pd.json_normalize(to_jsonable(entry), sep=".").to_dict(orient="records")[0]
            rows.append({"check": name, **flat})
    columns = ["check", "N"]
    frame = pd.DataFrame(rows)
    if frame.empty:
        return pd.DataFrame(columns=columns)
    ordered = columns + sorted(c for c in frame.columns if c not in columns)
    return frame[ordered]


def write_csv(path: Union[str, Path], histories: Mapping[str, List[Dict]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    histories_to_frame(histories).to_csv(path, index=False)
    logger.info(f"✅ Historique CSV écrit: {path}")
    return path
