"""
Configuration commune des tests : pas de fichier de log, racine du dépôt dans le path
"""
import os
import sys
from pathlib import Path

os.environ.setdefault("DISSIPA_LOG_TO_FILE", "false")
sys.path.insert(0, str(Path(__file__).parent.parent))

import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240617)


@pytest.fixture
def jordan():
    """Bloc de Jordan iI + N : dissipatif, non diagonalisable"""
    return np.array([[1j, 1.0], [0.0, 1j]])
