"""Tests des enregistrements JSON et de l'export CSV"""
import json

import numpy as np
import pytest

from dissipa.bandfun import ExpSum1D, ExpSum2D
from dissipa.dissipative import gen_pair
from dissipa.exceptions import InvalidFunction, InvalidMatrix, NotCommuting
from dissipa.linalg import matrix_to_record
from dissipa.utils.serialisation import (
    TIMESTAMP_FIELD,
    comparable,
    dumps,
    function_from_record,
    function_to_record,
    histories_to_frame,
    instance_from_record,
    read_function,
    read_instance,
    stamp,
    to_jsonable,
    write_csv,
    write_function,
    write_instance,
)


def test_valeurs_speciales():
    data = to_jsonable({"z": 1 + 2j, "inf": np.inf, "nan": np.nan, "flag": np.bool_(True), "k": np.int64(3)})
    assert data == {"z": [1.0, 2.0], "inf": "inf", "nan": "nan", "flag": True, "k": 3}


def test_matrice_et_vecteur():
    data = to_jsonable({"Q": np.eye(2), "v": np.array([1.0, 2.0])})
    assert data["Q"]["dim"] == 2
    assert data["v"] == [1.0, 2.0]


def test_json_deterministe():
    report = {"b": 1, "a": [0.5j], "c": {"y": 2, "x": 1}}
    assert dumps(report) == dumps(dict(reversed(list(report.items()))))
    assert json.loads(dumps(report))["a"] == [[0.0, 0.5]]


def test_instance(tmp_path):
    P1, P2 = gen_pair(9, 3, "nilpotent-shift")
    path = write_instance(tmp_path / "inst.json", P1, P2, seed=9, style="nilpotent-shift")
    Q1, Q2 = read_instance(path)
    assert np.array_equal(Q1.L.A, P1.L.A)
    assert np.array_equal(Q2.M.A, P2.M.A)
    record = json.loads(path.read_text())
    assert set(record) == {"L1", "M1", "L2", "M2", "meta"}
    assert record["meta"] == {"seed": 9, "style": "nilpotent-shift"}


def test_instance_litterale(tmp_path):
    """Fichier écrit à la main au format {"L1", "M1", "L2", "M2", "meta"}"""
    path = tmp_path / "inst.json"
    path.write_text(json.dumps({
        "L1": {"dim": 2, "entries": [[[0, 1], [0, 0]], [[0, 0], [0, 2]]]},
        "M1": {"dim": 2, "entries": [[[0, 3], [0, 0]], [[0, 0], [1, 1]]]},
        "L2": {"dim": 2, "entries": [[[0, 1], [0, 0]], [[0, 0], [0, 1]]]},
        "M2": {"dim": 2, "entries": [[[0, 1], [0, 0]], [[0, 0], [0, 1]]]},
        "meta": {"seed": 0, "style": "normal"},
    }))
    P1, P2 = read_instance(path)
    assert P1.M.A[1, 1] == 1 + 1j
    assert np.allclose(P2.L.A, 1j * np.eye(2))


def test_instance_invalide():
    with pytest.raises(InvalidMatrix):
        instance_from_record({"pairs": []})
    with pytest.raises(InvalidMatrix):
        instance_from_record([1, 2])
    L = 1j * np.eye(2) + 0.5 * np.array([[0, 1], [0, 0]])
    M = 1j * np.eye(2) + 0.5 * np.array([[0, 0], [1, 0]])
    record = {"L1": matrix_to_record(L), "M1": matrix_to_record(M),
              "L2": matrix_to_record(L), "M2": matrix_to_record(L)}
    with pytest.raises(NotCommuting):
        instance_from_record(record)


def test_fonctions(tmp_path):
    f = ExpSum2D(2.0, [[1.0, 0.5], [0.0, 2.0]], [0.5 - 0.5j, 0.25])
    path = write_function(tmp_path / "f.json", f)
    record = json.loads(path.read_text())
    assert record["dims"] == 2
    assert record["terms"][0] == {"freq": [1.0, 0.5], "coeff": [0.5, -0.5]}
    g = read_function(path)
    assert isinstance(g, ExpSum2D)
    assert np.array_equal(g.freqs, f.freqs)
    assert np.array_equal(g.coeffs, f.coeffs)


def test_fonction_litterale():
    record = {"sigma": 1, "dims": 1, "terms": [{"freq": [1.0], "coeff": [1, 0]}, {"freq": [0.5], "coeff": [0, 2]}]}
    f = function_from_record(record)
    assert isinstance(f, ExpSum1D)
    assert f(0.0) == pytest.approx(1 + 2j)
    assert function_to_record(f) == {"sigma": 1.0, "dims": 1, "terms": record["terms"]}


@pytest.mark.parametrize("record", [
    {"sigma": 1, "dims": 3, "terms": []},
    {"sigma": 1, "dims": 1, "terms": [{"freq": [2.0], "coeff": [1, 0]}]},
    {"dims": 1, "terms": [{"freq": [0.5], "coeff": [1, 0]}]},
    {"sigma": 1, "dims": 2, "terms": [{"freq": [0.5], "coeff": [1, 0]}]},
    {"sigma": 1, "dims": 1, "freqs": [0.5], "coeffs": [[1, 0]]},
])
def test_fonction_invalide(record):
    with pytest.raises(InvalidFunction):
        function_from_record(record)


def test_horodatage():
    report = stamp({"ok": True})
    assert TIMESTAMP_FIELD in report
    assert comparable(report) == {"ok": True}


def test_historiques_csv(tmp_path):
    histories = {
        "perturb-single#0": [{"N": 125, "raw_norm": 1.0}, {"N": 250, "raw_norm": 1.0, "raw_change": 1e-3}],
        "perturb-pair-glafor#0": [{"N": 125, "31": {"raw_norm": 2.0}, "32": {"raw_norm": 3.0}}],
    }
    frame = histories_to_frame(histories)
    assert list(frame.columns[:2]) == ["check", "N"]
    assert len(frame) == 3
    assert "31.raw_norm" in frame.columns
    path = write_csv(tmp_path / "hist.csv", histories)
    assert path.read_text().splitlines()[0].startswith("check,N")
    assert histories_to_frame({}).empty
