"""Tests de l'interface en ligne de commande (codes de sortie et fichiers produits)"""
import json

import pytest

from dissipa.bandfun import ExpSum1D, ExpSum2D
from dissipa.config import Config
from dissipa.utils.serialisation import write_function
from dissipa_cli import EXIT_FAILED, EXIT_OK, EXIT_USAGE, RunConfig, build_parser, run


def test_sans_commande():
    assert run([]) == EXIT_USAGE


def test_gen_octets_identiques(tmp_path):
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    assert run(["gen", "--dim", "3", "--seed", "7", "--out", str(first)]) == EXIT_OK
    assert run(["gen", "--dim", "3", "--seed", "7", "--out", str(second)]) == EXIT_OK
    assert first.read_bytes() == second.read_bytes()
    record = json.loads(first.read_text())
    assert record["L1"]["dim"] == 3
    assert record["meta"]["seed"] == 7


def test_gen_sortie_standard(capsys):
    assert run(["gen", "--dim", "2", "--seed", "1", "--style", "normal"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["meta"]["style"] == "normal"


@pytest.mark.parametrize("argv", [
    ["identities", "--trials", "0"],
    ["gen", "--dim", "65"],
    ["bound", "--alpha", "1.5"],
    ["bound", "--p", "0.5"],
    ["perturb-single", "--sigma", "-1"],
])
def test_parametres_invalides(argv):
    assert run(argv) == EXIT_USAGE


def test_choix_invalide_argparse():
    with pytest.raises(SystemExit) as excinfo:
        run(["perturb-pair", "--formula", "vary-both"])
    assert excinfo.value.code == 2


def test_fichier_instance_absent(tmp_path):
    assert run(["perturb-pair", "--instance", str(tmp_path / "absent.json")]) == EXIT_USAGE


def test_instance_mal_formee(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"L1": {"dim": 2, "entries": [1, 2, 3]}}')
    assert run(["perturb-single", "--instance", str(path)]) == EXIT_USAGE


def test_besov_norm(tmp_path):
    function = write_function(tmp_path / "f.json", ExpSum1D(8.0, [8.0], [1.0]))
    out = tmp_path / "report.json"
    assert run(["besov-norm", "--function", str(function), "--out", str(out)]) == EXIT_OK
    report = json.loads(out.read_text())
    assert report["besov_norm"]["upper"] == pytest.approx(8.0)
    assert "generated_at" in report


def test_besov_norm_sans_fonction():
    assert run(["besov-norm"]) == EXIT_USAGE


def test_perturb_single_instance(tmp_path):
    instance = tmp_path / "inst.json"
    assert run(["gen", "--dim", "2", "--seed", "4", "--style", "normal", "--spread", "0.05",
                "--out", str(instance)]) == EXIT_OK
    out, csv = tmp_path / "report.json", tmp_path / "hist.csv"
    code = run(["perturb-single", "--instance", str(instance), "--out", str(out), "--csv", str(csv)])
    assert code == EXIT_OK
    report = json.loads(out.read_text())
    assert report["passed"] == 2
    assert csv.read_text().startswith("check,N")


def test_bound_lipschitz():
    assert run(["bound", "--kind", "lipschitz", "--trials", "3", "--seed", "2"]) == EXIT_OK


def test_echec_rapporte(tmp_path, monkeypatch):
    """Un seuil impossible fait échouer la commande"""
    for name in ("PERTURB_TOL", "PAIR_TOL"):
        monkeypatch.setattr(Config, name, getattr(Config, name))
        monkeypatch.setenv(f"DISSIPA_{name}", repr(getattr(Config, name)))
    instance = tmp_path / "inst.json"
    run(["gen", "--dim", "2", "--seed", "4", "--out", str(instance)])
    code = run(["perturb-single", "--instance", str(instance), "--tol", "1e-300", "--out",
                str(tmp_path / "r.json")])
    assert code == EXIT_FAILED


def test_configuration_par_defaut():
    args = build_parser().parse_args(["perturb-pair"])
    run_config = RunConfig(command=args.command, trials=1)
    assert run_config.formula == "glafor"
    assert run_config.N == 4000


def test_identites_un_essai(tmp_path):
    out = tmp_path / "identities.json"
    assert run(["identities", "--trials", "1", "--seed", "1", "--out", str(out)]) in (EXIT_OK, EXIT_FAILED)
    report = json.loads(out.read_text())
    assert all("anchor" in check for check in report["checks"])


@pytest.mark.parametrize("formula", ["glafor", "total"])
def test_perturb_pair_instance(tmp_path, formula):
    instance = tmp_path / "inst.json"
    assert run(["gen", "--dim", "3", "--seed", "4", "--out", str(instance)]) == EXIT_OK
    function = write_function(tmp_path / "f.json", ExpSum2D(1.0, [[0.6, 0.3], [0.2, 0.9]], [0.5, -0.5j]))
    out = tmp_path / "report.json"
    code = run(["perturb-pair", "--formula", formula, "--instance", str(instance), "--function", str(function),
                "--N", "4000", "--out", str(out)])
    assert code == EXIT_OK
    check = json.loads(out.read_text())["checks"][0]
    assert check["anchor"] == "(glafor)"
    assert check["residual"] <= 1e-5


def test_configuration_valide():
    assert Config.validate_config() == []


@pytest.mark.parametrize("name, value", [("TAYLOR_RADIUS", 1.0), ("QUAD_TOL", 0.0), ("PLAN_CACHE_SIZE", 0)])
def test_configuration_invalide(monkeypatch, name, value):
    monkeypatch.setattr(Config, name, value)
    errors = Config.validate_config()
    assert len(errors) == 1
