#!/usr/bin/env python3
"""
Interface en ligne de commande de Dissipa
Génère des instances, lance les suites de vérification et écrit des rapports JSON
"""
import sys
import os
import json
import logging
import argparse
from datetime import datetime
from pathlib import Path
from typing import Dict, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError
from pythonjsonlogger.json import JsonFormatter

from dissipa.config import Config, config
from dissipa.dissipative import STYLES
from dissipa.doi import FORMULA_ALIASES, FORMULAS
from dissipa.exceptions import DissipaError, InvalidFunction, InvalidMatrix, NotCommuting
from dissipa.utils.serialisation import (
    dumps,
    instance_to_record,
    read_function,
    read_instance,
    stamp,
    write_csv,
    write_instance,
    write_json,
)
from dissipa.verification import VerificationService, collect_histories

DEFAULT_TRIALS = {"identities": 100, "perturb-single": 50, "perturb-pair": 1, "bound": 100}

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2


class RunConfig(BaseModel):
    """Paramètres validés d'une exécution"""

    model_config = ConfigDict(extra="forbid")

    command: Literal["gen", "identities", "perturb-single", "perturb-pair", "bound", "besov-norm"]
    seed: int = 0
    trials: int = Field(1, ge=1)
    dim: Optional[int] = Field(None, ge=1, le=64)
    sigma: Optional[float] = Field(None, gt=0)
    N: int = Field(config.DEFAULT_N, ge=1)
    tol: Optional[float] = Field(None, gt=0)
    formula: Literal["31", "32", "glafor", "all", "vary-m", "vary-l", "total"] = "glafor"
    kind: Literal["lipschitz", "besov", "holder-schatten"] = "lipschitz"
    alpha: float = Field(0.5, gt=0, lt=1)
    p: float = Field(2.0, ge=1)
    style: Literal["normal", "polynomial", "nilpotent-shift"] = "polynomial"
    spread: float = Field(0.1, ge=0)
    instance: Optional[Path] = None
    function: Optional[Path] = None
    out: Optional[Path] = None
    csv: Optional[Path] = None
    workers: int = Field(1, ge=1)


class VerificationCLI:
    """Interface en ligne de commande pour les suites de vérification"""

    def __init__(self, run: RunConfig):
        self.run = run
        self.setup_logging()
        self.service = VerificationService(workers=run.workers)
        self.logger.info(f"Commande: {run.command} (seed={run.seed}, workers={run.workers})")

    def setup_logging(self):
        """Configure le système de logging"""
        handlers = [logging.StreamHandler(sys.stderr)]
        log_file = None
        if config.LOG_TO_FILE:
            config.create_directories()
            timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
            log_file = config.LOG_DIR / f"dissipa_{timestamp}.log"
            handlers.append(logging.FileHandler(log_file, encoding='utf-8'))

        if config.LOG_JSON:
            formatter = JsonFormatter('%(asctime)s %(name)s %(levelname)s %(message)s')
        else:
            formatter = logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s')
        for handler in handlers:
            handler.setFormatter(formatter)

        logging.basicConfig(level=getattr(logging, config.LOG_LEVEL), handlers=handlers, force=True)
        self.logger = logging.getLogger("DissipaCLI")
        if log_file:
            self.logger.info(f"Logging configuré - Fichier: {log_file}")

    def _load_inputs(self):
        instance = read_instance(self.run.instance) if self.run.instance else None
        function = read_function(self.run.function) if self.run.function else None
        return instance, function

    def generer(self) -> int:
        """Génère une instance (deux paires commutatives)"""
        run = self.run
        dim = run.dim or 4
        self.logger.info(f"GÉNÉRATION INSTANCE dim={dim} style={run.style}")
        P1, P2 = self.service.generate(run.seed, dim, run.style, run.spread)
        metadata = {"seed": run.seed, "style": run.style, "spread": run.spread}
        if run.out:
            write_instance(run.out, P1, P2, **metadata)
        else:
            print(dumps(instance_to_record(P1, P2, **metadata)))
        return EXIT_OK

    def verifier(self) -> int:
        """Lance la suite correspondant à la commande et écrit le rapport"""
        run = self.run
        self.logger.info(f"VÉRIFICATION {run.command.upper()}")
        instance, function = self._load_inputs()

        if run.command == "identities":
            report = self.service.identities(run.seed, run.trials)
        elif run.command == "perturb-single":
            report = self.service.perturb_single(run.seed, run.trials, run.sigma or 1.0, run.N, run.dim,
                                                 instance=instance, function=function)
        elif run.command == "perturb-pair":
            report = self.service.perturb_pair(run.formula, run.seed, run.trials, run.sigma or 1.0, run.N,
                                               run.dim, run.style, run.spread,
                                               instance=instance, function=function)
        elif run.command == "bound":
            report = self.service.bound(run.kind, run.seed, run.trials, run.sigma, run.dim, run.alpha, run.p,
                                        run.style, run.spread, instance=instance, function=function)
        else:
            if function is None:
                raise InvalidFunction("besov-norm requiert --function")
            report = self.service.besov_norm(function)

        self.ecrire_rapport(report)
        return EXIT_OK if report["ok"] else EXIT_FAILED

    def ecrire_rapport(self, report: Dict):
        run = self.run
        if run.csv:
            write_csv(run.csv, collect_histories(report))
        if run.out:
            write_json(run.out, stamp(report))
        else:
            print(dumps(stamp(report)))
        status = "✅ SUCCÈS" if report["ok"] else f"❌ ÉCHEC ({', '.join(report['failed_checks'])})"
        self.logger.info(f"{status} - {report['passed']} réussi(s), {report['failed']} en échec")

    def executer(self) -> int:
        if self.run.command == "gen":
            return self.generer()
        return self.verifier()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Calcul fonctionnel de matrices dissipatives et vérification des formules de perturbation",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Exemples d'utilisation:
  %(prog)s gen --dim 4 --seed 3 --out inst.json        # Instance reproductible
  %(prog)s identities --trials 100 --seed 1            # Identités d'échantillonnage et de fenêtre
  %(prog)s perturb-single --trials 50 --N 4000         # Différence f(L) − f(M)
  %(prog)s perturb-pair --formula glafor --instance inst.json --function f.json --N 4000
  %(prog)s bound --kind lipschitz --trials 100         # Constante de Lipschitz explicite
  %(prog)s besov-norm --function f.json                # Norme de Besov et bandes
        """
    )

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--seed', type=int, default=0, help='Graine')
    common.add_argument('--trials', type=int, help="Nombre d'essais aléatoires")
    common.add_argument('--dim', type=int, help='Dimension des matrices')
    common.add_argument('--sigma', type=float, help='Largeur de bande')
    common.add_argument('--N', type=int, default=config.DEFAULT_N, help='Troncature maximale')
    common.add_argument('--tol', type=float, help="Seuil d'acceptation des résidus")
    common.add_argument('--instance', type=Path, help='Instance JSON')
    common.add_argument('--function', type=Path, help='Fonction JSON')
    common.add_argument('--out', type=Path, help='Fichier de sortie JSON')
    common.add_argument('--csv', type=Path, help='Historiques de sommes partielles (CSV)')
    common.add_argument('--workers', type=int, default=config.WORKERS, help='Nombre de workers')
    common.add_argument('--style', choices=STYLES, default='polynomial', help="Style d'instance générée")
    common.add_argument('--spread', type=float, default=0.1, help='Taille de la perturbation générée')

    subparsers = parser.add_subparsers(dest='command', help='Commandes disponibles')
    subparsers.add_parser('gen', parents=[common], help='Génère une instance')
    subparsers.add_parser('identities', parents=[common], help='Suite des identités scalaires')
    subparsers.add_parser('perturb-single', parents=[common], help='Perturbation d\'une matrice')
    pair_parser = subparsers.add_parser('perturb-pair', parents=[common], help='Perturbation de paires')
    pair_parser.add_argument('--formula', choices=[*FORMULAS, 'all', *FORMULA_ALIASES], default='glafor',
                             help='Formule vérifiée (vary-m, vary-l, total : alias de 31, 32, glafor)')
    bound_parser = subparsers.add_parser('bound', parents=[common], help='Bornes de perturbation')
    bound_parser.add_argument('--kind', choices=['lipschitz', 'besov', 'holder-schatten'], default='lipschitz',
                              help='Type de borne')
    bound_parser.add_argument('--alpha', type=float, default=0.5, help='Exposant de Hölder')
    bound_parser.add_argument('--p', type=float, default=2.0, help='Exposant de Schatten')
    subparsers.add_parser('besov-norm', parents=[common], help='Norme de Besov d\'une fonction')
    return parser


def _apply_tolerance(tol: Optional[float]):
    """Le seuil passe aussi par l'environnement pour les workers joblib"""
    if tol is None:
        return
    for name in ("PERTURB_TOL", "PAIR_TOL"):
        setattr(Config, name, tol)
        os.environ[f"DISSIPA_{name}"] = repr(tol)


def run(argv=None) -> int:
    """Point d'entrée testable : renvoie le code de sortie"""
    parser = build_parser()
    args = parser.parse_args(argv)
    if not args.command:
        parser.print_help()
        return EXIT_USAGE

    errors = config.validate_config()
    if errors:
        for error in errors:
            print(f"❌ Configuration: {error}", file=sys.stderr)
        return EXIT_USAGE

    values = {k: v for k, v in vars(args).items() if v is not None}
    values.setdefault("trials", DEFAULT_TRIALS.get(args.command, 1))
    try:
        run_config = RunConfig(**values)
    except ValidationError as e:
        print(f"❌ Paramètres invalides:\n{e}", file=sys.stderr)
        return EXIT_USAGE
    _apply_tolerance(run_config.tol)

    cli = VerificationCLI(run_config)
    try:
        return cli.executer()
    except (InvalidMatrix, InvalidFunction, NotCommuting, FileNotFoundError, json.JSONDecodeError) as e:
        cli.logger.error(f"❌ Entrée invalide: {e}")
        return EXIT_USAGE
    except KeyboardInterrupt:
        cli.logger.info("🛑 Interruption par l'utilisateur")
        return EXIT_FAILED
    except DissipaError as e:
        cli.logger.error(f"❌ {type(e).__name__}: {e}")
        return EXIT_FAILED


def main():
    """Fonction principale avec interface CLI"""
    sys.exit(run())


if __name__ == "__main__":
    main()
