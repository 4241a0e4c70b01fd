"""
Étiquettes des identités vérifiées, indexées par nom de contrôle

Chaque entrée de rapport porte le nom descriptif du contrôle (`name`) et
l'étiquette de l'identité qu'il vérifie (`anchor`).
"""
from typing import Dict

ANCHORS: Dict[str, str] = {
    # dissipative
    "cayley-round-trip": "§2 Cayley",
    "resolvent-identity": "Lemma LeMe9",
    "resolvent-commutation": "§3 Thm (a),(c),(d)",
    # bandfun
    "basis-normalization": "(hiz)",
    "basis-closed-form": "(hiz)",
    "row-energy": "(2vy)",
    "inner-product": "(Fz2)",
    "kernel-divided-difference": "(haa2)",
    "sampling-reconstruction": "(Fz)",
    "bernstein": "Thm to (Bernstein)",
    "regularized-divided-difference": "(Dfe)",
    "omega-star": "Thm Lomega",
    "omega-star-divergent": "Thm Lomega",
    "modulus": "Thm Lomega",
    # besov
    "window-partition": "(w)",
    "besov-norm-order": "(<be)",
    "band-reconstruction": "(fn)",
    # funcalc
    "route-agreement": "(fL)",
    "anchor-series-agreement": "Cor cor23",
    # doi
    "perturb-single": "(BSd9)",
    "perturb-pair-31": "(31)",
    "perturb-pair-32": "(32)",
    "perturb-pair-glafor": "(glafor)",
    "bound-lipschitz": "Cor 43",
    "bound-besov": "Thm osnrez",
    "bound-holder-schatten": "Thm SpGeld",
    "resolvent-transport": "Lemma LeMe9",
    "resolvent-sandwich": "Lemma LeMe9",
    "regularized-difference": "(Dfe)",
}


def anchor(name: str) -> str:
    """Étiquette d'un contrôle ; le nom lui-même si le contrôle n'est pas répertorié"""
    return ANCHORS.get(name, name)
