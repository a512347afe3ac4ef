"""Bundled lattice fixtures: load, determinant-scale, and exactly verify the
relator values of the packaged triangle-group lattices."""

from __future__ import annotations

import os
from importlib import resources
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from .exactnum import zeta
from .fpgroups import (Presentation, Word, braid_relator, parse_presentation,
                       format_word)
from .pathlift import LiftedPresentation, lift_presentation, normalize_lift
from .su21 import (GroupMatrix, HermitianForm, parse_matrix_file, scale_to_su,
                   standard_form_conjugator)

_CANONICAL = {
    "dm-5-4-1-1-1-6": "dm-5-4-1-1-1-6",
    "(5,4,1,1,1)/6": "dm-5-4-1-1-1-6",
    "dm-11-7-2-2-2-12": "dm-11-7-2-2-2-12",
    "(11,7,2,2,2)/12": "dm-11-7-2-2-2-12",
}

_LABELS = {
    "dm-5-4-1-1-1-6": "(5,4,1,1,1)/6",
    "dm-11-7-2-2-2-12": "(11,7,2,2,2)/12",
}

EXPECTED_POWERS = (2, 2, 2, 0, 0, 0, 0)


def preset_ids() -> List[str]:
    """Canonical directory ids of the bundled presets."""
    return sorted(_LABELS)


def _presets_root():
    env = os.environ.get("LATCOVER_PRESETS")
    if env:
        return Path(env)
    return resources.files(__package__) / "presets"


def _template_presentation(r1: int, r2: int) -> Presentation:
    b, u, v = Word.gen(0), Word.gen(1), Word.gen(2)
    return Presentation(["b", "u", "v"], [
        b ** r1,
        u ** r1,
        v ** r2,
        braid_relator(0, 2, 2),
        braid_relator(0, 1, 3),
        braid_relator(1, 2, 4),
        (b * u * v) ** 3,
    ])


def _single_power(word: Word, gen: int, what: str) -> int:
    if len(word.syllables) != 1 or word.syllables[0][0] != gen:
        raise ValueError(f"{what}: expected a power of generator {gen}, "
                         f"got {format_word(word)}")
    exp = word.syllables[0][1]
    if exp < 2:
        raise ValueError(f"{what}: exponent must be at least 2, got {exp}")
    return exp


class LatticePreset:
    """A packaged lattice: presentation, scaled exact matrices, and form."""

    __slots__ = ("name", "label", "presentation", "matrices", "form",
                 "scaled", "central", "orbifold_weights", "expected_powers",
                 "standard_numerics", "_root")

    def __init__(self, name: str, label: str, presentation: Presentation,
                 matrices: Dict[str, GroupMatrix], form: HermitianForm,
                 central: GroupMatrix, orbifold_weights: Tuple[int, int],
                 expected_powers: Tuple[int, ...],
                 standard_numerics: Optional[Dict[str, np.ndarray]], root):
        self.name = name
        self.label = label
        self.presentation = presentation
        self.matrices = matrices
        self.form = form
        self.scaled = True
        self.central = central
        self.orbifold_weights = orbifold_weights
        self.expected_powers = expected_powers
        self.standard_numerics = standard_numerics
        self._root = root

    def subgroup_names(self) -> List[str]:
        """Bundled subgroup word files, without the .words suffix."""
        sub = self._root / "subgroups"
        if not sub.is_dir():
            return []
        return sorted(p.name[:-len(".words")] for p in sub.iterdir()
                      if p.name.endswith(".words"))

    def subgroup_words(self, name: str) -> List[Word]:
        """Generating words of a bundled subgroup, over the base generators."""
        path = self._root / "subgroups" / f"{name}.words"
        if not path.is_file():
            known = ", ".join(self.subgroup_names()) or "none"
            raise FileNotFoundError(
                f"no subgroup fixture {name!r} for preset {self.name} "
                f"(available: {known})")
        words = []
        for raw in path.read_text().splitlines():
            line = raw.split("#", 1)[0].strip()
            if line:
                words.append(self.presentation.word(line))
        return words

    def lift(self, samples_per_letter: int = 256,
             normalized: bool = True) -> LiftedPresentation:
        """Lift to the universal cover; canonical generator gauge by default."""
        lifted = lift_presentation(self.presentation, self.matrices,
                                   standard_numerics=self.standard_numerics,
                                   samples_per_letter=samples_per_letter)
        return normalize_lift(lifted) if normalized else lifted

    def __repr__(self) -> str:
        return f"LatticePreset({self.name!r}, weights {self.label})"


def _central_exponent(value: GroupMatrix, central: GroupMatrix,
                      order: int = 3) -> Optional[int]:
    for j in range(order):
        if value == central ** j:
            return j
    return None


def verify_preset(preset: LatticePreset) -> List[Tuple[str, int]]:
    """Exactly evaluate every relator on the scaled matrices.

    Returns (relator, j) pairs with relator value = zhat^j; raises if any
    value is not a power of the central element or disagrees with the
    preset's expected powers.
    """
    gens = [preset.matrices[name] for name in preset.presentation.gens]
    results: List[Tuple[str, int]] = []
    for rel, expected in zip(preset.presentation.relators,
                             preset.expected_powers):
        value = GroupMatrix.identity(preset.form)
        for g, e in rel.syllables:
            value = value * gens[g] ** e
        text = format_word(rel, preset.presentation.gens)
        j = _central_exponent(value, preset.central)
        if j is None:
            raise ValueError(f"relator {text} does not evaluate to a central "
                             f"power in preset {preset.name}")
        if j != expected:
            raise ValueError(f"relator {text} evaluates to zhat^{j}, "
                             f"expected zhat^{expected} in preset {preset.name}")
        results.append((text, j))
    return results


def _load_form_file(text: str, matrices_form: HermitianForm,
                    name: str) -> None:
    form, extra = parse_matrix_file(text)
    if extra:
        raise ValueError(f"form.txt of preset {name} must not define matrices")
    if form != matrices_form:
        raise ValueError(f"form.txt and matrices.txt disagree in preset {name}")


def dm_lattice(preset_id: str) -> LatticePreset:
    """Load, scale, and verify a bundled preset by directory id or weight label."""
    name = _CANONICAL.get(preset_id)
    if name is None:
        known = sorted(_CANONICAL)
        raise ValueError(f"unknown preset {preset_id!r}; known ids: "
                         f"{', '.join(known)}")
    root = _presets_root() / name
    if not root.is_dir():
        raise FileNotFoundError(f"preset fixture directory not found: {root}")

    presentation = parse_presentation((root / "presentation.txt").read_text())
    if presentation.gens != ["b", "u", "v"]:
        raise ValueError(f"preset {name}: generators must be b, u, v, "
                         f"got {presentation.gens}")
    r1 = _single_power(presentation.relators[0], 0, f"preset {name}")
    r2 = _single_power(presentation.relators[2], 2, f"preset {name}")
    template = _template_presentation(r1, r2)
    if presentation.relators != template.relators:
        raise ValueError(f"preset {name}: relators do not match the "
                         f"triangle-lattice template with orders ({r1}, {r2})")

    form, unscaled = parse_matrix_file((root / "matrices.txt").read_text())
    _load_form_file((root / "form.txt").read_text(), form, name)
    missing = [g for g in presentation.gens if g not in unscaled]
    extra = [g for g in unscaled if g not in presentation.gens]
    if missing or extra:
        raise ValueError(f"preset {name}: matrix names {sorted(unscaled)} do "
                         f"not match generators {presentation.gens}")

    matrices = {g: scale_to_su(unscaled[g]) for g in presentation.gens}
    central = GroupMatrix.scalar(zeta(3), form)

    standard_numerics = None
    if not form.is_standard:
        conj = standard_form_conjugator(form)
        conj_inv = np.linalg.inv(conj)
        standard_numerics = {g: conj @ matrices[g].numeric @ conj_inv
                             for g in presentation.gens}

    preset = LatticePreset(name, _LABELS.get(name, name), presentation,
                           matrices, form, central, (r1, r2),
                           EXPECTED_POWERS, standard_numerics, root)
    verify_preset(preset)
    return preset
