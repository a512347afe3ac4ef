"""Command line surface: lifting, winding plots, fixture verification,
coset enumeration, quotient invariants, and certificates.

Exit codes: 0 success, 1 inconclusive certificate, 2 bad input or missing
fixture, 3 resource or numeric failure. Reports are deterministic and are
written in full or not at all; diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import mpmath
import numpy as np

from .exactnum import embed_complex
from .fpgroups import (EnumerationLimit, Presentation, Word, format_word,
                       parse_presentation, parse_word, schreier_system,
                       tietze_reduce, todd_coxeter)
from .nq2 import class2_quotient, rf_certificate
from .pathlift import (central_log, elliptic_log, lift_presentation,
                       normalize_lift, relator_path, winding_number)
from .presets import LatticePreset, dm_lattice, preset_ids, verify_preset
from .su21 import (GroupMatrix, check_unitary, parse_matrix_file, scale_to_su,
                   standard_form_conjugator)

EXIT_OK = 0
EXIT_INCONCLUSIVE = 1
EXIT_INPUT = 2
EXIT_COMPUTE = 3


class InputError(Exception):
    """Bad arguments or unusable input files; maps to exit code 2."""


class _Inputs:
    """Resolved presentation plus optional matrices and subgroup words."""

    __slots__ = ("presentation", "matrices", "standard_numerics", "preset",
                 "subgroup")

    def __init__(self, presentation, matrices, standard_numerics, preset,
                 subgroup):
        self.presentation = presentation
        self.matrices = matrices
        self.standard_numerics = standard_numerics
        self.preset = preset
        self.subgroup = subgroup


def _load_inputs(args) -> _Inputs:
    preset: Optional[LatticePreset] = None
    matrices: Optional[Dict[str, GroupMatrix]] = None
    numerics = None
    if getattr(args, "preset", None) and getattr(args, "pres", None):
        raise ValueError("choose one of --preset or --pres, not both")
    if getattr(args, "preset", None):
        preset = dm_lattice(args.preset)
        presentation = preset.presentation
        matrices = preset.matrices
        numerics = preset.standard_numerics
    elif getattr(args, "pres", None):
        presentation = parse_presentation(Path(args.pres).read_text())
        if getattr(args, "matrices", None):
            form, raw = parse_matrix_file(Path(args.matrices).read_text())
            missing = [g for g in presentation.gens if g not in raw]
            if missing:
                raise ValueError(f"matrix file lacks generators {missing}")
            matrices = {g: scale_to_su(raw[g]) for g in presentation.gens}
            for name, mat in matrices.items():
                if not check_unitary(mat):
                    raise ValueError(f"matrix {name} is not unitary for the "
                                     f"declared form")
            if not form.is_standard:
                conj = standard_form_conjugator(form)
                conj_inv = np.linalg.inv(conj)
                numerics = {g: conj @ matrices[g].numeric @ conj_inv
                            for g in presentation.gens}
    else:
        raise ValueError("missing input: pass --preset ID or --pres FILE "
                         f"(presets: {', '.join(preset_ids())})")

    subgroup: Optional[List[Word]] = None
    sub_arg = getattr(args, "subgroup", None)
    if sub_arg:
        path = Path(sub_arg)
        looks_like_path = os.sep in sub_arg or path.suffix != ""
        if path.is_file():
            subgroup = []
            for raw_line in path.read_text().splitlines():
                line = raw_line.split("#", 1)[0].strip()
                if line:
                    subgroup.append(presentation.word(line))
        elif preset is not None and not looks_like_path:
            subgroup = preset.subgroup_words(sub_arg)
        else:
            raise FileNotFoundError(f"subgroup file not found: {sub_arg}")
    return _Inputs(presentation, matrices, numerics, preset, subgroup)


def _require_matrices(inputs: _Inputs) -> None:
    if inputs.matrices is None:
        raise InputError("this subcommand needs generator matrices: pass "
                         "--preset ID or --pres FILE with --matrices FILE")


# ------------------------------------------------------------------ lift


def _lift(inputs: _Inputs, samples: int):
    lifted = lift_presentation(inputs.presentation, inputs.matrices,
                               standard_numerics=inputs.standard_numerics,
                               samples_per_letter=samples)
    return normalize_lift(lifted)


def cmd_lift(inputs: _Inputs, args) -> Tuple[str, int]:
    _require_matrices(inputs)
    lifted = _lift(inputs, args.samples)
    pres = inputs.presentation
    names = pres.gens + [lifted.z_name]
    z = len(pres.gens)
    lines = ["generators: " + " ".join(names)]
    for rel, k in zip(pres.relators, lifted.exponents):
        lines.append(format_word(rel * Word.gen(z, k) if k else rel, names))
    lines.append(f"# {lifted.z_name} central")
    return "\n".join(lines) + "\n", EXIT_OK


# ------------------------------------------------------------------ winding


def _path_logs(inputs: _Inputs):
    pres = inputs.presentation
    if inputs.standard_numerics is not None:
        numeric = [inputs.standard_numerics[g] for g in pres.gens]
    else:
        numeric = [inputs.matrices[g].numeric for g in pres.gens]
    logs = [elliptic_log(mat, index=i) for i, mat in enumerate(numeric)]
    logs.append(central_log(index=pres.ngens))
    return logs


def _svg(path) -> str:
    xs = [float(v.real) for v in path.values]
    ys = [float(v.imag) for v in path.values]
    lo = min(min(xs), min(ys))
    hi = max(max(xs), max(ys))
    span = max(hi - lo, 1e-9)
    pad = 0.1 * span
    lo, span = lo - pad, span + 2 * pad
    size = 600.0

    def sx(x: float) -> float:
        return (x - lo) / span * size

    def sy(y: float) -> float:
        return size - (y - lo) / span * size

    points = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(xs, ys))
    x0, y0 = sx(xs[0]), sy(ys[0])
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {size:.0f} '
        f'{size:.0f}">\n'
        f'<rect width="{size:.0f}" height="{size:.0f}" fill="white"/>\n'
        f'<polyline points="{points}" fill="none" stroke="black" '
        f'stroke-width="1.5"/>\n'
        f'<circle cx="{x0:.2f}" cy="{y0:.2f}" r="5" fill="red">'
        f'<title>start (1 + 0i)</title></circle>\n'
        f'</svg>\n'
    )


def cmd_winding(inputs: _Inputs, args) -> Tuple[str, int]:
    _require_matrices(inputs)
    pres = inputs.presentation
    names = list(pres.gens)
    if "z" not in names:
        names.append("z")
    try:
        word = parse_word(args.word, names)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    logs = _path_logs(inputs)
    path = relator_path(word, logs, args.samples)
    lines = []
    if args.open_path:
        end = path.endpoint
        lines.append(f"endpoint: {end.real:.9f} {end.imag:+.9f}i")
    else:
        lines.append(f"winding: {winding_number(path)}")
    lines.append("s,re,im")
    for s, value in zip(path.s, path.values):
        lines.append(f"{s:.9f},{value.real:.9f},{value.imag:.9f}")
    if args.svg:
        Path(args.svg).write_text(_svg(path))
    return "\n".join(lines) + "\n", EXIT_OK


# ------------------------------------------------------------------ verify


def _residual_at_bits(mat: GroupMatrix, bits: int) -> float:
    with mpmath.workprec(bits + 16):
        entries = [[embed_complex(e, bits).mid for e in row]
                   for row in mat.exact]
        form = [[embed_complex(e, bits).mid for e in row]
                for row in mat.form.matrix]
        worst = mpmath.mpf(0)
        for i in range(3):
            for j in range(3):
                acc = mpmath.mpc(0)
                for k in range(3):
                    for l in range(3):
                        acc += (entries[k][i].conjugate() * form[k][l]
                                * entries[l][j])
                worst = max(worst, abs(acc - form[i][j]))
    return float(worst)


def cmd_verify(inputs: _Inputs, args) -> Tuple[str, int]:
    if inputs.preset is None:
        raise InputError("verify checks a packaged preset: pass --preset ID")
    preset = inputs.preset
    lines = [f"preset {preset.name} (weights {preset.label})"]
    for text, j in verify_preset(preset):
        value = "1" if j == 0 else ("z" if j == 1 else f"z^{j}")
        lines.append(f"{text} = {value}")
    lines.append("all relator values match (exact arithmetic)")
    for name in preset.presentation.gens:
        res = _residual_at_bits(preset.matrices[name], args.bits)
        lines.append(f"unitarity residual of {name} at {args.bits} bits: "
                     f"{res:.3e}")
    return "\n".join(lines) + "\n", EXIT_OK


# ------------------------------------------------------------------ cosets


def cmd_cosets(inputs: _Inputs, args) -> Tuple[str, int]:
    words = inputs.subgroup or []
    table = todd_coxeter(inputs.presentation, words,
                         max_cosets=args.max_cosets)
    lines = [f"index: {table.index}",
             f"valid: {'yes' if table.validates(inputs.presentation, words) else 'no'}"]
    if words:
        lines.append(f"normal: {'yes' if table.fixes_all_cosets(words) else 'no'}")
    return "\n".join(lines) + "\n", EXIT_OK


# ------------------------------------------------------------------ subpres


def _subgroup_presentation(inputs: _Inputs, max_cosets: int) -> Presentation:
    if not inputs.subgroup:
        raise InputError("subpres needs --subgroup FILE (or a bundled "
                         "subgroup name with --preset)")
    table = todd_coxeter(inputs.presentation, inputs.subgroup,
                         max_cosets=max_cosets)
    sub = schreier_system(table, inputs.presentation).presentation
    return tietze_reduce(sub, budget=200000)


def cmd_subpres(inputs: _Inputs, args) -> Tuple[str, int]:
    reduced = _subgroup_presentation(inputs, args.max_cosets)
    lines = ["generators: " + " ".join(reduced.gens)]
    lines.extend(format_word(r, reduced.gens) for r in reduced.relators)
    return "\n".join(lines) + "\n", EXIT_OK


# ------------------------------------------------------------------ abelian / nq2


def _target_presentation(inputs: _Inputs, max_cosets: int) -> Presentation:
    if inputs.subgroup:
        return _subgroup_presentation(inputs, max_cosets)
    return inputs.presentation


def cmd_abelian(inputs: _Inputs, args) -> Tuple[str, int]:
    pres = _target_presentation(inputs, args.max_cosets)
    inv = pres.abelianization()
    return f"abelianization: {inv.describe()}\n", EXIT_OK


def cmd_nq2(inputs: _Inputs, args) -> Tuple[str, int]:
    pres = _target_presentation(inputs, args.max_cosets)
    q = class2_quotient(pres)
    return (f"abelianization: {q.abelianization.describe()}\n"
            f"derived part: {q.derived_part.describe()}\n"), EXIT_OK


# ------------------------------------------------------------------ certify


def cmd_certify(inputs: _Inputs, args) -> Tuple[str, int]:
    _require_matrices(inputs)
    lifted = _lift(inputs, args.samples)
    cert = rf_certificate(lifted, inputs.subgroup,
                          max_cosets=args.max_cosets)
    return cert.report(), EXIT_OK if cert.success else EXIT_INCONCLUSIVE


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="latcover",
        description="Lift lattice presentations in SU(2,1) to the universal "
                    "cover and certify residual finiteness via class-2 "
                    "nilpotent quotients.")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add(name: str, handler, help_text: str, needs_word: bool = False):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--preset", help="bundled preset id or weight label")
        p.add_argument("--pres", help="presentation file")
        p.add_argument("--matrices", help="matrix file (with --pres)")
        p.add_argument("--subgroup",
                       help="subgroup words file, or bundled name with --preset")
        p.add_argument("--bits", type=int, default=128,
                       help="precision bits for informational numerics")
        p.add_argument("--samples", type=int, default=256,
                       help="path samples per letter")
        p.add_argument("--max-cosets", type=int, default=10 ** 6,
                       help="coset enumeration limit")
        if needs_word:
            p.add_argument("--word", required=True,
                           help="word over the generators (may be empty)")
            p.add_argument("--svg", help="write the path trace as SVG here")
            p.add_argument("--open-path", action="store_true",
                           help="report the endpoint instead of a winding")
        p.set_defaults(handler=handler)
        return p

    add("lift", cmd_lift, "lift a presentation to the universal cover")
    add("winding", cmd_winding, "trace a word's path and report its winding",
        needs_word=True)
    add("verify", cmd_verify, "re-run a preset's exact relator checks")
    add("cosets", cmd_cosets, "enumerate cosets of a subgroup")
    add("subpres", cmd_subpres, "present a finite-index subgroup")
    add("abelian", cmd_abelian, "abelianization invariants")
    add("nq2", cmd_nq2, "class-2 nilpotent quotient invariants")
    add("certify", cmd_certify, "emit a residual-finiteness certificate")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for knob in ("bits", "samples", "max_cosets"):
        if getattr(args, knob) <= 0:
            print(f"error: --{knob.replace('_', '-')} must be positive",
                  file=sys.stderr)
            return EXIT_INPUT
    try:
        inputs = _load_inputs(args)
    except (ValueError, FileNotFoundError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        text, code = args.handler(inputs, args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except EnumerationLimit as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    except (ValueError, ArithmeticError, AssertionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    try:
        sys.stdout.write(text)
        sys.stdout.flush()
    except BrokenPipeError:
        # reader went away (e.g. | head); suppress the shutdown complaint
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
    return code


if __name__ == "__main__":
    sys.exit(main())
