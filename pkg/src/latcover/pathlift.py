"""Path lifting in SU(2,1): logarithms of elliptic elements, piecewise
relator paths, winding numbers of the last-coordinate projection, and the
central extension presentation they determine."""

from __future__ import annotations

import cmath
import math
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .exactnum import CycloElt, zeta
from .fpgroups import Presentation, Word
from .su21 import GroupMatrix, Z0, unitarity_residual

TWO_PI = 2.0 * math.pi
EXP_TOL = 1e-10
CLOSURE_TOL = 1e-8
MODULUS_FLOOR = 1e-6
ARG_STEP_LIMIT = math.pi / 2
SNAP_TOL = 0.05
DEFAULT_SAMPLES_PER_LETTER = 256
REFINE_BUDGET = 2 ** 16

_H_STD = np.array([[0, 0, 1], [0, 1, 0], [1, 0, 0]], dtype=complex)

# traceless anti-hermitian log of the central element zeta_3*Id; its
# one-parameter path stays in SU(2,1) and its projection turns by +2*pi/3
CENTRAL_THETA = np.array([TWO_PI / 3, -2 * TWO_PI / 3, TWO_PI / 3])


class GeneratorLog:
    """Anti-hermitian logarithm of an elliptic generator with its spectral
    data cached for fast path evaluation."""

    __slots__ = ("index", "v", "thetas", "vecs", "vecs_inv")

    def __init__(self, index: int, thetas: np.ndarray, vecs: np.ndarray,
                 vecs_inv: np.ndarray):
        self.index = index
        self.thetas = np.asarray(thetas, dtype=float)
        self.vecs = np.asarray(vecs, dtype=complex)
        self.vecs_inv = np.asarray(vecs_inv, dtype=complex)
        self.v = (self.vecs * (1j * self.thetas)) @ self.vecs_inv

    def exp_at(self, t: float, sign: int = 1) -> np.ndarray:
        phases = np.exp(1j * sign * self.thetas * t)
        return (self.vecs * phases) @ self.vecs_inv

    def matrix(self) -> np.ndarray:
        return self.exp_at(1.0)

    def projection_samples(self, start: np.ndarray, sign: int,
                           times: np.ndarray) -> np.ndarray:
        """Last coordinate of exp(sign*v*t) @ start for each t, vectorized.

        exp(sign*v*t)@start = sum_j (V[:,j] * (V^-1 start)_j) e^(i sign th_j t);
        only the last row of V matters for the projection.
        """
        coeffs = self.vecs[2, :] * (self.vecs_inv @ start)
        phases = np.exp(1j * sign * np.outer(times, self.thetas))
        return phases @ coeffs


def central_log(index: int = -1) -> GeneratorLog:
    """Log of the central element zeta_3*Id (the distinguished lift z)."""
    eye = np.eye(3, dtype=complex)
    return GeneratorLog(index, CENTRAL_THETA.copy(), eye, eye.copy())


def _h_inner(x: np.ndarray, y: np.ndarray) -> complex:
    return complex(x.conj() @ _H_STD @ y)


def _split_repeated_eigenspace(vecs: np.ndarray, i: int, j: int) -> np.ndarray:
    """Replace eigenvector columns i, j (same eigenvalue) by an h-orthogonal
    pair so a branch shift can be applied to a single h-compatible line."""
    x1, x2 = vecs[:, i], vecs[:, j]
    y1 = None
    for cand in (x1, x2, x1 + x2, x1 + 1j * x2):
        if abs(_h_inner(cand, cand)) > 1e-8 * float(np.linalg.norm(cand)) ** 2:
            y1 = cand / np.linalg.norm(cand)
            break
    if y1 is None:
        raise ValueError("degenerate eigenspace: cannot split h-orthogonally")
    y2 = x2 - y1 * (_h_inner(y1, x2) / _h_inner(y1, y1))
    if np.linalg.norm(y2) < 1e-10:
        y2 = x1 - y1 * (_h_inner(y1, x1) / _h_inner(y1, y1))
    y2 = y2 / np.linalg.norm(y2)
    out = vecs.copy()
    out[:, i] = y1
    out[:, j] = y2
    return out


def elliptic_log(g, index: int = 0, tol: float = EXP_TOL) -> GeneratorLog:
    """Traceless anti-hermitian log of an elliptic or central SU(2,1) matrix,
    eigenvalue arguments branch (-pi, pi] before the traceless adjustment."""
    mat = g.numeric if isinstance(g, GroupMatrix) else np.asarray(g, dtype=complex)
    off = mat - np.eye(3) * mat[0, 0]
    if np.max(np.abs(off)) < 1e-12:
        value = mat[0, 0]
        zeta3 = cmath.exp(2j * math.pi / 3)
        eye = np.eye(3, dtype=complex)
        if abs(value - 1.0) < 1e-9:
            return GeneratorLog(index, np.zeros(3), eye, eye.copy())
        if abs(value - zeta3) < 1e-9:
            return GeneratorLog(index, CENTRAL_THETA.copy(), eye, eye.copy())
        if abs(value - zeta3 ** 2) < 1e-9:
            return GeneratorLog(index, -CENTRAL_THETA.copy(), eye, eye.copy())
        raise ValueError(f"scalar {value} is not in SU(3)")

    vals, vecs = np.linalg.eig(mat)
    if np.max(np.abs(np.abs(vals) - 1.0)) > 1e-8:
        raise ValueError(f"eigenvalues {vals} are not unit modulus; "
                         "input is not elliptic")
    if np.linalg.cond(vecs) > 1e6:
        raise ValueError("matrix is not safely diagonalizable "
                         "(parabolic input is unsupported)")

    order = np.argsort(-np.angle(vals), kind="stable")
    vals, vecs = vals[order], vecs[:, order]
    thetas = np.angle(vals)  # principal branch (-pi, pi]
    total = thetas.sum()
    shift = int(round(total / TWO_PI))
    if abs(total - shift * TWO_PI) > 1e-7:
        raise ValueError(f"eigenvalue arguments sum to {total}, "
                         "not a multiple of 2*pi; det is off")
    if shift == 1:
        if thetas[0] - thetas[1] < 1e-9:
            vecs = _split_repeated_eigenspace(vecs, 0, 1)
        thetas[0] -= TWO_PI
    elif shift == -1:
        if thetas[1] - thetas[2] < 1e-9:
            vecs = _split_repeated_eigenspace(vecs, 2, 1)
        thetas[2] += TWO_PI
    elif shift != 0:
        raise ValueError(f"unexpected branch shift {shift}")

    vecs_inv = np.linalg.inv(vecs)
    log = GeneratorLog(index, thetas, vecs, vecs_inv)
    residual = float(np.max(np.abs(log.matrix() - mat)))
    if residual > tol:
        raise ValueError(f"log reconstruction residual {residual:.3e} "
                         f"exceeds {tol}")
    if abs(np.trace(log.v)) > 1e-9:
        raise AssertionError("log is not traceless")
    herm = np.max(np.abs(log.v.conj().T @ _H_STD + _H_STD @ log.v))
    if herm > 1e-7:
        raise AssertionError("log is not anti-hermitian for the form")
    return log


class RelatorPath:
    """Sampled projection of a piecewise one-parameter path for a word.

    The word's letters act right to left: segment m travels along letter m's
    one-parameter subgroup and is right-multiplied by the product of the
    letters already traversed.
    """

    __slots__ = ("word", "s", "values", "segments", "letters")

    def __init__(self, word: Word, s: np.ndarray, values: np.ndarray,
                 segments: np.ndarray, letters: List[Tuple[int, int]]):
        self.word = word
        self.s = s
        self.values = values
        self.segments = segments
        self.letters = letters
        if abs(values[0] - 1.0) > 1e-12:
            raise ValueError("path must start at 1")
        moduli = np.abs(values)
        if float(moduli.min()) <= MODULUS_FLOOR:
            raise ValueError(f"projection modulus {moduli.min():.3e} at "
                             f"s={s[int(moduli.argmin())]:.6f} breaks the "
                             "nonvanishing guarantee")
        steps = np.abs(np.angle(values[1:] / values[:-1]))
        if steps.size and float(steps.max()) >= ARG_STEP_LIMIT:
            raise ValueError("consecutive samples differ in argument by "
                             f"{steps.max():.3f} >= pi/2")

    @property
    def endpoint(self) -> complex:
        return complex(self.values[-1])

    @property
    def is_closed(self) -> bool:
        return abs(self.values[-1] - self.values[0]) < CLOSURE_TOL

    def total_argument(self) -> float:
        return float(np.angle(self.values[1:] / self.values[:-1]).sum())


def relator_path(word: Word, logs: Sequence[GeneratorLog],
                 samples_per_letter: int = DEFAULT_SAMPLES_PER_LETTER,
                 budget: int = REFINE_BUDGET) -> RelatorPath:
    """Sample the projected path of a word, refining each segment until
    consecutive samples turn by less than pi/2."""
    letters = list(reversed(word.letters()))  # rightmost letter acts first
    s_parts = [np.array([0.0])]
    value_parts = [np.array([1.0 + 0.0j])]
    seg_parts = [np.array([0], dtype=int)]
    nletters = max(len(letters), 1)
    accumulated = np.eye(3, dtype=complex)

    for seg, (gen, sign) in enumerate(letters):
        log = logs[gen]
        start = accumulated @ Z0
        prev_value = value_parts[-1][-1]
        n = samples_per_letter
        while True:
            times = np.arange(1, n + 1) / n
            values = log.projection_samples(start, sign, times)
            all_vals = np.concatenate(([prev_value], values))
            steps = np.abs(np.angle(all_vals[1:] / all_vals[:-1]))
            if float(steps.max()) < ARG_STEP_LIMIT:
                break
            if n >= budget:
                raise ValueError(f"segment {seg} still turns too fast at "
                                 f"{n} samples (budget {budget})")
            n *= 2
        s_parts.append((seg + times) / nletters)
        value_parts.append(values)
        seg_parts.append(np.full(n, seg, dtype=int))
        accumulated = log.exp_at(1.0, sign) @ accumulated

    if not letters:
        s_parts.append(np.array([1.0]))
        value_parts.append(np.array([1.0 + 0.0j]))
        seg_parts.append(np.array([0], dtype=int))

    return RelatorPath(word, np.concatenate(s_parts),
                       np.concatenate(value_parts),
                       np.concatenate(seg_parts), letters)


def winding_number(path: RelatorPath, open_path: bool = False):
    """Winding of the sampled loop around 0, counterclockwise positive.

    With open_path=True returns the fractional total turning (in turns)
    without requiring closure.
    """
    turns = path.total_argument() / TWO_PI
    if open_path:
        return turns
    if not path.is_closed:
        raise ValueError(f"path is not closed: endpoint {path.endpoint}")
    nearest = round(turns)
    if abs(turns - nearest) > SNAP_TOL:
        raise ValueError(f"total turning {turns} is not within {SNAP_TOL} "
                         "of an integer")
    return int(nearest)


class LiftedPresentation:
    """Base presentation extended by a central generator z, with the central
    exponent k_i for each base relator meaning relator * z^(k_i) = 1, and the
    power m with z^m generating the deck group of the universal cover."""

    __slots__ = ("base", "z_name", "exponents", "center_power")

    def __init__(self, base: Presentation, exponents: Sequence[int],
                 z_name: str = "z", center_power: int = 3):
        if len(exponents) != len(base.relators):
            raise ValueError("need one central exponent per base relator")
        if z_name in base.gens:
            raise ValueError(f"central generator name {z_name!r} collides")
        self.base = base
        self.exponents = list(int(k) for k in exponents)
        self.z_name = z_name
        self.center_power = center_power

    def to_presentation(self) -> Presentation:
        """Presentation on base generators plus z: lifted relators and
        centrality relations."""
        zi = self.base.ngens
        z = Word.gen(zi)
        relators = [rel * z ** k
                    for rel, k in zip(self.base.relators, self.exponents)]
        for g in range(self.base.ngens):
            gw = Word.gen(g)
            relators.append(gw * z * gw.inv() * z.inv())
        return Presentation(self.base.gens + [self.z_name], relators)

    def __eq__(self, other) -> bool:
        if not isinstance(other, LiftedPresentation):
            return NotImplemented
        return (self.base == other.base and self.exponents == other.exponents
                and self.z_name == other.z_name
                and self.center_power == other.center_power)

    def __repr__(self) -> str:
        rels = ", ".join(
            f"{r!r}*z^{k}" if k else f"{r!r}"
            for r, k in zip(self.base.relators, self.exponents))
        return f"LiftedPresentation({rels})"


def _exact_central_power(product: GroupMatrix) -> int:
    """j in {0,1,2} with product = (zeta_3^j)*Id exactly, else raises."""
    for j in range(3):
        if product == GroupMatrix.scalar(zeta(3) ** j, product.form):
            return j
    raise ValueError("relator does not evaluate to a central element")


def lift_presentation(pres: Presentation, matrices: Mapping[str, GroupMatrix],
                      standard_numerics: Optional[Mapping[str, np.ndarray]] = None,
                      samples_per_letter: int = DEFAULT_SAMPLES_PER_LETTER,
                      ) -> LiftedPresentation:
    """Lift a presentation whose relators are exactly central to the
    universal cover: compute each relator's central exponent from the exact
    scalar value and the winding of the closed projected loop."""
    exact = [matrices[name] for name in pres.gens]
    if standard_numerics is None:
        numeric = [m.numeric for m in exact]
    else:
        numeric = [np.asarray(standard_numerics[name]) for name in pres.gens]
    for name, mat in zip(pres.gens, numeric):
        residual = unitarity_residual(mat)
        if residual > 1e-8:
            raise ValueError(f"generator {name} is not numerically in "
                             f"SU(2,1): residual {residual:.3e}")
    logs = [elliptic_log(mat, index=i) for i, mat in enumerate(numeric)]
    logs.append(central_log(index=pres.ngens))
    zeta3 = cmath.exp(2j * math.pi / 3)

    exponents = []
    for rel in pres.relators:
        product = _word_product(rel, exact)
        j = _exact_central_power(product)
        open_path = relator_path(rel, logs, samples_per_letter)
        if abs(open_path.endpoint - zeta3 ** j) > CLOSURE_TOL:
            raise ValueError(f"numeric path endpoint {open_path.endpoint} "
                             f"disagrees with exact central value index {j}")
        closed_word = Word.gen(pres.ngens, -j) * rel
        loop = relator_path(closed_word, logs, samples_per_letter)
        r = winding_number(loop)
        exponents.append(-(j + 3 * r))
    return LiftedPresentation(pres, exponents)


def _word_product(word: Word, matrices: Sequence[GroupMatrix]) -> GroupMatrix:
    out = GroupMatrix.identity(matrices[0].form)
    for g, e in word.syllables:
        out = out * matrices[g] ** e
    return out


def normalize_lift(lp: LiftedPresentation) -> LiftedPresentation:
    """Canonical form under the moves g_i -> g_i*z^(c_i) and z -> z^-1.

    Torsion relators g^m (z-exponent k) pin c_g by minimizing |k + m*c|,
    ties toward the nonnegative value; every relator then receives the
    induced correction via its exponent sums; of the two z-orientations the
    lexicographically larger exponent vector wins.
    """
    base = lp.base

    def normal_form(exponents: List[int]) -> List[int]:
        shifts = [0] * base.ngens
        pinned = [False] * base.ngens
        for rel, k in zip(base.relators, exponents):
            if len(rel.syllables) != 1:
                continue
            g, m = rel.syllables[0]
            if m <= 0 or pinned[g]:
                continue
            c = -(k // m) if k % m == 0 else round(-k / m)
            best = min((abs(k + m * cc), -(k + m * cc), cc)
                       for cc in (c - 1, c, c + 1))
            shifts[g] = best[2]
            pinned[g] = True
        return [k + sum(cc * rel.exponent_sum(g)
                        for g, cc in enumerate(shifts))
                for rel, k in zip(base.relators, exponents)]

    straight = normal_form(lp.exponents)
    flipped = normal_form([-k for k in lp.exponents])
    chosen = max(straight, flipped)
    return LiftedPresentation(base, chosen, lp.z_name, lp.center_power)
