"""Maximal class-2 nilpotent quotients of finitely presented groups, exact
order tests for word images, and residual-finiteness certificates built from
the order of a central generator in such a quotient."""

from __future__ import annotations

import hashlib
from typing import List, Optional, Sequence, Tuple

from .fpgroups import (Presentation, Word, format_word, preimage_subgroup,
                       schreier_system, serialize_presentation, tietze_reduce,
                       todd_coxeter)
from .intlinalg import (IntMatrix, hnf, hnf_basis, in_rowspace,
                        quotient_invariants, saturation_order,
                        solve_in_rowspace)


def wedge_size(n: int) -> int:
    return n * (n - 1) // 2


def wedge_offsets(n: int) -> List[int]:
    """Start of the (i, *) block inside the lexicographic (i<j) pair order."""
    return [i * (2 * n - i - 1) // 2 for i in range(n)]


class ClassTwoElement:
    """Element of the free class-2 nilpotent group on n generators, in the
    collected normal form x_0^a_0 ... x_{n-1}^a_{n-1} * prod_{i<j} c_ij^m_ij
    with c_ij = [x_i, x_j] = x_i^-1 x_j^-1 x_i x_j central."""

    __slots__ = ("n", "a", "m")

    def __init__(self, n: int, a: Sequence[int], m: Sequence[int]):
        self.n = n
        self.a = tuple(int(x) for x in a)
        self.m = tuple(int(x) for x in m)
        if len(self.a) != n or len(self.m) != wedge_size(n):
            raise ValueError(f"coordinate lengths {len(self.a)}/{len(self.m)} "
                             f"do not fit rank {n}")

    @staticmethod
    def identity(n: int) -> "ClassTwoElement":
        return ClassTwoElement(n, [0] * n, [0] * wedge_size(n))

    @staticmethod
    def from_word(n: int, word: Word) -> "ClassTwoElement":
        """Collect a free word left to right."""
        a = [0] * n
        m = [0] * wedge_size(n)
        offs = wedge_offsets(n)
        for g, e in word.syllables:
            if not 0 <= g < n:
                raise ValueError(f"word uses generator {g} outside rank {n}")
            # right-multiply by x_g^e: passing x_g^e left across x_j^a_j
            # (j > g) deposits c_gj^(-e*a_j)
            base = offs[g] - g - 1
            for j in range(g + 1, n):
                if a[j]:
                    m[base + j] -= e * a[j]
            a[g] += e
        return ClassTwoElement(n, a, m)

    def _self_twist(self) -> List[int]:
        """Collection correction of squaring: entries -a_j*a_i for i<j."""
        n, a = self.n, self.a
        out = [0] * wedge_size(n)
        pos = 0
        for i in range(n):
            for j in range(i + 1, n):
                out[pos] = -a[j] * a[i]
                pos += 1
        return out

    def __mul__(self, other: "ClassTwoElement") -> "ClassTwoElement":
        if self.n != other.n:
            raise ValueError(f"rank mismatch {self.n} != {other.n}")
        n = self.n
        a = [x + y for x, y in zip(self.a, other.a)]
        m = [x + y for x, y in zip(self.m, other.m)]
        pos = 0
        for i in range(n):
            bi = other.a[i]
            for j in range(i + 1, n):
                if bi and self.a[j]:
                    m[pos] -= self.a[j] * bi
                pos += 1
        return ClassTwoElement(n, a, m)

    def inv(self) -> "ClassTwoElement":
        twist = self._self_twist()
        return ClassTwoElement(self.n, [-x for x in self.a],
                               [t - x for x, t in zip(self.m, twist)])

    def __pow__(self, k: int) -> "ClassTwoElement":
        k = int(k)
        half = k * (k - 1) // 2
        twist = self._self_twist()
        return ClassTwoElement(self.n, [k * x for x in self.a],
                               [k * x + half * t
                                for x, t in zip(self.m, twist)])

    def __eq__(self, other) -> bool:
        if not isinstance(other, ClassTwoElement):
            return NotImplemented
        return (self.n, self.a, self.m) == (other.n, other.a, other.m)

    def __hash__(self) -> int:
        return hash((self.n, self.a, self.m))

    def __repr__(self) -> str:
        return f"ClassTwoElement(n={self.n}, a={list(self.a)}, m={list(self.m)})"


def _unit_wedge(n: int, v: Sequence[int], k: int) -> List[int]:
    """Coordinates of v wedge e_k: entry (i,k) gets v_i, entry (k,j) gets -v_j."""
    out = [0] * wedge_size(n)
    offs = wedge_offsets(n)
    for i in range(k):
        out[offs[i] + k - i - 1] = v[i]
    base = offs[k] - k - 1
    for j in range(k + 1, n):
        out[base + j] = -v[j]
    return out


def _power_product(factors: Sequence[ClassTwoElement], coeffs: Sequence[int],
                   n: int) -> ClassTwoElement:
    """Collected value of factors[0]^c_0 * factors[1]^c_1 * ... in index order."""
    out = ClassTwoElement.identity(n)
    for elt, c in zip(factors, coeffs):
        if c:
            out = out * elt ** c
    return out


class NQ2Image:
    """Image of a word in a class-2 quotient: collected free coordinates plus
    the exact order of the image (None means infinite)."""

    __slots__ = ("a", "m", "order")

    def __init__(self, a: Sequence[int], m: Sequence[int],
                 order: Optional[int]):
        self.a = tuple(int(x) for x in a)
        self.m = tuple(int(x) for x in m)
        self.order = order

    @property
    def is_infinite(self) -> bool:
        return self.order is None

    def __eq__(self, other) -> bool:
        if not isinstance(other, NQ2Image):
            return NotImplemented
        return (self.a, self.m, self.order) == (other.a, other.m, other.order)

    def __repr__(self) -> str:
        o = "infinite" if self.order is None else self.order
        return f"NQ2Image(a={list(self.a)}, order={o})"


class NQ2:
    """Maximal class-2 nilpotent quotient of a finitely presented group.

    The quotient is the free class-2 group on the presentation's generators
    modulo the normal closure of the collected relators.  That closure meets
    the center in the lattice spanned by every relator-abelianization wedge
    h_i ^ e_k together with the collected values of the relator combinations
    whose abelianized rows cancel; membership and order tests reduce against
    that lattice after matching the generator-block coordinates.
    """

    __slots__ = ("n", "relator_images", "_ah", "_au", "_abasis",
                 "center_basis", "abelianization", "derived_part")

    def __init__(self, pres: Presentation):
        n = pres.ngens
        self.n = n
        self.relator_images = tuple(ClassTwoElement.from_word(n, rel)
                                    for rel in pres.relators)
        amat = IntMatrix.from_rows([list(e.a) for e in self.relator_images],
                                   cols=n)
        self._ah, self._au = hnf(amat)
        self._abasis = [row for row in self._ah.data if any(row)]
        center_rows: List[List[int]] = []
        for h in self._abasis:
            for k in range(n):
                row = _unit_wedge(n, h, k)
                if any(row):
                    center_rows.append(row)
        for i, hrow in enumerate(self._ah.data):
            if any(hrow):
                continue
            combo = _power_product(self.relator_images, self._au.data[i], n)
            assert not any(combo.a)
            if any(combo.m):
                center_rows.append(list(combo.m))
        self.center_basis = hnf_basis(
            IntMatrix.from_rows(center_rows, cols=wedge_size(n)))
        self.abelianization = quotient_invariants(n, self._abasis)
        self.derived_part = quotient_invariants(wedge_size(n),
                                                self.center_basis)

    def _central_residue(self, elt: ClassTwoElement) -> Optional[List[int]]:
        """Center coordinates of elt relative to the relator combination with
        the same generator block, or None when no such combination exists."""
        coeffs = solve_in_rowspace(list(elt.a), self._ah, self._au)
        if coeffs is None:
            return None
        ref = _power_product(self.relator_images, coeffs, self.n)
        return [x - y for x, y in zip(elt.m, ref.m)]

    def is_trivial(self, elt: ClassTwoElement) -> bool:
        """Does this free class-2 element map to the identity?"""
        residue = self._central_residue(elt)
        return residue is not None and in_rowspace(residue, self.center_basis)

    def order_of(self, elt: ClassTwoElement) -> Optional[int]:
        """Exact order of the image of elt, None when infinite."""
        d1 = saturation_order(list(elt.a), self._abasis)
        if d1 is None:
            return None
        residue = self._central_residue(elt ** d1)
        assert residue is not None
        d2 = saturation_order(residue, self.center_basis)
        if d2 is None:
            return None
        return d1 * d2

    def abelian_order(self, a: Sequence[int]) -> Optional[int]:
        """Order of a generator-block vector in the abelianization."""
        return saturation_order(list(a), self._abasis)

    def image(self, word: Word) -> NQ2Image:
        elt = ClassTwoElement.from_word(self.n, word)
        return NQ2Image(elt.a, elt.m, self.order_of(elt))

    def relation_rows(self) -> IntMatrix:
        """Rows generating the relation subgroup: collected relator
        coordinates plus the zero-prefixed central lattice basis.  These
        generate under collected multiplication, not under integer row sums;
        use is_trivial for membership questions."""
        rows = [list(e.a) + list(e.m) for e in self.relator_images]
        rows += [[0] * self.n + list(r) for r in self.center_basis]
        return IntMatrix.from_rows(rows, cols=self.n + wedge_size(self.n))

    def __repr__(self) -> str:
        return (f"NQ2(n={self.n}, abelianization="
                f"{self.abelianization.describe()}, derived_part="
                f"{self.derived_part.describe()})")


def class2_quotient(pres: Presentation) -> NQ2:
    """Maximal class-2 nilpotent quotient of the presented group."""
    return NQ2(pres)


def nq2_image(q: NQ2, word: Word) -> NQ2Image:
    """Collected coordinates and exact order of a word's image in q."""
    return q.image(word)


def epsilon(base: Presentation, lifted: Presentation) -> int:
    """Growth of the derived part's free rank from the base group's class-2
    quotient to the lifted group's; a central Z-extension changes it by 0 or 1."""
    base_rank = class2_quotient(base).derived_part.free_rank
    lifted_rank = class2_quotient(lifted).derived_part.free_rank
    diff = lifted_rank - base_rank
    if diff not in (0, 1):
        raise ValueError(f"derived free rank moved {base_rank} -> "
                         f"{lifted_rank}; a central Z-extension cannot "
                         f"change it by {diff}")
    return diff


class Certificate:
    """Outcome of one central-order test: which subgroup was used, the
    invariants of its class-2 quotient, the order of the central generator's
    image there, and the verdict the order supports."""

    __slots__ = ("input_hash", "subgroup", "index", "abelianization",
                 "derived_part", "z_image", "z_location", "verdict")

    def __init__(self, input_hash: str, subgroup: Optional[Tuple[str, ...]],
                 index: int, abelianization, derived_part, z_image: NQ2Image,
                 z_location: Optional[str], verdict: str):
        if verdict not in ("INFINITE_ORDER", "INCONCLUSIVE"):
            raise ValueError(f"unknown verdict {verdict!r}")
        self.input_hash = input_hash
        self.subgroup = subgroup
        self.index = index
        self.abelianization = abelianization
        self.derived_part = derived_part
        self.z_image = z_image
        self.z_location = z_location
        self.verdict = verdict

    @property
    def success(self) -> bool:
        return self.verdict == "INFINITE_ORDER"

    def report(self) -> str:
        lines = ["central order certificate",
                 f"inputs sha256: {self.input_hash}"]
        if self.subgroup is None:
            lines.append("subgroup: whole group")
        else:
            lines.append(f"subgroup words (over the base generators): "
                         f"{len(self.subgroup)}")
            lines.extend(f"  {w}" for w in self.subgroup)
        lines.append(f"index: {self.index}")
        lines.append(f"abelianization: {self.abelianization.describe()}")
        lines.append(f"derived part: {self.derived_part.describe()}")
        if self.z_image.order is None:
            lines.append(f"z order: infinite (in the {self.z_location})")
        else:
            lines.append(f"z order: {self.z_image.order}")
        lines.append(f"verdict: {self.verdict}")
        if self.success:
            lines.append("conclusion: the center injects into a finitely "
                         "generated nilpotent quotient, so the lifted group "
                         "is residually finite, and so is its image after "
                         "collapsing any finite-index subgroup of the center.")
        else:
            lines.append("conclusion: the central generator already has "
                         "finite order in this quotient, so this test decides "
                         "nothing; a finer finite-index subgroup may still "
                         "separate the center.")
        return "\n".join(lines) + "\n"

    def __repr__(self) -> str:
        return f"Certificate(index={self.index}, verdict={self.verdict})"


def rf_certificate(lp, subgroup_words: Optional[Sequence[Word]] = None,
                   max_cosets: int = 10 ** 6,
                   tietze_budget: int = 200000) -> Certificate:
    """Test the central generator's order in the class-2 quotient of the
    whole lifted group (subgroup_words None) or of the full preimage of a
    finite-index subgroup given by words over the base generators."""
    lifted = lp.to_presentation()
    z_index = lifted.ngens - 1
    payload = serialize_presentation(lifted)
    if subgroup_words is not None:
        payload += "".join(f"\n{format_word(w, lp.base.gens)}"
                           for w in subgroup_words)
    digest = hashlib.sha256(payload.encode()).hexdigest()[:16]

    if subgroup_words is None:
        index = 1
        subgroup = None
        quotient = class2_quotient(lifted)
        z_word = Word.gen(z_index)
    else:
        gens = preimage_subgroup(lifted, subgroup_words, z_index)
        table = todd_coxeter(lifted, gens, max_cosets=max_cosets)
        system = schreier_system(table, lifted)
        z_in_subgroup = system.rewrite(Word.gen(z_index))
        reduced, tracked = tietze_reduce(system.presentation,
                                         budget=tietze_budget,
                                         tracked=[z_in_subgroup])
        index = table.index
        subgroup = tuple(format_word(w, lp.base.gens) for w in subgroup_words)
        quotient = class2_quotient(reduced)
        z_word = tracked[0]

    image = quotient.image(z_word)
    if image.order is None:
        location = ("abelianization"
                    if quotient.abelian_order(image.a) is None
                    else "derived part")
        verdict = "INFINITE_ORDER"
    else:
        location = None
        verdict = "INCONCLUSIVE"
    return Certificate(digest, subgroup, index, quotient.abelianization,
                       quotient.derived_part, image, location, verdict)
