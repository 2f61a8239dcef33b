"""Exponential distortion of F(a,b) in the HNN extension along an expanding endomorphism.

The base group is taken to be F(a,b) itself with generating set {a, b}, so
every length in the hyperbolicity and distortion arguments is an exact
free-group length.  The edge group is F(x,y) with ``x -> a, y -> b`` on one
side and ``x -> phi(a), y -> phi(b)`` on the other.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .stallings import MalnormalityReport, build_subgroup_graph, is_malnormal
from .words import Word, WordError, free_reduce, invert, multiply, parse_word, reduced_words

EDGE_ALPHABET = "xy"

LAMBDA = Fraction(3, 2)
GIRTH_FACTOR = 20


@dataclass(frozen=True)
class Endomorphism:
    """Free-group endomorphism given by the images of the generators."""

    rank: int
    images: tuple[Word, ...]

    def __post_init__(self) -> None:
        if len(self.images) != self.rank:
            raise WordError("need one image per generator")
        for w in self.images:
            if w.rank != self.rank:
                raise WordError("image rank mismatch")

    @property
    def expansion_certified(self) -> bool:
        """Each image of ``x`` starts and ends with ``x``.

        Then substituting into a reduced word never cancels, so lengths add.
        """
        return all(
            len(w) > 0 and w.letters[0] == k and w.letters[-1] == k
            for k, w in enumerate(self.images, start=1)
        )

    @classmethod
    def from_strings(cls, images: Sequence[str], rank: int | None = None) -> Endomorphism:
        rank = len(images) if rank is None else rank
        return cls(rank, tuple(parse_word(s, rank) for s in images))

    @classmethod
    def identity(cls, rank: int) -> Endomorphism:
        return cls(rank, tuple(Word((k,), rank) for k in range(1, rank + 1)))


def make_phi() -> Endomorphism:
    """``a -> ab^3a``, ``b -> ba^3b`` on F(a,b)."""
    return Endomorphism.from_strings(["abbba", "baaab"])


def apply_endo(phi: Endomorphism, w: Word) -> Word:
    if w.rank != phi.rank:
        raise WordError(f"rank mismatch: {w.rank} vs {phi.rank}")
    raw: list[int] = []
    for x in w.letters:
        img = phi.images[abs(x) - 1].letters
        if x > 0:
            raw.extend(img)
        else:
            raw.extend(-y for y in reversed(img))
    return free_reduce(raw, phi.rank)


def iterate_endo(phi: Endomorphism, w: Word, n: int) -> Word:
    for _ in range(n):
        w = apply_endo(phi, w)
    return w


def expansion_violations(phi: Endomorphism, radius: int) -> list[Word]:
    """Every ``f`` with ``l(f) <= radius`` and ``l(phi(f)) < 2 l(f)``."""
    return [
        f for f in reduced_words(phi.rank, radius) if len(apply_endo(phi, f)) < 2 * len(f)
    ]


def check_expansion(phi: Endomorphism, radius: int, exhaustive: bool = False) -> bool:
    """Whether ``l(phi(f)) >= 2 l(f)`` on the ball of the given radius.

    Certified endomorphisms whose images all have length at least two pass
    without a search unless ``exhaustive`` is set.
    """
    if not exhaustive and phi.expansion_certified and all(len(w) >= 2 for w in phi.images):
        return True
    for f in reduced_words(phi.rank, radius):
        if len(apply_endo(phi, f)) < 2 * len(f):
            return False
    return True


def check_image_malnormal(phi: Endomorphism) -> MalnormalityReport:
    return is_malnormal(build_subgroup_graph(list(phi.images), phi.rank))


@dataclass(frozen=True)
class DistortionRow:
    n: int
    inside_length: int
    outside_upper_bound: int
    paper_lower_bound: int

    @property
    def ratio(self) -> Fraction:
        return Fraction(self.inside_length, self.outside_upper_bound)

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "inside_length": self.inside_length,
            "outside_upper_bound": self.outside_upper_bound,
            "paper_lower_bound": self.paper_lower_bound,
        }


def _letter_counts(w: Word) -> list[int]:
    counts = [0] * w.rank
    for x in w.letters:
        counts[abs(x) - 1] += 1
    return counts


def iterated_lengths(phi: Endomorphism, w: Word, n_max: int) -> list[int]:
    """``l(phi^n(w))`` for ``n = 0..n_max``.

    With a certified endomorphism nothing cancels, so the generator counts
    evolve linearly and huge iterates never have to be written out.
    """
    if not phi.expansion_certified:
        out = [len(w)]
        for _ in range(n_max):
            w = apply_endo(phi, w)
            out.append(len(w))
        return out
    growth = [_letter_counts(img) for img in phi.images]
    counts = _letter_counts(w)
    out = [sum(counts)]
    for _ in range(n_max):
        new = [0] * phi.rank
        for i, c in enumerate(counts):
            if c:
                for j, g in enumerate(growth[i]):
                    new[j] += c * g
        counts = new
        out.append(sum(counts))
    return out


def distortion_table(phi: Endomorphism, n_max: int, base: Word | None = None) -> list[DistortionRow]:
    """Rows for ``f_n = t^-n a t^n = phi^n(a)``, ``n = 0..n_max``.

    The length of ``f_n`` in the HNN extension is bounded by the length of
    the word ``t^-n a t^n``, that is ``2n + l(a)``.
    """
    if n_max < 0:
        raise ValueError("n_max must be non-negative")
    if base is None:
        base = Word((1,), phi.rank)
    lengths = iterated_lengths(phi, base, n_max)
    return [
        DistortionRow(n, lengths[n], 2 * n + len(base), 2**n) for n in range(n_max + 1)
    ]


def refute_quasiconvexity(table: Sequence[DistortionRow], C: float | Fraction | int) -> int | None:
    """Smallest ``n >= 1`` with ``2^n > C (2n + l(a))``, or ``None``.

    At such ``n`` no constant ``C`` can bound the base-group length of
    ``f_n`` by ``C`` times its length in the extension.
    """
    if not table:
        raise ValueError("empty table")
    c = Fraction(C)
    for row in table:
        if row.n >= 1 and row.paper_lower_bound > c * row.outside_upper_bound:
            return row.n
    return None


@dataclass(frozen=True)
class Annulus:
    """Length-3 annulus ``a0^-1 alpha_ebar(c0) a0 = alpha_e(c1)``."""

    c0: Word
    a0: Word
    c1: Word

    @property
    def girth0(self) -> int:
        return len(self.c0)

    @property
    def girth1(self) -> int:
        return len(self.c1)

    @property
    def width(self) -> int:
        return len(self.a0)

    def verify(self, phi: Endomorphism | None = None) -> bool:
        phi = make_phi() if phi is None else phi
        lhs = multiply(multiply(invert(self.a0), alpha_ebar(self.c0, phi)), self.a0)
        return lhs == alpha_e(self.c1)


def alpha_e(c: Word) -> Word:
    # x -> a, y -> b: a renaming
    return Word(c.letters, c.rank)


def alpha_ebar(c: Word, phi: Endomorphism | None = None) -> Word:
    phi = make_phi() if phi is None else phi
    return apply_endo(phi, c)


def parse_edge_word(text: str) -> Word:
    """Parse a word of the edge group F(x,y)."""
    return parse_word(text, 2, EDGE_ALPHABET)


def annulus_step(c0: Word, a0: Word, phi: Endomorphism | None = None) -> Annulus:
    if not c0:
        raise WordError("c0 must be nontrivial")
    if c0.rank != 2 or a0.rank != 2:
        raise WordError("annuli live over F(x,y) and F(a,b)")
    w = multiply(multiply(invert(a0), alpha_ebar(c0, phi)), a0)
    # alpha_e is onto, so the far side always exists
    return Annulus(c0, a0, Word(w.letters, 2))


def girth_threshold(rho: int) -> int:
    """``H(rho) = 20 q(rho)`` with ``q(rho) = rho`` for the base F(a,b)."""
    return GIRTH_FACTOR * rho


def annulus_hyperbolicity_check(ann: Annulus, rho: int) -> bool:
    """``girth1 >= 3/2 girth0`` whenever ``girth0 >= H(rho)``; vacuous below."""
    if ann.width > rho:
        raise WordError(f"width {ann.width} exceeds rho={rho}")
    if ann.girth0 < girth_threshold(rho):
        return True
    return ann.girth1 >= LAMBDA * ann.girth0
